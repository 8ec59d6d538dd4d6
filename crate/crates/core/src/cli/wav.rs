//! Mono 16-bit PCM WAV input and output.

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use crate::error::{Error, Result};

fn format_error(path: &Path, message: impl Into<String>) -> Error {
    Error::WavFormat {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

// Read failures after a successful open mean a truncated or corrupt file.
fn map_hound(path: &Path, err: hound::Error) -> Error {
    match err {
        hound::Error::IoError(e) => format_error(path, format!("truncated or corrupt file ({e})")),
        other => format_error(path, other.to_string()),
    }
}

/// Reads a mono PCM16 file of any sample rate, mapping samples to `[-1, 1)`
/// by dividing by 32768.
pub fn load_wav(path: &Path) -> Result<Vec<f64>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = WavReader::new(BufReader::new(file)).map_err(|e| map_hound(path, e))?;
    let spec = reader.spec();
    if spec.channels != 1 {
        return Err(format_error(
            path,
            format!("expected 1 channel, found {}", spec.channels),
        ));
    }
    if spec.sample_format != SampleFormat::Int || spec.bits_per_sample != 16 {
        return Err(format_error(
            path,
            format!(
                "expected 16-bit integer PCM, found {}-bit {:?}",
                spec.bits_per_sample, spec.sample_format
            ),
        ));
    }
    reader
        .into_samples::<i16>()
        .map(|s| {
            s.map(|v| f64::from(v) / 32768.0)
                .map_err(|e| map_hound(path, e))
        })
        .collect()
}

/// Writes samples in `[-1, 1]` as mono PCM16, saturating at the range ends.
pub fn write_wav(path: &Path, samples: &[f64], sample_rate: u32) -> Result<()> {
    let spec = WavSpec {
        channels: 1,
        sample_rate,
        bits_per_sample: 16,
        sample_format: SampleFormat::Int,
    };
    let write_err = |e: hound::Error| match e {
        hound::Error::IoError(e) => Error::io(path, e),
        other => format_error(path, other.to_string()),
    };
    let mut writer = WavWriter::create(path, spec).map_err(write_err)?;
    for &s in samples {
        let v = (s * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
        writer.write_sample(v).map_err(write_err)?;
    }
    writer.finalize().map_err(write_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_raw(path: &Path, spec: WavSpec, samples: &[i16]) {
        let mut w = WavWriter::create(path, spec).unwrap();
        for &s in samples {
            w.write_sample(s).unwrap();
        }
        w.finalize().unwrap();
    }

    fn mono16() -> WavSpec {
        WavSpec {
            channels: 1,
            sample_rate: 8000,
            bits_per_sample: 16,
            sample_format: SampleFormat::Int,
        }
    }

    #[test]
    fn sample_mapping() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.wav");
        write_raw(&p, mono16(), &[0, 16384, -32768, 32767]);
        let v = load_wav(&p).unwrap();
        assert_eq!(v, vec![0.0, 0.5, -1.0, 32767.0 / 32768.0]);

        let z = dir.path().join("z.wav");
        write_raw(&z, mono16(), &[0; 100]);
        assert_eq!(load_wav(&z).unwrap(), vec![0.0; 100]);
    }

    #[test]
    fn rejects_stereo_and_other_formats() {
        let dir = tempfile::tempdir().unwrap();
        let stereo = dir.path().join("s.wav");
        write_raw(
            &stereo,
            WavSpec {
                channels: 2,
                ..mono16()
            },
            &[1, 2, 3, 4],
        );
        assert!(matches!(load_wav(&stereo), Err(Error::WavFormat { .. })));

        let float = dir.path().join("f.wav");
        let mut w = WavWriter::create(
            &float,
            WavSpec {
                bits_per_sample: 32,
                sample_format: SampleFormat::Float,
                ..mono16()
            },
        )
        .unwrap();
        w.write_sample(0.5f32).unwrap();
        w.finalize().unwrap();
        assert!(matches!(load_wav(&float), Err(Error::WavFormat { .. })));

        let junk = dir.path().join("j.wav");
        std::fs::write(&junk, b"RIFF1234WAVEjunkjunk").unwrap();
        let err = load_wav(&junk);
        assert!(matches!(err, Err(Error::WavFormat { .. })), "{err:?}");

        assert!(matches!(
            load_wav(&dir.path().join("missing.wav")),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn write_then_load() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("w.wav");
        write_wav(&p, &[0.0, 0.5, -1.0, 1.0], 16000).unwrap();
        assert_eq!(
            load_wav(&p).unwrap(),
            vec![0.0, 0.5, -1.0, 32767.0 / 32768.0]
        );
    }
}
