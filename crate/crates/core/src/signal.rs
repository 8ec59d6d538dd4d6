//! Seeded input and noise processes.
//!
//! Every generator is a pure function of its parameters and a
//! [`SeededStream`]. Streams are ChaCha20 instances keyed by the seed and
//! separated by the ChaCha stream id, so distinct ids from one seed never
//! overlap.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SeededStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl SeededStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    pub fn rng(&self) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// `count` i.i.d. `N(0, sigma^2)` samples.
pub fn white_gaussian(count: usize, sigma: f64, stream: SeededStream) -> Vec<f64> {
    debug_assert!(sigma >= 0.0);
    let mut rng = stream.rng();
    (0..count)
        .map(|_| sigma * rng.sample::<f64, _>(StandardNormal))
        .collect()
}

/// First-order autoregressive process `x(n) = pole x(n-1) + w(n)` driven by
/// unit-variance white Gaussian noise, with `x(-1) = 0`. The output is not
/// normalized; its stationary variance is `1 / (1 - pole^2)`.
pub fn ar1_colored(count: usize, pole: f64, stream: SeededStream) -> Result<Vec<f64>> {
    if pole.is_nan() || pole.abs() >= 1.0 {
        return Err(Error::invalid(format!(
            "AR(1) pole must satisfy |pole| < 1 (got {pole})"
        )));
    }
    let mut prev = 0.0;
    Ok(white_gaussian(count, 1.0, stream)
        .into_iter()
        .map(|w| {
            prev = pole * prev + w;
            prev
        })
        .collect())
}

/// Bernoulli-Gaussian impulses: each sample is `b(n) g(n)` with
/// `b ~ Bernoulli(p)` and `g ~ N(0, sigma^2)` independent.
pub fn bernoulli_gaussian(
    count: usize,
    probability: f64,
    sigma: f64,
    stream: SeededStream,
) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&probability) {
        return Err(Error::invalid(format!(
            "impulse probability must lie in [0, 1] (got {probability})"
        )));
    }
    let mut rng = stream.rng();
    Ok((0..count)
        .map(|_| {
            let on = rng.random::<f64>() < probability;
            let g: f64 = rng.sample(StandardNormal);
            if on {
                sigma * g
            } else {
                0.0
            }
        })
        .collect())
}

/// Mean of squares.
pub fn power(signal: &[f64]) -> f64 {
    if signal.is_empty() {
        return 0.0;
    }
    signal.iter().map(|v| v * v).sum::<f64>() / signal.len() as f64
}

/// The factor `c` such that `power(reference) / power(c * noise)` is exactly
/// `10^(target_db / 10)`.
pub fn ratio_scale(reference: &[f64], noise: &[f64], target_db: f64) -> Result<f64> {
    let p_ref = power(reference);
    let p_noise = power(noise);
    if p_ref.is_nan() || p_ref <= 0.0 {
        return Err(Error::invalid("reference signal has zero power"));
    }
    if p_noise.is_nan() || p_noise <= 0.0 {
        return Err(Error::invalid("noise signal has zero power"));
    }
    Ok((p_ref / (p_noise * 10f64.powf(target_db / 10.0))).sqrt())
}

/// Scales `noise` so that the realized reference-to-noise ratio is
/// `target_db` on these exact vectors.
pub fn scale_to_ratio(reference: &[f64], noise: &[f64], target_db: f64) -> Result<Vec<f64>> {
    let c = ratio_scale(reference, noise, target_db)?;
    Ok(noise.iter().map(|v| c * v).collect())
}

/// `10 log10(power(reference) / power(noise))`.
pub fn ratio_db(reference: &[f64], noise: &[f64]) -> f64 {
    10.0 * (power(reference) / power(noise)).log10()
}

/// Amplitude-modulated colored noise with pauses, a stand-in for speech when
/// no recording is at hand. Peak magnitude is 0.9.
pub fn speech_like(count: usize, sample_rate: u32, stream: SeededStream) -> Vec<f64> {
    let mut rng = stream.rng();
    let fs = f64::from(sample_rate.max(1));
    let mut out = Vec::with_capacity(count);

    let mut carrier = 0.0;
    let mut n = 0usize;
    while n < count {
        // talk spurt or pause, 0.15..0.6 s
        let len = ((0.15 + 0.45 * rng.random::<f64>()) * fs) as usize;
        let voiced = rng.random::<f64>() < 0.7;
        let syllable_hz = 3.0 + 3.0 * rng.random::<f64>();
        let phase = 2.0 * PI * rng.random::<f64>();
        for k in 0..len.max(1) {
            if n == count {
                break;
            }
            let w: f64 = rng.sample(StandardNormal);
            carrier = 0.95 * carrier + w;
            let env = if voiced {
                let s = (2.0 * PI * syllable_hz * k as f64 / fs + phase).sin();
                s * s
            } else {
                0.02
            };
            out.push(env * carrier);
            n += 1;
        }
    }

    let peak = out.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak > 0.0 {
        let g = 0.9 / peak;
        out.iter_mut().for_each(|v| *v *= g);
    }
    out
}

/// Background Gaussian noise plus Bernoulli-Gaussian impulses.
///
/// When `snr_db` / `sir_db` are set, the corresponding component is scaled
/// against a reference signal (the noiseless echo) using its empirical power
/// over the whole record, and the realized standard deviation is written
/// back into `background_sigma` / `impulse_sigma`. When unset, the sigma is
/// used as given; a zero sigma disables the component.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseModel {
    pub background_sigma: f64,
    pub impulse_probability: f64,
    pub impulse_sigma: f64,
    pub snr_db: Option<f64>,
    pub sir_db: Option<f64>,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self {
            background_sigma: 0.0,
            impulse_probability: 0.1,
            impulse_sigma: 0.0,
            snr_db: Some(40.0),
            sir_db: Some(0.0),
        }
    }
}

/// One realization of `v(n)` split into its two components.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseRealization {
    pub background: Vec<f64>,
    pub impulses: Vec<f64>,
    /// The model with sigmas resolved to the values actually used.
    pub model: NoiseModel,
}

impl NoiseRealization {
    pub fn total(&self) -> Vec<f64> {
        self.background
            .iter()
            .zip(&self.impulses)
            .map(|(b, i)| b + i)
            .collect()
    }
}

impl NoiseModel {
    /// Background only, at a fixed SNR.
    pub fn background_only(snr_db: f64) -> Self {
        Self {
            impulse_probability: 0.0,
            sir_db: None,
            snr_db: Some(snr_db),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.impulse_probability) {
            return Err(Error::invalid(format!(
                "impulse_probability must lie in [0, 1] (got {})",
                self.impulse_probability
            )));
        }
        if !(self.background_sigma >= 0.0 && self.impulse_sigma >= 0.0) {
            return Err(Error::invalid("noise sigmas must be >= 0"));
        }
        for db in [self.snr_db, self.sir_db].into_iter().flatten() {
            if !db.is_finite() {
                return Err(Error::invalid("SNR/SIR must be finite"));
            }
        }
        Ok(())
    }

    pub fn realize(
        &self,
        reference: &[f64],
        background: SeededStream,
        impulses: SeededStream,
    ) -> Result<NoiseRealization> {
        self.validate()?;
        let count = reference.len();
        let mut model = self.clone();

        let mut bg = white_gaussian(count, 1.0, background);
        match self.snr_db {
            Some(db) => {
                let c = ratio_scale(reference, &bg, db)?;
                bg.iter_mut().for_each(|v| *v *= c);
                model.background_sigma = c;
            }
            None => bg.iter_mut().for_each(|v| *v *= self.background_sigma),
        }

        let mut imp = bernoulli_gaussian(count, self.impulse_probability, 1.0, impulses)?;
        match self.sir_db {
            // A record without a single impulse has nothing to scale.
            Some(db) if power(&imp) > 0.0 => {
                let c = ratio_scale(reference, &imp, db)?;
                imp.iter_mut().for_each(|v| *v *= c);
                model.impulse_sigma = c;
            }
            Some(_) => model.impulse_sigma = 0.0,
            None => imp.iter_mut().for_each(|v| *v *= self.impulse_sigma),
        }

        Ok(NoiseRealization {
            background: bg,
            impulses: imp,
            model,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn variance(v: &[f64]) -> f64 {
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / v.len() as f64
    }

    #[test]
    fn white_gaussian_basics() {
        let s = SeededStream::new(7, 0);
        assert!(white_gaussian(0, 1.0, s).is_empty());
        assert_eq!(white_gaussian(100, 1.0, s), white_gaussian(100, 1.0, s));
        let v = white_gaussian(1_000_000, 1.0, s);
        assert!((variance(&v) - 1.0).abs() < 0.01, "{}", variance(&v));
    }

    #[test]
    fn ar1_matches_white_at_zero_pole() {
        let s = SeededStream::new(3, 1);
        assert_eq!(
            ar1_colored(1000, 0.0, s).unwrap(),
            white_gaussian(1000, 1.0, s)
        );
        let x = ar1_colored(10, 0.8, s).unwrap();
        assert_eq!(x[0], white_gaussian(1, 1.0, s)[0]);
    }

    #[test]
    fn ar1_stationary_variance() {
        let x = ar1_colored(1_000_000, 0.8, SeededStream::new(11, 0)).unwrap();
        let expected = 1.0 / (1.0 - 0.64);
        assert!((variance(&x) - expected).abs() / expected < 0.02);
    }

    #[test]
    fn ar1_rejects_unstable_pole() {
        assert!(ar1_colored(10, 1.0, SeededStream::new(0, 0)).is_err());
        assert!(ar1_colored(10, -1.5, SeededStream::new(0, 0)).is_err());
        assert!(ar1_colored(10, f64::NAN, SeededStream::new(0, 0)).is_err());
    }

    #[test]
    fn bernoulli_gaussian_rates() {
        let s = SeededStream::new(5, 2);
        assert!(bernoulli_gaussian(1000, 0.0, 1.0, s)
            .unwrap()
            .iter()
            .all(|&v| v == 0.0));
        assert!(bernoulli_gaussian(1000, 1.0, 1.0, s)
            .unwrap()
            .iter()
            .all(|&v| v != 0.0));
        let v = bernoulli_gaussian(1_000_000, 0.1, 1.0, s).unwrap();
        let frac = v.iter().filter(|&&x| x != 0.0).count() as f64 / v.len() as f64;
        assert!((0.095..=0.105).contains(&frac), "{frac}");
        assert!(bernoulli_gaussian(10, 1.1, 1.0, s).is_err());
    }

    #[test]
    fn scale_to_ratio_examples() {
        let r = vec![1.0, -1.0, 1.0, -1.0];
        let n = vec![-1.0, 1.0, 1.0, -1.0];
        assert_eq!(scale_to_ratio(&r, &n, 0.0).unwrap(), n);

        let out = scale_to_ratio(&r, &n, 40.0).unwrap();
        assert!((power(&out) - 1e-4 * power(&r)).abs() < 1e-18);

        let r2: Vec<f64> = r.iter().map(|v| 2.0 * v).collect();
        let out2 = scale_to_ratio(&r2, &n, 40.0).unwrap();
        assert!((power(&out2) / power(&out) - 4.0).abs() < 1e-12);

        assert!(scale_to_ratio(&[0.0; 4], &n, 0.0).is_err());
        assert!(scale_to_ratio(&r, &[0.0; 4], 0.0).is_err());
    }

    #[test]
    fn realized_ratios_are_exact() {
        let reference = ar1_colored(5000, 0.8, SeededStream::new(1, 0)).unwrap();
        let noise = NoiseModel::default()
            .realize(&reference, SeededStream::new(1, 1), SeededStream::new(1, 2))
            .unwrap();
        assert!((ratio_db(&reference, &noise.background) - 40.0).abs() < 1e-9);
        assert!((ratio_db(&reference, &noise.impulses) - 0.0).abs() < 1e-9);
        assert!(noise.model.background_sigma > 0.0);
    }

    #[test]
    fn substreams_are_uncorrelated() {
        let a = white_gaussian(1_000_000, 1.0, SeededStream::new(9, 0));
        let b = white_gaussian(1_000_000, 1.0, SeededStream::new(9, 1));
        let r = a.iter().zip(&b).map(|(x, y)| x * y).sum::<f64>()
            / (a.iter().map(|x| x * x).sum::<f64>() * b.iter().map(|y| y * y).sum::<f64>()).sqrt();
        assert!(r.abs() < 0.01, "{r}");
    }

    #[test]
    fn speech_like_is_bounded_and_deterministic() {
        let s = SeededStream::new(4, 0);
        let a = speech_like(16000, 8000, s);
        assert_eq!(a, speech_like(16000, 8000, s));
        assert!(a.iter().all(|v| v.abs() <= 0.9 + 1e-12));
        assert!(power(&a) > 0.0);
    }
}
