//! Command-line front end: configuration, WAV ingestion and output files.

pub mod config;
pub mod output;
pub mod wav;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Parser;

use crate::error::{Error, Result};
use crate::harness::run_ensemble;
use crate::signal::{speech_like, SeededStream};

use self::config::RunSpec;
use self::output::{
    emit_csv, emit_plot_data, RunManifest, INITIAL_PATH_FILE, MANIFEST_FILE, PLOT_FILE,
    SWITCHED_PATH_FILE, TRACE_FILE,
};

pub const EXIT_OK: i32 = 0;
/// Reserved by the argument parser for malformed flags.
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_IO: i32 = 4;
pub const EXIT_WAV: i32 = 5;

const EXIT_CODES_HELP: &str = "\
Exit status:
  0  success
  2  bad command-line flags
  3  invalid configuration (unknown key, syntax error, violated constraint)
  4  file could not be read or written
  5  WAV input is not mono 16-bit PCM";

/// Runs APSA, MIP-APSA and BS-MIP-APSA on a block-sparse system
/// identification experiment and writes the ensemble misalignment curves.
#[derive(Debug, Parser)]
#[command(name = "bsmip", version, after_help = EXIT_CODES_HELP)]
pub struct Args {
    /// Experiment configuration (`key = value` lines).
    #[arg(long, value_name = "PATH", required_unless_present = "synth_speech")]
    pub config: Option<PathBuf>,

    /// Output directory; created if missing.
    #[arg(long, value_name = "DIR", required_unless_present = "synth_speech")]
    pub out: Option<PathBuf>,

    /// Overrides the configured base seed.
    #[arg(long)]
    pub seed: Option<u64>,

    /// Overrides the configured number of trials.
    #[arg(long)]
    pub trials: Option<usize>,

    /// Suppresses progress output.
    #[arg(long)]
    pub quiet: bool,

    /// Writes a synthetic speech-like mono PCM16 WAV file and exits.
    #[arg(long, value_name = "PATH")]
    pub synth_speech: Option<PathBuf>,

    /// Length of the synthetic WAV in samples.
    #[arg(long, default_value_t = 80_000, requires = "synth_speech")]
    pub synth_samples: usize,

    /// Sample rate of the synthetic WAV.
    #[arg(long, default_value_t = 8_000, requires = "synth_speech")]
    pub synth_rate: u32,
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidParameter(_) | Error::UnknownKey { .. } | Error::Syntax { .. } => EXIT_CONFIG,
        Error::Io { .. } => EXIT_IO,
        Error::WavFormat { .. } => EXIT_WAV,
    }
}

/// Parses flags from the process arguments and runs; returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match run(&args) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run(args: &Args) -> Result<()> {
    if let Some(path) = &args.synth_speech {
        let samples = speech_like(
            args.synth_samples,
            args.synth_rate,
            SeededStream::new(args.seed.unwrap_or(0), 0),
        );
        wav::write_wav(path, &samples, args.synth_rate)?;
        if !args.quiet {
            println!("wrote {} samples to {}", samples.len(), path.display());
        }
        return Ok(());
    }

    let (Some(config_path), Some(out)) = (&args.config, &args.out) else {
        return Err(Error::invalid("--config and --out are required"));
    };
    let mut spec = RunSpec::load(config_path)?;
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    if let Some(trials) = args.trials {
        spec.trials = trials;
    }
    let config = spec.build()?;

    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    if !args.quiet {
        println!(
            "running {} trial(s) x {} iterations, L = {}, algorithms: {}",
            config.trials,
            config.iterations,
            config.params.filter_length,
            config
                .algorithms
                .iter()
                .map(|a| a.name())
                .collect::<Vec<_>>()
                .join(", ")
        );
    }

    let started = Instant::now();
    let trace = run_ensemble(&config)?;
    let duration = started.elapsed();

    emit_csv(&trace, &out.join(TRACE_FILE))?;
    emit_plot_data(&trace, &out.join(PLOT_FILE))?;
    let mut outputs = vec![TRACE_FILE, PLOT_FILE, INITIAL_PATH_FILE];
    write_text(
        &out.join(INITIAL_PATH_FILE),
        &config.schedule.initial().to_text(),
    )?;
    if config.schedule.switch_iteration().is_some() {
        write_text(
            &out.join(SWITCHED_PATH_FILE),
            &config.schedule.switched().to_text(),
        )?;
        outputs.push(SWITCHED_PATH_FILE);
    }

    let manifest = RunManifest {
        config_echo: spec.to_text(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        base_seed: spec.seed,
        duration,
        outputs: outputs.into_iter().map(PathBuf::from).collect(),
    };
    manifest.write(&out.join(MANIFEST_FILE))?;

    if !args.quiet {
        for (a, curve) in trace.algorithms().iter().zip(trace.curves()) {
            println!(
                "{a:>12}: final misalignment {:.2} dB",
                curve[curve.len() - 1]
            );
        }
        println!(
            "wrote {} in {:.2} s",
            out.join(TRACE_FILE).display(),
            duration.as_secs_f64()
        );
    }
    Ok(())
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
