//! System-identification experiments: single trials and seeded ensembles.
//!
//! A trial draws its input and noise from substreams of
//! `(base_seed, trial_index)`, synthesizes the desired signal through the
//! scheduled echo path and runs every selected algorithm on the same samples.
//! The recorded misalignment at iteration `n` is that of the weights entering
//! iteration `n`, measured against the path active at `n`.

use std::path::PathBuf;

use rayon::prelude::*;

use crate::cli::wav::load_wav;
use crate::echo_path::{desired_signal, PathSchedule};
use crate::error::{Error, Result};
use crate::filters::{AdaptiveFilter, Algorithm, FilterParams};
use crate::signal::{ar1_colored, white_gaussian, NoiseModel, NoiseRealization, SeededStream};

/// Lower clamp of the misalignment in dB.
pub const MISALIGNMENT_FLOOR_DB: f64 = -300.0;

const STREAMS_PER_TRIAL: u64 = 4;
const INPUT_STREAM: u64 = 0;
const BACKGROUND_STREAM: u64 = 1;
const IMPULSE_STREAM: u64 = 2;

#[derive(Clone, Debug, PartialEq)]
pub enum InputKind {
    White,
    Ar1 {
        pole: f64,
    },
    /// Mono PCM16 file; the same recording drives every trial.
    Wav(PathBuf),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub params: FilterParams,
    pub algorithms: Vec<Algorithm>,
    pub schedule: PathSchedule,
    pub input: InputKind,
    pub noise: NoiseModel,
    pub iterations: usize,
    pub trials: usize,
    pub base_seed: u64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.noise.validate()?;
        if self.algorithms.is_empty() {
            return Err(Error::invalid("at least one algorithm must be selected"));
        }
        for (i, a) in self.algorithms.iter().enumerate() {
            if self.algorithms[..i].contains(a) {
                return Err(Error::invalid(format!("algorithm {a} listed twice")));
            }
        }
        if self.iterations == 0 {
            return Err(Error::invalid("iterations must be > 0"));
        }
        if self.trials == 0 {
            return Err(Error::invalid("trials must be > 0"));
        }
        if self.schedule.len() != self.params.filter_length {
            return Err(Error::invalid(format!(
                "echo path length ({}) must equal filter_length ({})",
                self.schedule.len(),
                self.params.filter_length
            )));
        }
        if let InputKind::Ar1 { pole } = self.input {
            if pole.is_nan() || pole.abs() >= 1.0 {
                return Err(Error::invalid(format!(
                    "AR(1) pole must satisfy |pole| < 1 (got {pole})"
                )));
            }
        }
        Ok(())
    }

    fn stream(&self, trial_index: usize, kind: u64) -> SeededStream {
        SeededStream::new(
            self.base_seed,
            trial_index as u64 * STREAMS_PER_TRIAL + kind,
        )
    }
}

/// Per-iteration normalized misalignment (dB) for each algorithm.
#[derive(Clone, Debug, PartialEq)]
pub struct MisalignmentTrace {
    algorithms: Vec<Algorithm>,
    curves: Vec<Vec<f64>>,
    max_update_norm: Vec<f64>,
    trials: usize,
}

impl MisalignmentTrace {
    pub fn algorithms(&self) -> &[Algorithm] {
        &self.algorithms
    }

    pub fn curves(&self) -> &[Vec<f64>] {
        &self.curves
    }

    pub fn curve(&self, algorithm: Algorithm) -> Option<&[f64]> {
        self.algorithms
            .iter()
            .position(|&a| a == algorithm)
            .map(|i| self.curves[i].as_slice())
    }

    /// Largest `||h(n) - h(n-1)||_2` seen by each algorithm.
    pub fn max_update_norm(&self, algorithm: Algorithm) -> Option<f64> {
        self.algorithms
            .iter()
            .position(|&a| a == algorithm)
            .map(|i| self.max_update_norm[i])
    }

    pub fn iterations(&self) -> usize {
        self.curves.first().map_or(0, Vec::len)
    }

    pub fn trials(&self) -> usize {
        self.trials
    }
}

/// `10 log10(||h - h_hat||^2 / ||h||^2)`, clamped at
/// [`MISALIGNMENT_FLOOR_DB`].
pub fn misalignment_db(h: &[f64], h_hat: &[f64]) -> Result<f64> {
    if h.len() != h_hat.len() {
        return Err(Error::invalid("misalignment needs equal-length vectors"));
    }
    let norm_sq: f64 = h.iter().map(|t| t * t).sum();
    if norm_sq.is_nan() || norm_sq <= 0.0 {
        return Err(Error::invalid("true path has zero norm"));
    }
    Ok(misalignment_with_norm(h, h_hat, norm_sq))
}

fn misalignment_with_norm(h: &[f64], h_hat: &[f64], norm_sq: f64) -> f64 {
    let err: f64 = h.iter().zip(h_hat).map(|(a, b)| (a - b) * (a - b)).sum();
    (10.0 * (err / norm_sq).log10()).max(MISALIGNMENT_FLOOR_DB)
}

/// Everything a trial feeds to the filters.
#[derive(Clone, Debug)]
pub struct TrialSignals {
    pub input: Vec<f64>,
    /// Noiseless `x^T h` through the scheduled path.
    pub echo: Vec<f64>,
    pub noise: NoiseRealization,
    /// `echo + noise`
    pub desired: Vec<f64>,
}

/// Noiseless echo `x(n)^T h(n)` for every iteration, with zero history
/// before the first sample.
pub fn echo_signal(input: &[f64], schedule: &PathSchedule) -> Vec<f64> {
    let taps = schedule.len();
    let count = input.len();
    // reversed input padded with zeros: the newest-first regressor of
    // iteration n is rev[count-1-n .. count-1-n+taps]
    let mut rev: Vec<f64> = input.iter().rev().copied().collect();
    rev.resize(count + taps.saturating_sub(1), 0.0);
    (0..count)
        .map(|n| {
            let start = count - 1 - n;
            desired_signal(&rev[start..start + taps], schedule.path_at(n).taps(), 0.0)
        })
        .collect()
}

pub fn synthesize(config: &ExperimentConfig, trial_index: usize) -> Result<TrialSignals> {
    let count = config.iterations;
    let input = match &config.input {
        InputKind::White => white_gaussian(count, 1.0, config.stream(trial_index, INPUT_STREAM)),
        InputKind::Ar1 { pole } => {
            ar1_colored(count, *pole, config.stream(trial_index, INPUT_STREAM))?
        }
        InputKind::Wav(path) => {
            let mut samples = load_wav(path)?;
            if samples.len() < count {
                return Err(Error::invalid(format!(
                    "{} holds {} samples but {} iterations were requested",
                    path.display(),
                    samples.len(),
                    count
                )));
            }
            samples.truncate(count);
            samples
        }
    };
    let echo = echo_signal(&input, &config.schedule);
    let noise = config.noise.realize(
        &echo,
        config.stream(trial_index, BACKGROUND_STREAM),
        config.stream(trial_index, IMPULSE_STREAM),
    )?;
    let desired = echo
        .iter()
        .zip(noise.background.iter().zip(&noise.impulses))
        .map(|(e, (b, i))| e + b + i)
        .collect();
    Ok(TrialSignals {
        input,
        echo,
        noise,
        desired,
    })
}

/// Runs each algorithm over the given sample streams. Parameters are checked
/// with [`FilterParams::validate_relaxed`], so the degenerate limits are
/// allowed here.
pub fn run_signals(
    params: &FilterParams,
    algorithms: &[Algorithm],
    schedule: &PathSchedule,
    input: &[f64],
    desired: &[f64],
) -> Result<MisalignmentTrace> {
    if input.len() != desired.len() {
        return Err(Error::invalid("input and desired signals differ in length"));
    }
    if schedule.len() != params.filter_length {
        return Err(Error::invalid("echo path length must equal filter_length"));
    }
    let norms = [schedule.initial().norm_sq(), schedule.switched().norm_sq()];

    let mut curves = Vec::with_capacity(algorithms.len());
    let mut max_update_norm = Vec::with_capacity(algorithms.len());
    for &algorithm in algorithms {
        let mut filter = AdaptiveFilter::new_relaxed(algorithm, params.clone())?;
        let mut curve = Vec::with_capacity(input.len());
        let mut max_step = 0.0f64;
        for (n, (&x, &y)) in input.iter().zip(desired).enumerate() {
            let path = schedule.path_at(n);
            let norm_sq = if std::ptr::eq(path, schedule.initial()) {
                norms[0]
            } else {
                norms[1]
            };
            curve.push(misalignment_with_norm(
                path.taps(),
                filter.weights(),
                norm_sq,
            ));
            max_step = max_step.max(filter.step(x, y).update_norm);
        }
        curves.push(curve);
        max_update_norm.push(max_step);
    }
    Ok(MisalignmentTrace {
        algorithms: algorithms.to_vec(),
        curves,
        max_update_norm,
        trials: 1,
    })
}

pub fn run_trial(config: &ExperimentConfig, trial_index: usize) -> Result<MisalignmentTrace> {
    config.validate()?;
    let signals = synthesize(config, trial_index)?;
    run_signals(
        &config.params,
        &config.algorithms,
        &config.schedule,
        &signals.input,
        &signals.desired,
    )
}

/// Mean of the per-trial dB traces. Trials run in parallel; the sum is taken
/// in trial order so the result does not depend on scheduling.
pub fn run_ensemble(config: &ExperimentConfig) -> Result<MisalignmentTrace> {
    config.validate()?;
    let traces = (0..config.trials)
        .into_par_iter()
        .map(|t| run_trial(config, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(average(&traces))
}

/// Averages traces in dB, iteration by iteration.
pub fn average(traces: &[MisalignmentTrace]) -> MisalignmentTrace {
    let first = &traces[0];
    let mut curves = first.curves.clone();
    let mut max_update_norm = first.max_update_norm.clone();
    for trace in &traces[1..] {
        for (acc, curve) in curves.iter_mut().zip(&trace.curves) {
            acc.iter_mut().zip(curve).for_each(|(a, v)| *a += v);
        }
        for (m, v) in max_update_norm.iter_mut().zip(&trace.max_update_norm) {
            *m = m.max(*v);
        }
    }
    let count = traces.len() as f64;
    for curve in &mut curves {
        curve.iter_mut().for_each(|v| *v /= count);
    }
    MisalignmentTrace {
        algorithms: first.algorithms.clone(),
        curves,
        max_update_norm,
        trials: traces.iter().map(|t| t.trials).sum(),
    }
}
