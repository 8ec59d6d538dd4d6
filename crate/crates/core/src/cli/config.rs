//! Flat `key = value` experiment configuration.
//!
//! `#` starts a comment. Every key is optional; see [`RunSpec::default`] for
//! the defaults. Cluster lists are written `offset:length,offset:length`.
//! [`RunSpec::to_text`] echoes every resolved key, and parsing the echo
//! yields the same `RunSpec`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::echo_path::{
    format_clusters, make_block_sparse, parse_clusters, Cluster, EchoPath, PathSchedule,
};
use crate::error::{Error, Result};
use crate::filters::{Algorithm, FilterParams, GainVariant};
use crate::harness::{ExperimentConfig, InputKind};
use crate::signal::{NoiseModel, SeededStream};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InputSelect {
    White,
    Ar1,
    Wav,
}

impl InputSelect {
    fn name(self) -> &'static str {
        match self {
            InputSelect::White => "white",
            InputSelect::Ar1 => "ar1",
            InputSelect::Wav => "wav",
        }
    }
}

impl FromStr for InputSelect {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "white" => Ok(InputSelect::White),
            "ar1" => Ok(InputSelect::Ar1),
            "wav" => Ok(InputSelect::Wav),
            other => Err(Error::invalid(format!(
                "unknown input `{other}` (expected white, ar1 or wav)"
            ))),
        }
    }
}

/// Every configurable value, resolved.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSpec {
    pub params: FilterParams,
    pub algorithms: Vec<Algorithm>,
    pub input: InputSelect,
    pub pole: f64,
    pub wav_path: Option<PathBuf>,
    /// `None` means "off": use `background_sigma` as an absolute level.
    pub snr_db: Option<f64>,
    pub sir_db: Option<f64>,
    pub background_sigma: f64,
    pub impulse_sigma: f64,
    pub impulse_probability: f64,
    pub iterations: usize,
    pub switch_iteration: Option<usize>,
    pub initial_clusters: Vec<Cluster>,
    pub switched_clusters: Vec<Cluster>,
    /// Tap files override the generated clusters when set.
    pub initial_path_file: Option<PathBuf>,
    pub switched_path_file: Option<PathBuf>,
    pub path_seed: u64,
    pub normalize_path: bool,
    pub trials: usize,
    pub seed: u64,
}

impl Default for RunSpec {
    fn default() -> Self {
        Self {
            params: FilterParams::default(),
            algorithms: Algorithm::ALL.to_vec(),
            input: InputSelect::Ar1,
            pole: 0.8,
            wav_path: None,
            snr_db: Some(40.0),
            sir_db: Some(0.0),
            background_sigma: 0.0,
            impulse_sigma: 0.0,
            impulse_probability: 0.1,
            iterations: 100_000,
            switch_iteration: Some(50_000),
            initial_clusters: vec![Cluster::new(100, 64)],
            switched_clusters: vec![Cluster::new(60, 32), Cluster::new(300, 32)],
            initial_path_file: None,
            switched_path_file: None,
            path_seed: 1,
            normalize_path: true,
            trials: 10,
            seed: 0,
        }
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> std::result::Result<T, String> {
    value
        .parse()
        .map_err(|_| format!("invalid value `{value}` for {key}"))
}

fn parse_optional<T: FromStr>(
    key: &str,
    value: &str,
    off: &str,
) -> std::result::Result<Option<T>, String> {
    if value.eq_ignore_ascii_case(off) {
        Ok(None)
    } else {
        parse_value(key, value).map(Some)
    }
}

fn parse_bool(key: &str, value: &str) -> std::result::Result<bool, String> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(format!(
            "invalid value `{value}` for {key} (expected true or false)"
        )),
    }
}

fn optional_path(value: &str) -> Option<PathBuf> {
    (!value.is_empty()).then(|| PathBuf::from(value))
}

fn show_optional<T: ToString>(v: &Option<T>, off: &str) -> String {
    v.as_ref().map_or_else(|| off.to_string(), T::to_string)
}

fn show_path(p: &Option<PathBuf>) -> String {
    p.as_ref()
        .map_or_else(String::new, |p| p.display().to_string())
}

impl RunSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let mut spec = RunSpec::default();
        let mut seen: Vec<String> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Syntax {
                line: line_no,
                message: format!("expected `key = value`, found `{line}`"),
            })?;
            let key = key.trim();
            let value = value.trim();
            if seen.iter().any(|k| k == key) {
                return Err(Error::Syntax {
                    line: line_no,
                    message: format!("duplicate key `{key}`"),
                });
            }
            spec.apply(key, value, line_no)?;
            seen.push(key.to_string());
        }
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    fn apply(&mut self, key: &str, value: &str, line: usize) -> Result<()> {
        let syntax = |message: String| Error::Syntax { line, message };
        let p = &mut self.params;
        match key {
            "filter_length" => p.filter_length = parse_value(key, value).map_err(syntax)?,
            "projection_order" => p.projection_order = parse_value(key, value).map_err(syntax)?,
            "block_length" => p.block_length = parse_value(key, value).map_err(syntax)?,
            "step_size" => p.step_size = parse_value(key, value).map_err(syntax)?,
            "alpha" => p.alpha = parse_value(key, value).map_err(syntax)?,
            "gain_regularizer" => p.gain_regularizer = parse_value(key, value).map_err(syntax)?,
            "update_regularizer" => {
                p.update_regularizer = parse_value(key, value).map_err(syntax)?
            }
            "gain_variant" => {
                p.gain_variant = value
                    .parse::<GainVariant>()
                    .map_err(|e| syntax(e.to_string()))?
            }
            "algorithms" => {
                self.algorithms = value
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(str::parse)
                    .collect::<Result<_>>()
                    .map_err(|e| syntax(e.to_string()))?
            }
            "input" => self.input = value.parse().map_err(|e: Error| syntax(e.to_string()))?,
            "pole" => self.pole = parse_value(key, value).map_err(syntax)?,
            "wav_path" => self.wav_path = optional_path(value),
            "snr_db" => self.snr_db = parse_optional(key, value, "off").map_err(syntax)?,
            "sir_db" => self.sir_db = parse_optional(key, value, "off").map_err(syntax)?,
            "background_sigma" => {
                self.background_sigma = parse_value(key, value).map_err(syntax)?
            }
            "impulse_sigma" => self.impulse_sigma = parse_value(key, value).map_err(syntax)?,
            "impulse_probability" => {
                self.impulse_probability = parse_value(key, value).map_err(syntax)?
            }
            "iterations" => self.iterations = parse_value(key, value).map_err(syntax)?,
            "switch_iteration" => {
                self.switch_iteration = parse_optional(key, value, "none").map_err(syntax)?
            }
            "initial_clusters" => {
                self.initial_clusters = parse_clusters(value).map_err(|e| syntax(e.to_string()))?
            }
            "switched_clusters" => {
                self.switched_clusters = parse_clusters(value).map_err(|e| syntax(e.to_string()))?
            }
            "initial_path_file" => self.initial_path_file = optional_path(value),
            "switched_path_file" => self.switched_path_file = optional_path(value),
            "path_seed" => self.path_seed = parse_value(key, value).map_err(syntax)?,
            "normalize_path" => self.normalize_path = parse_bool(key, value).map_err(syntax)?,
            "trials" => self.trials = parse_value(key, value).map_err(syntax)?,
            "seed" => self.seed = parse_value(key, value).map_err(syntax)?,
            _ => {
                return Err(Error::UnknownKey {
                    key: key.to_string(),
                    line,
                })
            }
        }
        Ok(())
    }

    /// All resolved keys, one per line, in a fixed order.
    pub fn to_text(&self) -> String {
        let p = &self.params;
        let algorithms = self
            .algorithms
            .iter()
            .map(|a| a.name())
            .collect::<Vec<_>>()
            .join(",");
        let entries: Vec<(&str, String)> = vec![
            ("filter_length", p.filter_length.to_string()),
            ("projection_order", p.projection_order.to_string()),
            ("block_length", p.block_length.to_string()),
            ("step_size", p.step_size.to_string()),
            ("alpha", p.alpha.to_string()),
            ("gain_regularizer", p.gain_regularizer.to_string()),
            ("update_regularizer", p.update_regularizer.to_string()),
            ("gain_variant", p.gain_variant.to_string()),
            ("algorithms", algorithms),
            ("input", self.input.name().to_string()),
            ("pole", self.pole.to_string()),
            ("wav_path", show_path(&self.wav_path)),
            ("snr_db", show_optional(&self.snr_db, "off")),
            ("sir_db", show_optional(&self.sir_db, "off")),
            ("background_sigma", self.background_sigma.to_string()),
            ("impulse_sigma", self.impulse_sigma.to_string()),
            ("impulse_probability", self.impulse_probability.to_string()),
            ("iterations", self.iterations.to_string()),
            (
                "switch_iteration",
                show_optional(&self.switch_iteration, "none"),
            ),
            ("initial_clusters", format_clusters(&self.initial_clusters)),
            (
                "switched_clusters",
                format_clusters(&self.switched_clusters),
            ),
            ("initial_path_file", show_path(&self.initial_path_file)),
            ("switched_path_file", show_path(&self.switched_path_file)),
            ("path_seed", self.path_seed.to_string()),
            ("normalize_path", self.normalize_path.to_string()),
            ("trials", self.trials.to_string()),
            ("seed", self.seed.to_string()),
        ];
        let mut out = String::new();
        for (k, v) in entries {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    fn echo_path(
        &self,
        file: &Option<PathBuf>,
        clusters: &[Cluster],
        stream_id: u64,
        label: &str,
    ) -> Result<EchoPath> {
        match file {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                EchoPath::from_text(&text, label)
            }
            None => make_block_sparse(
                self.params.filter_length,
                clusters,
                SeededStream::new(self.path_seed, stream_id),
                self.normalize_path,
                label,
            ),
        }
    }

    /// Resolves paths and input, then validates the whole experiment.
    pub fn build(&self) -> Result<ExperimentConfig> {
        self.params.validate()?;
        let initial = self.echo_path(
            &self.initial_path_file,
            &self.initial_clusters,
            0,
            "initial",
        )?;
        let schedule = match self.switch_iteration {
            Some(k) => {
                let switched = self.echo_path(
                    &self.switched_path_file,
                    &self.switched_clusters,
                    1,
                    "switched",
                )?;
                PathSchedule::switching(initial, switched, k)?
            }
            None => PathSchedule::fixed(initial),
        };
        let input = match self.input {
            InputSelect::White => InputKind::White,
            InputSelect::Ar1 => InputKind::Ar1 { pole: self.pole },
            InputSelect::Wav => InputKind::Wav(
                self.wav_path
                    .clone()
                    .ok_or_else(|| Error::invalid("input = wav requires wav_path"))?,
            ),
        };
        let config = ExperimentConfig {
            params: self.params.clone(),
            algorithms: self.algorithms.clone(),
            schedule,
            input,
            noise: NoiseModel {
                background_sigma: self.background_sigma,
                impulse_probability: self.impulse_probability,
                impulse_sigma: self.impulse_sigma,
                snr_db: self.snr_db,
                sir_db: self.sir_db,
            },
            iterations: self.iterations,
            trials: self.trials,
            base_seed: self.seed,
        };
        config.validate()?;
        Ok(config)
    }
}

/// Reads and resolves a configuration file.
pub fn parse_config(path: &Path) -> Result<ExperimentConfig> {
    RunSpec::load(path)?.build()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let spec = RunSpec::parse("").unwrap();
        assert_eq!(spec, RunSpec::default());
        let p = &spec.params;
        assert_eq!(p.step_size, 0.001);
        assert_eq!(p.gain_regularizer, 0.01);
        assert_eq!(p.update_regularizer, 0.01);
        assert_eq!(p.alpha, 0.0);
        assert_eq!(p.projection_order, 2);
        assert_eq!(p.block_length, 4);
        assert_eq!(p.filter_length, 512);
        assert_eq!(spec.pole, 0.8);
        assert_eq!(spec.snr_db, Some(40.0));
        assert_eq!(spec.sir_db, Some(0.0));
        assert_eq!(spec.impulse_probability, 0.1);
        spec.build().unwrap();
    }

    #[test]
    fn comments_and_whitespace() {
        let spec = RunSpec::parse(
            "# hello\n  step_size=0.002   # faster\n\nalgorithms = apsa, bs-mip-apsa\n",
        )
        .unwrap();
        assert_eq!(spec.params.step_size, 0.002);
        assert_eq!(spec.algorithms, vec![Algorithm::Apsa, Algorithm::BsMipApsa]);
    }

    #[test]
    fn unknown_key_is_named() {
        let err = RunSpec::parse("step_size = 0.1\nmu = 0.1\n").unwrap_err();
        match err {
            Error::UnknownKey { key, line } => {
                assert_eq!(key, "mu");
                assert_eq!(line, 2);
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn syntax_errors() {
        assert!(matches!(
            RunSpec::parse("step_size 0.1"),
            Err(Error::Syntax { line: 1, .. })
        ));
        assert!(matches!(
            RunSpec::parse("step_size = fast"),
            Err(Error::Syntax { .. })
        ));
        assert!(matches!(
            RunSpec::parse("seed = 1\nseed = 2"),
            Err(Error::Syntax { line: 2, .. })
        ));
    }

    #[test]
    fn divisibility_is_enforced() {
        let spec = RunSpec::parse("filter_length = 100\nblock_length = 7\n").unwrap();
        let err = spec.build().unwrap_err().to_string();
        assert!(err.contains("divisible"), "{err}");
    }

    #[test]
    fn block_length_equal_to_filter_length() {
        let spec = RunSpec::parse("block_length = 512\n").unwrap();
        let cfg = spec.build().unwrap();
        assert_eq!(cfg.params.block_count(), 1);
    }

    #[test]
    fn echo_round_trips() {
        let spec = RunSpec::parse(
            "filter_length = 128\nstep_size = 0.0015\nsnr_db = off\nswitch_iteration = none\n\
             initial_clusters = 32:32\nswitched_clusters = 8:16,72:16\ngain_variant = as_printed\n\
             input = wav\nwav_path = speech.wav\nnormalize_path = false\nseed = 18446744073709551615\n",
        )
        .unwrap();
        assert_eq!(RunSpec::parse(&spec.to_text()).unwrap(), spec);
        let default = RunSpec::default();
        assert_eq!(RunSpec::parse(&default.to_text()).unwrap(), default);
    }

    #[test]
    fn missing_file_names_the_path() {
        let err = parse_config(Path::new("/nonexistent/experiment.cfg")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/experiment.cfg"));
    }

    #[test]
    fn out_of_range_cluster_is_rejected() {
        let spec = RunSpec::parse("filter_length = 128\n").unwrap();
        assert!(spec.build().is_err());
    }
}
