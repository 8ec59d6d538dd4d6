//! CSV traces, gnuplot data and the run manifest.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Duration;

use crate::error::{Error, Result};
use crate::harness::MisalignmentTrace;

pub const TRACE_FILE: &str = "trace.csv";
pub const PLOT_FILE: &str = "plot.dat";
pub const MANIFEST_FILE: &str = "manifest.txt";
pub const INITIAL_PATH_FILE: &str = "initial_path.txt";
pub const SWITCHED_PATH_FILE: &str = "switched_path.txt";

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn check_non_empty(trace: &MisalignmentTrace) -> Result<()> {
    if trace.algorithms().is_empty() || trace.iterations() == 0 {
        return Err(Error::invalid("cannot serialize an empty trace"));
    }
    Ok(())
}

/// `iteration,<algo>_misalign_db,...` then one row per iteration, six
/// decimals, LF line endings.
pub fn csv_text(trace: &MisalignmentTrace) -> Result<String> {
    check_non_empty(trace)?;
    let mut out = String::from("iteration");
    for a in trace.algorithms() {
        let _ = write!(out, ",{a}_misalign_db");
    }
    out.push('\n');
    for n in 0..trace.iterations() {
        let _ = write!(out, "{n}");
        for curve in trace.curves() {
            let _ = write!(out, ",{:.6}", curve[n]);
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn emit_csv(trace: &MisalignmentTrace, path: &Path) -> Result<()> {
    write_file(path, &csv_text(trace)?)
}

/// Whitespace-separated columns with a `#` header, readable by gnuplot's
/// `plot 'plot.dat' using 1:2 with lines`.
pub fn plot_text(trace: &MisalignmentTrace) -> Result<String> {
    check_non_empty(trace)?;
    let mut out = String::from("# iteration");
    for a in trace.algorithms() {
        let _ = write!(out, " {a}");
    }
    out.push('\n');
    for n in 0..trace.iterations() {
        let _ = write!(out, "{n}");
        for curve in trace.curves() {
            let _ = write!(out, " {:.6}", curve[n]);
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn emit_plot_data(trace: &MisalignmentTrace, path: &Path) -> Result<()> {
    write_file(path, &plot_text(trace)?)
}

/// What a run was and what it produced.
#[derive(Clone, Debug, PartialEq)]
pub struct RunManifest {
    /// Resolved configuration in config-file syntax.
    pub config_echo: String,
    pub tool_version: String,
    pub base_seed: u64,
    /// Reported on the console only, so the manifest stays byte-stable.
    pub duration: Duration,
    /// File names relative to the output directory.
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    /// Metadata as `#` comments followed by the config echo, so the manifest
    /// itself is a valid config file.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("# bsmip run manifest\n");
        let _ = writeln!(out, "# tool = bsmip {}", self.tool_version);
        let _ = writeln!(out, "# base_seed = {}", self.base_seed);
        let outputs = self
            .outputs
            .iter()
            .map(|p| p.display().to_string())
            .collect::<Vec<_>>()
            .join(", ");
        let _ = writeln!(out, "# outputs = {outputs}");
        out.push_str(&self.config_echo);
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_file(path, &self.to_text())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::echo_path::{EchoPath, PathSchedule};
    use crate::filters::{Algorithm, FilterParams};
    use crate::harness::run_signals;

    fn tiny_trace(algorithms: &[Algorithm], n: usize) -> MisalignmentTrace {
        let params = FilterParams {
            filter_length: 2,
            block_length: 1,
            ..FilterParams::default()
        };
        let path = EchoPath::from_taps(vec![1.0, 0.5], "p").unwrap();
        let x: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let y = x.clone();
        run_signals(&params, algorithms, &PathSchedule::fixed(path), &x, &y).unwrap()
    }

    #[test]
    fn csv_shape() {
        let t = tiny_trace(&[Algorithm::Apsa], 2);
        let text = csv_text(&t).unwrap();
        let lines: Vec<&str> = text.split_terminator('\n').collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], "iteration,apsa_misalign_db");
        assert_eq!(lines[1], "0,0.000000");
        assert!(!text.contains('\r'));
    }

    #[test]
    fn csv_header_follows_algorithm_order() {
        let t = tiny_trace(&[Algorithm::BsMipApsa, Algorithm::Apsa], 3);
        let text = csv_text(&t).unwrap();
        assert!(text.starts_with("iteration,bs-mip-apsa_misalign_db,apsa_misalign_db\n"));
        assert_eq!(text.lines().count(), 4);
    }

    #[test]
    fn six_decimals() {
        assert_eq!(format!("{:.6}", -20.0f64), "-20.000000");
    }

    #[test]
    fn empty_trace_is_rejected() {
        let t = tiny_trace(&[Algorithm::Apsa], 0);
        assert!(csv_text(&t).is_err());
    }

    #[test]
    fn manifest_is_a_config_file() {
        let m = RunManifest {
            config_echo: super::super::config::RunSpec::default().to_text(),
            tool_version: "0.1.0".into(),
            base_seed: 0,
            duration: Duration::from_secs(3),
            outputs: vec![PathBuf::from(TRACE_FILE)],
        };
        let spec = super::super::config::RunSpec::parse(&m.to_text()).unwrap();
        assert_eq!(spec, super::super::config::RunSpec::default());
        assert!(!m.to_text().contains("duration"));
    }
}
