//! Block-sparse true systems, desired-signal synthesis and path switching.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::signal::SeededStream;

/// A contiguous run of active taps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Cluster {
    pub offset: usize,
    pub length: usize,
}

impl Cluster {
    pub fn new(offset: usize, length: usize) -> Self {
        Self { offset, length }
    }

    pub fn end(&self) -> usize {
        self.offset + self.length
    }
}

impl fmt::Display for Cluster {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.offset, self.length)
    }
}

impl FromStr for Cluster {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::invalid(format!("cluster `{s}` is not of the form offset:length"));
        let (offset, length) = s.trim().split_once(':').ok_or_else(bad)?;
        Ok(Cluster {
            offset: offset.trim().parse().map_err(|_| bad())?,
            length: length.trim().parse().map_err(|_| bad())?,
        })
    }
}

/// Parses `offset:length,offset:length,...`.
pub fn parse_clusters(s: &str) -> Result<Vec<Cluster>> {
    s.split(',')
        .filter(|part| !part.trim().is_empty())
        .map(str::parse)
        .collect()
}

pub fn format_clusters(clusters: &[Cluster]) -> String {
    clusters
        .iter()
        .map(Cluster::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

/// Checks that clusters are non-empty, inside `[0, len)` and disjoint.
pub fn validate_clusters(len: usize, clusters: &[Cluster]) -> Result<()> {
    if clusters.is_empty() {
        return Err(Error::invalid("cluster list is empty"));
    }
    let mut sorted = clusters.to_vec();
    sorted.sort_by_key(|c| c.offset);
    for c in &sorted {
        if c.length == 0 {
            return Err(Error::invalid(format!("cluster {c} has zero length")));
        }
        if c.end() > len {
            return Err(Error::invalid(format!(
                "cluster {c} exceeds the filter length {len}"
            )));
        }
    }
    for pair in sorted.windows(2) {
        if pair[1].offset < pair[0].end() {
            return Err(Error::invalid(format!(
                "clusters {} and {} overlap",
                pair[0], pair[1]
            )));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct EchoPath {
    taps: Vec<f64>,
    clusters: Vec<Cluster>,
    label: String,
}

impl EchoPath {
    /// Wraps measured or imported taps. The clusters are the maximal runs of
    /// nonzero taps.
    pub fn from_taps(taps: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        let mut clusters = Vec::new();
        let mut start = None;
        for (i, &t) in taps.iter().enumerate() {
            match (t != 0.0, start) {
                (true, None) => start = Some(i),
                (false, Some(s)) => {
                    clusters.push(Cluster::new(s, i - s));
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = start {
            clusters.push(Cluster::new(s, taps.len() - s));
        }
        if !taps.iter().all(|t| t.is_finite()) {
            return Err(Error::invalid("echo path taps must be finite"));
        }
        if clusters.is_empty() {
            return Err(Error::invalid("echo path must have nonzero norm"));
        }
        Ok(Self {
            taps,
            clusters,
            label: label.into(),
        })
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    pub fn norm_sq(&self) -> f64 {
        self.taps.iter().map(|t| t * t).sum()
    }

    /// One tap per line, shortest round-trip formatting.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.taps.len() * 24);
        for t in &self.taps {
            out.push_str(&format!("{t:?}\n"));
        }
        out
    }

    /// Reads one real per line; blank lines and `#` comments are skipped.
    pub fn from_text(text: &str, label: impl Into<String>) -> Result<Self> {
        let mut taps = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let v: f64 = line.parse().map_err(|_| Error::Syntax {
                line: i + 1,
                message: format!("`{line}` is not a real number"),
            })?;
            taps.push(v);
        }
        Self::from_taps(taps, label)
    }
}

/// Draws i.i.d. Gaussian taps inside each cluster and leaves every other tap
/// exactly zero. With `normalize`, the result has unit Euclidean norm.
pub fn make_block_sparse(
    len: usize,
    clusters: &[Cluster],
    stream: SeededStream,
    normalize: bool,
    label: impl Into<String>,
) -> Result<EchoPath> {
    validate_clusters(len, clusters)?;
    let mut rng = stream.rng();
    let mut taps = vec![0.0; len];
    for c in clusters {
        for t in &mut taps[c.offset..c.end()] {
            *t = rng.sample(StandardNormal);
        }
    }
    let norm = taps.iter().map(|t| t * t).sum::<f64>().sqrt();
    if norm.is_nan() || norm <= 0.0 {
        return Err(Error::invalid("generated echo path has zero norm"));
    }
    if normalize {
        taps.iter_mut().for_each(|t| *t /= norm);
    }
    let mut sorted = clusters.to_vec();
    sorted.sort_by_key(|c| c.offset);
    Ok(EchoPath {
        taps,
        clusters: sorted,
        label: label.into(),
    })
}

/// `y = x^T h + v` with `x_history` newest first.
pub fn desired_signal(x_history: &[f64], h: &[f64], v: f64) -> f64 {
    debug_assert_eq!(x_history.len(), h.len());
    x_history.iter().zip(h).map(|(x, t)| x * t).sum::<f64>() + v
}

/// The initial path, and optionally the path it is switched to.
#[derive(Clone, Debug, PartialEq)]
pub struct PathSchedule {
    initial: EchoPath,
    switched: EchoPath,
    switch_iteration: Option<usize>,
}

impl PathSchedule {
    pub fn fixed(path: EchoPath) -> Self {
        Self {
            switched: path.clone(),
            initial: path,
            switch_iteration: None,
        }
    }

    /// `initial` is active for iterations `< switch_iteration`, `switched`
    /// from then on.
    pub fn switching(
        initial: EchoPath,
        switched: EchoPath,
        switch_iteration: usize,
    ) -> Result<Self> {
        if initial.len() != switched.len() {
            return Err(Error::invalid(format!(
                "echo paths differ in length ({} vs {})",
                initial.len(),
                switched.len()
            )));
        }
        Ok(Self {
            initial,
            switched,
            switch_iteration: Some(switch_iteration),
        })
    }

    pub fn initial(&self) -> &EchoPath {
        &self.initial
    }

    pub fn switched(&self) -> &EchoPath {
        &self.switched
    }

    pub fn switch_iteration(&self) -> Option<usize> {
        self.switch_iteration
    }

    pub fn len(&self) -> usize {
        self.initial.len()
    }

    pub fn is_empty(&self) -> bool {
        self.initial.is_empty()
    }

    pub fn path_at(&self, iteration: usize) -> &EchoPath {
        match self.switch_iteration {
            Some(k) if iteration >= k => &self.switched,
            _ => &self.initial,
        }
    }
}
