//! Affine projection sign adaptive filters: APSA, MIP-APSA and BS-MIP-APSA.
//!
//! All three share the same skeleton. With `X(n)` the `L x M` matrix of the
//! `M` most recent regressors (newest column first) and `y(n)` the matching
//! desired samples:
//!
//! ```text
//! e(n)    = y(n) - X(n)^T h(n-1)
//! P(n)    = [g(n) ⊙ x(n), P(n-1) without its last column]
//! x_gs(n) = P(n) sgn(e(n))
//! h(n)    = h(n-1) + mu * x_gs(n) / sqrt(delta + x_gs(n)^T x_gs(n))
//! ```
//!
//! APSA uses `X(n)` itself in place of the memory matrix `P(n)`. MIP-APSA
//! computes the per-tap gain `g(n)` from `|h_l|`, BS-MIP-APSA computes one
//! gain per block of `P` taps from the block's Euclidean norm.
//!
//! Gains are evaluated on the weights before the update. The normalized
//! update bounds every step: `||h(n) - h(n-1)||_2 < mu` whenever `delta > 0`,
//! which is what makes the family robust to impulsive interference.
//!
//! Cost per sample beyond MIP-APSA is the block norms: `L` multiplications
//! and `N = L / P` square roots.

use std::fmt;
use std::ops::Deref;
use std::str::FromStr;

use crate::error::{Error, Result};

/// How the per-block gain denominator is formed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum GainVariant {
    /// `2 N sum_i ||h_i|| + eps`. With `P = 1` this does not reduce to the
    /// per-tap MIP-APSA gain.
    AsPrinted,
    /// `2 sum_i ||h_i|| + eps`. With `P = 1` this is exactly the MIP-APSA gain.
    #[default]
    MipConsistent,
}

impl GainVariant {
    pub fn name(self) -> &'static str {
        match self {
            GainVariant::AsPrinted => "as_printed",
            GainVariant::MipConsistent => "mip_consistent",
        }
    }
}

impl fmt::Display for GainVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GainVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "as_printed" => Ok(GainVariant::AsPrinted),
            "mip_consistent" => Ok(GainVariant::MipConsistent),
            other => Err(Error::invalid(format!(
                "unknown gain variant `{other}` (expected as_printed or mip_consistent)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Apsa,
    MipApsa,
    BsMipApsa,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Apsa, Algorithm::MipApsa, Algorithm::BsMipApsa];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Apsa => "apsa",
            Algorithm::MipApsa => "mip-apsa",
            Algorithm::BsMipApsa => "bs-mip-apsa",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "apsa" => Ok(Algorithm::Apsa),
            "mip-apsa" | "mipapsa" => Ok(Algorithm::MipApsa),
            "bs-mip-apsa" | "bsmipapsa" => Ok(Algorithm::BsMipApsa),
            other => Err(Error::invalid(format!(
                "unknown algorithm `{other}` (expected apsa, mip-apsa or bs-mip-apsa)"
            ))),
        }
    }
}

/// Tuning knobs shared by every algorithm.
#[derive(Clone, Debug, PartialEq)]
pub struct FilterParams {
    /// `L`, number of adaptive taps.
    pub filter_length: usize,
    /// `M`, number of stacked regressors.
    pub projection_order: usize,
    /// `P`, taps per block. Only BS-MIP-APSA reads it.
    pub block_length: usize,
    /// `mu`
    pub step_size: f64,
    /// `alpha`, in `[-1, 1)`.
    pub alpha: f64,
    /// `eps`, regularizes the gain denominator.
    pub gain_regularizer: f64,
    /// `delta`, regularizes the update normalizer.
    pub update_regularizer: f64,
    pub gain_variant: GainVariant,
}

impl Default for FilterParams {
    fn default() -> Self {
        Self {
            filter_length: 512,
            projection_order: 2,
            block_length: 4,
            step_size: 0.001,
            alpha: 0.0,
            gain_regularizer: 0.01,
            update_regularizer: 0.01,
            gain_variant: GainVariant::MipConsistent,
        }
    }
}

impl FilterParams {
    /// `N = L / P`.
    pub fn block_count(&self) -> usize {
        self.filter_length / self.block_length
    }

    /// Checks every parameter invariant, including `mu > 0`, `eps > 0` and
    /// `delta > 0`.
    pub fn validate(&self) -> Result<()> {
        self.validate_structure()?;
        if self.step_size.is_nan() || self.step_size <= 0.0 {
            return Err(Error::invalid(format!(
                "step_size must be > 0 (got {})",
                self.step_size
            )));
        }
        if !(self.gain_regularizer > 0.0 && self.gain_regularizer.is_finite()) {
            return Err(Error::invalid(format!(
                "gain_regularizer must be > 0 (got {})",
                self.gain_regularizer
            )));
        }
        if !(self.update_regularizer > 0.0 && self.update_regularizer.is_finite()) {
            return Err(Error::invalid(format!(
                "update_regularizer must be > 0 (got {})",
                self.update_regularizer
            )));
        }
        Ok(())
    }

    /// Same as [`validate`](Self::validate) but admits the degenerate limits
    /// `mu = 0`, `eps = 0` and `delta = 0`. The unregularized limit is where
    /// the special-case equivalences between the algorithms hold exactly.
    pub fn validate_relaxed(&self) -> Result<()> {
        self.validate_structure()?;
        if !(self.gain_regularizer >= 0.0 && self.update_regularizer >= 0.0) {
            return Err(Error::invalid("regularizers must be >= 0"));
        }
        Ok(())
    }

    fn validate_structure(&self) -> Result<()> {
        if self.filter_length == 0 {
            return Err(Error::invalid("filter_length must be >= 1"));
        }
        if self.projection_order == 0 {
            return Err(Error::invalid("projection_order must be >= 1"));
        }
        if self.block_length == 0 {
            return Err(Error::invalid("block_length must be >= 1"));
        }
        if !self.filter_length.is_multiple_of(self.block_length) {
            return Err(Error::invalid(format!(
                "filter_length ({}) must be divisible by block_length ({})",
                self.filter_length, self.block_length
            )));
        }
        if !(self.step_size >= 0.0 && self.step_size.is_finite()) {
            return Err(Error::invalid(format!(
                "step_size must be finite and >= 0 (got {})",
                self.step_size
            )));
        }
        if !(-1.0..1.0).contains(&self.alpha) {
            return Err(Error::invalid(format!(
                "alpha must satisfy -1 <= alpha < 1 (got {})",
                self.alpha
            )));
        }
        Ok(())
    }
}

/// Column-major `rows x cols` matrix. Column 0 is the newest.
#[derive(Clone, Debug, PartialEq)]
pub struct ColumnMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl ColumnMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Builds a matrix from columns, newest first.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let rows = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::invalid("columns must all have the same length"));
        }
        Ok(Self {
            rows,
            cols: columns.len(),
            data: columns.concat(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.rows.max(1)).take(self.cols)
    }

    /// `sum_j coeffs[j] * column(j)` written into `out`.
    pub fn combine_columns(&self, coeffs: &[f64], out: &mut [f64]) {
        debug_assert_eq!(coeffs.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        out.fill(0.0);
        for (col, &c) in self.columns().zip(coeffs) {
            if c == 0.0 {
                continue;
            }
            for (o, &v) in out.iter_mut().zip(col) {
                *o += c * v;
            }
        }
    }
}

/// Pushes `new_column` in as column 0, moves every column one slot older and
/// drops the oldest one.
pub fn shift_memory(matrix: &mut ColumnMatrix, new_column: &[f64]) {
    assert_eq!(new_column.len(), matrix.rows, "column length mismatch");
    let rows = matrix.rows;
    if matrix.cols > 1 {
        matrix.data.copy_within(0..rows * (matrix.cols - 1), rows);
    }
    matrix.data[..rows].copy_from_slice(new_column);
}

/// Per-tap (or per-block, replicated) step-size gains.
#[derive(Clone, Debug, PartialEq)]
pub struct GainVector(Vec<f64>);

impl GainVector {
    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for GainVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Shared body of both gain rules. `group_norms[k]` is the magnitude of group
/// `k`, each group covering `group_len` consecutive taps; `spread` multiplies
/// the `2 sum` in the denominator.
///
/// When the denominator is exactly zero (`eps = 0` and all-zero weights) the
/// proportionate mass is spread evenly over the groups, which is the limit
/// along equal group magnitudes.
fn fill_group_gains(
    group_norms: &[f64],
    group_len: usize,
    alpha: f64,
    eps: f64,
    spread: f64,
    out: &mut [f64],
) {
    let taps = out.len();
    let groups = group_norms.len();
    debug_assert_eq!(groups * group_len, taps);

    let uniform = (1.0 - alpha) / (2.0 * taps as f64);
    let total: f64 = group_norms.iter().sum();
    let denom = 2.0 * spread * total + eps;

    for (block, &norm) in out.chunks_exact_mut(group_len).zip(group_norms) {
        let prop = if denom == 0.0 {
            (1.0 + alpha) / (2.0 * spread * groups as f64)
        } else {
            (1.0 + alpha) * norm / denom
        };
        block.fill(uniform + prop);
    }
}

fn fill_block_norms(weights: &[f64], block_len: usize, norms: &mut [f64]) {
    if block_len == 1 {
        for (n, w) in norms.iter_mut().zip(weights) {
            *n = w.abs();
        }
    } else {
        for (n, block) in norms.iter_mut().zip(weights.chunks_exact(block_len)) {
            *n = block.iter().map(|w| w * w).sum::<f64>().sqrt();
        }
    }
}

/// MIP-APSA gains:
/// `g_l = (1 - alpha) / (2L) + (1 + alpha) |h_l| / (2 sum_i |h_i| + eps)`.
pub fn ip_gains(weights: &[f64], alpha: f64, eps: f64) -> GainVector {
    let mut norms = vec![0.0; weights.len()];
    let mut out = vec![0.0; weights.len()];
    fill_block_norms(weights, 1, &mut norms);
    fill_group_gains(&norms, 1, alpha, eps, 1.0, &mut out);
    GainVector(out)
}

/// BS-MIP-APSA gains: one value per block of `block_len` taps, driven by the
/// block's Euclidean norm and replicated across the block.
pub fn bs_gains(
    weights: &[f64],
    block_len: usize,
    alpha: f64,
    eps: f64,
    variant: GainVariant,
) -> Result<GainVector> {
    if block_len == 0 || !weights.len().is_multiple_of(block_len) {
        return Err(Error::invalid(format!(
            "filter length ({}) must be divisible by block length ({})",
            weights.len(),
            block_len
        )));
    }
    let blocks = weights.len() / block_len;
    let mut norms = vec![0.0; blocks];
    let mut out = vec![0.0; weights.len()];
    fill_block_norms(weights, block_len, &mut norms);
    fill_group_gains(
        &norms,
        block_len,
        alpha,
        eps,
        spread(variant, blocks),
        &mut out,
    );
    Ok(GainVector(out))
}

fn spread(variant: GainVariant, blocks: usize) -> f64 {
    match variant {
        GainVariant::AsPrinted => blocks as f64,
        GainVariant::MipConsistent => 1.0,
    }
}

/// Elementwise sign with `sign(0) = 0`.
pub fn sign_vector(e: &[f64]) -> Vec<f64> {
    e.iter().map(|&v| sign(v)).collect()
}

#[inline]
fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `h += mu * x_gs / sqrt(delta + x_gs^T x_gs)`; returns `||delta h||_2`.
///
/// An all-zero direction leaves `h` untouched, also when `delta = 0`.
pub fn normalized_update(weights: &mut [f64], direction: &[f64], mu: f64, delta: f64) -> f64 {
    debug_assert_eq!(weights.len(), direction.len());
    let energy: f64 = direction.iter().map(|d| d * d).sum();
    if energy == 0.0 {
        return 0.0;
    }
    let scale = mu / (delta + energy).sqrt();
    for (w, d) in weights.iter_mut().zip(direction) {
        *w += scale * d;
    }
    scale * energy.sqrt()
}

/// Adaptive weights plus every history the update rules need. All entries
/// start at zero.
#[derive(Clone, Debug, PartialEq)]
pub struct FilterState {
    weights: Vec<f64>,
    memory: ColumnMatrix,
    regressors: ColumnMatrix,
    desired: Vec<f64>,
    scratch: Scratch,
}

#[derive(Clone, Debug, PartialEq)]
struct Scratch {
    norms: Vec<f64>,
    gains: Vec<f64>,
    column: Vec<f64>,
    direction: Vec<f64>,
    error: Vec<f64>,
    signs: Vec<f64>,
}

impl FilterState {
    pub fn new(params: &FilterParams) -> Self {
        let taps = params.filter_length;
        let order = params.projection_order;
        Self {
            weights: vec![0.0; taps],
            memory: ColumnMatrix::zeros(taps, order),
            regressors: ColumnMatrix::zeros(taps, order),
            desired: vec![0.0; order],
            scratch: Scratch {
                norms: vec![0.0; taps],
                gains: vec![0.0; taps],
                column: vec![0.0; taps],
                direction: vec![0.0; taps],
                error: vec![0.0; order],
                signs: vec![0.0; order],
            },
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    /// Gain-weighted regressors, newest column first.
    pub fn memory(&self) -> &ColumnMatrix {
        &self.memory
    }

    /// `X(n)`, newest column first.
    pub fn regressors(&self) -> &ColumnMatrix {
        &self.regressors
    }

    /// `y(n)`, newest first.
    pub fn desired(&self) -> &[f64] {
        &self.desired
    }

    pub fn filter_length(&self) -> usize {
        self.weights.len()
    }

    pub fn projection_order(&self) -> usize {
        self.desired.len()
    }

    /// Shifts `x_new` into the regressor history and `y_new` into the desired
    /// history.
    pub fn push_sample(&mut self, x_new: f64, y_new: f64) {
        let taps = self.weights.len();
        let column = &mut self.scratch.column;
        column[0] = x_new;
        column[1..].copy_from_slice(&self.regressors.column(0)[..taps - 1]);
        shift_memory(&mut self.regressors, column);
        self.desired.rotate_right(1);
        self.desired[0] = y_new;
    }

    fn fill_error(&mut self) {
        for (e, (y, x)) in self
            .scratch
            .error
            .iter_mut()
            .zip(self.desired.iter().zip(self.regressors.columns()))
        {
            *e = y - dot(x, &self.weights);
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `e(n) = y(n) - X(n)^T h`, newest first.
pub fn error_vector(state: &FilterState) -> Vec<f64> {
    state
        .desired
        .iter()
        .zip(state.regressors.columns())
        .map(|(y, x)| y - dot(x, &state.weights))
        .collect()
}

/// What one adaptation step did.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepOutcome {
    /// Newest a-priori error `e_0(n)`.
    pub error: f64,
    /// `||h(n) - h(n-1)||_2` as applied.
    pub update_norm: f64,
}

/// One APSA iteration: uniform gain, no memory matrix.
pub fn apsa_step(
    state: &mut FilterState,
    params: &FilterParams,
    x_new: f64,
    y_new: f64,
) -> StepOutcome {
    state.push_sample(x_new, y_new);
    state.fill_error();
    let s = &mut state.scratch;
    for (sg, &e) in s.signs.iter_mut().zip(&s.error) {
        *sg = sign(e);
    }
    state.regressors.combine_columns(&s.signs, &mut s.direction);
    finish(state, params)
}

/// One MIP-APSA iteration.
pub fn mip_apsa_step(
    state: &mut FilterState,
    params: &FilterParams,
    x_new: f64,
    y_new: f64,
) -> StepOutcome {
    proportionate_step(state, params, x_new, y_new, 1, 1.0)
}

/// One BS-MIP-APSA iteration. `params.filter_length` must be a multiple of
/// `params.block_length`; [`FilterParams::validate`] enforces that.
pub fn bs_mip_apsa_step(
    state: &mut FilterState,
    params: &FilterParams,
    x_new: f64,
    y_new: f64,
) -> StepOutcome {
    let block = params.block_length;
    assert!(
        block > 0 && state.filter_length().is_multiple_of(block),
        "filter length must be divisible by block length"
    );
    let s = spread(params.gain_variant, state.filter_length() / block);
    proportionate_step(state, params, x_new, y_new, block, s)
}

fn proportionate_step(
    state: &mut FilterState,
    params: &FilterParams,
    x_new: f64,
    y_new: f64,
    block_len: usize,
    spread: f64,
) -> StepOutcome {
    state.push_sample(x_new, y_new);

    let groups = state.weights.len() / block_len;
    let s = &mut state.scratch;
    fill_block_norms(&state.weights, block_len, &mut s.norms[..groups]);
    fill_group_gains(
        &s.norms[..groups],
        block_len,
        params.alpha,
        params.gain_regularizer,
        spread,
        &mut s.gains,
    );
    for ((c, g), x) in s
        .column
        .iter_mut()
        .zip(&s.gains)
        .zip(state.regressors.column(0))
    {
        *c = g * x;
    }
    shift_memory(&mut state.memory, &s.column);

    state.fill_error();
    let s = &mut state.scratch;
    for (sg, &e) in s.signs.iter_mut().zip(&s.error) {
        *sg = sign(e);
    }
    state.memory.combine_columns(&s.signs, &mut s.direction);
    finish(state, params)
}

fn finish(state: &mut FilterState, params: &FilterParams) -> StepOutcome {
    let update_norm = normalized_update(
        &mut state.weights,
        &state.scratch.direction,
        params.step_size,
        params.update_regularizer,
    );
    StepOutcome {
        error: state.scratch.error[0],
        update_norm,
    }
}

/// An algorithm bound to its parameters and state.
#[derive(Clone, Debug)]
pub struct AdaptiveFilter {
    algorithm: Algorithm,
    params: FilterParams,
    state: FilterState,
}

impl AdaptiveFilter {
    pub fn new(algorithm: Algorithm, params: FilterParams) -> Result<Self> {
        params.validate()?;
        Ok(Self::new_unchecked(algorithm, params))
    }

    /// Accepts the degenerate limits `mu = 0`, `eps = 0` and `delta = 0`.
    pub fn new_relaxed(algorithm: Algorithm, params: FilterParams) -> Result<Self> {
        params.validate_relaxed()?;
        Ok(Self::new_unchecked(algorithm, params))
    }

    fn new_unchecked(algorithm: Algorithm, params: FilterParams) -> Self {
        let state = FilterState::new(&params);
        Self {
            algorithm,
            params,
            state,
        }
    }

    pub fn algorithm(&self) -> Algorithm {
        self.algorithm
    }

    pub fn params(&self) -> &FilterParams {
        &self.params
    }

    pub fn state(&self) -> &FilterState {
        &self.state
    }

    pub fn weights(&self) -> &[f64] {
        self.state.weights()
    }

    pub fn step(&mut self, x_new: f64, y_new: f64) -> StepOutcome {
        let step = match self.algorithm {
            Algorithm::Apsa => apsa_step,
            Algorithm::MipApsa => mip_apsa_step,
            Algorithm::BsMipApsa => bs_mip_apsa_step,
        };
        step(&mut self.state, &self.params, x_new, y_new)
    }
}
