//! Domain types shared by every solver: regression parameters, noise
//! families, datasets, mixture weights and solver configuration.
//!
//! Components are 0-indexed everywhere in this crate. File formats written by
//! the command line front-end use 1-based component labels and convert at the
//! boundary.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector, DVectorView};
use rand_distr::{Distribution, StandardNormal};

use crate::error::{MlrError, Result};
use crate::rng::seeded_rng;

/// The K regression vectors of a mixed linear regression model.
///
/// Stored as a `d × K` matrix whose column `k` is the coefficient vector of
/// component `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct MlrParams {
    beta: DMatrix<f64>,
}

impl MlrParams {
    pub fn new(beta: DMatrix<f64>) -> Result<Self> {
        if beta.nrows() == 0 || beta.ncols() == 0 {
            return Err(MlrError::InvalidParameter(format!(
                "parameter matrix must be non-empty, got {}x{}",
                beta.nrows(),
                beta.ncols()
            )));
        }
        if beta.iter().any(|v| !v.is_finite()) {
            return Err(MlrError::NonFiniteInput("regression coefficients".into()));
        }
        Ok(Self { beta })
    }

    /// Builds parameters from one coefficient vector per component.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let k = columns.len();
        let d = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != d) {
            return Err(MlrError::DimensionMismatch(
                "component vectors have different lengths".into(),
            ));
        }
        Self::new(DMatrix::from_fn(d, k, |r, c| columns[c][r]))
    }

    pub fn dim(&self) -> usize {
        self.beta.nrows()
    }

    pub fn k_components(&self) -> usize {
        self.beta.ncols()
    }

    pub fn beta(&self) -> &DMatrix<f64> {
        &self.beta
    }

    pub fn component(&self, k: usize) -> DVectorView<'_, f64> {
        self.beta.column(k)
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.beta
    }

    /// Returns parameters whose column `j` is column `order[j]` of `self`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        let k = self.k_components();
        let mut seen = vec![false; k];
        if order.len() != k || order.iter().any(|&j| j >= k || std::mem::replace(&mut seen[j], true)) {
            return Err(MlrError::InvalidParameter(format!(
                "{order:?} is not a permutation of 0..{k}"
            )));
        }
        Ok(Self {
            beta: DMatrix::from_fn(self.dim(), k, |r, c| self.beta[(r, order[c])]),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NoiseKind {
    Gaussian,
    Laplacian,
}

impl NoiseKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NoiseKind::Gaussian => "gaussian",
            NoiseKind::Laplacian => "laplacian",
        }
    }
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NoiseKind {
    type Err = MlrError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gaussian" => Ok(NoiseKind::Gaussian),
            "laplacian" => Ok(NoiseKind::Laplacian),
            other => Err(MlrError::InvalidParameter(format!(
                "unknown noise kind `{other}` (expected gaussian or laplacian)"
            ))),
        }
    }
}

/// Additive noise distribution with known standard deviation `sigma`.
///
/// For the Laplacian family the scale `b = sigma / sqrt(2)` is derived, so both
/// families with the same `sigma` have variance `sigma^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    kind: NoiseKind,
    sigma: f64,
}

impl NoiseModel {
    pub fn new(kind: NoiseKind, sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(MlrError::InvalidParameter(format!(
                "noise standard deviation must be positive and finite, got {sigma}"
            )));
        }
        Ok(Self { kind, sigma })
    }

    pub fn gaussian(sigma: f64) -> Result<Self> {
        Self::new(NoiseKind::Gaussian, sigma)
    }

    pub fn laplacian(sigma: f64) -> Result<Self> {
        Self::new(NoiseKind::Laplacian, sigma)
    }

    pub fn kind(&self) -> NoiseKind {
        self.kind
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Laplace scale parameter `b = sigma / sqrt(2)`.
    pub fn b(&self) -> f64 {
        self.sigma / std::f64::consts::SQRT_2
    }
}

/// Observed samples `(x_i, y_i)`, optionally with the generating labels and
/// coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: DMatrix<f64>,
    y: DVector<f64>,
    labels: Option<Vec<usize>>,
    true_params: Option<MlrParams>,
}

impl Dataset {
    /// `x` is `N × d` with one sample per row.
    pub fn new(x: DMatrix<f64>, y: DVector<f64>) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(MlrError::DimensionMismatch(format!(
                "x has {} rows but y has {} entries",
                x.nrows(),
                y.len()
            )));
        }
        if x.nrows() == 0 || x.ncols() == 0 {
            return Err(MlrError::InvalidParameter("dataset must be non-empty".into()));
        }
        if let Some(i) = y.iter().position(|v| !v.is_finite()) {
            return Err(MlrError::NonFiniteInput(format!("y[{i}]")));
        }
        if let Some(idx) = x.iter().position(|v| !v.is_finite()) {
            let (r, c) = (idx % x.nrows(), idx / x.nrows());
            return Err(MlrError::NonFiniteInput(format!("x[{r}, {c}]")));
        }
        Ok(Self { x, y, labels: None, true_params: None })
    }

    /// Attaches 0-based component labels; every label must be below `k`.
    pub fn with_labels(mut self, labels: Vec<usize>, k: usize) -> Result<Self> {
        if labels.len() != self.n() {
            return Err(MlrError::DimensionMismatch(format!(
                "{} labels for {} samples",
                labels.len(),
                self.n()
            )));
        }
        if let Some(bad) = labels.iter().find(|&&l| l >= k) {
            return Err(MlrError::InvalidParameter(format!(
                "label {} outside 1..={k}",
                bad + 1
            )));
        }
        if let Some(truth) = &self.true_params {
            if truth.k_components() != k {
                return Err(MlrError::DimensionMismatch(
                    "label range disagrees with true parameters".into(),
                ));
            }
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn with_true_params(mut self, truth: MlrParams) -> Result<Self> {
        if truth.dim() != self.dim() {
            return Err(MlrError::DimensionMismatch(format!(
                "true parameters have dimension {} but x has {} columns",
                truth.dim(),
                self.dim()
            )));
        }
        if let Some(labels) = &self.labels {
            if labels.iter().any(|&l| l >= truth.k_components()) {
                return Err(MlrError::DimensionMismatch(
                    "labels reference components beyond the true parameters".into(),
                ));
            }
        }
        self.true_params = Some(truth);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn dim(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn true_params(&self) -> Option<&MlrParams> {
        self.true_params.as_ref()
    }

    /// Residual of sample `i` under coefficient vector `beta`.
    #[cfg(test)]
    pub(crate) fn residual(&self, i: usize, beta: DVectorView<'_, f64>) -> f64 {
        self.y[i] - self.x.row(i).transpose().dot(&beta)
    }
}

/// Mixture probabilities `p_k`. Every solver in this crate keeps them uniform.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureWeights {
    p: Vec<f64>,
}

impl MixtureWeights {
    pub fn uniform(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(MlrError::InvalidParameter("K must be at least 1".into()));
        }
        Ok(Self { p: vec![1.0 / k as f64; k] })
    }

    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() || p.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(MlrError::InvalidParameter(
                "mixture weights must be non-negative and finite".into(),
            ));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(MlrError::InvalidParameter(format!(
                "mixture weights sum to {total}, expected 1"
            )));
        }
        Ok(Self { p })
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }
}

/// Default ADMM penalty.
pub const DEFAULT_RHO: f64 = 10.0;

/// Default iteration budget.
pub const DEFAULT_ITERATIONS: usize = 1000;

/// Iteration budget, ADMM penalty and initialization control.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    n_iterations: usize,
    rho: f64,
    seed: u64,
    init_params: Option<MlrParams>,
}

impl SolverConfig {
    pub fn new(n_iterations: usize, rho: f64, seed: u64) -> Result<Self> {
        if n_iterations == 0 {
            return Err(MlrError::InvalidParameter("n_iterations must be at least 1".into()));
        }
        if !(rho.is_finite() && rho > 0.0) {
            return Err(MlrError::InvalidParameter(format!("rho must be positive, got {rho}")));
        }
        Ok(Self { n_iterations, rho, seed, init_params: None })
    }

    pub fn with_init_params(mut self, init: MlrParams) -> Self {
        self.init_params = Some(init);
        self
    }

    pub fn n_iterations(&self) -> usize {
        self.n_iterations
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn init_params(&self) -> Option<&MlrParams> {
        self.init_params.as_ref()
    }

    /// Starting coefficients shared by EM and ADMM.
    ///
    /// Uses `init_params` when set. Otherwise entries are i.i.d. standard
    /// normal drawn from `seed`, filling component 0 first, then component 1,
    /// and so on.
    pub fn initial_params(&self, d: usize, k: usize) -> Result<MlrParams> {
        if let Some(init) = &self.init_params {
            if init.dim() != d || init.k_components() != k {
                return Err(MlrError::DimensionMismatch(format!(
                    "initial parameters are {}x{}, expected {d}x{k}",
                    init.dim(),
                    init.k_components()
                )));
            }
            return Ok(init.clone());
        }
        if d == 0 || k == 0 {
            return Err(MlrError::InvalidParameter("d and K must be at least 1".into()));
        }
        let mut rng = seeded_rng(self.seed);
        let values: Vec<f64> = (0..d * k).map(|_| StandardNormal.sample(&mut rng)).collect();
        MlrParams::new(DMatrix::from_column_slice(d, k, &values))
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { n_iterations: DEFAULT_ITERATIONS, rho: DEFAULT_RHO, seed: 0, init_params: None }
    }
}

/// Checks that `params` and `data` describe the same problem.
pub fn validate_problem(params: &MlrParams, data: &Dataset) -> Result<()> {
    if params.dim() != data.dim() {
        return Err(MlrError::DimensionMismatch(format!(
            "parameters have dimension {} but data has {} covariates",
            params.dim(),
            data.dim()
        )));
    }
    if params.beta().iter().any(|v| !v.is_finite()) {
        return Err(MlrError::NonFiniteInput("regression coefficients".into()));
    }
    if data.y().iter().chain(data.x().iter()).any(|v| !v.is_finite()) {
        return Err(MlrError::NonFiniteInput("dataset".into()));
    }
    Ok(())
}
