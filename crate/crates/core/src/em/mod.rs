//! Expectation-maximization for mixed linear regression.
//!
//! Each iteration computes posterior responsibilities from the current
//! coefficients (E-step) and then refits every component by a weighted
//! regression (M-step). Under Gaussian noise the M-step is weighted least
//! squares. Under Laplacian noise it is a weighted least absolute deviations
//! problem, which has no closed form: it is solved either by an exact simplex
//! method (the LP path) or by iteratively reweighted least squares (the IRLS
//! path), see [`lad`].

pub mod lad;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use nalgebra::{DMatrix, DVectorView};

use crate::error::{MlrError, Result};
use crate::eval::log_likelihood;
use crate::linalg::{weighted_normal_equations, RidgeSolver};
use crate::model::{validate_problem, Dataset, MixtureWeights, MlrParams, NoiseKind, NoiseModel, SolverConfig};

pub use lad::{lad_lp_oracle, lad_objective, weighted_median, LadSolution};

/// Posterior component memberships: entry `(i, k)` is the probability that
/// sample `i` was generated by component `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Responsibilities {
    w: DMatrix<f64>,
}

impl Responsibilities {
    /// Wraps an `N × K` matrix after checking that it is row-stochastic.
    pub fn from_matrix(w: DMatrix<f64>) -> Result<Self> {
        if w.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(MlrError::InvalidParameter(
                "responsibilities must lie in [0, 1]".into(),
            ));
        }
        for (i, row) in w.row_iter().enumerate() {
            if (row.sum() - 1.0).abs() > 1e-10 {
                return Err(MlrError::InvalidParameter(format!(
                    "responsibility row {i} sums to {}",
                    row.sum()
                )));
            }
        }
        Ok(Self { w })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.w
    }

    pub fn component(&self, k: usize) -> DVectorView<'_, f64> {
        self.w.column(k)
    }

    pub fn n(&self) -> usize {
        self.w.nrows()
    }

    pub fn k_components(&self) -> usize {
        self.w.ncols()
    }
}

/// Responsibilities `w_{k,i} ∝ f(y_i - <x_i, beta_k>)`, normalized per sample.
///
/// Evaluated in log space with the row maximum subtracted before
/// exponentiating. Also used verbatim by the ADMM solver.
pub fn e_step(params: &MlrParams, data: &Dataset, noise: &NoiseModel) -> Result<Responsibilities> {
    validate_problem(params, data)?;
    let fitted = data.x() * params.beta();
    let (n, k) = fitted.shape();
    let mut w = DMatrix::zeros(n, k);
    let mut logs = vec![0.0; k];
    for i in 0..n {
        let mut max = f64::NEG_INFINITY;
        for (j, l) in logs.iter_mut().enumerate() {
            *l = noise.log_density(data.y()[i] - fitted[(i, j)]);
            max = max.max(*l);
        }
        if !max.is_finite() {
            return Err(MlrError::DegenerateRow { row: i });
        }
        let mut total = 0.0;
        for (j, l) in logs.iter().enumerate() {
            let e = (l - max).exp();
            w[(i, j)] = e;
            total += e;
        }
        for j in 0..k {
            w[(i, j)] /= total;
        }
    }
    Ok(Responsibilities { w })
}

/// Gaussian M-step: per-component weighted least squares,
/// `beta_k = (sum_i w_ki x_i x_i^T)^{-1} sum_i w_ki y_i x_i`.
pub fn m_step_gaussian(w: &Responsibilities, data: &Dataset) -> Result<MlrParams> {
    check_weights(w, data)?;
    let d = data.dim();
    let mut beta = DMatrix::zeros(d, w.k_components());
    for k in 0..w.k_components() {
        let (gram, rhs) = weighted_normal_equations(data, w.component(k).iter().copied());
        let solver = RidgeSolver::new(gram).ok_or(MlrError::SingularGram { component: k })?;
        let col = solver.solve_vec(&rhs);
        if col.iter().any(|v| !v.is_finite()) {
            return Err(MlrError::SingularGram { component: k });
        }
        beta.set_column(k, &col);
    }
    MlrParams::new(beta)
}

/// Laplacian M-step on the IRLS path: per component, minimizes
/// `sum_i w_ki |y_i - <beta_k, x_i>|` by smoothed IRLS followed by a
/// warm-started vertex descent (see [`lad::irls_with_finish`]).
///
/// With a single covariate the problem is solved exactly as a weighted median
/// of the ratios `y_i / x_i`.
pub fn m_step_laplacian(w: &Responsibilities, data: &Dataset) -> Result<MlrParams> {
    check_weights(w, data)?;
    let mut beta = DMatrix::zeros(data.dim(), w.k_components());
    for k in 0..w.k_components() {
        let weights: Vec<f64> = w.component(k).iter().copied().collect();
        nonzero_mass(&weights, k)?;
        let col = if data.dim() == 1 {
            nalgebra::DVector::from_element(1, lad::lad_scalar(&weights, data))
        } else {
            lad::irls_with_finish(&weights, data).map_err(|stall| MlrError::SolverStall {
                component: k,
                iterations: stall.iterations,
            })?
        };
        beta.set_column(k, &col);
    }
    MlrParams::new(beta)
}

/// Laplacian M-step on the LP path: every component is solved to optimality
/// by [`lad::lad_simplex`].
pub fn m_step_laplacian_lp(w: &Responsibilities, data: &Dataset) -> Result<MlrParams> {
    check_weights(w, data)?;
    let mut beta = DMatrix::zeros(data.dim(), w.k_components());
    for k in 0..w.k_components() {
        let weights: Vec<f64> = w.component(k).iter().copied().collect();
        nonzero_mass(&weights, k)?;
        let sol = lad::lad_simplex(&weights, data).map_err(|e| match e {
            MlrError::SingularGram { .. } => MlrError::SingularGram { component: k },
            other => other,
        })?;
        beta.set_column(k, &sol.beta);
    }
    MlrParams::new(beta)
}

fn check_weights(w: &Responsibilities, data: &Dataset) -> Result<()> {
    if w.n() != data.n() {
        return Err(MlrError::DimensionMismatch(format!(
            "{} responsibility rows for {} samples",
            w.n(),
            data.n()
        )));
    }
    Ok(())
}

fn nonzero_mass(weights: &[f64], k: usize) -> Result<()> {
    if weights.iter().all(|&v| v == 0.0) {
        return Err(MlrError::InvalidParameter(format!("component {k} has zero total weight")));
    }
    Ok(())
}

/// How the Laplacian M-step was solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LadPath {
    Lp,
    Irls,
    /// Gaussian noise: no LAD problem is solved.
    NotApplicable,
}

impl LadPath {
    pub fn as_str(self) -> &'static str {
        match self {
            LadPath::Lp => "lp",
            LadPath::Irls => "irls",
            LadPath::NotApplicable => "n/a",
        }
    }
}

impl fmt::Display for LadPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LadPath {
    type Err = MlrError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "lp" => Ok(LadPath::Lp),
            "irls" => Ok(LadPath::Irls),
            "n/a" => Ok(LadPath::NotApplicable),
            other => Err(MlrError::InvalidParameter(format!("unknown LAD path `{other}`"))),
        }
    }
}

/// Default sample-count cap below which [`LadPolicy::Auto`] picks the LP path.
pub const DEFAULT_LP_CAP: usize = 5000;

/// Selection of the Laplacian M-step solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LadPolicy {
    /// LP path when `N <= lp_cap`, IRLS above.
    Auto { lp_cap: usize },
    Lp,
    Irls,
}

impl LadPolicy {
    pub fn resolve(self, noise: NoiseKind, n: usize) -> LadPath {
        match (noise, self) {
            (NoiseKind::Gaussian, _) => LadPath::NotApplicable,
            (NoiseKind::Laplacian, LadPolicy::Lp) => LadPath::Lp,
            (NoiseKind::Laplacian, LadPolicy::Irls) => LadPath::Irls,
            (NoiseKind::Laplacian, LadPolicy::Auto { lp_cap }) => {
                if n <= lp_cap {
                    LadPath::Lp
                } else {
                    LadPath::Irls
                }
            }
        }
    }
}

impl Default for LadPolicy {
    fn default() -> Self {
        LadPolicy::Auto { lp_cap: DEFAULT_LP_CAP }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EmOptions {
    pub lad_policy: LadPolicy,
}

/// Outcome of an EM run.
#[derive(Debug, Clone, PartialEq)]
pub struct EmTrace {
    /// Log-likelihood of the coefficients after each iteration.
    pub log_likelihood: Vec<f64>,
    /// Log-likelihood at the starting point.
    pub initial_log_likelihood: f64,
    pub initial_params: MlrParams,
    pub params: MlrParams,
    pub iterations: usize,
    pub wall_seconds: f64,
    pub lad_path: LadPath,
}

pub fn fit_em(data: &Dataset, k: usize, noise: &NoiseModel, cfg: &SolverConfig) -> Result<EmTrace> {
    fit_em_with(data, k, noise, cfg, &EmOptions::default())
}

/// Runs `cfg.n_iterations()` EM iterations from the shared initialization.
///
/// The first E-step is computed from the initial coefficients, so no separate
/// initial responsibilities are needed.
pub fn fit_em_with(
    data: &Dataset,
    k: usize,
    noise: &NoiseModel,
    cfg: &SolverConfig,
    opts: &EmOptions,
) -> Result<EmTrace> {
    let init = cfg.initial_params(data.dim(), k)?;
    validate_problem(&init, data)?;
    let mix = MixtureWeights::uniform(k)?;
    let path = opts.lad_policy.resolve(noise.kind(), data.n());

    let start = Instant::now();
    let initial_ll = log_likelihood(&init, data, noise, &mix)?;
    let mut params = init.clone();
    let mut trace = Vec::with_capacity(cfg.n_iterations());
    for _ in 0..cfg.n_iterations() {
        let w = e_step(&params, data, noise)?;
        params = match path {
            LadPath::NotApplicable => m_step_gaussian(&w, data)?,
            LadPath::Lp => m_step_laplacian_lp(&w, data)?,
            LadPath::Irls => m_step_laplacian(&w, data)?,
        };
        trace.push(log_likelihood(&params, data, noise, &mix)?);
    }
    let wall_seconds = start.elapsed().as_secs_f64();

    Ok(EmTrace {
        iterations: trace.len(),
        log_likelihood: trace,
        initial_log_likelihood: initial_ll,
        initial_params: init,
        params,
        wall_seconds,
        lad_path: path,
    })
}
