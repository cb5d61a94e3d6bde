//! ADMM with a majorized Z-step for mixed linear regression.
//!
//! The likelihood is rewritten with auxiliary fitted values
//! `z_{k,i} = <x_i, beta_k>`, giving the augmented Lagrangian
//!
//! ```text
//! L(beta, Z, lambda) = -sum_i log(sum_k p_k f(y_i - z_{k,i}))
//!                      + <lambda, X beta - Z> + rho/2 ||X beta - Z||_F^2
//! ```
//!
//! The exact Z-minimization does not separate across components, so each
//! iteration instead minimizes the upper bound `L_hat` obtained from Jensen's
//! inequality with responsibilities `w` computed at the current `X beta`:
//!
//! ```text
//! L_hat = -sum_{i,k} w_{k,i} log f(y_i - z_{k,i}) + C
//!         + <lambda, X beta - Z> + rho/2 ||X beta - Z||_F^2
//! C     = sum_i [ sum_k w_{k,i} log f(y_i - z0_{k,i}) - log(sum_k p_k f(y_i - z0_{k,i})) ]
//! ```
//!
//! where `z0 = X beta` is the expansion point. `L_hat` separates into scalar
//! problems
//!
//! ```text
//! l_hat(z) = -w log f(y - z) - lambda z + rho/2 (x^T beta - z)^2
//! ```
//!
//! that have closed-form minimizers for both noise families. The beta-step is a
//! least-squares solve with the fixed matrix `X^T X`, factorized once per fit,
//! and the dual step is plain ascent on `lambda`.

use std::time::Instant;

use nalgebra::DMatrix;

use crate::em::{e_step, Responsibilities};
use crate::error::{MlrError, Result};
use crate::eval::{log_likelihood, log_sum_exp};
use crate::linalg::{compensated_sum, RidgeSolver};
use crate::model::{validate_problem, Dataset, MixtureWeights, MlrParams, NoiseKind, NoiseModel, SolverConfig};

/// Primal and dual iterates.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmmState {
    pub params: MlrParams,
    /// `N × K`, entry `(i, k)` is `z_{k,i}`.
    pub z: DMatrix<f64>,
    /// `N × K` multipliers of the constraint `X beta = Z`.
    pub lambda: DMatrix<f64>,
    pub rho: f64,
    pub iteration: usize,
}

impl AdmmState {
    /// State with `Z = X beta` and zero multipliers.
    pub fn new(params: MlrParams, data: &Dataset, rho: f64) -> Result<Self> {
        validate_problem(&params, data)?;
        if !(rho.is_finite() && rho > 0.0) {
            return Err(MlrError::InvalidParameter(format!("rho must be positive, got {rho}")));
        }
        let z = data.x() * params.beta();
        let lambda = DMatrix::zeros(z.nrows(), z.ncols());
        Ok(Self { params, z, lambda, rho, iteration: 0 })
    }

    /// Checks shapes and finiteness against `data`.
    pub fn validate(&self, data: &Dataset) -> Result<()> {
        validate_problem(&self.params, data)?;
        let shape = (data.n(), self.params.k_components());
        if self.z.shape() != shape || self.lambda.shape() != shape {
            return Err(MlrError::DimensionMismatch(format!(
                "Z is {:?} and lambda is {:?}, expected {shape:?}",
                self.z.shape(),
                self.lambda.shape()
            )));
        }
        if self.z.iter().chain(self.lambda.iter()).any(|v| !v.is_finite()) {
            return Err(MlrError::NonFiniteInput("ADMM state".into()));
        }
        Ok(())
    }
}

/// Responsibilities at the current coefficients; the same routine as the EM
/// E-step.
pub fn responsibilities(params: &MlrParams, data: &Dataset, noise: &NoiseModel) -> Result<Responsibilities> {
    e_step(params, data, noise)
}

/// Scalar surrogate `l_hat(z) = -w log f(y - z) - lambda z + rho/2 (fitted - z)^2`.
pub fn coordinate_surrogate(noise: &NoiseModel, w: f64, y: f64, fitted: f64, lambda: f64, rho: f64, z: f64) -> f64 {
    -w * noise.log_density(y - z) - lambda * z + 0.5 * rho * (fitted - z).powi(2)
}

/// Closed-form minimizer of the Gaussian scalar surrogate,
/// `z = (w y + sigma^2 rho fitted + sigma^2 lambda) / (w + sigma^2 rho)`.
pub fn gaussian_coordinate(sigma: f64, w: f64, y: f64, fitted: f64, lambda: f64, rho: f64) -> f64 {
    let s2 = sigma * sigma;
    (w * y + s2 * rho * fitted + s2 * lambda) / (w + s2 * rho)
}

/// Candidate selection for the Laplacian Z-step.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum CandidateRule {
    /// Keep the stationary point of each linear piece only when it lies on
    /// that piece, then take the surrogate minimum over the survivors and `y`.
    /// This is the exact minimizer.
    #[default]
    Filtered,
    /// Score all three candidates, each with the formula of the piece it was
    /// derived from, regardless of where it falls. Kept for comparison.
    Unconditional,
}

/// Minimizer of the Laplacian scalar surrogate
/// `w |y - z| / b - lambda z + rho/2 (fitted - z)^2` (up to the constant
/// `w log 2b`).
///
/// The stationary points of the two pieces are
/// `z_bar = fitted + (lambda b + w) / (b rho)` for `z < y` and
/// `z_tilde = fitted - (w - lambda b) / (b rho)` for `z > y`; the kink `y` is
/// the third candidate. Ties go to `y`, then to `z_bar`.
pub fn laplacian_coordinate(b: f64, w: f64, y: f64, fitted: f64, lambda: f64, rho: f64, rule: CandidateRule) -> f64 {
    let z_bar = fitted + (lambda * b + w) / (b * rho);
    let z_tilde = fitted - (-lambda * b + w) / (b * rho);
    let quad = |z: f64| -lambda * z + 0.5 * rho * (fitted - z).powi(2);
    let exact = |z: f64| w * (y - z).abs() / b + quad(z);

    let mut best = (exact(y), y);
    let mut consider = |value: f64, z: f64| {
        if value < best.0 {
            best = (value, z);
        }
    };
    match rule {
        CandidateRule::Filtered => {
            if z_bar < y {
                consider(exact(z_bar), z_bar);
            }
            if z_tilde > y {
                consider(exact(z_tilde), z_tilde);
            }
        }
        CandidateRule::Unconditional => {
            consider(w * (y - z_bar) / b + quad(z_bar), z_bar);
            consider(-w * (y - z_tilde) / b + quad(z_tilde), z_tilde);
        }
    }
    best.1
}

fn check_inputs(state: &AdmmState, w: &Responsibilities, data: &Dataset) -> Result<()> {
    state.validate(data)?;
    if w.matrix().shape() != state.z.shape() {
        return Err(MlrError::DimensionMismatch(format!(
            "responsibilities are {:?}, Z is {:?}",
            w.matrix().shape(),
            state.z.shape()
        )));
    }
    Ok(())
}

pub fn z_update_gaussian(state: &AdmmState, w: &Responsibilities, data: &Dataset, noise: &NoiseModel) -> Result<DMatrix<f64>> {
    check_inputs(state, w, data)?;
    let fitted = data.x() * state.params.beta();
    let sigma = noise.sigma();
    Ok(DMatrix::from_fn(fitted.nrows(), fitted.ncols(), |i, k| {
        gaussian_coordinate(sigma, w.matrix()[(i, k)], data.y()[i], fitted[(i, k)], state.lambda[(i, k)], state.rho)
    }))
}

pub fn z_update_laplacian(state: &AdmmState, w: &Responsibilities, data: &Dataset, noise: &NoiseModel) -> Result<DMatrix<f64>> {
    z_update_laplacian_with(state, w, data, noise, CandidateRule::Filtered)
}

pub fn z_update_laplacian_with(
    state: &AdmmState,
    w: &Responsibilities,
    data: &Dataset,
    noise: &NoiseModel,
    rule: CandidateRule,
) -> Result<DMatrix<f64>> {
    check_inputs(state, w, data)?;
    let fitted = data.x() * state.params.beta();
    let b = noise.b();
    Ok(DMatrix::from_fn(fitted.nrows(), fitted.ncols(), |i, k| {
        laplacian_coordinate(b, w.matrix()[(i, k)], data.y()[i], fitted[(i, k)], state.lambda[(i, k)], state.rho, rule)
    }))
}

/// Factorization of `X^T X` reused by every beta-step of a fit.
#[derive(Debug, Clone)]
pub struct GramFactor {
    solver: RidgeSolver,
    dim: usize,
}

impl GramFactor {
    pub fn new(data: &Dataset) -> Result<Self> {
        let x = data.x();
        let solver = RidgeSolver::new(x.transpose() * x).ok_or(MlrError::SingularGram { component: 0 })?;
        Ok(Self { solver, dim: data.dim() })
    }
}

/// `beta = (X^T X)^{-1} X^T (Z - lambda / rho)`.
pub fn beta_update(z: &DMatrix<f64>, lambda: &DMatrix<f64>, data: &Dataset, rho: f64, gram: &GramFactor) -> Result<MlrParams> {
    if z.shape() != lambda.shape() || z.nrows() != data.n() || gram.dim != data.dim() {
        return Err(MlrError::DimensionMismatch("beta-step inputs disagree in shape".into()));
    }
    let target = z - lambda / rho;
    let rhs = data.x().transpose() * target;
    MlrParams::new(gram.solver.solve(&rhs))
}

/// `lambda + rho (X beta - Z)`.
pub fn dual_update(state: &AdmmState, data: &Dataset) -> Result<DMatrix<f64>> {
    state.validate(data)?;
    let gap = data.x() * state.params.beta() - &state.z;
    Ok(&state.lambda + gap * state.rho)
}

/// Surrogate and exact augmented Lagrangian at the same point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurrogateValue {
    /// `L_hat(beta, Z, lambda)` including its constant `C`.
    pub surrogate: f64,
    pub lagrangian: f64,
}

fn penalty_terms(state: &AdmmState, data: &Dataset) -> f64 {
    let gap = data.x() * state.params.beta() - &state.z;
    compensated_sum(state.lambda.iter().zip(gap.iter()).map(|(l, g)| l * g + 0.5 * state.rho * g * g))
}

/// Exact augmented Lagrangian with uniform mixture weights.
pub fn augmented_lagrangian(state: &AdmmState, data: &Dataset, noise: &NoiseModel) -> Result<f64> {
    state.validate(data)?;
    let k = state.params.k_components();
    let log_p = -(k as f64).ln();
    let mut terms = vec![0.0; k];
    let nll = compensated_sum((0..data.n()).map(|i| {
        for (j, t) in terms.iter_mut().enumerate() {
            *t = log_p + noise.log_density(data.y()[i] - state.z[(i, j)]);
        }
        -log_sum_exp(&terms)
    }));
    Ok(nll + penalty_terms(state, data))
}

/// Evaluates `L_hat` at `state.z`, expanded at `X state.params`.
///
/// `w` must be the responsibilities at `state.params` for the upper bound to
/// hold; the bound is tight when `state.z` equals the expansion point.
pub fn surrogate_value(state: &AdmmState, w: &Responsibilities, data: &Dataset, noise: &NoiseModel) -> Result<SurrogateValue> {
    check_inputs(state, w, data)?;
    let expansion = data.x() * state.params.beta();
    let k = state.params.k_components();
    let log_p = -(k as f64).ln();
    let wm = w.matrix();
    let mut terms = vec![0.0; k];

    let constant = compensated_sum((0..data.n()).map(|i| {
        let mut weighted = 0.0;
        for (j, t) in terms.iter_mut().enumerate() {
            let lf = noise.log_density(data.y()[i] - expansion[(i, j)]);
            weighted += wm[(i, j)] * lf;
            *t = log_p + lf;
        }
        weighted - log_sum_exp(&terms)
    }));
    let weighted_nll = compensated_sum((0..data.n()).flat_map(|i| {
        (0..k).map(move |j| -wm[(i, j)] * noise.log_density(data.y()[i] - state.z[(i, j)]))
    }));
    let penalty = penalty_terms(state, data);
    Ok(SurrogateValue {
        surrogate: weighted_nll + constant + penalty,
        lagrangian: augmented_lagrangian(state, data, noise)?,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AdmmOptions {
    pub candidate_rule: CandidateRule,
    /// Stop once `||X beta - Z||_F <= tol * (1 + ||Z||_F)`. Off by default.
    pub early_stop_tol: Option<f64>,
}

/// Outcome of an ADMM run.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmmTrace {
    /// Mixture log-likelihood of beta after each iteration.
    pub log_likelihood: Vec<f64>,
    /// `||X beta - Z||_F` after each iteration.
    pub primal_residual: Vec<f64>,
    pub initial_log_likelihood: f64,
    pub initial_params: MlrParams,
    pub params: MlrParams,
    pub iterations: usize,
    pub wall_seconds: f64,
}

pub fn fit_admm(data: &Dataset, k: usize, noise: &NoiseModel, cfg: &SolverConfig) -> Result<AdmmTrace> {
    fit_admm_with(data, k, noise, cfg, &AdmmOptions::default())
}

/// Runs ADMM from the shared initialization with `lambda = 0` and `Z = X beta`.
pub fn fit_admm_with(
    data: &Dataset,
    k: usize,
    noise: &NoiseModel,
    cfg: &SolverConfig,
    opts: &AdmmOptions,
) -> Result<AdmmTrace> {
    let init = cfg.initial_params(data.dim(), k)?;
    let mix = MixtureWeights::uniform(k)?;

    let start = Instant::now();
    let gram = GramFactor::new(data)?;
    let mut state = AdmmState::new(init.clone(), data, cfg.rho())?;
    let initial_ll = log_likelihood(&init, data, noise, &mix)?;
    let mut lls = Vec::with_capacity(cfg.n_iterations());
    let mut residuals = Vec::with_capacity(cfg.n_iterations());
    for _ in 0..cfg.n_iterations() {
        let w = responsibilities(&state.params, data, noise)?;
        state.z = match noise.kind() {
            NoiseKind::Gaussian => z_update_gaussian(&state, &w, data, noise)?,
            NoiseKind::Laplacian => z_update_laplacian_with(&state, &w, data, noise, opts.candidate_rule)?,
        };
        state.params = beta_update(&state.z, &state.lambda, data, state.rho, &gram)?;
        state.lambda = dual_update(&state, data)?;
        state.iteration += 1;

        let residual = (data.x() * state.params.beta() - &state.z).norm();
        lls.push(log_likelihood(&state.params, data, noise, &mix)?);
        residuals.push(residual);
        if let Some(tol) = opts.early_stop_tol {
            if residual <= tol * (1.0 + state.z.norm()) {
                break;
            }
        }
    }
    let wall_seconds = start.elapsed().as_secs_f64();

    Ok(AdmmTrace {
        iterations: lls.len(),
        log_likelihood: lls,
        primal_residual: residuals,
        initial_log_likelihood: initial_ll,
        initial_params: init,
        params: state.params,
        wall_seconds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded_rng;
    use crate::synth::generate;
    use nalgebra::DVector;
    use rand::Rng;

    /// `l_hat(zc + t) - l_hat(zc)` arranged so that every term is O(t): the
    /// log-normalizer cancels and no large quantities are subtracted.
    #[allow(clippy::too_many_arguments)]
    fn surrogate_increment(nm: &NoiseModel, w: f64, y: f64, fitted: f64, lambda: f64, rho: f64, zc: f64, t: f64) -> f64 {
        let e = y - zc;
        let data = match nm.kind() {
            NoiseKind::Gaussian => w * (t * t - 2.0 * e * t) / (2.0 * nm.sigma().powi(2)),
            NoiseKind::Laplacian => {
                let denom = (e - t).abs() + e.abs();
                if denom == 0.0 {
                    0.0
                } else {
                    w * (t * t - 2.0 * e * t) / denom / nm.b()
                }
            }
        };
        data - lambda * t + 0.5 * rho * (t * t - 2.0 * (fitted - zc) * t)
    }

    /// Numerical scalar minimizer: dense grid on `l_hat`, then golden-section
    /// refinement of the increment around the grid minimum. The objective is
    /// convex, so the grid minimum brackets the global one.
    fn numeric_argmin(nm: &NoiseModel, w: f64, y: f64, fitted: f64, lambda: f64, rho: f64) -> f64 {
        let f = |z: f64| coordinate_surrogate(nm, w, y, fitted, lambda, rho, z);
        let (lo, hi, steps) = (-60.0, 60.0, 4000);
        let h = (hi - lo) / steps as f64;
        let zc = (0..=steps)
            .map(|s| lo + h * s as f64)
            .min_by(|p, q| f(*p).total_cmp(&f(*q)))
            .unwrap();
        let g = |t: f64| surrogate_increment(nm, w, y, fitted, lambda, rho, zc, t);
        let (mut a, mut b) = (-h, h);
        let ratio = (5f64.sqrt() - 1.0) / 2.0;
        while b - a > 1e-13 {
            let c = b - ratio * (b - a);
            let d = a + ratio * (b - a);
            if g(c) <= g(d) {
                b = d;
            } else {
                a = c;
            }
        }
        let t = 0.5 * (a + b);
        // the kink of the Laplacian piece is a candidate golden-section can only approach
        let kink = y - zc;
        zc + if kink.abs() <= h && g(kink) <= g(t) { kink } else { t }
    }

    #[test]
    fn increment_matches_direct_difference() {
        let mut rng = seeded_rng(40);
        for _ in 0..200 {
            let nm = if rng.random::<bool>() { NoiseModel::gaussian(1.3) } else { NoiseModel::laplacian(0.8) }.unwrap();
            let (w, y, fitted, lambda, rho) = (rng.random::<f64>(), rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0), rng.random_range(-1.0..1.0), 1.5);
            let (zc, t) = (rng.random_range(-3.0..3.0), rng.random_range(-1.0..1.0));
            let direct = coordinate_surrogate(&nm, w, y, fitted, lambda, rho, zc + t) - coordinate_surrogate(&nm, w, y, fitted, lambda, rho, zc);
            assert!((direct - surrogate_increment(&nm, w, y, fitted, lambda, rho, zc, t)).abs() < 1e-12);
        }
    }

    fn state_for(data: &Dataset, k: usize, seed: u64) -> AdmmState {
        let cfg = SolverConfig::new(1, 1.0, seed).unwrap();
        AdmmState::new(cfg.initial_params(data.dim(), k).unwrap(), data, 1.0).unwrap()
    }

    #[test]
    fn gaussian_coordinate_special_cases() {
        assert_eq!(gaussian_coordinate(1.3, 0.0, 5.0, 2.0, 0.0, 0.7), 2.0);
        assert!((gaussian_coordinate(1.3, 0.4, 2.0, 2.0, 0.0, 0.7) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn laplacian_coordinate_special_cases() {
        // no data term: the quadratic minimum
        assert_eq!(laplacian_coordinate(0.7, 0.0, 5.0, 2.0, 0.0, 1.0, CandidateRule::Filtered), 2.0);
        // fitted value already at y: the kink wins
        assert_eq!(laplacian_coordinate(0.7, 0.5, 2.0, 2.0, 0.0, 1.0, CandidateRule::Filtered), 2.0);
    }

    #[test]
    fn coordinate_updates_match_numeric_minimizer() {
        let mut rng = seeded_rng(41);
        for _ in 0..500 {
            let sigma = rng.random_range(0.2..3.0);
            let w = rng.random::<f64>();
            let y = rng.random_range(-5.0..5.0);
            let fitted = rng.random_range(-5.0..5.0);
            let lambda = rng.random_range(-2.0..2.0);
            let rho = rng.random_range(0.1..5.0);
            for nm in [NoiseModel::gaussian(sigma).unwrap(), NoiseModel::laplacian(sigma).unwrap()] {
                let closed = match nm.kind() {
                    NoiseKind::Gaussian => gaussian_coordinate(sigma, w, y, fitted, lambda, rho),
                    NoiseKind::Laplacian => laplacian_coordinate(nm.b(), w, y, fitted, lambda, rho, CandidateRule::Filtered),
                };
                let numeric = numeric_argmin(&nm, w, y, fitted, lambda, rho);
                assert!(
                    (closed - numeric).abs() < 1e-8,
                    "{:?}: {closed} vs {numeric}",
                    nm.kind()
                );
            }
        }
    }

    #[test]
    fn unconditional_rule_can_pick_a_wrong_piece() {
        let mut rng = seeded_rng(43);
        let mut differs = 0;
        for _ in 0..2000 {
            let w = rng.random::<f64>();
            let y = rng.random_range(-2.0..2.0);
            let fitted = rng.random_range(-2.0..2.0);
            let lambda = rng.random_range(-2.0..2.0);
            let a = laplacian_coordinate(0.7, w, y, fitted, lambda, 1.0, CandidateRule::Filtered);
            let b = laplacian_coordinate(0.7, w, y, fitted, lambda, 1.0, CandidateRule::Unconditional);
            if a != b {
                differs += 1;
            }
        }
        assert!(differs > 0);
    }

    #[test]
    fn beta_update_recovers_consistent_system() {
        let data = generate(2, 3, 50, &NoiseModel::gaussian(1.0).unwrap(), 3).unwrap();
        let beta0 = data.true_params().unwrap().clone();
        let z = data.x() * beta0.beta();
        let gram = GramFactor::new(&data).unwrap();
        let beta = beta_update(&z, &DMatrix::zeros(50, 2), &data, 1.0, &gram).unwrap();
        assert!((beta.beta() - beta0.beta()).abs().max() < 1e-10);
    }

    #[test]
    fn beta_update_scalar_normal_equation() {
        let data = generate(2, 1, 30, &NoiseModel::gaussian(1.0).unwrap(), 4).unwrap();
        let mut rng = seeded_rng(5);
        let z = DMatrix::from_fn(30, 2, |_, _| rng.random::<f64>());
        let lambda = DMatrix::from_fn(30, 2, |_, _| rng.random::<f64>() - 0.5);
        let rho = 2.5;
        let beta = beta_update(&z, &lambda, &data, rho, &GramFactor::new(&data).unwrap()).unwrap();
        let x = data.x().column(0);
        for k in 0..2 {
            let num: f64 = (0..30).map(|i| x[i] * (z[(i, k)] - lambda[(i, k)] / rho)).sum();
            let den: f64 = x.iter().map(|v| v * v).sum();
            assert!((beta.component(k)[0] - num / den).abs() < 1e-12);
        }
    }

    #[test]
    fn dual_update_examples() {
        let data = Dataset::new(DMatrix::from_element(1, 1, 1.0), DVector::from_element(1, 0.0)).unwrap();
        let params = MlrParams::from_columns(&[vec![3.0]]).unwrap();
        let mut state = AdmmState::new(params, &data, 1.0).unwrap();
        assert_eq!(dual_update(&state, &data).unwrap(), state.lambda);
        state.z[(0, 0)] = 1.0;
        assert_eq!(dual_update(&state, &data).unwrap()[(0, 0)], 2.0);
    }

    #[test]
    fn surrogate_is_tight_at_expansion_point() {
        for nm in [NoiseModel::gaussian(1.0).unwrap(), NoiseModel::laplacian(1.0).unwrap()] {
            let data = generate(3, 2, 40, &nm, 11).unwrap();
            let mut state = state_for(&data, 3, 12);
            state.lambda = DMatrix::from_fn(40, 3, |i, k| ((i + k) % 5) as f64 * 0.1 - 0.2);
            let w = responsibilities(&state.params, &data, &nm).unwrap();
            let v = surrogate_value(&state, &w, &data, &nm).unwrap();
            assert!((v.surrogate - v.lagrangian).abs() < 1e-9);

            state.z.add_scalar_mut(0.3);
            let v = surrogate_value(&state, &w, &data, &nm).unwrap();
            assert!(v.surrogate >= v.lagrangian - 1e-9);
        }
    }

    #[test]
    fn single_component_surrogate_is_exact() {
        let nm = NoiseModel::laplacian(1.0).unwrap();
        let data = generate(1, 2, 30, &nm, 13).unwrap();
        let mut state = state_for(&data, 1, 14);
        let w = responsibilities(&state.params, &data, &nm).unwrap();
        let mut rng = seeded_rng(15);
        for _ in 0..10 {
            state.z = DMatrix::from_fn(30, 1, |_, _| rng.random_range(-3.0..3.0));
            let v = surrogate_value(&state, &w, &data, &nm).unwrap();
            assert!((v.surrogate - v.lagrangian).abs() < 1e-9);
        }
    }

    #[test]
    fn admm_and_em_share_the_starting_point() {
        let nm = NoiseModel::laplacian(1.0).unwrap();
        let data = generate(2, 2, 100, &nm, 16).unwrap();
        let cfg = SolverConfig::new(3, 1.0, 17).unwrap();
        let a = fit_admm(&data, 2, &nm, &cfg).unwrap();
        let e = crate::em::fit_em(&data, 2, &nm, &cfg).unwrap();
        assert_eq!(a.initial_params, e.initial_params);
    }

    #[test]
    fn fits_are_deterministic() {
        let nm = NoiseModel::gaussian(1.0).unwrap();
        let data = generate(2, 2, 200, &nm, 18).unwrap();
        let cfg = SolverConfig::new(50, 1.0, 19).unwrap();
        let a = fit_admm(&data, 2, &nm, &cfg).unwrap();
        let b = fit_admm(&data, 2, &nm, &cfg).unwrap();
        assert_eq!(a.params, b.params);
        assert_eq!(a.log_likelihood, b.log_likelihood);
        assert_eq!(a.primal_residual, b.primal_residual);
    }

    #[test]
    fn early_stop_shortens_the_trace() {
        let nm = NoiseModel::gaussian(1.0).unwrap();
        let data = generate(2, 2, 200, &nm, 20).unwrap();
        let cfg = SolverConfig::new(2000, 1.0, 21).unwrap();
        let opts = AdmmOptions { early_stop_tol: Some(1e-6), ..Default::default() };
        let trace = fit_admm_with(&data, 2, &nm, &cfg, &opts).unwrap();
        assert!(trace.iterations < 2000);
        assert_eq!(trace.primal_residual.len(), trace.iterations);
    }
}
