//! Scoring of fitted models: mixture log-likelihood, permutation-invariant
//! recovery error and the paired one-sided t-test used to compare solvers.

pub mod assignment;

pub use assignment::hungarian;

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{MlrError, Result};
use crate::linalg::compensated_sum;
use crate::model::{validate_problem, Dataset, MixtureWeights, MlrParams, NoiseModel};

/// `sum_i log(sum_k p_k f(y_i - <x_i, beta_k>))`, evaluated with log-sum-exp.
pub fn log_likelihood(
    params: &MlrParams,
    data: &Dataset,
    noise: &NoiseModel,
    mix: &MixtureWeights,
) -> Result<f64> {
    validate_problem(params, data)?;
    if mix.len() != params.k_components() {
        return Err(MlrError::DimensionMismatch(format!(
            "{} mixture weights for {} components",
            mix.len(),
            params.k_components()
        )));
    }
    let fitted = data.x() * params.beta();
    let log_p: Vec<f64> = mix.p().iter().map(|p| p.ln()).collect();
    let k = params.k_components();
    let mut terms = vec![0.0; k];
    let per_sample = (0..data.n()).map(|i| {
        for (j, t) in terms.iter_mut().enumerate() {
            *t = log_p[j] + noise.log_density(data.y()[i] - fitted[(i, j)]);
        }
        log_sum_exp(&terms)
    });
    Ok(compensated_sum(per_sample))
}

pub(crate) fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

/// Optimal matching between true and estimated components.
#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryReport {
    /// `sum_k ||beta_hat_{assignment[k]} - beta*_k||_2`.
    pub error: f64,
    /// True component `k` is matched with estimated component `assignment[k]`.
    pub assignment: Vec<usize>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Normalization {
    /// The summed distance as is.
    #[default]
    Raw,
    /// Divided by K.
    PerComponent,
    /// Divided by `sum_k ||beta*_k||_2`.
    RelativeToTruth,
}

impl Normalization {
    pub fn as_str(self) -> &'static str {
        match self {
            Normalization::Raw => "raw",
            Normalization::PerComponent => "per_component",
            Normalization::RelativeToTruth => "relative",
        }
    }
}

impl fmt::Display for Normalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Normalization {
    type Err = MlrError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(Normalization::Raw),
            "per_component" => Ok(Normalization::PerComponent),
            "relative" => Ok(Normalization::RelativeToTruth),
            other => Err(MlrError::InvalidParameter(format!("unknown normalization `{other}`"))),
        }
    }
}

impl RecoveryReport {
    pub fn normalized(&self, norm: Normalization, truth: &MlrParams) -> f64 {
        match norm {
            Normalization::Raw => self.error,
            Normalization::PerComponent => self.error / truth.k_components() as f64,
            Normalization::RelativeToTruth => {
                let scale: f64 = (0..truth.k_components()).map(|k| truth.component(k).norm()).sum();
                if scale > 0.0 {
                    self.error / scale
                } else {
                    self.error
                }
            }
        }
    }
}

/// Euclidean distance between true component `t` (row) and estimated
/// component `e` (column).
pub fn distance_matrix(estimated: &MlrParams, truth: &MlrParams) -> Result<DMatrix<f64>> {
    if estimated.dim() != truth.dim() || estimated.k_components() != truth.k_components() {
        return Err(MlrError::DimensionMismatch(format!(
            "estimate is {}x{} but truth is {}x{}",
            estimated.dim(),
            estimated.k_components(),
            truth.dim(),
            truth.k_components()
        )));
    }
    let k = truth.k_components();
    Ok(DMatrix::from_fn(k, k, |t, e| (estimated.component(e) - truth.component(t)).norm()))
}

/// Minimum over component permutations of the summed coefficient distance,
/// found with the Hungarian method on the `K × K` distance matrix.
pub fn recovery_error(estimated: &MlrParams, truth: &MlrParams) -> Result<RecoveryReport> {
    let cost = distance_matrix(estimated, truth)?;
    let assignment = hungarian(&cost);
    let error = assignment.iter().enumerate().map(|(t, &e)| cost[(t, e)]).sum();
    Ok(RecoveryReport { error, assignment })
}

/// Critical values are exact Student-t quantiles up to this sample size and
/// the normal quantile above.
pub const T_TABLE_MAX_N: usize = 200;
const NORMAL_CRITICAL_95: f64 = 1.645;

/// One-sided paired t-test of `mean(diffs) > 0` at level 0.05.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairedTTest {
    pub n: usize,
    pub mean: f64,
    pub std: f64,
    pub t_statistic: f64,
    pub critical_value: f64,
    /// `t_statistic > critical_value`.
    pub significant: bool,
}

/// Upper 5% point of Student's t with `n - 1` degrees of freedom.
pub fn critical_value_05(n: usize) -> f64 {
    if n > T_TABLE_MAX_N {
        return NORMAL_CRITICAL_95;
    }
    StudentsT::new(0.0, 1.0, (n - 1) as f64)
        .expect("degrees of freedom are positive")
        .inverse_cdf(0.95)
}

pub fn paired_t_test(diffs: &[f64]) -> Result<PairedTTest> {
    let n = diffs.len();
    if n < 2 {
        return Err(MlrError::InsufficientData(format!("paired t-test needs 2 or more differences, got {n}")));
    }
    if diffs.iter().any(|d| !d.is_finite()) {
        return Err(MlrError::NonFiniteInput("paired differences".into()));
    }
    let mean = diffs.iter().sum::<f64>() / n as f64;
    let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    if var == 0.0 {
        return Err(MlrError::ZeroVariance);
    }
    let std = var.sqrt();
    let t_statistic = mean / (std / (n as f64).sqrt());
    let critical_value = critical_value_05(n);
    Ok(PairedTTest {
        n,
        mean,
        std,
        t_statistic,
        critical_value,
        significant: t_statistic > critical_value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::NoiseModel;
    use crate::rng::seeded_rng;
    use crate::synth::generate;
    use nalgebra::{DMatrix, DVector};
    use rand::Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn brute_force(cost: &DMatrix<f64>) -> f64 {
        fn rec(cost: &DMatrix<f64>, row: usize, used: &mut Vec<bool>, acc: f64, best: &mut f64) {
            let n = cost.nrows();
            if row == n {
                *best = best.min(acc);
                return;
            }
            for c in 0..n {
                if !used[c] {
                    used[c] = true;
                    rec(cost, row + 1, used, acc + cost[(row, c)], best);
                    used[c] = false;
                }
            }
        }
        let mut best = f64::INFINITY;
        rec(cost, 0, &mut vec![false; cost.nrows()], 0.0, &mut best);
        best
    }

    fn random_params(d: usize, k: usize, seed: u64) -> MlrParams {
        let mut rng = seeded_rng(seed);
        MlrParams::new(DMatrix::from_fn(d, k, |_, _| StandardNormal.sample(&mut rng))).unwrap()
    }

    #[test]
    fn single_component_likelihood_is_sum_of_log_densities() {
        let nm = NoiseModel::gaussian(1.3).unwrap();
        let data = generate(1, 2, 30, &nm, 2).unwrap();
        let p = random_params(2, 1, 3);
        let ll = log_likelihood(&p, &data, &nm, &MixtureWeights::uniform(1).unwrap()).unwrap();
        let direct: f64 = (0..30).map(|i| nm.log_density(data.residual(i, p.component(0)))).sum();
        assert!((ll - direct).abs() < 1e-10);
    }

    #[test]
    fn duplicated_components_collapse() {
        let nm = NoiseModel::laplacian(1.0).unwrap();
        let data = generate(2, 2, 40, &nm, 4).unwrap();
        let one = random_params(2, 1, 5);
        let col: Vec<f64> = one.component(0).iter().copied().collect();
        let two = MlrParams::from_columns(&[col.clone(), col]).unwrap();
        let a = log_likelihood(&one, &data, &nm, &MixtureWeights::uniform(1).unwrap()).unwrap();
        let b = log_likelihood(&two, &data, &nm, &MixtureWeights::uniform(2).unwrap()).unwrap();
        assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn likelihood_hand_instance() {
        let x = DMatrix::from_row_slice(4, 1, &[1.0, 2.0, -1.0, 0.5]);
        let y = DVector::from_column_slice(&[0.9, 2.5, 1.2, -0.3]);
        let data = Dataset::new(x, y).unwrap();
        let p = MlrParams::from_columns(&[vec![1.0], vec![-1.0]]).unwrap();
        for nm in [NoiseModel::gaussian(0.7).unwrap(), NoiseModel::laplacian(0.7).unwrap()] {
            let ll = log_likelihood(&p, &data, &nm, &MixtureWeights::uniform(2).unwrap()).unwrap();
            let mut direct = 0.0;
            for i in 0..4 {
                let xi = data.x()[(i, 0)];
                let yi = data.y()[i];
                direct += (0.5 * nm.density(yi - xi) + 0.5 * nm.density(yi + xi)).ln();
            }
            assert!((ll - direct).abs() < 1e-12, "{ll} vs {direct}");
        }
    }

    #[test]
    fn identical_and_swapped_estimates_have_zero_error() {
        let truth = random_params(3, 2, 6);
        let same = recovery_error(&truth, &truth).unwrap();
        assert_eq!(same.error, 0.0);
        assert_eq!(same.assignment, vec![0, 1]);
        let swapped = truth.permuted(&[1, 0]).unwrap();
        let rep = recovery_error(&swapped, &truth).unwrap();
        assert_eq!(rep.error, 0.0);
        assert_eq!(rep.assignment, vec![1, 0]);
    }

    #[test]
    fn hungarian_matches_brute_force_k6() {
        let mut rng = seeded_rng(7);
        for _ in 0..10 {
            let cost = DMatrix::from_fn(6, 6, |_, _| rng.random::<f64>() * 10.0);
            let a = hungarian(&cost);
            let total: f64 = a.iter().enumerate().map(|(r, &c)| cost[(r, c)]).sum();
            assert!((total - brute_force(&cost)).abs() < 1e-12);
        }
    }

    #[test]
    fn recovery_error_is_symmetric_and_permutation_invariant() {
        for seed in 0..20 {
            let a = random_params(2, 4, seed);
            let b = random_params(2, 4, 1000 + seed);
            let ab = recovery_error(&a, &b).unwrap().error;
            let ba = recovery_error(&b, &a).unwrap().error;
            assert!((ab - ba).abs() < 1e-12);
            let perm = [3, 1, 0, 2];
            let permuted = recovery_error(&a.permuted(&perm).unwrap(), &b.permuted(&perm).unwrap()).unwrap();
            assert!((permuted.error - ab).abs() < 1e-12);
        }
    }

    #[test]
    fn mismatched_shapes_are_rejected() {
        assert!(matches!(
            recovery_error(&random_params(2, 3, 1), &random_params(2, 2, 1)),
            Err(MlrError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn normalizations() {
        let truth = MlrParams::from_columns(&[vec![3.0, 4.0], vec![0.0, 5.0]]).unwrap();
        let est = MlrParams::from_columns(&[vec![3.0, 5.0], vec![0.0, 5.0]]).unwrap();
        let rep = recovery_error(&est, &truth).unwrap();
        assert!((rep.normalized(Normalization::Raw, &truth) - 1.0).abs() < 1e-15);
        assert!((rep.normalized(Normalization::PerComponent, &truth) - 0.5).abs() < 1e-15);
        assert!((rep.normalized(Normalization::RelativeToTruth, &truth) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn t_test_examples() {
        let jittered: Vec<f64> = (0..30).map(|i| 1.0 + 1e-3 * ((i % 3) as f64 - 1.0)).collect();
        assert!(paired_t_test(&jittered).unwrap().significant);

        let alternating: Vec<f64> = (0..30).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let t = paired_t_test(&alternating).unwrap();
        assert!(t.t_statistic.abs() < 1e-12 && !t.significant);

        assert!(matches!(paired_t_test(&[1.0]), Err(MlrError::InsufficientData(_))));
        assert_eq!(paired_t_test(&[2.0, 2.0, 2.0]), Err(MlrError::ZeroVariance));
    }

    #[test]
    fn t_statistic_recomputed() {
        let mut rng = seeded_rng(8);
        let diffs: Vec<f64> = (0..30).map(|_| rng.random::<f64>() - 0.3).collect();
        let t = paired_t_test(&diffs).unwrap();
        // two-pass textbook formula
        let n = diffs.len() as f64;
        let mean = diffs.iter().sum::<f64>() / n;
        let ss: f64 = diffs.iter().map(|d| (d - mean) * (d - mean)).sum();
        let expected = mean * n.sqrt() / (ss / (n - 1.0)).sqrt();
        assert!((t.t_statistic - expected).abs() < 1e-10);
    }

    #[test]
    fn critical_values_match_tables() {
        // upper 5% Student-t points for df = 1, 10, 29, 100
        assert!((critical_value_05(2) - 6.313_751_5).abs() < 1e-6);
        assert!((critical_value_05(11) - 1.812_461_1).abs() < 1e-6);
        assert!((critical_value_05(30) - 1.699_127_0).abs() < 1e-6);
        assert!((critical_value_05(101) - 1.660_234_3).abs() < 1e-6);
        assert_eq!(critical_value_05(201), 1.645);
    }
}
