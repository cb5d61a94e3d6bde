use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::model::Dataset;

/// Relative ridge added to Gram matrices before factorization, as a fraction
/// of `trace / d`.
pub const RIDGE_SCALE: f64 = 1e-10;

const REFINEMENT_STEPS: usize = 2;

/// Solves `G b = r` for a symmetric positive semi-definite Gram matrix `G`.
///
/// The factorization is of `G + eps I` with `eps = RIDGE_SCALE * trace(G) / d`.
/// Solutions are then refined against the unregularized `G`, which removes the
/// ridge bias whenever `G` itself is well conditioned.
#[derive(Debug, Clone)]
pub(crate) struct RidgeSolver {
    gram: DMatrix<f64>,
    chol: Cholesky<f64, Dyn>,
}

impl RidgeSolver {
    pub(crate) fn new(gram: DMatrix<f64>) -> Option<Self> {
        let d = gram.nrows();
        let trace = gram.trace();
        if !(trace.is_finite() && trace > 0.0) {
            return None;
        }
        let ridge = RIDGE_SCALE * trace / d as f64;
        let shifted = &gram + DMatrix::identity(d, d) * ridge;
        let chol = Cholesky::new(shifted)?;
        Some(Self { gram, chol })
    }

    pub(crate) fn solve(&self, rhs: &DMatrix<f64>) -> DMatrix<f64> {
        let mut sol = self.chol.solve(rhs);
        for _ in 0..REFINEMENT_STEPS {
            let residual = rhs - &self.gram * &sol;
            sol += self.chol.solve(&residual);
        }
        sol
    }

    pub(crate) fn solve_vec(&self, rhs: &DVector<f64>) -> DVector<f64> {
        let mut sol = self.chol.solve(rhs);
        for _ in 0..REFINEMENT_STEPS {
            let residual = rhs - &self.gram * &sol;
            sol += self.chol.solve(&residual);
        }
        sol
    }
}

/// `sum_i w_i x_i x_i^T` and `sum_i w_i y_i x_i`.
pub(crate) fn weighted_normal_equations(
    data: &Dataset,
    weights: impl Iterator<Item = f64>,
) -> (DMatrix<f64>, DVector<f64>) {
    let d = data.dim();
    let x = data.x();
    let y = data.y();
    let mut gram = DMatrix::zeros(d, d);
    let mut rhs = DVector::zeros(d);
    for (i, w) in weights.enumerate() {
        if w == 0.0 {
            continue;
        }
        for a in 0..d {
            let wxa = w * x[(i, a)];
            rhs[a] += wxa * y[i];
            for b in 0..=a {
                gram[(a, b)] += wxa * x[(i, b)];
            }
        }
    }
    for a in 0..d {
        for b in 0..a {
            gram[(b, a)] = gram[(a, b)];
        }
    }
    (gram, rhs)
}

/// Neumaier-compensated sum.
pub(crate) fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}
