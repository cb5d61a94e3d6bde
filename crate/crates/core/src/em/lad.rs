//! Weighted least absolute deviations: `min_beta sum_i w_i |y_i - <beta, x_i>|`.
//!
//! Three solvers live here:
//!
//! * [`irls`]: iteratively reweighted least squares on the smoothed objective
//!   `sum_i w_i sqrt(r_i^2 + delta^2)`. Cheap per iteration, approximate.
//! * [`lad_simplex`]: an exact simplex method that walks the vertices of the
//!   LP epigraph. A vertex is a set of `d` samples with zero residual; each
//!   step drops one of them, moves along the resulting edge and stops at the
//!   breakpoint where the directional derivative turns non-negative. Every
//!   step costs `O(N d + N log N)`, so it scales to tens of thousands of rows.
//! * [`lad_lp_oracle`]: builds the textbook LP with epigraph variables
//!   `h_i >= ±(y_i - <beta, x_i>)` and hands it to the dense tableau solver in
//!   [`crate::simplex`]. Only meant for test-sized instances.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};

use crate::error::{MlrError, Result};
use crate::linalg::{weighted_normal_equations, RidgeSolver};
use crate::model::Dataset;
use crate::simplex::{self, StandardForm};

/// Maximum number of IRLS iterations.
pub const IRLS_MAX_ITERATIONS: usize = 100;
/// IRLS stops once the relative decrease of the smoothed objective falls below this.
pub const IRLS_TOLERANCE: f64 = 1e-10;
/// Smoothing `delta = IRLS_DELTA_SCALE * (1 + std(y))`.
pub const IRLS_DELTA_SCALE: f64 = 1e-6;

/// Minimizer and optimal value of a weighted LAD problem.
#[derive(Debug, Clone, PartialEq)]
pub struct LadSolution {
    pub beta: DVector<f64>,
    pub objective: f64,
}

/// The IRLS loop ran out of iterations before reaching its tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Stall {
    pub iterations: usize,
}

pub fn lad_objective(weights: &[f64], data: &Dataset, beta: &DVector<f64>) -> f64 {
    let fitted = data.x() * beta;
    weights
        .iter()
        .zip(data.y().iter().zip(fitted.iter()))
        .map(|(w, (y, f))| w * (y - f).abs())
        .sum()
}

/// Lower weighted median: the smallest value whose cumulative weight reaches
/// half of the total. Zero-weight entries are ignored.
pub fn weighted_median(values: &[f64], weights: &[f64]) -> f64 {
    let mut pairs: Vec<(f64, f64)> = values
        .iter()
        .zip(weights)
        .filter(|(_, &w)| w > 0.0)
        .map(|(&v, &w)| (v, w))
        .collect();
    assert!(!pairs.is_empty(), "weighted median of an empty or zero-weight set");
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let half = pairs.iter().map(|p| p.1).sum::<f64>() / 2.0;
    let mut cum = 0.0;
    for &(v, w) in &pairs {
        cum += w;
        if cum >= half {
            return v;
        }
    }
    pairs[pairs.len() - 1].0
}

/// Exact one-covariate LAD: `sum w_i |x_i| |y_i/x_i - beta|` is minimized at
/// the weighted median of the ratios. Requires `data.dim() == 1`.
pub(crate) fn lad_scalar(weights: &[f64], data: &Dataset) -> f64 {
    debug_assert_eq!(data.dim(), 1);
    let x = data.x().column(0);
    let mut ratios = Vec::with_capacity(weights.len());
    let mut scaled = Vec::with_capacity(weights.len());
    for i in 0..weights.len() {
        if x[i] != 0.0 {
            ratios.push(data.y()[i] / x[i]);
            scaled.push(weights[i] * x[i].abs());
        }
    }
    if scaled.iter().all(|&w| w == 0.0) {
        return 0.0;
    }
    weighted_median(&ratios, &scaled)
}

fn sample_std(y: &DVector<f64>) -> f64 {
    let n = y.len();
    if n < 2 {
        return 0.0;
    }
    let mean = y.mean();
    (y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
}

/// IRLS on the smoothed LAD objective, started from the weighted least squares
/// fit. Returns `Err(Stall)` if [`IRLS_MAX_ITERATIONS`] pass without the
/// relative decrease dropping below [`IRLS_TOLERANCE`].
pub fn irls(weights: &[f64], data: &Dataset) -> std::result::Result<DVector<f64>, Stall> {
    match irls_run(weights, data)? {
        (beta, true) => Ok(beta),
        (_, false) => Err(Stall { iterations: IRLS_MAX_ITERATIONS }),
    }
}

/// IRLS followed by vertex descent warm-started at the IRLS point, which
/// lands on an exact LAD optimum in a few pivots. If the descent fails, a
/// converged IRLS iterate is returned as is; otherwise the stall is reported.
pub fn irls_with_finish(weights: &[f64], data: &Dataset) -> std::result::Result<DVector<f64>, Stall> {
    let (beta, converged) = irls_run(weights, data)?;
    match lad_simplex_from(weights, data, beta.clone()) {
        Ok(exact) => Ok(exact.beta),
        Err(_) if converged => Ok(beta),
        Err(_) => Err(Stall { iterations: IRLS_MAX_ITERATIONS }),
    }
}

/// Last iterate and whether the tolerance was met within the cap.
fn irls_run(weights: &[f64], data: &Dataset) -> std::result::Result<(DVector<f64>, bool), Stall> {
    let delta = IRLS_DELTA_SCALE * (1.0 + sample_std(data.y()));
    let smoothed = |beta: &DVector<f64>| -> (f64, DVector<f64>) {
        let r = data.y() - data.x() * beta;
        let obj = weights
            .iter()
            .zip(r.iter())
            .map(|(w, ri)| w * (ri * ri + delta * delta).sqrt())
            .sum();
        (obj, r)
    };
    let solve = |u: &[f64]| -> Option<DVector<f64>> {
        let (gram, rhs) = weighted_normal_equations(data, u.iter().copied());
        let sol = RidgeSolver::new(gram)?.solve_vec(&rhs);
        sol.iter().all(|v| v.is_finite()).then_some(sol)
    };

    let Some(mut beta) = solve(weights) else {
        return Err(Stall { iterations: 0 });
    };
    let (mut obj, mut r) = smoothed(&beta);
    let mut u = vec![0.0; weights.len()];
    for iter in 1..=IRLS_MAX_ITERATIONS {
        for ((ui, wi), ri) in u.iter_mut().zip(weights).zip(r.iter()) {
            *ui = wi / (ri * ri + delta * delta).sqrt();
        }
        let Some(next) = solve(&u) else {
            return Err(Stall { iterations: iter });
        };
        let (next_obj, next_r) = smoothed(&next);
        if next_obj >= obj {
            // the majorization step can no longer make progress in floating point
            return Ok((beta, true));
        }
        let rel = (obj - next_obj) / obj.max(f64::MIN_POSITIVE);
        beta = next;
        obj = next_obj;
        r = next_r;
        if rel < IRLS_TOLERANCE {
            return Ok((beta, true));
        }
    }
    Ok((beta, false))
}

/// Exact weighted LAD by vertex descent.
///
/// Phase one starts at `beta = 0` and, while fewer than `d` samples are held
/// at zero residual, line-searches along the projected descent direction
/// inside the null space of the held rows, adding the sample at the optimal
/// breakpoint. Phase two is the simplex proper: at a vertex the multipliers
/// `u` of the held samples solve `X_A^T u = -sum_{i not in A} w_i sign(r_i) x_i`;
/// the vertex is optimal iff `|u_j| <= w_j` for all held `j`. Otherwise the
/// most violated sample is released and the edge is followed to the next
/// vertex.
pub fn lad_simplex(weights: &[f64], data: &Dataset) -> Result<LadSolution> {
    lad_simplex_from(weights, data, DVector::zeros(data.dim()))
}

/// [`lad_simplex`] with phase one started from `start` instead of zero.
pub fn lad_simplex_from(weights: &[f64], data: &Dataset, start: DVector<f64>) -> Result<LadSolution> {
    let n = data.n();
    let d = data.dim();
    if weights.len() != n {
        return Err(MlrError::DimensionMismatch(format!("{} weights for {n} samples", weights.len())));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(MlrError::InvalidParameter("LAD weights must be non-negative".into()));
    }
    let x = data.x();
    let y = data.y();
    let y_scale = 1.0 + y.amax();
    let zero_tol = 1e-11 * y_scale;
    let w_total: f64 = weights.iter().sum();

    if start.len() != d || start.iter().any(|v| !v.is_finite()) {
        return Err(MlrError::DimensionMismatch(format!("start point must be a finite {d}-vector")));
    }
    let mut beta = start;
    let mut active: Vec<usize> = Vec::with_capacity(d);
    let mut in_active = vec![false; n];

    // phase one: build a vertex
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(d);
    while active.len() < d {
        let r = y - x * &beta;
        let mut g = DVector::zeros(d);
        for i in 0..n {
            if !in_active[i] && r[i].abs() > zero_tol {
                g.axpy(weights[i] * r[i].signum(), &x.row(i).transpose(), 1.0);
            }
        }
        let project = |v: &DVector<f64>| {
            let mut p = v.clone();
            for q in &basis {
                let c = q.dot(&p);
                p.axpy(-c, q, 1.0);
            }
            p
        };
        let mut dir = project(&g);
        if dir.norm() <= 1e-12 * (1.0 + g.norm()) {
            dir = (0..d)
                .map(|j| project(&DVector::from_fn(d, |r, _| if r == j { 1.0 } else { 0.0 })))
                .max_by(|a, b| a.norm().total_cmp(&b.norm()))
                .expect("d >= 1");
        }
        let dir_norm = dir.norm();
        if dir_norm <= 1e-12 {
            return Err(MlrError::SingularGram { component: 0 });
        }
        dir /= dir_norm;

        let a = x * &dir;
        let a_tol = 1e-12 * (1.0 + x.amax());
        let mut breaks: Vec<(f64, f64, usize)> = (0..n)
            .filter(|&i| !in_active[i] && a[i].abs() > a_tol)
            .map(|i| (r[i] / a[i], weights[i] * a[i].abs(), i))
            .collect();
        if breaks.is_empty() {
            // every remaining row lies in the span of the held rows
            return Err(MlrError::SingularGram { component: 0 });
        }
        breaks.sort_by(|p, q| p.0.total_cmp(&q.0));
        let mass: f64 = breaks.iter().map(|b| b.1).sum();
        let (t, entering) = if mass > 0.0 {
            let mut cum = 0.0;
            let mut pick = breaks[breaks.len() - 1];
            for &b in &breaks {
                cum += b.1;
                if cum >= mass / 2.0 {
                    pick = b;
                    break;
                }
            }
            (pick.0, pick.2)
        } else {
            let &(t, _, i) = breaks
                .iter()
                .max_by(|p, q| a[p.2].abs().total_cmp(&a[q.2].abs()))
                .expect("non-empty");
            (t, i)
        };
        beta.axpy(t, &dir, 1.0);
        in_active[entering] = true;
        active.push(entering);
        let row = x.row(entering).transpose();
        let q = project(&row);
        let qn = q.norm();
        basis.push(q / qn);
    }

    // phase two: simplex on the vertices
    let max_pivots = 50 * (n + d) + 100;
    for _ in 0..max_pivots {
        let xa = DMatrix::from_fn(d, d, |r, c| x[(active[r], c)]);
        let lu = xa.clone().lu();
        let ya = DVector::from_fn(d, |r, _| y[active[r]]);
        beta = lu.solve(&ya).ok_or(MlrError::SingularGram { component: 0 })?;
        let mut r = y - x * &beta;
        for &j in &active {
            r[j] = 0.0;
        }

        let mut g = DVector::zeros(d);
        for i in 0..n {
            if !in_active[i] && r[i].abs() > zero_tol {
                g.axpy(weights[i] * r[i].signum(), &x.row(i).transpose(), 1.0);
            }
        }
        let u = xa
            .transpose()
            .lu()
            .solve(&(-&g))
            .ok_or(MlrError::SingularGram { component: 0 })?;

        let mut candidates: Vec<(f64, usize)> = (0..d)
            .filter_map(|p| {
                let excess = u[p].abs() - weights[active[p]];
                (excess > 1e-12 * (1.0 + w_total)).then_some((excess, p))
            })
            .collect();
        candidates.sort_by(|a, b| b.0.total_cmp(&a.0));

        let mut moved = false;
        for &(_, p) in &candidates {
            let released = active[p];
            let c = -u[p].signum();
            let mut e = DVector::zeros(d);
            e[p] = c;
            let Some(dir) = lu.solve(&e) else { continue };
            let a = x * &dir;

            // directional derivative of the objective at t = 0+
            let mut slope = weights[released] * a[released].abs();
            let mut breaks: Vec<(f64, f64, usize)> = Vec::new();
            for i in 0..n {
                if in_active[i] {
                    continue;
                }
                if r[i].abs() <= zero_tol {
                    // degenerate: |r_i - t a_i| is linear for t > 0
                    slope += weights[i] * a[i].abs();
                } else {
                    slope -= weights[i] * r[i].signum() * a[i];
                    let t = r[i] / a[i];
                    if a[i] != 0.0 && t > 0.0 {
                        breaks.push((t, 2.0 * weights[i] * a[i].abs(), i));
                    }
                }
            }
            if slope >= -1e-12 * (1.0 + w_total) {
                continue;
            }
            breaks.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap_or(Ordering::Equal));
            let mut entering = None;
            for &(t, jump, i) in &breaks {
                if t <= 0.0 {
                    continue;
                }
                slope += jump;
                if slope >= 0.0 {
                    entering = Some(i);
                    break;
                }
            }
            let entering = entering.ok_or(MlrError::Unbounded)?;
            in_active[released] = false;
            in_active[entering] = true;
            active[p] = entering;
            moved = true;
            break;
        }
        if !moved {
            let objective = lad_objective(weights, data, &beta);
            return Ok(LadSolution { beta, objective });
        }
    }
    Err(MlrError::IterationLimit(max_pivots))
}

/// Largest instance accepted by [`lad_lp_oracle`].
pub const LP_ORACLE_MAX_ROWS: usize = 200;
pub const LP_ORACLE_MAX_DIM: usize = 5;

/// Exact weighted LAD through the epigraph LP
///
/// ```text
/// min  sum_i w_i h_i
/// s.t. h_i >=   y_i - <beta, x_i>
///      h_i >= -(y_i - <beta, x_i>)
/// ```
///
/// solved by the dense two-phase tableau simplex. `beta` is split into
/// non-negative parts and both constraint families receive surplus columns.
pub fn lad_lp_oracle(weights: &[f64], data: &Dataset) -> Result<LadSolution> {
    let n = data.n();
    let d = data.dim();
    if n > LP_ORACLE_MAX_ROWS || d > LP_ORACLE_MAX_DIM {
        return Err(MlrError::InvalidParameter(format!(
            "LP oracle is limited to N <= {LP_ORACLE_MAX_ROWS}, d <= {LP_ORACLE_MAX_DIM}"
        )));
    }
    if weights.len() != n {
        return Err(MlrError::DimensionMismatch(format!("{} weights for {n} samples", weights.len())));
    }
    // column layout: beta+ (d) | beta- (d) | h (n) | surplus+ (n) | surplus- (n)
    let cols = 2 * d + 3 * n;
    let rows = 2 * n;
    let mut a = DMatrix::zeros(rows, cols);
    let mut b = DVector::zeros(rows);
    let mut c = DVector::zeros(cols);
    for i in 0..n {
        c[2 * d + i] = weights[i];
        for j in 0..d {
            let xij = data.x()[(i, j)];
            a[(i, j)] = xij;
            a[(i, d + j)] = -xij;
            a[(n + i, j)] = -xij;
            a[(n + i, d + j)] = xij;
        }
        a[(i, 2 * d + i)] = 1.0;
        a[(n + i, 2 * d + i)] = 1.0;
        a[(i, 2 * d + n + i)] = -1.0;
        a[(n + i, 2 * d + 2 * n + i)] = -1.0;
        b[i] = data.y()[i];
        b[n + i] = -data.y()[i];
    }
    let sol = simplex::solve(&StandardForm { c, a, b })?;
    let beta = DVector::from_fn(d, |j, _| sol.x[j] - sol.x[d + j]);
    Ok(LadSolution { beta, objective: sol.objective })
}
