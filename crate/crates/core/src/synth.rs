//! Synthetic mixed linear regression data.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{MlrError, Result};
use crate::model::{Dataset, MlrParams, NoiseModel};
use crate::rng::{seeded_rng, MlrRng};

/// Generates `n` samples from a `k`-component model in `d` dimensions.
///
/// Every coordinate of the true coefficients and of the covariates is i.i.d.
/// standard normal, labels are uniform over the components and the response is
/// `y_i = <beta*_{label_i}, x_i> + eps_i`.
///
/// Draw order from the seeded stream is fixed: the `d × k` true coefficients
/// (component 0 first), then for each sample in turn its label, its `d`
/// covariates and its noise draw.
pub fn generate(k: usize, d: usize, n: usize, noise: &NoiseModel, seed: u64) -> Result<Dataset> {
    if k == 0 || d == 0 || n == 0 {
        return Err(MlrError::InvalidParameter(format!(
            "k, d and n must be at least 1 (got k={k}, d={d}, n={n})"
        )));
    }
    let mut rng = seeded_rng(seed);
    let coeffs: Vec<f64> = (0..d * k).map(|_| StandardNormal.sample(&mut rng)).collect();
    let truth = MlrParams::new(DMatrix::from_column_slice(d, k, &coeffs))?;
    draw_samples(truth, n, noise, &mut rng)
}

/// Generates `n` samples around the given true coefficients.
///
/// Uses the same per-sample draw order as [`generate`], from a fresh stream
/// seeded with `seed`.
pub fn sample_from(truth: &MlrParams, n: usize, noise: &NoiseModel, seed: u64) -> Result<Dataset> {
    if n == 0 {
        return Err(MlrError::InvalidParameter("n must be at least 1".into()));
    }
    draw_samples(truth.clone(), n, noise, &mut seeded_rng(seed))
}

fn draw_samples(truth: MlrParams, n: usize, noise: &NoiseModel, rng: &mut MlrRng) -> Result<Dataset> {
    let (d, k) = (truth.dim(), truth.k_components());
    let mut labels = Vec::with_capacity(n);
    let mut x = DMatrix::zeros(n, d);
    let mut y = DVector::zeros(n);
    for i in 0..n {
        let label = rng.random_range(0..k);
        for j in 0..d {
            x[(i, j)] = StandardNormal.sample(rng);
        }
        let signal = x.row(i).transpose().dot(&truth.component(label));
        y[i] = signal + noise.sample(rng);
        labels.push(label);
    }

    Dataset::new(x, y)?.with_true_params(truth)?.with_labels(labels, k)
}
