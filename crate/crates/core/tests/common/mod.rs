#![allow(dead_code)]

use mlrfit::rng::{derive_seed, seeded_rng};
use mlrfit::{sample_from, Dataset, MlrParams, NoiseModel};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Standard-normal truth redrawn until all pairwise distances are at least
/// `min_gap`.
pub fn separated_truth(k: usize, d: usize, min_gap: f64, seed: u64) -> MlrParams {
    let mut rng = seeded_rng(seed);
    loop {
        let beta = DMatrix::from_fn(d, k, |_, _| StandardNormal.sample(&mut rng));
        let ok = (0..k).all(|a| (a + 1..k).all(|b| (beta.column(a) - beta.column(b)).norm() >= min_gap));
        if ok {
            return MlrParams::new(beta).unwrap();
        }
    }
}

pub fn separated_data(k: usize, d: usize, n: usize, noise: &NoiseModel, seed: u64) -> Dataset {
    let truth = separated_truth(k, d, 2.0, derive_seed(seed, &[0]));
    sample_from(&truth, n, noise, derive_seed(seed, &[1])).unwrap()
}

pub fn uniform_weights(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = seeded_rng(seed);
    (0..n).map(|_| rng.random::<f64>()).collect()
}

/// Weighted normal equations solved by an LU factorization of the explicit
/// sums, independent of the crate's ridge-Cholesky path.
pub fn dense_weighted_ls(x: &DMatrix<f64>, y: &DVector<f64>, w: &[f64]) -> DVector<f64> {
    let d = x.ncols();
    let mut g = DMatrix::zeros(d, d);
    let mut r = DVector::zeros(d);
    for i in 0..x.nrows() {
        for a in 0..d {
            r[a] += w[i] * x[(i, a)] * y[i];
            for b in 0..d {
                g[(a, b)] += w[i] * x[(i, a)] * x[(i, b)];
            }
        }
    }
    g.lu().solve(&r).unwrap()
}

/// All permutations of `0..n` (Heap's algorithm).
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn heap(k: usize, a: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(a.clone());
            return;
        }
        heap(k - 1, a, out);
        for i in 0..k - 1 {
            if k.is_multiple_of(2) {
                a.swap(i, k - 1);
            } else {
                a.swap(0, k - 1);
            }
            heap(k - 1, a, out);
        }
    }
    let mut a: Vec<usize> = (0..n).collect();
    let mut out = Vec::new();
    heap(n, &mut a, &mut out);
    out
}
