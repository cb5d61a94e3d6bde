//! Densities and samplers for the Gaussian and Laplacian noise families.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Open01, StandardNormal};

use crate::model::{NoiseKind, NoiseModel};

impl NoiseModel {
    /// Probability density `f(eps)`.
    pub fn density(&self, eps: f64) -> f64 {
        let sigma = self.sigma();
        match self.kind() {
            NoiseKind::Gaussian => {
                (-(eps * eps) / (2.0 * sigma * sigma)).exp() / (2.0 * PI * sigma * sigma).sqrt()
            }
            NoiseKind::Laplacian => {
                let b = self.b();
                (-eps.abs() / b).exp() / (2.0 * b)
            }
        }
    }

    /// `log f(eps)`, evaluated directly in log space.
    pub fn log_density(&self, eps: f64) -> f64 {
        let sigma = self.sigma();
        match self.kind() {
            NoiseKind::Gaussian => {
                -0.5 * (2.0 * PI * sigma * sigma).ln() - eps * eps / (2.0 * sigma * sigma)
            }
            NoiseKind::Laplacian => {
                let b = self.b();
                -(2.0 * b).ln() - eps.abs() / b
            }
        }
    }

    /// One draw of the noise.
    ///
    /// Gaussian draws use the standard normal sampler of `rand_distr`.
    /// Laplacian draws invert the CDF: with `u` uniform on `(-1/2, 1/2)`,
    /// `eps = -b * sign(u) * ln(1 - 2|u|)`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.kind() {
            NoiseKind::Gaussian => {
                let z: f64 = StandardNormal.sample(rng);
                self.sigma() * z
            }
            NoiseKind::Laplacian => {
                let u: f64 = Open01.sample(rng);
                let u = u - 0.5;
                -self.b() * u.signum() * (1.0 - 2.0 * u.abs()).ln()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded_rng;
    use proptest::prelude::*;

    fn moments(nm: &NoiseModel, n: usize, seed: u64) -> (f64, f64) {
        let mut rng = seeded_rng(seed);
        let draws: Vec<f64> = (0..n).map(|_| nm.sample(&mut rng)).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        (mean, var.sqrt())
    }

    #[test]
    fn densities_at_zero() {
        let g = NoiseModel::gaussian(1.0).unwrap();
        let l = NoiseModel::laplacian(1.0).unwrap();
        assert!((g.density(0.0) - 0.398_942_280_401_432_7).abs() < 1e-15);
        assert!((l.density(0.0) - 2f64.sqrt() / 2.0).abs() < 1e-15);

        let g2 = NoiseModel::gaussian(2.0).unwrap();
        let expected = (-0.5f64).exp() / (2.0 * (2.0 * PI).sqrt());
        assert!((g2.density(2.0) - expected).abs() < 1e-15);
    }

    #[test]
    fn log_densities() {
        let g = NoiseModel::gaussian(1.0).unwrap();
        assert!((g.log_density(0.0) + 0.5 * (2.0 * PI).ln()).abs() < 1e-15);
        let l = NoiseModel::laplacian(1.0).unwrap();
        let expected = (2f64.sqrt() / 2.0).ln() - 2f64.sqrt();
        assert!((l.log_density(1.0) - expected).abs() < 1e-15);
    }

    #[test]
    fn gaussian_sample_moments() {
        let (mean, std) = moments(&NoiseModel::gaussian(1.0).unwrap(), 100_000, 11);
        assert!(mean.abs() < 0.02, "mean {mean}");
        assert!((std - 1.0).abs() < 0.02, "std {std}");
    }

    #[test]
    fn laplacian_sample_moments() {
        let (mean, std) = moments(&NoiseModel::laplacian(1.0).unwrap(), 100_000, 12);
        assert!(mean.abs() < 0.02, "mean {mean}");
        assert!((std - 1.0).abs() < 0.03, "std {std}");
    }

    #[test]
    fn equal_sigma_gives_equal_variance() {
        // Variance estimates compared within 3 standard errors. The standard
        // error of a sample variance is sigma^2 * sqrt((kurtosis - 1) / n),
        // with kurtosis 3 for the normal and 6 for the Laplace law.
        let n = 200_000;
        for (nm, kurt) in [
            (NoiseModel::gaussian(1.5).unwrap(), 3.0),
            (NoiseModel::laplacian(1.5).unwrap(), 6.0),
        ] {
            let (_, std) = moments(&nm, n, 99);
            let se = 1.5f64.powi(2) * ((kurt - 1.0) / n as f64).sqrt();
            assert!((std * std - 2.25).abs() < 3.0 * se, "{:?}: var {}", nm.kind(), std * std);
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        for nm in [NoiseModel::gaussian(1.0).unwrap(), NoiseModel::laplacian(1.0).unwrap()] {
            let mut a = seeded_rng(5);
            let mut b = seeded_rng(5);
            let xs: Vec<f64> = (0..100).map(|_| nm.sample(&mut a)).collect();
            let ys: Vec<f64> = (0..100).map(|_| nm.sample(&mut b)).collect();
            assert_eq!(xs, ys);
        }
    }

    proptest! {
        #[test]
        fn density_properties(eps in -50.0f64..50.0, sigma in 0.1f64..10.0, lap in any::<bool>()) {
            let nm = if lap { NoiseModel::laplacian(sigma) } else { NoiseModel::gaussian(sigma) }.unwrap();
            prop_assert!(nm.log_density(eps).is_finite());
            prop_assert_eq!(nm.density(eps), nm.density(-eps));
            let d = nm.density(eps);
            if d > 0.0 && d.is_normal() {
                let rel = (nm.log_density(eps).exp() - d).abs() / d;
                prop_assert!(rel < 1e-12, "relative gap {}", rel);
            }
        }
    }
}
