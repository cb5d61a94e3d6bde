//! Parameter estimation for mixed linear regression.
//!
//! A sample `(x_i, y_i)` comes from one of `K` linear models chosen uniformly
//! at random, `y_i = <beta*_k, x_i> + eps_i`, where the noise is Gaussian or
//! Laplacian with standard deviation `sigma`. The crate provides
//!
//! - synthetic data generation ([`synth`]),
//! - the EM algorithm with an exact least-absolute-deviations M-step for
//!   Laplacian noise ([`em`]),
//! - an ADMM solver whose Z-step minimizes a separable upper bound of the
//!   augmented Lagrangian in closed form ([`admm`]),
//! - likelihood, matched recovery error and paired t-tests ([`eval`]),
//! - a paired benchmark runner over `(K, d)` grids ([`bench`]).
//!
//! ```
//! use mlrfit::{fit_admm, fit_em, generate, recovery_error, NoiseModel, SolverConfig};
//!
//! let noise = NoiseModel::gaussian(0.1)?;
//! let data = generate(2, 2, 500, &noise, 7)?;
//! let cfg = SolverConfig::new(100, 1.0, 11)?;
//!
//! let em = fit_em(&data, 2, &noise, &cfg)?;
//! let admm = fit_admm(&data, 2, &noise, &cfg)?;
//! let truth = data.true_params().unwrap();
//! println!("EM error   {:.3}", recovery_error(&em.params, truth)?.error);
//! println!("ADMM error {:.3}", recovery_error(&admm.params, truth)?.error);
//! # Ok::<(), mlrfit::MlrError>(())
//! ```

pub mod admm;
pub mod bench;
pub mod em;
pub mod error;
pub mod eval;
mod linalg;
pub mod model;
mod noise;
pub mod rng;
pub mod simplex;
pub mod synth;

pub use admm::{fit_admm, fit_admm_with, AdmmOptions, AdmmState, AdmmTrace, CandidateRule};
pub use bench::{aggregate, run_grid, CellResult, ExperimentGrid, GridRun, Summary};
pub use em::{fit_em, fit_em_with, EmOptions, EmTrace, LadPath, LadPolicy, Responsibilities};
pub use error::{MlrError, Result};
pub use linalg::RIDGE_SCALE;
pub use eval::{log_likelihood, paired_t_test, recovery_error, Normalization, PairedTTest, RecoveryReport};
pub use model::{Dataset, MixtureWeights, MlrParams, NoiseKind, NoiseModel, SolverConfig};
pub use synth::{generate, sample_from};

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
mod readme {}

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/em.md")]
    mod em {}
    #[doc = include_str!("../../../book/src/lad.md")]
    mod lad {}
    #[doc = include_str!("../../../book/src/admm.md")]
    mod admm {}
    #[doc = include_str!("../../../book/src/evaluation.md")]
    mod evaluation {}
    #[doc = include_str!("../../../book/src/benchmark.md")]
    mod benchmark {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
