//! Paired EM-vs-ADMM experiments over `(K, d)` grids.
//!
//! Every cell draws its own dataset and starting point from a seed derived from
//! the grid's base seed and the cell coordinates, then runs both solvers from
//! the same `beta0`. Cells are independent, so they are spread over a pool of
//! worker threads; results are returned sorted by `(noise, K, d, rep)` and are
//! identical for any worker count.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use crate::admm::{fit_admm_with, AdmmOptions};
use crate::em::{fit_em_with, EmOptions, LadPath, LadPolicy};
use crate::error::{MlrError, Result};
use crate::eval::{paired_t_test, recovery_error, Normalization, PairedTTest};
use crate::model::{Dataset, NoiseKind, NoiseModel, SolverConfig};
use crate::rng::derive_seed;
use crate::synth::generate;

/// Environment variable overriding the default worker count.
pub const WORKERS_ENV: &str = "MLRFIT_WORKERS";

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentGrid {
    pub k_values: Vec<usize>,
    pub d_values: Vec<usize>,
    pub n_samples: usize,
    pub sigma: f64,
    pub noise_kinds: Vec<NoiseKind>,
    pub repetitions: usize,
    pub n_iterations: usize,
    pub rho: f64,
    pub base_seed: u64,
    pub lad_policy: LadPolicy,
    pub normalization: Normalization,
}

impl ExperimentGrid {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(MlrError::InvalidParameter(msg.into()));
        if self.k_values.is_empty() || self.d_values.is_empty() || self.noise_kinds.is_empty() {
            return bad("k_values, d_values and noise kinds must be non-empty");
        }
        if self.k_values.contains(&0) || self.d_values.contains(&0) {
            return bad("k and d values must be at least 1");
        }
        if self.repetitions == 0 || self.n_samples == 0 || self.n_iterations == 0 {
            return bad("repetitions, n_samples and n_iterations must be at least 1");
        }
        NoiseModel::gaussian(self.sigma)?;
        SolverConfig::new(self.n_iterations, self.rho, 0)?;
        Ok(())
    }

    /// Cell coordinates in output order, duplicates removed.
    pub fn cells(&self) -> Vec<CellKey> {
        let sorted = |v: &[usize]| {
            let mut v = v.to_vec();
            v.sort_unstable();
            v.dedup();
            v
        };
        let mut noises = self.noise_kinds.clone();
        noises.sort();
        noises.dedup();
        let (ks, ds) = (sorted(&self.k_values), sorted(&self.d_values));
        let mut out = Vec::new();
        for &noise in &noises {
            for &k in &ks {
                for &d in &ds {
                    for rep in 0..self.repetitions {
                        let seed = derive_seed(self.base_seed, &[k as u64, d as u64, noise_code(noise), rep as u64]);
                        out.push(CellKey { noise, k, d, rep, seed });
                    }
                }
            }
        }
        out
    }
}

fn noise_code(kind: NoiseKind) -> u64 {
    match kind {
        NoiseKind::Gaussian => 0,
        NoiseKind::Laplacian => 1,
    }
}

/// Identity of one grid cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellKey {
    pub noise: NoiseKind,
    pub k: usize,
    pub d: usize,
    pub rep: usize,
    /// Dataset seed; the shared initialization uses [`init_seed`] of it.
    pub seed: u64,
}

/// Seed of the starting coefficients for a cell's dataset seed.
pub fn init_seed(cell_seed: u64) -> u64 {
    derive_seed(cell_seed, &[u64::MAX])
}

/// Measurements of one successful cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellMetrics {
    pub em_error: f64,
    pub admm_error: f64,
    pub em_seconds: f64,
    pub admm_seconds: f64,
    pub em_final_ll: f64,
    pub admm_final_ll: f64,
    pub lad_path: LadPath,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub key: CellKey,
    /// Metrics, or the solver error that stopped the cell.
    pub outcome: std::result::Result<CellMetrics, String>,
}

impl CellResult {
    pub fn metrics(&self) -> Option<&CellMetrics> {
        self.outcome.as_ref().ok()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridRun {
    pub cells: Vec<CellResult>,
    pub total_seconds: f64,
    pub workers: usize,
}

/// Settings shared by both solvers of a paired run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairSettings {
    pub n_iterations: usize,
    pub rho: f64,
    pub lad_policy: LadPolicy,
    pub normalization: Normalization,
}

/// Runs EM and ADMM on `data` from the same start and scores both against the
/// dataset's ground truth.
pub fn run_pair(data: &Dataset, k: usize, noise: &NoiseModel, init_seed: u64, settings: &PairSettings) -> Result<CellMetrics> {
    let truth = data
        .true_params()
        .ok_or_else(|| MlrError::InvalidParameter("dataset has no ground truth".into()))?;
    let cfg = SolverConfig::new(settings.n_iterations, settings.rho, init_seed)?;
    let em = fit_em_with(data, k, noise, &cfg, &EmOptions { lad_policy: settings.lad_policy })?;
    let admm = fit_admm_with(data, k, noise, &cfg, &AdmmOptions::default())?;
    debug_assert_eq!(em.initial_params, admm.initial_params);
    let score = |est| -> Result<f64> { Ok(recovery_error(est, truth)?.normalized(settings.normalization, truth)) };
    Ok(CellMetrics {
        em_error: score(&em.params)?,
        admm_error: score(&admm.params)?,
        em_seconds: em.wall_seconds,
        admm_seconds: admm.wall_seconds,
        em_final_ll: em.log_likelihood.last().copied().unwrap_or(em.initial_log_likelihood),
        admm_final_ll: admm.log_likelihood.last().copied().unwrap_or(admm.initial_log_likelihood),
        lad_path: em.lad_path,
    })
}

fn run_cell(grid: &ExperimentGrid, key: CellKey) -> CellResult {
    let settings = PairSettings {
        n_iterations: grid.n_iterations,
        rho: grid.rho,
        lad_policy: grid.lad_policy,
        normalization: grid.normalization,
    };
    let outcome = NoiseModel::new(key.noise, grid.sigma)
        .and_then(|nm| {
            let data = generate(key.k, key.d, grid.n_samples, &nm, key.seed)?;
            run_pair(&data, key.k, &nm, init_seed(key.seed), &settings)
        })
        .map_err(|e| e.to_string());
    CellResult { key, outcome }
}

/// Worker count from `MLRFIT_WORKERS`, else the available parallelism.
pub fn default_workers() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&w| w > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

pub fn run_grid(grid: &ExperimentGrid) -> Result<GridRun> {
    run_grid_with_workers(grid, default_workers())
}

pub fn run_grid_with_workers(grid: &ExperimentGrid, workers: usize) -> Result<GridRun> {
    grid.validate()?;
    let keys = grid.cells();
    let workers = workers.clamp(1, keys.len().max(1));
    let next = AtomicUsize::new(0);
    let done = Mutex::new(Vec::with_capacity(keys.len()));

    let start = Instant::now();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::Relaxed);
                let Some(&key) = keys.get(idx) else { break };
                let result = run_cell(grid, key);
                done.lock().expect("result collector poisoned").push(result);
            });
        }
    });
    let total_seconds = start.elapsed().as_secs_f64();

    let mut cells = done.into_inner().expect("result collector poisoned");
    cells.sort_by_key(|c| c.key);
    Ok(GridRun { cells, total_seconds, workers })
}

/// Which solver a summary row describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Solver {
    Em,
    Admm,
}

impl Solver {
    pub fn as_str(self) -> &'static str {
        match self {
            Solver::Em => "em",
            Solver::Admm => "admm",
        }
    }
}

/// Recovery-error and timing statistics over the successful repetitions of a
/// `(noise, K, d)` cell for one solver.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub noise: NoiseKind,
    pub k: usize,
    pub d: usize,
    pub solver: Solver,
    pub count: usize,
    pub error_mean: f64,
    pub error_std: f64,
    pub seconds_mean: f64,
    pub seconds_std: f64,
}

/// Paired differences over the successful cells of one noise kind.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedDifferences {
    pub noise: NoiseKind,
    /// `admm_error - em_error`, in cell order.
    pub error_diffs: Vec<f64>,
    /// `em_seconds - admm_seconds`, in cell order.
    pub time_diffs: Vec<f64>,
}

impl PairedDifferences {
    /// One-sided test of `mean(admm_error - em_error) > 0`.
    pub fn error_test(&self) -> Result<PairedTTest> {
        paired_t_test(&self.error_diffs)
    }

    /// One-sided test of `mean(em_seconds - admm_seconds) > 0`.
    pub fn time_test(&self) -> Result<PairedTTest> {
        paired_t_test(&self.time_diffs)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub rows: Vec<SummaryRow>,
    pub paired: Vec<PairedDifferences>,
    pub failed_cells: usize,
}

/// Mean and sample (`n - 1`) standard deviation; the deviation of a single
/// value is 0.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    (mean, (ss / (n - 1) as f64).sqrt())
}

pub fn aggregate(results: &[CellResult]) -> Result<Summary> {
    if results.is_empty() {
        return Err(MlrError::InsufficientData("no cell results to aggregate".into()));
    }
    let mut sorted: Vec<&CellResult> = results.iter().collect();
    sorted.sort_by_key(|c| c.key);

    let mut rows = Vec::new();
    let mut paired: Vec<PairedDifferences> = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let head = sorted[i].key;
        let mut j = i;
        while j < sorted.len() && (sorted[j].key.noise, sorted[j].key.k, sorted[j].key.d) == (head.noise, head.k, head.d) {
            j += 1;
        }
        let ok: Vec<&CellMetrics> = sorted[i..j].iter().filter_map(|c| c.metrics()).collect();
        if !ok.is_empty() {
            for solver in [Solver::Em, Solver::Admm] {
                let (errors, seconds): (Vec<f64>, Vec<f64>) = ok
                    .iter()
                    .map(|m| match solver {
                        Solver::Em => (m.em_error, m.em_seconds),
                        Solver::Admm => (m.admm_error, m.admm_seconds),
                    })
                    .unzip();
                let (error_mean, error_std) = mean_std(&errors);
                let (seconds_mean, seconds_std) = mean_std(&seconds);
                rows.push(SummaryRow {
                    noise: head.noise,
                    k: head.k,
                    d: head.d,
                    solver,
                    count: ok.len(),
                    error_mean,
                    error_std,
                    seconds_mean,
                    seconds_std,
                });
            }
        }
        i = j;
    }

    for c in &sorted {
        let Some(m) = c.metrics() else { continue };
        let entry = match paired.iter_mut().position(|p| p.noise == c.key.noise) {
            Some(pos) => &mut paired[pos],
            None => {
                paired.push(PairedDifferences { noise: c.key.noise, error_diffs: Vec::new(), time_diffs: Vec::new() });
                paired.last_mut().expect("just pushed")
            }
        };
        entry.error_diffs.push(m.admm_error - m.em_error);
        entry.time_diffs.push(m.em_seconds - m.admm_seconds);
    }

    let failed_cells = results.iter().filter(|c| c.outcome.is_err()).count();
    Ok(Summary { rows, paired, failed_cells })
}

/// Equal-width histogram.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    /// `bins + 1` increasing edges.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

pub const DEFAULT_HISTOGRAM_BINS: usize = 20;

/// Bins `values` over `[min, max]`, the last bin closed on the right. A
/// constant sample is centred in a unit-width range.
pub fn histogram(values: &[f64], bins: usize) -> Result<Histogram> {
    if bins == 0 {
        return Err(MlrError::InvalidParameter("histogram needs at least one bin".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(MlrError::NonFiniteInput("histogram values".into()));
    }
    let (mut lo, mut hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if values.is_empty() {
        (lo, hi) = (0.0, 1.0);
    } else if lo == hi {
        (lo, hi) = (lo - 0.5, hi + 0.5);
    }
    let width = (hi - lo) / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|b| if b == bins { hi } else { lo + width * b as f64 }).collect();
    let mut counts = vec![0usize; bins];
    for &v in values {
        let b = (((v - lo) / width).floor() as usize).min(bins - 1);
        counts[b] += 1;
    }
    Ok(Histogram { edges, counts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn tiny_grid() -> ExperimentGrid {
        ExperimentGrid {
            k_values: vec![2],
            d_values: vec![1],
            n_samples: 60,
            sigma: 1.0,
            noise_kinds: vec![NoiseKind::Gaussian, NoiseKind::Laplacian],
            repetitions: 2,
            n_iterations: 5,
            rho: 1.0,
            base_seed: 99,
            lad_policy: LadPolicy::default(),
            normalization: Normalization::Raw,
        }
    }

    fn metrics(em_error: f64, admm_error: f64) -> CellMetrics {
        CellMetrics {
            em_error,
            admm_error,
            em_seconds: 2.0,
            admm_seconds: 1.0,
            em_final_ll: 0.0,
            admm_final_ll: 0.0,
            lad_path: LadPath::NotApplicable,
        }
    }

    fn result(rep: usize, m: CellMetrics) -> CellResult {
        let key = CellKey { noise: NoiseKind::Gaussian, k: 2, d: 1, rep, seed: rep as u64 };
        CellResult { key, outcome: Ok(m) }
    }

    #[test]
    fn cell_count_and_distinct_seeds() {
        let run = run_grid_with_workers(&tiny_grid(), 2).unwrap();
        assert_eq!(run.cells.len(), 4);
        let seeds: HashSet<u64> = run.cells.iter().map(|c| c.key.seed).collect();
        assert_eq!(seeds.len(), 4);
        assert!(run.cells.iter().all(|c| c.outcome.is_ok()));
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let a = run_grid_with_workers(&tiny_grid(), 1).unwrap();
        let b = run_grid_with_workers(&tiny_grid(), 3).unwrap();
        let strip = |r: &GridRun| -> Vec<(CellKey, f64, f64, f64, f64)> {
            r.cells
                .iter()
                .map(|c| {
                    let m = c.metrics().unwrap();
                    (c.key, m.em_error, m.admm_error, m.em_final_ll, m.admm_final_ll)
                })
                .collect()
        };
        assert_eq!(strip(&a), strip(&b));
    }

    #[test]
    fn invalid_grids_are_rejected() {
        let mut g = tiny_grid();
        g.k_values.clear();
        assert!(run_grid(&g).is_err());
        let mut g = tiny_grid();
        g.repetitions = 0;
        assert!(g.validate().is_err());
        let mut g = tiny_grid();
        g.sigma = 0.0;
        assert!(g.validate().is_err());
    }

    #[test]
    fn failed_cells_are_flagged_and_grid_continues() {
        // a single sample cannot pin down a two-dimensional LAD vertex
        let mut g = tiny_grid();
        g.n_samples = 1;
        g.d_values = vec![2];
        g.lad_policy = LadPolicy::Lp;
        let run = run_grid_with_workers(&g, 1).unwrap();
        assert_eq!(run.cells.len(), 4);
        for c in &run.cells {
            assert_eq!(c.outcome.is_err(), c.key.noise == NoiseKind::Laplacian, "{c:?}");
        }
        let summary = aggregate(&run.cells).unwrap();
        assert_eq!(summary.failed_cells, 2);
        assert!(summary.rows.iter().all(|r| r.noise == NoiseKind::Gaussian));
    }

    #[test]
    fn single_result_statistics() {
        let s = aggregate(&[result(0, metrics(0.7, 0.4))]).unwrap();
        assert_eq!(s.rows.len(), 2);
        assert_eq!((s.rows[0].error_mean, s.rows[0].error_std), (0.7, 0.0));
        assert_eq!(s.paired[0].time_diffs, vec![1.0]);
        assert!((s.paired[0].error_diffs[0] + 0.3).abs() < 1e-15);
    }

    #[test]
    fn two_result_statistics() {
        let s = aggregate(&[result(0, metrics(1.0, 0.0)), result(1, metrics(3.0, 0.0))]).unwrap();
        let em = &s.rows[0];
        assert_eq!(em.solver, Solver::Em);
        assert_eq!(em.error_mean, 2.0);
        assert!((em.error_std - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(aggregate(&[]).is_err());
    }

    #[test]
    fn histogram_conserves_counts() {
        let values: Vec<f64> = (0..37).map(|i| (i as f64 * 0.37).sin()).collect();
        let h = histogram(&values, DEFAULT_HISTOGRAM_BINS).unwrap();
        assert_eq!(h.counts.iter().sum::<usize>(), 37);
        assert_eq!(h.edges.len(), 21);
        assert!(h.edges.windows(2).all(|w| w[0] < w[1]));
        let c = histogram(&[2.0, 2.0], 4).unwrap();
        assert_eq!(c.counts.iter().sum::<usize>(), 2);
    }
}
