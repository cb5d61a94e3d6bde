//! Command implementations.

use std::path::Path;

use mlrfit::bench::{run_grid_with_workers, default_workers, DEFAULT_HISTOGRAM_BINS, WORKERS_ENV};
use mlrfit::{
    fit_admm_with, fit_em_with, generate as generate_dataset, recovery_error, AdmmOptions, EmOptions, LadPath,
    NoiseKind, NoiseModel, Normalization, SolverConfig,
};

use crate::config::{lad_policy, lad_policy_name, BenchmarkConfig};
use crate::dataset_io::{self, DatasetFile, DatasetMeta};
use crate::emit::{self, CELLS_FILE};
use crate::error::{CliError, CliResult};
use crate::format::{num, nums, write_file, KeyValues};
use crate::manifest::{sidecar_path, Manifest, MANIFEST_FILE};
use crate::svg;
use crate::{Algo, BenchmarkArgs, FitArgs, GenerateArgs, LadPathArg, PlotArgs, ReportArgs};

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn positive_sigma(sigma: f64) -> CliResult<f64> {
    if sigma.is_finite() && sigma > 0.0 {
        Ok(sigma)
    } else {
        Err(usage(format!("--sigma must be a positive finite number (sigma > 0 is required), got {sigma}")))
    }
}

fn file_name(path: &Path) -> String {
    path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

pub fn generate(a: &GenerateArgs) -> CliResult<()> {
    if a.k == 0 || a.d == 0 || a.n == 0 {
        return Err(usage("--k, --d and --n must be at least 1"));
    }
    let sigma = positive_sigma(a.sigma)?;
    let kind = NoiseKind::from(a.noise);
    let noise = NoiseModel::new(kind, sigma)?;
    let data = generate_dataset(a.k, a.d, a.n, &noise, a.seed)?;
    let file = DatasetFile {
        meta: DatasetMeta { k: Some(a.k), noise: Some(kind), sigma: Some(sigma), seed: Some(a.seed) },
        data,
    };
    dataset_io::write(&a.out, &file)?;

    let mut m = Manifest::new("generate");
    m.setting("k", a.k)
        .setting("d", a.d)
        .setting("n", a.n)
        .setting("noise", kind)
        .setting("sigma", num(sigma))
        .setting("seed", a.seed)
        .output(&a.out);
    m.write(&sidecar_path(&a.out))
}

pub fn fit(a: &FitArgs) -> CliResult<()> {
    if a.k == 0 || a.iters == 0 {
        return Err(usage("--k and --iters must be at least 1"));
    }
    if !(a.rho.is_finite() && a.rho > 0.0) {
        return Err(usage(format!("--rho must be a positive finite number, got {}", a.rho)));
    }
    let file = dataset_io::read(&a.data)?;
    let sigma = match a.sigma.or(file.meta.sigma) {
        Some(s) => positive_sigma(s)?,
        None => return Err(usage("--sigma is required when the dataset header has no sigma")),
    };
    let kind = NoiseKind::from(a.noise);
    let noise = NoiseModel::new(kind, sigma)?;
    let data = &file.data;
    let cfg = SolverConfig::new(a.iters, a.rho, a.seed)?;
    let policy_name = match a.lad_path {
        LadPathArg::Auto => "auto",
        LadPathArg::Lp => "lp",
        LadPathArg::Irls => "irls",
    };
    let policy = lad_policy(policy_name, a.lp_cap).map_err(usage)?;
    let candidate_rule = a.candidate_rule.into();

    let mut result = KeyValues::new();
    let manifest_path = sidecar_path(&a.out);
    result
        .push("manifest", file_name(&manifest_path))
        .push("algo", format!("{:?}", a.algo).to_lowercase())
        .push("noise", kind)
        .push("sigma", num(sigma))
        .push("k", a.k)
        .push("d", data.dim())
        .push("n", data.n());

    let (params, initial_ll, trace, wall_seconds, lad_path) = match a.algo {
        Algo::Em => {
            let t = fit_em_with(data, a.k, &noise, &cfg, &EmOptions { lad_policy: policy })?;
            (t.params, t.initial_log_likelihood, t.log_likelihood, t.wall_seconds, Some(t.lad_path))
        }
        Algo::Admm => {
            let opts = AdmmOptions { candidate_rule, early_stop_tol: None };
            let t = fit_admm_with(data, a.k, &noise, &cfg, &opts)?;
            result.push("primal_residual", nums(t.primal_residual.iter().copied()));
            (t.params, t.initial_log_likelihood, t.log_likelihood, t.wall_seconds, None)
        }
    };
    result.push("iterations", trace.len());
    if let Some(path) = lad_path {
        result.push("lad_path", path);
    }
    for k in 0..params.k_components() {
        result.push(format!("beta_{k}"), nums(params.component(k).iter().copied()));
    }
    result
        .push("initial_log_likelihood", num(initial_ll))
        .push("final_log_likelihood", num(trace.last().copied().unwrap_or(initial_ll)))
        .push("log_likelihood", nums(trace.iter().copied()));
    if let Some(truth) = data.true_params().filter(|t| t.k_components() == a.k) {
        let report = recovery_error(&params, truth)?;
        for norm in [Normalization::Raw, Normalization::PerComponent, Normalization::RelativeToTruth] {
            result.push(format!("recovery_error.{norm}"), num(report.normalized(norm, truth)));
        }
        let assignment: Vec<String> = report.assignment.iter().map(usize::to_string).collect();
        result.push("recovery_assignment", assignment.join(" "));
    }
    result.push("wall_seconds", num(wall_seconds));
    write_file(&a.out, &result.render("mlrfit fit result"))?;

    let mut m = Manifest::new("fit");
    m.setting("algo", format!("{:?}", a.algo).to_lowercase())
        .setting("noise", kind)
        .setting("sigma", num(sigma))
        .setting("k", a.k)
        .setting("iters", a.iters)
        .setting("seed", a.seed)
        .setting("rho", num(a.rho))
        .setting("lad_policy", lad_policy_name(policy))
        .setting("lp_cap", a.lp_cap)
        .setting("lad_path", lad_path.unwrap_or(LadPath::NotApplicable))
        .setting("candidate_rule", format!("{:?}", a.candidate_rule).to_lowercase())
        .solver_constants()
        .input(&a.data)
        .output(&a.out);
    m.write(&manifest_path)
}

pub fn benchmark(a: &BenchmarkArgs) -> CliResult<()> {
    let config = BenchmarkConfig::read(&a.config)?;
    let grid = config.to_grid().map_err(|e| CliError::file(&a.config, e))?;
    let requested = match a.workers {
        Some(0) => return Err(usage("--workers must be at least 1")),
        Some(w) => w,
        None => default_workers(),
    };
    let run = run_grid_with_workers(&grid, requested)?;

    let cells_path = a.out_dir.join(CELLS_FILE);
    emit::write_cells(&cells_path, &run.cells, MANIFEST_FILE)?;
    let derived = emit::write_derived(&a.out_dir, &run.cells, MANIFEST_FILE)?;

    let list = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(" ");
    let mut m = Manifest::new("benchmark");
    m.setting("k_values", list(&grid.k_values))
        .setting("d_values", list(&grid.d_values))
        .setting("n_samples", grid.n_samples)
        .setting("sigma", num(grid.sigma))
        .setting("noise", grid.noise_kinds.iter().map(|n| n.as_str()).collect::<Vec<_>>().join(" "))
        .setting("repetitions", grid.repetitions)
        .setting("n_iterations", grid.n_iterations)
        .setting("rho", num(grid.rho))
        .setting("base_seed", grid.base_seed)
        .setting("lad_policy", lad_policy_name(grid.lad_policy))
        .setting("lp_cap", config.lp_cap)
        .setting("normalization", grid.normalization)
        .setting("histogram_bins", DEFAULT_HISTOGRAM_BINS)
        .setting("cells", run.cells.len())
        .setting("failed_cells", run.cells.iter().filter(|c| c.outcome.is_err()).count())
        .setting("workers", run.workers)
        .setting("workers_env", WORKERS_ENV)
        .setting("workers_note", "keep workers at or below the physical core count so per-cell timings are not inflated")
        .setting("total_seconds", num(run.total_seconds))
        .solver_constants()
        .input(&a.config)
        .output(&cells_path);
    for p in &derived {
        m.output(p);
    }
    m.write(&a.out_dir.join(MANIFEST_FILE))
}

pub fn report(a: &ReportArgs) -> CliResult<()> {
    let cells = emit::read_cells(&a.cells)?;
    if cells.is_empty() {
        return Err(CliError::file(&a.cells, "no cells"));
    }
    let derived = emit::write_derived(&a.out_dir, &cells, MANIFEST_FILE)?;
    let mut m = Manifest::new("report");
    m.setting("cells", cells.len()).setting("histogram_bins", DEFAULT_HISTOGRAM_BINS).input(&a.cells);
    for p in &derived {
        m.output(p);
    }
    m.write(&a.out_dir.join(MANIFEST_FILE))
}

pub fn plot(a: &PlotArgs) -> CliResult<()> {
    let text = std::fs::read_to_string(&a.input).map_err(|e| CliError::file(&a.input, e))?;
    let bins = svg::parse_histogram(&text).map_err(|e| CliError::file(&a.input, e))?;
    write_file(&a.out, &svg::render(&bins, &a.title))?;
    let mut m = Manifest::new("plot");
    m.setting("title", &a.title).input(&a.input).output(&a.out);
    m.write(&sidecar_path(&a.out))
}
