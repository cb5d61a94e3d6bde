//! Benchmark emissions: the per-cell CSV and everything derived from it.
//!
//! All derived files are computed from the cell results alone, so `report`
//! reproduces them byte for byte from `cells.csv`. Every file starts with a
//! `# manifest = <file>` line naming the manifest written alongside it.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use mlrfit::bench::{histogram, CellKey, CellMetrics, Solver, SummaryRow, DEFAULT_HISTOGRAM_BINS};
use mlrfit::{aggregate, CellResult, LadPath, NoiseKind, PairedTTest, Summary};

use crate::error::{CliError, CliResult};
use crate::format::{num, parse_num, write_file, KeyValues};

pub const CELLS_FILE: &str = "cells.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const TTEST_FILE: &str = "ttest.txt";

pub const CELL_COLUMNS: [&str; 14] = [
    "noise",
    "k",
    "d",
    "rep",
    "seed",
    "status",
    "error",
    "em_error",
    "admm_error",
    "em_seconds",
    "admm_seconds",
    "em_final_ll",
    "admm_final_ll",
    "lad_path",
];

pub const SUMMARY_COLUMNS: [&str; 9] =
    ["noise", "k", "d", "solver", "count", "error_mean", "error_std", "seconds_mean", "seconds_std"];

pub fn summary_table_file(noise: NoiseKind) -> String {
    format!("summary_{noise}.txt")
}

pub fn histogram_file(noise: NoiseKind) -> String {
    format!("timing_histogram_{noise}.csv")
}

/// First line of every emitted file.
pub fn manifest_line(manifest: &str) -> String {
    format!("# manifest = {manifest}\n")
}

fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes())
}

fn csv_text(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is UTF-8")
}

pub fn render_cells(cells: &[CellResult]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CELL_COLUMNS).expect("in-memory write");
    for c in cells {
        let k = c.key;
        let mut row = vec![k.noise.to_string(), k.k.to_string(), k.d.to_string(), k.rep.to_string(), k.seed.to_string()];
        match &c.outcome {
            Ok(m) => {
                row.extend(["ok".to_string(), String::new()]);
                row.extend(
                    [m.em_error, m.admm_error, m.em_seconds, m.admm_seconds, m.em_final_ll, m.admm_final_ll].map(num),
                );
                row.push(m.lad_path.to_string());
            }
            Err(msg) => {
                row.extend(["failed".to_string(), msg.clone()]);
                row.extend(std::iter::repeat_n(String::new(), 7));
            }
        }
        w.write_record(&row).expect("in-memory write");
    }
    csv_text(w)
}

pub fn parse_cells(text: &str) -> Result<Vec<CellResult>, String> {
    let mut r = reader(text);
    let header = r.headers().map_err(|e| e.to_string())?.clone();
    if header.iter().ne(CELL_COLUMNS) {
        return Err(format!("header must be `{}`", CELL_COLUMNS.join(",")));
    }
    let mut cells = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| e.to_string())?;
        let line = i + 2;
        let field = |j: usize| rec.get(j).unwrap_or("");
        let int = |j: usize| field(j).parse::<u64>().map_err(|_| format!("row {line}: `{}` is not an integer", CELL_COLUMNS[j]));
        let float = |j: usize| parse_num(field(j)).ok_or_else(|| format!("row {line}: `{}` is not a number", CELL_COLUMNS[j]));
        let key = CellKey {
            noise: field(0).parse().map_err(|e: mlrfit::MlrError| format!("row {line}: {e}"))?,
            k: int(1)? as usize,
            d: int(2)? as usize,
            rep: int(3)? as usize,
            seed: int(4)?,
        };
        let outcome = match field(5) {
            "ok" => Ok(CellMetrics {
                em_error: float(7)?,
                admm_error: float(8)?,
                em_seconds: float(9)?,
                admm_seconds: float(10)?,
                em_final_ll: float(11)?,
                admm_final_ll: float(12)?,
                lad_path: field(13).parse::<LadPath>().map_err(|e| format!("row {line}: {e}"))?,
            }),
            "failed" => Err(field(6).to_string()),
            other => return Err(format!("row {line}: unknown status `{other}`")),
        };
        cells.push(CellResult { key, outcome });
    }
    Ok(cells)
}

pub fn read_cells(path: &Path) -> CliResult<Vec<CellResult>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::file(path, e))?;
    parse_cells(&text).map_err(|e| CliError::file(path, e))
}

pub fn render_summary(summary: &Summary) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SUMMARY_COLUMNS).expect("in-memory write");
    for r in &summary.rows {
        let mut row = vec![r.noise.to_string(), r.k.to_string(), r.d.to_string(), r.solver.as_str().to_string(), r.count.to_string()];
        row.extend([r.error_mean, r.error_std, r.seconds_mean, r.seconds_std].map(num));
        w.write_record(&row).expect("in-memory write");
    }
    csv_text(w)
}

/// Recovery error as a `K × d` grid; each cell shows ADMM above EM as
/// `mean (std)`.
pub fn render_summary_table(summary: &Summary, noise: NoiseKind) -> String {
    let rows: Vec<&SummaryRow> = summary.rows.iter().filter(|r| r.noise == noise).collect();
    let ks: BTreeSet<usize> = rows.iter().map(|r| r.k).collect();
    let ds: BTreeSet<usize> = rows.iter().map(|r| r.d).collect();
    let entry = |k: usize, d: usize, solver: Solver| {
        rows.iter()
            .find(|r| r.k == k && r.d == d && r.solver == solver)
            .map(|r| format!("{:.4e} ({:.4e})", r.error_mean, r.error_std))
            .unwrap_or_else(|| "-".into())
    };
    const W: usize = 24;
    let mut out = format!("# recovery error, {noise} noise: mean (std); ADMM above EM\n");
    let _ = write!(out, "{:<10}", "K \\ d");
    for d in &ds {
        let _ = write!(out, "{:<W$}", format!("d={d}"));
    }
    out.truncate(out.trim_end().len());
    out.push('\n');
    for &k in &ks {
        for solver in [Solver::Admm, Solver::Em] {
            let label = if solver == Solver::Admm { format!("K={k} admm") } else { "    em".to_string() };
            let _ = write!(out, "{label:<10}");
            for &d in &ds {
                let _ = write!(out, "{:<W$}", entry(k, d, solver));
            }
            out.truncate(out.trim_end().len());
            out.push('\n');
        }
    }
    out
}

pub fn render_histogram(diffs: &[f64]) -> CliResult<String> {
    let h = histogram(diffs, DEFAULT_HISTOGRAM_BINS)?;
    let mut out = String::from("bin_lo,bin_hi,count\n");
    for (b, count) in h.counts.iter().enumerate() {
        let _ = writeln!(out, "{},{},{count}", num(h.edges[b]), num(h.edges[b + 1]));
    }
    Ok(out)
}

fn push_test(kv: &mut KeyValues, prefix: &str, test: mlrfit::Result<PairedTTest>) {
    match test {
        Ok(t) => {
            kv.push(format!("{prefix}.n"), t.n)
                .push(format!("{prefix}.mean"), num(t.mean))
                .push(format!("{prefix}.std"), num(t.std))
                .push(format!("{prefix}.t_statistic"), num(t.t_statistic))
                .push(format!("{prefix}.critical_value"), num(t.critical_value))
                .push(format!("{prefix}.significant"), t.significant);
        }
        Err(e) => {
            kv.push(format!("{prefix}.unavailable"), e);
        }
    }
}

/// One-sided paired t-tests at level 0.05 per noise kind: `error` tests
/// `mean(admm_error - em_error) > 0`, `time` tests
/// `mean(em_seconds - admm_seconds) > 0`.
pub fn render_ttest(summary: &Summary) -> String {
    let mut kv = KeyValues::new();
    kv.push("alpha", num(0.05)).push("failed_cells", summary.failed_cells);
    for p in &summary.paired {
        push_test(&mut kv, &format!("{}.error", p.noise), p.error_test());
        push_test(&mut kv, &format!("{}.time", p.noise), p.time_test());
    }
    kv.render("paired t-tests")
}

/// Writes the summary, tables, histograms and t-test report into `dir` and
/// returns the written paths.
pub fn write_derived(dir: &Path, cells: &[CellResult], manifest: &str) -> CliResult<Vec<PathBuf>> {
    let summary = aggregate(cells)?;
    let mut files = vec![(SUMMARY_FILE.to_string(), render_summary(&summary))];
    let noises: BTreeSet<NoiseKind> = cells.iter().map(|c| c.key.noise).collect();
    for &noise in &noises {
        files.push((summary_table_file(noise), render_summary_table(&summary, noise)));
        let diffs: Vec<f64> = summary
            .paired
            .iter()
            .find(|p| p.noise == noise)
            .map(|p| p.time_diffs.clone())
            .unwrap_or_default();
        files.push((histogram_file(noise), render_histogram(&diffs)?));
    }
    files.push((TTEST_FILE.to_string(), render_ttest(&summary)));

    let mut written = Vec::new();
    for (name, contents) in files {
        let path = dir.join(name);
        write_file(&path, &(manifest_line(manifest) + &contents))?;
        written.push(path);
    }
    Ok(written)
}

pub fn write_cells(path: &Path, cells: &[CellResult], manifest: &str) -> CliResult<()> {
    write_file(path, &(manifest_line(manifest) + &render_cells(cells)))
}
