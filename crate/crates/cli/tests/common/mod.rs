#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mlrfit"))
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).env_remove("MLRFIT_WORKERS").output().expect("binary runs")
}

pub fn run_ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

fn is_measurement(name: &str) -> bool {
    name.contains("seconds") || name.ends_with("_unix") || name.contains(".time.")
}

/// Blanks wall-clock measurements and timestamps, which vary between runs.
/// Timing histograms consist of measurements only and are blanked whole.
pub fn mask_measurements(file_name: &str, text: &str) -> String {
    if file_name.starts_with("timing_histogram") || file_name.ends_with(".svg") {
        return String::from("<timing>\n");
    }
    let mut masked_columns: Vec<usize> = Vec::new();
    let mut out = String::new();
    for line in text.lines() {
        if line.starts_with('#') {
            out.push_str(line);
        } else if let Some((key, _)) = line.split_once(" = ") {
            if is_measurement(key) {
                out.push_str(key);
                out.push_str(" = <masked>");
            } else {
                out.push_str(line);
            }
        } else if line.contains("_seconds") || line.contains("seconds_mean") {
            masked_columns = line.split(',').enumerate().filter(|(_, c)| is_measurement(c)).map(|(i, _)| i).collect();
            out.push_str(line);
        } else if !masked_columns.is_empty() {
            let fields: Vec<String> = line
                .split(',')
                .enumerate()
                .map(|(i, f)| if masked_columns.contains(&i) { "<masked>".to_string() } else { f.to_string() })
                .collect();
            out.push_str(&fields.join(","));
        } else {
            out.push_str(line);
        }
        out.push('\n');
    }
    out
}

fn collect_files(dir: &Path, out: &mut Vec<PathBuf>) {
    for entry in std::fs::read_dir(dir).expect("readable dir") {
        let path = entry.expect("dir entry").path();
        if path.is_dir() {
            collect_files(&path, out);
        } else {
            out.push(path);
        }
    }
}

/// Every file under `dir`, recursively and sorted, with measurements masked.
pub fn masked_tree(dir: &Path) -> Vec<(PathBuf, String)> {
    let mut files = Vec::new();
    collect_files(dir, &mut files);
    files.sort();
    files
        .into_iter()
        .map(|p| {
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            let text = std::fs::read_to_string(&p).expect("readable file");
            (p, mask_measurements(&name, &text))
        })
        .collect()
}

pub const SMALL_CONFIG: &str = r#"
k_values = [2, 3]
d_values = [1, 2]
n_samples = 150
sigma = 1.0
noise = ["gaussian", "laplacian"]
repetitions = 3
n_iterations = 20
rho = 10.0
base_seed = 31
lad_path = "lp"
"#;

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
