//! Dataset files: `#` header lines with the generating parameters and true
//! coefficients, a column header, then one `label,y,x1..xd` row per sample.
//!
//! ```text
//! # mlrfit dataset
//! # k = 2
//! # d = 1
//! # n = 2
//! # noise = gaussian
//! # sigma = 1.0000000000000000e0
//! # seed = 7
//! # beta_0 = 5.0000000000000000e-1
//! # beta_1 = -1.2000000000000000e0
//! label,y,x1
//! 0,1.0000000000000000e0,2.0000000000000000e0
//! 1,3.5000000000000000e0,-3.0000000000000000e0
//! ```
//!
//! Only `d`, `n` and the rows are required when reading; labels may be left
//! empty for data without ground truth.

use std::fmt::Write as _;
use std::path::Path;

use mlrfit::{Dataset, MlrParams, NoiseKind};
use nalgebra::{DMatrix, DVector};

use crate::error::{CliError, CliResult};
use crate::format::{num, nums, parse_num, parse_nums, write_file, KeyValues};

/// Generating parameters recorded in a dataset header.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DatasetMeta {
    pub k: Option<usize>,
    pub noise: Option<NoiseKind>,
    pub sigma: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetFile {
    pub meta: DatasetMeta,
    pub data: Dataset,
}

pub fn render(file: &DatasetFile) -> String {
    let data = &file.data;
    let mut header = KeyValues::new();
    if let Some(k) = file.meta.k {
        header.push("k", k);
    }
    header.push("d", data.dim()).push("n", data.n());
    if let Some(noise) = file.meta.noise {
        header.push("noise", noise);
    }
    if let Some(sigma) = file.meta.sigma {
        header.push("sigma", num(sigma));
    }
    if let Some(seed) = file.meta.seed {
        header.push("seed", seed);
    }
    if let Some(truth) = data.true_params() {
        for k in 0..truth.k_components() {
            header.push(format!("beta_{k}"), nums(truth.component(k).iter().copied()));
        }
    }

    let mut out = String::from("# mlrfit dataset\n");
    for (k, v) in header.entries() {
        let _ = writeln!(out, "# {k} = {v}");
    }
    out.push_str("label,y");
    for j in 1..=data.dim() {
        let _ = write!(out, ",x{j}");
    }
    out.push('\n');
    for i in 0..data.n() {
        if let Some(labels) = data.labels() {
            let _ = write!(out, "{}", labels[i]);
        }
        let _ = write!(out, ",{}", num(data.y()[i]));
        for j in 0..data.dim() {
            let _ = write!(out, ",{}", num(data.x()[(i, j)]));
        }
        out.push('\n');
    }
    out
}

pub fn write(path: &Path, file: &DatasetFile) -> CliResult<()> {
    write_file(path, &render(file))
}

pub fn parse(text: &str) -> Result<DatasetFile, String> {
    let mut header_text = String::new();
    let mut body = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if let Some(rest) = line.strip_prefix('#') {
            if body.is_empty() && rest.contains('=') {
                header_text.push_str(rest);
                header_text.push('\n');
            }
        } else if !line.trim().is_empty() {
            body.push((lineno + 1, line));
        }
    }
    let header = KeyValues::parse(&header_text)?;
    let field = |key: &str| header.get(key);
    let int = |key: &str| -> Result<Option<u64>, String> {
        field(key).map(|v| v.parse::<u64>().map_err(|_| format!("header `{key}` is not an integer"))).transpose()
    };
    let d = int("d")?.ok_or("header is missing `d`")? as usize;
    let n = int("n")?.ok_or("header is missing `n`")? as usize;
    let meta = DatasetMeta {
        k: int("k")?.map(|v| v as usize),
        noise: field("noise").map(|v| v.parse::<NoiseKind>().map_err(|e| e.to_string())).transpose()?,
        sigma: field("sigma")
            .map(|v| parse_num(v).ok_or_else(|| "header `sigma` is not a number".to_string()))
            .transpose()?,
        seed: int("seed")?,
    };

    let Some(((_, columns), rows)) = body.split_first() else {
        return Err("missing column header".into());
    };
    let expected: Vec<String> =
        ["label".to_string(), "y".to_string()].into_iter().chain((1..=d).map(|j| format!("x{j}"))).collect();
    if columns.split(',').map(str::trim).ne(expected.iter().map(String::as_str)) {
        return Err(format!("column header must be `{}`", expected.join(",")));
    }
    if rows.len() != n {
        return Err(format!("header declares n = {n} but {} rows follow", rows.len()));
    }

    let mut labels = Vec::with_capacity(n);
    let mut y = DVector::zeros(n);
    let mut x = DMatrix::zeros(n, d);
    for (i, (lineno, row)) in rows.iter().enumerate() {
        let cells: Vec<&str> = row.split(',').collect();
        if cells.len() != d + 2 {
            return Err(format!("line {lineno}: expected {} fields, found {}", d + 2, cells.len()));
        }
        let bad = |what: &str| format!("line {lineno}: {what} is not a number");
        let label = cells[0].trim();
        if !label.is_empty() {
            labels.push(label.parse::<usize>().map_err(|_| format!("line {lineno}: bad label `{label}`"))?);
        }
        y[i] = parse_num(cells[1]).ok_or_else(|| bad("y"))?;
        for j in 0..d {
            x[(i, j)] = parse_num(cells[j + 2]).ok_or_else(|| bad(&format!("x{}", j + 1)))?;
        }
    }

    let mut data = Dataset::new(x, y).map_err(|e| e.to_string())?;
    let betas: Vec<Vec<f64>> = (0..)
        .map_while(|k| field(&format!("beta_{k}")))
        .map(|v| parse_nums(v).ok_or_else(|| "true coefficients are not numbers".to_string()))
        .collect::<Result<_, _>>()?;
    if !betas.is_empty() {
        let truth = MlrParams::from_columns(&betas).map_err(|e| e.to_string())?;
        data = data.with_true_params(truth).map_err(|e| e.to_string())?;
    }
    if !labels.is_empty() {
        if labels.len() != n {
            return Err("labels must be given for every row or for none".into());
        }
        let k = meta.k.or(data.true_params().map(|t| t.k_components())).unwrap_or_else(|| labels.iter().max().map_or(1, |m| m + 1));
        data = data.with_labels(labels, k).map_err(|e| e.to_string())?;
    }
    Ok(DatasetFile { meta, data })
}

pub fn read(path: &Path) -> CliResult<DatasetFile> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::file(path, e))?;
    parse(&text).map_err(|e| CliError::file(path, e))
}
