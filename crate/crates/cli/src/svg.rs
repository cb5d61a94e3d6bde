//! SVG bar charts of emitted histogram CSVs.

use std::fmt::Write as _;

use crate::format::parse_num;

#[derive(Debug, Clone, PartialEq)]
pub struct Bin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

/// Parses a `bin_lo,bin_hi,count` CSV; `#` lines are skipped.
pub fn parse_histogram(text: &str) -> Result<Vec<Bin>, String> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header = r.headers().map_err(|e| e.to_string())?.clone();
    if header.iter().ne(["bin_lo", "bin_hi", "count"]) {
        return Err("header must be `bin_lo,bin_hi,count`".into());
    }
    let mut bins = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| e.to_string())?;
        let bad = || format!("row {}: malformed bin", i + 2);
        let lo = rec.get(0).and_then(parse_num).ok_or_else(bad)?;
        let hi = rec.get(1).and_then(parse_num).ok_or_else(bad)?;
        let count = rec.get(2).and_then(|c| c.trim().parse().ok()).ok_or_else(bad)?;
        if hi.partial_cmp(&lo).is_none_or(|o| o.is_lt()) {
            return Err(bad());
        }
        bins.push(Bin { lo, hi, count });
    }
    if bins.is_empty() {
        return Err("histogram has no bins".into());
    }
    Ok(bins)
}

pub fn render(bins: &[Bin], title: &str) -> String {
    const WIDTH: f64 = 640.0;
    const HEIGHT: f64 = 400.0;
    const MARGIN: f64 = 50.0;
    let plot_w = WIDTH - 2.0 * MARGIN;
    let plot_h = HEIGHT - 2.0 * MARGIN;
    let lo = bins.first().map_or(0.0, |b| b.lo);
    let hi = bins.last().map_or(1.0, |b| b.hi);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let max = bins.iter().map(|b| b.count).max().unwrap_or(0).max(1) as f64;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        MARGIN / 2.0,
        escape(title)
    );
    for b in bins {
        let x = MARGIN + (b.lo - lo) / span * plot_w;
        let w = ((b.hi - b.lo) / span * plot_w).max(0.5);
        let h = b.count as f64 / max * plot_h;
        let y = MARGIN + plot_h - h;
        let _ = writeln!(
            out,
            r##"<rect x="{x:.2}" y="{y:.2}" width="{w:.2}" height="{h:.2}" fill="#4a78b5" stroke="white"><title>[{}, {}]: {}</title></rect>"##,
            b.lo, b.hi, b.count
        );
    }
    let base = MARGIN + plot_h;
    let _ = writeln!(
        out,
        r#"<line x1="{MARGIN}" y1="{base}" x2="{}" y2="{base}" stroke="black"/>"#,
        MARGIN + plot_w
    );
    for (x, label) in [(MARGIN, lo), (MARGIN + plot_w, hi)] {
        let _ = writeln!(
            out,
            r#"<text x="{x}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="11">{label:.4e}</text>"#,
            base + 16.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="end" font-family="sans-serif" font-size="11">{}</text>"#,
        MARGIN - 4.0,
        MARGIN + 4.0,
        max as usize
    );
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
