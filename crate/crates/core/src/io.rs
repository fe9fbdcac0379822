//! Deterministic report output: canonical JSON with sorted keys, flat CSV
//! tables, and small self-contained SVG plots. Byte-identical input data
//! produces byte-identical files.

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

/// Pretty JSON with object keys sorted. Round-tripping through
/// `serde_json::Value` sorts keys because its map is a B-tree; struct field
/// order in the source therefore never leaks into the output.
pub fn canonical_json<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value).map_err(|e| Error::Format(e.to_string()))?;
    serde_json::to_string_pretty(&v).map_err(|e| Error::Format(e.to_string()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = canonical_json(value)?;
    s.push('\n');
    fs::write(path, s)?;
    Ok(())
}

/// Shortest round-trip decimal form, matching the JSON emitter.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

#[derive(Clone, Debug, Default)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

fn csv_escape(cell: &str) -> String {
    if cell.contains(',') || cell.contains('"') || cell.contains('\n') {
        format!("\"{}\"", cell.replace('"', "\"\""))
    } else {
        cell.to_string()
    }
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        CsvTable {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let line = |cells: &[String]| {
            cells
                .iter()
                .map(|c| csv_escape(c))
                .collect::<Vec<_>>()
                .join(",")
        };
        out.push_str(&line(&self.header));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&line(row));
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.render())?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlotStyle {
    Line,
    /// Horizontal-then-vertical segments between samples.
    Step,
}

#[derive(Clone, Copy, Debug)]
pub struct Series<'a> {
    pub label: &'a str,
    pub points: &'a [(f64, f64)],
    pub style: PlotStyle,
}

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

const W: f64 = 720.0;
const H: f64 = 440.0;
const ML: f64 = 64.0;
const MR: f64 = 20.0;
const MT: f64 = 34.0;
const MB: f64 = 42.0;

fn px(v: f64) -> String {
    format!("{v:.2}")
}

/// A minimal plot: axes, min/max tick labels, one polyline per series and a
/// text legend. `log_y` plots the base-10 logarithm of positive y values
/// and drops the rest.
pub fn svg_plot(title: &str, series: &[Series], log_y: bool) -> String {
    let map_y = |y: f64| if log_y { y.log10() } else { y };
    let usable = |&(x, y): &(f64, f64)| {
        x.is_finite() && y.is_finite() && (!log_y || y > 0.0)
    };
    let (mut x0, mut x1) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY);
    for s in series {
        for pt in s.points.iter().filter(|p| usable(p)) {
            x0 = x0.min(pt.0);
            x1 = x1.max(pt.0);
            let y = map_y(pt.1);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x0 == x1 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if y0 == y1 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let sx = (W - ML - MR) / (x1 - x0);
    let sy = (H - MT - MB) / (y1 - y0);
    let tx = |x: f64| ML + (x - x0) * sx;
    let ty = |y: f64| H - MB - (map_y(y) - y0) * sy;

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n"
    ));
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    out.push_str(&format!(
        "<text x=\"{}\" y=\"20\" font-family=\"monospace\" font-size=\"14\">{}</text>\n",
        px(ML),
        title
    ));
    // axes
    out.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        px(ML),
        px(H - MB),
        px(W - MR),
        px(H - MB)
    ));
    out.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        px(ML),
        px(MT),
        px(ML),
        px(H - MB)
    ));
    let y_label = |v: f64| {
        if log_y {
            format!("1e{}", fmt_f64(v))
        } else {
            fmt_f64(v)
        }
    };
    for (v, y) in [(y0, H - MB), (y1, MT)] {
        out.push_str(&format!(
            "<text x=\"4\" y=\"{}\" font-family=\"monospace\" font-size=\"11\">{}</text>\n",
            px(y + 4.0),
            y_label(v)
        ));
    }
    for (v, x) in [(x0, ML), (x1, W - MR)] {
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"middle\">{}</text>\n",
            px(x),
            px(H - MB + 16.0),
            fmt_f64(v)
        ));
    }
    for (si, s) in series.iter().enumerate() {
        let color = PALETTE[si % PALETTE.len()];
        let pts: Vec<(f64, f64)> = s.points.iter().filter(|p| usable(p)).copied().collect();
        if pts.is_empty() {
            continue;
        }
        let mut path = String::new();
        for (i, &(x, y)) in pts.iter().enumerate() {
            if i == 0 {
                path.push_str(&format!("M {} {}", px(tx(x)), px(ty(y))));
            } else if s.style == PlotStyle::Step {
                let prev_y = ty(pts[i - 1].1);
                path.push_str(&format!(" L {} {}", px(tx(x)), px(prev_y)));
                path.push_str(&format!(" L {} {}", px(tx(x)), px(ty(y))));
            } else {
                path.push_str(&format!(" L {} {}", px(tx(x)), px(ty(y))));
            }
        }
        out.push_str(&format!(
            "<path d=\"{path}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n"
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"11\" fill=\"{color}\">{}</text>\n",
            px(W - MR - 150.0),
            px(MT + 14.0 * si as f64 + 4.0),
            s.label
        ));
    }
    out.push_str("</svg>\n");
    out
}

pub fn write_svg(path: &Path, content: &str) -> Result<()> {
    fs::write(path, content)?;
    Ok(())
}
