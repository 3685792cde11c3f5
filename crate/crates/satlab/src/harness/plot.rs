//! SVG rendering of experiment results: a heat table of accuracy per
//! `(r, q)` cell for the classification experiment, and line charts of the
//! minimal broken-clause count (relative and absolute) versus density for
//! the distinguishability experiment.
//!
//! Charts are plain hand-assembled SVG with no timestamps or random ids, so
//! identical inputs produce byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::exp1::Exp1Row;
use super::exp2::Exp2Row;
use crate::{Error, Result};

/// Which experiment's `results.csv` is being plotted.
#[derive(Clone, Copy, PartialEq, Debug)]
pub enum PlotKind {
    Exp1,
    Exp2,
}

/// Renders the plots for `input` (an experiment's `results.csv`) into
/// `out_dir`, returning the files written. The classification experiment
/// yields one heat table; the distinguishability experiment yields two line
/// charts (relative fraction and absolute count versus density, one line
/// per hardness value).
pub fn plot(kind: PlotKind, input: &Path, out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir)?;
    match kind {
        PlotKind::Exp1 => {
            let rows = read_rows::<Exp1Row>(input)?;
            let svg = exp1_table_svg(&rows)?;
            let path = out_dir.join("exp1_table.svg");
            fs::write(&path, svg)?;
            Ok(vec![path])
        }
        PlotKind::Exp2 => {
            let rows = read_rows::<Exp2Row>(input)?;
            let (relative, absolute) = exp2_charts_svg(&rows)?;
            let rel_path = out_dir.join("exp2_relative.svg");
            let abs_path = out_dir.join("exp2_absolute.svg");
            fs::write(&rel_path, relative)?;
            fs::write(&abs_path, absolute)?;
            Ok(vec![rel_path, abs_path])
        }
    }
}

fn read_rows<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| Error::parse(format!("cannot read {}: {e}", path.display())))?;
    let rows: Vec<T> = reader
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::parse(format!("malformed results CSV {}: {e}", path.display())))?;
    if rows.is_empty() {
        return Err(Error::invalid("the result set is empty; nothing to plot"));
    }
    Ok(rows)
}

const PALETTE: [&str; 6] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"];

fn fmt_tick(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e9 {
        format!("{v:.0}")
    } else {
        let s = format!("{v:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

/// Accuracy → fill color: white at 50 %, saturated green at 100 %.
fn accuracy_color(accuracy: f64) -> String {
    let t = ((accuracy - 50.0) / 50.0).clamp(0.0, 1.0);
    let lerp = |a: f64, b: f64| (a + t * (b - a)).round() as u8;
    format!("#{:02x}{:02x}{:02x}", lerp(255.0, 44.0), lerp(255.0, 160.0), lerp(255.0, 44.0))
}

/// Heat table of mean accuracy: one row per q, one column per r.
fn exp1_table_svg(rows: &[Exp1Row]) -> Result<String> {
    let mut densities: Vec<f64> = rows.iter().map(|r| r.r).collect();
    densities.sort_by(f64::total_cmp);
    densities.dedup();
    let mut hardness: Vec<f64> = rows.iter().map(|r| r.q).collect();
    hardness.sort_by(f64::total_cmp);
    hardness.dedup();

    const CELL_W: f64 = 110.0;
    const CELL_H: f64 = 42.0;
    const LEFT: f64 = 90.0;
    const TOP: f64 = 70.0;
    let width = LEFT + CELL_W * densities.len() as f64 + 20.0;
    let height = TOP + CELL_H * hardness.len() as f64 + 20.0;

    let mut svg = svg_open(width, height);
    let _ = write!(
        svg,
        r#"<text x="{:.1}" y="30" font-size="16" text-anchor="middle" font-family="sans-serif">Mean classification accuracy % by density r and hardness q</text>"#,
        width / 2.0
    );
    for (ci, &r) in densities.iter().enumerate() {
        let x = LEFT + CELL_W * (ci as f64 + 0.5);
        let _ = write!(
            svg,
            r#"<text x="{x:.1}" y="{:.1}" font-size="13" text-anchor="middle" font-family="sans-serif">r = {}</text>"#,
            TOP - 10.0,
            fmt_tick(r)
        );
    }
    for (ri, &q) in hardness.iter().enumerate() {
        let y = TOP + CELL_H * (ri as f64 + 0.5);
        let _ = write!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" font-size="13" text-anchor="end" font-family="sans-serif">q = {}</text>"#,
            LEFT - 8.0,
            y + 4.0,
            fmt_tick(q)
        );
        for (ci, &r) in densities.iter().enumerate() {
            let x = LEFT + CELL_W * ci as f64;
            let cy = TOP + CELL_H * ri as f64;
            let Some(row) = rows.iter().find(|row| row.r == r && row.q == q) else {
                continue;
            };
            let _ = write!(
                svg,
                r##"<rect x="{x:.1}" y="{cy:.1}" width="{CELL_W:.1}" height="{CELL_H:.1}" fill="{}" stroke="#888"/>"##,
                accuracy_color(row.mean_accuracy)
            );
            let _ = write!(
                svg,
                r#"<text x="{:.1}" y="{:.1}" font-size="13" text-anchor="middle" font-family="sans-serif">{:.1} ± {:.1}</text>"#,
                x + CELL_W / 2.0,
                y + 4.0,
                row.mean_accuracy,
                row.std_accuracy
            );
        }
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// The two distinguishability charts: minimal relative fraction and minimal
/// absolute u versus r, one line per q. Cells that never crossed the
/// threshold carry no point.
fn exp2_charts_svg(rows: &[Exp2Row]) -> Result<(String, String)> {
    let mut hardness: Vec<f64> = rows.iter().map(|r| r.q).collect();
    hardness.sort_by(f64::total_cmp);
    hardness.dedup();

    let series_of = |value: &dyn Fn(&Exp2Row) -> Option<f64>| -> Vec<Series> {
        hardness
            .iter()
            .map(|&q| {
                let mut points: Vec<(f64, f64)> = rows
                    .iter()
                    .filter(|row| row.q == q)
                    .filter_map(|row| value(row).map(|v| (row.r, v)))
                    .collect();
                points.sort_by(|a, b| a.0.total_cmp(&b.0));
                Series { name: format!("q = {}", fmt_tick(q)), points }
            })
            .collect()
    };

    let relative = line_chart(
        "Minimal relative broken-clause fraction",
        "density r",
        "u / (r n)",
        &series_of(&|row| row.relative_fraction),
    )?;
    let absolute = line_chart(
        "Minimal absolute broken-clause count",
        "density r",
        "u",
        &series_of(&|row| row.u_star.map(|u| u as f64)),
    )?;
    Ok((relative, absolute))
}

struct Series {
    name: String,
    points: Vec<(f64, f64)>,
}

fn svg_open(width: f64, height: f64) -> String {
    format!(
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}"><rect width="{width:.0}" height="{height:.0}" fill="white"/>"#
    )
}

fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> Result<String> {
    if series.iter().all(|s| s.points.is_empty()) {
        return Err(Error::invalid(format!("no data points to draw for {title:?}")));
    }
    const W: f64 = 720.0;
    const H: f64 = 480.0;
    const L: f64 = 80.0;
    const R: f64 = 170.0;
    const T: f64 = 50.0;
    const B: f64 = 60.0;

    let xs: Vec<f64> = series.iter().flat_map(|s| s.points.iter().map(|p| p.0)).collect();
    let ys: Vec<f64> = series.iter().flat_map(|s| s.points.iter().map(|p| p.1)).collect();
    let span = |values: &[f64]| -> (f64, f64) {
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if lo == hi {
            (lo - 0.5 * lo.abs().max(1.0), hi + 0.5 * hi.abs().max(1.0))
        } else {
            let pad = 0.05 * (hi - lo);
            (lo - pad, hi + pad)
        }
    };
    let (x_lo, x_hi) = span(&xs);
    let (y_lo, y_hi) = span(&ys);
    let to_px = |x: f64, y: f64| -> (f64, f64) {
        (
            L + (x - x_lo) / (x_hi - x_lo) * (W - L - R),
            H - B - (y - y_lo) / (y_hi - y_lo) * (H - T - B),
        )
    };

    let mut svg = svg_open(W, H);
    let _ = write!(
        svg,
        r#"<text x="{:.1}" y="28" font-size="16" text-anchor="middle" font-family="sans-serif">{title}</text>"#,
        (L + W - R) / 2.0
    );
    // Axes, ticks, and grid.
    let _ = write!(
        svg,
        r#"<line x1="{L:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="black"/><line x1="{L:.1}" y1="{T:.1}" x2="{L:.1}" y2="{:.1}" stroke="black"/>"#,
        H - B,
        W - R,
        H - B,
        H - B
    );
    for i in 0..5 {
        let fx = x_lo + (x_hi - x_lo) * f64::from(i) / 4.0;
        let fy = y_lo + (y_hi - y_lo) * f64::from(i) / 4.0;
        let (px, _) = to_px(fx, y_lo);
        let (_, py) = to_px(x_lo, fy);
        let _ = write!(
            svg,
            r#"<line x1="{px:.1}" y1="{:.1}" x2="{px:.1}" y2="{:.1}" stroke="black"/><text x="{px:.1}" y="{:.1}" font-size="11" text-anchor="middle" font-family="sans-serif">{}</text>"#,
            H - B,
            H - B + 5.0,
            H - B + 20.0,
            fmt_tick(fx)
        );
        let _ = write!(
            svg,
            r#"<line x1="{:.1}" y1="{py:.1}" x2="{L:.1}" y2="{py:.1}" stroke="black"/><text x="{:.1}" y="{:.1}" font-size="11" text-anchor="end" font-family="sans-serif">{}</text>"#,
            L - 5.0,
            L - 9.0,
            py + 4.0,
            fmt_tick(fy)
        );
    }
    let _ = write!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" font-size="13" text-anchor="middle" font-family="sans-serif">{x_label}</text>"#,
        (L + W - R) / 2.0,
        H - 15.0
    );
    let _ = write!(
        svg,
        r#"<text x="20" y="{:.1}" font-size="13" text-anchor="middle" font-family="sans-serif" transform="rotate(-90 20 {:.1})">{y_label}</text>"#,
        (T + H - B) / 2.0,
        (T + H - B) / 2.0
    );

    for (si, s) in series.iter().enumerate() {
        let color = PALETTE[si % PALETTE.len()];
        if !s.points.is_empty() {
            let path: Vec<String> = s
                .points
                .iter()
                .map(|&(x, y)| {
                    let (px, py) = to_px(x, y);
                    format!("{px:.1},{py:.1}")
                })
                .collect();
            let _ = write!(
                svg,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
                path.join(" ")
            );
            for &(x, y) in &s.points {
                let (px, py) = to_px(x, y);
                let _ =
                    write!(svg, r#"<circle cx="{px:.1}" cy="{py:.1}" r="3.5" fill="{color}"/>"#);
            }
        }
        // Legend entry (kept even for empty series so every q is listed).
        let ly = T + 20.0 * si as f64;
        let _ = write!(
            svg,
            r#"<line x1="{:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/><text x="{:.1}" y="{:.1}" font-size="12" font-family="sans-serif">{}{}</text>"#,
            W - R + 15.0,
            W - R + 45.0,
            W - R + 52.0,
            ly + 4.0,
            s.name,
            if s.points.is_empty() { " (no crossing)" } else { "" }
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}
