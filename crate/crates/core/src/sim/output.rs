//! CSV and SVG artifacts for a finished batch. Floats are written in Rust's
//! shortest round-trip form, so equal results give byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

use super::batch::BatchResult;
use super::episode::RunLedger;

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(|e| Error::io(path, e.into()))
}

/// Columns `t, mean_regret, std_regret, bound`; regret uses the prefix
/// benchmark at each `t`.
pub fn write_batch_csv(path: &Path, batch: &BatchResult) -> Result<()> {
    let mut w = csv_writer(path)?;
    let io = |e: csv::Error| Error::io(path, e.into());
    w.write_record(["t", "mean_regret", "std_regret", "bound"]).map_err(io)?;
    for (i, ((m, s), b)) in batch
        .mean_regret
        .iter()
        .zip(&batch.std_regret)
        .zip(&batch.bound)
        .enumerate()
    {
        w.write_record([(i + 1).to_string(), m.to_string(), s.to_string(), b.to_string()])
            .map_err(io)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Columns `t, x1..xN, z1..zN, g, payoff` with zero-based type `g`.
pub fn write_run_csv(path: &Path, ledger: &RunLedger) -> Result<()> {
    let mut w = csv_writer(path)?;
    let io = |e: csv::Error| Error::io(path, e.into());
    let n = ledger.records.first().map_or(0, |r| r.x.dim());
    let mut header = vec!["t".to_string()];
    header.extend((1..=n).map(|i| format!("x{i}")));
    header.extend((1..=n).map(|i| format!("z{i}")));
    header.extend(["g".to_string(), "payoff".to_string()]);
    w.write_record(&header).map_err(io)?;
    for r in &ledger.records {
        let mut row = vec![r.t.to_string()];
        row.extend(r.x.iter().map(f64::to_string));
        row.extend(r.z.iter().map(f64::to_string));
        row.push(r.g.to_string());
        row.push(r.payoff.to_string());
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

/// Mean prefix regret with a one-sigma band, and the regret bound. When the
/// bound dwarfs the regret the axis follows the regret and the bound is
/// clipped at the top edge.
pub fn render_svg(batch: &BatchResult, title: &str) -> String {
    let h = batch.mean_regret.len().max(1);
    let upper: Vec<f64> = batch.mean_regret.iter().zip(&batch.std_regret).map(|(m, s)| m + s).collect();
    let lower: Vec<f64> = batch.mean_regret.iter().zip(&batch.std_regret).map(|(m, s)| m - s).collect();
    let band_max = upper.iter().copied().fold(0.0f64, f64::max);
    let bound_max = batch.bound.iter().copied().fold(0.0f64, f64::max);
    let clipped = bound_max > 3.0 * band_max.max(1e-12);
    let y_max = if clipped { band_max * 1.25 } else { bound_max.max(band_max) * 1.05 };
    let y_max = if y_max > 0.0 { y_max } else { 1.0 };
    let y_min = lower.iter().copied().fold(0.0f64, f64::min);
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let px = |t: usize| LEFT + pw * (t as f64) / (h as f64);
    let py = |v: f64| TOP + ph * (1.0 - (v - y_min) / (y_max - y_min));
    let path = |vals: &[f64]| -> String {
        let mut s = String::new();
        for (i, v) in vals.iter().enumerate() {
            let _ = write!(s, "{}{:.2},{:.2} ", if i == 0 { "M" } else { "L" }, px(i + 1), py(*v));
        }
        s
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        svg,
        r#"<defs><clipPath id="plot"><rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}"/></clipPath></defs>"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(title));

    // Axes and ticks.
    let _ = writeln!(
        svg,
        r#"<path d="M{LEFT},{TOP} L{LEFT},{} L{},{}" stroke="black" fill="none"/>"#,
        TOP + ph,
        LEFT + pw,
        TOP + ph
    );
    for i in 0..=5 {
        let v = y_min + (y_max - y_min) * i as f64 / 5.0;
        let y = py(v);
        let _ = writeln!(
            svg,
            r##"<line x1="{LEFT}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="#ddd"/><text x="{}" y="{:.2}" text-anchor="end">{}</text>"##,
            LEFT + pw,
            LEFT - 6.0,
            y + 4.0,
            tick_label(v)
        );
    }
    for i in 0..=5 {
        let t = (h * i) / 5;
        let x = px(t);
        let _ = writeln!(
            svg,
            r#"<text x="{x:.2}" y="{}" text-anchor="middle">{t}</text>"#,
            TOP + ph + 18.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">round t</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 10.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">prefix-benchmark regret</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0
    );

    // Band: upper edge forward, lower edge back.
    let mut band = path(&upper);
    for (i, v) in lower.iter().enumerate().rev() {
        let _ = write!(band, "L{:.2},{:.2} ", px(i + 1), py(*v));
    }
    band.push('Z');
    let _ = writeln!(svg, r##"<g clip-path="url(#plot)">"##);
    let _ = writeln!(svg, r##"<path d="{band}" fill="#4c78a8" fill-opacity="0.25" stroke="none"/>"##);
    let _ = writeln!(
        svg,
        r##"<path d="{}" fill="none" stroke="#4c78a8" stroke-width="2"/>"##,
        path(&batch.mean_regret)
    );
    let _ = writeln!(
        svg,
        r##"<path d="{}" fill="none" stroke="#e45756" stroke-width="2" stroke-dasharray="6 4"/>"##,
        path(&batch.bound)
    );
    let _ = writeln!(svg, "</g>");

    let bound_label = if clipped {
        format!("regret bound (off scale, reaches {})", tick_label(bound_max))
    } else {
        "regret bound".to_string()
    };
    let lx = LEFT + 12.0;
    let _ = writeln!(
        svg,
        r##"<line x1="{lx}" y1="{}" x2="{}" y2="{}" stroke="#4c78a8" stroke-width="2"/><text x="{}" y="{}">mean regret (S = {}) with 1 sigma band</text>"##,
        TOP + 12.0,
        lx + 24.0,
        TOP + 12.0,
        lx + 30.0,
        TOP + 16.0,
        batch.runs.len()
    );
    let _ = writeln!(
        svg,
        r##"<line x1="{lx}" y1="{}" x2="{}" y2="{}" stroke="#e45756" stroke-width="2" stroke-dasharray="6 4"/><text x="{}" y="{}">{}</text>"##,
        TOP + 30.0,
        lx + 24.0,
        TOP + 30.0,
        lx + 30.0,
        TOP + 34.0,
        escape(&bound_label)
    );
    svg.push_str("</svg>\n");
    svg
}

fn tick_label(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(0.01..100_000.0).contains(&a) {
        format!("{v:.2e}")
    } else if a >= 100.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Writes `batch.csv`, `regret.svg` and `runs/run_<seed>.csv` under `dir`
/// and returns the paths written.
pub fn write_batch_outputs(dir: &Path, batch: &BatchResult, title: &str) -> Result<Vec<PathBuf>> {
    let runs_dir = dir.join("runs");
    fs::create_dir_all(&runs_dir).map_err(|e| Error::io(&runs_dir, e))?;
    let mut written = Vec::new();
    let csv_path = dir.join("batch.csv");
    write_batch_csv(&csv_path, batch)?;
    written.push(csv_path);
    for (run, seed) in batch.runs.iter().zip(&batch.seeds) {
        let p = runs_dir.join(format!("run_{seed:06}.csv"));
        write_run_csv(&p, run)?;
        written.push(p);
    }
    let svg_path = dir.join("regret.svg");
    fs::write(&svg_path, render_svg(batch, title)).map_err(|e| Error::io(&svg_path, e))?;
    written.push(svg_path);
    Ok(written)
}
