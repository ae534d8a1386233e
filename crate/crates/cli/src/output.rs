use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use plotters::prelude::*;
use serde::Serialize;

use crate::config::ExperimentConfig;

pub const VERSION: &str = concat!("mcflab-cli ", env!("CARGO_PKG_VERSION"));

/// Wall-clock bounds of a command. Kept apart from everything else so two
/// runs of the same config differ only here.
#[derive(Debug, Clone, Serialize)]
pub struct Timestamps {
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
}

pub fn now_ms() -> u128 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0)
}

#[derive(Serialize)]
struct Report<'a, R: Serialize> {
    command: &'a str,
    version: &'a str,
    config: &'a ExperimentConfig,
    result: &'a R,
    timestamps: Timestamps,
}

pub fn write_report<R: Serialize>(dir: &Path, command: &str, cfg: &ExperimentConfig, result: &R, started: u128) -> Result<()> {
    fs::create_dir_all(dir)?;
    let r = Report {
        command,
        version: VERSION,
        config: cfg,
        result,
        timestamps: Timestamps {
            started_unix_ms: started,
            finished_unix_ms: now_ms(),
        },
    };
    let path = dir.join(format!("{command}.json"));
    fs::write(&path, serde_json::to_string_pretty(&r)? + "\n").with_context(|| format!("writing {}", path.display()))
}

pub fn write_csv<S: Serialize>(path: &Path, rows: &[S]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    let (lo, hi) = if lo.is_finite() && hi.is_finite() { (lo, hi) } else { (0.0, 1.0) };
    let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.5 * lo.abs().max(1.0) };
    (lo - pad, hi + pad)
}

/// Line chart of one or more (x, y) series.
pub fn line_plot(path: &Path, title: &str, x_label: &str, y_label: &str, series: &[(&str, Vec<(f64, f64)>)]) -> Result<()> {
    let pts = series.iter().flat_map(|s| s.1.iter()).filter(|p| p.0.is_finite() && p.1.is_finite());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in pts {
        x0 = x0.min(p.0);
        x1 = x1.max(p.0);
        y0 = y0.min(p.1);
        y1 = y1.max(p.1);
    }
    let (x0, x1) = padded(x0, x1);
    let (y0, y1) = padded(y0, y1);
    let root = SVGBackend::new(path, (720, 480)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 18))
        .margin(12)
        .x_label_area_size(36)
        .y_label_area_size(64)
        .build_cartesian_2d(x0..x1, y0..y1)
        .map_err(plot_err)?;
    chart.configure_mesh().x_desc(x_label).y_desc(y_label).draw().map_err(plot_err)?;
    for (i, (name, s)) in series.iter().enumerate() {
        let color = Palette99::pick(i).to_rgba();
        chart
            .draw_series(LineSeries::new(s.iter().copied().filter(|p| p.0.is_finite() && p.1.is_finite()), color.stroke_width(2)))
            .map_err(plot_err)?
            .label(*name)
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 16, y)], color));
    }
    if series.len() > 1 {
        chart.configure_series_labels().background_style(WHITE.mix(0.8)).border_style(BLACK).draw().map_err(plot_err)?;
    }
    root.present().map_err(plot_err)?;
    Ok(())
}

/// Filled grid of values[i][j] over xs[i] × ys[j], blue (low) to red (high).
pub fn heatmap(path: &Path, title: &str, x_label: &str, y_label: &str, xs: &[f64], ys: &[f64], values: &[Vec<f64>]) -> Result<()> {
    let lo = values.iter().flatten().cloned().filter(|v| v.is_finite()).fold(f64::INFINITY, f64::min);
    let hi = values.iter().flatten().cloned().filter(|v| v.is_finite()).fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let dx = if xs.len() > 1 { xs[1] - xs[0] } else { 1.0 };
    let dy = if ys.len() > 1 { ys[1] - ys[0] } else { 1.0 };
    let root = SVGBackend::new(path, (720, 560)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption(format!("{title} (range {lo:.4} to {hi:.4})"), ("sans-serif", 18))
        .margin(12)
        .x_label_area_size(36)
        .y_label_area_size(64)
        .build_cartesian_2d(xs[0] - dx / 2.0..xs[xs.len() - 1] + dx / 2.0, ys[0] - dy / 2.0..ys[ys.len() - 1] + dy / 2.0)
        .map_err(plot_err)?;
    chart.configure_mesh().disable_mesh().x_desc(x_label).y_desc(y_label).draw().map_err(plot_err)?;
    let cells = xs.iter().enumerate().flat_map(|(i, &x)| {
        ys.iter().enumerate().map(move |(j, &y)| {
            let u = ((values[i][j] - lo) / span).clamp(0.0, 1.0);
            let c = RGBColor((255.0 * u) as u8, 64, (255.0 * (1.0 - u)) as u8);
            Rectangle::new([(x - dx / 2.0, y - dy / 2.0), (x + dx / 2.0, y + dy / 2.0)], c.filled())
        })
    });
    chart.draw_series(cells).map_err(plot_err)?;
    root.present().map_err(plot_err)?;
    Ok(())
}

fn plot_err<E: std::fmt::Debug>(e: E) -> anyhow::Error {
    anyhow::anyhow!("plotting failed: {e:?}")
}
