//! SVG plots of sweep aggregates: one file per metric, mean ± std against
//! the first sweep axis, one line per combination of the other axes.

use std::path::Path;

use anyhow::{anyhow, Result};
use plotters::prelude::*;
use toml::Value;

use crate::sweep::SweepResult;

fn as_number(v: &Value) -> Option<f64> {
    match v {
        Value::Float(x) => Some(*x),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

/// Writes `plots/<metric>.svg` for every metric when the first axis is
/// numeric; otherwise nothing.
pub fn plot_sweep(res: &SweepResult, out: &Path) -> Result<()> {
    if res.cells.is_empty() || res.cells.iter().any(|c| as_number(&c[0].1).is_none()) {
        return Ok(());
    }
    let dir = out.join("plots");
    std::fs::create_dir_all(&dir)?;
    let stats = res.stats();
    for metric in res.metrics() {
        // group cells by the values of the remaining axes
        let mut series: Vec<(String, Vec<(f64, f64, f64)>)> = Vec::new();
        for s in stats.iter().filter(|s| s.metric == metric && s.mean.is_finite()) {
            let cell = &res.cells[s.cell];
            let label = cell[1..].iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(" ");
            let x = as_number(&cell[0].1).unwrap_or(f64::NAN);
            match series.iter_mut().find(|(l, _)| *l == label) {
                Some((_, pts)) => pts.push((x, s.mean, s.std)),
                None => series.push((label, vec![(x, s.mean, s.std)])),
            }
        }
        if series.is_empty() {
            continue;
        }
        let pts = series.iter().flat_map(|(_, p)| p.iter());
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &(x, m, s) in pts {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(m - s);
            y1 = y1.max(m + s);
        }
        if x1 <= x0 {
            x0 -= 0.5;
            x1 += 0.5;
        }
        if y1 <= y0 {
            y0 -= 0.5;
            y1 += 0.5;
        }
        let pad = 0.05 * (y1 - y0);
        let path = dir.join(format!("{}.svg", metric.replace(['/', ' '], "_")));
        let root = SVGBackend::new(&path, (640, 420)).into_drawing_area();
        root.fill(&WHITE).map_err(|e| anyhow!("{e}"))?;
        let mut chart = ChartBuilder::on(&root)
            .caption(&metric, ("sans-serif", 18))
            .margin(12)
            .x_label_area_size(36)
            .y_label_area_size(56)
            .build_cartesian_2d(x0..x1, (y0 - pad)..(y1 + pad))
            .map_err(|e| anyhow!("{e}"))?;
        chart
            .configure_mesh()
            .x_desc(res.axes[0].as_str())
            .y_desc(metric.as_str())
            .draw()
            .map_err(|e| anyhow!("{e}"))?;
        for (i, (label, mut pts)) in series.into_iter().enumerate() {
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            let color = Palette99::pick(i).to_rgba();
            chart
                .draw_series(pts.iter().map(|&(x, m, s)| ErrorBar::new_vertical(x, m - s, m, m + s, color.filled(), 6)))
                .map_err(|e| anyhow!("{e}"))?;
            let line = chart
                .draw_series(LineSeries::new(pts.iter().map(|&(x, m, _)| (x, m)), color.stroke_width(2)))
                .map_err(|e| anyhow!("{e}"))?;
            if !label.is_empty() {
                line.label(label).legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 16, y)], color));
            }
        }
        if res.axes.len() > 1 {
            chart
                .configure_series_labels()
                .background_style(WHITE.mix(0.8))
                .border_style(BLACK)
                .draw()
                .map_err(|e| anyhow!("{e}"))?;
        }
        root.present().map_err(|e| anyhow!("{e}"))?;
    }
    Ok(())
}
