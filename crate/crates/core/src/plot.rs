//! SVG regret plots.

use std::path::Path;

use plotters::prelude::*;

use crate::harness::{AggregateReport, SweepPoint};
use crate::{Error, Result};

const PALETTE: [RGBColor; 7] = [
    RGBColor(31, 119, 180),
    RGBColor(255, 127, 14),
    RGBColor(44, 160, 44),
    RGBColor(214, 39, 40),
    RGBColor(148, 103, 189),
    RGBColor(140, 86, 75),
    RGBColor(127, 127, 127),
];

/// One plotted curve; reference curves are drawn thin and grey.
struct Line {
    label: String,
    points: Vec<(f64, f64)>,
    reference: bool,
}

fn plot_err<E: std::fmt::Display>(e: E) -> Error {
    Error::Plot(e.to_string())
}

fn draw_lines(path: &Path, title: &str, x_label: &str, series: &[Line]) -> Result<()> {
    let (mut x_max, mut y_max) = (1e-9_f64, 1e-9_f64);
    let mut x_min = f64::INFINITY;
    for line in series {
        for &(x, y) in &line.points {
            x_min = x_min.min(x);
            x_max = x_max.max(x);
            y_max = y_max.max(y);
        }
    }
    if !x_min.is_finite() || x_min >= x_max {
        x_min = 0.0;
    }

    let root = SVGBackend::new(path, (800, 500)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 20))
        .margin(15)
        .x_label_area_size(40)
        .y_label_area_size(60)
        .build_cartesian_2d(x_min..x_max, 0.0..y_max * 1.05)
        .map_err(plot_err)?;
    chart.configure_mesh().x_desc(x_label).y_desc("cumulative regret").draw().map_err(plot_err)?;

    for (i, line) in series.iter().enumerate() {
        let color = if line.reference { PALETTE[6] } else { PALETTE[i % 6] };
        chart
            .draw_series(LineSeries::new(line.points.iter().copied(), color.stroke_width(if line.reference { 1 } else { 2 })))
            .map_err(plot_err)?
            .label(line.label.clone())
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color));
    }
    chart.configure_series_labels().background_style(WHITE.mix(0.8)).border_style(BLACK).draw().map_err(plot_err)?;
    root.present().map_err(plot_err)?;
    Ok(())
}

/// Mean cumulative regret per policy against rounds, with the bound curve when asked.
pub fn plot_regret(path: &Path, report: &AggregateReport, title: &str, with_bound: bool) -> Result<()> {
    let mut series: Vec<Line> = report
        .series
        .iter()
        .map(|s| Line {
            label: s.label.clone(),
            points: s.mean_cum.iter().enumerate().map(|(t, &m)| ((t + 1) as f64, m)).collect(),
            reference: false,
        })
        .collect();
    if with_bound {
        if let Some(bound) = &report.bound {
            // The bound dwarfs the empirical curves; cap it so they stay readable.
            let cap = series.iter().flat_map(|s| s.points.iter().map(|p| p.1)).fold(0.0, f64::max) * 3.0;
            let points = bound.iter().enumerate().skip(1).map(|(t, &b)| (t as f64, b.min(cap))).collect();
            series.push(Line { label: "regret bound (capped)".into(), points, reference: true });
        }
    }
    draw_lines(path, title, "round", &series)
}

/// Final mean cumulative regret per policy against the swept parameter.
pub fn plot_sweep(path: &Path, points: &[SweepPoint]) -> Result<()> {
    let Some(first) = points.first() else {
        return Err(Error::Plot("no sweep points".into()));
    };
    let series = first
        .report
        .series
        .iter()
        .map(|s| {
            let pts = points.iter().filter_map(|p| p.report.series(&s.label).map(|q| (p.value, q.final_mean()))).collect();
            Line { label: s.label.clone(), points: pts, reference: false }
        })
        .collect::<Vec<_>>();
    draw_lines(path, &format!("final regret by {}", first.param), first.param, &series)
}
