//! Static SVG charts: per-axis velocity bars and traced trajectories.

use std::path::Path;

use plotters::prelude::*;

use crate::control::PathRun;
use crate::experiment::VelocityRow;
use crate::sim::Pose2D;

#[derive(Debug, thiserror::Error)]
#[error("plot failed: {0}")]
pub struct PlotError(String);

fn err<E: std::fmt::Display>(e: E) -> PlotError {
    PlotError(e.to_string())
}

fn span(values: impl Iterator<Item = f64>, pad: f64) -> (f64, f64) {
    let (lo, hi) = values.fold((0.0f64, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let pad = ((hi - lo) * pad).max(1e-3);
    (lo - pad, hi + pad)
}

struct Series<'a> {
    name: &'a str,
    color: RGBColor,
    mean: fn(&VelocityRow) -> f64,
    std: fn(&VelocityRow) -> f64,
}

fn bar_panel(
    area: &DrawingArea<SVGBackend, plotters::coord::Shift>,
    rows: &[VelocityRow],
    caption: &str,
    y_desc: &str,
    series: &[Series],
) -> Result<(), PlotError> {
    let (lo, hi) = span(
        rows.iter().flat_map(|r| series.iter().flat_map(move |s| [(s.mean)(r) - (s.std)(r), (s.mean)(r) + (s.std)(r)])),
        0.1,
    );
    let n = rows.len().max(1);
    let mut chart = ChartBuilder::on(area)
        .caption(caption, ("sans-serif", 18))
        .margin(10)
        .x_label_area_size(30)
        .y_label_area_size(60)
        .build_cartesian_2d(-0.5f64..n as f64 - 0.5, lo..hi)
        .map_err(err)?;
    chart
        .configure_mesh()
        .disable_x_mesh()
        .x_labels(n)
        .x_label_formatter(&|x| {
            let i = x.round();
            if (x - i).abs() < 1e-6 && i >= 0.0 {
                rows.get(i as usize).map(|r| r.label.clone()).unwrap_or_default()
            } else {
                String::new()
            }
        })
        .y_desc(y_desc)
        .draw()
        .map_err(err)?;

    let width = 0.8 / series.len() as f64;
    for (k, s) in series.iter().enumerate() {
        let offset = -0.4 + width * (k as f64 + 0.5);
        chart
            .draw_series(rows.iter().enumerate().map(|(i, r)| {
                let x = i as f64 + offset;
                Rectangle::new([(x - width / 2.0, 0.0), (x + width / 2.0, (s.mean)(r))], s.color.filled())
            }))
            .map_err(err)?
            .label(s.name)
            .legend(move |(x, y)| Rectangle::new([(x, y - 5), (x + 10, y + 5)], s.color.filled()));
        chart
            .draw_series(rows.iter().enumerate().map(|(i, r)| {
                let (m, sd) = ((s.mean)(r), (s.std)(r));
                ErrorBar::new_vertical(i as f64 + offset, m - sd, m, m + sd, BLACK.filled(), 6)
            }))
            .map_err(err)?;
    }
    chart.configure_series_labels().border_style(BLACK).background_style(WHITE).draw().map_err(err)?;
    Ok(())
}

/// Mean ± stddev per gait: linear components in BL/cycle on the left,
/// rotation in rad/cycle on the right.
pub fn velocity_chart(rows: &[VelocityRow], path: &Path) -> Result<(), PlotError> {
    let root = SVGBackend::new(path, (1000, 420)).into_drawing_area();
    root.fill(&WHITE).map_err(err)?;
    let (left, right) = root.split_horizontally(600);
    bar_panel(
        &left,
        rows,
        "Linear velocity",
        "BL/cycle",
        &[
            Series { name: "dx", color: RGBColor(31, 119, 180), mean: |r| r.mean_dx_bl, std: |r| r.std_dx_bl },
            Series { name: "dy", color: RGBColor(255, 127, 14), mean: |r| r.mean_dy_bl, std: |r| r.std_dy_bl },
        ],
    )?;
    bar_panel(
        &right,
        rows,
        "Angular velocity",
        "rad/cycle",
        &[Series {
            name: "dtheta",
            color: RGBColor(44, 160, 44),
            mean: |r| r.mean_dtheta_rad,
            std: |r| r.std_dtheta_rad,
        }],
    )?;
    root.present().map_err(err)
}

/// Target polyline through `target` plus each run's position trace.
pub fn trajectory_plot(target: &[Pose2D], runs: &[(&str, &PathRun)], path: &Path) -> Result<(), PlotError> {
    let xs = target.iter().map(|p| p.x).chain(runs.iter().flat_map(|(_, r)| r.trace.rows.iter().map(|row| row.pose.x)));
    let ys = target.iter().map(|p| p.y).chain(runs.iter().flat_map(|(_, r)| r.trace.rows.iter().map(|row| row.pose.y)));
    let (x0, x1) = span(xs, 0.1);
    let (y0, y1) = span(ys, 0.1);
    // equal scale on both axes
    let half = (x1 - x0).max(y1 - y0) / 2.0;
    let (cx, cy) = ((x0 + x1) / 2.0, (y0 + y1) / 2.0);

    let root = SVGBackend::new(path, (640, 640)).into_drawing_area();
    root.fill(&WHITE).map_err(err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption("Trajectory", ("sans-serif", 18))
        .margin(10)
        .x_label_area_size(35)
        .y_label_area_size(50)
        .build_cartesian_2d(cx - half..cx + half, cy - half..cy + half)
        .map_err(err)?;
    chart.configure_mesh().x_desc("x (m)").y_desc("y (m)").draw().map_err(err)?;
    chart
        .draw_series(LineSeries::new(target.iter().map(|p| (p.x, p.y)), BLACK.stroke_width(2)))
        .map_err(err)?
        .label("target")
        .legend(|(x, y)| PathElement::new([(x, y), (x + 15, y)], BLACK));
    let palette = [RGBColor(214, 39, 40), RGBColor(31, 119, 180), RGBColor(44, 160, 44)];
    for (i, (name, run)) in runs.iter().enumerate() {
        let color = palette[i % palette.len()];
        let pts =
            std::iter::once((run.start.x, run.start.y)).chain(run.trace.rows.iter().map(|r| (r.pose.x, r.pose.y)));
        chart
            .draw_series(LineSeries::new(pts, color))
            .map_err(err)?
            .label(*name)
            .legend(move |(x, y)| PathElement::new([(x, y), (x + 15, y)], color));
        chart
            .draw_series(
                run.trace
                    .rows
                    .iter()
                    .filter(|r| r.corrective)
                    .map(|r| Circle::new((r.pose.x, r.pose.y), 2, color.filled())),
            )
            .map_err(err)?;
    }
    chart.configure_series_labels().border_style(BLACK).background_style(WHITE).draw().map_err(err)?;
    root.present().map_err(err)
}
