//! Static SVG figures: curves against log `p*` over a `p_am` histogram.

use crate::CliError;
use plotters::prelude::*;
use std::path::{Path, PathBuf};

pub struct PlotPanel {
    pub title: String,
    pub series: Vec<(&'static str, Vec<(f64, f64)>)>,
    pub histogram: Vec<(f64, f64, usize)>,
}

const COLORS: [RGBColor; 4] =
    [RGBColor(31, 119, 180), RGBColor(214, 39, 40), RGBColor(44, 160, 44), RGBColor(20, 20, 20)];

fn plot_err<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Plot(e.to_string())
}

/// One column per panel; curves on top, histogram below.
pub fn figure(path: &Path, panels: &[PlotPanel]) -> Result<PathBuf, CliError> {
    let root = SVGBackend::new(path, (520 * panels.len() as u32, 720)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let columns = root.split_evenly((1, panels.len()));
    for (area, panel) in columns.iter().zip(panels) {
        let (top, bottom) = area.split_vertically(440);
        curves(&top, panel)?;
        bars(&bottom, &panel.histogram)?;
    }
    root.present().map_err(plot_err)?;
    Ok(path.to_path_buf())
}

fn curves(area: &DrawingArea<SVGBackend, plotters::coord::Shift>, panel: &PlotPanel) -> Result<(), CliError> {
    let xs = panel.series.iter().flat_map(|(_, s)| s.iter().map(|p| p.0));
    let (lo, hi) = xs.fold((f64::INFINITY, 0.0f64), |(a, b), x| (a.min(x), b.max(x)));
    if !(lo > 0.0 && lo < hi) {
        return Err(CliError::Plot("need at least two positive p* values".into()));
    }
    let mut chart = ChartBuilder::on(area)
        .caption(&panel.title, ("sans-serif", 16))
        .margin(12)
        .x_label_area_size(36)
        .y_label_area_size(48)
        .build_cartesian_2d((lo..hi).log_scale(), 0.0..1.05)
        .map_err(plot_err)?;
    chart.configure_mesh().x_desc("p*").x_label_formatter(&|x| format!("{x:.0e}")).draw().map_err(plot_err)?;
    for ((name, points), color) in panel.series.iter().zip(COLORS) {
        chart
            .draw_series(LineSeries::new(points.iter().cloned(), color.stroke_width(2)))
            .map_err(plot_err)?
            .label(*name)
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 16, y)], color.stroke_width(2)));
    }
    chart
        .configure_series_labels()
        .position(SeriesLabelPosition::LowerRight)
        .background_style(WHITE.mix(0.85))
        .border_style(BLACK)
        .draw()
        .map_err(plot_err)?;
    Ok(())
}

fn bars(area: &DrawingArea<SVGBackend, plotters::coord::Shift>, hist: &[(f64, f64, usize)]) -> Result<(), CliError> {
    let x_max = hist.last().map_or(1.0, |b| b.1);
    let y_max = hist.iter().map(|b| b.2).max().unwrap_or(1).max(1) as f64;
    let mut chart = ChartBuilder::on(area)
        .margin(12)
        .x_label_area_size(36)
        .y_label_area_size(48)
        .build_cartesian_2d(0.0..x_max, 0.0..y_max * 1.05)
        .map_err(plot_err)?;
    chart
        .configure_mesh()
        .x_desc("p_am")
        .y_desc("count")
        .x_label_formatter(&|x| format!("{x:.1e}"))
        .draw()
        .map_err(plot_err)?;
    chart
        .draw_series(
            hist.iter().map(|&(lo, hi, c)| Rectangle::new([(lo, 0.0), (hi, c as f64)], COLORS[0].mix(0.6).filled())),
        )
        .map_err(plot_err)?;
    Ok(())
}
