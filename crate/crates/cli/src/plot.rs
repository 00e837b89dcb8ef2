//! Static SVG figures rendered from the same series that go to the data
//! files. Plots are a convenience; nothing is validated against them.

use std::path::Path;

use plotters::prelude::*;

use crate::error::CliError;

pub struct Series<'a> {
    pub label: &'a str,
    pub points: Vec<(f64, f64)>,
}

const COLORS: [RGBColor; 6] = [
    RGBColor(31, 119, 180),
    RGBColor(214, 39, 40),
    RGBColor(44, 160, 44),
    RGBColor(148, 103, 189),
    RGBColor(255, 127, 14),
    RGBColor(23, 190, 207),
];

fn plot_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: plot failed: {e}", path.display()))
}

fn bounds(series: &[Series], f: impl Fn(&(f64, f64)) -> f64) -> (f64, f64) {
    let (lo, hi) = series
        .iter()
        .flat_map(|s| s.points.iter().map(&f))
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo <= f64::EPSILON * lo.abs().max(1.0) {
        let pad = 0.5 * lo.abs().max(1e-12);
        return (lo - pad, hi + pad);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

/// Line plot; `log` puts both axes on a log scale (data must be positive).
pub fn line_plot(path: &Path, title: &str, x_desc: &str, y_desc: &str, series: &[Series], log: bool) -> Result<(), CliError> {
    let root = SVGBackend::new(path, (900, 560)).into_drawing_area();
    root.fill(&WHITE).map_err(|e| plot_err(path, e))?;
    let mut builder = ChartBuilder::on(&root);
    builder
        .caption(title, ("sans-serif", 22))
        .margin(14)
        .x_label_area_size(44)
        .y_label_area_size(78);

    macro_rules! draw {
        ($chart:expr, $series:expr) => {{
            let mut chart = $chart.map_err(|e| plot_err(path, e))?;
            chart
                .configure_mesh()
                .x_desc(x_desc)
                .y_desc(y_desc)
                .draw()
                .map_err(|e| plot_err(path, e))?;
            for (i, s) in $series.iter().enumerate() {
                let color = COLORS[i % COLORS.len()];
                chart
                    .draw_series(LineSeries::new(s.points.iter().copied(), color.stroke_width(2)))
                    .map_err(|e| plot_err(path, e))?
                    .label(s.label)
                    .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color.stroke_width(2)));
            }
            chart
                .configure_series_labels()
                .background_style(WHITE.mix(0.85))
                .border_style(BLACK)
                .draw()
                .map_err(|e| plot_err(path, e))?;
        }};
    }

    if log {
        let positive: Vec<Series> = series
            .iter()
            .map(|s| Series {
                label: s.label,
                points: s.points.iter().copied().filter(|(x, y)| *x > 0.0 && *y > 0.0).collect(),
            })
            .collect();
        let (x0, x1) = bounds(&positive, |p| p.0.ln());
        let (y0, y1) = bounds(&positive, |p| p.1.ln());
        draw!(builder.build_cartesian_2d((x0.exp()..x1.exp()).log_scale(), (y0.exp()..y1.exp()).log_scale()), positive);
    } else {
        let (x0, x1) = bounds(series, |p| p.0);
        let (y0, y1) = bounds(series, |p| p.1);
        draw!(builder.build_cartesian_2d(x0..x1, y0..y1), series);
    }
    root.present().map_err(|e| plot_err(path, e))
}
