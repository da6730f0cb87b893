//! SVG plots rendered from a run's CSV.

use std::path::Path;

use heisenlab::TimeSeries;
use plotters::prelude::*;

use crate::run::RunReport;
use crate::{write_atomic, CliError};

const SIZE: (u32, u32) = (900, 540);
const QUANTUM: RGBColor = RGBColor(31, 90, 180);
const CLASSICAL: RGBColor = RGBColor(220, 90, 40);

struct Curve<'a> {
    label: String,
    xs: &'a [f64],
    ys: &'a [f64],
    color: RGBColor,
    width: u32,
}

fn padded(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let lo = values.clone().fold(f64::INFINITY, f64::min);
    let hi = values.fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    let pad = if span > 0.0 { 0.05 * span } else { lo.abs().max(1e-12) * 0.05 + 1e-12 };
    (lo - pad, hi + pad)
}

fn render(caption: &str, x_desc: &str, y_desc: &str, curves: &[Curve<'_>]) -> Result<String, String> {
    let mut svg = String::new();
    {
        let root = SVGBackend::with_string(&mut svg, SIZE).into_drawing_area();
        root.fill(&WHITE).map_err(|e| e.to_string())?;
        let (x0, x1) = padded(curves.iter().flat_map(|c| c.xs.iter().copied()));
        let (y0, y1) = padded(curves.iter().flat_map(|c| c.ys.iter().copied()));
        let mut chart = ChartBuilder::on(&root)
            .caption(caption, ("sans-serif", 20))
            .margin(12)
            .x_label_area_size(40)
            .y_label_area_size(80)
            .build_cartesian_2d(x0..x1, y0..y1)
            .map_err(|e| e.to_string())?;
        chart
            .configure_mesh()
            .x_desc(x_desc)
            .y_desc(y_desc)
            .y_label_formatter(&|v| format!("{v:.3e}"))
            .draw()
            .map_err(|e| e.to_string())?;
        for c in curves {
            let color = c.color;
            chart
                .draw_series(LineSeries::new(
                    c.xs.iter().copied().zip(c.ys.iter().copied()),
                    color.stroke_width(c.width),
                ))
                .map_err(|e| e.to_string())?
                .label(c.label.clone())
                .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color.stroke_width(2)));
        }
        chart
            .configure_series_labels()
            .background_style(WHITE.mix(0.85))
            .border_style(BLACK)
            .draw()
            .map_err(|e| e.to_string())?;
        root.present().map_err(|e| e.to_string())?;
    }
    Ok(svg)
}

fn channel<'a>(series: &'a TimeSeries, name: &str) -> Result<&'a [f64], CliError> {
    series.channel(name).ok_or_else(|| CliError::MissingChannel(name.to_string()))
}

fn save(dir: &Path, name: String, svg: Result<String, String>, written: &mut Vec<String>) -> Result<(), CliError> {
    let svg = svg.map_err(CliError::Plot)?;
    write_atomic(&dir.join(&name), svg.as_bytes())?;
    written.push(name);
    Ok(())
}

/// Per-dof overlay of quantum mean and classical trajectory, the gap
/// against time, and for planar runs the orbit. Returns the file names.
pub fn emit_plots(report: &RunReport, series: &TimeSeries, dir: &Path) -> Result<Vec<String>, CliError> {
    if series.is_empty() {
        return Err(CliError::Plot("empty time grid".into()));
    }
    let stem = &report.scenario.name;
    let t = series.times();
    let mut written = Vec::new();
    let mut gap_curves = Vec::new();
    let palette = [QUANTUM, CLASSICAL, RGBColor(40, 150, 70), RGBColor(140, 60, 160)];
    for i in 0..report.n_dofs {
        let quantum = channel(series, &format!("mean_q_{i}"))?;
        let classical = channel(series, &format!("classical_q_{i}"))?;
        let gap = channel(series, &format!("gap_{i}"))?;
        let max = gap.iter().cloned().fold(0.0, f64::max);
        let curves = [
            Curve {
                label: "classical".into(),
                xs: t,
                ys: classical,
                color: CLASSICAL,
                width: 5,
            },
            Curve {
                label: "quantum ⟨q⟩".into(),
                xs: t,
                ys: quantum,
                color: QUANTUM,
                width: 2,
            },
        ];
        let caption = format!("{stem}: q{i}, max gap = {max:.3e}");
        save(dir, format!("{stem}_overlay_q{i}.svg"), render(&caption, "t", "q", &curves), &mut written)?;
        gap_curves.push(Curve {
            label: format!("|⟨q{i}⟩ − q{i}|"),
            xs: t,
            ys: gap,
            color: palette[i % palette.len()],
            width: 2,
        });
    }
    let caption = format!("{stem}: quantum-classical gap, max = {:.3e}", report.max_gap);
    save(dir, format!("{stem}_gap.svg"), render(&caption, "t", "gap", &gap_curves), &mut written)?;
    if report.n_dofs == 2 {
        let curves = [
            Curve {
                label: "classical".into(),
                xs: channel(series, "classical_q_0")?,
                ys: channel(series, "classical_q_1")?,
                color: CLASSICAL,
                width: 5,
            },
            Curve {
                label: "quantum ⟨r⟩".into(),
                xs: channel(series, "mean_q_0")?,
                ys: channel(series, "mean_q_1")?,
                color: QUANTUM,
                width: 2,
            },
        ];
        let caption = format!("{stem}: planar orbit");
        save(dir, format!("{stem}_orbit.svg"), render(&caption, "q0", "q1", &curves), &mut written)?;
    }
    Ok(written)
}

/// Loads a run report and its CSV, then plots into `out_dir` or next to
/// the report.
pub fn plot_report(report_path: &Path, out_dir: Option<&Path>) -> Result<Vec<String>, CliError> {
    let text = std::fs::read_to_string(report_path).map_err(|e| CliError::io(report_path, e))?;
    let report: RunReport = crate::parse_json(&text)?;
    let base = report_path.parent().unwrap_or(Path::new("."));
    let csv_path = base.join(&report.outputs.csv);
    let file = std::fs::File::open(&csv_path).map_err(|e| CliError::io(&csv_path, e))?;
    let series = TimeSeries::read_csv(file)?;
    let dir = out_dir.unwrap_or(base);
    crate::ensure_dir(dir)?;
    emit_plots(&report, &series, dir)
}
