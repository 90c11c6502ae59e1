//! Per-sentence-index curves from an evaluation report.

use std::path::{Path, PathBuf};

use eventstory_core::corpus::read_json;
use eventstory_core::metrics::{Curve, MetricReport};
use plotters::prelude::*;

use crate::error::{require, CliError};
use crate::manifest::Recorder;
use crate::Context;

/// One figure: a metric with one line per embedding source (or a single
/// line for repetition).
struct Figure<'a> {
    name: &'static str,
    y_label: &'static str,
    lines: Vec<(String, &'a Curve)>,
}

fn figures(report: &MetricReport) -> Vec<Figure<'_>> {
    vec![
        Figure {
            name: "intra_repetition",
            y_label: "repetition",
            lines: vec![("repetition".into(), &report.intra_repetition)],
        },
        Figure {
            name: "intra_coherence",
            y_label: "coherence",
            lines: report.intra_coherence.iter().map(|(k, c)| (k.clone(), c)).collect(),
        },
        Figure {
            name: "intra_relevance",
            y_label: "relevance",
            lines: report.intra_relevance.iter().map(|(k, c)| (k.clone(), c)).collect(),
        },
    ]
}

/// `sentence_index,value,stories`, indices starting at 1.
fn write_csv(path: &Path, curve: &Curve) -> Result<(), CliError> {
    let fail = |e: csv::Error| CliError::output(path, e);
    let mut w = csv::Writer::from_path(path).map_err(fail)?;
    w.write_record(["sentence_index", "value", "stories"]).map_err(fail)?;
    for (k, (v, n)) in curve.per_index.iter().zip(&curve.counts).enumerate() {
        w.write_record([(k + 1).to_string(), v.to_string(), n.to_string()])
            .map_err(fail)?;
    }
    w.flush().map_err(|e| CliError::output(path, e))
}

fn render(path: &Path, fig: &Figure) -> Result<(), Box<dyn std::error::Error>> {
    let width = fig.lines.iter().map(|(_, c)| c.per_index.len()).max().unwrap_or(1).max(1);
    let values = fig.lines.iter().flat_map(|(_, c)| c.per_index.iter().copied());
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let (lo, hi) = if lo.is_finite() { (lo.min(0.0), hi.max(lo + 1e-3) * 1.05) } else { (0.0, 1.0) };

    let root = SVGBackend::new(path, (640, 420)).into_drawing_area();
    root.fill(&WHITE)?;
    let mut chart = ChartBuilder::on(&root)
        .caption(fig.name, ("sans-serif", 22))
        .margin(12)
        .x_label_area_size(36)
        .y_label_area_size(52)
        .build_cartesian_2d(0.5f64..width as f64 + 0.5, lo..hi)?;
    chart
        .configure_mesh()
        .x_desc("sentence index")
        .y_desc(fig.y_label)
        .x_labels(width.min(12))
        .x_label_formatter(&|x| format!("{x:.0}"))
        .draw()?;
    for (i, (label, curve)) in fig.lines.iter().enumerate() {
        let color = Palette99::pick(i).to_rgba();
        let points: Vec<(f64, f64)> = curve
            .per_index
            .iter()
            .enumerate()
            .map(|(k, v)| ((k + 1) as f64, *v))
            .collect();
        chart
            .draw_series(LineSeries::new(points.clone(), color.stroke_width(2)))?
            .label(label.as_str())
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 18, y)], color.stroke_width(2)));
        chart.draw_series(points.into_iter().map(|p| Circle::new(p, 3, color.filled())))?;
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()?;
    root.present()?;
    Ok(())
}

pub fn run(ctx: &Context, report_path: &Path) -> Result<(), CliError> {
    require(report_path)?;
    let out = ctx.out("DIR")?;
    std::fs::create_dir_all(&out).map_err(|e| CliError::output(&out, e))?;
    let mut rec = Recorder::start("plot");
    rec.input(report_path);
    let report: MetricReport = read_json(report_path)?;
    for fig in figures(&report) {
        for (label, curve) in &fig.lines {
            let name = if fig.lines.len() == 1 && label == "repetition" {
                format!("{}.csv", fig.name)
            } else {
                format!("{}.{label}.csv", fig.name)
            };
            let path = out.join(name);
            write_csv(&path, curve)?;
            rec.output(&path);
        }
        if fig.lines.is_empty() {
            log::info!("{}: no embedding tables in the report, nothing to draw", fig.name);
            continue;
        }
        let svg: PathBuf = out.join(format!("{}.svg", fig.name));
        render(&svg, &fig).map_err(|e| CliError::output(&svg, e))?;
        rec.output(&svg);
    }
    let path = rec.finish(&out, ctx.config.train.seed, ctx.config.snapshot())?;
    log::info!("wrote {}", path.display());
    Ok(())
}
