//! SVG plot emission from run CSVs: one convergence plot per directory
//! (median best-so-far with an interquartile band across runs) and one
//! stacked weight-trajectory plot per policy-bearing run.

use std::path::{Path, PathBuf};

use plotters::prelude::*;

use crate::core::Criterion;
use crate::harness::csvio::{read_records_csv, CsvRow};
use crate::harness::summary::quantile;
use crate::{Error, Result};

const WEIGHT_COLORS: [RGBColor; 4] = [
    RGBColor(31, 119, 180),
    RGBColor(255, 127, 14),
    RGBColor(44, 160, 44),
    RGBColor(148, 103, 189),
];

/// Render plots for every run CSV in `dir`. Returns the created image paths:
/// `convergence.svg` always, plus `weights_<run>.svg` for each run whose rows
/// carry a weight vector.
pub fn emit_plots(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut csv_paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension().is_some_and(|ext| ext == "csv")
                && p.file_name().is_some_and(|n| n != "summary.csv")
        })
        .collect();
    csv_paths.sort();
    if csv_paths.is_empty() {
        return Err(Error::file_format(dir, "no run CSV files found"));
    }

    let mut runs: Vec<(PathBuf, Vec<CsvRow>)> = Vec::new();
    for path in csv_paths {
        let rows = read_records_csv(&path)?;
        if rows.is_empty() {
            return Err(Error::file_format(&path, "run CSV has no rows"));
        }
        runs.push((path, rows));
    }

    let mut created = Vec::new();
    let convergence = dir.join("convergence.svg");
    draw_convergence(&convergence, &runs)?;
    created.push(convergence);

    for (path, rows) in &runs {
        if rows.iter().any(|r| r.weights.is_some()) {
            let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("run");
            let out = dir.join(format!("weights_{stem}.svg"));
            draw_weights(&out, rows)?;
            created.push(out);
        }
    }
    Ok(created)
}

fn plot_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::file_format(path, format!("plot rendering failed: {e}"))
}

fn draw_convergence(out: &Path, runs: &[(PathBuf, Vec<CsvRow>)]) -> Result<()> {
    let budget = runs.iter().map(|(_, rows)| rows.len()).max().unwrap_or(0);
    let mut medians: Vec<(f64, f64)> = Vec::new();
    let mut band: Vec<(f64, f64, f64)> = Vec::new();
    for t in 1..=budget {
        let mut values: Vec<f64> = runs
            .iter()
            .filter_map(|(_, rows)| rows.get(t - 1).map(|r| r.best_so_far))
            .collect();
        if values.is_empty() {
            continue;
        }
        values.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
        medians.push((t as f64, quantile(&values, 0.5)));
        band.push((t as f64, quantile(&values, 0.25), quantile(&values, 0.75)));
    }

    let mut y_min = band.iter().map(|&(_, lo, _)| lo).fold(f64::INFINITY, f64::min);
    let mut y_max = band.iter().map(|&(_, _, hi)| hi).fold(f64::NEG_INFINITY, f64::max);
    if !(y_min < y_max) {
        y_min -= 1.0;
        y_max += 1.0;
    }
    let margin = 0.05 * (y_max - y_min);

    let root = SVGBackend::new(out, (800, 500)).into_drawing_area();
    root.fill(&WHITE).map_err(|e| plot_err(out, e))?;
    let mut chart = ChartBuilder::on(&root)
        .caption(format!("Convergence across {} run(s)", runs.len()), ("sans-serif", 22))
        .margin(12)
        .x_label_area_size(40)
        .y_label_area_size(70)
        .build_cartesian_2d(1.0..budget.max(2) as f64, (y_min - margin)..(y_max + margin))
        .map_err(|e| plot_err(out, e))?;
    chart
        .configure_mesh()
        .x_desc("iteration")
        .y_desc("best objective so far")
        .draw()
        .map_err(|e| plot_err(out, e))?;

    let mut polygon: Vec<(f64, f64)> = band.iter().map(|&(t, _, hi)| (t, hi)).collect();
    polygon.extend(band.iter().rev().map(|&(t, lo, _)| (t, lo)));
    chart
        .draw_series(std::iter::once(Polygon::new(polygon, WEIGHT_COLORS[0].mix(0.2))))
        .map_err(|e| plot_err(out, e))?;
    chart
        .draw_series(LineSeries::new(medians, WEIGHT_COLORS[0].stroke_width(2)))
        .map_err(|e| plot_err(out, e))?
        .label("median best-so-far")
        .legend(|(x, y)| PathElement::new(vec![(x, y), (x + 18, y)], WEIGHT_COLORS[0]));
    chart
        .configure_series_labels()
        .border_style(BLACK)
        .background_style(WHITE.mix(0.8))
        .draw()
        .map_err(|e| plot_err(out, e))?;
    root.present().map_err(|e| plot_err(out, e))?;
    Ok(())
}

fn draw_weights(out: &Path, rows: &[CsvRow]) -> Result<()> {
    let points: Vec<(f64, [f64; 4])> = rows
        .iter()
        .filter_map(|r| r.weights.map(|w| (r.iteration as f64, w)))
        .collect();
    let x_min = points.first().map(|&(t, _)| t).unwrap_or(1.0);
    let x_max = points.last().map(|&(t, _)| t).unwrap_or(2.0).max(x_min + 1.0);

    let root = SVGBackend::new(out, (800, 500)).into_drawing_area();
    root.fill(&WHITE).map_err(|e| plot_err(out, e))?;
    let mut chart = ChartBuilder::on(&root)
        .caption("Policy weights per iteration", ("sans-serif", 22))
        .margin(12)
        .x_label_area_size(40)
        .y_label_area_size(50)
        .build_cartesian_2d(x_min..x_max, 0.0..1.05)
        .map_err(|e| plot_err(out, e))?;
    chart
        .configure_mesh()
        .x_desc("iteration")
        .y_desc("weight (stacked)")
        .draw()
        .map_err(|e| plot_err(out, e))?;

    // Stacked bands: cumulative sums bottom-up in canonical criterion order.
    for (i, criterion) in Criterion::ALL.iter().enumerate() {
        let lower: Vec<(f64, f64)> = points
            .iter()
            .map(|&(t, w)| (t, w[..i].iter().sum::<f64>()))
            .collect();
        let upper: Vec<(f64, f64)> = points
            .iter()
            .map(|&(t, w)| (t, w[..=i].iter().sum::<f64>()))
            .collect();
        let mut polygon = upper.clone();
        polygon.extend(lower.iter().rev().copied());
        let color = WEIGHT_COLORS[i];
        chart
            .draw_series(std::iter::once(Polygon::new(polygon, color.mix(0.45))))
            .map_err(|e| plot_err(out, e))?
            .label(criterion.name())
            .legend(move |(x, y)| Rectangle::new([(x, y - 4), (x + 14, y + 4)], color.filled()));
    }
    chart
        .configure_series_labels()
        .border_style(BLACK)
        .background_style(WHITE.mix(0.8))
        .draw()
        .map_err(|e| plot_err(out, e))?;
    root.present().map_err(|e| plot_err(out, e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{run_optimization, RunConfig};

    fn run_into(dir: &Path, optimizer: &str) {
        let mut cfg = RunConfig::default();
        cfg.optimizer = optimizer.into();
        cfg.budget = 8;
        cfg.output_dir = dir.to_path_buf();
        run_optimization(&cfg).unwrap();
    }

    #[test]
    fn policy_run_emits_convergence_and_weights() {
        let dir = tempfile::tempdir().unwrap();
        run_into(dir.path(), "multi_agent_scripted:epsilon_decay");
        let files = emit_plots(dir.path()).unwrap();
        assert_eq!(files.len(), 2);
        assert!(files[0].ends_with("convergence.svg"));
        assert!(files[1].file_name().unwrap().to_string_lossy().starts_with("weights_"));
        for f in &files {
            let body = std::fs::read_to_string(f).unwrap();
            assert!(body.contains("<svg"), "{} is not an svg", f.display());
        }
    }

    #[test]
    fn baseline_run_emits_convergence_only() {
        let dir = tempfile::tempdir().unwrap();
        run_into(dir.path(), "random");
        let files = emit_plots(dir.path()).unwrap();
        assert_eq!(files.len(), 1);
    }

    #[test]
    fn weights_re_extracted_from_csv_sum_to_one() {
        let dir = tempfile::tempdir().unwrap();
        run_into(dir.path(), "multi_agent_scripted:uniform");
        let csv = std::fs::read_dir(dir.path())
            .unwrap()
            .filter_map(|e| e.ok().map(|e| e.path()))
            .find(|p| p.extension().is_some_and(|x| x == "csv"))
            .unwrap();
        let rows = read_records_csv(&csv).unwrap();
        let mut saw_weights = false;
        for row in rows {
            if let Some(w) = row.weights {
                saw_weights = true;
                assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-6);
            }
        }
        assert!(saw_weights);
    }

    #[test]
    fn empty_directory_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(emit_plots(dir.path()).is_err());
    }
}
