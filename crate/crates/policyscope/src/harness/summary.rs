//! Repetition suites: run the same configuration across consecutive seeds,
//! then summarize per-iteration best-so-far medians and interquartile ranges
//! across the successful runs.

use std::path::PathBuf;
use std::sync::Arc;

use crate::harness::config::RunConfig;
use crate::harness::runner::{run_optimization_with_client, RunResult};
use crate::llm_client::ChatClient;
use crate::{Error, Result};

/// Builds a fresh client per repetition (index, run seed). Used to feed
/// scripted mock clients into suites.
pub type ClientFactory<'a> = &'a dyn Fn(usize, u64) -> Arc<dyn ChatClient>;

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub iteration: usize,
    pub median_best: f64,
    pub q1_best: f64,
    pub q3_best: f64,
    pub runs: usize,
}

#[derive(Debug)]
pub struct SuiteOutcome {
    pub rows: Vec<SummaryRow>,
    pub results: Vec<RunResult>,
    /// `(seed, error)` for each failed repetition.
    pub failures: Vec<(u64, String)>,
    pub summary_path: PathBuf,
}

/// Linear-interpolation quantile of a sorted slice (the classic
/// `pos = q * (n - 1)` rule).
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty slice");
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
    }
}

pub fn run_suite(cfg: &RunConfig) -> Result<SuiteOutcome> {
    run_suite_with_clients(cfg, None)
}

/// Execute `cfg.repetitions` runs with seeds `seed + 0 .. seed + reps - 1`.
/// Per-run errors are recorded and the remaining repetitions continue; the
/// suite itself fails only when no repetition succeeds.
pub fn run_suite_with_clients(
    cfg: &RunConfig,
    client_factory: Option<ClientFactory>,
) -> Result<SuiteOutcome> {
    cfg.validate()?;
    let mut results: Vec<RunResult> = Vec::new();
    let mut failures: Vec<(u64, String)> = Vec::new();

    for rep in 0..cfg.repetitions {
        let mut run_cfg = cfg.clone();
        run_cfg.seed = cfg.seed + rep as u64;
        let client = client_factory.map(|f| f(rep, run_cfg.seed));
        match run_optimization_with_client(&run_cfg, client) {
            Ok(result) => results.push(result),
            Err(e) => failures.push((run_cfg.seed, e.to_string())),
        }
    }

    if results.is_empty() {
        let detail = failures
            .first()
            .map(|(seed, e)| format!("; first failure (seed {seed}): {e}"))
            .unwrap_or_default();
        return Err(Error::State(format!(
            "all {} repetitions failed{detail}",
            cfg.repetitions
        )));
    }

    let rows = summarize(&results, cfg.budget);
    let summary_path = cfg.output_dir.join("summary.csv");
    write_summary(&summary_path, cfg, &rows, results.len(), &failures)?;
    Ok(SuiteOutcome { rows, results, failures, summary_path })
}

fn summarize(results: &[RunResult], budget: usize) -> Vec<SummaryRow> {
    let mut rows = Vec::with_capacity(budget);
    for t in 1..=budget {
        let mut values: Vec<f64> = results
            .iter()
            .filter_map(|r| r.records.get(t - 1).map(|rec| rec.best_so_far))
            .collect();
        if values.is_empty() {
            continue;
        }
        values.sort_by(|a, b| a.partial_cmp(b).expect("finite objective values"));
        rows.push(SummaryRow {
            iteration: t,
            median_best: quantile(&values, 0.5),
            q1_best: quantile(&values, 0.25),
            q3_best: quantile(&values, 0.75),
            runs: values.len(),
        });
    }
    rows
}

fn write_summary(
    path: &PathBuf,
    cfg: &RunConfig,
    rows: &[SummaryRow],
    succeeded: usize,
    failures: &[(u64, String)],
) -> Result<()> {
    let mut out = String::new();
    out.push_str(&format!(
        "# suite: benchmark={} optimizer={} base_seed={} reps={}\n",
        cfg.benchmark, cfg.optimizer, cfg.seed, cfg.repetitions
    ));
    out.push_str(&format!("# succeeded: {succeeded}/{}\n", cfg.repetitions));
    for (seed, error) in failures {
        out.push_str(&format!("# failed: seed={seed} error={}\n", error.replace('\n', " ")));
    }
    out.push_str("iteration,median_best,q1_best,q3_best,runs\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.iteration, r.median_best, r.q1_best, r.q3_best, r.runs
        ));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}
