//! The budgeted optimization loop: draw the initial random evaluations, then
//! hand each remaining iteration to the configured optimizer, evaluate,
//! append, and log. Results are flushed to disk even when a mid-run failure
//! aborts the loop, so expensive runs are never lost.

use std::cell::Cell;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::agents::{
    llm_generation, llm_strategy, pool_generation, scripted_strategy, single_agent,
    AgentTranscript, GenerationAgent, IterationContext, Proposal, Schedule, SingleAgentProposer,
    StrategyAgent, DEFAULT_GENERATION_POOL,
};
use crate::benchmarks::{by_name, Benchmark};
use crate::core::{
    derive_seed, sample_uniform_point, History, ParseOutcome, RunRecord, WeightVector,
    STAGNATION_WINDOW,
};
use crate::harness::config::RunConfig;
use crate::harness::csvio::write_records_csv;
use crate::harness::transcript::{read_entries, read_header, write_transcripts, TranscriptHeader};
use crate::llm_client::{ChatClient, HttpClient, MockClient};
use crate::surrogate::{gp_fit, maximize_acquisition, Acquisition, DEFAULT_ACQ_POOL, DEFAULT_UCB_BETA, LENGTHSCALE_GRID};
use crate::{Error, Result};

// Independent randomness streams per run seed.
const STREAM_INIT: u64 = 1;
const STREAM_RANDOM: u64 = 2;
const STREAM_ACQ: u64 = 3;
const STREAM_POOL: u64 = 4;
const STREAM_SINGLE: u64 = 5;

fn iter_seed(run_seed: u64, stream: u64, iteration: usize) -> u64 {
    derive_seed(derive_seed(run_seed, stream), iteration as u64)
}

/// Everything a finished (or flushed partial) run leaves behind.
#[derive(Debug)]
pub struct RunResult {
    pub config: RunConfig,
    pub records: Vec<RunRecord>,
    pub transcripts: Vec<AgentTranscript>,
    pub best_point: Vec<f64>,
    /// Best objective in the problem's own sense.
    pub best_value: f64,
    /// Objective evaluations actually spent (counted at the evaluator).
    pub evaluations: usize,
    pub csv_path: PathBuf,
    pub transcript_path: PathBuf,
}

struct CountingEvaluator<'a> {
    bench: &'a Benchmark,
    count: Cell<usize>,
}

impl<'a> CountingEvaluator<'a> {
    fn new(bench: &'a Benchmark) -> Self {
        Self { bench, count: Cell::new(0) }
    }

    fn eval(&self, p: &[f64]) -> f64 {
        self.count.set(self.count.get() + 1);
        self.bench.evaluate(p)
    }
}

enum AcqKind {
    Ei,
    Ucb,
}

enum OptimizerImpl {
    Random,
    Gp(AcqKind),
    Multi {
        strategy: Box<dyn StrategyAgent>,
        generation: Box<dyn GenerationAgent>,
    },
    Single(SingleAgentProposer),
}

struct StepProposal {
    point: Vec<f64>,
    weights: Option<WeightVector>,
    outcome: Option<ParseOutcome>,
    transcripts: Vec<AgentTranscript>,
}

impl OptimizerImpl {
    fn propose(&self, ctx: &IterationContext, cfg: &RunConfig) -> Result<StepProposal> {
        let t = ctx.iteration;
        match self {
            OptimizerImpl::Random => {
                let mut rng = ChaCha8Rng::seed_from_u64(iter_seed(cfg.seed, STREAM_RANDOM, t));
                Ok(StepProposal {
                    point: sample_uniform_point(ctx.history.problem(), &mut rng),
                    weights: None,
                    outcome: None,
                    transcripts: Vec::new(),
                })
            }
            OptimizerImpl::Gp(kind) => {
                let model = gp_fit(ctx.history, &LENGTHSCALE_GRID)?;
                let acq = match kind {
                    AcqKind::Ei => Acquisition::ExpectedImprovement { y_best: model.best_observed() },
                    AcqKind::Ucb => Acquisition::UpperConfidenceBound { beta: DEFAULT_UCB_BETA },
                };
                let point = maximize_acquisition(
                    &model,
                    ctx.history.problem(),
                    &acq,
                    DEFAULT_ACQ_POOL,
                    iter_seed(cfg.seed, STREAM_ACQ, t),
                )?;
                Ok(StepProposal { point, weights: None, outcome: None, transcripts: Vec::new() })
            }
            OptimizerImpl::Multi { strategy, generation } => {
                let Proposal { value: weights, outcome: s_outcome, transcripts: mut ts } =
                    strategy.propose_weights(ctx)?;
                let Proposal { value: point, outcome: g_outcome, transcripts: gts } =
                    generation.propose_candidate(ctx, &weights, iter_seed(cfg.seed, STREAM_POOL, t))?;
                ts.extend(gts);
                Ok(StepProposal {
                    point,
                    weights: Some(weights),
                    outcome: Some(s_outcome.max(g_outcome)),
                    transcripts: ts,
                })
            }
            OptimizerImpl::Single(agent) => {
                let Proposal { value: point, outcome, transcripts } =
                    agent.propose(ctx, iter_seed(cfg.seed, STREAM_SINGLE, t))?;
                Ok(StepProposal { point, weights: None, outcome: Some(outcome), transcripts })
            }
        }
    }
}

fn build_optimizer(
    cfg: &RunConfig,
    client_override: Option<Arc<dyn ChatClient>>,
) -> Result<OptimizerImpl> {
    let id = cfg.optimizer.as_str();
    let needs_client = matches!(id, "multi_agent" | "single_agent");
    let client: Option<Arc<dyn ChatClient>> = if needs_client {
        match client_override {
            Some(c) => Some(c),
            None => Some(Arc::new(HttpClient::new(cfg.client_config()?)?)),
        }
    } else {
        None
    };

    match id {
        "random" => Ok(OptimizerImpl::Random),
        "gp_ei" => Ok(OptimizerImpl::Gp(AcqKind::Ei)),
        "gp_ucb" => Ok(OptimizerImpl::Gp(AcqKind::Ucb)),
        "multi_agent" => {
            let client = client.expect("resolved above");
            let templates = Arc::new(cfg.templates()?);
            Ok(OptimizerImpl::Multi {
                strategy: Box::new(llm_strategy(Arc::clone(&client), Arc::clone(&templates))),
                generation: Box::new(llm_generation(client, templates, DEFAULT_GENERATION_POOL)?),
            })
        }
        "single_agent" => {
            let client = client.expect("resolved above");
            let templates = Arc::new(cfg.templates()?);
            Ok(OptimizerImpl::Single(single_agent(client, templates)))
        }
        other => match other.strip_prefix("multi_agent_scripted:") {
            Some(schedule) => {
                let schedule: Schedule =
                    schedule.parse().map_err(|e: Error| Error::Config(e.to_string()))?;
                Ok(OptimizerImpl::Multi {
                    strategy: Box::new(scripted_strategy(schedule)),
                    generation: Box::new(pool_generation(DEFAULT_GENERATION_POOL)?),
                })
            }
            None => Err(Error::Config(format!(
                "unknown optimizer `{other}` (available: random, gp_ei, gp_ucb, single_agent, \
                 multi_agent, multi_agent_scripted:<schedule>)"
            ))),
        },
    }
}

/// Run one optimization with the configured client (building an HTTP client
/// when an LLM optimizer needs one).
pub fn run_optimization(cfg: &RunConfig) -> Result<RunResult> {
    run_optimization_with_client(cfg, None)
}

/// Run one optimization, optionally substituting the chat client (mock or
/// replay). Per-run CSV and transcript files are written even when the loop
/// fails partway; the error is surfaced after the flush.
pub fn run_optimization_with_client(
    cfg: &RunConfig,
    client_override: Option<Arc<dyn ChatClient>>,
) -> Result<RunResult> {
    cfg.validate()?;
    let active = cfg.active_criteria()?;
    let bench = by_name(&cfg.benchmark, cfg.benchmark_seed, cfg.dim)?;
    let spec = Arc::new(bench.spec().clone());
    let optimizer = build_optimizer(cfg, client_override)?;

    std::fs::create_dir_all(&cfg.output_dir).map_err(|e| Error::io(&cfg.output_dir, e))?;
    let csv_path = cfg.output_dir.join(format!("{}.csv", cfg.run_name()));
    let transcript_path = cfg.output_dir.join(format!("{}.transcript.txt", cfg.run_name()));

    let evaluator = CountingEvaluator::new(&bench);
    let mut history = History::new(Arc::clone(&spec));
    let mut records: Vec<RunRecord> = Vec::new();
    let mut transcripts: Vec<AgentTranscript> = Vec::new();

    let mut run_loop = || -> Result<()> {
        let mut init_rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, STREAM_INIT));
        for t in 1..=cfg.n_init {
            let point = sample_uniform_point(&spec, &mut init_rng);
            let y = evaluator.eval(&point);
            history.append(point.clone(), y)?;
            records.push(RunRecord {
                iteration: t,
                point,
                value: y,
                best_so_far: history.best_objective()?.1,
                weights: None,
                parse_outcome: None,
                wall_time_ms: 0,
            });
        }
        for t in cfg.n_init + 1..=cfg.budget {
            let step = {
                let ctx = IterationContext {
                    history: &history,
                    summary: history.improvement_window(STAGNATION_WINDOW)?,
                    active: &active,
                    iteration: t,
                    budget: cfg.budget,
                };
                optimizer.propose(&ctx, cfg)?
            };
            let y = evaluator.eval(&step.point);
            history.append(step.point.clone(), y)?;
            let wall_time_ms = step.transcripts.iter().map(|tr| tr.latency_ms).sum();
            records.push(RunRecord {
                iteration: t,
                point: step.point,
                value: y,
                best_so_far: history.best_objective()?.1,
                weights: step.weights,
                parse_outcome: step.outcome,
                wall_time_ms,
            });
            transcripts.extend(step.transcripts);
        }
        Ok(())
    };
    let loop_outcome = run_loop();

    // Flush whatever exists before surfacing any loop error.
    write_records_csv(&csv_path, &records, spec.dim)?;
    let header = TranscriptHeader {
        config_hash: cfg.config_hash(),
        benchmark: cfg.benchmark.clone(),
        optimizer: cfg.optimizer.clone(),
        seed: cfg.seed,
    };
    write_transcripts(&transcript_path, &header, &transcripts)?;
    loop_outcome?;

    let (best_point, best_value) = history.best_objective()?;
    Ok(RunResult {
        config: cfg.clone(),
        records,
        transcripts,
        best_point,
        best_value,
        evaluations: evaluator.count.get(),
        csv_path,
        transcript_path,
    })
}

/// Re-execute a recorded run by serving its transcript responses in order.
/// The transcript must come from a run with the same loop-shaping config.
pub fn replay(transcript_path: &Path, cfg: &RunConfig) -> Result<RunResult> {
    let header = read_header(transcript_path)?;
    let expected = cfg.config_hash();
    if header.config_hash != expected {
        return Err(Error::Replay(format!(
            "config hash mismatch: transcript was recorded with {}, this config hashes to {expected}",
            header.config_hash
        )));
    }
    let entries = read_entries(transcript_path)?;
    let client: Arc<dyn ChatClient> = Arc::new(MockClient::from_entries(entries));
    run_optimization_with_client(cfg, Some(client))
}
