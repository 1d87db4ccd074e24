//! Strategy and generation agents: LLM-backed, scripted, and deterministic
//! implementations, plus the single-agent proposer that does both jobs in one
//! prompt.
//!
//! Parsing failures follow one ladder everywhere: one corrective re-ask that
//! appends the parser's error description, then a deterministic fallback
//! (uniform weights, the scoring pool, or a seeded random point). Transport
//! failures are never swallowed; they abort the run so a broken endpoint
//! cannot silently degrade a budget comparison.

use std::str::FromStr;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::core::{
    denormalize_point, derive_seed, normalize_point, sample_uniform_point, Criterion, History,
    ParseOutcome, StagnationSummary, WeightVector,
};
use crate::llm_client::{ChatClient, ChatRequest};
use crate::metrics::{fit_clusters, score_candidate, ClusterModel, DEFAULT_CLUSTER_COUNT};
use crate::prompts::{parse_parameters, parse_weights, PromptTemplates, RenderedPrompt};
use crate::{Error, Result};

/// Default candidate-pool size for the deterministic generation agent.
pub const DEFAULT_GENERATION_POOL: usize = 512;

const POOL_PERTURBATION_SIGMA: f64 = 0.1;
const CLUSTER_SEED_STREAM: u64 = 0xC15;
const CORRECTION_PREFIX: &str = "[correction] Your previous response could not be used: ";

/// Which agent produced a transcript.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AgentRole {
    Strategy,
    Generation,
    Single,
}

impl AgentRole {
    pub fn as_str(self) -> &'static str {
        match self {
            AgentRole::Strategy => "strategy",
            AgentRole::Generation => "generation",
            AgentRole::Single => "single",
        }
    }
}

impl FromStr for AgentRole {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strategy" => Ok(AgentRole::Strategy),
            "generation" => Ok(AgentRole::Generation),
            "single" => Ok(AgentRole::Single),
            other => Err(Error::Validation(format!("unknown agent role `{other}`"))),
        }
    }
}

/// Verbatim record of one LLM call.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentTranscript {
    pub iteration: usize,
    pub role: AgentRole,
    pub prompt: String,
    pub response: String,
    pub parse_outcome: ParseOutcome,
    pub latency_ms: u64,
}

/// Everything an agent may look at when proposing for iteration `iteration`
/// of `budget`.
pub struct IterationContext<'a> {
    pub history: &'a History,
    pub summary: StagnationSummary,
    pub active: &'a [Criterion],
    pub iteration: usize,
    pub budget: usize,
}

/// An agent's answer for one iteration, with the calls that produced it.
#[derive(Debug, Clone)]
pub struct Proposal<T> {
    pub value: T,
    pub outcome: ParseOutcome,
    pub transcripts: Vec<AgentTranscript>,
}

impl<T> Proposal<T> {
    fn silent(value: T) -> Self {
        Self { value, outcome: ParseOutcome::Ok, transcripts: Vec::new() }
    }
}

/// Sets the search policy for an iteration.
pub trait StrategyAgent: Send + Sync {
    fn propose_weights(&self, ctx: &IterationContext) -> Result<Proposal<WeightVector>>;
}

/// Produces one candidate under a given policy. `seed` is the iteration's
/// deterministic randomness stream.
pub trait GenerationAgent: Send + Sync {
    fn propose_candidate(
        &self,
        ctx: &IterationContext,
        weights: &WeightVector,
        seed: u64,
    ) -> Result<Proposal<Vec<f64>>>;
}

/// Deterministic weight schedules standing in for the LLM strategist.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schedule {
    PureExploit,
    PureExploreInformativeness,
    Uniform,
    EpsilonDecay,
}

impl FromStr for Schedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pure_exploit" => Ok(Schedule::PureExploit),
            "pure_explore_informativeness" => Ok(Schedule::PureExploreInformativeness),
            "uniform" => Ok(Schedule::Uniform),
            "epsilon_decay" => Ok(Schedule::EpsilonDecay),
            other => Err(Error::Validation(format!(
                "unknown schedule `{other}` (available: pure_exploit, \
                 pure_explore_informativeness, uniform, epsilon_decay)"
            ))),
        }
    }
}

/// Strategy agent following a fixed schedule; no LLM involved.
pub struct ScriptedStrategy {
    schedule: Schedule,
}

pub fn scripted_strategy(schedule: Schedule) -> ScriptedStrategy {
    ScriptedStrategy { schedule }
}

impl StrategyAgent for ScriptedStrategy {
    fn propose_weights(&self, ctx: &IterationContext) -> Result<Proposal<WeightVector>> {
        let weights = match self.schedule {
            Schedule::PureExploit => WeightVector::unit(ctx.active, Criterion::Exploitation)?,
            Schedule::PureExploreInformativeness => {
                WeightVector::unit(ctx.active, Criterion::Informativeness)?
            }
            Schedule::Uniform => WeightVector::uniform(ctx.active)?,
            Schedule::EpsilonDecay => {
                for required in [Criterion::Exploitation, Criterion::Informativeness] {
                    if !ctx.active.contains(&required) {
                        return Err(Error::Validation(format!(
                            "epsilon_decay needs {required} in the active set"
                        )));
                    }
                }
                let eps = (1.0 - ctx.iteration as f64 / ctx.budget as f64).max(0.05);
                let raw: Vec<f64> = ctx
                    .active
                    .iter()
                    .map(|c| match c {
                        Criterion::Informativeness => eps,
                        Criterion::Exploitation => 1.0 - eps,
                        _ => 0.0,
                    })
                    .collect();
                WeightVector::normalized(ctx.active, &raw)?
            }
        };
        Ok(Proposal::silent(weights))
    }
}

/// Call the client once, parse; on failure re-ask once with the parser's
/// error appended; report `None` (fallback needed) after a second failure.
/// Transport errors propagate.
fn ask_with_retry<T>(
    client: &dyn ChatClient,
    prompt: &RenderedPrompt,
    role: AgentRole,
    iteration: usize,
    parse: impl Fn(&str) -> Result<T>,
) -> Result<(Option<T>, Vec<AgentTranscript>, ParseOutcome)> {
    let transcript_prompt = |user: &str| format!("[system]\n{}\n\n[user]\n{user}", prompt.system);

    let first = client.complete(&ChatRequest::new(&prompt.system, &prompt.user))?;
    match parse(&first.content) {
        Ok(value) => {
            let t = AgentTranscript {
                iteration,
                role,
                prompt: transcript_prompt(&prompt.user),
                response: first.content,
                parse_outcome: ParseOutcome::Ok,
                latency_ms: first.latency_ms,
            };
            Ok((Some(value), vec![t], ParseOutcome::Ok))
        }
        Err(parse_err) => {
            let corrective = format!(
                "{}\n\n{CORRECTION_PREFIX}{parse_err}. Respond again following the required \
                 output format exactly.",
                prompt.user
            );
            let first_t = AgentTranscript {
                iteration,
                role,
                prompt: transcript_prompt(&prompt.user),
                response: first.content,
                parse_outcome: ParseOutcome::Retried,
                latency_ms: first.latency_ms,
            };
            let second = client.complete(&ChatRequest::new(&prompt.system, &corrective))?;
            match parse(&second.content) {
                Ok(value) => {
                    let second_t = AgentTranscript {
                        iteration,
                        role,
                        prompt: transcript_prompt(&corrective),
                        response: second.content,
                        parse_outcome: ParseOutcome::Ok,
                        latency_ms: second.latency_ms,
                    };
                    Ok((Some(value), vec![first_t, second_t], ParseOutcome::Retried))
                }
                Err(_) => {
                    let second_t = AgentTranscript {
                        iteration,
                        role,
                        prompt: transcript_prompt(&corrective),
                        response: second.content,
                        parse_outcome: ParseOutcome::Fallback,
                        latency_ms: second.latency_ms,
                    };
                    Ok((None, vec![first_t, second_t], ParseOutcome::Fallback))
                }
            }
        }
    }
}

/// LLM-backed strategy agent; falls back to uniform weights after two
/// unusable responses.
pub struct LlmStrategy {
    client: Arc<dyn ChatClient>,
    templates: Arc<PromptTemplates>,
}

pub fn llm_strategy(client: Arc<dyn ChatClient>, templates: Arc<PromptTemplates>) -> LlmStrategy {
    LlmStrategy { client, templates }
}

impl StrategyAgent for LlmStrategy {
    fn propose_weights(&self, ctx: &IterationContext) -> Result<Proposal<WeightVector>> {
        let prompt = self.templates.render_strategy_prompt(
            ctx.history,
            &ctx.summary,
            ctx.active,
            ctx.iteration,
            ctx.budget,
        )?;
        let (parsed, transcripts, outcome) = ask_with_retry(
            self.client.as_ref(),
            &prompt,
            AgentRole::Strategy,
            ctx.iteration,
            |text| parse_weights(text, ctx.active),
        )?;
        let value = match parsed {
            Some(w) => w,
            None => WeightVector::uniform(ctx.active)?,
        };
        Ok(Proposal { value, outcome, transcripts })
    }
}

/// Deterministic generation agent: scores a seeded candidate pool with the
/// weighted criteria and returns the argmax. Doubles as the fallback for the
/// LLM generation agent and as a standalone scripted optimizer.
pub struct PoolGeneration {
    pool_size: usize,
}

pub fn pool_generation(pool_size: usize) -> Result<PoolGeneration> {
    if pool_size < 1 {
        return Err(Error::Validation("pool_size must be at least 1".into()));
    }
    Ok(PoolGeneration { pool_size })
}

impl PoolGeneration {
    /// 75% uniform samples, 25% Gaussian perturbations of the incumbent best
    /// (sigma 0.1 in normalized space, clamped), in that order.
    fn build_pool(&self, ctx: &IterationContext, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<f64>>> {
        let spec = ctx.history.problem();
        let n_uniform = ((self.pool_size * 3) / 4).max(1).min(self.pool_size);
        let n_perturb = self.pool_size - n_uniform;
        let mut pool = Vec::with_capacity(self.pool_size);
        for _ in 0..n_uniform {
            pool.push(sample_uniform_point(spec, rng));
        }
        if n_perturb > 0 {
            let best = ctx.history.best()?;
            let incumbent = normalize_point(&best.point, spec)?;
            let gauss = Normal::new(0.0, POOL_PERTURBATION_SIGMA).expect("valid sigma");
            for _ in 0..n_perturb {
                let u: Vec<f64> = incumbent
                    .iter()
                    .map(|&c| (c + gauss.sample(rng)).clamp(0.0, 1.0))
                    .collect();
                pool.push(spec.clamp(&denormalize_point(&u, spec)));
            }
        }
        Ok(pool)
    }

    fn cluster_model(
        &self,
        ctx: &IterationContext,
        weights: &WeightVector,
        seed: u64,
    ) -> Result<Option<ClusterModel>> {
        if weights.weight(Criterion::Representativeness) > 0.0 {
            let model = fit_clusters(
                ctx.history,
                DEFAULT_CLUSTER_COUNT,
                derive_seed(seed, CLUSTER_SEED_STREAM),
            )?;
            Ok(Some(model))
        } else {
            Ok(None)
        }
    }
}

impl GenerationAgent for PoolGeneration {
    fn propose_candidate(
        &self,
        ctx: &IterationContext,
        weights: &WeightVector,
        seed: u64,
    ) -> Result<Proposal<Vec<f64>>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pool = self.build_pool(ctx, &mut rng)?;
        let model = self.cluster_model(ctx, weights, seed)?;

        let mut best: Option<(f64, usize)> = None;
        for (i, candidate) in pool.iter().enumerate() {
            let s = score_candidate(candidate, ctx.history, weights, model.as_ref())?;
            if best.is_none_or(|(bs, _)| s > bs) {
                best = Some((s, i));
            }
        }
        let (_, idx) = best.expect("pool is nonempty");
        Ok(Proposal::silent(pool[idx].clone()))
    }
}

/// LLM-backed generation agent; falls back to the scoring pool (same weights
/// and seed) after two unusable responses.
pub struct LlmGeneration {
    client: Arc<dyn ChatClient>,
    templates: Arc<PromptTemplates>,
    fallback: PoolGeneration,
}

pub fn llm_generation(
    client: Arc<dyn ChatClient>,
    templates: Arc<PromptTemplates>,
    fallback_pool_size: usize,
) -> Result<LlmGeneration> {
    Ok(LlmGeneration { client, templates, fallback: pool_generation(fallback_pool_size)? })
}

impl GenerationAgent for LlmGeneration {
    fn propose_candidate(
        &self,
        ctx: &IterationContext,
        weights: &WeightVector,
        seed: u64,
    ) -> Result<Proposal<Vec<f64>>> {
        let prompt = self.templates.render_generation_prompt(ctx.history, weights, ctx.budget)?;
        let spec = ctx.history.problem();
        let (parsed, transcripts, outcome) = ask_with_retry(
            self.client.as_ref(),
            &prompt,
            AgentRole::Generation,
            ctx.iteration,
            |text| parse_parameters(text, spec),
        )?;
        let value = match parsed {
            Some(point) => point,
            None => self.fallback.propose_candidate(ctx, weights, seed)?.value,
        };
        Ok(Proposal { value, outcome, transcripts })
    }
}

/// The single-agent baseline: one prompt reasons about the trade-off and
/// emits the candidate directly; no weight vector exists. Falls back to a
/// seeded uniform in-bounds point.
pub struct SingleAgentProposer {
    client: Arc<dyn ChatClient>,
    templates: Arc<PromptTemplates>,
}

pub fn single_agent(
    client: Arc<dyn ChatClient>,
    templates: Arc<PromptTemplates>,
) -> SingleAgentProposer {
    SingleAgentProposer { client, templates }
}

impl SingleAgentProposer {
    pub fn propose(&self, ctx: &IterationContext, seed: u64) -> Result<Proposal<Vec<f64>>> {
        let prompt = self.templates.render_single_prompt(
            ctx.history,
            &ctx.summary,
            ctx.active,
            ctx.iteration,
            ctx.budget,
        )?;
        let spec = ctx.history.problem();
        let (parsed, transcripts, outcome) = ask_with_retry(
            self.client.as_ref(),
            &prompt,
            AgentRole::Single,
            ctx.iteration,
            |text| parse_parameters(text, spec),
        )?;
        let value = match parsed {
            Some(point) => point,
            None => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                sample_uniform_point(spec, &mut rng)
            }
        };
        Ok(Proposal { value, outcome, transcripts })
    }
}
