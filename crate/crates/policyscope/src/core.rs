//! Domain types shared by every other module: problem definitions,
//! evaluations, histories, search policies, and normalization utilities.
//!
//! All optimization math in this crate works in an internal *maximize*
//! orientation. Minimize problems are negated when an objective value enters a
//! [`History`] and un-negated wherever values are reported back (logs, CSVs,
//! prompts). [`Evaluation::value`] therefore always holds the internal value.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::{Error, Result};

/// Window length used for stagnation summaries fed to strategy agents.
pub const STAGNATION_WINDOW: usize = 5;
/// Relative-improvement threshold below which the search counts as stagnating.
pub const STAGNATION_THRESHOLD: f64 = 1e-3;

/// Optimization direction of a problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

impl Sense {
    /// Sign converting between the problem's own orientation and the internal
    /// maximize orientation. The conversion is its own inverse.
    pub fn sign(self) -> f64 {
        match self {
            Sense::Maximize => 1.0,
            Sense::Minimize => -1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Sense::Maximize => "maximize",
            Sense::Minimize => "minimize",
        }
    }
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Kind of a single search-space dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Continuous,
    /// Represented as a real constrained to integral values; rounded
    /// half-away-from-zero when clamped.
    Integer,
}

/// A box-bounded search domain plus the metadata injected into prompts.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub dim: usize,
    pub bounds: Vec<(f64, f64)>,
    pub kinds: Vec<VarKind>,
    pub sense: Sense,
    /// Free text describing the task to the agents. Deliberately free of any
    /// structural information the task wants to keep hidden.
    pub description: String,
}

impl ProblemSpec {
    pub fn new(
        name: impl Into<String>,
        bounds: Vec<(f64, f64)>,
        kinds: Vec<VarKind>,
        sense: Sense,
        description: impl Into<String>,
    ) -> Result<Self> {
        let dim = bounds.len();
        if dim == 0 {
            return Err(Error::Domain("problem must have at least one dimension".into()));
        }
        if kinds.len() != dim {
            return Err(Error::Domain(format!(
                "kinds length {} does not match dimension {}",
                kinds.len(),
                dim
            )));
        }
        for (j, &(lo, hi)) in bounds.iter().enumerate() {
            if !(lo < hi) {
                return Err(Error::Domain(format!(
                    "dimension {}: lower bound {} must be strictly below upper bound {}",
                    j + 1,
                    lo,
                    hi
                )));
            }
        }
        Ok(Self { name: name.into(), dim, bounds, kinds, sense, description: description.into() })
    }

    /// Check that `p` has the right arity, lies within bounds componentwise,
    /// and holds integral values on integer dimensions.
    pub fn validate_point(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.dim {
            return Err(Error::Domain(format!(
                "point has {} components, problem has {}",
                p.len(),
                self.dim
            )));
        }
        for (j, (&v, &(lo, hi))) in p.iter().zip(&self.bounds).enumerate() {
            if !v.is_finite() || v < lo || v > hi {
                return Err(Error::Domain(format!(
                    "dimension {}: value {} outside bounds [{}, {}]",
                    j + 1,
                    v,
                    lo,
                    hi
                )));
            }
            if self.kinds[j] == VarKind::Integer && v.fract() != 0.0 {
                return Err(Error::Domain(format!(
                    "dimension {}: value {} must be integral",
                    j + 1,
                    v
                )));
            }
        }
        Ok(())
    }

    /// Force a raw vector into the domain: clamp to bounds, then round integer
    /// dimensions half-away-from-zero (re-clamping into the integral range).
    pub fn clamp(&self, p: &[f64]) -> Vec<f64> {
        assert_eq!(p.len(), self.dim, "clamp called with wrong arity");
        p.iter()
            .zip(&self.bounds)
            .zip(&self.kinds)
            .map(|((&v, &(lo, hi)), &kind)| {
                let mut v = if v.is_nan() { lo } else { v.clamp(lo, hi) };
                if kind == VarKind::Integer {
                    v = v.round();
                    if v < lo {
                        v = lo.ceil();
                    } else if v > hi {
                        v = hi.floor();
                    }
                }
                v
            })
            .collect()
    }
}

/// Map an in-bounds point to `[0,1]^dim` coordinates.
pub fn normalize_point(p: &[f64], spec: &ProblemSpec) -> Result<Vec<f64>> {
    if p.len() != spec.dim {
        return Err(Error::Domain(format!(
            "point has {} components, problem has {}",
            p.len(),
            spec.dim
        )));
    }
    p.iter()
        .zip(&spec.bounds)
        .enumerate()
        .map(|(j, (&v, &(lo, hi)))| {
            if !v.is_finite() || v < lo || v > hi {
                Err(Error::Domain(format!(
                    "dimension {}: value {} outside bounds [{}, {}]",
                    j + 1,
                    v,
                    lo,
                    hi
                )))
            } else {
                Ok((v - lo) / (hi - lo))
            }
        })
        .collect()
}

/// Inverse of [`normalize_point`]: map `[0,1]^dim` coordinates back to the
/// problem's coordinates. Purely linear; integer rounding is the caller's job.
pub fn denormalize_point(u: &[f64], spec: &ProblemSpec) -> Vec<f64> {
    assert_eq!(u.len(), spec.dim, "denormalize called with wrong arity");
    u.iter().zip(&spec.bounds).map(|(&t, &(lo, hi))| lo + t * (hi - lo)).collect()
}

/// Derive an independent RNG seed from a base seed and a stream tag
/// (SplitMix64 finalizer). Used everywhere a sub-component needs its own
/// deterministic randomness.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Draw one uniform in-bounds point (integer dimensions rounded).
pub fn sample_uniform_point<R: rand::Rng>(spec: &ProblemSpec, rng: &mut R) -> Vec<f64> {
    let u: Vec<f64> = (0..spec.dim).map(|_| rng.gen::<f64>()).collect();
    spec.clamp(&denormalize_point(&u, spec))
}

/// One objective evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub point: Vec<f64>,
    /// Objective value in the internal maximize orientation.
    pub value: f64,
    /// 1-based position in the history.
    pub iteration: usize,
}

/// Append-only record of all evaluations of one run.
#[derive(Debug, Clone)]
pub struct History {
    problem: Arc<ProblemSpec>,
    evaluations: Vec<Evaluation>,
}

/// Summary of recent best-so-far movement, fed to strategy agents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StagnationSummary {
    pub relative_improvement: f64,
    pub stagnating: bool,
}

impl History {
    pub fn new(problem: Arc<ProblemSpec>) -> Self {
        Self { problem, evaluations: Vec::new() }
    }

    /// Record an evaluation. `objective` is the value reported by the
    /// evaluator in the problem's own sense; it is stored internally in
    /// maximize orientation.
    pub fn append(&mut self, point: Vec<f64>, objective: f64) -> Result<&Evaluation> {
        self.problem.validate_point(&point)?;
        let internal = self.problem.sense.sign() * objective;
        let iteration = self.evaluations.len() + 1;
        self.evaluations.push(Evaluation { point, value: internal, iteration });
        Ok(self.evaluations.last().expect("just pushed"))
    }

    pub fn problem(&self) -> &Arc<ProblemSpec> {
        &self.problem
    }

    pub fn len(&self) -> usize {
        self.evaluations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.evaluations.is_empty()
    }

    pub fn evaluations(&self) -> &[Evaluation] {
        &self.evaluations
    }

    /// The evaluation's objective value in the problem's own sense.
    pub fn external_value(&self, eval: &Evaluation) -> f64 {
        self.problem.sense.sign() * eval.value
    }

    /// Best evaluation under the problem's sense; ties broken by earliest
    /// iteration.
    pub fn best(&self) -> Result<&Evaluation> {
        self.evaluations
            .iter()
            .reduce(|best, e| if e.value > best.value { e } else { best })
            .ok_or_else(|| Error::State("history is empty".into()))
    }

    /// Best point and objective value in the problem's own sense.
    pub fn best_objective(&self) -> Result<(Vec<f64>, f64)> {
        let best = self.best()?;
        Ok((best.point.clone(), self.external_value(best)))
    }

    /// Running best-so-far series of internal values, one entry per evaluation.
    pub fn best_series_internal(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.evaluations.len());
        let mut best = f64::NEG_INFINITY;
        for e in &self.evaluations {
            best = best.max(e.value);
            out.push(best);
        }
        out
    }

    /// Relative best-so-far improvement over the last `k` evaluations.
    ///
    /// With fewer than `k + 1` evaluations the window is not yet meaningful
    /// and `stagnating` is forced to `false` (the improvement is then measured
    /// from the first evaluation).
    pub fn improvement_window(&self, k: usize) -> Result<StagnationSummary> {
        if self.evaluations.is_empty() {
            return Err(Error::State("history is empty".into()));
        }
        let k = k.max(1);
        let series = self.best_series_internal();
        let n = series.len();
        let full_window = n > k;
        let reference = if full_window { series[n - 1 - k] } else { series[0] };
        let now = series[n - 1];
        let relative_improvement = (now - reference).abs() / reference.abs().max(1e-12);
        let stagnating = full_window && relative_improvement < STAGNATION_THRESHOLD;
        Ok(StagnationSummary { relative_improvement, stagnating })
    }
}

/// The four search-behavior criteria, in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Criterion {
    Exploitation,
    Informativeness,
    Diversity,
    Representativeness,
}

impl Criterion {
    pub const ALL: [Criterion; 4] = [
        Criterion::Exploitation,
        Criterion::Informativeness,
        Criterion::Diversity,
        Criterion::Representativeness,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Criterion::Exploitation => "exploitation",
            Criterion::Informativeness => "informativeness",
            Criterion::Diversity => "diversity",
            Criterion::Representativeness => "representativeness",
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "exploitation" => Ok(Criterion::Exploitation),
            "informativeness" => Ok(Criterion::Informativeness),
            "diversity" => Ok(Criterion::Diversity),
            "representativeness" => Ok(Criterion::Representativeness),
            other => Err(Error::Validation(format!("unknown criterion `{other}`"))),
        }
    }
}

/// Deduplicate and order criterion names canonically.
pub fn canonical_criteria(raw: &[Criterion]) -> Vec<Criterion> {
    Criterion::ALL.iter().copied().filter(|c| raw.contains(c)).collect()
}

/// A normalized search policy: nonnegative weights over the active criteria,
/// summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    active: Vec<Criterion>,
    weights: Vec<f64>,
}

impl WeightVector {
    /// Build from raw nonnegative weights, normalizing to unit sum. The active
    /// set is stored in canonical order regardless of input order.
    pub fn normalized(active: &[Criterion], raw: &[f64]) -> Result<Self> {
        if active.is_empty() {
            return Err(Error::Validation("active criteria set is empty".into()));
        }
        if raw.len() != active.len() {
            return Err(Error::Validation(format!(
                "{} weights supplied for {} active criteria",
                raw.len(),
                active.len()
            )));
        }
        let canonical = canonical_criteria(active);
        if canonical.len() != active.len() {
            return Err(Error::Validation("duplicate criterion in active set".into()));
        }
        let mut pairs: Vec<(Criterion, f64)> = active.iter().copied().zip(raw.iter().copied()).collect();
        pairs.sort_by_key(|(c, _)| *c);
        for (c, w) in &pairs {
            if !w.is_finite() || *w < 0.0 {
                return Err(Error::Validation(format!("weight for {c} must be a nonnegative number, got {w}")));
            }
        }
        let sum: f64 = pairs.iter().map(|(_, w)| w).sum();
        if sum <= 0.0 {
            return Err(Error::Validation("weights must not all be zero".into()));
        }
        let (active, weights) = pairs.into_iter().map(|(c, w)| (c, w / sum)).unzip();
        Ok(Self { active, weights })
    }

    /// Equal weight on every active criterion.
    pub fn uniform(active: &[Criterion]) -> Result<Self> {
        WeightVector::normalized(active, &vec![1.0; active.len()])
    }

    /// Unit mass on one criterion, zero on the rest of the active set.
    pub fn unit(active: &[Criterion], on: Criterion) -> Result<Self> {
        if !active.contains(&on) {
            return Err(Error::Validation(format!("criterion {on} is not in the active set")));
        }
        let raw: Vec<f64> = active.iter().map(|c| if *c == on { 1.0 } else { 0.0 }).collect();
        WeightVector::normalized(active, &raw)
    }

    pub fn active(&self) -> &[Criterion] {
        &self.active
    }

    /// Weight for a criterion; zero for criteria outside the active set.
    pub fn weight(&self, c: Criterion) -> f64 {
        self.active
            .iter()
            .position(|a| *a == c)
            .map(|i| self.weights[i])
            .unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Criterion, f64)> + '_ {
        self.active.iter().copied().zip(self.weights.iter().copied())
    }
}

/// Outcome of parsing one agent's structured output for an iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ParseOutcome {
    /// First response parsed cleanly.
    Ok,
    /// First response failed, the corrective re-ask succeeded.
    Retried,
    /// Both responses failed; the deterministic fallback produced the value.
    Fallback,
}

impl ParseOutcome {
    pub fn as_str(self) -> &'static str {
        match self {
            ParseOutcome::Ok => "ok",
            ParseOutcome::Retried => "retried",
            ParseOutcome::Fallback => "fallback",
        }
    }
}

impl fmt::Display for ParseOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ParseOutcome {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ok" => Ok(ParseOutcome::Ok),
            "retried" => Ok(ParseOutcome::Retried),
            "fallback" => Ok(ParseOutcome::Fallback),
            other => Err(Error::Validation(format!("unknown parse outcome `{other}`"))),
        }
    }
}

/// One per-iteration log row. Values are in the problem's own sense.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub iteration: usize,
    pub point: Vec<f64>,
    pub value: f64,
    pub best_so_far: f64,
    /// Absent for baselines and initial random evaluations.
    pub weights: Option<WeightVector>,
    pub parse_outcome: Option<ParseOutcome>,
    /// Total LLM latency spent this iteration; zero when no calls were made,
    /// which keeps deterministic runs byte-reproducible.
    pub wall_time_ms: u64,
}
