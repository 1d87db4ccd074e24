//! The structured prompt interface: template loading and rendering, history
//! serialization, criterion-definition text, and the delimiter-based output
//! parsers.
//!
//! Templates are plain text with `{{placeholder}}` markers, shipped with the
//! crate and overridable from a directory so wording changes stay diffable.
//! The delimiter strings are bit-exact contracts shared with the agents.

use std::path::Path;

use regex::Regex;

use crate::core::{Criterion, History, ProblemSpec, StagnationSummary, VarKind, WeightVector};
use crate::{Error, Result};

/// Delimiter enclosing the strategy agent's weight vector.
pub const WEIGHTS_DELIMITER: &str = "** weights **";
/// Delimiter enclosing a generated candidate's parameter list.
pub const PARAMETERS_DELIMITER: &str = "## parameters ##";

const NUMBER_PATTERN: &str = r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?";

/// Format a value with six significant digits, keeping trailing zeros
/// (`1.0` renders as `1.00000`). Falls back to scientific notation outside
/// a comfortable magnitude range.
pub fn format_significant(v: f64) -> String {
    if v == 0.0 {
        return "0.00000".into();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let magnitude = v.abs().log10().floor() as i32;
    if (-4..6).contains(&magnitude) {
        let decimals = (5 - magnitude).max(0) as usize;
        format!("{v:.decimals$}")
    } else {
        format!("{v:.5e}")
    }
}

/// One line per evaluation in chronological order, `iter=<i> x=(<v1>, ...)
/// y=<value>` with six significant digits, objective values in the problem's
/// own sense. When the history exceeds `max_entries`, the oldest entries are
/// replaced by a single summary line carrying their count and running best.
pub fn serialize_history(h: &History, max_entries: usize) -> String {
    if h.is_empty() {
        return "No evaluations yet.".into();
    }
    let evals = h.evaluations();
    let mut lines = Vec::new();
    let shown_from = evals.len().saturating_sub(max_entries.max(1));
    if shown_from > 0 {
        let sign = h.problem().sense.sign();
        let omitted_best = evals[..shown_from]
            .iter()
            .map(|e| e.value)
            .fold(f64::NEG_INFINITY, f64::max);
        lines.push(format!(
            "[{} earlier evaluations omitted; best among them: y={}]",
            shown_from,
            format_significant(sign * omitted_best)
        ));
    }
    for e in &evals[shown_from..] {
        let coords: Vec<String> = e.point.iter().map(|&v| format_significant(v)).collect();
        lines.push(format!(
            "iter={} x=({}) y={}",
            e.iteration,
            coords.join(", "),
            format_significant(h.external_value(e))
        ));
    }
    lines.join("\n")
}

/// One definition line per active criterion, in canonical order.
pub fn metric_definitions_text(active: &[Criterion]) -> Result<String> {
    if active.is_empty() {
        return Err(Error::Validation("no active criteria to describe".into()));
    }
    let lines: Vec<&str> = Criterion::ALL
        .iter()
        .filter(|c| active.contains(c))
        .map(|c| match c {
            Criterion::Exploitation => {
                "exploitation: preference for candidates expected to improve on the best \
                 objective value observed so far, scored by interpolating the observed values \
                 around the candidate."
            }
            Criterion::Informativeness => {
                "informativeness: preference for candidates in under-explored regions, scored \
                 by the normalized distance to the nearest evaluated point."
            }
            Criterion::Diversity => {
                "diversity: preference for candidates that spread the search globally, scored \
                 by the mean normalized distance to all evaluated points."
            }
            Criterion::Representativeness => {
                "representativeness: preference for candidates that reflect the overall \
                 structure of the sampled region, scored by proximity to the empirical cluster \
                 centers of the evaluated points."
            }
        })
        .collect();
    Ok(lines.join("\n"))
}

fn problem_context(spec: &ProblemSpec) -> String {
    let mut out = String::new();
    out.push_str(&format!("Objective: {} the objective value.\n", spec.sense));
    out.push_str(&format!("Dimensions: {}\n", spec.dim));
    out.push_str("Variables and bounds:\n");
    for (j, (&(lo, hi), kind)) in spec.bounds.iter().zip(&spec.kinds).enumerate() {
        let kind = match kind {
            VarKind::Continuous => "continuous",
            VarKind::Integer => "integer",
        };
        out.push_str(&format!("  x{}: {kind} in [{lo}, {hi}]\n", j + 1));
    }
    out.push_str(&format!("Notes: {}", spec.description));
    out
}

fn summary_text(h: &History, summary: &StagnationSummary, iteration: usize, budget: usize) -> String {
    let best = match h.best_objective() {
        Ok((_, v)) => format_significant(v),
        Err(_) => "n/a".into(),
    };
    let state = if summary.stagnating {
        "the search is currently stagnating"
    } else {
        "the search is not stagnating"
    };
    format!(
        "Iteration {iteration} of {budget}. Best objective so far: {best}. Relative \
         best-so-far improvement over the recent window: {}; {state}.",
        format_significant(summary.relative_improvement)
    )
}

/// Weight lines as shown to the generation agent: `name = <value>`.
fn weights_block(w: &WeightVector) -> String {
    w.iter()
        .map(|(c, v)| format!("{c} = {v:.6}"))
        .collect::<Vec<_>>()
        .join("\n")
}

fn strategy_output_format(active: &[Criterion]) -> String {
    let k = active.len();
    let total: usize = (1..=k).sum();
    let example: Vec<String> = active
        .iter()
        .enumerate()
        .map(|(i, c)| format!("{c}: {:.2}", (k - i) as f64 / total as f64))
        .collect();
    format!(
        "Output the weights between two `{WEIGHTS_DELIMITER}` delimiter lines, one \
         `name: value` pair per line, covering exactly the criteria defined above. \
         For example:\n\n{WEIGHTS_DELIMITER}\n{}\n{WEIGHTS_DELIMITER}",
        example.join("\n")
    )
}

fn parameters_output_format(spec: &ProblemSpec) -> String {
    let midpoint: Vec<f64> = spec.bounds.iter().map(|&(lo, hi)| (lo + hi) / 2.0).collect();
    let example: Vec<String> = spec
        .clamp(&midpoint)
        .iter()
        .map(|&v| format_significant(v))
        .collect();
    format!(
        "Output exactly {} value(s) between two `{PARAMETERS_DELIMITER}` delimiter \
         lines, comma-separated in variable order (x1 first). For example:\n\n\
         {PARAMETERS_DELIMITER}\n{}\n{PARAMETERS_DELIMITER}",
        spec.dim,
        example.join(", ")
    )
}

/// The fixed per-run prompt templates for the three agent roles.
#[derive(Debug, Clone)]
pub struct PromptTemplates {
    strategy_system: String,
    strategy_user: String,
    generation_system: String,
    generation_user: String,
    single_system: String,
    single_user: String,
}

/// A rendered prompt pair ready to become a chat request.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderedPrompt {
    pub system: String,
    pub user: String,
}

impl PromptTemplates {
    /// The templates shipped with the crate.
    pub fn builtin() -> Self {
        Self {
            strategy_system: include_str!("../templates/strategy_system.txt").into(),
            strategy_user: include_str!("../templates/strategy_user.txt").into(),
            generation_system: include_str!("../templates/generation_system.txt").into(),
            generation_user: include_str!("../templates/generation_user.txt").into(),
            single_system: include_str!("../templates/single_system.txt").into(),
            single_user: include_str!("../templates/single_user.txt").into(),
        }
    }

    /// Load the six template files from a directory (same file names as the
    /// shipped set).
    pub fn from_dir(dir: &Path) -> Result<Self> {
        let read = |name: &str| -> Result<String> {
            let path = dir.join(name);
            std::fs::read_to_string(&path).map_err(|e| Error::io(path, e))
        };
        Ok(Self {
            strategy_system: read("strategy_system.txt")?,
            strategy_user: read("strategy_user.txt")?,
            generation_system: read("generation_system.txt")?,
            generation_user: read("generation_user.txt")?,
            single_system: read("single_system.txt")?,
            single_user: read("single_user.txt")?,
        })
    }

    pub fn render_strategy_prompt(
        &self,
        h: &History,
        summary: &StagnationSummary,
        active: &[Criterion],
        iteration: usize,
        budget: usize,
    ) -> Result<RenderedPrompt> {
        let subs = [
            ("problem_context", problem_context(h.problem())),
            ("history", serialize_history(h, budget)),
            ("summary", summary_text(h, summary, iteration, budget)),
            ("metric_definitions", metric_definitions_text(active)?),
            ("output_format", strategy_output_format(active)),
        ];
        Ok(RenderedPrompt {
            system: substitute(&self.strategy_system, &[])?,
            user: substitute(&self.strategy_user, &subs)?,
        })
    }

    pub fn render_generation_prompt(
        &self,
        h: &History,
        weights: &WeightVector,
        budget: usize,
    ) -> Result<RenderedPrompt> {
        let subs = [
            ("problem_context", problem_context(h.problem())),
            ("history", serialize_history(h, budget)),
            ("weights", weights_block(weights)),
            ("metric_definitions", metric_definitions_text(weights.active())?),
            ("output_format", parameters_output_format(h.problem())),
        ];
        Ok(RenderedPrompt {
            system: substitute(&self.generation_system, &[])?,
            user: substitute(&self.generation_user, &subs)?,
        })
    }

    pub fn render_single_prompt(
        &self,
        h: &History,
        summary: &StagnationSummary,
        active: &[Criterion],
        iteration: usize,
        budget: usize,
    ) -> Result<RenderedPrompt> {
        let subs = [
            ("problem_context", problem_context(h.problem())),
            ("history", serialize_history(h, budget)),
            ("summary", summary_text(h, summary, iteration, budget)),
            ("metric_definitions", metric_definitions_text(active)?),
            ("output_format", parameters_output_format(h.problem())),
        ];
        Ok(RenderedPrompt {
            system: substitute(&self.single_system, &[])?,
            user: substitute(&self.single_user, &subs)?,
        })
    }
}

fn substitute(template: &str, subs: &[(&str, String)]) -> Result<String> {
    let mut out = template.to_string();
    for (key, value) in subs {
        out = out.replace(&format!("{{{{{key}}}}}"), value);
    }
    let leftover = Regex::new(r"\{\{([a-zA-Z_]+)\}\}").expect("static regex");
    if let Some(m) = leftover.captures(&out) {
        return Err(Error::Template(format!(
            "unresolved placeholder `{}` in template",
            &m[1]
        )));
    }
    Ok(out)
}

/// The canonical textual form of a weight vector, parseable by
/// [`parse_weights`].
pub fn canonical_weights_payload(w: &WeightVector) -> String {
    let lines: Vec<String> = w.iter().map(|(c, v)| format!("{c}: {v:.6}")).collect();
    format!("{WEIGHTS_DELIMITER}\n{}\n{WEIGHTS_DELIMITER}", lines.join("\n"))
}

fn extract_delimited<'a>(text: &'a str, delim: &str) -> Result<&'a str> {
    let start = text.find(delim).ok_or_else(|| {
        Error::Parse(format!("no `{delim}` delimiter found in the response"))
    })?;
    let after = start + delim.len();
    let len = text[after..].find(delim).ok_or_else(|| {
        Error::Parse(format!("no closing `{delim}` delimiter found in the response"))
    })?;
    Ok(&text[after..after + len])
}

/// Parse a weight vector from between the first pair of `** weights **`
/// delimiters. Accepts `name: value` (or `name = value`) pairs or a JSON
/// object; missing active criteria default to 0, negatives clamp to 0, and
/// the result is normalized. An all-zero vector is a parse error so the
/// caller can re-ask.
pub fn parse_weights(text: &str, active: &[Criterion]) -> Result<WeightVector> {
    let segment = extract_delimited(text, WEIGHTS_DELIMITER)?;
    let mut raw: Vec<Option<f64>> = vec![None; active.len()];

    let trimmed = segment.trim();
    if trimmed.starts_with('{') {
        if let Ok(serde_json::Value::Object(map)) = serde_json::from_str(trimmed) {
            for (i, c) in active.iter().enumerate() {
                let value = map.get(c.name()).or_else(|| {
                    map.iter()
                        .find(|(k, _)| k.eq_ignore_ascii_case(c.name()))
                        .map(|(_, v)| v)
                });
                if let Some(v) = value {
                    raw[i] = v
                        .as_f64()
                        .or_else(|| v.as_str().and_then(|s| s.trim().parse().ok()));
                }
            }
        }
    }
    if raw.iter().all(Option::is_none) {
        for (i, c) in active.iter().enumerate() {
            let re = Regex::new(&format!(r"(?i)\b{}\b\s*[:=]\s*({NUMBER_PATTERN})", c.name()))
                .expect("criterion names are plain words");
            if let Some(m) = re.captures(segment) {
                raw[i] = m[1].parse().ok();
            }
        }
    }
    if raw.iter().all(Option::is_none) {
        return Err(Error::Parse(format!(
            "no recognizable weights between the `{WEIGHTS_DELIMITER}` delimiters; expected \
             `name: value` pairs or a JSON object over the active criteria"
        )));
    }

    let clamped: Vec<f64> = raw
        .into_iter()
        .map(|v| v.unwrap_or(0.0))
        .map(|v| if v.is_finite() { v.max(0.0) } else { 0.0 })
        .collect();
    if clamped.iter().sum::<f64>() <= 0.0 {
        return Err(Error::Parse(
            "all parsed weights are zero after clamping negatives; at least one weight must \
             be positive"
                .into(),
        ));
    }
    WeightVector::normalized(active, &clamped)
}

/// Parse a candidate point from between the first pair of `## parameters ##`
/// delimiters. Accepts comma/whitespace-separated numbers or 1-indexed
/// `x<i>=<value>` pairs; requires exactly `dim` values, then clamps to bounds
/// and rounds integer dimensions.
pub fn parse_parameters(text: &str, spec: &ProblemSpec) -> Result<Vec<f64>> {
    let segment = extract_delimited(text, PARAMETERS_DELIMITER)?;
    let pair_re = Regex::new(&format!(r"(?i)\bx(\d+)\s*=\s*({NUMBER_PATTERN})"))
        .expect("static regex");

    let pairs: Vec<(usize, f64)> = pair_re
        .captures_iter(segment)
        .filter_map(|c| {
            let idx: usize = c[1].parse().ok()?;
            let val: f64 = c[2].parse().ok()?;
            Some((idx, val))
        })
        .collect();

    let values = if !pairs.is_empty() {
        let mut slots: Vec<Option<f64>> = vec![None; spec.dim];
        for (idx, val) in &pairs {
            if *idx == 0 || *idx > spec.dim {
                return Err(Error::Parse(format!(
                    "index x{idx} out of range; expected x1..x{}",
                    spec.dim
                )));
            }
            if slots[idx - 1].is_some() {
                return Err(Error::Parse(format!("duplicate value for x{idx}")));
            }
            slots[idx - 1] = Some(*val);
        }
        let found = slots.iter().filter(|s| s.is_some()).count();
        if found != spec.dim {
            return Err(Error::Parse(format!(
                "expected {} values, found {found}",
                spec.dim
            )));
        }
        slots.into_iter().map(|s| s.expect("checked")).collect::<Vec<f64>>()
    } else {
        let tokens: Vec<&str> = segment
            .split(|c: char| c.is_whitespace() || matches!(c, ',' | ';' | '[' | ']' | '(' | ')' | '{' | '}'))
            .filter(|t| !t.is_empty())
            .collect();
        if tokens.len() != spec.dim {
            return Err(Error::Parse(format!(
                "expected {} values, found {}",
                spec.dim,
                tokens.len()
            )));
        }
        tokens
            .iter()
            .map(|t| match t.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(Error::Parse(format!("non-numeric token `{t}`"))),
            })
            .collect::<Result<Vec<f64>>>()?
    };

    for v in &values {
        if !v.is_finite() {
            return Err(Error::Parse(format!("non-finite value {v}")));
        }
    }
    let clamped = spec.clamp(&values);
    if clamped != values {
        log::warn!(
            "candidate outside bounds or integrality; clamped {values:?} -> {clamped:?}"
        );
    }
    Ok(clamped)
}
