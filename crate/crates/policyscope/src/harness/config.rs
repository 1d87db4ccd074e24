//! Run configuration: a flat key-value file (TOML syntax, top-level keys
//! only) whose keys are mirrored by CLI override flags. CLI flags win over
//! file values; the API key is environment-only.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::core::{canonical_criteria, Criterion};
use crate::llm_client::{ClientConfig, ENV_BASE_URL};
use crate::prompts::PromptTemplates;
use crate::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Benchmark family: `rosenbrock`, `hpt`, or `robot_push`.
    pub benchmark: String,
    /// Seed for the benchmark's construction-time randomness.
    pub benchmark_seed: u64,
    /// Dimension for `rosenbrock` (the other families have fixed dimension).
    pub dim: usize,
    /// Optimizer identifier: `random`, `gp_ei`, `gp_ucb`, `single_agent`,
    /// `multi_agent`, or `multi_agent_scripted:<schedule>`.
    pub optimizer: String,
    /// Total evaluation budget per run.
    pub budget: usize,
    /// Initial random evaluations drawn before the optimizer takes over.
    pub n_init: usize,
    /// Run seed; suites use `seed`, `seed + 1`, ...
    pub seed: u64,
    /// Repetition count for `suite`.
    pub repetitions: usize,
    /// Comma-separated active criteria.
    pub criteria: String,
    pub output_dir: PathBuf,
    /// Chat endpoint; falls back to `POLICYSCOPE_BASE_URL` when unset.
    pub base_url: Option<String>,
    pub model: String,
    pub temperature: f64,
    pub max_tokens: u32,
    pub timeout_seconds: u64,
    pub max_retries: u32,
    /// Directory overriding the built-in prompt templates.
    pub templates_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            benchmark: "rosenbrock".into(),
            benchmark_seed: 0,
            dim: 2,
            optimizer: "random".into(),
            budget: 30,
            n_init: 3,
            seed: 42,
            repetitions: 10,
            criteria: "exploitation,informativeness,diversity,representativeness".into(),
            output_dir: PathBuf::from("runs"),
            base_url: None,
            model: "llama-3.3-70b-instruct".into(),
            temperature: 0.7,
            max_tokens: 1024,
            timeout_seconds: 60,
            max_retries: 3,
            templates_dir: None,
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_init < 1 {
            return Err(Error::Config("n_init must be at least 1".into()));
        }
        if self.budget < self.n_init {
            return Err(Error::Config(format!(
                "budget {} is below n_init {}",
                self.budget, self.n_init
            )));
        }
        if self.repetitions < 1 {
            return Err(Error::Config("repetitions must be at least 1".into()));
        }
        self.active_criteria()?;
        Ok(())
    }

    /// Parsed active criteria, deduplicated into canonical order.
    pub fn active_criteria(&self) -> Result<Vec<Criterion>> {
        let mut parsed = Vec::new();
        for part in self.criteria.split(',') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            parsed.push(part.parse::<Criterion>().map_err(|e| Error::Config(e.to_string()))?);
        }
        let canonical = canonical_criteria(&parsed);
        if canonical.is_empty() {
            return Err(Error::Config("criteria must name at least one criterion".into()));
        }
        Ok(canonical)
    }

    /// Hash over every field that shapes the loop itself. Transcripts record
    /// it so replay can refuse incompatible configs.
    pub fn config_hash(&self) -> String {
        let criteria = self
            .active_criteria()
            .map(|cs| cs.iter().map(|c| c.name()).collect::<Vec<_>>().join(","))
            .unwrap_or_else(|_| self.criteria.clone());
        let canonical = format!(
            "benchmark={};benchmark_seed={};dim={};optimizer={};budget={};n_init={};seed={};criteria={}",
            self.benchmark,
            self.benchmark_seed,
            self.dim,
            self.optimizer,
            self.budget,
            self.n_init,
            self.seed,
            criteria
        );
        let digest = Sha256::digest(canonical.as_bytes());
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        hex[..16].to_string()
    }

    /// Transport configuration for the live chat endpoint.
    pub fn client_config(&self) -> Result<ClientConfig> {
        let base_url = self
            .base_url
            .clone()
            .or_else(|| std::env::var(ENV_BASE_URL).ok())
            .ok_or_else(|| {
                Error::Config(format!(
                    "optimizer `{}` needs a chat endpoint: set base_url in the config file \
                     or the {ENV_BASE_URL} environment variable",
                    self.optimizer
                ))
            })?;
        let mut cfg = ClientConfig::new(base_url, self.model.clone());
        cfg.temperature = self.temperature;
        cfg.max_tokens = self.max_tokens;
        cfg.timeout_seconds = self.timeout_seconds;
        cfg.max_retries = self.max_retries;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn templates(&self) -> Result<PromptTemplates> {
        match &self.templates_dir {
            Some(dir) => PromptTemplates::from_dir(dir),
            None => Ok(PromptTemplates::builtin()),
        }
    }

    /// Stable file stem for this run's outputs.
    pub fn run_name(&self) -> String {
        format!(
            "{}_{}_seed{}",
            self.benchmark,
            self.optimizer.replace(':', "-"),
            self.seed
        )
    }
}
