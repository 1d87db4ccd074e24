use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use policyscope::benchmarks::list_benchmarks;
use policyscope::harness::{emit_plots, replay, run_optimization, run_suite, RunConfig};

#[derive(Parser)]
#[command(
    name = "policyscope",
    about = "Budgeted black-box optimization with explicit LLM-mediated search policies",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone, Default)]
struct Overrides {
    /// Optimizer identifier (overrides the config file).
    #[arg(long)]
    optimizer: Option<String>,
    /// Benchmark name (overrides the config file).
    #[arg(long)]
    benchmark: Option<String>,
    /// Evaluation budget (overrides the config file).
    #[arg(long)]
    budget: Option<usize>,
    /// Run seed (overrides the config file).
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated active criteria (overrides the config file).
    #[arg(long)]
    criteria: Option<String>,
    /// Output directory (overrides the config file).
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

impl Overrides {
    fn apply(&self, cfg: &mut RunConfig) {
        if let Some(v) = &self.optimizer {
            cfg.optimizer = v.clone();
        }
        if let Some(v) = &self.benchmark {
            cfg.benchmark = v.clone();
        }
        if let Some(v) = self.budget {
            cfg.budget = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = &self.criteria {
            cfg.criteria = v.clone();
        }
        if let Some(v) = &self.output_dir {
            cfg.output_dir = v.clone();
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Execute one optimization run and write its CSV and transcript.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Execute a repetition suite and write per-run CSVs plus a summary.
    Suite {
        #[arg(long)]
        config: PathBuf,
        /// Repetition count (overrides the config file).
        #[arg(long)]
        reps: Option<usize>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Render SVG plots from the run CSVs in a directory.
    Plot { dir: PathBuf },
    /// Re-execute a recorded run from its transcript, without network access.
    Replay {
        transcript: PathBuf,
        #[arg(long)]
        config: PathBuf,
        /// Where to write the replayed outputs (default: <output_dir>/replay).
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Benchmark registry commands.
    Bench {
        #[command(subcommand)]
        command: BenchCommand,
    },
}

#[derive(Subcommand)]
enum BenchCommand {
    /// List the available benchmark families.
    List,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn execute(cli: Cli) -> policyscope::Result<ExitCode> {
    match cli.command {
        Command::Run { config, overrides } => {
            let mut cfg = RunConfig::from_file(&config)?;
            overrides.apply(&mut cfg);
            let result = run_optimization(&cfg)?;
            println!(
                "run complete: benchmark={} optimizer={} seed={} evaluations={}",
                cfg.benchmark, cfg.optimizer, cfg.seed, result.evaluations
            );
            println!("best objective: {}", result.best_value);
            println!(
                "best point: ({})",
                result
                    .best_point
                    .iter()
                    .map(|v| v.to_string())
                    .collect::<Vec<_>>()
                    .join(", ")
            );
            println!("csv: {}", result.csv_path.display());
            println!("transcript: {}", result.transcript_path.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Suite { config, reps, overrides } => {
            let mut cfg = RunConfig::from_file(&config)?;
            overrides.apply(&mut cfg);
            if let Some(reps) = reps {
                cfg.repetitions = reps;
            }
            let outcome = run_suite(&cfg)?;
            for result in &outcome.results {
                println!(
                    "seed {}: best objective {}",
                    result.config.seed, result.best_value
                );
            }
            for (seed, error) in &outcome.failures {
                eprintln!("seed {seed}: FAILED: {error}");
            }
            println!("summary: {}", outcome.summary_path.display());
            if outcome.failures.is_empty() {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::FAILURE)
            }
        }
        Command::Plot { dir } => {
            let files = emit_plots(&dir)?;
            for f in files {
                println!("wrote {}", f.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Replay { transcript, config, output_dir } => {
            let mut cfg = RunConfig::from_file(&config)?;
            cfg.output_dir = output_dir.unwrap_or_else(|| cfg.output_dir.join("replay"));
            let result = replay(&transcript, &cfg)?;
            println!(
                "replay complete: evaluations={} best objective {}",
                result.evaluations, result.best_value
            );
            println!("csv: {}", result.csv_path.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Bench { command: BenchCommand::List } => {
            for (name, dim, sense) in list_benchmarks() {
                println!("{name:<12} dim={dim}  {sense}");
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
