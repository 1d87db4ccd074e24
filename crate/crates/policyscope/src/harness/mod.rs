//! The experiment infrastructure: configuration, the budgeted run loop,
//! CSV/transcript logging, repetition suites with summaries, plot emission,
//! and transcript replay.

mod config;
mod csvio;
mod plot;
mod runner;
mod summary;
mod transcript;

pub use config::RunConfig;
pub use csvio::{read_records_csv, CsvRow};
pub use plot::emit_plots;
pub use runner::{replay, run_optimization, run_optimization_with_client, RunResult};
pub use summary::{quantile, run_suite, run_suite_with_clients, ClientFactory, SuiteOutcome, SummaryRow};
pub use transcript::{read_entries, read_header, write_transcripts, TranscriptHeader};
