//! Budgeted black-box optimization with explicit, interpretable search policies.
//!
//! The central loop optimizes an expensive black-box objective under a fixed
//! evaluation budget. Candidate selection is driven by a *search policy*: a
//! normalized weight vector over four criteria (exploitation, informativeness,
//! diversity, representativeness) computed from the evaluation history. The
//! policy can be set each iteration by an LLM strategy agent, by a scripted
//! schedule, or bypassed entirely by the classical baselines.
//!
//! Crate layout:
//! - [`core`] — problem definitions, histories, weight vectors, run records.
//! - [`benchmarks`] — the three benchmark objective families.
//! - [`metrics`] — the four criteria and weighted scalarization.
//! - [`surrogate`] — Gaussian-process regression with EI/UCB acquisitions.
//! - [`llm_client`] — OpenAI-compatible chat transport plus mock/replay clients.
//! - [`prompts`] — prompt templating, history serialization, output parsing.
//! - [`agents`] — strategy/generation agent implementations and the
//!   single-agent proposer.
//! - [`harness`] — the run loop, configuration, CSV/transcript logging,
//!   suites, plots, and replay.

#![forbid(unsafe_code)]

pub mod agents;
pub mod benchmarks;
pub mod core;
mod error;
pub mod harness;
pub mod llm_client;
pub mod metrics;
pub mod prompts;
pub mod surrogate;

pub use error::{Error, Result};
