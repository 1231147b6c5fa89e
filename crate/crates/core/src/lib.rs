//! Synthetic emotional chain-of-thought data generation and EU/EA evaluation.
//!
//! Two generation pipelines (a multi-agent dialogue system and a concise
//! single-pass variant) produce multiple-choice items that are validated,
//! curated and scored by the evaluation harness.

mod vocab;

pub mod concise;
pub mod curation;
pub mod dialogue;
pub mod eval;
pub mod extraction;
pub mod gateway;
pub mod golden;
pub mod jsonx;
pub mod persona;
pub mod pipeline;
pub mod prompts;

#[cfg(test)]
mod testutil;

pub use vocab::UnknownValue;
