//! Multiple-choice evaluation: prompt formatting, answer parsing, scoring
//! and the model evaluation loop.

mod harness;
mod parse;
mod prompt;
mod score;

pub use harness::{evaluate_model, AuditRecord, EvalConfig, EvalRun};
pub use parse::{parse_answer, ModelAnswer, ParseMode};
pub use prompt::format_prompt;
pub use score::{score, CategoryReport, DimensionScore, LengthMismatch, Tally};
