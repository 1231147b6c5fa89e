//! Dataset curation: normalization, deduplication, balancing, linting,
//! agreement statistics and dataset reports.

mod balance;
mod dedup;
mod kappa;
mod levenshtein;
mod lint;
mod normalize;
mod stats;

pub use balance::{
    enforce_balance, BalanceDecision, BalanceError, BalanceState, DEFAULT_BALANCE_FACTOR,
};
pub use dedup::{dedup_items, display_id, DedupOutcome, DroppedDuplicate, DEFAULT_DEDUP_THRESHOLD};
pub use kappa::{cohens_kappa, AgreementMatrix, KappaError};
pub use levenshtein::{bounded_levenshtein, levenshtein, normalized_distance, similarity};
pub use lint::{lint_item, Finding};
pub use normalize::{
    normalize_dialogue, AliasTable, NormalizeError, NormalizedDialogue, NormalizedTurn, RawTurn,
    SpeakerTag, DEFAULT_REDUNDANCY_THRESHOLD,
};
pub use stats::{dataset_stats, CategoryCountTable, DatasetReport, DimensionCounts, MisplacedCategory};
