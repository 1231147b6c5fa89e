//! Batch drivers for both generation pipelines, with checkpoint and resume.

mod checkpoint;
mod concise;
mod mads;

use std::ops::Range;

pub use checkpoint::{
    write_atomic, Checkpoint, OutputFiles, CHECKPOINT_DIR, CHECKPOINT_VERSION, LATEST_CHECKPOINT,
};
pub use concise::{
    run_concise_batch, BatchSummary, ConciseBatchConfig, ConciseStats, CONCISE_PARTIAL_FILES,
    ITEMS_FINAL, PERSONAS_FINAL, SUMMARY_FILE,
};
pub use mads::{
    run_mads_batch, DialogueRecord, MadsConfig, MadsStats, MadsSummary, MADS_FILES, STATS_FILE,
};

use crate::gateway::GatewayError;
use crate::persona::CatalogError;

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// Splits `start..end` into consecutive ranges of at most `width` that never
/// straddle a multiple of `every`, so checkpoints fall on range ends.
pub(crate) fn work_ranges(start: usize, end: usize, width: usize, every: usize) -> Vec<Range<usize>> {
    let width = width.max(1);
    let every = every.max(1);
    let mut out = Vec::new();
    let mut lo = start;
    while lo < end {
        let boundary = (lo / every + 1) * every;
        let hi = (lo + width).min(boundary).min(end);
        out.push(lo..hi);
        lo = hi;
    }
    out
}

/// Runs `f` over `range` with one thread per index and returns the results
/// in index order. A single-element range runs on the calling thread.
pub(crate) fn run_range<R: Send>(range: Range<usize>, f: impl Fn(usize) -> R + Sync) -> Vec<R> {
    if range.len() == 1 {
        return vec![f(range.start)];
    }
    std::thread::scope(|s| {
        let f = &f;
        let handles: Vec<_> = range.map(|i| s.spawn(move || f(i))).collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|p| std::panic::resume_unwind(p)))
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_respect_checkpoint_boundaries() {
        assert_eq!(work_ranges(0, 25, 4, 10), [0..4, 4..8, 8..10, 10..14, 14..18, 18..20, 20..24, 24..25]);
        assert_eq!(work_ranges(10, 12, 1, 10), [10..11, 11..12]);
        assert!(work_ranges(5, 5, 3, 10).is_empty());
    }
}
