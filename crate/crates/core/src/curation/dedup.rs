//! Near-duplicate scenario removal.

use serde::Serialize;

use super::levenshtein::bounded_levenshtein;
use crate::extraction::McqItem;

pub const DEFAULT_DEDUP_THRESHOLD: f64 = 0.15;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DroppedDuplicate {
    pub id: String,
    pub duplicate_of: String,
    pub normalized_distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DedupOutcome {
    pub kept: Vec<McqItem>,
    pub dropped: Vec<DroppedDuplicate>,
}

/// Identifier used in manifests: the item id, or `#<position>` when empty.
pub fn display_id(item: &McqItem, position: usize) -> String {
    if item.id.is_empty() {
        format!("#{position}")
    } else {
        item.id.clone()
    }
}

struct Entry {
    chars: Vec<char>,
    /// Character counts folded into 64 buckets. Half the L1 distance between
    /// two histograms is a lower bound on the edit distance.
    hist: [u32; 64],
    id: String,
}

impl Entry {
    fn new(text: &str, id: String) -> Self {
        let chars: Vec<char> = text.chars().collect();
        let mut hist = [0u32; 64];
        for c in &chars {
            hist[(*c as usize) % 64] += 1;
        }
        Self { chars, hist, id }
    }

    fn histogram_bound(&self, other: &Entry) -> usize {
        let l1: u32 = self
            .hist
            .iter()
            .zip(other.hist.iter())
            .map(|(a, b)| a.abs_diff(*b))
            .sum();
        (l1 as usize).div_ceil(2)
    }
}

/// Drops every item whose scenario is within `threshold` normalized edit
/// distance of an already kept item. Input order decides which copy stays.
pub fn dedup_items(items: Vec<McqItem>, threshold: f64) -> DedupOutcome {
    assert!(
        threshold > 0.0 && threshold < 1.0,
        "dedup threshold must be in (0, 1), got {threshold}"
    );
    let mut kept = Vec::new();
    let mut kept_entries: Vec<Entry> = Vec::new();
    let mut dropped = Vec::new();
    for (pos, item) in items.into_iter().enumerate() {
        let entry = Entry::new(&item.scenario, display_id(&item, pos));
        let hit = kept_entries.iter().find_map(|k| {
            let max = k.chars.len().max(entry.chars.len());
            if max == 0 {
                return Some((k, 0.0));
            }
            let limit = (threshold * max as f64).ceil() as usize;
            if k.chars.len().abs_diff(entry.chars.len()) > limit
                || k.histogram_bound(&entry) > limit
            {
                return None;
            }
            let d = bounded_levenshtein(&k.chars, &entry.chars, limit)?;
            let normalized = d as f64 / max as f64;
            (normalized < threshold).then_some((k, normalized))
        });
        match hit {
            Some((original, distance)) => dropped.push(DroppedDuplicate {
                id: entry.id.clone(),
                duplicate_of: original.id.clone(),
                normalized_distance: distance,
            }),
            None => {
                kept_entries.push(entry);
                kept.push(item);
            }
        }
    }
    DedupOutcome { kept, dropped }
}
