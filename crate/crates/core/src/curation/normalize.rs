//! Speaker-tag normalization and redundant-turn merging for transcripts.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::levenshtein::similarity;

pub const DEFAULT_REDUNDANCY_THRESHOLD: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum SpeakerTag {
    Client,
    Therapist,
    Supervisor,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawTurn {
    pub speaker: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizedTurn {
    pub speaker: SpeakerTag,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizedDialogue {
    pub turns: Vec<NormalizedTurn>,
    /// Turns removed by merging repeats.
    pub merged: usize,
    /// Consecutive same-speaker turns remain after merging.
    pub non_alternating: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NormalizeError {
    #[error("dialogue has no turns")]
    Empty,
    #[error("turn {index}: unmappable speaker tag {tag:?}")]
    UnmappableTag { index: usize, tag: String },
}

/// Maps free-form speaker tags to the canonical three. Keys are compared
/// case-insensitively after trimming whitespace and a trailing colon.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AliasTable(BTreeMap<String, SpeakerTag>);

impl Default for AliasTable {
    fn default() -> Self {
        use SpeakerTag::*;
        let pairs = [
            ("client", Client),
            ("patient", Client),
            ("user", Client),
            ("therapist", Therapist),
            ("counselor", Therapist),
            ("counsellor", Therapist),
            ("assistant", Therapist),
            ("supervisor", Supervisor),
            ("evaluator", Supervisor),
        ];
        Self(pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
    }
}

impl AliasTable {
    pub fn with_alias(mut self, alias: &str, tag: SpeakerTag) -> Self {
        self.0.insert(canonical_key(alias), tag);
        self
    }

    pub fn resolve(&self, tag: &str) -> Option<SpeakerTag> {
        self.0.get(&canonical_key(tag)).copied()
    }
}

fn canonical_key(tag: &str) -> String {
    tag.trim().trim_end_matches(':').trim().to_lowercase()
}

pub fn normalize_dialogue(
    turns: &[RawTurn],
    aliases: &AliasTable,
    redundancy_threshold: f64,
) -> Result<NormalizedDialogue, NormalizeError> {
    if turns.is_empty() {
        return Err(NormalizeError::Empty);
    }
    let mut out: Vec<NormalizedTurn> = Vec::with_capacity(turns.len());
    let mut merged = 0;
    for (index, raw) in turns.iter().enumerate() {
        let speaker = aliases
            .resolve(&raw.speaker)
            .ok_or_else(|| NormalizeError::UnmappableTag {
                index,
                tag: raw.speaker.clone(),
            })?;
        let text = raw.text.trim().to_string();
        if let Some(last) = out.last_mut() {
            if last.speaker == speaker && similarity(&last.text, &text) >= redundancy_threshold {
                if text.chars().count() > last.text.chars().count() {
                    last.text = text;
                }
                merged += 1;
                continue;
            }
        }
        out.push(NormalizedTurn { speaker, text });
    }
    // Supervisor notes sit outside the client/therapist exchange.
    let exchange: Vec<SpeakerTag> = out
        .iter()
        .map(|t| t.speaker)
        .filter(|s| *s != SpeakerTag::Supervisor)
        .collect();
    let non_alternating = exchange.windows(2).any(|w| w[0] == w[1]);
    Ok(NormalizedDialogue {
        turns: out,
        merged,
        non_alternating,
    })
}
