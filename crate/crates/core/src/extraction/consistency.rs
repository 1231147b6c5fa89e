//! Lexical check that an explanation supports the selected answer.

use std::collections::BTreeSet;

use serde::Serialize;

use super::item::McqItem;
use super::taxonomy::EmotionTaxonomy;

const STOP_WORDS: &[&str] = &[
    "about", "above", "after", "again", "also", "because", "been", "before", "being", "both",
    "could", "does", "doing", "down", "each", "even", "feel", "feeling", "feelings", "feels",
    "felt", "from", "further", "have", "having", "here", "into", "just", "more", "most", "much",
    "only", "other", "over", "really", "same", "should", "some", "such", "than", "that", "their",
    "them", "then", "there", "these", "they", "this", "those", "through", "under", "very", "were",
    "what", "when", "where", "which", "while", "will", "with", "would", "your",
];

const CONCLUSION_MARKERS: &[&[&str]] = &[
    &["therefore"],
    &["thus"],
    &["hence"],
    &["so"],
    &["ultimately"],
    &["overall"],
    &["consequently"],
    &["which", "is", "why"],
    &["the", "answer", "is"],
    &["most", "likely"],
    &["in", "conclusion"],
];

const NEGATIONS: &[&str] = &[
    "not", "no", "never", "isn't", "isnt", "rather", "instead", "nor", "without", "than",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "reason", content = "detail", rename_all = "snake_case")]
pub enum SuspectReason {
    /// No content word of the correct option appears in the explanation.
    NoOverlapWithCorrectOption,
    /// The concluding clause names an emotion found only among distractors.
    ConcludesDistractor(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Consistency {
    Consistent,
    Suspect(SuspectReason),
}

impl Consistency {
    pub fn is_suspect(&self) -> bool {
        matches!(self, Consistency::Suspect(_))
    }
}

fn tokens(text: &str) -> Vec<String> {
    text.split(|c: char| !(c.is_alphanumeric() || c == '\''))
        .filter(|t| !t.is_empty())
        .map(|t| t.trim_matches('\'').to_lowercase())
        .filter(|t| !t.is_empty())
        .collect()
}

/// Words of length ≥ 4 (in characters) that are not stop words.
pub fn content_words(text: &str) -> BTreeSet<String> {
    tokens(text)
        .into_iter()
        .filter(|t| t.chars().count() >= 4 && !STOP_WORDS.contains(&t.as_str()))
        .collect()
}

/// Tokens of the concluding clause: everything after the last conclusion
/// marker, or the last sentence when no marker occurs.
fn concluding_clause(explanation: &str) -> Vec<String> {
    let toks = tokens(explanation);
    let mut cut = None;
    for start in 0..toks.len() {
        for marker in CONCLUSION_MARKERS {
            let end = start + marker.len();
            if end <= toks.len() && toks[start..end].iter().zip(marker.iter()).all(|(a, b)| a == b) {
                cut = Some(end);
            }
        }
    }
    match cut {
        Some(end) => toks[end..].to_vec(),
        None => {
            let last = explanation
                .split(['.', '!', '?'])
                .map(str::trim)
                .rfind(|s| !s.is_empty())
                .unwrap_or("");
            tokens(last)
        }
    }
}

pub fn check_explanation_consistency(item: &McqItem, taxonomy: &EmotionTaxonomy) -> Consistency {
    let explanation_tokens: BTreeSet<String> = tokens(&item.explanation).into_iter().collect();
    let correct = item.correct_option();
    if content_words(correct).is_disjoint(&explanation_tokens) {
        return Consistency::Suspect(SuspectReason::NoOverlapWithCorrectOption);
    }

    let correct_tokens: BTreeSet<String> = tokens(correct).into_iter().collect();
    let distractor_labels: BTreeSet<String> = item
        .options
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != item.correct_answer.index())
        .flat_map(|(_, text)| tokens(text))
        .filter(|t| taxonomy.contains(t) && !correct_tokens.contains(t))
        .collect();
    if distractor_labels.is_empty() {
        return Consistency::Consistent;
    }

    let clause = concluding_clause(&item.explanation);
    for (i, tok) in clause.iter().enumerate() {
        if !distractor_labels.contains(tok) {
            continue;
        }
        let negated = clause[i.saturating_sub(3)..i]
            .iter()
            .any(|t| NEGATIONS.contains(&t.as_str()));
        if !negated {
            return Consistency::Suspect(SuspectReason::ConcludesDistractor(tok.clone()));
        }
    }
    Consistency::Consistent
}
