use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::extraction::AnswerLetter;
use crate::jsonx::extract_json_object;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParseMode {
    StrictJson,
    Salvage,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelAnswer {
    pub reasoning: String,
    /// Absent only when `parse_mode` is `Failed`.
    pub answer: Option<AnswerLetter>,
    pub raw: String,
    pub parse_mode: ParseMode,
}

impl ModelAnswer {
    pub fn failed(raw: impl Into<String>) -> Self {
        Self {
            reasoning: String::new(),
            answer: None,
            raw: raw.into(),
            parse_mode: ParseMode::Failed,
        }
    }
}

/// `A`, `b`, `(C)`, `D.` and `option A` all name a letter.
fn letter_of(s: &str) -> Option<AnswerLetter> {
    let s = s.trim();
    let s = s
        .strip_prefix("option ")
        .or_else(|| s.strip_prefix("Option "))
        .unwrap_or(s);
    let s = s.trim_matches(|c: char| c == '(' || c == ')' || c == '.' || c.is_whitespace());
    match s {
        "A" | "a" => Some(AnswerLetter::A),
        "B" | "b" => Some(AnswerLetter::B),
        "C" | "c" => Some(AnswerLetter::C),
        "D" | "d" => Some(AnswerLetter::D),
        _ => None,
    }
}

fn salvage_pattern() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(
            r"(?i:answer)\W*(?:(?i:is|would be|should be|will be|=|option|choice)\W*)*\(?\b([ABCD])\b\)?",
        )
        .expect("valid salvage regex")
    })
}

/// Strict JSON (`reasoning` and `answer` keys) first, then the last capital
/// A-D standing alone after the word "answer". Never fails.
pub fn parse_answer(raw: &str) -> ModelAnswer {
    if let Some(Value::Object(obj)) = extract_json_object(raw) {
        if let (Some(Value::String(reasoning)), Some(Value::String(answer))) =
            (obj.get("reasoning"), obj.get("answer"))
        {
            if let Some(letter) = letter_of(answer) {
                return ModelAnswer {
                    reasoning: reasoning.clone(),
                    answer: Some(letter),
                    raw: raw.to_string(),
                    parse_mode: ParseMode::StrictJson,
                };
            }
        }
    }
    let last = salvage_pattern()
        .captures_iter(raw)
        .last()
        .and_then(|c| c.get(1))
        .and_then(|m| letter_of(m.as_str()));
    match last {
        Some(letter) => ModelAnswer {
            reasoning: String::new(),
            answer: Some(letter),
            raw: raw.to_string(),
            parse_mode: ParseMode::Salvage,
        },
        None => ModelAnswer::failed(raw),
    }
}
