//! Item document validation. Reports every violation, never just the first.

use std::collections::BTreeSet;
use std::fmt;

use serde_json::{Map, Value};

use super::item::{word_count, AnswerLetter, Category, Dimension, ItemMetadata, McqItem};
use super::taxonomy::EmotionTaxonomy;

pub const MIN_SCENARIO_WORDS: usize = 50;
pub const MAX_SCENARIO_WORDS: usize = 500;

/// Required keys of an item document, in reporting order.
pub const REQUIRED_FIELDS: [&str; 6] = [
    "scenario",
    "question",
    "options",
    "correct_answer",
    "explanation",
    "category",
];

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Violation {
    NotAnObject,
    MissingField(&'static str),
    WrongType {
        field: &'static str,
        expected: &'static str,
    },
    EmptyField(&'static str),
    OptionCount(usize),
    OptionLabels,
    EmptyOption(AnswerLetter),
    DuplicateOptions,
    InvalidAnswer(String),
    ScenarioTooShort(usize),
    ScenarioTooLong(usize),
    UnknownCategory(String),
    UnknownDimension(String),
    CategoryDimensionMismatch {
        category: Category,
        dimension: Dimension,
    },
    WrongDimension {
        expected: Dimension,
        category: Category,
    },
    LabelNotInTaxonomy(String),
    InvalidMetadata(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotAnObject => f.write_str("document is not a JSON object"),
            Violation::MissingField(name) => write!(f, "missing field: {name}"),
            Violation::WrongType { field, expected } => {
                write!(f, "field {field} must be {expected}")
            }
            Violation::EmptyField(name) => write!(f, "field {name} is empty"),
            Violation::OptionCount(n) => {
                write!(f, "options must have exactly 4 entries (got {n})")
            }
            Violation::OptionLabels => {
                f.write_str("options object must have exactly the keys A, B, C, D")
            }
            Violation::EmptyOption(letter) => write!(f, "option {letter} is empty"),
            Violation::DuplicateOptions => f.write_str("options must be distinct"),
            Violation::InvalidAnswer(got) => {
                write!(f, "correct_answer must be one of A, B, C, D (got {got:?})")
            }
            Violation::ScenarioTooShort(n) => {
                write!(f, "scenario too short ({n} < {MIN_SCENARIO_WORDS})")
            }
            Violation::ScenarioTooLong(n) => {
                write!(f, "scenario too long ({n} > {MAX_SCENARIO_WORDS})")
            }
            Violation::UnknownCategory(c) => write!(f, "unknown category: {c}"),
            Violation::UnknownDimension(d) => write!(f, "unknown dimension: {d}"),
            Violation::CategoryDimensionMismatch {
                category,
                dimension,
            } => write!(f, "category {category} does not belong to dimension {dimension}"),
            Violation::WrongDimension { expected, category } => write!(
                f,
                "expected an {expected} item but category {category} is {}",
                category.dimension()
            ),
            Violation::LabelNotInTaxonomy(l) => write!(f, "emotion label not in taxonomy: {l}"),
            Violation::InvalidMetadata(msg) => write!(f, "invalid metadata: {msg}"),
        }
    }
}

/// Validates a parsed item document.
pub fn validate_document(
    raw: &Value,
    taxonomy: &EmotionTaxonomy,
) -> Result<McqItem, Vec<Violation>> {
    validate_for_dimension(raw, taxonomy, None)
}

/// Like [`validate_document`], additionally requiring the item's category to
/// belong to `expected` when given.
pub fn validate_for_dimension(
    raw: &Value,
    taxonomy: &EmotionTaxonomy,
    expected: Option<Dimension>,
) -> Result<McqItem, Vec<Violation>> {
    let Some(obj) = raw.as_object() else {
        return Err(vec![Violation::NotAnObject]);
    };
    let mut v = Vec::new();

    for field in REQUIRED_FIELDS {
        if !obj.contains_key(field) {
            v.push(Violation::MissingField(field));
        }
    }

    let id = optional_string(obj, "id", &mut v).unwrap_or_default();

    let scenario = string_field(obj, "scenario", &mut v);
    if let Some(s) = &scenario {
        let words = word_count(s);
        if words < MIN_SCENARIO_WORDS {
            v.push(Violation::ScenarioTooShort(words));
        } else if words > MAX_SCENARIO_WORDS {
            v.push(Violation::ScenarioTooLong(words));
        }
    }
    let question = non_empty(string_field(obj, "question", &mut v), "question", &mut v);
    let explanation = non_empty(string_field(obj, "explanation", &mut v), "explanation", &mut v);
    let options = obj.get("options").and_then(|o| options_field(o, &mut v));

    let correct_answer = match obj.get("correct_answer") {
        None => None,
        Some(Value::String(s)) => match s.trim().parse::<AnswerLetter>() {
            Ok(letter) => Some(letter),
            Err(_) => {
                v.push(Violation::InvalidAnswer(s.clone()));
                None
            }
        },
        Some(_) => {
            v.push(Violation::WrongType {
                field: "correct_answer",
                expected: "a string",
            });
            None
        }
    };

    let category = match obj.get("category") {
        None => None,
        Some(Value::String(s)) => match s.trim().parse::<Category>() {
            Ok(c) => Some(c),
            Err(_) => {
                v.push(Violation::UnknownCategory(s.clone()));
                None
            }
        },
        Some(_) => {
            v.push(Violation::WrongType {
                field: "category",
                expected: "a string",
            });
            None
        }
    };

    let dimension = match obj.get("dimension") {
        None => None,
        Some(Value::String(s)) => match s.trim().parse::<Dimension>() {
            Ok(d) => Some(d),
            Err(_) => {
                v.push(Violation::UnknownDimension(s.clone()));
                None
            }
        },
        Some(_) => {
            v.push(Violation::WrongType {
                field: "dimension",
                expected: "a string",
            });
            None
        }
    };
    if let (Some(c), Some(d)) = (category, dimension) {
        if c.dimension() != d {
            v.push(Violation::CategoryDimensionMismatch {
                category: c,
                dimension: d,
            });
        }
    }
    if let (Some(c), Some(e)) = (category, expected) {
        if c.dimension() != e {
            v.push(Violation::WrongDimension {
                expected: e,
                category: c,
            });
        }
    }

    let emotion_labels = match obj.get("emotion_labels") {
        None | Some(Value::Null) => Vec::new(),
        Some(Value::Array(items)) => {
            let mut labels = Vec::with_capacity(items.len());
            for item in items {
                match item.as_str() {
                    Some(l) if taxonomy.contains(l) => labels.push(l.to_string()),
                    Some(l) => v.push(Violation::LabelNotInTaxonomy(l.to_string())),
                    None => v.push(Violation::WrongType {
                        field: "emotion_labels",
                        expected: "an array of strings",
                    }),
                }
            }
            labels
        }
        Some(_) => {
            v.push(Violation::WrongType {
                field: "emotion_labels",
                expected: "an array of strings",
            });
            Vec::new()
        }
    };

    let metadata = match obj.get("metadata") {
        None | Some(Value::Null) => None,
        Some(m) => match serde_json::from_value::<ItemMetadata>(m.clone()) {
            Ok(meta) => Some(meta),
            Err(e) => {
                v.push(Violation::InvalidMetadata(e.to_string()));
                None
            }
        },
    };

    if !v.is_empty() {
        return Err(v);
    }
    // Every component is Some when no violation was recorded.
    let category = category.expect("validated");
    Ok(McqItem {
        id,
        dimension: category.dimension(),
        category,
        scenario: scenario.expect("validated"),
        question: question.expect("validated"),
        options: options.expect("validated"),
        correct_answer: correct_answer.expect("validated"),
        explanation: explanation.expect("validated"),
        emotion_labels,
        metadata,
    })
}

/// Re-checks the invariants of an already-typed item (for items constructed
/// in code rather than parsed).
pub fn check_item(item: &McqItem, taxonomy: &EmotionTaxonomy) -> Vec<Violation> {
    let value = serde_json::to_value(item).expect("item serialization is infallible");
    match validate_document(&value, taxonomy) {
        Ok(_) => Vec::new(),
        Err(v) => v,
    }
}

fn string_field(obj: &Map<String, Value>, field: &'static str, v: &mut Vec<Violation>) -> Option<String> {
    match obj.get(field) {
        None => None,
        Some(Value::String(s)) => Some(s.clone()),
        Some(_) => {
            v.push(Violation::WrongType {
                field,
                expected: "a string",
            });
            None
        }
    }
}

fn optional_string(
    obj: &Map<String, Value>,
    field: &'static str,
    v: &mut Vec<Violation>,
) -> Option<String> {
    match obj.get(field) {
        None | Some(Value::Null) => None,
        _ => string_field(obj, field, v),
    }
}

fn non_empty(s: Option<String>, field: &'static str, v: &mut Vec<Violation>) -> Option<String> {
    match s {
        Some(s) if s.trim().is_empty() => {
            v.push(Violation::EmptyField(field));
            None
        }
        other => other,
    }
}

fn options_field(raw: &Value, v: &mut Vec<Violation>) -> Option<[String; 4]> {
    let texts: Vec<Option<String>> = match raw {
        Value::Array(items) => {
            if items.len() != 4 {
                v.push(Violation::OptionCount(items.len()));
                return None;
            }
            items.iter().map(|i| i.as_str().map(str::to_string)).collect()
        }
        Value::Object(map) => {
            let keys: BTreeSet<&str> = map.keys().map(String::as_str).collect();
            if keys != BTreeSet::from(["A", "B", "C", "D"]) {
                if map.len() != 4 {
                    v.push(Violation::OptionCount(map.len()));
                } else {
                    v.push(Violation::OptionLabels);
                }
                return None;
            }
            AnswerLetter::ALL
                .iter()
                .map(|l| map[l.as_str()].as_str().map(str::to_string))
                .collect()
        }
        _ => {
            v.push(Violation::WrongType {
                field: "options",
                expected: "an array of 4 strings",
            });
            return None;
        }
    };
    if texts.iter().any(Option::is_none) {
        v.push(Violation::WrongType {
            field: "options",
            expected: "an array of 4 strings",
        });
        return None;
    }
    let texts: Vec<String> = texts.into_iter().flatten().collect();
    let mut ok = true;
    for (text, letter) in texts.iter().zip(AnswerLetter::ALL) {
        if text.trim().is_empty() {
            v.push(Violation::EmptyOption(*letter));
            ok = false;
        }
    }
    let distinct: BTreeSet<String> = texts.iter().map(|t| t.trim().to_lowercase()).collect();
    if distinct.len() != 4 && ok {
        v.push(Violation::DuplicateOptions);
        ok = false;
    }
    if !ok {
        return None;
    }
    let mut arr: [String; 4] = Default::default();
    for (slot, text) in arr.iter_mut().zip(texts) {
        *slot = text;
    }
    Some(arr)
}
