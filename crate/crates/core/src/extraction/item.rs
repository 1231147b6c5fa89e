//! The multiple-choice item record shared by both generation pipelines,
//! curation and evaluation.

use serde::{Deserialize, Serialize};

use crate::persona::AttributeProfile;
use crate::vocab::vocabulary;

vocabulary! {
    pub enum Dimension {
        Eu => "EU",
        Ea => "EA",
    }
}

vocabulary! {
    /// Subcategories of both dimensions. The first four are EU, the last four EA.
    pub enum Category {
        ComplexEmotions => "complex_emotions",
        EmotionalCues => "emotional_cues",
        PersonalBeliefs => "personal_beliefs",
        PerspectiveTaking => "perspective_taking",
        PersonalOthers => "Personal-Others",
        PersonalSelf => "Personal-Self",
        SocialOthers => "Social-Others",
        SocialSelf => "Social-Self",
    }
}

impl Category {
    pub const EU: [Category; 4] = [
        Category::ComplexEmotions,
        Category::EmotionalCues,
        Category::PersonalBeliefs,
        Category::PerspectiveTaking,
    ];
    pub const EA: [Category; 4] = [
        Category::PersonalOthers,
        Category::PersonalSelf,
        Category::SocialOthers,
        Category::SocialSelf,
    ];

    pub fn dimension(self) -> Dimension {
        if Category::EU.contains(&self) {
            Dimension::Eu
        } else {
            Dimension::Ea
        }
    }
}

impl Dimension {
    pub fn categories(self) -> [Category; 4] {
        match self {
            Dimension::Eu => Category::EU,
            Dimension::Ea => Category::EA,
        }
    }
}

vocabulary! {
    pub enum AnswerLetter {
        A => "A",
        B => "B",
        C => "C",
        D => "D",
    }
}

impl AnswerLetter {
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        AnswerLetter::ALL.get(i).copied()
    }
}

vocabulary! {
    pub enum Pipeline {
        Mads => "mads",
        Concise => "concise",
        External => "external",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ItemMetadata {
    pub persona_id: String,
    pub theme: String,
    pub conversation_length: usize,
    pub pipeline: Pipeline,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attribute_profile: Option<AttributeProfile>,
}

/// One EU or EA multiple-choice item.
///
/// Construct through [`crate::extraction::validate_document`] to get the
/// invariants checked; the serialized form of a validated item is the
/// canonical interchange form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McqItem {
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub id: String,
    pub dimension: Dimension,
    pub category: Category,
    pub scenario: String,
    pub question: String,
    pub options: [String; 4],
    pub correct_answer: AnswerLetter,
    pub explanation: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub emotion_labels: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<ItemMetadata>,
}

impl McqItem {
    pub fn correct_option(&self) -> &str {
        &self.options[self.correct_answer.index()]
    }

    pub fn scenario_words(&self) -> usize {
        word_count(&self.scenario)
    }

    /// Single-line JSON in field-declaration order.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("item serialization is infallible")
    }
}

/// Whitespace-token word count.
pub fn word_count(text: &str) -> usize {
    text.split_whitespace().count()
}
