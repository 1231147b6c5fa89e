//! Item schema, validation and extraction of EU/EA items from dialogues.

mod consistency;
mod item;
mod taxonomy;
mod validate;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use consistency::{check_explanation_consistency, content_words, Consistency, SuspectReason};
pub use item::{
    word_count, AnswerLetter, Category, Dimension, ItemMetadata, McqItem, Pipeline,
};
pub use taxonomy::{EmotionTaxonomy, TaxonomyError, CORE_EMOTIONS, DEFAULT_EXTENSIONS};
pub use validate::{
    check_item, validate_document, validate_for_dimension, Violation, MAX_SCENARIO_WORDS,
    MIN_SCENARIO_WORDS, REQUIRED_FIELDS,
};

use crate::dialogue::{AgentContext, Dialogue};
use crate::gateway::{AgentRole, GatewayError, SchemaId, StructuredError};
use crate::prompts::PromptKind;

/// Per-category item counters.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CategoryCounts(pub BTreeMap<Category, usize>);

impl CategoryCounts {
    pub fn record(&mut self, category: Category) {
        *self.0.entry(category).or_insert(0) += 1;
    }

    pub fn record_all<'a>(&mut self, items: impl IntoIterator<Item = &'a McqItem>) {
        for item in items {
            self.record(item.category);
        }
    }

    pub fn get(&self, category: Category) -> usize {
        self.0.get(&category).copied().unwrap_or(0)
    }

    pub fn total(&self, dimension: Dimension) -> usize {
        dimension.categories().iter().map(|c| self.get(*c)).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionConfig {
    /// Items requested per dimension (3 or 4 in normal operation).
    pub items_per_dialogue: usize,
    /// Below this many valid items the dialogue is marked under-extracted.
    pub min_items: usize,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        Self {
            items_per_dialogue: 4,
            min_items: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Extraction {
    pub dimension: Dimension,
    pub items: Vec<McqItem>,
    /// Item requests that never produced a valid document.
    pub rejected: usize,
    pub under_extracted: bool,
}

pub fn extract_eu_items(
    ctx: AgentContext<'_>,
    dialogue: &Dialogue,
    config: &ExtractionConfig,
) -> Result<Extraction, GatewayError> {
    extract(ctx, dialogue, config, Dimension::Eu)
}

pub fn extract_ea_items(
    ctx: AgentContext<'_>,
    dialogue: &Dialogue,
    config: &ExtractionConfig,
) -> Result<Extraction, GatewayError> {
    extract(ctx, dialogue, config, Dimension::Ea)
}

pub(crate) fn category_list(dimension: Dimension) -> String {
    dimension
        .categories()
        .iter()
        .map(|c| c.as_str())
        .collect::<Vec<_>>()
        .join(", ")
}

pub(crate) fn taxonomy_list(taxonomy: &EmotionTaxonomy) -> String {
    taxonomy.labels().collect::<Vec<_>>().join(", ")
}

/// Turns a schema-checked document into an item, attaching `metadata`.
pub(crate) fn finish_item(
    doc: &serde_json::Value,
    taxonomy: &EmotionTaxonomy,
    dimension: Dimension,
    metadata: ItemMetadata,
) -> Option<McqItem> {
    let mut item = validate_for_dimension(doc, taxonomy, Some(dimension)).ok()?;
    item.id.clear();
    item.metadata = Some(metadata);
    Some(item)
}

fn extract(
    ctx: AgentContext<'_>,
    dialogue: &Dialogue,
    config: &ExtractionConfig,
    dimension: Dimension,
) -> Result<Extraction, GatewayError> {
    if dialogue.terminated_by.is_none() {
        return Err(GatewayError::Precondition(format!(
            "dialogue for persona {} has not terminated",
            dialogue.persona_id
        )));
    }
    let (kind, agent, schema) = match dimension {
        Dimension::Eu => (PromptKind::EuExtractor, AgentRole::EuExtractor, SchemaId::EuItem),
        Dimension::Ea => (PromptKind::EaExtractor, AgentRole::EaExtractor, SchemaId::EaItem),
    };
    let taxonomy = ctx.schemas.taxonomy();
    let categories = category_list(dimension);
    let labels = taxonomy_list(taxonomy);
    let history = dialogue.transcript();
    let count = config.items_per_dialogue.to_string();
    let metadata = ItemMetadata {
        persona_id: dialogue.persona_id.clone(),
        theme: dialogue.theme.clone(),
        conversation_length: dialogue.turns.len(),
        pipeline: Pipeline::Mads,
        attribute_profile: None,
    };

    let mut items = Vec::new();
    let mut rejected = 0;
    for k in 1..=config.items_per_dialogue {
        let index = k.to_string();
        let system = ctx.prompts.render(
            kind,
            &[
                ("background", &dialogue.background.narrative),
                ("history", &history),
                ("item_index", &index),
                ("item_count", &count),
                ("categories", &categories),
                ("taxonomy", &labels),
                ("dimension", dimension.as_str()),
            ],
        );
        let request = ctx.request(agent, system, &format!("Write item {k} as a JSON object."));
        match ctx.gateway.complete_structured(&request, schema, ctx.schemas) {
            Ok(doc) => match finish_item(&doc, taxonomy, dimension, metadata.clone()) {
                Some(item) => items.push(item),
                None => rejected += 1,
            },
            Err(StructuredError::Invalid { last_problems, .. }) => {
                tracing::warn!(
                    persona = %dialogue.persona_id,
                    %dimension,
                    item = k,
                    problems = ?last_problems,
                    "item rejected after retries"
                );
                rejected += 1;
            }
            Err(StructuredError::Gateway(e)) => return Err(e),
        }
    }
    let under_extracted = items.len() < config.min_items;
    Ok(Extraction {
        dimension,
        items,
        rejected,
        under_extracted,
    })
}
