//! Single-pass generation: attribute-conditioned background, a fixed
//! five-round conversation and inline item generation.

use serde::{Deserialize, Serialize};

use crate::dialogue::{
    render_history, request_background, AgentContext, Background, BackgroundPolicy, DialogueTurn,
    Speaker,
};
use crate::extraction::{
    category_list, finish_item, taxonomy_list, Dimension, ItemMetadata, McqItem, Pipeline,
};
use crate::gateway::{AgentRole, GatewayError, SchemaId, StructuredError};
use crate::persona::{AttributeProfile, Persona};
use crate::prompts::PromptKind;

/// Client/therapist exchanges per session.
pub const ROUNDS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConciseConfig {
    /// Items requested per profile area, for each dimension.
    pub items_per_area: usize,
    pub background: BackgroundPolicy,
}

impl Default for ConciseConfig {
    fn default() -> Self {
        Self {
            items_per_area: 1,
            background: BackgroundPolicy::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConciseSession {
    pub persona: Persona,
    pub profile: AttributeProfile,
    pub background: Background,
    pub turns: Vec<DialogueTurn>,
    pub items: Vec<McqItem>,
    /// Item requests that never produced a valid document.
    pub rejected_items: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum ConciseError {
    #[error("persona {0} has no attribute profile")]
    ProfileMissing(String),
    #[error(transparent)]
    Gateway(#[from] GatewayError),
}

pub fn run_concise(
    ctx: AgentContext<'_>,
    persona: &Persona,
    profile: Option<&AttributeProfile>,
    config: &ConciseConfig,
) -> Result<ConciseSession, ConciseError> {
    let profile = *profile.ok_or_else(|| ConciseError::ProfileMissing(persona.id.clone()))?;
    let persona_text = persona.describe();
    let profile_text = profile.describe();

    let system = ctx.prompts.render(
        PromptKind::ConciseBackground,
        &[("persona", &persona_text), ("profile", &profile_text)],
    );
    let request = ctx.request(AgentRole::Background, system, "Write the background narrative now.");
    let background = request_background(ctx, request, &config.background)?;

    let mut turns: Vec<DialogueTurn> = Vec::with_capacity(ROUNDS * 2);
    for index in 0..ROUNDS * 2 {
        let speaker = Speaker::for_index(index);
        let kind = match speaker {
            Speaker::Client => PromptKind::ConciseClient,
            Speaker::Therapist => PromptKind::ConciseTherapist,
        };
        let system = ctx.prompts.render(
            kind,
            &[
                ("persona", &persona_text),
                ("profile", &profile_text),
                ("background", &background.narrative),
                ("history", &render_history(&turns)),
            ],
        );
        let request = ctx.request(speaker.agent(), system, "Write your next message.");
        let text = ctx.gateway.complete(&request)?;
        let text = text.trim();
        if text.is_empty() {
            return Err(GatewayError::BadResponse(format!(
                "{} returned an empty message",
                speaker.agent()
            ))
            .into());
        }
        turns.push(DialogueTurn {
            speaker,
            text: text.to_string(),
            index,
        });
    }

    let metadata = ItemMetadata {
        persona_id: persona.id.clone(),
        theme: profile.conflict_domain.to_string(),
        conversation_length: turns.len(),
        pipeline: Pipeline::Concise,
        attribute_profile: Some(profile),
    };
    let history = render_history(&turns);
    let taxonomy = ctx.schemas.taxonomy();
    let labels = taxonomy_list(taxonomy);
    let mut items = Vec::new();
    let mut rejected_items = 0;
    let areas = [
        (Dimension::Eu, profile.eu_area.as_str(), SchemaId::EuItem),
        (Dimension::Ea, profile.ea_area.as_str(), SchemaId::EaItem),
    ];
    for (dimension, area, schema) in areas {
        let categories = category_list(dimension);
        for _ in 0..config.items_per_area {
            let system = ctx.prompts.render(
                PromptKind::ConciseItems,
                &[
                    ("background", &background.narrative),
                    ("history", &history),
                    ("area", area),
                    ("dimension", dimension.as_str()),
                    ("categories", &categories),
                    ("taxonomy", &labels),
                ],
            );
            let request = ctx.request(AgentRole::ItemGenerator, system, "Write the item as a JSON object.");
            match ctx.gateway.complete_structured(&request, schema, ctx.schemas) {
                Ok(doc) => match finish_item(&doc, taxonomy, dimension, metadata.clone()) {
                    Some(item) => items.push(item),
                    None => rejected_items += 1,
                },
                Err(StructuredError::Invalid { last_problems, .. }) => {
                    tracing::warn!(persona = %persona.id, %dimension, problems = ?last_problems, "item rejected after retries");
                    rejected_items += 1;
                }
                Err(StructuredError::Gateway(e)) => return Err(e.into()),
            }
        }
    }

    Ok(ConciseSession {
        persona: persona.clone(),
        profile,
        background,
        turns,
        items,
        rejected_items,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::golden::{concise_script, ConcisePlan, ItemPlan};
    use crate::persona::sample_attribute_profile;
    use crate::testutil::{persona, Fixture};

    fn config(items_per_area: usize) -> ConciseConfig {
        ConciseConfig {
            items_per_area,
            ..ConciseConfig::default()
        }
    }

    #[test]
    fn full_session_with_four_items() {
        let fx = Fixture::new(concise_script(&[ConcisePlan::all_valid(2)], 3), 3);
        let p = persona("p1");
        let profile = sample_attribute_profile(&p, 1);
        let s = run_concise(fx.ctx(), &p, Some(&profile), &config(2)).unwrap();
        assert_eq!(s.turns.len(), 10);
        assert_eq!(s.items.len(), 4);
        assert_eq!(s.rejected_items, 0);
        let dims: Vec<_> = s.items.iter().map(|i| i.dimension).collect();
        assert_eq!(dims, [Dimension::Eu, Dimension::Eu, Dimension::Ea, Dimension::Ea]);
        let meta = s.items[0].metadata.as_ref().unwrap();
        assert_eq!(meta.attribute_profile, Some(profile));
        assert_eq!(meta.pipeline, Pipeline::Concise);
    }

    #[test]
    fn invalid_item_is_rejected_and_counted() {
        let plan = ConcisePlan {
            eu: vec![ItemPlan::Valid, ItemPlan::AlwaysInvalid],
            ea: vec![ItemPlan::Valid, ItemPlan::Valid],
        };
        let fx = Fixture::new(concise_script(&[plan], 2), 2);
        let p = persona("p1");
        let profile = sample_attribute_profile(&p, 1);
        let s = run_concise(fx.ctx(), &p, Some(&profile), &config(2)).unwrap();
        assert_eq!(s.items.len(), 3);
        assert_eq!(s.rejected_items, 1);
        // background + 10 messages + 3 valid items + 3 attempts for the bad one
        assert_eq!(fx.gateway.calls(), 1 + 10 + 3 + 3);
    }

    #[test]
    fn missing_profile_fails_before_any_call() {
        let fx = Fixture::new(concise_script(&[ConcisePlan::all_valid(1)], 0), 0);
        let err = run_concise(fx.ctx(), &persona("p1"), None, &config(1)).unwrap_err();
        assert!(matches!(err, ConciseError::ProfileMissing(id) if id == "p1"));
        assert_eq!(fx.gateway.calls(), 0);
    }
}
