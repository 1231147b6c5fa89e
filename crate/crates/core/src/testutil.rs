use std::collections::BTreeMap;

use crate::dialogue::{AgentContext, Background, Dialogue, DialogueTurn, Speaker, Termination};
use crate::gateway::{
    Gateway, SamplingParams, SchemaRegistry, ScriptEntry, ScriptedBackend,
};
use crate::persona::{Disposition, Persona, RelationshipStatus};
use crate::prompts::PromptSet;

pub struct Fixture {
    pub gateway: Gateway,
    pub prompts: PromptSet,
    pub schemas: SchemaRegistry,
    pub sampling: SamplingParams,
}

impl Fixture {
    pub fn new(script: Vec<ScriptEntry>, max_retries: u32) -> Self {
        Self {
            gateway: Gateway::new(ScriptedBackend::new(script).unwrap(), max_retries),
            prompts: PromptSet::default(),
            schemas: SchemaRegistry::default(),
            sampling: SamplingParams::default(),
        }
    }

    pub fn ctx(&self) -> AgentContext<'_> {
        AgentContext {
            gateway: &self.gateway,
            prompts: &self.prompts,
            schemas: &self.schemas,
            sampling: &self.sampling,
        }
    }
}

pub fn persona(id: &str) -> Persona {
    Persona {
        id: id.into(),
        age: 34,
        occupation: "nurse".into(),
        relationship_status: RelationshipStatus::Single,
        cultural_background: "Nigerian-British".into(),
        disposition: Disposition::Anxious,
        traits: String::new(),
        extra: BTreeMap::new(),
    }
}

/// A terminated four-turn dialogue.
pub fn finished_dialogue() -> Dialogue {
    Dialogue {
        persona_id: "p1".into(),
        theme_id: "t-work".into(),
        theme: "workplace conflict".into(),
        background: Background {
            narrative: crate::golden::prose(0, 250),
            word_count: 250,
            flag: None,
            attempts: 1,
        },
        turns: (0..4)
            .map(|i| DialogueTurn {
                speaker: Speaker::for_index(i),
                text: format!("turn {i}"),
                index: i,
            })
            .collect(),
        verdicts: Vec::new(),
        terminated_by: Some(Termination::CriteriaMet),
    }
}
