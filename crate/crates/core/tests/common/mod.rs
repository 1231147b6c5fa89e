#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};

use emocot_core::dialogue::AgentContext;
use emocot_core::gateway::{
    BackendCursor, ChatBackend, CompletionRequest, Gateway, GatewayError, SamplingParams,
    SchemaRegistry, ScriptEntry, ScriptedBackend,
};
use emocot_core::persona::{Disposition, Persona, RelationshipStatus, Theme};
use emocot_core::prompts::PromptSet;

pub struct Harness {
    pub gateway: Gateway,
    pub prompts: PromptSet,
    pub schemas: SchemaRegistry,
    pub sampling: SamplingParams,
}

impl Harness {
    pub fn new(backend: impl ChatBackend + 'static, max_retries: u32) -> Self {
        Self {
            gateway: Gateway::new(backend, max_retries),
            prompts: PromptSet::default(),
            schemas: SchemaRegistry::default(),
            sampling: SamplingParams::default(),
        }
    }

    pub fn scripted(script: Vec<ScriptEntry>, max_retries: u32) -> Self {
        Self::new(ScriptedBackend::new(script).unwrap(), max_retries)
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

/// Delegates to a scripted backend and panics on call number `limit + 1`,
/// simulating a process crash mid-run.
pub struct CrashAfter {
    pub inner: ScriptedBackend,
    pub limit: usize,
    pub calls: AtomicUsize,
}

impl CrashAfter {
    pub fn new(script: Vec<ScriptEntry>, limit: usize) -> Self {
        Self {
            inner: ScriptedBackend::new(script).unwrap(),
            limit,
            calls: AtomicUsize::new(0),
        }
    }
}

impl ChatBackend for CrashAfter {
    fn send(&self, request: &CompletionRequest) -> Result<String, GatewayError> {
        if self.calls.fetch_add(1, Ordering::SeqCst) >= self.limit {
            panic!("simulated crash");
        }
        self.inner.send(request)
    }

    fn cursor(&self) -> Option<BackendCursor> {
        self.inner.cursor()
    }

    fn restore_cursor(&self, cursor: &BackendCursor) -> Result<(), GatewayError> {
        self.inner.restore_cursor(cursor)
    }
}

pub fn personas(n: usize) -> Vec<Persona> {
    let statuses = RelationshipStatus::ALL;
    let dispositions = Disposition::ALL;
    (0..n)
        .map(|i| Persona {
            id: format!("p{i:03}"),
            age: 20 + (i as u32 * 7) % 50,
            occupation: ["nurse", "teacher", "chef", "pilot"][i % 4].into(),
            relationship_status: statuses[i % statuses.len()],
            cultural_background: ["Ghanaian", "Korean", "Brazilian"][i % 3].into(),
            disposition: dispositions[i % dispositions.len()],
            traits: String::new(),
            extra: BTreeMap::new(),
        })
        .collect()
}

pub fn themes() -> Vec<Theme> {
    ["workplace conflict", "family expectations", "grief", "friendship strain"]
        .iter()
        .enumerate()
        .map(|(i, name)| Theme {
            id: format!("t{i}"),
            name: name.to_string(),
            description: String::new(),
            compatible_dispositions: None,
        })
        .collect()
}

pub fn script_calls(script: &[ScriptEntry]) -> usize {
    script.len()
}

pub fn cursor_total(c: &BackendCursor) -> usize {
    c.values().sum()
}
