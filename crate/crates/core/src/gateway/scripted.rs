use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{AgentRole, BackendCursor, ChatBackend, CompletionRequest, GatewayError};

/// One record of a script file: the `index`-th call made by `role` returns
/// `response`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptEntry {
    pub role: AgentRole,
    pub index: usize,
    pub response: String,
}

impl ScriptEntry {
    pub fn new(role: AgentRole, index: usize, response: impl Into<String>) -> Self {
        Self {
            role,
            index,
            response: response.into(),
        }
    }
}

/// Replays canned responses keyed by `(agent role, per-role call counter)`.
///
/// Counter updates are serialized, but the mapping from calls to responses is
/// only reproducible when one session runs at a time.
#[derive(Debug)]
pub struct ScriptedBackend {
    responses: HashMap<(AgentRole, usize), String>,
    counters: Mutex<BackendCursor>,
}

impl ScriptedBackend {
    pub fn new(entries: impl IntoIterator<Item = ScriptEntry>) -> Result<Self, GatewayError> {
        let mut responses = HashMap::new();
        for e in entries {
            if responses.insert((e.role, e.index), e.response).is_some() {
                return Err(GatewayError::Script(format!(
                    "duplicate entry ({}, {})",
                    e.role, e.index
                )));
            }
        }
        Ok(Self {
            responses,
            counters: Mutex::new(BTreeMap::new()),
        })
    }

    /// Loads a JSON array of `{role, index, response}` records.
    pub fn load(path: &Path) -> Result<Self, GatewayError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| GatewayError::Script(format!("{}: {e}", path.display())))?;
        let entries: Vec<ScriptEntry> = serde_json::from_str(&text)
            .map_err(|e| GatewayError::Script(format!("{}: {e}", path.display())))?;
        Self::new(entries)
    }

    /// Builds a script from per-role response lists, indexing each list from 0.
    pub fn from_sequences(
        seqs: impl IntoIterator<Item = (AgentRole, Vec<String>)>,
    ) -> Result<Self, GatewayError> {
        Self::new(seqs.into_iter().flat_map(|(role, responses)| {
            responses
                .into_iter()
                .enumerate()
                .map(move |(index, r)| ScriptEntry::new(role, index, r))
        }))
    }

    /// Calls made so far for `role`.
    pub fn calls_for(&self, role: AgentRole) -> usize {
        self.counters.lock().expect("counter lock").get(&role).copied().unwrap_or(0)
    }
}

impl ChatBackend for ScriptedBackend {
    fn send(&self, request: &CompletionRequest) -> Result<String, GatewayError> {
        let mut counters = self.counters.lock().expect("counter lock");
        let counter = counters.entry(request.agent).or_insert(0);
        let index = *counter;
        match self.responses.get(&(request.agent, index)) {
            Some(response) => {
                *counter += 1;
                Ok(response.clone())
            }
            None => Err(GatewayError::ScriptExhausted {
                role: request.agent,
                index,
            }),
        }
    }

    fn cursor(&self) -> Option<BackendCursor> {
        Some(self.counters.lock().expect("counter lock").clone())
    }

    fn restore_cursor(&self, cursor: &BackendCursor) -> Result<(), GatewayError> {
        *self.counters.lock().expect("counter lock") = cursor.clone();
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gateway::{ChatMessage, Gateway, SamplingParams};

    fn req(agent: AgentRole) -> CompletionRequest {
        CompletionRequest::new(agent, &SamplingParams::default(), vec![ChatMessage::user("go")])
    }

    #[test]
    fn replays_by_role_and_counter() {
        let backend = ScriptedBackend::new([
            ScriptEntry::new(AgentRole::Client, 0, "I can't stop replaying the argument."),
            ScriptEntry::new(AgentRole::Therapist, 0, "Tell me more."),
            ScriptEntry::new(AgentRole::Client, 1, "It was about money."),
        ])
        .unwrap();
        let gw = Gateway::new(backend, 0);
        assert_eq!(
            gw.complete(&req(AgentRole::Client)).unwrap(),
            "I can't stop replaying the argument."
        );
        assert_eq!(gw.complete(&req(AgentRole::Client)).unwrap(), "It was about money.");
        assert_eq!(gw.complete(&req(AgentRole::Therapist)).unwrap(), "Tell me more.");
    }

    #[test]
    fn exhaustion_is_loud() {
        let gw = Gateway::new(ScriptedBackend::new([]).unwrap(), 3);
        let err = gw.complete(&req(AgentRole::Supervisor)).unwrap_err();
        assert!(matches!(
            err,
            GatewayError::ScriptExhausted {
                role: AgentRole::Supervisor,
                index: 0
            }
        ));
        assert!(err.is_fatal());
        assert_eq!(gw.calls(), 1);
    }

    #[test]
    fn duplicate_entries_rejected() {
        let err = ScriptedBackend::new([
            ScriptEntry::new(AgentRole::Client, 0, "a"),
            ScriptEntry::new(AgentRole::Client, 0, "b"),
        ])
        .unwrap_err();
        assert!(matches!(err, GatewayError::Script(_)));
    }

    #[test]
    fn cursor_round_trip() {
        let backend =
            ScriptedBackend::from_sequences([(AgentRole::Client, vec!["a".into(), "b".into()])])
                .unwrap();
        backend.send(&req(AgentRole::Client)).unwrap();
        let cur = backend.cursor().unwrap();
        backend.send(&req(AgentRole::Client)).unwrap();
        backend.restore_cursor(&cur).unwrap();
        assert_eq!(backend.send(&req(AgentRole::Client)).unwrap(), "b");
    }
}
