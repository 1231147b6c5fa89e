//! Instruct, validate, retry with error feedback.

use serde_json::Value;

use super::{ChatMessage, CompletionRequest, Gateway, GatewayError};
use crate::extraction::{validate_for_dimension, Dimension, EmotionTaxonomy};
use crate::jsonx::extract_json_object;

/// Documents the gateway knows how to validate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemaId {
    /// An item of either dimension.
    Item,
    EuItem,
    EaItem,
    /// Supervisor verdict: four booleans.
    Verdict,
}

pub const VERDICT_FIELDS: [&str; 4] = [
    "scenario_established",
    "emotions_expressed",
    "causes_explored",
    "dilemma_present",
];

#[derive(Debug, Clone, Default)]
pub struct SchemaRegistry {
    taxonomy: EmotionTaxonomy,
}

impl SchemaRegistry {
    pub fn new(taxonomy: EmotionTaxonomy) -> Self {
        Self { taxonomy }
    }

    pub fn taxonomy(&self) -> &EmotionTaxonomy {
        &self.taxonomy
    }

    /// Checks `doc` against `schema`, returning human-readable problems.
    pub fn check(&self, schema: SchemaId, doc: &Value) -> Result<(), Vec<String>> {
        let expected = match schema {
            SchemaId::Verdict => return check_verdict(doc),
            SchemaId::Item => None,
            SchemaId::EuItem => Some(Dimension::Eu),
            SchemaId::EaItem => Some(Dimension::Ea),
        };
        validate_for_dimension(doc, &self.taxonomy, expected)
            .map(|_| ())
            .map_err(|vs| vs.iter().map(ToString::to_string).collect())
    }
}

fn check_verdict(doc: &Value) -> Result<(), Vec<String>> {
    let Some(obj) = doc.as_object() else {
        return Err(vec!["document is not a JSON object".into()]);
    };
    let problems: Vec<String> = VERDICT_FIELDS
        .iter()
        .filter_map(|f| match obj.get(*f) {
            Some(Value::Bool(_)) => None,
            Some(_) => Some(format!("field {f} must be a boolean")),
            None => Some(format!("missing field: {f}")),
        })
        .collect();
    if problems.is_empty() {
        Ok(())
    } else {
        Err(problems)
    }
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum StructuredError {
    #[error("no valid document after {attempts} attempts: {}", .last_problems.join("; "))]
    Invalid {
        attempts: u32,
        last_problems: Vec<String>,
    },
    #[error(transparent)]
    Gateway(#[from] GatewayError),
}

impl Gateway {
    /// Requests a document matching `schema`.
    ///
    /// Each invalid reply is fed back as an assistant turn followed by a user
    /// turn listing the problems. Transient transport failures and invalid
    /// documents draw from the same budget, so at most `max_retries + 1`
    /// backend calls are made.
    pub fn complete_structured(
        &self,
        request: &CompletionRequest,
        schema: SchemaId,
        registry: &SchemaRegistry,
    ) -> Result<Value, StructuredError> {
        request.validate()?;
        let mut req = request.clone();
        let mut last_problems = Vec::new();
        let budget = self.max_retries() + 1;
        for attempt in 0..budget {
            let raw = match self.attempt(&req, attempt) {
                Ok(raw) => raw,
                Err(e) if e.is_transient() => {
                    last_problems = vec![e.to_string()];
                    continue;
                }
                Err(e) => return Err(e.into()),
            };
            let problems = match extract_json_object(&raw) {
                None => vec!["response contains no JSON object".to_string()],
                Some(doc) => match registry.check(schema, &doc) {
                    Ok(()) => return Ok(doc),
                    Err(p) => p,
                },
            };
            tracing::debug!(agent = %req.agent, attempt, ?problems, "invalid structured output");
            if !raw.trim().is_empty() {
                req.messages.push(ChatMessage::assistant(raw));
            }
            req.messages.push(ChatMessage::user(format!(
                "Your previous response was invalid:\n- {}\nRespond again with only a corrected JSON object.",
                problems.join("\n- ")
            )));
            last_problems = problems;
        }
        Err(StructuredError::Invalid {
            attempts: budget,
            last_problems,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gateway::{AgentRole, SamplingParams, ScriptedBackend};
    use serde_json::json;

    fn verdict_req() -> CompletionRequest {
        CompletionRequest::new(
            AgentRole::Supervisor,
            &SamplingParams::default(),
            vec![ChatMessage::user("judge")],
        )
    }

    fn gateway(responses: &[&str], retries: u32) -> Gateway {
        let backend = ScriptedBackend::from_sequences([(
            AgentRole::Supervisor,
            responses.iter().map(|s| s.to_string()).collect(),
        )])
        .unwrap();
        Gateway::new(backend, retries)
    }

    const VALID: &str = r#"{"scenario_established":true,"emotions_expressed":false,"causes_explored":true,"dilemma_present":false}"#;

    #[test]
    fn valid_first_time() {
        let gw = gateway(&[VALID], 3);
        let doc = gw
            .complete_structured(&verdict_req(), SchemaId::Verdict, &SchemaRegistry::default())
            .unwrap();
        assert_eq!(doc["causes_explored"], json!(true));
        assert_eq!(gw.calls(), 1);
        let text = serde_json::to_string(&doc).unwrap();
        assert_eq!(serde_json::from_str::<Value>(&text).unwrap(), doc);
    }

    #[test]
    fn malformed_then_valid() {
        let gw = gateway(&["not json", VALID], 2);
        gw.complete_structured(&verdict_req(), SchemaId::Verdict, &SchemaRegistry::default())
            .unwrap();
        assert_eq!(gw.calls(), 2);
    }

    #[test]
    fn all_malformed_errors_after_budget() {
        let gw = gateway(&["{", "{}", "x"], 1);
        let err = gw
            .complete_structured(&verdict_req(), SchemaId::Verdict, &SchemaRegistry::default())
            .unwrap_err();
        assert!(matches!(err, StructuredError::Invalid { attempts: 2, .. }));
        assert_eq!(gw.calls(), 2);
    }
}
