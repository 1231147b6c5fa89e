use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::parse::{parse_answer, ModelAnswer, ParseMode};
use super::prompt::format_prompt;
use super::score::{score, CategoryReport};
use crate::curation::display_id;
use crate::extraction::{AnswerLetter, McqItem};
use crate::gateway::{AgentRole, ChatMessage, CompletionRequest, Gateway, GatewayError, SamplingParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub sampling: SamplingParams,
    /// Abort once backend failures exceed this fraction of all items.
    pub max_failure_fraction: f64,
    pub parallelism: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            sampling: SamplingParams {
                temperature: 0.0,
                ..SamplingParams::default()
            },
            max_failure_fraction: 0.1,
            parallelism: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditRecord {
    pub item_id: String,
    pub prompt_sha256: String,
    pub raw_response: String,
    pub parse_mode: ParseMode,
    pub answer: Option<AnswerLetter>,
    pub gold: AnswerLetter,
    pub correct: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub backend_error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalRun {
    /// Scores over the attempted items (all items unless aborted).
    pub report: CategoryReport,
    pub records: Vec<AuditRecord>,
    pub backend_failures: usize,
    pub aborted: bool,
}

fn evaluate_one(
    gateway: &Gateway,
    sampling: &SamplingParams,
    item: &McqItem,
) -> Result<(ModelAnswer, String, Option<String>), GatewayError> {
    let prompt = format_prompt(item);
    let digest = hex::encode(Sha256::digest(prompt.as_bytes()));
    let request = CompletionRequest::new(AgentRole::Candidate, sampling, vec![ChatMessage::user(prompt)]);
    match gateway.complete(&request) {
        Ok(raw) => Ok((parse_answer(&raw), digest, None)),
        Err(e) if e.is_fatal() => Err(e),
        Err(e) => Ok((ModelAnswer::failed(""), digest, Some(e.to_string()))),
    }
}

/// Formats, queries, parses and scores every item in order. Fatal gateway
/// errors are returned; other backend failures count as failed parses until
/// they exceed the configured fraction, which stops the run early.
pub fn evaluate_model(
    items: &[McqItem],
    gateway: &Gateway,
    config: &EvalConfig,
) -> Result<EvalRun, GatewayError> {
    let limit = config.max_failure_fraction * items.len() as f64;
    let chunk = config.parallelism.max(1);
    let mut answers = Vec::with_capacity(items.len());
    let mut records = Vec::with_capacity(items.len());
    let mut backend_failures = 0;
    let mut aborted = false;

    for (offset, group) in items.chunks(chunk).enumerate().map(|(i, g)| (i * chunk, g)) {
        let results: Vec<_> = if group.len() == 1 {
            vec![evaluate_one(gateway, &config.sampling, &group[0])]
        } else {
            std::thread::scope(|s| {
                let handles: Vec<_> = group
                    .iter()
                    .map(|item| s.spawn(|| evaluate_one(gateway, &config.sampling, item)))
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("evaluation worker panicked"))
                    .collect()
            })
        };
        for (k, result) in results.into_iter().enumerate() {
            let item = &group[k];
            let (answer, digest, error) = result?;
            if error.is_some() {
                backend_failures += 1;
            }
            records.push(AuditRecord {
                item_id: display_id(item, offset + k),
                prompt_sha256: digest,
                raw_response: answer.raw.clone(),
                parse_mode: answer.parse_mode,
                answer: answer.answer,
                gold: item.correct_answer,
                correct: answer.answer == Some(item.correct_answer),
                backend_error: error,
            });
            answers.push(answer);
        }
        if backend_failures as f64 > limit {
            tracing::error!(backend_failures, items = items.len(), "backend failure budget exceeded; aborting");
            aborted = true;
            break;
        }
    }

    let attempted = &items[..answers.len()];
    let report = score(&config.sampling.model, attempted, &answers).expect("one answer per attempted item");
    Ok(EvalRun {
        report,
        records,
        backend_failures,
        aborted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extraction::Dimension;
    use crate::gateway::{ChatBackend, ScriptedBackend};
    use crate::golden::{answer_json, balanced_items, eval_script};

    #[test]
    fn gold_answers_score_one() {
        let items = balanced_items(2);
        let script = eval_script(items.iter().map(|i| answer_json(i.correct_answer, "because")));
        let gw = Gateway::new(ScriptedBackend::new(script).unwrap(), 0);
        let run = evaluate_model(&items, &gw, &EvalConfig::default()).unwrap();
        assert!(!run.aborted);
        assert_eq!(run.report.accuracy(Dimension::Eu), Some(1.0));
        assert_eq!(run.report.accuracy(Dimension::Ea), Some(1.0));
        assert_eq!(run.records.len(), 16);
        assert_eq!(run.records[0].prompt_sha256.len(), 64);
    }

    #[test]
    fn always_a_on_uniform_gold() {
        let items = balanced_items(4);
        let script = eval_script(items.iter().map(|_| answer_json(AnswerLetter::A, "guess")));
        let gw = Gateway::new(ScriptedBackend::new(script).unwrap(), 0);
        let run = evaluate_model(&items, &gw, &EvalConfig::default()).unwrap();
        let gold_a = items.iter().filter(|i| i.correct_answer == AnswerLetter::A).count();
        assert_eq!(gold_a * 4, items.len());
        let total_correct: usize = run.records.iter().filter(|r| r.correct).count();
        assert_eq!(total_correct, gold_a);
        assert_eq!(run.report.accuracy(Dimension::Eu), Some(0.25));
    }

    struct Down;
    impl ChatBackend for Down {
        fn send(&self, _: &CompletionRequest) -> Result<String, GatewayError> {
            Err(GatewayError::Transient("503".into()))
        }
    }

    #[test]
    fn aborts_past_failure_budget() {
        let items = balanced_items(3);
        let gw = Gateway::new(Down, 1);
        let run = evaluate_model(&items, &gw, &EvalConfig::default()).unwrap();
        assert!(run.aborted);
        // 24 items: the limit is 2.4 failures, so the third failure stops the run.
        assert_eq!(run.records.len(), 3);
        assert_eq!(run.report.items, 3);
        assert_eq!(gw.calls(), 6);
    }

    #[test]
    fn fatal_errors_propagate() {
        let gw = Gateway::new(ScriptedBackend::new([]).unwrap(), 0);
        assert!(matches!(
            evaluate_model(&balanced_items(1), &gw, &EvalConfig::default()),
            Err(GatewayError::ScriptExhausted { .. })
        ));
    }
}
