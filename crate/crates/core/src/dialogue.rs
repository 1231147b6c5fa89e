//! Multi-agent therapy dialogue generation: background narrative, alternating
//! client/therapist turns, and supervisor gating.

use serde::{Deserialize, Serialize};

use crate::extraction::word_count;
use crate::gateway::{
    AgentRole, ChatMessage, CompletionRequest, Gateway, GatewayError, SamplingParams, SchemaId,
    SchemaRegistry, StructuredError,
};
use crate::persona::{Persona, Theme};
use crate::prompts::{PromptKind, PromptSet};

/// Everything an agent needs to issue a request.
#[derive(Debug, Clone, Copy)]
pub struct AgentContext<'a> {
    pub gateway: &'a Gateway,
    pub prompts: &'a PromptSet,
    pub schemas: &'a SchemaRegistry,
    pub sampling: &'a SamplingParams,
}

impl AgentContext<'_> {
    pub(crate) fn request(&self, agent: AgentRole, system: String, user: &str) -> CompletionRequest {
        CompletionRequest::new(
            agent,
            self.sampling,
            vec![ChatMessage::system(system), ChatMessage::user(user)],
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Speaker {
    Client,
    Therapist,
}

impl Speaker {
    pub fn for_index(index: usize) -> Self {
        if index.is_multiple_of(2) {
            Speaker::Client
        } else {
            Speaker::Therapist
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Speaker::Client => "CLIENT",
            Speaker::Therapist => "THERAPIST",
        }
    }

    pub fn agent(self) -> AgentRole {
        match self {
            Speaker::Client => AgentRole::Client,
            Speaker::Therapist => AgentRole::Therapist,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DialogueTurn {
    pub speaker: Speaker,
    pub text: String,
    pub index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LengthFlag {
    Short,
    Long,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Background {
    pub narrative: String,
    pub word_count: usize,
    /// Set when the narrative is still out of bounds after all regenerations.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flag: Option<LengthFlag>,
    pub attempts: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BackgroundPolicy {
    pub min_words: usize,
    pub max_words: usize,
    pub max_regenerations: u32,
}

impl Default for BackgroundPolicy {
    fn default() -> Self {
        Self {
            min_words: 200,
            max_words: 400,
            max_regenerations: 2,
        }
    }
}

impl BackgroundPolicy {
    fn flag_for(&self, words: usize) -> Option<LengthFlag> {
        if words < self.min_words {
            Some(LengthFlag::Short)
        } else if words > self.max_words {
            Some(LengthFlag::Long)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupervisorVerdict {
    pub scenario_established: bool,
    pub emotions_expressed: bool,
    pub causes_explored: bool,
    pub dilemma_present: bool,
    /// Dialogue length (in turns) when the verdict was issued.
    pub evaluated_at_turn: usize,
    /// True when the supervisor never produced a valid verdict and the
    /// conservative all-false default was used.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub defaulted: bool,
}

impl SupervisorVerdict {
    pub fn all_met(&self) -> bool {
        self.scenario_established
            && self.emotions_expressed
            && self.causes_explored
            && self.dilemma_present
    }

    fn all_false(at_turn: usize) -> Self {
        Self {
            scenario_established: false,
            emotions_expressed: false,
            causes_explored: false,
            dilemma_present: false,
            evaluated_at_turn: at_turn,
            defaulted: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    CriteriaMet,
    MaxTurns,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dialogue {
    pub persona_id: String,
    pub theme_id: String,
    pub theme: String,
    pub background: Background,
    pub turns: Vec<DialogueTurn>,
    pub verdicts: Vec<SupervisorVerdict>,
    /// `None` while the dialogue is still running.
    pub terminated_by: Option<Termination>,
}

impl Dialogue {
    /// Transcript as `SPEAKER: text` lines.
    pub fn transcript(&self) -> String {
        render_history(&self.turns)
    }
}

pub(crate) fn render_history(turns: &[DialogueTurn]) -> String {
    if turns.is_empty() {
        return "(the session is just starting)".to_string();
    }
    turns
        .iter()
        .map(|t| format!("{}: {}", t.speaker.tag(), t.text))
        .collect::<Vec<_>>()
        .join("\n")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TurnLimits {
    pub min_turns: usize,
    pub max_turns: usize,
    pub supervisor_cadence: usize,
}

impl Default for TurnLimits {
    fn default() -> Self {
        Self {
            min_turns: 4,
            max_turns: 14,
            supervisor_cadence: 2,
        }
    }
}

impl TurnLimits {
    pub fn validate(&self) -> Result<(), DialogueError> {
        if self.min_turns < 1 || self.min_turns > self.max_turns || self.supervisor_cadence < 1 {
            return Err(DialogueError::InvalidLimits(*self));
        }
        Ok(())
    }

    /// Whether the supervisor runs once the dialogue has `turns` turns.
    pub fn evaluates_at(&self, turns: usize) -> bool {
        turns >= self.min_turns && (turns - self.min_turns).is_multiple_of(self.supervisor_cadence)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum DialogueError {
    #[error("invalid turn limits {0:?}: need 1 <= min <= max and cadence >= 1")]
    InvalidLimits(TurnLimits),
    #[error(transparent)]
    Gateway(#[from] GatewayError),
}

fn non_empty_reply(text: String, agent: AgentRole) -> Result<String, GatewayError> {
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Err(GatewayError::BadResponse(format!("{agent} returned an empty message")));
    }
    Ok(trimmed.to_string())
}

pub fn generate_background(
    ctx: AgentContext<'_>,
    persona: &Persona,
    theme: &Theme,
    policy: &BackgroundPolicy,
) -> Result<Background, GatewayError> {
    let system = ctx.prompts.render(
        PromptKind::Background,
        &[
            ("persona", &persona.describe()),
            ("theme", &theme.name),
            ("theme_description", &theme.description),
        ],
    );
    let request = ctx.request(AgentRole::Background, system, "Write the background narrative now.");
    request_background(ctx, request, policy)
}

/// Issues `request` and regenerates while the word count is out of bounds.
pub(crate) fn request_background(
    ctx: AgentContext<'_>,
    mut request: CompletionRequest,
    policy: &BackgroundPolicy,
) -> Result<Background, GatewayError> {
    let mut attempts = 0;
    loop {
        attempts += 1;
        let narrative = non_empty_reply(ctx.gateway.complete(&request)?, AgentRole::Background)?;
        let words = word_count(&narrative);
        let flag = policy.flag_for(words);
        if flag.is_none() || attempts > policy.max_regenerations {
            if flag.is_some() {
                tracing::warn!(words, attempts, "background length out of bounds; flagged");
            }
            return Ok(Background {
                narrative,
                word_count: words,
                flag,
                attempts,
            });
        }
        request.messages.push(ChatMessage::assistant(narrative));
        request.messages.push(ChatMessage::user(format!(
            "That narrative has {words} words. Rewrite it with {} to {} words.",
            policy.min_words, policy.max_words
        )));
    }
}

/// Asks the supervisor for a verdict on the dialogue so far. Falls back to
/// an all-false verdict when no valid document is produced.
pub fn evaluate_quality(
    ctx: AgentContext<'_>,
    dialogue: &Dialogue,
) -> Result<SupervisorVerdict, GatewayError> {
    let at_turn = dialogue.turns.len();
    if at_turn == 0 {
        return Err(GatewayError::Precondition(
            "cannot evaluate an empty dialogue".into(),
        ));
    }
    let system = ctx.prompts.render(
        PromptKind::Supervisor,
        &[
            ("background", &dialogue.background.narrative),
            ("history", &dialogue.transcript()),
            ("theme", &dialogue.theme),
        ],
    );
    let request = ctx.request(AgentRole::Supervisor, system, "Give your verdict as JSON.");
    match ctx
        .gateway
        .complete_structured(&request, SchemaId::Verdict, ctx.schemas)
    {
        Ok(doc) => {
            let flag = |k: &str| doc[k].as_bool().unwrap_or(false);
            Ok(SupervisorVerdict {
                scenario_established: flag("scenario_established"),
                emotions_expressed: flag("emotions_expressed"),
                causes_explored: flag("causes_explored"),
                dilemma_present: flag("dilemma_present"),
                evaluated_at_turn: at_turn,
                defaulted: false,
            })
        }
        Err(StructuredError::Invalid { attempts, .. }) => {
            tracing::warn!(
                persona = %dialogue.persona_id,
                at_turn,
                attempts,
                "supervisor produced no valid verdict; defaulting to all-false"
            );
            Ok(SupervisorVerdict::all_false(at_turn))
        }
        Err(StructuredError::Gateway(e)) => Err(e),
    }
}

/// Runs the client/therapist loop until the supervisor is satisfied or the
/// turn limit is reached.
pub fn run_dialogue(
    ctx: AgentContext<'_>,
    persona: &Persona,
    theme: &Theme,
    background: Background,
    limits: &TurnLimits,
) -> Result<Dialogue, DialogueError> {
    limits.validate()?;
    let persona_text = persona.describe();
    let mut dialogue = Dialogue {
        persona_id: persona.id.clone(),
        theme_id: theme.id.clone(),
        theme: theme.name.clone(),
        background,
        turns: Vec::new(),
        verdicts: Vec::new(),
        terminated_by: None,
    };

    loop {
        let index = dialogue.turns.len();
        let speaker = Speaker::for_index(index);
        let history = dialogue.transcript();
        let (kind, user) = match speaker {
            Speaker::Client => (PromptKind::Client, "Write your next message as the client."),
            Speaker::Therapist => (
                PromptKind::Therapist,
                "Write your next message as the therapist.",
            ),
        };
        let system = ctx.prompts.render(
            kind,
            &[
                ("persona", &persona_text),
                ("theme", &theme.name),
                ("background", &dialogue.background.narrative),
                ("history", &history),
            ],
        );
        let request = ctx.request(speaker.agent(), system, user);
        let text = non_empty_reply(ctx.gateway.complete(&request)?, speaker.agent())?;
        dialogue.turns.push(DialogueTurn {
            speaker,
            text,
            index,
        });

        let len = dialogue.turns.len();
        if limits.evaluates_at(len) {
            let verdict = evaluate_quality(ctx, &dialogue)?;
            dialogue.verdicts.push(verdict);
            if verdict.all_met() {
                dialogue.terminated_by = Some(Termination::CriteriaMet);
                return Ok(dialogue);
            }
        }
        if len >= limits.max_turns {
            dialogue.terminated_by = Some(Termination::MaxTurns);
            return Ok(dialogue);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gateway::ScriptedBackend;
    use crate::persona::{Disposition, RelationshipStatus};
    use std::collections::BTreeMap;

    fn persona() -> Persona {
        Persona {
            id: "p1".into(),
            age: 41,
            occupation: "engineer".into(),
            relationship_status: RelationshipStatus::Partnered,
            cultural_background: "East Asian".into(),
            disposition: Disposition::Anxious,
            traits: String::new(),
            extra: BTreeMap::new(),
        }
    }

    fn theme() -> Theme {
        Theme {
            id: "t1".into(),
            name: "workplace stress".into(),
            description: String::new(),
            compatible_dispositions: None,
        }
    }

    fn words(n: usize) -> String {
        vec!["lorem"; n].join(" ")
    }

    fn verdict(all: bool) -> String {
        format!(
            r#"{{"scenario_established":true,"emotions_expressed":{all},"causes_explored":true,"dilemma_present":true}}"#
        )
    }

    struct Fixture {
        gateway: Gateway,
        prompts: PromptSet,
        schemas: SchemaRegistry,
        sampling: SamplingParams,
    }

    impl Fixture {
        fn new(seqs: Vec<(AgentRole, Vec<String>)>, retries: u32) -> Self {
            Self {
                gateway: Gateway::new(ScriptedBackend::from_sequences(seqs).unwrap(), retries),
                prompts: PromptSet::default(),
                schemas: SchemaRegistry::default(),
                sampling: SamplingParams::default(),
            }
        }

        fn ctx(&self) -> AgentContext<'_> {
            AgentContext {
                gateway: &self.gateway,
                prompts: &self.prompts,
                schemas: &self.schemas,
                sampling: &self.sampling,
            }
        }
    }

    fn turns(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("message {i}")).collect()
    }

    fn bg() -> Background {
        Background {
            narrative: words(250),
            word_count: 250,
            flag: None,
            attempts: 1,
        }
    }

    fn run(verdicts: Vec<String>) -> Dialogue {
        let fx = Fixture::new(
            vec![
                (AgentRole::Client, turns(7)),
                (AgentRole::Therapist, turns(7)),
                (AgentRole::Supervisor, verdicts),
            ],
            0,
        );
        run_dialogue(fx.ctx(), &persona(), &theme(), bg(), &TurnLimits::default()).unwrap()
    }

    #[test]
    fn background_word_count() {
        let fx = Fixture::new(vec![(AgentRole::Background, vec![words(250)])], 0);
        let b = generate_background(fx.ctx(), &persona(), &theme(), &BackgroundPolicy::default())
            .unwrap();
        assert_eq!(b.word_count, 250);
        assert_eq!(b.flag, None);
    }

    #[test]
    fn background_regenerates_until_in_bounds() {
        let fx = Fixture::new(
            vec![(AgentRole::Background, vec![words(150), words(150), words(300)])],
            0,
        );
        let b = generate_background(fx.ctx(), &persona(), &theme(), &BackgroundPolicy::default())
            .unwrap();
        assert_eq!((b.word_count, b.flag, b.attempts), (300, None, 3));
        assert_eq!(fx.gateway.calls(), 3);
    }

    #[test]
    fn background_flagged_after_three_short_drafts() {
        let fx = Fixture::new(vec![(AgentRole::Background, vec![words(150); 3])], 0);
        let b = generate_background(fx.ctx(), &persona(), &theme(), &BackgroundPolicy::default())
            .unwrap();
        assert_eq!(b.flag, Some(LengthFlag::Short));
        assert_eq!(fx.gateway.calls(), 3);
    }

    #[test]
    fn earliest_exit_at_four_turns() {
        let d = run(vec![verdict(true)]);
        assert_eq!(d.turns.len(), 4);
        assert_eq!(d.terminated_by, Some(Termination::CriteriaMet));
        assert_eq!(d.verdicts.len(), 1);
    }

    #[test]
    fn never_satisfied_runs_to_fourteen() {
        let d = run(vec![verdict(false); 6]);
        assert_eq!(d.turns.len(), 14);
        assert_eq!(d.terminated_by, Some(Termination::MaxTurns));
        let at: Vec<_> = d.verdicts.iter().map(|v| v.evaluated_at_turn).collect();
        assert_eq!(at, [4, 6, 8, 10, 12, 14]);
    }

    #[test]
    fn exit_at_eight() {
        let d = run(vec![verdict(false), verdict(false), verdict(true)]);
        assert_eq!(d.turns.len(), 8);
        assert_eq!(d.verdicts.len(), 3);
        for (i, t) in d.turns.iter().enumerate() {
            assert_eq!(t.speaker == Speaker::Client, i % 2 == 0);
            assert_eq!(t.index, i);
        }
    }

    #[test]
    fn verdict_after_one_retry() {
        let fx = Fixture::new(
            vec![(
                AgentRole::Supervisor,
                vec![
                    "garbage".into(),
                    r#"{"scenario_established":true,"emotions_expressed":false,"causes_explored":true,"dilemma_present":false}"#.into(),
                ],
            )],
            3,
        );
        let mut d = run_stub();
        d.turns.push(DialogueTurn {
            speaker: Speaker::Client,
            text: "hi".into(),
            index: 0,
        });
        let v = evaluate_quality(fx.ctx(), &d).unwrap();
        assert!(v.scenario_established && !v.emotions_expressed && v.causes_explored && !v.dilemma_present);
        assert_eq!(fx.gateway.calls(), 2);
    }

    #[test]
    fn exhausted_verdict_retries_default_to_all_false() {
        let fx = Fixture::new(vec![(AgentRole::Supervisor, vec!["x".into(); 4])], 3);
        let mut d = run_stub();
        d.turns.push(DialogueTurn {
            speaker: Speaker::Client,
            text: "hi".into(),
            index: 0,
        });
        let v = evaluate_quality(fx.ctx(), &d).unwrap();
        assert!(v.defaulted && !v.all_met());
        assert_eq!(fx.gateway.calls(), 4);
    }

    fn run_stub() -> Dialogue {
        Dialogue {
            persona_id: "p1".into(),
            theme_id: "t1".into(),
            theme: "workplace stress".into(),
            background: bg(),
            turns: Vec::new(),
            verdicts: Vec::new(),
            terminated_by: None,
        }
    }

    #[test]
    fn invalid_limits() {
        let fx = Fixture::new(vec![], 0);
        let limits = TurnLimits {
            min_turns: 5,
            max_turns: 4,
            supervisor_cadence: 2,
        };
        assert!(matches!(
            run_dialogue(fx.ctx(), &persona(), &theme(), bg(), &limits),
            Err(DialogueError::InvalidLimits(_))
        ));
    }
}
