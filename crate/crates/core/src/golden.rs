//! Deterministic fixtures: synthetic item documents and scripts for the
//! scripted backend. Used by the shipped golden scripts and by tests.

use serde_json::{json, Value};

use crate::extraction::{AnswerLetter, Category, Dimension, EmotionTaxonomy, McqItem};
use crate::gateway::{AgentRole, ScriptEntry};

const NAMES: [&str; 16] = [
    "Maya", "Daniel", "Priya", "Tomas", "Aiko", "Samuel", "Leila", "Jonas", "Grace", "Mateo",
    "Nadia", "Oliver", "Hana", "Kwame", "Elena", "Ravi",
];

const JOBS: [&str; 5] = ["nurse", "teacher", "accountant", "chef", "software developer"];

const OPENINGS: [&str; 7] = [
    "After months of late shifts, the team finally heard that the department would be restructured before the end of the quarter.",
    "At a family dinner last weekend, an old disagreement about the house resurfaced in front of everyone.",
    "The long-awaited promotion was announced on Monday, but the name on the email was not the one people expected.",
    "A close friend moved across the country in the spring and the weekly phone calls have slowly become monthly.",
    "The landlord sent a letter saying the rent would rise sharply when the lease ends in two months.",
    "During a community meeting, a neighbour publicly blamed the local volunteers for a cancelled festival.",
    "A younger sibling has just been accepted into a prestigious programme that the family talks about constantly.",
];

const COMPLICATIONS: [&str; 11] = [
    "Nobody has asked how the change will affect the people who stayed late every evening to keep things running.",
    "An apology was offered, although it sounded rehearsed and arrived only after others had noticed the tension.",
    "Savings that were meant for a holiday may now have to cover unexpected costs instead.",
    "A colleague quietly admitted to taking credit for work that was shared between them.",
    "The decision was made without any discussion, and a short message was the only explanation given.",
    "Several friends have offered advice, but each suggestion seems to pull in a different direction.",
    "An old promise to help with the move now clashes with a deadline that cannot be postponed.",
    "A partner keeps insisting that everything will be fine while avoiding any concrete plan.",
    "The group chat has gone silent since the argument, and it is unclear who should speak first.",
    "A medical appointment brought reassuring news, yet it also revealed how long the worry had been ignored.",
    "An unexpected invitation arrived from someone who had not been in touch for years.",
];

const REACTIONS: [&str; 13] = [
    "Lying awake at night, the same conversation replays again and again with different endings.",
    "At work the smile stays in place, but the hands tremble slightly while typing replies.",
    "Small chores feel heavier than usual and the evenings disappear into scrolling without purpose.",
    "A journal entry written on Sunday was crossed out twice before being torn from the notebook.",
    "Friends have noticed a sharper tone in messages that used to be warm and playful.",
    "Every plan for the weekend is cancelled at the last minute with a vague excuse.",
    "Cooking elaborate meals has become a way to fill the quiet hours after work.",
    "A long walk by the river helped for an afternoon, but the knot in the stomach returned at dusk.",
    "Old photographs were taken out of a drawer, looked at for a long time, and then put away.",
    "An email draft explaining everything has been sitting unsent for three days.",
    "Laughter at a friend's joke came a moment too late and sounded forced even to themselves.",
    "Running an extra lap each morning feels like the only time the mind is truly quiet.",
    "A phone call from a parent was answered with short replies and ended abruptly.",
];

const EMOTION_PAIRS: [(&str, &str); 6] = [
    ("relief", "guilt"),
    ("anger", "hurt"),
    ("envy", "admiration"),
    ("love", "resentment"),
    ("shame", "defiance"),
    ("worry", "excitement"),
];

const CUES: [&str; 6] = [
    "the easing of pressure sits alongside an uneasy sense of having let someone down",
    "the sharp words hide how much the dismissal stung",
    "praise for the other person is mixed with a private wish to have what they have",
    "deep attachment coexists with a grudge about being taken for granted",
    "embarrassment about the situation is answered by a stubborn refusal to back down",
    "nervous anticipation about the outcome comes with genuine eagerness for the change",
];

const ACTIONS: [&str; 8] = [
    "Ask for a calm one-to-one conversation to explain how the decision affected them",
    "Write down the main concerns and bring them to a trusted friend for perspective",
    "Set a clear boundary about what help they can realistically offer this month",
    "Acknowledge the other person's feelings first and then share their own view",
    "Ignore the situation completely and hope it resolves itself over time",
    "Send an angry message to the whole group describing every past grievance",
    "Quit the commitment immediately without telling anyone the reason",
    "Pretend to agree with everyone while privately planning to withdraw",
];

/// Tokens cycled to build filler prose of an exact word count.
const PROSE: &str = "The client grew up in a small town and moved to the city for work after finishing school. \
Over the years the routine of long days and short evenings has left little room for friends or rest. \
Recently a conflict at home and pressure at work have started to overlap in ways that feel hard to untangle. \
There is a strong wish to keep everyone happy, but that wish now competes with a quieter need to be heard. \
Family expectations shape many decisions, and the fear of disappointing others makes every choice feel heavier. \
Despite this, moments of humour and kindness still appear, especially when talking about the people who matter most.";

/// Exactly `words` whitespace-separated words, varied by `seed`.
pub fn prose(seed: usize, words: usize) -> String {
    let tokens: Vec<&str> = PROSE.split_whitespace().collect();
    let start = (seed * 7) % tokens.len();
    (0..words)
        .map(|i| tokens[(start + i) % tokens.len()])
        .collect::<Vec<_>>()
        .join(" ")
}

fn scenario(n: usize) -> (String, &'static str) {
    let name = NAMES[n % NAMES.len()];
    let job = JOBS[n % JOBS.len()];
    let text = format!(
        "{name} is a {job} who has been in the same role for {} years. {} {} {} {name} keeps wondering what to do next and who to talk to about it.",
        3 + n % 17,
        OPENINGS[n % OPENINGS.len()],
        COMPLICATIONS[n % COMPLICATIONS.len()],
        REACTIONS[n % REACTIONS.len()],
    );
    (text, name)
}

/// A valid item document of `category`, varied by `n`.
pub fn item_document(category: Category, n: usize) -> Value {
    let (scenario, name) = scenario(n);
    let correct = AnswerLetter::from_index(n % 4).expect("index < 4");
    let shift = n % 4;
    let rotate = |mut v: Vec<String>| {
        v.rotate_right(shift);
        v
    };
    match category.dimension() {
        Dimension::Eu => {
            let pick = (n / 4) % EMOTION_PAIRS.len();
            let opts: Vec<String> = (0..4)
                .map(|k| {
                    let (a, b) = EMOTION_PAIRS[(pick + k) % EMOTION_PAIRS.len()];
                    format!("{a} mixed with {b}")
                })
                .collect();
            let (a, b) = EMOTION_PAIRS[pick];
            json!({
                "category": category.as_str(),
                "scenario": scenario,
                "question": format!("What is {name} most likely feeling right now?"),
                "options": rotate(opts),
                "correct_answer": correct.as_str(),
                "explanation": format!(
                    "The situation shows that {}. Both {a} and {b} are present at once, therefore {name} feels {a} mixed with {b}.",
                    CUES[pick]
                ),
                "emotion_labels": [a, b],
            })
        }
        Dimension::Ea => {
            let pick = (n / 4) % 4;
            let mut opts = vec![ACTIONS[pick].to_string()];
            opts.extend((0..3).map(|k| ACTIONS[4 + (pick + k) % 4].to_string()));
            json!({
                "category": category.as_str(),
                "scenario": scenario,
                "question": format!("What is the most effective response for {name}?"),
                "options": rotate(opts),
                "correct_answer": correct.as_str(),
                "explanation": format!(
                    "{name} needs to address the worry without damaging the relationship. The other choices escalate or avoid the problem, so the best response is to {}.",
                    ACTIONS[pick].to_lowercase()
                ),
                "emotion_labels": ["worry"],
            })
        }
    }
}

/// A validated item built from [`item_document`].
pub fn item(category: Category, n: usize) -> McqItem {
    crate::extraction::validate_document(&item_document(category, n), &EmotionTaxonomy::default())
        .expect("golden documents are valid")
}

/// `per_category` items for each of the eight categories, EU first, with
/// ids `fixture-{category}-{k}`.
pub fn balanced_items(per_category: usize) -> Vec<McqItem> {
    let mut out = Vec::new();
    for (c, category) in Category::ALL.iter().enumerate() {
        for k in 0..per_category {
            let mut it = item(*category, c * per_category + k);
            it.id = format!("fixture-{category}-{k}");
            out.push(it);
        }
    }
    out
}

/// How a scripted structured request behaves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ItemPlan {
    Valid,
    /// Unparseable first reply, valid after one retry.
    MalformedFirst,
    /// Invalid on every attempt; the item is rejected.
    AlwaysInvalid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictPlan {
    Pass,
    Fail,
    /// Malformed reply, then the verdict after one retry.
    MalformedThen(bool),
}

/// Scripted behaviour of one MADS dialogue.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DialoguePlan {
    /// Word count of each background draft, in request order.
    pub background_words: Vec<usize>,
    /// Supervisor verdicts in order. The dialogue stops at the first pass.
    pub verdicts: Vec<VerdictPlan>,
    pub eu: Vec<ItemPlan>,
    pub ea: Vec<ItemPlan>,
}

impl DialoguePlan {
    fn passes(v: &VerdictPlan) -> bool {
        matches!(v, VerdictPlan::Pass | VerdictPlan::MalformedThen(true))
    }

    /// Turns produced under the default limits (4..=14, cadence 2).
    pub fn turns(&self) -> usize {
        match self.verdicts.iter().position(Self::passes) {
            Some(k) => 4 + 2 * k,
            None => 14,
        }
    }

    pub fn valid_items(plans: &[ItemPlan]) -> usize {
        plans.iter().filter(|p| **p != ItemPlan::AlwaysInvalid).count()
    }
}

/// The five dialogues of the shipped MADS script: exits at 4, 8, never
/// (14), 6 and 10 turns, with a regenerated background, a malformed
/// verdict, and items that need a retry or are rejected outright.
pub fn golden_mads_plans() -> Vec<DialoguePlan> {
    use ItemPlan::*;
    use VerdictPlan::*;
    vec![
        DialoguePlan {
            background_words: vec![250],
            verdicts: vec![Pass],
            eu: vec![Valid; 4],
            ea: vec![Valid; 4],
        },
        DialoguePlan {
            background_words: vec![310],
            verdicts: vec![Fail, MalformedThen(false), Pass],
            eu: vec![MalformedFirst, Valid, Valid, Valid],
            ea: vec![Valid; 4],
        },
        DialoguePlan {
            background_words: vec![220],
            verdicts: vec![Fail; 6],
            eu: vec![Valid, AlwaysInvalid, Valid, Valid],
            ea: vec![Valid; 4],
        },
        DialoguePlan {
            background_words: vec![150, 280],
            verdicts: vec![Fail, Pass],
            eu: vec![Valid; 4],
            ea: vec![Valid, Valid, Valid, AlwaysInvalid],
        },
        DialoguePlan {
            background_words: vec![395],
            verdicts: vec![Fail, Fail, Fail, Pass],
            eu: vec![Valid; 4],
            ea: vec![Valid; 4],
        },
    ]
}

/// `n` plans cycling through [`golden_mads_plans`].
pub fn cycled_mads_plans(n: usize) -> Vec<DialoguePlan> {
    golden_mads_plans().into_iter().cycle().take(n).collect()
}

fn verdict_json(pass: bool) -> String {
    format!(
        r#"{{"scenario_established": true, "emotions_expressed": true, "causes_explored": {pass}, "dilemma_present": {pass}}}"#
    )
}

struct Recorder {
    entries: Vec<ScriptEntry>,
    counters: std::collections::BTreeMap<AgentRole, usize>,
    attempts: usize,
}

impl Recorder {
    fn new(max_retries: u32) -> Self {
        Self {
            entries: Vec::new(),
            counters: Default::default(),
            attempts: max_retries as usize + 1,
        }
    }

    fn push(&mut self, role: AgentRole, response: impl Into<String>) {
        let counter = self.counters.entry(role).or_insert(0);
        self.entries.push(ScriptEntry::new(role, *counter, response));
        *counter += 1;
    }

    fn item(&mut self, role: AgentRole, plan: ItemPlan, category: Category, n: usize) {
        let doc = item_document(category, n).to_string();
        match plan {
            ItemPlan::Valid => self.push(role, doc),
            ItemPlan::MalformedFirst => {
                self.push(role, "Here is the item: {\"scenario\": \"unfinished");
                self.push(role, format!("```json\n{doc}\n```"));
            }
            ItemPlan::AlwaysInvalid => {
                let mut bad = item_document(category, n);
                bad["options"] = json!(["only", "three", "options"]);
                for _ in 0..self.attempts {
                    self.push(role, bad.to_string());
                }
            }
        }
    }
}

fn client_line(d: usize, t: usize) -> String {
    format!(
        "Session {d}, message {t}: I keep going back to what happened and I am not sure how I feel about it anymore."
    )
}

fn therapist_line(d: usize, t: usize) -> String {
    format!("Session {d}, reply {t}: That sounds heavy. What part of it stays with you the most?")
}

/// Script for running `plans` in order through the MADS pipeline with
/// `max_retries` structured retries.
pub fn mads_script(plans: &[DialoguePlan], max_retries: u32) -> Vec<ScriptEntry> {
    let mut rec = Recorder::new(max_retries);
    for (d, plan) in plans.iter().enumerate() {
        for (k, words) in plan.background_words.iter().enumerate() {
            rec.push(AgentRole::Background, prose(d * 3 + k, *words));
        }
        let turns = plan.turns();
        for t in 0..turns / 2 {
            rec.push(AgentRole::Client, client_line(d, t));
            rec.push(AgentRole::Therapist, therapist_line(d, t));
        }
        let used = plan
            .verdicts
            .iter()
            .position(DialoguePlan::passes)
            .map_or(plan.verdicts.len(), |k| k + 1);
        for v in &plan.verdicts[..used] {
            match v {
                VerdictPlan::Pass => rec.push(AgentRole::Supervisor, verdict_json(true)),
                VerdictPlan::Fail => rec.push(AgentRole::Supervisor, verdict_json(false)),
                VerdictPlan::MalformedThen(pass) => {
                    rec.push(AgentRole::Supervisor, "The dialogue is progressing well.");
                    rec.push(AgentRole::Supervisor, verdict_json(*pass));
                }
            }
        }
        for (k, p) in plan.eu.iter().enumerate() {
            rec.item(AgentRole::EuExtractor, *p, Category::EU[(d + k) % 4], d * 8 + k);
        }
        for (k, p) in plan.ea.iter().enumerate() {
            rec.item(AgentRole::EaExtractor, *p, Category::EA[(d + k) % 4], d * 8 + 4 + k);
        }
    }
    rec.entries
}

/// Scripted behaviour of one concise session: the item plans are consumed
/// EU first, then EA.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConcisePlan {
    pub eu: Vec<ItemPlan>,
    pub ea: Vec<ItemPlan>,
}

impl ConcisePlan {
    pub fn all_valid(items_per_area: usize) -> Self {
        Self {
            eu: vec![ItemPlan::Valid; items_per_area],
            ea: vec![ItemPlan::Valid; items_per_area],
        }
    }
}

/// Script for concise sessions: one background, five client and five
/// therapist messages, then the item documents.
pub fn concise_script(plans: &[ConcisePlan], max_retries: u32) -> Vec<ScriptEntry> {
    let mut rec = Recorder::new(max_retries);
    for (s, plan) in plans.iter().enumerate() {
        rec.push(AgentRole::Background, prose(s * 5 + 1, 240 + (s * 13) % 120));
        for t in 0..5 {
            rec.push(AgentRole::Client, client_line(s, t));
            rec.push(AgentRole::Therapist, therapist_line(s, t));
        }
        let base = 1000 + s * 8;
        for (k, p) in plan.eu.iter().enumerate() {
            rec.item(AgentRole::ItemGenerator, *p, Category::EU[(s + k) % 4], base + k);
        }
        for (k, p) in plan.ea.iter().enumerate() {
            rec.item(AgentRole::ItemGenerator, *p, Category::EA[(s + k) % 4], base + 4 + k);
        }
    }
    rec.entries
}

/// A well-formed candidate answer.
pub fn answer_json(letter: AnswerLetter, reasoning: &str) -> String {
    json!({ "reasoning": reasoning, "answer": letter.as_str() }).to_string()
}

/// Candidate script answering every item with its gold letter.
pub fn eval_script(responses: impl IntoIterator<Item = String>) -> Vec<ScriptEntry> {
    responses
        .into_iter()
        .enumerate()
        .map(|(i, r)| ScriptEntry::new(AgentRole::Candidate, i, r))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extraction::{check_explanation_consistency, word_count, Consistency};

    #[test]
    fn prose_has_exact_length() {
        for n in [0, 1, 150, 250, 401] {
            assert_eq!(word_count(&prose(n, n)), n);
        }
    }

    #[test]
    fn generated_items_are_valid_and_consistent() {
        let t = EmotionTaxonomy::default();
        for (i, c) in Category::ALL.iter().cycle().take(200).enumerate() {
            let it = item(*c, i);
            assert_eq!(it.category, *c);
            assert_eq!(it.correct_answer.index(), i % 4);
            assert_eq!(check_explanation_consistency(&it, &t), Consistency::Consistent, "{i}");
        }
    }

    #[test]
    fn golden_plan_turns() {
        let turns: Vec<_> = golden_mads_plans().iter().map(DialoguePlan::turns).collect();
        assert_eq!(turns, [4, 8, 14, 6, 10]);
    }
}
