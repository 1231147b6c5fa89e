//! Regenerates the deterministic files under `data/`.
//!
//! cargo run -p emocot-core --example write_data -- data

use std::fs;
use std::path::{Path, PathBuf};

use emocot_core::extraction::{Category, CORE_EMOTIONS, DEFAULT_EXTENSIONS};
use emocot_core::gateway::ScriptEntry;
use emocot_core::golden::{
    answer_json, concise_script, eval_script, golden_mads_plans, item, item_document, mads_script,
    prose, ConcisePlan,
};
use serde_json::{json, Value};

const MAX_RETRIES: u32 = 3;

fn write(path: PathBuf, text: String) {
    fs::create_dir_all(path.parent().unwrap()).unwrap();
    fs::write(&path, text).unwrap();
    println!("wrote {}", path.display());
}

fn jsonl<T: serde::Serialize>(rows: impl IntoIterator<Item = T>) -> String {
    rows.into_iter()
        .map(|r| serde_json::to_string(&r).unwrap() + "\n")
        .collect()
}

fn pretty<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).unwrap() + "\n"
}

fn script(entries: Vec<ScriptEntry>) -> String {
    pretty(&entries)
}

fn personas() -> Vec<Value> {
    let occupations = [
        "nurse", "secondary school teacher", "bus driver", "graphic designer", "pharmacist",
        "warehouse supervisor", "social worker", "chef", "software developer", "retired engineer",
    ];
    let cultures = [
        "Ghanaian", "Korean", "Brazilian", "Irish", "Indian", "Mexican", "Polish", "Nigerian",
        "Japanese", "Lebanese", "Filipino",
    ];
    let statuses = ["single", "partnered", "married", "divorced"];
    let dispositions = ["anxious", "optimistic", "skeptical", "empathetic", "guarded", "expressive"];
    let traits = [
        "meticulous, avoids confrontation",
        "quick to laugh, slow to ask for help",
        "fiercely loyal to family",
        "keeps a tight schedule and dislikes surprises",
        "",
    ];
    (0..30)
        .map(|i| {
            let mut p = json!({
                "id": format!("persona-{:03}", i + 1),
                "age": 19 + (i * 11) % 56,
                "occupation": occupations[i % occupations.len()],
                "relationship_status": statuses[(i / 2) % statuses.len()],
                "cultural_background": cultures[i % cultures.len()],
                "disposition": dispositions[(i * 5) % dispositions.len()],
                "traits": traits[i % traits.len()],
            });
            if i % 7 == 3 {
                p["source"] = json!("public-persona-corpus");
            }
            p
        })
        .collect()
}

fn themes() -> Value {
    json!([
        {"id": "workplace", "name": "workplace conflict", "description": "Tension with a manager or colleague over credit, workload or fairness."},
        {"id": "family", "name": "family expectations", "description": "Pressure from parents or siblings about career, marriage or caregiving."},
        {"id": "grief", "name": "grief and loss", "description": "Adjusting after a death, a breakup or the end of a long friendship.", "compatible_dispositions": ["anxious", "empathetic", "guarded", "expressive"]},
        {"id": "friendship", "name": "friendship strain", "description": "A close friend drifting away or a betrayal of trust."},
        {"id": "money", "name": "financial stress", "description": "Debt, rent increases or a partner's spending habits."},
        {"id": "identity", "name": "identity and belonging", "description": "Feeling caught between cultures or communities."},
        {"id": "health", "name": "health worries", "description": "A diagnosis, a chronic condition or a relative's illness.", "compatible_dispositions": ["anxious", "skeptical", "empathetic", "guarded"]},
        {"id": "change", "name": "major life change", "description": "Moving city, starting a new job or becoming a parent."}
    ])
}

fn adversarial() -> Vec<Value> {
    let base = |c: Category, n: usize| item_document(c, n);
    let with = |mut doc: Value, key: &str, v: Value| {
        doc[key] = v;
        doc
    };
    let without = |mut doc: Value, keys: &[&str]| {
        for k in keys {
            doc.as_object_mut().unwrap().remove(*k);
        }
        doc
    };
    let opts3 = json!(["to apologise", "to leave", "to wait"]);
    let opts5 = json!(["anger", "relief", "guilt", "envy", "love"]);
    let dup = json!(["relief mixed with guilt", "relief mixed with guilt", "anger mixed with hurt", "love mixed with resentment"]);
    let cases: Vec<(&str, Value, Vec<&str>)> = vec![
        ("missing question", without(base(Category::ComplexEmotions, 0), &["question"]), vec!["missing field: question"]),
        ("missing options", without(base(Category::EmotionalCues, 1), &["options"]), vec!["missing field: options"]),
        ("missing explanation and category", without(base(Category::PersonalSelf, 2), &["explanation", "category"]), vec!["missing field: explanation", "missing field: category"]),
        ("three options", with(base(Category::SocialSelf, 3), "options", opts3), vec!["options must have exactly 4 entries (got 3)"]),
        ("five options", with(base(Category::PerspectiveTaking, 4), "options", opts5), vec!["options must have exactly 4 entries (got 5)"]),
        ("letter E", with(base(Category::PersonalOthers, 5), "correct_answer", json!("E")), vec!["correct_answer must be one of A, B, C, D (got \"E\")"]),
        ("two letters", with(base(Category::SocialOthers, 6), "correct_answer", json!("AB")), vec!["correct_answer must be one of A, B, C, D (got \"AB\")"]),
        ("label outside taxonomy", with(base(Category::PersonalBeliefs, 7), "emotion_labels", json!(["relief", "hangry"])), vec!["emotion label not in taxonomy: hangry"]),
        ("49-word scenario", with(base(Category::ComplexEmotions, 8), "scenario", json!(prose(3, 49))), vec!["scenario too short (49 < 50)"]),
        ("501-word scenario", with(base(Category::SocialSelf, 9), "scenario", json!(prose(4, 501))), vec!["scenario too long (501 > 500)"]),
        (
            "three options, bad letter and short scenario",
            with(with(with(base(Category::PersonalSelf, 10), "options", json!(["wait", "leave", "talk"])), "correct_answer", json!("F")), "scenario", json!(prose(5, 49))),
            vec!["options must have exactly 4 entries (got 3)", "correct_answer must be one of A, B, C, D (got \"F\")", "scenario too short (49 < 50)"],
        ),
        ("unknown category", with(base(Category::EmotionalCues, 11), "category", json!("social_cues")), vec!["unknown category: social_cues"]),
        ("duplicate options", with(base(Category::PerspectiveTaking, 12), "options", dup), vec!["options must be distinct"]),
        ("empty explanation", with(base(Category::SocialOthers, 13), "explanation", json!("  ")), vec!["field explanation is empty"]),
        ("not an object", json!(["scenario", "question"]), vec!["document is not a JSON object"]),
        ("dimension mismatch", with(base(Category::ComplexEmotions, 14), "dimension", json!("EA")), vec!["category complex_emotions does not belong to dimension EA"]),
        ("clean, 50-word scenario", with(base(Category::PersonalBeliefs, 15), "scenario", json!(prose(6, 50))), vec![]),
        ("clean, 500-word scenario", with(base(Category::PersonalOthers, 16), "scenario", json!(prose(7, 500))), vec![]),
        ("clean EU", base(Category::EmotionalCues, 17), vec![]),
        ("clean EA", with(base(Category::SocialOthers, 18), "id", json!("clean-ea")), vec![]),
    ];
    cases
        .into_iter()
        .map(|(name, doc, expected)| json!({"name": name, "document": doc, "expected": expected}))
        .collect()
}

/// 40 items, five per subcategory.
fn scoring_items() -> Vec<emocot_core::extraction::McqItem> {
    let mut out = Vec::new();
    for (c, cat) in Category::ALL.iter().enumerate() {
        for k in 0..5 {
            let mut it = item(*cat, 200 + c * 5 + k);
            it.id = format!("score-{cat}-{k}");
            out.push(it);
        }
    }
    out
}

/// Correct answers per subcategory in the scripted pattern, in category order.
const PATTERN: [usize; 8] = [5, 4, 3, 2, 1, 0, 2, 3];

fn scoring_responses(items: &[emocot_core::extraction::McqItem]) -> Vec<String> {
    items
        .iter()
        .enumerate()
        .map(|(i, it)| {
            let (c, k) = (i / 5, i % 5);
            let gold = it.correct_answer;
            let wrong = emocot_core::extraction::AnswerLetter::from_index((gold.index() + 1) % 4).unwrap();
            if k < PATTERN[c] {
                match k % 3 {
                    0 => answer_json(gold, "The cues in the scenario point to this option."),
                    1 => format!("Let me think it through. The answer is {gold}."),
                    _ => format!("```json\n{}\n```", answer_json(gold, "Weighing each option.")),
                }
            } else if k % 2 == 0 {
                answer_json(wrong, "This seems closest.")
            } else {
                "I am not able to choose between these options.".to_string()
            }
        })
        .collect()
}

fn standin_items() -> Vec<emocot_core::extraction::McqItem> {
    (0..12)
        .map(|i| {
            let mut it = item(Category::ALL[i % 8], 500 + i);
            it.id = format!("standin-{:02}", i + 1);
            it
        })
        .collect()
}

fn curate_input() -> String {
    let mut lines = Vec::new();
    // round-robin over categories so the balance filter sees a mixed stream
    for k in 0..3 {
        for (c, cat) in Category::ALL.iter().enumerate() {
            let mut doc = item_document(*cat, 300 + c * 3 + k);
            doc["id"] = json!(format!("cur-{cat}-{k}"));
            lines.push(doc);
        }
    }
    // near-duplicate of the first item: one word changed
    let mut near = lines[0].clone();
    let s = near["scenario"].as_str().unwrap().replacen("wondering", "thinking", 1);
    near["scenario"] = json!(s);
    near["id"] = json!("cur-near-duplicate");
    lines.push(near);
    // an extra run of one category to exercise balancing
    for k in 3..9 {
        let mut doc = item_document(Category::PersonalSelf, 700 + k);
        doc["id"] = json!(format!("cur-Personal-Self-{k}"));
        lines.push(doc);
    }
    let mut bad = item_document(Category::SocialSelf, 900);
    bad["id"] = json!("cur-invalid");
    bad["correct_answer"] = json!("E");
    lines.push(bad);
    jsonl(lines)
}

fn raw_dialogues() -> String {
    let rows = vec![
        json!({"id": "raw-1", "turns": [
            {"speaker": "patient", "text": "I have not been sleeping since the move."},
            {"speaker": "counselor", "text": "That sounds exhausting. What keeps you awake?"},
            {"speaker": "patient", "text": "Mostly thinking about my sister."},
            {"speaker": "patient", "text": "Mostly thinking about my sister."},
            {"speaker": "Therapist", "text": "Tell me more about her."}
        ]}),
        json!({"id": "raw-2", "turns": [
            {"speaker": "user", "text": "Work has been hard."},
            {"speaker": "assistant", "text": "What has made it hard lately?"},
            {"speaker": "narrator", "text": "Later that evening."}
        ]}),
    ];
    jsonl(rows)
}

fn main() {
    let root = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "data".into()));
    let p = |rel: &str| -> PathBuf { Path::new(&root).join(rel) };

    write(p("personas.jsonl"), jsonl(personas()));
    write(p("themes.json"), pretty(&themes()));
    write(
        p("taxonomy.json"),
        pretty(&json!({"labels": CORE_EMOTIONS, "extensions": DEFAULT_EXTENSIONS})),
    );

    write(p("scripts/mads_golden.json"), script(mads_script(&golden_mads_plans(), MAX_RETRIES)));
    let concise = vec![ConcisePlan::all_valid(1); 25];
    write(p("scripts/concise_golden.json"), script(concise_script(&concise, MAX_RETRIES)));

    let scoring = scoring_items();
    write(p("fixtures/scoring_items.jsonl"), jsonl(&scoring));
    write(p("scripts/eval_scoring.json"), script(eval_script(scoring_responses(&scoring))));

    let standin = standin_items();
    write(p("emobench_standin.jsonl"), jsonl(&standin));
    let answers = standin.iter().enumerate().map(|(i, it)| {
        if i % 4 == 3 {
            "Hard to say.".to_string()
        } else {
            answer_json(it.correct_answer, "Reading the cues in the scenario.")
        }
    });
    write(p("scripts/eval_standin.json"), script(eval_script(answers)));

    write(p("fixtures/adversarial_items.jsonl"), jsonl(adversarial()));
    write(p("fixtures/curate_input.jsonl"), curate_input());
    write(p("fixtures/raw_dialogues.jsonl"), raw_dialogues());

    let mut csv = String::from("rater1,rater2\n");
    for (a, b, n) in [("valid", "valid", 20), ("valid", "invalid", 5), ("invalid", "valid", 10), ("invalid", "invalid", 15)] {
        for _ in 0..n {
            csv.push_str(&format!("{a},{b}\n"));
        }
    }
    write(p("fixtures/agreement.csv"), csv);
}
