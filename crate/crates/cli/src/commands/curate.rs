//! normalize → validate → lint → dedup → balance.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::Args;
use emocot_core::curation::{
    dataset_stats, dedup_items, enforce_balance, lint_item, normalize_dialogue, AliasTable,
    BalanceDecision, BalanceState, DatasetReport, NormalizedDialogue, RawTurn,
};
use emocot_core::extraction::{validate_document, Category, Dimension, McqItem};
use serde::{Deserialize, Serialize};

use super::{read_input, taxonomy, write_json, write_lines};
use crate::Run;

pub const CURATED: &str = "curated.jsonl";
pub const KEPT_MANIFEST: &str = "kept.jsonl";
pub const DROPPED_MANIFEST: &str = "dropped.jsonl";
pub const NORMALIZED_DIALOGUES: &str = "normalized_dialogues.jsonl";
pub const REPORT: &str = "curation_report.json";

#[derive(Debug, Clone, Args)]
pub struct CurateArgs {
    /// Item JSONL files, processed in the order given.
    #[arg(long = "input", required = true)]
    pub inputs: Vec<PathBuf>,
    /// Raw dialogue JSONL (`{"id", "turns": [{"speaker", "text"}]}`) to normalize.
    #[arg(long)]
    pub dialogues: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Normalize,
    Parse,
    Validate,
    Lint,
    Dedup,
    Balance,
}

/// One line of `dropped.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dropped {
    pub source: String,
    pub line: usize,
    pub id: String,
    pub stage: Stage,
    pub reasons: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<Category>,
}

/// One line of `kept.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Kept {
    pub source: String,
    pub line: usize,
    pub id: String,
    pub category: Category,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurationReport {
    pub read: usize,
    pub kept: usize,
    pub dropped: BTreeMap<Stage, usize>,
    pub balance_rejections: BTreeMap<Category, usize>,
    pub dialogues_normalized: usize,
    pub dialogues_non_alternating: usize,
    pub turns_merged: usize,
    pub dataset: DatasetReport,
}

#[derive(Deserialize)]
struct RawDialogue {
    #[serde(default)]
    id: Option<String>,
    turns: Vec<RawTurn>,
}

#[derive(Serialize)]
struct NormalizedRecord<'a> {
    id: &'a str,
    #[serde(flatten)]
    dialogue: &'a NormalizedDialogue,
}

struct Candidate {
    source: String,
    line: usize,
    item: McqItem,
}

fn item_id(item: &McqItem, source: &str, line: usize) -> String {
    if item.id.is_empty() {
        format!("{source}:{line}")
    } else {
        item.id.clone()
    }
}

pub fn run(run: &Run, args: &CurateArgs) -> anyhow::Result<()> {
    let c = &run.config;
    let taxonomy = taxonomy(c)?;
    let mut dropped: Vec<Dropped> = Vec::new();
    let mut report = CurationReport {
        read: 0,
        kept: 0,
        dropped: BTreeMap::new(),
        balance_rejections: BTreeMap::new(),
        dialogues_normalized: 0,
        dialogues_non_alternating: 0,
        turns_merged: 0,
        dataset: DatasetReport::default(),
    };

    if let Some(path) = &args.dialogues {
        let text = read_input(path)?;
        let source = path.display().to_string();
        let aliases = AliasTable::default();
        let mut out = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let fallback = format!("{source}:{}", i + 1);
            let result = serde_json::from_str::<RawDialogue>(line)
                .map_err(|e| e.to_string())
                .and_then(|d| {
                    let id = d.id.unwrap_or_else(|| fallback.clone());
                    normalize_dialogue(&d.turns, &aliases, c.curation.redundancy_threshold)
                        .map(|n| (id.clone(), n))
                        .map_err(|e| format!("{id}: {e}"))
                });
            match result {
                Ok((id, n)) => {
                    report.dialogues_normalized += 1;
                    report.turns_merged += n.merged;
                    if n.non_alternating {
                        report.dialogues_non_alternating += 1;
                        tracing::warn!(dialogue = %id, "speakers do not alternate after merging");
                    }
                    out.push(serde_json::to_string(&NormalizedRecord { id: &id, dialogue: &n })?);
                }
                Err(reason) => dropped.push(Dropped {
                    source: source.clone(),
                    line: i + 1,
                    id: fallback,
                    stage: Stage::Normalize,
                    reasons: vec![reason],
                    category: None,
                }),
            }
        }
        write_lines(&run.dir.join(NORMALIZED_DIALOGUES), out)?;
    }

    let mut candidates = Vec::new();
    for path in &args.inputs {
        let text = read_input(path)?;
        let source = path.display().to_string();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            report.read += 1;
            let line_no = i + 1;
            let mut drop = |stage, id: String, reasons: Vec<String>, category| {
                dropped.push(Dropped {
                    source: source.clone(),
                    line: line_no,
                    id,
                    stage,
                    reasons,
                    category,
                })
            };
            let doc: serde_json::Value = match serde_json::from_str(line) {
                Ok(d) => d,
                Err(e) => {
                    drop(Stage::Parse, format!("{source}:{line_no}"), vec![e.to_string()], None);
                    continue;
                }
            };
            let item = match validate_document(&doc, &taxonomy) {
                Ok(item) => item,
                Err(violations) => {
                    let id = doc
                        .get("id")
                        .and_then(|v| v.as_str())
                        .map_or_else(|| format!("{source}:{line_no}"), str::to_string);
                    drop(
                        Stage::Validate,
                        id,
                        violations.iter().map(ToString::to_string).collect(),
                        None,
                    );
                    continue;
                }
            };
            let findings = lint_item(&item, &taxonomy);
            if !findings.is_empty() {
                drop(
                    Stage::Lint,
                    item_id(&item, &source, line_no),
                    findings.iter().map(ToString::to_string).collect(),
                    Some(item.category),
                );
                continue;
            }
            candidates.push(Candidate {
                source: source.clone(),
                line: line_no,
                item,
            });
        }
    }

    // Dedup keys on position, so carry provenance alongside by index.
    let mut positioned: Vec<McqItem> = Vec::with_capacity(candidates.len());
    for (k, cand) in candidates.iter().enumerate() {
        let mut it = cand.item.clone();
        it.id = k.to_string();
        positioned.push(it);
    }
    let outcome = dedup_items(positioned, c.curation.dedup_threshold);
    for d in &outcome.dropped {
        let cand = &candidates[d.id.parse::<usize>().expect("positional id")];
        let orig = &candidates[d.duplicate_of.parse::<usize>().expect("positional id")];
        dropped.push(Dropped {
            source: cand.source.clone(),
            line: cand.line,
            id: item_id(&cand.item, &cand.source, cand.line),
            stage: Stage::Dedup,
            reasons: vec![format!(
                "near duplicate of {} (normalized distance {:.4})",
                item_id(&orig.item, &orig.source, orig.line),
                d.normalized_distance
            )],
            category: Some(cand.item.category),
        });
    }

    let mut states: BTreeMap<Dimension, BalanceState> = BTreeMap::new();
    for dim in Dimension::ALL {
        states.insert(*dim, BalanceState::uniform(*dim, c.curation.balance_factor)?);
    }
    let mut kept_items = Vec::new();
    let mut kept_manifest = Vec::new();
    for it in &outcome.kept {
        let cand = &candidates[it.id.parse::<usize>().expect("positional id")];
        let state = states.get_mut(&it.dimension).expect("both dimensions");
        let id = item_id(&cand.item, &cand.source, cand.line);
        match enforce_balance(state, it.category)? {
            BalanceDecision::Accept => {
                kept_manifest.push(Kept {
                    source: cand.source.clone(),
                    line: cand.line,
                    id,
                    category: it.category,
                });
                kept_items.push(cand.item.clone());
            }
            BalanceDecision::Reject => {
                let share = (state.observed(it.category) + 1) as f64 / (state.total() + 1) as f64;
                tracing::info!(item = %id, category = %it.category, share, "rejected by balance");
                *report.balance_rejections.entry(it.category).or_insert(0) += 1;
                dropped.push(Dropped {
                    source: cand.source.clone(),
                    line: cand.line,
                    id,
                    stage: Stage::Balance,
                    reasons: vec![format!(
                        "category {} over-represented: {} of {} accepted",
                        it.category,
                        state.observed(it.category),
                        state.total()
                    )],
                    category: Some(it.category),
                });
            }
        }
    }

    dropped.sort_by(|a, b| (&a.source, a.line).cmp(&(&b.source, b.line)));
    for d in &dropped {
        *report.dropped.entry(d.stage).or_insert(0) += 1;
    }
    report.kept = kept_items.len();
    report.dataset = dataset_stats(&kept_items, &taxonomy, c.curation.dedup_threshold);

    write_lines(&run.dir.join(CURATED), kept_items.iter().map(McqItem::to_json_line))?;
    write_lines(
        &run.dir.join(KEPT_MANIFEST),
        kept_manifest.iter().map(|k| serde_json::to_string(k).expect("serializes")),
    )?;
    write_lines(
        &run.dir.join(DROPPED_MANIFEST),
        dropped.iter().map(|d| serde_json::to_string(d).expect("serializes")),
    )?;
    write_json(&run.dir.join(REPORT), &report)?;

    println!("{}", report.dataset.render_table());
    let stages: Vec<String> = report
        .dropped
        .iter()
        .map(|(s, n)| format!("{}: {n}", serde_json::to_value(s).expect("stage").as_str().unwrap_or("")))
        .collect();
    println!(
        "kept {} of {} items, {} dialogues normalized; dropped by stage: {}",
        report.kept,
        report.read,
        report.dialogues_normalized,
        stages.join(", ")
    );
    Ok(())
}
