use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::checkpoint::{Checkpoint, OutputFiles, CHECKPOINT_VERSION};
use super::{run_range, work_ranges, write_atomic, PipelineError};
use crate::dialogue::{
    generate_background, run_dialogue, AgentContext, Background, BackgroundPolicy, Dialogue,
    DialogueTurn, SupervisorVerdict, Termination, TurnLimits,
};
use crate::extraction::{
    extract_ea_items, extract_eu_items, CategoryCounts, Extraction, ExtractionConfig, McqItem,
    Pipeline,
};
use crate::gateway::GatewayError;
use crate::persona::{sample_pairs, Persona, Theme};

pub const MADS_FILES: [&str; 3] = ["eu_items.jsonl", "ea_items.jsonl", "metadata.jsonl"];
const EU_FILE: &str = MADS_FILES[0];
const EA_FILE: &str = MADS_FILES[1];
const METADATA_FILE: &str = MADS_FILES[2];
pub const STATS_FILE: &str = "stats.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MadsConfig {
    pub limits: TurnLimits,
    pub background: BackgroundPolicy,
    pub extraction: ExtractionConfig,
    pub checkpoint_every: usize,
    pub parallelism: usize,
}

impl Default for MadsConfig {
    fn default() -> Self {
        Self {
            limits: TurnLimits::default(),
            background: BackgroundPolicy::default(),
            extraction: ExtractionConfig::default(),
            checkpoint_every: 50,
            parallelism: 1,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MadsStats {
    pub requested: usize,
    pub dialogues: usize,
    pub failed: usize,
    pub failed_ids: Vec<String>,
    pub terminated_criteria_met: usize,
    pub terminated_max_turns: usize,
    /// Dialogue length (turns) -> count.
    pub turn_histogram: BTreeMap<usize, usize>,
    pub verdicts: usize,
    pub verdicts_defaulted: usize,
    pub backgrounds_flagged: usize,
    pub background_regenerations: usize,
    pub eu_items: usize,
    pub ea_items: usize,
    pub rejected_items: usize,
    pub under_extracted_eu: usize,
    pub under_extracted_ea: usize,
}

/// One line of `metadata.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DialogueRecord {
    pub dialogue_id: String,
    pub persona_id: String,
    pub theme_id: String,
    pub theme: String,
    pub conversation_length: usize,
    pub terminated_by: Termination,
    pub background: Background,
    pub verdicts: Vec<SupervisorVerdict>,
    pub eu_items: usize,
    pub ea_items: usize,
    pub rejected_items: usize,
    pub under_extracted_eu: bool,
    pub under_extracted_ea: bool,
    pub turns: Vec<DialogueTurn>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MadsSummary {
    pub run_dir: PathBuf,
    pub stats: MadsStats,
    pub category_counts: CategoryCounts,
    /// Checkpoints written by this invocation.
    pub checkpoints: Vec<PathBuf>,
}

#[derive(Serialize)]
struct StatsFile<'a> {
    pipeline: Pipeline,
    seed: u64,
    #[serde(flatten)]
    stats: &'a MadsStats,
    category_counts: &'a CategoryCounts,
}

struct Outcome {
    dialogue: Dialogue,
    eu: Extraction,
    ea: Extraction,
}

fn run_one(
    ctx: AgentContext<'_>,
    persona: &Persona,
    theme: &Theme,
    config: &MadsConfig,
) -> Result<Outcome, GatewayError> {
    let background = generate_background(ctx, persona, theme, &config.background)?;
    let dialogue = run_dialogue(ctx, persona, theme, background, &config.limits).map_err(|e| match e {
        crate::dialogue::DialogueError::Gateway(g) => g,
        other => GatewayError::Precondition(other.to_string()),
    })?;
    let eu = extract_eu_items(ctx, &dialogue, &config.extraction)?;
    let ea = extract_ea_items(ctx, &dialogue, &config.extraction)?;
    Ok(Outcome { dialogue, eu, ea })
}

fn with_ids(items: Vec<McqItem>, dialogue_id: &str, tag: &str) -> Vec<McqItem> {
    items
        .into_iter()
        .enumerate()
        .map(|(k, mut it)| {
            it.id = format!("{dialogue_id}-{tag}-{}", k + 1);
            it
        })
        .collect()
}

/// Generates `n` dialogues from seeded (persona, theme) pairs and extracts
/// items from each, writing outputs to `run_dir`.
///
/// With `resume`, continues from the latest checkpoint in `run_dir`: output
/// files are cut back to their checkpointed length and the backend cursor is
/// restored, so completed dialogues are never regenerated.
#[allow(clippy::too_many_arguments)]
pub fn run_mads_batch(
    ctx: AgentContext<'_>,
    personas: &[Persona],
    themes: &[Theme],
    n: usize,
    seed: u64,
    config: &MadsConfig,
    run_dir: &Path,
    resume: bool,
) -> Result<MadsSummary, PipelineError> {
    if config.checkpoint_every == 0 || config.parallelism == 0 {
        return Err(PipelineError::Config(
            "checkpoint_every and parallelism must be at least 1".into(),
        ));
    }
    config
        .limits
        .validate()
        .map_err(|e| PipelineError::Config(e.to_string()))?;
    let pairs = sample_pairs(personas, themes, n, seed)?;

    let previous = if resume {
        Checkpoint::<MadsStats>::latest(run_dir)?
    } else {
        None
    };
    let (files, mut completed_ids, mut counts, mut stats, start) = match previous {
        Some(cp) => {
            if cp.pipeline != Pipeline::Mads || cp.seed != seed {
                return Err(PipelineError::Checkpoint(format!(
                    "checkpoint is for pipeline {} with seed {}, not mads with seed {seed}",
                    cp.pipeline, cp.seed
                )));
            }
            if cp.completed > n {
                return Err(PipelineError::Checkpoint(format!(
                    "checkpoint has {} dialogues but only {n} were requested",
                    cp.completed
                )));
            }
            if let Some(cursor) = &cp.backend_cursor {
                ctx.gateway.restore_cursor(cursor)?;
            }
            tracing::info!(completed = cp.completed, "resuming from checkpoint");
            let files = OutputFiles::restore(run_dir, &MADS_FILES, &cp.partial_files)?;
            (files, cp.completed_ids, cp.category_counts, cp.stats, cp.completed)
        }
        None => {
            if resume {
                tracing::warn!("no checkpoint found; starting from the beginning");
            }
            let files = OutputFiles::create(run_dir, &MADS_FILES)?;
            (files, Vec::new(), CategoryCounts::default(), MadsStats::default(), 0)
        }
    };
    stats.requested = n;

    let mut checkpoints = Vec::new();
    for range in work_ranges(start, n, config.parallelism, config.checkpoint_every) {
        let results = run_range(range.clone(), |i| {
            let (persona, theme) = pairs[i];
            run_one(ctx, persona, theme, config)
        });
        let mut eu_lines = Vec::new();
        let mut ea_lines = Vec::new();
        let mut meta_lines = Vec::new();
        for (i, result) in range.clone().zip(results) {
            let id = format!("mads-{i:05}");
            completed_ids.push(id.clone());
            let outcome = match result {
                Ok(o) => o,
                Err(e) if e.is_fatal() => return Err(e.into()),
                Err(e) => {
                    tracing::warn!(dialogue = %id, error = %e, "dialogue discarded");
                    stats.failed += 1;
                    stats.failed_ids.push(id);
                    continue;
                }
            };
            let Outcome { dialogue, eu, ea } = outcome;
            let terminated_by = dialogue.terminated_by.expect("run_dialogue terminates");
            stats.dialogues += 1;
            match terminated_by {
                Termination::CriteriaMet => stats.terminated_criteria_met += 1,
                Termination::MaxTurns => stats.terminated_max_turns += 1,
            }
            *stats.turn_histogram.entry(dialogue.turns.len()).or_insert(0) += 1;
            stats.verdicts += dialogue.verdicts.len();
            stats.verdicts_defaulted += dialogue.verdicts.iter().filter(|v| v.defaulted).count();
            stats.backgrounds_flagged += usize::from(dialogue.background.flag.is_some());
            stats.background_regenerations += dialogue.background.attempts as usize - 1;
            stats.eu_items += eu.items.len();
            stats.ea_items += ea.items.len();
            stats.rejected_items += eu.rejected + ea.rejected;
            stats.under_extracted_eu += usize::from(eu.under_extracted);
            stats.under_extracted_ea += usize::from(ea.under_extracted);

            let eu_items = with_ids(eu.items, &id, "eu");
            let ea_items = with_ids(ea.items, &id, "ea");
            counts.record_all(eu_items.iter().chain(&ea_items));
            eu_lines.extend(eu_items.iter().map(McqItem::to_json_line));
            ea_lines.extend(ea_items.iter().map(McqItem::to_json_line));
            let record = DialogueRecord {
                dialogue_id: id,
                persona_id: dialogue.persona_id,
                theme_id: dialogue.theme_id,
                theme: dialogue.theme,
                conversation_length: dialogue.turns.len(),
                terminated_by,
                background: dialogue.background,
                verdicts: dialogue.verdicts,
                eu_items: eu_items.len(),
                ea_items: ea_items.len(),
                rejected_items: eu.rejected + ea.rejected,
                under_extracted_eu: eu.under_extracted,
                under_extracted_ea: ea.under_extracted,
                turns: dialogue.turns,
            };
            meta_lines.push(serde_json::to_string(&record).expect("record serializes"));
        }
        files.append_lines(EU_FILE, &eu_lines)?;
        files.append_lines(EA_FILE, &ea_lines)?;
        files.append_lines(METADATA_FILE, &meta_lines)?;

        let done = range.end;
        if done % config.checkpoint_every == 0 {
            let cp = Checkpoint {
                version: CHECKPOINT_VERSION,
                pipeline: Pipeline::Mads,
                seed,
                completed: done,
                completed_ids: completed_ids.clone(),
                profile_draws: 0,
                backend_cursor: ctx.gateway.cursor(),
                partial_files: files.lengths()?,
                category_counts: counts.clone(),
                stats: stats.clone(),
            };
            let path = cp.save(run_dir)?;
            tracing::info!(completed = done, path = %path.display(), "checkpoint written");
            checkpoints.push(path);
        }
    }

    let stats_file = StatsFile {
        pipeline: Pipeline::Mads,
        seed,
        stats: &stats,
        category_counts: &counts,
    };
    let mut bytes = serde_json::to_vec_pretty(&stats_file).expect("stats serialize");
    bytes.push(b'\n');
    write_atomic(&run_dir.join(STATS_FILE), &bytes)?;

    Ok(MadsSummary {
        run_dir: run_dir.to_path_buf(),
        stats,
        category_counts: counts,
        checkpoints,
    })
}
