use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::checkpoint::{io_err, Checkpoint, OutputFiles, CHECKPOINT_VERSION};
use super::{run_range, work_ranges, write_atomic, PipelineError};
use crate::concise::{run_concise, ConciseConfig, ConciseError};
use crate::dialogue::AgentContext;
use crate::extraction::{CategoryCounts, Dimension, McqItem, Pipeline};
use crate::persona::{sample_personas, AttributeProfile, Persona, ProfileSampler};

pub const CONCISE_PARTIAL_FILES: [&str; 2] = ["items_partial.jsonl", "personas_partial.jsonl"];
const ITEMS_PARTIAL: &str = CONCISE_PARTIAL_FILES[0];
const PERSONAS_PARTIAL: &str = CONCISE_PARTIAL_FILES[1];
pub const PERSONAS_FINAL: &str = "personas_final.json";
pub const ITEMS_FINAL: &str = "items_final.jsonl";
pub const SUMMARY_FILE: &str = "summary.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConciseBatchConfig {
    pub session: ConciseConfig,
    pub checkpoint_every: usize,
    pub parallelism: usize,
}

impl Default for ConciseBatchConfig {
    fn default() -> Self {
        Self {
            session: ConciseConfig::default(),
            checkpoint_every: 10,
            parallelism: 1,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConciseStats {
    pub requested: usize,
    pub sampled: usize,
    pub sessions: usize,
    pub failed: usize,
    pub failed_ids: Vec<String>,
    pub eu_items: usize,
    pub ea_items: usize,
    pub rejected_items: usize,
    pub backgrounds_flagged: usize,
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub pipeline: Pipeline,
    pub seed: u64,
    /// Output paths relative to the run directory.
    pub paths: BTreeMap<String, String>,
    pub stats: ConciseStats,
    pub category_distribution: CategoryCounts,
    pub checkpoints: Vec<String>,
}

/// One line of `personas_partial.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct PersonaRecord {
    index: usize,
    persona: Persona,
    profile: AttributeProfile,
    completed: bool,
    items: usize,
    rejected_items: usize,
}

#[derive(Serialize)]
struct FinalPersona<'a> {
    persona: &'a Persona,
    profile: &'a AttributeProfile,
}

/// Runs one concise session for each of `min(n, |personas|)` seeded
/// personas, checkpointing every `checkpoint_every` personas, then writes
/// `personas_final.json`, `items_final.jsonl` and `summary.json`.
#[allow(clippy::too_many_arguments)]
pub fn run_concise_batch(
    ctx: AgentContext<'_>,
    personas: &[Persona],
    n: usize,
    seed: u64,
    config: &ConciseBatchConfig,
    run_dir: &Path,
    resume: bool,
) -> Result<BatchSummary, PipelineError> {
    if n == 0 {
        return Err(PipelineError::Config("sample count must be at least 1".into()));
    }
    if config.checkpoint_every == 0 || config.parallelism == 0 {
        return Err(PipelineError::Config(
            "checkpoint_every and parallelism must be at least 1".into(),
        ));
    }
    let chosen = sample_personas(personas, n, seed);
    let total = chosen.len();
    let sampler = ProfileSampler::new(seed);

    let previous = if resume {
        Checkpoint::<ConciseStats>::latest(run_dir)?
    } else {
        None
    };
    let (files, mut completed_ids, mut counts, mut stats, start) = match previous {
        Some(cp) => {
            if cp.pipeline != Pipeline::Concise || cp.seed != seed {
                return Err(PipelineError::Checkpoint(format!(
                    "checkpoint is for pipeline {} with seed {}, not concise with seed {seed}",
                    cp.pipeline, cp.seed
                )));
            }
            if cp.completed > total {
                return Err(PipelineError::Checkpoint(format!(
                    "checkpoint has {} sessions but only {total} personas were sampled",
                    cp.completed
                )));
            }
            let expected: Vec<&str> = chosen[..cp.completed].iter().map(|p| p.id.as_str()).collect();
            if cp.completed_ids != expected {
                return Err(PipelineError::Checkpoint(
                    "completed personas do not match the seeded sample".into(),
                ));
            }
            if let Some(cursor) = &cp.backend_cursor {
                ctx.gateway.restore_cursor(cursor)?;
            }
            tracing::info!(completed = cp.completed, "resuming from checkpoint");
            let files = OutputFiles::restore(run_dir, &CONCISE_PARTIAL_FILES, &cp.partial_files)?;
            (files, cp.completed_ids, cp.category_counts, cp.stats, cp.completed)
        }
        None => {
            if resume {
                tracing::warn!("no checkpoint found; starting from the beginning");
            }
            let files = OutputFiles::create(run_dir, &CONCISE_PARTIAL_FILES)?;
            (files, Vec::new(), CategoryCounts::default(), ConciseStats::default(), 0)
        }
    };
    stats.requested = n;
    stats.sampled = total;

    let mut checkpoints = Vec::new();
    for range in work_ranges(start, total, config.parallelism, config.checkpoint_every) {
        let results = run_range(range.clone(), |i| {
            let profile = sampler.sample(i);
            run_concise(ctx, chosen[i], Some(&profile), &config.session).map(|s| (profile, s))
        });
        let mut item_lines = Vec::new();
        let mut persona_lines = Vec::new();
        for (i, result) in range.clone().zip(results) {
            let persona = chosen[i];
            completed_ids.push(persona.id.clone());
            let record = match result {
                Ok((profile, session)) => {
                    stats.sessions += 1;
                    stats.rejected_items += session.rejected_items;
                    stats.backgrounds_flagged += usize::from(session.background.flag.is_some());
                    let items: Vec<McqItem> = session
                        .items
                        .into_iter()
                        .enumerate()
                        .map(|(k, mut it)| {
                            it.id = format!("concise-{i:05}-{}", k + 1);
                            it
                        })
                        .collect();
                    for it in &items {
                        match it.dimension {
                            Dimension::Eu => stats.eu_items += 1,
                            Dimension::Ea => stats.ea_items += 1,
                        }
                    }
                    counts.record_all(&items);
                    item_lines.extend(items.iter().map(McqItem::to_json_line));
                    PersonaRecord {
                        index: i,
                        persona: persona.clone(),
                        profile,
                        completed: true,
                        items: items.len(),
                        rejected_items: session.rejected_items,
                    }
                }
                Err(ConciseError::Gateway(e)) if e.is_fatal() => return Err(e.into()),
                Err(e) => {
                    tracing::warn!(persona = %persona.id, error = %e, "session discarded");
                    stats.failed += 1;
                    stats.failed_ids.push(persona.id.clone());
                    PersonaRecord {
                        index: i,
                        persona: persona.clone(),
                        profile: sampler.sample(i),
                        completed: false,
                        items: 0,
                        rejected_items: 0,
                    }
                }
            };
            persona_lines.push(serde_json::to_string(&record).expect("record serializes"));
        }
        files.append_lines(ITEMS_PARTIAL, &item_lines)?;
        files.append_lines(PERSONAS_PARTIAL, &persona_lines)?;

        let done = range.end;
        if done % config.checkpoint_every == 0 {
            let cp = Checkpoint {
                version: CHECKPOINT_VERSION,
                pipeline: Pipeline::Concise,
                seed,
                completed: done,
                completed_ids: completed_ids.clone(),
                profile_draws: done,
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

    // Finals are rebuilt from the partial files so that resumed and
    // uninterrupted runs produce the same bytes.
    let partial_personas = files.path(PERSONAS_PARTIAL);
    let text = fs::read_to_string(&partial_personas).map_err(io_err(&partial_personas))?;
    let records: Vec<PersonaRecord> = text
        .lines()
        .map(serde_json::from_str)
        .collect::<Result<_, _>>()
        .map_err(|e| PipelineError::Checkpoint(format!("{}: {e}", partial_personas.display())))?;
    let finals: Vec<FinalPersona> = records
        .iter()
        .filter(|r| r.completed)
        .map(|r| FinalPersona {
            persona: &r.persona,
            profile: &r.profile,
        })
        .collect();
    let mut bytes = serde_json::to_vec_pretty(&finals).expect("personas serialize");
    bytes.push(b'\n');
    write_atomic(&run_dir.join(PERSONAS_FINAL), &bytes)?;

    let partial_items = files.path(ITEMS_PARTIAL);
    let items = fs::read(&partial_items).map_err(io_err(&partial_items))?;
    write_atomic(&run_dir.join(ITEMS_FINAL), &items)?;

    let rel = |p: &PathBuf| {
        p.strip_prefix(run_dir)
            .unwrap_or(p)
            .display()
            .to_string()
    };
    let summary = BatchSummary {
        pipeline: Pipeline::Concise,
        seed,
        paths: [
            ("personas", PERSONAS_FINAL),
            ("items", ITEMS_FINAL),
            ("summary", SUMMARY_FILE),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect(),
        stats,
        category_distribution: counts,
        checkpoints: checkpoints.iter().map(rel).collect(),
    };
    let mut bytes = serde_json::to_vec_pretty(&summary).expect("summary serializes");
    bytes.push(b'\n');
    write_atomic(&run_dir.join(SUMMARY_FILE), &bytes)?;
    Ok(summary)
}
