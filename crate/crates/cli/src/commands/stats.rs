use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use emocot_core::curation::{dataset_stats, CategoryCountTable, DatasetReport};

use super::{load_items, read_input, taxonomy, write_json};
use crate::Run;

pub const STATS_REPORT: &str = "stats_report.json";

#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
pub struct StatsArgs {
    /// Item JSONL files to count.
    #[arg(long = "items")]
    pub items: Vec<PathBuf>,
    /// JSON table of per-category counts: `{"EU": {"complex_emotions": 382, ...}, "EA": {...}}`.
    #[arg(long)]
    pub counts: Option<PathBuf>,
}

pub fn run(run: &Run, args: &StatsArgs) -> anyhow::Result<()> {
    let c = &run.config;
    let report = match &args.counts {
        Some(path) => {
            let table: CategoryCountTable = serde_json::from_str(&read_input(path)?)
                .with_context(|| format!("invalid count table {}", path.display()))?;
            DatasetReport::from_counts(&table)?
        }
        None => {
            let taxonomy = taxonomy(c)?;
            let mut items = Vec::new();
            for path in &args.items {
                items.extend(load_items(path, &taxonomy)?);
            }
            dataset_stats(&items, &taxonomy, c.curation.dedup_threshold)
        }
    };
    write_json(&run.dir.join(STATS_REPORT), &report)?;
    print!("{}", report.render_table());
    Ok(())
}
