pub mod curate;
pub mod evaluate;
pub mod generate;
pub mod kappa;
pub mod stats;

use std::fs;
use std::path::Path;

use anyhow::Context;
use emocot_core::extraction::{validate_document, EmotionTaxonomy, McqItem};
use emocot_core::gateway::{Gateway, SchemaRegistry};
use emocot_core::prompts::PromptSet;
use serde::Serialize;

use crate::config::RunConfig;
use crate::Exit;

pub fn taxonomy(config: &RunConfig) -> anyhow::Result<EmotionTaxonomy> {
    match &config.data.taxonomy {
        Some(path) => Ok(EmotionTaxonomy::load(path)?),
        None => Ok(EmotionTaxonomy::default()),
    }
}

pub fn prompts(config: &RunConfig) -> anyhow::Result<PromptSet> {
    match &config.data.prompts_dir {
        Some(dir) => PromptSet::with_overrides(dir)
            .with_context(|| format!("cannot read prompts from {}", dir.display())),
        None => Ok(PromptSet::default()),
    }
}

pub fn gateway(config: &RunConfig) -> anyhow::Result<Gateway> {
    Ok(Gateway::from_config(&config.backend_config())?)
}

pub fn schemas(config: &RunConfig) -> anyhow::Result<SchemaRegistry> {
    Ok(SchemaRegistry::new(taxonomy(config)?))
}

/// Reads an input file named on the command line; absence is a usage error.
pub fn read_input(path: &Path) -> anyhow::Result<String> {
    if !path.is_file() {
        return Err(Exit::usage(format!("input file not found: {}", path.display())));
    }
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

/// Validated items of a JSONL file; any invalid line is an error.
pub fn load_items(path: &Path, taxonomy: &EmotionTaxonomy) -> anyhow::Result<Vec<McqItem>> {
    let text = read_input(path)?;
    let mut items = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let doc: serde_json::Value = serde_json::from_str(line)
            .with_context(|| format!("{}:{}: not JSON", path.display(), i + 1))?;
        let item = validate_document(&doc, taxonomy).map_err(|v| {
            let msgs: Vec<String> = v.iter().map(ToString::to_string).collect();
            anyhow::anyhow!("{}:{}: {}", path.display(), i + 1, msgs.join("; "))
        })?;
        items.push(item);
    }
    Ok(items)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    fs::write(path, bytes).with_context(|| format!("cannot write {}", path.display()))
}

pub fn write_lines(path: &Path, lines: impl IntoIterator<Item = String>) -> anyhow::Result<()> {
    let mut text = String::new();
    for l in lines {
        text.push_str(&l);
        text.push('\n');
    }
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}
