use emocot_core::dialogue::AgentContext;
use emocot_core::persona::{load_personas, load_themes, Persona};
use emocot_core::pipeline::{run_concise_batch, run_mads_batch};

use super::{gateway, prompts, schemas, write_json};
use crate::Run;

fn personas(run: &Run) -> anyhow::Result<Vec<Persona>> {
    let catalog = load_personas(&run.config.data.personas)?;
    for r in &catalog.rejected {
        tracing::warn!(file = %run.config.data.personas.display(), "persona rejected: {r}");
    }
    Ok(catalog.personas)
}

pub const CALLS_FILE: &str = "backend_calls.json";

/// Backend calls made by this invocation (a resumed run counts only its own).
fn record_calls(run: &Run, calls: usize) -> anyhow::Result<()> {
    write_json(&run.dir.join(CALLS_FILE), &serde_json::json!({ "backend_calls": calls }))
}

pub fn mads(run: &Run) -> anyhow::Result<()> {
    let c = &run.config;
    c.check_generation_paths()?;
    let personas = personas(run)?;
    let themes = load_themes(&c.data.themes)?;
    let (gateway, prompts, schemas, sampling) = (gateway(c)?, prompts(c)?, schemas(c)?, c.sampling());
    let ctx = AgentContext {
        gateway: &gateway,
        prompts: &prompts,
        schemas: &schemas,
        sampling: &sampling,
    };
    let summary = run_mads_batch(
        ctx,
        &personas,
        &themes,
        c.num,
        c.seed,
        &c.mads_config(),
        &run.dir,
        run.resumed,
    )?;
    record_calls(run, gateway.calls())?;
    let s = &summary.stats;
    tracing::info!(
        dialogues = s.dialogues,
        failed = s.failed,
        eu_items = s.eu_items,
        ea_items = s.ea_items,
        calls = gateway.calls(),
        "generation finished"
    );
    println!(
        "{} dialogues ({} failed), {} EU and {} EA items in {}",
        s.dialogues,
        s.failed,
        s.eu_items,
        s.ea_items,
        run.dir.display()
    );
    Ok(())
}

pub fn concise(run: &Run) -> anyhow::Result<()> {
    let c = &run.config;
    c.check_generation_paths()?;
    let personas = personas(run)?;
    let (gateway, prompts, schemas, sampling) = (gateway(c)?, prompts(c)?, schemas(c)?, c.sampling());
    let ctx = AgentContext {
        gateway: &gateway,
        prompts: &prompts,
        schemas: &schemas,
        sampling: &sampling,
    };
    let summary = run_concise_batch(
        ctx,
        &personas,
        c.num,
        c.seed,
        &c.concise_config(),
        &run.dir,
        run.resumed,
    )?;
    let s = &summary.stats;
    tracing::info!(
        sessions = s.sessions,
        failed = s.failed,
        calls = gateway.calls(),
        "generation finished"
    );
    record_calls(run, gateway.calls())?;
    println!(
        "{} sessions ({} failed), {} EU and {} EA items in {}",
        s.sessions,
        s.failed,
        s.eu_items,
        s.ea_items,
        run.dir.display()
    );
    Ok(())
}
