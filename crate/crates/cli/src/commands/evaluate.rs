use std::path::PathBuf;

use clap::Args;
use emocot_core::eval::{evaluate_model, CategoryReport};
use serde::Serialize;

use super::{gateway, load_items, taxonomy, write_json, write_lines};
use crate::{Exit, Run, EXIT_ABORTED};

pub const REPORT_JSON: &str = "report.json";
pub const REPORT_TXT: &str = "report.txt";
pub const AUDIT: &str = "audit.jsonl";

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    /// Validated item JSONL to score.
    #[arg(long)]
    pub items: PathBuf,
    /// Model label in the report; defaults to the backend model name.
    #[arg(long)]
    pub model_id: Option<String>,
}

#[derive(Serialize)]
struct Report<'a> {
    #[serde(flatten)]
    report: &'a CategoryReport,
    backend_failures: usize,
    aborted: bool,
}

pub fn run(run: &Run, args: &EvaluateArgs) -> anyhow::Result<()> {
    let c = &run.config;
    let items = load_items(&args.items, &taxonomy(c)?)?;
    let gateway = gateway(c)?;
    let mut result = evaluate_model(&items, &gateway, &c.eval_config())?;
    result.report.model_id = args
        .model_id
        .clone()
        .unwrap_or_else(|| c.model_id().to_string());

    write_json(
        &run.dir.join(REPORT_JSON),
        &Report {
            report: &result.report,
            backend_failures: result.backend_failures,
            aborted: result.aborted,
        },
    )?;
    let table = result.report.render_table();
    std::fs::write(run.dir.join(REPORT_TXT), &table)?;
    write_lines(
        &run.dir.join(AUDIT),
        result
            .records
            .iter()
            .map(|r| serde_json::to_string(r).expect("serializes")),
    )?;
    print!("{table}");
    tracing::info!(
        items = result.report.items,
        parse_failures = result.report.parse_failures,
        backend_failures = result.backend_failures,
        "evaluation finished"
    );
    if result.aborted {
        return Err(Exit {
            code: EXIT_ABORTED,
            message: format!(
                "evaluation aborted after {} backend failures; partial report in {}",
                result.backend_failures,
                run.dir.display()
            ),
        }
        .into());
    }
    Ok(())
}
