use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use emocot_core::curation::{cohens_kappa, AgreementMatrix};
use serde_json::json;

use super::{read_input, write_json};
use crate::{Exit, Run};

pub const KAPPA_FILE: &str = "kappa.json";

#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
pub struct KappaArgs {
    /// Two-column CSV with a header row, one rated item per row.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Square count matrix, rows separated by `;`, e.g. `20,5;10,15`.
    #[arg(long)]
    pub matrix: Option<String>,
}

fn parse_matrix(text: &str) -> anyhow::Result<Vec<Vec<u64>>> {
    text.split(';')
        .map(|row| {
            row.split(',')
                .map(|n| n.trim().parse::<u64>())
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<_, _>>()
        .map_err(|e| Exit::usage(format!("bad --matrix {text:?}: {e}")))
}

pub fn run(run: &Run, args: &KappaArgs) -> anyhow::Result<()> {
    let matrix = match (&args.csv, &args.matrix) {
        (Some(path), _) => AgreementMatrix::from_csv(read_input(path)?.as_bytes())
            .with_context(|| format!("cannot read ratings from {}", path.display()))?,
        (None, Some(text)) => AgreementMatrix::from_counts(parse_matrix(text)?)
            .map_err(|e| Exit::usage(format!("bad --matrix: {e}")))?,
        (None, None) => unreachable!("clap requires one input"),
    };
    let kappa = cohens_kappa(&matrix)?;
    write_json(
        &run.dir.join(KAPPA_FILE),
        &json!({
            "kappa": kappa,
            "total": matrix.total(),
            "categories": matrix.categories,
            "counts": matrix.counts,
        }),
    )?;
    println!("kappa = {kappa:.6} over {} ratings", matrix.total());
    Ok(())
}
