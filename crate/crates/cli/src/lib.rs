//! The `emocot` command line: generation, curation, statistics, agreement
//! and evaluation, each writing into its own run directory.

pub mod commands;
pub mod config;
pub mod logging;

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use config::{Overrides, RunConfig};

pub const CONFIG_SNAPSHOT: &str = "config.json";

/// Exit status for an evaluation stopped by the backend-failure limit.
pub const EXIT_ABORTED: u8 = 3;
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "emocot", version, about = "Emotional chain-of-thought data factory and EU/EA evaluation")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GlobalArgs {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Base URL of the OpenAI-compatible endpoint.
    #[arg(long, global = true)]
    pub backend_url: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Dialogues or personas to generate.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub num: Option<u64>,
    /// Continue the run in this directory from its latest checkpoint.
    #[arg(long, global = true, value_name = "RUN_DIR")]
    pub resume: Option<PathBuf>,
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub parallelism: Option<u64>,
    #[arg(long, global = true)]
    pub output_dir: Option<PathBuf>,
    /// Use the scripted backend with this script file.
    #[arg(long, global = true)]
    pub script: Option<PathBuf>,
    /// Run directory name; defaults to `<command>-<timestamp>-seed<seed>`.
    #[arg(long, global = true)]
    pub run_name: Option<String>,
    #[arg(long, short, global = true)]
    pub verbose: bool,
}

impl GlobalArgs {
    pub fn overrides(&self) -> Overrides {
        Overrides {
            backend_url: self.backend_url.clone(),
            seed: self.seed,
            num: self.num.map(|n| n as usize),
            parallelism: self.parallelism.map(|n| n as usize),
            output_dir: self.output_dir.clone(),
            script: self.script.clone(),
            run_name: self.run_name.clone(),
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Multi-agent dialogue generation with item extraction.
    GenerateMads,
    /// Single-pass attribute-conditioned generation.
    GenerateConcise,
    /// Normalize, validate, lint, deduplicate and balance item files.
    Curate(commands::curate::CurateArgs),
    /// Score a model on an items file.
    Evaluate(commands::evaluate::EvaluateArgs),
    /// Dataset statistics from items or from a stored count table.
    Stats(commands::stats::StatsArgs),
    /// Cohen's kappa for two raters.
    Kappa(commands::kappa::KappaArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::GenerateMads => "generate-mads",
            Command::GenerateConcise => "generate-concise",
            Command::Curate(_) => "curate",
            Command::Evaluate(_) => "evaluate",
            Command::Stats(_) => "stats",
            Command::Kappa(_) => "kappa",
        }
    }
}

/// Error with a dedicated exit status.
#[derive(Debug)]
pub struct Exit {
    pub code: u8,
    pub message: String,
}

impl Exit {
    pub fn usage(message: impl Into<String>) -> anyhow::Error {
        Exit {
            code: EXIT_USAGE,
            message: message.into(),
        }
        .into()
    }
}

impl fmt::Display for Exit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Exit {}

pub fn exit_code(err: &anyhow::Error) -> u8 {
    err.downcast_ref::<Exit>().map_or(1, |e| e.code)
}

/// Resolved configuration and the directory this invocation writes to.
#[derive(Debug, Clone)]
pub struct Run {
    pub config: RunConfig,
    pub dir: PathBuf,
    pub resumed: bool,
}

fn absolutize(config: &mut RunConfig) -> anyhow::Result<()> {
    let abs = |p: &mut PathBuf| -> anyhow::Result<()> {
        *p = std::path::absolute(&*p).with_context(|| format!("bad path {}", p.display()))?;
        Ok(())
    };
    abs(&mut config.output_dir)?;
    abs(&mut config.data.personas)?;
    abs(&mut config.data.themes)?;
    for p in [
        &mut config.backend.script,
        &mut config.data.taxonomy,
        &mut config.data.prompts_dir,
    ]
    .into_iter()
    .flatten()
    {
        abs(p)?;
    }
    Ok(())
}

fn run_dir_name(command: &str, config: &RunConfig) -> String {
    match &config.run_name {
        Some(name) => name.clone(),
        None => format!(
            "{command}-{}-seed{}",
            chrono::Local::now().format("%Y%m%d-%H%M%S"),
            config.seed
        ),
    }
}

/// Builds the configuration for `command` and prepares its run directory:
/// config snapshot written, log file attached, stale checkpoints removed.
pub fn prepare_run(
    global: &GlobalArgs,
    command: &str,
    env: impl Fn(&str) -> Option<String>,
) -> anyhow::Result<Run> {
    let base = if let Some(dir) = &global.resume {
        let path = dir.join(CONFIG_SNAPSHOT);
        let text = std::fs::read_to_string(&path)
            .map_err(|e| Exit::usage(format!("cannot resume from {}: {e}", dir.display())))?;
        serde_json::from_str(&text).with_context(|| format!("invalid {}", path.display()))?
    } else if let Some(path) = &global.config {
        RunConfig::load(path)?
    } else {
        RunConfig::default()
    };
    let mut config = RunConfig::resolve(base, env, &global.overrides())?;
    config.check().map_err(|e| Exit::usage(format!("{e:#}")))?;
    absolutize(&mut config)?;

    let (dir, resumed) = match &global.resume {
        Some(dir) => (dir.clone(), true),
        None => {
            let name = run_dir_name(command, &config);
            let mut dir = config.output_dir.join(&name);
            if config.run_name.is_none() {
                let mut k = 2;
                while dir.exists() {
                    dir = config.output_dir.join(format!("{name}-{k}"));
                    k += 1;
                }
            }
            (dir, false)
        }
    };
    std::fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
    if !resumed {
        clear_checkpoints(&dir)?;
        let mut snapshot = serde_json::to_vec_pretty(&config)?;
        snapshot.push(b'\n');
        std::fs::write(dir.join(CONFIG_SNAPSHOT), snapshot)?;
    }
    logging::attach(&dir, resumed)?;
    tracing::info!(command, dir = %dir.display(), resumed, "run directory ready");
    Ok(Run {
        config,
        dir,
        resumed,
    })
}

fn clear_checkpoints(dir: &Path) -> anyhow::Result<()> {
    let cps = dir.join(emocot_core::pipeline::CHECKPOINT_DIR);
    if cps.is_dir() {
        std::fs::remove_dir_all(&cps)?;
    }
    let latest = dir.join(emocot_core::pipeline::LATEST_CHECKPOINT);
    if latest.is_file() {
        std::fs::remove_file(latest)?;
    }
    Ok(())
}

pub fn run(cli: &Cli) -> anyhow::Result<()> {
    let name = cli.command.name();
    let generating = matches!(cli.command, Command::GenerateMads | Command::GenerateConcise);
    if cli.global.resume.is_some() && !generating {
        return Err(Exit::usage(format!("--resume does not apply to {name}")));
    }
    let run = prepare_run(&cli.global, name, |k| std::env::var(k).ok())?;
    let result = match &cli.command {
        Command::GenerateMads => commands::generate::mads(&run),
        Command::GenerateConcise => commands::generate::concise(&run),
        Command::Curate(args) => commands::curate::run(&run, args),
        Command::Evaluate(args) => commands::evaluate::run(&run, args),
        Command::Stats(args) => commands::stats::run(&run, args),
        Command::Kappa(args) => commands::kappa::run(&run, args),
    };
    if let Err(e) = &result {
        tracing::error!("{e:#}");
    }
    result
}
