//! Run configuration: TOML file, environment and flag layers.
//!
//! Precedence, highest first: command-line flags, `EMOCOT_*` environment
//! variables, the config file, built-in defaults. Relative paths in a
//! config file are resolved against the file's directory.

use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context};
use emocot_core::concise::ConciseConfig;
use emocot_core::curation::{
    DEFAULT_BALANCE_FACTOR, DEFAULT_DEDUP_THRESHOLD, DEFAULT_REDUNDANCY_THRESHOLD,
};
use emocot_core::dialogue::{BackgroundPolicy, TurnLimits};
use emocot_core::eval::EvalConfig;
use emocot_core::extraction::ExtractionConfig;
use emocot_core::gateway::{BackendConfig, BackendKind, SamplingParams};
use emocot_core::pipeline::{ConciseBatchConfig, MadsConfig};
use serde::{Deserialize, Serialize};

pub const ENV_BACKEND_URL: &str = "EMOCOT_BACKEND_URL";
pub const ENV_SEED: &str = "EMOCOT_SEED";
pub const ENV_NUM: &str = "EMOCOT_NUM";
pub const ENV_PARALLELISM: &str = "EMOCOT_PARALLELISM";
pub const ENV_OUTPUT_DIR: &str = "EMOCOT_OUTPUT_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    /// Dialogues (MADS) or personas (concise) to generate.
    pub num: usize,
    pub parallelism: usize,
    pub output_dir: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub run_name: Option<String>,
    pub backend: BackendSection,
    pub data: DataSection,
    pub mads: MadsSection,
    pub concise: ConciseSection,
    pub curation: CurationSection,
    pub eval: EvalSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackendSection {
    pub kind: BackendKind,
    pub base_url: String,
    pub model: String,
    /// Name of the environment variable that holds the API key.
    pub api_key_env: String,
    pub timeout_secs: f64,
    pub max_retries: u32,
    pub retry_backoff_ms: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub script: Option<PathBuf>,
    pub temperature: f32,
    pub max_tokens: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSection {
    pub personas: PathBuf,
    pub themes: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub taxonomy: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prompts_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MadsSection {
    pub min_turns: usize,
    pub max_turns: usize,
    pub supervisor_cadence: usize,
    pub items_per_dialogue: usize,
    pub min_items: usize,
    pub checkpoint_every: usize,
    pub background_min_words: usize,
    pub background_max_words: usize,
    pub background_regenerations: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConciseSection {
    pub items_per_area: usize,
    pub checkpoint_every: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurationSection {
    pub dedup_threshold: f64,
    pub balance_factor: f64,
    pub redundancy_threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    /// Label for the evaluated model in reports; defaults to `backend.model`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model_id: Option<String>,
    pub temperature: f32,
    pub max_failure_fraction: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            num: 5,
            parallelism: 1,
            output_dir: PathBuf::from("runs"),
            run_name: None,
            backend: BackendSection::default(),
            data: DataSection::default(),
            mads: MadsSection::default(),
            concise: ConciseSection::default(),
            curation: CurationSection::default(),
            eval: EvalSection::default(),
        }
    }
}

impl Default for BackendSection {
    fn default() -> Self {
        let b = BackendConfig::default();
        let s = SamplingParams::default();
        Self {
            kind: b.kind,
            base_url: b.base_url,
            model: s.model,
            api_key_env: b.api_key_env,
            timeout_secs: b.timeout.as_secs_f64(),
            max_retries: b.max_retries,
            retry_backoff_ms: b.retry_backoff.as_millis() as u64,
            script: None,
            temperature: s.temperature,
            max_tokens: s.max_tokens,
        }
    }
}

impl Default for DataSection {
    fn default() -> Self {
        Self {
            personas: PathBuf::from("data/personas.jsonl"),
            themes: PathBuf::from("data/themes.json"),
            taxonomy: None,
            prompts_dir: None,
        }
    }
}

impl Default for MadsSection {
    fn default() -> Self {
        let m = MadsConfig::default();
        Self {
            min_turns: m.limits.min_turns,
            max_turns: m.limits.max_turns,
            supervisor_cadence: m.limits.supervisor_cadence,
            items_per_dialogue: m.extraction.items_per_dialogue,
            min_items: m.extraction.min_items,
            checkpoint_every: m.checkpoint_every,
            background_min_words: m.background.min_words,
            background_max_words: m.background.max_words,
            background_regenerations: m.background.max_regenerations,
        }
    }
}

impl Default for ConciseSection {
    fn default() -> Self {
        let c = ConciseBatchConfig::default();
        Self {
            items_per_area: c.session.items_per_area,
            checkpoint_every: c.checkpoint_every,
        }
    }
}

impl Default for CurationSection {
    fn default() -> Self {
        Self {
            dedup_threshold: DEFAULT_DEDUP_THRESHOLD,
            balance_factor: DEFAULT_BALANCE_FACTOR,
            redundancy_threshold: DEFAULT_REDUNDANCY_THRESHOLD,
        }
    }
}

impl Default for EvalSection {
    fn default() -> Self {
        let e = EvalConfig::default();
        Self {
            model_id: None,
            temperature: e.sampling.temperature,
            max_failure_fraction: e.max_failure_fraction,
        }
    }
}

/// Values given on the command line. `None` leaves lower layers in effect.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub backend_url: Option<String>,
    pub seed: Option<u64>,
    pub num: Option<usize>,
    pub parallelism: Option<usize>,
    pub output_dir: Option<PathBuf>,
    pub script: Option<PathBuf>,
    pub run_name: Option<String>,
}

impl RunConfig {
    /// Parses a TOML config, resolving relative paths against `base`.
    pub fn from_toml(text: &str, base: &Path) -> anyhow::Result<Self> {
        let mut config: RunConfig = toml::from_str(text)?;
        config.rebase(base);
        Ok(config)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        Self::from_toml(&text, base).with_context(|| format!("invalid config {}", path.display()))
    }

    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.output_dir);
        fix(&mut self.data.personas);
        fix(&mut self.data.themes);
        for p in [
            &mut self.backend.script,
            &mut self.data.taxonomy,
            &mut self.data.prompts_dir,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
    }

    /// Applies `EMOCOT_*` variables read through `env`.
    pub fn apply_env(&mut self, env: impl Fn(&str) -> Option<String>) -> anyhow::Result<()> {
        if let Some(v) = env(ENV_BACKEND_URL) {
            self.backend.base_url = v;
        }
        if let Some(v) = env(ENV_SEED) {
            self.seed = v.parse().with_context(|| format!("{ENV_SEED}={v:?}"))?;
        }
        if let Some(v) = env(ENV_NUM) {
            self.num = v.parse().with_context(|| format!("{ENV_NUM}={v:?}"))?;
        }
        if let Some(v) = env(ENV_PARALLELISM) {
            self.parallelism = v.parse().with_context(|| format!("{ENV_PARALLELISM}={v:?}"))?;
        }
        if let Some(v) = env(ENV_OUTPUT_DIR) {
            self.output_dir = PathBuf::from(v);
        }
        Ok(())
    }

    pub fn apply_overrides(&mut self, o: &Overrides) {
        if let Some(v) = &o.backend_url {
            self.backend.base_url = v.clone();
        }
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if let Some(v) = o.num {
            self.num = v;
        }
        if let Some(v) = o.parallelism {
            self.parallelism = v;
        }
        if let Some(v) = &o.output_dir {
            self.output_dir = v.clone();
        }
        if let Some(v) = &o.script {
            self.backend.script = Some(v.clone());
            self.backend.kind = BackendKind::Scripted;
        }
        if let Some(v) = &o.run_name {
            self.run_name = Some(v.clone());
        }
    }

    /// Layers `base` (config file or defaults), environment and flags.
    pub fn resolve(
        base: RunConfig,
        env: impl Fn(&str) -> Option<String>,
        flags: &Overrides,
    ) -> anyhow::Result<Self> {
        let mut config = base;
        config.apply_env(env)?;
        config.apply_overrides(flags);
        Ok(config)
    }

    /// Structural checks that do not touch the filesystem.
    pub fn check(&self) -> anyhow::Result<()> {
        if self.parallelism == 0 {
            bail!("parallelism must be at least 1");
        }
        if self.num == 0 {
            bail!("num must be at least 1");
        }
        if self.mads.checkpoint_every == 0 || self.concise.checkpoint_every == 0 {
            bail!("checkpoint intervals must be at least 1");
        }
        self.turn_limits().validate()?;
        let t = self.curation.dedup_threshold;
        if !(t > 0.0 && t < 1.0) {
            bail!("dedup_threshold must be in (0, 1), got {t}");
        }
        if self.curation.balance_factor <= 1.0 {
            bail!("balance_factor must exceed 1");
        }
        if self.backend.kind == BackendKind::Scripted && self.backend.script.is_none() {
            bail!("the scripted backend needs backend.script (or --script)");
        }
        Ok(())
    }

    /// Every path the generation commands read must exist.
    pub fn check_generation_paths(&self) -> anyhow::Result<()> {
        let mut paths = vec![&self.data.personas, &self.data.themes];
        paths.extend(self.data.taxonomy.iter());
        paths.extend(self.data.prompts_dir.iter());
        if self.backend.kind == BackendKind::Scripted {
            paths.extend(self.backend.script.iter());
        }
        for p in paths {
            if !p.exists() {
                bail!("path does not exist: {}", p.display());
            }
        }
        Ok(())
    }

    pub fn turn_limits(&self) -> TurnLimits {
        TurnLimits {
            min_turns: self.mads.min_turns,
            max_turns: self.mads.max_turns,
            supervisor_cadence: self.mads.supervisor_cadence,
        }
    }

    pub fn background_policy(&self) -> BackgroundPolicy {
        BackgroundPolicy {
            min_words: self.mads.background_min_words,
            max_words: self.mads.background_max_words,
            max_regenerations: self.mads.background_regenerations,
        }
    }

    pub fn backend_config(&self) -> BackendConfig {
        BackendConfig {
            kind: self.backend.kind,
            base_url: self.backend.base_url.clone(),
            api_key_env: self.backend.api_key_env.clone(),
            timeout: Duration::from_secs_f64(self.backend.timeout_secs.max(0.0)),
            max_retries: self.backend.max_retries,
            retry_backoff: Duration::from_millis(self.backend.retry_backoff_ms),
            script: self.backend.script.clone(),
        }
    }

    pub fn sampling(&self) -> SamplingParams {
        SamplingParams {
            model: self.backend.model.clone(),
            temperature: self.backend.temperature,
            max_tokens: self.backend.max_tokens,
            seed: None,
        }
    }

    pub fn mads_config(&self) -> MadsConfig {
        MadsConfig {
            limits: self.turn_limits(),
            background: self.background_policy(),
            extraction: ExtractionConfig {
                items_per_dialogue: self.mads.items_per_dialogue,
                min_items: self.mads.min_items,
            },
            checkpoint_every: self.mads.checkpoint_every,
            parallelism: self.parallelism,
        }
    }

    pub fn concise_config(&self) -> ConciseBatchConfig {
        ConciseBatchConfig {
            session: ConciseConfig {
                items_per_area: self.concise.items_per_area,
                background: self.background_policy(),
            },
            checkpoint_every: self.concise.checkpoint_every,
            parallelism: self.parallelism,
        }
    }

    pub fn eval_config(&self) -> EvalConfig {
        EvalConfig {
            sampling: SamplingParams {
                temperature: self.eval.temperature,
                ..self.sampling()
            },
            max_failure_fraction: self.eval.max_failure_fraction,
            parallelism: self.parallelism,
        }
    }

    pub fn model_id(&self) -> &str {
        self.eval.model_id.as_deref().unwrap_or(&self.backend.model)
    }
}
