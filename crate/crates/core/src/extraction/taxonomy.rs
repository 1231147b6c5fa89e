use std::collections::BTreeSet;
use std::path::Path;

use serde::Deserialize;

/// The twelve component emotions of the six emotion-mix profiles. Every
/// taxonomy must contain them.
pub const CORE_EMOTIONS: [&str; 12] = [
    "anger",
    "hurt",
    "relief",
    "guilt",
    "envy",
    "admiration",
    "love",
    "resentment",
    "shame",
    "defiance",
    "worry",
    "excitement",
];

/// Extension labels shipped with the default taxonomy.
pub const DEFAULT_EXTENSIONS: [&str; 24] = [
    "joy",
    "sadness",
    "fear",
    "surprise",
    "disgust",
    "trust",
    "anticipation",
    "anxiety",
    "frustration",
    "embarrassment",
    "pride",
    "gratitude",
    "loneliness",
    "jealousy",
    "disappointment",
    "regret",
    "hope",
    "nostalgia",
    "contentment",
    "betrayal",
    "confusion",
    "grief",
    "insecurity",
    "remorse",
];

#[derive(Debug, thiserror::Error)]
pub enum TaxonomyError {
    #[error("cannot read taxonomy {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid taxonomy file: {0}")]
    Parse(String),
    #[error("taxonomy is missing core emotions: {}", .0.join(", "))]
    MissingCore(Vec<String>),
}

/// Closed set of emotion labels. Lookups are case-insensitive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmotionTaxonomy {
    labels: BTreeSet<String>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum TaxonomyFile {
    Plain(Vec<String>),
    Structured {
        labels: Vec<String>,
        #[serde(default)]
        extensions: Vec<String>,
    },
}

impl Default for EmotionTaxonomy {
    fn default() -> Self {
        Self::new(DEFAULT_EXTENSIONS.iter().copied()).expect("core labels always present")
    }
}

impl EmotionTaxonomy {
    /// Core emotions plus `extensions`.
    pub fn new<'a>(extensions: impl IntoIterator<Item = &'a str>) -> Result<Self, TaxonomyError> {
        Self::from_labels(CORE_EMOTIONS.iter().copied().chain(extensions))
    }

    /// Exactly `labels`; fails if a core emotion is absent.
    pub fn from_labels<'a>(labels: impl IntoIterator<Item = &'a str>) -> Result<Self, TaxonomyError> {
        let labels: BTreeSet<String> = labels
            .into_iter()
            .map(normalize_label)
            .filter(|l| !l.is_empty())
            .collect();
        let missing: Vec<String> = CORE_EMOTIONS
            .iter()
            .filter(|c| !labels.contains(**c))
            .map(|c| c.to_string())
            .collect();
        if !missing.is_empty() {
            return Err(TaxonomyError::MissingCore(missing));
        }
        Ok(Self { labels })
    }

    /// Reads either a JSON array of labels or `{"labels": [...], "extensions": [...]}`.
    pub fn load(path: &Path) -> Result<Self, TaxonomyError> {
        let text = std::fs::read_to_string(path).map_err(|source| TaxonomyError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let file: TaxonomyFile =
            serde_json::from_str(&text).map_err(|e| TaxonomyError::Parse(e.to_string()))?;
        let labels = match file {
            TaxonomyFile::Plain(labels) => labels,
            TaxonomyFile::Structured { mut labels, extensions } => {
                labels.extend(extensions);
                labels
            }
        };
        Self::from_labels(labels.iter().map(String::as_str))
    }

    pub fn contains(&self, label: &str) -> bool {
        self.labels.contains(&normalize_label(label))
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.labels.iter().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

fn normalize_label(label: &str) -> String {
    label.trim().to_lowercase()
}
