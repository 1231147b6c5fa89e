use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::dedup::dedup_items;
use super::lint::lint_item;
use crate::extraction::{Category, Dimension, EmotionTaxonomy, McqItem, Pipeline};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimensionCounts {
    pub total: usize,
    pub categories: BTreeMap<Category, usize>,
}

impl DimensionCounts {
    fn zero(dimension: Dimension) -> Self {
        Self {
            total: 0,
            categories: dimension.categories().iter().map(|c| (*c, 0)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetReport {
    pub total: usize,
    pub dimensions: BTreeMap<Dimension, DimensionCounts>,
    #[serde(default)]
    pub pipelines: BTreeMap<Pipeline, usize>,
    #[serde(default)]
    pub duplicates: usize,
    /// Items with at least one lint finding.
    #[serde(default)]
    pub linted: usize,
    #[serde(default)]
    pub lint_findings: usize,
    #[serde(default)]
    pub suspect: usize,
    /// Attribute name -> value -> count, over items carrying a profile.
    #[serde(default)]
    pub attribute_marginals: BTreeMap<String, BTreeMap<String, usize>>,
}

impl Default for DatasetReport {
    fn default() -> Self {
        Self {
            total: 0,
            dimensions: Dimension::ALL
                .iter()
                .map(|d| (*d, DimensionCounts::zero(*d)))
                .collect(),
            pipelines: BTreeMap::new(),
            duplicates: 0,
            linted: 0,
            lint_findings: 0,
            suspect: 0,
            attribute_marginals: BTreeMap::new(),
        }
    }
}

/// Per-dimension category counts, as stored in a counts fixture:
/// `{"EU": {"complex_emotions": 382, ...}, "EA": {...}}`.
pub type CategoryCountTable = BTreeMap<Dimension, BTreeMap<Category, usize>>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("category {category} listed under {listed} but belongs to {}", .category.dimension())]
pub struct MisplacedCategory {
    pub category: Category,
    pub listed: Dimension,
}

impl DatasetReport {
    fn add(&mut self, category: Category, n: usize) {
        let dim = self
            .dimensions
            .get_mut(&category.dimension())
            .expect("both dimensions present");
        *dim.categories.get_mut(&category).expect("all categories present") += n;
        dim.total += n;
        self.total += n;
    }

    /// Report from category counts alone.
    pub fn from_counts(table: &CategoryCountTable) -> Result<Self, MisplacedCategory> {
        let mut report = Self::default();
        for (dimension, cats) in table {
            for (category, n) in cats {
                if category.dimension() != *dimension {
                    return Err(MisplacedCategory {
                        category: *category,
                        listed: *dimension,
                    });
                }
                report.add(*category, *n);
            }
        }
        Ok(report)
    }

    pub fn dimension_total(&self, dimension: Dimension) -> usize {
        self.dimensions.get(&dimension).map_or(0, |d| d.total)
    }

    pub fn category(&self, category: Category) -> usize {
        self.dimensions
            .get(&category.dimension())
            .and_then(|d| d.categories.get(&category))
            .copied()
            .unwrap_or(0)
    }

    pub fn render_table(&self) -> String {
        let mut out = String::new();
        for (dim, counts) in &self.dimensions {
            let _ = writeln!(out, "{dim:<22} {:>6}", counts.total);
            for (cat, n) in &counts.categories {
                let _ = writeln!(out, "  {:<20} {n:>6}", cat.as_str());
            }
        }
        let _ = writeln!(out, "{:<22} {:>6}", "total", self.total);
        let _ = writeln!(out, "{:<22} {:>6}", "duplicates", self.duplicates);
        let _ = writeln!(out, "{:<22} {:>6}", "items with findings", self.linted);
        let _ = writeln!(out, "{:<22} {:>6}", "suspect explanations", self.suspect);
        out
    }
}

pub fn dataset_stats(
    items: &[McqItem],
    taxonomy: &EmotionTaxonomy,
    dedup_threshold: f64,
) -> DatasetReport {
    let mut report = DatasetReport::default();
    for item in items {
        report.add(item.category, 1);
        if let Some(meta) = &item.metadata {
            *report.pipelines.entry(meta.pipeline).or_insert(0) += 1;
            if let Some(profile) = &meta.attribute_profile {
                for (field, value) in profile.fields() {
                    *report
                        .attribute_marginals
                        .entry(field.to_string())
                        .or_default()
                        .entry(value.to_string())
                        .or_insert(0) += 1;
                }
            }
        }
        let findings = lint_item(item, taxonomy);
        if !findings.is_empty() {
            report.linted += 1;
        }
        report.lint_findings += findings.len();
        if findings.iter().any(|f| f.is_suspect()) {
            report.suspect += 1;
        }
    }
    report.duplicates = dedup_items(items.to_vec(), dedup_threshold).dropped.len();
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::golden::item;

    #[test]
    fn empty_is_all_zero() {
        let r = dataset_stats(&[], &EmotionTaxonomy::default(), 0.15);
        assert_eq!(r, DatasetReport::default());
        assert_eq!(r.dimensions.len(), 2);
        assert!(r.dimensions.values().all(|d| d.total == 0 && d.categories.len() == 4));
    }

    #[test]
    fn three_eu_two_ea() {
        let items = [
            item(Category::ComplexEmotions, 0),
            item(Category::ComplexEmotions, 1),
            item(Category::EmotionalCues, 2),
            item(Category::SocialSelf, 3),
            item(Category::PersonalOthers, 4),
        ];
        let r = dataset_stats(&items, &EmotionTaxonomy::default(), 0.15);
        assert_eq!(r.dimension_total(Dimension::Eu), 3);
        assert_eq!(r.dimension_total(Dimension::Ea), 2);
        assert_eq!(r.category(Category::ComplexEmotions), 2);
        assert_eq!(r.category(Category::PerspectiveTaking), 0);
        assert_eq!((r.duplicates, r.linted), (0, 0));
    }

    #[test]
    fn counts_fixture_rejects_misplaced_category() {
        let table: CategoryCountTable =
            [(Dimension::Eu, [(Category::SocialSelf, 1)].into())].into();
        assert!(DatasetReport::from_counts(&table).is_err());
    }
}
