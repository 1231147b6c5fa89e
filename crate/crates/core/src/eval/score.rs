use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::parse::{ModelAnswer, ParseMode};
use crate::extraction::{Category, Dimension, McqItem};

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Tally {
    pub attempted: usize,
    pub correct: usize,
    /// `correct / attempted`; `None` when nothing was attempted.
    pub accuracy: Option<f64>,
}

impl Tally {
    fn add(&mut self, correct: bool) {
        self.attempted += 1;
        self.correct += usize::from(correct);
        self.accuracy = Some(self.correct as f64 / self.attempted as f64);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionScore {
    pub overall: Tally,
    pub subcategories: BTreeMap<Category, Tally>,
}

impl DimensionScore {
    fn empty(dimension: Dimension) -> Self {
        Self {
            overall: Tally::default(),
            subcategories: dimension
                .categories()
                .iter()
                .map(|c| (*c, Tally::default()))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryReport {
    pub model_id: String,
    pub dimensions: BTreeMap<Dimension, DimensionScore>,
    pub items: usize,
    pub parse_failures: usize,
    pub parse_failure_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{items} items but {answers} answers")]
pub struct LengthMismatch {
    pub items: usize,
    pub answers: usize,
}

/// Accuracy by dimension and subcategory. Failed parses count as incorrect.
pub fn score(
    model_id: &str,
    items: &[McqItem],
    answers: &[ModelAnswer],
) -> Result<CategoryReport, LengthMismatch> {
    if items.len() != answers.len() {
        return Err(LengthMismatch {
            items: items.len(),
            answers: answers.len(),
        });
    }
    let mut dimensions: BTreeMap<Dimension, DimensionScore> = Dimension::ALL
        .iter()
        .map(|d| (*d, DimensionScore::empty(*d)))
        .collect();
    let mut parse_failures = 0;
    for (item, answer) in items.iter().zip(answers) {
        if answer.parse_mode == ParseMode::Failed {
            parse_failures += 1;
        }
        let correct = answer.answer == Some(item.correct_answer);
        let dim = dimensions.get_mut(&item.dimension).expect("both dimensions present");
        dim.overall.add(correct);
        dim.subcategories
            .get_mut(&item.category)
            .expect("category belongs to its dimension")
            .add(correct);
    }
    let parse_failure_rate = (!items.is_empty()).then(|| parse_failures as f64 / items.len() as f64);
    Ok(CategoryReport {
        model_id: model_id.to_string(),
        dimensions,
        items: items.len(),
        parse_failures,
        parse_failure_rate,
    })
}

fn cell(t: &Tally) -> String {
    match t.accuracy {
        Some(a) => format!("{a:.3}"),
        None => "-".to_string(),
    }
}

impl CategoryReport {
    pub fn accuracy(&self, dimension: Dimension) -> Option<f64> {
        self.dimensions[&dimension].overall.accuracy
    }

    pub fn subcategory(&self, category: Category) -> &Tally {
        &self.dimensions[&category.dimension()].subcategories[&category]
    }

    /// One row per dimension: overall accuracy, then each subcategory.
    pub fn render_table(&self) -> String {
        let mut out = format!("model: {}\n", self.model_id);
        for (dim, score) in &self.dimensions {
            let mut header = format!("{:<8}{:>9}", dim.as_str(), "Overall");
            let mut row = format!("{:<8}{:>9}", "", cell(&score.overall));
            for (cat, tally) in &score.subcategories {
                let w = cat.as_str().len().max(6) + 2;
                let _ = write!(header, "{:>w$}", cat.as_str());
                let _ = write!(row, "{:>w$}", cell(tally));
            }
            let _ = writeln!(out, "{header}\n{row}");
        }
        let rate = self.parse_failure_rate.map_or("-".to_string(), |r| format!("{r:.3}"));
        let _ = writeln!(out, "items: {}  parse failures: {} ({rate})", self.items, self.parse_failures);
        out
    }
}
