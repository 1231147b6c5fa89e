//! Category balancing by rejection.
//!
//! A candidate is rejected when accepting it would push its category above
//! `factor` times the expected proportion: `(observed + 1) / (total + 1) >
//! factor * expected`. Applied literally from an empty state that test
//! rejects everything (1/1 exceeds any proportion below one), so during a
//! short warm-up of `warmup` accepted items the test is relaxed to
//! `observed <= factor * expected * (total + 1)`. Both forms keep
//! `observed / total <= factor * expected + 1 / total`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::extraction::{Category, Dimension};

pub const DEFAULT_BALANCE_FACTOR: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BalanceDecision {
    Accept,
    Reject,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BalanceError {
    #[error("category {0} is not tracked by this balance state")]
    UnknownCategory(Category),
    #[error("balance factor must be > 1 (got {0})")]
    Factor(f64),
    #[error("expected proportions must be positive and sum to 1 (sum {0})")]
    Proportions(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalanceState {
    expected: BTreeMap<Category, f64>,
    observed: BTreeMap<Category, usize>,
    total: usize,
    factor: f64,
    warmup: usize,
}

impl BalanceState {
    pub fn new(expected: BTreeMap<Category, f64>, factor: f64) -> Result<Self, BalanceError> {
        // also rejects NaN
        if factor.partial_cmp(&1.0) != Some(std::cmp::Ordering::Greater) {
            return Err(BalanceError::Factor(factor));
        }
        let sum: f64 = expected.values().sum();
        if expected.is_empty() || expected.values().any(|e| *e <= 0.0) || (sum - 1.0).abs() > 1e-9
        {
            return Err(BalanceError::Proportions(sum));
        }
        let warmup = expected
            .values()
            .map(|e| ((1.0 - factor * e) / ((factor - 1.0) * e)).max(0.0))
            .fold(0.0, f64::max)
            .ceil() as usize;
        let observed = expected.keys().map(|c| (*c, 0)).collect();
        Ok(Self {
            expected,
            observed,
            total: 0,
            factor,
            warmup,
        })
    }

    /// Uniform expectations over the four categories of `dimension`.
    pub fn uniform(dimension: Dimension, factor: f64) -> Result<Self, BalanceError> {
        let cats = dimension.categories();
        let e = 1.0 / cats.len() as f64;
        Self::new(cats.iter().map(|c| (*c, e)).collect(), factor)
    }

    /// State preloaded with `counts` (categories absent from the map start at 0).
    pub fn with_counts(
        mut self,
        counts: impl IntoIterator<Item = (Category, usize)>,
    ) -> Result<Self, BalanceError> {
        for (c, n) in counts {
            let slot = self
                .observed
                .get_mut(&c)
                .ok_or(BalanceError::UnknownCategory(c))?;
            *slot += n;
            self.total += n;
        }
        Ok(self)
    }

    pub fn observed(&self, category: Category) -> usize {
        self.observed.get(&category).copied().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn factor(&self) -> f64 {
        self.factor
    }

    pub fn warmup(&self) -> usize {
        self.warmup
    }

    pub fn expected(&self, category: Category) -> Option<f64> {
        self.expected.get(&category).copied()
    }

    pub fn categories(&self) -> impl Iterator<Item = Category> + '_ {
        self.expected.keys().copied()
    }

    /// Decision for `category` without updating the counts.
    pub fn decide(&self, category: Category) -> Result<BalanceDecision, BalanceError> {
        let e = self
            .expected(category)
            .ok_or(BalanceError::UnknownCategory(category))?;
        let o = self.observed(category) as f64;
        let t = self.total as f64;
        let ceiling = self.factor * e;
        let reject = if self.total < self.warmup {
            o > ceiling * (t + 1.0)
        } else {
            (o + 1.0) / (t + 1.0) > ceiling
        };
        Ok(if reject {
            BalanceDecision::Reject
        } else {
            BalanceDecision::Accept
        })
    }
}

/// Decides on `candidate` and, when accepted, records it.
pub fn enforce_balance(
    state: &mut BalanceState,
    candidate: Category,
) -> Result<BalanceDecision, BalanceError> {
    let decision = state.decide(candidate)?;
    if decision == BalanceDecision::Accept {
        *state.observed.get_mut(&candidate).expect("checked by decide") += 1;
        state.total += 1;
    }
    Ok(decision)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eu(counts: [usize; 4]) -> BalanceState {
        BalanceState::uniform(Dimension::Eu, 1.5)
            .unwrap()
            .with_counts(Category::EU.into_iter().zip(counts))
            .unwrap()
    }

    #[test]
    fn at_expectation_accepts_any() {
        for c in Category::EU {
            assert_eq!(eu([10; 4]).decide(c).unwrap(), BalanceDecision::Accept);
        }
    }

    #[test]
    fn worked_rejection() {
        let mut s = eu([15, 9, 8, 8]);
        assert!((16.0f64 / 41.0) > 0.375);
        assert_eq!(
            enforce_balance(&mut s, Category::ComplexEmotions).unwrap(),
            BalanceDecision::Reject
        );
        assert_eq!((s.observed(Category::ComplexEmotions), s.total()), (15, 40));
        assert_eq!(
            enforce_balance(&mut s, Category::EmotionalCues).unwrap(),
            BalanceDecision::Accept
        );
        assert_eq!(s.total(), 41);
    }

    #[test]
    fn empty_state_accepts() {
        let mut s = BalanceState::uniform(Dimension::Ea, 1.5).unwrap();
        assert_eq!(s.warmup(), 5);
        assert_eq!(
            enforce_balance(&mut s, Category::SocialSelf).unwrap(),
            BalanceDecision::Accept
        );
    }

    #[test]
    fn no_deadlock_on_a_single_category_stream() {
        let mut s = BalanceState::uniform(Dimension::Eu, 1.5).unwrap();
        let accepted = (0..100)
            .filter(|_| enforce_balance(&mut s, Category::PersonalBeliefs).unwrap() == BalanceDecision::Accept)
            .count();
        assert_eq!(accepted, 1);
        // every other category is still acceptable
        for c in [Category::ComplexEmotions, Category::EmotionalCues, Category::PerspectiveTaking] {
            assert_eq!(s.decide(c).unwrap(), BalanceDecision::Accept);
        }
    }

    #[test]
    fn errors() {
        let mut s = BalanceState::uniform(Dimension::Eu, 1.5).unwrap();
        assert_eq!(
            enforce_balance(&mut s, Category::SocialSelf),
            Err(BalanceError::UnknownCategory(Category::SocialSelf))
        );
        assert!(matches!(BalanceState::uniform(Dimension::Eu, 1.0), Err(BalanceError::Factor(_))));
    }
}
