use std::fmt;

use serde::{Serialize, Serializer};

use crate::extraction::{
    check_explanation_consistency, check_item, Consistency, EmotionTaxonomy, McqItem,
    SuspectReason, Violation,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Finding {
    Violation(Violation),
    SuspectExplanation(SuspectReason),
}

impl Finding {
    pub fn is_suspect(&self) -> bool {
        matches!(self, Finding::SuspectExplanation(_))
    }
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Finding::Violation(v) => v.fmt(f),
            Finding::SuspectExplanation(SuspectReason::NoOverlapWithCorrectOption) => {
                f.write_str("suspect explanation: shares no content word with the correct option")
            }
            Finding::SuspectExplanation(SuspectReason::ConcludesDistractor(label)) => {
                write!(f, "suspect explanation: concludes with distractor emotion {label}")
            }
        }
    }
}

impl Serialize for Finding {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Word-count bounds, taxonomy membership and explanation consistency.
/// An empty list means the item is clean.
pub fn lint_item(item: &McqItem, taxonomy: &EmotionTaxonomy) -> Vec<Finding> {
    let mut findings: Vec<Finding> = check_item(item, taxonomy)
        .into_iter()
        .map(Finding::Violation)
        .collect();
    if let Consistency::Suspect(reason) = check_explanation_consistency(item, taxonomy) {
        findings.push(Finding::SuspectExplanation(reason));
    }
    findings
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extraction::Category;
    use crate::golden::{item, prose};

    #[test]
    fn short_scenario() {
        let mut it = item(Category::ComplexEmotions, 3);
        it.scenario = prose(1, 49);
        let f = lint_item(&it, &EmotionTaxonomy::default());
        let msgs: Vec<String> = f.iter().map(ToString::to_string).collect();
        assert_eq!(msgs, ["scenario too short (49 < 50)"]);
    }

    #[test]
    fn five_hundred_words_is_clean() {
        let mut it = item(Category::SocialSelf, 3);
        it.scenario = prose(2, 500);
        assert!(lint_item(&it, &EmotionTaxonomy::default()).is_empty());
    }

    #[test]
    fn suspect_and_long() {
        let mut it = item(Category::PerspectiveTaking, 5);
        it.scenario = prose(3, 501);
        it.explanation = "Nothing here relates to any listed choice.".into();
        let f = lint_item(&it, &EmotionTaxonomy::default());
        assert_eq!(f.len(), 2);
        assert!(f.contains(&Finding::Violation(Violation::ScenarioTooLong(501))));
        assert!(f.iter().any(Finding::is_suspect));
    }
}
