//! Cohen's kappa for two raters.

use std::collections::BTreeMap;
use std::io::Read;

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AgreementMatrix {
    /// Judgment categories; row and column order of `counts`.
    pub categories: Vec<String>,
    /// `counts[i][j]`: items rater 1 put in category i and rater 2 in j.
    pub counts: Vec<Vec<u64>>,
}

#[derive(Debug, thiserror::Error)]
pub enum KappaError {
    #[error("agreement matrix must be square with at least 2 categories")]
    Shape,
    #[error("agreement matrix is empty (total count 0)")]
    Empty,
    #[error("agreement csv: {0}")]
    Csv(#[from] csv::Error),
}

impl AgreementMatrix {
    /// Matrix with categories named `0..n`.
    pub fn from_counts(counts: Vec<Vec<u64>>) -> Result<Self, KappaError> {
        let n = counts.len();
        if n < 2 || counts.iter().any(|r| r.len() != n) {
            return Err(KappaError::Shape);
        }
        Ok(Self {
            categories: (0..n).map(|i| i.to_string()).collect(),
            counts,
        })
    }

    /// Contingency table over the union of labels used by either rater,
    /// sorted by label.
    pub fn from_pairs<I, S>(pairs: I) -> Result<Self, KappaError>
    where
        I: IntoIterator<Item = (S, S)>,
        S: Into<String>,
    {
        let pairs: Vec<(String, String)> =
            pairs.into_iter().map(|(a, b)| (a.into(), b.into())).collect();
        let mut index: BTreeMap<&str, usize> = BTreeMap::new();
        for (a, b) in &pairs {
            index.insert(a, 0);
            index.insert(b, 0);
        }
        for (i, slot) in index.values_mut().enumerate() {
            *slot = i;
        }
        let n = index.len();
        if n < 2 {
            return Err(KappaError::Shape);
        }
        let mut counts = vec![vec![0u64; n]; n];
        for (a, b) in &pairs {
            counts[index[a.as_str()]][index[b.as_str()]] += 1;
        }
        Ok(Self {
            categories: index.keys().map(|k| k.to_string()).collect(),
            counts,
        })
    }

    /// Reads `rater1,rater2` rows. A header row is skipped when its first
    /// field is `rater1`.
    pub fn from_csv(reader: impl Read) -> Result<Self, KappaError> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut pairs = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() != 2 {
                return Err(KappaError::Shape);
            }
            if i == 0 && rec[0].eq_ignore_ascii_case("rater1") {
                continue;
            }
            pairs.push((rec[0].to_string(), rec[1].to_string()));
        }
        Self::from_pairs(pairs)
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }
}

/// κ = (pₒ − pₑ) / (1 − pₑ). When pₑ = 1 both raters used a single category
/// for every item, so agreement is perfect and κ is defined as 1.
pub fn cohens_kappa(matrix: &AgreementMatrix) -> Result<f64, KappaError> {
    let n = matrix.counts.len();
    if n < 2 || matrix.counts.iter().any(|r| r.len() != n) {
        return Err(KappaError::Shape);
    }
    let total = matrix.total();
    if total == 0 {
        return Err(KappaError::Empty);
    }
    let total = total as f64;
    let diagonal: u64 = (0..n).map(|i| matrix.counts[i][i]).sum();
    let po = diagonal as f64 / total;
    let pe: f64 = (0..n)
        .map(|i| {
            let row: u64 = matrix.counts[i].iter().sum();
            let col: u64 = matrix.counts.iter().map(|r| r[i]).sum();
            row as f64 * col as f64
        })
        .sum::<f64>()
        / (total * total);
    if (1.0 - pe).abs() < f64::EPSILON {
        return Ok(1.0);
    }
    Ok(((po - pe) / (1.0 - pe)).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kappa(c: Vec<Vec<u64>>) -> f64 {
        cohens_kappa(&AgreementMatrix::from_counts(c).unwrap()).unwrap()
    }

    #[test]
    fn examples() {
        assert_eq!(kappa(vec![vec![10, 0], vec![0, 10]]), 1.0);
        assert_eq!(kappa(vec![vec![5, 5], vec![5, 5]]), 0.0);
        // po = 35/50 = 0.70; pe = (25*30 + 25*20)/2500 = 0.50
        assert!((kappa(vec![vec![20, 5], vec![10, 15]]) - 0.40).abs() < 1e-12);
    }

    #[test]
    fn single_category_in_use() {
        assert_eq!(kappa(vec![vec![7, 0], vec![0, 0]]), 1.0);
    }

    #[test]
    fn errors() {
        assert!(matches!(AgreementMatrix::from_counts(vec![vec![1]]), Err(KappaError::Shape)));
        assert!(matches!(
            cohens_kappa(&AgreementMatrix::from_counts(vec![vec![0, 0], vec![0, 0]]).unwrap()),
            Err(KappaError::Empty)
        ));
    }

    #[test]
    fn csv_pairs() {
        let text = "rater1,rater2\nok,ok\nok,flag\nflag,flag\nflag,flag\n";
        let m = AgreementMatrix::from_csv(text.as_bytes()).unwrap();
        assert_eq!(m.categories, ["flag", "ok"]);
        assert_eq!(m.counts, [[2, 0], [1, 1]]);
    }
}
