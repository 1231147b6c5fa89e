//! Edit distance over Unicode scalar values.

/// Standard Levenshtein distance (unit-cost insert, delete, substitute).
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    distance(&a, &b)
}

fn distance(a: &[char], b: &[char]) -> usize {
    let (a, b) = if a.len() < b.len() { (b, a) } else { (a, b) };
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Distance if it is at most `limit`, computed on a diagonal band.
pub fn bounded_levenshtein(a: &[char], b: &[char], limit: usize) -> Option<usize> {
    if a.len().abs_diff(b.len()) > limit {
        return None;
    }
    let (a, b) = if a.len() < b.len() { (b, a) } else { (a, b) };
    let big = limit + 1;
    let width = b.len() + 1;
    let mut prev: Vec<usize> = (0..width).map(|j| j.min(big)).collect();
    let mut cur = vec![big; width];
    for i in 1..=a.len() {
        let lo = i.saturating_sub(limit).max(1);
        let hi = (i + limit).min(b.len());
        // Only the band and the cells on either side of it are ever read.
        cur[0] = i.min(big);
        cur[lo - 1] = if lo == 1 { cur[0] } else { big };
        let mut row_min = cur[lo - 1];
        for j in lo..=hi {
            let sub = prev[j - 1] + usize::from(a[i - 1] != b[j - 1]);
            let v = sub.min(prev[j] + 1).min(cur[j - 1] + 1).min(big);
            cur[j] = v;
            row_min = row_min.min(v);
        }
        if hi < b.len() {
            cur[hi + 1] = big;
        }
        if row_min > limit {
            return None;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    let d = prev[b.len()];
    (d <= limit).then_some(d)
}

/// `levenshtein(a, b) / max(|a|, |b|)` in characters; 0 for two empty strings.
pub fn normalized_distance(a: &str, b: &str) -> f64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let max = a.len().max(b.len());
    if max == 0 {
        return 0.0;
    }
    distance(&a, &b) as f64 / max as f64
}

pub fn similarity(a: &str, b: &str) -> f64 {
    1.0 - normalized_distance(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Full-matrix Wagner-Fischer, written independently of the production
    /// two-row version.
    fn oracle(a: &str, b: &str) -> usize {
        let a: Vec<char> = a.chars().collect();
        let b: Vec<char> = b.chars().collect();
        let mut m = vec![vec![0usize; b.len() + 1]; a.len() + 1];
        for (i, row) in m.iter_mut().enumerate() {
            row[0] = i;
        }
        for j in 0..=b.len() {
            m[0][j] = j;
        }
        for i in 1..=a.len() {
            for j in 1..=b.len() {
                let cost = if a[i - 1] == b[j - 1] { 0 } else { 1 };
                m[i][j] = *[m[i - 1][j] + 1, m[i][j - 1] + 1, m[i - 1][j - 1] + cost]
                    .iter()
                    .min()
                    .unwrap();
            }
        }
        m[a.len()][b.len()]
    }

    #[test]
    fn examples() {
        assert_eq!(levenshtein("same", "same"), 0);
        assert_eq!(levenshtein("", "abc"), 3);
        assert_eq!(levenshtein("kitten", "sitting"), 3);
        assert_eq!(oracle("kitten", "sitting"), 3);
        assert_eq!(levenshtein("héllo", "hello"), 1);
    }

    #[test]
    fn bounded_agrees_when_within_limit() {
        let pairs = [("kitten", "sitting"), ("", "abc"), ("flaw", "lawn"), ("abc", "abc")];
        for (a, b) in pairs {
            let (ca, cb): (Vec<char>, Vec<char>) = (a.chars().collect(), b.chars().collect());
            let d = oracle(a, b);
            for limit in 0..6 {
                let expected = (d <= limit).then_some(d);
                assert_eq!(bounded_levenshtein(&ca, &cb, limit), expected, "{a} {b} {limit}");
            }
        }
    }

    #[test]
    fn normalized() {
        assert_eq!(normalized_distance("", ""), 0.0);
        assert_eq!(normalized_distance("abcd", "abcf"), 0.25);
        assert_eq!(similarity("abcd", "abcd"), 1.0);
    }
}
