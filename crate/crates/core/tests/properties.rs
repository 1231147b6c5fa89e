mod common;

use common::{personas, themes, Harness};
use emocot_core::curation::{
    bounded_levenshtein, cohens_kappa, dedup_items, enforce_balance, levenshtein, AgreementMatrix, BalanceDecision,
    BalanceState,
};
use emocot_core::dialogue::{generate_background, run_dialogue, Speaker, Termination, TurnLimits};
use emocot_core::eval::{parse_answer, score, ModelAnswer, ParseMode};
use emocot_core::extraction::{
    validate_document, AnswerLetter, Category, Dimension, EmotionTaxonomy, McqItem,
};
use emocot_core::golden::{item, item_document, mads_script, DialoguePlan, VerdictPlan};
use emocot_core::persona::{AttributeProfile, ProfileSampler};
use proptest::prelude::*;

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
            let sub = m[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]);
            m[i][j] = sub.min(m[i - 1][j] + 1).min(m[i][j - 1] + 1);
        }
    }
    m[a.len()][b.len()]
}

fn short() -> impl Strategy<Value = String> {
    "[abcé ]{0,12}"
}

proptest! {
    #[test]
    fn levenshtein_metric(a in short(), b in short(), c in short()) {
        let ab = levenshtein(&a, &b);
        prop_assert_eq!(ab, oracle(&a, &b));
        prop_assert_eq!(ab, levenshtein(&b, &a));
        prop_assert_eq!(ab == 0, a == b);
        prop_assert!(levenshtein(&a, &c) <= ab + levenshtein(&b, &c));
    }

    #[test]
    fn bounded_matches_oracle(a in short(), b in short(), limit in 0usize..14) {
        let (ca, cb): (Vec<char>, Vec<char>) = (a.chars().collect(), b.chars().collect());
        let d = oracle(&a, &b);
        prop_assert_eq!(bounded_levenshtein(&ca, &cb, limit), (d <= limit).then_some(d));
    }

    #[test]
    fn balance_bound_holds(seq in prop::collection::vec(0usize..4, 1..400)) {
        let mut state = BalanceState::uniform(Dimension::Ea, 1.5).unwrap();
        for c in seq {
            let cat = Category::EA[c];
            let before = state.total();
            let d = enforce_balance(&mut state, cat).unwrap();
            prop_assert_eq!(state.total(), before + usize::from(d == BalanceDecision::Accept));
            let total = state.total();
            if total > 0 {
                for cat in Category::EA {
                    let share = state.observed(cat) as f64 / total as f64;
                    prop_assert!(share <= 1.5 * 0.25 + 1.0 / total as f64 + 1e-12);
                }
            }
        }
    }

    #[test]
    fn kappa_in_range(cells in prop::collection::vec(0u64..30, 9)) {
        let counts: Vec<Vec<u64>> = cells.chunks(3).map(<[u64]>::to_vec).collect();
        let m = AgreementMatrix::from_counts(counts).unwrap();
        match cohens_kappa(&m) {
            Ok(k) => prop_assert!((-1.0..=1.0).contains(&k)),
            Err(_) => prop_assert_eq!(m.total(), 0),
        }
    }

    #[test]
    fn kappa_of_independent_raters_is_zero(r in prop::collection::vec(1u64..6, 3), c in prop::collection::vec(1u64..6, 3)) {
        let counts = r.iter().map(|x| c.iter().map(|y| x * y).collect()).collect();
        let k = cohens_kappa(&AgreementMatrix::from_counts(counts).unwrap()).unwrap();
        prop_assert!(k.abs() < 1e-12, "{k}");
    }

    #[test]
    fn kappa_of_diagonal_is_one(d in prop::collection::vec(1u64..50, 2..6)) {
        let n = d.len();
        let counts = (0..n).map(|i| (0..n).map(|j| if i == j { d[i] } else { 0 }).collect()).collect();
        let k = cohens_kappa(&AgreementMatrix::from_counts(counts).unwrap()).unwrap();
        prop_assert_eq!(k, 1.0);
    }

    #[test]
    fn scoring_decomposes_and_ignores_order(
        (rows, perm) in prop::collection::vec((0usize..8, 0usize..5), 1..60).prop_flat_map(|v| {
            let order: Vec<usize> = (0..v.len()).collect();
            (Just(v), Just(order).prop_shuffle())
        })
    ) {
        let (items, answers): (Vec<McqItem>, Vec<ModelAnswer>) = rows
            .iter()
            .enumerate()
            .map(|(k, &(c, a))| {
                let cat = [Category::EU, Category::EA].concat()[c];
                let it = item(cat, c * 100 + k);
                let raw = match AnswerLetter::from_index(a) {
                    Some(l) => format!("{{\"reasoning\": \"r\", \"answer\": \"{}\"}}", l.as_str()),
                    None => "no idea".to_string(),
                };
                (it, parse_answer(&raw))
            })
            .unzip();
        let report = score("m", &items, &answers).unwrap();
        for dim in Dimension::ALL {
            let ds = &report.dimensions[dim];
            let (sum_correct, sum_attempted) = ds
                .subcategories
                .values()
                .fold((0, 0), |(c, a), t| (c + t.correct, a + t.attempted));
            prop_assert_eq!((ds.overall.correct, ds.overall.attempted), (sum_correct, sum_attempted));
            if let Some(acc) = ds.overall.accuracy {
                let weighted: f64 = ds
                    .subcategories
                    .values()
                    .filter_map(|t| t.accuracy.map(|a| a * t.attempted as f64))
                    .sum::<f64>()
                    / sum_attempted as f64;
                prop_assert!((acc - weighted).abs() < 1e-12);
            }
        }
        let items2: Vec<McqItem> = perm.iter().map(|&i| items[i].clone()).collect();
        let answers2: Vec<ModelAnswer> = perm.iter().map(|&i| answers[i].clone()).collect();
        prop_assert_eq!(score("m", &items2, &answers2).unwrap(), report);
    }

    #[test]
    fn parser_is_total(bytes in prop::collection::vec(any::<u8>(), 0..200)) {
        let raw = String::from_utf8_lossy(&bytes);
        let a = parse_answer(&raw);
        prop_assert_eq!(a.answer.is_none(), a.parse_mode == ParseMode::Failed);
        prop_assert_eq!(a.raw, raw.into_owned());
    }

    #[test]
    fn item_roundtrip_is_canonical(c in 0usize..8, n in 0usize..500) {
        let cat = [Category::EU, Category::EA].concat()[c];
        let tax = EmotionTaxonomy::default();
        let doc = item_document(cat, n);
        let first = validate_document(&doc, &tax).unwrap();
        let line = first.to_json_line();
        let again = validate_document(&serde_json::from_str(&line).unwrap(), &tax).unwrap();
        prop_assert_eq!(again.to_json_line(), line);
        prop_assert_eq!(again, first);
    }

    #[test]
    fn invalid_documents_never_yield_items(c in 0usize..8, n in 0usize..100, field in 0usize..6) {
        let cat = [Category::EU, Category::EA].concat()[c];
        let mut doc = item_document(cat, n);
        let key = emocot_core::extraction::REQUIRED_FIELDS[field];
        doc.as_object_mut().unwrap().remove(key);
        prop_assert!(validate_document(&doc, &EmotionTaxonomy::default()).is_err());
    }
}

fn verdict() -> impl Strategy<Value = VerdictPlan> {
    prop_oneof![
        Just(VerdictPlan::Pass),
        Just(VerdictPlan::Fail),
        Just(VerdictPlan::MalformedThen(true)),
        Just(VerdictPlan::MalformedThen(false)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn dedup_is_idempotent(picks in prop::collection::vec((0usize..8, 0usize..6, 0usize..3), 0..24)) {
        let items: Vec<McqItem> = picks
            .iter()
            .enumerate()
            .map(|(k, &(c, n, edit))| {
                let cat = [Category::EU, Category::EA].concat()[c];
                let mut it = item(cat, n);
                it.id = format!("i{k}");
                for _ in 0..edit {
                    it.scenario.push_str(" again");
                }
                it
            })
            .collect();
        let once = dedup_items(items, 0.15).kept;
        let twice = dedup_items(once.clone(), 0.15);
        prop_assert!(twice.dropped.is_empty());
        prop_assert_eq!(twice.kept, once);
    }

    #[test]
    fn dialogue_bounds_cadence_alternation(verdicts in prop::collection::vec(verdict(), 6)) {
        let plan = DialoguePlan { background_words: vec![250], verdicts, eu: vec![], ea: vec![] };
        let h = Harness::scripted(mads_script(std::slice::from_ref(&plan), 2), 2);
        let (ps, ts) = (personas(1), themes());
        let bg = generate_background(h.ctx(), &ps[0], &ts[0], &Default::default()).unwrap();
        let d = run_dialogue(h.ctx(), &ps[0], &ts[0], bg, &TurnLimits::default()).unwrap();

        prop_assert!((4..=14).contains(&d.turns.len()));
        prop_assert_eq!(d.turns.len(), plan.turns());
        for (i, t) in d.turns.iter().enumerate() {
            prop_assert_eq!(t.index, i);
            prop_assert_eq!(t.speaker == Speaker::Client, i % 2 == 0);
        }
        let at: Vec<usize> = d.verdicts.iter().map(|v| v.evaluated_at_turn).collect();
        prop_assert_eq!(at, (0..d.verdicts.len()).map(|k| 4 + 2 * k).collect::<Vec<_>>());
        let first_pass = d.verdicts.iter().position(|v| v.all_met());
        match d.terminated_by.unwrap() {
            Termination::CriteriaMet => {
                prop_assert_eq!(first_pass, Some(d.verdicts.len() - 1));
                prop_assert_eq!(d.verdicts.last().unwrap().evaluated_at_turn, d.turns.len());
            }
            Termination::MaxTurns => {
                prop_assert_eq!(first_pass, None);
                prop_assert_eq!(d.turns.len(), 14);
            }
        }
    }
}

#[test]
fn sampled_profiles_stay_in_vocabulary() {
    let sampler = ProfileSampler::new(11);
    for i in 0..10_000 {
        let p = sampler.sample(i);
        let json = serde_json::to_string(&p).unwrap();
        let back: AttributeProfile = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);
    }
}
