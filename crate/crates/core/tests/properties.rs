use std::collections::{BTreeSet, HashMap};

use dialectkit::dataset::complete_case_filter;
use dialectkit::metrics::{bleu_sentence, chrf_sentence};
use dialectkit::nano::{format_input, split_sentences, FormatMode};
use dialectkit::stats::{
    awareness_eval, binomial_one_tailed, darr, fit_mixed_effects, win_loss, AwarenessRecord, HumanPair,
};
use dialectkit::{Condition, DialectTag, ScoreRecord};
use proptest::prelude::*;

fn three_conditions() -> [Condition; 3] {
    [Condition::perturb(), Condition::dialect(), Condition::mt()]
}

/// Complete score table: one row per example, one score per condition.
fn table(max_examples: usize) -> impl Strategy<Value = Vec<[f64; 3]>> {
    prop::collection::vec([0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0], 2..max_examples)
}

fn records_from(table: &[[f64; 3]], map: impl Fn(f64) -> f64) -> Vec<ScoreRecord> {
    let conds = three_conditions();
    let mut out = Vec::new();
    for (i, row) in table.iter().enumerate() {
        for (c, s) in conds.iter().zip(row) {
            out.push(ScoreRecord::new("m", &format!("e{i:03}"), c.clone(), map(*s)).unwrap());
        }
    }
    out
}

fn words() -> impl Strategy<Value = String> {
    prop::collection::vec("[a-e]{1,4}", 1..8).prop_map(|w| w.join(" "))
}

proptest! {
    #[test]
    fn complete_case_filter_is_idempotent(
        rows in prop::collection::vec((0usize..6, 0usize..3, 0.0f64..1.0), 0..30),
    ) {
        let conds = three_conditions();
        let mut seen = BTreeSet::new();
        let records: Vec<ScoreRecord> = rows
            .into_iter()
            .filter(|(i, c, _)| seen.insert((*i, *c)))
            .map(|(i, c, s)| ScoreRecord::new("m", &format!("e{i}"), conds[c].clone(), s).unwrap())
            .collect();
        let required: BTreeSet<Condition> = conds.iter().cloned().collect();
        let (kept, _) = complete_case_filter(&records, &required);
        let (again, dropped) = complete_case_filter(&kept, &required);
        prop_assert_eq!(&kept, &again);
        prop_assert!(dropped.is_empty());
        prop_assert_eq!(kept.len() % 3, 0);
    }

    #[test]
    fn bleu_is_bounded_and_one_on_identity(c in words(), r in words()) {
        let v = bleu_sentence(&c, &r).value;
        prop_assert!((0.0..=1.0).contains(&v));
        prop_assert_eq!(bleu_sentence(&r, &r).value, 1.0);
    }

    #[test]
    fn chrf_is_bounded_and_one_on_identity(c in words(), r in words()) {
        let v = chrf_sentence(&c, &r).unwrap();
        prop_assert!((0.0..=1.0).contains(&v));
        prop_assert_eq!(chrf_sentence(&r, &r).unwrap(), 1.0);
    }

    #[test]
    fn regression_contrasts_scale_with_scores(t in table(20), a in 0.1f64..10.0, b in -5.0f64..5.0) {
        let base = fit_mixed_effects(&records_from(&t, |x| x), &Condition::perturb()).unwrap();
        let scaled = fit_mixed_effects(&records_from(&t, |x| a * x + b), &Condition::perturb()).unwrap();
        for c in [Condition::dialect(), Condition::mt()] {
            let (x, y) = (base.contrast(&c).unwrap(), scaled.contrast(&c).unwrap());
            prop_assert!((y.estimate - a * x.estimate).abs() < 1e-9);
            prop_assert!((y.standard_error - a * x.standard_error).abs() < 1e-9);
        }
    }

    #[test]
    fn win_loss_ignores_monotone_transforms(t in table(30)) {
        let (j, k) = (Condition::dialect(), Condition::perturb());
        let raw = win_loss(&records_from(&t, |x| x), &j, &k).unwrap();
        let mapped = win_loss(&records_from(&t, |x| (3.0 * x).exp() - 1.0), &j, &k).unwrap();
        prop_assert_eq!(raw, mapped);
    }

    #[test]
    fn binomial_tail_is_monotone(t in 1u64..200, w in 0u64..200) {
        let w = w.min(t - 1);
        let lower = binomial_one_tailed(w, t).unwrap();
        let higher = binomial_one_tailed(w + 1, t).unwrap();
        prop_assert!(higher <= lower);
        prop_assert!((0.0..=1.0).contains(&lower));
    }

    #[test]
    fn darr_flips_sign_when_pairs_reverse(
        scores in prop::collection::vec(0.0f64..1.0, 4),
        pairs in prop::collection::vec((0usize..4, 0usize..4), 1..10),
    ) {
        let scores: HashMap<String, f64> =
            scores.iter().enumerate().map(|(i, s)| (format!("s{i}"), *s)).collect();
        let pairs: Vec<(String, String)> = pairs
            .into_iter()
            .filter(|(a, b)| a != b && scores[&format!("s{a}")] != scores[&format!("s{b}")])
            .map(|(a, b)| (format!("s{a}"), format!("s{b}")))
            .collect();
        prop_assume!(!pairs.is_empty());
        let forward: Vec<HumanPair> =
            pairs.iter().map(|(a, b)| HumanPair { better: a.clone(), worse: b.clone() }).collect();
        let backward: Vec<HumanPair> =
            pairs.iter().map(|(a, b)| HumanPair { better: b.clone(), worse: a.clone() }).collect();
        let f = darr(&scores, &forward).unwrap();
        prop_assert!((f + darr(&scores, &backward).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn awareness_ignores_record_order(
        scores in prop::collection::vec(0.0f64..1.0, 8),
        rotate in 0usize..8,
    ) {
        let tags: Vec<DialectTag> = ["pt-BR", "pt-PT"].iter().map(|t| t.parse().unwrap()).collect();
        let mut records: Vec<AwarenessRecord> = scores
            .iter()
            .enumerate()
            .map(|(i, s)| AwarenessRecord {
                candidate_dialect: tags[i % 2].clone(),
                input_tag: tags[(i / 2) % 2].clone(),
                score: *s,
            })
            .collect();
        let before = awareness_eval(&records).unwrap();
        records.rotate_left(rotate);
        records.reverse();
        prop_assert_eq!(before, awareness_eval(&records).unwrap());
    }

    #[test]
    fn pretrain_format_is_injective(
        a in words(), b in words(),
        ta in prop::sample::select(vec!["pt-BR", "pt-PT", "pt-any", "en-IN"]),
        tb in prop::sample::select(vec!["pt-BR", "pt-PT", "pt-any", "en-IN"]),
    ) {
        let (ta, tb): (DialectTag, DialectTag) = (ta.parse().unwrap(), tb.parse().unwrap());
        let fa = format_input(FormatMode::Pretrain, &a, &ta, None, None).unwrap();
        let fb = format_input(FormatMode::Pretrain, &b, &tb, None, None).unwrap();
        prop_assert_eq!(fa == fb, a == b && ta == tb);
    }

    #[test]
    fn split_sentences_yields_no_empty_pieces(text in "[a-c .!?。\"']{0,60}") {
        for s in split_sentences(&text) {
            prop_assert!(!s.trim().is_empty(), "empty piece from {:?}", text);
        }
    }
}
