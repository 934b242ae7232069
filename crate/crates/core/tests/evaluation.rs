use std::collections::BTreeMap;

use factcheck::evaluation::{
    count_mistakes, doc_recall_at_k, evaluate, fever_score, label_accuracy, recall_at_k, Predictions, Verdict, Verdicts,
};
use factcheck::{Claim, Error, Label, SentenceId};
use proptest::prelude::*;

const PAGES: [&str; 3] = ["A", "B", "C"];

fn sid() -> impl Strategy<Value = SentenceId> {
    (0usize..3, 0u32..4).prop_map(|(p, l)| SentenceId::new(PAGES[p], l))
}

fn label() -> impl Strategy<Value = Label> {
    prop_oneof![Just(Label::Supported), Just(Label::Refuted), Just(Label::NotEnoughInfo)]
}

fn claims() -> impl Strategy<Value = Vec<Claim>> {
    prop::collection::vec(
        (label(), prop::collection::vec(prop::collection::vec(sid(), 1..3), 1..3)),
        1..12,
    )
    .prop_map(|raw| {
        raw.into_iter()
            .enumerate()
            .map(|(i, (label, groups))| Claim {
                id: i as u64 + 1,
                label,
                text: String::new(),
                evidence: if label == Label::NotEnoughInfo { vec![] } else { groups },
            })
            .collect()
    })
}

fn with_predictions() -> impl Strategy<Value = (Vec<Claim>, Predictions)> {
    claims().prop_flat_map(|cs| {
        let n = cs.len();
        (Just(cs), prop::collection::vec(prop::collection::vec(sid(), 0..8), n)).prop_map(|(cs, preds)| {
            let p = cs.iter().zip(preds).map(|(c, p)| (c.id, p)).collect();
            (cs, p)
        })
    })
}

// straightforward restatement of the metric definitions
fn oracle(claims: &[Claim], preds: &Predictions, k: usize) -> Option<(f64, usize, usize)> {
    let mut covered = 0;
    let mut total = 0;
    let (mut rm, mut sm) = (0, 0);
    for c in claims.iter().filter(|c| c.label != Label::NotEnoughInfo) {
        total += 1;
        let top: Vec<&SentenceId> = preds.get(&c.id).map(|p| p.iter().take(k).collect()).unwrap_or_default();
        if c.evidence.iter().any(|g| g.iter().all(|s| top.contains(&s))) {
            covered += 1;
        }
        if !c.evidence.iter().flatten().any(|s| top.contains(&s)) {
            match c.label {
                Label::Refuted => rm += 1,
                _ => sm += 1,
            }
        }
    }
    (total > 0).then(|| (covered as f64 / total as f64, rm, sm))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn metrics_match_oracle((cs, preds) in with_predictions(), k in 1usize..8) {
        match oracle(&cs, &preds, k) {
            Some((recall, rm, sm)) => {
                prop_assert_eq!(recall_at_k(&preds, &cs, k).unwrap(), recall);
                prop_assert_eq!(count_mistakes(&preds, &cs, k).unwrap(), (rm, sm));
            }
            None => prop_assert!(matches!(recall_at_k(&preds, &cs, k), Err(Error::NoVerifiableClaims))),
        }
    }

    #[test]
    fn recall_grows_and_mistakes_shrink_with_k((cs, preds) in with_predictions(), k in 1usize..7) {
        prop_assume!(cs.iter().any(|c| c.is_verifiable()));
        let r0 = recall_at_k(&preds, &cs, k).unwrap();
        let r1 = recall_at_k(&preds, &cs, k + 1).unwrap();
        prop_assert!(r0 <= r1);
        let (a0, b0) = count_mistakes(&preds, &cs, k).unwrap();
        let (a1, b1) = count_mistakes(&preds, &cs, k + 1).unwrap();
        prop_assert!(a1 <= a0 && b1 <= b0);
        prop_assert!((0.0..=1.0).contains(&r0));
    }

    #[test]
    fn covered_claims_are_never_mistakes((cs, preds) in with_predictions(), k in 1usize..8) {
        prop_assume!(cs.iter().any(|c| c.is_verifiable()));
        let report = evaluate(&preds, None, &cs, k).unwrap();
        prop_assert!(report.claims.iter().all(|o| !(o.covered && o.mistake)));
        prop_assert_eq!(report.verifiable_claims, report.claims.len());
        prop_assert_eq!(report.recall_at_k, recall_at_k(&preds, &cs, k).unwrap());
    }

    #[test]
    fn fever_score_never_exceeds_accuracy((cs, preds) in with_predictions(), labels in prop::collection::vec(label(), 12)) {
        let verdicts: Verdicts = cs
            .iter()
            .zip(&labels)
            .map(|(c, &l)| (c.id, Verdict { label: l, evidence: preds[&c.id].clone() }))
            .collect();
        let fs = fever_score(&verdicts, &cs, 5).unwrap();
        let la = label_accuracy(&verdicts, &cs).unwrap();
        prop_assert!(fs <= la);
        let nei_right = cs.iter().zip(&labels).filter(|(c, l)| c.label == Label::NotEnoughInfo && **l == c.label).count();
        prop_assert!(fs >= nei_right as f64 / cs.len() as f64);
    }

    #[test]
    fn prediction_order_beyond_k_is_irrelevant((cs, preds) in with_predictions(), k in 1usize..5) {
        prop_assume!(cs.iter().any(|c| c.is_verifiable()));
        let reversed_tail: Predictions = preds
            .iter()
            .map(|(&id, p)| {
                let mut p = p.clone();
                let cut = k.min(p.len());
                p[cut..].reverse();
                (id, p)
            })
            .collect();
        prop_assert_eq!(recall_at_k(&preds, &cs, k).unwrap(), recall_at_k(&reversed_tail, &cs, k).unwrap());
    }
}

fn s(p: &str, l: u32) -> SentenceId {
    SentenceId::new(p, l)
}

#[test]
fn missing_verdict_and_unknown_ids_are_errors() {
    let cs = vec![Claim {
        id: 1,
        label: Label::Supported,
        text: String::new(),
        evidence: vec![vec![s("A", 0)]],
    }];
    assert!(matches!(
        fever_score(&Verdicts::new(), &cs, 5),
        Err(Error::MissingVerdict(1))
    ));
    let preds = Predictions::from([(9, vec![])]);
    assert!(matches!(recall_at_k(&preds, &cs, 5), Err(Error::UnknownClaim(9))));
}

#[test]
fn fever_score_uses_only_first_five_sentences() {
    let cs = vec![Claim {
        id: 1,
        label: Label::Refuted,
        text: String::new(),
        evidence: vec![vec![s("A", 9)]],
    }];
    let mut evidence: Vec<SentenceId> = (0..5).map(|l| s("B", l)).collect();
    evidence.push(s("A", 9));
    let v = Verdicts::from([(
        1,
        Verdict {
            label: Label::Refuted,
            evidence,
        },
    )]);
    assert_eq!(fever_score(&v, &cs, 5).unwrap(), 0.0);
    assert_eq!(label_accuracy(&v, &cs).unwrap(), 1.0);
    let report = evaluate(&Predictions::new(), Some(&v), &cs, 5).unwrap();
    assert_eq!(report.fever_score, Some(0.0));
    assert_eq!(report.claims[0].fever_correct, Some(false));
}

#[test]
fn doc_recall_needs_every_page_of_a_group() {
    let cs = vec![Claim {
        id: 1,
        label: Label::Supported,
        text: String::new(),
        evidence: vec![vec![s("A", 0), s("B", 1)]],
    }];
    let only_a = BTreeMap::from([(1, vec!["A".to_string(), "C".to_string()])]);
    let both = BTreeMap::from([(1, vec!["B".to_string(), "A".to_string()])]);
    assert_eq!(doc_recall_at_k(&only_a, &cs, 5).unwrap(), 0.0);
    assert_eq!(doc_recall_at_k(&both, &cs, 5).unwrap(), 1.0);
    assert_eq!(doc_recall_at_k(&both, &cs, 1).unwrap(), 0.0);
}
