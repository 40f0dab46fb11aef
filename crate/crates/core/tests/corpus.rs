mod common;

use std::fs;

use common::{fixture, FIXTURE_COUNTS};
use proptest::prelude::*;
use rbam_core::corpus::{interchange, SourceFormat};
use rbam_core::{compute_stats, load_dataset, ArgumentPair, CorpusError, DatasetDescriptor, DatasetName, Relation};

fn load(name: DatasetName, rel: &str) -> rbam_core::corpus::Corpus {
    load_dataset(&DatasetDescriptor::new(name), &fixture(rel)).unwrap()
}

#[test]
fn every_fixture_loads_with_known_counts() {
    for (name, rel, format, expected) in FIXTURE_COUNTS {
        let corpus = load_dataset(&DatasetDescriptor::new(name).with_format(format), &fixture(rel))
            .unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(corpus.counts(), expected, "{name}");
        assert!(corpus.pairs.iter().all(|p| p.dataset == name.id()));
    }
}

#[test]
fn expected_counts_are_enforced() {
    let desc = DatasetDescriptor::new(DatasetName::Essays).with_expected(5, 3);
    assert!(load_dataset(&desc, &fixture("essays")).is_ok());
    let desc = DatasetDescriptor::new(DatasetName::Essays).with_expected(5, 4);
    assert!(matches!(
        load_dataset(&desc, &fixture("essays")),
        Err(CorpusError::CountMismatch { attack: 3, .. })
    ));
}

#[test]
fn essays_relations_and_stances() {
    let corpus = load(DatasetName::Essays, "essays");
    let by_id = |id: &str| corpus.pairs.iter().find(|p| p.id == id).unwrap();
    let r2 = by_id("essay001:R2");
    assert_eq!(r2.parent_text, "cooking is a basic life skill");
    assert_eq!(r2.child_text, "lessons take time away from maths");
    assert_eq!(r2.gold, Relation::Attack);
    let a2 = by_id("essay001:A2");
    assert_eq!(a2.parent_text, "schools should teach cooking");
    assert_eq!(a2.gold, Relation::Attack);
}

#[test]
fn microtext_segments_and_undercuts() {
    let corpus = load(DatasetName::Microtexts, "microtexts");
    assert_eq!(corpus.report.dropped.get("add"), Some(&1));
    let sup = corpus.pairs.iter().find(|p| p.id == "micro_b001:c7").unwrap();
    assert_eq!(sup.child_text, "Sorted waste is cheaper to recycle, which keeps collection fees low.");
    let und = corpus.pairs.iter().find(|p| p.id == "micro_b001:c9").unwrap();
    assert_eq!(und.parent_text, "Sorting takes up space in small kitchens.");
    assert_eq!(und.gold, Relation::Attack);
}

#[test]
fn stance_corpora_drop_neutral_labels() {
    assert_eq!(load(DatasetName::Comarg, "comarg").report.dropped.get("3"), Some(&1));
    let ukp = load(DatasetName::Ukp, "ukp/sentences.tsv");
    assert_eq!(ukp.report.dropped.get("NoArgument"), Some(&2));
    assert!(ukp.pairs.iter().all(|p| p.parent_text.ends_with(" is good")));
    assert_eq!(ukp.pairs[0].parent_text, "abortion is good");
    let nk = load(DatasetName::NixonKennedy, "nixon_kennedy.csv");
    assert_eq!(nk.report.total_native, 6);
    assert_eq!(nk.report.dropped_total(), 1);
}

#[test]
fn ibm_topic_is_parent() {
    let ibm = load(DatasetName::IbmDebater, "ibm_claims.csv");
    let p = ibm.pairs.iter().find(|p| p.id == "202").unwrap();
    assert_eq!(p.parent_text, "This house supports nuclear power");
    assert_eq!(p.child_text, "Nuclear waste stays dangerous for millennia");
    assert_eq!(p.gold, Relation::Attack);
}

#[test]
fn cdcp_offsets_select_propositions() {
    let cdcp = load(DatasetName::Cdcp, "cdcp");
    let texts: Vec<(&str, &str)> = cdcp
        .pairs
        .iter()
        .map(|p| (p.parent_text.as_str(), p.child_text.as_str()))
        .collect();
    assert_eq!(
        texts,
        [
            ("The rule should exempt small lenders.", "Small lenders lack compliance staff."),
            ("Small lenders lack compliance staff.", "Our credit union has two employees."),
            (
                "Small lenders lack compliance staff.",
                "Compliance software costs more than our annual profit."
            ),
        ]
    );
}

#[test]
fn unknown_stance_label_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("claims.csv");
    fs::write(&path, "topicText,claims.stance,claims.claimCorrectedText\nT,MAYBE,c\n").unwrap();
    let err = load_dataset(&DatasetDescriptor::new(DatasetName::IbmDebater), &path).unwrap_err();
    assert!(err.to_string().contains("MAYBE"), "{err}");
}

#[test]
fn missing_path_and_wrong_format() {
    let missing = load_dataset(&DatasetDescriptor::new(DatasetName::Essays), &fixture("nope"));
    assert!(matches!(missing, Err(CorpusError::Io { .. })));
    let wrong = DatasetDescriptor::new(DatasetName::Essays).with_format(SourceFormat::UkpTsv);
    assert!(matches!(
        load_dataset(&wrong, &fixture("essays")),
        Err(CorpusError::FormatMismatch { .. })
    ));
}

#[test]
fn native_fixture_round_trips_through_interchange() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = load(DatasetName::Essays, "essays");
    let out = dir.path().join("essays.jsonl");
    interchange::export(&out, &corpus.pairs).unwrap();
    let again = load_dataset(
        &DatasetDescriptor::new(DatasetName::Essays).with_format(SourceFormat::Interchange),
        &out,
    )
    .unwrap();
    assert_eq!(again.pairs, corpus.pairs);
    assert_eq!(compute_stats(&again.pairs), compute_stats(&corpus.pairs));
}

fn arb_pair() -> impl Strategy<Value = ArgumentPair> {
    let text = "[a-zA-Z0-9 ,.'\"{}é\\\\\n\t-]{0,30}[a-z]";
    (
        "[a-z0-9]{1,8}",
        text,
        text,
        prop_oneof![Just(Relation::Support), Just(Relation::Attack)],
    )
        .prop_map(|(id, p, c, g)| ArgumentPair::new(id, "generic", &p, &c, g).unwrap())
}

proptest! {
    #[test]
    fn interchange_export_is_idempotent(pairs in prop::collection::vec(arb_pair(), 0..20)) {
        let mut seen = std::collections::HashSet::new();
        let pairs: Vec<ArgumentPair> = pairs.into_iter().filter(|p| seen.insert(p.id.clone())).collect();
        let dir = tempfile::tempdir().unwrap();
        let first = dir.path().join("a.jsonl");
        let second = dir.path().join("b.jsonl");
        interchange::export(&first, &pairs).unwrap();
        let loaded = load_dataset(&DatasetDescriptor::new(DatasetName::Generic), &first).unwrap();
        prop_assert_eq!(&loaded.pairs, &pairs);
        interchange::export(&second, &loaded.pairs).unwrap();
        prop_assert_eq!(fs::read(&first).unwrap(), fs::read(&second).unwrap());
    }

    #[test]
    fn stats_are_order_invariant(mut pairs in prop::collection::vec(arb_pair(), 1..20), seed in any::<u64>()) {
        let before = compute_stats(&pairs);
        let len = pairs.len();
        pairs.rotate_left((seed as usize) % len);
        pairs.reverse();
        let after = compute_stats(&pairs);
        prop_assert_eq!((before.n_support, before.n_attack), (after.n_support, after.n_attack));
        prop_assert!((before.avg_words - after.avg_words).abs() < 1e-9);
        prop_assert!((before.avg_chars - after.avg_chars).abs() < 1e-9);
    }
}
