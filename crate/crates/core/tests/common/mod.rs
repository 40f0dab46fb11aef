#![allow(dead_code)]

use std::path::{Path, PathBuf};

use rbam_core::corpus::SourceFormat;
use rbam_core::runner::RunConfig;
use rbam_core::{load_dataset, ArgumentPair, DatasetDescriptor, DatasetName};

pub fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(rel)
}

pub fn golden(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(rel)
}

/// Miniature native fixtures and their support/attack counts.
pub const FIXTURE_COUNTS: [(DatasetName, &str, SourceFormat, (usize, usize)); 10] = [
    (DatasetName::Essays, "essays", SourceFormat::Brat, (5, 3)),
    (DatasetName::Microtexts, "microtexts", SourceFormat::Arggraph, (1, 2)),
    (DatasetName::NixonKennedy, "nixon_kennedy.csv", SourceFormat::PairCsv, (3, 2)),
    (DatasetName::WebContent, "web_content.csv", SourceFormat::PairCsv, (2, 2)),
    (DatasetName::DebatepediaProcon, "debatepedia", SourceFormat::NodeXml, (3, 2)),
    (DatasetName::IbmDebater, "ibm_claims.csv", SourceFormat::ClaimStanceCsv, (3, 3)),
    (DatasetName::Comarg, "comarg", SourceFormat::ComargXml, (2, 2)),
    (DatasetName::Cdcp, "cdcp", SourceFormat::CdcpJson, (3, 0)),
    (DatasetName::Ukp, "ukp/sentences.tsv", SourceFormat::UkpTsv, (3, 2)),
    (DatasetName::Kialo, "kialo.jsonl", SourceFormat::Interchange, (4, 3)),
];

pub fn hundred_pairs() -> Vec<ArgumentPair> {
    load_dataset(&DatasetDescriptor::new(DatasetName::Generic), &fixture("pairs_100.jsonl"))
        .unwrap()
        .pairs
}

/// Config over the 100-pair fixture writing into `root/name`.
pub fn mock_config(root: &Path, name: &str, backend: serde_json::Value) -> RunConfig {
    serde_json::from_value(serde_json::json!({
        "datasets": [{"name": "generic", "path": fixture("pairs_100.jsonl")}],
        "backend": backend,
        "output_dir": root.join(name),
        "concurrency_limit": 4,
    }))
    .unwrap()
}
