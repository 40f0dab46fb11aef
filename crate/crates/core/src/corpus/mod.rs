//! Argument-pair corpora.
//!
//! Every supported corpus is read by a format adapter into a flat list of
//! [`RawRelation`]s carrying the corpus' own label vocabulary. The list is
//! then reduced to support/attack pairs by [`filter_binary`]; everything else
//! is counted as dropped in the [`LoadReport`].

mod adapters;
pub mod interchange;
mod stats;

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use stats::{compute_stats, CorpusStats};

/// The binary relation space. There is deliberately no "no relation" value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    Support,
    Attack,
}

impl Relation {
    pub const ALL: [Relation; 2] = [Relation::Support, Relation::Attack];

    pub fn as_str(self) -> &'static str {
        match self {
            Relation::Support => "support",
            Relation::Attack => "attack",
        }
    }

    pub fn other(self) -> Relation {
        match self {
            Relation::Support => Relation::Attack,
            Relation::Attack => Relation::Support,
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Relation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_lowercase().as_str() {
            "support" => Ok(Relation::Support),
            "attack" => Ok(Relation::Attack),
            other => Err(format!("not a relation: {other:?}")),
        }
    }
}

/// One (parent, child, gold) record. The gold relation is directed from the
/// child argument to the parent argument.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArgumentPair {
    pub id: String,
    pub dataset: String,
    #[serde(rename = "parent")]
    pub parent_text: String,
    #[serde(rename = "child")]
    pub child_text: String,
    pub gold: Relation,
}

impl ArgumentPair {
    /// Builds a pair, trimming both texts. Fails when either text is blank.
    pub fn new(
        id: impl Into<String>,
        dataset: impl Into<String>,
        parent: &str,
        child: &str,
        gold: Relation,
    ) -> Result<Self, CorpusError> {
        let id = id.into();
        let (parent, child) = (parent.trim(), child.trim());
        if parent.is_empty() || child.is_empty() {
            return Err(CorpusError::EmptyText { id });
        }
        Ok(Self {
            id,
            dataset: dataset.into(),
            parent_text: parent.to_owned(),
            child_text: child.to_owned(),
            gold,
        })
    }
}

/// Corpora known to the harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetName {
    Essays,
    Microtexts,
    NixonKennedy,
    DebatepediaProcon,
    IbmDebater,
    Comarg,
    Cdcp,
    Ukp,
    WebContent,
    Kialo,
    Generic,
}

impl DatasetName {
    pub const PUBLISHED: [DatasetName; 10] = [
        DatasetName::Essays,
        DatasetName::NixonKennedy,
        DatasetName::Cdcp,
        DatasetName::Ukp,
        DatasetName::DebatepediaProcon,
        DatasetName::IbmDebater,
        DatasetName::Comarg,
        DatasetName::Microtexts,
        DatasetName::WebContent,
        DatasetName::Kialo,
    ];

    pub fn id(self) -> &'static str {
        match self {
            DatasetName::Essays => "essays",
            DatasetName::Microtexts => "microtexts",
            DatasetName::NixonKennedy => "nixon_kennedy",
            DatasetName::DebatepediaProcon => "debatepedia_procon",
            DatasetName::IbmDebater => "ibm_debater",
            DatasetName::Comarg => "comarg",
            DatasetName::Cdcp => "cdcp",
            DatasetName::Ukp => "ukp",
            DatasetName::WebContent => "web_content",
            DatasetName::Kialo => "kialo",
            DatasetName::Generic => "generic",
        }
    }

    /// Human-readable name used in rendered tables.
    pub fn display_name(self) -> &'static str {
        match self {
            DatasetName::Essays => "Essays",
            DatasetName::Microtexts => "Microtexts",
            DatasetName::NixonKennedy => "Nixon-Kennedy",
            DatasetName::DebatepediaProcon => "Debatepedia/Procon",
            DatasetName::IbmDebater => "IBM-Debater",
            DatasetName::Comarg => "ComArg",
            DatasetName::Cdcp => "CDCP",
            DatasetName::Ukp => "UKP",
            DatasetName::WebContent => "Web-Content",
            DatasetName::Kialo => "Kialo",
            DatasetName::Generic => "Generic",
        }
    }

    pub fn from_id(id: &str) -> Option<DatasetName> {
        serde_json::from_value(serde_json::Value::String(id.to_owned())).ok()
    }

    /// Datasets whose native labels are stances towards a topic or target
    /// rather than relation types.
    pub fn is_stance_style(self) -> bool {
        matches!(
            self,
            DatasetName::Comarg
                | DatasetName::Ukp
                | DatasetName::IbmDebater
                | DatasetName::DebatepediaProcon
        )
    }

    /// The layout each corpus ships in. Kialo and generic data are only
    /// accepted through the interchange format.
    pub fn native_format(self) -> SourceFormat {
        match self {
            DatasetName::Essays => SourceFormat::Brat,
            DatasetName::Microtexts => SourceFormat::Arggraph,
            DatasetName::NixonKennedy | DatasetName::WebContent => SourceFormat::PairCsv,
            DatasetName::DebatepediaProcon => SourceFormat::NodeXml,
            DatasetName::IbmDebater => SourceFormat::ClaimStanceCsv,
            DatasetName::Comarg => SourceFormat::ComargXml,
            DatasetName::Cdcp => SourceFormat::CdcpJson,
            DatasetName::Ukp => SourceFormat::UkpTsv,
            DatasetName::Kialo | DatasetName::Generic => SourceFormat::Interchange,
        }
    }

    /// Support/attack counts of the full original distribution.
    pub fn published_counts(self) -> Option<(usize, usize)> {
        Some(match self {
            DatasetName::Essays => (4841, 497),
            DatasetName::Microtexts => (322, 121),
            DatasetName::NixonKennedy => (356, 378),
            DatasetName::DebatepediaProcon => (319, 261),
            DatasetName::IbmDebater => (1325, 1069),
            DatasetName::Comarg => (640, 484),
            DatasetName::Cdcp => (1284, 0),
            DatasetName::Ukp => (4944, 6195),
            DatasetName::WebContent => (1348, 1316),
            DatasetName::Kialo => (68549, 65355),
            DatasetName::Generic => return None,
        })
    }

    /// Average words and characters per argument text of the full original
    /// distribution.
    pub fn published_text_stats(self) -> Option<(f64, f64)> {
        Some(match self {
            DatasetName::Essays => (14.7, 87.09),
            DatasetName::Microtexts => (13.58, 81.3),
            DatasetName::NixonKennedy => (103.57, 539.21),
            DatasetName::DebatepediaProcon => (34.81, 215.22),
            DatasetName::IbmDebater => (10.78, 68.84),
            DatasetName::Comarg => (56.81, 318.55),
            DatasetName::Cdcp => (15.4, 88.11),
            DatasetName::Ukp => (15.33, 83.64),
            DatasetName::WebContent => (19.87, 112.94),
            DatasetName::Kialo => (21.84, 135.69),
            DatasetName::Generic => return None,
        })
    }
}

impl fmt::Display for DatasetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

/// On-disk layouts understood by the adapters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceFormat {
    /// JSONL `{id, dataset, parent, child, gold}`.
    Interchange,
    /// Brat standoff `.ann` files (persuasive essays).
    Brat,
    /// Argumentation-graph XML, one file per microtext.
    Arggraph,
    /// Delimited table with `arg1`, `arg2`, `relation` columns.
    PairCsv,
    /// `<pair entailment=.. topic=..><t/><h/></pair>` XML.
    NodeXml,
    /// Claim-stance CSV with `topicText`, `claims.claimCorrectedText`, `claims.stance`.
    ClaimStanceCsv,
    /// `<unit><comment/><argument/><label/></unit>` XML.
    ComargXml,
    /// Directory of `<n>.txt` / `<n>.ann.json` pairs.
    CdcpJson,
    /// Tab-separated sentences with `topic`, `sentence`, `annotation` columns.
    UkpTsv,
}

impl SourceFormat {
    pub fn id(self) -> &'static str {
        match self {
            SourceFormat::Interchange => "interchange",
            SourceFormat::Brat => "brat",
            SourceFormat::Arggraph => "arggraph",
            SourceFormat::PairCsv => "pair_csv",
            SourceFormat::NodeXml => "node_xml",
            SourceFormat::ClaimStanceCsv => "claim_stance_csv",
            SourceFormat::ComargXml => "comarg_xml",
            SourceFormat::CdcpJson => "cdcp_json",
            SourceFormat::UkpTsv => "ukp_tsv",
        }
    }

    pub fn from_id(id: &str) -> Option<SourceFormat> {
        serde_json::from_value(serde_json::Value::String(id.to_owned())).ok()
    }
}

impl fmt::Display for SourceFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetDescriptor {
    pub name: DatasetName,
    #[serde(rename = "format", default, skip_serializing_if = "Option::is_none")]
    pub source_format: Option<SourceFormat>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_support: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_attack: Option<usize>,
}

impl DatasetDescriptor {
    /// Descriptor using the dataset's native layout and no count check.
    pub fn new(name: DatasetName) -> Self {
        Self {
            name,
            source_format: None,
            expected_support: None,
            expected_attack: None,
        }
    }

    pub fn with_format(mut self, format: SourceFormat) -> Self {
        self.source_format = Some(format);
        self
    }

    pub fn with_expected(mut self, support: usize, attack: usize) -> Self {
        self.expected_support = Some(support);
        self.expected_attack = Some(attack);
        self
    }

    /// Pins the expected counts to those of the full original distribution.
    pub fn with_published_counts(self) -> Self {
        match self.name.published_counts() {
            Some((s, a)) => self.with_expected(s, a),
            None => self,
        }
    }

    pub fn format(&self) -> SourceFormat {
        self.source_format.unwrap_or_else(|| self.name.native_format())
    }

    pub fn check_format(&self) -> Result<(), CorpusError> {
        let format = self.format();
        if format == SourceFormat::Interchange || format == self.name.native_format() {
            Ok(())
        } else {
            Err(CorpusError::FormatMismatch {
                dataset: self.name,
                format,
            })
        }
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {detail}")]
    Schema { path: PathBuf, detail: String },
    #[error("{path}:{line}: {detail}")]
    Line {
        path: PathBuf,
        line: usize,
        detail: String,
    },
    #[error("unknown {dataset} label {label:?}")]
    UnknownLabel { dataset: DatasetName, label: String },
    #[error("{dataset} cannot be read from {format} files")]
    FormatMismatch {
        dataset: DatasetName,
        format: SourceFormat,
    },
    #[error("duplicate id {id:?}")]
    DuplicateId { id: String },
    #[error("record {id:?} has an empty argument text")]
    EmptyText { id: String },
    #[error(
        "{dataset}: expected {expected_support} support / {expected_attack} attack, \
         loaded {support} / {attack}"
    )]
    CountMismatch {
        dataset: DatasetName,
        expected_support: usize,
        expected_attack: usize,
        support: usize,
        attack: usize,
    },
}

impl CorpusError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        CorpusError::Io {
            path: path.to_owned(),
            source,
        }
    }

    pub(crate) fn schema(path: &Path, detail: impl Into<String>) -> Self {
        CorpusError::Schema {
            path: path.to_owned(),
            detail: detail.into(),
        }
    }
}

/// A relation as it appears in the source corpus, label still native.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawRelation {
    pub id: String,
    pub dataset: String,
    pub parent: String,
    pub child: String,
    pub label: String,
}

/// Which vocabulary a raw label is drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelScheme {
    /// Canonical `support` / `attack`, as written by the interchange format.
    Canonical,
    Native(DatasetName),
}

impl LabelScheme {
    pub fn for_descriptor(desc: &DatasetDescriptor) -> Self {
        if desc.format() == SourceFormat::Interchange {
            LabelScheme::Canonical
        } else {
            LabelScheme::Native(desc.name)
        }
    }

    /// Maps a native label onto the binary space; `None` means the relation
    /// type is outside the task and gets dropped.
    pub fn relation(self, label: &str) -> Option<Relation> {
        match self {
            LabelScheme::Canonical => label.parse().ok(),
            LabelScheme::Native(dataset) if dataset.is_stance_style() => {
                normalize_stance(label, dataset).ok().flatten()
            }
            LabelScheme::Native(dataset) => relation_label(label, dataset),
        }
    }
}

/// Label map for corpora annotated with relation types.
fn relation_label(label: &str, dataset: DatasetName) -> Option<Relation> {
    let label = label.trim().to_lowercase();
    let label = label.as_str();
    match dataset {
        // Brat relation types plus claim stances towards the major claim.
        DatasetName::Essays => match label {
            "supports" | "for" => Some(Relation::Support),
            "attacks" | "against" => Some(Relation::Attack),
            _ => None,
        },
        // Argumentation-graph edge types. `add` and `seg` are structural.
        DatasetName::Microtexts => match label {
            "sup" | "exa" => Some(Relation::Support),
            "reb" | "und" => Some(Relation::Attack),
            _ => None,
        },
        DatasetName::Cdcp => match label {
            "reason" | "evidence" => Some(Relation::Support),
            _ => None,
        },
        _ => match label {
            "support" | "supports" => Some(Relation::Support),
            "attack" | "attacks" => Some(Relation::Attack),
            _ => None,
        },
    }
}

/// Maps a stance-style label onto the binary space.
///
/// `Ok(None)` marks a known label that is outside the task (neutral or
/// non-argumentative). Unknown labels are an error so that adapter drift is
/// noticed instead of silently shrinking the corpus.
pub fn normalize_stance(label: &str, dataset: DatasetName) -> Result<Option<Relation>, CorpusError> {
    let unknown = || CorpusError::UnknownLabel {
        dataset,
        label: label.to_owned(),
    };
    let trimmed = label.trim();
    let lower = trimmed.to_lowercase();
    let relation = match dataset {
        DatasetName::Comarg => {
            // Single-letter codes are case sensitive: A/a attack, S/s support.
            match trimmed {
                "A" | "a" => return Ok(Some(Relation::Attack)),
                "S" | "s" => return Ok(Some(Relation::Support)),
                "N" => return Ok(None),
                _ => {}
            }
            match lower.as_str() {
                "1" | "explicit attack" | "vague/implicit attack" | "implicit attack"
                | "vague attack" => Some(Relation::Attack),
                "5" | "explicit support" | "vague/implicit support" | "implicit support"
                | "vague support" => Some(Relation::Support),
                "2" => Some(Relation::Attack),
                "4" => Some(Relation::Support),
                "3" | "no use" | "neutral" | "no relation" | "none" => None,
                _ => return Err(unknown()),
            }
        }
        DatasetName::Ukp => match lower.as_str() {
            "argument_for" => Some(Relation::Support),
            "argument_against" => Some(Relation::Attack),
            "noargument" => None,
            _ => return Err(unknown()),
        },
        DatasetName::IbmDebater => match lower.as_str() {
            "pro" => Some(Relation::Support),
            "con" => Some(Relation::Attack),
            _ => return Err(unknown()),
        },
        DatasetName::DebatepediaProcon => match lower.as_str() {
            "yes" | "support" => Some(Relation::Support),
            "no" | "attack" => Some(Relation::Attack),
            _ => return Err(unknown()),
        },
        _ => return Err(unknown()),
    };
    Ok(relation)
}

/// Bookkeeping for one load.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct LoadReport {
    pub total_native: usize,
    pub emitted: usize,
    /// Dropped native labels with their counts.
    pub dropped: BTreeMap<String, usize>,
}

impl LoadReport {
    pub fn dropped_total(&self) -> usize {
        self.dropped.values().sum()
    }
}

/// Result of [`filter_binary`] and [`load_dataset`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    pub pairs: Vec<ArgumentPair>,
    pub report: LoadReport,
}

impl Corpus {
    pub fn counts(&self) -> (usize, usize) {
        count_relations(&self.pairs)
    }
}

pub fn count_relations(pairs: &[ArgumentPair]) -> (usize, usize) {
    pairs.iter().fold((0, 0), |(s, a), p| match p.gold {
        Relation::Support => (s + 1, a),
        Relation::Attack => (s, a + 1),
    })
}

/// Keeps the raw relations whose label maps to support or attack, in input
/// order. Unknown labels are dropped and tallied.
pub fn filter_binary(raw: Vec<RawRelation>, scheme: LabelScheme) -> Result<Corpus, CorpusError> {
    let mut report = LoadReport {
        total_native: raw.len(),
        ..LoadReport::default()
    };
    let mut pairs = Vec::with_capacity(raw.len());
    for r in raw {
        match scheme.relation(&r.label) {
            Some(gold) => pairs.push(ArgumentPair::new(r.id, r.dataset, &r.parent, &r.child, gold)?),
            None => *report.dropped.entry(r.label.trim().to_owned()).or_default() += 1,
        }
    }
    report.emitted = pairs.len();
    Ok(Corpus { pairs, report })
}

/// Loads one corpus, keeps support/attack pairs and checks expected counts.
pub fn load_dataset(desc: &DatasetDescriptor, path: &Path) -> Result<Corpus, CorpusError> {
    desc.check_format()?;
    if !path.exists() {
        return Err(CorpusError::io(
            path,
            std::io::Error::new(std::io::ErrorKind::NotFound, "no such file or directory"),
        ));
    }
    let raw = match desc.format() {
        SourceFormat::Interchange => interchange::read_raw(path, desc.name)?,
        SourceFormat::Brat => adapters::essays::read(path)?,
        SourceFormat::Arggraph => adapters::microtexts::read(path)?,
        SourceFormat::PairCsv => adapters::tables::read_pair_csv(path, desc.name)?,
        SourceFormat::NodeXml => adapters::debatepedia::read(path)?,
        SourceFormat::ClaimStanceCsv => adapters::tables::read_claim_stance(path)?,
        SourceFormat::ComargXml => adapters::comarg::read(path)?,
        SourceFormat::CdcpJson => adapters::cdcp::read(path)?,
        SourceFormat::UkpTsv => adapters::tables::read_ukp(path)?,
    };

    let mut seen = HashSet::with_capacity(raw.len());
    for r in &raw {
        if !seen.insert(r.id.as_str()) {
            return Err(CorpusError::DuplicateId { id: r.id.clone() });
        }
    }
    let scheme = LabelScheme::for_descriptor(desc);
    if let LabelScheme::Native(dataset) = scheme {
        if dataset.is_stance_style() {
            for r in &raw {
                normalize_stance(&r.label, dataset)?;
            }
        }
    }

    let corpus = filter_binary(raw, scheme)?;
    if let (Some(es), Some(ea)) = (desc.expected_support, desc.expected_attack) {
        let (s, a) = corpus.counts();
        if (s, a) != (es, ea) {
            return Err(CorpusError::CountMismatch {
                dataset: desc.name,
                expected_support: es,
                expected_attack: ea,
                support: s,
                attack: a,
            });
        }
    }
    Ok(corpus)
}
