//! Scoring.
//!
//! Per dataset: F1 of each class over the scored pairs, and the "both" score,
//! which is the class F1s weighted by their gold counts. Across datasets:
//! plain means of each column and macro F1 as the mean of the support and
//! attack averages. A dataset that was evaluated but has no gold pair of a
//! class contributes 0 for that class and still counts in the denominator;
//! datasets that were not evaluated simply have no row.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{ArgumentPair, DatasetName, Relation};
use crate::labeling::{apply_policy, Disposition, LabelKind, LabelPolicy, NormalizedLabel};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("cannot summarize an empty set of rows")]
    NoRows,
    #[error("both-F1 needs at least one gold pair")]
    ZeroCount,
    #[error("{path}:{line}: {detail}")]
    Record {
        path: PathBuf,
        line: usize,
        detail: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// One line of a records file: the pair, what the backend said and how it
/// was read.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub id: String,
    pub dataset: String,
    pub parent: String,
    pub child: String,
    pub gold: Relation,
    pub raw_text: String,
    pub label_kind: LabelKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub other_text: Option<String>,
    pub latency_seconds: f64,
    pub cached: bool,
    pub backend_id: String,
    /// Set on records whose backend call failed; `label_kind` is then `failed`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl PredictionRecord {
    pub fn answered(
        pair: &ArgumentPair,
        raw_text: String,
        label: &NormalizedLabel,
        latency_seconds: f64,
        cached: bool,
        backend_id: String,
    ) -> Self {
        Self {
            id: pair.id.clone(),
            dataset: pair.dataset.clone(),
            parent: pair.parent_text.clone(),
            child: pair.child_text.clone(),
            gold: pair.gold,
            raw_text,
            label_kind: label.kind(),
            other_text: label.other_text().map(str::to_owned),
            latency_seconds,
            cached,
            backend_id,
            error: None,
        }
    }

    pub fn failed(pair: &ArgumentPair, backend_id: String, error: String) -> Self {
        Self {
            id: pair.id.clone(),
            dataset: pair.dataset.clone(),
            parent: pair.parent_text.clone(),
            child: pair.child_text.clone(),
            gold: pair.gold,
            raw_text: String::new(),
            label_kind: LabelKind::Failed,
            other_text: None,
            latency_seconds: 0.0,
            cached: false,
            backend_id,
            error: Some(error),
        }
    }

    pub fn is_failed(&self) -> bool {
        self.label_kind == LabelKind::Failed
    }

    /// The normalized label, `None` for failed records.
    pub fn label(&self) -> Option<NormalizedLabel> {
        NormalizedLabel::from_parts(self.label_kind, self.other_text.as_deref())
    }
}

/// Confusion counts for one class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl ClassCounts {
    pub fn from_predictions(predictions: &[(Relation, Disposition)], class: Relation) -> Self {
        let mut c = ClassCounts::default();
        for &(gold, disposition) in predictions {
            match disposition {
                Disposition::Scored(pred) => match (gold == class, pred == class) {
                    (true, true) => c.tp += 1,
                    (true, false) => c.fn_ += 1,
                    (false, true) => c.fp += 1,
                    (false, false) => {}
                },
                Disposition::Missed if gold == class => c.fn_ += 1,
                Disposition::Missed | Disposition::Ignored => {}
            }
        }
        c
    }

    /// Gold instances of the class among scored pairs.
    pub fn support(&self) -> usize {
        self.tp + self.fn_
    }

    /// `2tp / (2tp + fp + fn)`, absent without gold instances.
    pub fn f1(&self) -> Option<f64> {
        if self.support() == 0 {
            return None;
        }
        Some(2.0 * self.tp as f64 / (2 * self.tp + self.fp + self.fn_) as f64)
    }
}

pub fn class_f1(predictions: &[(Relation, Disposition)], class: Relation) -> Option<f64> {
    ClassCounts::from_predictions(predictions, class).f1()
}

/// Gold-count weighted mean of the two class F1s. An absent F1 only occurs
/// with a zero count and so carries no weight.
pub fn both_f1(
    f1_support: Option<f64>,
    f1_attack: Option<f64>,
    n_support: usize,
    n_attack: usize,
) -> Result<f64, MetricsError> {
    let total = n_support + n_attack;
    if total == 0 {
        return Err(MetricsError::ZeroCount);
    }
    let weighted = f1_support.unwrap_or(0.0) * n_support as f64 + f1_attack.unwrap_or(0.0) * n_attack as f64;
    Ok(weighted / total as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatencySummary {
    pub mean_seconds: f64,
    pub n: usize,
    /// Every contributing record came from the replay cache.
    pub replayed: bool,
}

/// Mean latency over live (non-cached) answered records. When every answer
/// was replayed, the recorded latencies are averaged and flagged instead.
pub fn aggregate_latency<'a, I>(records: I) -> Option<LatencySummary>
where
    I: IntoIterator<Item = &'a PredictionRecord>,
{
    let (mut live_sum, mut live_n, mut cached_sum, mut cached_n) = (0.0, 0usize, 0.0, 0usize);
    for r in records.into_iter().filter(|r| !r.is_failed()) {
        if r.cached {
            cached_sum += r.latency_seconds;
            cached_n += 1;
        } else {
            live_sum += r.latency_seconds;
            live_n += 1;
        }
    }
    if live_n > 0 {
        Some(LatencySummary {
            mean_seconds: live_sum / live_n as f64,
            n: live_n,
            replayed: false,
        })
    } else if cached_n > 0 {
        Some(LatencySummary {
            mean_seconds: cached_sum / cached_n as f64,
            n: cached_n,
            replayed: true,
        })
    } else {
        None
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetScores {
    pub dataset: String,
    pub f1_support: Option<f64>,
    pub f1_attack: Option<f64>,
    pub f1_both: f64,
    /// Gold counts among scored pairs.
    pub n_support: usize,
    pub n_attack: usize,
    pub n_ignored: usize,
    pub n_failed: usize,
    /// Extra labels left out of scoring, with counts.
    #[serde(default)]
    pub ignored_labels: BTreeMap<String, usize>,
    pub latency: Option<LatencySummary>,
}

impl DatasetScores {
    /// Row built from already known class scores, as when re-deriving a
    /// published table.
    pub fn from_class_scores(
        dataset: impl Into<String>,
        f1_support: Option<f64>,
        f1_attack: Option<f64>,
        n_support: usize,
        n_attack: usize,
    ) -> Result<Self, MetricsError> {
        Ok(Self {
            dataset: dataset.into(),
            f1_support,
            f1_attack,
            f1_both: both_f1(f1_support, f1_attack, n_support, n_attack)?,
            n_support,
            n_attack,
            n_ignored: 0,
            n_failed: 0,
            ignored_labels: BTreeMap::new(),
            latency: None,
        })
    }

    /// Scores the records of one dataset.
    pub fn from_records(dataset: &str, records: &[&PredictionRecord], policy: LabelPolicy) -> Self {
        let mut predictions = Vec::with_capacity(records.len());
        let mut n_ignored = 0;
        let mut n_failed = 0;
        let mut ignored_labels = BTreeMap::new();
        for r in records {
            let Some(label) = r.label() else {
                n_failed += 1;
                continue;
            };
            let disposition = apply_policy(&label, policy);
            if let Some(key) = label.tally_key() {
                if disposition == Disposition::Ignored {
                    n_ignored += 1;
                    *ignored_labels.entry(key.to_owned()).or_insert(0) += 1;
                }
            }
            predictions.push((r.gold, disposition));
        }
        let support = ClassCounts::from_predictions(&predictions, Relation::Support);
        let attack = ClassCounts::from_predictions(&predictions, Relation::Attack);
        let (n_support, n_attack) = (support.support(), attack.support());
        let (f1_support, f1_attack) = (support.f1(), attack.f1());
        let f1_both = both_f1(f1_support, f1_attack, n_support, n_attack).unwrap_or_else(|_| {
            log::warn!("{dataset}: no scored pairs, reporting 0 for both-F1");
            0.0
        });
        Self {
            dataset: dataset.to_owned(),
            f1_support,
            f1_attack,
            f1_both,
            n_support,
            n_attack,
            n_ignored,
            n_failed,
            ignored_labels,
            latency: aggregate_latency(records.iter().copied()),
        }
    }

    pub fn display_name(&self) -> &str {
        DatasetName::from_id(&self.dataset)
            .map(DatasetName::display_name)
            .unwrap_or(&self.dataset)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryTable {
    pub rows: Vec<DatasetScores>,
    pub avg_support: f64,
    pub avg_attack: f64,
    pub avg_both: f64,
    pub macro_f1: f64,
    pub latency: Option<LatencySummary>,
}

/// Canonical row order: the published datasets first in table order, then
/// anything else by name.
fn row_order(dataset: &str) -> (usize, String) {
    let rank = DatasetName::from_id(dataset)
        .and_then(|d| DatasetName::PUBLISHED.iter().position(|p| *p == d))
        .unwrap_or(DatasetName::PUBLISHED.len());
    (rank, dataset.to_owned())
}

pub fn summarize(mut rows: Vec<DatasetScores>) -> Result<SummaryTable, MetricsError> {
    if rows.is_empty() {
        return Err(MetricsError::NoRows);
    }
    rows.sort_by_cached_key(|r| row_order(&r.dataset));
    let n = rows.len() as f64;
    let mean = |f: &dyn Fn(&DatasetScores) -> f64| rows.iter().map(f).sum::<f64>() / n;
    let avg_support = mean(&|r| r.f1_support.unwrap_or(0.0));
    let avg_attack = mean(&|r| r.f1_attack.unwrap_or(0.0));
    let avg_both = mean(&|r| r.f1_both);

    let timed: Vec<&LatencySummary> = rows.iter().filter_map(|r| r.latency.as_ref()).collect();
    let total_n: usize = timed.iter().map(|l| l.n).sum();
    let latency = (total_n > 0).then(|| LatencySummary {
        mean_seconds: timed.iter().map(|l| l.mean_seconds * l.n as f64).sum::<f64>() / total_n as f64,
        n: total_n,
        replayed: timed.iter().all(|l| l.replayed),
    });

    Ok(SummaryTable {
        rows,
        avg_support,
        avg_attack,
        avg_both,
        macro_f1: (avg_support + avg_attack) / 2.0,
        latency,
    })
}

/// Groups records by dataset and summarizes them.
pub fn score_records(records: &[PredictionRecord], policy: LabelPolicy) -> Result<SummaryTable, MetricsError> {
    let mut by_dataset: BTreeMap<&str, Vec<&PredictionRecord>> = BTreeMap::new();
    for r in records {
        by_dataset.entry(&r.dataset).or_default().push(r);
    }
    let rows = by_dataset
        .into_iter()
        .map(|(dataset, recs)| DatasetScores::from_records(dataset, &recs, policy))
        .collect();
    summarize(rows)
}

pub fn read_records(path: &Path) -> Result<Vec<PredictionRecord>, MetricsError> {
    let io = |source| MetricsError::Io {
        path: path.to_owned(),
        source,
    };
    let file = File::open(path).map_err(io)?;
    let mut out = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io)?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|e| MetricsError::Record {
            path: path.to_owned(),
            line: idx + 1,
            detail: e.to_string(),
        })?;
        out.push(record);
    }
    Ok(out)
}

pub fn write_record<W: Write>(out: &mut W, record: &PredictionRecord) -> std::io::Result<()> {
    serde_json::to_writer(&mut *out, record)?;
    out.write_all(b"\n")
}

/// Scores a records file exactly as an in-process run would.
pub fn score_predictions_file(path: &Path, policy: LabelPolicy) -> Result<SummaryTable, MetricsError> {
    score_records(&read_records(path)?, policy)
}

/// Percentage rounded half away from zero.
pub fn percent(x: f64) -> i64 {
    (x * 100.0).round() as i64
}

fn percent_or_dash(x: Option<f64>) -> String {
    x.map(|v| percent(v).to_string()).unwrap_or_else(|| "-".into())
}

fn latency_cell(l: Option<&LatencySummary>) -> String {
    match l {
        Some(l) if l.replayed => format!("{:.3} (replayed)", l.mean_seconds),
        Some(l) => format!("{:.3}", l.mean_seconds),
        None => "-".into(),
    }
}

impl SummaryTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "dataset,f1_support,f1_attack,f1_both,n_support,n_attack,n_ignored,n_failed,mean_latency_seconds\n",
        );
        for r in &self.rows {
            let latency = r.latency.map(|l| l.mean_seconds.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                csv_cell(r.display_name()),
                percent_or_dash(r.f1_support),
                percent_or_dash(r.f1_attack),
                percent(r.f1_both),
                r.n_support,
                r.n_attack,
                r.n_ignored,
                r.n_failed,
                latency
            );
        }
        let latency = self.latency.map(|l| l.mean_seconds.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "Average,{},{},{},,,,,{}",
            percent(self.avg_support),
            percent(self.avg_attack),
            percent(self.avg_both),
            latency
        );
        let _ = writeln!(out, "Macro F1,,,{},,,,,", percent(self.macro_f1));
        out
    }

    /// Aligned text table with `support / attack / both` cells.
    pub fn to_text_table(&self) -> String {
        let mut lines: Vec<(String, String, String)> = vec![(
            "Dataset".into(),
            "Support / Attack / Both".into(),
            "Ignored / Failed".into(),
        )];
        for r in &self.rows {
            lines.push((
                r.display_name().to_owned(),
                format!(
                    "{} / {} / {}",
                    percent_or_dash(r.f1_support),
                    percent_or_dash(r.f1_attack),
                    percent(r.f1_both)
                ),
                format!("{} / {}", r.n_ignored, r.n_failed),
            ));
        }
        lines.push((
            "Average".into(),
            format!(
                "{} / {} / {}",
                percent(self.avg_support),
                percent(self.avg_attack),
                percent(self.avg_both)
            ),
            String::new(),
        ));
        lines.push(("Macro F1".into(), percent(self.macro_f1).to_string(), String::new()));
        lines.push((
            "Inference Time (s)".into(),
            latency_cell(self.latency.as_ref()),
            String::new(),
        ));

        let w0 = lines.iter().map(|l| l.0.chars().count()).max().unwrap_or(0);
        let w1 = lines.iter().map(|l| l.1.chars().count()).max().unwrap_or(0);
        let mut out = String::new();
        for (a, b, c) in lines {
            let line = format!("{a:<w0$}  {b:>w1$}  {c}");
            out.push_str(line.trim_end());
            out.push('\n');
        }
        out
    }

    /// Extra-label tally per dataset, for datasets that had any.
    pub fn ignored_labels(&self) -> BTreeMap<String, BTreeMap<String, usize>> {
        self.rows
            .iter()
            .filter(|r| !r.ignored_labels.is_empty())
            .map(|r| (r.dataset.clone(), r.ignored_labels.clone()))
            .collect()
    }
}

fn csv_cell(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Relation::{Attack, Support};

    fn scored(gold: Relation, pred: Relation) -> (Relation, Disposition) {
        (gold, Disposition::Scored(pred))
    }

    #[test]
    fn perfect_classifier() {
        let p = vec![scored(Support, Support), scored(Attack, Attack), scored(Support, Support)];
        assert_eq!(class_f1(&p, Support), Some(1.0));
        assert_eq!(class_f1(&p, Attack), Some(1.0));
    }

    #[test]
    fn hand_computed_two_thirds() {
        // tp=2, fp=1, fn=1 for Support.
        let p = vec![
            scored(Support, Support),
            scored(Support, Support),
            scored(Attack, Support),
            scored(Support, Attack),
        ];
        let c = ClassCounts::from_predictions(&p, Support);
        assert_eq!(c, ClassCounts { tp: 2, fp: 1, fn_: 1 });
        assert!((c.f1().unwrap() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn all_wrong() {
        let p = vec![scored(Support, Attack), scored(Attack, Support)];
        assert_eq!(class_f1(&p, Support), Some(0.0));
        assert_eq!(class_f1(&p, Attack), Some(0.0));
    }

    #[test]
    fn absent_class() {
        let p = vec![scored(Support, Support), scored(Support, Attack)];
        assert_eq!(class_f1(&p, Attack), None);
    }

    #[test]
    fn count_as_error_is_a_miss() {
        // Unparseable on gold Attack under count_as_error: attack fn, no fp anywhere.
        let p = vec![
            scored(Attack, Attack),
            (Attack, Disposition::Missed),
            scored(Support, Support),
        ];
        assert_eq!(ClassCounts::from_predictions(&p, Attack), ClassCounts { tp: 1, fp: 0, fn_: 1 });
        assert_eq!(ClassCounts::from_predictions(&p, Support), ClassCounts { tp: 1, fp: 0, fn_: 0 });
        let ignored = vec![scored(Attack, Attack), (Attack, Disposition::Ignored)];
        assert_eq!(ClassCounts::from_predictions(&ignored, Attack), ClassCounts { tp: 1, fp: 0, fn_: 0 });
    }

    #[test]
    fn both_examples() {
        let essays = both_f1(Some(0.85), Some(0.38), 4841, 497).unwrap();
        assert!((essays - 0.806).abs() < 5e-4, "{essays}");
        let ukp = both_f1(Some(0.84), Some(0.89), 4944, 6195).unwrap();
        assert!((ukp - 0.868).abs() < 5e-4, "{ukp}");
        assert!((both_f1(Some(0.4), Some(0.6), 10, 10).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(both_f1(Some(0.75), None, 1284, 0).unwrap(), 0.75);
        assert!(matches!(both_f1(None, None, 0, 0), Err(MetricsError::ZeroCount)));
    }

    #[test]
    fn summary_of_single_perfect_row() {
        let row = DatasetScores::from_class_scores("x", Some(1.0), Some(1.0), 3, 4).unwrap();
        let t = summarize(vec![row]).unwrap();
        assert_eq!((t.avg_support, t.avg_attack, t.avg_both, t.macro_f1), (1.0, 1.0, 1.0, 1.0));
    }

    #[test]
    fn absent_class_counts_as_zero_in_average() {
        let rows = vec![
            DatasetScores::from_class_scores("cdcp", Some(0.8), None, 10, 0).unwrap(),
            DatasetScores::from_class_scores("ukp", Some(0.6), Some(0.6), 10, 10).unwrap(),
        ];
        let t = summarize(rows).unwrap();
        assert!((t.avg_attack - 0.3).abs() < 1e-15);
        assert!((t.avg_support - 0.7).abs() < 1e-15);
        assert!((t.macro_f1 - 0.5).abs() < 1e-15);
    }

    #[test]
    fn empty_summary_is_error() {
        assert!(matches!(summarize(vec![]), Err(MetricsError::NoRows)));
    }

    #[test]
    fn percent_rounds_half_away_from_zero() {
        assert_eq!(percent(0.745), 75);
        assert_eq!(percent(0.825), 83);
        assert_eq!(percent(0.8237), 82);
        assert_eq!(percent(0.0), 0);
    }

    fn record(gold: Relation, kind: LabelKind, latency: f64, cached: bool) -> PredictionRecord {
        PredictionRecord {
            id: "i".into(),
            dataset: "generic".into(),
            parent: "p".into(),
            child: "c".into(),
            gold,
            raw_text: String::new(),
            label_kind: kind,
            other_text: (kind == LabelKind::Other).then(|| "compare".into()),
            latency_seconds: latency,
            cached,
            backend_id: "mock".into(),
            error: None,
        }
    }

    #[test]
    fn latency_means() {
        let recs = [
            record(Support, LabelKind::Support, 1.0, false),
            record(Support, LabelKind::Support, 3.0, false),
        ];
        assert_eq!(aggregate_latency(&recs).unwrap().mean_seconds, 2.0);

        let mixed = [
            record(Support, LabelKind::Support, 1.0, false),
            record(Support, LabelKind::Support, 100.0, true),
            record(Support, LabelKind::Support, 2.0, false),
        ];
        let l = aggregate_latency(&mixed).unwrap();
        assert_eq!((l.mean_seconds, l.n, l.replayed), (1.5, 2, false));

        let replayed = [record(Support, LabelKind::Support, 4.0, true)];
        let l = aggregate_latency(&replayed).unwrap();
        assert_eq!((l.mean_seconds, l.replayed), (4.0, true));
        assert_eq!(aggregate_latency(&[] as &[PredictionRecord]), None);
    }

    #[test]
    fn accounting_per_dataset() {
        let mut failed = record(Attack, LabelKind::Failed, 0.0, false);
        failed.error = Some("boom".into());
        let recs = [
            record(Support, LabelKind::Support, 0.1, false),
            record(Attack, LabelKind::Other, 0.1, false),
            record(Attack, LabelKind::Unparseable, 0.1, false),
            record(Attack, LabelKind::Attack, 0.1, false),
            failed,
        ];
        let refs: Vec<_> = recs.iter().collect();
        let row = DatasetScores::from_records("generic", &refs, LabelPolicy::Ignore);
        assert_eq!((row.n_support, row.n_attack, row.n_ignored, row.n_failed), (1, 1, 2, 1));
        assert_eq!(row.n_support + row.n_attack + row.n_ignored + row.n_failed, recs.len());
        assert_eq!(row.ignored_labels.get("compare"), Some(&1));
        assert_eq!(row.ignored_labels.get("(unparseable)"), Some(&1));
        assert_eq!(row.f1_both, 1.0);

        let strict = DatasetScores::from_records("generic", &refs, LabelPolicy::CountAsError);
        assert_eq!((strict.n_attack, strict.n_ignored), (3, 0));
        assert!((strict.f1_attack.unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn text_table_layout() {
        let rows = vec![
            DatasetScores::from_class_scores("essays", Some(0.85), Some(0.38), 4841, 497).unwrap(),
            DatasetScores::from_class_scores("cdcp", Some(0.75), None, 1284, 0).unwrap(),
        ];
        let text = summarize(rows).unwrap().to_text_table();
        assert!(text.contains("Essays"), "{text}");
        assert!(text.contains("85 / 38 / 81"), "{text}");
        assert!(text.contains("75 / - / 75"), "{text}");
        let csv = summarize(vec![DatasetScores::from_class_scores("cdcp", Some(0.75), None, 1284, 0).unwrap()])
            .unwrap()
            .to_csv();
        assert!(csv.contains("\nCDCP,75,-,75,1284,0,0,0,\n"), "{csv}");
    }
}
