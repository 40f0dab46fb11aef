//! Batch orchestration: load corpora, render prompts, query the backend with
//! a bounded number of calls in flight, and write records and reports.
//!
//! Records are written in input order by a single writer no matter in which
//! order the calls finish. A failed call yields a failure record and the run
//! carries on.

mod config;

use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;
use std::thread;

use serde::Serialize;
use thiserror::Error;

use crate::backend::{
    Backend, BackendError, GenerationParams, HttpBackend, MockBackend, MockScript, ReplayBackend, Retry,
};
use crate::corpus::{compute_stats, load_dataset, ArgumentPair, CorpusError, CorpusStats, LoadReport};
use crate::labeling::{normalize, LabelPolicy};
use crate::metrics::{self, write_record, MetricsError, PredictionRecord, SummaryTable};
use crate::prompting::{PromptConfig, PromptError};

pub use config::{BackendConfig, DatasetEntry, MockSettings, RunConfig};

pub const RECORDS_FILE: &str = "records.jsonl";
pub const SUMMARY_CSV: &str = "summary.csv";
pub const SUMMARY_TXT: &str = "summary.txt";
pub const SUMMARY_JSON: &str = "summary.json";
pub const REPORT_JSON: &str = "report.json";

#[derive(Debug, Error)]
pub enum RunError {
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),
    #[error("{0} already exists (use --force to overwrite)")]
    OutputExists(PathBuf),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error("backend unreachable: {0}")]
    Unreachable(BackendError),
    #[error("backend setup failed: {0}")]
    Backend(BackendError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl RunError {
    /// True for problems with the invocation or configuration, as opposed to
    /// failures while running.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            RunError::Config(_) | RunError::OutputExists(_) | RunError::Prompt(PromptError::InvalidConfig(_))
        )
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.to_owned(),
        source,
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Overwrite the artifacts of an earlier run in the output directory.
    pub force: bool,
}

/// One loaded corpus with its load bookkeeping.
#[derive(Debug, Clone)]
pub struct LoadedDataset {
    pub entry: DatasetEntry,
    pub pairs: Vec<ArgumentPair>,
    pub report: LoadReport,
}

pub fn load_datasets(config: &RunConfig) -> Result<Vec<LoadedDataset>, RunError> {
    config
        .datasets
        .iter()
        .map(|entry| {
            let corpus = load_dataset(&entry.effective_descriptor(), &entry.path)?;
            Ok(LoadedDataset {
                entry: entry.clone(),
                pairs: corpus.pairs,
                report: corpus.report,
            })
        })
        .collect()
}

/// Label counts and text statistics per configured dataset.
pub fn dataset_stats(config: &RunConfig) -> Result<Vec<(DatasetEntry, CorpusStats)>, RunError> {
    Ok(load_datasets(config)?
        .into_iter()
        .map(|d| {
            let stats = compute_stats(&d.pairs);
            (d.entry, stats)
        })
        .collect())
}

pub fn render_stats_table(rows: &[(DatasetEntry, CorpusStats)]) -> String {
    let mut lines = vec![[
        "Dataset".to_owned(),
        "#Support".to_owned(),
        "#Attack".to_owned(),
        "Total#".to_owned(),
        "Avg words".to_owned(),
        "Avg chars".to_owned(),
    ]];
    for (entry, s) in rows {
        lines.push([
            entry.descriptor.name.display_name().to_owned(),
            s.n_support.to_string(),
            s.n_attack.to_string(),
            s.total().to_string(),
            format!("{:.2}", s.avg_words),
            format!("{:.2}", s.avg_chars),
        ]);
    }
    let widths: Vec<usize> = (0..6)
        .map(|i| lines.iter().map(|l| l[i].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for line in lines {
        let mut row = format!("{:<w$}", line[0], w = widths[0]);
        for (cell, w) in line.iter().zip(&widths).skip(1) {
            row.push_str(&format!("  {cell:>w$}"));
        }
        out.push_str(&row);
        out.push('\n');
    }
    out
}

/// Builds the configured backend. The oracle mock needs the rendered prompts
/// and their gold labels.
pub fn build_backend(
    config: &BackendConfig,
    seed: u64,
    retry: crate::backend::RetryPolicy,
    oracle: &[(String, crate::corpus::Relation)],
) -> Result<Box<dyn Backend>, RunError> {
    Ok(match config {
        BackendConfig::Http(settings) => Box::new(Retry::new(HttpBackend::new(settings.clone()), retry)),
        BackendConfig::Mock(m) => {
            let script = if let Some(answers) = &m.answers {
                MockScript::Sequence(answers.clone())
            } else if let Some(choices) = &m.random {
                MockScript::Hashed {
                    seed,
                    choices: choices.clone(),
                }
            } else {
                MockScript::ByPrompt {
                    answers: oracle
                        .iter()
                        .map(|(prompt, gold)| (prompt.clone(), gold.as_str().to_owned()))
                        .collect(),
                    default: String::new(),
                }
            };
            let mut mock = MockBackend::new(script);
            if let Some(l) = m.latency_seconds {
                mock = mock.with_latency(l);
            }
            Box::new(mock)
        }
        BackendConfig::Replay { cache, record } => match record {
            None => Box::new(ReplayBackend::open(cache).map_err(RunError::Backend)?),
            Some(inner) => {
                let inner = build_backend(inner, seed, retry, oracle)?;
                Box::new(ReplayBackend::recording(cache, inner).map_err(RunError::Backend)?)
            }
        },
    })
}

/// Queries `backend` for every prompt with at most `limit` calls in flight
/// and hands each record to `sink` in input order.
pub fn execute<B, F>(
    pairs: &[ArgumentPair],
    prompts: &[String],
    backend: &B,
    params: &GenerationParams,
    limit: usize,
    mut sink: F,
) -> Result<Vec<PredictionRecord>, RunError>
where
    B: Backend + ?Sized,
    F: FnMut(&PredictionRecord) -> Result<(), RunError>,
{
    assert_eq!(pairs.len(), prompts.len());
    let workers = limit.max(1).min(pairs.len());
    let next = AtomicUsize::new(0);
    let (tx, rx) = mpsc::channel::<(usize, PredictionRecord)>();
    let mut ordered = Vec::with_capacity(pairs.len());

    thread::scope(|scope| -> Result<(), RunError> {
        for _ in 0..workers {
            let tx = tx.clone();
            let next = &next;
            scope.spawn(move || loop {
                let idx = next.fetch_add(1, Ordering::SeqCst);
                let Some(pair) = pairs.get(idx) else { break };
                let record = match backend.complete(&prompts[idx], params) {
                    Ok(resp) => {
                        let label = normalize(&resp.raw_text);
                        PredictionRecord::answered(
                            pair,
                            resp.raw_text,
                            &label,
                            resp.latency_seconds,
                            resp.cached,
                            resp.backend_id,
                        )
                    }
                    Err(e) => {
                        log::warn!("{}: {e}", pair.id);
                        PredictionRecord::failed(pair, backend.id().to_owned(), e.to_string())
                    }
                };
                if tx.send((idx, record)).is_err() {
                    break;
                }
            });
        }
        drop(tx);

        let mut pending: BTreeMap<usize, PredictionRecord> = BTreeMap::new();
        for (idx, record) in rx {
            pending.insert(idx, record);
            while let Some(record) = pending.remove(&ordered.len()) {
                sink(&record)?;
                ordered.push(record);
            }
        }
        Ok(())
    })?;
    Ok(ordered)
}

/// Per-dataset bookkeeping written to `report.json`.
#[derive(Debug, Clone, Serialize)]
pub struct DatasetReport {
    pub load: LoadReport,
    pub records: usize,
    pub scored: usize,
    pub ignored: usize,
    pub failed: usize,
    pub ignored_labels: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub total_records: usize,
    pub label_policy: LabelPolicy,
    pub generation: GenerationParams,
    pub backend: String,
    pub datasets: BTreeMap<String, DatasetReport>,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub records: Vec<PredictionRecord>,
    pub summary: SummaryTable,
    pub report: RunReport,
    pub output_dir: PathBuf,
}

/// Runs a config end to end with the backend it describes.
pub fn run(config: &RunConfig, options: RunOptions) -> Result<RunOutcome, RunError> {
    let (datasets, prompts, prompt_pairs) = prepare(config, options)?;
    let oracle: Vec<_> = prompts
        .iter()
        .zip(&prompt_pairs)
        .map(|(p, pair)| (p.clone(), pair.gold))
        .collect();
    let backend = build_backend(&config.backend, config.seed, config.retry, &oracle)?;
    execute_and_write(config, &datasets, &prompt_pairs, &prompts, backend.as_ref())
}

/// Runs a config against a caller-supplied backend; the config's backend
/// section is ignored.
pub fn run_with_backend<B: Backend + ?Sized>(
    config: &RunConfig,
    backend: &B,
    options: RunOptions,
) -> Result<RunOutcome, RunError> {
    let (datasets, prompts, pairs) = prepare(config, options)?;
    execute_and_write(config, &datasets, &pairs, &prompts, backend)
}

type Prepared = (Vec<LoadedDataset>, Vec<String>, Vec<ArgumentPair>);

fn prepare(config: &RunConfig, options: RunOptions) -> Result<Prepared, RunError> {
    let problems = config.validate();
    if !problems.is_empty() {
        return Err(RunError::Config(problems));
    }
    let records_path = config.output_dir.join(RECORDS_FILE);
    if records_path.exists() && !options.force {
        return Err(RunError::OutputExists(records_path));
    }
    let prompt_config: PromptConfig = config.load_prompt_config()?;
    let datasets = load_datasets(config)?;
    let pairs: Vec<ArgumentPair> = datasets.iter().flat_map(|d| d.pairs.iter().cloned()).collect();
    let prompts = pairs
        .iter()
        .map(|p| prompt_config.build_prompt(p))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((datasets, prompts, pairs))
}

fn execute_and_write<B: Backend + ?Sized>(
    config: &RunConfig,
    datasets: &[LoadedDataset],
    pairs: &[ArgumentPair],
    prompts: &[String],
    backend: &B,
) -> Result<RunOutcome, RunError> {
    backend.probe().map_err(RunError::Unreachable)?;
    let out_dir = &config.output_dir;
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;

    let records_path = out_dir.join(RECORDS_FILE);
    let file = File::create(&records_path).map_err(io_err(&records_path))?;
    let mut writer = BufWriter::new(file);
    let records = execute(
        pairs,
        prompts,
        backend,
        &config.generation,
        config.concurrency_limit,
        |record| {
            write_record(&mut writer, record)
                .and_then(|_| writer.flush())
                .map_err(io_err(&records_path))
        },
    )?;
    drop(writer);

    let summary = metrics::score_records(&records, config.label_policy)?;
    let report = build_report(config, datasets, &records, &summary, backend.id());
    write_summary(out_dir, &summary)?;
    let report_path = out_dir.join(REPORT_JSON);
    write_json(&report_path, &report)?;

    Ok(RunOutcome {
        records,
        summary,
        report,
        output_dir: out_dir.clone(),
    })
}

fn build_report(
    config: &RunConfig,
    datasets: &[LoadedDataset],
    records: &[PredictionRecord],
    summary: &SummaryTable,
    backend: &str,
) -> RunReport {
    let mut record_counts: HashMap<&str, usize> = HashMap::new();
    for r in records {
        *record_counts.entry(&r.dataset).or_default() += 1;
    }
    let mut reports: BTreeMap<String, DatasetReport> = BTreeMap::new();
    for d in datasets {
        let report = reports
            .entry(d.entry.descriptor.name.id().to_owned())
            .or_insert_with(|| DatasetReport {
                load: LoadReport::default(),
                records: 0,
                scored: 0,
                ignored: 0,
                failed: 0,
                ignored_labels: BTreeMap::new(),
            });
        report.load.total_native += d.report.total_native;
        report.load.emitted += d.report.emitted;
        for (k, v) in &d.report.dropped {
            *report.load.dropped.entry(k.clone()).or_default() += v;
        }
    }
    for row in &summary.rows {
        let report = reports.entry(row.dataset.clone()).or_insert_with(|| DatasetReport {
            load: LoadReport::default(),
            records: 0,
            scored: 0,
            ignored: 0,
            failed: 0,
            ignored_labels: BTreeMap::new(),
        });
        report.records = record_counts.get(row.dataset.as_str()).copied().unwrap_or(0);
        report.scored = row.n_support + row.n_attack;
        report.ignored = row.n_ignored;
        report.failed = row.n_failed;
        report.ignored_labels = row.ignored_labels.clone();
    }
    RunReport {
        total_records: records.len(),
        label_policy: config.label_policy,
        generation: config.generation,
        backend: backend.to_owned(),
        datasets: reports,
    }
}

/// Writes `summary.csv`, `summary.txt` and `summary.json` into `dir`.
pub fn write_summary(dir: &Path, summary: &SummaryTable) -> Result<(), RunError> {
    let csv = dir.join(SUMMARY_CSV);
    fs::write(&csv, summary.to_csv()).map_err(io_err(&csv))?;
    let txt = dir.join(SUMMARY_TXT);
    fs::write(&txt, summary.to_text_table()).map_err(io_err(&txt))?;
    write_json(&dir.join(SUMMARY_JSON), summary)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), RunError> {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}
