//! Evaluation harness for binary relation-based argument mining.
//!
//! The crate is organised as a pipeline:
//!
//! * [`corpus`] loads argument-pair corpora from their native layouts (or the
//!   JSONL interchange format) and keeps only support/attack relations.
//! * [`prompting`] renders a pair into a few-shot completion prompt.
//! * [`backend`] obtains a completion from an HTTP server, a scripted mock or
//!   a record/replay cache.
//! * [`labeling`] maps raw completions onto support/attack or an extra label.
//! * [`metrics`] computes per-class F1, the count-weighted "both" score and
//!   the cross-dataset summary.
//! * [`runner`] wires the phases together behind a JSON run configuration.

pub mod backend;
pub mod corpus;
pub mod labeling;
pub mod metrics;
pub mod prompting;
pub mod runner;

pub use backend::{Backend, BackendError, BackendResponse, GenerationParams};
pub use corpus::{
    compute_stats, load_dataset, ArgumentPair, CorpusError, CorpusStats, DatasetDescriptor,
    DatasetName, Relation, SourceFormat,
};
pub use labeling::{LabelKind, LabelPolicy, NormalizedLabel};
pub use metrics::{DatasetScores, PredictionRecord, SummaryTable};
pub use prompting::PromptConfig;
pub use runner::{RunConfig, RunError, RunOutcome};
