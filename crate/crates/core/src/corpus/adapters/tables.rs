//! Delimited-text corpora.
//!
//! Column names are matched case-insensitively with spaces, dots and
//! underscores ignored, so `Argument 1`, `arg_1` and `ARG1` are the same
//! column. Files ending in `.tsv` are tab separated and unquoted.

use std::collections::HashMap;
use std::path::Path;

use csv::{ReaderBuilder, StringRecord};

use crate::corpus::{CorpusError, DatasetName, RawRelation};

struct Table {
    columns: HashMap<String, usize>,
    rows: Vec<StringRecord>,
}

fn normalize_header(h: &str) -> String {
    h.chars()
        .filter(|c| !matches!(c, ' ' | '_' | '.' | '-'))
        .flat_map(char::to_lowercase)
        .collect()
}

fn read_table(path: &Path) -> Result<Table, CorpusError> {
    let tsv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("tsv"));
    let mut builder = ReaderBuilder::new();
    if tsv {
        builder.delimiter(b'\t').quoting(false);
    }
    let mut reader = builder.from_path(path).map_err(|e| csv_error(path, e))?;
    let headers = reader.headers().map_err(|e| csv_error(path, e))?;
    let columns = headers
        .iter()
        .enumerate()
        .map(|(i, h)| (normalize_header(h), i))
        .collect();
    let rows = reader
        .records()
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| csv_error(path, e))?;
    Ok(Table { columns, rows })
}

fn csv_error(path: &Path, err: csv::Error) -> CorpusError {
    let line = err.position().map(|p| p.line() as usize);
    match (err.into_kind(), line) {
        (csv::ErrorKind::Io(e), _) => CorpusError::io(path, e),
        (kind, Some(line)) => CorpusError::Line {
            path: path.to_owned(),
            line,
            detail: format!("{kind:?}"),
        },
        (kind, None) => CorpusError::schema(path, format!("{kind:?}")),
    }
}

impl Table {
    /// Index of the first present column among `names`.
    fn column(&self, path: &Path, names: &[&str]) -> Result<usize, CorpusError> {
        self.optional(names)
            .ok_or_else(|| CorpusError::schema(path, format!("missing column {:?}", names[0])))
    }

    fn optional(&self, names: &[&str]) -> Option<usize> {
        names.iter().find_map(|n| self.columns.get(*n).copied())
    }

    fn row_id(&self, row: &StringRecord, idx: usize, id_col: Option<usize>) -> String {
        id_col
            .and_then(|c| row.get(c))
            .filter(|s| !s.trim().is_empty())
            .map(|s| s.trim().to_owned())
            .unwrap_or_else(|| format!("row{}", idx + 1))
    }
}

fn field(row: &StringRecord, col: usize) -> String {
    row.get(col).unwrap_or("").to_owned()
}

/// `arg1` (parent), `arg2` (child), `relation`, optional `id`.
pub(crate) fn read_pair_csv(path: &Path, dataset: DatasetName) -> Result<Vec<RawRelation>, CorpusError> {
    let table = read_table(path)?;
    let parent = table.column(path, &["arg1", "argument1", "parent"])?;
    let child = table.column(path, &["arg2", "argument2", "child"])?;
    let relation = table.column(path, &["relation", "label"])?;
    let id = table.optional(&["id", "pairid"]);
    Ok(table
        .rows
        .iter()
        .enumerate()
        .map(|(i, row)| RawRelation {
            id: table.row_id(row, i, id),
            dataset: dataset.id().to_owned(),
            parent: field(row, parent),
            child: field(row, child),
            label: field(row, relation),
        })
        .collect())
}

/// Claims with a PRO/CON stance towards their debate topic. The topic is the
/// parent argument.
pub(crate) fn read_claim_stance(path: &Path) -> Result<Vec<RawRelation>, CorpusError> {
    let table = read_table(path)?;
    let topic = table.column(path, &["topictext", "topic"])?;
    let claim = table.column(
        path,
        &["claimsclaimcorrectedtext", "claimsclaimoriginaltext", "claim"],
    )?;
    let stance = table.column(path, &["claimsstance", "stance"])?;
    let id = table.optional(&["claimsclaimid", "claimid", "id"]);
    Ok(table
        .rows
        .iter()
        .enumerate()
        .map(|(i, row)| RawRelation {
            id: table.row_id(row, i, id),
            dataset: DatasetName::IbmDebater.id().to_owned(),
            parent: field(row, topic),
            child: field(row, claim),
            label: field(row, stance),
        })
        .collect())
}

/// Sentence-level stance annotations. The parent argument is rewritten to
/// "`<topic>` is good".
pub(crate) fn read_ukp(path: &Path) -> Result<Vec<RawRelation>, CorpusError> {
    let table = read_table(path)?;
    let topic = table.column(path, &["topic"])?;
    let sentence = table.column(path, &["sentence"])?;
    let annotation = table.column(path, &["annotation", "label"])?;
    let id = table.optional(&["sentencehash", "id"]);
    Ok(table
        .rows
        .iter()
        .enumerate()
        .map(|(i, row)| RawRelation {
            id: table.row_id(row, i, id),
            dataset: DatasetName::Ukp.id().to_owned(),
            parent: ukp_parent(row.get(topic).unwrap_or("")),
            child: field(row, sentence),
            label: field(row, annotation),
        })
        .collect())
}

pub(crate) fn ukp_parent(topic: &str) -> String {
    format!("{} is good", topic.trim())
}
