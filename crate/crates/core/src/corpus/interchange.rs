//! JSONL interchange format: one `{id, dataset, parent, child, gold}` object
//! per line. Any loaded corpus can be exported to it, and corpora that may
//! not be redistributed are only accepted in this form.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::Deserialize;

use super::{ArgumentPair, CorpusError, DatasetName, RawRelation, Relation};

#[derive(Deserialize)]
struct Record {
    id: String,
    dataset: String,
    parent: String,
    child: String,
    gold: String,
}

pub(crate) fn read_raw(path: &Path, dataset: DatasetName) -> Result<Vec<RawRelation>, CorpusError> {
    let file = File::open(path).map_err(|e| CorpusError::io(path, e))?;
    let mut out = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| CorpusError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let err = |detail: String| CorpusError::Line {
            path: path.to_owned(),
            line: line_no,
            detail,
        };
        let rec: Record = serde_json::from_str(&line).map_err(|e| err(e.to_string()))?;
        if dataset != DatasetName::Generic && rec.dataset != dataset.id() {
            return Err(err(format!(
                "record belongs to {:?}, expected {:?}",
                rec.dataset,
                dataset.id()
            )));
        }
        if rec.gold.parse::<Relation>().is_err() {
            return Err(err(format!("gold must be support or attack, got {:?}", rec.gold)));
        }
        out.push(RawRelation {
            id: rec.id,
            dataset: rec.dataset,
            parent: rec.parent,
            child: rec.child,
            label: rec.gold,
        });
    }
    Ok(out)
}

pub fn write_pairs<W: Write>(mut out: W, pairs: &[ArgumentPair]) -> std::io::Result<()> {
    for pair in pairs {
        serde_json::to_writer(&mut out, pair)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn export(path: &Path, pairs: &[ArgumentPair]) -> Result<(), CorpusError> {
    let file = File::create(path).map_err(|e| CorpusError::io(path, e))?;
    write_pairs(std::io::BufWriter::new(file), pairs).map_err(|e| CorpusError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{load_dataset, DatasetDescriptor, SourceFormat};

    fn write(lines: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(lines.as_bytes()).unwrap();
        f
    }

    fn generic() -> DatasetDescriptor {
        DatasetDescriptor::new(DatasetName::Generic).with_format(SourceFormat::Interchange)
    }

    #[test]
    fn empty_file_loads_nothing() {
        let f = write("");
        let corpus = load_dataset(&generic(), f.path()).unwrap();
        assert!(corpus.pairs.is_empty());
    }

    #[test]
    fn fixture_with_three_records() {
        let f = write(concat!(
            r#"{"id":"1","dataset":"generic","parent":"P one","child":"C one","gold":"support"}"#,
            "\n",
            r#"{"id":"2","dataset":"generic","parent":"P two","child":"C two","gold":"attack"}"#,
            "\n\n",
            r#"{"id":"3","dataset":"generic","parent":"P three","child":"C three","gold":"support"}"#,
            "\n"
        ));
        let corpus = load_dataset(&generic(), f.path()).unwrap();
        let golds: Vec<_> = corpus.pairs.iter().map(|p| p.gold).collect();
        assert_eq!(golds, [Relation::Support, Relation::Attack, Relation::Support]);
        assert_eq!(corpus.counts(), (2, 1));
    }

    #[test]
    fn bad_gold_names_line() {
        let f = write(concat!(
            r#"{"id":"1","dataset":"generic","parent":"a","child":"b","gold":"support"}"#,
            "\n",
            r#"{"id":"2","dataset":"generic","parent":"a","child":"b","gold":"neutral"}"#,
            "\n"
        ));
        let err = load_dataset(&generic(), f.path()).unwrap_err();
        assert!(matches!(err, CorpusError::Line { line: 2, .. }), "{err}");
    }

    #[test]
    fn missing_field_is_schema_error() {
        let f = write(r#"{"id":"1","dataset":"generic","parent":"a","gold":"support"}"#);
        let err = load_dataset(&generic(), f.path()).unwrap_err();
        assert!(err.to_string().contains("child"), "{err}");
    }

    #[test]
    fn duplicate_ids_rejected() {
        let f = write(concat!(
            r#"{"id":"1","dataset":"generic","parent":"a","child":"b","gold":"support"}"#,
            "\n",
            r#"{"id":"1","dataset":"generic","parent":"c","child":"d","gold":"attack"}"#,
            "\n"
        ));
        assert!(matches!(
            load_dataset(&generic(), f.path()),
            Err(CorpusError::DuplicateId { .. })
        ));
    }

    #[test]
    fn dataset_field_must_match() {
        let f = write(r#"{"id":"1","dataset":"ukp","parent":"a","child":"b","gold":"support"}"#);
        let desc = DatasetDescriptor::new(DatasetName::Kialo);
        assert!(load_dataset(&desc, f.path()).is_err());
    }

    #[test]
    fn expected_count_mismatch() {
        let f = write(r#"{"id":"1","dataset":"kialo","parent":"a","child":"b","gold":"support"}"#);
        let desc = DatasetDescriptor::new(DatasetName::Kialo).with_expected(1, 1);
        assert!(matches!(
            load_dataset(&desc, f.path()),
            Err(CorpusError::CountMismatch { .. })
        ));
        let desc = DatasetDescriptor::new(DatasetName::Kialo).with_expected(1, 0);
        assert_eq!(load_dataset(&desc, f.path()).unwrap().pairs.len(), 1);
    }
}
