//! Native corpus layouts. Each adapter turns one layout into
//! [`RawRelation`](super::RawRelation)s and leaves label mapping to the caller.

pub(super) mod cdcp;
pub(super) mod comarg;
pub(super) mod debatepedia;
pub(super) mod essays;
pub(super) mod microtexts;
pub(super) mod tables;

use std::fs;
use std::path::{Path, PathBuf};

use super::CorpusError;

/// `path` itself when it is a file, otherwise the directory entries ending
/// in `suffix`, sorted by name.
fn files_with_suffix(path: &Path, suffix: &str) -> Result<Vec<PathBuf>, CorpusError> {
    if path.is_file() {
        return Ok(vec![path.to_owned()]);
    }
    let mut files = Vec::new();
    for entry in fs::read_dir(path).map_err(|e| CorpusError::io(path, e))? {
        let entry = entry.map_err(|e| CorpusError::io(path, e))?;
        let p = entry.path();
        if p.is_file() && p.to_string_lossy().ends_with(suffix) {
            files.push(p);
        }
    }
    files.sort();
    Ok(files)
}

fn read_to_string(path: &Path) -> Result<String, CorpusError> {
    fs::read_to_string(path).map_err(|e| CorpusError::io(path, e))
}

/// File name with `suffix` removed, used to namespace record ids.
fn stem(path: &Path, suffix: &str) -> String {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    name.strip_suffix(suffix).unwrap_or(&name).to_owned()
}

fn parse_xml<'a>(path: &Path, text: &'a str) -> Result<roxmltree::Document<'a>, CorpusError> {
    roxmltree::Document::parse(text).map_err(|e| CorpusError::schema(path, format!("invalid XML: {e}")))
}

/// Concatenated text content of an element and its descendants.
fn element_text(node: roxmltree::Node<'_, '_>) -> String {
    node.descendants()
        .filter(|n| n.is_text())
        .filter_map(|n| n.text())
        .collect::<String>()
}

fn child_element<'a, 'input>(
    node: roxmltree::Node<'a, 'input>,
    name: &str,
) -> Option<roxmltree::Node<'a, 'input>> {
    node.children().find(|c| c.has_tag_name(name))
}
