//! Debatepedia/Procon pairs: `<pair id=".." entailment="YES|NO"><t/><h/></pair>`.
//! `t` is the child argument and `h` the argument it relates to.

use std::path::Path;

use super::{child_element, element_text, files_with_suffix, parse_xml, read_to_string, stem};
use crate::corpus::{CorpusError, DatasetName, RawRelation};

pub(crate) fn read(path: &Path) -> Result<Vec<RawRelation>, CorpusError> {
    let mut out = Vec::new();
    for file in files_with_suffix(path, ".xml")? {
        let content = read_to_string(&file)?;
        let doc = parse_xml(&file, &content)?;
        let prefix = stem(&file, ".xml");
        for pair in doc.descendants().filter(|n| n.has_tag_name("pair")) {
            let id = pair
                .attribute("id")
                .ok_or_else(|| CorpusError::schema(&file, "<pair> without id"))?;
            let label = pair
                .attribute("entailment")
                .or_else(|| pair.attribute("relation"))
                .ok_or_else(|| CorpusError::schema(&file, format!("pair {id} has no entailment")))?;
            let text = |name: &str| {
                child_element(pair, name)
                    .map(element_text)
                    .ok_or_else(|| CorpusError::schema(&file, format!("pair {id} has no <{name}>")))
            };
            out.push(RawRelation {
                id: format!("{prefix}:{id}"),
                dataset: DatasetName::DebatepediaProcon.id().to_owned(),
                parent: text("h")?,
                child: text("t")?,
                label: label.to_owned(),
            });
        }
    }
    Ok(out)
}
