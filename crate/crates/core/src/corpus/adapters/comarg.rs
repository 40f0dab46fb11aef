//! ComArg comment/argument units:
//!
//! ```xml
//! <unit id="..">
//!   <comment><text>..</text></comment>
//!   <argument><text>..</text></argument>
//!   <label>5</label>
//! </unit>
//! ```
//!
//! The topic-level argument is the parent and the user comment the child.

use std::path::Path;

use super::{child_element, element_text, files_with_suffix, parse_xml, read_to_string, stem};
use crate::corpus::{CorpusError, DatasetName, RawRelation};

pub(crate) fn read(path: &Path) -> Result<Vec<RawRelation>, CorpusError> {
    let mut out = Vec::new();
    for file in files_with_suffix(path, ".xml")? {
        let content = read_to_string(&file)?;
        let doc = parse_xml(&file, &content)?;
        let prefix = stem(&file, ".xml");
        for unit in doc.descendants().filter(|n| n.has_tag_name("unit")) {
            let id = unit
                .attribute("id")
                .ok_or_else(|| CorpusError::schema(&file, "<unit> without id"))?;
            let missing = |what: &str| CorpusError::schema(&file, format!("unit {id} has no {what}"));
            let text_of = |name: &str| {
                child_element(unit, name)
                    .and_then(|n| child_element(n, "text"))
                    .map(element_text)
                    .ok_or_else(|| missing(&format!("<{name}><text>")))
            };
            let label = child_element(unit, "label")
                .map(element_text)
                .ok_or_else(|| missing("<label>"))?;
            out.push(RawRelation {
                id: format!("{prefix}:{id}"),
                dataset: DatasetName::Comarg.id().to_owned(),
                parent: text_of("argument")?,
                child: text_of("comment")?,
                label: label.trim().to_owned(),
            });
        }
    }
    Ok(out)
}
