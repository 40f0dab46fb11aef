//! Argumentative microtexts as argumentation-graph XML.
//!
//! EDUs are grouped into ADUs by `seg` edges. Every other edge leaving an ADU
//! is a native relation; an undercut (`und`) targets an edge, and its parent
//! is that edge's source ADU.

use std::collections::HashMap;
use std::path::Path;

use super::{files_with_suffix, parse_xml, read_to_string, stem};
use crate::corpus::{CorpusError, DatasetName, RawRelation};

struct Edge<'a> {
    id: &'a str,
    src: &'a str,
    trg: &'a str,
    kind: &'a str,
}

pub(crate) fn read(path: &Path) -> Result<Vec<RawRelation>, CorpusError> {
    let mut out = Vec::new();
    for file in files_with_suffix(path, ".xml")? {
        read_file(&file, &mut out)?;
    }
    Ok(out)
}

fn read_file(path: &Path, out: &mut Vec<RawRelation>) -> Result<(), CorpusError> {
    let content = read_to_string(path)?;
    let doc = parse_xml(path, &content)?;
    let root = doc.root_element();
    let graph_id = root
        .attribute("id")
        .map(str::to_owned)
        .unwrap_or_else(|| stem(path, ".xml"));

    let mut edus: HashMap<&str, String> = HashMap::new();
    let mut adus: Vec<&str> = Vec::new();
    let mut edges: Vec<Edge<'_>> = Vec::new();
    for node in root.children().filter(|n| n.is_element()) {
        let attr = |name: &str| {
            node.attribute(name)
                .ok_or_else(|| CorpusError::schema(path, format!("<{}> without {name}", node.tag_name().name())))
        };
        match node.tag_name().name() {
            "edu" => {
                edus.insert(attr("id")?, super::element_text(node));
            }
            "adu" => adus.push(attr("id")?),
            "edge" => edges.push(Edge {
                id: attr("id")?,
                src: attr("src")?,
                trg: attr("trg")?,
                kind: attr("type")?,
            }),
            _ => {}
        }
    }

    let mut adu_text: HashMap<&str, String> = adus.iter().map(|a| (*a, String::new())).collect();
    for edge in edges.iter().filter(|e| e.kind == "seg") {
        let (Some(text), Some(slot)) = (edus.get(edge.src), adu_text.get_mut(edge.trg)) else {
            return Err(CorpusError::schema(path, format!("segment edge {} is dangling", edge.id)));
        };
        if !slot.is_empty() {
            slot.push(' ');
        }
        slot.push_str(text.trim());
    }
    let by_id: HashMap<&str, &Edge<'_>> = edges.iter().map(|e| (e.id, e)).collect();

    for edge in edges.iter().filter(|e| e.kind != "seg") {
        let Some(child) = adu_text.get(edge.src) else { continue };
        let parent_adu = if adu_text.contains_key(edge.trg) {
            edge.trg
        } else {
            by_id
                .get(edge.trg)
                .map(|target| target.src)
                .ok_or_else(|| CorpusError::schema(path, format!("edge {} targets unknown {}", edge.id, edge.trg)))?
        };
        let parent = adu_text
            .get(parent_adu)
            .ok_or_else(|| CorpusError::schema(path, format!("edge {} has no parent ADU", edge.id)))?;
        out.push(RawRelation {
            id: format!("{graph_id}:{}", edge.id),
            dataset: DatasetName::Microtexts.id().to_owned(),
            parent: parent.clone(),
            child: child.clone(),
            label: edge.kind.to_owned(),
        });
    }
    Ok(())
}
