//! Persuasive essays in brat standoff format.
//!
//! Two kinds of record become relations:
//!
//! * `R` lines (`supports` / `attacks`) from a premise (`Arg1`, the child) to
//!   a claim or premise (`Arg2`, the parent);
//! * `Stance` attributes on claims (`For` / `Against`), whose parent is the
//!   essay's first major claim.

use std::collections::HashMap;
use std::path::Path;

use super::{files_with_suffix, read_to_string, stem};
use crate::corpus::{CorpusError, DatasetName, RawRelation};

struct Component {
    kind: String,
    text: String,
}

pub(crate) fn read(path: &Path) -> Result<Vec<RawRelation>, CorpusError> {
    let mut out = Vec::new();
    for file in files_with_suffix(path, ".ann")? {
        read_file(&file, &mut out)?;
    }
    Ok(out)
}

fn read_file(path: &Path, out: &mut Vec<RawRelation>) -> Result<(), CorpusError> {
    let content = read_to_string(path)?;
    let essay = stem(path, ".ann");
    let mut components: HashMap<&str, Component> = HashMap::new();
    let mut major_claim: Option<&str> = None;
    // (record id, label, child component, parent component or None for the major claim)
    let mut pending: Vec<(&str, &str, &str, Option<&str>)> = Vec::new();

    for (idx, line) in content.lines().enumerate() {
        let bad = |detail: &str| CorpusError::Line {
            path: path.to_owned(),
            line: idx + 1,
            detail: detail.to_owned(),
        };
        let mut cols = line.split('\t');
        let id = cols.next().unwrap_or("").trim();
        let Some(body) = cols.next() else { continue };
        match id.chars().next() {
            Some('T') => {
                let kind = body.split_whitespace().next().ok_or_else(|| bad("missing component type"))?;
                let text = cols.next().ok_or_else(|| bad("missing component text"))?;
                if kind == "MajorClaim" && major_claim.is_none() {
                    major_claim = Some(id);
                }
                components.insert(
                    id,
                    Component {
                        kind: kind.to_owned(),
                        text: text.to_owned(),
                    },
                );
            }
            Some('R') => {
                let mut parts = body.split_whitespace();
                let label = parts.next().ok_or_else(|| bad("missing relation type"))?;
                let mut arg1 = None;
                let mut arg2 = None;
                for part in parts {
                    if let Some(v) = part.strip_prefix("Arg1:") {
                        arg1 = Some(v);
                    } else if let Some(v) = part.strip_prefix("Arg2:") {
                        arg2 = Some(v);
                    }
                }
                let (Some(child), Some(parent)) = (arg1, arg2) else {
                    return Err(bad("relation needs Arg1 and Arg2"));
                };
                pending.push((id, label, child, Some(parent)));
            }
            Some('A') => {
                let parts: Vec<&str> = body.split_whitespace().collect();
                if let ["Stance", target, value] = parts.as_slice() {
                    pending.push((id, value, target, None));
                }
            }
            _ => {}
        }
    }

    for (id, label, child, parent) in pending {
        let text_of = |cid: &str| {
            components
                .get(cid)
                .map(|c| c.text.clone())
                .ok_or_else(|| CorpusError::schema(path, format!("{id} references unknown component {cid}")))
        };
        let parent_text = match parent {
            Some(p) => text_of(p)?,
            None => {
                let mc = major_claim
                    .ok_or_else(|| CorpusError::schema(path, format!("{id}: stance without a major claim")))?;
                text_of(mc)?
            }
        };
        if parent.is_none() && components.get(child).is_some_and(|c| c.kind != "Claim") {
            return Err(CorpusError::schema(path, format!("{id}: stance on a non-claim component")));
        }
        out.push(RawRelation {
            id: format!("{essay}:{id}"),
            dataset: DatasetName::Essays.id().to_owned(),
            parent: parent_text,
            child: text_of(child)?,
            label: label.to_owned(),
        });
    }
    Ok(())
}
