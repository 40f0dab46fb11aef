//! CDCP comments: `<n>.txt` with a sibling `<n>.ann.json` holding
//! `prop_offsets`, `reasons` and `evidences`. A link `[[first, last], target]`
//! says that propositions `first..=last` each support `target`.

use std::path::Path;

use serde::Deserialize;

use super::{files_with_suffix, read_to_string, stem};
use crate::corpus::{CorpusError, DatasetName, RawRelation};

type Link = ((usize, usize), usize);

#[derive(Deserialize)]
struct Annotation {
    prop_offsets: Vec<(usize, usize)>,
    #[serde(default)]
    reasons: Option<Vec<Link>>,
    #[serde(default)]
    evidences: Option<Vec<Link>>,
}

pub(crate) fn read(path: &Path) -> Result<Vec<RawRelation>, CorpusError> {
    let mut out = Vec::new();
    for ann_path in files_with_suffix(path, ".ann.json")? {
        let doc = stem(&ann_path, ".ann.json");
        let txt_path = ann_path.with_file_name(format!("{doc}.txt"));
        let text: Vec<char> = read_to_string(&txt_path)?.chars().collect();
        let ann: Annotation = serde_json::from_str(&read_to_string(&ann_path)?)
            .map_err(|e| CorpusError::schema(&ann_path, e.to_string()))?;

        let prop = |i: usize| -> Result<String, CorpusError> {
            let (start, end) = *ann
                .prop_offsets
                .get(i)
                .ok_or_else(|| CorpusError::schema(&ann_path, format!("no proposition {i}")))?;
            if start > end || end > text.len() {
                return Err(CorpusError::schema(
                    &ann_path,
                    format!("proposition {i} offsets {start}..{end} out of range"),
                ));
            }
            Ok(text[start..end].iter().collect())
        };

        for (kind, links) in [("reason", &ann.reasons), ("evidence", &ann.evidences)] {
            for (k, ((first, last), target)) in links.iter().flatten().enumerate() {
                for src in *first..=*last {
                    out.push(RawRelation {
                        id: format!("{doc}:{kind}{k}:{src}"),
                        dataset: DatasetName::Cdcp.id().to_owned(),
                        parent: prop(*target)?,
                        child: prop(src)?,
                        label: kind.to_owned(),
                    });
                }
            }
        }
    }
    Ok(out)
}
