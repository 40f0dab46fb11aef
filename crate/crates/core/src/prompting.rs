//! Few-shot prompt rendering.
//!
//! A prompt is the preamble, then the four primer examples rendered with the
//! example template, then the query pair rendered with the query template.
//! Templates use `{parent}`, `{child}` and `{relation}` slots. Substitution is
//! a single pass, so slot names inside argument texts are left alone.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{ArgumentPair, Relation};

pub const PRIMER_SIZE: usize = 4;

const DEFAULT_CONFIG: &str = include_str!("../assets/default_prompt.json");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimerExample {
    pub parent: String,
    pub child: String,
    pub relation: Relation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptConfig {
    pub preamble: String,
    pub example_template: String,
    pub query_template: String,
    pub primer: Vec<PrimerExample>,
    #[serde(default = "default_relation_words")]
    pub relation_words: BTreeMap<Relation, String>,
}

fn default_relation_words() -> BTreeMap<Relation, String> {
    Relation::ALL.iter().map(|r| (*r, r.as_str().to_owned())).collect()
}

impl Default for PromptConfig {
    fn default() -> Self {
        serde_json::from_str(DEFAULT_CONFIG).expect("bundled prompt config is valid JSON")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    Parent,
    Child,
    Relation,
}

impl Slot {
    fn name(self) -> &'static str {
        match self {
            Slot::Parent => "{parent}",
            Slot::Child => "{child}",
            Slot::Relation => "{relation}",
        }
    }
}

#[derive(Debug, PartialEq, Eq)]
enum Piece<'a> {
    Text(&'a str),
    Slot(Slot),
}

fn parse_template(template: &str) -> Vec<Piece<'_>> {
    let mut pieces = Vec::new();
    let rest = template;
    let mut literal_start = 0;
    let mut pos = 0;
    while let Some(open) = rest[pos..].find('{') {
        let at = pos + open;
        let slot = [Slot::Parent, Slot::Child, Slot::Relation]
            .into_iter()
            .find(|s| rest[at..].starts_with(s.name()));
        match slot {
            Some(slot) => {
                if at > literal_start {
                    pieces.push(Piece::Text(&rest[literal_start..at]));
                }
                pieces.push(Piece::Slot(slot));
                pos = at + slot.name().len();
                literal_start = pos;
            }
            None => pos = at + 1,
        }
    }
    if literal_start < rest.len() {
        pieces.push(Piece::Text(&rest[literal_start..]));
    }
    pieces
}

fn render(out: &mut String, template: &str, parent: &str, child: &str, relation: Option<&str>) {
    for piece in parse_template(template) {
        match piece {
            Piece::Text(t) => out.push_str(t),
            Piece::Slot(Slot::Parent) => out.push_str(parent),
            Piece::Slot(Slot::Child) => out.push_str(child),
            Piece::Slot(Slot::Relation) => out.push_str(relation.unwrap_or("")),
        }
    }
}

fn has_slot(template: &str, slot: Slot) -> bool {
    parse_template(template).contains(&Piece::Slot(slot))
}

/// One broken invariant of a [`PromptConfig`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    PrimerSize(usize),
    NoExampleOf(Relation),
    EmptyPrimerText(usize),
    MissingPlaceholder { template: &'static str, slot: &'static str },
    RelationInQuery,
    QueryEndsWithWhitespace,
    RelationWord(Relation),
    RelationWordsNotDistinct,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::PrimerSize(n) => write!(f, "primer size {n} ≠ {PRIMER_SIZE}"),
            Violation::NoExampleOf(r) => match r {
                Relation::Support => f.write_str("no Support example"),
                Relation::Attack => f.write_str("no Attack example"),
            },
            Violation::EmptyPrimerText(i) => write!(f, "primer example {} has an empty text", i + 1),
            Violation::MissingPlaceholder { template, slot } => {
                write!(f, "{template} template lacks {slot}")
            }
            Violation::RelationInQuery => f.write_str("query template must not contain {relation}"),
            Violation::QueryEndsWithWhitespace => {
                f.write_str("query template must end where the answer starts, not in whitespace")
            }
            Violation::RelationWord(r) => write!(f, "no surface word for {r}"),
            Violation::RelationWordsNotDistinct => f.write_str("relation words must differ"),
        }
    }
}

#[derive(Debug, Error)]
pub enum PromptError {
    #[error("invalid prompt config: {}", join(.0))]
    InvalidConfig(Vec<Violation>),
    #[error("pair {0:?} has an empty argument text")]
    EmptyText(String),
    #[error("cannot read prompt config {path}: {detail}")]
    Read { path: String, detail: String },
}

fn join(violations: &[Violation]) -> String {
    violations.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

impl PromptConfig {
    pub fn from_path(path: &Path) -> Result<Self, PromptError> {
        let read_err = |detail: String| PromptError::Read {
            path: path.display().to_string(),
            detail,
        };
        let text = fs::read_to_string(path).map_err(|e| read_err(e.to_string()))?;
        serde_json::from_str(&text).map_err(|e| read_err(e.to_string()))
    }

    /// Every invariant violation, in a fixed order. Empty means valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.primer.len() != PRIMER_SIZE {
            out.push(Violation::PrimerSize(self.primer.len()));
        }
        for r in Relation::ALL {
            if !self.primer.iter().any(|e| e.relation == r) {
                out.push(Violation::NoExampleOf(r));
            }
        }
        for (i, e) in self.primer.iter().enumerate() {
            if e.parent.trim().is_empty() || e.child.trim().is_empty() {
                out.push(Violation::EmptyPrimerText(i));
            }
        }
        for slot in [Slot::Parent, Slot::Child, Slot::Relation] {
            if !has_slot(&self.example_template, slot) {
                out.push(Violation::MissingPlaceholder {
                    template: "example",
                    slot: slot.name(),
                });
            }
        }
        for slot in [Slot::Parent, Slot::Child] {
            if !has_slot(&self.query_template, slot) {
                out.push(Violation::MissingPlaceholder {
                    template: "query",
                    slot: slot.name(),
                });
            }
        }
        if has_slot(&self.query_template, Slot::Relation) {
            out.push(Violation::RelationInQuery);
        }
        if self.query_template.ends_with(char::is_whitespace) {
            out.push(Violation::QueryEndsWithWhitespace);
        }
        for r in Relation::ALL {
            if self.relation_words.get(&r).is_none_or(|w| w.trim().is_empty()) {
                out.push(Violation::RelationWord(r));
            }
        }
        if let (Some(s), Some(a)) = (
            self.relation_words.get(&Relation::Support),
            self.relation_words.get(&Relation::Attack),
        ) {
            if s == a {
                out.push(Violation::RelationWordsNotDistinct);
            }
        }
        out
    }

    pub fn relation_word(&self, relation: Relation) -> &str {
        self.relation_words
            .get(&relation)
            .map(String::as_str)
            .unwrap_or(relation.as_str())
    }

    /// Renders the prompt for `pair`. The pair's gold label is never used.
    pub fn build_prompt(&self, pair: &ArgumentPair) -> Result<String, PromptError> {
        self.build_prompt_for(&pair.id, &pair.parent_text, &pair.child_text)
    }

    pub fn build_prompt_for(&self, id: &str, parent: &str, child: &str) -> Result<String, PromptError> {
        let violations = self.validate();
        if !violations.is_empty() {
            return Err(PromptError::InvalidConfig(violations));
        }
        if parent.trim().is_empty() || child.trim().is_empty() {
            return Err(PromptError::EmptyText(id.to_owned()));
        }
        let mut out = String::with_capacity(
            self.preamble.len() + 6 * self.example_template.len() + 2 * (parent.len() + child.len()),
        );
        out.push_str(&self.preamble);
        for example in &self.primer {
            let word = self.relation_word(example.relation);
            render(&mut out, &self.example_template, &example.parent, &example.child, Some(word));
        }
        render(&mut out, &self.query_template, parent, child, None);
        Ok(out)
    }
}

/// Free-function form of [`PromptConfig::build_prompt`].
pub fn build_prompt(config: &PromptConfig, pair: &ArgumentPair) -> Result<String, PromptError> {
    config.build_prompt(pair)
}
