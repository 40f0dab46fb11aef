//! Mapping raw completions onto the relation space.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::corpus::Relation;

/// Kind of a normalized completion. `Failed` is never produced by
/// [`normalize`]; it marks records whose backend call did not return.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelKind {
    Support,
    Attack,
    Other,
    Unparseable,
    Failed,
}

impl fmt::Display for LabelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LabelKind::Support => "support",
            LabelKind::Attack => "attack",
            LabelKind::Other => "other",
            LabelKind::Unparseable => "unparseable",
            LabelKind::Failed => "failed",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum NormalizedLabel {
    Support,
    Attack,
    /// A single-word label outside the task, lowercased and trimmed.
    Other(String),
    Unparseable,
}

impl NormalizedLabel {
    pub fn kind(&self) -> LabelKind {
        match self {
            NormalizedLabel::Support => LabelKind::Support,
            NormalizedLabel::Attack => LabelKind::Attack,
            NormalizedLabel::Other(_) => LabelKind::Other,
            NormalizedLabel::Unparseable => LabelKind::Unparseable,
        }
    }

    pub fn other_text(&self) -> Option<&str> {
        match self {
            NormalizedLabel::Other(t) => Some(t),
            _ => None,
        }
    }

    pub fn relation(&self) -> Option<Relation> {
        match self {
            NormalizedLabel::Support => Some(Relation::Support),
            NormalizedLabel::Attack => Some(Relation::Attack),
            _ => None,
        }
    }

    /// Rebuilds a label from its serialized parts.
    pub fn from_parts(kind: LabelKind, other_text: Option<&str>) -> Option<NormalizedLabel> {
        match kind {
            LabelKind::Support => Some(NormalizedLabel::Support),
            LabelKind::Attack => Some(NormalizedLabel::Attack),
            LabelKind::Other => other_text.map(|t| NormalizedLabel::Other(t.to_owned())),
            LabelKind::Unparseable => Some(NormalizedLabel::Unparseable),
            LabelKind::Failed => None,
        }
    }

    /// Key used in the extra-label tally.
    pub fn tally_key(&self) -> Option<&str> {
        match self {
            NormalizedLabel::Other(t) => Some(t),
            NormalizedLabel::Unparseable => Some(UNPARSEABLE_KEY),
            _ => None,
        }
    }
}

pub const UNPARSEABLE_KEY: &str = "(unparseable)";

fn is_edge_noise(c: char) -> bool {
    c.is_whitespace() || matches!(c, '.' | ',' | ';' | ':' | '!' | '?' | '"' | '\'' | '`' | '*')
}

/// Lowercases, strips surrounding whitespace and punctuation, then matches
/// by prefix so that pieces like "supports" or "attack:" still count.
pub fn normalize(raw: &str) -> NormalizedLabel {
    let lowered = raw.to_lowercase();
    let text = lowered.trim_matches(is_edge_noise);
    if text.starts_with("support") {
        NormalizedLabel::Support
    } else if text.starts_with("attack") {
        NormalizedLabel::Attack
    } else if !text.is_empty() && text.chars().all(char::is_alphabetic) {
        NormalizedLabel::Other(text.to_owned())
    } else {
        NormalizedLabel::Unparseable
    }
}

/// What to do with completions that are neither support nor attack.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelPolicy {
    /// Leave them out of the confusion matrix and tally them separately.
    #[default]
    Ignore,
    /// Count them as a miss for the gold class without predicting any class.
    CountAsError,
}

/// How one prediction enters scoring.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Disposition {
    Scored(Relation),
    /// False negative for the gold class, false positive for neither.
    Missed,
    Ignored,
}

pub fn apply_policy(label: &NormalizedLabel, policy: LabelPolicy) -> Disposition {
    match (label.relation(), policy) {
        (Some(r), _) => Disposition::Scored(r),
        (None, LabelPolicy::Ignore) => Disposition::Ignored,
        (None, LabelPolicy::CountAsError) => Disposition::Missed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXTRA_LABELS: [&str; 9] = [
        "compare",
        "conflict",
        "analogy",
        "irrelevant",
        "contradiction",
        "contrast",
        "paraphrase",
        "reply",
        "rebuttal",
    ];

    #[test]
    fn canonical_forms() {
        assert_eq!(normalize("support"), NormalizedLabel::Support);
        assert_eq!(normalize("attack"), NormalizedLabel::Attack);
        assert_eq!(normalize(" Attack."), NormalizedLabel::Attack);
        assert_eq!(normalize("supports"), NormalizedLabel::Support);
        assert_eq!(normalize("attack:"), NormalizedLabel::Attack);
        assert_eq!(normalize("\nSUPPORT\n"), NormalizedLabel::Support);
    }

    #[test]
    fn extra_labels_are_other() {
        assert_eq!(normalize("compare"), NormalizedLabel::Other("compare".into()));
        for label in EXTRA_LABELS {
            assert_eq!(normalize(label), NormalizedLabel::Other(label.into()));
            assert_eq!(normalize(&format!(" {}.", label.to_uppercase())).kind(), LabelKind::Other);
        }
    }

    #[test]
    fn unparseable() {
        assert_eq!(normalize(""), NormalizedLabel::Unparseable);
        assert_eq!(normalize("   "), NormalizedLabel::Unparseable);
        assert_eq!(normalize("no idea"), NormalizedLabel::Unparseable);
        assert_eq!(normalize("42"), NormalizedLabel::Unparseable);
    }

    #[test]
    fn idempotent_on_surface_forms() {
        for raw in ["support", "attack", "compare", "x y", ""] {
            let once = normalize(raw);
            let surface = match &once {
                NormalizedLabel::Support => "support".to_owned(),
                NormalizedLabel::Attack => "attack".to_owned(),
                NormalizedLabel::Other(t) => t.clone(),
                NormalizedLabel::Unparseable => raw.to_owned(),
            };
            assert_eq!(normalize(&surface), once);
        }
    }

    #[test]
    fn policies() {
        let other = NormalizedLabel::Other("contradiction".into());
        assert_eq!(apply_policy(&other, LabelPolicy::Ignore), Disposition::Ignored);
        assert_eq!(
            apply_policy(&NormalizedLabel::Support, LabelPolicy::Ignore),
            Disposition::Scored(Relation::Support)
        );
        assert_eq!(
            apply_policy(&NormalizedLabel::Unparseable, LabelPolicy::CountAsError),
            Disposition::Missed
        );
    }

    #[test]
    fn parts_round_trip() {
        for label in [
            NormalizedLabel::Support,
            NormalizedLabel::Attack,
            NormalizedLabel::Other("reply".into()),
            NormalizedLabel::Unparseable,
        ] {
            assert_eq!(
                NormalizedLabel::from_parts(label.kind(), label.other_text()),
                Some(label.clone())
            );
        }
    }
}
