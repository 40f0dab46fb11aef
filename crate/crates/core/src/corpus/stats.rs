use serde::{Deserialize, Serialize};

use super::{ArgumentPair, Relation};

/// Label counts and average argument length for a loaded corpus.
///
/// Every pair contributes both of its texts, so an argument that appears in
/// several pairs is counted once per occurrence. Words are runs of
/// non-whitespace; characters are Unicode scalar values of the stored text,
/// spaces included.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub n_support: usize,
    pub n_attack: usize,
    pub avg_words: f64,
    pub avg_chars: f64,
}

impl CorpusStats {
    pub fn total(&self) -> usize {
        self.n_support + self.n_attack
    }
}

pub fn compute_stats(pairs: &[ArgumentPair]) -> CorpusStats {
    let mut stats = CorpusStats::default();
    if pairs.is_empty() {
        return stats;
    }
    let (mut words, mut chars) = (0usize, 0usize);
    for pair in pairs {
        match pair.gold {
            Relation::Support => stats.n_support += 1,
            Relation::Attack => stats.n_attack += 1,
        }
        for text in [&pair.parent_text, &pair.child_text] {
            words += text.split_whitespace().count();
            chars += text.chars().count();
        }
    }
    let texts = (2 * pairs.len()) as f64;
    stats.avg_words = words as f64 / texts;
    stats.avg_chars = chars as f64 / texts;
    stats
}
