use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::lexicon::{Candidate, ConceptLexicon};

/// A lexicon surface form found in text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mention {
    /// The matched text as it appears in the input.
    pub surface: String,
    /// Offset in chars from the start of the input.
    pub char_offset: usize,
    pub candidates: Vec<Candidate>,
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric()
}

/// Longest-match, left-to-right, case-insensitive scan. Matches must start
/// and end on word boundaries; after a match the scan resumes at its end.
pub fn link_mentions(text: &str, lexicon: &ConceptLexicon) -> Vec<Mention> {
    let chars: Vec<char> = text.chars().collect();
    let n = chars.len();
    let max_len = lexicon.max_surface_chars();
    let mut mentions = Vec::new();
    if max_len == 0 {
        return mentions;
    }

    let mut i = 0;
    let mut window = String::new();
    while i < n {
        let starts_word = i == 0 || !is_word_char(chars[i - 1]);
        if !starts_word || chars[i].is_whitespace() {
            i += 1;
            continue;
        }
        let upper = n.min(i + max_len);
        let mut hit = None;
        for j in (i + 1..=upper).rev() {
            if j < n && is_word_char(chars[j]) {
                continue;
            }
            window.clear();
            window.extend(&chars[i..j]);
            if let Some(candidates) = lexicon.candidates_by_key(&window.to_lowercase()) {
                hit = Some((j, candidates));
                break;
            }
        }
        match hit {
            Some((end, candidates)) => {
                mentions.push(Mention {
                    surface: chars[i..end].iter().collect(),
                    char_offset: i,
                    candidates: candidates.to_vec(),
                });
                i = end;
            }
            None => i += 1,
        }
    }
    mentions
}

/// Sums each concept's prior over all mentions, then L1-normalizes.
pub fn score_concepts(mentions: &[Mention]) -> BTreeMap<String, f64> {
    let mut raw: BTreeMap<String, f64> = BTreeMap::new();
    for mention in mentions {
        for c in &mention.candidates {
            *raw.entry(c.concept_id.clone()).or_default() += c.prior;
        }
    }
    let total: f64 = raw.values().sum();
    if total > 0.0 {
        raw.values_mut().for_each(|v| *v /= total);
    }
    raw
}
