//! Query-to-fragment relevance and video ranking.
//!
//! Queries and fragments are both represented as L2-normalized sparse
//! concept vectors; relevance is their cosine.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::annotate::{link_mentions, score_concepts, ConceptAnnotation, ConceptLexicon};
use crate::catalog::EnrichedVideo;

pub const DEFAULT_HIGHLIGHT_LEVELS: usize = 4;

/// Sparse concept weights with unit (or zero) L2 norm.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConceptVector(BTreeMap<String, f64>);

impl ConceptVector {
    /// Builds a normalized vector, dropping non-positive weights.
    pub fn from_weights<I, K>(weights: I) -> Self
    where
        I: IntoIterator<Item = (K, f64)>,
        K: Into<String>,
    {
        let mut map: BTreeMap<String, f64> = BTreeMap::new();
        for (k, w) in weights {
            if w > 0.0 && w.is_finite() {
                *map.entry(k.into()).or_default() += w;
            }
        }
        let norm = map.values().map(|w| w * w).sum::<f64>().sqrt();
        if norm > 0.0 {
            map.values_mut().for_each(|w| *w /= norm);
        }
        Self(map)
    }

    pub fn from_annotations(annotations: &[ConceptAnnotation]) -> Self {
        Self::from_weights(annotations.iter().map(|a| (a.concept_id.clone(), a.score)))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn weights(&self) -> &BTreeMap<String, f64> {
        &self.0
    }

    pub fn get(&self, concept_id: &str) -> f64 {
        self.0.get(concept_id).copied().unwrap_or(0.0)
    }

    pub fn dot(&self, other: &ConceptVector) -> f64 {
        let (small, large) = if self.0.len() <= other.0.len() { (self, other) } else { (other, self) };
        small.0.iter().map(|(k, w)| w * large.get(k)).sum()
    }
}

/// Shade intensity of a fragment; 0 means unshaded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HighlightLevel(pub u8);

pub fn query_vector(query: &str, lexicon: &ConceptLexicon) -> ConceptVector {
    let scores = score_concepts(&link_mentions(query, lexicon));
    ConceptVector::from_weights(scores)
}

/// Cosine between the query vector and the fragment's annotation vector.
pub fn fragment_relevance(query: &ConceptVector, annotations: &[ConceptAnnotation]) -> f64 {
    let fragment = ConceptVector::from_annotations(annotations);
    if query.is_zero() || fragment.is_zero() {
        return 0.0;
    }
    query.dot(&fragment).clamp(0.0, 1.0)
}

/// Scales scores by their maximum and maps them onto `n_levels` shades with
/// `ceil(scaled * (n_levels - 1))`.
pub fn highlight_levels(scores: &[f64], n_levels: usize) -> Vec<HighlightLevel> {
    let n_levels = n_levels.max(2);
    let top = (n_levels - 1) as f64;
    let max = scores.iter().copied().filter(|s| s.is_finite()).fold(0.0, f64::max);
    scores
        .iter()
        .map(|&s| {
            if max <= 0.0 || !(s > 0.0) {
                return HighlightLevel(0);
            }
            // absorb rounding so exact multiples do not round up a level
            let level = ((s / max) * top - 1e-9).ceil().clamp(0.0, top);
            HighlightLevel(level as u8)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchHit {
    pub video_id: String,
    pub video_score: f64,
    pub fragment_scores: Vec<f64>,
}

/// Scores every video by its best fragment and returns the top `k`, ties
/// broken by ascending video id.
pub fn search_with_vector(query: &ConceptVector, catalog: &[&EnrichedVideo], k: usize) -> Vec<SearchHit> {
    let mut hits: Vec<SearchHit> = catalog
        .iter()
        .map(|video| {
            let fragment_scores: Vec<f64> =
                video.fragments.iter().map(|f| fragment_relevance(query, &f.annotations)).collect();
            let video_score = fragment_scores.iter().copied().fold(0.0, f64::max);
            SearchHit { video_id: video.video_id.clone(), video_score, fragment_scores }
        })
        .collect();
    hits.sort_by(|a, b| b.video_score.total_cmp(&a.video_score).then_with(|| a.video_id.cmp(&b.video_id)));
    hits.truncate(k);
    hits
}

pub fn search(query: &str, catalog: &[&EnrichedVideo], k: usize, lexicon: &ConceptLexicon) -> Vec<SearchHit> {
    search_with_vector(&query_vector(query, lexicon), catalog, k)
}
