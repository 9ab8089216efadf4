//! Concept annotation of transcript fragments.
//!
//! The local path links lexicon surface forms, scores concepts by prior
//! mass and optionally re-ranks them with personalized PageRank over the
//! concept graph. [`remote::RemoteAnnotator`] talks to a hosted wikifier
//! with the same output type.

pub mod lexicon;
pub mod linker;
pub mod pagerank;
pub mod remote;

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use lexicon::{Candidate, ConceptInfo, ConceptLexicon};
pub use linker::{link_mentions, score_concepts, Mention};
pub use pagerank::{pagerank_rerank, PageRankConfig, PageRankResult};
pub use remote::{RemoteAnnotator, RemoteConfig, RemoteError};

pub const DEFAULT_TOP_K: usize = 5;
pub const DEFAULT_UBIQUITY_THRESHOLD: f64 = 0.8;

#[derive(Debug, Error)]
pub enum AnnotateError {
    #[error("lexicon line {line}: {message}")]
    Lexicon { line: usize, message: String },
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Remote(#[from] RemoteError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConceptAnnotation {
    pub concept_id: String,
    pub title: String,
    pub url: String,
    pub score: f64,
    pub rank: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnotateConfig {
    pub top_k: usize,
    pub use_pagerank: bool,
    pub pagerank: PageRankConfig,
}

impl Default for AnnotateConfig {
    fn default() -> Self {
        Self { top_k: DEFAULT_TOP_K, use_pagerank: true, pagerank: PageRankConfig::default() }
    }
}

/// Orders by descending score, then title, then id, and assigns ranks 1..n.
pub(crate) fn sort_and_rank(annotations: &mut [ConceptAnnotation]) {
    annotations.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| a.title.cmp(&b.title))
            .then_with(|| a.concept_id.cmp(&b.concept_id))
    });
    for (i, a) in annotations.iter_mut().enumerate() {
        a.rank = i + 1;
    }
}

/// Runs link → score → optional PageRank → top-k on a piece of text.
pub fn annotate_text(text: &str, lexicon: &ConceptLexicon, config: &AnnotateConfig) -> Vec<ConceptAnnotation> {
    let mentions = link_mentions(text, lexicon);
    let mut scores = score_concepts(&mentions);
    if scores.is_empty() {
        return Vec::new();
    }
    if config.use_pagerank {
        let result = pagerank_rerank(&scores, lexicon.links(), &config.pagerank);
        if !result.converged {
            tracing::warn!(iterations = result.iterations, "pagerank did not converge");
        }
        scores = result.scores;
    }
    let mut annotations: Vec<ConceptAnnotation> = scores
        .into_iter()
        .map(|(id, score)| {
            let (title, url) = match lexicon.concept(&id) {
                Some(info) => (info.title.clone(), info.url.clone()),
                None => (id.clone(), String::new()),
            };
            ConceptAnnotation { concept_id: id, title, url, score, rank: 0 }
        })
        .collect();
    sort_and_rank(&mut annotations);
    annotations.truncate(config.top_k);
    annotations
}

pub fn annotate_fragment(
    fragment: &crate::fragment::Fragment,
    lexicon: &ConceptLexicon,
    config: &AnnotateConfig,
) -> Vec<ConceptAnnotation> {
    annotate_text(&fragment.text, lexicon, config)
}

/// Looks up a concept's definition; empty definitions count as absent.
pub fn definition_of<'a>(concept_id: &str, lexicon: &'a ConceptLexicon) -> Option<&'a str> {
    lexicon.definition(concept_id)
}

/// Moves concepts present in at least `ubiquity_threshold` of a video's
/// fragments out of the per-fragment lists and into video-level tags.
/// Single-fragment videos are returned unchanged.
pub fn dedupe_video_keywords(
    mut per_fragment: Vec<Vec<ConceptAnnotation>>,
    ubiquity_threshold: f64,
) -> (Vec<Vec<ConceptAnnotation>>, Vec<ConceptAnnotation>) {
    let n = per_fragment.len();
    if n <= 1 {
        return (per_fragment, Vec::new());
    }
    let mut seen: BTreeMap<&str, (usize, f64, &ConceptAnnotation)> = BTreeMap::new();
    for list in &per_fragment {
        for a in list {
            let e = seen.entry(a.concept_id.as_str()).or_insert((0, 0.0, a));
            e.0 += 1;
            e.1 += a.score;
        }
    }
    let mut tags: Vec<ConceptAnnotation> = seen
        .values()
        .filter(|(count, _, _)| *count as f64 >= ubiquity_threshold * n as f64 - 1e-12)
        .map(|(count, total, a)| ConceptAnnotation { score: total / *count as f64, rank: 0, ..(*a).clone() })
        .collect();
    if tags.is_empty() {
        return (per_fragment, tags);
    }
    let ubiquitous: HashSet<&str> = tags.iter().map(|t| t.concept_id.as_str()).collect();
    for list in &mut per_fragment {
        list.retain(|a| !ubiquitous.contains(a.concept_id.as_str()));
        for (i, a) in list.iter_mut().enumerate() {
            a.rank = i + 1;
        }
    }
    sort_and_rank(&mut tags);
    (per_fragment, tags)
}
