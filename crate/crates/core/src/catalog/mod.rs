//! Enriched-video catalog, ingest pipeline and interaction event log.

mod event_log;
mod model;
mod store;

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use event_log::{AppendOutcome, EventLogError, EventStore};
pub use model::{EnrichedFragment, EnrichedVideo, VideoMetadata};
pub use store::{CatalogStore, Snapshot};

use crate::annotate::{
    annotate_fragment, dedupe_video_keywords, AnnotateConfig, AnnotateError, ConceptAnnotation, ConceptLexicon,
    RemoteAnnotator, DEFAULT_UBIQUITY_THRESHOLD,
};
use crate::fragment::{fragment, Fragment, DEFAULT_TARGET_CHARS};
use crate::transcript::{self, normalize, TranscriptError, TranscriptFormat};

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("video `{0}` not found")]
    NotFound(String),
    #[error("video `{0}` already exists")]
    Conflict(String),
    #[error("invalid video id `{0}`")]
    InvalidId(String),
    #[error("invalid video record: {0}")]
    Invalid(String),
    #[error("corrupt catalog document {path}: {message}")]
    Corrupt { path: String, message: String },
    #[error("catalog i/o: {0}")]
    Io(String),
    #[error(transparent)]
    Transcript(#[from] TranscriptError),
    #[error(transparent)]
    Annotate(#[from] AnnotateError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IngestConfig {
    pub target_chars: usize,
    pub annotate: AnnotateConfig,
    pub ubiquity_threshold: f64,
    pub overwrite: bool,
}

impl Default for IngestConfig {
    fn default() -> Self {
        Self {
            target_chars: DEFAULT_TARGET_CHARS,
            annotate: AnnotateConfig::default(),
            ubiquity_threshold: DEFAULT_UBIQUITY_THRESHOLD,
            overwrite: false,
        }
    }
}

#[derive(Clone)]
pub enum Annotator {
    Local(Arc<ConceptLexicon>),
    Remote(RemoteAnnotator),
}

/// Parses, normalizes and fragments a transcript, stretching the outer
/// fragment bounds so the fragments tile `[0, duration]`.
pub fn prepare_fragments(
    meta: &VideoMetadata,
    transcript_bytes: &[u8],
    format: TranscriptFormat,
    config: &IngestConfig,
) -> Result<(f64, Vec<Fragment>), CatalogError> {
    let parsed = transcript::parse(transcript_bytes, format, meta.duration)?.with_video_id(&meta.video_id);
    let normalized = normalize(&parsed);
    let last_end = normalized.spans.last().map(|s| s.end).ok_or(TranscriptError::Empty)?;
    let duration = meta.duration.unwrap_or(last_end).max(last_end);
    let mut fragments = fragment(&normalized, config.target_chars);
    if let Some(first) = fragments.first_mut() {
        first.time_start = 0.0;
    }
    if let Some(last) = fragments.last_mut() {
        last.time_end = duration;
    }
    Ok((duration, fragments))
}

fn thumbnails(meta: &VideoMetadata, fragments: &[Fragment]) -> Vec<String> {
    if let Some(template) = &meta.thumbnail_template {
        return fragments.iter().map(|f| template.replace("{t}", &format!("{}", f.time_start.floor() as u64))).collect();
    }
    match meta.thumbnail_urls.last() {
        Some(last) => (0..fragments.len())
            .map(|i| meta.thumbnail_urls.get(i).unwrap_or(last).clone())
            .collect(),
        None => Vec::new(),
    }
}

/// Assembles the stored record from fragments and their annotations.
pub fn assemble(
    meta: &VideoMetadata,
    duration: f64,
    fragments: Vec<Fragment>,
    annotations: Vec<Vec<ConceptAnnotation>>,
    config: &IngestConfig,
) -> EnrichedVideo {
    let (annotations, video_tags) = dedupe_video_keywords(annotations, config.ubiquity_threshold);
    let thumbnail_urls = thumbnails(meta, &fragments);
    let fragments = fragments
        .into_iter()
        .zip(annotations)
        .map(|(fragment, annotations)| EnrichedFragment { fragment, annotations, relevance: None, highlight: None })
        .collect();
    EnrichedVideo {
        video_id: meta.video_id.clone(),
        title: meta.title.clone(),
        description: meta.description.clone(),
        duration,
        thumbnail_urls,
        media_url: meta.media_url.clone(),
        fragments,
        video_tags,
    }
}

/// Full enrichment with the local linker; no persistence.
pub fn enrich_local(
    meta: &VideoMetadata,
    transcript_bytes: &[u8],
    format: TranscriptFormat,
    lexicon: &ConceptLexicon,
    config: &IngestConfig,
) -> Result<EnrichedVideo, CatalogError> {
    let (duration, fragments) = prepare_fragments(meta, transcript_bytes, format, config)?;
    let annotations = fragments.iter().map(|f| annotate_fragment(f, lexicon, &config.annotate)).collect();
    Ok(assemble(meta, duration, fragments, annotations, config))
}

pub async fn enrich(
    meta: &VideoMetadata,
    transcript_bytes: &[u8],
    format: TranscriptFormat,
    annotator: &Annotator,
    config: &IngestConfig,
) -> Result<EnrichedVideo, CatalogError> {
    match annotator {
        Annotator::Local(lexicon) => enrich_local(meta, transcript_bytes, format, lexicon, config),
        Annotator::Remote(remote) => {
            let (duration, fragments) = prepare_fragments(meta, transcript_bytes, format, config)?;
            let mut annotations = Vec::with_capacity(fragments.len());
            for f in &fragments {
                let mut anns = remote.annotate(&f.text).await.map_err(AnnotateError::from)?;
                anns.truncate(config.annotate.top_k);
                annotations.push(anns);
            }
            Ok(assemble(meta, duration, fragments, annotations, config))
        }
    }
}

/// parse → normalize → fragment → annotate → dedupe → persist.
pub async fn ingest_video(
    store: &CatalogStore,
    meta: &VideoMetadata,
    transcript_bytes: &[u8],
    format: TranscriptFormat,
    annotator: &Annotator,
    config: &IngestConfig,
) -> Result<Arc<EnrichedVideo>, CatalogError> {
    if !config.overwrite && store.contains(&meta.video_id) {
        return Err(CatalogError::Conflict(meta.video_id.clone()));
    }
    let video = enrich(meta, transcript_bytes, format, annotator, config).await?;
    store.store(video, config.overwrite)
}

/// Synchronous variant of [`ingest_video`] for the local linker.
pub fn ingest_video_local(
    store: &CatalogStore,
    meta: &VideoMetadata,
    transcript_bytes: &[u8],
    format: TranscriptFormat,
    lexicon: &ConceptLexicon,
    config: &IngestConfig,
) -> Result<Arc<EnrichedVideo>, CatalogError> {
    if !config.overwrite && store.contains(&meta.video_id) {
        return Err(CatalogError::Conflict(meta.video_id.clone()));
    }
    let video = enrich_local(meta, transcript_bytes, format, lexicon, config)?;
    store.store(video, config.overwrite)
}
