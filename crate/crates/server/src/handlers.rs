use std::collections::HashMap;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::Json;
use cfb_core::catalog::{AppendOutcome, EnrichedVideo};
use cfb_core::events::InteractionEvent;
use cfb_core::relevance::{highlight_levels, query_vector, search_with_vector, ConceptVector};
use serde::Serialize;

use crate::error::ApiError;
use crate::{AppState, Flags, QueryLinker};

/// Upper bound on `limit` so one request cannot serialize the world twice.
const MAX_SEARCH_LIMIT: usize = 1000;

#[derive(Serialize)]
pub struct VideoSummary {
    video_id: String,
    title: String,
    description: String,
    duration: f64,
    media_url: String,
    thumbnail_urls: Vec<String>,
    n_fragments: usize,
    video_tags: Vec<cfb_core::annotate::ConceptAnnotation>,
}

pub async fn list_videos(State(state): State<AppState>) -> Json<Vec<VideoSummary>> {
    let videos = state
        .catalog
        .snapshot()
        .values()
        .map(|v| VideoSummary {
            video_id: v.video_id.clone(),
            title: v.title.clone(),
            description: v.description.clone(),
            duration: v.duration,
            media_url: v.media_url.clone(),
            thumbnail_urls: v.thumbnail_urls.clone(),
            n_fragments: v.fragments.len(),
            video_tags: v.video_tags.clone(),
        })
        .collect();
    Json(videos)
}

pub async fn get_video(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<EnrichedVideo>, ApiError> {
    let video = state.catalog.load(&id)?;
    Ok(Json(EnrichedVideo::clone(&video)))
}

#[derive(Serialize)]
pub struct SearchResult {
    rank: usize,
    video_score: f64,
    video: EnrichedVideo,
}

#[derive(Serialize)]
pub struct SearchResponse {
    query: String,
    highlighting: bool,
    results: Vec<SearchResult>,
}

fn parse_param<T: std::str::FromStr>(params: &HashMap<String, String>, name: &str) -> Result<Option<T>, ApiError> {
    params
        .get(name)
        .map(|raw| {
            raw.parse::<T>()
                .map_err(|_| ApiError::bad_request(format!("invalid value `{raw}` for `{name}`"), Some(name.to_string())))
        })
        .transpose()
}

/// `GET /search?q=&limit=&highlight=`. Every fragment of a returned video
/// carries its relevance; `highlight` is the shade level, or 0 for all
/// fragments when highlighting is off.
pub async fn search(
    State(state): State<AppState>,
    Query(params): Query<HashMap<String, String>>,
) -> Result<Json<SearchResponse>, ApiError> {
    let query = params.get("q").cloned().unwrap_or_default();
    let limit = parse_param::<usize>(&params, "limit")?.unwrap_or(state.flags.search_limit).min(MAX_SEARCH_LIMIT);
    let highlighting = parse_param::<bool>(&params, "highlight")?.unwrap_or(state.flags.highlighting);

    let vector = match &state.linker {
        QueryLinker::Local => query_vector(&query, &state.lexicon),
        QueryLinker::Remote(remote) if !query.trim().is_empty() => {
            let annotations = remote
                .annotate(&query)
                .await
                .map_err(|e| ApiError::new(axum::http::StatusCode::BAD_GATEWAY, e.to_string()))?;
            ConceptVector::from_annotations(&annotations)
        }
        QueryLinker::Remote(_) => ConceptVector::default(),
    };

    let snapshot = state.catalog.snapshot();
    let videos: Vec<&EnrichedVideo> = snapshot.values().map(|v| v.as_ref()).collect();
    let hits = search_with_vector(&vector, &videos, limit);
    let results = hits
        .into_iter()
        .enumerate()
        .map(|(i, hit)| {
            let mut video = EnrichedVideo::clone(&snapshot[&hit.video_id]);
            annotate_relevance(&mut video, &hit.fragment_scores, highlighting, &state.flags);
            SearchResult { rank: i + 1, video_score: hit.video_score, video }
        })
        .collect();
    Ok(Json(SearchResponse { query, highlighting, results }))
}

fn annotate_relevance(video: &mut EnrichedVideo, scores: &[f64], highlighting: bool, flags: &Flags) {
    let levels = highlight_levels(scores, flags.highlight_levels);
    for ((fragment, score), level) in video.fragments.iter_mut().zip(scores).zip(levels) {
        fragment.relevance = Some(*score);
        fragment.highlight = Some(if highlighting { level.0 } else { 0 });
    }
}

#[derive(Serialize)]
pub struct Definition {
    concept_id: String,
    title: Option<String>,
    url: Option<String>,
    definition: String,
}

pub async fn get_definition(
    State(state): State<AppState>,
    Path(concept_id): Path<String>,
) -> Result<Json<Definition>, ApiError> {
    let definition = state
        .lexicon
        .definition(&concept_id)
        .ok_or_else(|| ApiError::not_found(format!("no definition for `{concept_id}`")))?;
    let info = state.lexicon.concept(&concept_id);
    Ok(Json(Definition {
        concept_id: concept_id.clone(),
        title: info.map(|c| c.title.clone()),
        url: info.map(|c| c.url.clone()).filter(|u| !u.is_empty()),
        definition: definition.to_string(),
    }))
}

#[derive(Serialize)]
pub struct EventAck {
    event_id: String,
    status: &'static str,
}

/// Pulls the field name out of serde's "missing field `x`" messages.
fn missing_field(message: &str) -> Option<String> {
    let rest = message.split("missing field `").nth(1)?;
    Some(rest.split('`').next()?.to_string())
}

fn decode_event(body: &[u8]) -> Result<InteractionEvent, ApiError> {
    let value: serde_json::Value = serde_json::from_slice(body)
        .map_err(|e| ApiError::bad_request(format!("malformed JSON: {e}"), None))?;
    if !value.is_object() {
        return Err(ApiError::bad_request("event must be a JSON object", None));
    }
    serde_path_to_error::deserialize::<_, InteractionEvent>(value).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner().to_string();
        let field = if path == "." { missing_field(&inner) } else { Some(path) };
        ApiError::bad_request(format!("invalid event: {inner}"), field)
    })
}

/// `POST /events`. The response is sent only after the event is synced to
/// disk; a repeated `event_id` is acknowledged without a second write.
pub async fn post_event(State(state): State<AppState>, body: Bytes) -> Result<Json<EventAck>, ApiError> {
    let event = decode_event(&body)?;
    let event_id = event.event_id.clone();
    let store = state.events.clone();
    let outcome = tokio::task::spawn_blocking(move || store.append(&event))
        .await
        .map_err(|e| ApiError::internal(format!("append task failed: {e}")))??;
    let status = match outcome {
        AppendOutcome::Stored => "stored",
        AppendOutcome::Duplicate => "duplicate",
    };
    Ok(Json(EventAck { event_id, status }))
}

pub async fn get_session_events(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<Vec<InteractionEvent>>, ApiError> {
    let store = state.events.clone();
    let events = tokio::task::spawn_blocking(move || store.read_session(&id))
        .await
        .map_err(|e| ApiError::internal(format!("read task failed: {e}")))??;
    Ok(Json(events))
}

pub async fn get_config(State(state): State<AppState>) -> Json<Flags> {
    Json(state.flags)
}
