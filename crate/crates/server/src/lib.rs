//! HTTP/JSON API over the enriched catalog, concept definitions and the
//! interaction event log.
//!
//! Catalog reads go through the store's immutable snapshot; event appends
//! run on the blocking pool because each one waits for `fdatasync`.

mod error;
mod handlers;

use std::future::Future;
use std::path::PathBuf;
use std::sync::Arc;

use axum::routing::get;
use axum::Router;
use cfb_core::annotate::{AnnotateError, ConceptLexicon, RemoteAnnotator, RemoteConfig, RemoteError};
use cfb_core::catalog::{CatalogError, CatalogStore, EventLogError, EventStore};
use cfb_core::events::Condition;
use cfb_core::relevance::DEFAULT_HIGHLIGHT_LEVELS;
use serde::Serialize;
use thiserror::Error;
use tokio::net::TcpListener;

pub use error::ApiError;

pub const DEFAULT_SEARCH_LIMIT: usize = 18;

#[derive(Debug, Error)]
pub enum ServerError {
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Events(#[from] EventLogError),
    #[error(transparent)]
    Lexicon(#[from] AnnotateError),
    #[error(transparent)]
    Remote(#[from] RemoteError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

/// Client-visible feature flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Flags {
    pub default_mode: Condition,
    /// Relevance shading of fragments in search results.
    pub highlighting: bool,
    pub search_limit: usize,
    pub highlight_levels: usize,
}

impl Default for Flags {
    fn default() -> Self {
        Self {
            default_mode: Condition::CfbOn,
            highlighting: true,
            search_limit: DEFAULT_SEARCH_LIMIT,
            highlight_levels: DEFAULT_HIGHLIGHT_LEVELS,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ServerConfig {
    pub data_dir: PathBuf,
    /// Used to link search queries and to serve definitions.
    pub lexicon: Option<PathBuf>,
    /// Links search queries remotely instead of with the lexicon.
    pub remote: Option<RemoteConfig>,
    pub flags: Flags,
}

impl ServerConfig {
    pub fn new(data_dir: impl Into<PathBuf>) -> Self {
        Self { data_dir: data_dir.into(), lexicon: None, remote: None, flags: Flags::default() }
    }
}

#[derive(Clone)]
pub(crate) enum QueryLinker {
    Local,
    Remote(RemoteAnnotator),
}

#[derive(Clone)]
pub struct AppState {
    pub(crate) catalog: Arc<CatalogStore>,
    pub(crate) events: Arc<EventStore>,
    pub(crate) lexicon: Arc<ConceptLexicon>,
    pub(crate) linker: QueryLinker,
    pub(crate) flags: Flags,
}

impl AppState {
    /// Opens the stores under `data_dir`, which must already exist.
    pub fn open(config: &ServerConfig) -> Result<Self, ServerError> {
        let catalog = CatalogStore::open(&config.data_dir)?;
        let events = EventStore::open(&config.data_dir)?;
        let lexicon = match &config.lexicon {
            Some(path) => ConceptLexicon::load(path)?,
            None => ConceptLexicon::default(),
        };
        let linker = match &config.remote {
            Some(remote) => QueryLinker::Remote(RemoteAnnotator::new(remote.clone())?),
            None => QueryLinker::Local,
        };
        Ok(Self {
            catalog: Arc::new(catalog),
            events: Arc::new(events),
            lexicon: Arc::new(lexicon),
            linker,
            flags: config.flags,
        })
    }

    pub fn catalog(&self) -> &CatalogStore {
        &self.catalog
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/videos", get(handlers::list_videos))
        .route("/videos/{id}", get(handlers::get_video))
        .route("/search", get(handlers::search))
        .route("/definitions/{concept_id}", get(handlers::get_definition))
        .route("/events", axum::routing::post(handlers::post_event))
        .route("/sessions/{id}/events", get(handlers::get_session_events))
        .route("/config", get(handlers::get_config))
        .with_state(state)
}

/// Serves until `shutdown` resolves, then drains in-flight requests.
/// Every acknowledged event has already been synced, so nothing needs
/// flushing afterwards.
pub async fn serve(
    state: AppState,
    listener: TcpListener,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> Result<(), ServerError> {
    if let Ok(addr) = listener.local_addr() {
        tracing::info!(%addr, videos = state.catalog.list().len(), "serving");
    }
    axum::serve(listener, router(state)).with_graceful_shutdown(shutdown).await?;
    tracing::info!("shut down");
    Ok(())
}

/// Resolves on Ctrl-C or SIGTERM.
pub async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let terminate = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let terminate = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {},
        _ = terminate => {},
    }
}
