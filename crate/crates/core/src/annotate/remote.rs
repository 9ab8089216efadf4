//! Client for a Wikifier-style annotation service.

use std::sync::Arc;
use std::time::Duration;

use serde::Deserialize;
use thiserror::Error;
use tokio::sync::Semaphore;

use super::ConceptAnnotation;

#[derive(Debug, Error)]
pub enum RemoteError {
    #[error("transport failure after {attempts} attempt(s): {message}")]
    Retriable { attempts: usize, message: String },
    #[error("annotation service returned HTTP {status}")]
    Service { status: u16, body: String },
    #[error("could not decode annotation response: {0}")]
    Decode(String),
}

impl RemoteError {
    pub fn is_retriable(&self) -> bool {
        matches!(self, RemoteError::Retriable { .. })
    }
}

#[derive(Debug, Clone)]
pub struct RemoteConfig {
    pub endpoint: String,
    pub api_key: String,
    pub language: String,
    pub timeout: Duration,
    pub attempts: usize,
    pub backoff: Duration,
    pub max_in_flight: usize,
    /// Annotations whose service score falls below this are dropped.
    pub min_page_rank: Option<f64>,
}

impl RemoteConfig {
    pub fn new(endpoint: impl Into<String>, api_key: impl Into<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
            api_key: api_key.into(),
            language: "en".into(),
            timeout: Duration::from_secs(30),
            attempts: 3,
            backoff: Duration::from_millis(250),
            max_in_flight: 4,
            min_page_rank: None,
        }
    }
}

#[derive(Deserialize)]
struct Response {
    annotations: Vec<RemoteAnnotation>,
}

#[derive(Deserialize)]
struct RemoteAnnotation {
    title: String,
    #[serde(default)]
    url: String,
    #[serde(rename = "pageRank")]
    page_rank: f64,
}

#[derive(Clone)]
pub struct RemoteAnnotator {
    client: reqwest::Client,
    config: Arc<RemoteConfig>,
    permits: Arc<Semaphore>,
}

impl RemoteAnnotator {
    pub fn new(config: RemoteConfig) -> Result<Self, RemoteError> {
        let client = reqwest::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| RemoteError::Retriable { attempts: 0, message: e.to_string() })?;
        let permits = Arc::new(Semaphore::new(config.max_in_flight.max(1)));
        Ok(Self { client, config: Arc::new(config), permits })
    }

    pub fn config(&self) -> &RemoteConfig {
        &self.config
    }

    /// Annotates `text`. Transport failures are retried up to the configured
    /// attempt count; HTTP and decode errors are returned immediately.
    pub async fn annotate(&self, text: &str) -> Result<Vec<ConceptAnnotation>, RemoteError> {
        let _permit = self.permits.acquire().await.expect("semaphore never closed");
        let attempts = self.config.attempts.max(1);
        let form = [
            ("text", text),
            ("lang", self.config.language.as_str()),
            ("userKey", self.config.api_key.as_str()),
        ];
        let mut last_err = String::new();
        for attempt in 1..=attempts {
            match self.client.post(&self.config.endpoint).form(&form).send().await {
                Ok(resp) => {
                    let status = resp.status();
                    let body = resp.text().await.map_err(|e| RemoteError::Decode(e.to_string()))?;
                    if !status.is_success() {
                        return Err(RemoteError::Service { status: status.as_u16(), body });
                    }
                    return decode_annotations(&body, self.config.min_page_rank);
                }
                Err(e) => {
                    tracing::debug!(attempt, error = %e, "remote annotate failed");
                    last_err = e.to_string();
                    if attempt < attempts {
                        tokio::time::sleep(self.config.backoff * attempt as u32).await;
                    }
                }
            }
        }
        Err(RemoteError::Retriable { attempts, message: last_err })
    }
}

/// Maps a service response body to annotations with scores normalized to
/// sum to one.
pub fn decode_annotations(body: &str, min_page_rank: Option<f64>) -> Result<Vec<ConceptAnnotation>, RemoteError> {
    let resp: Response = serde_json::from_str(body).map_err(|e| RemoteError::Decode(e.to_string()))?;
    let kept: Vec<RemoteAnnotation> = resp
        .annotations
        .into_iter()
        .filter(|a| a.page_rank.is_finite() && a.page_rank >= min_page_rank.unwrap_or(0.0).max(0.0))
        .collect();
    let total: f64 = kept.iter().map(|a| a.page_rank).sum();
    let mut out: Vec<ConceptAnnotation> = kept
        .into_iter()
        .map(|a| ConceptAnnotation {
            concept_id: a.title.clone(),
            score: if total > 0.0 { a.page_rank / total } else { 0.0 },
            title: a.title,
            url: a.url,
            rank: 0,
        })
        .collect();
    super::sort_and_rank(&mut out);
    Ok(out)
}
