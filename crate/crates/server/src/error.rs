use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use cfb_core::catalog::{CatalogError, EventLogError};
use serde::Serialize;

/// Error body: `{"error": message, "field": name}` with `field` only for
/// payload validation failures.
#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub message: String,
    pub field: Option<String>,
}

#[derive(Serialize)]
struct Body<'a> {
    error: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    field: Option<&'a str>,
}

impl ApiError {
    pub fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self { status, message: message.into(), field: None }
    }

    pub fn bad_request(message: impl Into<String>, field: Option<String>) -> Self {
        Self { status: StatusCode::BAD_REQUEST, message: message.into(), field }
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        if self.status.is_server_error() {
            tracing::error!(status = %self.status, error = %self.message, "request failed");
        }
        let body = Body { error: &self.message, field: self.field.as_deref() };
        (self.status, Json(body)).into_response()
    }
}

impl From<CatalogError> for ApiError {
    fn from(e: CatalogError) -> Self {
        let status = match &e {
            CatalogError::NotFound(_) => StatusCode::NOT_FOUND,
            CatalogError::Conflict(_) => StatusCode::CONFLICT,
            CatalogError::InvalidId(_) | CatalogError::Invalid(_) => StatusCode::BAD_REQUEST,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        Self::new(status, e.to_string())
    }
}

impl From<EventLogError> for ApiError {
    fn from(e: EventLogError) -> Self {
        match e {
            EventLogError::Schema(s) => Self::bad_request(s.to_string(), Some(s.field.to_string())),
            EventLogError::NotFound(_) => Self::not_found(e.to_string()),
            EventLogError::Io(_) => Self::internal(e.to_string()),
        }
    }
}
