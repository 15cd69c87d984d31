use crate::presets::PresetError;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;

/// Body of every error response: `{code, message, field?}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
}

#[derive(Debug, Clone)]
pub struct ApiError {
    pub status: StatusCode,
    pub body: ErrorBody,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            body: ErrorBody {
                code: code.into(),
                message: message.into(),
                field: None,
            },
        }
    }

    pub fn with_field(mut self, field: impl Into<String>) -> Self {
        self.body.field = Some(field.into());
        self
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad_request", message)
    }

    pub fn validation(field: &str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, "validation_failed", message).with_field(field)
    }

    pub fn not_found(what: &str, id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", format!("{what} {id:?} not found"))
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

impl From<drift_core::Error> for ApiError {
    fn from(e: drift_core::Error) -> Self {
        use drift_core::Error as E;
        match &e {
            E::Io { .. } => ApiError::internal(e.to_string()),
            E::UnknownCategory { field, .. } => {
                ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "unknown_category", e.to_string()).with_field(field.clone())
            }
            E::Format { .. } | E::Codec(_) => ApiError::new(StatusCode::BAD_REQUEST, "malformed_input", e.to_string()),
            _ => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_input", e.to_string()),
        }
    }
}

impl From<PresetError> for ApiError {
    fn from(e: PresetError) -> Self {
        match &e {
            PresetError::InvalidName(_) => ApiError::validation("name", e.to_string()),
            PresetError::Exists(_) => ApiError::new(StatusCode::CONFLICT, "preset_exists", e.to_string()).with_field("name"),
            PresetError::NotFound(_) => ApiError::new(StatusCode::NOT_FOUND, "not_found", e.to_string()),
            PresetError::Malformed { .. } | PresetError::Io { .. } => ApiError::internal(e.to_string()),
        }
    }
}
