use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use rws_core::{CoreError, GenerateError, IoError, MemoryGuardDecision, SolveError};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, Error)]
#[error("{code}: {message}")]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
    pub decision: Option<MemoryGuardDecision>,
}

#[derive(Debug, Serialize)]
pub struct ErrorBody<'a> {
    pub error: &'a str,
    pub message: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decision: Option<&'a MemoryGuardDecision>,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self {
            status,
            code,
            message: message.into(),
            decision: None,
        }
    }

    pub fn not_found(what: &str, id: u64) -> Self {
        Self::new(StatusCode::NOT_FOUND, "NOT_FOUND", format!("{what} {id} does not exist"))
    }

    pub fn not_ready(message: impl Into<String>) -> Self {
        Self::new(StatusCode::CONFLICT, "NOT_READY", message)
    }

    pub fn body(&self) -> ErrorBody<'_> {
        ErrorBody {
            error: self.code,
            message: &self.message,
            decision: self.decision.as_ref(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body())).into_response()
    }
}

impl From<CoreError> for ApiError {
    fn from(err: CoreError) -> Self {
        let (status, code) = match err {
            CoreError::Infeasible { .. } => (StatusCode::UNPROCESSABLE_ENTITY, "INFEASIBLE"),
            CoreError::NotWorkingCell { .. } => (StatusCode::CONFLICT, "NOT_WORKING_CELL"),
            CoreError::OutOfRange { .. } => (StatusCode::UNPROCESSABLE_ENTITY, "OUT_OF_RANGE"),
            CoreError::UnknownShift { .. } => (StatusCode::UNPROCESSABLE_ENTITY, "UNKNOWN_SHIFT"),
            CoreError::Shape { .. } => (StatusCode::UNPROCESSABLE_ENTITY, "SHAPE_MISMATCH"),
            CoreError::TooLarge(_) => (StatusCode::UNPROCESSABLE_ENTITY, "TOO_LARGE"),
            CoreError::InvalidParams(_) | CoreError::Domain { .. } => {
                (StatusCode::UNPROCESSABLE_ENTITY, "INVALID_PARAMS")
            }
        };
        Self::new(status, code, err.to_string())
    }
}

impl From<GenerateError> for ApiError {
    fn from(err: GenerateError) -> Self {
        match err {
            GenerateError::Core(e) => e.into(),
            GenerateError::Cancelled(_) => Self::new(StatusCode::CONFLICT, "CANCELLED", err.to_string()),
        }
    }
}

impl From<SolveError> for ApiError {
    fn from(err: SolveError) -> Self {
        match err {
            SolveError::Core(e) => e.into(),
            SolveError::MemoryGuard(ref decision) => Self {
                decision: Some(decision.clone()),
                ..Self::new(StatusCode::CONFLICT, "MEMORY_GUARD", err.to_string())
            },
            SolveError::Cancelled(_) => Self::new(StatusCode::CONFLICT, "CANCELLED", err.to_string()),
        }
    }
}

impl From<IoError> for ApiError {
    fn from(err: IoError) -> Self {
        match err {
            IoError::Core(e) => e.into(),
            IoError::CatalogMismatch => {
                Self::new(StatusCode::UNPROCESSABLE_ENTITY, "CATALOG_MISMATCH", err.to_string())
            }
            other => Self::new(StatusCode::INTERNAL_SERVER_ERROR, "INTERNAL", other.to_string()),
        }
    }
}
