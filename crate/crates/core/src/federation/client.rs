use thiserror::Error;

use super::{RegionSummary, ValidationReport};
use crate::api::ErrorBody;

pub const SUMMARIES_PATH: &str = "/v1/regulator/summaries";

#[derive(Debug, Error)]
pub enum PushError {
    /// The regulator could not be reached; safe to retry.
    #[error("transport error: {0}")]
    Transport(String),
    #[error("regulator rejected the summary ({code}): {reason}")]
    Rejected {
        status: u16,
        code: String,
        reason: String,
    },
    #[error("unexpected regulator reply: {0}")]
    Protocol(String),
}

impl PushError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, PushError::Transport(_))
    }
}

/// Sends `summary` to the regulator at `endpoint` (scheme, host and port,
/// e.g. `http://127.0.0.1:8081`) and returns its validation report.
pub async fn push_summary(
    summary: &RegionSummary,
    endpoint: &str,
) -> Result<ValidationReport, PushError> {
    let url = format!("{}{}", endpoint.trim_end_matches('/'), SUMMARIES_PATH);
    let response = reqwest::Client::new()
        .post(&url)
        .header(reqwest::header::CONTENT_TYPE, "application/json")
        .body(summary.to_json())
        .send()
        .await
        .map_err(|e| PushError::Transport(e.to_string()))?;
    let status = response.status();
    let text = response
        .text()
        .await
        .map_err(|e| PushError::Transport(e.to_string()))?;
    if status.is_success() {
        serde_json::from_str(&text).map_err(|e| PushError::Protocol(e.to_string()))
    } else {
        let (code, reason) = match serde_json::from_str::<ErrorBody>(&text) {
            Ok(b) => (
                b.error,
                b.detail.as_str().map_or_else(|| b.detail.to_string(), str::to_string),
            ),
            Err(_) => (status.to_string(), text),
        };
        Err(PushError::Rejected {
            status: status.as_u16(),
            code,
            reason,
        })
    }
}
