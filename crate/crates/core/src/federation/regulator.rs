//! The regulator tier: validates pushed region summaries against an
//! incumbent registry.
//!
//! `POST /v1/regulator/summaries` takes a [`RegionSummary`] and answers with
//! a [`ValidationReport`]; `GET /v1/regulator/registry` lists incumbents.
//! Reports are remembered by summary digest so a retransmitted summary gets
//! the same answer without new state.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use axum::extract::{DefaultBodyLimit, State};
use axum::http::StatusCode;
use axum::routing::{get, post};
use axum::{Json, Router};

use super::{validate_summary, FederationError, IncumbentRecord, RegionSummary, ValidationReport};
use crate::api::{ApiError, JsonText};

#[derive(Debug, Default)]
pub struct Regulator {
    registry: Vec<IncumbentRecord>,
    reports: Mutex<HashMap<String, ValidationReport>>,
}

impl Regulator {
    pub fn new(registry: Vec<IncumbentRecord>) -> Self {
        Regulator {
            registry,
            reports: Mutex::new(HashMap::new()),
        }
    }

    pub fn registry(&self) -> &[IncumbentRecord] {
        &self.registry
    }

    /// Validates `summary`, reusing the stored report for a summary already seen.
    pub fn receive(&self, summary: &RegionSummary) -> Result<ValidationReport, FederationError> {
        let key = summary.digest();
        if let Some(r) = self.reports.lock().expect("report cache").get(&key) {
            return Ok(r.clone());
        }
        let report = validate_summary(summary, &self.registry)?;
        self.reports
            .lock()
            .expect("report cache")
            .entry(key)
            .or_insert(report.clone());
        Ok(report)
    }

    /// Number of distinct summaries received.
    pub fn received(&self) -> usize {
        self.reports.lock().expect("report cache").len()
    }
}

pub fn router(regulator: Arc<Regulator>) -> Router {
    Router::new()
        .route("/v1/regulator/summaries", post(receive_summary))
        .route("/v1/regulator/registry", get(list_registry))
        .layer(DefaultBodyLimit::max(64 * 1024 * 1024))
        .with_state(regulator)
}

async fn receive_summary(
    State(regulator): State<Arc<Regulator>>,
    body: String,
) -> Result<JsonText, ApiError> {
    let summary = RegionSummary::from_json(&body)
        .map_err(|e| ApiError::bad_request("malformed_summary", e.to_string()))?;
    match regulator.receive(&summary) {
        Ok(report) => Ok(JsonText(report.to_json())),
        Err(e @ FederationError::PlanMismatch(_)) => Err(ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            "plan_mismatch",
            e.to_string(),
        )),
        Err(e) => Err(ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            "rejected",
            e.to_string(),
        )),
    }
}

async fn list_registry(State(regulator): State<Arc<Regulator>>) -> Json<Vec<IncumbentRecord>> {
    Json(regulator.registry.clone())
}
