//! HTTP/JSON interface of the repository.
//!
//! | method | path | controller |
//! |---|---|---|
//! | POST | `/v1/journeys` | upload (canonical body, or raw with `X-Device-Kind`) |
//! | GET | `/v1/journeys/{id}` | canonical document |
//! | GET | `/v1/journeys?bbox=&country=&city=&from=&to=&device=` | query |
//! | POST | `/v1/journeys/{id}/condense` | derive |
//! | POST | `/v1/journeys/{id}/rezone` | derive |
//! | GET | `/v1/journeys/{id}/occupation?width_hz=&start_hz=&stop_hz=&threshold_dbm=` | analysis |
//! | GET | `/v1/journeys/{id}/occupation-curve?thresholds=t1,t2,...` | analysis |
//! | GET | `/v1/journeys/{id}/heatmap?channel=&cell_m=` | analysis |
//! | GET | `/v1/region` | region configuration |
//!
//! The uploader token is read from `Authorization: Bearer <token>`.

use std::collections::HashMap;
use std::sync::Arc;

use axum::extract::{DefaultBodyLimit, Path, Query, State};
use axum::http::{HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;

use super::{Derivation, JourneyFilter, PlanParams, Repository, RepositoryError, Upload};
use crate::api::{ApiError, JsonText};
use crate::geo::{Aggregation, CondensationConfig};
use crate::ingest::CaptureHint;
use crate::model::{Band, DeviceKind, GeoPoint, Zone, ZoneLabel};
use crate::occupancy::ChannelSelection;

pub const MAX_BODY_BYTES: usize = 256 * 1024 * 1024;

impl From<RepositoryError> for ApiError {
    fn from(e: RepositoryError) -> Self {
        use crate::error::AnalysisError as A;
        match e {
            RepositoryError::EmptyPayload => ApiError::bad_request("empty_payload", e.to_string()),
            RepositoryError::Validation(v) => ApiError::new(
                StatusCode::UNPROCESSABLE_ENTITY,
                "validation_failed",
                serde_json::to_value(v).expect("violations serialize"),
            ),
            RepositoryError::Format(m) => ApiError::bad_request("format_error", m),
            RepositoryError::UnknownId(id) => ApiError::new(StatusCode::NOT_FOUND, "unknown_id", id),
            RepositoryError::MalformedFilter(m) => ApiError::bad_request("malformed_filter", m),
            RepositoryError::InvalidRequest(m) => ApiError::bad_request("invalid_request", m),
            RepositoryError::Analysis(a) => {
                let code = match a {
                    A::EmptyJourney => "empty_journey",
                    A::EmptyChannel(_) => "empty_channel",
                    A::DegenerateBand(_) | A::PlanOutsideBand { .. } => "invalid_plan",
                    A::InvalidCellSize(_) | A::InvalidChannel { .. } | A::UnorderedThresholds => {
                        "precondition_failed"
                    }
                };
                let status = match a {
                    A::EmptyJourney | A::EmptyChannel(_) => StatusCode::UNPROCESSABLE_ENTITY,
                    _ => StatusCode::BAD_REQUEST,
                };
                ApiError::new(status, code, a.to_string())
            }
            RepositoryError::Storage(s) => {
                ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "storage_failure", s.to_string())
            }
        }
    }
}

pub fn router(repo: Arc<Repository>) -> Router {
    Router::new()
        .route("/v1/journeys", post(upload).get(query))
        .route("/v1/journeys/{id}", get(fetch))
        .route("/v1/journeys/{id}/condense", post(derive_condense))
        .route("/v1/journeys/{id}/rezone", post(derive_rezone))
        .route("/v1/journeys/{id}/occupation", get(occupation))
        .route("/v1/journeys/{id}/occupation-curve", get(occupation_curve))
        .route("/v1/journeys/{id}/heatmap", get(heatmap))
        .route("/v1/region", get(region))
        .layer(DefaultBodyLimit::max(MAX_BODY_BYTES))
        .with_state(repo)
}

fn header<'a>(headers: &'a HeaderMap, name: &str) -> Option<&'a str> {
    headers.get(name).and_then(|v| v.to_str().ok()).map(str::trim)
}

fn bearer_token(headers: &HeaderMap) -> String {
    header(headers, "authorization")
        .and_then(|v| v.strip_prefix("Bearer "))
        .unwrap_or("")
        .trim()
        .to_string()
}

fn header_u64(headers: &HeaderMap, name: &str) -> Result<Option<u64>, ApiError> {
    header(headers, name)
        .map(|v| {
            parse_hz(v).ok_or_else(|| ApiError::bad_request("invalid_request", format!("{name}: {v:?}")))
        })
        .transpose()
}

/// Accepts integers or scientific notation (`470e6`) naming a whole number.
pub fn parse_hz(text: &str) -> Option<u64> {
    if let Ok(v) = text.parse::<u64>() {
        return Some(v);
    }
    let v: f64 = text.parse().ok()?;
    (v.is_finite() && v >= 0.0 && v.fract() == 0.0 && v < u64::MAX as f64).then_some(v as u64)
}

async fn upload(
    State(repo): State<Arc<Repository>>,
    headers: HeaderMap,
    body: axum::body::Bytes,
) -> Result<Response, ApiError> {
    let device_kind = header(&headers, "x-device-kind")
        .map(|k| {
            k.parse::<DeviceKind>()
                .map_err(|e| ApiError::bad_request("invalid_request", e.to_string()))
        })
        .transpose()?;
    let band = match (
        header_u64(&headers, "x-band-start-hz")?,
        header_u64(&headers, "x-band-stop-hz")?,
    ) {
        (Some(a), Some(b)) => Some(Band::new(a, b)),
        _ => None,
    };
    let bin_count = header_u64(&headers, "x-bin-count")?.map(|n| n as usize);
    let request = Upload {
        payload: body.to_vec(),
        device_kind,
        hint: CaptureHint { band, bin_count },
        uploader_token: bearer_token(&headers),
    };
    let task_repo = repo.clone();
    let (id, created) = tokio::task::spawn_blocking(move || task_repo.upload(&request))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))??;
    let status = if created { StatusCode::CREATED } else { StatusCode::OK };
    Ok((status, Json(serde_json::json!({ "id": id }))).into_response())
}

async fn fetch(State(repo): State<Arc<Repository>>, Path(id): Path<String>) -> Result<JsonText, ApiError> {
    Ok(JsonText(repo.get(&id)?.document.clone()))
}

async fn query(
    State(repo): State<Arc<Repository>>,
    Query(params): Query<Vec<(String, String)>>,
) -> Result<JsonText, ApiError> {
    let filter = JourneyFilter::from_params(params.iter().map(|(k, v)| (k.as_str(), v.as_str())))?;
    Ok(JsonText(serde_json::to_string(&repo.query(&filter)).expect("summaries serialize")))
}

#[derive(Deserialize)]
struct CondenseBody {
    radius_m: f64,
    #[serde(default = "default_aggregation")]
    aggregation: String,
}

fn default_aggregation() -> String {
    "max".into()
}

#[derive(Deserialize)]
struct RezoneBody {
    #[serde(default = "default_label")]
    label: String,
    vertices: Vec<[f64; 2]>,
}

fn default_label() -> String {
    "custom".into()
}

fn json_body<T: for<'de> Deserialize<'de>>(body: &str) -> Result<T, ApiError> {
    serde_json::from_str(body).map_err(|e| ApiError::bad_request("invalid_request", e.to_string()))
}

fn created(id: String) -> Response {
    (StatusCode::CREATED, Json(serde_json::json!({ "id": id }))).into_response()
}

async fn derive_condense(
    State(repo): State<Arc<Repository>>,
    Path(id): Path<String>,
    body: String,
) -> Result<Response, ApiError> {
    let req: CondenseBody = json_body(&body)?;
    let aggregation: Aggregation = req
        .aggregation
        .parse()
        .map_err(|e: String| ApiError::bad_request("invalid_request", e))?;
    let cfg = CondensationConfig::new(req.radius_m, aggregation)
        .map_err(|e| ApiError::bad_request("invalid_request", e.to_string()))?;
    Ok(created(repo.derive(&id, &Derivation::Condense(cfg))?))
}

async fn derive_rezone(
    State(repo): State<Arc<Repository>>,
    Path(id): Path<String>,
    body: String,
) -> Result<Response, ApiError> {
    let req: RezoneBody = json_body(&body)?;
    let label: ZoneLabel = req
        .label
        .parse()
        .map_err(|e: crate::error::ModelError| ApiError::bad_request("invalid_request", e.to_string()))?;
    let vertices = req.vertices.iter().map(|[lat, lon]| GeoPoint::new(*lat, *lon)).collect();
    let zone = Zone::new(label, vertices).map_err(|e| ApiError::bad_request("invalid_zone", e.to_string()))?;
    Ok(created(repo.derive(&id, &Derivation::Rezone(zone))?))
}

fn plan_params(q: &HashMap<String, String>) -> Result<PlanParams, ApiError> {
    let get = |key: &str| {
        q.get(key)
            .filter(|v| !v.is_empty())
            .map(|v| parse_hz(v).ok_or_else(|| ApiError::bad_request("invalid_request", format!("{key}={v:?}"))))
            .transpose()
    };
    Ok(PlanParams {
        start_hz: get("start_hz")?,
        stop_hz: get("stop_hz")?,
        width_hz: get("width_hz")?,
    })
}

fn parse_f64(key: &str, v: &str) -> Result<f64, ApiError> {
    v.trim()
        .parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| ApiError::bad_request("invalid_request", format!("{key}={v:?} is not a number")))
}

async fn occupation(
    State(repo): State<Arc<Repository>>,
    Path(id): Path<String>,
    Query(q): Query<HashMap<String, String>>,
) -> Result<JsonText, ApiError> {
    let threshold = q
        .get("threshold_dbm")
        .filter(|v| !v.is_empty())
        .map(|v| parse_f64("threshold_dbm", v))
        .transpose()?;
    let report = repo.occupation(&id, plan_params(&q)?, threshold)?;
    Ok(JsonText(report.to_json()))
}

async fn occupation_curve(
    State(repo): State<Arc<Repository>>,
    Path(id): Path<String>,
    Query(q): Query<HashMap<String, String>>,
) -> Result<JsonText, ApiError> {
    let thresholds = q
        .get("thresholds")
        .ok_or_else(|| ApiError::bad_request("invalid_request", "thresholds is required"))?
        .split(',')
        .map(|t| parse_f64("thresholds", t))
        .collect::<Result<Vec<_>, _>>()?;
    let reports = repo.occupation_curve(&id, plan_params(&q)?, &thresholds)?;
    Ok(JsonText(serde_json::to_string(&reports).expect("reports serialize")))
}

async fn heatmap(
    State(repo): State<Arc<Repository>>,
    Path(id): Path<String>,
    Query(q): Query<HashMap<String, String>>,
) -> Result<JsonText, ApiError> {
    let selection = match q.get("channel").map(String::as_str) {
        None | Some("") | Some("all") => ChannelSelection::WholeBand,
        Some(v) => ChannelSelection::Channel(v.parse().map_err(|_| {
            ApiError::bad_request("invalid_request", format!("channel={v:?} is not an index"))
        })?),
    };
    let cell = q
        .get("cell_m")
        .ok_or_else(|| ApiError::bad_request("invalid_request", "cell_m is required"))?;
    let grid = repo.heatmap(&id, plan_params(&q)?, selection, parse_f64("cell_m", cell)?)?;
    Ok(JsonText(grid.to_json()))
}

async fn region(State(repo): State<Arc<Repository>>) -> Json<super::RegionConfig> {
    Json(repo.region().clone())
}
