use thiserror::Error;

use crate::model::Violation;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("unknown device kind {0:?}")]
    UnknownDeviceKind(String),
    #[error("unknown zone label {0:?}")]
    UnknownZoneLabel(String),
    #[error("bounding box is not well ordered: {0}")]
    InvalidBoundingBox(String),
    #[error("invalid zone: {0}")]
    InvalidZone(String),
}

/// Failure to read a canonical journey document.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum DocumentError {
    /// The text is not well-formed JSON.
    #[error("malformed document: {0}")]
    Syntax(String),
    /// Well-formed JSON that does not follow the journey schema.
    #[error("schema error at {path}: {reason}")]
    Schema { path: String, reason: String },
    /// Schema-conformant document whose values break journey invariants.
    #[error("journey violates {} invariant(s): {}", .0.len(), first_violation(.0))]
    Invalid(Vec<Violation>),
}

fn first_violation(v: &[Violation]) -> String {
    v.first().map(|v| v.to_string()).unwrap_or_default()
}

impl DocumentError {
    pub(crate) fn schema(path: impl Into<String>, reason: impl Into<String>) -> Self {
        DocumentError::Schema {
            path: path.into(),
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IngestError {
    #[error("unsupported device kind {0} for raw capture")]
    UnsupportedDevice(crate::model::DeviceKind),
    #[error("empty payload")]
    EmptyPayload,
    #[error("line {line}: {reason}")]
    Format { line: usize, reason: String },
    #[error("line {line}: expected {expected} powers, found {found}")]
    Inconsistent {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("converted journey is invalid: {}", first_violation(.0))]
    Invalid(Vec<Violation>),
    #[error("sweep {sweep} at t={timestamp} lies outside the track span [{first}, {last}]")]
    OutOfTrack {
        sweep: usize,
        timestamp: f64,
        first: f64,
        last: f64,
    },
    #[error("location track: {0}")]
    Track(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeoError {
    #[error("condensation radius must be positive, got {0}")]
    InvalidRadius(f64),
    #[error("spacing statistics need at least 2 sweeps, got {0}")]
    TooFewSweeps(usize),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("degenerate band: {0}")]
    DegenerateBand(String),
    #[error("plan [{plan_start}, {plan_stop}) Hz is not inside journey band [{band_start}, {band_stop}) Hz")]
    PlanOutsideBand {
        plan_start: u64,
        plan_stop: u64,
        band_start: u64,
        band_stop: u64,
    },
    #[error("channel {0} contains no frequency bin")]
    EmptyChannel(usize),
    #[error("journey has no sweeps")]
    EmptyJourney,
    #[error("thresholds must be strictly increasing")]
    UnorderedThresholds,
    #[error("cell size must be positive, got {0}")]
    InvalidCellSize(f64),
    #[error("channel index {index} out of range for a {channels}-channel plan")]
    InvalidChannel { index: usize, channels: usize },
}
