//! The regional repository.
//!
//! [`Repository`] holds the business logic behind the HTTP interface in
//! [`http`]: uploading (raw or canonical), filtering and querying, deriving
//! condensed or rezoned children, and the occupancy analyses. Persistence is
//! the append-only [`store::JourneyStore`].

pub mod http;
pub mod store;

use std::path::PathBuf;
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::canonical::parse_journey;
use crate::error::{AnalysisError, DocumentError, IngestError};
use crate::geo::{condense, journey_length_km, rezone, CondensationConfig};
use crate::ingest::{detect_format, parse_raw, CaptureHint, RawCapture};
use crate::model::{BoundingBox, DeviceKind, Journey, JourneyMetadata, Violation, Zone};
use crate::occupancy::{
    heatmap, occupation_curve, occupation_report, ChannelPlan, ChannelSelection, HeatmapGrid,
    OccupationReport,
};
use store::{content_id, JourneyStore, StoreError, StoredJourney, StoredMeta};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionConfig {
    pub region_id: String,
    pub name: String,
    pub bounding_box: BoundingBox,
    pub default_plan: ChannelPlan,
}

impl RegionConfig {
    pub fn new(
        region_id: impl Into<String>,
        name: impl Into<String>,
        bounding_box: BoundingBox,
        default_plan: ChannelPlan,
    ) -> Result<Self, RepositoryError> {
        if !bounding_box.is_well_ordered() {
            return Err(RepositoryError::InvalidRequest(
                "region bounding box is not well ordered".into(),
            ));
        }
        Ok(RegionConfig {
            region_id: region_id.into(),
            name: name.into(),
            bounding_box,
            default_plan,
        })
    }
}

impl Default for RegionConfig {
    fn default() -> Self {
        RegionConfig {
            region_id: "default".into(),
            name: "Default region".into(),
            bounding_box: BoundingBox::world(),
            default_plan: ChannelPlan::uhf_default(),
        }
    }
}

#[derive(Debug, Error)]
pub enum RepositoryError {
    #[error("empty payload")]
    EmptyPayload,
    #[error("journey failed validation with {} violation(s)", .0.len())]
    Validation(Vec<Violation>),
    #[error("format error: {0}")]
    Format(String),
    #[error("unknown journey id {0}")]
    UnknownId(String),
    #[error("malformed filter: {0}")]
    MalformedFilter(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Storage(#[from] StoreError),
}

impl From<DocumentError> for RepositoryError {
    fn from(e: DocumentError) -> Self {
        match e {
            DocumentError::Invalid(v) => RepositoryError::Validation(v),
            other => RepositoryError::Format(other.to_string()),
        }
    }
}

impl From<IngestError> for RepositoryError {
    fn from(e: IngestError) -> Self {
        match e {
            IngestError::Invalid(v) => RepositoryError::Validation(v),
            IngestError::EmptyPayload => RepositoryError::EmptyPayload,
            other => RepositoryError::Format(other.to_string()),
        }
    }
}

/// What an uploader sends.
#[derive(Debug, Clone, PartialEq)]
pub struct Upload {
    pub payload: Vec<u8>,
    /// Raw device format; `None` means canonical unless the payload carries
    /// a raw header signature.
    pub device_kind: Option<DeviceKind>,
    pub hint: CaptureHint,
    pub uploader_token: String,
}

impl Upload {
    pub fn canonical(payload: impl Into<Vec<u8>>, token: impl Into<String>) -> Self {
        Upload {
            payload: payload.into(),
            device_kind: None,
            hint: CaptureHint::default(),
            uploader_token: token.into(),
        }
    }

    pub fn raw(kind: DeviceKind, payload: impl Into<Vec<u8>>, token: impl Into<String>) -> Self {
        Upload {
            device_kind: Some(kind),
            ..Upload::canonical(payload, token)
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct JourneyFilter {
    pub bbox: Option<BoundingBox>,
    pub country: Option<String>,
    pub city: Option<String>,
    /// Inclusive range on the collection date.
    pub from: Option<NaiveDate>,
    pub to: Option<NaiveDate>,
    pub device: Option<DeviceKind>,
}

impl JourneyFilter {
    /// Builds a filter from query parameters: `bbox=min_lat,min_lon,max_lat,max_lon`,
    /// `country`, `city`, `from`/`to` as `YYYY-MM-DD`, `device`.
    pub fn from_params<'a>(
        params: impl IntoIterator<Item = (&'a str, &'a str)>,
    ) -> Result<Self, RepositoryError> {
        let bad = |m: String| RepositoryError::MalformedFilter(m);
        let date = |key: &str, v: &str| {
            NaiveDate::parse_from_str(v, "%Y-%m-%d")
                .map_err(|_| bad(format!("{key}={v:?} is not a YYYY-MM-DD date")))
        };
        let mut f = JourneyFilter::default();
        for (key, value) in params {
            if value.is_empty() {
                continue;
            }
            match key {
                "bbox" => {
                    let c = value
                        .split(',')
                        .map(|x| x.trim().parse::<f64>())
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(|_| bad(format!("bbox={value:?} is not numeric")))?;
                    if c.len() != 4 {
                        return Err(bad("bbox needs min_lat,min_lon,max_lat,max_lon".into()));
                    }
                    f.bbox = Some(
                        BoundingBox::new(c[0], c[1], c[2], c[3]).map_err(|e| bad(e.to_string()))?,
                    );
                }
                "country" => f.country = Some(value.to_string()),
                "city" => f.city = Some(value.to_string()),
                "from" => f.from = Some(date(key, value)?),
                "to" => f.to = Some(date(key, value)?),
                "device" => {
                    f.device = Some(value.parse().map_err(|e: crate::error::ModelError| bad(e.to_string()))?)
                }
                other => return Err(bad(format!("unknown filter key {other:?}"))),
            }
        }
        if let (Some(a), Some(b)) = (f.from, f.to) {
            if a > b {
                return Err(bad("from is after to".into()));
            }
        }
        Ok(f)
    }

    pub fn matches(&self, j: &Journey) -> bool {
        let m = &j.metadata;
        self.country.as_ref().is_none_or(|c| *c == m.country)
            && self.city.as_ref().is_none_or(|c| *c == m.city)
            && self.from.is_none_or(|d| m.collected_utc >= d)
            && self.to.is_none_or(|d| m.collected_utc <= d)
            && self.device.is_none_or(|k| k == j.device.kind)
            && self
                .bbox
                .is_none_or(|b| j.sweeps.iter().any(|s| b.contains(s.location)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JourneySummary {
    pub id: String,
    pub metadata: JourneyMetadata,
    pub device: DeviceKind,
    pub sweep_count: usize,
    pub length_km: f64,
    pub uploaded_utc: f64,
    pub derived_from: Option<String>,
}

impl From<&StoredJourney> for JourneySummary {
    fn from(e: &StoredJourney) -> Self {
        JourneySummary {
            id: e.meta.id.clone(),
            metadata: e.journey.metadata.clone(),
            device: e.journey.device.kind,
            sweep_count: e.journey.sweeps.len(),
            length_km: journey_length_km(&e.journey),
            uploaded_utc: e.meta.uploaded_utc,
            derived_from: e.meta.derived_from.clone(),
        }
    }
}

/// Geo-core operation applied by [`Repository::derive`].
#[derive(Debug, Clone, PartialEq)]
pub enum Derivation {
    Condense(CondensationConfig),
    Rezone(Zone),
}

impl Derivation {
    /// Stable text form, part of the child's id.
    fn key(&self) -> String {
        match self {
            Derivation::Condense(c) => format!("condense:{}:{}", c.radius_m(), c.aggregation()),
            Derivation::Rezone(z) => {
                let mut s = format!("rezone:{}", z.label());
                for v in z.vertices() {
                    s.push_str(&format!(":{},{}", v.lat, v.lon));
                }
                s
            }
        }
    }

    pub fn apply(&self, j: &Journey) -> Journey {
        match self {
            Derivation::Condense(cfg) => condense(j, cfg),
            Derivation::Rezone(zone) => rezone(j, zone),
        }
    }
}

/// Optional overrides of the region's default plan.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PlanParams {
    pub start_hz: Option<u64>,
    pub stop_hz: Option<u64>,
    pub width_hz: Option<u64>,
}

pub struct Repository {
    region: RegionConfig,
    store: JourneyStore,
    clock: Box<dyn Fn() -> f64 + Send + Sync>,
}

fn system_clock() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

impl Repository {
    pub fn open(region: RegionConfig, root: impl Into<PathBuf>) -> Result<Self, RepositoryError> {
        Ok(Repository {
            region,
            store: JourneyStore::open(root)?,
            clock: Box::new(system_clock),
        })
    }

    /// Replaces the upload timestamp source.
    pub fn with_clock(mut self, clock: impl Fn() -> f64 + Send + Sync + 'static) -> Self {
        self.clock = Box::new(clock);
        self
    }

    pub fn region(&self) -> &RegionConfig {
        &self.region
    }

    pub fn store(&self) -> &JourneyStore {
        &self.store
    }

    /// Parses the payload; the flag tells whether it came through a device adapter.
    fn convert(&self, upload: &Upload) -> Result<(Journey, bool), RepositoryError> {
        if upload.payload.is_empty() {
            return Err(RepositoryError::EmptyPayload);
        }
        let kind = match upload.device_kind {
            Some(DeviceKind::Generic) | None => detect_format(&upload.payload),
            Some(kind) => Some(kind),
        };
        match kind {
            Some(kind) => {
                let capture = RawCapture::new(kind, upload.payload.clone()).with_hint(upload.hint);
                Ok((parse_raw(&capture)?, true))
            }
            None => {
                let text = std::str::from_utf8(&upload.payload)
                    .map_err(|e| RepositoryError::Format(format!("payload is not UTF-8: {e}")))?;
                Ok((parse_journey(text)?, false))
            }
        }
    }

    /// Converts, validates and stores an upload. A byte-identical payload from
    /// the same token maps to the same id.
    ///
    /// Canonical documents are stored as parsed, keeping their own `id` field;
    /// journeys converted from raw captures take the repository id.
    pub fn upload(&self, upload: &Upload) -> Result<(String, bool), RepositoryError> {
        let (mut journey, from_raw) = self.convert(upload)?;
        let id = content_id(&[b"upload", upload.uploader_token.as_bytes(), &upload.payload]);
        if let Some(existing) = self.store.get(&id) {
            return Ok((existing.meta.id.clone(), false));
        }
        if from_raw {
            journey.id = id.clone();
        }
        let meta = StoredMeta {
            id,
            uploaded_utc: (self.clock)(),
            uploader_token: upload.uploader_token.clone(),
            derived_from: None,
        };
        let (entry, created) = self.store.insert(meta, journey)?;
        Ok((entry.meta.id.clone(), created))
    }

    pub fn get(&self, id: &str) -> Result<Arc<StoredJourney>, RepositoryError> {
        self.store
            .get(id)
            .ok_or_else(|| RepositoryError::UnknownId(id.to_string()))
    }

    pub fn query(&self, filter: &JourneyFilter) -> Vec<JourneySummary> {
        self.store
            .list()
            .iter()
            .filter(|e| filter.matches(&e.journey))
            .map(|e| JourneySummary::from(e.as_ref()))
            .collect()
    }

    /// Applies `op` to journey `id` and stores the result as a new child.
    /// Repeating the same derivation returns the same child.
    pub fn derive(&self, id: &str, op: &Derivation) -> Result<String, RepositoryError> {
        let parent = self.get(id)?;
        let child_id = content_id(&[b"derive", id.as_bytes(), op.key().as_bytes()]);
        if self.store.contains(&child_id) {
            return Ok(child_id);
        }
        let mut child = op.apply(&parent.journey);
        child.id = child_id.clone();
        let meta = StoredMeta {
            id: child_id,
            uploaded_utc: (self.clock)(),
            uploader_token: parent.meta.uploader_token.clone(),
            derived_from: Some(id.to_string()),
        };
        let (entry, _) = self.store.insert(meta, child)?;
        Ok(entry.meta.id.clone())
    }

    /// Chain of ancestors, nearest first.
    pub fn lineage(&self, id: &str) -> Result<Vec<String>, RepositoryError> {
        let mut out = Vec::new();
        let mut cursor = self.get(id)?.meta.derived_from.clone();
        while let Some(parent) = cursor {
            if out.contains(&parent) || parent == id {
                return Err(RepositoryError::InvalidRequest(format!(
                    "derivation cycle through {parent}"
                )));
            }
            cursor = self.get(&parent)?.meta.derived_from.clone();
            out.push(parent);
        }
        Ok(out)
    }

    pub fn plan(&self, params: PlanParams) -> Result<ChannelPlan, RepositoryError> {
        let d = &self.region.default_plan;
        if params == PlanParams::default() {
            return Ok(d.clone());
        }
        Ok(ChannelPlan::new(
            params.start_hz.unwrap_or(d.band_start_hz),
            params.stop_hz.unwrap_or(d.band_stop_hz),
            params.width_hz.unwrap_or(d.channel_width_hz),
        )?)
    }

    pub fn occupation(
        &self,
        id: &str,
        plan: PlanParams,
        threshold_dbm: Option<f64>,
    ) -> Result<OccupationReport, RepositoryError> {
        let entry = self.get(id)?;
        let plan = self.plan(plan)?;
        Ok(occupation_report(&entry.journey, &plan, threshold_dbm)?)
    }

    pub fn occupation_curve(
        &self,
        id: &str,
        plan: PlanParams,
        thresholds: &[f64],
    ) -> Result<Vec<OccupationReport>, RepositoryError> {
        let entry = self.get(id)?;
        let plan = self.plan(plan)?;
        Ok(occupation_curve(&entry.journey, &plan, thresholds)?)
    }

    pub fn heatmap(
        &self,
        id: &str,
        plan: PlanParams,
        selection: ChannelSelection,
        cell_size_m: f64,
    ) -> Result<HeatmapGrid, RepositoryError> {
        let entry = self.get(id)?;
        let plan = self.plan(plan)?;
        Ok(heatmap(&entry.journey, &plan, selection, cell_size_m)?)
    }
}
