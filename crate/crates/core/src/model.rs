//! Canonical domain types shared by every stage of the pipeline.
//!
//! A [`Journey`] is the unit of upload, editing and analysis: an ordered run
//! of geo-tagged [`PowerSweep`]s captured by one device over one band.
//! Values are plain data; [`Journey::validate`] reports every invariant
//! breach as a [`Violation`] instead of failing on the first one.

use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// Lowest plausible reading, in dBm.
pub const MIN_POWER_DBM: f64 = -150.0;
/// Highest plausible reading, in dBm.
pub const MAX_POWER_DBM: f64 = 30.0;

/// Latitude/longitude pair in decimal degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub lat: f64,
    pub lon: f64,
}

impl GeoPoint {
    pub const fn new(lat: f64, lon: f64) -> Self {
        GeoPoint { lat, lon }
    }

    pub fn lat_in_range(&self) -> bool {
        self.lat.is_finite() && (-90.0..=90.0).contains(&self.lat)
    }

    pub fn lon_in_range(&self) -> bool {
        self.lon.is_finite() && (-180.0..=180.0).contains(&self.lon)
    }

    pub fn is_valid(&self) -> bool {
        self.lat_in_range() && self.lon_in_range()
    }
}

/// One timestamped, geo-tagged power spectrum capture.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSweep {
    /// UTC seconds since the Unix epoch.
    pub timestamp: f64,
    pub location: GeoPoint,
    /// dBm, one value per frequency bin.
    pub powers: Vec<f64>,
}

impl PowerSweep {
    pub fn new(timestamp: f64, location: GeoPoint, powers: Vec<f64>) -> Self {
        PowerSweep {
            timestamp,
            location,
            powers,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DeviceKind {
    #[serde(rename = "rfexplorer")]
    RfExplorer,
    #[serde(rename = "ascii32")]
    Ascii32,
    #[serde(rename = "whisppi")]
    WhispPi,
    #[serde(rename = "android-rfe")]
    AndroidRfe,
    #[serde(rename = "generic")]
    Generic,
}

impl DeviceKind {
    pub const ALL: [DeviceKind; 5] = [
        DeviceKind::RfExplorer,
        DeviceKind::Ascii32,
        DeviceKind::WhispPi,
        DeviceKind::AndroidRfe,
        DeviceKind::Generic,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            DeviceKind::RfExplorer => "rfexplorer",
            DeviceKind::Ascii32 => "ascii32",
            DeviceKind::WhispPi => "whisppi",
            DeviceKind::AndroidRfe => "android-rfe",
            DeviceKind::Generic => "generic",
        }
    }
}

impl fmt::Display for DeviceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DeviceKind {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DeviceKind::ALL
            .iter()
            .copied()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| ModelError::UnknownDeviceKind(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviceProfile {
    pub kind: DeviceKind,
    pub label: String,
    pub sample_period_s: Option<f64>,
}

impl DeviceProfile {
    pub fn new(kind: DeviceKind) -> Self {
        DeviceProfile {
            kind,
            label: String::new(),
            sample_period_s: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JourneyMetadata {
    pub country: String,
    pub city: String,
    pub notes: String,
    pub collected_utc: NaiveDate,
}

impl Default for JourneyMetadata {
    fn default() -> Self {
        JourneyMetadata {
            country: String::new(),
            city: String::new(),
            notes: String::new(),
            collected_utc: NaiveDate::from_ymd_opt(1970, 1, 1).expect("epoch date"),
        }
    }
}

/// Axis-aligned latitude/longitude box, edges inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub min_lat: f64,
    pub min_lon: f64,
    pub max_lat: f64,
    pub max_lon: f64,
}

impl BoundingBox {
    /// Fails unless both axes are well ordered and inside coordinate range.
    pub fn new(min_lat: f64, min_lon: f64, max_lat: f64, max_lon: f64) -> Result<Self, ModelError> {
        let b = BoundingBox {
            min_lat,
            min_lon,
            max_lat,
            max_lon,
        };
        if b.is_well_ordered() {
            Ok(b)
        } else {
            Err(ModelError::InvalidBoundingBox(format!(
                "[{min_lat}, {min_lon}] .. [{max_lat}, {max_lon}]"
            )))
        }
    }

    pub fn world() -> Self {
        BoundingBox {
            min_lat: -90.0,
            min_lon: -180.0,
            max_lat: 90.0,
            max_lon: 180.0,
        }
    }

    pub fn is_well_ordered(&self) -> bool {
        GeoPoint::new(self.min_lat, self.min_lon).is_valid()
            && GeoPoint::new(self.max_lat, self.max_lon).is_valid()
            && self.min_lat < self.max_lat
            && self.min_lon < self.max_lon
    }

    pub fn contains(&self, p: GeoPoint) -> bool {
        p.lat >= self.min_lat && p.lat <= self.max_lat && p.lon >= self.min_lon && p.lon <= self.max_lon
    }
}

/// Frequency span covered by a journey's bins, in Hz.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Band {
    pub start_hz: u64,
    pub stop_hz: u64,
}

impl Band {
    pub const fn new(start_hz: u64, stop_hz: u64) -> Self {
        Band { start_hz, stop_hz }
    }

    pub fn span_hz(&self) -> u64 {
        self.stop_hz.saturating_sub(self.start_hz)
    }
}

/// An ordered collection of sweeps plus device and region metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Journey {
    pub id: String,
    pub metadata: JourneyMetadata,
    pub device: DeviceProfile,
    pub band: Band,
    pub bin_count: usize,
    pub sweeps: Vec<PowerSweep>,
}

/// Machine-readable reason a journey fails validation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationCode {
    BandOrder,
    ZeroBinCount,
    SamplePeriodNotPositive,
    TimestampNotFinite,
    NonMonotonicTimestamp,
    LatitudeOutOfRange,
    LongitudeOutOfRange,
    EmptyPowers,
    BinCountMismatch,
    PowerOutOfRange,
}

/// Where a violation was found.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "scope")]
pub enum ViolationSite {
    Journey,
    Sweep { sweep: usize },
    Power { sweep: usize, bin: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub code: ViolationCode,
    pub site: ViolationSite,
    pub detail: String,
}

impl Violation {
    fn journey(code: ViolationCode, detail: String) -> Self {
        Violation {
            code,
            site: ViolationSite::Journey,
            detail,
        }
    }

    fn sweep(code: ViolationCode, sweep: usize, detail: String) -> Self {
        Violation {
            code,
            site: ViolationSite::Sweep { sweep },
            detail,
        }
    }

    /// Index of the offending sweep, if the violation is sweep-local.
    pub fn sweep_index(&self) -> Option<usize> {
        match self.site {
            ViolationSite::Journey => None,
            ViolationSite::Sweep { sweep } | ViolationSite::Power { sweep, .. } => Some(sweep),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.site {
            ViolationSite::Journey => write!(f, "{:?}: {}", self.code, self.detail),
            ViolationSite::Sweep { sweep } => {
                write!(f, "{:?} at sweep {}: {}", self.code, sweep, self.detail)
            }
            ViolationSite::Power { sweep, bin } => write!(
                f,
                "{:?} at sweep {} bin {}: {}",
                self.code, sweep, bin, self.detail
            ),
        }
    }
}

impl Journey {
    /// Empty journey over `band` with `bin_count` bins.
    pub fn new(id: impl Into<String>, device: DeviceProfile, band: Band, bin_count: usize) -> Self {
        Journey {
            id: id.into(),
            metadata: JourneyMetadata::default(),
            device,
            band,
            bin_count,
            sweeps: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.sweeps.is_empty()
    }

    pub fn len(&self) -> usize {
        self.sweeps.len()
    }

    /// Same journey header with a different sweep list.
    pub fn with_sweeps(&self, sweeps: Vec<PowerSweep>) -> Journey {
        Journey {
            id: self.id.clone(),
            metadata: self.metadata.clone(),
            device: self.device.clone(),
            band: self.band,
            bin_count: self.bin_count,
            sweeps,
        }
    }

    /// Every invariant breach, in document order. Empty iff valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.band.start_hz >= self.band.stop_hz {
            out.push(Violation::journey(
                ViolationCode::BandOrder,
                format!(
                    "band start {} Hz is not below stop {} Hz",
                    self.band.start_hz, self.band.stop_hz
                ),
            ));
        }
        if self.bin_count == 0 {
            out.push(Violation::journey(
                ViolationCode::ZeroBinCount,
                "bin_count must be positive".to_string(),
            ));
        }
        if let Some(p) = self.device.sample_period_s {
            if !(p.is_finite() && p > 0.0) {
                out.push(Violation::journey(
                    ViolationCode::SamplePeriodNotPositive,
                    format!("sample period {p} s is not a positive number"),
                ));
            }
        }

        let mut previous: Option<f64> = None;
        for (i, sweep) in self.sweeps.iter().enumerate() {
            if !sweep.timestamp.is_finite() {
                out.push(Violation::sweep(
                    ViolationCode::TimestampNotFinite,
                    i,
                    "timestamp is not finite".to_string(),
                ));
            } else {
                if let Some(prev) = previous {
                    if sweep.timestamp < prev {
                        out.push(Violation::sweep(
                            ViolationCode::NonMonotonicTimestamp,
                            i,
                            format!("timestamp {} precedes {}", sweep.timestamp, prev),
                        ));
                    }
                }
                previous = Some(sweep.timestamp);
            }
            if !sweep.location.lat_in_range() {
                out.push(Violation::sweep(
                    ViolationCode::LatitudeOutOfRange,
                    i,
                    format!("latitude {} outside [-90, 90]", sweep.location.lat),
                ));
            }
            if !sweep.location.lon_in_range() {
                out.push(Violation::sweep(
                    ViolationCode::LongitudeOutOfRange,
                    i,
                    format!("longitude {} outside [-180, 180]", sweep.location.lon),
                ));
            }
            if sweep.powers.is_empty() {
                out.push(Violation::sweep(
                    ViolationCode::EmptyPowers,
                    i,
                    "sweep has no power values".to_string(),
                ));
            } else if sweep.powers.len() != self.bin_count {
                out.push(Violation::sweep(
                    ViolationCode::BinCountMismatch,
                    i,
                    format!(
                        "{} powers but bin_count is {}",
                        sweep.powers.len(),
                        self.bin_count
                    ),
                ));
            }
            for (bin, &p) in sweep.powers.iter().enumerate() {
                if !(p.is_finite() && (MIN_POWER_DBM..=MAX_POWER_DBM).contains(&p)) {
                    out.push(Violation {
                        code: ViolationCode::PowerOutOfRange,
                        site: ViolationSite::Power { sweep: i, bin },
                        detail: format!("{p} dBm outside [{MIN_POWER_DBM}, {MAX_POWER_DBM}]"),
                    });
                }
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }
}

/// Free-standing form of [`Journey::validate`].
pub fn validate_journey(candidate: &Journey) -> Vec<Violation> {
    candidate.validate()
}

/// Rounds a dBm reading to the stored one-decimal precision, half away from zero.
pub fn round_dbm(value: f64) -> f64 {
    tenths(value) as f64 / 10.0
}

/// `value` in integer tenths, rounded half away from zero.
pub(crate) fn tenths(value: f64) -> i64 {
    (value * 10.0).round() as i64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZoneLabel {
    Urban,
    Rural,
    Suburban,
    Custom,
}

impl ZoneLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            ZoneLabel::Urban => "urban",
            ZoneLabel::Rural => "rural",
            ZoneLabel::Suburban => "suburban",
            ZoneLabel::Custom => "custom",
        }
    }
}

impl fmt::Display for ZoneLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ZoneLabel {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "urban" => Ok(ZoneLabel::Urban),
            "rural" => Ok(ZoneLabel::Rural),
            "suburban" => Ok(ZoneLabel::Suburban),
            "custom" => Ok(ZoneLabel::Custom),
            other => Err(ModelError::UnknownZoneLabel(other.to_string())),
        }
    }
}

/// A simple polygon, implicitly closed, used to cut a journey down to an area.
#[derive(Debug, Clone, PartialEq)]
pub struct Zone {
    label: ZoneLabel,
    vertices: Vec<GeoPoint>,
}

impl Zone {
    pub fn new(label: ZoneLabel, vertices: Vec<GeoPoint>) -> Result<Self, ModelError> {
        if vertices.len() < 3 {
            return Err(ModelError::InvalidZone(format!(
                "a zone needs at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        if let Some(v) = vertices.iter().find(|v| !v.is_valid()) {
            return Err(ModelError::InvalidZone(format!(
                "vertex ({}, {}) is not a valid coordinate",
                v.lat, v.lon
            )));
        }
        let n = vertices.len();
        for i in 0..n {
            if vertices[i] == vertices[(i + 1) % n] {
                return Err(ModelError::InvalidZone(format!(
                    "vertices {} and {} coincide",
                    i,
                    (i + 1) % n
                )));
            }
        }
        if let Some((a, b)) = first_edge_crossing(&vertices) {
            return Err(ModelError::InvalidZone(format!(
                "edges {a} and {b} intersect"
            )));
        }
        Ok(Zone { label, vertices })
    }

    pub fn label(&self) -> ZoneLabel {
        self.label
    }

    pub fn vertices(&self) -> &[GeoPoint] {
        &self.vertices
    }

    /// Even-odd membership with boundary points counted as inside.
    /// Coordinates are treated as planar (x = lon, y = lat).
    pub fn contains(&self, p: GeoPoint) -> bool {
        let n = self.vertices.len();
        let mut inside = false;
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            if on_segment(a, b, p) {
                return true;
            }
            if (a.lat > p.lat) != (b.lat > p.lat) {
                let x = a.lon + (p.lat - a.lat) * (b.lon - a.lon) / (b.lat - a.lat);
                if p.lon < x {
                    inside = !inside;
                }
            }
        }
        inside
    }
}

fn cross(o: GeoPoint, a: GeoPoint, b: GeoPoint) -> f64 {
    (a.lon - o.lon) * (b.lat - o.lat) - (a.lat - o.lat) * (b.lon - o.lon)
}

fn within_box(a: GeoPoint, b: GeoPoint, p: GeoPoint) -> bool {
    p.lon >= a.lon.min(b.lon)
        && p.lon <= a.lon.max(b.lon)
        && p.lat >= a.lat.min(b.lat)
        && p.lat <= a.lat.max(b.lat)
}

pub(crate) fn on_segment(a: GeoPoint, b: GeoPoint, p: GeoPoint) -> bool {
    cross(a, b, p) == 0.0 && within_box(a, b, p)
}

/// Closed-segment intersection test, collinear overlaps included.
pub(crate) fn segments_intersect(p1: GeoPoint, p2: GeoPoint, q1: GeoPoint, q2: GeoPoint) -> bool {
    let d1 = cross(q1, q2, p1);
    let d2 = cross(q1, q2, p2);
    let d3 = cross(p1, p2, q1);
    let d4 = cross(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && within_box(q1, q2, p1))
        || (d2 == 0.0 && within_box(q1, q2, p2))
        || (d3 == 0.0 && within_box(p1, p2, q1))
        || (d4 == 0.0 && within_box(p1, p2, q2))
}

/// First pair of edges that touch other than at a shared endpoint.
fn first_edge_crossing(v: &[GeoPoint]) -> Option<(usize, usize)> {
    let n = v.len();
    for i in 0..n {
        let (a1, a2) = (v[i], v[(i + 1) % n]);
        for j in (i + 1)..n {
            let (b1, b2) = (v[j], v[(j + 1) % n]);
            let adjacent_after = j == i + 1;
            let adjacent_wrap = i == 0 && j == n - 1;
            if adjacent_after || adjacent_wrap {
                // Neighbours share one endpoint; they only conflict if they
                // fold back over each other.
                let (shared, other_a, other_b) = if adjacent_after {
                    (a2, a1, b2)
                } else {
                    (a1, a2, b1)
                };
                let folds = cross(shared, other_a, other_b) == 0.0
                    && ((other_a.lon - shared.lon) * (other_b.lon - shared.lon)
                        + (other_a.lat - shared.lat) * (other_b.lat - shared.lat))
                        > 0.0;
                if folds {
                    return Some((i, j));
                }
                continue;
            }
            if segments_intersect(a1, a2, b1, b2) {
                return Some((i, j));
            }
        }
    }
    None
}
