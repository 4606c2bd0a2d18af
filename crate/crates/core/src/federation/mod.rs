//! Two-tier governance exchange.
//!
//! A regional repository pools its journeys into a [`RegionSummary`]: a grid
//! of per-channel occupation fractions computed at the pooled automatic
//! threshold. The regulator tier checks a summary against its incumbent
//! registry ([`validate_summary`]) and neighbouring regions can be compared
//! for cross-border conflicts ([`detect_overlap`]).

pub mod client;
pub mod regulator;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::error::AnalysisError;
use crate::model::{BoundingBox, GeoPoint, Journey};
use crate::occupancy::{CellExtent, ChannelMatrix, ChannelPlan, GridFrame, WHITESPACE_CUT};

pub use client::{push_summary, PushError};
pub use regulator::Regulator;

/// Occupation at or above this fraction marks a cell/channel as busy.
pub const BUSY_CUT: f64 = WHITESPACE_CUT;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FederationError {
    #[error("no non-empty journey to summarize")]
    EmptyInput,
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("plan mismatch: {0}")]
    PlanMismatch(String),
    #[error("malformed summary: {0}")]
    Malformed(String),
    #[error("registry line {line}: {reason}")]
    Registry { line: usize, reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryCell {
    pub row: i64,
    pub col: i64,
    /// One fraction per plan channel.
    pub occupation: Vec<f64>,
    pub sample_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionSummary {
    pub region_id: String,
    /// Unix seconds.
    pub generated_utc: i64,
    pub plan: ChannelPlan,
    pub cell_size_m: f64,
    /// Grid placement, needed to compare cells of different regions.
    pub frame: GridFrame,
    /// Pooled automatic threshold the occupations were computed at.
    pub threshold_dbm: f64,
    /// Sorted by `(row, col)`.
    pub cells: Vec<SummaryCell>,
    pub journey_count: usize,
}

impl RegionSummary {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("summary serializes")
    }

    /// Reads a summary and checks its invariants.
    pub fn from_json(text: &str) -> Result<Self, FederationError> {
        let s: RegionSummary =
            serde_json::from_str(text).map_err(|e| FederationError::Malformed(e.to_string()))?;
        s.check()?;
        Ok(s)
    }

    fn check(&self) -> Result<(), FederationError> {
        let bad = |m: String| Err(FederationError::Malformed(m));
        if !self.plan.is_consistent() {
            return bad("channel plan is not contiguous".into());
        }
        if !(self.cell_size_m.is_finite() && self.cell_size_m > 0.0) {
            return bad(format!("cell size {} is not positive", self.cell_size_m));
        }
        for c in &self.cells {
            if c.sample_count == 0 {
                return bad(format!("cell ({}, {}) has no samples", c.row, c.col));
            }
            if c.occupation.len() != self.plan.len() {
                return bad(format!(
                    "cell ({}, {}) has {} fractions for {} channels",
                    c.row,
                    c.col,
                    c.occupation.len(),
                    self.plan.len()
                ));
            }
            if c.occupation.iter().any(|o| !(0.0..=1.0).contains(o)) {
                return bad(format!("cell ({}, {}) has a fraction outside [0, 1]", c.row, c.col));
            }
        }
        Ok(())
    }

    /// Hex SHA-256 of the serialized summary.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }

    pub fn extent(&self, cell: &SummaryCell) -> CellExtent {
        self.frame.extent(cell.row, cell.col)
    }
}

/// Pools every sweep of `journeys` onto one grid and reports, per cell and
/// channel, the share of the cell's sweeps at or above the pooled
/// automatic threshold.
pub fn summarize_region(
    region_id: &str,
    journeys: &[Journey],
    plan: &ChannelPlan,
    cell_size_m: f64,
    generated_utc: i64,
) -> Result<RegionSummary, FederationError> {
    let used: Vec<&Journey> = journeys.iter().filter(|j| !j.sweeps.is_empty()).collect();
    if used.is_empty() {
        return Err(FederationError::EmptyInput);
    }
    let matrices = used
        .iter()
        .map(|j| ChannelMatrix::build(j, plan))
        .collect::<Result<Vec<_>, _>>()?;
    let threshold_dbm = matrices
        .iter()
        .map(|m| m.channel_floor())
        .fold(vec![f64::INFINITY; plan.len()], |acc, floor| {
            acc.iter().zip(&floor).map(|(a, b)| a.min(*b)).collect()
        })
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);

    let points: Vec<GeoPoint> = used
        .iter()
        .flat_map(|j| j.sweeps.iter().map(|s| s.location))
        .collect();
    let frame = GridFrame::fit(&points, cell_size_m)?;

    let mut counts: BTreeMap<(i64, i64), (usize, Vec<usize>)> = BTreeMap::new();
    for (j, m) in used.iter().zip(&matrices) {
        for (sweep, row) in j.sweeps.iter().zip(m.rows()) {
            let entry = counts
                .entry(frame.cell_of(sweep.location))
                .or_insert_with(|| (0, vec![0; plan.len()]));
            entry.0 += 1;
            for (k, &p) in entry.1.iter_mut().zip(row) {
                if p >= threshold_dbm {
                    *k += 1;
                }
            }
        }
    }
    let cells = counts
        .into_iter()
        .map(|((row, col), (n, busy))| SummaryCell {
            row,
            col,
            occupation: busy.into_iter().map(|k| k as f64 / n as f64).collect(),
            sample_count: n,
        })
        .collect();

    Ok(RegionSummary {
        region_id: region_id.to_string(),
        generated_utc,
        plan: plan.clone(),
        cell_size_m,
        frame,
        threshold_dbm,
        cells,
        journey_count: used.len(),
    })
}

/// A licensed transmitter on one channel over an area.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncumbentRecord {
    pub channel: usize,
    pub area: BoundingBox,
    pub licence_id: String,
}

/// Reads `channel,min_lat,min_lon,max_lat,max_lon,licence_id` lines.
/// Blank lines and `#` comments are skipped.
pub fn parse_registry(text: &str) -> Result<Vec<IncumbentRecord>, FederationError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |reason: String| FederationError::Registry { line: i + 1, reason };
        let f: Vec<&str> = line.splitn(6, ',').map(str::trim).collect();
        if f.len() != 6 {
            return Err(err(format!("expected 6 fields, found {}", f.len())));
        }
        let channel = f[0]
            .parse::<usize>()
            .map_err(|_| err(format!("channel {:?} is not an index", f[0])))?;
        let mut coords = [0.0; 4];
        for (slot, text) in coords.iter_mut().zip(&f[1..5]) {
            *slot = text
                .parse::<f64>()
                .map_err(|_| err(format!("{text:?} is not a coordinate")))?;
        }
        let area = BoundingBox::new(coords[0], coords[1], coords[2], coords[3])
            .map_err(|e| err(e.to_string()))?;
        if f[5].is_empty() {
            return Err(err("empty licence id".into()));
        }
        out.push(IncumbentRecord {
            channel,
            area,
            licence_id: f[5].to_string(),
        });
    }
    Ok(out)
}

pub fn format_registry(records: &[IncumbentRecord]) -> String {
    records
        .iter()
        .map(|r| {
            format!(
                "{},{},{},{},{},{}\n",
                r.channel, r.area.min_lat, r.area.min_lon, r.area.max_lat, r.area.max_lon, r.licence_id
            )
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlagKind {
    /// Busy cell/channel that no incumbent accounts for.
    UnaccountedTransmitter,
    /// Idle cell/channel inside a licensed area.
    CandidateWhitespace,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationFlag {
    pub row: i64,
    pub col: i64,
    pub channel: usize,
    pub kind: FlagKind,
    /// The cell's occupation of `channel`.
    pub evidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub region_id: String,
    pub flags: Vec<ValidationFlag>,
}

impl ValidationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// Flags cell/channel pairs whose observed occupation disagrees with the
/// registry. An incumbent covers a cell when the cell's center lies in
/// its area.
pub fn validate_summary(
    summary: &RegionSummary,
    registry: &[IncumbentRecord],
) -> Result<ValidationReport, FederationError> {
    if let Some(r) = registry.iter().find(|r| r.channel >= summary.plan.len()) {
        return Err(FederationError::PlanMismatch(format!(
            "licence {} names channel {} but the summary plan has {} channels",
            r.licence_id,
            r.channel,
            summary.plan.len()
        )));
    }
    let mut flags = Vec::new();
    for cell in &summary.cells {
        let center = summary.extent(cell).center();
        for (channel, &occ) in cell.occupation.iter().enumerate() {
            let covered = registry
                .iter()
                .any(|r| r.channel == channel && r.area.contains(center));
            let busy = occ >= BUSY_CUT;
            let kind = match (busy, covered) {
                (true, false) => FlagKind::UnaccountedTransmitter,
                (false, true) => FlagKind::CandidateWhitespace,
                _ => continue,
            };
            flags.push(ValidationFlag {
                row: cell.row,
                col: cell.col,
                channel,
                kind,
                evidence: occ,
            });
        }
    }
    Ok(ValidationReport {
        region_id: summary.region_id.clone(),
        flags,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverlapConflict {
    /// Area shared by the two conflicting cells.
    pub extent: CellExtent,
    pub channel: usize,
}

/// Channels busy in both summaries over geographically overlapping cells.
pub fn detect_overlap(
    a: &RegionSummary,
    b: &RegionSummary,
) -> Result<Vec<OverlapConflict>, FederationError> {
    if a.plan != b.plan {
        return Err(FederationError::PlanMismatch("summaries use different channel plans".into()));
    }
    if a.cell_size_m != b.cell_size_m {
        return Err(FederationError::PlanMismatch(format!(
            "cell sizes differ: {} m vs {} m",
            a.cell_size_m, b.cell_size_m
        )));
    }
    let mut out = Vec::new();
    for ca in &a.cells {
        let ea = a.extent(ca);
        for cb in &b.cells {
            let Some(shared) = ea.intersection(&b.extent(cb)) else {
                continue;
            };
            for (channel, (oa, ob)) in ca.occupation.iter().zip(&cb.occupation).enumerate() {
                if *oa >= BUSY_CUT && *ob >= BUSY_CUT {
                    out.push(OverlapConflict {
                        extent: shared,
                        channel,
                    });
                }
            }
        }
    }
    out.sort_by(|x, y| {
        x.channel
            .cmp(&y.channel)
            .then(x.extent.south.total_cmp(&y.extent.south))
            .then(x.extent.west.total_cmp(&y.extent.west))
            .then(x.extent.north.total_cmp(&y.extent.north))
            .then(x.extent.east.total_cmp(&y.extent.east))
    });
    out.dedup();
    Ok(out)
}
