//! Distances, condensation of collection points and polygon rezoning.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::GeoError;
use crate::model::{round_dbm, GeoPoint, Journey, PowerSweep, Zone};

/// Mean Earth radius, in meters.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// Great-circle distance on a sphere of radius [`EARTH_RADIUS_M`].
pub fn haversine_m(a: GeoPoint, b: GeoPoint) -> f64 {
    let (phi1, phi2) = (a.lat.to_radians(), b.lat.to_radians());
    let dphi = phi2 - phi1;
    let dlambda = (b.lon - a.lon).to_radians();
    let h = (dphi / 2.0).sin().powi(2) + phi1.cos() * phi2.cos() * (dlambda / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_M * h.sqrt().min(1.0).asin()
}

/// Sum of hops between consecutive sweeps, in kilometers.
pub fn journey_length_km(j: &Journey) -> f64 {
    j.sweeps
        .windows(2)
        .map(|w| haversine_m(w[0].location, w[1].location))
        .sum::<f64>()
        / 1000.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    Max,
    Min,
    Mean,
}

impl Aggregation {
    pub fn as_str(&self) -> &'static str {
        match self {
            Aggregation::Max => "max",
            Aggregation::Min => "min",
            Aggregation::Mean => "mean",
        }
    }
}

impl fmt::Display for Aggregation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Aggregation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "max" => Ok(Aggregation::Max),
            "min" => Ok(Aggregation::Min),
            "mean" => Ok(Aggregation::Mean),
            other => Err(format!("unknown aggregation {other:?} (max, min, mean)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CondensationConfig {
    radius_m: f64,
    aggregation: Aggregation,
}

impl CondensationConfig {
    pub fn new(radius_m: f64, aggregation: Aggregation) -> Result<Self, GeoError> {
        if radius_m.is_finite() && radius_m > 0.0 {
            Ok(CondensationConfig {
                radius_m,
                aggregation,
            })
        } else {
            Err(GeoError::InvalidRadius(radius_m))
        }
    }

    pub fn radius_m(&self) -> f64 {
        self.radius_m
    }

    pub fn aggregation(&self) -> Aggregation {
        self.aggregation
    }
}

/// Which reference each input sweep was folded into.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Condensation {
    /// Input index of the sweep that founded each reference, in creation order.
    pub references: Vec<usize>,
    /// For every input sweep, the position in `references` it was assigned to.
    pub assignment: Vec<usize>,
}

impl Condensation {
    /// Input indices grouped per reference.
    pub fn buckets(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.references.len()];
        for (sweep, &r) in self.assignment.iter().enumerate() {
            out[r].push(sweep);
        }
        out
    }
}

// Meridional lower bound on great-circle distance, in degrees of latitude per
// meter, padded so float error never hides a candidate.
const LAT_DEG_PER_M: f64 = 180.0 / (std::f64::consts::PI * EARTH_RADIUS_M);
const LAT_WINDOW_PAD: f64 = 1.0 + 1e-9;

/// Greedy first-fit covering in sweep order.
///
/// A sweep farther than `radius_m` from every existing reference founds a new
/// one; otherwise it joins the earliest reference within `radius_m`.
pub fn assign_references(sweeps: &[PowerSweep], radius_m: f64) -> Condensation {
    let window = radius_m * LAT_DEG_PER_M * LAT_WINDOW_PAD + 1e-12;
    let mut references: Vec<usize> = Vec::new();
    // (lat, reference position), sorted by lat
    let mut by_lat: Vec<(f64, usize)> = Vec::new();
    let mut assignment = Vec::with_capacity(sweeps.len());

    for (i, sweep) in sweeps.iter().enumerate() {
        let here = sweep.location;
        let lo = by_lat.partition_point(|(lat, _)| *lat < here.lat - window);
        let hi = by_lat.partition_point(|(lat, _)| *lat <= here.lat + window);
        let earliest = by_lat[lo..hi]
            .iter()
            .filter(|(_, r)| haversine_m(sweeps[references[*r]].location, here) <= radius_m)
            .map(|(_, r)| *r)
            .min();
        match earliest {
            Some(r) => assignment.push(r),
            None => {
                let r = references.len();
                references.push(i);
                let at = by_lat.partition_point(|(lat, _)| *lat <= here.lat);
                by_lat.insert(at, (here.lat, r));
                assignment.push(r);
            }
        }
    }
    Condensation {
        references,
        assignment,
    }
}

/// Collapses each reference circle into a single sweep located at the
/// reference, timestamped with the earliest member and carrying the per-bin
/// aggregate of its members.
pub fn condense(j: &Journey, cfg: &CondensationConfig) -> Journey {
    let plan = assign_references(&j.sweeps, cfg.radius_m);
    let sweeps = plan
        .buckets()
        .into_iter()
        .zip(&plan.references)
        .map(|(members, &reference)| {
            let timestamp = members
                .iter()
                .map(|&m| j.sweeps[m].timestamp)
                .fold(f64::INFINITY, f64::min);
            let powers = aggregate(j, &members, cfg.aggregation);
            PowerSweep::new(timestamp, j.sweeps[reference].location, powers)
        })
        .collect();
    j.with_sweeps(sweeps)
}

fn aggregate(j: &Journey, members: &[usize], how: Aggregation) -> Vec<f64> {
    let bins = j.sweeps[members[0]].powers.len();
    (0..bins)
        .map(|b| {
            let values = members.iter().map(|&m| j.sweeps[m].powers[b]);
            match how {
                Aggregation::Max => values.fold(f64::NEG_INFINITY, f64::max),
                Aggregation::Min => values.fold(f64::INFINITY, f64::min),
                Aggregation::Mean => round_dbm(values.sum::<f64>() / members.len() as f64),
            }
        })
        .collect()
}

/// Keeps the sweeps inside `zone` (boundary inclusive) and tags the notes
/// with the zone label.
pub fn rezone(j: &Journey, zone: &Zone) -> Journey {
    let sweeps = j
        .sweeps
        .iter()
        .filter(|s| zone.contains(s.location))
        .cloned()
        .collect();
    let mut out = j.with_sweeps(sweeps);
    let tag = format!("zone:{}", zone.label());
    out.metadata.notes = if out.metadata.notes.is_empty() {
        tag
    } else {
        format!("{}; {}", out.metadata.notes, tag)
    };
    out
}

/// Statistics of the distances between consecutive sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpacingStats {
    pub mean_m: f64,
    /// Population variance.
    pub variance_m2: f64,
    pub min_m: f64,
    pub max_m: f64,
}

pub fn spacing_stats(j: &Journey) -> Result<SpacingStats, GeoError> {
    if j.sweeps.len() < 2 {
        return Err(GeoError::TooFewSweeps(j.sweeps.len()));
    }
    let gaps: Vec<f64> = j
        .sweeps
        .windows(2)
        .map(|w| haversine_m(w[0].location, w[1].location))
        .collect();
    let n = gaps.len() as f64;
    let mean_m = gaps.iter().sum::<f64>() / n;
    let variance_m2 = gaps.iter().map(|g| (g - mean_m).powi(2)).sum::<f64>() / n;
    Ok(SpacingStats {
        mean_m,
        variance_m2,
        min_m: gaps.iter().copied().fold(f64::INFINITY, f64::min),
        max_m: gaps.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    })
}
