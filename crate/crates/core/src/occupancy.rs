//! Channel occupation and white-space assessment.
//!
//! A sweep's bins are folded onto TV channels by bin center frequency, with
//! the channel power taken as the maximum member bin. A channel is occupied
//! in a sweep when its power meets the threshold; its occupation is the
//! fraction of sweeps in which it is occupied. Channels below
//! [`WHITESPACE_CUT`] occupation count as white space.

use serde::{Deserialize, Serialize};

use crate::error::AnalysisError;
use crate::geo::EARTH_RADIUS_M;
use crate::model::{Band, GeoPoint, Journey, PowerSweep};

/// Occupation strictly below this fraction marks a channel as white space.
pub const WHITESPACE_CUT: f64 = 0.20;

pub const UHF_START_HZ: u64 = 470_000_000;
pub const UHF_STOP_HZ: u64 = 694_000_000;
pub const UHF_CHANNEL_WIDTH_HZ: u64 = 8_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Channel {
    pub index: usize,
    pub start_hz: u64,
    pub stop_hz: u64,
}

/// Contiguous fixed-width channels over a band; any remainder narrower
/// than one channel at the top of the band is dropped.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ChannelPlan {
    pub band_start_hz: u64,
    pub band_stop_hz: u64,
    pub channel_width_hz: u64,
    pub channels: Vec<Channel>,
}

impl ChannelPlan {
    pub fn new(band_start_hz: u64, band_stop_hz: u64, channel_width_hz: u64) -> Result<Self, AnalysisError> {
        if band_start_hz >= band_stop_hz {
            return Err(AnalysisError::DegenerateBand(format!(
                "start {band_start_hz} Hz is not below stop {band_stop_hz} Hz"
            )));
        }
        if channel_width_hz == 0 {
            return Err(AnalysisError::DegenerateBand("channel width is zero".into()));
        }
        let count = (band_stop_hz - band_start_hz) / channel_width_hz;
        if count == 0 {
            return Err(AnalysisError::DegenerateBand(format!(
                "no {channel_width_hz} Hz channel fits in [{band_start_hz}, {band_stop_hz}) Hz"
            )));
        }
        let channels = (0..count)
            .map(|k| Channel {
                index: k as usize,
                start_hz: band_start_hz + k * channel_width_hz,
                stop_hz: band_start_hz + (k + 1) * channel_width_hz,
            })
            .collect();
        Ok(ChannelPlan {
            band_start_hz,
            band_stop_hz,
            channel_width_hz,
            channels,
        })
    }

    /// 470 to 694 MHz in 8 MHz channels.
    pub fn uhf_default() -> Self {
        ChannelPlan::new(UHF_START_HZ, UHF_STOP_HZ, UHF_CHANNEL_WIDTH_HZ)
            .expect("default plan is well formed")
    }

    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    /// Checks the contiguity invariants; used on plans read from the wire.
    pub fn is_consistent(&self) -> bool {
        ChannelPlan::new(self.band_start_hz, self.band_stop_hz, self.channel_width_hz)
            .map(|p| &p == self)
            .unwrap_or(false)
    }
}

pub fn make_plan(band_start_hz: u64, band_stop_hz: u64, channel_width_hz: u64) -> Result<ChannelPlan, AnalysisError> {
    ChannelPlan::new(band_start_hz, band_stop_hz, channel_width_hz)
}

/// Precomputed bin-to-channel assignment for one band/bin-count pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMap {
    /// Half-open bin ranges per channel. Bin centers increase with the bin
    /// index, so each channel's members are contiguous.
    ranges: Vec<(usize, usize)>,
    bin_count: usize,
}

impl ChannelMap {
    pub fn new(band: Band, bin_count: usize, plan: &ChannelPlan) -> Result<Self, AnalysisError> {
        if plan.band_start_hz < band.start_hz || plan.channels.last().map_or(0, |c| c.stop_hz) > band.stop_hz {
            return Err(AnalysisError::PlanOutsideBand {
                plan_start: plan.band_start_hz,
                plan_stop: plan.band_stop_hz,
                band_start: band.start_hz,
                band_stop: band.stop_hz,
            });
        }
        let bin_width = band.span_hz() as f64 / bin_count as f64;
        let center = |i: usize| band.start_hz as f64 + (i as f64 + 0.5) * bin_width;
        let mut ranges = Vec::with_capacity(plan.channels.len());
        for ch in &plan.channels {
            let (lo, hi) = (ch.start_hz as f64, ch.stop_hz as f64);
            let first = (0..bin_count).position(|i| center(i) >= lo).unwrap_or(bin_count);
            let end = first + (first..bin_count).take_while(|&i| center(i) < hi).count();
            if first == end {
                return Err(AnalysisError::EmptyChannel(ch.index));
            }
            ranges.push((first, end));
        }
        Ok(ChannelMap { ranges, bin_count })
    }

    pub fn for_journey(j: &Journey, plan: &ChannelPlan) -> Result<Self, AnalysisError> {
        ChannelMap::new(j.band, j.bin_count, plan)
    }

    pub fn channel_count(&self) -> usize {
        self.ranges.len()
    }

    pub fn bin_count(&self) -> usize {
        self.bin_count
    }

    /// Member bins of each channel as half-open index ranges.
    pub fn ranges(&self) -> &[(usize, usize)] {
        &self.ranges
    }

    /// Per-channel power of one sweep, appended to `out`.
    pub fn channel_powers_into(&self, powers: &[f64], out: &mut Vec<f64>) {
        out.extend(
            self.ranges
                .iter()
                .map(|&(a, b)| powers[a..b].iter().copied().fold(f64::NEG_INFINITY, f64::max)),
        );
    }

    pub fn channel_powers(&self, powers: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.ranges.len());
        self.channel_powers_into(powers, &mut out);
        out
    }
}

/// Power of each plan channel in one sweep: the maximum over bins whose
/// centers fall inside the channel.
pub fn channel_power(
    sweep: &PowerSweep,
    band: Band,
    bin_count: usize,
    plan: &ChannelPlan,
) -> Result<Vec<f64>, AnalysisError> {
    Ok(ChannelMap::new(band, bin_count, plan)?.channel_powers(&sweep.powers))
}

/// Channel powers of every sweep, row-major (sweep, channel).
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    channels: usize,
    values: Vec<f64>,
}

impl ChannelMatrix {
    pub fn build(j: &Journey, plan: &ChannelPlan) -> Result<Self, AnalysisError> {
        let map = ChannelMap::for_journey(j, plan)?;
        let mut values = Vec::with_capacity(map.channel_count() * j.sweeps.len());
        for s in &j.sweeps {
            map.channel_powers_into(&s.powers, &mut values);
        }
        Ok(ChannelMatrix {
            channels: map.channel_count(),
            values,
        })
    }

    pub fn sweeps(&self) -> usize {
        self.values.len().checked_div(self.channels).unwrap_or(0)
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn row(&self, sweep: usize) -> &[f64] {
        &self.values[sweep * self.channels..(sweep + 1) * self.channels]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.channels.max(1))
    }

    pub fn occupation(&self, threshold_dbm: f64) -> Vec<f64> {
        let mut counts = vec![0usize; self.channels];
        for row in self.rows() {
            for (c, &p) in row.iter().enumerate() {
                if p >= threshold_dbm {
                    counts[c] += 1;
                }
            }
        }
        let n = self.sweeps() as f64;
        counts.into_iter().map(|k| k as f64 / n).collect()
    }

    /// Weakest power each channel shows across all sweeps.
    pub fn channel_floor(&self) -> Vec<f64> {
        let mut floor = vec![f64::INFINITY; self.channels];
        for row in self.rows() {
            for (m, &p) in floor.iter_mut().zip(row) {
                *m = m.min(p);
            }
        }
        floor
    }

    /// Largest threshold at which some channel is still occupied in every sweep.
    pub fn auto_threshold(&self) -> f64 {
        self.channel_floor()
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

fn non_empty(j: &Journey) -> Result<(), AnalysisError> {
    if j.sweeps.is_empty() {
        Err(AnalysisError::EmptyJourney)
    } else {
        Ok(())
    }
}

/// Fraction of sweeps in which each channel's power is at least `threshold_dbm`.
pub fn occupation(j: &Journey, plan: &ChannelPlan, threshold_dbm: f64) -> Result<Vec<f64>, AnalysisError> {
    non_empty(j)?;
    Ok(ChannelMatrix::build(j, plan)?.occupation(threshold_dbm))
}

/// The highest threshold that still leaves one channel 100% occupied:
/// the maximum over channels of that channel's weakest sweep.
pub fn auto_threshold(j: &Journey, plan: &ChannelPlan) -> Result<f64, AnalysisError> {
    non_empty(j)?;
    Ok(ChannelMatrix::build(j, plan)?.auto_threshold())
}

/// Share of channels whose occupation is below [`WHITESPACE_CUT`].
pub fn ratio_from_occupation(occupation: &[f64]) -> f64 {
    let idle = occupation.iter().filter(|&&o| o < WHITESPACE_CUT).count();
    idle as f64 / occupation.len() as f64
}

pub fn whitespace_ratio(j: &Journey, plan: &ChannelPlan, threshold_dbm: f64) -> Result<f64, AnalysisError> {
    Ok(ratio_from_occupation(&occupation(j, plan, threshold_dbm)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupationReport {
    pub plan: ChannelPlan,
    pub threshold_dbm: f64,
    /// True when `threshold_dbm` was chosen by [`auto_threshold`].
    pub auto_threshold: bool,
    pub occupation: Vec<f64>,
    pub whitespace_ratio: f64,
    pub sweep_count: usize,
}

impl OccupationReport {
    fn from_matrix(matrix: &ChannelMatrix, plan: &ChannelPlan, threshold_dbm: f64, auto: bool) -> Self {
        let occupation = matrix.occupation(threshold_dbm);
        OccupationReport {
            plan: plan.clone(),
            threshold_dbm,
            auto_threshold: auto,
            whitespace_ratio: ratio_from_occupation(&occupation),
            occupation,
            sweep_count: matrix.sweeps(),
        }
    }

    /// Recomputes the ratio from `occupation`.
    pub fn is_consistent(&self) -> bool {
        self.occupation.len() == self.plan.len()
            && self.occupation.iter().all(|o| (0.0..=1.0).contains(o))
            && ratio_from_occupation(&self.occupation) == self.whitespace_ratio
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// Occupation report at `threshold_dbm`, or at the automatic threshold when `None`.
pub fn occupation_report(
    j: &Journey,
    plan: &ChannelPlan,
    threshold_dbm: Option<f64>,
) -> Result<OccupationReport, AnalysisError> {
    non_empty(j)?;
    let matrix = ChannelMatrix::build(j, plan)?;
    Ok(match threshold_dbm {
        Some(t) => OccupationReport::from_matrix(&matrix, plan, t, false),
        None => OccupationReport::from_matrix(&matrix, plan, matrix.auto_threshold(), true),
    })
}

/// One report per threshold; thresholds must be strictly increasing.
pub fn occupation_curve(
    j: &Journey,
    plan: &ChannelPlan,
    thresholds: &[f64],
) -> Result<Vec<OccupationReport>, AnalysisError> {
    if thresholds.windows(2).any(|w| w[0] >= w[1]) || thresholds.iter().any(|t| t.is_nan()) {
        return Err(AnalysisError::UnorderedThresholds);
    }
    non_empty(j)?;
    let matrix = ChannelMatrix::build(j, plan)?;
    Ok(thresholds
        .iter()
        .map(|&t| OccupationReport::from_matrix(&matrix, plan, t, false))
        .collect())
}

/// White-space ratio together with the threshold it was computed at.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WhitespaceSummary {
    pub whitespace_ratio: f64,
    pub threshold_dbm: f64,
    pub auto_threshold: bool,
    pub channels: usize,
}

impl From<&OccupationReport> for WhitespaceSummary {
    fn from(r: &OccupationReport) -> Self {
        WhitespaceSummary {
            whitespace_ratio: r.whitespace_ratio,
            threshold_dbm: r.threshold_dbm,
            auto_threshold: r.auto_threshold,
            channels: r.plan.len(),
        }
    }
}

impl std::fmt::Display for WhitespaceSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "whitespace_ratio {:.3}", self.whitespace_ratio)?;
        writeln!(
            f,
            "threshold_dbm {:.1}{}",
            self.threshold_dbm,
            if self.auto_threshold { " (auto)" } else { "" }
        )?;
        writeln!(f, "channels {}", self.channels)
    }
}

/// Selects what a heat-map cell reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelSelection {
    Channel(usize),
    WholeBand,
}

/// Equirectangular grid anchored at a south-west corner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridFrame {
    pub origin: GeoPoint,
    pub cell_size_m: f64,
    pub lat_deg_per_cell: f64,
    pub lon_deg_per_cell: f64,
}

const M_PER_DEG: f64 = EARTH_RADIUS_M * std::f64::consts::PI / 180.0;

impl GridFrame {
    /// Frame covering `points`, scaled at their mean latitude.
    pub fn fit(points: &[GeoPoint], cell_size_m: f64) -> Result<Self, AnalysisError> {
        if !(cell_size_m.is_finite() && cell_size_m > 0.0) {
            return Err(AnalysisError::InvalidCellSize(cell_size_m));
        }
        if points.is_empty() {
            return Err(AnalysisError::EmptyJourney);
        }
        let min_lat = points.iter().map(|p| p.lat).fold(f64::INFINITY, f64::min);
        let min_lon = points.iter().map(|p| p.lon).fold(f64::INFINITY, f64::min);
        // Sorting first makes the mean independent of input order.
        let mut lats: Vec<f64> = points.iter().map(|p| p.lat).collect();
        lats.sort_by(f64::total_cmp);
        let mean_lat = lats.iter().sum::<f64>() / lats.len() as f64;
        let lon_scale = M_PER_DEG * mean_lat.to_radians().cos().max(1e-12);
        Ok(GridFrame {
            origin: GeoPoint::new(min_lat, min_lon),
            cell_size_m,
            lat_deg_per_cell: cell_size_m / M_PER_DEG,
            lon_deg_per_cell: cell_size_m / lon_scale,
        })
    }

    /// `(row, col)` of the cell holding `p`.
    pub fn cell_of(&self, p: GeoPoint) -> (i64, i64) {
        let row = ((p.lat - self.origin.lat) / self.lat_deg_per_cell).floor() as i64;
        let col = ((p.lon - self.origin.lon) / self.lon_deg_per_cell).floor() as i64;
        (row, col)
    }

    pub fn extent(&self, row: i64, col: i64) -> CellExtent {
        let south = self.origin.lat + row as f64 * self.lat_deg_per_cell;
        let west = self.origin.lon + col as f64 * self.lon_deg_per_cell;
        CellExtent {
            south,
            west,
            north: south + self.lat_deg_per_cell,
            east: west + self.lon_deg_per_cell,
        }
    }
}

/// Geographic bounds of a grid cell, in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellExtent {
    pub south: f64,
    pub west: f64,
    pub north: f64,
    pub east: f64,
}

impl CellExtent {
    /// Overlap with positive area; shared edges do not count.
    pub fn intersection(&self, other: &CellExtent) -> Option<CellExtent> {
        let c = CellExtent {
            south: self.south.max(other.south),
            west: self.west.max(other.west),
            north: self.north.min(other.north),
            east: self.east.min(other.east),
        };
        (c.south < c.north && c.west < c.east).then_some(c)
    }

    pub fn center(&self) -> GeoPoint {
        GeoPoint::new((self.south + self.north) / 2.0, (self.west + self.east) / 2.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatmapCell {
    pub row: i64,
    pub col: i64,
    pub value_dbm: f64,
    pub sample_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatmapGrid {
    pub frame: GridFrame,
    pub selection: ChannelSelection,
    /// Sorted by `(row, col)`, one entry per occupied cell.
    pub cells: Vec<HeatmapCell>,
}

#[derive(Serialize)]
struct HeatmapCellDoc {
    row: i64,
    col: i64,
    value_dbm: f64,
    sample_count: usize,
    extent: CellExtent,
}

#[derive(Serialize)]
struct HeatmapDoc {
    origin: GeoPoint,
    cell_size_m: f64,
    lat_deg_per_cell: f64,
    lon_deg_per_cell: f64,
    selection: ChannelSelection,
    cells: Vec<HeatmapCellDoc>,
}

impl HeatmapGrid {
    pub fn origin(&self) -> GeoPoint {
        self.frame.origin
    }

    pub fn cell_size_m(&self) -> f64 {
        self.frame.cell_size_m
    }

    /// JSON document with each cell's corner coordinates for map overlays.
    pub fn to_json(&self) -> String {
        let doc = HeatmapDoc {
            origin: self.frame.origin,
            cell_size_m: self.frame.cell_size_m,
            lat_deg_per_cell: self.frame.lat_deg_per_cell,
            lon_deg_per_cell: self.frame.lon_deg_per_cell,
            selection: self.selection,
            cells: self
                .cells
                .iter()
                .map(|c| HeatmapCellDoc {
                    row: c.row,
                    col: c.col,
                    value_dbm: c.value_dbm,
                    sample_count: c.sample_count,
                    extent: self.frame.extent(c.row, c.col),
                })
                .collect(),
        };
        serde_json::to_string(&doc).expect("heat-map serializes")
    }
}

/// Strongest selected-channel power per grid cell.
pub fn heatmap(
    j: &Journey,
    plan: &ChannelPlan,
    selection: ChannelSelection,
    cell_size_m: f64,
) -> Result<HeatmapGrid, AnalysisError> {
    if !(cell_size_m.is_finite() && cell_size_m > 0.0) {
        return Err(AnalysisError::InvalidCellSize(cell_size_m));
    }
    non_empty(j)?;
    if let ChannelSelection::Channel(index) = selection {
        if index >= plan.len() {
            return Err(AnalysisError::InvalidChannel {
                index,
                channels: plan.len(),
            });
        }
    }
    let matrix = ChannelMatrix::build(j, plan)?;
    let points: Vec<GeoPoint> = j.sweeps.iter().map(|s| s.location).collect();
    let frame = GridFrame::fit(&points, cell_size_m)?;

    let mut cells: std::collections::BTreeMap<(i64, i64), HeatmapCell> = Default::default();
    for (i, p) in points.iter().enumerate() {
        let row = matrix.row(i);
        let value = match selection {
            ChannelSelection::Channel(c) => row[c],
            ChannelSelection::WholeBand => row.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        };
        let (r, c) = frame.cell_of(*p);
        cells
            .entry((r, c))
            .and_modify(|cell| {
                cell.value_dbm = cell.value_dbm.max(value);
                cell.sample_count += 1;
            })
            .or_insert(HeatmapCell {
                row: r,
                col: c,
                value_dbm: value,
                sample_count: 1,
            });
    }
    Ok(HeatmapGrid {
        frame,
        selection,
        cells: cells.into_values().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DeviceKind, DeviceProfile};

    fn journey(band: Band, rows: &[Vec<f64>]) -> Journey {
        let mut j = Journey::new("j", DeviceProfile::new(DeviceKind::Generic), band, rows[0].len());
        j.sweeps = rows
            .iter()
            .enumerate()
            .map(|(i, r)| PowerSweep::new(i as f64, GeoPoint::new(0.0, 0.0), r.clone()))
            .collect();
        j
    }

    #[test]
    fn uhf_plan_has_28_channels() {
        let p = make_plan(470_000_000, 694_000_000, 8_000_000).unwrap();
        assert_eq!(p.len(), 28);
        assert_eq!(
            p.channels[27],
            Channel {
                index: 27,
                start_hz: 686_000_000,
                stop_hz: 694_000_000
            }
        );
        assert_eq!(p, ChannelPlan::uhf_default());
    }

    #[test]
    fn six_mhz_plan_truncates_remainder() {
        let p = make_plan(470_000_000, 694_000_000, 6_000_000).unwrap();
        assert_eq!(p.len(), 37);
        assert_eq!(p.channels[36].stop_hz, 692_000_000);
        assert!(p.is_consistent());
    }

    #[test]
    fn plan_errors() {
        assert!(matches!(
            make_plan(470_000_000, 475_000_000, 8_000_000),
            Err(AnalysisError::DegenerateBand(_))
        ));
        assert!(make_plan(10, 10, 1).is_err());
        assert!(make_plan(10, 20, 0).is_err());
    }

    #[test]
    fn channel_power_by_bin_center() {
        let band = Band::new(0, 16);
        let plan = make_plan(0, 16, 8).unwrap();
        let s = PowerSweep::new(0.0, GeoPoint::new(0.0, 0.0), vec![-90.0, -60.0, -95.0, -80.0]);
        assert_eq!(channel_power(&s, band, 4, &plan).unwrap(), vec![-60.0, -80.0]);

        let one = PowerSweep::new(0.0, GeoPoint::new(0.0, 0.0), vec![-71.0]);
        let plan1 = make_plan(0, 16, 16).unwrap();
        assert_eq!(channel_power(&one, band, 1, &plan1).unwrap(), vec![-71.0]);

        let flat = PowerSweep::new(0.0, GeoPoint::new(0.0, 0.0), vec![-90.0; 112]);
        let wide = Band::new(470_000_000, 694_000_000);
        assert!(channel_power(&flat, wide, 112, &ChannelPlan::uhf_default())
            .unwrap()
            .iter()
            .all(|&p| p == -90.0));
    }

    #[test]
    fn too_fine_plan_reports_empty_channel() {
        let s = PowerSweep::new(0.0, GeoPoint::new(0.0, 0.0), vec![-90.0, -80.0]);
        let plan = make_plan(0, 16, 4).unwrap();
        // bin centers at 4 and 12: channel 0 = [0,4) is empty
        assert_eq!(
            channel_power(&s, Band::new(0, 16), 2, &plan),
            Err(AnalysisError::EmptyChannel(0))
        );
    }

    #[test]
    fn plan_outside_band_is_rejected() {
        let s = PowerSweep::new(0.0, GeoPoint::new(0.0, 0.0), vec![-90.0; 4]);
        let plan = make_plan(0, 32, 8).unwrap();
        assert!(matches!(
            channel_power(&s, Band::new(0, 16), 4, &plan),
            Err(AnalysisError::PlanOutsideBand { .. })
        ));
    }

    #[test]
    fn occupation_counts_sweeps_at_or_above_threshold() {
        let band = Band::new(0, 32);
        let plan = make_plan(0, 32, 8).unwrap();
        let rows = vec![
            vec![-90.0, -90.0, -90.0, -50.0],
            vec![-90.0, -90.0, -90.0, -90.0],
            vec![-90.0, -90.0, -90.0, -90.0],
            vec![-90.0, -90.0, -90.0, -90.0],
        ];
        let j = journey(band, &rows);
        assert_eq!(occupation(&j, &plan, -60.0).unwrap(), vec![0.0, 0.0, 0.0, 0.25]);
        assert_eq!(occupation(&j, &plan, -200.0).unwrap(), vec![1.0; 4]);
        assert_eq!(occupation(&j, &plan, 0.0).unwrap(), vec![0.0; 4]);
        assert_eq!(occupation(&j, &plan, -90.0).unwrap(), vec![1.0; 4]);
    }

    #[test]
    fn auto_threshold_examples() {
        let band = Band::new(0, 16);
        let plan = make_plan(0, 16, 8).unwrap();
        let single = journey(band, &[vec![-70.0, -85.0]]);
        assert_eq!(auto_threshold(&single, &plan).unwrap(), -70.0);

        let flat = journey(band, &[vec![-80.0, -80.0], vec![-80.0, -80.0]]);
        assert_eq!(auto_threshold(&flat, &plan).unwrap(), -80.0);

        let two = journey(band, &[vec![-60.0, -90.0], vec![-55.0, -70.0]]);
        let t = auto_threshold(&two, &plan).unwrap();
        assert_eq!(t, -60.0);
        assert_eq!(occupation(&two, &plan, t).unwrap()[0], 1.0);
        assert!(occupation(&two, &plan, t + 0.1).unwrap().iter().all(|&o| o < 1.0));
    }

    #[test]
    fn empty_journey_is_an_error() {
        let mut j = journey(Band::new(0, 16), &[vec![-80.0]]);
        j.sweeps.clear();
        let plan = make_plan(0, 16, 16).unwrap();
        assert_eq!(occupation(&j, &plan, -80.0), Err(AnalysisError::EmptyJourney));
        assert_eq!(auto_threshold(&j, &plan), Err(AnalysisError::EmptyJourney));
        assert_eq!(whitespace_ratio(&j, &plan, -80.0), Err(AnalysisError::EmptyJourney));
    }

    #[test]
    fn whitespace_ratio_uses_strict_cut() {
        assert_eq!(ratio_from_occupation(&[0.0, 0.19, 0.2, 1.0]), 0.5);
        let mut occ = vec![0.1; 24];
        occ.extend([0.5; 4]);
        assert!((ratio_from_occupation(&occ) - 24.0 / 28.0).abs() < 1e-15);
        assert!((ratio_from_occupation(&occ) - 0.857).abs() < 1e-3);
    }

    #[test]
    fn curve_requires_increasing_thresholds() {
        let j = journey(Band::new(0, 16), &[vec![-80.0, -70.0]]);
        let plan = make_plan(0, 16, 8).unwrap();
        assert_eq!(
            occupation_curve(&j, &plan, &[-70.0, -80.0]),
            Err(AnalysisError::UnorderedThresholds)
        );
        assert_eq!(
            occupation_curve(&j, &plan, &[-70.0, -70.0]),
            Err(AnalysisError::UnorderedThresholds)
        );
        let c = occupation_curve(&j, &plan, &[-120.0]).unwrap();
        assert_eq!(c[0].occupation, vec![1.0, 1.0]);
        assert_eq!(c[0].whitespace_ratio, 0.0);
        assert!(c[0].is_consistent());
    }

    #[test]
    fn summary_text() {
        let s = WhitespaceSummary {
            whitespace_ratio: 1.0,
            threshold_dbm: -80.04,
            auto_threshold: true,
            channels: 28,
        };
        assert_eq!(s.to_string(), "whitespace_ratio 1.000\nthreshold_dbm -80.0 (auto)\nchannels 28\n");
    }

    fn located(points: &[(f64, f64)], rows: &[Vec<f64>]) -> Journey {
        let mut j = journey(Band::new(0, 16), rows);
        for (s, &(lat, lon)) in j.sweeps.iter_mut().zip(points) {
            s.location = GeoPoint::new(lat, lon);
        }
        j
    }

    #[test]
    fn heatmap_single_cell() {
        let j = located(&[(1.0, 1.0); 3], &[vec![-80.0, -70.0], vec![-60.0, -90.0], vec![-85.0, -75.0]]);
        let plan = make_plan(0, 16, 8).unwrap();
        let g = heatmap(&j, &plan, ChannelSelection::WholeBand, 100.0).unwrap();
        assert_eq!(g.cells.len(), 1);
        assert_eq!(g.cells[0].sample_count, 3);
        assert_eq!(g.cells[0].value_dbm, -60.0);
        let g1 = heatmap(&j, &plan, ChannelSelection::Channel(1), 100.0).unwrap();
        assert_eq!(g1.cells[0].value_dbm, -70.0);
    }

    #[test]
    fn heatmap_offsets_along_a_row() {
        // Two points on the equator 3.5 cells apart.
        let cell = 250.0;
        let dlon = 3.5 * cell / M_PER_DEG;
        let j = located(&[(0.0, 10.0), (0.0, 10.0 + dlon)], &[vec![-80.0, -70.0], vec![-60.0, -90.0]]);
        let plan = make_plan(0, 16, 8).unwrap();
        let g = heatmap(&j, &plan, ChannelSelection::Channel(0), cell).unwrap();
        let idx: Vec<_> = g.cells.iter().map(|c| (c.row, c.col)).collect();
        assert_eq!(idx, vec![(0, 0), (0, 3)]);
        let doc: serde_json::Value = serde_json::from_str(&g.to_json()).unwrap();
        assert_eq!(doc["cells"][1]["extent"]["west"].as_f64().unwrap(), g.frame.extent(0, 3).west);
    }

    #[test]
    fn heatmap_preconditions() {
        let j = located(&[(1.0, 1.0)], &[vec![-80.0, -70.0]]);
        let plan = make_plan(0, 16, 8).unwrap();
        assert_eq!(
            heatmap(&j, &plan, ChannelSelection::WholeBand, 0.0),
            Err(AnalysisError::InvalidCellSize(0.0))
        );
        assert!(matches!(
            heatmap(&j, &plan, ChannelSelection::Channel(2), 10.0),
            Err(AnalysisError::InvalidChannel { .. })
        ));
    }
}
