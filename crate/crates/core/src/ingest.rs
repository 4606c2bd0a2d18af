//! Converters from raw device captures to canonical journeys.
//!
//! Every supported device writes a line-oriented text file:
//!
//! ```text
//! #ZRFO-RFE,1,<start_hz>,<stop_hz>,<bin_count>     rfexplorer / whisppi
//! #ZRFO-A32,1,<start_hz>,<stop_hz>,32              ascii32
//! #ZRFO-AND,1,<start_hz>,<stop_hz>,<bin_count>     android-rfe
//! <unix_time>,<lat>,<lon>,<p0>;<p1>;...;<pN-1>     one record per line
//! ```
//!
//! The three trailing header fields may be omitted (`#ZRFO-RFE,1`), in which
//! case the band and bin count come from the uploader's [`CaptureHint`].
//! A malformed row rejects the whole file.

use chrono::DateTime;

use crate::error::IngestError;
use crate::model::{
    round_dbm, Band, DeviceKind, DeviceProfile, GeoPoint, Journey, JourneyMetadata, PowerSweep,
};

const RFE_TAG: &str = "#ZRFO-RFE";
const A32_TAG: &str = "#ZRFO-A32";
const AND_TAG: &str = "#ZRFO-AND";
const FORMAT_VERSION: &str = "1";
const ASCII32_BINS: usize = 32;

/// Band and bin count supplied out of band by the uploader.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CaptureHint {
    pub band: Option<Band>,
    pub bin_count: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawCapture {
    pub device_kind: DeviceKind,
    pub payload: Vec<u8>,
    pub hint: CaptureHint,
}

impl RawCapture {
    pub fn new(device_kind: DeviceKind, payload: impl Into<Vec<u8>>) -> Self {
        RawCapture {
            device_kind,
            payload: payload.into(),
            hint: CaptureHint::default(),
        }
    }

    pub fn with_hint(mut self, hint: CaptureHint) -> Self {
        self.hint = hint;
        self
    }
}

/// Identifies the device format from the first non-blank line.
pub fn detect_format(payload: &[u8]) -> Option<DeviceKind> {
    let text = std::str::from_utf8(payload).ok()?;
    let first = text.lines().map(str::trim).find(|l| !l.is_empty())?;
    let mut fields = first.split(',');
    let kind = match fields.next()? {
        RFE_TAG => DeviceKind::RfExplorer,
        A32_TAG => DeviceKind::Ascii32,
        AND_TAG => DeviceKind::AndroidRfe,
        _ => return None,
    };
    (fields.next()?.trim() == FORMAT_VERSION).then_some(kind)
}

fn header_tag(kind: DeviceKind) -> Option<&'static str> {
    match kind {
        DeviceKind::RfExplorer | DeviceKind::WhispPi => Some(RFE_TAG),
        DeviceKind::Ascii32 => Some(A32_TAG),
        DeviceKind::AndroidRfe => Some(AND_TAG),
        DeviceKind::Generic => None,
    }
}

struct Header {
    band: Option<Band>,
    bin_count: Option<usize>,
}

fn format_err(line: usize, reason: impl Into<String>) -> IngestError {
    IngestError::Format {
        line,
        reason: reason.into(),
    }
}

fn parse_header(line_no: usize, line: &str, tag: &str) -> Result<Header, IngestError> {
    let fields: Vec<&str> = line.split(',').map(str::trim).collect();
    if fields[0] != tag {
        return Err(format_err(
            line_no,
            format!("expected header tag {tag}, found {:?}", fields[0]),
        ));
    }
    match fields.get(1) {
        Some(&FORMAT_VERSION) => {}
        Some(v) => return Err(format_err(line_no, format!("unsupported format version {v:?}"))),
        None => return Err(format_err(line_no, "header lacks a format version")),
    }
    match fields.len() {
        2 => Ok(Header {
            band: None,
            bin_count: None,
        }),
        5 => {
            let int = |s: &str, what: &str| {
                s.parse::<u64>()
                    .map_err(|_| format_err(line_no, format!("{what} {s:?} is not an integer")))
            };
            let start = int(fields[2], "start_hz")?;
            let stop = int(fields[3], "stop_hz")?;
            let bins = int(fields[4], "bin_count")? as usize;
            Ok(Header {
                band: Some(Band::new(start, stop)),
                bin_count: Some(bins),
            })
        }
        n => Err(format_err(
            line_no,
            format!("header has {n} fields, expected 2 or 5"),
        )),
    }
}

fn parse_number(line_no: usize, s: &str, what: &str) -> Result<f64, IngestError> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| format_err(line_no, format!("{what} {s:?} is not a number")))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format_err(line_no, format!("{what} is not finite")))
    }
}

fn parse_record(line_no: usize, line: &str) -> Result<PowerSweep, IngestError> {
    let mut fields = line.splitn(4, ',');
    let mut next = |what: &str| {
        fields
            .next()
            .ok_or_else(|| format_err(line_no, format!("missing {what}")))
    };
    let t = parse_number(line_no, next("timestamp")?, "timestamp")?;
    let lat = parse_number(line_no, next("latitude")?, "latitude")?;
    let lon = parse_number(line_no, next("longitude")?, "longitude")?;
    let powers = next("powers")?
        .split(';')
        .map(|p| parse_number(line_no, p, "power").map(round_dbm))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PowerSweep::new(t, GeoPoint::new(lat, lon), powers))
}

/// Converts a raw capture into a validated journey with an empty id.
///
/// `collected_utc` is the UTC date of the first record.
pub fn parse_raw(capture: &RawCapture) -> Result<Journey, IngestError> {
    let tag = header_tag(capture.device_kind)
        .ok_or(IngestError::UnsupportedDevice(capture.device_kind))?;
    if capture.payload.is_empty() {
        return Err(IngestError::EmptyPayload);
    }
    let text = std::str::from_utf8(&capture.payload)
        .map_err(|e| format_err(1, format!("payload is not UTF-8: {e}")))?;

    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (header_line, header_text) = lines.next().ok_or_else(|| format_err(1, "no header line"))?;
    let header = parse_header(header_line, header_text, tag)?;

    let band = header
        .band
        .or(capture.hint.band)
        .ok_or_else(|| format_err(header_line, "band missing from header and hint"))?;
    let bin_count = header
        .bin_count
        .or(capture.hint.bin_count)
        .ok_or_else(|| format_err(header_line, "bin count missing from header and hint"))?;
    if capture.device_kind == DeviceKind::Ascii32 && bin_count != ASCII32_BINS {
        return Err(format_err(
            header_line,
            format!("ascii32 captures have {ASCII32_BINS} bins, header says {bin_count}"),
        ));
    }

    let mut sweeps = Vec::new();
    for (line_no, line) in lines {
        let sweep = parse_record(line_no, line)?;
        if sweep.powers.len() != bin_count {
            return Err(IngestError::Inconsistent {
                line: line_no,
                expected: bin_count,
                found: sweep.powers.len(),
            });
        }
        sweeps.push(sweep);
    }
    if sweeps.is_empty() {
        return Err(format_err(header_line, "capture holds no records"));
    }

    let collected_utc = DateTime::from_timestamp(sweeps[0].timestamp.floor() as i64, 0)
        .map(|d| d.date_naive())
        .unwrap_or_else(|| JourneyMetadata::default().collected_utc);
    let journey = Journey {
        id: String::new(),
        metadata: JourneyMetadata {
            collected_utc,
            ..JourneyMetadata::default()
        },
        device: DeviceProfile::new(capture.device_kind),
        band,
        bin_count,
        sweeps,
    };
    let violations = journey.validate();
    if violations.is_empty() {
        Ok(journey)
    } else {
        Err(IngestError::Invalid(violations))
    }
}

/// A GPS track: strictly increasing timestamps with positions.
#[derive(Debug, Clone, PartialEq)]
pub struct LocationTrack {
    points: Vec<(f64, GeoPoint)>,
}

impl LocationTrack {
    pub fn new(points: Vec<(f64, GeoPoint)>) -> Result<Self, IngestError> {
        if points.is_empty() {
            return Err(IngestError::Track("track is empty".into()));
        }
        for (i, (t, p)) in points.iter().enumerate() {
            if !t.is_finite() || !p.is_valid() {
                return Err(IngestError::Track(format!("point {i} is not a valid fix")));
            }
        }
        if let Some(i) = points.windows(2).position(|w| w[1].0 <= w[0].0) {
            return Err(IngestError::Track(format!(
                "timestamps not strictly increasing at point {}",
                i + 1
            )));
        }
        Ok(LocationTrack { points })
    }

    /// Reads `<unix_time>,<lat>,<lon>` lines; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self, IngestError> {
        let mut points = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 3 {
                return Err(format_err(i + 1, "track lines are <unix_time>,<lat>,<lon>"));
            }
            let t = parse_number(i + 1, f[0], "timestamp")?;
            let lat = parse_number(i + 1, f[1], "latitude")?;
            let lon = parse_number(i + 1, f[2], "longitude")?;
            points.push((t, GeoPoint::new(lat, lon)));
        }
        LocationTrack::new(points)
    }

    pub fn points(&self) -> &[(f64, GeoPoint)] {
        &self.points
    }

    /// Linear interpolation of lat and lon independently.
    pub fn position_at(&self, t: f64) -> Option<GeoPoint> {
        let first = self.points.first()?.0;
        let last = self.points.last()?.0;
        if !(first..=last).contains(&t) {
            return None;
        }
        let idx = self.points.partition_point(|(pt, _)| *pt < t);
        let (t1, p1) = self.points[idx];
        if t1 == t {
            return Some(p1);
        }
        let (t0, p0) = self.points[idx - 1];
        let f = (t - t0) / (t1 - t0);
        Some(GeoPoint::new(
            p0.lat + f * (p1.lat - p0.lat),
            p0.lon + f * (p1.lon - p0.lon),
        ))
    }
}

/// Replaces every sweep location with the track position at its timestamp.
pub fn merge_location_track(j: &Journey, track: &LocationTrack) -> Result<Journey, IngestError> {
    let first = track.points[0].0;
    let last = track.points[track.points.len() - 1].0;
    let mut out = j.clone();
    for (i, sweep) in out.sweeps.iter_mut().enumerate() {
        sweep.location =
            track
                .position_at(sweep.timestamp)
                .ok_or(IngestError::OutOfTrack {
                    sweep: i,
                    timestamp: sweep.timestamp,
                    first,
                    last,
                })?;
    }
    Ok(out)
}
