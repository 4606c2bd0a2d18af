//! The canonical journey document.
//!
//! Output is JSON with a fixed key order, no insignificant whitespace and
//! powers written with exactly one decimal digit, so equal journeys always
//! serialize to identical bytes:
//!
//! ```text
//! {"schema":"zebra-journey/1","id":"..","metadata":{"country":"..","city":"..",
//!  "notes":"..","collected_utc":"YYYY-MM-DD"},"device":{"kind":"..","label":"..",
//!  "sample_period_s":null},"band":{"start_hz":470000000,"stop_hz":694000000},
//!  "bin_count":2,"sweeps":[{"t":1.5,"lat":8.6,"lon":-71.1,"p":[-90.0,-85.5]}]}
//! ```
//!
//! Input may use any key order and whitespace.

use std::fmt::Write as _;

use chrono::NaiveDate;
use serde_json::{Map, Value};

use crate::error::DocumentError;
use crate::model::{
    round_dbm, tenths, Band, DeviceKind, DeviceProfile, GeoPoint, Journey, JourneyMetadata,
    PowerSweep,
};

pub const SCHEMA_TAG: &str = "zebra-journey/1";

/// Writes the canonical document. Fails with [`DocumentError::Invalid`] when
/// the journey breaks an invariant.
pub fn serialize_journey(j: &Journey) -> Result<String, DocumentError> {
    let violations = j.validate();
    if !violations.is_empty() {
        return Err(DocumentError::Invalid(violations));
    }
    let per_sweep = 40 + 7 * j.bin_count;
    let mut out = String::with_capacity(256 + per_sweep * j.sweeps.len());
    out.push_str("{\"schema\":");
    push_str_token(&mut out, SCHEMA_TAG);
    out.push_str(",\"id\":");
    push_str_token(&mut out, &j.id);
    out.push_str(",\"metadata\":{\"country\":");
    push_str_token(&mut out, &j.metadata.country);
    out.push_str(",\"city\":");
    push_str_token(&mut out, &j.metadata.city);
    out.push_str(",\"notes\":");
    push_str_token(&mut out, &j.metadata.notes);
    out.push_str(",\"collected_utc\":\"");
    let _ = write!(out, "{}", j.metadata.collected_utc.format("%Y-%m-%d"));
    out.push_str("\"},\"device\":{\"kind\":");
    push_str_token(&mut out, j.device.kind.as_str());
    out.push_str(",\"label\":");
    push_str_token(&mut out, &j.device.label);
    out.push_str(",\"sample_period_s\":");
    match j.device.sample_period_s {
        Some(p) => push_number(&mut out, p),
        None => out.push_str("null"),
    }
    let _ = write!(
        out,
        "}},\"band\":{{\"start_hz\":{},\"stop_hz\":{}}},\"bin_count\":{},\"sweeps\":[",
        j.band.start_hz, j.band.stop_hz, j.bin_count
    );
    for (i, s) in j.sweeps.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str("{\"t\":");
        push_number(&mut out, s.timestamp);
        out.push_str(",\"lat\":");
        push_number(&mut out, s.location.lat);
        out.push_str(",\"lon\":");
        push_number(&mut out, s.location.lon);
        out.push_str(",\"p\":[");
        for (k, &p) in s.powers.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            push_power(&mut out, p);
        }
        out.push_str("]}");
    }
    out.push_str("]}");
    Ok(out)
}

/// Parses a journey document, then validates it.
pub fn parse_journey(text: &str) -> Result<Journey, DocumentError> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| DocumentError::Syntax(e.to_string()))?;
    let journey = journey_from_value(&value)?;
    let violations = journey.validate();
    if violations.is_empty() {
        Ok(journey)
    } else {
        Err(DocumentError::Invalid(violations))
    }
}

fn push_str_token(out: &mut String, s: &str) {
    out.push_str(&serde_json::to_string(s).expect("strings always serialize"));
}

/// Shortest decimal that reads back to the same `f64`.
fn push_number(out: &mut String, x: f64) {
    if x == 0.0 {
        out.push('0');
    } else {
        let _ = write!(out, "{x}");
    }
}

/// Exactly one decimal digit, half away from zero.
pub(crate) fn push_power(out: &mut String, p: f64) {
    let t = tenths(p);
    let sign = if t < 0 { "-" } else { "" };
    let a = t.unsigned_abs();
    let _ = write!(out, "{sign}{}.{}", a / 10, a % 10);
}

/// Canonical power token, e.g. `-101.5`.
pub fn format_power(p: f64) -> String {
    let mut s = String::new();
    push_power(&mut s, p);
    s
}

struct Obj<'a> {
    path: String,
    map: &'a Map<String, Value>,
}

impl<'a> Obj<'a> {
    fn new(value: &'a Value, path: &str, keys: &[&str]) -> Result<Self, DocumentError> {
        let map = value
            .as_object()
            .ok_or_else(|| DocumentError::schema(path, "expected an object"))?;
        if let Some(unknown) = map.keys().find(|k| !keys.contains(&k.as_str())) {
            return Err(DocumentError::schema(
                join(path, unknown),
                "unknown key",
            ));
        }
        if let Some(missing) = keys.iter().find(|k| !map.contains_key(**k)) {
            return Err(DocumentError::schema(join(path, missing), "missing key"));
        }
        Ok(Obj {
            path: path.to_string(),
            map,
        })
    }

    fn get(&self, key: &str) -> (&'a Value, String) {
        (&self.map[key], join(&self.path, key))
    }

    fn string(&self, key: &str) -> Result<String, DocumentError> {
        let (v, path) = self.get(key);
        v.as_str()
            .map(str::to_string)
            .ok_or_else(|| DocumentError::schema(path, "expected a string"))
    }

    fn number(&self, key: &str) -> Result<f64, DocumentError> {
        let (v, path) = self.get(key);
        v.as_f64()
            .ok_or_else(|| DocumentError::schema(path, "expected a number"))
    }

    fn integer(&self, key: &str) -> Result<u64, DocumentError> {
        let (v, path) = self.get(key);
        v.as_u64()
            .ok_or_else(|| DocumentError::schema(path, "expected a non-negative integer"))
    }
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn journey_from_value(value: &Value) -> Result<Journey, DocumentError> {
    let root = Obj::new(
        value,
        "",
        &["schema", "id", "metadata", "device", "band", "bin_count", "sweeps"],
    )?;
    let schema = root.string("schema")?;
    if schema != SCHEMA_TAG {
        return Err(DocumentError::schema(
            "schema",
            format!("expected {SCHEMA_TAG:?}, found {schema:?}"),
        ));
    }

    let (meta_v, meta_path) = root.get("metadata");
    let meta = Obj::new(meta_v, &meta_path, &["country", "city", "notes", "collected_utc"])?;
    let date_text = meta.string("collected_utc")?;
    let collected_utc = NaiveDate::parse_from_str(&date_text, "%Y-%m-%d").map_err(|_| {
        DocumentError::schema("metadata.collected_utc", "expected a YYYY-MM-DD date")
    })?;
    let metadata = JourneyMetadata {
        country: meta.string("country")?,
        city: meta.string("city")?,
        notes: meta.string("notes")?,
        collected_utc,
    };

    let (dev_v, dev_path) = root.get("device");
    let dev = Obj::new(dev_v, &dev_path, &["kind", "label", "sample_period_s"])?;
    let kind: DeviceKind = dev
        .string("kind")?
        .parse()
        .map_err(|e: crate::error::ModelError| DocumentError::schema("device.kind", e.to_string()))?;
    let sample_period_s = match dev.get("sample_period_s").0 {
        Value::Null => None,
        _ => Some(dev.number("sample_period_s")?),
    };
    let device = DeviceProfile {
        kind,
        label: dev.string("label")?,
        sample_period_s,
    };

    let (band_v, band_path) = root.get("band");
    let band_obj = Obj::new(band_v, &band_path, &["start_hz", "stop_hz"])?;
    let band = Band::new(band_obj.integer("start_hz")?, band_obj.integer("stop_hz")?);
    let bin_count = usize::try_from(root.integer("bin_count")?)
        .map_err(|_| DocumentError::schema("bin_count", "too large"))?;

    let (sweeps_v, _) = root.get("sweeps");
    let items = sweeps_v
        .as_array()
        .ok_or_else(|| DocumentError::schema("sweeps", "expected an array"))?;
    let mut sweeps = Vec::with_capacity(items.len());
    for (i, item) in items.iter().enumerate() {
        let path = format!("sweeps[{i}]");
        let s = Obj::new(item, &path, &["t", "lat", "lon", "p"])?;
        let (p_v, p_path) = s.get("p");
        let raw = p_v
            .as_array()
            .ok_or_else(|| DocumentError::schema(&p_path, "expected an array"))?;
        let powers = raw
            .iter()
            .enumerate()
            .map(|(k, v)| {
                v.as_f64().map(round_dbm).ok_or_else(|| {
                    DocumentError::schema(format!("{p_path}[{k}]"), "expected a number")
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        sweeps.push(PowerSweep::new(
            s.number("t")?,
            GeoPoint::new(s.number("lat")?, s.number("lon")?),
            powers,
        ));
    }

    Ok(Journey {
        id: root.string("id")?,
        metadata,
        device,
        band,
        bin_count,
        sweeps,
    })
}
