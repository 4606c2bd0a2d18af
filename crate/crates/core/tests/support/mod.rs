//! Generators and brute-force oracles shared by the integration tests and
//! the acceptance suite. The oracles deliberately avoid the library's
//! algorithms: channel membership uses exact integer arithmetic, the
//! condensation oracle scans every reference, and point-in-polygon uses the
//! winding number.

#![allow(dead_code)]

use std::path::PathBuf;

use chrono::NaiveDate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zebra_rfo::model::{JourneyMetadata, MAX_POWER_DBM, MIN_POWER_DBM};
use zebra_rfo::{Band, ChannelPlan, DeviceKind, DeviceProfile, GeoPoint, Journey, PowerSweep};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn fixture_text(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap()
}

/// (file, device kind, hint band, hint bins, golden document)
pub type AdapterFixture = (&'static str, DeviceKind, Option<(u64, u64)>, Option<usize>, &'static str);

pub const ADAPTER_FIXTURES: &[AdapterFixture] = &[
    ("rfexplorer_merida.txt", DeviceKind::RfExplorer, None, None, "rfexplorer_merida.golden.json"),
    ("ascii32_sanjose.txt", DeviceKind::Ascii32, None, None, "ascii32_sanjose.golden.json"),
    (
        "whisppi_headerless.txt",
        DeviceKind::WhispPi,
        Some((470_000_000, 502_000_000)),
        Some(4),
        "whisppi_headerless.golden.json",
    ),
    ("android_rfe_rome.txt", DeviceKind::AndroidRfe, None, None, "android_rfe_rome.golden.json"),
];

// ---------------------------------------------------------------- generators

/// Power on the canonical one-decimal grid.
pub fn power(rng: &mut ChaCha8Rng, lo: i32, hi: i32) -> f64 {
    rng.random_range(lo * 10..=hi * 10) as f64 / 10.0
}

fn text(rng: &mut ChaCha8Rng) -> String {
    const POOL: &[&str] = &["a", "Z", "é", "\"", "\\", "\n", "\t", "\u{1}", " ", "ñ", "中", "/", "😀"];
    (0..rng.random_range(0..6))
        .map(|_| POOL[rng.random_range(0..POOL.len())])
        .collect()
}

/// Journey with an exactly divisible band, so bin centers are exact floats.
/// Returns the journey and a plan of at most `max_channels` channels
/// inside the band.
pub fn occupancy_case(
    rng: &mut ChaCha8Rng,
    max_sweeps: usize,
    max_channels: usize,
    max_bins: usize,
) -> (Journey, ChannelPlan) {
    let bins = rng.random_range(1..=max_bins);
    let bin_width = 2 * rng.random_range(1_000..=500_000u64);
    let start = rng.random_range(50_000_000..=800_000_000u64);
    let band = Band::new(start, start + bins as u64 * bin_width);
    let channels = rng.random_range(1..=max_channels) as u64;
    let span = band.span_hz();
    let width = rng.random_range((span / (channels + 1)).max(1)..=(span / channels).max(1));
    let room = span - (span / width).min(max_channels as u64) * width;
    let offset = if room > 0 { rng.random_range(0..=room) } else { 0 };
    let plan_stop = start + offset + (span / width).min(max_channels as u64) * width;
    let plan = ChannelPlan::new(start + offset, plan_stop, width).unwrap();

    let sweeps = rng.random_range(1..=max_sweeps);
    let mut j = Journey::new("occ", DeviceProfile::new(DeviceKind::RfExplorer), band, bins);
    // coarse power grid so ties and exact threshold hits are common
    let coarse = rng.random_bool(0.5);
    for s in 0..sweeps {
        let powers = (0..bins)
            .map(|_| {
                if coarse {
                    rng.random_range(-12..=-6) as f64 * 10.0
                } else {
                    power(rng, -120, -40)
                }
            })
            .collect();
        j.sweeps.push(PowerSweep::new(s as f64, GeoPoint::new(0.0, 0.0), powers));
    }
    (j, plan)
}

/// A valid journey exercising the canonical format's corners.
pub fn valid_journey(rng: &mut ChaCha8Rng, max_sweeps: usize) -> Journey {
    let kinds = DeviceKind::ALL;
    let mut device = DeviceProfile::new(kinds[rng.random_range(0..kinds.len())]);
    device.label = text(rng);
    if rng.random_bool(0.5) {
        device.sample_period_s = Some(rng.random_range(1..=4000) as f64 / 8.0);
    }
    let start = rng.random_range(1..3_000_000_000u64);
    let band = Band::new(start, start + rng.random_range(1..1_000_000_000u64));
    let bins = rng.random_range(1..=12);
    let mut j = Journey::new(text(rng), device, band, bins);
    j.metadata = JourneyMetadata {
        country: text(rng),
        city: text(rng),
        notes: text(rng),
        collected_utc: NaiveDate::from_ymd_opt(
            rng.random_range(1990..2040),
            rng.random_range(1..=12),
            rng.random_range(1..=28),
        )
        .unwrap(),
    };
    let mut t: f64 = if rng.random_bool(0.3) {
        0.0
    } else {
        rng.random_range(-1e6..2e9)
    };
    for _ in 0..rng.random_range(0..=max_sweeps) {
        if rng.random_bool(0.8) {
            t += rng.random_range(0.0..1000.0);
        }
        let lat = match rng.random_range(0..5) {
            0 => 90.0,
            1 => -90.0,
            _ => rng.random_range(-90.0..=90.0),
        };
        let lon = match rng.random_range(0..5) {
            0 => 180.0,
            1 => -180.0,
            _ => rng.random_range(-180.0..=180.0),
        };
        let powers = (0..bins)
            .map(|_| match rng.random_range(0..8) {
                0 => MIN_POWER_DBM,
                1 => MAX_POWER_DBM,
                2 => 0.0,
                _ => power(rng, MIN_POWER_DBM as i32, MAX_POWER_DBM as i32),
            })
            .collect();
        j.sweeps.push(PowerSweep::new(t, GeoPoint::new(lat, lon), powers));
    }
    j
}

/// Sweeps scattered around a random center so that buckets of several
/// members form at the chosen radius.
pub fn clustered_journey(rng: &mut ChaCha8Rng, max_sweeps: usize, radius_m: f64) -> Journey {
    let bins = rng.random_range(1..=6);
    let mut j = Journey::new(
        "geo",
        DeviceProfile::new(DeviceKind::WhispPi),
        Band::new(470_000_000, 694_000_000),
        bins,
    );
    let lat0 = rng.random_range(-80.0..80.0);
    let lon0 = rng.random_range(-179.0..179.0);
    let spread_deg = radius_m * rng.random_range(1.0..6.0) / 111_000.0;
    let n = rng.random_range(1..=max_sweeps);
    for i in 0..n {
        let powers = (0..bins).map(|_| power(rng, -110, -40)).collect();
        let p = GeoPoint::new(
            lat0 + rng.random_range(-spread_deg..=spread_deg),
            lon0 + rng.random_range(-spread_deg..=spread_deg),
        );
        j.sweeps.push(PowerSweep::new(i as f64, p, powers));
    }
    j
}

/// Straight-line journey of `sweeps` sweeps over `length_m` meters starting
/// near Mérida, with `bins` bins over the UHF band.
pub fn long_journey(rng: &mut ChaCha8Rng, sweeps: usize, bins: usize, length_m: f64) -> Journey {
    let mut j = Journey::new(
        "bench",
        DeviceProfile::new(DeviceKind::RfExplorer),
        Band::new(470_000_000, 694_000_000),
        bins,
    );
    let deg = length_m / 111_195.0;
    for i in 0..sweeps {
        let f = i as f64 / (sweeps - 1).max(1) as f64;
        let p = GeoPoint::new(8.59 + deg * f * 0.6, -71.15 + deg * f * 0.8);
        let powers = (0..bins).map(|_| power(rng, -110, -50)).collect();
        j.sweeps.push(PowerSweep::new(i as f64 * 0.5, p, powers));
    }
    j
}

// ------------------------------------------------------------------ oracles

/// Bins whose center lies in `[lo, hi)`, decided in exact integer arithmetic:
/// `lo <= start + (2i+1)·span/(2·bins) < hi`.
pub fn oracle_members(band: Band, bins: usize, lo: u64, hi: u64) -> Vec<usize> {
    let (s, span, n) = (band.start_hz as i128, band.span_hz() as i128, bins as i128);
    (0..bins)
        .filter(|&i| {
            let c2n = 2 * n * s + (2 * i as i128 + 1) * span;
            c2n >= 2 * n * lo as i128 && c2n < 2 * n * hi as i128
        })
        .collect()
}

/// Per sweep, per channel power; `None` when some channel has no bins.
pub fn oracle_channel_powers(j: &Journey, plan: &ChannelPlan) -> Option<Vec<Vec<f64>>> {
    let members: Vec<Vec<usize>> = plan
        .channels
        .iter()
        .map(|c| oracle_members(j.band, j.bin_count, c.start_hz, c.stop_hz))
        .collect();
    if members.iter().any(Vec::is_empty) {
        return None;
    }
    Some(
        j.sweeps
            .iter()
            .map(|s| {
                members
                    .iter()
                    .map(|m| {
                        let mut best = s.powers[m[0]];
                        for &b in m {
                            if s.powers[b] > best {
                                best = s.powers[b];
                            }
                        }
                        best
                    })
                    .collect()
            })
            .collect(),
    )
}

pub fn oracle_occupation(rows: &[Vec<f64>], threshold: f64) -> Vec<f64> {
    let channels = rows[0].len();
    (0..channels)
        .map(|c| {
            let hits = rows.iter().filter(|r| r[c] >= threshold).count();
            hits as f64 / rows.len() as f64
        })
        .collect()
}

/// Scans every observed power as a candidate threshold and keeps the largest
/// one leaving some channel fully occupied.
pub fn oracle_auto_threshold(rows: &[Vec<f64>]) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for row in rows {
        for &t in row {
            if t > best && oracle_occupation(rows, t).contains(&1.0) {
                best = t;
            }
        }
    }
    best
}

pub fn oracle_ratio(occupation: &[f64]) -> f64 {
    let free = occupation.iter().filter(|&&o| o < 0.2).count();
    free as f64 / occupation.len() as f64
}

pub fn oracle_haversine(a: GeoPoint, b: GeoPoint) -> f64 {
    let r = 6_371_000.0_f64;
    let (p1, p2) = (a.lat.to_radians(), b.lat.to_radians());
    let dp = p2 - p1;
    let dl = (b.lon - a.lon).to_radians();
    let h = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * r * h.sqrt().min(1.0).asin()
}

/// Plain greedy covering: each sweep scans all references in creation
/// order and joins the first within `radius_m`. Returns the member lists.
pub fn oracle_greedy(points: &[GeoPoint], radius_m: f64) -> Vec<Vec<usize>> {
    let mut buckets: Vec<Vec<usize>> = Vec::new();
    'next: for (i, &p) in points.iter().enumerate() {
        for b in buckets.iter_mut() {
            if oracle_haversine(points[b[0]], p) <= radius_m {
                b.push(i);
                continue 'next;
            }
        }
        buckets.push(vec![i]);
    }
    buckets
}

fn cross(o: GeoPoint, a: GeoPoint, b: GeoPoint) -> f64 {
    (a.lat - o.lat) * (b.lon - o.lon) - (a.lon - o.lon) * (b.lat - o.lat)
}

fn on_edge(p: GeoPoint, a: GeoPoint, b: GeoPoint) -> bool {
    cross(a, b, p) == 0.0
        && p.lat >= a.lat.min(b.lat)
        && p.lat <= a.lat.max(b.lat)
        && p.lon >= a.lon.min(b.lon)
        && p.lon <= a.lon.max(b.lon)
}

/// Winding-number test, boundary inclusive. Exact for the small integer and
/// half-integer coordinates the suites use.
pub fn oracle_inside(poly: &[GeoPoint], p: GeoPoint) -> bool {
    let n = poly.len();
    let mut winding = 0i32;
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        if on_edge(p, a, b) {
            return true;
        }
        // lat plays y, lon plays x
        if a.lat <= p.lat {
            if b.lat > p.lat && cross(a, b, p) > 0.0 {
                winding += 1;
            }
        } else if b.lat <= p.lat && cross(a, b, p) < 0.0 {
            winding -= 1;
        }
    }
    winding != 0
}

/// Simple polygon on a small integer grid: a star-shaped ring of vertices
/// around a center, sorted by angle.
pub fn random_polygon(rng: &mut ChaCha8Rng) -> Vec<GeoPoint> {
    loop {
        let n = rng.random_range(3..=9);
        let (cy, cx) = (rng.random_range(-3..=3) as f64, rng.random_range(-3..=3) as f64);
        let mut pts: Vec<(f64, GeoPoint)> = (0..n)
            .map(|_| {
                let y = cy + rng.random_range(-6..=6) as f64;
                let x = cx + rng.random_range(-6..=6) as f64;
                ((y - cy).atan2(x - cx), GeoPoint::new(y, x))
            })
            .filter(|(_, p)| (p.lat, p.lon) != (cy, cx))
            .collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        pts.dedup_by(|a, b| a.0 == b.0);
        let ring: Vec<GeoPoint> = pts.into_iter().map(|(_, p)| p).collect();
        if ring.len() >= 3 && zebra_rfo::Zone::new(zebra_rfo::ZoneLabel::Custom, ring.clone()).is_ok() {
            return ring;
        }
    }
}

/// Points on the half-integer lattice around the polygon; many land on
/// edges and vertices.
pub fn lattice_journey(rng: &mut ChaCha8Rng, count: usize) -> Journey {
    let mut j = Journey::new(
        "zone",
        DeviceProfile::new(DeviceKind::Ascii32),
        Band::new(470_000_000, 694_000_000),
        1,
    );
    for i in 0..count {
        let p = GeoPoint::new(
            rng.random_range(-22..=22) as f64 / 2.0,
            rng.random_range(-22..=22) as f64 / 2.0,
        );
        j.sweeps.push(PowerSweep::new(i as f64, p, vec![-90.0]));
    }
    j
}
