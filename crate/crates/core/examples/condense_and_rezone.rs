//! Spaces out a dense journey by radius condensation, then keeps the part
//! inside an urban polygon.
//!
//!     cargo run --example condense_and_rezone

use zebra_rfo::geo::spacing_stats;
use zebra_rfo::{condense, parse_journey, rezone, Aggregation, CondensationConfig, GeoPoint, Zone, ZoneLabel};

const JOURNEY: &str = include_str!("../tests/fixtures/idle_caracas.json");

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let journey = parse_journey(JOURNEY)?;
    let before = spacing_stats(&journey)?;
    println!("{} sweeps, spacing mean {:.1} m, variance {:.1} m^2", journey.len(), before.mean_m, before.variance_m2);

    for radius in [20.0, 60.0, 150.0] {
        let cfg = CondensationConfig::new(radius, Aggregation::Max)?;
        let c = condense(&journey, &cfg);
        match spacing_stats(&c) {
            Ok(s) => println!("R={radius:>5} m: {} sweeps, spacing mean {:.1} m, variance {:.1} m^2", c.len(), s.mean_m, s.variance_m2),
            Err(_) => println!("R={radius:>5} m: {} sweep", c.len()),
        }
    }

    let downtown = Zone::new(
        ZoneLabel::Urban,
        vec![
            GeoPoint::new(10.479, -66.901),
            GeoPoint::new(10.479, -66.8985),
            GeoPoint::new(10.4815, -66.8985),
            GeoPoint::new(10.4815, -66.901),
        ],
    )?;
    let urban = rezone(&journey, &downtown);
    println!("rezoned to {}: {} of {} sweeps, notes {:?}", downtown.label(), urban.len(), journey.len(), urban.metadata.notes);
    Ok(())
}
