//! Channel occupation and white-space ratio, at the automatic threshold and
//! across a threshold sweep.
//!
//!     cargo run --example occupancy_threshold

use zebra_rfo::occupancy::WhitespaceSummary;
use zebra_rfo::{occupation_curve, occupation_report, parse_journey, ChannelPlan};

const JOURNEY: &str = include_str!("../tests/fixtures/idle_caracas.json");

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let journey = parse_journey(JOURNEY)?;
    let plan = ChannelPlan::uhf_default();

    let auto = occupation_report(&journey, &plan, None)?;
    print!("{}", WhitespaceSummary::from(&auto));
    let busiest = auto.occupation.iter().position(|&o| o == 1.0).expect("one channel is full at T*");
    let ch = &plan.channels[busiest];
    println!("fully occupied at T*: channel {busiest} ({}-{} MHz)", ch.start_hz / 1_000_000, ch.stop_hz / 1_000_000);

    let thresholds: Vec<f64> = (0..=8).map(|k| -110.0 + 0.5 * k as f64).collect();
    println!("threshold  whitespace");
    for r in occupation_curve(&journey, &plan, &thresholds)? {
        println!("{:>9.1}  {:.3}", r.threshold_dbm, r.whitespace_ratio);
    }
    Ok(())
}
