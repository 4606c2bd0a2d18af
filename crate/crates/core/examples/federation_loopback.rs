//! Summarizes a region, pushes the summary to an in-process regulator and
//! compares two neighbouring regions for cross-border conflicts.
//!
//!     cargo run --example federation_loopback

use std::future::IntoFuture;
use std::sync::Arc;

use zebra_rfo::federation::{detect_overlap, parse_registry, push_summary, regulator, summarize_region, Regulator};
use zebra_rfo::{parse_raw, ChannelPlan, DeviceKind, GeoPoint, RawCapture};

const CAPTURE: &str = include_str!("../tests/fixtures/rfexplorer_merida.txt");
const REGISTRY: &str = include_str!("../tests/fixtures/registry.txt");

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let journey = parse_raw(&RawCapture::new(DeviceKind::RfExplorer, CAPTURE))?;
    let plan = ChannelPlan::new(470_000_000, 694_000_000, 28_000_000)?;
    let summary = summarize_region("ve-merida", std::slice::from_ref(&journey), &plan, 30.0, 1_700_000_000)?;
    println!(
        "summary: {} cells, threshold {:.1} dBm, digest {}",
        summary.cells.len(),
        summary.threshold_dbm,
        &summary.digest()[..16]
    );

    let regulator_state = Arc::new(Regulator::new(parse_registry(REGISTRY)?));
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await?;
    let endpoint = format!("http://{}", listener.local_addr()?);
    tokio::spawn(axum::serve(listener, regulator::router(regulator_state.clone())).into_future());

    let report = push_summary(&summary, &endpoint).await?;
    for f in &report.flags {
        println!("  cell ({}, {}) channel {}: {:?} at {:.2}", f.row, f.col, f.channel, f.kind, f.evidence);
    }

    // a neighbouring region whose survey reaches into the same streets
    let mut neighbour = journey;
    for s in neighbour.sweeps.iter_mut() {
        s.location = GeoPoint::new(s.location.lat + 0.0002, s.location.lon + 0.0001);
    }
    let other = summarize_region("co-cucuta", &[neighbour], &plan, 30.0, 1_700_000_000)?;
    let conflicts = detect_overlap(&summary, &other)?;
    println!("{} cross-border conflict(s)", conflicts.len());
    for c in conflicts.iter().take(5) {
        println!("  channel {} over {:?}", c.channel, c.extent);
    }
    Ok(())
}
