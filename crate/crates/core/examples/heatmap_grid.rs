//! Grids the strongest power of one channel and of the whole band.
//!
//!     cargo run --example heatmap_grid

use zebra_rfo::{heatmap, parse_journey, ChannelPlan, ChannelSelection};

const JOURNEY: &str = include_str!("../tests/fixtures/idle_caracas.json");

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let journey = parse_journey(JOURNEY)?;
    let plan = ChannelPlan::uhf_default();

    for selection in [ChannelSelection::Channel(5), ChannelSelection::WholeBand] {
        let grid = heatmap(&journey, &plan, selection, 40.0)?;
        println!("{selection:?}: {} cells", grid.cells.len());
        for c in &grid.cells {
            println!("  row {:>2} col {:>2}  {:>6.1} dBm  ({} sweeps)", c.row, c.col, c.value_dbm, c.sample_count);
        }
    }
    // the overlay document, with per-cell corners, as served over HTTP
    let doc = heatmap(&journey, &plan, ChannelSelection::WholeBand, 40.0)?.to_json();
    println!("{}...", &doc[..doc.len().min(160)]);
    Ok(())
}
