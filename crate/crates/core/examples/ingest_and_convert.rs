//! Converts a raw RF Explorer capture to the canonical journey format,
//! replaces its positions with a GPS track and prints the document.
//!
//!     cargo run --example ingest_and_convert

use zebra_rfo::{detect_format, journey_length_km, merge_location_track, parse_raw, serialize_journey};
use zebra_rfo::{LocationTrack, RawCapture};

const CAPTURE: &str = include_str!("../tests/fixtures/rfexplorer_merida.txt");

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let kind = detect_format(CAPTURE.as_bytes()).ok_or("unknown capture header")?;
    let journey = parse_raw(&RawCapture::new(kind, CAPTURE))?;
    println!(
        "{kind}: {} sweeps x {} bins over {}-{} Hz, {:.3} km",
        journey.len(),
        journey.bin_count,
        journey.band.start_hz,
        journey.band.stop_hz,
        journey_length_km(&journey)
    );

    // a phone logged the route separately; its fixes replace the analyser's
    let track = LocationTrack::parse(
        "1401699999,8.5910,-71.1444\n\
         1401700004,8.5930,-71.1428\n",
    )?;
    let tracked = merge_location_track(&journey, &track)?;
    println!("with track: {:.3} km", journey_length_km(&tracked));
    println!("{}", serialize_journey(&tracked)?);
    Ok(())
}
