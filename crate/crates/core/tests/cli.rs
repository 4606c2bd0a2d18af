mod support;

use std::io::Write;
use std::process::{Command, Output, Stdio};

use support::{fixture, fixture_text};
use zebra_rfo::geo::{condense, rezone, Aggregation, CondensationConfig};
use zebra_rfo::ingest::CaptureHint;
use zebra_rfo::occupancy::{heatmap, occupation_report, ChannelSelection, WhitespaceSummary};
use zebra_rfo::{parse_journey, parse_raw, serialize_journey, ChannelPlan, DeviceKind, RawCapture, Zone, ZoneLabel};

fn zebra(args: &[&str], stdin: &[u8]) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_zebra"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin).unwrap();
    child.wait_with_output().unwrap()
}

fn ok(out: &Output) -> String {
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn path(name: &str) -> String {
    fixture(name).to_string_lossy().into_owned()
}

#[test]
fn convert_writes_the_library_document() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("out.json");
    let out = zebra(
        &["convert", "--kind", "rfexplorer", &path("rfexplorer_merida.txt"), "-o", out_path.to_str().unwrap()],
        b"",
    );
    assert_eq!(ok(&out), "");
    let expected = parse_raw(&RawCapture::new(
        DeviceKind::RfExplorer,
        std::fs::read(fixture("rfexplorer_merida.txt")).unwrap(),
    ))
    .unwrap();
    assert_eq!(std::fs::read_to_string(out_path).unwrap(), serialize_journey(&expected).unwrap());
}

#[test]
fn convert_uses_hints_for_headerless_captures() {
    let out = zebra(
        &["convert", "--kind", "whisppi", "--band", "470e6:502e6", "--bins", "4"],
        fixture_text("whisppi_headerless.txt").as_bytes(),
    );
    assert_eq!(ok(&out), fixture_text("whisppi_headerless.golden.json"));
    let hint = CaptureHint::default();
    assert!(parse_raw(&RawCapture::new(DeviceKind::WhispPi, "#ZRFO-RFE,1\n").with_hint(hint)).is_err());
}

#[test]
fn whitespace_prints_ratio_and_threshold() {
    let idle = path("idle_caracas.json");
    let out = ok(&zebra(&["whitespace", "--plan", "470e6:694e6:8e6", "--threshold", "-100", &idle], b""));
    assert_eq!(out, "whitespace_ratio 1.000\nthreshold_dbm -100.0\nchannels 28\n");

    let out = ok(&zebra(&["whitespace", "--plan", "470e6:694e6:8e6", &idle], b""));
    let j = parse_journey(&fixture_text("idle_caracas.json")).unwrap();
    let report = occupation_report(&j, &ChannelPlan::uhf_default(), None).unwrap();
    assert_eq!(out, WhitespaceSummary::from(&report).to_string());
    assert!(out.contains("(auto)"), "{out}");
}

#[test]
fn analysis_output_is_the_serialized_library_result() {
    let idle = path("idle_caracas.json");
    let j = parse_journey(&fixture_text("idle_caracas.json")).unwrap();
    let plan = ChannelPlan::new(470_000_000, 550_000_000, 8_000_000).unwrap();

    let out = ok(&zebra(&["occupation", "--plan", "470e6:550e6:8e6", "--threshold", "-107.5", &idle], b""));
    assert_eq!(out, occupation_report(&j, &plan, Some(-107.5)).unwrap().to_json());

    let out = ok(&zebra(&["heatmap", "--plan", "470e6:550e6:8e6", "--channel", "3", "--cell", "25", &idle], b""));
    assert_eq!(out, heatmap(&j, &plan, ChannelSelection::Channel(3), 25.0).unwrap().to_json());
}

#[test]
fn pipeline_matches_library_composition() {
    let raw = std::fs::read(fixture("rfexplorer_merida.txt")).unwrap();
    let zone_path = path("merida_zone.txt");
    let converted = ok(&zebra(&["convert"], &raw));
    let condensed = ok(&zebra(&["condense", "--radius", "40", "--aggregation", "mean"], converted.as_bytes()));
    let zoned = ok(&zebra(&["rezone", "--zone", &zone_path, "--label", "urban"], condensed.as_bytes()));
    let whitespace = ok(&zebra(&["whitespace", "--plan", "470e6:694e6:28e6"], zoned.as_bytes()));

    let j = parse_raw(&RawCapture::new(DeviceKind::RfExplorer, raw)).unwrap();
    let c = condense(&j, &CondensationConfig::new(40.0, Aggregation::Mean).unwrap());
    let vertices = zebra_rfo::cli::parse_vertices(&fixture_text("merida_zone.txt")).unwrap();
    let z = rezone(&c, &Zone::new(ZoneLabel::Urban, vertices).unwrap());
    assert!(c.sweeps.len() < j.sweeps.len());
    assert!(!z.sweeps.is_empty() && z.sweeps.len() < c.sweeps.len());
    assert_eq!(condensed, serialize_journey(&c).unwrap());
    assert_eq!(zoned, serialize_journey(&z).unwrap());
    let coarse = ChannelPlan::new(470_000_000, 694_000_000, 28_000_000).unwrap();
    let report = occupation_report(&z, &coarse, None).unwrap();
    assert_eq!(whitespace, WhitespaceSummary::from(&report).to_string());
}

#[test]
fn exit_codes() {
    let idle = path("idle_caracas.json");
    let code = |args: &[&str], stdin: &[u8]| zebra(args, stdin).status.code();

    let out = zebra(&["condense", "--radius", "-5", &idle], b"");
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("radius"));

    assert_eq!(code(&["whitespace", "--plan", "470e6:694e6", &idle], b""), Some(2));
    assert_eq!(code(&["validate", "--nope"], b""), Some(2));
    assert_eq!(code(&["validate"], b"{}"), Some(4));
    assert_eq!(code(&["convert", "--kind", "ascii32"], b"#ZRFO-A32,1,1,2,32\n1,2,3,x\n"), Some(4));
    assert_eq!(code(&["validate", "/no/such/file.json"], b""), Some(5));

    let bad = fixture_text("idle_caracas.json").replacen("\"lat\":10.48", "\"lat\":100.48", 1);
    let out = zebra(&["validate"], bad.as_bytes());
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stdout).contains("LatitudeOutOfRange"));

    // plan reaching past the journey band
    assert_eq!(code(&["occupation", "--plan", "400e6:694e6:8e6", &idle], b""), Some(3));
    assert_eq!(code(&["validate", &idle], b""), Some(0));
}

#[test]
fn summarize_is_reproducible() {
    let idle = path("idle_caracas.json");
    let args = ["summarize", "--region-id", "ve", "--cell", "100", "--generated-utc", "1700000000", &idle];
    let a = ok(&zebra(&args, b""));
    assert_eq!(a, ok(&zebra(&args, b"")));
    let j = parse_journey(&fixture_text("idle_caracas.json")).unwrap();
    let s = zebra_rfo::federation::summarize_region("ve", &[j], &ChannelPlan::uhf_default(), 100.0, 1_700_000_000).unwrap();
    assert_eq!(a, s.to_json());
}

#[test]
fn push_without_regulator_is_an_io_failure() {
    let idle = path("idle_caracas.json");
    let summary = ok(&zebra(&["summarize", "--cell", "100", "--generated-utc", "0", &idle], b""));
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let endpoint = format!("http://{}", listener.local_addr().unwrap());
    drop(listener);
    assert_eq!(zebra(&["push", "--endpoint", &endpoint], summary.as_bytes()).status.code(), Some(5));
}
