//! Command-line front end.
//!
//! Every command reads one input (a path, or standard input when the path is
//! omitted or `-`), calls one library operation and writes the serialized
//! result to `-o PATH` or standard output. Diagnostics go to standard error.
//!
//! | exit | meaning |
//! |---|---|
//! | 0 | success |
//! | 2 | usage error, including out-of-range flag values |
//! | 3 | validation failure (invalid journey, analysis precondition, rejected summary) |
//! | 4 | format failure (unparseable input) |
//! | 5 | I/O failure (files, sockets, transport) |

use std::ffi::OsString;
use std::fs;
use std::io::{Read, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use crate::canonical::{parse_journey, serialize_journey};
use crate::error::{AnalysisError, DocumentError, IngestError};
use crate::federation::{self, parse_registry, FederationError, PushError, RegionSummary, Regulator};
use crate::geo::{condense, rezone, Aggregation, CondensationConfig};
use crate::ingest::{detect_format, merge_location_track, parse_raw, CaptureHint, LocationTrack, RawCapture};
use crate::model::{Band, BoundingBox, DeviceKind, GeoPoint, Journey, Zone, ZoneLabel};
use crate::occupancy::{heatmap, occupation_report, ChannelPlan, ChannelSelection, WhitespaceSummary};
use crate::repository::http::parse_hz;
use crate::repository::{RegionConfig, Repository};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_FORMAT: i32 = 4;
pub const EXIT_IO: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "zebra", version, about = "Regional open spectrum repository tools")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Io {
    /// Input file; standard input when omitted or `-`.
    pub input: Option<PathBuf>,
    /// Output file; standard output when omitted.
    #[arg(short = 'o', long = "output")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlanArg {
    /// Channel plan as `start:stop:width` in Hz, e.g. `470e6:694e6:8e6`.
    #[arg(long, value_parser = parse_plan)]
    pub plan: Option<ChannelPlan>,
}

impl PlanArg {
    fn get(&self) -> ChannelPlan {
        self.plan.clone().unwrap_or_else(ChannelPlan::uhf_default)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convert a raw capture (or canonical document) to a canonical journey.
    Convert {
        /// Device kind; detected from the capture header when omitted.
        #[arg(long, value_parser = parse_kind)]
        kind: Option<DeviceKind>,
        /// Band `start:stop` in Hz for captures whose header lacks it.
        #[arg(long, value_parser = parse_band)]
        band: Option<Band>,
        /// Bin count for captures whose header lacks it.
        #[arg(long)]
        bins: Option<usize>,
        /// Location track (`t,lat,lon` lines) replacing the capture's positions.
        #[arg(long)]
        track: Option<PathBuf>,
        #[command(flatten)]
        io: Io,
    },
    /// Check a canonical journey; prints its violations.
    Validate {
        #[command(flatten)]
        io: Io,
    },
    /// Merge sweeps closer than the radius.
    Condense {
        #[arg(long, allow_negative_numbers = true)]
        radius: f64,
        #[arg(long, default_value = "max", value_parser = parse_aggregation)]
        aggregation: Aggregation,
        #[command(flatten)]
        io: Io,
    },
    /// Keep only sweeps inside a polygon.
    Rezone {
        /// Polygon vertices, one `lat,lon` per line.
        #[arg(long)]
        zone: PathBuf,
        #[arg(long, default_value = "custom", value_parser = parse_label)]
        label: ZoneLabel,
        #[command(flatten)]
        io: Io,
    },
    /// Per-channel occupation report.
    Occupation {
        #[command(flatten)]
        plan: PlanArg,
        /// Detection threshold in dBm; automatic when omitted.
        #[arg(long, allow_negative_numbers = true)]
        threshold: Option<f64>,
        #[command(flatten)]
        io: Io,
    },
    /// White-space ratio and the threshold it was computed at.
    Whitespace {
        #[command(flatten)]
        plan: PlanArg,
        #[arg(long, allow_negative_numbers = true)]
        threshold: Option<f64>,
        #[command(flatten)]
        io: Io,
    },
    /// Gridded strongest-power map.
    Heatmap {
        #[command(flatten)]
        plan: PlanArg,
        /// Channel index; the whole band when omitted.
        #[arg(long)]
        channel: Option<usize>,
        /// Cell edge in meters.
        #[arg(long, allow_negative_numbers = true)]
        cell: f64,
        #[command(flatten)]
        io: Io,
    },
    /// Run the repository service, or the regulator with `--regulator`.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
        /// Store directory of the repository service.
        #[arg(long, default_value = "zebra-store")]
        store: PathBuf,
        #[arg(long, default_value = "default")]
        region_id: String,
        /// Region bounding box `min_lat,min_lon,max_lat,max_lon`.
        #[arg(long, value_parser = parse_bbox, allow_hyphen_values = true)]
        bbox: Option<BoundingBox>,
        #[command(flatten)]
        plan: PlanArg,
        #[arg(long, requires = "registry")]
        regulator: bool,
        /// Incumbent registry file of the regulator.
        #[arg(long)]
        registry: Option<PathBuf>,
    },
    /// Pool journeys into a region summary for the regulator.
    Summarize {
        #[arg(long, default_value = "default")]
        region_id: String,
        #[command(flatten)]
        plan: PlanArg,
        #[arg(long, allow_negative_numbers = true)]
        cell: f64,
        /// Summary timestamp in Unix seconds; the current time when omitted.
        #[arg(long)]
        generated_utc: Option<i64>,
        /// Canonical journey files.
        #[arg(required = true)]
        journeys: Vec<PathBuf>,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
    /// Send a region summary to a regulator and print its report.
    Push {
        /// Regulator base URL, e.g. `http://127.0.0.1:8081`.
        #[arg(long)]
        endpoint: String,
        #[command(flatten)]
        io: Io,
    },
}

/// A failed command with its exit status.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }

    fn usage(message: impl Into<String>) -> Self {
        Failure::new(EXIT_USAGE, message)
    }

    fn io(path: &Path, e: std::io::Error) -> Self {
        Failure::new(EXIT_IO, format!("{}: {e}", path.display()))
    }
}

impl From<DocumentError> for Failure {
    fn from(e: DocumentError) -> Self {
        let code = match e {
            DocumentError::Invalid(_) => EXIT_VALIDATION,
            _ => EXIT_FORMAT,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<IngestError> for Failure {
    fn from(e: IngestError) -> Self {
        let code = match e {
            IngestError::Invalid(_) | IngestError::OutOfTrack { .. } => EXIT_VALIDATION,
            _ => EXIT_FORMAT,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<AnalysisError> for Failure {
    fn from(e: AnalysisError) -> Self {
        let code = match e {
            AnalysisError::DegenerateBand(_)
            | AnalysisError::InvalidCellSize(_)
            | AnalysisError::UnorderedThresholds => EXIT_USAGE,
            _ => EXIT_VALIDATION,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<FederationError> for Failure {
    fn from(e: FederationError) -> Self {
        match e {
            FederationError::Analysis(a) => a.into(),
            FederationError::Malformed(_) | FederationError::Registry { .. } => {
                Failure::new(EXIT_FORMAT, e.to_string())
            }
            _ => Failure::new(EXIT_VALIDATION, e.to_string()),
        }
    }
}

impl From<PushError> for Failure {
    fn from(e: PushError) -> Self {
        let code = match e {
            PushError::Rejected { .. } => EXIT_VALIDATION,
            PushError::Protocol(_) => EXIT_FORMAT,
            PushError::Transport(_) => EXIT_IO,
        };
        Failure::new(code, e.to_string())
    }
}

fn parse_plan(s: &str) -> Result<ChannelPlan, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, w] = parts[..] else {
        return Err(format!("expected start:stop:width, got {s:?}"));
    };
    let hz = |t: &str| parse_hz(t).ok_or_else(|| format!("{t:?} is not a whole number of Hz"));
    ChannelPlan::new(hz(a)?, hz(b)?, hz(w)?).map_err(|e| e.to_string())
}

fn parse_band(s: &str) -> Result<Band, String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("expected start:stop, got {s:?}"))?;
    let hz = |t: &str| parse_hz(t).ok_or_else(|| format!("{t:?} is not a whole number of Hz"));
    Ok(Band::new(hz(a)?, hz(b)?))
}

fn parse_bbox(s: &str) -> Result<BoundingBox, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| format!("{t:?} is not a coordinate")))
        .collect::<Result<_, _>>()?;
    let [a, b, c, d] = v[..] else {
        return Err(format!("expected min_lat,min_lon,max_lat,max_lon, got {s:?}"));
    };
    BoundingBox::new(a, b, c, d).map_err(|e| e.to_string())
}

fn parse_kind(s: &str) -> Result<DeviceKind, String> {
    s.parse().map_err(|e: crate::error::ModelError| e.to_string())
}

fn parse_label(s: &str) -> Result<ZoneLabel, String> {
    s.parse().map_err(|e: crate::error::ModelError| e.to_string())
}

fn parse_aggregation(s: &str) -> Result<Aggregation, String> {
    s.parse()
}

/// Reads `lat,lon` lines; blank lines and `#` comments are skipped.
pub fn parse_vertices(text: &str) -> Result<Vec<GeoPoint>, String> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (lat, lon) = line
            .split_once(',')
            .ok_or_else(|| format!("line {}: expected lat,lon", i + 1))?;
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| format!("line {}: {t:?} is not a coordinate", i + 1))
        };
        out.push(GeoPoint::new(num(lat)?, num(lon)?));
    }
    Ok(out)
}

/// Standard streams, replaceable for testing.
pub struct Streams<'a> {
    pub stdin: &'a mut dyn Read,
    pub stdout: &'a mut dyn Write,
    pub stderr: &'a mut dyn Write,
}

impl Streams<'_> {
    fn read_input(&mut self, path: Option<&Path>) -> Result<Vec<u8>, Failure> {
        match path {
            Some(p) if p != Path::new("-") => fs::read(p).map_err(|e| Failure::io(p, e)),
            _ => {
                let mut buf = Vec::new();
                self.stdin
                    .read_to_end(&mut buf)
                    .map_err(|e| Failure::io(Path::new("<stdin>"), e))?;
                Ok(buf)
            }
        }
    }

    fn read_text(&mut self, path: Option<&Path>) -> Result<String, Failure> {
        String::from_utf8(self.read_input(path)?)
            .map_err(|_| Failure::new(EXIT_FORMAT, "input is not UTF-8"))
    }

    fn read_journey(&mut self, path: Option<&Path>) -> Result<Journey, Failure> {
        Ok(parse_journey(&self.read_text(path)?)?)
    }

    fn write_output(&mut self, path: Option<&Path>, data: &str) -> Result<(), Failure> {
        match path {
            Some(p) => fs::write(p, data).map_err(|e| Failure::io(p, e)),
            None => self
                .stdout
                .write_all(data.as_bytes())
                .and_then(|_| self.stdout.flush())
                .map_err(|e| Failure::io(Path::new("<stdout>"), e)),
        }
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::io(path, e))
}

fn journey_document(j: &Journey) -> Result<String, Failure> {
    Ok(serialize_journey(j)?)
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit status.
pub fn run<I, T>(args: I, streams: &mut Streams<'_>) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() {
                &mut *streams.stderr
            } else {
                &mut *streams.stdout
            };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    match execute(cli.command, streams) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(streams.stderr, "zebra: {}", f.message);
            f.code
        }
    }
}

/// Runs a parsed command.
pub fn execute(command: Command, s: &mut Streams<'_>) -> Result<(), Failure> {
    match command {
        Command::Convert {
            kind,
            band,
            bins,
            track,
            io,
        } => {
            let payload = s.read_input(io.input.as_deref())?;
            let kind = kind
                .filter(|k| *k != DeviceKind::Generic)
                .or_else(|| detect_format(&payload));
            let mut journey = match kind {
                Some(kind) => {
                    let hint = CaptureHint {
                        band,
                        bin_count: bins,
                    };
                    parse_raw(&RawCapture::new(kind, payload).with_hint(hint))?
                }
                None => {
                    let text = String::from_utf8(payload)
                        .map_err(|_| Failure::new(EXIT_FORMAT, "input is neither a capture nor UTF-8"))?;
                    parse_journey(&text)?
                }
            };
            if let Some(path) = track {
                let track = LocationTrack::parse(&read_file(&path)?)?;
                journey = merge_location_track(&journey, &track)?;
            }
            s.write_output(io.output.as_deref(), &journey_document(&journey)?)
        }
        Command::Validate { io } => {
            let text = s.read_text(io.input.as_deref())?;
            match parse_journey(&text) {
                Ok(j) => s.write_output(io.output.as_deref(), &format!("ok {} sweeps\n", j.len())),
                Err(DocumentError::Invalid(violations)) => {
                    let report: String = violations.iter().map(|v| format!("{v}\n")).collect();
                    s.write_output(io.output.as_deref(), &report)?;
                    Err(Failure::new(
                        EXIT_VALIDATION,
                        format!("{} violation(s)", violations.len()),
                    ))
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::Condense {
            radius,
            aggregation,
            io,
        } => {
            let cfg = CondensationConfig::new(radius, aggregation).map_err(|e| Failure::usage(e.to_string()))?;
            let j = s.read_journey(io.input.as_deref())?;
            s.write_output(io.output.as_deref(), &journey_document(&condense(&j, &cfg))?)
        }
        Command::Rezone { zone, label, io } => {
            let vertices = parse_vertices(&read_file(&zone)?)
                .map_err(|e| Failure::new(EXIT_FORMAT, format!("{}: {e}", zone.display())))?;
            let zone = Zone::new(label, vertices).map_err(|e| Failure::new(EXIT_VALIDATION, e.to_string()))?;
            let j = s.read_journey(io.input.as_deref())?;
            s.write_output(io.output.as_deref(), &journey_document(&rezone(&j, &zone))?)
        }
        Command::Occupation {
            plan,
            threshold,
            io,
        } => {
            let j = s.read_journey(io.input.as_deref())?;
            let report = occupation_report(&j, &plan.get(), threshold)?;
            s.write_output(io.output.as_deref(), &report.to_json())
        }
        Command::Whitespace {
            plan,
            threshold,
            io,
        } => {
            let j = s.read_journey(io.input.as_deref())?;
            let report = occupation_report(&j, &plan.get(), threshold)?;
            s.write_output(io.output.as_deref(), &WhitespaceSummary::from(&report).to_string())
        }
        Command::Heatmap {
            plan,
            channel,
            cell,
            io,
        } => {
            let selection = channel.map_or(ChannelSelection::WholeBand, ChannelSelection::Channel);
            let j = s.read_journey(io.input.as_deref())?;
            let grid = heatmap(&j, &plan.get(), selection, cell)?;
            s.write_output(io.output.as_deref(), &grid.to_json())
        }
        Command::Serve {
            addr,
            store,
            region_id,
            bbox,
            plan,
            regulator,
            registry,
        } => {
            let router = if regulator {
                let path = registry.expect("clap enforces --registry");
                let records = parse_registry(&read_file(&path)?)?;
                log::info!("regulator with {} incumbent record(s)", records.len());
                federation::regulator::router(Arc::new(Regulator::new(records)))
            } else {
                let region = RegionConfig::new(
                    region_id.clone(),
                    region_id,
                    bbox.unwrap_or_else(BoundingBox::world),
                    plan.get(),
                )
                .map_err(|e| Failure::usage(e.to_string()))?;
                let repo = Repository::open(region, &store)
                    .map_err(|e| Failure::new(EXIT_IO, e.to_string()))?;
                log::info!("repository at {} with {} journey(s)", store.display(), repo.store().len());
                crate::repository::http::router(Arc::new(repo))
            };
            serve(addr, router)
        }
        Command::Summarize {
            region_id,
            plan,
            cell,
            generated_utc,
            journeys,
            output,
        } => {
            let parsed = journeys
                .iter()
                .map(|p| Ok(parse_journey(&read_file(p)?)?))
                .collect::<Result<Vec<_>, Failure>>()?;
            let now = generated_utc.unwrap_or_else(|| chrono::Utc::now().timestamp());
            let summary = federation::summarize_region(&region_id, &parsed, &plan.get(), cell, now)?;
            s.write_output(output.as_deref(), &summary.to_json())
        }
        Command::Push { endpoint, io } => {
            let summary = RegionSummary::from_json(&s.read_text(io.input.as_deref())?)?;
            let report = runtime()?.block_on(federation::push_summary(&summary, &endpoint))?;
            s.write_output(io.output.as_deref(), &report.to_json())
        }
    }
}

fn runtime() -> Result<tokio::runtime::Runtime, Failure> {
    tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| Failure::new(EXIT_IO, format!("runtime: {e}")))
}

fn serve(addr: SocketAddr, router: axum::Router) -> Result<(), Failure> {
    runtime()?.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .map_err(|e| Failure::new(EXIT_IO, format!("bind {addr}: {e}")))?;
        log::info!("listening on {}", listener.local_addr().unwrap_or(addr));
        axum::serve(listener, router)
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
            .map_err(|e| Failure::new(EXIT_IO, e.to_string()))
    })
}
