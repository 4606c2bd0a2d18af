//! Regional open spectrum repository.
//!
//! Crowd-sourced, geo-tagged spectrum scans from low-cost analysers are
//! converted into one canonical journey format ([`ingest`], [`canonical`]),
//! spatially de-biased and cut to an area of interest ([`geo`]), and
//! assessed for TV white spaces ([`occupancy`]). The [`repository`] module
//! serves journeys and analyses over HTTP; [`federation`] condenses a
//! region into a summary that a regulator tier validates against its
//! incumbent registry.

pub mod api;
pub mod canonical;
pub mod cli;
pub mod error;
pub mod federation;
pub mod geo;
pub mod ingest;
pub mod model;
pub mod occupancy;
pub mod repository;

pub use canonical::{parse_journey, serialize_journey};
pub use error::{AnalysisError, DocumentError, GeoError, IngestError, ModelError};
pub use geo::{
    condense, haversine_m, journey_length_km, rezone, spacing_stats, Aggregation,
    CondensationConfig,
};
pub use ingest::{detect_format, merge_location_track, parse_raw, LocationTrack, RawCapture};
pub use model::{
    validate_journey, Band, DeviceKind, DeviceProfile, GeoPoint, Journey, JourneyMetadata,
    BoundingBox, PowerSweep, Violation, Zone, ZoneLabel,
};
pub use occupancy::{
    auto_threshold, heatmap, make_plan, occupation, occupation_curve, occupation_report,
    whitespace_ratio, ChannelPlan, ChannelSelection, HeatmapGrid, OccupationReport,
};
