//! Runs the repository service in-process, uploads a raw capture and a
//! canonical journey over HTTP, derives a condensed child and asks for its
//! occupation report.
//!
//!     cargo run --example repository_service
//!
//! To serve a persistent store instead: `zebra serve --store ./store --addr 127.0.0.1:8080`.

use std::future::IntoFuture;
use std::sync::Arc;

use zebra_rfo::repository::http::router;
use zebra_rfo::repository::{RegionConfig, Repository};

const CAPTURE: &str = include_str!("../tests/fixtures/rfexplorer_merida.txt");
const JOURNEY: &str = include_str!("../tests/fixtures/idle_caracas.json");

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join(format!("zebra-example-{}", std::process::id()));
    let repo = Arc::new(Repository::open(RegionConfig::default(), &dir)?);
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await?;
    let base = format!("http://{}", listener.local_addr()?);
    tokio::spawn(axum::serve(listener, router(repo)).into_future());
    let http = reqwest::Client::new();

    let raw = http
        .post(format!("{base}/v1/journeys"))
        .bearer_auth("field-team-7")
        .header("X-Device-Kind", "rfexplorer")
        .body(CAPTURE)
        .send()
        .await?;
    println!("raw upload: {} {}", raw.status(), raw.text().await?);

    let resp = http.post(format!("{base}/v1/journeys")).bearer_auth("field-team-7").body(JOURNEY).send().await?;
    println!("canonical upload: {}", resp.status());
    let id = serde_json::from_str::<serde_json::Value>(&resp.text().await?)?["id"]
        .as_str()
        .ok_or("no id")?
        .to_string();
    let again = http.post(format!("{base}/v1/journeys")).bearer_auth("field-team-7").body(JOURNEY).send().await?;
    println!("same payload again: {} (no new entry)", again.status());

    let child = http
        .post(format!("{base}/v1/journeys/{id}/condense"))
        .body(r#"{"radius_m":60,"aggregation":"max"}"#)
        .send()
        .await?
        .text()
        .await?;
    println!("condensed child: {child}");

    let listing = http.get(format!("{base}/v1/journeys?country=Venezuela")).send().await?.text().await?;
    println!("query: {listing}");
    let report = http.get(format!("{base}/v1/journeys/{id}/occupation")).send().await?.text().await?;
    println!("occupation: {report}");

    std::fs::remove_dir_all(&dir)?;
    Ok(())
}
