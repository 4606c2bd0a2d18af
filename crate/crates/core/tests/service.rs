mod support;

use std::sync::Arc;

use serde_json::Value;
use support::{fixture, fixture_text};
use zebra_rfo::repository::http::router;
use zebra_rfo::repository::{PlanParams, RegionConfig, Repository};
use zebra_rfo::{parse_journey, serialize_journey};

struct Server {
    base: String,
    repo: Arc<Repository>,
    _dir: tempfile::TempDir,
}

async fn start() -> Server {
    let dir = tempfile::tempdir().unwrap();
    let repo = Arc::new(Repository::open(RegionConfig::default(), dir.path()).unwrap().with_clock(|| 1_400_000_000.0));
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let base = format!("http://{}", listener.local_addr().unwrap());
    let app = router(repo.clone());
    tokio::spawn(async move { axum::serve(listener, app).await.unwrap() });
    Server { base, repo, _dir: dir }
}

async fn send(req: reqwest::RequestBuilder) -> (u16, String) {
    let resp = req.send().await.unwrap();
    (resp.status().as_u16(), resp.text().await.unwrap())
}

fn id_of(body: &str) -> String {
    serde_json::from_str::<Value>(body).unwrap()["id"].as_str().unwrap().to_string()
}

#[tokio::test]
async fn upload_fetch_derive_and_analyse() {
    let s = start().await;
    let http = reqwest::Client::new();
    let doc = fixture_text("idle_caracas.json");
    let canonical = serialize_journey(&parse_journey(&doc).unwrap()).unwrap();

    let (status, body) = send(http.post(format!("{}/v1/journeys", s.base)).bearer_auth("alice").body(doc.clone())).await;
    assert_eq!(status, 201, "{body}");
    let id = id_of(&body);
    let (status, again) = send(http.post(format!("{}/v1/journeys", s.base)).bearer_auth("alice").body(doc.clone())).await;
    assert_eq!((status, id_of(&again)), (200, id.clone()));
    assert_eq!(s.repo.store().len(), 1);

    let (status, fetched) = send(http.get(format!("{}/v1/journeys/{id}", s.base))).await;
    assert_eq!(status, 200);
    assert_eq!(fetched, canonical);

    let (status, body) = send(
        http.post(format!("{}/v1/journeys/{id}/condense", s.base)).body(r#"{"radius_m":60,"aggregation":"max"}"#),
    )
    .await;
    assert_eq!(status, 201, "{body}");
    let child = id_of(&body);
    let zone = r#"{"label":"urban","vertices":[[10.479,-66.901],[10.479,-66.8985],[10.4815,-66.8985],[10.4815,-66.901]]}"#;
    let (status, body) = send(http.post(format!("{}/v1/journeys/{child}/rezone", s.base)).body(zone)).await;
    assert_eq!(status, 201, "{body}");
    let grandchild = id_of(&body);
    assert_eq!(s.repo.lineage(&grandchild).unwrap(), vec![child.clone(), id.clone()]);
    let (_, refetched) = send(http.get(format!("{}/v1/journeys/{id}", s.base))).await;
    assert_eq!(refetched, canonical, "parent unchanged");

    let (status, listing) = send(http.get(format!("{}/v1/journeys?country=Venezuela", s.base))).await;
    assert_eq!(status, 200);
    let listing: Value = serde_json::from_str(&listing).unwrap();
    assert_eq!(listing.as_array().unwrap().len(), 3);

    let (status, occ) = send(http.get(format!("{}/v1/journeys/{id}/occupation", s.base))).await;
    assert_eq!(status, 200);
    assert_eq!(occ, s.repo.occupation(&id, PlanParams::default(), None).unwrap().to_json());
    let direct = zebra_rfo::occupation_report(
        &parse_journey(&canonical).unwrap(),
        &zebra_rfo::ChannelPlan::uhf_default(),
        None,
    )
    .unwrap();
    assert_eq!(occ, direct.to_json());

    let (status, curve) = send(http.get(format!("{}/v1/journeys/{id}/occupation-curve?thresholds=-109,-107,-105", s.base))).await;
    assert_eq!(status, 200);
    assert_eq!(serde_json::from_str::<Value>(&curve).unwrap().as_array().unwrap().len(), 3);

    let (status, grid) = send(http.get(format!("{}/v1/journeys/{id}/heatmap?cell_m=50&channel=all", s.base))).await;
    assert_eq!(status, 200, "{grid}");
}

#[tokio::test]
async fn errors_carry_codes() {
    let s = start().await;
    let http = reqwest::Client::new();
    let code = |body: &str| serde_json::from_str::<Value>(body).unwrap()["error"].as_str().unwrap().to_string();

    let (status, body) = send(http.get(format!("{}/v1/journeys/nope", s.base))).await;
    assert_eq!((status, code(&body).as_str()), (404, "unknown_id"));

    let bad = fixture_text("idle_caracas.json").replacen("\"lat\":10.48", "\"lat\":100.48", 1);
    let (status, body) = send(http.post(format!("{}/v1/journeys", s.base)).body(bad)).await;
    assert_eq!((status, code(&body).as_str()), (422, "validation_failed"));

    let (status, body) = send(http.post(format!("{}/v1/journeys", s.base)).body("{oops")).await;
    assert_eq!((status, code(&body).as_str()), (400, "format_error"));

    let (status, body) = send(http.get(format!("{}/v1/journeys?bbox=1,2,3", s.base))).await;
    assert_eq!((status, code(&body).as_str()), (400, "malformed_filter"));

    let raw = std::fs::read(fixture("whisppi_headerless.txt")).unwrap();
    let (status, body) = send(
        http.post(format!("{}/v1/journeys", s.base))
            .header("X-Device-Kind", "whisppi")
            .header("X-Band-Start-Hz", "470e6")
            .header("X-Band-Stop-Hz", "502000000")
            .header("X-Bin-Count", "4")
            .body(raw),
    )
    .await;
    assert_eq!(status, 201, "{body}");
    let id = id_of(&body);
    let (status, body) = send(http.get(format!("{}/v1/journeys/{id}/occupation?width_hz=8e6&start_hz=470e6&stop_hz=502e6", s.base))).await;
    assert_eq!(status, 200, "{body}");
    let (status, body) = send(http.get(format!("{}/v1/journeys/{id}/occupation", s.base))).await;
    assert_eq!((status, code(&body).as_str()), (400, "invalid_plan"));
}
