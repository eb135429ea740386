//! Drives the JSON API in-process, the way a front end would.

use std::sync::Arc;

use axum::body::Body;
use axum::http::Request;
use http_body_util::BodyExt;
use rsos::{router, AppState, Workspace};
use rsos_core::gim::MinerConfig;
use rsos_core::transactions::Granularity;
use tower::ServiceExt;

async fn show(app: &axum::Router, req: Request<Body>) -> Result<(), Box<dyn std::error::Error>> {
    let line = format!("{} {}", req.method(), req.uri());
    let resp = app.clone().oneshot(req).await?;
    let status = resp.status();
    let body = resp.into_body().collect().await?.to_bytes();
    let pretty = serde_json::to_string_pretty(&serde_json::from_slice::<serde_json::Value>(&body)?)?;
    println!("{line} -> {status}\n{pretty}\n");
    Ok(())
}

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/example");
    let tmp = tempfile::tempdir()?;
    let ws = Workspace::new(tmp.path());
    ws.ingest(&data, Granularity::Month)?;
    ws.snapshot_mine(&MinerConfig::default())?;
    let app = router(Arc::new(AppState::open(ws, false)?));

    let measurements: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(data.join("measurements.json"))?)?;
    let request = serde_json::json!({
        "measurements": measurements,
        "gender": "female",
        "profession": "Engineer",
        "budget": 2500,
        "category": "western",
    });
    show(
        &app,
        Request::post("/api/recommend").body(Body::from(request.to_string()))?,
    )
    .await?;

    let mut bad = request.clone();
    bad["budget"] = 0.into();
    show(&app, Request::post("/api/recommend").body(Body::from(bad.to_string()))?).await?;

    let pgm = std::fs::read(data.join("images/silhouette.pgm"))?;
    show(
        &app,
        Request::post("/api/measurements/estimate?ppcm=2").body(Body::from(pgm))?,
    )
    .await?;
    show(&app, Request::get("/api/patterns").body(Body::empty())?).await?;
    Ok(())
}
