mod common;

use std::sync::Arc;

use axum::body::{to_bytes, Body};
use axum::http::Request;
use common::*;
use fsukit::jsonl::read_jsonl;
use fsukit_cli::args::GlobalOpts;
use fsukit_cli::service::{router, AppState};
use fsukit_cli::settings::Settings;
use serde_json::{json, Value};
use tower::ServiceExt;

/// Same inputs through `fsukit score` and `POST /v1/reward` give identical bytes per result.
#[tokio::test]
async fn cli_and_service_agree() {
    let dir = tempfile::tempdir().unwrap();
    let (pred, gt) = identity_benchmark(dir.path(), 9);
    // Perturb some predictions so that rewards vary.
    let mut preds: Vec<Value> = read_jsonl(&pred).unwrap();
    for (i, p) in preds.iter_mut().enumerate() {
        let text = p["response_text"].as_str().unwrap().to_string();
        p["response_text"] = json!(match i % 4 {
            0 => text,
            1 => text.replace("\"Yes\"", "\"No\""),
            2 => text.replace("<caption>", ""),
            _ => text.replacen(", \"", ", \"X", 3),
        });
    }
    write_lines(&pred, &preds);

    let sigma = ["--sigma1", "0.4", "--sigma2", "3"];
    let o = fsukit()
        .args(sigma)
        .args(["score", "--pred", pred.to_str().unwrap(), "--gt", gt.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(o.status.success());
    let cli_lines: Vec<Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();

    let gts: Vec<Value> = read_jsonl(&gt).unwrap();
    let body: Vec<Value> = preds
        .iter()
        .zip(&gts)
        .map(|(p, g)| json!({"id": p["id"], "response_text": p["response_text"], "ground_truth": g["ground_truth"]}))
        .collect();
    let opts = GlobalOpts {
        sigma1: Some(0.4),
        sigma2: Some(3.0),
        ..GlobalOpts::default()
    };
    let app = router(Arc::new(AppState::from_settings(&Settings::load(&opts).unwrap(), None)));
    let req = Request::post("/v1/reward").body(Body::from(json!(body).to_string())).unwrap();
    let resp = app.oneshot(req).await.unwrap();
    let service: Vec<Value> = serde_json::from_slice(&to_bytes(resp.into_body(), usize::MAX).await.unwrap()).unwrap();

    assert_eq!(cli_lines.len(), service.len());
    let distinct: std::collections::BTreeSet<String> = service.iter().map(|v| v["r_mixed"].to_string()).collect();
    assert!(distinct.len() > 2);
    for (c, s) in cli_lines.iter().zip(&service) {
        assert_eq!(c.to_string(), s.to_string());
    }
}
