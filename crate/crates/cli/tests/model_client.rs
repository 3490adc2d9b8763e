use std::time::Duration;

use axum::http::{HeaderMap, StatusCode};
use axum::routing::post;
use axum::{Json, Router};
use fsukit::distill::ModelClient;
use fsukit::error::ClientError;
use fsukit_cli::model_client::HttpModelClient;
use serde_json::{json, Value};

/// Fake chat-completions server on an ephemeral port.
fn spawn_server() -> String {
    let (tx, rx) = std::sync::mpsc::channel();
    std::thread::spawn(move || {
        let rt = tokio::runtime::Runtime::new().unwrap();
        rt.block_on(async move {
            let app = Router::new()
                .route(
                    "/v1/chat/completions",
                    post(|headers: HeaderMap, Json(body): Json<Value>| async move {
                        let auth = headers.get("authorization").and_then(|v| v.to_str().ok()).unwrap_or("").to_string();
                        let image = body.pointer("/messages/0/content/0/image_url/url").and_then(Value::as_str).unwrap_or("").to_string();
                        let prompt_len = body.pointer("/messages/0/content/1/text").and_then(Value::as_str).map_or(0, str::len);
                        let text = format!("<caption>{} saw {image} ({auth}, {prompt_len})</caption>", body["model"].as_str().unwrap_or(""));
                        Json(json!({"choices": [{"message": {"role": "assistant", "content": text}}]}))
                    }),
                )
                .route("/busy", post(|| async { (StatusCode::SERVICE_UNAVAILABLE, "try later") }))
                .route("/slow", post(|| async {
                    tokio::time::sleep(Duration::from_secs(3)).await;
                    "late"
                }))
                .route("/junk", post(|| async { Json(json!({"choices": []})) }));
            let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
            tx.send(listener.local_addr().unwrap()).unwrap();
            axum::serve(listener, app).await.unwrap();
        });
    });
    format!("http://{}", rx.recv().unwrap())
}

#[test]
fn chat_completions_round_trip_and_errors() {
    let base = spawn_server();
    let c = HttpModelClient::new(format!("{base}/v1/chat/completions"), "sign-vlm", Some("tok".into()), Duration::from_secs(5)).unwrap();
    let reply = c.generate("https://example.org/a.jpg", "describe").unwrap();
    assert_eq!(reply, "<caption>sign-vlm saw https://example.org/a.jpg (Bearer tok, 8)</caption>");
    assert_eq!(c.endpoint(), format!("{base}/v1/chat/completions"));

    let dir = tempfile::tempdir().unwrap();
    let img = dir.path().join("x.png");
    std::fs::write(&img, [1u8, 2, 3]).unwrap();
    let reply = c.generate(img.to_str().unwrap(), "p").unwrap();
    assert!(reply.contains("saw data:image/png;base64,AQID"), "{reply}");

    let busy = HttpModelClient::new(format!("{base}/busy"), "m", None, Duration::from_secs(5)).unwrap();
    let err = busy.generate("a", "p").unwrap_err();
    assert_eq!(err, ClientError::Status { status: 503, body: "try later".into() });
    assert!(err.is_retryable());

    let slow = HttpModelClient::new(format!("{base}/slow"), "m", None, Duration::from_millis(300)).unwrap();
    assert_eq!(slow.generate("a", "p").unwrap_err(), ClientError::Timeout);

    let junk = HttpModelClient::new(format!("{base}/junk"), "m", None, Duration::from_secs(5)).unwrap();
    assert!(matches!(junk.generate("a", "p"), Err(ClientError::BadReply(_))));
}

#[test]
fn distill_against_a_served_model() {
    let base = spawn_server();
    let dir = tempfile::tempdir().unwrap();
    let ann = dir.path().join("a.jsonl");
    let records: Vec<_> = fsukit_testkit::synth::annotations(5, 1)
        .iter()
        .map(|a| a.to_record(fsukit::schema::Schema::builtin()))
        .collect();
    fsukit::jsonl::write_jsonl(&ann, &records).unwrap();
    let out = dir.path().join("out");
    let o = std::process::Command::new(env!("CARGO_BIN_EXE_fsukit"))
        .args(["distill", "--iterations", "1", "--model", "m0"])
        .args(["--annotations", ann.to_str().unwrap(), "--out-dir", out.to_str().unwrap()])
        .args(["--endpoint", &format!("{base}/v1/chat/completions")])
        .env("FSUKIT_MODEL_TOKEN", "abc")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let data = std::fs::read_to_string(out.join("dataset_t0.jsonl")).unwrap();
    assert_eq!(data.lines().count(), 10);
    assert!(data.contains("m0 saw img_0000.jpg (Bearer abc,"));
    let state: Value = serde_json::from_str(&std::fs::read_to_string(out.join("state.json")).unwrap()).unwrap();
    assert_eq!(state["history"][0]["model_endpoint"], format!("{base}/v1/chat/completions"));
}
