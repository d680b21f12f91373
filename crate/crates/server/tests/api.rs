use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use shortlist_core::bundled;
use shortlist_core::clock::ManualClock;
use shortlist_core::session::Session;
use shortlist_core::{SessionContext, TrialLog};
use shortlist_server::{app, AppConfig, AppState};
use tower::ServiceExt;

struct Harness {
    router: Router,
    clock: Arc<ManualClock>,
}

impl Harness {
    fn with(trial_log: Option<PathBuf>, asset_dir: Option<PathBuf>) -> Self {
        let clock = Arc::new(ManualClock::new(1_000_000));
        let state = AppState::with_clock(
            AppConfig {
                catalogs: vec![
                    bundled::baseline_catalog(),
                    bundled::visualization_catalog(),
                ],
                tasks: bundled::tasks(),
                bucket_cap: 4,
                trial_log,
                asset_dir,
            },
            clock.clone(),
        )
        .unwrap();
        Harness {
            router: app(state),
            clock,
        }
    }

    fn new() -> Self {
        Self::with(None, None)
    }

    async fn raw(&self, method: &str, uri: &str, body: Option<String>) -> (StatusCode, Vec<u8>) {
        let req = Request::builder()
            .method(method)
            .uri(uri)
            .header("content-type", "application/json")
            .body(body.map(Body::from).unwrap_or_else(Body::empty))
            .unwrap();
        let resp = self.router.clone().oneshot(req).await.unwrap();
        let status = resp.status();
        (
            status,
            resp.into_body()
                .collect()
                .await
                .unwrap()
                .to_bytes()
                .to_vec(),
        )
    }

    async fn call(&self, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
        let (status, bytes) = self.raw(method, uri, body.map(|b| b.to_string())).await;
        let value = serde_json::from_slice(&bytes).unwrap_or(Value::Null);
        (status, value)
    }

    async fn ok(&self, method: &str, uri: &str, body: Option<Value>) -> Value {
        let (status, v) = self.call(method, uri, body).await;
        assert!(status.is_success(), "{method} {uri}: {status} {v}");
        v
    }

    async fn session(&self, variant: &str) -> String {
        let (status, v) = self
            .call("POST", "/session", Some(json!({ "variant": variant })))
            .await;
        assert_eq!(status, StatusCode::CREATED);
        v["id"].as_str().unwrap().to_string()
    }
}

fn golden(variant: &str, task: &str) -> Vec<String> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join(format!("../core/tests/golden/{variant}-{task}.txt"));
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(String::from)
        .collect()
}

fn assert_error(status: StatusCode, body: &Value, want_status: StatusCode, code: &str) {
    assert_eq!(status, want_status, "{body}");
    assert_eq!(body["code"], code, "{body}");
    assert!(body["message"].as_str().is_some_and(|m| !m.is_empty()));
    assert!(body.get("details").is_some());
}

#[tokio::test]
async fn complex_task_through_all_stages() {
    let h = Harness::new();
    let variant = "baseline-A";
    let sid = h.session(variant).await;

    let trial = h
        .ok(
            "POST",
            "/trial/start",
            Some(json!({ "participant_id": "P01", "interface_variant": "typical", "task_id": "CT02", "session_id": sid })),
        )
        .await;

    h.clock.advance(4_000);
    let filtered = h
        .ok(
            "POST",
            &format!("/session/{sid}/filter"),
            Some(json!({ "selected": ["brand/Samsung/Note", "brand/Samsung/Edge"] })),
        )
        .await;
    let ids: Vec<String> = serde_json::from_value(filtered["product_ids"].clone()).unwrap();
    assert_eq!(filtered["count"], ids.len());
    assert!(!ids.is_empty());

    h.ok(
        "POST",
        &format!("/session/{sid}/advance"),
        Some(json!({ "stage": "comparative_view" })),
    )
    .await;
    let scatter = h
        .ok(
            "GET",
            &format!("/session/{sid}/scatter?x=camera&y=price"),
            None,
        )
        .await;
    assert_eq!(scatter["points"].as_array().unwrap().len(), ids.len());
    assert_eq!(scatter["preferred_corner"], "bottom_right");
    assert!(!scatter["dominant"].as_array().unwrap().is_empty());

    // Shortlist the four best cameras.
    let mut points: Vec<(String, f64)> = scatter["points"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| {
            (
                p["product_id"].as_str().unwrap().to_string(),
                p["x"].as_f64().unwrap(),
            )
        })
        .collect();
    points.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
    for (id, _) in points.iter().take(4) {
        h.clock.advance(1_500);
        let v = h
            .ok(
                "POST",
                &format!("/session/{sid}/bucket"),
                Some(json!({ "product_id": id })),
            )
            .await;
        assert_eq!(v["change"], "added");
    }
    let detail = h
        .ok("GET", &format!("/product/{}", points[0].0), None)
        .await;
    assert_eq!(detail["variant_tag"], variant);
    assert!(!detail["spec_rows"].as_array().unwrap().is_empty());

    h.ok(
        "POST",
        &format!("/session/{sid}/advance"),
        Some(json!({ "stage": "comparison" })),
    )
    .await;
    let chart = h
        .ok(
            "GET",
            &format!("/session/{sid}/comparison?attrs=camera,price"),
            None,
        )
        .await;
    let camera = chart["attributes"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["attribute"] == "camera")
        .unwrap();
    let tallest = camera["cells"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["height"].as_f64() == Some(1.0))
        .unwrap()["product_id"]
        .as_str()
        .unwrap()
        .to_string();
    let (status, body) = h
        .call(
            "POST",
            &format!("/session/{sid}/decide"),
            Some(json!({ "product_id": "baseline-A-000" })),
        )
        .await;
    assert_error(status, &body, StatusCode::CONFLICT, "NOT_IN_BUCKET");
    h.clock.advance(2_000);
    let decided = h
        .ok(
            "POST",
            &format!("/session/{sid}/decide"),
            Some(json!({ "product_id": tallest })),
        )
        .await;
    assert_eq!(decided["stage"], "decided");
    assert!(golden(variant, "CT02").contains(&tallest));

    let scored = h
        .ok(
            "POST",
            "/trial/finish",
            Some(json!({ "trial_id": trial["trial_id"] })),
        )
        .await;
    assert_eq!(scored["answer"], json!(tallest));
    assert_eq!(scored["correct"], true);
    assert_eq!(scored["duration_s"], 12);

    // The exported log rebuilds the same session.
    let (status, bytes) = h.raw("GET", &format!("/session/{sid}/events"), None).await;
    assert_eq!(status, StatusCode::OK);
    let events = Session::events_from_jsonl(std::str::from_utf8(&bytes).unwrap()).unwrap();
    let ctx = SessionContext::new(Arc::new(bundled::baseline_catalog()), 4);
    let replayed = Session::replay(&ctx, &events).unwrap();
    let view = h.ok("GET", &format!("/session/{sid}"), None).await;
    assert_eq!(view["final_choice"], json!(replayed.final_choice));
    assert_eq!(view["event_count"], json!(replayed.events.len()));
    assert_eq!(view["bucket"], json!(replayed.bucket.items()));
}

#[tokio::test]
async fn baseline_route_uses_filter_and_table() {
    let h = Harness::new();
    let sid = h.session("baseline-A").await;
    let spec =
        json!({ "clauses": { "battery": { "range": { "lo": 2000.0, "lo_inclusive": false } } } });
    let v = h
        .ok(
            "POST",
            &format!("/session/{sid}/filter"),
            Some(json!({ "spec": spec })),
        )
        .await;
    let ids: Vec<String> = serde_json::from_value(v["product_ids"].clone()).unwrap();
    assert_eq!(ids, golden("baseline-A", "ST01"));
    for id in &ids[..2] {
        h.ok(
            "POST",
            &format!("/session/{sid}/bucket"),
            Some(json!({ "product_id": id })),
        )
        .await;
    }
    let table = h
        .ok("GET", &format!("/session/{sid}/comparison-table"), None)
        .await;
    assert_eq!(table["products"].as_array().unwrap().len(), 2);
    assert!(!table["groups"].as_array().unwrap().is_empty());
    // Default chart attributes: every comparable attribute both products carry.
    h.ok(
        "POST",
        &format!("/session/{sid}/advance"),
        Some(json!({ "stage": "comparative_view" })),
    )
    .await;
    h.ok(
        "POST",
        &format!("/session/{sid}/advance"),
        Some(json!({ "stage": "comparison" })),
    )
    .await;
    let chart = h
        .ok("GET", &format!("/session/{sid}/comparison"), None)
        .await;
    assert!(chart["attributes"].as_array().unwrap().len() >= 4);
}

#[tokio::test]
async fn wheel_selection_sets_default_chart_attributes() {
    let h = Harness::new();
    let sid = h.session("visualization-B").await;
    h.ok(
        "POST",
        &format!("/session/{sid}/filter"),
        Some(json!({ "toggle": "ram" })),
    )
    .await;
    let v = h
        .ok(
            "POST",
            &format!("/session/{sid}/filter"),
            Some(json!({ "toggle": "camera/20MP+" })),
        )
        .await;
    assert_eq!(v["selected_nodes"], json!(["camera/20MP+", "ram"]));
    let first = v["product_ids"][0].as_str().unwrap().to_string();
    h.ok(
        "POST",
        &format!("/session/{sid}/bucket"),
        Some(json!({ "product_id": first })),
    )
    .await;
    let chart = h
        .ok("GET", &format!("/session/{sid}/comparison"), None)
        .await;
    let attrs: Vec<&str> = chart["attributes"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["attribute"].as_str().unwrap())
        .collect();
    assert_eq!(attrs, ["ram", "camera"]);
}

#[tokio::test]
async fn catalog_and_wheel_endpoints() {
    let h = Harness::new();
    let schema = h.ok("GET", "/catalog/schema", None).await;
    assert_eq!(schema["variant_tag"], "baseline-A");
    assert_eq!(schema["product_count"], 100);
    let other = h
        .ok("GET", "/catalog/schema?variant=visualization-B", None)
        .await;
    assert_eq!(other["variant_tag"], "visualization-B");
    let wheel = h.ok("GET", "/wheel", None).await;
    assert_eq!(wheel["node_kind"], "root");
    assert!(wheel["children"]
        .as_array()
        .unwrap()
        .iter()
        .all(|c| c["id"] != "model_line"));
    let (status, body) = h.call("GET", "/wheel?variant=nope", None).await;
    assert_error(status, &body, StatusCode::NOT_FOUND, "UNKNOWN_VARIANT");
    let b = h.ok("GET", "/product/visualization-B-019", None).await;
    assert_eq!(b["variant_tag"], "visualization-B");
    let (status, body) = h.call("GET", "/product/none", None).await;
    assert_error(status, &body, StatusCode::NOT_FOUND, "UNKNOWN_PRODUCT");
}

#[tokio::test]
async fn error_mapping() {
    let h = Harness::new();
    let (status, body) = h.call("GET", "/session/s999999", None).await;
    assert_error(status, &body, StatusCode::NOT_FOUND, "UNKNOWN_SESSION");

    let sid = h.session("baseline-A").await;
    let (status, bytes) = h
        .raw(
            "POST",
            &format!("/session/{sid}/filter"),
            Some("{not json".into()),
        )
        .await;
    let body: Value = serde_json::from_slice(&bytes).unwrap();
    assert_error(status, &body, StatusCode::BAD_REQUEST, "MALFORMED_INPUT");
    let (status, body) = h
        .call("POST", &format!("/session/{sid}/filter"), Some(json!({})))
        .await;
    assert_error(status, &body, StatusCode::BAD_REQUEST, "MALFORMED_INPUT");
    let (status, body) = h
        .call(
            "POST",
            &format!("/session/{sid}/filter"),
            Some(json!({ "toggle": "brand/Sony" })),
        )
        .await;
    assert_error(status, &body, StatusCode::BAD_REQUEST, "UNKNOWN_NODE");
    let bad_label = json!({ "spec": { "clauses": { "brand": { "values": ["Sony"] } } } });
    let (status, body) = h
        .call("POST", &format!("/session/{sid}/filter"), Some(bad_label))
        .await;
    assert_error(status, &body, StatusCode::BAD_REQUEST, "UNKNOWN_LABEL");
    assert_eq!(body["details"]["label"], "Sony");

    let (status, body) = h
        .call(
            "GET",
            &format!("/session/{sid}/scatter?x=brand&y=price"),
            None,
        )
        .await;
    assert_error(
        status,
        &body,
        StatusCode::BAD_REQUEST,
        "NON_COMPARABLE_ATTRIBUTE",
    );
    let (status, body) = h
        .call("GET", &format!("/session/{sid}/scatter?x=price"), None)
        .await;
    assert_error(status, &body, StatusCode::BAD_REQUEST, "MALFORMED_INPUT");
    let (status, body) = h
        .call("GET", &format!("/session/{sid}/comparison"), None)
        .await;
    assert_error(status, &body, StatusCode::CONFLICT, "EMPTY_BUCKET");

    let (status, body) = h
        .call(
            "POST",
            &format!("/session/{sid}/advance"),
            Some(json!({ "stage": "comparison" })),
        )
        .await;
    assert_error(status, &body, StatusCode::CONFLICT, "ILLEGAL_TRANSITION");
    let (status, body) = h
        .call(
            "POST",
            &format!("/session/{sid}/decide"),
            Some(json!({ "product_id": "baseline-A-001" })),
        )
        .await;
    assert_error(status, &body, StatusCode::CONFLICT, "WRONG_STAGE");

    h.ok(
        "POST",
        &format!("/session/{sid}/filter"),
        Some(json!({ "selected": ["os/iOS"] })),
    )
    .await;
    let view = h.ok("GET", &format!("/session/{sid}"), None).await;
    let android = bundled::baseline_catalog()
        .products()
        .iter()
        .find(|p| p.values["os"].as_label() == Some("Android"))
        .unwrap()
        .id
        .clone();
    let (status, body) = h
        .call(
            "POST",
            &format!("/session/{sid}/bucket"),
            Some(json!({ "product_id": android })),
        )
        .await;
    assert_error(status, &body, StatusCode::CONFLICT, "NOT_IN_FILTERED_SET");
    // Rejected requests leave no trace in the log.
    assert_eq!(
        h.ok("GET", &format!("/session/{sid}"), None).await["event_count"],
        view["event_count"]
    );

    let (status, body) = h
        .call("POST", "/session", Some(json!({ "variant": "zzz" })))
        .await;
    assert_error(status, &body, StatusCode::NOT_FOUND, "UNKNOWN_VARIANT");
}

#[tokio::test]
async fn bucket_full_is_a_conflict() {
    let h = Harness::new();
    let sid = h.session("baseline-A").await;
    for i in 1..=4 {
        h.ok(
            "POST",
            &format!("/session/{sid}/bucket"),
            Some(json!({ "product_id": format!("baseline-A-{i:03}") })),
        )
        .await;
    }
    let (status, body) = h
        .call(
            "POST",
            &format!("/session/{sid}/bucket"),
            Some(json!({ "product_id": "baseline-A-005" })),
        )
        .await;
    assert_error(status, &body, StatusCode::CONFLICT, "BUCKET_FULL");
    assert_eq!(body["details"]["cap"], 4);
    let v = h
        .ok(
            "POST",
            &format!("/session/{sid}/bucket"),
            Some(json!({ "product_id": "baseline-A-002" })),
        )
        .await;
    assert_eq!(v["change"], "removed");
}

#[tokio::test]
async fn trials_are_logged_and_reported() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("trials.jsonl");
    let h = Harness::with(Some(log.clone()), None);

    let (status, body) = h
        .call("POST", "/trial/start", Some(json!({ "participant_id": "P1", "interface_variant": "typical", "task_id": "XX99" })))
        .await;
    assert_error(status, &body, StatusCode::NOT_FOUND, "UNKNOWN_TASK");
    let (status, body) = h
        .call(
            "POST",
            "/trial/finish",
            Some(json!({ "trial_id": "t000042" })),
        )
        .await;
    assert_error(status, &body, StatusCode::NOT_FOUND, "UNKNOWN_TRIAL");

    for (p, variant, answer, secs) in [
        ("P1", "typical", "baseline-A-078", 70),
        ("P2", "typical", "baseline-A-001", 80),
        ("P1", "visualization", "visualization-B-025", 50),
        ("P2", "visualization", "visualization-B-025", 55),
    ] {
        let (status, t) = h
            .call(
                "POST",
                "/trial/start",
                Some(
                    json!({ "participant_id": p, "interface_variant": variant, "task_id": "CT01" }),
                ),
            )
            .await;
        assert_eq!(status, StatusCode::CREATED);
        h.clock.advance(secs * 1000);
        let s = h
            .ok(
                "POST",
                "/trial/finish",
                Some(json!({ "trial_id": t["trial_id"], "answer": answer })),
            )
            .await;
        assert_eq!(s["duration_s"], secs);
        let (status, body) = h
            .call(
                "POST",
                "/trial/finish",
                Some(json!({ "trial_id": t["trial_id"], "answer": answer })),
            )
            .await;
        assert_error(status, &body, StatusCode::CONFLICT, "TRIAL_FINISHED");
    }
    let (status, t) = h
        .call("POST", "/trial/start", Some(json!({ "participant_id": "P3", "interface_variant": "typical", "task_id": "ST01" })))
        .await;
    assert_eq!(status, StatusCode::CREATED);
    let (status, body) = h
        .call(
            "POST",
            "/trial/finish",
            Some(json!({ "trial_id": t["trial_id"] })),
        )
        .await;
    assert_error(status, &body, StatusCode::CONFLICT, "INCOMPLETE_TRIAL");

    let lines: Vec<TrialLog> = std::fs::read_to_string(&log)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 4);

    let report = h.ok("GET", "/report", None).await;
    let ct01 = report["tasks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["task_id"] == "CT01")
        .unwrap();
    assert_eq!(ct01["typical"]["correct"], 1);
    assert_eq!(ct01["visualization"]["correct"], 2);
    assert_eq!(report["typical"]["participants"], 2);
}

#[tokio::test]
async fn static_assets_are_served() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::create_dir_all(dir.path().join("images")).unwrap();
    std::fs::write(dir.path().join("images/baseline-A-001.png"), b"png-bytes").unwrap();
    let h = Harness::with(None, Some(dir.path().to_path_buf()));
    let (status, bytes) = h
        .raw("GET", "/assets/images/baseline-A-001.png", None)
        .await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(bytes, b"png-bytes");
    let (status, _) = h.raw("GET", "/assets/images/none.png", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}
