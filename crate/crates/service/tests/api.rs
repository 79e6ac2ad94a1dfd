use std::sync::Arc;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use permadss_core::surface::import_grid_json;
use permadss_core::PermanenceModels;
use permadss_service::{router, ApiError, ErrorCode, EvaluateResponse};
use serde_json::{json, Value};
use tower::ServiceExt;

fn app() -> Router {
    router(Arc::new(PermanenceModels::load_default().unwrap()), None)
}

async fn call(app: &Router, method: Method, uri: &str, body: Option<&str>) -> (StatusCode, Vec<u8>) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map_or_else(Body::empty, |b| Body::from(b.to_string())))
        .unwrap();
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    let bytes = res.into_body().collect().await.unwrap().to_bytes().to_vec();
    (status, bytes)
}

/// Checks the error body has exactly the documented keys and returns it.
fn api_error(status: StatusCode, body: &[u8]) -> ApiError {
    let v: Value = serde_json::from_slice(body).unwrap();
    let mut keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    keys.sort();
    assert_eq!(keys, ["code", "field", "message", "status"]);
    let e: ApiError = serde_json::from_value(v).unwrap();
    assert_eq!(e.status, status.as_u16());
    e
}

#[tokio::test]
async fn evaluate_worked_example() {
    let app = app();
    let body = r#"{"scenario":"stable","npv":20e6,"gen":18,"divers":4}"#;
    let (status, bytes) = call(&app, Method::POST, "/api/v1/evaluate", Some(body)).await;
    assert_eq!(status, StatusCode::OK);
    let r: EvaluateResponse = serde_json::from_slice(&bytes).unwrap();
    assert!((r.incentive - 71.4).abs() <= 5.0);
    assert_eq!(r.firing.len(), 4);
    assert!(r.firing.iter().all(|f| f.strength > 0.0));
    assert!(r.aggregate.is_none());
    assert!(!r.clamped);

    let (_, again) = call(&app, Method::POST, "/api/v1/evaluate", Some(body)).await;
    assert_eq!(again, bytes);

    let (_, traced) = call(&app, Method::POST, "/api/v1/evaluate?trace=true", Some(body)).await;
    let r: EvaluateResponse = serde_json::from_slice(&traced).unwrap();
    let agg = r.aggregate.unwrap();
    assert_eq!(agg.len(), 1001);
    assert_eq!(agg[1000][0], 100.0);
}

#[tokio::test]
async fn evaluate_errors() {
    let app = app();
    let cases = [
        (r#"{"scenario":"stable","npv":-10e6,"gen":1,"divers":1}"#, StatusCode::UNPROCESSABLE_ENTITY, ErrorCode::OutOfRange, Some("npv")),
        (r#"{"scenario":"boom","npv":1,"gen":1,"divers":1}"#, StatusCode::UNPROCESSABLE_ENTITY, ErrorCode::BadScenario, Some("scenario")),
        (r#"{"scenario":"stable","npv":1,"gen":1}"#, StatusCode::BAD_REQUEST, ErrorCode::BadRequest, Some("divers")),
        (r#"{"scenario":"stable","npv":"1","gen":1,"divers":1}"#, StatusCode::BAD_REQUEST, ErrorCode::BadRequest, Some("npv")),
        (r#"{"scenario":"stable","npv":1,"gen":1,"divers":1,"extra":2}"#, StatusCode::BAD_REQUEST, ErrorCode::BadRequest, Some("extra")),
        (r#"{"scenario":"stable","#, StatusCode::BAD_REQUEST, ErrorCode::BadRequest, None),
        (r#"[1,2]"#, StatusCode::BAD_REQUEST, ErrorCode::BadRequest, None),
    ];
    for (body, status, code, field) in cases {
        let (got, bytes) = call(&app, Method::POST, "/api/v1/evaluate", Some(body)).await;
        assert_eq!(got, status, "{body}");
        let e = api_error(got, &bytes);
        assert_eq!(e.code, code, "{body}");
        assert_eq!(e.field.as_deref(), field, "{body}");
    }
    let (got, bytes) = call(&app, Method::POST, "/api/v1/evaluate?trace=maybe", Some("{}")).await;
    assert_eq!(api_error(got, &bytes).field.as_deref(), Some("trace"));
}

#[tokio::test]
async fn clamp_snaps_to_bounds() {
    let app = app();
    let body = json!({"scenario": "growth", "npv": 999e6, "gen": -3, "divers": 2, "clamp": true}).to_string();
    let (status, bytes) = call(&app, Method::POST, "/api/v1/evaluate", Some(&body)).await;
    assert_eq!(status, StatusCode::OK);
    let r: EvaluateResponse = serde_json::from_slice(&bytes).unwrap();
    assert!(r.clamped);
    assert_eq!((r.input.npv, r.input.gen, r.input.divers), (185e6, 0.0, 2.0));
}

#[tokio::test]
async fn surface_endpoint() {
    let app = app();
    let (status, bytes) = call(&app, Method::GET, "/api/v1/surface?scenario=growth&fix=NPV:20e6&steps=21", None).await;
    assert_eq!(status, StatusCode::OK);
    let g = import_grid_json(&bytes).unwrap();
    assert_eq!((g.x_axis.variable.as_str(), g.y_axis.variable.as_str()), ("GEN", "DIVERS"));
    assert!(g.stats.min >= 66.0, "{}", g.stats.min);

    let (status, bytes) = call(&app, Method::GET, "/api/v1/surface?scenario=stable&fix=GEN:5&x=DIVERS", None).await;
    assert_eq!(status, StatusCode::OK);
    let g = import_grid_json(&bytes).unwrap();
    assert_eq!((g.x_axis.variable.as_str(), g.y_axis.variable.as_str(), g.x_axis.steps), ("DIVERS", "NPV", 21));
}

#[tokio::test]
async fn surface_errors() {
    let app = app();
    let cases = [
        ("scenario=stable&fix=NPV:20e6&steps=1000", StatusCode::BAD_REQUEST, ErrorCode::BadRequest, "steps"),
        ("scenario=stable&fix=NPV:20e6&fix=GEN:5", StatusCode::BAD_REQUEST, ErrorCode::BadRequest, "fix"),
        ("scenario=stable&fix=NPV=20e6", StatusCode::BAD_REQUEST, ErrorCode::BadRequest, "fix"),
        ("scenario=stable", StatusCode::BAD_REQUEST, ErrorCode::BadRequest, "fix"),
        ("scenario=stable&fix=NPV:20e6&steps=ten", StatusCode::BAD_REQUEST, ErrorCode::BadRequest, "steps"),
        ("scenario=boom&fix=NPV:20e6", StatusCode::UNPROCESSABLE_ENTITY, ErrorCode::BadScenario, "scenario"),
        ("scenario=stable&fix=NPV:999e6", StatusCode::UNPROCESSABLE_ENTITY, ErrorCode::OutOfRange, "fix"),
        ("scenario=stable&fix=GEN:5&x=GEN&y=DIVERS", StatusCode::UNPROCESSABLE_ENTITY, ErrorCode::BadRequest, "fix"),
        ("scenario=stable&fix=COST:5", StatusCode::UNPROCESSABLE_ENTITY, ErrorCode::BadRequest, "fix"),
    ];
    for (query, status, code, field) in cases {
        let (got, bytes) = call(&app, Method::GET, &format!("/api/v1/surface?{query}"), None).await;
        assert_eq!(got, status, "{query}");
        let e = api_error(got, &bytes);
        assert_eq!((e.code, e.field.as_deref()), (code, Some(field)), "{query}");
    }
    let (got, bytes) = call(&app, Method::GET, "/api/v1/surface?scenario=stable&fix=NPV:1&steps=1000", None).await;
    assert!(api_error(got, &bytes).message.contains("201"));
}

#[tokio::test]
async fn model_endpoint() {
    let app = app();
    let (status, bytes) = call(&app, Method::GET, "/api/v1/model/stable", None).await;
    assert_eq!(status, StatusCode::OK);
    let v: Value = serde_json::from_slice(&bytes).unwrap();
    assert_eq!(v["inputs"].as_array().unwrap().len() + 1, 4);
    assert_eq!(v["rules"].as_array().unwrap().len(), 27);
    assert_eq!(v["inputs"][0]["labels"][0]["mf"], json!({"kind": "trap", "params": [-5e5, -5e5, 2e6, 1e7]}));
    assert_eq!(v["rule_table"][2][2][2], 7);

    let (_, bytes) = call(&app, Method::GET, "/api/v1/model/growth", None).await;
    let v: Value = serde_json::from_slice(&bytes).unwrap();
    assert_eq!(v["output"]["labels"].as_array().unwrap().len(), 8);
    assert_eq!(v["output"]["name"], "PERM-INCENT");

    let (status, bytes) = call(&app, Method::GET, "/api/v1/model/boom", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(api_error(status, &bytes).code, ErrorCode::BadScenario);
}

#[tokio::test]
async fn health_and_fallbacks() {
    let app = app();
    let (status, bytes) = call(&app, Method::GET, "/api/v1/health", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(serde_json::from_slice::<Value>(&bytes).unwrap(), json!({"status": "ok", "models": ["stable", "growth"]}));

    let (status, bytes) = call(&app, Method::GET, "/api/v1/nothing", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    api_error(status, &bytes);

    let (status, bytes) = call(&app, Method::GET, "/api/v1/evaluate", None).await;
    assert_eq!(status, StatusCode::METHOD_NOT_ALLOWED);
    api_error(status, &bytes);
}

#[tokio::test]
async fn cors_and_static_files() {
    let dir = std::env::temp_dir().join(format!("permadss-static-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    std::fs::write(dir.join("index.html"), "<h1>what-if</h1>").unwrap();
    let app = router(Arc::new(PermanenceModels::load_default().unwrap()), Some(dir.clone()));

    let (status, bytes) = call(&app, Method::GET, "/index.html", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(bytes, b"<h1>what-if</h1>");

    let req = Request::builder()
        .uri("/api/v1/health")
        .header("origin", "http://localhost:5173")
        .body(Body::empty())
        .unwrap();
    let res = app.oneshot(req).await.unwrap();
    assert_eq!(res.headers()["access-control-allow-origin"], "*");
    std::fs::remove_dir_all(dir).unwrap();
}
