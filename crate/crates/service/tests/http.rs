use std::sync::{Arc, OnceLock};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use justify_core::npp_kb::{build_kb, KbConfig};
use justify_core::replay::{Session, DEFAULT_STEP};
use justify_core::scenario::{synthesize_tmi2, EVENTS, HORIZON};
use justify_service::{router, AppState};

fn state(cfg: KbConfig, horizon: i64) -> Arc<AppState> {
    let (s, a) = synthesize_tmi2(&cfg).unwrap();
    let session = Session::new(build_kb(&cfg), &s, a, DEFAULT_STEP, horizon).unwrap();
    AppState::new(session, cfg, EVENTS.to_vec())
}

fn finished() -> Arc<AppState> {
    static S: OnceLock<Arc<AppState>> = OnceLock::new();
    S.get_or_init(|| {
        let st = state(KbConfig::default(), HORIZON);
        st.run_to_end().unwrap();
        st
    })
    .clone()
}

async fn call(st: &Arc<AppState>, method: &str, uri: &str, body: Option<&str>) -> (StatusCode, Value) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map_or_else(Body::empty, |b| Body::from(b.to_string())))
        .unwrap();
    let resp = router(st.clone()).oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

fn open_a_valve_times(windows: &[Value]) -> Vec<i64> {
    windows
        .iter()
        .flat_map(|w| w["recommendations"].as_array().unwrap().clone())
        .filter(|r| r["procedure"] == "open" && r["component"] == "auxiliary_feedwater_a_block_valve")
        .map(|r| r["time"].as_i64().unwrap())
        .collect()
}

#[tokio::test]
async fn first_window_reports_eight_inferred_actions() {
    let (status, w) = call(&finished(), "GET", "/window/60", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(w["window_end"], 60);
    let acts = w["inferred_actions"].as_array().unwrap();
    assert_eq!(acts.len(), 8);
    assert!(acts.iter().all(|a| a["time"].as_i64().unwrap() <= 11));
}

#[tokio::test]
async fn window_errors() {
    let st = finished();
    assert_eq!(call(&st, "GET", "/window/999999", None).await.0, StatusCode::NOT_FOUND);
    let (status, body) = call(&st, "GET", "/window/sixty", None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(body["error"].as_str().unwrap().contains("integer"));
}

#[tokio::test]
async fn timeline_lists_every_window() {
    let st = finished();
    let (status, t) = call(&st, "GET", "/timeline", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(t["finished"], true);
    assert_eq!(t["windows"].as_array().unwrap().len(), 142);
    let (_, t) = call(&st, "GET", "/timeline?since=8400", None).await;
    let ends: Vec<i64> = t["windows"].as_array().unwrap().iter().map(|w| w["window_end"].as_i64().unwrap()).collect();
    assert_eq!(ends, vec![8460, 8521]);
    assert_eq!(call(&st, "GET", "/timeline?since=x", None).await.0, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn variable_series() {
    let st = finished();
    let (status, v) = call(&st, "GET", "/variables/primary_loop_pressure?from=900&to=901", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["samples"], json!([[900, 1213], [901, 1213]]));
    let (_, v) = call(&st, "GET", "/variables/reactor_power?from=8500", None).await;
    assert_eq!(v["to"], 8521);
    assert_eq!(v["samples"].as_array().unwrap().len(), 22);
    assert_eq!(call(&st, "GET", "/variables/coolant_colour", None).await.0, StatusCode::NOT_FOUND);
    assert_eq!(call(&st, "GET", "/variables/reactor_power?from=a", None).await.0, StatusCode::BAD_REQUEST);
    assert_eq!(call(&st, "GET", "/variables/reactor_power?from=20&to=10", None).await.0, StatusCode::BAD_REQUEST);
    let (_, list) = call(&st, "GET", "/variables", None).await;
    assert_eq!(list.as_array().unwrap().len(), 16);
}

#[tokio::test]
async fn explain_endpoint() {
    let st = state(KbConfig::short_suppression(), HORIZON);
    for _ in 0..21 {
        st.advance().unwrap();
    }
    let body = r#"{"id":9,"window_end":1260,"atoms":["recommendation(open,auxiliary_feedwater_a_block_valve,1201)"]}"#;
    let (status, r) = call(&st, "POST", "/explain", Some(body)).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(r["id"], 9);
    let graphs = r["results"][0]["graphs"].as_array().unwrap();
    assert_eq!(graphs.len(), 2);
    assert!(graphs.iter().all(|g| g["format_version"] == 1));
    assert_eq!(call(&st, "POST", "/explain", Some("{\"id\":1}")).await.0, StatusCode::BAD_REQUEST);
    assert_eq!(call(&st, "POST", "/explain", Some("{\"id\":1,\"window_end\":1320}")).await.0, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn actions_are_validated() {
    let st = state(KbConfig::default(), 180);
    let bad = [
        "{\"time\":5}",
        r#"{"time":-1,"procedure":"open","component":"pressurizer"}"#,
        r#"{"time":5,"procedure":"Open","component":"pressurizer"}"#,
        r#"{"time":5,"procedure":"open","component":"warp_core"}"#,
    ];
    for b in bad {
        assert_eq!(call(&st, "POST", "/actions", Some(b)).await.0, StatusCode::BAD_REQUEST, "{b}");
    }
    let ok = r#"{"time":100,"procedure":"open","component":"pressurizer_block_valve"}"#;
    let (status, r) = call(&st, "POST", "/actions", Some(ok)).await;
    assert_eq!(status, StatusCode::ACCEPTED);
    assert_eq!(r["windows_kept"], 0);
}

#[tokio::test]
async fn injection_into_finished_session_conflicts() {
    let body = r#"{"time":100,"procedure":"open","component":"auxiliary_feedwater_a_block_valve"}"#;
    assert_eq!(call(&finished(), "POST", "/actions", Some(body)).await.0, StatusCode::CONFLICT);
}

#[tokio::test]
async fn what_if_valve_opening_suppresses_later_recommendations() {
    let (_, base) = call(&finished(), "GET", "/timeline", None).await;
    let before = open_a_valve_times(base["windows"].as_array().unwrap());
    assert!(before.iter().any(|&t| t > 120), "baseline recommends opening after 120");

    let st = state(KbConfig::default(), HORIZON);
    for _ in 0..3 {
        st.advance().unwrap();
    }
    let body = r#"{"time":120,"procedure":"open","component":"auxiliary_feedwater_a_block_valve"}"#;
    let (status, r) = call(&st, "POST", "/actions", Some(body)).await;
    assert_eq!(status, StatusCode::ACCEPTED);
    assert_eq!(r["windows_kept"], 1);
    tokio::task::spawn_blocking({
        let st = st.clone();
        move || st.run_to_end().unwrap()
    })
    .await
    .unwrap();
    let (_, t) = call(&st, "GET", "/timeline", None).await;
    let after = open_a_valve_times(t["windows"].as_array().unwrap());
    assert!(!after.is_empty());
    assert!(after.iter().all(|&t| t < 120), "{after:?}");
}

#[tokio::test]
async fn config_and_events() {
    let st = finished();
    let (_, c) = call(&st, "GET", "/config", None).await;
    assert_eq!(c["kb"]["action_execution_time_range"], 8521);
    assert_eq!(c["kb"]["literal_suppression"], false);
    assert_eq!((c["step"].as_i64(), c["windows"].as_i64()), (Some(60), Some(142)));
    let (_, e) = call(&st, "GET", "/events", None).await;
    let e = e.as_array().unwrap();
    assert_eq!(e.len(), 15);
    assert_eq!(e[14]["time"], 8521);
}

#[tokio::test]
async fn stream_pushes_new_windows() {
    let st = state(KbConfig::default(), 120);
    let req = Request::builder().uri("/stream").body(Body::empty()).unwrap();
    let resp = router(st.clone()).oneshot(req).await.unwrap();
    assert_eq!(resp.headers()["content-type"], "text/event-stream");
    tokio::task::spawn_blocking({
        let st = st.clone();
        move || st.advance().unwrap()
    })
    .await
    .unwrap();
    let mut body = resp.into_body();
    let frame = body.frame().await.unwrap().unwrap().into_data().unwrap();
    let text = String::from_utf8(frame.to_vec()).unwrap();
    assert!(text.starts_with("event: window\n"), "{text}");
    assert!(text.contains("\"window_end\":60"));
}
