//! JSON-over-HTTP view of a live replay session.
//!
//! Readers see immutable per-window snapshots; advancing and action
//! injection are serialized through the session mutex.

use std::collections::HashMap;
use std::convert::Infallible;
use std::sync::{Arc, Mutex, RwLock};
use std::time::Duration;

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures_util::stream::{self, Stream};
use serde_json::{json, Value};
use tokio::sync::broadcast;

use justify_core::explain::DEFAULT_MAX_GRAPHS;
use justify_core::npp_kb::{binding, variable_bindings, KbConfig};
use justify_core::replay::{known_components, AttemptedAction, DiagnosisOutput, ReplayError, Session};
use justify_core::scenario::ScenarioEvent;

use crate::backend::explain_atoms;
use crate::protocol::{ExplainRequest, ExplainResponse};

/// Environment variable holding the default HTTP port.
pub const PORT_ENV: &str = "JUSTIFY_PORT";
pub const DEFAULT_PORT: u16 = 8080;

pub struct AppState {
    session: Mutex<Session>,
    snapshot: RwLock<Vec<Arc<DiagnosisOutput>>>,
    config: KbConfig,
    events: Vec<ScenarioEvent>,
    max_graphs: usize,
    /// `(event name, JSON data)` pushed to `/stream` subscribers.
    updates: broadcast::Sender<(String, String)>,
}

impl AppState {
    pub fn new(session: Session, config: KbConfig, events: Vec<ScenarioEvent>) -> Arc<Self> {
        let snapshot = session.outputs().iter().cloned().map(Arc::new).collect();
        Arc::new(AppState {
            session: Mutex::new(session),
            snapshot: RwLock::new(snapshot),
            config,
            events,
            max_graphs: DEFAULT_MAX_GRAPHS,
            updates: broadcast::channel(256).0,
        })
    }

    /// Evaluates the next window. Returns false once the session is done.
    pub fn advance(&self) -> Result<bool, ReplayError> {
        let mut s = self.session.lock().expect("session lock");
        let Some(out) = s.advance()?.cloned() else {
            return Ok(false);
        };
        let data = serde_json::to_string(&out).expect("output serializes");
        self.snapshot.write().expect("snapshot lock").push(Arc::new(out));
        let _ = self.updates.send(("window".into(), data));
        Ok(true)
    }

    pub fn run_to_end(&self) -> Result<(), ReplayError> {
        while self.advance()? {}
        Ok(())
    }

    /// Injects an attempted action; windows from its time on are dropped
    /// and re-evaluated by later `advance` calls. Returns the number of
    /// windows kept.
    pub fn inject(&self, action: AttemptedAction) -> Result<usize, ReplayError> {
        let mut s = self.session.lock().expect("session lock");
        s.inject(action)?;
        let kept = s.outputs().len();
        self.snapshot.write().expect("snapshot lock").truncate(kept);
        let _ = self.updates.send(("reset".into(), json!({ "kept": kept }).to_string()));
        Ok(kept)
    }

    pub fn timeline(&self) -> Vec<Arc<DiagnosisOutput>> {
        self.snapshot.read().expect("snapshot lock").clone()
    }

    pub fn is_finished(&self) -> bool {
        self.session.lock().expect("session lock").is_finished()
    }

    pub fn explain(&self, req: &ExplainRequest) -> Result<ExplainResponse, ReplayError> {
        let ev = self.session.lock().expect("session lock").evaluation(req.window_end)?;
        Ok(ExplainResponse {
            id: req.id,
            window_end: Some(req.window_end),
            results: explain_atoms(&ev, &req.atoms, req.max_graphs.unwrap_or(self.max_graphs)),
            error: None,
        })
    }
}

/// Advances the session one window every `pace` until it is finished.
pub fn spawn_driver(state: Arc<AppState>, pace: Duration) -> tokio::task::JoinHandle<Result<(), ReplayError>> {
    tokio::spawn(async move {
        loop {
            let st = state.clone();
            let more = tokio::task::spawn_blocking(move || st.advance())
                .await
                .expect("advance does not panic")?;
            if !more {
                log::info!("replay finished");
                return Ok(());
            }
            if !pace.is_zero() {
                tokio::time::sleep(pace).await;
            }
        }
    })
}

pub async fn serve(listener: tokio::net::TcpListener, state: Arc<AppState>) -> std::io::Result<()> {
    axum::serve(listener, router(state)).await
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/timeline", get(timeline))
        .route("/window/{t}", get(window))
        .route("/variables", get(variables))
        .route("/variables/{name}", get(variable))
        .route("/explain", post(explain))
        .route("/actions", post(actions))
        .route("/config", get(config))
        .route("/events", get(events))
        .route("/stream", get(updates))
        .with_state(state)
}

#[derive(Debug)]
pub struct ApiError(StatusCode, String);

impl ApiError {
    fn bad_request(msg: impl Into<String>) -> Self {
        ApiError(StatusCode::BAD_REQUEST, msg.into())
    }

    fn not_found(msg: impl Into<String>) -> Self {
        ApiError(StatusCode::NOT_FOUND, msg.into())
    }
}

impl From<ReplayError> for ApiError {
    fn from(e: ReplayError) -> Self {
        let status = match e {
            ReplayError::UnknownWindow(_) => StatusCode::NOT_FOUND,
            ReplayError::SessionFinished => StatusCode::CONFLICT,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError(status, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({ "error": self.1 }))).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;
type Shared = State<Arc<AppState>>;

fn int_param(q: &HashMap<String, String>, key: &str) -> ApiResult<Option<i64>> {
    q.get(key)
        .map(|v| v.parse().map_err(|_| ApiError::bad_request(format!("`{key}` must be an integer, got `{v}`"))))
        .transpose()
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> T {
    tokio::task::spawn_blocking(f).await.expect("handler task does not panic")
}

async fn timeline(State(st): Shared, Query(q): Query<HashMap<String, String>>) -> ApiResult<Json<Value>> {
    let since = int_param(&q, "since")?;
    let outs: Vec<Value> = st
        .timeline()
        .iter()
        .filter(|o| since.is_none_or(|s| o.window_end > s))
        .map(|o| serde_json::to_value(&**o).expect("output serializes"))
        .collect();
    Ok(Json(json!({ "finished": st.is_finished(), "windows": outs })))
}

async fn window(State(st): Shared, Path(t): Path<String>) -> ApiResult<Json<DiagnosisOutput>> {
    let t: i64 = t.parse().map_err(|_| ApiError::bad_request(format!("window end must be an integer, got `{t}`")))?;
    st.timeline()
        .iter()
        .find(|o| o.window_end == t)
        .map(|o| Json((**o).clone()))
        .ok_or_else(|| ApiError::not_found(format!("no evaluated window ends at {t}")))
}

async fn variables() -> Json<Value> {
    Json(Value::Array(
        variable_bindings()
            .iter()
            .map(|b| json!({ "name": b.stream_name, "description": b.description, "predicate": b.predicate }))
            .collect(),
    ))
}

/// Held value at every second of `[from, to]`; `to` is clipped to the
/// session horizon or the last sample, whichever is later.
async fn variable(
    State(st): Shared,
    Path(name): Path<String>,
    Query(q): Query<HashMap<String, String>>,
) -> ApiResult<Json<Value>> {
    let b = binding(&name).ok_or_else(|| ApiError::not_found(format!("unknown variable `{name}`")))?;
    let s = st.session.lock().expect("session lock");
    let end = s.horizon().max(s.sensors().last_time().unwrap_or(0));
    let from = int_param(&q, "from")?.unwrap_or(0).max(0);
    let to = int_param(&q, "to")?.unwrap_or(end).min(end);
    if from > to {
        return Err(ApiError::bad_request(format!("empty range [{from}, {to}]")));
    }
    let samples: Vec<[i64; 2]> = (from..=to)
        .filter_map(|t| s.sensors().value_at(&name, t).map(|v| [t, v]))
        .collect();
    Ok(Json(json!({
        "variable": name,
        "description": b.description,
        "from": from,
        "to": to,
        "samples": samples,
    })))
}

async fn explain(State(st): Shared, body: String) -> ApiResult<Json<ExplainResponse>> {
    let req: ExplainRequest =
        serde_json::from_str(&body).map_err(|e| ApiError::bad_request(format!("malformed request: {e}")))?;
    Ok(Json(blocking(move || st.explain(&req)).await?))
}

fn check_action(a: &AttemptedAction) -> Result<(), String> {
    let symbol = |s: &str| {
        s.starts_with(|c: char| c.is_ascii_lowercase()) && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
    };
    if a.time < 0 {
        return Err(format!("time must be non-negative, got {}", a.time));
    }
    if !symbol(&a.procedure) {
        return Err(format!("procedure `{}` is not a symbol", a.procedure));
    }
    if !known_components().contains(&a.component) {
        return Err(format!("unknown component `{}`", a.component));
    }
    Ok(())
}

async fn actions(State(st): Shared, body: String) -> ApiResult<(StatusCode, Json<Value>)> {
    let a: AttemptedAction =
        serde_json::from_str(&body).map_err(|e| ApiError::bad_request(format!("malformed action: {e}")))?;
    check_action(&a).map_err(ApiError::bad_request)?;
    let echo = serde_json::to_value(&a).expect("action serializes");
    let kept = blocking(move || st.inject(a)).await?;
    Ok((StatusCode::ACCEPTED, Json(json!({ "accepted": echo, "windows_kept": kept }))))
}

async fn config(State(st): Shared) -> Json<Value> {
    let s = st.session.lock().expect("session lock");
    Json(json!({
        "kb": st.config,
        "step": s.step(),
        "horizon": s.horizon(),
        "windows": s.windows().len(),
        "evaluated": s.outputs().len(),
        "finished": s.is_finished(),
        "max_graphs": st.max_graphs,
    }))
}

async fn events(State(st): Shared) -> Json<Vec<ScenarioEvent>> {
    Json(st.events.clone())
}

/// Server-sent `window` events for each new output and `reset` events
/// after an injection.
async fn updates(State(st): Shared) -> Sse<impl Stream<Item = Result<Event, Infallible>>> {
    let rx = st.updates.subscribe();
    let s = stream::unfold(rx, |mut rx| async move {
        loop {
            match rx.recv().await {
                Ok((name, data)) => return Some((Ok(Event::default().event(name).data(data)), rx)),
                Err(broadcast::error::RecvError::Lagged(n)) => log::warn!("stream subscriber skipped {n} updates"),
                Err(broadcast::error::RecvError::Closed) => return None,
            }
        }
    });
    Sse::new(s).keep_alive(KeepAlive::default())
}
