//! Local HTTP service: `GET /report`, `GET /events` (server-sent events),
//! `POST /recheck`, and the HTML explorer at `/`.

use std::convert::Infallible;
use std::path::Path;
use std::sync::{Arc, RwLock};

use axum::extract::State;
use axum::http::StatusCode;
use axum::response::sse::{Event as SseEvent, KeepAlive, Sse};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::stream::{self, Stream, StreamExt};
use serde_json::json;
use tokio::sync::broadcast;

use gliq_core::check::{CheckError, CheckOptions, Checked, Checker, RecheckError, RecheckRequest};
use gliq_core::report::{to_html, ReportDocument};

use crate::args::Common;
use crate::{read_source, EXIT_OK, EXIT_USAGE};

pub enum Status {
    Running,
    Done { checked: Box<Checked>, report: Box<ReportDocument> },
    Failed(String),
}

pub struct AppState {
    pub checker: Checker,
    pub options: CheckOptions,
    pub status: RwLock<Status>,
    /// JSON-encoded progress notifications.
    pub events: broadcast::Sender<String>,
}

impl AppState {
    pub fn new(checker: Checker, options: CheckOptions) -> Arc<AppState> {
        let (events, _) = broadcast::channel(4096);
        Arc::new(AppState { checker, options, status: RwLock::new(Status::Running), events })
    }

    /// Run the check, publishing progress, and store the outcome.
    pub fn run_check(&self, file: &str, text: &str) {
        let publish = |e: gliq_core::gradual::Event| {
            let _ = self.events.send(serde_json::to_string(&e).expect("event serializes"));
        };
        let status = match self.checker.check(file, text, &publish) {
            Ok(checked) => {
                let report = ReportDocument::new(&checked, &self.options);
                Status::Done { checked: Box::new(checked), report: Box::new(report) }
            }
            Err(CheckError::Program(d)) => Status::Failed(d.to_string()),
            Err(CheckError::Smt(e)) => Status::Failed(e.to_string()),
        };
        let done = match &status {
            Status::Done { report, .. } => json!({ "kind": "done", "verdict": report.verdict }),
            _ => json!({ "kind": "failed" }),
        };
        *self.status.write().unwrap() = status;
        let _ = self.events.send(done.to_string());
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/", get(index))
        .route("/report", get(report))
        .route("/events", get(events))
        .route("/recheck", post(recheck))
        .with_state(state)
}

fn running() -> Response {
    (StatusCode::ACCEPTED, Json(json!({ "status": "running" }))).into_response()
}

fn failed(msg: &str) -> Response {
    (StatusCode::UNPROCESSABLE_ENTITY, Json(json!({ "status": "failed", "error": msg }))).into_response()
}

async fn index(State(st): State<Arc<AppState>>) -> Response {
    match &*st.status.read().unwrap() {
        Status::Running => {
            (StatusCode::ACCEPTED, Html("<p>gliq: inference is running; reload shortly.</p>")).into_response()
        }
        Status::Done { report, .. } => Html(to_html(report)).into_response(),
        Status::Failed(msg) => failed(msg),
    }
}

async fn report(State(st): State<Arc<AppState>>) -> Response {
    match &*st.status.read().unwrap() {
        Status::Running => running(),
        Status::Done { report, .. } => Json(report.as_ref()).into_response(),
        Status::Failed(msg) => failed(msg),
    }
}

async fn events(State(st): State<Arc<AppState>>) -> Sse<impl Stream<Item = Result<SseEvent, Infallible>>> {
    let rx = st.events.subscribe();
    // Late subscribers learn the final state right away.
    let finished = match &*st.status.read().unwrap() {
        Status::Running => None,
        Status::Done { report, .. } => Some(json!({ "kind": "done", "verdict": report.verdict }).to_string()),
        Status::Failed(_) => Some(json!({ "kind": "failed" }).to_string()),
    };
    let first = stream::iter(finished.clone().map(|s| Ok(SseEvent::default().data(s))));
    let live = stream::unfold((rx, finished.is_some()), |(mut rx, closed)| async move {
        if closed {
            return None;
        }
        loop {
            match rx.recv().await {
                Ok(msg) => {
                    let end = msg.contains("\"kind\":\"done\"") || msg.contains("\"kind\":\"failed\"");
                    return Some((Ok(SseEvent::default().data(msg)), (rx, end)));
                }
                Err(broadcast::error::RecvError::Lagged(_)) => continue,
                Err(broadcast::error::RecvError::Closed) => return None,
            }
        }
    });
    Sse::new(first.chain(live)).keep_alive(KeepAlive::default())
}

async fn recheck(State(st): State<Arc<AppState>>, body: String) -> Response {
    let req: RecheckRequest = match serde_json::from_str(&body) {
        Ok(r) => r,
        Err(e) => {
            return (StatusCode::BAD_REQUEST, Json(json!({ "error": format!("malformed request: {e}") })))
                .into_response()
        }
    };
    if matches!(&*st.status.read().unwrap(), Status::Running) {
        return (StatusCode::SERVICE_UNAVAILABLE, Json(json!({ "error": "inference is still running" })))
            .into_response();
    }
    let task = tokio::task::spawn_blocking(move || {
        let guard = st.status.read().unwrap();
        match &*guard {
            Status::Done { checked, .. } => Some(st.checker.recheck(checked, &req)),
            _ => None,
        }
    });
    match task.await {
        Ok(Some(Ok(resp))) => Json(resp).into_response(),
        Ok(Some(Err(e @ (RecheckError::UnknownTarget(_) | RecheckError::Parse { .. })))) => {
            (StatusCode::BAD_REQUEST, Json(json!({ "error": e.to_string() }))).into_response()
        }
        Ok(Some(Err(e))) => {
            (StatusCode::INTERNAL_SERVER_ERROR, Json(json!({ "error": e.to_string() }))).into_response()
        }
        Ok(None) => failed("the program did not check"),
        Err(e) => (StatusCode::INTERNAL_SERVER_ERROR, Json(json!({ "error": e.to_string() }))).into_response(),
    }
}

/// `gliq serve`: bind first, then check in the background.
pub fn serve(file: &Path, common: &Common, port: u16) -> i32 {
    let text = match read_source(file) {
        Ok(t) => t,
        Err(code) => return code,
    };
    let options = common.options();
    let checker = match Checker::new(options.clone()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let state = AppState::new(checker, options);
    let runtime = tokio::runtime::Runtime::new().expect("tokio runtime");
    runtime.block_on(async move {
        let listener = match tokio::net::TcpListener::bind(("127.0.0.1", port)).await {
            Ok(l) => l,
            Err(e) => {
                eprintln!("error: cannot listen on port {port}: {e}");
                return EXIT_USAGE;
            }
        };
        let addr = listener.local_addr().expect("bound address");
        println!("serving {} on http://{addr}", file.display());
        let worker = state.clone();
        let name = file.display().to_string();
        tokio::task::spawn_blocking(move || worker.run_check(&name, &text));
        match axum::serve(listener, router(state)).await {
            Ok(()) => EXIT_OK,
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_USAGE
            }
        }
    })
}
