//! Local HTTP session service driven by the browser UI.
//!
//! A session owns an instance and a linear history of states. Undo and redo
//! only move the cursor; pushing from an earlier cursor drops the redo tail.
//! Every request body and response is JSON, and errors come back as
//! `400 {error, detail}`.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use gas_core::engine::{Game, GameInstance, GameState, SquareId};
use gas_core::reduction::{reduce_with_layout, InstanceStats, ReductionStats};
use gas_core::solver::DEFAULT_SAT_GUARD;
use gas_core::{brute_force_sat, model, parse_dimacs, preprocess, synthesize_witness, CnfFormula, PushTrace};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

#[derive(Debug)]
pub struct ApiError {
    pub error: &'static str,
    pub detail: String,
}

impl ApiError {
    fn new(error: &'static str, detail: impl ToString) -> Self {
        ApiError { error, detail: detail.to_string() }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (StatusCode::BAD_REQUEST, Json(json!({ "error": self.error, "detail": self.detail }))).into_response()
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        ApiError::new("bad_request", e.body_text())
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

pub struct Session {
    game: Game,
    history: Vec<GameState>,
    /// Square pushed to reach `history[k + 1]`.
    moves: Vec<SquareId>,
    cursor: usize,
    last_used: Instant,
}

impl Session {
    pub fn new(instance: GameInstance) -> Result<Self, ApiError> {
        let game = Game::new(instance).map_err(|e| ApiError::new("invalid_instance", e))?;
        let initial = game.initial_state();
        Ok(Session { game, history: vec![initial], moves: Vec::new(), cursor: 0, last_used: Instant::now() })
    }

    pub fn current(&self) -> &GameState {
        &self.history[self.cursor]
    }

    pub fn push(&mut self, id: &SquareId) -> Result<(), ApiError> {
        let next = self.game.push(self.current(), id).map_err(|e| ApiError::new("unknown_square", e))?;
        self.history.truncate(self.cursor + 1);
        self.moves.truncate(self.cursor);
        self.history.push(next);
        self.moves.push(id.clone());
        self.cursor += 1;
        Ok(())
    }

    /// Steps back one state; a no-op at the initial state.
    pub fn undo(&mut self) {
        self.cursor = self.cursor.saturating_sub(1);
    }

    /// Steps forward one state; a no-op at the end of history.
    pub fn redo(&mut self) {
        if self.cursor + 1 < self.history.len() {
            self.cursor += 1;
        }
    }

    /// Back to the initial state, keeping history for redo.
    pub fn reset(&mut self) {
        self.cursor = 0;
    }

    /// The moves leading from the initial state to the cursor.
    pub fn trace(&self) -> PushTrace {
        PushTrace::new(self.moves[..self.cursor].to_vec())
    }

    pub fn view(&self) -> StateView {
        let state = self.current();
        let instance = self.game.instance();
        let mut positions = Map::new();
        let mut directions = Map::new();
        for (spec, sq) in instance.squares.iter().zip(&state.squares) {
            positions.insert(spec.id.as_str().to_owned(), json!([sq.pos.x, sq.pos.y]));
            directions.insert(spec.id.as_str().to_owned(), json!(sq.dir));
        }
        // ruin is only decidable for down-left instances
        let ruined = model::ruined_squares(instance, state).map(|s| s.into_iter().collect()).unwrap_or_default();
        StateView {
            positions,
            directions,
            pushes: state.pushes,
            won: self.game.is_won(state),
            ruined,
            history_length: self.history.len(),
            cursor: self.cursor,
        }
    }
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct StateView {
    pub positions: Map<String, Value>,
    pub directions: Map<String, Value>,
    pub pushes: u64,
    pub won: bool,
    pub ruined: Vec<SquareId>,
    pub history_length: usize,
    pub cursor: usize,
}

#[derive(Clone)]
pub struct AppState {
    sessions: Arc<Mutex<HashMap<String, Arc<Mutex<Session>>>>>,
    next_id: Arc<AtomicU64>,
    idle: Duration,
}

impl AppState {
    pub fn new(idle: Duration) -> Self {
        AppState { sessions: Arc::default(), next_id: Arc::new(AtomicU64::new(1)), idle }
    }

    fn insert(&self, session: Session) -> String {
        let n = self.next_id.fetch_add(1, Ordering::Relaxed);
        let id = format!("s{n:06}");
        self.sessions.lock().unwrap().insert(id.clone(), Arc::new(Mutex::new(session)));
        id
    }

    fn get(&self, id: &str) -> Result<Arc<Mutex<Session>>, ApiError> {
        self.sessions
            .lock()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::new("unknown_session", format!("no session `{id}` (it may have expired)")))
    }

    /// Drops sessions idle for longer than the configured limit. Returns how
    /// many were removed.
    pub fn expire(&self, now: Instant) -> usize {
        let mut sessions = self.sessions.lock().unwrap();
        let before = sessions.len();
        sessions.retain(|_, s| match s.try_lock() {
            Ok(s) => now.saturating_duration_since(s.last_used) <= self.idle,
            // busy right now, so not idle
            Err(_) => true,
        });
        before - sessions.len()
    }

    pub fn session_count(&self) -> usize {
        self.sessions.lock().unwrap().len()
    }

    fn with_session<T>(&self, id: &str, f: impl FnOnce(&mut Session) -> Result<T, ApiError>) -> Result<T, ApiError> {
        let handle = self.get(id)?;
        let mut session = handle.lock().unwrap();
        session.last_used = Instant::now();
        f(&mut session)
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}/state", get(session_state))
        .route("/sessions/{id}/push", post(push))
        .route("/sessions/{id}/undo", post(undo))
        .route("/sessions/{id}/redo", post(redo))
        .route("/sessions/{id}/reset", post(reset))
        .route("/reduce", post(reduce))
        .route("/witness", post(witness))
        .route("/sat", post(sat))
        .with_state(state)
}

/// Serves until ctrl-c, sweeping idle sessions in the background.
pub async fn serve(port: u16, idle: Duration) -> anyhow::Result<()> {
    let state = AppState::new(idle);
    let listener = tokio::net::TcpListener::bind(("127.0.0.1", port))
        .await
        .map_err(|e| anyhow::anyhow!("cannot bind 127.0.0.1:{port}: {e}"))?;
    eprintln!("listening on http://{}", listener.local_addr()?);

    let sweeper = state.clone();
    let period = (idle / 4).max(Duration::from_secs(1));
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(period);
        loop {
            tick.tick().await;
            sweeper.expire(Instant::now());
        }
    });

    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateSession {
    instance: Value,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct Created {
    session_id: String,
}

async fn create_session(
    State(app): State<AppState>,
    body: Result<Json<CreateSession>, JsonRejection>,
) -> ApiResult<Created> {
    let Json(body) = body?;
    // through the file parser so unknown keys are rejected the same way
    let instance = gas_core::format::parse_instance(&body.instance.to_string())
        .map_err(|e| ApiError::new("invalid_instance", e))?;
    let session_id = app.insert(Session::new(instance)?);
    Ok(Json(Created { session_id }))
}

async fn session_state(State(app): State<AppState>, Path(id): Path<String>) -> ApiResult<StateView> {
    app.with_session(&id, |s| Ok(Json(s.view())))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PushBody {
    square: SquareId,
}

async fn push(
    State(app): State<AppState>,
    Path(id): Path<String>,
    body: Result<Json<PushBody>, JsonRejection>,
) -> ApiResult<StateView> {
    let Json(body) = body?;
    app.with_session(&id, |s| {
        s.push(&body.square)?;
        Ok(Json(s.view()))
    })
}

async fn undo(State(app): State<AppState>, Path(id): Path<String>) -> ApiResult<StateView> {
    app.with_session(&id, |s| {
        s.undo();
        Ok(Json(s.view()))
    })
}

async fn redo(State(app): State<AppState>, Path(id): Path<String>) -> ApiResult<StateView> {
    app.with_session(&id, |s| {
        s.redo();
        Ok(Json(s.view()))
    })
}

async fn reset(State(app): State<AppState>, Path(id): Path<String>) -> ApiResult<StateView> {
    app.with_session(&id, |s| {
        s.reset();
        Ok(Json(s.view()))
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DimacsBody {
    dimacs: String,
}

/// Parses and preprocesses, so the service accepts the same files as the CLI.
pub fn load_formula(text: &str) -> Result<CnfFormula, ApiError> {
    let raw = parse_dimacs(text).map_err(|e| ApiError::new("invalid_dimacs", e))?;
    Ok(preprocess(&raw).0)
}

#[derive(Serialize)]
struct Reduced {
    instance: GameInstance,
    stats: ReductionStats,
}

async fn reduce(body: Result<Json<DimacsBody>, JsonRejection>) -> ApiResult<Reduced> {
    let Json(body) = body?;
    let formula = load_formula(&body.dimacs)?;
    let r = reduce_with_layout(&formula).map_err(|e| ApiError::new("reduction_failed", e))?;
    let stats = ReductionStats {
        num_vars: formula.num_vars,
        num_clauses: formula.num_clauses(),
        literal_occurrences: formula.literal_occurrences(),
        instance: InstanceStats::of(&r.instance),
    };
    Ok(Json(Reduced { instance: r.instance, stats }))
}

#[derive(Serialize)]
struct Witness {
    trace: PushTrace,
}

async fn witness(body: Result<Json<DimacsBody>, JsonRejection>) -> ApiResult<Witness> {
    let Json(body) = body?;
    let formula = load_formula(&body.dimacs)?;
    let model = brute_force_sat(&formula, DEFAULT_SAT_GUARD)
        .map_err(|e| ApiError::new("too_large", e))?
        .ok_or_else(|| ApiError::new("unsatisfiable", "the formula has no satisfying assignment"))?;
    let trace = synthesize_witness(&formula, &model).map_err(|e| ApiError::new("witness_failed", e))?;
    Ok(Json(Witness { trace }))
}

#[derive(Serialize)]
struct SatAnswer {
    satisfiable: bool,
    /// DIMACS literals, one per variable.
    #[serde(skip_serializing_if = "Option::is_none")]
    assignment: Option<Vec<i64>>,
}

async fn sat(body: Result<Json<DimacsBody>, JsonRejection>) -> ApiResult<SatAnswer> {
    let Json(body) = body?;
    let formula = load_formula(&body.dimacs)?;
    let model = brute_force_sat(&formula, DEFAULT_SAT_GUARD).map_err(|e| ApiError::new("too_large", e))?;
    Ok(Json(SatAnswer {
        satisfiable: model.is_some(),
        assignment: model.map(|a| signed_literals(&a)),
    }))
}

pub fn signed_literals(a: &gas_core::Assignment) -> Vec<i64> {
    a.0.iter().enumerate().map(|(i, &v)| if v { i as i64 + 1 } else { -(i as i64 + 1) }).collect()
}
