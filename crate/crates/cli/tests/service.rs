use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use gas_cli::service::{router, AppState, StateView};
use gas_core::engine::{Game, SquareId};
use gas_core::format::{instance_to_string, parse_instance};
use gas_core::{reduce, CnfFormula, GameInstance};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

const SAMPLE: &str = "c sample\np cnf 4 4\n1 2 0\n1 -3 4 0\n-1 -2 -4 0\n2 -3 4 0\n";

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri).header("content-type", "application/json");
    let req = req.body(body.map_or_else(Body::empty, |b| Body::from(b.to_string()))).unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

fn sample_instance() -> GameInstance {
    reduce(&CnfFormula::from_clauses(4, &[&[1, 2], &[1, -3, 4], &[-1, -2, -4], &[2, -3, 4]])).unwrap()
}

async fn open(app: &Router, instance: &GameInstance) -> String {
    let (status, body) = call(app, "POST", "/sessions", Some(json!({ "instance": instance }))).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    body["sessionId"].as_str().unwrap().to_owned()
}

fn view_of(game: &Game, state: &gas_core::GameState) -> (Value, Value) {
    let mut pos = serde_json::Map::new();
    let mut dir = serde_json::Map::new();
    for (spec, sq) in game.instance().squares.iter().zip(&state.squares) {
        pos.insert(spec.id.as_str().into(), json!([sq.pos.x, sq.pos.y]));
        dir.insert(spec.id.as_str().into(), json!(sq.dir));
    }
    (Value::Object(pos), Value::Object(dir))
}

#[tokio::test]
async fn service_push_matches_engine_push() {
    let app = router(AppState::new(Duration::from_secs(60)));
    let instance = sample_instance();
    let game = Game::new(instance.clone()).unwrap();
    let id = open(&app, &instance).await;

    // a mix of useful and ruinous pushes, cycling through the squares
    let ids: Vec<SquareId> = (0..20).map(|k| game.id_of((k * 7) % game.square_count()).clone()).collect();
    let mut state = game.initial_state();
    for (k, sq) in ids.iter().enumerate() {
        let (status, body) = call(&app, "POST", &format!("/sessions/{id}/push"), Some(json!({ "square": sq }))).await;
        assert_eq!(status, StatusCode::OK, "{body}");
        state = game.push(&state, sq).unwrap();
        let (pos, dir) = view_of(&game, &state);
        assert_eq!(body["positions"], pos, "after push {k}");
        assert_eq!(body["directions"], dir);
        assert_eq!(body["pushes"], json!(k + 1));
        assert_eq!(body["cursor"], json!(k + 1));
        assert_eq!(body["history_length"], json!(k + 2));
        let ruined: Vec<_> = gas_core::model::ruined_squares(&instance, &state).unwrap().into_iter().collect();
        assert_eq!(body["ruined"], json!(ruined));
    }
    let (_, got) = call(&app, "GET", &format!("/sessions/{id}/state"), None).await;
    let view: StateView = serde_json::from_value(got).unwrap();
    assert_eq!(view.cursor, 20);
}

#[tokio::test]
async fn undo_redo_and_branching() {
    let app = router(AppState::new(Duration::from_secs(60)));
    let instance = sample_instance();
    let game = Game::new(instance.clone()).unwrap();
    let id = open(&app, &instance).await;
    let (a, b) = (game.id_of(0).clone(), game.id_of(1).clone());

    let (_, initial) = call(&app, "GET", &format!("/sessions/{id}/state"), None).await;
    let (_, after_a) = call(&app, "POST", &format!("/sessions/{id}/push"), Some(json!({ "square": a }))).await;
    let (_, after_ab) = call(&app, "POST", &format!("/sessions/{id}/push"), Some(json!({ "square": b }))).await;

    let (_, undone) = call(&app, "POST", &format!("/sessions/{id}/undo"), None).await;
    assert_eq!(undone["positions"], after_a["positions"]);
    assert_eq!(undone["pushes"], after_a["pushes"]);
    assert_eq!((undone["cursor"].clone(), undone["history_length"].clone()), (json!(1), json!(3)));
    let (_, redone) = call(&app, "POST", &format!("/sessions/{id}/redo"), None).await;
    assert_eq!(redone, after_ab);
    let (_, again) = call(&app, "POST", &format!("/sessions/{id}/redo"), None).await;
    assert_eq!(again, after_ab, "redo at the end is a no-op");

    let (_, reset) = call(&app, "POST", &format!("/sessions/{id}/reset"), None).await;
    assert_eq!(reset["positions"], initial["positions"]);
    assert_eq!((reset["cursor"].clone(), reset["history_length"].clone()), (json!(0), json!(3)));
    let (_, floor) = call(&app, "POST", &format!("/sessions/{id}/undo"), None).await;
    assert_eq!(floor["cursor"], json!(0));

    // pushing from the start drops the redo tail
    let (_, branched) = call(&app, "POST", &format!("/sessions/{id}/push"), Some(json!({ "square": b }))).await;
    assert_eq!((branched["cursor"].clone(), branched["history_length"].clone()), (json!(1), json!(2)));
    let (_, stuck) = call(&app, "POST", &format!("/sessions/{id}/redo"), None).await;
    assert_eq!(stuck, branched);
}

#[tokio::test]
async fn witness_playback_wins_through_the_service() {
    let app = router(AppState::new(Duration::from_secs(60)));
    let (status, reduced) = call(&app, "POST", "/reduce", Some(json!({ "dimacs": SAMPLE }))).await;
    assert_eq!(status, StatusCode::OK, "{reduced}");
    assert_eq!(reduced["stats"]["squares"], json!(31));
    assert_eq!(reduced["stats"]["arrows"], json!(125));
    let instance: GameInstance = parse_instance(&reduced["instance"].to_string()).unwrap();
    assert_eq!(instance, sample_instance());

    let (status, w) = call(&app, "POST", "/witness", Some(json!({ "dimacs": SAMPLE }))).await;
    assert_eq!(status, StatusCode::OK);
    let id = open(&app, &instance).await;
    let mut last = Value::Null;
    for sq in w["trace"].as_array().unwrap() {
        last = call(&app, "POST", &format!("/sessions/{id}/push"), Some(json!({ "square": sq }))).await.1;
    }
    assert_eq!(last["won"], json!(true));
    assert_eq!(last["ruined"], json!([]));
}

#[tokio::test]
async fn sat_endpoint() {
    let app = router(AppState::new(Duration::from_secs(60)));
    let (_, yes) = call(&app, "POST", "/sat", Some(json!({ "dimacs": SAMPLE }))).await;
    assert_eq!(yes["satisfiable"], json!(true));
    let a: Vec<i64> = serde_json::from_value(yes["assignment"].clone()).unwrap();
    let f = gas_core::parse_dimacs(SAMPLE).unwrap();
    assert!(f.is_satisfied_by(&gas_core::Assignment(a.iter().map(|&l| l > 0).collect())));

    let (_, no) = call(&app, "POST", "/sat", Some(json!({ "dimacs": "p cnf 1 2\n1 0\n-1 0\n" }))).await;
    assert_eq!(no, json!({ "satisfiable": false }));
    let (status, w) = call(&app, "POST", "/witness", Some(json!({ "dimacs": "p cnf 1 2\n1 0\n-1 0\n" }))).await;
    assert_eq!((status, w["error"].clone()), (StatusCode::BAD_REQUEST, json!("unsatisfiable")));
}

#[tokio::test]
async fn errors_are_400_with_code_and_detail() {
    let app = router(AppState::new(Duration::from_secs(60)));
    let cases = [
        ("GET", "/sessions/nope/state".to_string(), None, "unknown_session"),
        ("POST", "/reduce".to_string(), Some(json!({ "dimacs": "p cnf 1 1\n2 0\n" })), "invalid_dimacs"),
        ("POST", "/reduce".to_string(), Some(json!({ "text": "x" })), "bad_request"),
        (
            "POST",
            "/sessions".to_string(),
            Some(json!({ "instance": { "squares": [], "arrows": [], "walls": [] } })),
            "invalid_instance",
        ),
    ];
    for (method, uri, body, code) in cases {
        let (status, err) = call(&app, method, &uri, body).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{uri}");
        assert_eq!(err["error"], json!(code), "{uri}: {err}");
        assert!(err["detail"].as_str().is_some_and(|d| !d.is_empty()));
    }
    let (_, d) = call(&app, "POST", "/reduce", Some(json!({ "dimacs": "p cnf 1 1\n2 0\n" }))).await;
    assert!(d["detail"].as_str().unwrap().contains("line 2"));

    let id = open(&app, &sample_instance()).await;
    let (status, err) = call(&app, "POST", &format!("/sessions/{id}/push"), Some(json!({ "square": "zz" }))).await;
    assert_eq!((status, err["error"].clone()), (StatusCode::BAD_REQUEST, json!("unknown_square")));
}

#[tokio::test]
async fn history_replays_to_the_cursor() {
    let app = router(AppState::new(Duration::from_secs(60)));
    let instance = sample_instance();
    let game = Game::new(instance.clone()).unwrap();
    let id = open(&app, &instance).await;
    let mut played = Vec::new();
    for k in 0..12 {
        let uri = match k % 4 {
            3 => format!("/sessions/{id}/undo"),
            _ => format!("/sessions/{id}/push"),
        };
        if k % 4 == 3 {
            call(&app, "POST", &uri, None).await;
            played.pop();
        } else {
            let sq = game.id_of((k * 5) % game.square_count()).clone();
            call(&app, "POST", &uri, Some(json!({ "square": sq }))).await;
            played.push(sq);
        }
    }
    let (_, view) = call(&app, "GET", &format!("/sessions/{id}/state"), None).await;
    let replayed = game.replay(&gas_core::PushTrace::new(played)).unwrap();
    assert_eq!(view["positions"], view_of(&game, &replayed).0);
}

#[tokio::test]
async fn idle_sessions_expire() {
    let state = AppState::new(Duration::from_millis(50));
    let app = router(state.clone());
    let id = open(&app, &sample_instance()).await;
    assert_eq!(state.expire(Instant::now()), 0);
    assert_eq!(state.expire(Instant::now() + Duration::from_secs(1)), 1);
    assert_eq!(state.session_count(), 0);
    let (status, err) = call(&app, "GET", &format!("/sessions/{id}/state"), None).await;
    assert_eq!((status, err["error"].clone()), (StatusCode::BAD_REQUEST, json!("unknown_session")));
}

#[test]
fn reduce_endpoint_matches_instance_file_bytes() {
    let rt = tokio::runtime::Runtime::new().unwrap();
    let app = router(AppState::new(Duration::from_secs(60)));
    let (_, body) = rt.block_on(call(&app, "POST", "/reduce", Some(json!({ "dimacs": SAMPLE }))));
    let via_service = instance_to_string(&parse_instance(&body["instance"].to_string()).unwrap());

    let dir = tempfile::tempdir().unwrap();
    let cnf = dir.path().join("sample.cnf");
    let out = dir.path().join("sample.json");
    std::fs::write(&cnf, SAMPLE).unwrap();
    let status = std::process::Command::new(env!("CARGO_BIN_EXE_gas"))
        .args(["reduce", cnf.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(status.status.success());
    assert_eq!(std::fs::read_to_string(out).unwrap(), via_service);
}
