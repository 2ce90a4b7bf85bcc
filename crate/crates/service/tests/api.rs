use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;
use tron_core::engine::replay;
use tron_core::format::parse_instance;
use tron_core::Move;
use tron_service::{router, router_with, AppState};

const P5: &str = "tron v1\nn 5\nw 0 1/5\nw 1 1/5\nw 2 1/5\nw 3 1/5\nw 4 1/5\ne 0 1\ne 1 2\ne 2 3\ne 3 4\n";

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri).header("content-type", "application/json");
    let req = match body {
        Some(b) => req.body(Body::from(b.to_string())).unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = serde_json::from_slice(&bytes).unwrap_or(Value::Null);
    (status, value)
}

async fn create(app: &Router, body: Value) -> (String, Value) {
    let (status, v) = call(app, "POST", "/games", Some(body)).await;
    assert_eq!(status, StatusCode::OK, "{v}");
    (v["id"].as_str().unwrap().to_string(), v)
}

async fn play(app: &Router, id: &str, mv: &str) -> (StatusCode, Value) {
    call(app, "POST", &format!("/games/{id}/moves"), Some(json!({ "move": mv }))).await
}

fn moves(v: &Value) -> Vec<String> {
    v.as_array().unwrap().iter().map(|m| m.as_str().unwrap().to_string()).collect()
}

#[tokio::test]
async fn new_alice_session_awaits_placement() {
    let app = router();
    let (_, v) = create(&app, json!({ "instance": P5 })).await;
    assert_eq!(v["state"]["phase"], "AwaitAlicePlacement");
    assert_eq!(v["state"]["turn"], "Alice");
    assert_eq!(moves(&v["legal_moves"]), ["A+0", "A+1", "A+2", "A+3", "A+4"]);
    assert_eq!(v["state"]["instance"]["weights"][0]["exact"], "1/5");
    assert_eq!(v["state"]["instance"]["weights"][0]["decimal"], 0.2);
    assert!(v.get("outcome").is_none());
}

#[tokio::test]
async fn engine_places_first_when_human_is_bob() {
    let app = router();
    let (_, v) = create(&app, json!({ "generator": { "family": "path", "n": 5 }, "human_side": "bob" })).await;
    assert_eq!(v["state"]["alice_path"], json!([2]));
    assert_eq!(v["state"]["turn"], "Bob");
    assert_eq!(v["state"]["log"][0]["move"], "A+2");
    assert_eq!(v["state"]["log"][0]["by"], "engine");
}

#[tokio::test]
async fn malformed_upload_reports_the_line() {
    let app = router();
    let (status, v) = call(&app, "POST", "/games", Some(json!({ "instance": "tron v1\nn 2\nw 0 1/2\nw 1 x\n" }))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(v["error"].as_str().unwrap().contains("line 4"), "{v}");
    let (status, _) = call(&app, "POST", "/games", Some(json!({}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn engine_replies_to_placement() {
    let app = router();
    let (id, _) = create(&app, json!({ "instance": P5 })).await;
    let (status, v) = play(&app, &id, "A+2").await;
    assert_eq!(status, StatusCode::OK, "{v}");
    assert_eq!(v["engine_move"], "B+0");
    assert_eq!(v["state"]["bob_path"], json!([0]));
    assert_eq!(v["state"]["phase"], "Running");
}

#[tokio::test]
async fn illegal_moves_are_rejected_without_mutation() {
    let app = router();
    let (id, _) = create(&app, json!({ "instance": P5 })).await;
    play(&app, &id, "A+2").await;
    let (_, before) = call(&app, "GET", &format!("/games/{id}"), None).await;
    for bad in ["A>0", "A>4", "B>1", "A+3", "garbage"] {
        let (status, v) = play(&app, &id, bad).await;
        assert!(status.is_client_error(), "{bad}: {status}");
        assert_eq!(moves(&v["legal_moves"]), ["A>1", "A>3"], "{bad}");
    }
    let (_, after) = call(&app, "GET", &format!("/games/{id}"), None).await;
    assert_eq!(before, after);
}

#[tokio::test]
async fn following_hints_reaches_the_game_value() {
    let app = router();
    let (id, _) = create(&app, json!({ "instance": P5 })).await;
    let (status, h) = call(&app, "GET", &format!("/games/{id}/hint"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(h["move"], "A+2");
    assert_eq!(h["value"]["exact"], "-1/5");
    loop {
        let (_, before) = call(&app, "GET", &format!("/games/{id}"), None).await;
        if before.get("outcome").is_some() {
            break;
        }
        let (_, h) = call(&app, "GET", &format!("/games/{id}/hint"), None).await;
        assert_eq!(h["value"]["exact"], "-1/5");
        let (_, unchanged) = call(&app, "GET", &format!("/games/{id}"), None).await;
        assert_eq!(before, unchanged);
        let (status, v) = play(&app, &id, h["move"].as_str().unwrap()).await;
        assert_eq!(status, StatusCode::OK, "{v}");
    }
    let (_, end) = call(&app, "GET", &format!("/games/{id}"), None).await;
    assert_eq!(end["outcome"]["value"]["exact"], "-1/5");
    assert_eq!(end["outcome"]["value"]["decimal"], -0.2);
    assert_eq!(end["state"]["phase"], "Finished");
    let (status, _) = call(&app, "GET", &format!("/games/{id}/hint"), None).await;
    assert_eq!(status, StatusCode::CONFLICT);
    let (status, _) = play(&app, &id, "A--").await;
    assert_eq!(status, StatusCode::CONFLICT);

    // audit: the event log replays to the reported state
    let inst = Arc::new(parse_instance(P5, false).unwrap());
    let log: Vec<Move> = end["state"]["log"].as_array().unwrap().iter().map(|e| e["move"].as_str().unwrap().parse().unwrap()).collect();
    let replayed = replay(inst, &log).unwrap();
    assert_eq!(json!(replayed.alice_path().vertices()), end["state"]["alice_path"]);
    assert_eq!(json!(replayed.bob_path().vertices()), end["state"]["bob_path"]);
    assert_eq!(replayed.outcome().unwrap().value.to_string(), "-1/5");
}

#[tokio::test]
async fn analysis_documents() {
    let app = router();
    let (id, _) = create(&app, json!({ "instance": P5 })).await;
    let (status, a) = call(&app, "GET", &format!("/games/{id}/analysis"), None).await;
    assert_eq!(status, StatusCode::OK, "{a}");
    let values: Vec<&str> = a["per_start"].as_array().unwrap().iter().map(|s| s["value"]["exact"].as_str().unwrap()).collect();
    assert_eq!(values, ["3/5", "1/5", "-1/5", "1/5", "3/5"]);
    assert_eq!(a["optimal_starts"], json!([2]));
    assert!(a["decomposition"].is_object());
    assert!(a["certificates"]["bounds"].is_array());

    let k13 = "tron v1\nn 4\nw 0 1/4\nw 1 1/4\nw 2 1/4\nw 3 1/4\ne 0 1\ne 0 2\ne 0 3\n";
    let (id, _) = create(&app, json!({ "instance": k13 })).await;
    let (_, a) = call(&app, "GET", &format!("/games/{id}/analysis"), None).await;
    assert_eq!(a["delta"]["exact"], "-1/4");
    assert!(a["decomposition"]["crossing_edge"].is_array());
    assert!(a["decomposition_table"].as_str().unwrap().contains("crossing edge"));

    let (id, _) = create(&app, json!({ "generator": { "family": "cycle", "n": 6, "weights": "random:9", "seed": 4 } })).await;
    let (_, a) = call(&app, "GET", &format!("/games/{id}/analysis"), None).await;
    assert_eq!(a["per_start"].as_array().unwrap().len(), 6);
    assert!(a.get("decomposition").is_none());
    assert!(a.get("certificates").is_none());
}

#[tokio::test]
async fn oversized_optimal_sessions_are_rejected() {
    let app = router();
    let (status, v) = call(&app, "POST", "/games", Some(json!({ "generator": { "family": "cycle", "n": 30 } }))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(v["error"].as_str().unwrap().contains("budget"), "{v}");
    let (status, _) = call(&app, "POST", "/games", Some(json!({ "generator": { "family": "path", "n": 200 } }))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let (status, _) = call(
        &app,
        "POST",
        "/games",
        Some(json!({ "generator": { "family": "path", "n": 200 }, "engine_policy": "longestpath" })),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
}

#[tokio::test]
async fn policies_and_sides() {
    let app = router();
    let (status, _) =
        call(&app, "POST", "/games", Some(json!({ "instance": P5, "engine_policy": "longestpath", "human_side": "bob" }))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = call(&app, "POST", "/games", Some(json!({ "instance": P5, "engine_policy": "avoidbob:u=1" }))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (_, v) =
        create(&app, json!({ "instance": P5, "engine_policy": "avoidbob:auto", "human_side": "bob" })).await;
    assert_eq!(v["state"]["engine_policy"], "avoidbob:auto");
    assert_eq!(v["state"]["alice_path"].as_array().unwrap().len(), 1);

    let (id, _) = create(&app, json!({ "instance": P5, "engine_policy": "longestpath" })).await;
    let mut state = play(&app, &id, "A+0").await.1;
    while state.get("outcome").is_none() {
        let mv = moves(&state["legal_moves"])[0].clone();
        state = play(&app, &id, &mv).await.1;
    }
    assert!(state["outcome"]["value"]["exact"].is_string());
}

#[tokio::test]
async fn unknown_sessions_are_not_found() {
    let app = router();
    for uri in ["/games/nope", "/games/nope/hint", "/games/nope/analysis"] {
        let (status, _) = call(&app, "GET", uri, None).await;
        assert_eq!(status, StatusCode::NOT_FOUND);
    }
    let (status, _) = play(&app, "nope", "A+0").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn sessions_are_isolated_under_concurrency() {
    let app = router_with(Arc::new(AppState::default()));
    let mut ids = Vec::new();
    for _ in 0..8 {
        ids.push(create(&app, json!({ "instance": P5 })).await.0);
    }
    let tasks: Vec<_> = ids
        .iter()
        .enumerate()
        .map(|(i, id)| {
            let (app, id) = (app.clone(), id.clone());
            tokio::spawn(async move { play(&app, &id, &format!("A+{}", i % 5)).await })
        })
        .collect();
    for t in tasks {
        assert_eq!(t.await.unwrap().0, StatusCode::OK);
    }
    for (i, id) in ids.iter().enumerate() {
        let (_, v) = call(&app, "GET", &format!("/games/{id}"), None).await;
        assert_eq!(v["state"]["alice_path"], json!([i % 5]));
        assert_eq!(v["state"]["log"].as_array().unwrap().len(), 2);
    }
}
