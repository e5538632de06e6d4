use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use evalarena::arena::Leaderboard;
use evalarena::corpus::{InstructionRecord, ResponseSet};
use evalarena::{Arena, ArenaConfig, ClientMatchup, EvalDataset};
use evalarena_server::{router, AppState, ErrorBody, Health, TOKEN_HEADER};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

const MODELS: [&str; 3] = ["kestrel-7b", "marmot-13b", "otter-3b"];

fn dataset() -> EvalDataset {
    let cats = ["Hikaye", "Matematik", "Benzerlik"];
    EvalDataset::new(
        "v",
        (0..12)
            .map(|i| InstructionRecord {
                id: format!("q{i:02}"),
                category: Some(cats[i % 3].to_string()),
                instruction: format!("soru {i}"),
                reference_answer: Some(format!("cevap {i}")),
            })
            .collect(),
    )
    .unwrap()
}

fn sets(ds: &EvalDataset) -> Vec<ResponseSet> {
    MODELS
        .iter()
        .enumerate()
        .map(|(m, name)| ResponseSet {
            model_name: name.to_string(),
            dataset_name: ds.name().to_string(),
            responses: ds
                .records()
                .iter()
                .map(|r| (r.id.clone(), format!("yanıt {m} için {}", r.id)))
                .collect(),
        })
        .collect()
}

fn arena(log: &Path, seed: u64) -> Arena {
    let ds = dataset();
    let s = sets(&ds);
    let cfg = ArenaConfig {
        scheduler_seed: seed,
        ..ArenaConfig::default()
    };
    Arena::open(ds, s, log, cfg).unwrap()
}

struct Client {
    app: Router,
    token: Option<String>,
}

impl Client {
    fn new(state: Arc<AppState>) -> Self {
        Self {
            app: router(state),
            token: None,
        }
    }

    async fn send(&self, req: Request<Body>) -> (StatusCode, String) {
        let resp = self.app.clone().oneshot(req).await.unwrap();
        let status = resp.status();
        let bytes = resp.into_body().collect().await.unwrap().to_bytes();
        (status, String::from_utf8(bytes.to_vec()).unwrap())
    }

    fn builder(&self, method: &str, uri: &str) -> axum::http::request::Builder {
        let b = Request::builder().method(method).uri(uri);
        match &self.token {
            Some(t) => b.header(TOKEN_HEADER, t),
            None => b,
        }
    }

    async fn get(&self, uri: &str) -> (StatusCode, String) {
        self.send(self.builder("GET", uri).body(Body::empty()).unwrap())
            .await
    }

    async fn post(&self, uri: &str, body: &Value) -> (StatusCode, String) {
        let req = self
            .builder("POST", uri)
            .header("content-type", "application/json")
            .body(Body::from(body.to_string()))
            .unwrap();
        self.send(req).await
    }

    async fn matchup(&self, judge: &str) -> ClientMatchup {
        let (status, body) = self.get(&format!("/api/match?judge={judge}")).await;
        assert_eq!(status, StatusCode::OK, "{body}");
        serde_json::from_str(&body).unwrap()
    }

    async fn vote(&self, match_id: &str, outcome: &str, judge: &str) -> (StatusCode, String) {
        self.post(
            "/api/vote",
            &json!({"match_id": match_id, "outcome": outcome, "judge_id": judge}),
        )
        .await
    }
}

fn assert_anonymous(body: &str) {
    for m in MODELS {
        assert!(!body.contains(m), "payload leaks {m}: {body}");
    }
    for key in [
        "model_a",
        "model_b",
        "model_name",
        "left_model",
        "right_model",
    ] {
        assert!(!body.contains(key), "payload leaks field {key}: {body}");
    }
}

#[tokio::test]
async fn voting_payloads_never_name_models() {
    let dir = tempfile::tempdir().unwrap();
    let client = Client::new(AppState::new(arena(&dir.path().join("votes.log"), 1), None));
    let outcomes = ["LEFT", "RIGHT", "BOTH_GOOD", "NEITHER"];
    let mut bodies = Vec::new();
    for i in 0..60 {
        let judge = format!("j{}", i % 4);
        let (_, raw) = client.get(&format!("/api/match?judge={judge}")).await;
        let m: ClientMatchup = serde_json::from_str(&raw).unwrap();
        bodies.push(raw);
        let (status, ack) = client.vote(&m.match_id, outcomes[i % 4], &judge).await;
        assert_eq!(status, StatusCode::OK);
        bodies.push(ack);
        // Error paths: replay, wrong judge, unknown id, malformed outcome.
        bodies.push(client.vote(&m.match_id, "LEFT", &judge).await.1);
        bodies.push(client.vote(&m.match_id, "LEFT", "intruder").await.1);
    }
    bodies.push(client.vote("nope", "LEFT", "j0").await.1);
    bodies.push(
        client
            .post(
                "/api/vote",
                &json!({"match_id": "x", "outcome": "kestrel-7b"}),
            )
            .await
            .1,
    );
    bodies.push(client.get("/api/match").await.1);
    for b in &bodies {
        assert_anonymous(b);
    }
}

#[tokio::test]
async fn error_statuses() {
    let dir = tempfile::tempdir().unwrap();
    let client = Client::new(AppState::new(arena(&dir.path().join("votes.log"), 2), None));
    let m = client.matchup("alice").await;

    let (status, body) = client.vote(&m.match_id, "LEFT", "bob").await;
    assert_eq!(status, StatusCode::FORBIDDEN);
    assert_eq!(
        serde_json::from_str::<ErrorBody>(&body).unwrap().error,
        "judge_mismatch"
    );

    assert_eq!(
        client.vote(&m.match_id, "LEFT", "alice").await.0,
        StatusCode::OK
    );
    assert_eq!(
        client.vote(&m.match_id, "RIGHT", "alice").await.0,
        StatusCode::CONFLICT
    );
    assert_eq!(
        client.vote("deadbeef", "LEFT", "alice").await.0,
        StatusCode::NOT_FOUND
    );
    assert_eq!(
        client.vote(&m.match_id, "SIDEWAYS", "alice").await.0,
        StatusCode::BAD_REQUEST
    );
    assert_eq!(client.get("/api/match").await.0, StatusCode::BAD_REQUEST);
    assert_eq!(client.get("/api/nowhere").await.0, StatusCode::NOT_FOUND);

    let (_, health) = client.get("/api/health").await;
    let h: Health = serde_json::from_str(&health).unwrap();
    assert_eq!((h.votes, h.models), (1, 3));
}

#[tokio::test]
async fn shared_token_is_enforced() {
    let dir = tempfile::tempdir().unwrap();
    let state = AppState::new(
        arena(&dir.path().join("votes.log"), 3),
        Some("s3cret".into()),
    );
    let mut client = Client::new(state);
    assert_eq!(
        client.get("/api/match?judge=a").await.0,
        StatusCode::UNAUTHORIZED
    );
    client.token = Some("wrong".into());
    assert_eq!(
        client.get("/api/match?judge=a").await.0,
        StatusCode::UNAUTHORIZED
    );
    client.token = Some("s3cret".into());
    let m = client.matchup("a").await;
    assert_eq!(
        client.vote(&m.match_id, "LEFT", "a").await.0,
        StatusCode::OK
    );
}

#[tokio::test]
async fn balanced_pairs_after_three_thousand_votes() {
    let dir = tempfile::tempdir().unwrap();
    let state = AppState::new(arena(&dir.path().join("votes.log"), 4), None);
    let client = Client::new(state.clone());
    for i in 0..3000 {
        let judge = format!("j{}", i % 7);
        let m = client.matchup(&judge).await;
        assert_eq!(
            client.vote(&m.match_id, "BOTH_GOOD", &judge).await.0,
            StatusCode::OK
        );
    }
    let counts = state.with_arena(|a| a.pair_counts());
    let n: Vec<u64> = counts.iter().map(|(_, c)| *c).collect();
    assert_eq!(n.iter().sum::<u64>(), 3000);
    assert!(
        n.iter().max().unwrap() - n.iter().min().unwrap() <= 1,
        "{counts:?}"
    );

    let mut per_pair_record: BTreeMap<(String, String, String), u64> = BTreeMap::new();
    for v in state.with_arena(|a| a.votes().to_vec()) {
        let (x, y) = if v.model_a < v.model_b {
            (v.model_a, v.model_b)
        } else {
            (v.model_b, v.model_a)
        };
        *per_pair_record.entry((x, y, v.record_id)).or_insert(0) += 1;
    }
    let spread = per_pair_record.values().max().unwrap() - per_pair_record.values().min().unwrap();
    assert!(spread <= 1, "record spread {spread}");
}

#[tokio::test]
async fn left_side_is_a_fair_coin() {
    let dir = tempfile::tempdir().unwrap();
    let state = AppState::new(arena(&dir.path().join("votes.log"), 5), None);
    let client = Client::new(state.clone());
    let mut left_first = 0u32;
    let trials = 10_000;
    for _ in 0..trials {
        let m = client.matchup("j").await;
        let (l, r) = state.with_arena(|a| {
            let mm = a.matchup(&m.match_id).unwrap();
            (mm.left_model.clone(), mm.right_model.clone())
        });
        if l < r {
            left_first += 1;
        }
    }
    let freq = left_first as f64 / trials as f64;
    assert!((freq - 0.5).abs() <= 0.02, "{freq}");
}

#[tokio::test]
async fn restart_replays_the_log_losslessly() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("votes.log");
    let before = {
        let state = AppState::new(arena(&log, 6), None);
        let client = Client::new(state.clone());
        for i in 0..150 {
            let judge = format!("j{}", i % 5);
            let m = client.matchup(&judge).await;
            let outcome = ["LEFT", "RIGHT", "LEFT", "BOTH_GOOD", "NEITHER"][i % 5];
            client.vote(&m.match_id, outcome, &judge).await;
        }
        // An unresolved matchup is not persisted.
        client.matchup("j0").await;
        let (_, board) = client.get("/api/leaderboard").await;
        let votes = state.with_arena(|a| a.votes().to_vec());
        (votes, serde_json::from_str::<Leaderboard>(&board).unwrap())
    };

    // Simulate a crash in the middle of an append.
    use std::io::Write;
    std::fs::OpenOptions::new()
        .append(true)
        .open(&log)
        .unwrap()
        .write_all(br#"{"vote_id":"torn","record_id":"q0"#)
        .unwrap();

    let state = AppState::new(arena(&log, 6), None);
    let client = Client::new(state.clone());
    assert_eq!(state.with_arena(|a| a.votes().to_vec()), before.0);
    let (_, board) = client.get("/api/leaderboard").await;
    assert_eq!(
        serde_json::from_str::<Leaderboard>(&board).unwrap(),
        before.1
    );
    assert_eq!(before.1.version, 150);
    assert_eq!(before.1.judges.values().sum::<u64>(), 150);

    let m = client.matchup("j9").await;
    assert_eq!(
        client.vote(&m.match_id, "LEFT", "j9").await.0,
        StatusCode::OK
    );
    let text = std::fs::read_to_string(&log).unwrap();
    assert_eq!(text.lines().count(), 151);
    assert!(text.ends_with('\n'));
}

#[tokio::test]
async fn leaderboard_is_cached_until_a_vote_lands() {
    let dir = tempfile::tempdir().unwrap();
    let client = Client::new(AppState::new(arena(&dir.path().join("votes.log"), 7), None));
    for _ in 0..20 {
        let m = client.matchup("j").await;
        client.vote(&m.match_id, "LEFT", "j").await;
    }
    let (_, a) = client.get("/api/leaderboard").await;
    let (_, b) = client.get("/api/leaderboard").await;
    assert_eq!(a, b);
    let first: Leaderboard = serde_json::from_str(&a).unwrap();
    assert_eq!(first.version, 20);
    assert_eq!(first.ratings.rows.len(), 3);
    let total: f64 = first.ratings.rows.iter().map(|r| r.elo_sequential).sum();
    assert!((total - 3000.0).abs() < 1e-9);

    let (_, cats) = client.get("/api/categories").await;
    let cats: Value = serde_json::from_str(&cats).unwrap();
    assert_eq!(cats, serde_json::to_value(&first.categories).unwrap());

    let m = client.matchup("j").await;
    client.vote(&m.match_id, "RIGHT", "j").await;
    let (_, c) = client.get("/api/leaderboard").await;
    assert_eq!(serde_json::from_str::<Leaderboard>(&c).unwrap().version, 21);
}
