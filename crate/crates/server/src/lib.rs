//! HTTP front end for the voting arena.
//!
//! Every route speaks JSON. Voting routes never reveal model identities; the
//! leaderboard routes do, since they are the published results.

use std::net::SocketAddr;
use std::sync::{Arc, Mutex, RwLock};

use axum::body::Bytes;
use axum::extract::{Query, State};
use axum::http::{HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use evalarena::arena::{compute_leaderboard, ArenaError, Leaderboard, VoteAck};
use evalarena::{Arena, ClientMatchup, SideOutcome};
use serde::{Deserialize, Serialize};

/// Header carrying the shared judge token when one is configured.
pub const TOKEN_HEADER: &str = "x-judge-token";

pub struct AppState {
    arena: Mutex<Arena>,
    board: RwLock<Option<Leaderboard>>,
    token: Option<String>,
}

impl AppState {
    pub fn new(arena: Arena, token: Option<String>) -> Arc<Self> {
        Arc::new(Self {
            arena: Mutex::new(arena),
            board: RwLock::new(None),
            token: token.filter(|t| !t.is_empty()),
        })
    }

    /// Runs `f` against the arena under its lock.
    pub fn with_arena<T>(&self, f: impl FnOnce(&mut Arena) -> T) -> T {
        let mut guard = self.arena.lock().unwrap_or_else(|p| p.into_inner());
        f(&mut guard)
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    pub message: String,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self {
            status,
            code,
            message: message.into(),
        }
    }
}

impl From<ArenaError> for ApiError {
    fn from(e: ArenaError) -> Self {
        let (status, code) = match &e {
            ArenaError::UnknownMatch(_) => (StatusCode::NOT_FOUND, "unknown_match"),
            ArenaError::AlreadyResolved(_) => (StatusCode::CONFLICT, "already_resolved"),
            ArenaError::JudgeMismatch(_) => (StatusCode::FORBIDDEN, "judge_mismatch"),
            ArenaError::EmptyJudge => (StatusCode::BAD_REQUEST, "empty_judge"),
            _ => (StatusCode::INTERNAL_SERVER_ERROR, "internal"),
        };
        if status == StatusCode::INTERNAL_SERVER_ERROR {
            tracing::error!(error = %e, "arena failure");
            return Self::new(status, code, "internal error");
        }
        Self::new(status, code, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = ErrorBody {
            error: self.code.to_string(),
            message: self.message,
        };
        (self.status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

#[derive(Debug, Deserialize)]
pub struct MatchQuery {
    pub judge: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct VoteRequest {
    pub match_id: String,
    pub outcome: SideOutcome,
    pub judge_id: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub votes: u64,
    pub models: usize,
}

fn check_token(state: &AppState, headers: &HeaderMap) -> Result<(), ApiError> {
    let Some(expected) = &state.token else {
        return Ok(());
    };
    let given = headers.get(TOKEN_HEADER).and_then(|v| v.to_str().ok());
    if given == Some(expected.as_str()) {
        Ok(())
    } else {
        Err(ApiError::new(
            StatusCode::UNAUTHORIZED,
            "unauthorized",
            "missing or wrong judge token",
        ))
    }
}

async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> T + Send + 'static,
) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f).await.map_err(|_| {
        ApiError::new(
            StatusCode::INTERNAL_SERVER_ERROR,
            "internal",
            "internal error",
        )
    })
}

async fn next_match(
    State(state): State<Arc<AppState>>,
    headers: HeaderMap,
    Query(q): Query<MatchQuery>,
) -> ApiResult<ClientMatchup> {
    check_token(&state, &headers)?;
    let judge = q.judge.unwrap_or_default();
    let m = blocking(move || state.with_arena(|a| a.next_matchup(&judge))).await??;
    Ok(Json(m))
}

async fn vote(
    State(state): State<Arc<AppState>>,
    headers: HeaderMap,
    body: Bytes,
) -> ApiResult<VoteAck> {
    check_token(&state, &headers)?;
    let req: VoteRequest = serde_json::from_slice(&body).map_err(|_| {
        ApiError::new(
            StatusCode::BAD_REQUEST,
            "bad_request",
            "expected {match_id, outcome, judge_id} with outcome LEFT, RIGHT, BOTH_GOOD or NEITHER",
        )
    })?;
    let ack = blocking(move || {
        state.with_arena(|a| a.submit_vote(&req.match_id, req.outcome, &req.judge_id))
    })
    .await??;
    Ok(Json(ack))
}

/// Returns the cached snapshot when no vote has landed since it was built.
/// Otherwise copies the log and recomputes outside the arena lock.
async fn current_board(state: Arc<AppState>) -> Result<Leaderboard, ApiError> {
    blocking(move || {
        let snapshot = state.with_arena(|a| {
            let version = a.version();
            let cached = state.board.read().unwrap_or_else(|p| p.into_inner());
            match cached.as_ref() {
                Some(b) if b.version == version => Err(b.clone()),
                _ => Ok((
                    a.votes().to_vec(),
                    a.models().to_vec(),
                    a.dataset().clone(),
                    a.config().elo,
                    version,
                    a.judge_counts().clone(),
                )),
            }
        });
        let (votes, models, dataset, elo, version, judges) = match snapshot {
            Err(board) => return Ok(board),
            Ok(s) => s,
        };
        let board = compute_leaderboard(&votes, &models, &dataset, &elo, version, judges)?;
        let mut slot = state.board.write().unwrap_or_else(|p| p.into_inner());
        if slot.as_ref().is_none_or(|b| b.version < board.version) {
            *slot = Some(board.clone());
        }
        Ok(board)
    })
    .await?
}

async fn leaderboard(State(state): State<Arc<AppState>>) -> ApiResult<Leaderboard> {
    Ok(Json(current_board(state).await?))
}

async fn categories(State(state): State<Arc<AppState>>) -> Result<Response, ApiError> {
    let board = current_board(state).await?;
    Ok(Json(board.categories).into_response())
}

async fn health(State(state): State<Arc<AppState>>) -> Json<Health> {
    let (votes, models) = state.with_arena(|a| (a.version(), a.models().len()));
    Json(Health {
        status: "ok".into(),
        votes,
        models,
    })
}

async fn not_found() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such route")
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/match", get(next_match))
        .route("/api/vote", post(vote))
        .route("/api/leaderboard", get(leaderboard))
        .route("/api/categories", get(categories))
        .route("/api/health", get(health))
        .fallback(not_found)
        .with_state(state)
}

/// Binds `addr` and serves until the process is stopped.
pub async fn serve(addr: SocketAddr, state: Arc<AppState>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(addr = %listener.local_addr()?, "arena listening");
    axum::serve(listener, router(state)).await
}
