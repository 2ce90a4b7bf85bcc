//! HTTP game server: sessions against an engine policy, hints and analysis.
//!
//! Requests on one session are serialized by its mutex. Boards (solver memo
//! tables and analyses) are shared across sessions by instance digest.

pub mod wire;

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::{Arc, Mutex, OnceLock, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Serialize;
use tron_core::format::{instance_digest, parse_instance};
use tron_core::lab::{generate, Family, GeneratorConfig, WeightMode};
use tron_core::{
    certify, Backend, GameState, Instance, Move, Player, Policy, PolicySpec, Solver, SolverConfig, ValueReport,
};
use uuid::Uuid;

use crate::wire::{
    Analysis, CreateGame, GameView, Hint, LogEntry, MoveResponse, SubmitMove, WireInstance, WireOutcome, WireState,
};

#[derive(Debug, Serialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: StatusCode,
    pub error: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub legal_moves: Option<Vec<Move>>,
}

impl ApiError {
    fn new(status: StatusCode, error: impl ToString) -> Self {
        ApiError { status, error: error.to_string(), legal_moves: None }
    }

    fn bad_request(error: impl ToString) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, error)
    }

    fn unprocessable(error: impl ToString) -> Self {
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, error)
    }

    fn conflict(error: impl ToString) -> Self {
        ApiError::new(StatusCode::CONFLICT, error)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self)).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

/// Everything derived from one instance, shared by all sessions on it.
struct Board {
    instance: Arc<Instance>,
    digest: String,
    /// `None` when the instance exceeds every solver budget.
    solver: Option<Mutex<Solver>>,
    values: OnceLock<Result<ValueReport, String>>,
}

impl Board {
    fn new(instance: Instance) -> Self {
        let instance = Arc::new(instance);
        let config = SolverConfig::new(Backend::preferred(&instance));
        Board {
            digest: instance_digest(&instance),
            solver: Solver::new(instance.clone(), config).ok().map(Mutex::new),
            values: OnceLock::new(),
            instance,
        }
    }

    fn solver(&self) -> Result<std::sync::MutexGuard<'_, Solver>, ApiError> {
        let solver = self.solver.as_ref().ok_or_else(|| {
            ApiError::unprocessable(format!(
                "instance with {} vertices exceeds the exact solver budget",
                self.instance.vertex_count()
            ))
        })?;
        Ok(solver.lock().unwrap_or_else(|e| e.into_inner()))
    }
}

enum Engine {
    /// Plays from the board's shared solver.
    Optimal,
    Policy(Box<dyn Policy>),
}

struct Session {
    id: String,
    board: Arc<Board>,
    state: GameState,
    human: Player,
    policy: PolicySpec,
    engine: Engine,
    log: Vec<LogEntry>,
}

fn now_ms() -> u128 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis())
}

impl Session {
    fn engine_choice(&mut self) -> Result<Move, ApiError> {
        match &mut self.engine {
            Engine::Optimal => {
                let mut solver = self.board.solver()?;
                solver.best_move(&self.state).map(|(m, _)| m).map_err(ApiError::unprocessable)
            }
            Engine::Policy(p) => p.choose(&self.state).map_err(ApiError::unprocessable),
        }
    }

    fn apply(&mut self, m: Move, by: &'static str) -> Result<(), ApiError> {
        self.state = self.state.apply_move(m).map_err(|e| {
            let mut err = ApiError::unprocessable(e);
            err.legal_moves = self.state.legal_moves().ok();
            err
        })?;
        self.log.push(LogEntry { mv: m, by, at_ms: now_ms() });
        Ok(())
    }

    /// Engine moves until the human is to move or the game ends.
    fn run_engine(&mut self) -> Result<Vec<Move>, ApiError> {
        let mut moves = Vec::new();
        while !self.state.is_finished() && self.state.turn() != self.human {
            let m = self.engine_choice()?;
            self.apply(m, "engine")?;
            moves.push(m);
        }
        Ok(moves)
    }

    fn wire(&self) -> WireState {
        let s = &self.state;
        WireState {
            id: self.id.clone(),
            instance: WireInstance::new(&self.board.instance, &self.board.digest),
            human_side: self.human,
            engine_policy: self.policy.to_string(),
            phase: s.phase(),
            turn: s.turn(),
            alice_path: s.alice_path().vertices().to_vec(),
            bob_path: s.bob_path().vertices().to_vec(),
            alice_stuck: s.is_stuck(Player::Alice),
            bob_stuck: s.is_stuck(Player::Bob),
            score: (&s.score()).into(),
            log: self.log.clone(),
        }
    }

    fn legal_moves(&self) -> Vec<Move> {
        self.state.legal_moves().unwrap_or_default()
    }

    fn outcome(&self) -> Option<WireOutcome> {
        self.state.outcome().ok().map(|o| (&o).into())
    }
}

#[derive(Default)]
pub struct AppState {
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
    boards: RwLock<HashMap<String, Arc<Board>>>,
}

impl AppState {
    fn board(&self, instance: Instance) -> Arc<Board> {
        let digest = instance_digest(&instance);
        if let Some(b) = self.boards.read().unwrap().get(&digest) {
            if *b.instance == instance {
                return b.clone();
            }
        }
        let board = Arc::new(Board::new(instance));
        self.boards.write().unwrap().entry(digest).or_insert_with(|| board.clone());
        board
    }

    fn session(&self, id: &str) -> Result<Arc<Mutex<Session>>, ApiError> {
        self.sessions
            .read()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("no game `{id}`")))
    }
}

pub fn router() -> Router {
    router_with(Arc::new(AppState::default()))
}

pub fn router_with(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/games", post(create_game))
        .route("/games/{id}", get(get_game))
        .route("/games/{id}/moves", post(submit_move))
        .route("/games/{id}/hint", get(hint))
        .route("/games/{id}/analysis", get(analysis))
        .with_state(state)
}

pub async fn serve(addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router()).await
}

/// Runs solver work off the async workers.
async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, ApiError> + Send + 'static) -> ApiResult<T> {
    match tokio::task::spawn_blocking(f).await {
        Ok(r) => r.map(Json),
        Err(e) => Err(ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e)),
    }
}

fn lock(s: &Mutex<Session>) -> std::sync::MutexGuard<'_, Session> {
    s.lock().unwrap_or_else(|e| e.into_inner())
}

fn requested_instance(req: &CreateGame) -> Result<Instance, ApiError> {
    match (&req.instance, &req.generator) {
        (Some(text), None) => parse_instance(text, req.normalize).map_err(ApiError::bad_request),
        (None, Some(g)) => {
            let family: Family = g.family.parse().map_err(ApiError::bad_request)?;
            let weight_mode: WeightMode = g.weights.parse().map_err(ApiError::bad_request)?;
            let config = GeneratorConfig { family, n: g.n, weight_mode, seed: g.seed };
            let mut out = generate(config, 1).map_err(ApiError::bad_request)?;
            Ok(out.remove(0))
        }
        _ => Err(ApiError::bad_request("give exactly one of `instance` and `generator`")),
    }
}

async fn create_game(State(app): State<Arc<AppState>>, Json(req): Json<CreateGame>) -> ApiResult<GameView> {
    blocking(move || {
        let instance = requested_instance(&req)?;
        let human: Player = req.human_side.clone().map_or(Player::Alice, Into::into);
        let policy: PolicySpec =
            req.engine_policy.as_deref().unwrap_or("optimal").parse().map_err(ApiError::bad_request)?;
        if !matches!(policy, PolicySpec::Optimal | PolicySpec::AvoidBobAuto | PolicySpec::LongestPath) {
            return Err(ApiError::bad_request("engine policy must be optimal, avoidbob:auto or longestpath"));
        }
        let board = app.board(instance);
        let engine = match policy {
            PolicySpec::Optimal => {
                drop(board.solver()?);
                Engine::Optimal
            }
            _ => {
                let p = policy.build(&board.instance).map_err(ApiError::unprocessable)?;
                if p.side().is_some_and(|s| s == human) {
                    return Err(ApiError::bad_request(format!("{policy} cannot play {}", human.other())));
                }
                Engine::Policy(p)
            }
        };
        let id = Uuid::new_v4().to_string();
        let mut session = Session {
            id: id.clone(),
            state: GameState::initial(board.instance.clone()),
            board,
            human,
            policy,
            engine,
            log: Vec::new(),
        };
        session.run_engine()?;
        let view =
            GameView { id: id.clone(), state: session.wire(), legal_moves: session.legal_moves(), outcome: session.outcome() };
        app.sessions.write().unwrap().insert(id, Arc::new(Mutex::new(session)));
        Ok(view)
    })
    .await
}

async fn get_game(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<GameView> {
    let session = app.session(&id)?;
    let s = lock(&session);
    Ok(Json(GameView { id, state: s.wire(), legal_moves: s.legal_moves(), outcome: s.outcome() }))
}

async fn submit_move(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    Json(req): Json<SubmitMove>,
) -> ApiResult<MoveResponse> {
    let session = app.session(&id)?;
    blocking(move || {
        let mut s = lock(&session);
        if s.state.is_finished() {
            return Err(ApiError::conflict("game is over"));
        }
        if s.state.turn() != s.human {
            return Err(ApiError::conflict(format!("it is {}'s turn", s.state.turn())));
        }
        let m: Move = req.mv.parse().map_err(|e| {
            let mut err = ApiError::bad_request(e);
            err.legal_moves = Some(s.legal_moves());
            err
        })?;
        if m.player() != s.human {
            let mut err = ApiError::unprocessable(format!("you play {}", s.human));
            err.legal_moves = Some(s.legal_moves());
            return Err(err);
        }
        s.apply(m, "human")?;
        let engine_moves = s.run_engine()?;
        Ok(MoveResponse {
            state: s.wire(),
            legal_moves: s.legal_moves(),
            engine_move: engine_moves.last().copied(),
            engine_moves,
            outcome: s.outcome(),
        })
    })
    .await
}

async fn hint(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Hint> {
    let session = app.session(&id)?;
    blocking(move || {
        let s = lock(&session);
        if s.state.is_finished() {
            return Err(ApiError::conflict("game is over"));
        }
        if s.state.turn() != s.human {
            return Err(ApiError::conflict("hints are only given on your turn"));
        }
        let mut solver = s.board.solver()?;
        let (mv, value) = solver.best_move(&s.state).map_err(ApiError::unprocessable)?;
        Ok(Hint { mv, value: (&value).into() })
    })
    .await
}

async fn analysis(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Analysis> {
    let session = app.session(&id)?;
    let board = lock(&session).board.clone();
    blocking(move || {
        let values = board
            .values
            .get_or_init(|| {
                let mut solver = board.solver().map_err(|e| e.error)?;
                solver.game_value().map_err(|e| e.to_string())
            })
            .clone()
            .map_err(ApiError::unprocessable)?;
        let report = if board.instance.is_tree() && board.instance.vertex_count() >= 2 {
            Some(certify(&board.instance).map_err(ApiError::unprocessable)?)
        } else {
            None
        };
        Ok(Analysis::new(&values, report.as_ref()))
    })
    .await
}
