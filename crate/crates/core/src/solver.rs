//! Exact minimax values for Tron.
//!
//! Weights are rescaled to integers over their common denominator, so the
//! search itself never touches rationals. When the scaled total fits in an
//! `i64` the search runs on machine integers, otherwise on `BigInt`.
//!
//! Two position encodings are available:
//!
//! * [`Backend::General`] keys positions by the claimed-vertex bitmask plus
//!   both heads and the side to move. Works on any graph with at most
//!   [`GENERAL_MAX_VERTICES`] vertices.
//! * [`Backend::TreePath`] uses only `(alice_start, alice_head, bob_start,
//!   bob_head, turn)`. On a tree each claimed set is the geodesic between its
//!   two endpoints, so membership is a betweenness test on the distance
//!   matrix.

use std::collections::BTreeSet;
use std::fmt::Debug;
use std::ops::{Add, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::engine::{GameState, Move, Phase, Player};
use crate::error::SolveError;
use crate::graph::{DistanceMatrix, Vertex};
use crate::instance::Instance;
use crate::rational::Rational;

pub const GENERAL_MAX_VERTICES: usize = 22;
pub const TREE_PATH_MAX_VERTICES: usize = 120;
pub const DEFAULT_STATE_BUDGET: usize = 20_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    General,
    TreePath,
}

impl Backend {
    /// TreePath for trees, General otherwise.
    pub fn preferred(inst: &Instance) -> Backend {
        if inst.is_tree() {
            Backend::TreePath
        } else {
            Backend::General
        }
    }

    fn name(self) -> &'static str {
        match self {
            Backend::General => "general",
            Backend::TreePath => "tree-path",
        }
    }
}

impl std::str::FromStr for Backend {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "general" => Ok(Backend::General),
            "treepath" | "tree-path" => Ok(Backend::TreePath),
            other => Err(format!("unknown backend `{other}` (expected general or treepath)")),
        }
    }
}

/// Which of several value-optimal moves is reported.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TieBreak {
    #[default]
    SmallestIndex,
    LargestIndex,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SolverConfig {
    pub backend: Backend,
    pub tie_break: TieBreak,
    pub max_states: usize,
}

impl SolverConfig {
    pub fn new(backend: Backend) -> Self {
        SolverConfig { backend, tie_break: TieBreak::SmallestIndex, max_states: DEFAULT_STATE_BUDGET }
    }

    pub fn with_tie_break(mut self, tie_break: TieBreak) -> Self {
        self.tie_break = tie_break;
        self
    }

    pub fn with_max_states(mut self, max_states: usize) -> Self {
        self.max_states = max_states;
        self
    }
}

/// Optimal play after Alice opens at `start`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveRecord {
    pub start: Vertex,
    /// `w(B_u) − w(A_u)`.
    pub value: Rational,
    /// Bob's optimal placement; `None` only on a one-vertex board.
    pub bob_reply: Option<Vertex>,
    pub alice_claimed: BTreeSet<Vertex>,
    pub bob_claimed: BTreeSet<Vertex>,
    pub principal_variation: Vec<Move>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValueReport {
    pub delta: Rational,
    pub per_start: Vec<SolveRecord>,
    pub optimal_starts: BTreeSet<Vertex>,
}

impl ValueReport {
    pub fn record(&self, u: Vertex) -> &SolveRecord {
        &self.per_start[u]
    }

    pub fn values(&self) -> Vec<Rational> {
        self.per_start.iter().map(|r| r.value.clone()).collect()
    }

    pub fn replies(&self) -> Vec<Option<Vertex>> {
        self.per_start.iter().map(|r| r.bob_reply).collect()
    }
}

trait Score: Clone + Ord + Zero + Add<Output = Self> + Sub<Output = Self> + Neg<Output = Self> + Debug {
    fn to_bigint(&self) -> BigInt;
}

impl Score for i64 {
    fn to_bigint(&self) -> BigInt {
        BigInt::from(*self)
    }
}

impl Score for BigInt {
    fn to_bigint(&self) -> BigInt {
        self.clone()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Pos {
    a0: u8,
    a: u8,
    b0: u8,
    b: u8,
    alice_to_move: bool,
    /// Claimed set; maintained by the General backend only.
    mask: u32,
}

impl Pos {
    fn flip(mut self) -> Self {
        self.alice_to_move = !self.alice_to_move;
        self
    }
}

enum Rules {
    General,
    TreePath(DistanceMatrix),
}

struct Search<S> {
    rules: Rules,
    adj: Vec<Vec<u8>>,
    w: Vec<S>,
    denom: BigInt,
    tie_break: TieBreak,
    memo: FxHashMap<u64, S>,
    max_states: usize,
}

impl<S: Score> Search<S> {
    fn key(&self, p: &Pos) -> u64 {
        let turn = p.alice_to_move as u64;
        match self.rules {
            Rules::General => p.mask as u64 | (p.a as u64) << 32 | (p.b as u64) << 40 | turn << 48,
            Rules::TreePath(_) => p.a0 as u64 | (p.a as u64) << 8 | (p.b0 as u64) << 16 | (p.b as u64) << 24 | turn << 32,
        }
    }

    #[inline]
    fn is_free(&self, p: &Pos, v: u8) -> bool {
        match &self.rules {
            Rules::General => p.mask & (1 << v) == 0,
            Rules::TreePath(dm) => {
                let v = v as usize;
                !dm.between(p.a0 as usize, p.a as usize, v) && !dm.between(p.b0 as usize, p.b as usize, v)
            }
        }
    }

    fn moves(&self, p: &Pos, alice: bool) -> Vec<u8> {
        let h = if alice { p.a } else { p.b };
        self.adj[h as usize].iter().copied().filter(|&v| self.is_free(p, v)).collect()
    }

    fn has_move(&self, p: &Pos, alice: bool) -> bool {
        let h = if alice { p.a } else { p.b };
        self.adj[h as usize].iter().any(|&v| self.is_free(p, v))
    }

    fn extend(&self, p: &Pos, v: u8) -> Pos {
        let mut q = *p;
        if p.alice_to_move {
            q.a = v;
        } else {
            q.b = v;
        }
        if matches!(self.rules, Rules::General) {
            q.mask |= 1 << v;
        }
        q.flip()
    }

    fn placed(&self, u: Vertex, b: Vertex) -> Pos {
        let mask = if matches!(self.rules, Rules::General) { (1u32 << u) | (1u32 << b) } else { 0 };
        Pos { a0: u as u8, a: u as u8, b0: b as u8, b: b as u8, alice_to_move: true, mask }
    }

    /// Remaining `bob gain − alice gain` under optimal play from `p`.
    fn future(&mut self, p: Pos) -> Result<S, SolveError> {
        let key = self.key(&p);
        if let Some(v) = self.memo.get(&key) {
            return Ok(v.clone());
        }
        let moves = self.moves(&p, p.alice_to_move);
        let value = if moves.is_empty() {
            if self.has_move(&p, !p.alice_to_move) {
                self.future(p.flip())?
            } else {
                S::zero()
            }
        } else {
            let mut best: Option<S> = None;
            for v in moves {
                let c = self.child(&p, v)?;
                best = Some(match best {
                    None => c,
                    Some(b) if p.alice_to_move => b.min(c),
                    Some(b) => b.max(c),
                });
            }
            best.unwrap()
        };
        if self.memo.len() >= self.max_states {
            return Err(SolveError::StateBudget(self.max_states));
        }
        self.memo.insert(key, value.clone());
        Ok(value)
    }

    fn child(&mut self, p: &Pos, v: u8) -> Result<S, SolveError> {
        let gain = if p.alice_to_move { -self.w[v as usize].clone() } else { self.w[v as usize].clone() };
        Ok(gain + self.future(self.extend(p, v))?)
    }

    /// Picks the optimal candidate under the tie-break. `maximize` is Bob's
    /// view. Candidates must be given in ascending vertex order.
    fn select(&self, cands: Vec<(Vertex, S)>, maximize: bool) -> Option<(Vertex, S)> {
        let better = |c: &S, b: &S| if maximize { c > b } else { c < b };
        let iter: Box<dyn Iterator<Item = (Vertex, S)>> = match self.tie_break {
            TieBreak::SmallestIndex => Box::new(cands.into_iter()),
            TieBreak::LargestIndex => Box::new(cands.into_iter().rev()),
        };
        let mut best: Option<(Vertex, S)> = None;
        for (v, s) in iter {
            if best.as_ref().is_none_or(|(_, b)| better(&s, b)) {
                best = Some((v, s));
            }
        }
        best
    }

    /// Bob's best placement against `u`, and the full game value.
    fn start_value(&mut self, u: Vertex) -> Result<(S, Option<Vertex>), SolveError> {
        let n = self.w.len();
        let mut cands = Vec::with_capacity(n);
        for b in (0..n).filter(|&b| b != u) {
            let v = self.w[b].clone() + self.future(self.placed(u, b))?;
            cands.push((b, v));
        }
        let base = -self.w[u].clone();
        Ok(match self.select(cands, true) {
            Some((b, v)) => (base + v, Some(b)),
            None => (base, None),
        })
    }

    fn rational(&self, s: &S) -> Rational {
        Rational::new(s.to_bigint(), self.denom.clone())
    }

    fn pos_of(&self, s: &GameState) -> Pos {
        let a = s.alice_path().vertices();
        let b = s.bob_path().vertices();
        let mask = if matches!(self.rules, Rules::General) {
            a.iter().chain(b).fold(0u32, |m, &v| m | (1 << v))
        } else {
            0
        };
        Pos {
            a0: a[0] as u8,
            a: *a.last().unwrap() as u8,
            b0: b[0] as u8,
            b: *b.last().unwrap() as u8,
            alice_to_move: s.turn() == Player::Alice,
            mask,
        }
    }

    fn weight_sum(&self, vs: &[Vertex]) -> S {
        vs.iter().fold(S::zero(), |acc, &v| acc + self.w[v].clone())
    }

    fn best_move(&mut self, s: &GameState) -> Result<(Move, Rational), SolveError> {
        let n = self.w.len();
        match s.phase() {
            Phase::Finished => Err(crate::error::EngineError::Finished.into()),
            Phase::AwaitAlicePlacement => {
                let mut cands = Vec::with_capacity(n);
                for u in 0..n {
                    cands.push((u, self.start_value(u)?.0));
                }
                let (u, v) = self.select(cands, false).expect("non-empty board");
                Ok((Move::Place(Player::Alice, u), self.rational(&v)))
            }
            Phase::AwaitBobPlacement => {
                let u = s.alice_path().vertices()[0];
                let (v, b) = self.start_value(u)?;
                let mv = b.map_or(Move::Pass(Player::Bob), |b| Move::Place(Player::Bob, b));
                Ok((mv, self.rational(&v)))
            }
            Phase::Running => {
                let p = self.pos_of(s);
                let claimed = self.weight_sum(s.bob_path().vertices()) - self.weight_sum(s.alice_path().vertices());
                let moves = self.moves(&p, p.alice_to_move);
                let mover = s.turn();
                if moves.is_empty() {
                    let v = claimed + self.future(p)?;
                    return Ok((Move::Pass(mover), self.rational(&v)));
                }
                let mut cands = Vec::with_capacity(moves.len());
                for v in moves {
                    cands.push((v as Vertex, self.child(&p, v)?));
                }
                let (v, val) = self.select(cands, mover == Player::Bob).unwrap();
                Ok((Move::Extend(mover, v), self.rational(&(claimed + val))))
            }
        }
    }
}

enum Core {
    Small(Search<i64>),
    Big(Search<BigInt>),
}

macro_rules! dispatch {
    ($core:expr, $s:ident => $body:expr) => {
        match $core {
            Core::Small($s) => $body,
            Core::Big($s) => $body,
        }
    };
}

/// An exact solver bound to one instance. The memo table is shared across
/// all queries, so solving every start of an instance costs little more than
/// solving one.
pub struct Solver {
    instance: Arc<Instance>,
    config: SolverConfig,
    core: Core,
}

impl Solver {
    pub fn new(instance: Arc<Instance>, config: SolverConfig) -> Result<Self, SolveError> {
        let n = instance.vertex_count();
        let rules = match config.backend {
            Backend::General => {
                if n > GENERAL_MAX_VERTICES {
                    return Err(SolveError::TooLarge { backend: config.backend.name(), n, limit: GENERAL_MAX_VERTICES });
                }
                Rules::General
            }
            Backend::TreePath => {
                if !instance.is_tree() {
                    return Err(SolveError::NotTree);
                }
                if n > TREE_PATH_MAX_VERTICES {
                    return Err(SolveError::TooLarge { backend: config.backend.name(), n, limit: TREE_PATH_MAX_VERTICES });
                }
                Rules::TreePath(instance.graph().distance_matrix()?)
            }
        };
        let adj: Vec<Vec<u8>> = (0..n)
            .map(|v| instance.graph().neighbors(v).iter().map(|&x| x as u8).collect())
            .collect();
        let (numer, denom) = instance.integer_weights();
        let total: BigInt = numer.iter().sum();
        let small = total.to_i64().filter(|&t| t <= i64::MAX / 4).is_some();
        let core = if small {
            Core::Small(Search {
                rules,
                adj,
                w: numer.iter().map(|x| x.to_i64().unwrap()).collect(),
                denom,
                tie_break: config.tie_break,
                memo: FxHashMap::default(),
                max_states: config.max_states,
            })
        } else {
            Core::Big(Search {
                rules,
                adj,
                w: numer,
                denom,
                tie_break: config.tie_break,
                memo: FxHashMap::default(),
                max_states: config.max_states,
            })
        };
        Ok(Solver { instance, config, core })
    }

    pub fn instance(&self) -> &Arc<Instance> {
        &self.instance
    }

    pub fn config(&self) -> SolverConfig {
        self.config
    }

    /// Number of memoized positions.
    pub fn states(&self) -> usize {
        dispatch!(&self.core, s => s.memo.len())
    }

    fn check_state(&self, s: &GameState) -> Result<(), SolveError> {
        if !Arc::ptr_eq(s.instance(), &self.instance) && **s.instance() != *self.instance {
            return Err(SolveError::Graph(crate::error::GraphError::Invalid(
                "state belongs to a different instance".into(),
            )));
        }
        Ok(())
    }

    /// An optimal move for the side to move, with the exact final value
    /// `w(Bob) − w(Alice)` that optimal play from here reaches.
    pub fn best_move(&mut self, s: &GameState) -> Result<(Move, Rational), SolveError> {
        self.check_state(s)?;
        dispatch!(&mut self.core, c => c.best_move(s))
    }

    /// Exact value of a position under optimal play.
    pub fn state_value(&mut self, s: &GameState) -> Result<Rational, SolveError> {
        if s.is_finished() {
            return Ok(s.score().value);
        }
        self.best_move(s).map(|(_, v)| v)
    }

    /// Value and Bob's optimal reply for Alice's opening at `u`, without the
    /// principal variation.
    pub fn start_value(&mut self, u: Vertex) -> Result<(Rational, Option<Vertex>), SolveError> {
        self.instance.graph().check_vertex(u)?;
        dispatch!(&mut self.core, c => {
            let (v, b) = c.start_value(u)?;
            Ok((c.rational(&v), b))
        })
    }

    pub fn solve_from(&mut self, u: Vertex) -> Result<SolveRecord, SolveError> {
        let (value, bob_reply) = self.start_value(u)?;
        let mut state = GameState::initial(self.instance.clone()).apply_move(Move::Place(Player::Alice, u))?;
        let mut pv = vec![Move::Place(Player::Alice, u)];
        while !state.is_finished() {
            let (m, _) = self.best_move(&state)?;
            state = state.apply_move(m)?;
            pv.push(m);
        }
        debug_assert_eq!(state.score().value, value);
        Ok(SolveRecord {
            start: u,
            value,
            bob_reply,
            alice_claimed: state.alice_path().vertices().iter().copied().collect(),
            bob_claimed: state.bob_path().vertices().iter().copied().collect(),
            principal_variation: pv,
        })
    }

    pub fn game_value(&mut self) -> Result<ValueReport, SolveError> {
        let per_start = (0..self.instance.vertex_count())
            .map(|u| self.solve_from(u))
            .collect::<Result<Vec<_>, _>>()?;
        let delta = per_start.iter().map(|r| &r.value).min().unwrap().clone();
        let optimal_starts = per_start.iter().filter(|r| r.value == delta).map(|r| r.start).collect();
        Ok(ValueReport { delta, per_start, optimal_starts })
    }

    /// Per-start values only; cheaper than [`game_value`](Self::game_value).
    pub fn start_values(&mut self) -> Result<Vec<Rational>, SolveError> {
        (0..self.instance.vertex_count()).map(|u| self.start_value(u).map(|(v, _)| v)).collect()
    }
}

pub fn solve_from(inst: &Arc<Instance>, u: Vertex, backend: Backend) -> Result<SolveRecord, SolveError> {
    Solver::new(inst.clone(), SolverConfig::new(backend))?.solve_from(u)
}

pub fn game_value(inst: &Arc<Instance>, backend: Backend) -> Result<ValueReport, SolveError> {
    Solver::new(inst.clone(), SolverConfig::new(backend))?.game_value()
}

/// Optimal move for the side to move, using the preferred backend.
pub fn best_move(s: &GameState) -> Result<(Move, Rational), SolveError> {
    let inst = s.instance().clone();
    let backend = if inst.vertex_count() <= GENERAL_MAX_VERTICES { Backend::General } else { Backend::preferred(&inst) };
    Solver::new(inst, SolverConfig::new(backend))?.best_move(s)
}

/// Result of comparing the two backends on one tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrossCheck {
    /// Smallest start vertex whose values differ, if any.
    pub first_mismatch: Option<Vertex>,
    pub general_delta: Rational,
    pub tree_path_delta: Rational,
}

impl CrossCheck {
    pub fn agree(&self) -> bool {
        self.first_mismatch.is_none() && self.general_delta == self.tree_path_delta
    }
}

pub fn cross_check(inst: &Arc<Instance>) -> Result<CrossCheck, SolveError> {
    let general = Solver::new(inst.clone(), SolverConfig::new(Backend::General))?.start_values()?;
    let tree = Solver::new(inst.clone(), SolverConfig::new(Backend::TreePath))?.start_values()?;
    let first_mismatch = (0..general.len()).find(|&u| general[u] != tree[u]);
    Ok(CrossCheck {
        first_mismatch,
        general_delta: general.into_iter().min().unwrap(),
        tree_path_delta: tree.into_iter().min().unwrap(),
    })
}
