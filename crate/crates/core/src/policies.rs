//! Executable strategies and a policy-vs-policy simulator.
//!
//! Every policy here decides from the game state alone, so the same state
//! always yields the same move. That makes simulations reproducible and lets
//! [`best_response`] explore all replies against a fixed policy.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;

use crate::decomposition::decompose;
use crate::engine::{format_transcript, GameState, Move, Outcome, Phase, Player};
use crate::error::PolicyError;
use crate::graph::{Graph, Vertex, VertexPath};
use crate::instance::Instance;
use crate::rational::Rational;
use crate::solver::{Backend, Solver, SolverConfig};

pub trait Policy: Send {
    /// Descriptor in the `simulate` syntax.
    fn descriptor(&self) -> String;

    /// The side this policy can play, or `None` for both.
    fn side(&self) -> Option<Player>;

    /// A legal move for the player to move in `state`.
    fn choose(&mut self, state: &GameState) -> Result<Move, PolicyError>;
}

fn ensure_side(policy: &dyn Policy, state: &GameState) -> Result<(), PolicyError> {
    match policy.side() {
        Some(side) if side != state.turn() => Err(PolicyError::WrongSide { policy: policy.descriptor(), side: state.turn() }),
        _ => Ok(()),
    }
}

/// Exact optimal play for either side.
pub struct Optimal {
    solver: Solver,
}

impl Optimal {
    pub fn new(inst: &Arc<Instance>) -> Result<Self, PolicyError> {
        let config = SolverConfig::new(Backend::preferred(inst));
        Ok(Optimal { solver: Solver::new(inst.clone(), config)? })
    }
}

impl Policy for Optimal {
    fn descriptor(&self) -> String {
        "optimal".into()
    }

    fn side(&self) -> Option<Player> {
        None
    }

    fn choose(&mut self, state: &GameState) -> Result<Move, PolicyError> {
        Ok(self.solver.best_move(state)?.0)
    }
}

/// Which subtree of `T - v` the continuation after `v` avoids besides the
/// one containing `u`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Avoid {
    /// The subtree holding Bob's actual first vertex.
    BobStart,
    /// The subtree holding the precomputed optimal reply `B(u)`.
    Reply(Vertex),
}

/// Alice places at `u`, walks to `v`, then follows a heaviest path from `v`
/// that stays out of the subtrees of `T - v` containing `u` and Bob. Once the
/// plan is blocked she extends greedily along the heaviest free continuation.
pub struct AvoidBob {
    inst: Arc<Instance>,
    u: Vertex,
    v: Vertex,
    avoid: Avoid,
    plans: HashMap<Option<Vertex>, VertexPath>,
}

impl AvoidBob {
    pub fn new(inst: &Arc<Instance>, u: Vertex, v: Vertex) -> Result<Self, PolicyError> {
        if !inst.is_tree() {
            return Err(crate::error::GraphError::NotTree.into());
        }
        inst.graph().check_vertex(u)?;
        inst.graph().check_vertex(v)?;
        Ok(AvoidBob { inst: inst.clone(), u, v, avoid: Avoid::BobStart, plans: HashMap::new() })
    }

    /// The variant that avoids the subtree of `B(u)` whatever Bob plays.
    pub fn literal(inst: &Arc<Instance>, u: Vertex, v: Vertex) -> Result<Self, PolicyError> {
        let mut p = AvoidBob::new(inst, u, v)?;
        let mut solver = Solver::new(inst.clone(), SolverConfig::new(Backend::TreePath))?;
        if let (_, Some(b)) = solver.start_value(u)? {
            p.avoid = Avoid::Reply(b);
        }
        Ok(p)
    }

    pub fn start(&self) -> Vertex {
        self.u
    }

    pub fn target(&self) -> Vertex {
        self.v
    }

    /// The full intended path from `u`, given Bob's first vertex.
    pub fn plan(&self, bob_start: Option<Vertex>) -> VertexPath {
        let g = self.inst.graph();
        let mut walk = g.path_between(self.u, self.v).expect("validated tree vertices");
        let avoided = match self.avoid {
            Avoid::BobStart => bob_start,
            Avoid::Reply(b) => Some(b),
        };
        let from_u = g.branch(self.v, self.u);
        let from_bob = avoided.map_or_else(|| vec![false; g.vertex_count()], |b| g.branch(self.v, b));
        let blocked: Vec<bool> = from_u.iter().zip(&from_bob).map(|(a, b)| *a || *b).collect();
        let (tail, _) = self.inst.heaviest_from_mask(self.v, &blocked).expect("trees are forests");
        walk.0.extend_from_slice(&tail.vertices()[1..]);
        walk
    }
}

impl Policy for AvoidBob {
    fn descriptor(&self) -> String {
        match self.avoid {
            Avoid::BobStart => format!("avoidbob:u={},v={}", self.u, self.v),
            Avoid::Reply(_) => format!("avoidbob:u={},v={},literal", self.u, self.v),
        }
    }

    fn side(&self) -> Option<Player> {
        Some(Player::Alice)
    }

    fn choose(&mut self, state: &GameState) -> Result<Move, PolicyError> {
        ensure_side(self, state)?;
        if state.phase() == Phase::AwaitAlicePlacement {
            return Ok(Move::Place(Player::Alice, self.u));
        }
        let free = state.free_neighbors(Player::Alice);
        if free.is_empty() {
            return Ok(Move::Pass(Player::Alice));
        }
        let bob_start = state.bob_path().first();
        if !self.plans.contains_key(&bob_start) {
            let plan = self.plan(bob_start);
            self.plans.insert(bob_start, plan);
        }
        let plan = self.plans[&bob_start].vertices();
        let done = state.alice_path().vertices();
        if plan.len() > done.len() && plan.starts_with(done) && free.contains(&plan[done.len()]) {
            return Ok(Move::Extend(Player::Alice, plan[done.len()]));
        }
        Ok(Move::Extend(Player::Alice, heaviest_step(&self.inst, state, &free)))
    }
}

/// Free neighbor with the heaviest free continuation, smallest index on ties.
fn heaviest_step(inst: &Instance, state: &GameState, free: &[Vertex]) -> Vertex {
    let blocked: Vec<bool> = (0..inst.vertex_count()).map(|v| state.owner(v).is_some()).collect();
    let mut best: Option<(Rational, Vertex)> = None;
    for &nb in free {
        let (_, w) = inst.heaviest_from_mask(nb, &blocked).expect("trees are forests");
        if best.as_ref().is_none_or(|(bw, _)| w > *bw) {
            best = Some((w, nb));
        }
    }
    best.expect("free is non-empty").1
}

/// Vertex count of the longest path starting at `start` inside the
/// unblocked part of a tree.
fn longest_from(g: &Graph, start: Vertex, blocked: &[bool]) -> usize {
    let mut depth = vec![usize::MAX; g.vertex_count()];
    depth[start] = 1;
    let mut stack = vec![start];
    let mut best = 1;
    while let Some(x) = stack.pop() {
        for &y in g.neighbors(x) {
            if !blocked[y] && depth[y] == usize::MAX {
                depth[y] = depth[x] + 1;
                best = best.max(depth[y]);
                stack.push(y);
            }
        }
    }
    best
}

/// Bob's heuristic for unweighted trees: start next to Alice in the longer
/// half of a longest path through her start, then always continue toward a
/// longest possible extension. Weights are ignored; ties go to the smaller
/// index.
///
/// The continuation rule is also the fallback once the initial direction is
/// exhausted. Since Alice can never enter Bob's branch, following the longer
/// half and following the longest extension coincide.
pub struct LongestPathBob {
    inst: Arc<Instance>,
}

impl LongestPathBob {
    pub fn new(inst: &Arc<Instance>) -> Result<Self, PolicyError> {
        if !inst.is_tree() {
            return Err(crate::error::GraphError::NotTree.into());
        }
        Ok(LongestPathBob { inst: inst.clone() })
    }

    fn longest_step(&self, state: &GameState, from: &[Vertex]) -> Option<Vertex> {
        let g = self.inst.graph();
        let blocked: Vec<bool> = (0..g.vertex_count()).map(|v| state.owner(v).is_some()).collect();
        // max_by_key keeps the last maximum, so scan in reverse index order
        from.iter().rev().copied().max_by_key(|&nb| longest_from(g, nb, &blocked))
    }
}

impl Policy for LongestPathBob {
    fn descriptor(&self) -> String {
        "longestpath".into()
    }

    fn side(&self) -> Option<Player> {
        Some(Player::Bob)
    }

    fn choose(&mut self, state: &GameState) -> Result<Move, PolicyError> {
        ensure_side(self, state)?;
        let candidates = match state.phase() {
            Phase::AwaitBobPlacement => {
                let u = state.alice_path().first().expect("Alice has placed");
                self.inst.graph().neighbors(u).to_vec()
            }
            _ => state.free_neighbors(Player::Bob),
        };
        Ok(match self.longest_step(state, &candidates) {
            Some(v) if state.phase() == Phase::AwaitBobPlacement => Move::Place(Player::Bob, v),
            Some(v) => Move::Extend(Player::Bob, v),
            None => Move::Pass(Player::Bob),
        })
    }
}

/// Parsed policy descriptor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PolicySpec {
    Optimal,
    AvoidBob { u: Vertex, v: Vertex, literal: bool },
    /// The best of the decomposition's avoid-Bob candidates.
    AvoidBobAuto,
    LongestPath,
}

impl PolicySpec {
    pub fn build(&self, inst: &Arc<Instance>) -> Result<Box<dyn Policy>, PolicyError> {
        Ok(match *self {
            PolicySpec::Optimal => Box::new(Optimal::new(inst)?),
            PolicySpec::AvoidBob { u, v, literal: false } => Box::new(AvoidBob::new(inst, u, v)?),
            PolicySpec::AvoidBob { u, v, literal: true } => Box::new(AvoidBob::literal(inst, u, v)?),
            PolicySpec::AvoidBobAuto => Box::new(avoid_bob_auto(inst)?),
            PolicySpec::LongestPath => Box::new(LongestPathBob::new(inst)?),
        })
    }
}

impl fmt::Display for PolicySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicySpec::Optimal => f.write_str("optimal"),
            PolicySpec::AvoidBob { u, v, literal } => {
                write!(f, "avoidbob:u={u},v={v}")?;
                if *literal {
                    f.write_str(",literal")?;
                }
                Ok(())
            }
            PolicySpec::AvoidBobAuto => f.write_str("avoidbob:auto"),
            PolicySpec::LongestPath => f.write_str("longestpath"),
        }
    }
}

impl FromStr for PolicySpec {
    type Err = PolicyError;

    /// `optimal`, `longestpath`, `avoidbob:auto`, or
    /// `avoidbob:u=U[,v=V][,literal]` (`v` defaults to `u`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || PolicyError::Descriptor(s.to_string());
        let s = s.trim();
        match s {
            "optimal" => return Ok(PolicySpec::Optimal),
            "longestpath" => return Ok(PolicySpec::LongestPath),
            "avoidbob:auto" => return Ok(PolicySpec::AvoidBobAuto),
            _ => {}
        }
        let args = s.strip_prefix("avoidbob:").ok_or_else(bad)?;
        let (mut u, mut v, mut literal) = (None, None, false);
        for part in args.split(',') {
            match part.split_once('=') {
                Some(("u", x)) => u = Some(x.parse().map_err(|_| bad())?),
                Some(("v", x)) => v = Some(x.parse().map_err(|_| bad())?),
                None if part == "literal" => literal = true,
                _ => return Err(bad()),
            }
        }
        let u = u.ok_or_else(bad)?;
        Ok(PolicySpec::AvoidBob { u, v: v.unwrap_or(u), literal })
    }
}

/// `dist(u, v) <= dist(B(u), v)`.
pub fn applicable(inst: &Instance, u: Vertex, v: Vertex, replies: &[Option<Vertex>]) -> Result<bool, PolicyError> {
    let g = inst.graph();
    let Some(b) = replies[u] else { return Ok(true) };
    Ok(g.dist(u, v)? <= g.dist(b, v)?)
}

/// A finished game with its final outcome.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Transcript {
    pub moves: Vec<Move>,
    pub outcome: Outcome,
}

impl Transcript {
    /// Move codes, one per line, followed by a comment line with the outcome.
    pub fn to_text(&self) -> String {
        let o = &self.outcome;
        format!(
            "{}# value {} alice {} bob {}\n",
            format_transcript(&self.moves),
            o.value,
            o.alice_weight,
            o.bob_weight
        )
    }
}

/// Plays `alice` against `bob` to the end.
pub fn simulate(inst: &Arc<Instance>, alice: &mut dyn Policy, bob: &mut dyn Policy) -> Result<Transcript, PolicyError> {
    let mut state = GameState::initial(inst.clone());
    let mut moves = Vec::new();
    while !state.is_finished() {
        let policy: &mut dyn Policy = match state.turn() {
            Player::Alice => &mut *alice,
            Player::Bob => &mut *bob,
        };
        let m = policy.choose(&state)?;
        state = state.apply_move(m).map_err(|e| PolicyError::Illegal {
            policy: policy.descriptor(),
            mv: m,
            reason: e.to_string(),
            partial: moves.clone(),
        })?;
        moves.push(m);
    }
    Ok(Transcript { moves, outcome: state.outcome()? })
}

/// The responder's best outcome against a fixed policy, with one line
/// realizing it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BestResponse {
    pub value: Rational,
    pub moves: Vec<Move>,
}

/// Exhaustive search over the responder's moves while `fixed` plays
/// `fixed_side`. Alice minimizes and Bob maximizes the final value; among
/// equal values the first legal move wins.
pub fn best_response(inst: &Arc<Instance>, fixed: &mut dyn Policy, fixed_side: Player) -> Result<BestResponse, PolicyError> {
    fn go(state: &GameState, fixed: &mut dyn Policy, side: Player) -> Result<(Rational, Vec<Move>), PolicyError> {
        if state.is_finished() {
            return Ok((state.outcome()?.value, Vec::new()));
        }
        let candidates = if state.turn() == side { vec![fixed.choose(state)?] } else { state.legal_moves()? };
        let mut best: Option<(Rational, Vec<Move>)> = None;
        for m in candidates {
            let next = state.apply_move(m).map_err(|e| PolicyError::Illegal {
                policy: fixed.descriptor(),
                mv: m,
                reason: e.to_string(),
                partial: Vec::new(),
            })?;
            let (value, mut line) = go(&next, fixed, side)?;
            let better = match &best {
                None => true,
                Some((b, _)) if state.turn() == Player::Alice => value < *b,
                Some((b, _)) => value > *b,
            };
            if better {
                line.insert(0, m);
                best = Some((value, line));
            }
        }
        Ok(best.expect("legal_moves is never empty"))
    }
    let (value, moves) = go(&GameState::initial(inst.clone()), fixed, fixed_side)?;
    Ok(BestResponse { value, moves })
}

/// Candidate avoid-Bob strategies suggested by the decomposition: starts at
/// `a`, `a -> d` across the crossing edge, `e`, and `e -> d`, on both sides.
pub fn avoid_bob_candidates(inst: &Arc<Instance>) -> Result<Vec<(Vertex, Vertex)>, PolicyError> {
    if inst.vertex_count() == 1 {
        return Ok(vec![(0, 0)]);
    }
    let d = decompose(inst)?;
    let (l, r) = (&d.left, &d.right);
    let mut out = vec![(l.a, l.a), (r.a, r.a), (r.a, l.d), (l.a, r.d)];
    for s in [l, r] {
        if let Some(e) = s.e {
            out.extend([(e, e), (e, s.d)]);
        }
    }
    let mut seen = std::collections::HashSet::new();
    out.retain(|p| seen.insert(*p));
    Ok(out)
}

/// The candidate with the best guaranteed outcome against every Bob.
pub fn avoid_bob_auto(inst: &Arc<Instance>) -> Result<AvoidBob, PolicyError> {
    let mut best: Option<(Rational, AvoidBob)> = None;
    for (u, v) in avoid_bob_candidates(inst)? {
        let mut p = AvoidBob::new(inst, u, v)?;
        let value = best_response(inst, &mut p, Player::Alice)?.value;
        if best.as_ref().is_none_or(|(b, _)| value < *b) {
            best = Some((value, p));
        }
    }
    Ok(best.expect("at least one candidate").1)
}
