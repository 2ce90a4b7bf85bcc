//! The Tron play protocol.
//!
//! Alice places, Bob places, then the players alternate extending their own
//! path from its most recently claimed vertex. A player without a free
//! neighbor plays a single explicit `Pass` and is stuck from then on; the
//! other player keeps moving until also stuck. The only exception is a
//! one-vertex board, where Bob's placement pass ends the game at once.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::EngineError;
use crate::graph::{Vertex, VertexPath};
use crate::instance::Instance;
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Player {
    Alice,
    Bob,
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Player::Alice => "Alice",
            Player::Bob => "Bob",
        })
    }
}

impl Player {
    pub fn other(self) -> Player {
        match self {
            Player::Alice => Player::Bob,
            Player::Bob => Player::Alice,
        }
    }

    fn code(self) -> char {
        match self {
            Player::Alice => 'A',
            Player::Bob => 'B',
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MoveKind {
    PlaceAlice,
    PlaceBob,
    ExtendAlice,
    ExtendBob,
    Pass,
}

/// One action in a game. Displays as a transcript code: `A+3` (place),
/// `B>4` (extend), `A--` (pass).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Move {
    Place(Player, Vertex),
    Extend(Player, Vertex),
    Pass(Player),
}

impl Move {
    pub fn player(&self) -> Player {
        match *self {
            Move::Place(p, _) | Move::Extend(p, _) | Move::Pass(p) => p,
        }
    }

    pub fn vertex(&self) -> Option<Vertex> {
        match *self {
            Move::Place(_, v) | Move::Extend(_, v) => Some(v),
            Move::Pass(_) => None,
        }
    }

    pub fn kind(&self) -> MoveKind {
        match *self {
            Move::Place(Player::Alice, _) => MoveKind::PlaceAlice,
            Move::Place(Player::Bob, _) => MoveKind::PlaceBob,
            Move::Extend(Player::Alice, _) => MoveKind::ExtendAlice,
            Move::Extend(Player::Bob, _) => MoveKind::ExtendBob,
            Move::Pass(_) => MoveKind::Pass,
        }
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Move::Place(p, v) => write!(f, "{}+{v}", p.code()),
            Move::Extend(p, v) => write!(f, "{}>{v}", p.code()),
            Move::Pass(p) => write!(f, "{}--", p.code()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("bad move code `{0}`")]
pub struct ParseMoveError(pub String);

impl FromStr for Move {
    type Err = ParseMoveError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || ParseMoveError(s.to_string());
        let mut chars = s.chars();
        let player = match chars.next() {
            Some('A') => Player::Alice,
            Some('B') => Player::Bob,
            _ => return Err(bad()),
        };
        let rest = chars.as_str();
        if rest == "--" {
            return Ok(Move::Pass(player));
        }
        let (op, num) = rest.split_at(rest.len().min(1));
        let v: Vertex = num.parse().map_err(|_| bad())?;
        match op {
            "+" => Ok(Move::Place(player, v)),
            ">" => Ok(Move::Extend(player, v)),
            _ => Err(bad()),
        }
    }
}

impl Serialize for Move {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Move {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phase {
    AwaitAlicePlacement,
    AwaitBobPlacement,
    Running,
    Finished,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Outcome {
    /// `bob_weight − alice_weight`.
    pub value: Rational,
    pub alice_weight: Rational,
    pub bob_weight: Rational,
}

/// An immutable game position.
#[derive(Clone, PartialEq, Eq)]
pub struct GameState {
    instance: Arc<Instance>,
    alice: VertexPath,
    bob: VertexPath,
    owner: Vec<Option<Player>>,
    turn: Player,
    phase: Phase,
    alice_stuck: bool,
    bob_stuck: bool,
}

impl fmt::Debug for GameState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GameState")
            .field("alice", &self.alice)
            .field("bob", &self.bob)
            .field("turn", &self.turn)
            .field("phase", &self.phase)
            .field("alice_stuck", &self.alice_stuck)
            .field("bob_stuck", &self.bob_stuck)
            .finish()
    }
}

impl GameState {
    pub fn initial(instance: Arc<Instance>) -> Self {
        let n = instance.vertex_count();
        GameState {
            instance,
            alice: VertexPath::default(),
            bob: VertexPath::default(),
            owner: vec![None; n],
            turn: Player::Alice,
            phase: Phase::AwaitAlicePlacement,
            alice_stuck: false,
            bob_stuck: false,
        }
    }

    pub fn instance(&self) -> &Arc<Instance> {
        &self.instance
    }

    pub fn path(&self, p: Player) -> &VertexPath {
        match p {
            Player::Alice => &self.alice,
            Player::Bob => &self.bob,
        }
    }

    pub fn alice_path(&self) -> &VertexPath {
        &self.alice
    }

    pub fn bob_path(&self) -> &VertexPath {
        &self.bob
    }

    pub fn turn(&self) -> Player {
        self.turn
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn is_finished(&self) -> bool {
        self.phase == Phase::Finished
    }

    pub fn is_stuck(&self, p: Player) -> bool {
        match p {
            Player::Alice => self.alice_stuck,
            Player::Bob => self.bob_stuck,
        }
    }

    pub fn owner(&self, v: Vertex) -> Option<Player> {
        self.owner[v]
    }

    pub fn claimed_count(&self) -> usize {
        self.alice.len() + self.bob.len()
    }

    pub fn head(&self, p: Player) -> Option<Vertex> {
        self.path(p).last()
    }

    /// Unclaimed neighbors of `p`'s head, ascending.
    pub fn free_neighbors(&self, p: Player) -> Vec<Vertex> {
        match self.head(p) {
            Some(h) => self
                .instance
                .graph()
                .neighbors(h)
                .iter()
                .copied()
                .filter(|&v| self.owner[v].is_none())
                .collect(),
            None => Vec::new(),
        }
    }

    pub fn legal_moves(&self) -> Result<Vec<Move>, EngineError> {
        let n = self.instance.vertex_count();
        let moves: Vec<Move> = match self.phase {
            Phase::Finished => return Err(EngineError::Finished),
            Phase::AwaitAlicePlacement => (0..n).map(|v| Move::Place(Player::Alice, v)).collect(),
            Phase::AwaitBobPlacement => (0..n)
                .filter(|&v| self.owner[v].is_none())
                .map(|v| Move::Place(Player::Bob, v))
                .collect(),
            Phase::Running => self
                .free_neighbors(self.turn)
                .into_iter()
                .map(|v| Move::Extend(self.turn, v))
                .collect(),
        };
        if moves.is_empty() {
            Ok(vec![Move::Pass(self.turn)])
        } else {
            Ok(moves)
        }
    }

    pub fn apply_move(&self, m: Move) -> Result<GameState, EngineError> {
        let legal = self.legal_moves()?;
        if !legal.contains(&m) {
            return Err(EngineError::IllegalMove { mv: m, reason: self.illegal_reason(m) });
        }
        let mut next = self.clone();
        match m {
            Move::Place(p, v) => {
                next.owner[v] = Some(p);
                match p {
                    Player::Alice => {
                        next.alice.0.push(v);
                        next.phase = Phase::AwaitBobPlacement;
                    }
                    Player::Bob => {
                        next.bob.0.push(v);
                        next.phase = Phase::Running;
                    }
                }
                next.turn = p.other();
            }
            Move::Extend(p, v) => {
                next.owner[v] = Some(p);
                match p {
                    Player::Alice => next.alice.0.push(v),
                    Player::Bob => next.bob.0.push(v),
                }
                if !next.is_stuck(p.other()) {
                    next.turn = p.other();
                }
            }
            Move::Pass(p) => {
                if self.phase == Phase::AwaitBobPlacement {
                    // Only reachable on a one-vertex board: nothing is left for anyone.
                    next.alice_stuck = true;
                    next.bob_stuck = true;
                    next.phase = Phase::Finished;
                } else {
                    match p {
                        Player::Alice => next.alice_stuck = true,
                        Player::Bob => next.bob_stuck = true,
                    }
                    if next.alice_stuck && next.bob_stuck {
                        next.phase = Phase::Finished;
                    } else {
                        next.turn = p.other();
                    }
                }
            }
        }
        Ok(next)
    }

    fn illegal_reason(&self, m: Move) -> String {
        if m.player() != self.turn {
            return format!("it is {:?}'s turn", self.turn);
        }
        match m {
            Move::Place(..) if self.phase == Phase::Running => "placement phase is over".into(),
            Move::Extend(..) if self.phase != Phase::Running => "players must place first".into(),
            Move::Pass(_) => "a move is available, passing is not allowed".into(),
            _ => match m.vertex() {
                Some(v) if v >= self.instance.vertex_count() => format!("vertex {v} does not exist"),
                Some(v) if self.owner[v].is_some() => format!("vertex {v} is already claimed"),
                Some(v) => format!("vertex {v} is not adjacent to the head"),
                None => "not allowed".into(),
            },
        }
    }

    /// Current `w(bob) − w(alice)` for the claimed paths (final once finished).
    pub fn score(&self) -> Outcome {
        let alice_weight = self.instance.path_weight(&self.alice);
        let bob_weight = self.instance.path_weight(&self.bob);
        Outcome { value: &bob_weight - &alice_weight, alice_weight, bob_weight }
    }

    pub fn outcome(&self) -> Result<Outcome, EngineError> {
        if !self.is_finished() {
            return Err(EngineError::NotFinished);
        }
        Ok(self.score())
    }
}

/// Replays `moves` from the initial position.
pub fn replay(instance: Arc<Instance>, moves: &[Move]) -> Result<GameState, EngineError> {
    moves
        .iter()
        .try_fold(GameState::initial(instance), |s, &m| s.apply_move(m))
}

/// Parses a transcript: one move code per line, `#` comments allowed.
pub fn parse_transcript(text: &str) -> Result<Vec<Move>, EngineError> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
        .map(|(line, l)| l.parse().map_err(|_| EngineError::Transcript { line, text: l.to_string() }))
        .collect()
}

pub fn format_transcript(moves: &[Move]) -> String {
    moves.iter().map(|m| format!("{m}\n")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::instance::WeightCheck;
    use crate::rational::q;
    use Player::*;

    fn p5() -> Arc<Instance> {
        Arc::new(Instance::uniform(Graph::path(5)))
    }

    #[test]
    fn initial_state() {
        let s = GameState::initial(p5());
        assert!(s.alice_path().is_empty() && s.bob_path().is_empty());
        assert_eq!(s.phase(), Phase::AwaitAlicePlacement);
        assert_eq!(s.turn(), Alice);
    }

    #[test]
    fn placement_moves() {
        let s = GameState::initial(p5()).apply_move(Move::Place(Alice, 2)).unwrap();
        let legal = s.legal_moves().unwrap();
        assert_eq!(legal, vec![Move::Place(Bob, 0), Move::Place(Bob, 1), Move::Place(Bob, 3), Move::Place(Bob, 4)]);
        let s = s.apply_move(Move::Place(Bob, 1)).unwrap();
        assert_eq!(s.phase(), Phase::Running);
        assert_eq!(s.turn(), Alice);
    }

    #[test]
    fn forced_pass() {
        // Alice at the middle, Bob claimed both neighbors of her head.
        let s = replay(p5(), &[Move::Place(Alice, 2), Move::Place(Bob, 1)]).unwrap();
        let s = s.apply_move(Move::Extend(Alice, 3)).unwrap();
        let s = s.apply_move(Move::Extend(Bob, 0)).unwrap();
        assert_eq!(s.legal_moves().unwrap(), vec![Move::Extend(Alice, 4)]);
        // A board where Alice is boxed in immediately.
        let p3 = Arc::new(Instance::uniform(Graph::path(3)));
        let s = replay(p3, &[Move::Place(Alice, 0), Move::Place(Bob, 1)]).unwrap();
        assert_eq!(s.legal_moves().unwrap(), vec![Move::Pass(Alice)]);
    }

    #[test]
    fn single_extension() {
        let p3 = Arc::new(Instance::uniform(Graph::path(3)));
        let s = replay(p3, &[Move::Place(Alice, 1), Move::Place(Bob, 2)]).unwrap();
        assert_eq!(s.legal_moves().unwrap(), vec![Move::Extend(Alice, 0)]);
    }

    #[test]
    fn full_line_on_p5() {
        let moves: Vec<Move> = ["A+2", "B+1", "A>3", "B>0", "A>4", "B--", "A--"]
            .iter()
            .map(|s| s.parse().unwrap())
            .collect();
        let s = replay(p5(), &moves).unwrap();
        assert!(s.is_finished());
        let o = s.outcome().unwrap();
        assert_eq!(o.value, q(-1, 5));
        assert_eq!(o.alice_weight, q(3, 5));
        assert!(s.is_stuck(Alice) && s.is_stuck(Bob));
        assert!(s.legal_moves().is_err());
    }

    #[test]
    fn one_vertex_board() {
        let k1 = Arc::new(Instance::uniform(Graph::path(1)));
        let s = GameState::initial(k1).apply_move(Move::Place(Alice, 0)).unwrap();
        assert_eq!(s.legal_moves().unwrap(), vec![Move::Pass(Bob)]);
        let s = s.apply_move(Move::Pass(Bob)).unwrap();
        assert!(s.is_finished());
        assert_eq!(s.outcome().unwrap().value, q(-1, 1));
    }

    #[test]
    fn outcomes() {
        let edge = Arc::new(Instance::uniform(Graph::path(2)));
        let s = replay(edge, &["A+0", "B+1", "A--", "B--"].map(|m| m.parse().unwrap())).unwrap();
        assert_eq!(s.outcome().unwrap().value, q(0, 1));
        let skew = Arc::new(Instance::new(Graph::path(2), vec![q(1, 1), q(0, 1)], WeightCheck::Strict).unwrap());
        let s = replay(skew, &["A+0", "B+1", "A--", "B--"].map(|m| m.parse().unwrap())).unwrap();
        assert_eq!(s.outcome().unwrap().value, q(-1, 1));
        assert!(matches!(GameState::initial(p5()).outcome(), Err(EngineError::NotFinished)));
    }

    #[test]
    fn illegal_moves_rejected() {
        let s = replay(p5(), &[Move::Place(Alice, 2), Move::Place(Bob, 1)]).unwrap();
        for m in [Move::Extend(Alice, 1), Move::Extend(Alice, 4), Move::Extend(Bob, 0), Move::Pass(Alice), Move::Place(Alice, 4)] {
            let e = s.apply_move(m).unwrap_err();
            assert!(matches!(e, EngineError::IllegalMove { .. }), "{m}");
        }
        let e = s.apply_move(Move::Extend(Alice, 1)).unwrap_err();
        assert!(e.to_string().contains("already claimed"), "{e}");
    }

    #[test]
    fn stuck_player_is_skipped() {
        // P5, Alice at 0, Bob at 1: Alice is stuck at once, Bob runs to the end.
        let s = replay(p5(), &[Move::Place(Alice, 0), Move::Place(Bob, 1)]).unwrap();
        let s = s.apply_move(Move::Pass(Alice)).unwrap();
        assert_eq!(s.turn(), Bob);
        let s = s.apply_move(Move::Extend(Bob, 2)).unwrap();
        assert_eq!(s.turn(), Bob);
        let s = replay(p5(), &["A+0", "B+1", "A--", "B>2", "B>3", "B>4", "B--"].map(|m| m.parse().unwrap())).unwrap();
        assert_eq!(s.outcome().unwrap().value, q(3, 5));
    }

    #[test]
    fn transcript_codes() {
        let moves = parse_transcript("A+3\n# note\nB+2\nA>4\nB--\n").unwrap();
        assert_eq!(moves, vec![Move::Place(Alice, 3), Move::Place(Bob, 2), Move::Extend(Alice, 4), Move::Pass(Bob)]);
        assert_eq!(format_transcript(&moves), "A+3\nB+2\nA>4\nB--\n");
        assert!(matches!(parse_transcript("A+3\nC+1\n"), Err(EngineError::Transcript { line: 2, .. })));
        assert!("A*3".parse::<Move>().is_err());
        assert!("A+".parse::<Move>().is_err());
    }
}
