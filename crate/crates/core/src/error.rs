use thiserror::Error;

use crate::engine::{Move, Player};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("graph has no vertices")]
    Empty,
    #[error("vertex {0} out of range for a graph with {1} vertices")]
    InvalidVertex(usize, usize),
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0},{1})")]
    DuplicateEdge(usize, usize),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("graph is not a tree")]
    NotTree,
    #[error("allowed vertices do not induce a forest")]
    NotForest,
    #[error("allowed vertex set is empty")]
    EmptySet,
    #[error("allowed vertices are not connected")]
    NotConnectedSet,
    #[error("start vertex {0} is forbidden")]
    ForbiddenStart(usize),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstanceError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("expected {expected} weights, got {got}")]
    WeightCount { expected: usize, got: usize },
    #[error("negative weight {weight} at vertex {vertex}")]
    NegativeWeight { vertex: usize, weight: Rational },
    #[error("weights sum to {0} ≠ 1")]
    BadSum(Rational),
    #[error("weights sum to zero; cannot normalize")]
    ZeroSum,
}

/// A `.tron v1` parse failure, tagged with the 1-based line it was found on
/// (0 when the problem is global, such as a missing vertex weight).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("illegal move {mv}: {reason}")]
    IllegalMove { mv: Move, reason: String },
    #[error("game is already finished")]
    Finished,
    #[error("game is not finished")]
    NotFinished,
    #[error("bad transcript line {line}: `{text}`")]
    Transcript { line: usize, text: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("instance has {n} vertices; the {backend} backend accepts at most {limit}")]
    TooLarge { backend: &'static str, n: usize, limit: usize },
    #[error("state budget of {0} positions exceeded")]
    StateBudget(usize),
    #[error("the tree-path backend requires a tree")]
    NotTree,
    #[error("weights do not fit the integer fast path")]
    Overflow,
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("no crossing edge exists for the optimal-reply table")]
    NoCrossingEdge,
    #[error("e-vertex precondition violated: {0}")]
    EPrecondition(String),
    #[error("{0}")]
    Config(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolicyError {
    #[error("invalid policy descriptor `{0}`")]
    Descriptor(String),
    #[error("policy {policy} cannot move for {side}")]
    WrongSide { policy: String, side: Player },
    #[error("policy {policy} proposed illegal move {mv}: {reason}")]
    Illegal { policy: String, mv: Move, reason: String, partial: Vec<Move> },
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LabError {
    #[error("infeasible configuration: {0}")]
    Config(String),
    /// A certificate or theorem bound failed; carries the canonical instance.
    #[error("violation on instance:\n{instance}{}", details.join("\n"))]
    Violation { instance: String, details: Vec<String> },
    #[error("backends disagree on instance:\n{0}")]
    BackendMismatch(String),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}
