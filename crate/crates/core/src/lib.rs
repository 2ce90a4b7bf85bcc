//! Exact analysis of the weighted Tron game: instances, the play protocol,
//! minimax solvers, the two-sided tree decomposition, Alice's avoid-Bob
//! strategy family, bound certificates and instance search.

pub mod certificates;
pub mod decomposition;
pub mod engine;
pub mod error;
pub mod format;
pub mod graph;
pub mod instance;
pub mod lab;
pub mod policies;
pub mod rational;
pub mod solver;

pub use certificates::{certify, Bound, CertificateReport, Check, LemmaCase, Orientation, Verdict};
pub use decomposition::{decompose, Decomposition, DecomposeOptions, ERule, SideDecomposition};
pub use engine::{GameState, Move, MoveKind, Outcome, Phase, Player};
pub use error::{AnalysisError, EngineError, GraphError, InstanceError, LabError, ParseError, PolicyError, SolveError};
pub use graph::{Graph, Vertex, VertexPath};
pub use instance::{Instance, WeightCheck};
pub use policies::{simulate, Policy, PolicySpec, Transcript};
pub use rational::{q, Rational};
pub use solver::{Backend, SolveRecord, Solver, SolverConfig, TieBreak, ValueReport};
