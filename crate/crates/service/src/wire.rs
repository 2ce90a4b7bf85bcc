//! JSON shapes of the wire protocol.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use tron_core::{CertificateReport, Instance, Move, Outcome, Phase, Player, Rational, ValueReport, Vertex};

/// An exact rational with a lossy decimal rendering for display.
#[derive(Clone, Debug, Serialize)]
pub struct WireRational {
    pub exact: String,
    pub decimal: f64,
}

impl From<&Rational> for WireRational {
    fn from(r: &Rational) -> Self {
        WireRational { exact: r.to_string(), decimal: r.to_f64() }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Alice,
    Bob,
}

impl From<Side> for Player {
    fn from(s: Side) -> Player {
        match s {
            Side::Alice => Player::Alice,
            Side::Bob => Player::Bob,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
pub struct GeneratorRequest {
    /// `tree`, `path`, `star`, `spider`, `caterpillar` or `cycle`.
    pub family: String,
    pub n: usize,
    /// `uniform`, `grid:DENOMINATOR:SUPPORT` or `random:MAX`.
    #[serde(default = "uniform")]
    pub weights: String,
    #[serde(default)]
    pub seed: u64,
}

fn uniform() -> String {
    "uniform".into()
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateGame {
    /// Instance text in the `tron v1` format.
    pub instance: Option<String>,
    pub generator: Option<GeneratorRequest>,
    #[serde(default)]
    pub normalize: bool,
    pub human_side: Option<Side>,
    /// `optimal`, `avoidbob:auto` or `longestpath`.
    pub engine_policy: Option<String>,
}

#[derive(Clone, Debug, Deserialize)]
pub struct SubmitMove {
    #[serde(rename = "move")]
    pub mv: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct WireOutcome {
    pub value: WireRational,
    pub alice_weight: WireRational,
    pub bob_weight: WireRational,
}

impl From<&Outcome> for WireOutcome {
    fn from(o: &Outcome) -> Self {
        WireOutcome {
            value: (&o.value).into(),
            alice_weight: (&o.alice_weight).into(),
            bob_weight: (&o.bob_weight).into(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct WireInstance {
    pub n: usize,
    pub weights: Vec<WireRational>,
    pub edges: Vec<(Vertex, Vertex)>,
    pub is_tree: bool,
    pub digest: String,
}

impl WireInstance {
    pub fn new(inst: &Instance, digest: &str) -> Self {
        WireInstance {
            n: inst.vertex_count(),
            weights: inst.weights().iter().map(Into::into).collect(),
            edges: inst.graph().edges().to_vec(),
            is_tree: inst.is_tree(),
            digest: digest.to_string(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LogEntry {
    #[serde(rename = "move")]
    pub mv: Move,
    pub by: &'static str,
    /// Milliseconds since the Unix epoch.
    pub at_ms: u128,
}

#[derive(Clone, Debug, Serialize)]
pub struct WireState {
    pub id: String,
    pub instance: WireInstance,
    pub human_side: Player,
    pub engine_policy: String,
    pub phase: Phase,
    pub turn: Player,
    pub alice_path: Vec<Vertex>,
    pub bob_path: Vec<Vertex>,
    pub alice_stuck: bool,
    pub bob_stuck: bool,
    pub score: WireOutcome,
    pub log: Vec<LogEntry>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GameView {
    pub id: String,
    pub state: WireState,
    pub legal_moves: Vec<Move>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outcome: Option<WireOutcome>,
}

#[derive(Clone, Debug, Serialize)]
pub struct MoveResponse {
    pub state: WireState,
    pub legal_moves: Vec<Move>,
    /// The last engine move, if the engine replied.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub engine_move: Option<Move>,
    pub engine_moves: Vec<Move>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outcome: Option<WireOutcome>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Hint {
    #[serde(rename = "move")]
    pub mv: Move,
    /// Final `w(Bob) − w(Alice)` under optimal play from here.
    pub value: WireRational,
}

#[derive(Clone, Debug, Serialize)]
pub struct StartValue {
    pub vertex: Vertex,
    pub value: WireRational,
    pub bob_reply: Option<Vertex>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Analysis {
    pub delta: WireRational,
    pub optimal_starts: Vec<Vertex>,
    pub per_start: Vec<StartValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decomposition: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decomposition_table: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificates: Option<Value>,
}

impl Analysis {
    pub fn new(values: &ValueReport, report: Option<&CertificateReport>) -> Self {
        let (decomposition, decomposition_table, certificates) = match report {
            Some(r) => {
                let mut cert = serde_json::to_value(r).expect("reports serialize");
                let decomposition = cert.as_object_mut().and_then(|o| o.remove("decomposition"));
                (decomposition, Some(r.decomposition.table()), Some(cert))
            }
            None => (None, None, None),
        };
        Analysis {
            delta: (&values.delta).into(),
            optimal_starts: values.optimal_starts.iter().copied().collect(),
            per_start: values
                .per_start
                .iter()
                .map(|r| StartValue { vertex: r.start, value: (&r.value).into(), bob_reply: r.bob_reply })
                .collect(),
            decomposition,
            decomposition_table,
            certificates,
        }
    }
}
