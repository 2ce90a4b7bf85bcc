//! Two-sided partition of a tree around a crossing edge.
//!
//! Given Bob's optimal reply `B(u)` for every opening `u`, some edge
//! `a_l a_r` has `B(a_l)` across the edge on `a_r`'s side and `B(a_r)` on
//! `a_l`'s side. Removing it leaves a left and a right side. On each side:
//!
//! * `P` is a heaviest path starting at the side's endpoint `a`, ending at `b`;
//! * `Q` is a heaviest path starting at `b` (a heaviest path of the side);
//! * `Y` is the longest prefix of `Q` inside `P`, ending at `d`;
//! * `Z = Q \ Y` ends at `c`, `X = P \ Y`, `R` is everything else;
//! * `alpha = (r + 2y + z + x + x_other − z_other) / 3`;
//! * when `0 <= alpha < z − x`, `e` is the vertex of `Q` closest to `d` that
//!   splits `Q` into parts weighing at least `q − alpha` and `alpha`.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{AnalysisError, GraphError};
use crate::graph::{Vertex, VertexPath};
use crate::instance::Instance;
use crate::rational::Rational;
use crate::solver::{Backend, Solver, SolverConfig, TieBreak};

/// Which of two equidistant `e` candidates is taken.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum ERule {
    /// The candidate on the `c` side of `d`.
    #[default]
    TowardC,
    TowardB,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SideDecomposition {
    pub vertices: BTreeSet<Vertex>,
    pub a: Vertex,
    pub b: Vertex,
    pub c: Vertex,
    pub d: Vertex,
    pub e: Option<Vertex>,
    pub p_path: VertexPath,
    pub q_path: VertexPath,
    pub x_set: BTreeSet<Vertex>,
    pub y_set: BTreeSet<Vertex>,
    pub z_set: BTreeSet<Vertex>,
    pub r_set: BTreeSet<Vertex>,
    pub x: Rational,
    pub y: Rational,
    pub z: Rational,
    pub r: Rational,
    /// `w(Q) = y + z`.
    pub q: Rational,
    pub alpha: Rational,
}

impl SideDecomposition {
    pub fn weight(&self) -> Rational {
        &self.x + &self.y + &self.z + &self.r
    }

    /// `e` is defined.
    pub fn has_e(&self) -> bool {
        self.e.is_some()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decomposition {
    pub replies: Vec<Option<Vertex>>,
    /// `(a_l, a_r)`.
    pub crossing_edge: (Vertex, Vertex),
    pub left: SideDecomposition,
    pub right: SideDecomposition,
}

type Cell = Box<dyn Fn(&SideDecomposition) -> String>;

impl Decomposition {
    /// The same partition with the roles of the two sides exchanged.
    pub fn dual(&self) -> Decomposition {
        Decomposition {
            replies: self.replies.clone(),
            crossing_edge: (self.crossing_edge.1, self.crossing_edge.0),
            left: self.right.clone(),
            right: self.left.clone(),
        }
    }

    pub fn reply(&self, u: Vertex) -> Vertex {
        self.replies[u].expect("replies exist on boards with an edge")
    }

    /// Fixed-order text table of both sides, rationals in lowest terms.
    pub fn table(&self) -> String {
        let mut out = String::new();
        let (al, ar) = self.crossing_edge;
        writeln!(out, "crossing edge: ({al},{ar})").unwrap();
        writeln!(out, "{:<6} {:>12} {:>12}", "", "left", "right").unwrap();
        let fmt_v = |v: Option<Vertex>| v.map_or("-".to_string(), |v| v.to_string());
        let rows: [(&str, Cell); 11] = [
            ("a", Box::new(|s| s.a.to_string())),
            ("b", Box::new(|s| s.b.to_string())),
            ("c", Box::new(|s| s.c.to_string())),
            ("d", Box::new(|s| s.d.to_string())),
            ("e", Box::new(move |s| fmt_v(s.e))),
            ("x", Box::new(|s| s.x.to_string())),
            ("y", Box::new(|s| s.y.to_string())),
            ("z", Box::new(|s| s.z.to_string())),
            ("r", Box::new(|s| s.r.to_string())),
            ("q", Box::new(|s| s.q.to_string())),
            ("alpha", Box::new(|s| s.alpha.to_string())),
        ];
        for (name, f) in rows.iter() {
            writeln!(out, "{:<6} {:>12} {:>12}", name, f(&self.left), f(&self.right)).unwrap();
        }
        for (name, side) in [("left", &self.left), ("right", &self.right)] {
            writeln!(out, "{name} P={} Q={}", side.p_path, side.q_path).unwrap();
        }
        out
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DecomposeOptions {
    pub tie_break: TieBreak,
    pub e_rule: ERule,
}

/// `B(u)` for every vertex, from the exact solver.
pub fn bob_reply_table(inst: &Arc<Instance>, tie_break: TieBreak) -> Result<Vec<Option<Vertex>>, AnalysisError> {
    if !inst.is_tree() {
        return Err(GraphError::NotTree.into());
    }
    let mut solver = Solver::new(inst.clone(), SolverConfig::new(Backend::TreePath).with_tie_break(tie_break))?;
    (0..inst.vertex_count())
        .map(|u| solver.start_value(u).map(|(_, b)| b).map_err(Into::into))
        .collect()
}

/// First edge in canonical order whose endpoints' replies both point across
/// it, oriented so `a_l < a_r`.
pub fn crossing_edge(inst: &Instance, replies: &[Option<Vertex>]) -> Result<(Vertex, Vertex), AnalysisError> {
    let g = inst.graph();
    for &(u, v) in g.edges() {
        let (Some(bu), Some(bv)) = (replies[u], replies[v]) else { continue };
        let u_side = g.branch(v, u);
        if !u_side[bu] && u_side[bv] {
            return Ok((u, v));
        }
    }
    Err(AnalysisError::NoCrossingEdge)
}

/// Index along `weights` (ordered from `b` to `c`) of the split vertex
/// closest to `d_index`.
///
/// A vertex qualifies when the two subpaths from it to the ends (both
/// including it) weigh at least `q − alpha` and `alpha`, in either order.
pub fn locate_e(weights: &[Rational], d_index: usize, alpha: &Rational, rule: ERule) -> Result<usize, AnalysisError> {
    if alpha.is_negative() {
        return Err(AnalysisError::EPrecondition(format!("alpha = {alpha} is negative")));
    }
    if d_index >= weights.len() {
        return Err(AnalysisError::EPrecondition(format!("d index {d_index} outside Q")));
    }
    let q: Rational = weights.iter().sum();
    let heavy = &q - alpha;
    let mut to_b = Rational::zero();
    let qualifies: Vec<bool> = weights
        .iter()
        .map(|w| {
            to_b += w;
            let to_c = &q - &to_b + w;
            (to_b >= heavy && &to_c >= alpha) || (&to_b >= alpha && to_c >= heavy)
        })
        .collect();
    let dist = |i: usize| i.abs_diff(d_index);
    let preferred = |i: usize| match rule {
        ERule::TowardC => i >= d_index,
        ERule::TowardB => i <= d_index,
    };
    (0..weights.len())
        .filter(|&i| qualifies[i])
        .min_by_key(|&i| (dist(i), !preferred(i)))
        .ok_or_else(|| AnalysisError::EPrecondition(format!("no vertex splits Q at alpha = {alpha}")))
}

fn side(inst: &Instance, a: Vertex, in_side: &[bool]) -> Result<SideDecomposition, AnalysisError> {
    let blocked: Vec<bool> = in_side.iter().map(|&s| !s).collect();
    let (p_path, _) = inst.heaviest_from_mask(a, &blocked)?;
    let b = p_path.last().unwrap();
    let (q_path, q) = inst.heaviest_from_mask(b, &blocked)?;
    let split = q_path.vertices().iter().take_while(|v| p_path.contains(**v)).count();
    let y_set: BTreeSet<Vertex> = q_path.vertices()[..split].iter().copied().collect();
    let z_set: BTreeSet<Vertex> = q_path.vertices()[split..].iter().copied().collect();
    let x_set: BTreeSet<Vertex> = p_path.vertices().iter().copied().filter(|v| !y_set.contains(v)).collect();
    let vertices: BTreeSet<Vertex> = (0..in_side.len()).filter(|&v| in_side[v]).collect();
    let r_set: BTreeSet<Vertex> = vertices
        .iter()
        .copied()
        .filter(|v| !x_set.contains(v) && !y_set.contains(v) && !z_set.contains(v))
        .collect();
    Ok(SideDecomposition {
        a,
        b,
        c: q_path.last().unwrap(),
        d: q_path.vertices()[split - 1],
        e: None,
        x: inst.weight_of_set(&x_set),
        y: inst.weight_of_set(&y_set),
        z: inst.weight_of_set(&z_set),
        r: inst.weight_of_set(&r_set),
        q,
        alpha: Rational::zero(),
        vertices,
        p_path,
        q_path,
        x_set,
        y_set,
        z_set,
        r_set,
    })
}

fn finish_side(inst: &Instance, s: &mut SideDecomposition, other: &SideDecomposition, rule: ERule) -> Result<(), AnalysisError> {
    s.alpha = (&s.r + &s.y * 2 + &s.z + &s.x + &other.x - &other.z) * Rational::new(1, 3);
    s.e = None;
    if !s.alpha.is_negative() && s.alpha < &s.z - &s.x {
        let weights: Vec<Rational> = s.q_path.vertices().iter().map(|&v| inst.weight(v).clone()).collect();
        let d_index = s.q_path.vertices().iter().position(|&v| v == s.d).unwrap();
        let i = locate_e(&weights, d_index, &s.alpha, rule)?;
        s.e = Some(s.q_path.vertices()[i]);
    }
    Ok(())
}

/// Decomposition for a given reply table.
pub fn decompose_with_replies(inst: &Instance, replies: Vec<Option<Vertex>>, rule: ERule) -> Result<Decomposition, AnalysisError> {
    if !inst.is_tree() {
        return Err(GraphError::NotTree.into());
    }
    let (al, ar) = crossing_edge(inst, &replies)?;
    let left_mask = inst.graph().branch(ar, al);
    let right_mask: Vec<bool> = left_mask.iter().map(|&l| !l).collect();
    let mut left = side(inst, al, &left_mask)?;
    let mut right = side(inst, ar, &right_mask)?;
    finish_side(inst, &mut left, &right, rule)?;
    finish_side(inst, &mut right, &left, rule)?;
    Ok(Decomposition { replies, crossing_edge: (al, ar), left, right })
}

pub fn decompose_with(inst: &Arc<Instance>, opts: DecomposeOptions) -> Result<Decomposition, AnalysisError> {
    let replies = bob_reply_table(inst, opts.tie_break)?;
    decompose_with_replies(inst, replies, opts.e_rule)
}

pub fn decompose(inst: &Arc<Instance>) -> Result<Decomposition, AnalysisError> {
    decompose_with(inst, DecomposeOptions::default())
}
