//! Weighted instances and heaviest-path queries.

use std::borrow::Borrow;
use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::One;

use crate::error::{GraphError, InstanceError};
use crate::graph::{Graph, Vertex, VertexPath};
use crate::rational::Rational;

/// How [`Instance::new`] treats a weight vector whose sum is not 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeightCheck {
    /// Reject unless the sum is exactly 1.
    Strict,
    /// Divide every weight by the total.
    Normalize,
    /// Keep weights as given (non-negativity is still enforced).
    Unchecked,
}

/// A connected graph with exact non-negative vertex weights.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Instance {
    graph: Graph,
    weights: Vec<Rational>,
}

impl Instance {
    pub fn new(graph: Graph, weights: Vec<Rational>, check: WeightCheck) -> Result<Self, InstanceError> {
        let n = graph.vertex_count();
        if weights.len() != n {
            return Err(InstanceError::WeightCount { expected: n, got: weights.len() });
        }
        if let Some((vertex, w)) = weights.iter().enumerate().find(|(_, w)| w.is_negative()) {
            return Err(InstanceError::NegativeWeight { vertex, weight: w.clone() });
        }
        if !graph.is_connected() {
            return Err(GraphError::Disconnected.into());
        }
        let total: Rational = weights.iter().sum();
        let weights = match check {
            WeightCheck::Strict if total != Rational::one() => return Err(InstanceError::BadSum(total)),
            WeightCheck::Normalize if total.is_zero() => return Err(InstanceError::ZeroSum),
            WeightCheck::Normalize => {
                let inv = total.recip();
                weights.into_iter().map(|w| w * &inv).collect()
            }
            _ => weights,
        };
        Ok(Instance { graph, weights })
    }

    /// All weights `1/n`.
    pub fn uniform(graph: Graph) -> Self {
        let n = graph.vertex_count() as i64;
        let w = vec![Rational::new(1, n); n as usize];
        Instance::new(graph, w, WeightCheck::Strict).expect("uniform weights on a connected graph")
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn weight(&self, v: Vertex) -> &Rational {
        &self.weights[v]
    }

    pub fn vertex_count(&self) -> usize {
        self.graph.vertex_count()
    }

    pub fn total_weight(&self) -> Rational {
        self.weights.iter().sum()
    }

    pub fn is_tree(&self) -> bool {
        self.graph.is_tree()
    }

    /// `w(U)`; the empty set weighs 0.
    pub fn weight_of_set<I>(&self, set: I) -> Rational
    where
        I: IntoIterator,
        I::Item: Borrow<Vertex>,
    {
        set.into_iter().map(|v| &self.weights[*v.borrow()]).sum()
    }

    pub fn path_weight(&self, path: &VertexPath) -> Rational {
        self.weight_of_set(path.vertices())
    }

    pub fn scale(&self, factor: &Rational) -> Instance {
        Instance {
            graph: self.graph.clone(),
            weights: self.weights.iter().map(|w| w * factor).collect(),
        }
    }

    /// Weights as integers over a common denominator: `w(v) = numer[v] / denom`.
    pub fn integer_weights(&self) -> (Vec<BigInt>, BigInt) {
        let denom = self.weights.iter().fold(BigInt::one(), |acc, w| acc.lcm(w.denom()));
        let numer = self
            .weights
            .iter()
            .map(|w| w.numer() * (&denom / w.denom()))
            .collect();
        (numer, denom)
    }

    /// A maximum-weight path starting at `v0` that avoids `forbidden`.
    ///
    /// The allowed component containing `v0` must be acyclic. Among paths of
    /// equal weight the lexicographically smallest vertex sequence wins.
    pub fn heaviest_path_from(&self, v0: Vertex, forbidden: &BTreeSet<Vertex>) -> Result<VertexPath, GraphError> {
        self.graph.check_vertex(v0)?;
        let mut blocked = vec![false; self.vertex_count()];
        for &f in forbidden {
            self.graph.check_vertex(f)?;
            blocked[f] = true;
        }
        if blocked[v0] {
            return Err(GraphError::ForbiddenStart(v0));
        }
        self.heaviest_from_mask(v0, &blocked).map(|(p, _)| p)
    }

    /// Worker for [`heaviest_path_from`](Self::heaviest_path_from) on a
    /// boolean mask. Returns the path and its weight.
    pub(crate) fn heaviest_from_mask(&self, v0: Vertex, blocked: &[bool]) -> Result<(VertexPath, Rational), GraphError> {
        let g = &self.graph;
        // DFS tree of the allowed component; paths from v0 are root-to-node.
        let mut parent = vec![usize::MAX; g.vertex_count()];
        let mut acc = vec![Rational::zero(); g.vertex_count()];
        let mut order = vec![v0];
        parent[v0] = v0;
        acc[v0] = self.weights[v0].clone();
        let mut i = 0;
        while i < order.len() {
            let x = order[i];
            i += 1;
            for &y in g.neighbors(x) {
                if blocked[y] || y == parent[x] {
                    continue;
                }
                if parent[y] != usize::MAX {
                    return Err(GraphError::NotForest);
                }
                parent[y] = x;
                acc[y] = &acc[x] + &self.weights[y];
                order.push(y);
            }
        }
        let best_weight = order.iter().map(|&v| &acc[v]).max().expect("v0 is reachable").clone();
        let path_to = |v: Vertex| {
            let mut p = vec![v];
            let mut x = v;
            while x != v0 {
                x = parent[x];
                p.push(x);
            }
            p.reverse();
            VertexPath(p)
        };
        let best = order
            .iter()
            .filter(|&&v| acc[v] == best_weight)
            .map(|&v| path_to(v))
            .min()
            .expect("non-empty");
        Ok((best, best_weight))
    }

    /// A maximum-weight path inside `allowed`, which must induce a subtree.
    pub fn heaviest_path(&self, allowed: &BTreeSet<Vertex>) -> Result<VertexPath, GraphError> {
        let n = self.vertex_count();
        if allowed.is_empty() {
            return Err(GraphError::EmptySet);
        }
        let mut blocked = vec![true; n];
        for &v in allowed {
            self.graph.check_vertex(v)?;
            blocked[v] = false;
        }
        let first = *allowed.iter().next().unwrap();
        let comp = self.graph.component(first, &blocked);
        if allowed.iter().any(|&v| !comp[v]) {
            return Err(GraphError::NotConnectedSet);
        }
        let mut best: Option<(Rational, VertexPath)> = None;
        for &s in allowed {
            let (p, w) = self.heaviest_from_mask(s, &blocked)?;
            let better = match &best {
                None => true,
                Some((bw, bp)) => w > *bw || (w == *bw && p < *bp),
            };
            if better {
                best = Some((w, p));
            }
        }
        Ok(best.unwrap().1)
    }
}
