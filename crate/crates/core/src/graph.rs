//! Undirected simple graphs, tree geodesics and vertex paths.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::GraphError;

pub type Vertex = usize;

/// A simple undirected graph on vertices `0..n`.
///
/// Neighbor lists are kept sorted so every traversal is deterministic.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    edges: Vec<(Vertex, Vertex)>,
    adj: Vec<Vec<Vertex>>,
}

impl Graph {
    /// Builds a graph, rejecting self-loops, duplicate edges and out-of-range
    /// endpoints. Edges are stored normalized as `(min, max)` and sorted.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (Vertex, Vertex)>) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        let mut norm = Vec::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(GraphError::InvalidVertex(u.max(v), n));
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            norm.push((u.min(v), u.max(v)));
        }
        norm.sort_unstable();
        if let Some(w) = norm.windows(2).find(|w| w[0] == w[1]) {
            return Err(GraphError::DuplicateEdge(w[0].0, w[0].1));
        }
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &norm {
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Ok(Graph { n, edges: norm, adj })
    }

    pub fn path(n: usize) -> Self {
        Graph::new(n, (1..n).map(|i| (i - 1, i))).expect("path graph")
    }

    /// Star with center 0 and leaves `1..=leaves`.
    pub fn star(leaves: usize) -> Self {
        Graph::new(leaves + 1, (1..=leaves).map(|i| (0, i))).expect("star graph")
    }

    pub fn cycle(n: usize) -> Result<Self, GraphError> {
        if n < 3 {
            return Err(GraphError::Invalid(format!("a cycle needs at least 3 vertices, got {n}")));
        }
        Graph::new(n, (0..n).map(|i| (i, (i + 1) % n)))
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(Vertex, Vertex)] {
        &self.edges
    }

    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        &self.adj[v]
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        u < self.n && self.adj[u].binary_search(&v).is_ok()
    }

    pub fn check_vertex(&self, v: Vertex) -> Result<(), GraphError> {
        if v < self.n {
            Ok(())
        } else {
            Err(GraphError::InvalidVertex(v, self.n))
        }
    }

    pub fn is_connected(&self) -> bool {
        self.bfs(0).iter().all(|d| d.is_some())
    }

    pub fn is_tree(&self) -> bool {
        self.edges.len() + 1 == self.n && self.is_connected()
    }

    pub fn is_cycle(&self) -> bool {
        self.n >= 3 && self.edges.len() == self.n && self.adj.iter().all(|a| a.len() == 2) && self.is_connected()
    }

    fn bfs(&self, source: Vertex) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n];
        let mut queue = VecDeque::new();
        dist[source] = Some(0);
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap();
            for &v in &self.adj[u] {
                if dist[v].is_none() {
                    dist[v] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Unweighted shortest-path distance.
    pub fn dist(&self, u: Vertex, v: Vertex) -> Result<usize, GraphError> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        self.bfs(u)[v].ok_or(GraphError::Disconnected)
    }

    /// All-pairs distances (BFS from every vertex). Requires a connected graph.
    pub fn distance_matrix(&self) -> Result<DistanceMatrix, GraphError> {
        let mut d = Vec::with_capacity(self.n * self.n);
        for s in 0..self.n {
            for x in self.bfs(s) {
                d.push(x.ok_or(GraphError::Disconnected)? as u32);
            }
        }
        Ok(DistanceMatrix { n: self.n, d })
    }

    /// The unique path between `u` and `v` in a tree.
    pub fn path_between(&self, u: Vertex, v: Vertex) -> Result<VertexPath, GraphError> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        if !self.is_tree() {
            return Err(GraphError::NotTree);
        }
        let mut parent = vec![usize::MAX; self.n];
        let mut queue = VecDeque::from([v]);
        parent[v] = v;
        while let Some(x) = queue.pop_front() {
            if x == u {
                break;
            }
            for &y in &self.adj[x] {
                if parent[y] == usize::MAX {
                    parent[y] = x;
                    queue.push_back(y);
                }
            }
        }
        let mut path = vec![u];
        let mut x = u;
        while x != v {
            x = parent[x];
            path.push(x);
        }
        Ok(VertexPath(path))
    }

    /// Whether `x` lies on the tree path between `u` and `v`.
    pub fn on_path(&self, u: Vertex, v: Vertex, x: Vertex) -> Result<bool, GraphError> {
        Ok(self.dist(u, x)? + self.dist(x, v)? == self.dist(u, v)?)
    }

    /// Vertices reachable from `start` without entering `blocked`.
    pub fn component(&self, start: Vertex, blocked: &[bool]) -> Vec<bool> {
        let mut seen = vec![false; self.n];
        if blocked[start] {
            return seen;
        }
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(x) = stack.pop() {
            for &y in &self.adj[x] {
                if !seen[y] && !blocked[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        seen
    }

    /// Vertex set of the component of `T - cut` containing `toward`.
    pub fn branch(&self, cut: Vertex, toward: Vertex) -> Vec<bool> {
        let mut blocked = vec![false; self.n];
        blocked[cut] = true;
        self.component(toward, &blocked)
    }

    pub fn is_path(&self, vertices: &[Vertex]) -> bool {
        let mut seen = vec![false; self.n];
        for (i, &v) in vertices.iter().enumerate() {
            if v >= self.n || seen[v] {
                return false;
            }
            seen[v] = true;
            if i > 0 && !self.has_edge(vertices[i - 1], v) {
                return false;
            }
        }
        true
    }
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Graph(n={}, edges={:?})", self.n, self.edges)
    }
}

/// Dense all-pairs distance table.
#[derive(Clone, Debug)]
pub struct DistanceMatrix {
    n: usize,
    d: Vec<u32>,
}

impl DistanceMatrix {
    #[inline]
    pub fn get(&self, u: Vertex, v: Vertex) -> usize {
        self.d[u * self.n + v] as usize
    }

    /// Betweenness test on a tree: `x` lies on the `u`–`v` geodesic.
    #[inline]
    pub fn between(&self, u: Vertex, v: Vertex, x: Vertex) -> bool {
        self.get(u, x) + self.get(x, v) == self.get(u, v)
    }
}

/// An ordered sequence of distinct vertices.
///
/// Validity against a particular graph is checked by [`Graph::is_path`];
/// constructors in this crate only produce valid paths.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexPath(pub Vec<Vertex>);

impl VertexPath {
    pub fn single(v: Vertex) -> Self {
        VertexPath(vec![v])
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> Option<Vertex> {
        self.0.first().copied()
    }

    pub fn last(&self) -> Option<Vertex> {
        self.0.last().copied()
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.0.contains(&v)
    }

    pub fn reversed(&self) -> Self {
        VertexPath(self.0.iter().rev().copied().collect())
    }
}

impl fmt::Debug for VertexPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl fmt::Display for VertexPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_edges() {
        assert!(matches!(Graph::new(3, [(0, 0)]), Err(GraphError::SelfLoop(0))));
        assert!(matches!(Graph::new(3, [(0, 1), (1, 0)]), Err(GraphError::DuplicateEdge(0, 1))));
        assert!(matches!(Graph::new(2, [(0, 2)]), Err(GraphError::InvalidVertex(2, 2))));
    }

    #[test]
    fn classification() {
        assert!(Graph::path(5).is_tree());
        assert!(!Graph::path(5).is_cycle());
        let c4 = Graph::cycle(4).unwrap();
        assert!(c4.is_cycle());
        assert!(!c4.is_tree());
        let two_comp = Graph::new(4, [(0, 1), (2, 3)]).unwrap();
        assert!(!two_comp.is_connected());
        assert!(!two_comp.is_tree());
        assert!(Graph::new(1, []).unwrap().is_tree());
    }

    #[test]
    fn distances() {
        let p = Graph::path(5);
        assert_eq!(p.dist(0, 2).unwrap(), 2);
        assert_eq!(p.dist(3, 3).unwrap(), 0);
        assert_eq!(Graph::star(3).dist(0, 2).unwrap(), 1);
        assert_eq!(Graph::star(3).dist(1, 2).unwrap(), 2);
        let m = p.distance_matrix().unwrap();
        assert_eq!(m.get(4, 0), 4);
    }

    #[test]
    fn tree_paths() {
        let p = Graph::path(5);
        assert_eq!(p.path_between(0, 2).unwrap().0, vec![0, 1, 2]);
        assert_eq!(p.path_between(3, 3).unwrap().0, vec![3]);
        assert!(p.on_path(0, 2, 1).unwrap());
        assert!(!p.on_path(0, 2, 3).unwrap());
        assert!(matches!(Graph::cycle(4).unwrap().path_between(0, 2), Err(GraphError::NotTree)));
    }

    #[test]
    fn branches() {
        let s = Graph::star(3);
        let b = s.branch(0, 2);
        assert_eq!(b, vec![false, false, true, false]);
        let p = Graph::path(5);
        assert_eq!(p.branch(2, 4), vec![false, false, false, true, true]);
    }
}
