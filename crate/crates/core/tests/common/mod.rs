//! Test-only oracles. Nothing here calls into the solver or the heaviest-path
//! code; they re-derive the same quantities by exhaustive enumeration.

#![allow(dead_code)]

use std::collections::BTreeSet;

use tron_core::{Graph, Instance, Rational, WeightCheck};

/// Exhaustive minimax over explicit ownership arrays, no memoization.
pub struct BruteForce<'a> {
    inst: &'a Instance,
}

impl<'a> BruteForce<'a> {
    pub fn new(inst: &'a Instance) -> Self {
        BruteForce { inst }
    }

    fn free_neighbors(&self, taken: &[bool], head: usize) -> Vec<usize> {
        self.inst.graph().neighbors(head).iter().copied().filter(|&v| !taken[v]).collect()
    }

    /// Remaining bob-minus-alice gain with `alice` to move (or the other side
    /// if the mover has no move).
    fn play(&self, taken: &mut Vec<bool>, a: usize, b: usize, alice: bool) -> Rational {
        let (mine, theirs) = if alice { (a, b) } else { (b, a) };
        let moves = self.free_neighbors(taken, mine);
        if moves.is_empty() {
            if self.free_neighbors(taken, theirs).is_empty() {
                return Rational::zero();
            }
            return self.play(taken, a, b, !alice);
        }
        let mut best: Option<Rational> = None;
        for v in moves {
            taken[v] = true;
            let w = self.inst.weight(v).clone();
            let val = if alice {
                -w + self.play(taken, v, b, false)
            } else {
                w + self.play(taken, a, v, true)
            };
            taken[v] = false;
            best = Some(match best {
                None => val,
                Some(x) if alice => x.min(val),
                Some(x) => x.max(val),
            });
        }
        best.unwrap()
    }

    /// Value after Alice opens at `u` and Bob at `b`.
    pub fn placed_value(&self, u: usize, b: usize) -> Rational {
        let mut taken = vec![false; self.inst.vertex_count()];
        taken[u] = true;
        taken[b] = true;
        self.inst.weight(b) - self.inst.weight(u) + self.play(&mut taken, u, b, true)
    }

    /// Value of opening at `u` and the set of all of Bob's optimal replies.
    pub fn start(&self, u: usize) -> (Rational, BTreeSet<usize>) {
        let n = self.inst.vertex_count();
        if n == 1 {
            return (-self.inst.weight(u).clone(), BTreeSet::new());
        }
        let vals: Vec<(usize, Rational)> = (0..n).filter(|&b| b != u).map(|b| (b, self.placed_value(u, b))).collect();
        let best = vals.iter().map(|(_, v)| v).max().unwrap().clone();
        let replies = vals.iter().filter(|(_, v)| *v == best).map(|(b, _)| *b).collect();
        (best, replies)
    }

    pub fn values(&self) -> Vec<Rational> {
        (0..self.inst.vertex_count()).map(|u| self.start(u).0).collect()
    }

    pub fn delta(&self) -> Rational {
        self.values().into_iter().min().unwrap()
    }
}

/// Every simple path (as a vertex sequence, both orientations) inside
/// `allowed`.
pub fn all_paths(inst: &Instance, allowed: &[bool]) -> Vec<Vec<usize>> {
    fn extend(g: &Graph, allowed: &[bool], path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        out.push(path.clone());
        let last = *path.last().unwrap();
        for &v in g.neighbors(last) {
            if allowed[v] && !path.contains(&v) {
                path.push(v);
                extend(g, allowed, path, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    for s in 0..inst.vertex_count() {
        if allowed[s] {
            extend(inst.graph(), allowed, &mut vec![s], &mut out);
        }
    }
    out
}

pub fn path_weight(inst: &Instance, p: &[usize]) -> Rational {
    p.iter().map(|&v| inst.weight(v).clone()).sum()
}

/// Tree from a parent array: vertex `i + 1` hangs below `parents[i] <= i`.
pub fn tree_from_parents(parents: &[usize]) -> Graph {
    let n = parents.len() + 1;
    Graph::new(n, parents.iter().enumerate().map(|(i, &p)| (p.min(i), i + 1))).unwrap()
}

pub fn weighted(g: Graph, raw: &[u32]) -> Instance {
    let mut raw: Vec<Rational> = raw.iter().map(|&x| Rational::from(x as i64)).collect();
    if raw.iter().all(|w| w.is_zero()) {
        raw[0] = Rational::one();
    }
    Instance::new(g, raw, WeightCheck::Normalize).unwrap()
}

/// Deterministic xorshift so test corpora do not depend on the library's
/// generators.
pub struct XorShift(pub u64);

impl XorShift {
    pub fn next(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.0 = x;
        x
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next() % n as u64) as usize
    }

    pub fn random_tree(&mut self, n: usize) -> Graph {
        let parents: Vec<usize> = (1..n).map(|v| self.below(v)).collect();
        tree_from_parents(&parents)
    }

    pub fn random_weighted_tree(&mut self, n: usize, max_w: u32) -> Instance {
        let g = self.random_tree(n);
        let raw: Vec<u32> = (0..n).map(|_| self.below(max_w as usize + 1) as u32).collect();
        weighted(g, &raw)
    }
}
