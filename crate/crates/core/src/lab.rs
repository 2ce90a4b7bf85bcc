//! Instance generation, theorem fuzzing, extremal search and conjecture
//! scans.
//!
//! All randomness comes from seeded ChaCha streams and all parallel work is
//! merged in generation order, so every result is a pure function of its
//! configuration.

use std::collections::BTreeSet;
use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::certificates::{certify_with, LemmaCase, Orientation};
use crate::decomposition::{DecomposeOptions, ERule};
use crate::error::LabError;
use crate::format::serialize_instance;
use crate::graph::{Graph, Vertex};
use crate::instance::{Instance, WeightCheck};
use crate::policies::{best_response, LongestPathBob};
use crate::rational::Rational;
use crate::solver::{game_value, Backend, TieBreak, GENERAL_MAX_VERTICES};
use crate::engine::Player;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Family {
    RandomTree,
    Path,
    Star,
    Spider,
    Caterpillar,
    Cycle,
}

impl Family {
    pub const TREES: [Family; 5] = [Family::RandomTree, Family::Path, Family::Star, Family::Spider, Family::Caterpillar];

    pub fn is_tree(self) -> bool {
        self != Family::Cycle
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::RandomTree => "tree",
            Family::Path => "path",
            Family::Star => "star",
            Family::Spider => "spider",
            Family::Caterpillar => "caterpillar",
            Family::Cycle => "cycle",
        })
    }
}

impl FromStr for Family {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "tree" => Family::RandomTree,
            "path" => Family::Path,
            "star" => Family::Star,
            "spider" => Family::Spider,
            "caterpillar" => Family::Caterpillar,
            "cycle" => Family::Cycle,
            _ => return Err(LabError::Config(format!("unknown family `{s}`"))),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum WeightMode {
    /// Every vertex `1/n`.
    Uniform,
    /// `support` random vertices share `denominator` quanta of `1/denominator`,
    /// each holding at least one.
    Grid { denominator: u32, support: usize },
    /// Independent integers in `0..=max`, normalized (never all zero).
    Random { max: u32 },
}

impl fmt::Display for WeightMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightMode::Uniform => f.write_str("uniform"),
            WeightMode::Grid { denominator, support } => write!(f, "grid:{denominator}:{support}"),
            WeightMode::Random { max } => write!(f, "random:{max}"),
        }
    }
}

/// Accepts `uniform`, `grid:DENOMINATOR:SUPPORT` and `random:MAX`.
impl FromStr for WeightMode {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || LabError::Config(format!("bad weight mode `{s}`"));
        let parts: Vec<&str> = s.split(':').collect();
        Ok(match parts.as_slice() {
            ["uniform"] => WeightMode::Uniform,
            ["grid", d, k] => WeightMode::Grid { denominator: d.parse().map_err(|_| bad())?, support: k.parse().map_err(|_| bad())? },
            ["random", m] => WeightMode::Random { max: m.parse().map_err(|_| bad())? },
            _ => return Err(bad()),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct GeneratorConfig {
    pub family: Family,
    pub n: usize,
    pub weight_mode: WeightMode,
    pub seed: u64,
}

/// Tree with a center `0` and legs of the given lengths.
pub fn spider(legs: &[usize]) -> Graph {
    let mut edges = Vec::new();
    let mut next = 1;
    for &len in legs {
        let mut prev = 0;
        for _ in 0..len {
            edges.push((prev, next));
            prev = next;
            next += 1;
        }
    }
    Graph::new(next, edges).expect("spiders are trees")
}

/// Labeled tree from a Prüfer code over `0..n`.
fn prufer_tree(n: usize, rng: &mut ChaCha8Rng) -> Graph {
    if n <= 2 {
        return Graph::path(n);
    }
    let code: Vec<usize> = (0..n - 2).map(|_| rng.gen_range(0..n)).collect();
    let mut degree = vec![1usize; n];
    for &x in &code {
        degree[x] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    for &x in &code {
        let leaf = (0..n).find(|&j| degree[j] == 1).expect("a leaf remains");
        edges.push((leaf, x));
        degree[leaf] -= 1;
        degree[x] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&j| degree[j] == 1).collect();
    edges.push((rest[0], rest[1]));
    Graph::new(n, edges).expect("Prüfer decoding yields a tree")
}

fn random_spider(n: usize, rng: &mut ChaCha8Rng) -> Graph {
    if n <= 3 {
        return Graph::path(n);
    }
    let legs_count = rng.gen_range(3..=n - 1);
    let mut legs = vec![1; legs_count];
    for _ in 0..n - 1 - legs_count {
        legs[rng.gen_range(0..legs_count)] += 1;
    }
    spider(&legs)
}

fn random_caterpillar(n: usize, rng: &mut ChaCha8Rng) -> Graph {
    let spine = rng.gen_range(1..=n);
    let mut edges: Vec<(Vertex, Vertex)> = (1..spine).map(|i| (i - 1, i)).collect();
    edges.extend((spine..n).map(|v| (rng.gen_range(0..spine), v)));
    Graph::new(n, edges).expect("caterpillars are trees")
}

fn random_shape(family: Family, n: usize, rng: &mut ChaCha8Rng) -> Graph {
    match family {
        Family::RandomTree => prufer_tree(n, rng),
        Family::Path => Graph::path(n),
        Family::Star => Graph::star(n - 1),
        Family::Spider => random_spider(n, rng),
        Family::Caterpillar => random_caterpillar(n, rng),
        Family::Cycle => Graph::cycle(n).expect("validated cycle size"),
    }
}

fn check_mode(n: usize, mode: WeightMode) -> Result<(), LabError> {
    match mode {
        WeightMode::Grid { denominator, support } if support == 0 || support > n || support > denominator as usize => Err(
            LabError::Config(format!("support {support} needs 1 <= support <= min(n = {n}, denominator = {denominator})")),
        ),
        WeightMode::Random { max: 0 } => Err(LabError::Config("random weights need max >= 1".into())),
        _ => Ok(()),
    }
}

fn random_weights(n: usize, mode: WeightMode, rng: &mut ChaCha8Rng) -> Vec<Rational> {
    match mode {
        WeightMode::Uniform => vec![Rational::new(1, n as i64); n],
        WeightMode::Grid { denominator, support } => {
            let mut vertices: Vec<usize> = (0..n).collect();
            vertices.shuffle(rng);
            let mut quanta = vec![0i64; n];
            for &v in &vertices[..support] {
                quanta[v] = 1;
            }
            for _ in 0..denominator as usize - support {
                quanta[vertices[rng.gen_range(0..support)]] += 1;
            }
            quanta.into_iter().map(|k| Rational::new(k, denominator as i64)).collect()
        }
        WeightMode::Random { max } => {
            let mut raw: Vec<i64> = (0..n).map(|_| rng.gen_range(0..=max) as i64).collect();
            if raw.iter().all(|&x| x == 0) {
                raw[rng.gen_range(0..n)] = 1;
            }
            let total: i64 = raw.iter().sum();
            raw.into_iter().map(|x| Rational::new(x, total)).collect()
        }
    }
}

/// Deterministic stream of instances for one configuration.
pub struct Generator {
    config: GeneratorConfig,
    rng: ChaCha8Rng,
}

impl Generator {
    pub fn new(config: GeneratorConfig) -> Result<Self, LabError> {
        let min_n = match config.family {
            Family::Cycle => 3,
            Family::Star => 2,
            _ => 1,
        };
        if config.n < min_n {
            return Err(LabError::Config(format!("{} needs n >= {min_n}", config.family)));
        }
        check_mode(config.n, config.weight_mode)?;
        Ok(Generator { config, rng: ChaCha8Rng::seed_from_u64(config.seed) })
    }
}

impl Iterator for Generator {
    type Item = Instance;

    fn next(&mut self) -> Option<Instance> {
        let GeneratorConfig { family, n, weight_mode, .. } = self.config;
        let g = random_shape(family, n, &mut self.rng);
        let w = random_weights(n, weight_mode, &mut self.rng);
        Some(Instance::new(g, w, WeightCheck::Strict).expect("generated weights sum to 1"))
    }
}

pub fn generate(config: GeneratorConfig, count: usize) -> Result<Vec<Instance>, LabError> {
    Ok(Generator::new(config)?.take(count).collect())
}

/// The mixed fuzz corpus: `count` trees with sizes in `n_min..=n_max`,
/// mostly random labeled trees with some paths, stars, spiders and
/// caterpillars, cycling through uniform, grid (`1/10`, support up to 5)
/// and random (`0..=20`) weights.
pub fn fuzz_corpus(seed: u64, count: usize, n_min: usize, n_max: usize) -> Result<Vec<Instance>, LabError> {
    if n_min == 0 || n_min > n_max {
        return Err(LabError::Config(format!("bad size range {n_min}..={n_max}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let families = [Family::RandomTree, Family::RandomTree, Family::RandomTree, Family::Path, Family::Star, Family::Spider, Family::Caterpillar];
    Ok((0..count)
        .map(|i| {
            let family = *families.choose(&mut rng).unwrap();
            let n = rng.gen_range(n_min.max(if family == Family::Star { 2 } else { 1 })..=n_max);
            let mode = match i % 3 {
                0 => WeightMode::Uniform,
                1 => WeightMode::Grid { denominator: 10, support: rng.gen_range(1..=n.min(5)) },
                _ => WeightMode::Random { max: 20 },
            };
            let g = random_shape(family, n, &mut rng);
            let w = random_weights(n, mode, &mut rng);
            Instance::new(g, w, WeightCheck::Strict).expect("generated weights sum to 1")
        })
        .collect())
}

/// Level sequences of all rooted trees on `n` vertices, root at level 0.
fn rooted_level_sequences(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return Vec::new();
    }
    let mut seq: Vec<usize> = (0..n).collect();
    let mut out = vec![seq.clone()];
    while let Some(p) = (1..n).rev().find(|&i| seq[i] > 1) {
        let q = (0..p).rev().find(|&i| seq[i] == seq[p] - 1).expect("a parent level exists");
        for i in p..n {
            seq[i] = seq[i - (p - q)];
        }
        out.push(seq.clone());
    }
    out
}

fn tree_from_levels(levels: &[usize]) -> Graph {
    let mut last_at = vec![0usize; levels.len()];
    let mut edges = Vec::new();
    for (i, &l) in levels.iter().enumerate() {
        if i > 0 {
            edges.push((last_at[l - 1], i));
        }
        last_at[l] = i;
    }
    Graph::new(levels.len(), edges).expect("level sequences describe trees")
}

fn ahu(g: &Graph, v: Vertex, parent: Option<Vertex>) -> String {
    let mut children: Vec<String> = g.neighbors(v).iter().filter(|&&c| Some(c) != parent).map(|&c| ahu(g, c, Some(v))).collect();
    children.sort();
    format!("({})", children.concat())
}

/// Isomorphism-invariant encoding of a tree: the smaller of its encodings
/// rooted at each center.
pub fn canonical_form(g: &Graph) -> String {
    let n = g.vertex_count();
    let mut degree: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    let mut layer: Vec<Vertex> = (0..n).filter(|&v| degree[v] <= 1).collect();
    let mut remaining = n;
    while remaining > 2 {
        remaining -= layer.len();
        let mut next = Vec::new();
        for &v in &layer {
            for &w in g.neighbors(v) {
                if degree[w] > 1 {
                    degree[w] -= 1;
                    if degree[w] == 1 {
                        next.push(w);
                    }
                }
            }
            degree[v] = 0;
        }
        layer = next;
    }
    layer.iter().map(|&c| ahu(g, c, None)).min().unwrap_or_default()
}

/// One representative per isomorphism class of trees on `n` vertices.
pub fn unlabeled_trees(n: usize) -> Vec<Graph> {
    let mut seen = BTreeSet::new();
    rooted_level_sequences(n)
        .into_iter()
        .map(|l| tree_from_levels(&l))
        .filter(|g| seen.insert(canonical_form(g)))
        .collect()
}

/// All spiders on `n` vertices with at least three legs, legs in
/// non-increasing order.
pub fn spiders(n: usize) -> Vec<Graph> {
    fn partitions(rest: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest == 0 {
            out.push(cur.clone());
            return;
        }
        for part in (1..=rest.min(max)).rev() {
            cur.push(part);
            partitions(rest - part, part, cur, out);
            cur.pop();
        }
    }
    if n < 4 {
        return Vec::new();
    }
    let mut out = Vec::new();
    partitions(n - 1, n - 1, &mut Vec::new(), &mut out);
    out.into_iter().filter(|legs| legs.len() >= 3).map(|legs| spider(&legs)).collect()
}

fn is_caterpillar(g: &Graph) -> bool {
    let inner: Vec<Vertex> = (0..g.vertex_count()).filter(|&v| g.degree(v) > 1).collect();
    inner.iter().all(|&v| g.neighbors(v).iter().filter(|&&w| g.degree(w) > 1).count() <= 2)
}

/// Tree shapes of one family on exactly `n` vertices, up to isomorphism.
pub fn shapes(family: Family, n: usize) -> Vec<Graph> {
    match family {
        Family::RandomTree => unlabeled_trees(n),
        Family::Path => vec![Graph::path(n)],
        Family::Star if n >= 2 => vec![Graph::star(n - 1)],
        Family::Star => Vec::new(),
        Family::Spider => spiders(n),
        Family::Caterpillar => unlabeled_trees(n).into_iter().filter(is_caterpillar).collect(),
        Family::Cycle => Graph::cycle(n).into_iter().collect(),
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct FuzzSummary {
    pub instances: usize,
    pub max_delta: Option<Rational>,
    pub max_delta_instance: Option<String>,
    /// `max` over instances of `min(value(a_l), value(a_r))`.
    pub max_restricted_start: Option<Rational>,
    pub violations: usize,
    pub lemma2_fired: usize,
    pub lemma3_fired: usize,
    pub case_counts: Vec<(String, usize)>,
    /// Instances where `e = d` in some orientation.
    pub e_at_d: usize,
}

impl FuzzSummary {
    pub fn to_text(&self) -> String {
        let opt = |r: &Option<Rational>| r.as_ref().map_or("-".to_string(), Rational::to_string);
        let mut out = String::new();
        writeln!(out, "instances {}", self.instances).unwrap();
        writeln!(out, "max_delta {}", opt(&self.max_delta)).unwrap();
        writeln!(out, "max_restricted_start {}", opt(&self.max_restricted_start)).unwrap();
        writeln!(out, "violations {}", self.violations).unwrap();
        writeln!(out, "lemma2_fired {}", self.lemma2_fired).unwrap();
        writeln!(out, "lemma3_fired {}", self.lemma3_fired).unwrap();
        for (name, count) in &self.case_counts {
            writeln!(out, "case {name} {count}").unwrap();
        }
        writeln!(out, "e_at_d {}", self.e_at_d).unwrap();
        out
    }
}

const RULES: [DecomposeOptions; 4] = [
    DecomposeOptions { tie_break: TieBreak::SmallestIndex, e_rule: ERule::TowardC },
    DecomposeOptions { tie_break: TieBreak::SmallestIndex, e_rule: ERule::TowardB },
    DecomposeOptions { tie_break: TieBreak::LargestIndex, e_rule: ERule::TowardC },
    DecomposeOptions { tie_break: TieBreak::LargestIndex, e_rule: ERule::TowardB },
];

struct FuzzOne {
    delta: Rational,
    restricted: Rational,
    lemma2: bool,
    lemma3: bool,
    cases: Vec<LemmaCase>,
    e_at_d: bool,
}

fn fuzz_one(inst: &Arc<Instance>) -> Result<FuzzOne, LabError> {
    if inst.vertex_count() == 1 {
        let delta = game_value(inst, Backend::TreePath)?.delta;
        return Ok(FuzzOne { restricted: delta.clone(), delta, lemma2: false, lemma3: false, cases: Vec::new(), e_at_d: false });
    }
    let mut first = None;
    for opts in RULES {
        let r = certify_with(inst, opts)?;
        if !r.holds() {
            let mut details = vec![format!("rules {opts:?}")];
            details.extend(r.violations());
            return Err(LabError::Violation { instance: serialize_instance(inst), details });
        }
        first.get_or_insert(r);
    }
    let r = first.expect("at least one rule set");
    let (al, ar) = r.decomposition.crossing_edge;
    let orientations = [Orientation::AsStated, Orientation::Dual];
    Ok(FuzzOne {
        restricted: r.start_values[al].clone().min(r.start_values[ar].clone()),
        lemma2: r.fired("Lemma2"),
        lemma3: r.fired("Lemma3"),
        cases: orientations.iter().filter_map(|&o| r.case(o)).collect(),
        e_at_d: orientations.iter().any(|&o| r.e_at_d(o)),
        delta: r.delta,
    })
}

/// Certifies every instance with at least two vertices under all four tie-break and `e` rules and
/// aborts on the first (in corpus order) violated bound.
pub fn fuzz_theorem(instances: &[Instance]) -> Result<FuzzSummary, LabError> {
    let results: Vec<Result<FuzzOne, LabError>> =
        instances.par_iter().map(|inst| fuzz_one(&Arc::new(inst.clone()))).collect();
    let mut s = FuzzSummary { instances: instances.len(), ..FuzzSummary::default() };
    let mut cases = [0usize; 5];
    for (inst, res) in instances.iter().zip(results) {
        let one = res?;
        if s.max_delta.as_ref().is_none_or(|m| one.delta > *m) {
            s.max_delta = Some(one.delta.clone());
            s.max_delta_instance = Some(serialize_instance(inst));
        }
        if s.max_restricted_start.as_ref().is_none_or(|m| one.restricted > *m) {
            s.max_restricted_start = Some(one.restricted.clone());
        }
        s.lemma2_fired += one.lemma2 as usize;
        s.lemma3_fired += one.lemma3 as usize;
        s.e_at_d += one.e_at_d as usize;
        for c in one.cases {
            cases[LemmaCase::ALL.iter().position(|&x| x == c).unwrap()] += 1;
        }
    }
    s.case_counts = LemmaCase::ALL.iter().zip(cases).map(|(c, k)| (c.name().to_string(), k)).collect();
    Ok(s)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum WeightSpace {
    Uniform,
    /// Multiples of `1/denominator` on at most `max_support` vertices.
    Grid { denominator: u32, max_support: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SearchConfig {
    pub seed: u64,
    /// Maximum number of evaluated instances.
    pub budget: usize,
    pub family: Family,
    /// Exhaustive phase covers every shape with `1 <= n <= exhaustive_n_max`.
    pub exhaustive_n_max: usize,
    /// Hill-climbing phase size; `0` skips the phase.
    pub climb_n: usize,
    pub weights: WeightSpace,
}

impl SearchConfig {
    pub fn new(seed: u64, budget: usize) -> Self {
        SearchConfig {
            seed,
            budget,
            family: Family::RandomTree,
            exhaustive_n_max: 6,
            climb_n: 8,
            weights: WeightSpace::Grid { denominator: 10, max_support: 5 },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceEntry {
    pub evaluation: usize,
    pub phase: &'static str,
    pub delta: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchResult {
    pub best_instance: Instance,
    pub best_delta: Rational,
    pub evaluations: usize,
    pub trace: Vec<TraceEntry>,
    pub truncated: bool,
    /// Backend that re-solved the best instance.
    pub verified_by: Backend,
}

impl SearchResult {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "best_delta {}", self.best_delta).unwrap();
        writeln!(out, "evaluations {}", self.evaluations).unwrap();
        writeln!(out, "truncated {}", self.truncated).unwrap();
        writeln!(out, "verified_by {}", backend_name(self.verified_by)).unwrap();
        for t in &self.trace {
            writeln!(out, "trace {} {} {}", t.evaluation, t.phase, t.delta).unwrap();
        }
        out.push_str(&serialize_instance(&self.best_instance));
        out
    }
}

fn backend_name(b: Backend) -> &'static str {
    match b {
        Backend::General => "general",
        Backend::TreePath => "treepath",
    }
}

/// Compositions of `total` into `parts` positive parts, lexicographic.
fn compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    (1..=total.saturating_sub(parts as u32 - 1))
        .flat_map(|first| {
            compositions(total - first, parts - 1).into_iter().map(move |mut rest| {
                rest.insert(0, first);
                rest
            })
        })
        .collect()
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for v in start..n {
            cur.push(v);
            go(v + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Weight vectors (as quanta over a common denominator) of the weight space
/// on `n` vertices.
fn weight_grid(n: usize, space: WeightSpace) -> (Vec<Vec<u32>>, u32) {
    match space {
        WeightSpace::Uniform => (vec![vec![1; n]], n as u32),
        WeightSpace::Grid { denominator, max_support } => {
            let mut out = Vec::new();
            for k in 1..=max_support.min(n).min(denominator as usize) {
                let comps = compositions(denominator, k);
                for s in subsets(n, k) {
                    for c in &comps {
                        let mut q = vec![0; n];
                        for (&v, &x) in s.iter().zip(c) {
                            q[v] = x;
                        }
                        out.push(q);
                    }
                }
            }
            (out, denominator)
        }
    }
}

fn grid_instance(g: &Graph, quanta: &[u32], denominator: u32) -> Instance {
    let w = quanta.iter().map(|&k| Rational::new(k as i64, denominator as i64)).collect();
    Instance::new(g.clone(), w, WeightCheck::Strict).expect("quanta sum to the denominator")
}

fn tree_delta(inst: &Instance) -> Result<Rational, LabError> {
    let delta = game_value(&Arc::new(inst.clone()), Backend::TreePath)?.delta;
    if delta > Rational::new(1, 5) {
        return Err(LabError::Violation {
            instance: serialize_instance(inst),
            details: vec![format!("tree value {delta} exceeds 1/5")],
        });
    }
    Ok(delta)
}

struct Best {
    instance: Instance,
    delta: Rational,
    trace: Vec<TraceEntry>,
}

impl Best {
    fn offer(&mut self, inst: &Instance, delta: &Rational, evaluation: usize, phase: &'static str) {
        if *delta > self.delta {
            self.delta = delta.clone();
            self.instance = inst.clone();
            self.trace.push(TraceEntry { evaluation, phase, delta: delta.clone() });
        }
    }
}

/// One hill-climbing move on `(tree, quanta)`.
fn mutate(g: &Graph, quanta: &[u32], family: Family, rng: &mut ChaCha8Rng) -> (Graph, Vec<u32>) {
    let n = g.vertex_count();
    let mut q = quanta.to_vec();
    let reshape = family == Family::RandomTree && n >= 3;
    match rng.gen_range(0..if reshape { 3 } else { 2 }) {
        0 => {
            let from: Vec<usize> = (0..n).filter(|&v| q[v] > 0).collect();
            let a = *from.choose(rng).unwrap();
            let b = rng.gen_range(0..n);
            q[a] -= 1;
            q[b] += 1;
            (g.clone(), q)
        }
        1 => {
            let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
            q.swap(a, b);
            (g.clone(), q)
        }
        _ => {
            let leaves: Vec<usize> = (0..n).filter(|&v| g.degree(v) == 1).collect();
            let leaf = *leaves.choose(rng).unwrap();
            let old = g.neighbors(leaf)[0];
            let targets: Vec<usize> = (0..n).filter(|&t| t != leaf && t != old).collect();
            let t = *targets.choose(rng).unwrap();
            let edges = g.edges().iter().copied().filter(|&(x, y)| x != leaf && y != leaf).chain([(leaf, t)]);
            (Graph::new(n, edges).expect("reattaching a leaf keeps a tree"), q)
        }
    }
}

/// Exhaustive enumeration over small shapes, then hill-climbing, within an
/// evaluation budget. The best instance is re-solved by a second backend.
pub fn extremal_search(config: &SearchConfig) -> Result<SearchResult, LabError> {
    if !config.family.is_tree() {
        return Err(LabError::Config("extremal search runs on tree families".into()));
    }
    if let WeightSpace::Grid { denominator: 0, .. } | WeightSpace::Grid { max_support: 0, .. } = config.weights {
        return Err(LabError::Config("grid weights need a positive denominator and support".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n_min = if config.family == Family::Star { 2 } else { 1 };
    let exhaustive_budget = if config.climb_n > 0 { config.budget / 2 } else { config.budget };

    let seed_n = n_min.max(config.exhaustive_n_max).max(config.climb_n);
    let seed_shape = shapes(config.family, seed_n).into_iter().next().ok_or_else(|| {
        LabError::Config(format!("family {} has no shape on {seed_n} vertices", config.family))
    })?;
    let (grid, den) = weight_grid(seed_n, config.weights);
    let seed_instance = grid_instance(&seed_shape, &grid[0], den);
    let seed_delta = tree_delta(&seed_instance)?;
    let trace = vec![TraceEntry { evaluation: 0, phase: "seed", delta: seed_delta.clone() }];
    let mut best = Best { delta: seed_delta, instance: seed_instance, trace };
    let mut evaluations = 0;
    let mut truncated = false;

    'exhaustive: for n in n_min..=config.exhaustive_n_max {
        let (grid, den) = weight_grid(n, config.weights);
        for g in shapes(config.family, n) {
            let room = exhaustive_budget - evaluations;
            if room == 0 {
                truncated = true;
                break 'exhaustive;
            }
            let batch: Vec<Instance> = grid.iter().take(room).map(|q| grid_instance(&g, q, den)).collect();
            if batch.len() < grid.len() {
                truncated = true;
            }
            let deltas: Vec<Result<Rational, LabError>> = batch.par_iter().map(tree_delta).collect();
            for (inst, d) in batch.iter().zip(deltas) {
                evaluations += 1;
                best.offer(inst, &d?, evaluations, "exhaustive");
            }
        }
    }

    if config.climb_n >= n_min && evaluations < config.budget {
        let start_shape = random_shape(config.family, config.climb_n, &mut rng);
        let den = match config.weights {
            WeightSpace::Uniform => config.climb_n as u32,
            WeightSpace::Grid { denominator, .. } => denominator,
        };
        let mut quanta = match config.weights {
            WeightSpace::Uniform => vec![1; config.climb_n],
            WeightSpace::Grid { denominator, max_support } => {
                let support = max_support.min(config.climb_n).min(denominator as usize);
                let mode = WeightMode::Grid { denominator, support };
                random_weights(config.climb_n, mode, &mut rng)
                    .iter()
                    .map(|w| (w * Rational::from(denominator as i64)).numer().try_into().expect("small quanta"))
                    .collect()
            }
        };
        let mut shape = start_shape;
        let mut current = tree_delta(&grid_instance(&shape, &quanta, den))?;
        evaluations += 1;
        best.offer(&grid_instance(&shape, &quanta, den), &current, evaluations, "climb");
        let uniform = config.weights == WeightSpace::Uniform;
        while evaluations < config.budget {
            let (g2, mut q2) = mutate(&shape, &quanta, config.family, &mut rng);
            if uniform {
                q2 = quanta.clone();
            }
            let inst = grid_instance(&g2, &q2, den);
            let d = tree_delta(&inst)?;
            evaluations += 1;
            best.offer(&inst, &d, evaluations, "climb");
            if d >= current {
                current = d;
                shape = g2;
                quanta = q2;
            }
        }
    }

    let arc = Arc::new(best.instance.clone());
    let verified_by = if arc.vertex_count() <= GENERAL_MAX_VERTICES { Backend::General } else { Backend::TreePath };
    let check = game_value(&arc, verified_by)?.delta;
    if check != best.delta {
        return Err(LabError::BackendMismatch(serialize_instance(&arc)));
    }
    Ok(SearchResult {
        best_instance: best.instance,
        best_delta: best.delta,
        evaluations,
        trace: best.trace,
        truncated,
        verified_by,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ScanTarget {
    /// Every uniform tree shape with `1 <= n <= n_max`; threshold `1/10`.
    UnweightedTrees { n_max: usize },
    /// Random weighted cycles with `3 <= n <= n_max`; threshold `1/5`.
    Cycles { count: usize, n_max: usize, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ScanSummary {
    pub target: String,
    pub instances: usize,
    pub threshold: Rational,
    pub max_delta: Rational,
    pub argmax: String,
    /// Canonical text of every instance above the threshold.
    pub exceedances: Vec<String>,
}

impl ScanSummary {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "target {}", self.target).unwrap();
        writeln!(out, "instances {}", self.instances).unwrap();
        writeln!(out, "threshold {}", self.threshold).unwrap();
        writeln!(out, "max_delta {}", self.max_delta).unwrap();
        writeln!(out, "exceedances {}", self.exceedances.len()).unwrap();
        writeln!(out, "argmax").unwrap();
        out.push_str(&self.argmax);
        for e in &self.exceedances {
            writeln!(out, "exceedance").unwrap();
            out.push_str(e);
        }
        out
    }
}

/// Maximum value over a conjecture's instance class. Exceedances are
/// reported, not treated as errors.
pub fn conjecture_scan(target: ScanTarget) -> Result<ScanSummary, LabError> {
    let (name, instances, threshold, backend) = match target {
        ScanTarget::UnweightedTrees { n_max } => {
            let all: Vec<Instance> = (1..=n_max).flat_map(unlabeled_trees).map(Instance::uniform).collect();
            (format!("unweighted-trees n<={n_max}"), all, Rational::new(1, 10), Backend::TreePath)
        }
        ScanTarget::Cycles { count, n_max, seed } => {
            if !(3..=GENERAL_MAX_VERTICES).contains(&n_max) {
                return Err(LabError::Config(format!("cycle sizes need 3 <= n_max <= {GENERAL_MAX_VERTICES}")));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let all = (0..count)
                .map(|_| {
                    let n = rng.gen_range(3..=n_max);
                    let w = random_weights(n, WeightMode::Random { max: 20 }, &mut rng);
                    Instance::new(Graph::cycle(n).expect("n >= 3"), w, WeightCheck::Strict).expect("normalized")
                })
                .collect();
            (format!("cycles count={count} n<={n_max} seed={seed}"), all, Rational::new(1, 5), Backend::General)
        }
    };
    if instances.is_empty() {
        return Err(LabError::Config("scan covers no instances".into()));
    }
    let deltas: Vec<Result<Rational, LabError>> = instances
        .par_iter()
        .map(|inst| Ok(game_value(&Arc::new(inst.clone()), backend)?.delta))
        .collect();
    let mut max: Option<(Rational, usize)> = None;
    let mut exceedances = Vec::new();
    for (i, d) in deltas.into_iter().enumerate() {
        let d = d?;
        if d > threshold {
            exceedances.push(serialize_instance(&instances[i]));
        }
        if max.as_ref().is_none_or(|(m, _)| d > *m) {
            max = Some((d, i));
        }
    }
    let (max_delta, i) = max.expect("non-empty");
    Ok(ScanSummary {
        target: name,
        instances: instances.len(),
        threshold,
        max_delta,
        argmax: serialize_instance(&instances[i]),
        exceedances,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HeuristicSummary {
    pub trees: usize,
    /// Largest `|A| - |B|` any Alice achieves against the longest-path Bob.
    pub worst_gap: i64,
    /// Smallest `n * Δ` over the same trees.
    pub min_scaled_delta: Rational,
    /// Trees where some Alice beats the heuristic by more than one vertex.
    pub gap_failures: Vec<String>,
    /// Trees with `Δ < -1/n`.
    pub lower_bound_failures: Vec<String>,
}

/// Longest-path Bob against an exhaustive best-response Alice, and the
/// exact value, on every uniform tree shape with `1 <= n <= n_max`.
pub fn heuristic_scan(n_max: usize) -> Result<HeuristicSummary, LabError> {
    let trees: Vec<Instance> = (1..=n_max).flat_map(unlabeled_trees).map(Instance::uniform).collect();
    let rows: Vec<Result<(Rational, Rational), LabError>> = trees
        .par_iter()
        .map(|inst| {
            let arc = Arc::new(inst.clone());
            let n = Rational::from(inst.vertex_count() as i64);
            let vs_heuristic = best_response(&arc, &mut LongestPathBob::new(&arc)?, Player::Bob)?.value;
            let delta = game_value(&arc, Backend::TreePath)?.delta;
            Ok((-(vs_heuristic * &n), delta * &n))
        })
        .collect();
    let mut s = HeuristicSummary {
        trees: trees.len(),
        worst_gap: i64::MIN,
        min_scaled_delta: Rational::zero(),
        gap_failures: Vec::new(),
        lower_bound_failures: Vec::new(),
    };
    let minus_one = Rational::from(-1);
    for (i, row) in rows.into_iter().enumerate() {
        let (gap, scaled) = row?;
        let gap_int: i64 = gap.numer().try_into().expect("vertex counts fit");
        s.worst_gap = s.worst_gap.max(gap_int);
        if gap_int > 1 {
            s.gap_failures.push(serialize_instance(&trees[i]));
        }
        if scaled < minus_one {
            s.lower_bound_failures.push(serialize_instance(&trees[i]));
        }
        if i == 0 || scaled < s.min_scaled_delta {
            s.min_scaled_delta = scaled;
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn tree_counts() {
        let rooted: Vec<usize> = (1..=10).map(|n| rooted_level_sequences(n).len()).collect();
        assert_eq!(rooted, vec![1, 1, 2, 4, 9, 20, 48, 115, 286, 719]);
        let free: Vec<usize> = (1..=10).map(|n| unlabeled_trees(n).len()).collect();
        assert_eq!(free, vec![1, 1, 1, 2, 3, 6, 11, 23, 47, 106]);
        for g in unlabeled_trees(8) {
            assert!(g.is_tree());
        }
    }

    #[test]
    fn canonical_form_ignores_labels() {
        let a = Graph::new(5, [(0, 1), (1, 2), (1, 3), (3, 4)]).unwrap();
        let b = Graph::new(5, [(4, 2), (2, 0), (2, 3), (0, 1)]).unwrap();
        assert_eq!(canonical_form(&a), canonical_form(&b));
        assert_ne!(canonical_form(&a), canonical_form(&Graph::path(5)));
    }

    #[test]
    fn family_shapes() {
        assert_eq!(spiders(7).len(), 7);
        assert!(spiders(7).iter().all(|g| g.is_tree() && g.vertex_count() == 7));
        assert_eq!(shapes(Family::Caterpillar, 6).len(), 6);
        assert_eq!(shapes(Family::Caterpillar, 7).len(), 10);
        assert_eq!(shapes(Family::Star, 1).len(), 0);
    }

    #[test]
    fn generator_examples() {
        let cfg = |family, n, weight_mode, seed| GeneratorConfig { family, n, weight_mode, seed };
        let p5 = generate(cfg(Family::Path, 5, WeightMode::Uniform, 1), 1).unwrap();
        assert_eq!(p5[0], Instance::uniform(Graph::path(5)));
        let c4 = generate(cfg(Family::Cycle, 4, WeightMode::Uniform, 1), 1).unwrap();
        assert_eq!(c4[0].weights(), vec![q(1, 4); 4].as_slice());
        let a = generate(cfg(Family::RandomTree, 7, WeightMode::Random { max: 9 }, 42), 3).unwrap();
        let b = generate(cfg(Family::RandomTree, 7, WeightMode::Random { max: 9 }, 42), 3).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|i| i.is_tree() && i.total_weight() == q(1, 1)));
        let grid = generate(cfg(Family::Caterpillar, 9, WeightMode::Grid { denominator: 10, support: 4 }, 3), 5).unwrap();
        for i in &grid {
            assert_eq!(i.weights().iter().filter(|w| !w.is_zero()).count(), 4);
            assert_eq!(i.total_weight(), q(1, 1));
        }
        assert!(Generator::new(cfg(Family::Path, 3, WeightMode::Grid { denominator: 10, support: 4 }, 0)).is_err());
        assert!(Generator::new(cfg(Family::Cycle, 2, WeightMode::Uniform, 0)).is_err());
    }

    #[test]
    fn weight_mode_round_trip() {
        for m in [WeightMode::Uniform, WeightMode::Grid { denominator: 10, support: 3 }, WeightMode::Random { max: 7 }] {
            assert_eq!(m.to_string().parse::<WeightMode>().unwrap(), m);
        }
        assert!("grid:10".parse::<WeightMode>().is_err());
        assert_eq!("spider".parse::<Family>().unwrap(), Family::Spider);
    }

    #[test]
    fn prufer_trees_are_trees() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 1..30 {
            let g = prufer_tree(n, &mut rng);
            assert!(g.is_tree());
            assert_eq!(g.vertex_count(), n);
        }
    }

    #[test]
    fn grid_enumeration() {
        assert_eq!(compositions(4, 2), vec![vec![1, 3], vec![2, 2], vec![3, 1]]);
        assert_eq!(subsets(4, 2).len(), 6);
        let (grid, den) = weight_grid(3, WeightSpace::Grid { denominator: 3, max_support: 2 });
        assert_eq!(den, 3);
        // 3 singletons + 3 pairs * 2 compositions
        assert_eq!(grid.len(), 9);
        assert!(grid.iter().all(|q| q.iter().sum::<u32>() == 3));
    }

    #[test]
    fn small_fuzz_run() {
        let corpus = fuzz_corpus(11, 40, 1, 8).unwrap();
        let s = fuzz_theorem(&corpus).unwrap();
        assert_eq!(s.instances, 40);
        assert_eq!(s.violations, 0);
        assert!(s.max_delta.unwrap() <= q(1, 5));
        assert!(s.max_restricted_start.unwrap() <= q(1, 4));
    }

    #[test]
    fn search_budget_zero_returns_seed() {
        let mut cfg = SearchConfig::new(1, 0);
        cfg.family = Family::Path;
        cfg.exhaustive_n_max = 3;
        cfg.climb_n = 0;
        let r = extremal_search(&cfg).unwrap();
        assert_eq!(r.evaluations, 0);
        assert!(r.truncated);
        assert_eq!(r.best_instance.vertex_count(), 3);
    }

    #[test]
    fn search_is_deterministic() {
        let mut cfg = SearchConfig::new(9, 120);
        cfg.exhaustive_n_max = 4;
        cfg.climb_n = 6;
        let a = extremal_search(&cfg).unwrap();
        let b = extremal_search(&cfg).unwrap();
        assert_eq!(a.to_text(), b.to_text());
        assert_eq!(a.evaluations, 120);
        assert!(a.best_delta <= q(1, 5));
    }

    #[test]
    fn small_scans() {
        let s = conjecture_scan(ScanTarget::UnweightedTrees { n_max: 6 }).unwrap();
        assert_eq!(s.instances, 1 + 1 + 1 + 2 + 3 + 6);
        assert!(s.exceedances.is_empty());
        let c = conjecture_scan(ScanTarget::Cycles { count: 10, n_max: 7, seed: 3 }).unwrap();
        assert_eq!(c.instances, 10);
        let h = heuristic_scan(6).unwrap();
        assert!(h.worst_gap <= 1);
        assert!(h.gap_failures.is_empty() && h.lower_bound_failures.is_empty());
    }
}
