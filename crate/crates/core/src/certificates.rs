//! Every inequality of the upper-bound argument, instantiated on one tree and
//! checked against the exact game value.
//!
//! Each bound is evaluated twice: as stated (left = side of the smaller
//! crossing-edge endpoint) and dual (sides exchanged). The weighted sums that
//! combine the bounds into `Δ <= 1/5` are re-checked as plain arithmetic on
//! the instance's quantities.

use std::fmt;
use std::fmt::Write as _;
use std::sync::Arc;

use serde::Serialize;

use crate::decomposition::{decompose_with_replies, DecomposeOptions, Decomposition};
use crate::error::{AnalysisError, GraphError};
use crate::format::instance_digest;
use crate::graph::DistanceMatrix;
use crate::instance::Instance;
use crate::rational::Rational;
use crate::solver::{Backend, Solver, SolverConfig, ValueReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Orientation {
    AsStated,
    Dual,
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Orientation::AsStated => "AsStated",
            Orientation::Dual => "Dual",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Verdict {
    Holds,
    Violated,
    NotApplicable,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Holds => "Holds",
            Verdict::Violated => "Violated",
            Verdict::NotApplicable => "NotApplicable",
        })
    }
}

/// The sub-case of the last lemma selected by the location of `B(e)` and
/// Bob's optimal path from `e`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum LemmaCase {
    Case11,
    Case12,
    Case21,
    Case22,
    Case23,
}

impl LemmaCase {
    pub const ALL: [LemmaCase; 5] = [LemmaCase::Case11, LemmaCase::Case12, LemmaCase::Case21, LemmaCase::Case22, LemmaCase::Case23];

    pub fn name(self) -> &'static str {
        match self {
            LemmaCase::Case11 => "Case1.1",
            LemmaCase::Case12 => "Case1.2",
            LemmaCase::Case21 => "Case2.1",
            LemmaCase::Case22 => "Case2.2",
            LemmaCase::Case23 => "Case2.3",
        }
    }
}

/// One inequality `lhs <= rhs`, where `lhs` is `Δ` or a per-start value.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Bound {
    pub name: String,
    pub orientation: Orientation,
    pub applicable: bool,
    pub reason: String,
    pub lhs: Rational,
    pub rhs: Option<Rational>,
    pub verdict: Verdict,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Relation {
    Equal,
    AtMost,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Equal => "==",
            Relation::AtMost => "<=",
        })
    }
}

/// An arithmetic fact about the decomposition quantities.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub orientation: Orientation,
    pub value: Rational,
    pub relation: Relation,
    pub bound: Rational,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CertificateReport {
    pub digest: String,
    pub decomposition: Decomposition,
    pub delta: Rational,
    pub start_values: Vec<Rational>,
    pub bounds: Vec<Bound>,
    pub checks: Vec<Check>,
    pub case_as_stated: Option<LemmaCase>,
    pub case_dual: Option<LemmaCase>,
}

impl CertificateReport {
    pub fn bound(&self, name: &str, orientation: Orientation) -> Option<&Bound> {
        self.bounds.iter().find(|b| b.name == name && b.orientation == orientation)
    }

    pub fn check(&self, name: &str, orientation: Orientation) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name && c.orientation == orientation)
    }

    /// The bound is applicable in at least one orientation.
    pub fn fired(&self, name: &str) -> bool {
        self.bounds.iter().any(|b| b.name == name && b.applicable)
    }

    pub fn case(&self, orientation: Orientation) -> Option<LemmaCase> {
        match orientation {
            Orientation::AsStated => self.case_as_stated,
            Orientation::Dual => self.case_dual,
        }
    }

    /// `e` coincides with `d` on the left side of the given orientation.
    pub fn e_at_d(&self, orientation: Orientation) -> bool {
        let side = match orientation {
            Orientation::AsStated => &self.decomposition.left,
            Orientation::Dual => &self.decomposition.right,
        };
        side.e == Some(side.d)
    }

    /// One line per violated bound or failed check.
    pub fn violations(&self) -> Vec<String> {
        let bounds = self.bounds.iter().filter(|b| b.verdict == Verdict::Violated).map(|b| {
            format!("{} {}: {} > {}", b.name, b.orientation, b.lhs, b.rhs.as_ref().expect("violated bounds have a rhs"))
        });
        let checks = self
            .checks
            .iter()
            .filter(|c| c.verdict == Verdict::Violated)
            .map(|c| format!("{} {}: {} {} {} fails", c.name, c.orientation, c.value, c.relation, c.bound));
        bounds.chain(checks).collect()
    }

    pub fn holds(&self) -> bool {
        self.violations().is_empty()
    }

    /// Stable line-oriented form.
    ///
    /// Header lines `digest`, `delta`, `crossing-edge`, `case`; then one
    /// `name orientation applicable rhs verdict` line per bound (`-` for an
    /// absent rhs); then `check name orientation value relation bound verdict`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let (al, ar) = self.decomposition.crossing_edge;
        writeln!(out, "digest {}", self.digest).unwrap();
        writeln!(out, "delta {}", self.delta).unwrap();
        writeln!(out, "crossing-edge {al} {ar}").unwrap();
        for o in [Orientation::AsStated, Orientation::Dual] {
            let case = self.case(o).map_or("none", LemmaCase::name);
            writeln!(out, "case {o} {case}").unwrap();
        }
        for b in &self.bounds {
            let rhs = b.rhs.as_ref().map_or("-".to_string(), Rational::to_string);
            writeln!(out, "{} {} {} {} {}", b.name, b.orientation, b.applicable, rhs, b.verdict).unwrap();
        }
        for c in &self.checks {
            writeln!(out, "check {} {} {} {} {} {}", c.name, c.orientation, c.value, c.relation, c.bound, c.verdict).unwrap();
        }
        out
    }
}

fn fifth() -> Rational {
    Rational::new(1, 5)
}

fn quarter() -> Rational {
    Rational::new(1, 4)
}

/// Right-hand sides shared by bounds and combination checks, for the left
/// side of `d`.
struct Rhs {
    eq3: Rational,
    eq4: Rational,
    lemma2: Rational,
    eq5: Rational,
    lemma4: Rational,
    eq6: Rational,
    eq7: Rational,
    eq8: Rational,
}

impl Rhs {
    fn new(d: &Decomposition) -> Rhs {
        let (l, r) = (&d.left, &d.right);
        let lemma4 = (&r.y + &r.z) - (&l.y + &l.z) + &l.alpha;
        Rhs {
            eq3: (&r.y + &r.z) - (&l.x + &l.y),
            eq4: (&l.y + &l.z) - (&r.x + &r.y),
            lemma2: Rational::one() - &r.y - &r.z - &l.z * 2,
            eq5: (&l.y + &l.z + &l.r - &l.alpha) - (&r.x + &r.y),
            eq6: &l.y + &l.z + &l.r - &l.alpha * 2,
            eq7: &l.y + &l.r - &r.y,
            eq8: -&l.y + &l.r + &r.x + &r.y,
            lemma4,
        }
    }

    fn case(&self, c: LemmaCase) -> &Rational {
        match c {
            LemmaCase::Case11 => &self.eq6,
            LemmaCase::Case12 | LemmaCase::Case23 => &self.lemma4,
            LemmaCase::Case21 => &self.eq7,
            LemmaCase::Case22 => &self.eq8,
        }
    }
}

struct BoundList {
    orientation: Orientation,
    bounds: Vec<Bound>,
}

impl BoundList {
    fn push(&mut self, name: &str, applicable: bool, reason: String, lhs: &Rational, rhs: Rational) {
        let verdict = match (applicable, lhs <= &rhs) {
            (false, _) => Verdict::NotApplicable,
            (true, true) => Verdict::Holds,
            (true, false) => Verdict::Violated,
        };
        self.bounds.push(Bound {
            name: name.to_string(),
            orientation: self.orientation,
            applicable,
            reason,
            lhs: lhs.clone(),
            rhs: applicable.then_some(rhs),
            verdict,
        });
    }

    fn always(&mut self, name: &str, lhs: &Rational, rhs: Rational) {
        self.push(name, true, String::new(), lhs, rhs);
    }
}

/// Which sub-case of the last lemma applies, if its preconditions hold.
fn classify(inst: &Instance, d: &Decomposition, values: &ValueReport, dm: &DistanceMatrix) -> Result<Option<LemmaCase>, String> {
    let (l, ar) = (&d.left, d.crossing_edge.1);
    let Some(e) = l.e else {
        return Err("e undefined".into());
    };
    if dm.get(ar, l.d) <= dm.get(d.reply(ar), l.d) {
        return Err("Lemma2 applies".into());
    }
    if dm.get(ar, l.d) <= dm.get(e, l.d) {
        return Err("Lemma3 applies".into());
    }
    let be = d.reply(e);
    let bob_path = &values.record(e).bob_claimed;
    let case = if dm.get(be, l.d) < dm.get(e, l.d) {
        if bob_path.contains(&ar) {
            LemmaCase::Case12
        } else {
            LemmaCase::Case11
        }
    } else if !inst.graph().branch(l.d, ar)[be] {
        LemmaCase::Case21
    } else if bob_path.iter().any(|v| l.vertices.contains(v)) {
        LemmaCase::Case22
    } else {
        LemmaCase::Case23
    };
    Ok(Some(case))
}

fn evaluate(
    inst: &Instance,
    d: &Decomposition,
    values: &ValueReport,
    dm: &DistanceMatrix,
    orientation: Orientation,
) -> (Vec<Bound>, Option<LemmaCase>) {
    let l = &d.left;
    let (al, ar) = d.crossing_edge;
    let delta = &values.delta;
    let value = |u| values.record(u).value.clone();
    let rhs = Rhs::new(d);
    let mut out = BoundList { orientation, bounds: Vec::new() };

    out.always("Eq3", delta, rhs.eq3.clone());
    out.always("Eq4", delta, rhs.eq4.clone());
    out.always("Eq3.start", &value(al), rhs.eq3.clone());
    out.always("Eq4.start", &value(ar), rhs.eq4.clone());
    out.always("Quarter", delta, quarter());
    out.always("Quarter.start", &value(al).min(value(ar)), quarter());

    let (to_d, reply_to_d) = (dm.get(ar, l.d), dm.get(d.reply(ar), l.d));
    let lemma2 = to_d <= reply_to_d;
    let reason = format!("dist(a_r,d_l)={to_d} dist(B(a_r),d_l)={reply_to_d}");
    out.push("Lemma2", lemma2, reason.clone(), delta, rhs.lemma2.clone());
    out.push("Lemma2.fifth", lemma2, reason, delta, fifth());

    let (lemma3, reason) = match l.e {
        Some(e) => (to_d <= dm.get(e, l.d), format!("dist(a_r,d_l)={to_d} dist(e_l,d_l)={}", dm.get(e, l.d))),
        None => (false, "e undefined".to_string()),
    };
    out.push("Lemma3", lemma3, reason.clone(), delta, fifth());
    let eq5_reason = if lemma3 && lemma2 { "Lemma2 applies".to_string() } else { reason };
    out.push("Eq5", lemma3 && !lemma2, eq5_reason, delta, rhs.eq5.clone());

    out.always("Lemma4-disjunct", delta, fifth().max(rhs.lemma4.clone()));

    let case = classify(inst, d, values, dm);
    for c in LemmaCase::ALL {
        let (applicable, reason) = match &case {
            Ok(Some(found)) if *found == c => (true, String::new()),
            Ok(Some(found)) => (false, format!("{} selected", found.name())),
            Ok(None) => unreachable!("classify selects a case or reports why not"),
            Err(why) => (false, why.clone()),
        };
        out.push(c.name(), applicable, reason, delta, rhs.case(c).clone());
    }

    out.always("Theorem", delta, fifth());
    (out.bounds, case.ok().flatten())
}

fn orientation_checks(d: &Decomposition, delta: &Rational, orientation: Orientation) -> Vec<Check> {
    let (l, r) = (&d.left, &d.right);
    let rhs = Rhs::new(d);
    let mut out = Vec::new();
    let mut push = |name: &str, value: Rational, relation: Relation, bound: Rational| {
        let ok = match relation {
            Relation::Equal => value == bound,
            Relation::AtMost => value <= bound,
        };
        out.push(Check {
            name: name.to_string(),
            orientation,
            value,
            relation,
            bound,
            verdict: if ok { Verdict::Holds } else { Verdict::Violated },
        });
    };
    let zero = Rational::zero;
    let one = || Rational::one();

    push("Eq1.sum", l.weight() + r.weight(), Relation::Equal, one());
    // x <= z <= y, folded into a single non-positivity test
    push("Eq2.order", (&l.x - &l.z).max(&l.z - &l.y), Relation::AtMost, zero());
    let three_alpha = &l.r + &l.y * 2 + &l.z + &l.x + &r.x - &r.z;
    push("alpha.def", &l.alpha * 3, Relation::Equal, three_alpha);
    if !delta.is_negative() {
        push("alpha.sign", -&l.alpha, Relation::AtMost, zero());
    }

    let base = |a: i64, b: i64| &rhs.eq3 * a + &rhs.eq4 * b;
    push("Quarter.chain", base(2, 2), Relation::AtMost, one());
    push("Lemma2.chain", &rhs.lemma2 + base(2, 2), Relation::AtMost, one());
    push("Lemma3.chain", &rhs.eq5 * 9 + base(13, 8), Relation::AtMost, Rational::from(6));
    push("Case1.1.chain", &rhs.eq6 * 9 + base(2, 4), Relation::AtMost, Rational::from(3));
    push("Case2.1.chain", &rhs.eq7 * 3 + base(7, 5), Relation::AtMost, Rational::from(3));
    push("Case2.2.chain", &rhs.eq8 * 3 + base(5, 7), Relation::AtMost, Rational::from(3));

    let lemma4_dual = (&l.y + &l.z) - (&r.y + &r.z) + &r.alpha;
    let alphas = &l.alpha * 3 + &r.alpha * 3 + &l.z * 2 + &r.z * 2;
    let expanded = &l.r + &l.y * 2 + &l.z * 2 + &l.x * 2 + &r.r + &r.y * 2 + &r.z * 2 + &r.x * 2;
    push("Theorem.identity", alphas, Relation::Equal, expanded);
    push("Theorem.chain", &rhs.lemma4 * 3 + lemma4_dual * 3 + base(2, 2), Relation::AtMost, Rational::from(2));
    out
}

/// Arithmetic checks in both orientations for the report's decomposition.
pub fn check_combinations(report: &CertificateReport) -> Vec<Check> {
    let mut out = orientation_checks(&report.decomposition, &report.delta, Orientation::AsStated);
    out.extend(orientation_checks(&report.decomposition.dual(), &report.delta, Orientation::Dual));
    out
}

/// Certificate report for a decomposition and the exact values it was built
/// from.
pub fn certify_decomposition(inst: &Instance, d: Decomposition, values: &ValueReport) -> Result<CertificateReport, AnalysisError> {
    let dm = inst.graph().distance_matrix()?;
    let (mut bounds, case_as_stated) = evaluate(inst, &d, values, &dm, Orientation::AsStated);
    let (dual_bounds, case_dual) = evaluate(inst, &d.dual(), values, &dm, Orientation::Dual);
    bounds.extend(dual_bounds);
    let mut report = CertificateReport {
        digest: instance_digest(inst),
        decomposition: d,
        delta: values.delta.clone(),
        start_values: values.values(),
        bounds,
        checks: Vec::new(),
        case_as_stated,
        case_dual,
    };
    report.checks = check_combinations(&report);
    Ok(report)
}

pub fn certify_with(inst: &Arc<Instance>, opts: DecomposeOptions) -> Result<CertificateReport, AnalysisError> {
    if !inst.is_tree() {
        return Err(GraphError::NotTree.into());
    }
    let config = SolverConfig::new(Backend::TreePath).with_tie_break(opts.tie_break);
    let values = Solver::new(inst.clone(), config)?.game_value()?;
    let d = decompose_with_replies(inst, values.replies(), opts.e_rule)?;
    certify_decomposition(inst, d, &values)
}

pub fn certify(inst: &Arc<Instance>) -> Result<CertificateReport, AnalysisError> {
    certify_with(inst, DecomposeOptions::default())
}
