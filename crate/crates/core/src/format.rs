//! The line-oriented `.tron v1` instance format.
//!
//! ```text
//! tron v1
//! n 3
//! w 0 1/3
//! w 1 1/3
//! w 2 1/3
//! e 0 1
//! e 1 2
//! ```
//!
//! `#` starts a comment; blank lines are ignored.

use std::fmt::Write as _;

use crate::error::{InstanceError, ParseError};
use crate::graph::Graph;
use crate::instance::{Instance, WeightCheck};
use crate::rational::Rational;

fn err(line: usize, message: impl Into<String>) -> ParseError {
    ParseError { line, message: message.into() }
}

/// Parses and validates an instance. With `normalize` set, weights are scaled
/// to sum to 1 instead of being rejected.
pub fn parse_instance(text: &str, normalize: bool) -> Result<Instance, ParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    match lines.next() {
        Some((_, "tron v1")) => {}
        Some((no, other)) => return Err(err(no, format!("expected header `tron v1`, found `{other}`"))),
        None => return Err(err(0, "empty input")),
    }
    let n = match lines.next() {
        Some((no, l)) => {
            let mut parts = l.split_whitespace();
            match (parts.next(), parts.next(), parts.next()) {
                (Some("n"), Some(v), None) => v
                    .parse::<usize>()
                    .ok()
                    .filter(|&n| n > 0)
                    .ok_or_else(|| err(no, format!("bad vertex count `{v}`")))?,
                _ => return Err(err(no, format!("expected `n <N>`, found `{l}`"))),
            }
        }
        None => return Err(err(0, "missing `n <N>` line")),
    };

    let mut weights: Vec<Option<Rational>> = vec![None; n];
    let mut edges = Vec::new();
    let mut last_line = 0;
    let mut sum_line = 0;
    for (no, l) in lines {
        last_line = no;
        let parts: Vec<&str> = l.split_whitespace().collect();
        match parts.as_slice() {
            ["w", idx, value] => {
                if !edges.is_empty() {
                    return Err(err(no, "weight line after edge lines"));
                }
                let idx: usize = idx.parse().map_err(|_| err(no, format!("bad vertex index `{idx}`")))?;
                if idx >= n {
                    return Err(err(no, format!("vertex {idx} out of range (n = {n})")));
                }
                let value: Rational = value.parse().map_err(|e| err(no, format!("{e}")))?;
                if value.is_negative() {
                    return Err(err(no, format!("negative weight {value} at vertex {idx}")));
                }
                if weights[idx].replace(value).is_some() {
                    return Err(err(no, format!("duplicate weight for vertex {idx}")));
                }
                sum_line = no;
            }
            ["e", u, v] => {
                let u: usize = u.parse().map_err(|_| err(no, format!("bad vertex index `{u}`")))?;
                let v: usize = v.parse().map_err(|_| err(no, format!("bad vertex index `{v}`")))?;
                edges.push((no, u, v));
            }
            _ => return Err(err(no, format!("unrecognized line `{l}`"))),
        }
    }

    let weights = weights
        .into_iter()
        .enumerate()
        .map(|(i, w)| w.ok_or_else(|| err(0, format!("missing weight for vertex {i}"))))
        .collect::<Result<Vec<_>, _>>()?;

    // Validate edges one at a time so the offending line is reported.
    let mut seen = std::collections::BTreeSet::new();
    for &(no, u, v) in &edges {
        if u >= n || v >= n {
            return Err(err(no, format!("edge ({u},{v}) has a vertex out of range (n = {n})")));
        }
        if u == v {
            return Err(err(no, format!("self-loop at vertex {u}")));
        }
        if !seen.insert((u.min(v), u.max(v))) {
            return Err(err(no, format!("duplicate edge ({u},{v})")));
        }
    }
    let graph = Graph::new(n, edges.iter().map(|&(_, u, v)| (u, v))).map_err(|e| err(last_line, e.to_string()))?;
    let check = if normalize { WeightCheck::Normalize } else { WeightCheck::Strict };
    Instance::new(graph, weights, check).map_err(|e| {
        let line = match e {
            InstanceError::BadSum(_) | InstanceError::ZeroSum => sum_line,
            _ => last_line,
        };
        err(line, e.to_string())
    })
}

/// Canonical text: lowest-term weights in index order, edges sorted by
/// `(min, max)`.
pub fn serialize_instance(inst: &Instance) -> String {
    let mut out = String::new();
    writeln!(out, "tron v1").unwrap();
    writeln!(out, "n {}", inst.vertex_count()).unwrap();
    for (i, w) in inst.weights().iter().enumerate() {
        writeln!(out, "w {i} {w}").unwrap();
    }
    for &(u, v) in inst.graph().edges() {
        writeln!(out, "e {u} {v}").unwrap();
    }
    out
}

/// First 16 hex digits of the SHA-256 of the canonical text.
pub fn instance_digest(inst: &Instance) -> String {
    use sha2::{Digest, Sha256};
    let hash = Sha256::digest(serialize_instance(inst).as_bytes());
    hash.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn two_vertex_file() {
        let inst = parse_instance("tron v1\nn 2\nw 0 1/2\nw 1 1/2\ne 0 1\n", false).unwrap();
        assert_eq!(inst.total_weight(), q(1, 1));
        assert_eq!(inst.graph().edges(), &[(0, 1)]);
    }

    #[test]
    fn bad_sum_reports_line() {
        let e = parse_instance("tron v1\nn 2\nw 0 1/2\nw 1 1/3\ne 0 1\n", false).unwrap_err();
        assert_eq!(e.line, 4);
        assert!(e.message.contains("weights sum to 5/6 ≠ 1"), "{e}");
    }

    #[test]
    fn normalize_flag() {
        let inst = parse_instance("tron v1\nn 2\nw 0 1\nw 1 1\ne 0 1\n", true).unwrap();
        assert_eq!(inst.weights(), &[q(1, 2), q(1, 2)]);
    }

    #[test]
    fn comments_and_errors() {
        let ok = "# a comment\ntron v1 # header\n\nn 1\nw 0 1/1\n";
        assert!(parse_instance(ok, false).is_ok());
        let neg = parse_instance("tron v1\nn 2\nw 0 -1/2\nw 1 3/2\ne 0 1\n", false).unwrap_err();
        assert_eq!(neg.line, 3);
        let disc = parse_instance("tron v1\nn 3\nw 0 1/3\nw 1 1/3\nw 2 1/3\ne 0 1\n", false).unwrap_err();
        assert!(disc.message.contains("disconnected"), "{disc}");
        let junk = parse_instance("tron v1\nn 2\nx 0 1\n", false).unwrap_err();
        assert_eq!(junk.line, 3);
        let hdr = parse_instance("tron v2\n", false).unwrap_err();
        assert_eq!(hdr.line, 1);
        let dup = parse_instance("tron v1\nn 2\nw 0 1/2\nw 1 1/2\ne 0 1\ne 1 0\n", false).unwrap_err();
        assert_eq!(dup.line, 6);
    }

    #[test]
    fn canonical_text_is_fixed_point() {
        let text = "tron v1\nn 3\nw 0 1/2\nw 1 1/4\nw 2 1/4\ne 0 1\ne 0 2\n";
        let inst = parse_instance(text, false).unwrap();
        assert_eq!(serialize_instance(&inst), text);
        let messy = "tron v1\nn 3\nw 0 2/4\nw 1 1/4\nw 2 1/4\ne 2 0\ne 1 0\n";
        assert_eq!(serialize_instance(&parse_instance(messy, false).unwrap()), text);
    }
}
