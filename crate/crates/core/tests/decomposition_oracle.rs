mod common;

use std::collections::BTreeSet;
use std::sync::Arc;

use common::{all_paths, path_weight, BruteForce, XorShift};
use tron_core::decomposition::{crossing_edge, decompose, SideDecomposition};
use tron_core::{Instance, Rational};

fn check_side(inst: &Instance, s: &SideDecomposition, other: &SideDecomposition) {
    let n = inst.vertex_count();
    let allowed: Vec<bool> = (0..n).map(|v| s.vertices.contains(&v)).collect();
    let paths = all_paths(inst, &allowed);

    let best_from_a = paths.iter().filter(|p| p[0] == s.a).map(|p| path_weight(inst, p)).max().unwrap();
    assert_eq!(inst.path_weight(&s.p_path), best_from_a);
    assert_eq!(s.p_path.first(), Some(s.a));
    assert_eq!(s.p_path.last(), Some(s.b));

    let best_anywhere = paths.iter().map(|p| path_weight(inst, p)).max().unwrap();
    assert_eq!(s.q, best_anywhere);
    assert_eq!(inst.path_weight(&s.q_path), s.q);
    assert_eq!(s.q_path.first(), Some(s.b));
    assert_eq!(s.q_path.last(), Some(s.c));

    let mut union = BTreeSet::new();
    for part in [&s.x_set, &s.y_set, &s.z_set, &s.r_set] {
        for &v in part {
            assert!(union.insert(v), "parts overlap at {v}");
        }
    }
    assert_eq!(union, s.vertices);
    assert!(s.y_set.contains(&s.b) && s.y_set.contains(&s.d));
    assert_eq!(&s.y + &s.z, s.q);

    let three_alpha = &s.r + &s.y * 2 + &s.z + &s.x + &other.x - &other.z;
    assert_eq!(&s.alpha * 3, three_alpha);

    let e_expected = !s.alpha.is_negative() && s.alpha < &s.z - &s.x;
    assert_eq!(s.e.is_some(), e_expected);
    if let Some(e) = s.e {
        let qv = s.q_path.vertices();
        let i = qv.iter().position(|&v| v == e).unwrap();
        let to_b = path_weight(inst, &qv[..=i]);
        let to_c = path_weight(inst, &qv[i..]);
        let heavy = &s.q - &s.alpha;
        assert!((to_b >= heavy && to_c >= s.alpha) || (to_b >= s.alpha && to_c >= heavy));
    }
}

#[test]
fn decomposition_invariants_on_random_trees() {
    let mut rng = XorShift(0x5eed_d00d);
    for _ in 0..150 {
        let n = 2 + rng.below(8);
        let inst = Arc::new(rng.random_weighted_tree(n, 6));
        let d = decompose(&inst).unwrap();
        let (al, ar) = d.crossing_edge;
        assert!(al < ar && inst.graph().has_edge(al, ar));
        assert!(d.left.vertices.contains(&al) && d.right.vertices.contains(&ar));
        assert_eq!(d.left.vertices.len() + d.right.vertices.len(), n);
        assert_eq!(d.left.weight() + d.right.weight(), Rational::one());

        let oracle = BruteForce::new(&inst);
        for u in 0..n {
            let (_, replies) = oracle.start(u);
            assert_eq!(d.replies[u], replies.iter().next().copied(), "reply of {u}");
        }
        assert!(d.right.vertices.contains(&d.reply(al)));
        assert!(d.left.vertices.contains(&d.reply(ar)));
        assert_eq!(crossing_edge(&inst, &d.replies).unwrap(), d.crossing_edge);

        check_side(&inst, &d.left, &d.right);
        check_side(&inst, &d.right, &d.left);
        let dual = d.dual();
        assert_eq!(dual.left, d.right);
    }
}
