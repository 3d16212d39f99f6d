mod common;

use annulus::annulus_map::{isomorphic, EdgeSubset};
use annulus::catalog::{from_labels, isolated_vertex, k_graph, l_graph, m_graph};
use annulus::format::{map_from_json, map_to_json};
use annulus::MapError;
use common::{fig_a, fig_b, fig_c};

fn degrees(m: &annulus::AnnulusMap) -> Vec<usize> {
    let mut d: Vec<usize> = m.faces().iter().map(|f| f.degree()).collect();
    d.sort();
    d
}

#[test]
fn base_graphs_have_expected_faces_and_counts() {
    let k = k_graph();
    assert_eq!(degrees(&k), vec![2]);
    assert!(k.is_map_balanced());
    assert_eq!(k.f_count(&k.full_subset()), 3);

    let l = l_graph();
    assert_eq!(degrees(&l), vec![2, 2]);
    assert!(!l.is_balanced(&l.full_subset()));
    assert_eq!(l.f_count(&l.full_subset()), 2);

    let m = m_graph();
    assert_eq!(degrees(&m), vec![1, 1]);
    assert!(!m.is_balanced(&m.full_subset()));
    assert_eq!(m.f_count(&m.full_subset()), 1);

    let p = isolated_vertex();
    assert_eq!(p.f_count(&p.full_subset()), 2);
}

#[test]
fn figure_examples_trace_as_drawn() {
    let a = fig_a();
    assert_eq!(degrees(&a), vec![3, 3, 4]);
    let [e0, e1] = a.end_faces();
    assert_eq!(e0, e1);
    assert_eq!(a.face_darts(e0).len(), 4);
    assert!(a.is_balanced(&a.full_subset()));

    let b = fig_b();
    assert_eq!(degrees(&b), vec![2, 2, 4, 4]);
    assert!(!b.is_balanced(&b.full_subset()));
    assert_eq!(b.f_count(&b.full_subset()), 2);

    let c = fig_c();
    assert_eq!(degrees(&c), vec![1, 2, 3, 4]);
    assert!(!c.is_balanced(&c.full_subset()));
    assert_eq!(c.f_count(&c.full_subset()), 1);
}

#[test]
fn euler_identity_on_small_maps() {
    for m in [k_graph(), l_graph(), m_graph(), fig_a(), fig_b(), fig_c()] {
        assert!(m.euler_check(), "{}", map_to_json(&m));
    }
}

#[test]
fn forest_subsets_are_balanced() {
    let b = fig_b();
    // e0, e2, e3 form a spanning tree
    assert!(b.is_balanced(&EdgeSubset::from_edges([0, 2, 3])));
    assert!(b.face_balanced(&EdgeSubset::from_edges([0, 2, 3])));
}

#[test]
fn gain_and_face_tests_agree_on_all_subsets() {
    for m in [l_graph(), m_graph(), fig_a(), fig_b(), fig_c()] {
        let n = m.n_edges();
        for mask in 0u32..(1 << n) {
            let s = EdgeSubset::from_edges((0..n).filter(|i| mask >> i & 1 == 1));
            assert_eq!(m.is_balanced(&s), m.face_balanced(&s), "mask {mask:b}");
        }
    }
}

#[test]
fn isomorphism_examples() {
    let l = l_graph();
    let l_swapped = from_labels(
        &["b", "a"],
        &[("e0", "a", "b"), ("e1", "a", "b")],
        &[&["e0-", "e1-"], &["e0+", "e1+"]],
        [Some("e0+"), Some("e1+")],
    )
    .unwrap();
    assert!(isomorphic(&l, &l_swapped));
    assert!(!isomorphic(&k_graph(), &l));
    // swapping the ends negates the gain
    let m_rev = from_labels(&["a"], &[("e0", "a", "a")], &[&["e0+", "e0-"]], [Some("e0-"), Some("e0+")]).unwrap();
    assert_eq!(m_rev.walk_gain(&[annulus::Dart::new(0, true)]), -m_graph().walk_gain(&[annulus::Dart::new(0, true)]));
    assert!(isomorphic(&m_graph(), &m_rev));
    assert!(!isomorphic(&fig_b(), &fig_a()));
    assert!(isomorphic(&fig_c(), &fig_c()));
}

#[test]
fn isomorphism_respects_end_placement() {
    // L with both ends pushed into the same face is K-like balanced, not L
    let l_bal = from_labels(
        &["a", "b"],
        &[("e0", "a", "b"), ("e1", "a", "b")],
        &[&["e0+", "e1+"], &["e0-", "e1-"]],
        [Some("e0+"), Some("e0+")],
    )
    .unwrap();
    assert!(l_bal.is_map_balanced());
    assert!(!isomorphic(&l_bal, &l_graph()));
}

#[test]
fn build_rejects_bad_input() {
    let disconnected = from_labels(&["a", "b"], &[], &[&[], &[]], [None, None]);
    assert_eq!(disconnected.unwrap_err(), MapError::NotConnected);
    // two loops at one vertex interleaved give a torus
    let torus = from_labels(
        &["a"],
        &[("x", "a", "a"), ("y", "a", "a")],
        &[&["x+", "y+", "x-", "y-"]],
        [Some("x+"), Some("x+")],
    );
    assert!(matches!(torus, Err(MapError::NotGenusZero(_))));
    let missing = from_labels(&["a", "b"], &[("e0", "a", "b")], &[&["e0+"], &[]], [Some("e0+"), Some("e0+")]);
    assert!(matches!(missing, Err(MapError::BadRotation(_))));
}

#[test]
fn json_round_trip_and_unknown_fields() {
    for m in [k_graph(), l_graph(), m_graph(), fig_b(), fig_c(), isolated_vertex()] {
        let s = map_to_json(&m);
        let back = map_from_json(&s).unwrap();
        assert_eq!(map_to_json(&back), s);
        assert!(isomorphic(&m, &back));
    }
    let mut v: serde_json::Value = serde_json::from_str(&map_to_json(&l_graph())).unwrap();
    v["colour"] = serde_json::json!("red");
    assert!(map_from_json(&v.to_string()).is_err());
    let typographic = map_to_json(&l_graph()).replace("e0-", "e0\u{2212}");
    assert!(isomorphic(&map_from_json(&typographic).unwrap(), &l_graph()));
}

#[test]
fn bad_end_corner_is_rejected() {
    let s = map_to_json(&l_graph()).replacen("\"out\": \"e0+\"", "\"out\": \"e1+\"", 1);
    match map_from_json(&s) {
        Err(annulus::format::FormatError::Map(MapError::UnknownEndFace(_))) => {}
        other => panic!("expected UnknownEndFace, got {other:?}"),
    }
}
