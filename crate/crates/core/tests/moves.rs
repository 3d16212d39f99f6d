mod common;

use annulus::catalog::{from_labels, k_graph, l_graph, m_graph};
use annulus::moves::{
    classify_face, quad_contract, quad_split, random_quad_split, random_triangle_split, triangle_contract,
    triangle_split, DegenerateFaceClass, FreshIds, MoveError, Pick, TriangleDeletion,
};
use annulus::{isomorphic, AnnulusMap};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn seeds() -> Vec<AnnulusMap> {
    vec![k_graph(), l_graph(), m_graph(), common::fig_a(), common::fig_b(), common::fig_c()]
}

/// Applies one random split and checks that its recorded inverse undoes it.
fn split_and_undo(map: &AnnulusMap, rng: &mut ChaCha8Rng, quads: &mut usize) -> Option<AnnulusMap> {
    let ids = FreshIds::for_map(map);
    if rng.gen_bool(0.5) {
        let spec = random_triangle_split(map, rng, &ids)?;
        let out = triangle_split(map, &spec).unwrap_or_else(|e| panic!("{e} for {spec:?}"));
        let (face, pivot, del) = spec.contraction_in(&out).unwrap();
        assert_eq!(out.face_darts(face).len(), 3, "{spec:?}");
        let back = triangle_contract(&out, face, pivot, del).unwrap_or_else(|e| panic!("{e} for {spec:?}"));
        assert!(isomorphic(&back.map, map), "triangle round trip failed for {spec:?}");
        Some(out)
    } else {
        let spec = random_quad_split(map, rng, &ids)?;
        let out = match quad_split(map, &spec) {
            Ok(m) => m,
            Err(MoveError::BadPartition(_)) => return None,
            Err(e) => panic!("{e} for {spec:?}"),
        };
        let (face, diag, del) = spec.contraction_in(&out).unwrap();
        assert_eq!(out.face_darts(face).len(), 4, "{spec:?}");
        let back = quad_contract(&out, face, diag, del).unwrap_or_else(|e| panic!("{e} for {spec:?}"));
        assert!(isomorphic(&back.map, map), "quad round trip failed for {spec:?}");
        *quads += 1;
        Some(out)
    }
}

/// Every legal contraction of `map` is undone by its recorded split.
fn contract_and_undo(map: &AnnulusMap) -> usize {
    let mut legal = 0;
    for f in 0..map.n_faces() {
        let walk = map.face_darts(f).to_vec();
        if walk.len() == 3 {
            for d in &walk {
                for del in [TriangleDeletion::Next, TriangleDeletion::Prev] {
                    if let Ok(c) = triangle_contract(map, f, d.edge(), del) {
                        let again = triangle_split(&c.map, &c.inverse).unwrap();
                        assert!(isomorphic(&again, map), "{:?}", c.inverse);
                        legal += 1;
                    }
                }
            }
        }
        if walk.len() == 4 {
            for diag in 0..2 {
                for del in
                    [[Pick::Near, Pick::Near], [Pick::Near, Pick::Far], [Pick::Far, Pick::Near], [Pick::Far, Pick::Far]]
                {
                    if let Ok(c) = quad_contract(map, f, diag, del) {
                        let again = quad_split(&c.map, &c.inverse).unwrap_or_else(|e| panic!("{e}: {:?}", c.inverse));
                        assert!(isomorphic(&again, map), "{:?}", c.inverse);
                        legal += 1;
                    }
                }
            }
        }
    }
    legal
}

#[test]
fn random_split_chains_round_trip() {
    let (mut legal, mut quads) = (0, 0);
    for seed in 0..400u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut map = seeds()[(seed % 6) as usize].clone();
        for _ in 0..5 {
            if let Some(next) = split_and_undo(&map, &mut rng, &mut quads) {
                map = next;
                legal += contract_and_undo(&map);
            }
        }
    }
    assert!(legal > 1000, "only {legal} contractions exercised");
    assert!(quads > 200, "only {quads} quad splits exercised");
}

#[test]
fn split_k_then_contract() {
    let k = k_graph();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let spec = random_triangle_split(&k, &mut rng, &FreshIds::for_map(&k)).unwrap();
    let t = triangle_split(&k, &spec).unwrap();
    assert_eq!((t.n_vertices(), t.n_edges()), (3, 3));
    let (f, p, d) = spec.contraction_in(&t).unwrap();
    assert!(isomorphic(&triangle_contract(&t, f, p, d).unwrap().map, &k));
}

#[test]
fn non_contiguous_partition_is_rejected() {
    let a = common::fig_b();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut spec = random_triangle_split(&a, &mut rng, &FreshIds::for_map(&a)).unwrap();
    spec.target_vertex = "v1".into();
    let rot: Vec<_> = a.rotation(0).iter().map(|&d| annulus::moves::DartRef::of(&a, d)).collect();
    spec.moved = vec![rot[0].clone(), rot[2].clone()];
    spec.kept = vec![rot[1].clone()];
    assert!(matches!(triangle_split(&a, &spec), Err(MoveError::BadPartition(_))));
}

#[test]
fn quad_split_restoring_one_edge_twice_is_rejected() {
    let m = m_graph();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut spec = random_quad_split(&m, &mut rng, &FreshIds::for_map(&m)).unwrap();
    spec.restore_b.id = spec.restore_a.id.clone();
    assert!(matches!(quad_split(&m, &spec), Err(MoveError::BadPartition(_))));
}

#[test]
fn contraction_preconditions() {
    let k = k_graph();
    assert!(matches!(triangle_contract(&k, 0, 0, TriangleDeletion::Next), Err(MoveError::NotTriangle(_))));
    // fig c: the degree-3 face is a loop triangle whose loop cannot pivot
    let c = common::fig_c();
    let tri = (0..c.n_faces()).find(|&f| c.face_darts(f).len() == 3).unwrap();
    assert_eq!(classify_face(&c, tri).unwrap(), DegenerateFaceClass::Tri231Loop);
    let lp = c.face_darts(tri).iter().find(|d| c.edges()[d.edge()].is_loop()).unwrap().edge();
    assert_eq!(triangle_contract(&c, tri, lp, TriangleDeletion::Next).unwrap_err(), MoveError::LoopPivot);
    let other = c.face_darts(tri).iter().find(|d| !c.edges()[d.edge()].is_loop()).unwrap().edge();
    let out = triangle_contract(&c, tri, other, TriangleDeletion::Next).unwrap();
    assert!(annulus::sparsity::check_sparse(&out.map, 1).sparse);
    assert!(matches!(classify_face(&k, 0), Err(MoveError::WrongDegree(2))));
}

#[test]
fn figure_a_contracts_to_balanced_triangle() {
    let a = common::fig_a();
    let tri = (0..a.n_faces()).find(|&f| a.face_darts(f).len() == 3 && a.is_cellular(f)).unwrap();
    let e = a.face_darts(tri)[0].edge();
    let out = triangle_contract(&a, tri, e, TriangleDeletion::Next).unwrap().map;
    assert_eq!((out.n_vertices(), out.n_edges()), (3, 3));
    assert_eq!(out.f_count(&out.full_subset()), 3);
}

#[test]
fn quad_catalogue() {
    // v1 e1 v2 e2 v3 e3 v2 e4 v1
    let a = from_labels(
        &["v1", "v2", "v3"],
        &[("e1", "v1", "v2"), ("e2", "v2", "v3"), ("e3", "v3", "v2"), ("e4", "v2", "v1")],
        &[&["e1+", "e4-"], &["e1-", "e2+", "e3-", "e4+"], &["e2-", "e3+"]],
        [Some("e1-"), Some("e1-")],
    )
    .unwrap();
    let classes: Vec<_> = (0..a.n_faces()).filter_map(|f| classify_face(&a, f).ok()).collect();
    assert!(classes.contains(&DegenerateFaceClass::Quad232VertexRepeat), "{classes:?}");

    // loop quad: a e b lb b e a la a
    let b = from_labels(
        &["a", "b"],
        &[("e", "a", "b"), ("la", "a", "a"), ("lb", "b", "b")],
        &[&["e+", "la+", "la-"], &["e-", "lb+", "lb-"]],
        [Some("la-"), Some("lb-")],
    )
    .unwrap();
    let quad = (0..b.n_faces()).find(|&f| b.face_darts(f).len() == 4).expect("quad face");
    assert_eq!(classify_face(&b, quad).unwrap(), DegenerateFaceClass::Quad231LoopA);
    let diag = (0..2).find(|&k| quad_contract(&b, quad, k, [Pick::Far, Pick::Far]).is_ok()).unwrap();
    let out = quad_contract(&b, quad, diag, [Pick::Far, Pick::Far]).unwrap().map;
    assert!(isomorphic(&out, &m_graph()) || out.n_vertices() == 1);
    let degenerate = 1 - diag;
    assert!(quad_contract(&b, quad, degenerate, [Pick::Near, Pick::Far]).is_err());
}
