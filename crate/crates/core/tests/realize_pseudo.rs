use annulus::catalog::Base;
use annulus::geometry::{Pt, SymmetryGroup};
use annulus::isomorphic;
use annulus::realize_pseudo::{
    decide_symmetric_rigidity, realize_ppt, realize_ppt_base, realize_ppt_map, realize_ppt_with_budget, validate_ppt,
    PptEdge, PptError,
};
use annulus::reduction::{delete_random_edges, generate_with_sequence};
use annulus::scalar::Scalar;
use annulus::{QSqrt3, Rational};
use rand::SeedableRng;

fn translation() -> SymmetryGroup<Rational> {
    SymmetryGroup::translation(Pt::from_ratios((1, 1), (0, 1))).unwrap()
}

fn rotation<S: Scalar>(k: u32) -> SymmetryGroup<S> {
    SymmetryGroup::rotation(k, Pt::from_ratios((1, 3), (-1, 2))).unwrap()
}

#[test]
fn bases_validate() {
    let cases: Vec<(Base, Result<_, PptError>)> = vec![
        (Base::K, realize_ppt_base(Base::K, &translation()).map(|r| validate_ppt(&r))),
        (Base::L, realize_ppt_base(Base::L, &translation()).map(|r| validate_ppt(&r))),
        (Base::L, realize_ppt_base(Base::L, &rotation::<Rational>(2)).map(|r| validate_ppt(&r))),
        (Base::M, realize_ppt_base(Base::M, &rotation::<Rational>(4)).map(|r| validate_ppt(&r))),
    ];
    for (base, got) in cases {
        let report = got.unwrap().unwrap();
        assert!(isomorphic(&report.quotient_graph, &base.map()), "{base:?}");
    }
    let report = validate_ppt(&realize_ppt_base(Base::M, &rotation::<QSqrt3>(3)).unwrap()).unwrap();
    assert_eq!(report.c, 1);
    assert!(report.pointed.iter().all(|&p| p));
}

#[test]
fn wrong_surface_is_refused() {
    assert!(matches!(realize_ppt_base(Base::M, &translation()), Err(PptError::SurfaceLevelMismatch(_))));
    assert!(matches!(realize_ppt_base(Base::L, &rotation::<QSqrt3>(3)), Err(PptError::SurfaceLevelMismatch(_))));
}

fn round_trip<S: Scalar>(l: u8, group: SymmetryGroup<S>, seeds: std::ops::Range<u64>, n: usize) {
    for seed in seeds {
        let (seq, map) = generate_with_sequence(l, n, seed);
        let real = realize_ppt(&seq, group.clone()).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
        let report = validate_ppt(&real).unwrap();
        assert!(isomorphic(&report.quotient_graph, &map), "seed {seed}");
        assert_eq!(report.c, 2 * report.m - report.n);
    }
}

#[test]
fn cylinder_round_trip() {
    round_trip(2, translation(), 0..12, 5);
}

#[test]
fn cone_round_trips() {
    round_trip(2, rotation::<Rational>(2), 0..8, 5);
    round_trip(1, rotation::<QSqrt3>(3), 0..8, 5);
    round_trip(1, rotation::<Rational>(4), 0..8, 5);
    round_trip(1, rotation::<QSqrt3>(6), 0..8, 5);
}

#[test]
fn zero_budget_exhausts() {
    let (seq, _) = generate_with_sequence(2, 3, 1);
    assert_eq!(realize_ppt_with_budget(&seq, translation(), 0).unwrap_err(), PptError::EpsilonExhausted(0));
}

#[test]
fn broken_realizations_are_rejected() {
    let mut real = realize_ppt_base(Base::K, &translation()).unwrap();
    real.ids.extend(["c".to_string(), "d".to_string()]);
    real.pos.extend([Pt::from_ratios((0, 1), (1, 4)), Pt::from_ratios((1, 4), (0, 1))]);
    real.edges.push(PptEdge { id: "x".into(), tail: 2, head: 3, g: 0 });
    assert!(matches!(validate_ppt(&real), Err(PptError::CrossingEdges(_))));
    let mut real = realize_ppt_base(Base::L, &rotation::<Rational>(2)).unwrap();
    // route an edge through the centre
    real.pos[1] = Pt::from_ratios((-1, 6), (-1, 2));
    assert!(matches!(validate_ppt(&real), Err(PptError::Malformed(_))));
}

#[test]
fn rigidity_verdicts() {
    let group = rotation::<QSqrt3>(3);
    let (_, map) = generate_with_sequence(1, 4, 5);
    let verdict = decide_symmetric_rigidity(&map, &group).unwrap();
    assert!(verdict.rigid);
    let witness = verdict.witness.unwrap();
    assert!(isomorphic(&validate_ppt(&witness).unwrap().quotient_graph, &map));

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    let thin = delete_random_edges(&map, 1, &mut rng);
    let verdict = decide_symmetric_rigidity(&thin, &group).unwrap();
    assert!(!verdict.rigid && verdict.deficiency == 1);

    assert!(matches!(decide_symmetric_rigidity(&map, &rotation::<Rational>(2)), Err(PptError::UnsupportedGroup(_))));
}

#[test]
fn maps_realize_without_a_sequence() {
    for seed in 0..4 {
        let (_, map) = generate_with_sequence(2, 5, seed);
        let real = realize_ppt_map(&map, 2, translation()).unwrap();
        assert!(isomorphic(&validate_ppt(&real).unwrap().quotient_graph, &map));
    }
}
