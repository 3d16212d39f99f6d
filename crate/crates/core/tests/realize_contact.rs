use annulus::catalog::Base;
use annulus::format::AnySystem;
use annulus::geometry::End;
use annulus::geometry::{Pt, SymmetryGroup};
use annulus::isomorphic;
use annulus::realize_contact::{extract_components, realize_map};
use annulus::realize_contact::{
    extract_quotient_graph, realize, realize_base, realize_with_budget, ContactError, ContactSystem,
};
use annulus::reduction::decompose;
use annulus::reduction::generate_with_sequence;
use annulus::scalar::Scalar;
use annulus::sparsity::is_sparse;
use annulus::{QSqrt3, Rational};

fn translation() -> SymmetryGroup<Rational> {
    SymmetryGroup::translation(Pt::from_ratios((1, 1), (0, 1))).unwrap()
}

fn rotation<S: Scalar>(k: u32) -> SymmetryGroup<S> {
    SymmetryGroup::rotation(k, Pt::from_ratios((1, 3), (-1, 2))).unwrap()
}

fn check<S: Scalar>(sys: &ContactSystem<S>, base: Base) {
    let cert = extract_quotient_graph(sys).unwrap();
    assert!(isomorphic(&cert.quotient_graph, &base.map()), "{base:?}");
}

#[test]
fn bases_validate() {
    check(&realize_base(Base::K, &translation()).unwrap(), Base::K);
    check(&realize_base(Base::L, &translation()).unwrap(), Base::L);
    check(&realize_base(Base::L, &rotation::<Rational>(2)).unwrap(), Base::L);
    check(&realize_base(Base::K, &rotation::<Rational>(2)).unwrap(), Base::K);
    for k in [3, 6] {
        check(&realize_base(Base::M, &rotation::<QSqrt3>(k)).unwrap(), Base::M);
        check(&realize_base(Base::K, &rotation::<QSqrt3>(k)).unwrap(), Base::K);
    }
    check(&realize_base(Base::M, &rotation::<Rational>(4)).unwrap(), Base::M);
    check(&realize_base(Base::M, &rotation::<f64>(5)).unwrap(), Base::M);
}

#[test]
fn wrong_group_is_refused() {
    assert!(matches!(realize_base(Base::M, &translation()), Err(ContactError::GroupLevelMismatch(_))));
    assert!(matches!(realize_base(Base::L, &rotation::<Rational>(4)), Err(ContactError::GroupLevelMismatch(_))));
}

fn round_trip<S: Scalar>(l: u8, group: SymmetryGroup<S>, seeds: std::ops::Range<u64>, n: usize) {
    for seed in seeds {
        let (seq, map) = generate_with_sequence(l, n, seed);
        let sys = realize(&seq, group.clone()).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
        let cert = extract_quotient_graph(&sys).unwrap();
        assert!(isomorphic(&cert.quotient_graph, &map), "seed {seed}");
        assert_eq!(cert.free_end_orbit_count as i64, 2 * map.n_vertices() as i64 - map.n_edges() as i64);
    }
}

#[test]
fn translation_round_trip() {
    round_trip(2, translation(), 0..20, 5);
}

#[test]
fn rotation_round_trips() {
    round_trip(1, rotation::<QSqrt3>(3), 0..10, 4);
    round_trip(1, rotation::<Rational>(4), 0..10, 4);
    round_trip(1, rotation::<QSqrt3>(6), 0..10, 4);
}

#[test]
fn zero_budget_exhausts() {
    let (seq, _) = generate_with_sequence(2, 3, 1);
    assert_eq!(realize_with_budget(&seq, translation(), 0).unwrap_err(), ContactError::EpsilonExhausted(0));
}

#[test]
fn json_round_trip() {
    let (seq, _) = generate_with_sequence(1, 4, 3);
    let sys = realize(&seq, rotation::<QSqrt3>(6)).unwrap();
    let text = AnySystem::Sqrt3(sys.clone()).to_json();
    let AnySystem::Sqrt3(back) = AnySystem::from_json(&text).unwrap() else { panic!("number system changed") };
    assert_eq!(back.ids, sys.ids);
    assert_eq!(back.reps, sys.reps);
    assert_eq!(back.provenance, sys.provenance);
    assert!(matches!(AnySystem::from_json(&text.replace("rational-sqrt3", "rational")), Err(_)));
}

#[test]
fn shortening_keeps_sparsity() {
    for seed in 0..6 {
        let (seq, _) = generate_with_sequence(2, 5, seed);
        let sys = realize(&seq, translation()).unwrap();
        let survey = sys.survey().unwrap();
        for c in survey.contacts.iter().take(3) {
            let short = sys.shortened(&survey, c.tail, c.end);
            let after = short.survey().unwrap();
            assert_eq!(after.contacts.len() + 1, survey.contacts.len());
            for comp in extract_components(&short).unwrap() {
                assert!(is_sparse(&comp, 2));
            }
        }
    }
}

#[test]
fn plane_images_are_laman_sparse() {
    let (seq, _) = generate_with_sequence(2, 4, 2);
    let sys = realize(&seq, translation()).unwrap();
    let (n, m, sparse) = sys.plane_baseline(2).unwrap();
    assert!(sparse && m <= 2 * n - 3, "{n} segments, {m} contacts");
    let (seq, _) = generate_with_sequence(1, 4, 2);
    let sys = realize(&seq, rotation::<QSqrt3>(3)).unwrap();
    assert!(sys.plane_baseline(0).unwrap().2);
}

#[test]
fn maps_realize_without_a_sequence() {
    for seed in 0..4 {
        let (_, map) = generate_with_sequence(1, 5, seed);
        let sys = realize_map(&map, 1, rotation::<Rational>(4)).unwrap();
        let cert = extract_quotient_graph(&sys).unwrap();
        assert!(isomorphic(&cert.quotient_graph, &map));
        assert!(isomorphic(&annulus::reduction::rebuild(sys.provenance.as_ref().unwrap()).unwrap(), &map));
    }
    let (_, map) = generate_with_sequence(2, 4, 0);
    assert!(matches!(realize_map(&map, 2, rotation::<QSqrt3>(3)), Err(ContactError::GroupLevelMismatch(_))));
    assert!(decompose(&map, 2).is_ok());
}

#[test]
fn overlapping_segments_are_rejected() {
    let mut sys = realize_base(Base::L, &translation()).unwrap();
    let q = sys.reps[1].q.clone();
    *sys.reps[1].end_mut(End::Q) = sys.reps[1].p.clone();
    assert!(matches!(sys.survey(), Err(ContactError::ValidationFailed(_))));
    *sys.reps[1].end_mut(End::Q) = q;
    sys.reps.push(sys.reps[0].clone());
    sys.ids.push("copy".into());
    assert!(matches!(sys.survey(), Err(ContactError::ValidationFailed(_))));
}
