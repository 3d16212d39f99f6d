//! Acceptance suite: one test per criterion, each printing a single
//! `criterion N: PASS|FAIL` line. Lines go straight to the stderr handle so
//! the test harness does not swallow them on success.

use std::collections::BTreeSet;
use std::io::Write;
use std::panic::{self, AssertUnwindSafe};
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use annulus::catalog::{enumerate_maps, random_map, Base};
use annulus::geometry::{Pt, SymmetryGroup};
use annulus::moves::{quad_contract, Pick};
use annulus::realize_contact::{extract_components, extract_quotient_graph, realize_map, ContactSystem};
use annulus::realize_pseudo::{decide_symmetric_rigidity, realize_ppt_map, validate_ppt, FlatSurface, PptRealization};
use annulus::reduction::{
    complete_to_tight, decompose, delete_random_edges, generate_random_tight, rebuild, rebuild_prefixes,
};
use annulus::sparsity::is_sparse;
use annulus::{check_sparse, isomorphic, oracle_sparse, AnnulusMap, QSqrt3, Rational, Scalar};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn criterion(n: u8, limit: Duration, body: impl FnOnce() -> Outcome) {
    let start = Instant::now();
    let outcome = panic::catch_unwind(AssertUnwindSafe(body)).unwrap_or_else(|e| {
        let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
        Err(format!("panic: {}", msg.unwrap_or_default()))
    });
    let took = start.elapsed();
    let outcome = match outcome {
        Ok(_) if took > limit => Err(format!("took {:.1} s, limit {} s", took.as_secs_f64(), limit.as_secs())),
        o => o,
    };
    let line = match &outcome {
        Ok(s) => format!("criterion {n}: PASS  {s} ({:.1} s)", took.as_secs_f64()),
        Err(s) => format!("criterion {n}: FAIL  {s} ({:.1} s)", took.as_secs_f64()),
    };
    let _ = writeln!(std::io::stderr(), "{line}");
    assert!(outcome.is_ok(), "{line}");
}

fn ensure(ok: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what())
    }
}

/// Every connected map with at most 4 edges.
fn census() -> &'static [AnnulusMap] {
    static CELL: OnceLock<Vec<AnnulusMap>> = OnceLock::new();
    CELL.get_or_init(|| enumerate_maps(4))
}

/// 200 seeded random connected maps with 1 to 8 edges.
fn random_maps() -> &'static [AnnulusMap] {
    static CELL: OnceLock<Vec<AnnulusMap>> = OnceLock::new();
    CELL.get_or_init(|| {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        (0..200).map(|i| random_map(&mut rng, 1 + i % 8)).collect()
    })
}

struct Tight {
    l: u8,
    seed: u64,
    map: AnnulusMap,
}

/// 500 generated tight maps per level, 1 to 10 vertices (2 to 10 at level 2).
fn tight_corpus() -> &'static [Tight] {
    static CELL: OnceLock<Vec<Tight>> = OnceLock::new();
    CELL.get_or_init(|| {
        let mut out = Vec::new();
        for l in [1u8, 2] {
            for seed in 0..500u64 {
                let n = if l == 1 { 1 + seed as usize % 10 } else { 2 + seed as usize % 9 };
                out.push(Tight { l, seed, map: generate_random_tight(l, n, seed) });
            }
        }
        out
    })
}

/// 200 sparse maps: corpus tight maps minus one to three edges.
fn thinned_corpus() -> &'static [(u8, AnnulusMap)] {
    static CELL: OnceLock<Vec<(u8, AnnulusMap)>> = OnceLock::new();
    CELL.get_or_init(|| {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        tight_corpus()
            .iter()
            .filter(|t| t.map.n_edges() >= 3)
            .step_by(4)
            .take(200)
            .enumerate()
            .map(|(i, t)| (t.l, delete_random_edges(&t.map, 1 + i % 3, &mut rng)))
            .collect()
    })
}

fn small_tight(l: u8, max_vertices: usize) -> impl Iterator<Item = &'static Tight> {
    tight_corpus().iter().filter(move |t| t.l == l && t.map.n_vertices() <= max_vertices)
}

fn translation() -> SymmetryGroup<Rational> {
    SymmetryGroup::translation(Pt::from_ratios((1, 1), (0, 1))).unwrap()
}

fn rotation<S: Scalar>(k: u32) -> SymmetryGroup<S> {
    SymmetryGroup::rotation(k, Pt::from_ratios((1, 3), (-1, 2))).unwrap()
}

#[test]
fn criterion_1_oracle_equivalence() {
    criterion(1, Duration::from_secs(60), || {
        let mut checked = 0;
        for map in census().iter().chain(random_maps()) {
            for l in [1u8, 2] {
                let fast = check_sparse(map, l);
                let slow = oracle_sparse(map, l).map_err(|e| e.to_string())?;
                ensure(fast.sparse == slow.sparse && fast.tight == slow.tight, || {
                    format!("l={l}: pebble {fast:?} vs oracle {slow:?} on {}", annulus::format::map_to_json(map))
                })?;
                checked += 1;
            }
        }
        Ok(format!(
            "{checked} verdict pairs agree over {} census + {} random maps",
            census().len(),
            random_maps().len()
        ))
    });
}

#[test]
fn criterion_2_base_graphs() {
    criterion(2, Duration::from_secs(300), || {
        let mut triangle_only = 0;
        for t in tight_corpus() {
            let ctx = || format!("l={} seed={}", t.l, t.seed);
            let seq = decompose(&t.map, t.l).map_err(|e| format!("{}: {e}", ctx()))?;
            let want = if t.map.is_map_balanced() {
                Base::K
            } else if t.l == 2 {
                Base::L
            } else {
                Base::M
            };
            ensure(seq.base == want, || format!("{}: base {:?}, expected {want:?}", ctx(), seq.base))?;
            let prefixes = rebuild_prefixes(&seq).map_err(|e| format!("{}: {e}", ctx()))?;
            for (i, p) in prefixes.iter().enumerate() {
                ensure(check_sparse(p, t.l).tight, || format!("{}: prefix {i} is not tight", ctx()))?;
            }
            if want == Base::K {
                ensure(seq.steps.iter().all(|s| s.is_triangle()), || {
                    format!("{}: quad step on a balanced map", ctx())
                })?;
                triangle_only += 1;
            }
            let back = rebuild(&seq).map_err(|e| format!("{}: {e}", ctx()))?;
            ensure(isomorphic(&back, &t.map), || format!("{}: rebuild is not isomorphic", ctx()))?;
        }
        Ok(format!("{} instances, {triangle_only} balanced with triangle steps only", tight_corpus().len()))
    });
}

#[test]
fn criterion_3_euler_and_face_degrees() {
    criterion(3, Duration::from_secs(120), || {
        let mut euler = 0;
        let all = census().iter().chain(random_maps()).chain(tight_corpus().iter().map(|t| &t.map));
        for map in all.filter(|m| m.n_edges() > 0) {
            ensure(map.euler_check(), || format!("Euler identity fails on {}", annulus::format::map_to_json(map)))?;
            euler += 1;
        }
        let (mut balanced, mut triangle_free) = (0, 0);
        for t in tight_corpus().iter().filter(|t| t.map.n_vertices() >= 3) {
            let map = &t.map;
            let cellular: Vec<usize> =
                (0..map.n_faces()).filter(|&f| map.is_cellular(f)).map(|f| map.face_darts(f).len()).collect();
            if map.is_map_balanced() {
                ensure(cellular.contains(&3), || format!("l={} seed={}: balanced without a triangle", t.l, t.seed))?;
                balanced += 1;
            } else if !cellular.contains(&3) {
                ensure(cellular.iter().all(|&d| d == 4), || {
                    format!("l={} seed={}: triangle-free with cellular degrees {cellular:?}", t.l, t.seed)
                })?;
                triangle_free += 1;
            }
        }
        Ok(format!(
            "Euler on {euler} maps; {balanced} balanced maps have a triangle; {triangle_free} triangle-free unbalanced maps are all quads"
        ))
    });
}

/// Whether the diagonal is defined, and if so whether some contraction
/// through it stays sparse.
fn diagonal(map: &AnnulusMap, face: usize, diag: usize, l: u8) -> Option<bool> {
    let picks = [[Pick::Near, Pick::Near], [Pick::Near, Pick::Far], [Pick::Far, Pick::Near], [Pick::Far, Pick::Far]];
    let outs: Vec<AnnulusMap> =
        picks.iter().filter_map(|&p| quad_contract(map, face, diag, p).ok()).map(|c| c.map).collect();
    if outs.is_empty() {
        return None;
    }
    Some(outs.iter().any(|m| is_sparse(m, l)))
}

#[test]
fn criterion_4_diagonal_dichotomy() {
    criterion(4, Duration::from_secs(120), || {
        let maps = tight_corpus().iter().map(|t| (t.l, &t.map)).chain(thinned_corpus().iter().map(|(l, m)| (*l, m)));
        let (mut quads, mut one_sided) = (0, 0);
        for (l, map) in maps {
            for f in 0..map.n_faces() {
                if map.face_darts(f).len() != 4 || !map.is_cellular(f) {
                    continue;
                }
                let (Some(a), Some(b)) = (diagonal(map, f, 0, l), diagonal(map, f, 1, l)) else { continue };
                ensure(a || b, || {
                    format!("l={l}: both diagonals of face {f} break sparsity in {}", annulus::format::map_to_json(map))
                })?;
                quads += 1;
                if a != b {
                    one_sided += 1;
                }
            }
        }
        Ok(format!("{quads} quad faces with both diagonals, {one_sided} with exactly one sparse side"))
    });
}

#[test]
fn criterion_5_completion() {
    criterion(5, Duration::from_secs(120), || {
        for (i, (l, map)) in thinned_corpus().iter().enumerate() {
            ensure(is_sparse(map, *l), || format!("input {i} is not sparse"))?;
            let full = complete_to_tight(map, *l).map_err(|e| format!("input {i}: {e}"))?;
            ensure(check_sparse(&full, *l).tight, || format!("input {i}: completion is not tight"))?;
            ensure(full.vertex_ids() == map.vertex_ids(), || format!("input {i}: vertex set changed"))?;
            for e in map.edges() {
                let k = full.edge_index(&e.id).ok_or_else(|| format!("input {i}: edge {} dropped", e.id))?;
                let g = &full.edges()[k];
                let ends =
                    |m: &AnnulusMap, t: usize, h: usize| (m.vertex_id(t).to_string(), m.vertex_id(h).to_string());
                ensure(ends(&full, g.tail, g.head) == ends(map, e.tail, e.head), || {
                    format!("input {i}: edge {} moved", e.id)
                })?;
            }
        }
        Ok(format!("{} thinned maps completed to tight supergraphs", thinned_corpus().len()))
    });
}

fn contact_case<S: Scalar>(
    map: &AnnulusMap,
    l: u8,
    group: SymmetryGroup<S>,
    rng: &mut ChaCha8Rng,
) -> Result<(), String> {
    let sys: ContactSystem<S> = realize_map(map, l, group).map_err(|e| e.to_string())?;
    let cert = extract_quotient_graph(&sys).map_err(|e| e.to_string())?;
    ensure(isomorphic(&cert.quotient_graph, map), || "extracted map differs".into())?;
    let f = 2 * map.n_vertices() - map.n_edges();
    ensure(cert.free_end_orbit_count == f, || format!("{} free-end orbits, f = {f}", cert.free_end_orbit_count))?;
    let survey = sys.survey().map_err(|e| e.to_string())?;
    if !survey.contacts.is_empty() {
        let c = &survey.contacts[rng.gen_range(0..survey.contacts.len())];
        let short = sys.shortened(&survey, c.tail, c.end);
        for comp in extract_components(&short).map_err(|e| format!("after shortening: {e}"))? {
            ensure(is_sparse(&comp, l), || "shortened system is not sparse".into())?;
        }
    }
    Ok(())
}

#[test]
fn criterion_6_contact_systems() {
    criterion(6, Duration::from_secs(600), || {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut done = 0;
        for t in small_tight(2, 8).take(100) {
            contact_case(&t.map, 2, translation(), &mut rng)
                .map_err(|e| format!("translation seed {}: {e}", t.seed))?;
            done += 1;
        }
        for t in small_tight(1, 8).take(100) {
            let ctx = |k: u32, e: String| format!("rotation {k} seed {}: {e}", t.seed);
            contact_case(&t.map, 1, rotation::<QSqrt3>(3), &mut rng).map_err(|e| ctx(3, e))?;
            contact_case(&t.map, 1, rotation::<Rational>(4), &mut rng).map_err(|e| ctx(4, e))?;
            contact_case(&t.map, 1, rotation::<QSqrt3>(6), &mut rng).map_err(|e| ctx(6, e))?;
            done += 3;
        }
        Ok(format!("{done} realizations validated, extracted and shortened"))
    });
}

/// Recounts the corners of a validated realization.
fn ppt_counts<S: Scalar>(real: &PptRealization<S>, map: &AnnulusMap) -> Result<(), String> {
    let report = validate_ppt(real).map_err(|e| e.to_string())?;
    let q = &report.quotient_graph;
    ensure(isomorphic(q, map), || "extracted map differs".into())?;
    ensure(report.pointed.iter().all(|&p| p), || "a vertex is not pointed".into())?;
    for f in (0..q.n_faces()).filter(|&f| q.is_cellular(f)) {
        ensure(report.face_convex[f] == 3, || {
            format!("cellular face {f} has {} convex corners", report.face_convex[f])
        })?;
    }
    let (n, m, f, c) = (q.n_vertices(), q.n_edges(), q.n_faces(), report.c);
    ensure(c == report.face_convex.iter().sum::<usize>(), || "corner total".into())?;
    // balanced quotients lift to plane pseudotriangulations
    let (want_c, want_m) = match (q.is_map_balanced(), real.surface()) {
        (true, _) => (3 * (f - 1), 2 * n - 3),
        (false, FlatSurface::Cylinder | FlatSurface::Cone(2)) => (3 * (f - 2) + 2, 2 * n - 2),
        (false, FlatSurface::Cone(_)) => (3 * (f - 2) + 1, 2 * n - 1),
    };
    ensure(c == want_c && m == want_m, || format!("c = {c}, m = {m}; expected {want_c}, {want_m}"))
}

#[test]
fn criterion_7_pseudotriangulation_counts() {
    criterion(7, Duration::from_secs(600), || {
        let mut done = 0;
        let mut balanced = 0;
        let mut run = |l: u8, count: usize, f: &dyn Fn(&AnnulusMap) -> Result<(), String>, what: &str| {
            for t in small_tight(l, 8).take(count) {
                f(&t.map).map_err(|e| format!("{what} seed {}: {e}", t.seed))?;
                done += 1;
                balanced += usize::from(t.map.is_map_balanced());
            }
            Ok::<(), String>(())
        };
        run(2, 100, &|m| ppt_counts(&realize_ppt_map(m, 2, translation()).map_err(|e| e.to_string())?, m), "cylinder")?;
        run(
            2,
            100,
            &|m| ppt_counts(&realize_ppt_map(m, 2, rotation::<Rational>(2)).map_err(|e| e.to_string())?, m),
            "cone 2",
        )?;
        run(
            1,
            60,
            &|m| ppt_counts(&realize_ppt_map(m, 1, rotation::<QSqrt3>(3)).map_err(|e| e.to_string())?, m),
            "cone 3",
        )?;
        run(
            1,
            100,
            &|m| ppt_counts(&realize_ppt_map(m, 1, rotation::<Rational>(4)).map_err(|e| e.to_string())?, m),
            "cone 4",
        )?;
        run(
            1,
            60,
            &|m| ppt_counts(&realize_ppt_map(m, 1, rotation::<QSqrt3>(6)).map_err(|e| e.to_string())?, m),
            "cone 6",
        )?;
        Ok(format!("{done} pseudotriangulations counted, {balanced} with balanced quotients"))
    });
}

fn rigidity_case<S: Scalar>(map: &AnnulusMap, group: &SymmetryGroup<S>) -> Result<bool, String> {
    let verdict = decide_symmetric_rigidity(map, group).map_err(|e| e.to_string())?;
    let tight = check_sparse(map, 1).tight;
    ensure(verdict.rigid == tight, || format!("rigid = {}, tight = {tight}", verdict.rigid))?;
    if verdict.rigid {
        let witness = verdict.witness.ok_or("rigid without a witness")?;
        let report = validate_ppt(&witness).map_err(|e| format!("witness: {e}"))?;
        ensure(isomorphic(&report.quotient_graph, map), || "witness has another quotient".into())?;
    }
    Ok(tight)
}

#[test]
fn criterion_8_rigidity() {
    criterion(8, Duration::from_secs(600), || {
        let mut maps: Vec<&AnnulusMap> = small_tight(1, 8).take(40).map(|t| &t.map).collect();
        maps.extend(small_tight(2, 8).take(10).map(|t| &t.map));
        maps.extend(thinned_corpus().iter().filter(|(l, m)| *l == 1 && m.n_vertices() <= 8).take(20).map(|(_, m)| m));
        let mut rigid = BTreeSet::new();
        let mut decided = 0;
        for (i, map) in maps.iter().enumerate() {
            for k in [3u32, 4, 6] {
                let yes = match k {
                    4 => rigidity_case(map, &rotation::<Rational>(4)),
                    _ => rigidity_case(map, &rotation::<QSqrt3>(k)),
                }
                .map_err(|e| format!("map {i}, k = {k}: {e}"))?;
                if yes {
                    rigid.insert(i);
                }
                decided += 1;
            }
        }
        Ok(format!(
            "{decided} decisions on {} maps agree with tightness, {} rigid with witnesses",
            maps.len(),
            rigid.len()
        ))
    });
}
