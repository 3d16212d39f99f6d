mod common;

use annulus::catalog::{isolated_vertex, k_graph, l_graph, m_graph};
use annulus::sparsity::{check_sparse, max_tight_subgraph, oracle_sparse, violates};
use annulus::EdgeSubset;

#[test]
fn base_graphs_are_tight_at_their_levels() {
    for l in [1, 2] {
        assert!(check_sparse(&k_graph(), l).tight);
        assert!(check_sparse(&isolated_vertex(), l).tight);
    }
    assert!(check_sparse(&l_graph(), 2).tight);
    let l1 = check_sparse(&l_graph(), 1);
    assert!(l1.sparse && !l1.tight);
    assert!(check_sparse(&m_graph(), 1).tight);
    let v = check_sparse(&m_graph(), 2);
    assert!(!v.sparse);
    assert_eq!(v.violator, Some(EdgeSubset::from_edges([0])));
}

#[test]
fn figure_verdicts() {
    let a = common::fig_a();
    for l in [1, 2] {
        let v = check_sparse(&a, l);
        assert!(v.sparse && v.tight, "balanced Laman graph at l={l}");
    }
    let b = common::fig_b();
    assert!(check_sparse(&b, 2).tight);
    assert!(check_sparse(&b, 1).sparse && !check_sparse(&b, 1).tight);
    let c = common::fig_c();
    assert!(check_sparse(&c, 1).tight);
    let v = check_sparse(&c, 2);
    assert!(!v.sparse);
    assert!(violates(&c, v.violator.as_ref().unwrap(), 2));
}

#[test]
fn fast_check_matches_oracle_on_figures() {
    for map in [common::fig_a(), common::fig_b(), common::fig_c(), k_graph(), l_graph(), m_graph()] {
        for l in [1, 2] {
            let fast = check_sparse(&map, l);
            let slow = oracle_sparse(&map, l).unwrap();
            assert_eq!((fast.sparse, fast.tight), (slow.sparse, slow.tight));
        }
    }
}

#[test]
fn max_tight_contains_seed_and_is_tight() {
    let b = common::fig_b();
    for seed in 0..b.n_edges() {
        let t = max_tight_subgraph(&b, 2, seed);
        assert!(t.members.contains(&seed));
        assert_eq!(t.members.len(), 6, "fig b is tight, so it is its own maximal tight subgraph");
    }
}

#[test]
fn census_agrees_with_oracle() {
    let census = annulus::catalog::enumerate_maps(4);
    let per_size: Vec<usize> = (0..=4).map(|m| census.iter().filter(|g| g.n_edges() == m).count()).collect();
    assert_eq!(per_size[0], 1);
    assert_eq!(per_size[1], 3, "pendant edge, contractible loop, winding loop");
    for g in &census {
        for l in [1, 2] {
            let fast = check_sparse(g, l);
            let slow = oracle_sparse(g, l).unwrap();
            assert_eq!((fast.sparse, fast.tight), (slow.sparse, slow.tight));
            if let Some(v) = &fast.violator {
                assert!(violates(g, v, l));
            }
        }
    }
}

#[test]
fn canonical_code_matches_isomorphism() {
    let census = annulus::catalog::enumerate_maps(3);
    for (i, a) in census.iter().enumerate() {
        for b in &census[i + 1..] {
            assert!(!annulus::isomorphic(a, b), "census holds isomorphic duplicates");
        }
    }
}

use annulus::AnnulusMap;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_small_map(seed: u64) -> AnnulusMap {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = rng.gen_range(1..=8);
    annulus::catalog::random_map(&mut rng, m)
}

#[test]
fn random_maps_agree_with_oracle() {
    for seed in 0..200 {
        let g = random_small_map(seed);
        for l in [1, 2] {
            let fast = check_sparse(&g, l);
            let slow = oracle_sparse(&g, l).unwrap();
            assert_eq!((fast.sparse, fast.tight), (slow.sparse, slow.tight), "seed {seed} l {l}");
        }
    }
}

fn with_vertices(map: &AnnulusMap, members: impl IntoIterator<Item = usize>, vertices: &[usize]) -> EdgeSubset {
    let mut s = EdgeSubset::from_edges(members);
    let covered = s.vertices(map);
    s.extra_vertices = vertices.iter().copied().filter(|v| !covered.contains(v)).collect();
    s
}

fn subset_tight(map: &AnnulusMap, s: &EdgeSubset, l: u8) -> bool {
    let f = map.f_count(s);
    f == i64::from(l) || (f == 3 && map.is_balanced(s)) || (s.members.is_empty() && s.vertices(map).len() == 1)
}

/// Tight subgraphs spanned by edge sets.
fn tight_subgraphs(map: &AnnulusMap, l: u8) -> Vec<EdgeSubset> {
    let m = map.n_edges();
    (1u32..(1 << m))
        .map(|mask| EdgeSubset::from_edges((0..m).filter(|i| mask >> i & 1 == 1)))
        .filter(|s| subset_tight(map, s, l))
        .collect()
}

fn meet_join(map: &AnnulusMap, h: &EdgeSubset, k: &EdgeSubset) -> (EdgeSubset, EdgeSubset) {
    let (vh, vk) = (h.vertices(map), k.vertices(map));
    let vi: Vec<usize> = vh.intersection(&vk).copied().collect();
    let vu: Vec<usize> = vh.union(&vk).copied().collect();
    let meet = with_vertices(map, h.members.intersection(&k.members).copied(), &vi);
    let join = with_vertices(map, h.members.union(&k.members).copied(), &vu);
    (meet, join)
}

#[test]
fn tight_union_and_intersection_laws() {
    let mut maps: Vec<(AnnulusMap, u8)> = Vec::new();
    for seed in 0..12 {
        let l = 1 + (seed % 2) as u8;
        maps.push((annulus::reduction::generate_random_tight(l, 3 + (seed as usize % 3), seed), l));
    }
    for seed in 0..60 {
        let g = random_small_map(1000 + seed);
        for l in [1, 2] {
            if annulus::sparsity::is_sparse(&g, l) {
                maps.push((g.clone(), l));
            }
        }
    }
    let mut pairs = 0;
    for (g, l) in &maps {
        let tight = tight_subgraphs(g, *l);
        for h in &tight {
            assert!(g.f_count(h) >= i64::from(*l));
            for k in &tight {
                let (meet, join) = meet_join(g, h, k);
                let (hu, ku) = (!g.is_balanced(h), !g.is_balanced(k));
                let nv = meet.vertices(g).len();
                if *l == 2 {
                    if hu && ku && nv > 0 {
                        assert!(subset_tight(g, &meet, 2) && subset_tight(g, &join, 2));
                        assert!(!g.is_balanced(&meet) || (meet.members.is_empty() && nv == 1));
                        pairs += 1;
                    } else if (!hu || !ku) && nv >= 2 {
                        assert!(subset_tight(g, &join, 2));
                        let two_points = meet.members.is_empty() && nv == 2;
                        assert!(subset_tight(g, &meet, 2) || (two_points && !g.is_balanced(&join)));
                        pairs += 1;
                    }
                } else if hu && ku && nv > 0 {
                    assert!(subset_tight(g, &meet, 1) && subset_tight(g, &join, 1));
                    assert!(!g.is_balanced(&meet) && !g.is_balanced(&join));
                    pairs += 1;
                } else if (!hu || !ku) && !meet.members.is_empty() {
                    assert!(subset_tight(g, &join, 1));
                    pairs += 1;
                }
            }
        }
    }
    assert!(pairs > 500, "only {pairs} pairs covered");
}

#[test]
fn tight_subgraphs_are_connected() {
    for seed in 0..20 {
        let l = 1 + (seed % 2) as u8;
        let g = annulus::reduction::generate_random_tight(l, 4, seed);
        for s in tight_subgraphs(&g, l) {
            let sub = EdgeSubset::from_edges(s.members.iter().copied());
            let comps = components(&g, &sub);
            assert_eq!(comps, 1, "tight subgraph {:?} of seed {seed} is disconnected", s.members);
        }
    }
}

fn components(g: &AnnulusMap, s: &EdgeSubset) -> usize {
    let vs: Vec<usize> = s.vertices(g).into_iter().collect();
    let mut parent: Vec<usize> = (0..g.n_vertices()).collect();
    fn find(p: &mut Vec<usize>, x: usize) -> usize {
        if p[x] != x {
            let r = find(p, p[x]);
            p[x] = r;
        }
        p[x]
    }
    for &e in &s.members {
        let (a, b) = (find(&mut parent, g.edges()[e].tail), find(&mut parent, g.edges()[e].head));
        parent[a] = b;
    }
    let roots: std::collections::BTreeSet<usize> = vs.iter().map(|&v| find(&mut parent, v)).collect();
    roots.len()
}

#[test]
fn max_tight_is_inclusion_maximal() {
    for seed in 0..80 {
        let g = random_small_map(5000 + seed);
        for l in [1u8, 2] {
            if !annulus::sparsity::is_sparse(&g, l) {
                continue;
            }
            let all = tight_subgraphs(&g, l);
            for seed_edge in 0..g.n_edges() {
                let t = max_tight_subgraph(&g, l, seed_edge);
                assert!(t.members.contains(&seed_edge) && subset_tight(&g, &t, l));
                assert!(
                    !all.iter().any(|s| s.members.is_superset(&t.members) && s.members.len() > t.members.len()),
                    "seed {seed} l {l}: a larger tight subgraph contains the result"
                );
            }
        }
    }
}

#[test]
fn max_tight_ignores_pendant_path() {
    // K plus a two-edge path hanging off b
    let g = annulus::catalog::from_labels(
        &["a", "b", "c", "d"],
        &[("e0", "a", "b"), ("e1", "b", "c"), ("e2", "c", "d")],
        &[&["e0+"], &["e0-", "e1+"], &["e1-", "e2+"], &["e2-"]],
        [Some("e0+"), Some("e0+")],
    )
    .unwrap();
    // every single edge is tight, and no larger subgraph is
    assert_eq!(max_tight_subgraph(&g, 2, 0), EdgeSubset::from_edges([0]));
    let single = annulus::catalog::k_graph();
    assert_eq!(max_tight_subgraph(&single, 2, 0), EdgeSubset::from_edges([0]));
}

proptest! {
    #[test]
    fn f_is_modular(seed in 0u64..10_000, a in any::<u8>(), b in any::<u8>()) {
        let g = random_small_map(seed);
        let m = g.n_edges();
        let pick = |mask: u8| EdgeSubset::from_edges((0..m).filter(|i| mask >> i & 1 == 1));
        let (h, k) = (pick(a), pick(b));
        let (meet, join) = meet_join(&g, &h, &k);
        prop_assert_eq!(g.f_count(&join) + g.f_count(&meet), g.f_count(&h) + g.f_count(&k));
    }

    #[test]
    fn fast_check_matches_oracle(seed in any::<u64>()) {
        let g = random_small_map(seed);
        for l in [1, 2] {
            let fast = check_sparse(&g, l);
            let slow = oracle_sparse(&g, l).unwrap();
            prop_assert_eq!((fast.sparse, fast.tight), (slow.sparse, slow.tight));
        }
    }
}
