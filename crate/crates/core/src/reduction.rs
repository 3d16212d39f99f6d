//! Inductive decomposition of tight maps to the base graphs, replay of
//! construction sequences, random tight maps and tight completion.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annulus_map::{find_isomorphism, AnnulusMap, Dart};
use crate::catalog::Base;
use crate::moves::{
    add_diagonal, corner_count, quad_contract, random_quad_split, random_triangle_split, triangle_contract, DartRef,
    FreshIds, MoveError, Pick, Split, TriangleDeletion,
};
use crate::sparsity::{is_sparse, is_tight};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReductionError {
    #[error("no contraction keeps the map tight")]
    NoMoveFound,
    #[error("map is not (2,3,{0})-tight")]
    NotTight(u8),
    #[error("step {index} is illegal: {reason}")]
    IllegalStep { index: usize, reason: String },
    #[error("greedy completion stopped at a non-tight map")]
    CompletionStuck,
}

/// A base graph and the splits that rebuild a tight map from it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstructionSequence {
    pub base: Base,
    pub level: u8,
    pub steps: Vec<Split>,
}

/// Base graphs that are tight at level `l`.
pub fn bases_for(l: u8) -> &'static [Base] {
    if l == 1 {
        &[Base::K, Base::M]
    } else {
        &[Base::K, Base::L]
    }
}

fn matching_base(map: &AnnulusMap, l: u8) -> Option<Base> {
    if map.n_vertices() > 2 {
        return None;
    }
    bases_for(l).iter().copied().find(|b| find_isomorphism(&b.map(), map, false).is_some())
}

const DELETIONS: [[Pick; 2]; 4] =
    [[Pick::Near, Pick::Near], [Pick::Near, Pick::Far], [Pick::Far, Pick::Near], [Pick::Far, Pick::Far]];

/// Every contraction of `map`, triangles first, in face and walk order.
pub fn contraction_candidates(map: &AnnulusMap) -> impl Iterator<Item = (AnnulusMap, Split)> + '_ {
    let tris =
        (0..map.n_faces()).filter(move |&f| map.face_darts(f).len() == 3 && map.is_cellular(f)).flat_map(move |f| {
            (0..3).flat_map(move |k| {
                [TriangleDeletion::Next, TriangleDeletion::Prev].into_iter().filter_map(move |del| {
                    let c = triangle_contract(map, f, map.face_darts(f)[k].edge(), del).ok()?;
                    Some((c.map, Split::Triangle(c.inverse)))
                })
            })
        });
    let quads =
        (0..map.n_faces()).filter(move |&f| map.face_darts(f).len() == 4 && map.is_cellular(f)).flat_map(move |f| {
            (0..2).flat_map(move |diag| {
                DELETIONS.into_iter().filter_map(move |del| {
                    let c = quad_contract(map, f, diag, del).ok()?;
                    Some((c.map, Split::Quad(c.inverse)))
                })
            })
        });
    tris.chain(quads)
}

/// One contraction that keeps the map tight, with the split undoing it.
pub fn reduce_step(map: &AnnulusMap, l: u8) -> Result<(AnnulusMap, Split), ReductionError> {
    contraction_candidates(map).find(|(m, _)| is_tight(m, l)).ok_or(ReductionError::NoMoveFound)
}

/// Contracts down to a base graph and records the inverse splits.
pub fn decompose(map: &AnnulusMap, l: u8) -> Result<ConstructionSequence, ReductionError> {
    if map.n_edges() == 0 || !is_tight(map, l) {
        return Err(ReductionError::NotTight(l));
    }
    let mut cur = map.clone();
    let mut steps = Vec::new();
    let base = loop {
        if let Some(b) = matching_base(&cur, l) {
            break b;
        }
        let (next, split) = reduce_step(&cur, l)?;
        steps.push(split);
        cur = next;
    };
    steps.reverse();
    let steps = rename_to_base(&cur, base, steps);
    Ok(ConstructionSequence { base, level: l, steps })
}

/// Decomposes `map` and replays the splits through `step`, starting from
/// `base(b, reduced)`. Contractions are tried in [`decompose`] order; a
/// failed base or step sends the search to the next contraction, up to
/// `attempts` failures in total.
///
/// The returned value carries the ids of `map`; the sequence is renamed to
/// replay from [`Base::map`].
pub fn replay_with_backtracking<T, E: From<ReductionError>>(
    map: &AnnulusMap,
    l: u8,
    attempts: usize,
    base: &mut dyn FnMut(Base, &AnnulusMap) -> Result<T, E>,
    step: &mut dyn FnMut(&T, &Split) -> Result<T, E>,
) -> Result<(T, ConstructionSequence), E> {
    if map.n_edges() == 0 || !is_tight(map, l) {
        return Err(ReductionError::NotTight(l).into());
    }
    let mut search = Search { l, failures: 0, attempts, base, step };
    let (value, reduced, b, steps) = search.run(map)?;
    let steps = rename_to_base(&reduced, b, steps);
    Ok((value, ConstructionSequence { base: b, level: l, steps }))
}

struct Search<'a, T, E> {
    l: u8,
    failures: usize,
    attempts: usize,
    base: &'a mut dyn FnMut(Base, &AnnulusMap) -> Result<T, E>,
    step: &'a mut dyn FnMut(&T, &Split) -> Result<T, E>,
}

impl<T, E: From<ReductionError>> Search<'_, T, E> {
    /// Value, reduced base map, base, and splits from the base upwards.
    fn run(&mut self, cur: &AnnulusMap) -> Result<(T, AnnulusMap, Base, Vec<Split>), E> {
        if let Some(b) = matching_base(cur, self.l) {
            return match (self.base)(b, cur) {
                Ok(v) => Ok((v, cur.clone(), b, Vec::new())),
                Err(e) => {
                    self.failures += 1;
                    Err(e)
                }
            };
        }
        let mut last: E = ReductionError::NoMoveFound.into();
        let l = self.l;
        for (next, split) in contraction_candidates(cur).filter(|(m, _)| is_tight(m, l)) {
            if self.failures >= self.attempts {
                break;
            }
            let (v, reduced, b, mut steps) = match self.run(&next) {
                Ok(x) => x,
                Err(e) => {
                    last = e;
                    continue;
                }
            };
            match (self.step)(&v, &split) {
                Ok(w) => {
                    steps.push(split);
                    return Ok((w, reduced, b, steps));
                }
                Err(e) => {
                    self.failures += 1;
                    last = e;
                }
            }
        }
        Err(last)
    }
}

/// Rewrites the ids of `reduced` to those of the catalogue base so that the
/// steps replay from [`Base::map`]; other ids clashing with them get primes.
fn rename_to_base(reduced: &AnnulusMap, base: Base, steps: Vec<Split>) -> Vec<Split> {
    let bmap = base.map();
    let (m, _) = find_isomorphism(&bmap, reduced, false).expect("base matched");
    let mut vertex: BTreeMap<String, String> = BTreeMap::new();
    let mut edge: BTreeMap<String, (String, bool)> = BTreeMap::new();
    for d in bmap.darts() {
        let img = m[d.index()];
        vertex.insert(reduced.vertex_id(reduced.origin(img)).into(), bmap.vertex_id(bmap.origin(d)).into());
        if d.is_plus() {
            edge.insert(reduced.edges()[img.edge()].id.clone(), (bmap.edges()[d.edge()].id.clone(), !img.is_plus()));
        }
    }
    for v in 0..reduced.n_vertices() {
        // an edgeless base has a single vertex
        vertex.entry(reduced.vertex_id(v).into()).or_insert_with(|| bmap.vertex_id(0).into());
    }
    let mut used: BTreeSet<String> = BTreeSet::new();
    for s in &steps {
        for_each_id(s, &mut |id| {
            used.insert(id.to_string());
        });
    }
    let reserved: BTreeSet<String> =
        bmap.vertex_ids().iter().cloned().chain(bmap.edges().iter().map(|e| e.id.clone())).collect();
    let prime = |id: &str| {
        let mut s = format!("{id}'");
        while used.contains(&s) || reserved.contains(&s) {
            s.push('\'');
        }
        s
    };
    let rv = |id: &str| match vertex.get(id) {
        Some(v) => v.clone(),
        None if reserved.contains(id) => prime(id),
        None => id.to_string(),
    };
    let re = |id: &str| match edge.get(id) {
        Some((e, _)) => e.clone(),
        None if reserved.contains(id) => prime(id),
        None => id.to_string(),
    };
    let rd = |d: &DartRef| match edge.get(&d.edge) {
        Some((e, flip)) => DartRef { edge: e.clone(), plus: d.plus != *flip },
        None => DartRef { edge: re(&d.edge), plus: d.plus },
    };
    steps.into_iter().map(|s| rename_split(s, &rv, &re, &rd)).collect()
}

fn for_each_id(s: &Split, f: &mut dyn FnMut(&str)) {
    match s {
        Split::Triangle(t) => {
            f(&t.target_vertex);
            f(&t.new_vertex);
            f(&t.pivot_edge.id);
            f(&t.restore.id);
            for d in t.moved.iter().chain(&t.kept) {
                f(&d.edge);
            }
        }
        Split::Quad(q) => {
            f(&q.target_vertex);
            f(&q.new_vertex);
            f(&q.restore_a.id);
            f(&q.restore_b.id);
            for d in q.moved.iter().chain(&q.kept) {
                f(&d.edge);
            }
        }
    }
}

fn rename_split(
    s: Split,
    rv: &dyn Fn(&str) -> String,
    re: &dyn Fn(&str) -> String,
    rd: &dyn Fn(&DartRef) -> DartRef,
) -> Split {
    match s {
        Split::Triangle(mut t) => {
            t.target_vertex = rv(&t.target_vertex);
            t.new_vertex = rv(&t.new_vertex);
            t.pivot_edge.id = re(&t.pivot_edge.id);
            t.restore.id = re(&t.restore.id);
            t.moved = t.moved.iter().map(rd).collect();
            t.kept = t.kept.iter().map(rd).collect();
            Split::Triangle(t)
        }
        Split::Quad(mut q) => {
            q.target_vertex = rv(&q.target_vertex);
            q.new_vertex = rv(&q.new_vertex);
            q.restore_a.id = re(&q.restore_a.id);
            q.restore_b.id = re(&q.restore_b.id);
            q.moved = q.moved.iter().map(rd).collect();
            q.kept = q.kept.iter().map(rd).collect();
            Split::Quad(q)
        }
    }
}

/// Replays a sequence, checking tightness after every step.
pub fn rebuild(seq: &ConstructionSequence) -> Result<AnnulusMap, ReductionError> {
    rebuild_prefixes(seq).map(|mut v| v.pop().expect("base present"))
}

/// The base followed by the map after each step.
pub fn rebuild_prefixes(seq: &ConstructionSequence) -> Result<Vec<AnnulusMap>, ReductionError> {
    let illegal = |index: usize, reason: String| ReductionError::IllegalStep { index, reason };
    if !bases_for(seq.level).contains(&seq.base) {
        return Err(illegal(0, format!("base {:?} is not tight at level {}", seq.base, seq.level)));
    }
    let mut out = vec![seq.base.map()];
    for (i, step) in seq.steps.iter().enumerate() {
        let next = step.apply(out.last().unwrap()).map_err(|e| illegal(i, e.to_string()))?;
        if !is_tight(&next, seq.level) {
            return Err(illegal(i, "result is not tight".into()));
        }
        out.push(next);
    }
    Ok(out)
}

/// Attempts per split before the generator gives up.
const SPLIT_ATTEMPTS: usize = 20_000;

/// A tight map on `n` vertices grown from a random base by random splits
/// that keep it tight. Deterministic in `seed`.
pub fn generate_random_tight(l: u8, n: usize, seed: u64) -> AnnulusMap {
    generate_with_sequence(l, n, seed).1
}

/// Like [`generate_random_tight`], also returning the splits applied.
pub fn generate_with_sequence(l: u8, n: usize, seed: u64) -> (ConstructionSequence, AnnulusMap) {
    assert!(l == 1 || l == 2, "level must be 1 or 2");
    assert!(n >= if l == 1 { 1 } else { 2 }, "no base graph has {n} vertices at level {l}");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = match (l, n) {
        (1, 1) => Base::M,
        _ => bases_for(l)[rng.gen_range(0..2)],
    };
    let mut cur = base.map();
    let mut steps = Vec::new();
    while cur.n_vertices() < n {
        let ids = FreshIds::for_map(&cur);
        let mut found = None;
        for _ in 0..SPLIT_ATTEMPTS {
            let spec = if rng.gen_bool(0.3) {
                random_quad_split(&cur, &mut rng, &ids).map(Split::Quad)
            } else {
                random_triangle_split(&cur, &mut rng, &ids).map(Split::Triangle)
            };
            let Some(spec) = spec else { continue };
            if let Ok(next) = spec.apply(&cur) {
                if is_tight(&next, l) {
                    found = Some((spec, next));
                    break;
                }
            }
        }
        let (spec, next) = found.expect("random splits keep failing to stay tight");
        steps.push(spec);
        cur = next;
    }
    (ConstructionSequence { base, level: l, steps }, cur)
}

/// Adds diagonals greedily while the map stays sparse, then checks that the
/// result is tight. A tight input is returned unchanged.
pub fn complete_to_tight(map: &AnnulusMap, l: u8) -> Result<AnnulusMap, ReductionError> {
    if !is_sparse(map, l) {
        return Err(ReductionError::NotTight(l));
    }
    let mut cur = map.clone();
    while !is_tight(&cur, l) {
        match first_sparse_diagonal(&cur, l) {
            Some(next) => cur = next,
            None => return Err(ReductionError::CompletionStuck),
        }
    }
    Ok(cur)
}

fn first_sparse_diagonal(map: &AnnulusMap, l: u8) -> Option<AnnulusMap> {
    let id = FreshIds::for_map(map).edges[0].clone();
    for f in 0..map.n_faces() {
        let c = corner_count(map, f);
        let ends_here = map.end_faces().iter().filter(|&&e| e == f).count();
        let choices: Vec<[bool; 2]> = match ends_here {
            0 => vec![[true, true]],
            _ => vec![[true, true], [true, false], [false, true], [false, false]],
        };
        for i in 0..c {
            for j in i..c {
                for &ends in &choices {
                    match add_diagonal(map, f, i, j, ends, &id) {
                        Ok(next) if is_sparse(&next, l) => return Some(next),
                        Ok(_) | Err(MoveError::Map(_)) => {}
                        Err(e) => panic!("diagonal insertion failed: {e}"),
                    }
                }
            }
        }
    }
    None
}

/// Deletes `count` random edges, keeping the map valid; used to produce
/// sparse inputs for completion.
pub fn delete_random_edges<R: Rng>(map: &AnnulusMap, count: usize, rng: &mut R) -> AnnulusMap {
    let mut cur = map.clone();
    for _ in 0..count {
        let candidates: Vec<usize> = (0..cur.n_edges())
            .filter(|&e| cur.face_of(Dart::new(e, true)) != cur.face_of(Dart::new(e, false)))
            .collect();
        if candidates.is_empty() {
            break;
        }
        let e = candidates[rng.gen_range(0..candidates.len())];
        cur = crate::moves::delete_edge(&cur, e).expect("non-bridge deletion is valid");
    }
    cur
}
