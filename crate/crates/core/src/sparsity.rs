//! (2,3,l)-sparsity and tightness.
//!
//! `H` violates when `f(H) < l`, or when `H` is balanced, has an edge and
//! `f(H) < 3`. The fast checker inserts edges one at a time; `F + e` stays
//! sparse iff `F + e + e'` is independent in the union of two matroids,
//! where `e'` is a parallel copy of `e` with the same gain. For `l = 1` both
//! matroids are the frame matroid of the gain graph; for `l = 2` one of them
//! is the graphic matroid.

use std::collections::{BTreeSet, VecDeque};

use thiserror::Error;

use crate::annulus_map::{AnnulusMap, EdgeSubset, PotentialForest};

/// Default bound on the edge count for exhaustive enumeration.
pub const ORACLE_EDGE_LIMIT: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparsityVerdict {
    pub sparse: bool,
    pub tight: bool,
    pub violator: Option<EdgeSubset>,
    pub level: u8,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SparsityError {
    #[error("{edges} edges exceed the exhaustive bound {limit}")]
    TooLarge { edges: usize, limit: usize },
}

/// Whether `subset` on its own breaks the (2,3,l) count.
pub fn violates(map: &AnnulusMap, subset: &EdgeSubset, l: u8) -> bool {
    let f = map.f_count(subset);
    f < i64::from(l) || (!subset.members.is_empty() && f < 3 && map.is_balanced(subset))
}

fn tight_given_sparse(map: &AnnulusMap, l: u8) -> bool {
    let full = map.full_subset();
    let f = map.f_count(&full);
    map.n_edges() == 0 || f == i64::from(l) || (f == 3 && map.is_balanced(&full))
}

/// Edge indices ordered by edge id.
fn edges_by_id(map: &AnnulusMap) -> Vec<usize> {
    let mut order: Vec<usize> = (0..map.n_edges()).collect();
    order.sort_by(|&a, &b| map.edges()[a].id.cmp(&map.edges()[b].id));
    order
}

/// Exhaustive check; the violator is the first failing subset in
/// binary-counter order over the edges sorted by id.
pub fn oracle_sparse(map: &AnnulusMap, l: u8) -> Result<SparsityVerdict, SparsityError> {
    oracle_sparse_bounded(map, l, ORACLE_EDGE_LIMIT)
}

pub fn oracle_sparse_bounded(map: &AnnulusMap, l: u8, limit: usize) -> Result<SparsityVerdict, SparsityError> {
    assert!(l == 1 || l == 2, "level must be 1 or 2");
    let m = map.n_edges();
    if m > limit {
        return Err(SparsityError::TooLarge { edges: m, limit });
    }
    let order = edges_by_id(map);
    for mask in 1u64..(1u64 << m) {
        let subset = EdgeSubset::from_edges((0..m).filter(|i| mask >> i & 1 == 1).map(|i| order[i]));
        if violates(map, &subset, l) {
            return Ok(SparsityVerdict { sparse: false, tight: false, violator: Some(subset), level: l });
        }
    }
    Ok(SparsityVerdict { sparse: true, tight: tight_given_sparse(map, l), violator: None, level: l })
}

#[derive(Copy, Clone, PartialEq, Eq)]
enum Kind {
    Frame,
    Graphic,
}

#[derive(Copy, Clone)]
struct Elem {
    tail: usize,
    head: usize,
    gain: i64,
    edge: usize,
}

fn independent(kind: Kind, n: usize, elems: &[Elem], members: impl Iterator<Item = usize>) -> bool {
    match kind {
        Kind::Graphic => {
            let mut pf = PotentialForest::new(n);
            for i in members {
                let e = elems[i];
                let (a, _) = pf.find(e.tail);
                let (b, _) = pf.find(e.head);
                if a == b {
                    return false;
                }
                pf.add(e.tail, e.head, 0);
            }
            true
        }
        Kind::Frame => {
            let mut pf = PotentialForest::new(n);
            let mut cyclic = vec![false; n];
            for i in members {
                let e = elems[i];
                let (a, oa) = pf.find(e.tail);
                let (b, ob) = pf.find(e.head);
                if a == b {
                    // a second cycle, or a balanced one, is dependent
                    if cyclic[a] || ob - oa == e.gain {
                        return false;
                    }
                    cyclic[a] = true;
                } else {
                    if cyclic[a] && cyclic[b] {
                        return false;
                    }
                    let c = cyclic[a] || cyclic[b];
                    pf.add(e.tail, e.head, e.gain);
                    let (r, _) = pf.find(e.tail);
                    cyclic[r] = c;
                }
            }
            true
        }
    }
}

/// Matroid-partition state over a growing element list.
struct Partition {
    n: usize,
    kinds: [Kind; 2],
    elems: Vec<Elem>,
    part: Vec<Option<usize>>,
}

impl Partition {
    fn new(n: usize, l: u8) -> Self {
        let second = if l == 1 { Kind::Frame } else { Kind::Graphic };
        Partition { n, kinds: [Kind::Frame, second], elems: Vec::new(), part: Vec::new() }
    }

    fn members(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.elems.len()).filter(move |&k| self.part[k] == Some(i))
    }

    fn indep_with(&self, i: usize, add: usize, drop: Option<usize>) -> bool {
        let it = self.members(i).filter(|&k| Some(k) != drop).chain(std::iter::once(add));
        independent(self.kinds[i], self.n, &self.elems, it)
    }

    /// Inserts element `x`; on failure returns the visited set of the search.
    fn augment(&mut self, x: usize) -> Result<(), Vec<usize>> {
        let len = self.elems.len();
        let mut pred: Vec<Option<(usize, usize)>> = vec![None; len];
        let mut seen = vec![false; len];
        seen[x] = true;
        let mut queue = VecDeque::from([x]);
        let mut order = vec![x];
        while let Some(y) = queue.pop_front() {
            for i in 0..2 {
                if self.part[y] == Some(i) {
                    continue;
                }
                if self.indep_with(i, y, None) {
                    // walk back: each node enters the part that its successor left
                    let mut cur = y;
                    let mut into = i;
                    loop {
                        let prev = pred[cur];
                        self.part[cur] = Some(into);
                        match prev {
                            Some((p, j)) => {
                                cur = p;
                                into = j;
                            }
                            None => break,
                        }
                    }
                    return Ok(());
                }
                let inside: Vec<usize> = self.members(i).collect();
                for z in inside {
                    if !seen[z] && self.indep_with(i, y, Some(z)) {
                        seen[z] = true;
                        pred[z] = Some((y, i));
                        queue.push_back(z);
                        order.push(z);
                    }
                }
            }
        }
        Err(order)
    }

    fn push(&mut self, e: Elem) -> usize {
        self.elems.push(e);
        self.part.push(None);
        self.elems.len() - 1
    }

    fn pop(&mut self) {
        self.elems.pop();
        self.part.pop();
    }
}

/// Outcome of the incremental test: `Err` carries a violating edge set.
fn incremental(map: &AnnulusMap, l: u8) -> Result<(), EdgeSubset> {
    let gains = &map.gain_view().edge_gain;
    let mut p = Partition::new(map.n_vertices(), l);
    for e in edges_by_id(map) {
        let ed = &map.edges()[e];
        let elem = Elem { tail: ed.tail, head: ed.head, gain: gains[e], edge: e };
        let x = p.push(elem);
        let copy = p.push(elem);
        let failed = match p.augment(x) {
            Err(visited) => Some(visited),
            Ok(()) => p.augment(copy).err(),
        };
        if let Some(visited) = failed {
            let edges: BTreeSet<usize> = visited.iter().map(|&k| p.elems[k].edge).collect();
            return Err(extract_violator(map, l, &edges, e));
        }
        // the copy may have displaced elements; dropping it keeps both parts independent
        if p.part[copy].is_some() {
            p.part[copy] = None;
        }
        p.pop();
    }
    Ok(())
}

/// Picks the violating component of the failed search, falling back to
/// deletion-minimization if the component does not violate.
fn extract_violator(map: &AnnulusMap, l: u8, edges: &BTreeSet<usize>, e: usize) -> EdgeSubset {
    let comp = component_containing(map, edges, e);
    if violates(map, &comp, l) {
        return comp;
    }
    let mut current: BTreeSet<usize> = edges.clone();
    let all: Vec<usize> = current.iter().copied().filter(|&g| g != e).collect();
    for g in all {
        current.remove(&g);
        if !subset_fails(map, l, &current, e) {
            current.insert(g);
        }
    }
    let s = EdgeSubset { members: current, extra_vertices: BTreeSet::new() };
    assert!(violates(map, &s, l), "violator extraction failed");
    s
}

fn subset_fails(map: &AnnulusMap, l: u8, edges: &BTreeSet<usize>, e: usize) -> bool {
    let gains = &map.gain_view().edge_gain;
    let mut p = Partition::new(map.n_vertices(), l);
    for &g in edges.iter().filter(|&&g| g != e).chain(std::iter::once(&e)) {
        let ed = &map.edges()[g];
        let x = p.push(Elem { tail: ed.tail, head: ed.head, gain: gains[g], edge: g });
        if p.augment(x).is_err() {
            return true;
        }
    }
    let ed = &map.edges()[e];
    let x = p.push(Elem { tail: ed.tail, head: ed.head, gain: gains[e], edge: e });
    p.augment(x).is_err()
}

fn component_containing(map: &AnnulusMap, edges: &BTreeSet<usize>, e: usize) -> EdgeSubset {
    let mut pf = PotentialForest::new(map.n_vertices());
    for &g in edges {
        pf.add(map.edges()[g].tail, map.edges()[g].head, 0);
    }
    let (root, _) = pf.find(map.edges()[e].tail);
    let members = edges.iter().copied().filter(|&g| pf.find(map.edges()[g].tail).0 == root).collect();
    EdgeSubset { members, extra_vertices: BTreeSet::new() }
}

/// Boolean sparsity test without a certificate search beyond the first failure.
pub fn is_sparse(map: &AnnulusMap, l: u8) -> bool {
    assert!(l == 1 || l == 2, "level must be 1 or 2");
    incremental(map, l).is_ok()
}

pub fn is_tight(map: &AnnulusMap, l: u8) -> bool {
    is_sparse(map, l) && tight_given_sparse(map, l)
}

/// Polynomial-time verdict; agrees with [`oracle_sparse`] on `sparse` and `tight`.
pub fn check_sparse(map: &AnnulusMap, l: u8) -> SparsityVerdict {
    assert!(l == 1 || l == 2, "level must be 1 or 2");
    match incremental(map, l) {
        Ok(()) => SparsityVerdict { sparse: true, tight: tight_given_sparse(map, l), violator: None, level: l },
        Err(v) => SparsityVerdict { sparse: false, tight: false, violator: Some(v), level: l },
    }
}

fn is_tight_subset(map: &AnnulusMap, s: &EdgeSubset, l: u8) -> bool {
    let f = map.f_count(s);
    if s.members.is_empty() {
        return s.extra_vertices.len() == 1;
    }
    (f == i64::from(l) || (f == 3 && map.is_balanced(s))) && connected(map, s)
}

fn connected(map: &AnnulusMap, s: &EdgeSubset) -> bool {
    let mut pf = PotentialForest::new(map.n_vertices());
    for &g in &s.members {
        pf.add(map.edges()[g].tail, map.edges()[g].head, 0);
    }
    let vs = s.vertices(map);
    let roots: BTreeSet<usize> = vs.iter().map(|&v| pf.find(v).0).collect();
    roots.len() <= 1
}

/// An inclusion-maximal tight subgraph containing `seed`, for a sparse map.
///
/// Enumerates vertex sets, so the cost is exponential in the vertex count.
pub fn max_tight_subgraph(map: &AnnulusMap, l: u8, seed: usize) -> EdgeSubset {
    let n = map.n_vertices();
    let se = &map.edges()[seed];
    let fixed: BTreeSet<usize> = [se.tail, se.head].into_iter().collect();
    let free: Vec<usize> = (0..n).filter(|v| !fixed.contains(v)).collect();
    assert!(free.len() < 26, "max_tight_subgraph enumerates 2^{} vertex sets", free.len());
    let mut best = EdgeSubset::from_edges([seed]);
    for mask in 0u64..(1u64 << free.len()) {
        let mut w = vec![false; n];
        for &v in &fixed {
            w[v] = true;
        }
        for (i, &v) in free.iter().enumerate() {
            if mask >> i & 1 == 1 {
                w[v] = true;
            }
        }
        let induced =
            EdgeSubset::from_edges((0..map.n_edges()).filter(|&g| w[map.edges()[g].tail] && w[map.edges()[g].head]));
        if induced.members.len() <= best.members.len() {
            continue;
        }
        if is_tight_subset(map, &induced, l) {
            best = induced;
            continue;
        }
        if l == 1 && map.f_count(&induced) == 2 && induced.members.len() > best.members.len() + 1 {
            for &x in &induced.members {
                if x == seed {
                    continue;
                }
                let mut h = induced.clone();
                h.members.remove(&x);
                if h.vertices(map).len() == induced.vertices(map).len() && is_tight_subset(map, &h, l) {
                    best = h;
                    break;
                }
            }
        }
    }
    for g in 0..map.n_edges() {
        if !best.members.contains(&g) {
            let mut ext = best.clone();
            ext.members.insert(g);
            debug_assert!(!is_tight_subset(map, &ext, l), "single-edge extension is tight");
        }
    }
    best
}

/// Sparsity of a gain graph given as `(tail, head, gain)` triples, using the
/// same doubling test as maps. With zero gains and `l = 2` this is plain
/// (2,3)-sparsity.
pub fn gain_graph_sparse(n: usize, edges: &[(usize, usize, i64)], l: u8) -> bool {
    let mut p = Partition::new(n, l);
    for (e, &(tail, head, gain)) in edges.iter().enumerate() {
        let elem = Elem { tail, head, gain, edge: e };
        let x = p.push(elem);
        let copy = p.push(elem);
        if p.augment(x).is_err() || p.augment(copy).is_err() {
            return false;
        }
        p.part[copy] = None;
        p.pop();
    }
    true
}
