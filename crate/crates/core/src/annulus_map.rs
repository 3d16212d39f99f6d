//! Combinatorial maps of graphs embedded in the annulus.
//!
//! A map is a rotation system on a connected multigraph (a sphere embedding)
//! together with the two faces holding the ends of the annulus. Edge gains
//! count signed crossings of a dual path joining the two end faces, so the
//! gain of a closed walk is its winding number about the core.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use thiserror::Error;

/// Half-edge: edge `e` has darts `2e` (leaves the tail) and `2e + 1` (leaves the head).
#[derive(Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Dart(u32);

impl Dart {
    pub fn new(edge: usize, plus: bool) -> Dart {
        Dart(edge as u32 * 2 + u32::from(!plus))
    }
    pub fn from_index(i: usize) -> Dart {
        Dart(i as u32)
    }
    pub fn index(self) -> usize {
        self.0 as usize
    }
    pub fn edge(self) -> usize {
        (self.0 / 2) as usize
    }
    pub fn is_plus(self) -> bool {
        self.0 % 2 == 0
    }
    pub fn twin(self) -> Dart {
        Dart(self.0 ^ 1)
    }
}

impl fmt::Debug for Dart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.edge(), if self.is_plus() { '+' } else { '-' })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub id: String,
    pub tail: usize,
    pub head: usize,
}

impl Edge {
    pub fn is_loop(&self) -> bool {
        self.tail == self.head
    }
}

/// A face corner: `incoming` arrives at `vertex`, `outgoing = φ(incoming)` leaves it.
/// Both are `None` only for the face of an isolated vertex.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Corner {
    pub vertex: usize,
    pub incoming: Option<Dart>,
    pub outgoing: Option<Dart>,
}

/// Boundary walk of a face, darts listed in face order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FaceWalk {
    pub darts: Vec<Dart>,
    pub corners: Vec<Corner>,
}

impl FaceWalk {
    pub fn degree(&self) -> usize {
        self.darts.len()
    }

    /// A walk is degenerate when a vertex or an edge repeats along it.
    pub fn is_degenerate(&self) -> bool {
        let vs: BTreeSet<usize> = self.corners.iter().map(|c| c.vertex).collect();
        let es: BTreeSet<usize> = self.darts.iter().map(|d| d.edge()).collect();
        vs.len() < self.corners.len() || es.len() < self.darts.len()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MapError {
    #[error("graph is not connected")]
    NotConnected,
    #[error("rotation system has genus > 0 (V - E + F = {0})")]
    NotGenusZero(i64),
    #[error("bad rotation: {0}")]
    BadRotation(String),
    #[error("unknown end face: {0}")]
    UnknownEndFace(String),
    #[error("malformed map: {0}")]
    Malformed(String),
}

/// Selection of edges (and possibly isolated vertices) of a parent map.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeSubset {
    pub members: BTreeSet<usize>,
    pub extra_vertices: BTreeSet<usize>,
}

impl EdgeSubset {
    pub fn from_edges<I: IntoIterator<Item = usize>>(edges: I) -> Self {
        EdgeSubset { members: edges.into_iter().collect(), extra_vertices: BTreeSet::new() }
    }

    pub fn vertex(v: usize) -> Self {
        EdgeSubset { members: BTreeSet::new(), extra_vertices: [v].into_iter().collect() }
    }

    pub fn vertices(&self, map: &AnnulusMap) -> BTreeSet<usize> {
        let mut vs = self.extra_vertices.clone();
        for &e in &self.members {
            vs.insert(map.edges[e].tail);
            vs.insert(map.edges[e].head);
        }
        vs
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty() && self.extra_vertices.is_empty()
    }
}

/// Tree-normalized gains: tree edges carry 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GainView {
    pub tree: Vec<bool>,
    pub edge_gain: Vec<i64>,
}

#[derive(Clone, Debug)]
pub struct AnnulusMap {
    vertex_ids: Vec<String>,
    edges: Vec<Edge>,
    rotation: Vec<Vec<Dart>>,
    next: Vec<Dart>,
    prev: Vec<Dart>,
    face_of: Vec<usize>,
    faces: Vec<Vec<Dart>>,
    ends: [usize; 2],
    gains: GainView,
}

impl AnnulusMap {
    /// Validates the input and derives faces and gains.
    pub fn build(
        vertex_ids: Vec<String>,
        edges: Vec<Edge>,
        rotation: Vec<Vec<Dart>>,
        end_faces: [Corner; 2],
    ) -> Result<AnnulusMap, MapError> {
        let mut map = Self::skeleton(vertex_ids, edges, rotation)?;
        let mut ends = [0usize; 2];
        for (i, c) in end_faces.iter().enumerate() {
            ends[i] = map.resolve_corner(c)?;
        }
        map.finish(ends);
        Ok(map)
    }

    /// Like [`AnnulusMap::build`], with each end given by any dart on its face.
    pub fn build_with_end_darts(
        vertex_ids: Vec<String>,
        edges: Vec<Edge>,
        rotation: Vec<Vec<Dart>>,
        end_darts: [Option<Dart>; 2],
    ) -> Result<AnnulusMap, MapError> {
        let mut map = Self::skeleton(vertex_ids, edges, rotation)?;
        let mut ends = [0usize; 2];
        for (i, d) in end_darts.iter().enumerate() {
            ends[i] = match d {
                None if map.edges.is_empty() => 0,
                None => return Err(MapError::UnknownEndFace("missing witness dart".into())),
                Some(d) if d.index() < map.face_of.len() => map.face_of[d.index()],
                Some(d) => return Err(MapError::UnknownEndFace(format!("dart {:?} out of range", d))),
            };
        }
        map.finish(ends);
        Ok(map)
    }

    fn skeleton(vertex_ids: Vec<String>, edges: Vec<Edge>, rotation: Vec<Vec<Dart>>) -> Result<AnnulusMap, MapError> {
        let n = vertex_ids.len();
        if n == 0 {
            return Err(MapError::Malformed("no vertices".into()));
        }
        let mut seen = BTreeSet::new();
        for v in &vertex_ids {
            if !seen.insert(v.as_str()) {
                return Err(MapError::Malformed(format!("duplicate vertex id {v}")));
            }
        }
        let mut seen = BTreeSet::new();
        for e in &edges {
            if !seen.insert(e.id.as_str()) {
                return Err(MapError::Malformed(format!("duplicate edge id {}", e.id)));
            }
            if e.tail >= n || e.head >= n {
                return Err(MapError::Malformed(format!("edge {} has an unknown endpoint", e.id)));
            }
        }
        if rotation.len() != n {
            return Err(MapError::BadRotation("rotation must list every vertex".into()));
        }
        let nd = 2 * edges.len();
        let origin = |d: Dart| if d.is_plus() { edges[d.edge()].tail } else { edges[d.edge()].head };
        let mut placed = vec![false; nd];
        let mut next = vec![Dart(0); nd];
        let mut prev = vec![Dart(0); nd];
        for (v, rot) in rotation.iter().enumerate() {
            for (i, &d) in rot.iter().enumerate() {
                if d.index() >= nd {
                    return Err(MapError::BadRotation(format!("unknown dart {:?}", d)));
                }
                if origin(d) != v {
                    return Err(MapError::BadRotation(format!(
                        "dart {:?} listed at wrong vertex {}",
                        d, vertex_ids[v]
                    )));
                }
                if placed[d.index()] {
                    return Err(MapError::BadRotation(format!("dart {:?} listed twice", d)));
                }
                placed[d.index()] = true;
                let nx = rot[(i + 1) % rot.len()];
                next[d.index()] = nx;
                prev[nx.index()] = d;
            }
        }
        if let Some(i) = placed.iter().position(|p| !p) {
            return Err(MapError::BadRotation(format!("dart {:?} missing from rotation", Dart(i as u32))));
        }
        // connectivity
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut y = x;
            while p[y] != r {
                let nx = p[y];
                p[y] = r;
                y = nx;
            }
            r
        }
        let mut comps = n;
        for e in &edges {
            let (a, b) = (find(&mut parent, e.tail), find(&mut parent, e.head));
            if a != b {
                parent[a] = b;
                comps -= 1;
            }
        }
        if comps != 1 {
            return Err(MapError::NotConnected);
        }
        // faces: orbits of φ = σ∘α
        let mut face_of = vec![usize::MAX; nd];
        let mut faces = Vec::new();
        for s in 0..nd {
            if face_of[s] != usize::MAX {
                continue;
            }
            let mut walk = Vec::new();
            let mut d = Dart(s as u32);
            while face_of[d.index()] == usize::MAX {
                face_of[d.index()] = faces.len();
                walk.push(d);
                d = next[d.twin().index()];
            }
            faces.push(walk);
        }
        let f = if edges.is_empty() { 1 } else { faces.len() };
        let chi = n as i64 - edges.len() as i64 + f as i64;
        if chi != 2 {
            return Err(MapError::NotGenusZero(chi));
        }
        Ok(AnnulusMap {
            vertex_ids,
            edges,
            rotation,
            next,
            prev,
            face_of,
            faces,
            ends: [0, 0],
            gains: GainView { tree: vec![], edge_gain: vec![] },
        })
    }

    fn resolve_corner(&self, c: &Corner) -> Result<usize, MapError> {
        if c.vertex >= self.vertex_ids.len() {
            return Err(MapError::UnknownEndFace("unknown vertex".into()));
        }
        if self.edges.is_empty() {
            return match (c.incoming, c.outgoing) {
                (None, None) => Ok(0),
                _ => Err(MapError::UnknownEndFace("isolated vertex has no darts".into())),
            };
        }
        let (Some(i), Some(o)) = (c.incoming, c.outgoing) else {
            return Err(MapError::UnknownEndFace("corner needs in and out darts".into()));
        };
        let nd = self.face_of.len();
        if i.index() >= nd || o.index() >= nd {
            return Err(MapError::UnknownEndFace("unknown dart".into()));
        }
        if self.origin(o) != c.vertex || self.target(i) != c.vertex || self.phi(i) != o {
            return Err(MapError::UnknownEndFace(format!(
                "({:?}, {:?}) is not a corner at {}",
                i, o, self.vertex_ids[c.vertex]
            )));
        }
        Ok(self.face_of[o.index()])
    }

    fn finish(&mut self, ends: [usize; 2]) {
        self.ends = ends;
        let m = self.edges.len();
        let mut raw = vec![0i64; m];
        if ends[0] != ends[1] {
            // BFS in the dual from end 0 to end 1
            let nf = self.faces.len();
            let mut via: Vec<Option<Dart>> = vec![None; nf];
            let mut seen = vec![false; nf];
            seen[ends[0]] = true;
            let mut queue = VecDeque::from([ends[0]]);
            while let Some(f) = queue.pop_front() {
                if f == ends[1] {
                    break;
                }
                for &d in &self.faces[f] {
                    let g = self.face_of[d.twin().index()];
                    if !seen[g] {
                        seen[g] = true;
                        via[g] = Some(d);
                        queue.push_back(g);
                    }
                }
            }
            let mut f = ends[1];
            while f != ends[0] {
                let d = via[f].expect("dual graph of a connected map is connected");
                // crossing from face(e+) to face(e-) counts +1
                raw[d.edge()] += if d.is_plus() { 1 } else { -1 };
                f = self.face_of[d.index()];
            }
        }
        // normalize along a BFS tree rooted at vertex 0
        let n = self.vertex_ids.len();
        let mut pot: Vec<Option<i64>> = vec![None; n];
        let mut tree = vec![false; m];
        pot[0] = Some(0);
        let mut queue = VecDeque::from([0usize]);
        while let Some(v) = queue.pop_front() {
            let pv = pot[v].unwrap();
            for &d in &self.rotation[v] {
                let w = self.target(d);
                if pot[w].is_none() {
                    let g = if d.is_plus() { raw[d.edge()] } else { -raw[d.edge()] };
                    pot[w] = Some(pv + g);
                    tree[d.edge()] = true;
                    queue.push_back(w);
                }
            }
        }
        let edge_gain =
            self.edges.iter().enumerate().map(|(i, e)| raw[i] + pot[e.tail].unwrap() - pot[e.head].unwrap()).collect();
        self.gains = GainView { tree, edge_gain };
    }

    pub fn n_vertices(&self) -> usize {
        self.vertex_ids.len()
    }
    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }
    pub fn vertex_ids(&self) -> &[String] {
        &self.vertex_ids
    }
    pub fn vertex_id(&self, v: usize) -> &str {
        &self.vertex_ids[v]
    }
    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.vertex_ids.iter().position(|v| v == id)
    }
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }
    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.edges.iter().position(|e| e.id == id)
    }
    pub fn rotation(&self, v: usize) -> &[Dart] {
        &self.rotation[v]
    }
    pub fn rotations(&self) -> &[Vec<Dart>] {
        &self.rotation
    }
    pub fn darts(&self) -> impl Iterator<Item = Dart> {
        (0..2 * self.edges.len()).map(Dart::from_index)
    }
    pub fn origin(&self, d: Dart) -> usize {
        let e = &self.edges[d.edge()];
        if d.is_plus() {
            e.tail
        } else {
            e.head
        }
    }
    pub fn target(&self, d: Dart) -> usize {
        self.origin(d.twin())
    }
    pub fn sigma(&self, d: Dart) -> Dart {
        self.next[d.index()]
    }
    pub fn sigma_inv(&self, d: Dart) -> Dart {
        self.prev[d.index()]
    }
    pub fn phi(&self, d: Dart) -> Dart {
        self.next[d.twin().index()]
    }
    pub fn phi_inv(&self, d: Dart) -> Dart {
        self.prev[d.index()].twin()
    }
    pub fn degree(&self, v: usize) -> usize {
        self.rotation[v].len()
    }
    pub fn dart_label(&self, d: Dart) -> String {
        format!("{}{}", self.edges[d.edge()].id, if d.is_plus() { '+' } else { '-' })
    }

    pub fn n_faces(&self) -> usize {
        if self.edges.is_empty() {
            1
        } else {
            self.faces.len()
        }
    }

    /// Face darts in face order; empty for the face of an isolated vertex.
    pub fn face_darts(&self, f: usize) -> &[Dart] {
        if self.edges.is_empty() {
            &[]
        } else {
            &self.faces[f]
        }
    }

    pub fn face_of(&self, d: Dart) -> usize {
        self.face_of[d.index()]
    }

    pub fn face_walk(&self, f: usize) -> FaceWalk {
        let darts = self.face_darts(f).to_vec();
        let corners = darts
            .iter()
            .map(|&d| Corner { vertex: self.target(d), incoming: Some(d), outgoing: Some(self.phi(d)) })
            .collect();
        FaceWalk { darts, corners }
    }

    pub fn faces(&self) -> Vec<FaceWalk> {
        (0..self.n_faces()).map(|f| self.face_walk(f)).collect()
    }

    pub fn end_faces(&self) -> [usize; 2] {
        self.ends
    }

    /// Cellular faces are the faces holding neither end.
    pub fn is_cellular(&self, f: usize) -> bool {
        f != self.ends[0] && f != self.ends[1]
    }

    /// Canonical witness corner of a face: its smallest outgoing dart.
    pub fn face_corner(&self, f: usize) -> Corner {
        if self.edges.is_empty() {
            return Corner { vertex: 0, incoming: None, outgoing: None };
        }
        let out = *self.faces[f].iter().min().unwrap();
        Corner { vertex: self.origin(out), incoming: Some(self.phi_inv(out)), outgoing: Some(out) }
    }

    pub fn end_corners(&self) -> [Corner; 2] {
        [self.face_corner(self.ends[0]), self.face_corner(self.ends[1])]
    }

    pub fn gain_view(&self) -> &GainView {
        &self.gains
    }

    /// Gain of a dart: the edge gain, negated for the minus dart.
    pub fn dart_gain(&self, d: Dart) -> i64 {
        let g = self.gains.edge_gain[d.edge()];
        if d.is_plus() {
            g
        } else {
            -g
        }
    }

    /// Sum of dart gains along a closed walk.
    pub fn walk_gain(&self, walk: &[Dart]) -> i64 {
        walk.iter().map(|&d| self.dart_gain(d)).sum()
    }

    pub fn full_subset(&self) -> EdgeSubset {
        let mut s = EdgeSubset::from_edges(0..self.edges.len());
        if self.edges.is_empty() {
            s.extra_vertices.insert(0);
        }
        s
    }

    /// `2|V(E')| - |E'|`, counting extra vertices.
    pub fn f_count(&self, subset: &EdgeSubset) -> i64 {
        2 * subset.vertices(self).len() as i64 - subset.members.len() as i64
    }

    /// Gain test: every cycle of the subset has gain 0.
    pub fn is_balanced(&self, subset: &EdgeSubset) -> bool {
        let mut pf = PotentialForest::new(self.n_vertices());
        subset.members.iter().all(|&e| {
            let ed = &self.edges[e];
            pf.add(ed.tail, ed.head, self.gains.edge_gain[e])
        })
    }

    /// Face test: both ends share a face of the subgraph's own embedding.
    pub fn face_balanced(&self, subset: &EdgeSubset) -> bool {
        if self.ends[0] == self.ends[1] {
            return true;
        }
        let mut parent: Vec<usize> = (0..self.faces.len()).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            if p[x] != x {
                let r = find(p, p[x]);
                p[x] = r;
            }
            p[x]
        }
        for e in 0..self.edges.len() {
            if !subset.members.contains(&e) {
                let a = find(&mut parent, self.face_of[2 * e]);
                let b = find(&mut parent, self.face_of[2 * e + 1]);
                parent[a] = b;
            }
        }
        find(&mut parent, self.ends[0]) == find(&mut parent, self.ends[1])
    }

    pub fn is_map_balanced(&self) -> bool {
        self.ends[0] == self.ends[1]
    }

    /// Checks `3f₁ + 2f₂ + f₃ = 8 - 2f(G) + Σ_{i≥5} (i-4) f_i` over all faces.
    pub fn euler_check(&self) -> bool {
        if self.edges.is_empty() {
            return false;
        }
        let mut lhs = 0i64;
        let mut excess = 0i64;
        for walk in &self.faces {
            match walk.len() {
                1 => lhs += 3,
                2 => lhs += 2,
                3 => lhs += 1,
                4 => {}
                i => excess += i as i64 - 4,
            }
        }
        lhs == 8 - 2 * self.f_count(&self.full_subset()) + excess
    }
}

/// Union-find with integer potentials; `add` fails on an unbalanced cycle.
pub(crate) struct PotentialForest {
    parent: Vec<usize>,
    offset: Vec<i64>,
}

impl PotentialForest {
    pub(crate) fn new(n: usize) -> Self {
        PotentialForest { parent: (0..n).collect(), offset: vec![0; n] }
    }

    /// Root of `v` and `pot(v) - pot(root)`.
    pub(crate) fn find(&mut self, v: usize) -> (usize, i64) {
        let p = self.parent[v];
        if p == v {
            return (v, 0);
        }
        let (r, o) = self.find(p);
        self.parent[v] = r;
        self.offset[v] += o;
        (r, self.offset[v])
    }

    /// Imposes `pot(head) - pot(tail) = gain`.
    pub(crate) fn add(&mut self, tail: usize, head: usize, gain: i64) -> bool {
        let (rt, ot) = self.find(tail);
        let (rh, oh) = self.find(head);
        if rt == rh {
            return oh - ot == gain;
        }
        // pot(rh) - pot(rt) = ot + gain - oh
        self.parent[rh] = rt;
        self.offset[rh] = ot + gain - oh;
        true
    }
}

/// Map isomorphism up to orientation reversal and swapping the ends.
pub fn isomorphic(a: &AnnulusMap, b: &AnnulusMap) -> bool {
    if a.n_edges() == 0 && b.n_edges() == 0 {
        return a.n_vertices() == b.n_vertices();
    }
    find_isomorphism(a, b, true).is_some()
}

/// A dart bijection from `a` to `b` carrying the ends to the ends, and
/// whether it reverses orientation. Reversal is tried only when allowed.
pub fn find_isomorphism(a: &AnnulusMap, b: &AnnulusMap, allow_reversal: bool) -> Option<(Vec<Dart>, bool)> {
    if a.n_vertices() != b.n_vertices() || a.n_edges() != b.n_edges() || a.n_faces() != b.n_faces() {
        return None;
    }
    if a.n_edges() == 0 || a.is_map_balanced() != b.is_map_balanced() {
        return None;
    }
    let nd = 2 * a.n_edges();
    let ends_b = {
        let mut e = b.ends;
        e.sort();
        e
    };
    let orientations: &[bool] = if allow_reversal { &[false, true] } else { &[false] };
    for start in 0..nd {
        for &reversed in orientations {
            if let Some(m) = try_match(a, b, Dart(start as u32), reversed) {
                let face = |d: Dart| {
                    let img = m[d.index()];
                    b.face_of(if reversed { img.twin() } else { img })
                };
                let mut ends_a = [face(a.faces[a.ends[0]][0]), face(a.faces[a.ends[1]][0])];
                ends_a.sort();
                if ends_a == ends_b {
                    return Some((m, reversed));
                }
            }
        }
    }
    None
}

fn try_match(a: &AnnulusMap, b: &AnnulusMap, start: Dart, reversed: bool) -> Option<Vec<Dart>> {
    let nd = 2 * a.n_edges();
    let mut img: Vec<Option<Dart>> = vec![None; nd];
    let mut used = vec![false; nd];
    let mut queue = VecDeque::new();
    let mut assign = |x: Dart, y: Dart, img: &mut Vec<Option<Dart>>, queue: &mut VecDeque<Dart>| -> bool {
        match img[x.index()] {
            Some(z) => z == y,
            None => {
                if used[y.index()] {
                    return false;
                }
                used[y.index()] = true;
                img[x.index()] = Some(y);
                queue.push_back(x);
                true
            }
        }
    };
    assign(Dart(0), start, &mut img, &mut queue);
    while let Some(x) = queue.pop_front() {
        let y = img[x.index()].unwrap();
        let sy = if reversed { b.sigma_inv(y) } else { b.sigma(y) };
        if !assign(x.twin(), y.twin(), &mut img, &mut queue) || !assign(a.sigma(x), sy, &mut img, &mut queue) {
            return None;
        }
    }
    img.into_iter().collect()
}

/// Number of faces of each degree, `[f_0, f_1, ...]`.
pub fn face_degree_histogram(map: &AnnulusMap) -> HashMap<usize, usize> {
    let mut h = HashMap::new();
    for f in 0..map.n_faces() {
        *h.entry(map.face_darts(f).len()).or_insert(0) += 1;
    }
    h
}

/// Isomorphism invariant that is complete for the relation of [`isomorphic`].
///
/// Darts are relabelled in breadth-first order from every start dart in both
/// orientations; the lexicographically least table wins.
pub fn canonical_code(map: &AnnulusMap) -> Vec<u32> {
    let nd = 2 * map.n_edges();
    if nd == 0 {
        return vec![map.n_vertices() as u32];
    }
    let mut best: Option<Vec<u32>> = None;
    for start in 0..nd {
        for reversed in [false, true] {
            let mut label = vec![u32::MAX; nd];
            let mut order = Vec::with_capacity(nd);
            label[start] = 0;
            order.push(Dart(start as u32));
            let mut head = 0;
            while head < order.len() {
                let x = order[head];
                head += 1;
                let s = if reversed { map.sigma_inv(x) } else { map.sigma(x) };
                for y in [x.twin(), s] {
                    if label[y.index()] == u32::MAX {
                        label[y.index()] = order.len() as u32;
                        order.push(y);
                    }
                }
            }
            let mut code = Vec::with_capacity(2 * nd + 3);
            code.push(map.n_vertices() as u32);
            for &x in &order {
                let s = if reversed { map.sigma_inv(x) } else { map.sigma(x) };
                code.push(label[x.twin().index()]);
                code.push(label[s.index()]);
            }
            let mut ends = [0u32; 2];
            for (k, &f) in map.ends.iter().enumerate() {
                ends[k] = map
                    .darts()
                    .filter(|&d| map.face_of(if reversed { d.twin() } else { d }) == f)
                    .map(|d| label[d.index()])
                    .min()
                    .unwrap_or(u32::MAX);
            }
            ends.sort();
            code.extend(ends);
            if best.as_ref().is_none_or(|b| code < *b) {
                best = Some(code);
            }
        }
    }
    best.unwrap()
}
