//! Symmetric pointed pseudotriangulations.
//!
//! A realization stores one position per vertex orbit and, per edge orbit,
//! the group element that carries the head: edge `(t, h, g)` runs from
//! `pos[t]` to `g·pos[h]`. The quotient map is read off by sorting edge
//! directions around each vertex and casting rays towards the two ends.
//!
//! Splits place the new vertex close to the old one inside an angular
//! sector cut out by the incident edges and their reversals, and accept
//! the first placement whose validated quotient is the split map.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use thiserror::Error;

use crate::annulus_map::{find_isomorphism, AnnulusMap, Dart, Edge};
use crate::catalog::Base;
use crate::geometry::{orient, Pt, Seg, SymmetryGroup};
use crate::moves::{FaceChoice, MoveError, QuadSplit, Split, TriangleSplit};
use crate::reduction::{replay_with_backtracking, ConstructionSequence, ReductionError};
use crate::scalar::Scalar;
use crate::sparsity::{check_sparse, is_tight};

pub use crate::realize_contact::DEFAULT_BUDGET;

/// Splits allowed to fail before [`realize_ppt_map`] gives up.
const MAX_FAILED_SPLITS: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PptError {
    #[error("surface does not suit this graph: {0}")]
    SurfaceLevelMismatch(String),
    #[error("no placement validated within {0} attempts")]
    EpsilonExhausted(u32),
    #[error("vertex {0} is not pointed")]
    NotPointed(String),
    #[error("wrong number of convex corners: {0}")]
    BadFaceCount(String),
    #[error("edges cross or overlap: {0}")]
    CrossingEdges(String),
    #[error("not a valid geometric graph: {0}")]
    Malformed(String),
    #[error("unsupported group: {0}")]
    UnsupportedGroup(String),
    #[error(transparent)]
    Move(#[from] MoveError),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
}

/// The quotient of the plane by the group, with the cone point removed.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum FlatSurface {
    Cylinder,
    Cone(u32),
}

impl FlatSurface {
    pub fn of<S>(group: &SymmetryGroup<S>) -> FlatSurface {
        match group {
            SymmetryGroup::Translation { .. } => FlatSurface::Cylinder,
            SymmetryGroup::Rotation { k, .. } => FlatSurface::Cone(*k),
        }
    }

    /// The sparsity level of unbalanced pseudotriangulations on this surface.
    pub fn level(self) -> u8 {
        match self {
            FlatSurface::Cylinder | FlatSurface::Cone(2) => 2,
            FlatSurface::Cone(_) => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PptEdge {
    pub id: String,
    pub tail: usize,
    pub head: usize,
    pub g: i64,
}

#[derive(Clone, Debug)]
pub struct PptRealization<S> {
    pub group: SymmetryGroup<S>,
    pub ids: Vec<String>,
    pub pos: Vec<Pt<S>>,
    pub edges: Vec<PptEdge>,
    pub provenance: Option<ConstructionSequence>,
}

/// Corner counts of a validated realization.
#[derive(Clone, Debug)]
pub struct AngleReport {
    pub quotient_graph: AnnulusMap,
    /// Convex corners per face of the quotient map.
    pub face_convex: Vec<usize>,
    pub pointed: Vec<bool>,
    pub balanced: bool,
    pub c: usize,
    pub f: usize,
    pub n: usize,
    pub m: usize,
}

impl<S: Scalar> PptRealization<S> {
    pub fn surface(&self) -> FlatSurface {
        FlatSurface::of(&self.group)
    }

    fn seg(&self, e: &PptEdge) -> Seg<S> {
        Seg::new(self.pos[e.tail].clone(), self.group.apply(e.g, &self.pos[e.head]))
    }

    /// Direction of dart `d` leaving its origin.
    fn dart_dir(&self, d: Dart) -> Pt<S> {
        let e = &self.edges[d.edge()];
        if d.is_plus() {
            self.group.apply(e.g, &self.pos[e.head]).sub(&self.pos[e.tail])
        } else {
            self.group.apply(-e.g, &self.pos[e.tail]).sub(&self.pos[e.head])
        }
    }

    /// Rejects coincident vertices, degenerate edges, crossings and
    /// vertices inside edges among all images that can meet. With `fresh`
    /// given, pairs avoiding every fresh vertex are taken as
    /// already checked.
    fn check_embedding_near(&self, fresh: Option<&[bool]>) -> Result<(), PptError> {
        let stale = |v: usize| fresh.is_some_and(|f| !f[v]);
        let bad = |m: String| Err(PptError::CrossingEdges(m));
        for (i, p) in self.pos.iter().enumerate() {
            let dot = Seg::new(p.clone(), p.clone());
            if matches!(&self.group, SymmetryGroup::Rotation { center, .. } if center.same(p)) {
                return Err(PptError::Malformed(format!("vertex {} sits on the rotation centre", self.ids[i])));
            }
            for (j, q) in self.pos.iter().enumerate().skip(i) {
                if stale(i) && stale(j) {
                    continue;
                }
                let other = Seg::new(q.clone(), q.clone());
                for g in self.group.candidates(&dot, &other) {
                    if !boxes_meet(fbox(&[p.to_f64()]), fbox(&[self.image_f64(g, q.to_f64())])) {
                        continue;
                    }
                    if (i != j || self.group.normalize(g) != 0) && p.same(&self.group.apply(g, q)) {
                        return Err(PptError::Malformed(format!(
                            "vertices {} and {} coincide",
                            self.ids[i], self.ids[j]
                        )));
                    }
                }
            }
        }
        let segs: Vec<Seg<S>> = self.edges.iter().map(|e| self.seg(e)).collect();
        for (i, s) in segs.iter().enumerate() {
            if s.p.same(&s.q) {
                return Err(PptError::Malformed(format!("edge {} has zero length", self.edges[i].id)));
            }
            if self.group.has_fixed_point_on(s) {
                return Err(PptError::Malformed(format!("edge {} meets the rotation centre", self.edges[i].id)));
            }
        }
        let ends_f64: Vec<[(f64, f64); 2]> = segs.iter().map(|s| [s.p.to_f64(), s.q.to_f64()]).collect();
        let stale_edge = |e: &PptEdge| stale(e.tail) && stale(e.head);
        for i in 0..segs.len() {
            for j in i..segs.len() {
                if stale_edge(&self.edges[i]) && stale_edge(&self.edges[j]) {
                    continue;
                }
                for g in self.group.candidates(&segs[i], &segs[j]) {
                    if i == j && self.group.normalize(g) == 0 {
                        continue;
                    }
                    let image = ends_f64[j].map(|x| self.image_f64(g, x));
                    if !boxes_meet(fbox(&ends_f64[i]), fbox(&image)) {
                        continue;
                    }
                    let b = self.group.apply_seg(g, &segs[j]);
                    if let Some(why) = edges_conflict(&segs[i], &b) {
                        return bad(format!("{} and image {g} of {}: {why}", self.edges[i].id, self.edges[j].id));
                    }
                }
            }
        }
        Ok(())
    }

    /// Approximate image of a point, for filtering only.
    fn image_f64(&self, g: i64, (x, y): (f64, f64)) -> (f64, f64) {
        match &self.group {
            SymmetryGroup::Translation { v } => {
                let (vx, vy) = v.to_f64();
                (x + g as f64 * vx, y + g as f64 * vy)
            }
            SymmetryGroup::Rotation { k, center, .. } => {
                let (cx, cy) = center.to_f64();
                let (sin, cos) = (std::f64::consts::TAU * g as f64 / f64::from(*k)).sin_cos();
                let (dx, dy) = (x - cx, y - cy);
                (cx + cos * dx - sin * dy, cy + sin * dx + cos * dy)
            }
        }
    }

    /// The quotient map, with ends located by rays.
    pub fn extract_map(&self) -> Result<AnnulusMap, PptError> {
        self.extract_map_near(None)
    }

    fn extract_map_near(&self, fresh: Option<&[bool]>) -> Result<AnnulusMap, PptError> {
        self.check_embedding_near(fresh)?;
        let n = self.pos.len();
        let mut rotation: Vec<Vec<Dart>> = vec![Vec::new(); n];
        for (k, e) in self.edges.iter().enumerate() {
            rotation[e.tail].push(Dart::new(k, true));
            rotation[e.head].push(Dart::new(k, false));
        }
        for list in &mut rotation {
            let dirs: BTreeMap<Dart, Pt<S>> = list.iter().map(|&d| (d, self.dart_dir(d))).collect();
            list.sort_by(|a, b| angle_cmp(&dirs[a], &dirs[b]));
        }
        let edges: Vec<Edge> =
            self.edges.iter().map(|e| Edge { id: e.id.clone(), tail: e.tail, head: e.head }).collect();
        let ends = if edges.is_empty() { [None, None] } else { self.end_darts()?.map(Some) };
        AnnulusMap::build_with_end_darts(self.ids.clone(), edges, rotation, ends)
            .map_err(|e| PptError::Malformed(format!("quotient is not an annulus map: {e}")))
    }

    /// A dart on the face of each end: the centre or the +normal side first.
    fn end_darts(&self) -> Result<[Dart; 2], PptError> {
        let segs: Vec<(usize, Seg<S>)> = match &self.group {
            SymmetryGroup::Rotation { k, .. } => (0..self.edges.len())
                .flat_map(|i| (0..i64::from(*k)).map(move |g| (i, g)))
                .map(|(i, g)| (i, self.group.apply_seg(g, &self.seg(&self.edges[i]))))
                .collect(),
            SymmetryGroup::Translation { .. } => Vec::new(),
        };
        // (parameter along the ray, edge, whether the near side is left of the edge)
        let mut near: Option<(S, usize, bool)> = None;
        let mut far: Option<(S, usize, bool)> = None;
        let mut keep = |key: S, i: usize, left: bool| {
            if near.as_ref().map_or(true, |(b, ..)| key.cmp_s(b) == Ordering::Less) {
                near = Some((key.clone(), i, left));
            }
            if far.as_ref().map_or(true, |(b, ..)| key.cmp_s(b) == Ordering::Greater) {
                far = Some((key, i, !left));
            }
        };
        match &self.group {
            SymmetryGroup::Rotation { center, .. } => {
                let verts: Vec<Pt<S>> = segs.iter().flat_map(|(_, s)| [s.p.clone(), s.q.clone()]).collect();
                let dir = segs
                    .iter()
                    .flat_map(|(_, aim)| probe_fractions().into_iter().map(|(a, b)| aim.at(&S::from_ratio(a, b))))
                    .map(|x| x.sub(center))
                    .find(|d| {
                        verts.iter().all(|x| {
                            let w = x.sub(center);
                            d.cross(&w).sign() != Ordering::Equal || d.dot(&w).sign() == Ordering::Less
                        })
                    })
                    .ok_or_else(|| PptError::Malformed("no generic ray from the centre".into()))?;
                for (i, s) in &segs {
                    let u = s.dir();
                    let den = dir.cross(&u);
                    if den.sign() == Ordering::Equal {
                        continue;
                    }
                    let pc = s.p.sub(center);
                    let lambda = pc.cross(&u) / den.clone();
                    let mu = pc.cross(&dir) / den;
                    if lambda.sign() == Ordering::Greater
                        && mu.sign() == Ordering::Greater
                        && (S::one() - mu).sign() == Ordering::Greater
                    {
                        let centre_left = orient(&s.p, &s.q, center) == Ordering::Greater;
                        keep(lambda, *i, centre_left);
                    }
                }
            }
            SymmetryGroup::Translation { v } => {
                let nrm = v.perp();
                let vv = v.dot(v);
                let aim = self
                    .edges
                    .iter()
                    .map(|e| self.seg(e))
                    .find(|s| s.dir().dot(v).sign() != Ordering::Equal)
                    .ok_or_else(|| PptError::Malformed("every edge is normal to the translation".into()))?;
                let x0 = probe_fractions()
                    .into_iter()
                    .map(|(a, b)| aim.at(&S::from_ratio(a, b)).dot(v))
                    .find(|x0| {
                        self.pos.iter().all(|p| {
                            let f = ((x0.clone() - p.dot(v)) / vv.clone()).to_f64();
                            (f - f.round()).abs() > 1e-7
                        })
                    })
                    .ok_or_else(|| PptError::Malformed("no generic line across the strip".into()))?;
                for (i, e) in self.edges.iter().enumerate() {
                    let s = self.seg(e);
                    let (pa, pb) = (s.p.dot(v), s.q.dot(v));
                    let span = pb.clone() - pa.clone();
                    if span.sign() == Ordering::Equal {
                        continue;
                    }
                    let (lo, hi) = if pa.cmp_s(&pb) == Ordering::Less { (pa, pb) } else { (pb, pa) };
                    let jlo = ((x0.clone() - hi) / vv.clone()).to_f64().floor() as i64 - 1;
                    let jhi = ((x0.clone() - lo) / vv.clone()).to_f64().ceil() as i64 + 1;
                    for j in jlo..=jhi {
                        let sj = self.group.apply_seg(j, &s);
                        let t = (x0.clone() - sj.p.dot(v)) / span.clone();
                        if t.sign() != Ordering::Greater || (S::one() - t.clone()).sign() != Ordering::Greater {
                            continue;
                        }
                        // the +normal end comes first; keys run downwards from it
                        let h = -sj.at(&t).dot(&nrm);
                        let top_left = s.dir().cross(&nrm).sign() == Ordering::Greater;
                        keep(h, i, top_left);
                    }
                }
            }
        }
        let pick = |hit: Option<(S, usize, bool)>| {
            let (_, i, left) = hit.expect("a ray across the strip meets the connected graph");
            // the face right of a dart is its own face
            Dart::new(i, !left)
        };
        if near.is_none() {
            return Err(PptError::Malformed("rays towards the ends meet no edge".into()));
        }
        Ok([pick(near), pick(far)])
    }
}

type FBox = [(f64, f64); 2];

/// Bounding box widened well past conversion and rotation rounding.
fn fbox(pts: &[(f64, f64)]) -> FBox {
    let mut lo = (f64::INFINITY, f64::INFINITY);
    let mut hi = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        lo = (lo.0.min(x), lo.1.min(y));
        hi = (hi.0.max(x), hi.1.max(y));
    }
    let big = lo.0.abs().max(lo.1.abs()).max(hi.0.abs()).max(hi.1.abs());
    let pad = 1e-9 * (1.0 + big);
    [(lo.0 - pad, lo.1 - pad), (hi.0 + pad, hi.1 + pad)]
}

fn boxes_meet(a: FBox, b: FBox) -> bool {
    a[0].0 <= b[1].0 && b[0].0 <= a[1].0 && a[0].1 <= b[1].1 && b[0].1 <= a[1].1
}

/// Ccw angular order of directions, starting from the positive x axis.
fn angle_cmp<S: Scalar>(a: &Pt<S>, b: &Pt<S>) -> Ordering {
    let half = |p: &Pt<S>| match (p.y.sign(), p.x.sign()) {
        (Ordering::Greater, _) | (Ordering::Equal, Ordering::Greater) => 0,
        _ => 1,
    };
    half(a).cmp(&half(b)).then_with(|| b.cross(a).sign())
}

/// Why two edge images may not coexist, if they may not.
fn edges_conflict<S: Scalar>(a: &Seg<S>, b: &Seg<S>) -> Option<&'static str> {
    let shared: Vec<(&Pt<S>, &Pt<S>, &Pt<S>)> = [(&a.p, &a.q), (&a.q, &a.p)]
        .into_iter()
        .flat_map(|(x, xo)| [(&b.p, &b.q), (&b.q, &b.p)].into_iter().map(move |(y, yo)| (x, xo, y, yo)))
        .filter(|(x, _, y, _)| x.same(y))
        .map(|(x, xo, _, yo)| (x, xo, yo))
        .collect();
    match shared.len() {
        0 => {}
        1 => {
            let (s, x, y) = shared[0];
            let (u, w) = (x.sub(s), y.sub(s));
            return (u.cross(&w).sign() == Ordering::Equal && u.dot(&w).sign() == Ordering::Greater)
                .then_some("overlap along a shared vertex");
        }
        _ => return Some("parallel edges on the same vertices"),
    }
    let o = [orient(&a.p, &a.q, &b.p), orient(&a.p, &a.q, &b.q), orient(&b.p, &b.q, &a.p), orient(&b.p, &b.q, &a.q)];
    let on = |s: &Seg<S>, x: &Pt<S>| {
        let t = s.param(x);
        t.sign() != Ordering::Less && (S::one() - t).sign() != Ordering::Less
    };
    if (o[0] == Ordering::Equal && on(a, &b.p))
        || (o[1] == Ordering::Equal && on(a, &b.q))
        || (o[2] == Ordering::Equal && on(b, &a.p))
        || (o[3] == Ordering::Equal && on(b, &a.q))
    {
        return Some("a vertex lies on an edge");
    }
    (o.iter().all(|x| *x != Ordering::Equal) && o[0] != o[1] && o[2] != o[3]).then_some("crossing")
}

fn probe_fractions() -> Vec<(i64, i64)> {
    let mut out = Vec::new();
    for den in [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        for num in 1..den {
            out.push((num, den));
        }
    }
    out
}

/// Extracts the quotient map and checks pointedness and the corner counts
/// required on the surface.
pub fn validate_ppt<S: Scalar>(real: &PptRealization<S>) -> Result<AngleReport, PptError> {
    validate_near(real, None)
}

fn validate_near<S: Scalar>(real: &PptRealization<S>, fresh: Option<&[bool]>) -> Result<AngleReport, PptError> {
    let map = real.extract_map_near(fresh)?;
    let n = map.n_vertices();
    let m = map.n_edges();
    let f = map.n_faces();
    let mut face_convex = vec![0; f];
    let mut pointed = vec![false; n];
    for v in 0..n {
        let rot = map.rotation(v);
        for &d in rot {
            let next = map.sigma(d);
            let (a, b) = (real.dart_dir(d), real.dart_dir(next));
            let cross = a.cross(&b).sign();
            if rot.len() == 1 || cross == Ordering::Less {
                pointed[v] = true;
            } else if cross == Ordering::Greater {
                face_convex[map.face_of(next)] += 1;
            }
        }
        if !pointed[v] {
            return Err(PptError::NotPointed(map.vertex_id(v).to_string()));
        }
    }
    let balanced = map.is_map_balanced();
    let ends = map.end_faces();
    let want_end: [usize; 2] = match (balanced, real.surface()) {
        (true, _) => [0, 0],
        (false, FlatSurface::Cylinder) => [1, 1],
        (false, FlatSurface::Cone(2)) => [2, 0],
        (false, FlatSurface::Cone(_)) => [1, 0],
    };
    for face in 0..f {
        let want = if let Some(i) = ends.iter().position(|&e| e == face) { want_end[i] } else { 3 };
        if face_convex[face] != want {
            return Err(PptError::BadFaceCount(format!(
                "face {face} has {} convex corners, expected {want}",
                face_convex[face]
            )));
        }
    }
    let c: usize = face_convex.iter().sum();
    let (extra, slack) = match (balanced, real.surface()) {
        (true, _) => (3, 3),
        (false, s) => (if s.level() == 2 { 2 } else { 1 }, s.level() as usize),
    };
    // balanced graphs sit in the plane: c = 3(f - 1) and m = 2n - 3
    let want_c = if balanced { 3 * (f - 1) } else { 3 * (f - 2) + extra };
    if c != want_c || c != 2 * m - n || m + slack != 2 * n {
        return Err(PptError::BadFaceCount(format!("c = {c}, f = {f}, n = {n}, m = {m}")));
    }
    Ok(AngleReport { quotient_graph: map, face_convex, pointed, balanced, c, f, n, m })
}

/// Whether the surface carries graphs of the given level.
pub fn check_surface_level<S>(group: &SymmetryGroup<S>, level: u8) -> Result<(), PptError> {
    let surface = FlatSurface::of(group);
    if surface.level() == level {
        Ok(())
    } else {
        Err(PptError::SurfaceLevelMismatch(format!("{surface:?} carries (2,3,{})-tight graphs", surface.level())))
    }
}

/// A validated base configuration, named like [`Base::map`].
pub fn realize_ppt_base<S: Scalar>(base: Base, group: &SymmetryGroup<S>) -> Result<PptRealization<S>, PptError> {
    let surface = FlatSurface::of(group);
    let pt = |a: (i64, i64), b: (i64, i64)| -> Pt<S> {
        let x = Pt::from_ratios(a, b);
        match group {
            SymmetryGroup::Translation { v } => v.scale(&x.x).add(&v.perp().scale(&x.y)),
            SymmetryGroup::Rotation { center, .. } => x.add(center),
        }
    };
    let edge = |id: &str, tail, head, g| PptEdge { id: id.into(), tail, head, g };
    let (pos, edges) = match (base, surface) {
        (Base::K, FlatSurface::Cylinder) => (vec![pt((0, 1), (0, 1)), pt((1, 4), (1, 4))], vec![edge("e0", 0, 1, 0)]),
        (Base::K, FlatSurface::Cone(_)) => (vec![pt((2, 1), (0, 1)), pt((3, 1), (1, 2))], vec![edge("e0", 0, 1, 0)]),
        (Base::L, FlatSurface::Cylinder) => {
            (vec![pt((0, 1), (0, 1)), pt((1, 2), (1, 4))], vec![edge("e0", 0, 1, 0), edge("e1", 0, 1, -1)])
        }
        (Base::L, FlatSurface::Cone(2)) => {
            (vec![pt((1, 1), (0, 1)), pt((0, 1), (1, 1))], vec![edge("e0", 0, 1, 0), edge("e1", 1, 0, 1)])
        }
        (Base::M, FlatSurface::Cone(k)) if k >= 3 => (vec![pt((1, 1), (0, 1))], vec![edge("e0", 0, 0, 1)]),
        (b, s) => {
            return Err(PptError::SurfaceLevelMismatch(format!("{s:?} has no configuration for base {b:?}")));
        }
    };
    let template = base.map();
    let ids = template.vertex_ids().to_vec();
    let real = PptRealization { group: group.clone(), ids, pos, edges, provenance: None };
    Ok(PStage::new(real, template)?.real)
}

/// A realization identified with a labelled map, ids and edge directions
/// included.
struct PStage<S> {
    real: PptRealization<S>,
    map: AnnulusMap,
}

impl<S: Scalar> PStage<S> {
    fn new(real: PptRealization<S>, map: AnnulusMap) -> Result<PStage<S>, PptError> {
        PStage::new_near(real, map, None)
    }

    fn new_near(mut real: PptRealization<S>, map: AnnulusMap, fresh: Option<&[bool]>) -> Result<PStage<S>, PptError> {
        let got = validate_near(&real, fresh)?.quotient_graph;
        let (iso, _) = find_isomorphism(&got, &map, false)
            .ok_or_else(|| PptError::Malformed("quotient differs from the expected map".into()))?;
        // reorder vertices and edges so indices agree with the map
        let mut slot = vec![0; got.n_vertices()];
        for (v, s) in slot.iter_mut().enumerate() {
            *s = map.origin(iso[got.rotation(v)[0].index()]);
        }
        let mut pos = vec![None; slot.len()];
        for (v, p) in real.pos.drain(..).enumerate() {
            pos[slot[v]] = Some(p);
        }
        real.pos = pos.into_iter().map(|p| p.expect("isomorphism is a bijection")).collect();
        real.ids = map.vertex_ids().to_vec();
        let mut edges = vec![None; real.edges.len()];
        for (k, e) in real.edges.drain(..).enumerate() {
            let d = iso[Dart::new(k, true).index()];
            let (tail, head, g) = if d.is_plus() { (e.tail, e.head, e.g) } else { (e.head, e.tail, -e.g) };
            edges[d.edge()] =
                Some(PptEdge { id: map.edges()[d.edge()].id.clone(), tail: slot[tail], head: slot[head], g });
        }
        real.edges = edges.into_iter().map(|e| e.expect("isomorphism is a bijection")).collect();
        Ok(PStage { real, map })
    }
}

/// The restored edges of a split with the old dart each one copies.
fn restores(split: &Split, map: &AnnulusMap) -> Result<Vec<(String, bool, Dart)>, PptError> {
    let bad = |m: &str| PptError::Move(MoveError::BadPartition(m.to_string()));
    let res = |r: &crate::moves::DartRef| r.resolve(map).ok_or_else(|| bad(&format!("unknown dart {r}")));
    match split {
        Split::Triangle(t) => {
            let anchor = match t.face_choice {
                FaceChoice::AfterArc => t.kept.first(),
                FaceChoice::BeforeArc => t.kept.last(),
            }
            .ok_or_else(|| bad("kept arc is empty"))?;
            Ok(vec![(t.restore.id.clone(), t.restore.tail_at_split, res(anchor)?)])
        }
        Split::Quad(q) => {
            let a = if q.restore_a.on_moved { q.kept.first() } else { q.moved.last() };
            let b = if q.restore_b.on_moved { q.kept.last() } else { q.moved.first() };
            Ok(vec![
                (q.restore_a.id.clone(), q.restore_a.tail_at_split, res(a.ok_or_else(|| bad("no anchor"))?)?),
                (q.restore_b.id.clone(), q.restore_b.tail_at_split, res(b.ok_or_else(|| bad("no anchor"))?)?),
            ])
        }
    }
}

/// Directions strictly inside each sector between consecutive incident
/// edges and reversed edges at `z`.
fn sector_directions<S: Scalar>(real: &PptRealization<S>, map: &AnnulusMap, z: usize) -> Vec<Pt<S>> {
    let unit = |p: &Pt<S>| {
        let l1 = p.x.abs_s() + p.y.abs_s();
        Pt::new(p.x.clone() / l1.clone(), p.y.clone() / l1)
    };
    let mut dirs: Vec<Pt<S>> = Vec::new();
    for &d in map.rotation(z) {
        let u = unit(&real.dart_dir(d));
        dirs.push(Pt::new(-u.x.clone(), -u.y.clone()));
        dirs.push(u);
    }
    dirs.sort_by(angle_cmp);
    dirs.dedup_by(|a, b| a.cross(b).sign() == Ordering::Equal && a.dot(b).sign() == Ordering::Greater);
    let mut out = Vec::new();
    for i in 0..dirs.len() {
        let (a, b) = (&dirs[i], &dirs[(i + 1) % dirs.len()]);
        let exact = if dirs.len() > 1 && a.cross(b).sign() == Ordering::Greater { a.add(b) } else { a.perp() };
        out.push(snap(&exact, a, b).unwrap_or(exact));
    }
    out
}

/// A dyadic direction close to `d` that is still strictly inside the ccw
/// sector from `a` to `b`. Small coordinates keep later arithmetic cheap.
fn snap<S: Scalar>(d: &Pt<S>, a: &Pt<S>, b: &Pt<S>) -> Option<Pt<S>> {
    let inside = |x: &Pt<S>| {
        let pos = |u: &Pt<S>, w: &Pt<S>| u.cross(w).sign() == Ordering::Greater;
        if pos(a, b) {
            pos(a, x) && pos(x, b)
        } else {
            // outside the closed complementary sector from b to a
            !(b.cross(x).sign() != Ordering::Less && x.cross(a).sign() != Ordering::Less)
        }
    };
    let (dx, dy) = d.to_f64();
    let scale = dx.abs().max(dy.abs());
    if !(scale > 0.0) {
        return None;
    }
    [8, 16, 24].into_iter().find_map(|bits| {
        let den = 1i64 << bits;
        let round = |x: f64| (x / scale * den as f64).round() as i64;
        let c = Pt::new(S::from_ratio(round(dx), den), S::from_ratio(round(dy), den));
        (!c.is_zero_vec() && inside(&c)).then_some(c)
    })
}

fn min_distance<S: Scalar>(real: &PptRealization<S>, z: usize) -> f64 {
    let p = &real.pos[z];
    let mut best = f64::INFINITY;
    let dot = Seg::new(p.clone(), p.clone());
    for q in &real.pos {
        for g in real.group.candidates(&dot, &Seg::new(q.clone(), q.clone())) {
            let d = p.dist_f64(&real.group.apply(g, q));
            if d > 1e-12 && d < best {
                best = d;
            }
        }
    }
    for e in &real.edges {
        let s = real.seg(e);
        for g in real.group.candidates(&dot, &s) {
            let s = real.group.apply_seg(g, &s);
            let d = dist_to_segment(p, &s);
            if d > 1e-12 && d < best {
                best = d;
            }
        }
    }
    if best.is_finite() {
        best
    } else {
        1.0
    }
}

fn dist_to_segment<S: Scalar>(p: &Pt<S>, s: &Seg<S>) -> f64 {
    let (px, py) = p.to_f64();
    let (ax, ay) = s.p.to_f64();
    let (bx, by) = s.q.to_f64();
    let (ux, uy) = (bx - ax, by - ay);
    let len2 = ux * ux + uy * uy;
    let t = if len2 > 0.0 { (((px - ax) * ux + (py - ay) * uy) / len2).clamp(0.0, 1.0) } else { 0.0 };
    ((px - ax - t * ux).powi(2) + (py - ay - t * uy).powi(2)).sqrt()
}

fn apply_pstage<S: Scalar>(st: &PStage<S>, split: &Split, budget: u32) -> Result<PStage<S>, PptError> {
    let next = split.apply(&st.map)?;
    let (target, new) = match split {
        Split::Triangle(t) => (&t.target_vertex, &t.new_vertex),
        Split::Quad(q) => (&q.target_vertex, &q.new_vertex),
    };
    let real = &st.real;
    let z = st
        .map
        .vertex_index(target)
        .ok_or_else(|| PptError::Move(MoveError::BadPartition(format!("unknown vertex {target}"))))?;
    let anchors = restores(split, &st.map)?;
    let pivot = match split {
        Split::Triangle(t) => Some(t.pivot_edge.id.clone()),
        Split::Quad(_) => None,
    };
    let old: BTreeMap<&str, &PptEdge> = real.edges.iter().map(|e| (e.id.as_str(), e)).collect();
    let mut ids = real.ids.clone();
    ids.push(new.clone());
    let index: BTreeMap<&str, usize> = ids.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
    let mut edges = Vec::new();
    for e in next.edges() {
        let tail = index[next.vertex_id(e.tail)];
        let head = index[next.vertex_id(e.head)];
        let g = if let Some(o) = old.get(e.id.as_str()) {
            o.g
        } else if pivot.as_deref() == Some(e.id.as_str()) {
            0
        } else {
            let (_, tail_at_split, d) = anchors.iter().find(|(id, ..)| *id == e.id).ok_or_else(|| {
                PptError::Move(MoveError::BadPartition(format!("edge {} has no origin in the split", e.id)))
            })?;
            let a = &real.edges[d.edge()];
            // offset of the far end of the anchor as seen from the split vertex
            let off = if d.is_plus() { a.g } else { -a.g };
            if *tail_at_split {
                off
            } else {
                -off
            }
        };
        edges.push(PptEdge { id: e.id.clone(), tail, head, g });
    }
    let dirs = sector_directions(real, &st.map, z);
    let mover_slots = [z, ids.len() - 1];
    // small first steps save halving rounds; floats need room above the tolerance
    let step0 = min_distance(real, z) / if S::EXACT { 64.0 } else { 4.0 };
    let mut eps = S::one();
    let mut val = 1.0;
    for d in &dirs {
        let l = d.to_f64();
        let len = (l.0 * l.0 + l.1 * l.1).sqrt();
        while val * len > step0 {
            eps = eps.half();
            val /= 2.0;
        }
    }
    for _ in 0..budget {
        for d in &dirs {
            for &mover in &mover_slots {
                let mut pos = real.pos.clone();
                pos.push(real.pos[z].clone());
                pos[mover] = real.pos[z].add(&d.scale(&eps));
                let cand = PptRealization {
                    group: real.group.clone(),
                    ids: ids.clone(),
                    pos,
                    edges: edges.clone(),
                    provenance: None,
                };
                let mut fresh = vec![false; ids.len()];
                fresh[z] = true;
                fresh[ids.len() - 1] = true;
                if let Ok(next_stage) = PStage::new_near(cand, next.clone(), Some(&fresh)) {
                    return Ok(next_stage);
                }
            }
        }
        eps = eps.half();
    }
    Err(PptError::EpsilonExhausted(budget))
}

/// Applies one split to a realization whose quotient is `current`.
pub fn ppt_split<S: Scalar>(
    real: &PptRealization<S>,
    current: &AnnulusMap,
    step: &Split,
    budget: u32,
) -> Result<(PptRealization<S>, AnnulusMap), PptError> {
    let st = PStage::new(real.clone(), current.clone())?;
    let next = apply_pstage(&st, step, budget)?;
    Ok((next.real, next.map))
}

pub fn ppt_triangle_split<S: Scalar>(
    real: &PptRealization<S>,
    current: &AnnulusMap,
    step: &TriangleSplit,
) -> Result<(PptRealization<S>, AnnulusMap), PptError> {
    ppt_split(real, current, &Split::Triangle(step.clone()), DEFAULT_BUDGET)
}

pub fn ppt_quad_split<S: Scalar>(
    real: &PptRealization<S>,
    current: &AnnulusMap,
    step: &QuadSplit,
) -> Result<(PptRealization<S>, AnnulusMap), PptError> {
    ppt_split(real, current, &Split::Quad(step.clone()), DEFAULT_BUDGET)
}

/// Replays a construction sequence into a validated pseudotriangulation.
pub fn realize_ppt<S: Scalar>(
    seq: &ConstructionSequence,
    group: SymmetryGroup<S>,
) -> Result<PptRealization<S>, PptError> {
    realize_ppt_with_budget(seq, group, DEFAULT_BUDGET)
}

pub fn realize_ppt_with_budget<S: Scalar>(
    seq: &ConstructionSequence,
    group: SymmetryGroup<S>,
    budget: u32,
) -> Result<PptRealization<S>, PptError> {
    check_surface_level(&group, seq.level)?;
    let base = realize_ppt_base(seq.base, &group)?;
    let mut st = PStage::new(base, seq.base.map())?;
    for step in &seq.steps {
        st = apply_pstage(&st, step, budget)?;
    }
    let mut real = st.real;
    real.provenance = Some(seq.clone());
    Ok(real)
}

/// Realizes a tight map, trying other decompositions when a split finds
/// no placement.
pub fn realize_ppt_map<S: Scalar>(
    map: &AnnulusMap,
    l: u8,
    group: SymmetryGroup<S>,
) -> Result<PptRealization<S>, PptError> {
    check_surface_level(&group, l)?;
    let mut base = |b: Base, reduced: &AnnulusMap| PStage::new(realize_ppt_base(b, &group)?, reduced.clone());
    let mut step = |st: &PStage<S>, split: &Split| apply_pstage(st, split, DEFAULT_BUDGET);
    let (st, seq) = replay_with_backtracking(map, l, MAX_FAILED_SPLITS, &mut base, &mut step)?;
    let mut real = st.real;
    real.provenance = Some(seq);
    Ok(real)
}

/// Outcome of the rigidity test for rotational symmetry.
#[derive(Clone, Debug)]
pub struct RigidityVerdict<S> {
    pub rigid: bool,
    /// A symmetric pointed pseudotriangulation with this quotient.
    pub witness: Option<PptRealization<S>>,
    /// Edges of a subgraph breaking (2,3,1)-sparsity, by id.
    pub violator: Option<Vec<String>>,
    /// Edges missing to tightness when the map is sparse but not tight.
    pub deficiency: i64,
}

/// Minimal rigidity of a planar graph with free rotational symmetry of
/// order `k ≥ 3`, decided by (2,3,1)-tightness of its quotient.
pub fn decide_symmetric_rigidity<S: Scalar>(
    map: &AnnulusMap,
    group: &SymmetryGroup<S>,
) -> Result<RigidityVerdict<S>, PptError> {
    match group.order() {
        Some(k) if k >= 3 => {}
        Some(k) => return Err(PptError::UnsupportedGroup(format!("rotations of order {k} are not covered"))),
        None => return Err(PptError::UnsupportedGroup("translations are not rotations".into())),
    }
    if is_tight(map, 1) {
        let witness = realize_ppt_map(map, 1, group.clone())?;
        return Ok(RigidityVerdict { rigid: true, witness: Some(witness), violator: None, deficiency: 0 });
    }
    let verdict = check_sparse(map, 1);
    let violator = verdict.violator.map(|s| s.members.iter().map(|&e| map.edges()[e].id.clone()).collect());
    // balanced maps complete within their class, to 2n - 3 edges
    let slack = if map.is_map_balanced() { 3 } else { 1 };
    let deficiency = 2 * map.n_vertices() as i64 - slack - map.n_edges() as i64;
    Ok(RigidityVerdict { rigid: false, witness: None, violator, deficiency })
}
