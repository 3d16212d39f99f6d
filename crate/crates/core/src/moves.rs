//! Triangle and quadrilateral contractions and their inverse vertex splits.
//!
//! Every contraction returns the split that undoes it, and every split can be
//! undone by the contraction its record describes. Records refer to darts by
//! edge id and sign so they stay meaningful across maps.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annulus_map::{AnnulusMap, Dart, Edge, MapError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MoveError {
    #[error("face has degree {0}, expected 3 or 4")]
    WrongDegree(usize),
    #[error("pivot edge is a loop")]
    LoopPivot,
    #[error("not a contractible triangle: {0}")]
    NotTriangle(String),
    #[error("not a contractible quadrilateral: {0}")]
    NotQuad(String),
    #[error("diagonal endpoints coincide")]
    DiagonalDegenerate,
    #[error("bad partition: {0}")]
    BadPartition(String),
    #[error("face walk matches no catalogued shape")]
    Uncatalogued,
    #[error("result is not a valid map: {0}")]
    Map(#[from] MapError),
}

/// A dart named by its edge id and direction.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct DartRef {
    pub edge: String,
    pub plus: bool,
}

impl DartRef {
    pub fn new(edge: &str, plus: bool) -> Self {
        DartRef { edge: edge.to_string(), plus }
    }
    pub fn twin(&self) -> Self {
        DartRef { edge: self.edge.clone(), plus: !self.plus }
    }
    pub fn of(map: &AnnulusMap, d: Dart) -> Self {
        DartRef { edge: map.edges()[d.edge()].id.clone(), plus: d.is_plus() }
    }
    pub fn resolve(&self, map: &AnnulusMap) -> Option<Dart> {
        map.edge_index(&self.edge).map(|e| Dart::new(e, self.plus))
    }
}

impl fmt::Display for DartRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.edge, if self.plus { '+' } else { '-' })
    }
}

impl fmt::Debug for DartRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl From<DartRef> for String {
    fn from(d: DartRef) -> String {
        d.to_string()
    }
}

impl TryFrom<String> for DartRef {
    type Error = String;
    fn try_from(mut s: String) -> Result<Self, String> {
        let plus = match s.pop() {
            Some('+') => true,
            Some('-' | '\u{2212}') => false,
            _ => return Err(format!("dart {s:?} lacks a sign")),
        };
        if s.is_empty() {
            return Err("dart without an edge id".into());
        }
        Ok(DartRef { edge: s, plus })
    }
}

/// Where a split's new triangle sits relative to the moved arc.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaceChoice {
    /// The anchor is the first kept dart, right after the arc.
    AfterArc,
    /// The anchor is the last kept dart, right before the arc.
    BeforeArc,
}

/// An edge created by a split. `tail_at_split` puts its tail on the split
/// side (the moved vertex for the pivot) rather than the far end.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NewEdge {
    pub id: String,
    pub tail_at_split: bool,
}

/// Inverse of a triangle contraction.
///
/// The rotation at `target_vertex` is cyclically `moved ++ kept`. The moved
/// arc goes to a new endpoint X, the kept darts stay at Y, the pivot joins X
/// and Y, and the restore edge joins X to the far end of the anchor.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TriangleSplit {
    pub target_vertex: String,
    pub new_vertex: String,
    /// Whether X (the moved side) carries `new_vertex`; otherwise Y does.
    pub new_on_moved: bool,
    pub moved: Vec<DartRef>,
    pub kept: Vec<DartRef>,
    pub face_choice: FaceChoice,
    pub pivot_edge: NewEdge,
    pub restore: NewEdge,
}

/// A re-inserted quadrilateral edge. It sits on X when `on_moved`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuadRestore {
    pub id: String,
    pub on_moved: bool,
    pub tail_at_split: bool,
}

/// Inverse of a quadrilateral contraction.
///
/// X receives `moved`, Y receives `kept`; the diagonal X–Y of the new quad
/// face is not an edge. `restore_a` closes the gap after the moved arc and
/// `restore_b` the gap after the kept arc.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuadSplit {
    pub target_vertex: String,
    pub new_vertex: String,
    pub new_on_moved: bool,
    pub moved: Vec<DartRef>,
    pub kept: Vec<DartRef>,
    pub restore_a: QuadRestore,
    pub restore_b: QuadRestore,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Split {
    Triangle(TriangleSplit),
    Quad(QuadSplit),
}

impl Split {
    pub fn apply(&self, map: &AnnulusMap) -> Result<AnnulusMap, MoveError> {
        match self {
            Split::Triangle(s) => triangle_split(map, s),
            Split::Quad(s) => quad_split(map, s),
        }
    }
    pub fn is_triangle(&self) -> bool {
        matches!(self, Split::Triangle(_))
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DegenerateFaceClass {
    Quad232VertexRepeat,
    Quad231LoopA,
    Quad231LoopPlusEdge,
    Tri231Loop,
    NonDegenerate,
}

/// Which of the two non-pivot triangle edges a contraction deletes.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TriangleDeletion {
    /// The edge after the pivot in the face walk.
    Next,
    /// The edge before the pivot.
    Prev,
}

/// Quad walk `q1 q2 q3 q4` starting at the chosen diagonal's first corner;
/// `near` deletes `q1` (resp. `q3`), `far` deletes `q2` (resp. `q4`).
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pick {
    Near,
    Far,
}

/// A contraction result with the split that undoes it.
#[derive(Clone, Debug)]
pub struct Contraction<S> {
    pub map: AnnulusMap,
    pub inverse: S,
}

/// Degenerate-walk classification of a cellular face of degree 3 or 4.
pub fn classify_face(map: &AnnulusMap, face: usize) -> Result<DegenerateFaceClass, MoveError> {
    let walk = map.face_darts(face);
    let deg = walk.len();
    if deg != 3 && deg != 4 {
        return Err(MoveError::WrongDegree(deg));
    }
    let verts: BTreeSet<usize> = walk.iter().map(|&d| map.origin(d)).collect();
    let edges: BTreeSet<usize> = walk.iter().map(|d| d.edge()).collect();
    let loops = walk.iter().filter(|d| map.edges()[d.edge()].is_loop()).count();
    let class = match (deg, verts.len(), edges.len(), loops) {
        (3, 3, 3, 0) | (4, 4, 4, 0) => DegenerateFaceClass::NonDegenerate,
        (3, 2, 3, 1) => DegenerateFaceClass::Tri231Loop,
        (4, 3, 4, 0) => DegenerateFaceClass::Quad232VertexRepeat,
        (4, 2, 3, 2) => DegenerateFaceClass::Quad231LoopA,
        (4, 3, 4, 1) => DegenerateFaceClass::Quad231LoopPlusEdge,
        _ => return Err(MoveError::Uncatalogued),
    };
    Ok(class)
}

/// Editable copy of a map keyed by ids.
#[derive(Clone, Debug)]
struct Draft {
    vertices: Vec<String>,
    edges: Vec<(String, String, String)>,
    rotation: Vec<Vec<DartRef>>,
}

impl Draft {
    fn of(map: &AnnulusMap) -> Self {
        let vertices = map.vertex_ids().to_vec();
        let edges =
            map.edges().iter().map(|e| (e.id.clone(), vertices[e.tail].clone(), vertices[e.head].clone())).collect();
        let rotation = map.rotations().iter().map(|r| r.iter().map(|&d| DartRef::of(map, d)).collect()).collect();
        Draft { vertices, edges, rotation }
    }

    fn vpos(&self, v: &str) -> usize {
        self.vertices.iter().position(|x| x == v).expect("vertex present")
    }

    fn origin(&self, d: &DartRef) -> String {
        let e = self.edges.iter().find(|e| e.0 == d.edge).expect("edge present");
        if d.plus {
            e.1.clone()
        } else {
            e.2.clone()
        }
    }

    fn set_origin(&mut self, d: &DartRef, v: &str) {
        let e = self.edges.iter_mut().find(|e| e.0 == d.edge).expect("edge present");
        if d.plus {
            e.1 = v.to_string();
        } else {
            e.2 = v.to_string();
        }
    }

    fn delete_edge(&mut self, id: &str) {
        self.edges.retain(|e| e.0 != id);
        for r in &mut self.rotation {
            r.retain(|d| d.edge != id);
        }
    }

    /// Inserts `new` next to `at` in the rotation holding `at`.
    fn insert_next_to(&mut self, at: &DartRef, new: DartRef, after: bool) {
        for r in &mut self.rotation {
            if let Some(i) = r.iter().position(|d| d == at) {
                r.insert(if after { i + 1 } else { i }, new);
                return;
            }
        }
        panic!("dart {at} not in any rotation");
    }

    fn build(&self, ends: [Option<DartRef>; 2]) -> Result<AnnulusMap, MapError> {
        let edges: Vec<Edge> = self
            .edges
            .iter()
            .map(|(id, t, h)| Edge { id: id.clone(), tail: self.vpos(t), head: self.vpos(h) })
            .collect();
        let eidx = |d: &DartRef| -> Result<Dart, MapError> {
            self.edges
                .iter()
                .position(|e| e.0 == d.edge)
                .map(|i| Dart::new(i, d.plus))
                .ok_or_else(|| MapError::Malformed(format!("unknown dart {d}")))
        };
        let mut rot = Vec::with_capacity(self.rotation.len());
        for r in &self.rotation {
            rot.push(r.iter().map(&eidx).collect::<Result<Vec<_>, _>>()?);
        }
        let ends = [ends[0].as_ref().map(&eidx).transpose()?, ends[1].as_ref().map(&eidx).transpose()?];
        AnnulusMap::build_with_end_darts(self.vertices.clone(), edges, rot, ends)
    }

    /// Contracts a non-loop edge; the merged vertex keeps the smaller id.
    /// Returns (merged id, removed id, rotation of the tail part, rotation of the head part).
    fn contract(&mut self, id: &str) -> (String, String) {
        let (_, u, v) = self.edges.iter().find(|e| e.0 == id).cloned().expect("edge present");
        assert_ne!(u, v, "contracting a loop");
        let part = |rot: &[DartRef], skip: &DartRef| -> Vec<DartRef> {
            let i = rot.iter().position(|d| d == skip).expect("dart at vertex");
            (1..rot.len()).map(|k| rot[(i + k) % rot.len()].clone()).collect()
        };
        let mut merged = part(&self.rotation[self.vpos(&u)], &DartRef::new(id, true));
        merged.extend(part(&self.rotation[self.vpos(&v)], &DartRef::new(id, false)));
        let (keep, gone) = if u < v { (u, v) } else { (v, u) };
        self.edges.retain(|e| e.0 != id);
        for e in &mut self.edges {
            if e.1 == gone {
                e.1 = keep.clone();
            }
            if e.2 == gone {
                e.2 = keep.clone();
            }
        }
        let k = self.vpos(&keep);
        self.rotation[k] = merged;
        let g = self.vpos(&gone);
        self.vertices.remove(g);
        self.rotation.remove(g);
        (keep, gone)
    }
}

/// Re-locates the ends after deletions and contractions.
///
/// Faces only merge across deleted edges, so an end stays with any surviving
/// dart of its face; otherwise it moves across a deleted edge. `key` maps a
/// dart to the piece of face it bounds, which lets a quad face count as two
/// halves once its diagonal is drawn.
fn rewitness_after_contraction(
    map: &AnnulusMap,
    deleted: &BTreeSet<usize>,
    contracted: usize,
    key: &dyn Fn(Dart) -> usize,
) -> [Option<DartRef>; 2] {
    let mut out = [None, None];
    if map.n_edges() == 0 {
        return out;
    }
    for (k, &f) in map.end_faces().iter().enumerate() {
        let start = key(map.face_darts(f)[0]);
        let mut seen = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        'bfs: while let Some(piece) = queue.pop_front() {
            let darts: Vec<Dart> = map.darts().filter(|&d| key(d) == piece).collect();
            let mut walk = darts.clone();
            walk.sort_by_key(|&d| map.face_darts(map.face_of(d)).iter().position(|&x| x == d));
            for &d in &walk {
                if !deleted.contains(&d.edge()) && d.edge() != contracted {
                    out[k] = Some(DartRef::of(map, d));
                    break 'bfs;
                }
            }
            for &d in &walk {
                if deleted.contains(&d.edge()) {
                    let next = key(d.twin());
                    if seen.insert(next) {
                        queue.push_back(next);
                    }
                }
            }
        }
    }
    out
}

/// Contracts `pivot` inside the triangular face `face` and deletes one of
/// its two other edges.
pub fn triangle_contract(
    map: &AnnulusMap,
    face: usize,
    pivot: usize,
    deletion: TriangleDeletion,
) -> Result<Contraction<TriangleSplit>, MoveError> {
    let walk = map.face_darts(face);
    if walk.len() != 3 {
        return Err(MoveError::NotTriangle(format!("face degree {}", walk.len())));
    }
    if !map.is_cellular(face) {
        return Err(MoveError::NotTriangle("face holds an end".into()));
    }
    let i = walk
        .iter()
        .position(|d| d.edge() == pivot)
        .ok_or_else(|| MoveError::NotTriangle("pivot not on the face".into()))?;
    let (t0, t1, t2) = (walk[i], walk[(i + 1) % 3], walk[(i + 2) % 3]);
    let (u, v) = (map.origin(t0), map.target(t0));
    if u == v {
        return Err(MoveError::LoopPivot);
    }
    let es: BTreeSet<usize> = [t0.edge(), t1.edge(), t2.edge()].into();
    if es.len() != 3 {
        return Err(MoveError::NotTriangle("repeated edge on the walk".into()));
    }
    let r = |d: Dart| DartRef::of(map, d);
    // X is the pivot endpoint that loses the restore edge
    let (x, anchor, r_x, face_choice, del) = match deletion {
        TriangleDeletion::Next => (v, r(t2.twin()), r(t1), FaceChoice::BeforeArc, t1.edge()),
        TriangleDeletion::Prev => (u, r(t1), r(t2.twin()), FaceChoice::AfterArc, t2.edge()),
    };
    let e_x = if x == u { r(t0) } else { r(t0.twin()) };
    let xid = map.vertex_id(x).to_string();
    let mut draft = Draft::of(map);
    let u_part = part_after(&draft.rotation[u], &r(t0));
    let v_part = part_after(&draft.rotation[v], &r(t0.twin()));
    let del_id = map.edges()[del].id.clone();
    let keep = |p: Vec<DartRef>| -> Vec<DartRef> { p.into_iter().filter(|d| d.edge != del_id).collect() };
    let (moved, kept) = if x == u { (keep(u_part), keep(v_part)) } else { (keep(v_part), keep(u_part)) };
    debug_assert!(match face_choice {
        FaceChoice::AfterArc => kept.first() == Some(&anchor),
        FaceChoice::BeforeArc => kept.last() == Some(&anchor),
    });
    let (merged, gone) = draft.contract(&map.edges()[t0.edge()].id);
    draft.delete_edge(&del_id);
    let key = |d: Dart| map.face_of(d);
    let ends = rewitness_after_contraction(map, &BTreeSet::from([del]), t0.edge(), &key);
    let out = draft.build(ends)?;
    let inverse = TriangleSplit {
        target_vertex: merged,
        new_vertex: gone.clone(),
        new_on_moved: xid == gone,
        moved,
        kept,
        face_choice,
        pivot_edge: NewEdge { id: e_x.edge.clone(), tail_at_split: e_x.plus },
        restore: NewEdge { id: r_x.edge.clone(), tail_at_split: r_x.plus },
    };
    Ok(Contraction { map: out, inverse })
}

/// Darts of a rotation after `skip`, going once around, excluding `skip`.
fn part_after(rot: &[DartRef], skip: &DartRef) -> Vec<DartRef> {
    let i = rot.iter().position(|d| d == skip).expect("dart at vertex");
    (1..rot.len()).map(|k| rot[(i + k) % rot.len()].clone()).collect()
}

/// Draws the diagonal `diagonal` (0: corners of walk positions 0 and 2,
/// 1: positions 1 and 3) inside the quad face, contracts it, and deletes one
/// edge from each pair of parallel edges this creates.
pub fn quad_contract(
    map: &AnnulusMap,
    face: usize,
    diagonal: usize,
    deletion: [Pick; 2],
) -> Result<Contraction<QuadSplit>, MoveError> {
    let walk = map.face_darts(face);
    if walk.len() != 4 {
        return Err(MoveError::NotQuad(format!("face degree {}", walk.len())));
    }
    if !map.is_cellular(face) {
        return Err(MoveError::NotQuad("face holds an end".into()));
    }
    assert!(diagonal < 2, "diagonal index is 0 or 1");
    let q: Vec<Dart> = (0..4).map(|k| walk[(diagonal + k) % 4]).collect();
    let (v1, v3) = (map.origin(q[0]), map.origin(q[2]));
    if v1 == v3 {
        return Err(MoveError::DiagonalDegenerate);
    }
    let del_a = if deletion[0] == Pick::Near { q[0] } else { q[1] };
    let del_b = if deletion[1] == Pick::Near { q[2] } else { q[3] };
    if del_a.edge() == del_b.edge() {
        return Err(MoveError::BadPartition("both deletions hit the same edge".into()));
    }
    let r = |d: Dart| DartRef::of(map, d);
    let ids = [map.edges()[del_a.edge()].id.clone(), map.edges()[del_b.edge()].id.clone()];
    let keep = |p: Vec<DartRef>| -> Vec<DartRef> { p.into_iter().filter(|d| !ids.contains(&d.edge)).collect() };
    let mut draft = Draft::of(map);
    // with the diagonal drawn, v1 reads q1 .. α(q4) and v3 reads q3 .. α(q2)
    let mut a_full = vec![r(q[0])];
    a_full.extend(part_after(&draft.rotation[v1], &r(q[0])));
    let mut b_full = vec![r(q[2])];
    b_full.extend(part_after(&draft.rotation[v3], &r(q[2])));
    let (moved, kept) = (keep(a_full), keep(b_full));

    // restore_a sits in the gap after the moved arc: the {q3, q4} pair
    let (ra_dart, ra_on_x, ra_anchor) = if deletion[1] == Pick::Far {
        (r(q[3].twin()), true, kept.first().cloned())
    } else {
        (r(q[2]), false, moved.last().cloned())
    };
    let (rb_dart, rb_on_x, rb_anchor) = if deletion[0] == Pick::Near {
        (r(q[0]), true, kept.last().cloned())
    } else {
        (r(q[1].twin()), false, moved.first().cloned())
    };
    let expect_a = if ra_on_x { r(q[2]) } else { r(q[3].twin()) };
    let expect_b = if rb_on_x { r(q[1].twin()) } else { r(q[0]) };
    if ra_anchor.as_ref() != Some(&expect_a) || rb_anchor.as_ref() != Some(&expect_b) {
        return Err(MoveError::NotQuad("an anchoring edge is deleted too".into()));
    }
    let x_id = map.vertex_id(v1).to_string();
    // darts of Q in the half cut off together with q1 q2, and with q3 q4
    let halves: Vec<(Dart, usize)> = vec![(q[0], 0), (q[1], 0), (q[2], 1), (q[3], 1)];
    let nf = map.n_faces();
    let key = |d: Dart| match halves.iter().find(|(x, _)| *x == d) {
        Some(&(_, h)) => nf + h,
        None => map.face_of(d),
    };
    let deleted = BTreeSet::from([del_a.edge(), del_b.edge()]);
    draft.insert_next_to(&r(q[3].twin()), DartRef::new("\u{0}delta", true), true);
    draft.insert_next_to(&r(q[1].twin()), DartRef::new("\u{0}delta", false), true);
    draft.edges.push(("\u{0}delta".into(), x_id.clone(), map.vertex_id(v3).to_string()));
    let (merged, gone) = draft.contract("\u{0}delta");
    draft.delete_edge(&ids[0]);
    draft.delete_edge(&ids[1]);
    let ends = rewitness_after_contraction(map, &deleted, usize::MAX, &key);
    let out = draft.build(ends)?;
    let inverse = QuadSplit {
        target_vertex: merged,
        new_vertex: gone.clone(),
        new_on_moved: x_id == gone,
        moved,
        kept,
        restore_a: QuadRestore { id: ra_dart.edge.clone(), on_moved: ra_on_x, tail_at_split: ra_dart.plus },
        restore_b: QuadRestore { id: rb_dart.edge.clone(), on_moved: rb_on_x, tail_at_split: rb_dart.plus },
    };
    Ok(Contraction { map: out, inverse })
}

/// Checks that `moved ++ kept` is a cyclic reading of the rotation at `z`.
fn check_partition(map: &AnnulusMap, z: usize, moved: &[DartRef], kept: &[DartRef]) -> Result<(), MoveError> {
    let rot: Vec<DartRef> = map.rotation(z).iter().map(|&d| DartRef::of(map, d)).collect();
    let mut seq: Vec<DartRef> = moved.to_vec();
    seq.extend(kept.iter().cloned());
    if seq.len() != rot.len() {
        return Err(MoveError::BadPartition("arcs do not cover the rotation".into()));
    }
    if rot.is_empty() {
        return Ok(());
    }
    let Some(i) = rot.iter().position(|d| *d == seq[0]) else {
        return Err(MoveError::BadPartition(format!("{} is not at the target vertex", seq[0])));
    };
    if (0..rot.len()).all(|k| rot[(i + k) % rot.len()] == seq[k]) {
        Ok(())
    } else {
        Err(MoveError::BadPartition("arcs are not contiguous in the rotation".into()))
    }
}

fn check_fresh(map: &AnnulusMap, vertex: &str, edges: &[&str]) -> Result<(), MoveError> {
    if map.vertex_index(vertex).is_some() {
        return Err(MoveError::BadPartition(format!("vertex {vertex} already exists")));
    }
    for (k, e) in edges.iter().enumerate() {
        if map.edge_index(e).is_some() || edges[..k].contains(e) || e.is_empty() {
            return Err(MoveError::BadPartition(format!("edge id {e:?} is not fresh")));
        }
    }
    Ok(())
}

/// Splits X off the target vertex and re-inserts the triangle.
pub fn triangle_split(map: &AnnulusMap, spec: &TriangleSplit) -> Result<AnnulusMap, MoveError> {
    let z = map
        .vertex_index(&spec.target_vertex)
        .ok_or_else(|| MoveError::BadPartition(format!("unknown vertex {}", spec.target_vertex)))?;
    check_fresh(map, &spec.new_vertex, &[&spec.pivot_edge.id, &spec.restore.id])?;
    check_partition(map, z, &spec.moved, &spec.kept)?;
    let anchor = match spec.face_choice {
        FaceChoice::AfterArc => spec.kept.first(),
        FaceChoice::BeforeArc => spec.kept.last(),
    }
    .cloned()
    .ok_or_else(|| MoveError::BadPartition("nothing kept to anchor the triangle".into()))?;
    let zid = spec.target_vertex.clone();
    let (xid, yid) =
        if spec.new_on_moved { (spec.new_vertex.clone(), zid.clone()) } else { (zid.clone(), spec.new_vertex.clone()) };
    let e_x = DartRef::new(&spec.pivot_edge.id, spec.pivot_edge.tail_at_split);
    let r_x = DartRef::new(&spec.restore.id, spec.restore.tail_at_split);
    let mut draft = Draft::of(map);
    for d in &spec.moved {
        draft.set_origin(d, &xid);
    }
    for d in &spec.kept {
        draft.set_origin(d, &yid);
    }
    let mut x_rot = spec.moved.clone();
    match spec.face_choice {
        FaceChoice::AfterArc => x_rot.extend([r_x.clone(), e_x.clone()]),
        FaceChoice::BeforeArc => x_rot.extend([e_x.clone(), r_x.clone()]),
    }
    let mut y_rot = vec![e_x.twin()];
    y_rot.extend(spec.kept.iter().cloned());
    let (old_rot, new_rot) = if spec.new_on_moved { (y_rot, x_rot) } else { (x_rot, y_rot) };
    draft.rotation[z] = old_rot;
    draft.vertices.push(spec.new_vertex.clone());
    draft.rotation.push(new_rot);
    let w = draft.origin(&anchor.twin());
    let pivot = if e_x.plus { (xid.clone(), yid.clone()) } else { (yid.clone(), xid.clone()) };
    draft.edges.push((spec.pivot_edge.id.clone(), pivot.0, pivot.1));
    let restore = if r_x.plus { (xid.clone(), w) } else { (w, xid.clone()) };
    draft.edges.push((spec.restore.id.clone(), restore.0, restore.1));
    draft.insert_next_to(&anchor.twin(), r_x.twin(), spec.face_choice == FaceChoice::AfterArc);

    // the triangle lies right of the pivot dart entering the corner at X
    let tri_dart = match spec.face_choice {
        FaceChoice::AfterArc => e_x.clone(),
        FaceChoice::BeforeArc => e_x.twin(),
    };
    let plain = draft.build([Some(e_x.clone()), Some(e_x.clone())])?;
    let tri = plain.face_of(tri_dart.resolve(&plain).expect("pivot present"));
    let fallback = |_: &[Dart]| outer_dart(&plain, &spec.restore.id, tri);
    let ends = rewitness_after_split(map, &plain, tri, &fallback);
    Ok(draft.build(ends)?)
}

/// Re-locates the ends after a split that created the face `new_face`.
///
/// An end stays with any old dart of its face that is outside the new face.
/// If every such dart moved into the new face, the old face was a merge with
/// a region bounded only by restored edges, and `fallback` picks the outer
/// dart of the right restored edge from those old darts.
fn rewitness_after_split(
    old: &AnnulusMap,
    new: &AnnulusMap,
    new_face: usize,
    fallback: &dyn Fn(&[Dart]) -> Option<DartRef>,
) -> [Option<DartRef>; 2] {
    let mut out = [None, None];
    if old.n_edges() == 0 {
        return out;
    }
    for (k, &f) in old.end_faces().iter().enumerate() {
        let darts: Vec<Dart> =
            old.face_darts(f).iter().map(|&d| DartRef::of(old, d).resolve(new).expect("old dart survives")).collect();
        out[k] = match darts.iter().find(|&&d| new.face_of(d) != new_face) {
            Some(&d) => Some(DartRef::of(new, d)),
            None => fallback(&darts),
        };
    }
    out
}

/// The dart of `edge` outside `face`.
fn outer_dart(map: &AnnulusMap, edge: &str, face: usize) -> Option<DartRef> {
    let e = map.edge_index(edge)?;
    [Dart::new(e, true), Dart::new(e, false)].into_iter().find(|&d| map.face_of(d) != face).map(|d| DartRef::of(map, d))
}

/// Splits the target vertex across a new quadrilateral face.
pub fn quad_split(map: &AnnulusMap, spec: &QuadSplit) -> Result<AnnulusMap, MoveError> {
    let z = map
        .vertex_index(&spec.target_vertex)
        .ok_or_else(|| MoveError::BadPartition(format!("unknown vertex {}", spec.target_vertex)))?;
    if spec.restore_a.id == spec.restore_b.id {
        return Err(MoveError::BadPartition("the same edge is restored twice".into()));
    }
    check_fresh(map, &spec.new_vertex, &[&spec.restore_a.id, &spec.restore_b.id])?;
    check_partition(map, z, &spec.moved, &spec.kept)?;
    let (a, b) = (&spec.moved, &spec.kept);
    let need = |o: Option<&DartRef>, what: &str| {
        o.cloned().ok_or_else(|| MoveError::BadPartition(format!("no dart to anchor {what}")))
    };
    // (anchor, insert after α(anchor))
    let anchor_a = if spec.restore_a.on_moved {
        (need(b.first(), "restore_a")?, true)
    } else {
        (need(a.last(), "restore_a")?, false)
    };
    let anchor_b = if spec.restore_b.on_moved {
        (need(b.last(), "restore_b")?, false)
    } else {
        (need(a.first(), "restore_b")?, true)
    };
    let zid = spec.target_vertex.clone();
    let (xid, yid) =
        if spec.new_on_moved { (spec.new_vertex.clone(), zid.clone()) } else { (zid.clone(), spec.new_vertex.clone()) };
    let ra = DartRef::new(&spec.restore_a.id, spec.restore_a.tail_at_split);
    let rb = DartRef::new(&spec.restore_b.id, spec.restore_b.tail_at_split);
    let mut draft = Draft::of(map);
    for d in a {
        draft.set_origin(d, &xid);
    }
    for d in b {
        draft.set_origin(d, &yid);
    }
    let mut x_rot = a.clone();
    let mut y_rot = b.clone();
    if spec.restore_a.on_moved {
        x_rot.push(ra.clone());
    }
    let x_delta = x_rot.len();
    if spec.restore_b.on_moved {
        x_rot.push(rb.clone());
    }
    if !spec.restore_b.on_moved {
        y_rot.push(rb.clone());
    }
    if !spec.restore_a.on_moved {
        y_rot.push(ra.clone());
    }
    if x_rot.is_empty() || y_rot.is_empty() {
        return Err(MoveError::BadPartition("a split endpoint would be isolated".into()));
    }
    let first_after_delta = x_rot[x_delta % x_rot.len()].clone();
    let (old_rot, new_rot) = if spec.new_on_moved { (y_rot, x_rot) } else { (x_rot, y_rot) };
    draft.rotation[z] = old_rot;
    draft.vertices.push(spec.new_vertex.clone());
    draft.rotation.push(new_rot);
    for (r, on_x, (anchor, after)) in
        [(&ra, spec.restore_a.on_moved, &anchor_a), (&rb, spec.restore_b.on_moved, &anchor_b)]
    {
        let side = if on_x { xid.clone() } else { yid.clone() };
        let w = draft.origin(&anchor.twin());
        let ends = if r.plus { (side, w) } else { (w, side) };
        draft.edges.push((r.edge.clone(), ends.0, ends.1));
        draft.insert_next_to(&anchor.twin(), r.twin(), *after);
    }
    let plain = draft.build([Some(ra.clone()), Some(ra.clone())])?;
    let start = first_after_delta.resolve(&plain).expect("dart present");
    let qf = plain.face_of(start);
    let walk = plain.face_darts(qf);
    if walk.len() != 4 {
        return Err(MoveError::BadPartition(format!("split face has degree {}", walk.len())));
    }
    // from the corner at X the walk reads q1 q2 q3 q4; restore_b closes
    // the q1 q2 half and restore_a the q3 q4 half
    let offset = walk.iter().position(|&d| d == start).unwrap();
    let fallback = |darts: &[Dart]| {
        let p = darts.iter().find_map(|d| walk.iter().position(|x| x == d))?;
        let id = if (p + 4 - offset) % 4 < 2 { &spec.restore_b.id } else { &spec.restore_a.id };
        outer_dart(&plain, id, qf)
    };
    let ends = rewitness_after_split(map, &plain, qf, &fallback);
    Ok(draft.build(ends)?)
}

impl TriangleSplit {
    /// The contraction undoing this split inside `split_map`:
    /// `(face, pivot edge, deletion)`.
    pub fn contraction_in(&self, split_map: &AnnulusMap) -> Option<(usize, usize, TriangleDeletion)> {
        let e_x = DartRef::new(&self.pivot_edge.id, self.pivot_edge.tail_at_split);
        let (tri, deletion) = match self.face_choice {
            FaceChoice::AfterArc => (e_x, TriangleDeletion::Prev),
            FaceChoice::BeforeArc => (e_x.twin(), TriangleDeletion::Next),
        };
        let d = tri.resolve(split_map)?;
        Some((split_map.face_of(d), d.edge(), deletion))
    }
}

impl QuadSplit {
    /// The contraction undoing this split inside `split_map`:
    /// `(face, diagonal, deletion)`.
    pub fn contraction_in(&self, split_map: &AnnulusMap) -> Option<(usize, usize, [Pick; 2])> {
        let ra = DartRef::new(&self.restore_a.id, self.restore_a.tail_at_split);
        let rb = DartRef::new(&self.restore_b.id, self.restore_b.tail_at_split);
        let start = if self.restore_b.on_moved {
            rb
        } else if let Some(a1) = self.moved.first() {
            a1.clone()
        } else {
            ra
        };
        let start = start.resolve(split_map)?;
        let face = split_map.face_of(start);
        let offset = split_map.face_darts(face).iter().position(|&d| d == start)?;
        let pick_b = if self.restore_b.on_moved { Pick::Near } else { Pick::Far };
        let pick_a = if self.restore_a.on_moved { Pick::Far } else { Pick::Near };
        Some(if offset < 2 { (face, offset, [pick_b, pick_a]) } else { (face, offset - 2, [pick_a, pick_b]) })
    }
}

/// Fresh ids for the vertex and two edges a split creates.
#[derive(Clone, Debug)]
pub struct FreshIds {
    pub vertex: String,
    pub edges: [String; 2],
}

impl FreshIds {
    /// `v{n}` and `e{m}` style ids that do not occur in `map`.
    pub fn for_map(map: &AnnulusMap) -> Self {
        let next = |prefix: char, taken: &dyn Fn(&str) -> bool, from: usize| {
            (from..).map(|k| format!("{prefix}{k}")).find(|s| !taken(s)).unwrap()
        };
        let vertex = next('v', &|s| map.vertex_index(s).is_some(), map.n_vertices());
        let e0 = next('e', &|s| map.edge_index(s).is_some(), map.n_edges());
        let e1 = next('e', &|s| map.edge_index(s).is_some() || s == e0, map.n_edges() + 1);
        FreshIds { vertex, edges: [e0, e1] }
    }
}

fn random_partition<R: rand::Rng>(
    map: &AnnulusMap,
    rng: &mut R,
    z: usize,
    moved_len: usize,
) -> (Vec<DartRef>, Vec<DartRef>) {
    let rot: Vec<DartRef> = map.rotation(z).iter().map(|&d| DartRef::of(map, d)).collect();
    let d = rot.len();
    let s = if d == 0 { 0 } else { rng.gen_range(0..d) };
    let seq: Vec<DartRef> = (0..d).map(|k| rot[(s + k) % d].clone()).collect();
    (seq[..moved_len].to_vec(), seq[moved_len..].to_vec())
}

/// A uniformly drawn well-formed triangle split spec, or `None` when the map
/// has no edge to anchor on.
pub fn random_triangle_split<R: rand::Rng>(map: &AnnulusMap, rng: &mut R, ids: &FreshIds) -> Option<TriangleSplit> {
    if map.n_edges() == 0 {
        return None;
    }
    let z = rng.gen_range(0..map.n_vertices());
    let d = map.degree(z);
    if d == 0 {
        return None;
    }
    let len = rng.gen_range(0..d);
    let (moved, kept) = random_partition(map, rng, z, len);
    Some(TriangleSplit {
        target_vertex: map.vertex_id(z).to_string(),
        new_vertex: ids.vertex.clone(),
        new_on_moved: rng.gen(),
        moved,
        kept,
        face_choice: if rng.gen() { FaceChoice::AfterArc } else { FaceChoice::BeforeArc },
        pivot_edge: NewEdge { id: ids.edges[0].clone(), tail_at_split: rng.gen() },
        restore: NewEdge { id: ids.edges[1].clone(), tail_at_split: rng.gen() },
    })
}

/// A random quad split spec; may be ill-formed, in which case `quad_split`
/// rejects it.
pub fn random_quad_split<R: rand::Rng>(map: &AnnulusMap, rng: &mut R, ids: &FreshIds) -> Option<QuadSplit> {
    if map.n_edges() == 0 {
        return None;
    }
    let z = rng.gen_range(0..map.n_vertices());
    let d = map.degree(z);
    if d == 0 {
        return None;
    }
    let len = rng.gen_range(0..=d);
    let (moved, kept) = random_partition(map, rng, z, len);
    Some(QuadSplit {
        target_vertex: map.vertex_id(z).to_string(),
        new_vertex: ids.vertex.clone(),
        new_on_moved: rng.gen(),
        moved,
        kept,
        restore_a: QuadRestore { id: ids.edges[0].clone(), on_moved: rng.gen(), tail_at_split: rng.gen() },
        restore_b: QuadRestore { id: ids.edges[1].clone(), on_moved: rng.gen(), tail_at_split: rng.gen() },
    })
}

/// Draws a new edge `id` inside `face` from corner `from` to corner `to`,
/// where corner `k` is the gap just before the `k`-th dart of the face walk.
/// An end lying in `face` goes to the side right of the plus dart when the
/// matching `end_on_plus` entry is set.
pub fn add_diagonal(
    map: &AnnulusMap,
    face: usize,
    from: usize,
    to: usize,
    end_on_plus: [bool; 2],
    id: &str,
) -> Result<AnnulusMap, MoveError> {
    if map.edge_index(id).is_some() {
        return Err(MoveError::BadPartition(format!("edge id {id} is taken")));
    }
    let plus = DartRef::new(id, true);
    let mut draft = Draft::of(map);
    if map.n_edges() == 0 {
        // a lone vertex: the only new edge is a loop around one end or both
        let v = draft.vertices[0].clone();
        draft.edges.push((id.to_string(), v.clone(), v));
        draft.rotation[0] = vec![plus.clone(), plus.twin()];
        let pick = |on_plus: bool| Some(if on_plus { plus.clone() } else { plus.twin() });
        return Ok(draft.build([pick(end_on_plus[0]), pick(end_on_plus[1])])?);
    }
    let walk = map.face_darts(face);
    let (a, b) = (walk[from % walk.len()], walk[to % walk.len()]);
    let (u, v) = (map.vertex_id(map.origin(a)).to_string(), map.vertex_id(map.origin(b)).to_string());
    draft.edges.push((id.to_string(), u, v));
    draft.insert_next_to(&DartRef::of(map, a), plus.clone(), false);
    draft.insert_next_to(&DartRef::of(map, b), plus.twin(), false);
    let ends = relocated_ends(map, face, |k| Some(if end_on_plus[k] { plus.clone() } else { plus.twin() }));
    Ok(draft.build(ends)?)
}

/// Hangs a new vertex off corner `corner` of `face`.
pub fn add_pendant(
    map: &AnnulusMap,
    face: usize,
    corner: usize,
    vertex: &str,
    id: &str,
) -> Result<AnnulusMap, MoveError> {
    if map.edge_index(id).is_some() || map.vertex_index(vertex).is_some() {
        return Err(MoveError::BadPartition("pendant ids are taken".into()));
    }
    let plus = DartRef::new(id, true);
    let mut draft = Draft::of(map);
    draft.vertices.push(vertex.to_string());
    draft.rotation.push(vec![plus.twin()]);
    if map.n_edges() == 0 {
        draft.edges.push((id.to_string(), draft.vertices[0].clone(), vertex.to_string()));
        draft.rotation[0] = vec![plus.clone()];
        return Ok(draft.build([Some(plus.clone()), Some(plus)])?);
    }
    let walk = map.face_darts(face);
    let a = walk[corner % walk.len()];
    draft.edges.push((id.to_string(), map.vertex_id(map.origin(a)).to_string(), vertex.to_string()));
    draft.insert_next_to(&DartRef::of(map, a), plus, false);
    let ends = relocated_ends(map, face, |_| None);
    Ok(draft.build(ends)?)
}

/// Old witnesses for ends outside `face`; `inside` chooses for ends in it,
/// falling back to an old dart of the face.
fn relocated_ends(map: &AnnulusMap, face: usize, inside: impl Fn(usize) -> Option<DartRef>) -> [Option<DartRef>; 2] {
    let mut out = [None, None];
    for (k, &f) in map.end_faces().iter().enumerate() {
        let old = Some(DartRef::of(map, map.face_darts(f)[0]));
        out[k] = if f == face { inside(k).or(old) } else { old };
    }
    out
}

/// Number of corners of a face; a lone vertex has one.
pub fn corner_count(map: &AnnulusMap, face: usize) -> usize {
    if map.n_edges() == 0 {
        1
    } else {
        map.face_darts(face).len()
    }
}

/// Removes an edge whose two sides lie in different faces; the ends follow
/// the merged face.
pub fn delete_edge(map: &AnnulusMap, edge: usize) -> Result<AnnulusMap, MoveError> {
    let (p, m) = (Dart::new(edge, true), Dart::new(edge, false));
    if map.face_of(p) == map.face_of(m) {
        return Err(MoveError::BadPartition("edge is a bridge".into()));
    }
    let mut draft = Draft::of(map);
    draft.delete_edge(&map.edges()[edge].id);
    let key = |d: Dart| map.face_of(d);
    let ends = rewitness_after_contraction(map, &BTreeSet::from([edge]), usize::MAX, &key);
    Ok(draft.build(ends)?)
}
