//! Symmetric contact systems of segments.
//!
//! A system stores one segment per orbit. Contacts are found by exact
//! predicates against the group images that can reach each segment, and
//! the quotient map is read off with the rotation at a segment running
//! `P`, right side by increasing parameter, `Q`, left side by decreasing
//! parameter. Ends are located by casting rays.
//!
//! Splits are placed by a search over a one-dimensional layout of the two
//! new segments along the old one; each candidate is instantiated at a
//! shrinking offset and accepted only when the extracted quotient matches
//! the split map.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use thiserror::Error;

use crate::annulus_map::{find_isomorphism, AnnulusMap, Dart, Edge};
use crate::catalog::Base;
use crate::geometry::{line_meet, meet, End, Meeting, Pt, Seg, SymmetryGroup};
use crate::moves::{FaceChoice, MoveError, QuadSplit, Split, TriangleSplit};
use crate::reduction::{replay_with_backtracking, ConstructionSequence, ReductionError};
use crate::scalar::Scalar;
use crate::sparsity::gain_graph_sparse;

/// Offsets tried per split: the initial one and 64 halvings.
pub const DEFAULT_BUDGET: u32 = 65;

/// Splits allowed to fail before [`realize_map`] gives up.
const MAX_FAILED_SPLITS: usize = 256;

/// Layout candidates instantiated per offset.
const CANDIDATES_PER_OFFSET: usize = 8;

/// Layouts tried per offset when a loop carries both restored edges; each
/// is instantiated with every choice of images.
const SELF_LOOP_CANDIDATES: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ContactError {
    #[error("group does not suit this graph: {0}")]
    GroupLevelMismatch(String),
    #[error("validation failed: {0}")]
    ValidationFailed(String),
    #[error("no offset validated within {0} attempts")]
    EpsilonExhausted(u32),
    #[error("no layout realizes the split: {0}")]
    NoTemplate(String),
    #[error("coordinates cannot represent {0}")]
    UnsupportedGroup(String),
    #[error(transparent)]
    Move(#[from] MoveError),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
}

/// One segment per orbit, named by the quotient vertex it represents.
#[derive(Clone, Debug)]
pub struct ContactSystem<S> {
    pub group: SymmetryGroup<S>,
    pub ids: Vec<String>,
    pub reps: Vec<Seg<S>>,
    pub provenance: Option<ConstructionSequence>,
}

/// End `end` of `reps[tail]` lies inside `g·reps[head]`.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Contact {
    pub tail: usize,
    pub end: End,
    pub head: usize,
    pub g: i64,
}

/// Where a contact sits on a segment.
#[derive(Clone, Debug)]
pub enum Place<S> {
    End(End),
    Side { t: S, left: bool },
}

fn place_key<S: Scalar>(p: &Place<S>) -> (u8, S) {
    match p {
        Place::End(End::P) => (0, S::zero()),
        Place::Side { t, left: false } => (1, t.clone()),
        Place::End(End::Q) => (2, S::zero()),
        Place::Side { t, left: true } => (3, S::one() - t.clone()),
    }
}

fn key_cmp<S: Scalar>(a: &(u8, S), b: &(u8, S)) -> Ordering {
    a.0.cmp(&b.0).then_with(|| a.1.cmp_s(&b.1))
}

/// Contacts of a validated system, with each segment's items in ccw order.
#[derive(Clone, Debug)]
pub struct Survey<S> {
    pub contacts: Vec<Contact>,
    pub items: Vec<Vec<(Place<S>, Dart)>>,
    pub pairs_checked: usize,
}

impl<S: Scalar> Survey<S> {
    pub fn free_ends(&self) -> usize {
        2 * self.items.len() - self.contacts.len()
    }

    fn place_of(&self, d: Dart) -> &Place<S> {
        let c = &self.contacts[d.edge()];
        let v = if d.is_plus() { c.tail } else { c.head };
        &self.items[v].iter().find(|(_, x)| *x == d).expect("every dart has an item").0
    }
}

/// The quotient map and the facts checked while extracting it.
#[derive(Clone, Debug)]
pub struct ContactCert {
    pub quotient_graph: AnnulusMap,
    pub free_end_orbit_count: usize,
    pub log: Vec<String>,
}

impl<S: Scalar> ContactSystem<S> {
    pub fn new(group: SymmetryGroup<S>, ids: Vec<String>, reps: Vec<Seg<S>>) -> Self {
        ContactSystem { group, ids, reps, provenance: None }
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|v| v == id)
    }

    /// Checks S3 and S4 on every pair that can meet and lists the contacts.
    pub fn survey(&self) -> Result<Survey<S>, ContactError> {
        let n = self.reps.len();
        for (i, s) in self.reps.iter().enumerate() {
            if s.p.same(&s.q) {
                return Err(ContactError::ValidationFailed(format!("segment {} has zero length", self.ids[i])));
            }
            if self.group.has_fixed_point_on(s) {
                return Err(ContactError::ValidationFailed(format!(
                    "segment {} meets the rotation centre",
                    self.ids[i]
                )));
            }
        }
        let mut found: BTreeMap<(usize, End), (usize, i64)> = BTreeMap::new();
        let mut record = |tail: usize, end: End, head: usize, g: i64| -> Result<(), ContactError> {
            match found.insert((tail, end), (head, g)) {
                Some(prev) if prev != (head, g) => Err(ContactError::ValidationFailed(format!(
                    "an endpoint of {} lies in two segments",
                    self.ids[tail]
                ))),
                _ => Ok(()),
            }
        };
        let mut pairs = 0;
        for i in 0..n {
            for j in i..n {
                for g in self.group.candidates(&self.reps[i], &self.reps[j]) {
                    let g = self.group.normalize(g);
                    if i == j && g == 0 {
                        continue;
                    }
                    pairs += 1;
                    let b = self.group.apply_seg(g, &self.reps[j]);
                    match meet(&self.reps[i], &b) {
                        Meeting::Disjoint => {}
                        Meeting::FirstTouches(e) => record(i, e, j, g)?,
                        Meeting::SecondTouches(e) => record(j, e, i, self.group.normalize(-g))?,
                        Meeting::Degenerate(why) => {
                            return Err(ContactError::ValidationFailed(format!(
                                "{} and image {} of {}: {}",
                                self.ids[i], g, self.ids[j], why
                            )))
                        }
                    }
                }
            }
        }
        let contacts: Vec<Contact> =
            found.into_iter().map(|((tail, end), (head, g))| Contact { tail, end, head, g }).collect();
        let mut items: Vec<Vec<(Place<S>, Dart)>> = vec![Vec::new(); n];
        for (k, c) in contacts.iter().enumerate() {
            items[c.tail].push((Place::End(c.end), Dart::new(k, true)));
            let x = self.group.apply(-c.g, self.reps[c.tail].end(c.end));
            let other = self.group.apply(-c.g, self.reps[c.tail].end(c.end.other()));
            let host = &self.reps[c.head];
            let t = host.param(&x);
            let left = host.dir().cross(&other.sub(&x)).sign() == Ordering::Greater;
            items[c.head].push((Place::Side { t, left }, Dart::new(k, false)));
        }
        for list in &mut items {
            list.sort_by(|a, b| key_cmp(&place_key(&a.0), &place_key(&b.0)));
        }
        Ok(Survey { contacts, items, pairs_checked: pairs })
    }

    /// Vertex sets of the connected components of the contact graph.
    pub fn components(&self, survey: &Survey<S>) -> Vec<Vec<usize>> {
        let n = self.reps.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            p[x] = r;
            r
        }
        for c in &survey.contacts {
            let (a, b) = (find(&mut parent, c.tail), find(&mut parent, c.head));
            parent[a] = b;
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for v in 0..n {
            let r = find(&mut parent, v);
            groups.entry(r).or_default().push(v);
        }
        groups.into_values().collect()
    }

    /// The quotient map of the segments in `comp`, which must be a union of
    /// components.
    pub fn component_map(&self, survey: &Survey<S>, comp: &[usize]) -> Result<AnnulusMap, ContactError> {
        let local: BTreeMap<usize, usize> = comp.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut edge_local = BTreeMap::new();
        let mut edges = Vec::new();
        for (k, c) in survey.contacts.iter().enumerate() {
            if let (Some(&t), Some(&h)) = (local.get(&c.tail), local.get(&c.head)) {
                edge_local.insert(k, edges.len());
                edges.push(Edge { id: format!("c{k}"), tail: t, head: h });
            }
        }
        let relabel = |d: Dart| Dart::new(edge_local[&d.edge()], d.is_plus());
        let rotation: Vec<Vec<Dart>> =
            comp.iter().map(|&v| survey.items[v].iter().map(|(_, d)| relabel(*d)).collect()).collect();
        let ids: Vec<String> = comp.iter().map(|&v| self.ids[v].clone()).collect();
        let ends = if edges.is_empty() {
            [None, None]
        } else {
            let hits = self.end_hits(comp)?;
            let mut ds = [None, None];
            for (i, (v, t, left)) in hits.into_iter().enumerate() {
                ds[i] = Some(relabel(next_item(&survey.items[v], &Place::Side { t, left })));
            }
            ds
        };
        AnnulusMap::build_with_end_darts(ids, edges, rotation, ends)
            .map_err(|e| ContactError::ValidationFailed(format!("quotient is not an annulus map: {e}")))
    }

    /// For each end, the segment first hit from it, the parameter and side.
    fn end_hits(&self, comp: &[usize]) -> Result<[(usize, S, bool); 2], ContactError> {
        match &self.group {
            SymmetryGroup::Translation { v } => self.translation_hits(comp, v),
            SymmetryGroup::Rotation { k, center, .. } => self.rotation_hits(comp, *k, center),
        }
    }

    fn translation_hits(&self, comp: &[usize], v: &Pt<S>) -> Result<[(usize, S, bool); 2], ContactError> {
        let n = v.perp();
        let vv = v.dot(v);
        let base = self.reps[comp[0]].p.dot(v);
        'frac: for (a, b) in probe_fractions() {
            let x0 = base.clone() + vv.clone() * S::from_ratio(a, b);
            for &i in comp {
                for e in [&self.reps[i].p, &self.reps[i].q] {
                    let f = ((x0.clone() - e.dot(v)) / vv.clone()).to_f64();
                    if (f - f.round()).abs() < 1e-7 {
                        continue 'frac;
                    }
                }
            }
            let mut top: Option<(S, usize, S, bool)> = None;
            let mut bottom: Option<(S, usize, S, bool)> = None;
            for &i in comp {
                let s = &self.reps[i];
                let (pa, pb) = (s.p.dot(v), s.q.dot(v));
                let span = pb.clone() - pa.clone();
                if span.sign() == Ordering::Equal {
                    continue;
                }
                let lo = if pa.cmp_s(&pb) == Ordering::Less { pa.clone() } else { pb.clone() };
                let hi = if pa.cmp_s(&pb) == Ordering::Less { pb.clone() } else { pa.clone() };
                let jlo = ((x0.clone() - hi) / vv.clone()).to_f64().floor() as i64 - 1;
                let jhi = ((x0.clone() - lo) / vv.clone()).to_f64().ceil() as i64 + 1;
                for j in jlo..=jhi {
                    let sj = self.group.apply_seg(j, s);
                    let t = (x0.clone() - sj.p.dot(v)) / span.clone();
                    if t.sign() != Ordering::Greater || (S::one() - t.clone()).sign() != Ordering::Greater {
                        continue;
                    }
                    let h = sj.at(&t).dot(&n);
                    let faces_n_on_left = s.dir().cross(&n).sign() == Ordering::Greater;
                    if top.as_ref().map_or(true, |(bh, ..)| h.cmp_s(bh) == Ordering::Greater) {
                        top = Some((h.clone(), i, t.clone(), faces_n_on_left));
                    }
                    if bottom.as_ref().map_or(true, |(bh, ..)| h.cmp_s(bh) == Ordering::Less) {
                        bottom = Some((h, i, t, !faces_n_on_left));
                    }
                }
            }
            if let (Some(t), Some(b)) = (top, bottom) {
                return Ok([(t.1, t.2, t.3), (b.1, b.2, b.3)]);
            }
        }
        Err(ContactError::ValidationFailed("no generic ray towards the ends".into()))
    }

    fn rotation_hits(&self, comp: &[usize], k: u32, c: &Pt<S>) -> Result<[(usize, S, bool); 2], ContactError> {
        let images: Vec<(usize, Seg<S>)> = comp
            .iter()
            .flat_map(|&i| (0..i64::from(k)).map(move |g| (i, g)))
            .map(|(i, g)| (i, self.group.apply_seg(g, &self.reps[i])))
            .collect();
        // aim at points of the first segment so the ray hits something
        let aim = &images[0].1;
        'dir: for (a, b) in probe_fractions() {
            let d = aim.at(&S::from_ratio(a, b)).sub(c);
            for (_, s) in &images {
                for e in [&s.p, &s.q] {
                    let w = e.sub(c);
                    if d.cross(&w).sign() == Ordering::Equal && d.dot(&w).sign() != Ordering::Less {
                        continue 'dir;
                    }
                }
            }
            let mut near: Option<(S, usize, S, bool)> = None;
            let mut far: Option<(S, usize, S, bool)> = None;
            for (i, s) in &images {
                let u = s.dir();
                let den = d.cross(&u);
                if den.sign() == Ordering::Equal {
                    continue;
                }
                let pc = s.p.sub(c);
                let lambda = pc.cross(&u) / den.clone();
                let mu = pc.cross(&d) / den;
                if lambda.sign() != Ordering::Greater
                    || mu.sign() != Ordering::Greater
                    || (S::one() - mu.clone()).sign() != Ordering::Greater
                {
                    continue;
                }
                let centre_left = u.cross(&c.sub(&s.p)).sign() == Ordering::Greater;
                if near.as_ref().map_or(true, |(bl, ..)| lambda.cmp_s(bl) == Ordering::Less) {
                    near = Some((lambda.clone(), *i, mu.clone(), centre_left));
                }
                if far.as_ref().map_or(true, |(bl, ..)| lambda.cmp_s(bl) == Ordering::Greater) {
                    far = Some((lambda, *i, mu, !centre_left));
                }
            }
            if let (Some(a), Some(b)) = (near, far) {
                return Ok([(a.1, a.2, a.3), (b.1, b.2, b.3)]);
            }
        }
        Err(ContactError::ValidationFailed("no generic ray from the centre".into()))
    }

    /// Follows contacts monotonically from the middle of `start` and
    /// returns the number of segments visited before a free endpoint.
    ///
    /// Translations descend along the normal of the translation vector;
    /// rotations move away from the centre.
    pub fn sweep_from(&self, survey: &Survey<S>, start: usize) -> Result<usize, ContactError> {
        let lookup: BTreeMap<(usize, End), (usize, i64)> =
            survey.contacts.iter().map(|c| ((c.tail, c.end), (c.head, c.g))).collect();
        let rate = |seg: &Seg<S>, x: &Pt<S>| -> S {
            match &self.group {
                SymmetryGroup::Translation { v } => -seg.dir().dot(&v.perp()),
                SymmetryGroup::Rotation { center, .. } => x.sub(center).dot(&seg.dir()),
            }
        };
        let (mut v, mut g) = (start, 0i64);
        let seg = &self.reps[start];
        let mid = seg.at(&S::from_ratio(1, 2));
        let mut end = if rate(seg, &mid).sign() == Ordering::Less { End::P } else { End::Q };
        let limit = 64 * self.reps.len().max(1) + 64;
        for step in 0..limit {
            match lookup.get(&(v, end)) {
                None => return Ok(step + 1),
                Some(&(w, h)) => {
                    let x = self.group.apply(g, self.reps[v].end(end));
                    g = self.group.normalize(g + h);
                    v = w;
                    let host = self.group.apply_seg(g, &self.reps[v]);
                    end = if rate(&host, &x).sign() == Ordering::Less { End::P } else { End::Q };
                }
            }
        }
        Err(ContactError::ValidationFailed(format!("sweep from {} did not reach a free endpoint", self.ids[start])))
    }

    /// Pulls one endpoint back past nothing, dropping its contact.
    pub fn shortened(&self, survey: &Survey<S>, v: usize, end: End) -> ContactSystem<S> {
        let ts: Vec<S> = survey.items[v]
            .iter()
            .filter_map(|(p, _)| match p {
                Place::Side { t, .. } => Some(t.clone()),
                _ => None,
            })
            .collect();
        let t = match end {
            End::P => ts.iter().fold(S::one(), |m, t| if t.cmp_s(&m) == Ordering::Less { t.clone() } else { m }).half(),
            End::Q => {
                let m = ts.iter().fold(S::zero(), |m, t| if t.cmp_s(&m) == Ordering::Greater { t.clone() } else { m });
                (m + S::one()).half()
            }
        };
        let mut out = self.clone();
        let x = self.reps[v].at(&t);
        *out.reps[v].end_mut(end) = x;
        out
    }

    /// Intersection graph of the images with `|g| ≤ copies` (all images for
    /// a rotation), read as a finite system without symmetry, and whether
    /// it is (2,3)-sparse.
    pub fn plane_baseline(&self, copies: i64) -> Result<(usize, usize, bool), ContactError> {
        let elems: Vec<i64> = match self.group.order() {
            Some(k) => (0..i64::from(k)).collect(),
            None => (-copies..=copies).collect(),
        };
        let segs: Vec<Seg<S>> = elems
            .iter()
            .flat_map(|&g| self.reps.iter().map(move |s| (g, s)))
            .map(|(g, s)| self.group.apply_seg(g, s))
            .collect();
        let mut edges = Vec::new();
        for i in 0..segs.len() {
            for j in i + 1..segs.len() {
                match meet(&segs[i], &segs[j]) {
                    Meeting::Disjoint => {}
                    Meeting::FirstTouches(_) => edges.push((i, j, 0)),
                    Meeting::SecondTouches(_) => edges.push((j, i, 0)),
                    Meeting::Degenerate(why) => return Err(ContactError::ValidationFailed(why)),
                }
            }
        }
        Ok((segs.len(), edges.len(), gain_graph_sparse(segs.len(), &edges, 2)))
    }
}

/// The item after the gap at `at`, cyclically.
fn next_item<S: Scalar>(items: &[(Place<S>, Dart)], at: &Place<S>) -> Dart {
    let key = place_key(at);
    items
        .iter()
        .find(|(p, _)| key_cmp(&place_key(p), &key) == Ordering::Greater)
        .or_else(|| items.first())
        .expect("segment has items")
        .1
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

/// Validates the system and reads its quotient map.
pub fn extract_quotient_graph<S: Scalar>(sys: &ContactSystem<S>) -> Result<ContactCert, ContactError> {
    let survey = sys.survey()?;
    let comps = sys.components(&survey);
    if comps.len() != 1 {
        return Err(ContactError::ValidationFailed(format!("contact graph has {} components", comps.len())));
    }
    let map = sys.component_map(&survey, &comps[0])?;
    let mut log = vec![
        format!("S1, S2: {} orbit representatives", sys.reps.len()),
        format!("S3: {} segment pairs checked, {} contacts", survey.pairs_checked, survey.contacts.len()),
    ];
    log.push(match &sys.group {
        SymmetryGroup::Translation { .. } => "S4: translations fix no point".to_string(),
        SymmetryGroup::Rotation { k, .. } => format!("S4: no segment meets the centre of the order-{k} rotation"),
    });
    for v in 0..sys.reps.len() {
        sys.sweep_from(&survey, v)?;
    }
    log.push("sweep: every start reaches a free endpoint".into());
    let free = survey.free_ends();
    let f = 2 * map.n_vertices() as i64 - map.n_edges() as i64;
    if free as i64 != f {
        return Err(ContactError::ValidationFailed(format!("{free} free ends but f = {f}")));
    }
    log.push(format!("free end orbits: {free}"));
    Ok(ContactCert { quotient_graph: map, free_end_orbit_count: free, log })
}

/// Quotient maps of the components, for systems that may be disconnected.
pub fn extract_components<S: Scalar>(sys: &ContactSystem<S>) -> Result<Vec<AnnulusMap>, ContactError> {
    let survey = sys.survey()?;
    sys.components(&survey).iter().map(|c| sys.component_map(&survey, c)).collect()
}

fn seg<S: Scalar>(ax: (i64, i64), ay: (i64, i64), bx: (i64, i64), by: (i64, i64)) -> (Pt<S>, Pt<S>) {
    (Pt::from_ratios(ax, ay), Pt::from_ratios(bx, by))
}

/// Whether the group can carry graphs of the given level.
pub fn check_group_level<S: Scalar>(group: &SymmetryGroup<S>, level: u8) -> Result<(), ContactError> {
    let ok = match (group.order(), level) {
        (None, 2) | (Some(2), 2) => true,
        (Some(k), 1) => k >= 3,
        _ => false,
    };
    if ok {
        Ok(())
    } else {
        let g = match group.order() {
            None => "a translation".to_string(),
            Some(k) => format!("a rotation of order {k}"),
        };
        Err(ContactError::GroupLevelMismatch(format!("{g} does not carry (2,3,{level})-tight graphs")))
    }
}

/// A validated configuration for a base graph, named like [`Base::map`].
pub fn realize_base<S: Scalar>(base: Base, group: &SymmetryGroup<S>) -> Result<ContactSystem<S>, ContactError> {
    let frame = |p: (Pt<S>, Pt<S>)| -> Seg<S> {
        match group {
            SymmetryGroup::Translation { v } => {
                let w = v.perp();
                let map = |x: &Pt<S>| v.scale(&x.x).add(&w.scale(&x.y));
                Seg::new(map(&p.0), map(&p.1))
            }
            SymmetryGroup::Rotation { center, .. } => Seg::new(p.0.add(center), p.1.add(center)),
        }
    };
    let reps = match (base, group) {
        (Base::K, SymmetryGroup::Translation { .. }) => {
            vec![frame(seg((1, 10), (0, 1), (3, 10), (0, 1))), frame(seg((2, 10), (0, 1), (2, 10), (2, 10)))]
        }
        (Base::K, SymmetryGroup::Rotation { k, .. }) => {
            let w = (1, 2 * i64::from(*k));
            vec![frame(seg((3, 1), (-w.0, w.1), (3, 1), w)), frame(seg((3, 1), (0, 1), (6 * w.1 + 1, 2 * w.1), (0, 1)))]
        }
        (Base::L, SymmetryGroup::Translation { .. }) => {
            vec![frame(seg((0, 1), (0, 1), (6, 10), (3, 10))), frame(seg((4, 10), (2, 10), (12, 10), (1, 10)))]
        }
        (Base::L, SymmetryGroup::Rotation { k: 2, .. }) => {
            vec![frame(seg((-1, 1), (-1, 1), (2, 1), (-1, 1))), frame(seg((1, 1), (-1, 1), (1, 1), (2, 1)))]
        }
        (Base::M, SymmetryGroup::Rotation { k, center, .. }) if *k >= 3 => {
            let v0 = Pt::from_ratios((1, 1), (0, 1)).add(center);
            let v1 = group.apply(1, &v0);
            let q = v0.add(&v1.sub(&v0).scale(&S::from_ratio(3, 2)));
            vec![Seg::new(v0, q)]
        }
        (b, g) => {
            let level = if b == Base::M { 1 } else { 2 };
            check_group_level(g, level)?;
            unreachable!("every legal pairing has a configuration")
        }
    };
    let template = base.map();
    let ids = template.vertex_ids().to_vec();
    let sys = ContactSystem::new(group.clone(), ids, reps);
    Ok(Stage::new(sys, template)?.sys)
}

/// A system together with the identification of its quotient with a
/// labelled map.
struct Stage<S> {
    sys: ContactSystem<S>,
    survey: Survey<S>,
    map: AnnulusMap,
    /// Dart of `map` for each dart of the extracted quotient.
    to_map: Vec<Dart>,
}

impl<S: Scalar> Stage<S> {
    fn new(mut sys: ContactSystem<S>, map: AnnulusMap) -> Result<Stage<S>, ContactError> {
        let survey = sys.survey()?;
        let comps = sys.components(&survey);
        if comps.len() != 1 {
            return Err(ContactError::ValidationFailed(format!("contact graph has {} components", comps.len())));
        }
        let got = sys.component_map(&survey, &comps[0])?;
        let to_map = if got.n_edges() == 0 {
            if map.n_edges() != 0 || map.n_vertices() != got.n_vertices() {
                return Err(ContactError::ValidationFailed("quotient differs from the expected map".into()));
            }
            Vec::new()
        } else {
            find_isomorphism(&got, &map, false)
                .map(|(m, _)| m)
                .ok_or_else(|| ContactError::ValidationFailed("quotient differs from the expected map".into()))?
        };
        if got.n_edges() > 0 {
            let mut ids = sys.ids.clone();
            for (v, id) in ids.iter_mut().enumerate() {
                let d = survey.items[v][0].1;
                *id = map.vertex_id(map.origin(to_map[d.index()])).to_string();
            }
            sys.ids = ids;
        }
        Ok(Stage { sys, survey, map, to_map })
    }

    /// Extracted dart for a dart of the labelled map.
    fn from_map(&self, d: Dart) -> Dart {
        Dart::from_index(self.to_map.iter().position(|&x| x == d).expect("isomorphism is a bijection"))
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Label {
    Item(usize),
    Piv,
    /// Contact of a restored edge: requirement and segment (0 = X, 1 = Y).
    W(usize, usize),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
enum Role {
    Free,
    Item(usize),
    Pivot,
    W(usize),
}

/// A contact at the split segment, in layout coordinates: `pos` is
/// `P_POS`, `q_pos()`, or `3r + 2` for the `r`-th distinct parameter.
/// The gap before parameter `j` has the two slots `3j` and `3j + 1`.
#[derive(Clone, Debug)]
struct LocalItem {
    pos: i64,
    left: bool,
    owner: usize,
    anchor: Option<usize>,
}

const P_POS: i64 = -1;

struct Layout {
    items: Vec<LocalItem>,
    distinct: usize,
    triangle: bool,
    anchors: Vec<usize>,
    expected: [Vec<Label>; 2],
    /// Both restored edges hang on the two darts of one loop. The labels
    /// cannot tell which image each end meets, so rotations are left to
    /// validation.
    self_loop: bool,
}

#[derive(Clone, Debug)]
struct Solution {
    iv: [(i64, i64); 2],
    upper: Option<usize>,
    tilted: Option<(usize, usize)>,
    roles: [[Role; 2]; 2],
    landing: Vec<Option<usize>>,
    cost: usize,
}

impl Layout {
    fn q_pos(&self) -> i64 {
        3 * self.distinct as i64 + 2
    }

    fn is_item(&self, pos: i64) -> bool {
        pos >= 0 && pos < self.q_pos() && pos % 3 == 2
    }

    fn end_item(&self, pos: i64) -> Option<usize> {
        self.items.iter().position(|it| it.pos == pos)
    }

    fn positions(&self) -> Vec<i64> {
        let mut out = Vec::new();
        if self.end_item(P_POS).is_some() {
            out.push(P_POS);
        }
        for p in 0..self.q_pos() {
            if !self.is_item(p) || self.items.iter().any(|it| it.pos == p && it.anchor.is_some()) {
                out.push(p);
            }
        }
        if self.end_item(self.q_pos()).is_some() {
            out.push(self.q_pos());
        }
        out
    }

    /// Role of an endpoint at `pos`, ignoring the pivot.
    fn role_at(&self, seg: usize, pos: i64, start: bool) -> Option<Role> {
        if pos == P_POS || pos == self.q_pos() {
            if (pos == P_POS) != start {
                return None;
            }
            let it = self.end_item(pos)?;
            return match self.items[it].anchor {
                Some(r) => Some(Role::W(r)),
                None if self.items[it].owner == seg => Some(Role::Item(it)),
                None => None,
            };
        }
        if self.is_item(pos) {
            let it = self.items.iter().position(|it| it.pos == pos && it.anchor.is_some())?;
            return Some(Role::W(self.items[it].anchor.unwrap()));
        }
        Some(Role::Free)
    }

    fn intervals(&self, seg: usize) -> Vec<(i64, i64)> {
        let pos = self.positions();
        let owned: Vec<i64> = self
            .items
            .iter()
            .filter(|it| it.owner == seg && it.anchor.is_none() && it.pos != P_POS && it.pos != self.q_pos())
            .map(|it| it.pos)
            .collect();
        let mut out = Vec::new();
        for &a in &pos {
            for &b in &pos {
                if a < b
                    && owned.iter().all(|&p| a < p && p < b)
                    && self.role_at(seg, a, true).is_some()
                    && self.role_at(seg, b, false).is_some()
                {
                    out.push((a, b));
                }
            }
        }
        out
    }

    fn solve(&self) -> Vec<Solution> {
        let mut out = Vec::new();
        let ivx = self.intervals(0);
        let ivy = self.intervals(1);
        for &a in &ivx {
            for &b in &ivy {
                let iv = [a, b];
                let overlap = a.0.max(b.0) < a.1.min(b.1);
                let uppers: &[Option<usize>] = if overlap { &[Some(0), Some(1)] } else { &[None] };
                for &upper in uppers {
                    if self.triangle {
                        for t in 0..2 {
                            for e in 0..2 {
                                if let Some(s) = self.evaluate(iv, upper, Some((t, e))) {
                                    out.push(s);
                                }
                            }
                        }
                    } else if let Some(s) = self.evaluate(iv, upper, None) {
                        out.push(s);
                    }
                }
            }
        }
        out.sort_by_key(|s| s.cost);
        out
    }

    fn evaluate(&self, iv: [(i64, i64); 2], upper: Option<usize>, tilted: Option<(usize, usize)>) -> Option<Solution> {
        let inside = |s: usize, p: i64| iv[s].0 < p && p < iv[s].1;
        let endpoint = |s: usize, e: usize| if e == 0 { iv[s].0 } else { iv[s].1 };
        let mut roles = [[Role::Free; 2]; 2];
        for s in 0..2 {
            for e in 0..2 {
                roles[s][e] = self.role_at(s, endpoint(s, e), e == 0)?;
            }
        }
        // shared positions only where both segments end on the same outside segment
        for e in 0..2 {
            for f in 0..2 {
                let p = endpoint(0, e);
                if p == endpoint(1, f) && !(e == f && (p == P_POS || p == self.q_pos())) {
                    return None;
                }
            }
        }
        for pos in [P_POS, self.q_pos()] {
            if let Some(it) = self.end_item(pos) {
                let e = if pos == P_POS { 0 } else { 1 };
                let at: Vec<usize> = (0..2).filter(|&s| endpoint(s, e) == pos).collect();
                let want = match self.items[it].anchor {
                    Some(_) => vec![0, 1],
                    None => vec![self.items[it].owner],
                };
                if at != want {
                    return None;
                }
            }
        }
        let mut pivot_at = None;
        match tilted {
            Some((t, e)) => {
                let p = endpoint(t, e);
                if self.is_item(p) || p == P_POS || p == self.q_pos() || !inside(1 - t, p) || upper.is_none() {
                    return None;
                }
                roles[t][e] = Role::Pivot;
                pivot_at = Some((t, p));
            }
            None if self.triangle => return None,
            None => {}
        }
        let mut landing = vec![None; self.items.len()];
        for (i, it) in self.items.iter().enumerate() {
            if it.pos == P_POS || it.pos == self.q_pos() {
                continue;
            }
            if let Some(r) = it.anchor {
                let enders: Vec<usize> = (0..2).filter(|&s| iv[s].0 == it.pos || iv[s].1 == it.pos).collect();
                if enders.len() != 1 {
                    return None;
                }
                let s = enders[0];
                let o = 1 - s;
                if !inside(o, it.pos) || upper.is_none() || (upper == Some(s)) != it.left {
                    return None;
                }
                let _ = r;
                landing[i] = Some(o);
                continue;
            }
            let present: Vec<usize> = (0..2).filter(|&s| inside(s, it.pos)).collect();
            let land = match present.len() {
                0 => return None,
                1 => present[0],
                _ => {
                    let up = upper?;
                    if it.left {
                        up
                    } else {
                        1 - up
                    }
                }
            };
            if land != it.owner {
                return None;
            }
            landing[i] = Some(land);
        }
        for s in 0..2 {
            let mut entries: Vec<((u8, i64), Label)> = Vec::new();
            for e in 0..2 {
                let key = if e == 0 { (0, 0) } else { (2, 0) };
                match roles[s][e] {
                    Role::Free => {}
                    Role::Item(i) => entries.push((key, Label::Item(i))),
                    Role::Pivot => entries.push((key, Label::Piv)),
                    Role::W(r) => entries.push((key, Label::W(r, s))),
                }
            }
            for (i, it) in self.items.iter().enumerate() {
                if landing[i] == Some(s) {
                    let key = if it.left { (3, -it.pos) } else { (1, it.pos) };
                    let label = match it.anchor {
                        Some(r) => Label::W(r, s),
                        None => Label::Item(i),
                    };
                    entries.push((key, label));
                }
            }
            if let Some((t, p)) = pivot_at {
                if t != s {
                    let from_above = upper == Some(t);
                    entries.push((if from_above { (3, -p) } else { (1, p) }, Label::Piv));
                }
            }
            entries.sort();
            let got: Vec<Label> = entries.into_iter().map(|(_, l)| l).collect();
            if !self.self_loop && !cyclic_eq(&got, &self.expected[s]) {
                return None;
            }
        }
        // prefer layouts that disturb few neighbours
        let raised = match (tilted, upper) {
            (Some((t, _)), _) => t,
            (None, Some(u)) => u,
            (None, None) => 2,
        };
        let cost = landing.iter().filter(|l| **l == Some(raised)).count();
        Some(Solution { iv, upper, tilted, roles, landing, cost })
    }
}

fn cyclic_eq<T: PartialEq>(a: &[T], b: &[T]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    if a.is_empty() {
        return true;
    }
    (0..a.len()).any(|s| (0..a.len()).all(|i| a[(s + i) % a.len()] == b[i]))
}

/// Everything the placement needs to know about the split segment.
struct SplitPlan {
    z: usize,
    /// Extracted dart of each item at `z`, in rotation order.
    darts: Vec<Dart>,
    layout: Layout,
    names: [String; 2],
}

fn plan_split<S: Scalar>(stage: &Stage<S>, split: &Split) -> Result<SplitPlan, ContactError> {
    let map = &stage.map;
    let (target, new, new_on_moved, moved, kept) = match split {
        Split::Triangle(t) => (&t.target_vertex, &t.new_vertex, t.new_on_moved, &t.moved, &t.kept),
        Split::Quad(q) => (&q.target_vertex, &q.new_vertex, q.new_on_moved, &q.moved, &q.kept),
    };
    let bad = |m: &str| ContactError::Move(MoveError::BadPartition(m.to_string()));
    let resolve = |list: &Vec<crate::moves::DartRef>| -> Result<Vec<Dart>, ContactError> {
        list.iter().map(|r| r.resolve(map).ok_or_else(|| bad(&format!("unknown dart {r}")))).collect()
    };
    let a = resolve(moved)?;
    let b = resolve(kept)?;
    let z = stage.sys.index_of(target).ok_or_else(|| bad(&format!("unknown vertex {target}")))?;
    let map_darts: Vec<Dart> = a.iter().chain(b.iter()).copied().collect();
    let darts: Vec<Dart> = map_darts.iter().map(|&d| stage.from_map(d)).collect();
    let places: Vec<Place<S>> = darts.iter().map(|&d| stage.survey.place_of(d).clone()).collect();
    let mut ts: Vec<S> = places
        .iter()
        .filter_map(|p| match p {
            Place::Side { t, .. } => Some(t.clone()),
            _ => None,
        })
        .collect();
    ts.sort_by(|x, y| x.cmp_s(y));
    ts.dedup_by(|x, y| x.cmp_s(y) == Ordering::Equal);
    let distinct = ts.len();
    let mut items: Vec<LocalItem> = places
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let owner = usize::from(i >= a.len());
            match p {
                Place::End(End::P) => LocalItem { pos: P_POS, left: false, owner, anchor: None },
                Place::End(End::Q) => LocalItem { pos: 3 * distinct as i64 + 2, left: false, owner, anchor: None },
                Place::Side { t, left } => {
                    let r = ts.iter().position(|x| x.cmp_s(t) == Ordering::Equal).unwrap();
                    LocalItem { pos: 3 * r as i64 + 2, left: *left, owner, anchor: None }
                }
            }
        })
        .collect();
    let na = a.len();
    let idx_b = |k: usize| na + k;
    let last_a = na.checked_sub(1);
    let mut anchors = Vec::new();
    let mut extra: [Vec<Label>; 2] = [Vec::new(), Vec::new()];
    let triangle = split.is_triangle();
    match split {
        Split::Triangle(t) => {
            if b.is_empty() {
                return Err(bad("kept arc is empty"));
            }
            let anchor = match t.face_choice {
                FaceChoice::AfterArc => idx_b(0),
                FaceChoice::BeforeArc => idx_b(b.len() - 1),
            };
            anchors.push(anchor);
            extra[0] = match t.face_choice {
                FaceChoice::AfterArc => vec![Label::W(0, 0), Label::Piv],
                FaceChoice::BeforeArc => vec![Label::Piv, Label::W(0, 0)],
            };
        }
        Split::Quad(q) => {
            let pick = |on_moved: bool, kept_end: Option<usize>, moved_end: Option<usize>| {
                if on_moved {
                    kept_end
                } else {
                    moved_end
                }
            };
            let ra = pick(q.restore_a.on_moved, (!b.is_empty()).then(|| idx_b(0)), last_a)
                .ok_or_else(|| bad("restore_a has no anchor"))?;
            let rb = pick(q.restore_b.on_moved, (!b.is_empty()).then(|| idx_b(b.len() - 1)), (na > 0).then_some(0))
                .ok_or_else(|| bad("restore_b has no anchor"))?;
            anchors.push(ra);
            anchors.push(rb);
            if q.restore_a.on_moved {
                extra[0].push(Label::W(0, 0));
            }
            if q.restore_b.on_moved {
                extra[0].push(Label::W(1, 0));
            }
            if !q.restore_b.on_moved {
                extra[1].push(Label::W(1, 1));
            }
            if !q.restore_a.on_moved {
                extra[1].push(Label::W(0, 1));
            }
        }
    }
    let self_loop = anchors.len() == 2 && darts[anchors[0]].edge() == darts[anchors[1]].edge();
    for (r, &it) in anchors.iter().enumerate() {
        if items[it].anchor.is_some() {
            return Err(ContactError::NoTemplate("two restored edges share an anchor".into()));
        }
        items[it].anchor = Some(r);
    }
    let label = |i: usize, items: &[LocalItem]| match items[i].anchor {
        Some(r) => Label::W(r, items[i].owner),
        None => Label::Item(i),
    };
    let mut ex: Vec<Label> = (0..na).map(|i| label(i, &items)).collect();
    ex.extend(extra[0].iter().copied());
    let mut ey: Vec<Label> = Vec::new();
    if triangle {
        ey.push(Label::Piv);
    }
    ey.extend((0..b.len()).map(|k| label(idx_b(k), &items)));
    ey.extend(extra[1].iter().copied());
    let _ = last_a;
    let names = if new_on_moved { [new.clone(), target.clone()] } else { [target.clone(), new.clone()] };
    Ok(SplitPlan {
        z,
        darts,
        layout: Layout { items, distinct, triangle, anchors, expected: [ex, ey], self_loop },
        names,
    })
}

/// Builds the system for one layout at offset `eta`, relative to the
/// length of the split segment.
fn instantiate<S: Scalar>(
    stage: &Stage<S>,
    plan: &SplitPlan,
    sol: &Solution,
    eta: &S,
    reach: f64,
    choice: u8,
) -> Option<ContactSystem<S>> {
    let sys = &stage.sys;
    let survey = &stage.survey;
    let group = &sys.group;
    let z = plan.z;
    let zs = &sys.reps[z];
    let u = zs.dir();
    let nrm = u.perp();
    let at = |t: &S, h: &S| zs.p.add(&u.scale(t)).add(&nrm.scale(h));
    let layout = &plan.layout;
    let mut ts: Vec<S> = plan
        .darts
        .iter()
        .filter_map(|&d| match survey.place_of(d) {
            Place::Side { t, .. } => Some(t.clone()),
            _ => None,
        })
        .collect();
    ts.sort_by(|x, y| x.cmp_s(y));
    ts.dedup_by(|x, y| x.cmp_s(y) == Ordering::Equal);
    let tval = |pos: i64| -> S {
        if pos == P_POS {
            return S::zero();
        }
        if pos == layout.q_pos() {
            return S::one();
        }
        if layout.is_item(pos) {
            return ts[(pos / 3) as usize].clone();
        }
        let j = (pos / 3) as usize;
        let lo = if j == 0 { S::zero() } else { ts[j - 1].clone() };
        let hi = if j == ts.len() { S::one() } else { ts[j].clone() };
        let slot = S::from_ratio(pos % 3 + 1, 3);
        lo.clone() + (hi - lo) * slot
    };
    // height profile h(t) = base + slope·t for each new segment
    let mut profile = [(S::zero(), S::zero()), (S::zero(), S::zero())];
    let mut pivot_t = None;
    match (sol.tilted, sol.upper) {
        (Some((t, e)), Some(up)) => {
            let tp = tval(if e == 0 { sol.iv[t].0 } else { sol.iv[t].1 });
            // the segment leaves the line at the pivot towards its own side
            let raise = if up == t { eta.clone() } else { -eta.clone() };
            let sigma = if e == 0 { raise } else { -raise };
            profile[t] = (-(sigma.clone() * tp.clone()), sigma);
            pivot_t = Some(tp);
        }
        (None, Some(up)) => profile[up] = (eta.clone(), S::zero()),
        _ => {}
    }
    let h = |s: usize, t: &S| profile[s].0.clone() + profile[s].1.clone() * t.clone();
    let lines: Vec<Seg<S>> =
        (0..2).map(|s| Seg::new(at(&S::zero(), &h(s, &S::zero())), at(&S::one(), &h(s, &S::one())))).collect();
    // new reps replace z; X keeps its slot when it carries z's name
    let mut reps = sys.reps.clone();
    let mut ids = sys.ids.clone();
    let slot = [z, reps.len()];
    let (xi, yi) = if plan.names[0] == sys.ids[z] { (slot[0], slot[1]) } else { (slot[1], slot[0]) };
    let seg_index = [xi, yi];
    reps.push(zs.clone());
    ids.push(String::new());
    ids[xi] = plan.names[0].clone();
    ids[yi] = plan.names[1].clone();
    // line of a segment of the new system, before endpoints move
    let line_of = |v: usize| -> Seg<S> {
        if v == xi {
            lines[0].clone()
        } else if v == yi {
            lines[1].clone()
        } else {
            sys.reps[v].clone()
        }
    };
    let item_of = |d: Dart| plan.darts.iter().position(|&x| x == d);
    // new index of the segment carrying dart `d` at z, or the old index elsewhere
    let carrier = |d: Dart, c: &Contact| -> Option<usize> {
        let v = if d.is_plus() { c.tail } else { c.head };
        if v != z {
            return Some(v);
        }
        let i = item_of(d)?;
        if let Some(l) = sol.landing[i] {
            return Some(seg_index[l]);
        }
        (0..2).find(|&s| (0..2).any(|e| sol.roles[s][e] == Role::Item(i))).map(|s| seg_index[s])
    };
    let mut ends: [[Option<Pt<S>>; 2]; 2] = [[None, None], [None, None]];
    for s in 0..2 {
        for e in 0..2 {
            let pos = if e == 0 { sol.iv[s].0 } else { sol.iv[s].1 };
            let t = tval(pos);
            let pt = match sol.roles[s][e] {
                Role::Free => at(&t, &h(s, &t)),
                Role::Pivot => at(pivot_t.as_ref()?, &S::zero()),
                role @ (Role::Item(_) | Role::W(_)) => {
                    let it = match role {
                        Role::Item(i) => i,
                        Role::W(r) => layout.anchors[r],
                        _ => unreachable!(),
                    };
                    let d = plan.darts[it];
                    let c = &survey.contacts[d.edge()];
                    // a loop anchored twice meets an image of X or Y; the choice bits pick which
                    let partner = if layout.self_loop && matches!(role, Role::W(_)) {
                        seg_index[usize::from(choice >> (2 * s + e) & 1)]
                    } else {
                        carrier(d.twin(), c)?
                    };
                    let g = if d.is_plus() { c.g } else { -c.g };
                    let target = group.apply_seg(g, &line_of(partner));
                    let x = line_meet(&lines[s], &target)?;
                    (x.dist_f64(&at(&t, &h(s, &t))) <= reach).then_some(x)?
                }
            };
            ends[s][e] = Some(pt);
        }
    }
    for s in 0..2 {
        let [p, q] = &ends[s];
        reps[seg_index[s]] = Seg::new(p.clone()?, q.clone()?);
    }
    // neighbours touching z move their endpoint onto the segment they land on
    for (i, &d) in plan.darts.iter().enumerate() {
        if d.is_plus() {
            continue;
        }
        let c = &survey.contacts[d.edge()];
        if c.tail == z {
            continue;
        }
        let host = seg_index[sol.landing[i]?];
        let target = group.apply_seg(c.g, &line_of(host));
        let x = line_meet(&sys.reps[c.tail], &target)?;
        // nearly parallel neighbours would be thrown far away
        if x.dist_f64(sys.reps[c.tail].end(c.end)) > reach {
            return None;
        }
        *reps[c.tail].end_mut(c.end) = x;
    }
    Some(ContactSystem { group: group.clone(), ids, reps, provenance: None })
}

fn initial_eta<S: Scalar>(sys: &ContactSystem<S>, z: usize) -> (S, f64) {
    let zs = &sys.reps[z];
    let mut pts = vec![zs.p.clone(), zs.q.clone()];
    for (j, r) in sys.reps.iter().enumerate() {
        for g in sys.group.candidates(zs, r) {
            if j == z && sys.group.normalize(g) == 0 {
                continue;
            }
            let s = sys.group.apply_seg(g, r);
            pts.push(s.p);
            pts.push(s.q);
        }
    }
    let mut dmin = f64::INFINITY;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let d = pts[i].dist_f64(&pts[j]);
            if d > 1e-12 && d < dmin {
                dmin = d;
            }
        }
    }
    let len = zs.p.dist_f64(&zs.q);
    let rel = if dmin.is_finite() { dmin / 8.0 / len } else { 1.0 / 8.0 };
    let mut eta = S::one();
    let mut val = 1.0;
    while val > rel {
        eta = eta.half();
        val /= 2.0;
    }
    (eta, if dmin.is_finite() { dmin } else { len })
}

fn apply_stage<S: Scalar>(stage: &Stage<S>, split: &Split, budget: u32) -> Result<Stage<S>, ContactError> {
    let next_map = split.apply(&stage.map)?;
    let plan = plan_split(stage, split)?;
    let sols = plan.layout.solve();
    if sols.is_empty() {
        return Err(ContactError::NoTemplate(format!("splitting {}", stage.sys.ids[plan.z])));
    }
    let candidates: Vec<(&Solution, u8)> = if plan.layout.self_loop {
        sols.iter().take(SELF_LOOP_CANDIDATES).flat_map(|s| (0..16).map(move |c| (s, c))).collect()
    } else {
        sols.iter().take(CANDIDATES_PER_OFFSET).map(|s| (s, 0)).collect()
    };
    let (mut eta, dmin) = initial_eta(&stage.sys, plan.z);
    let reach = dmin / 4.0;
    for _ in 0..budget {
        for &(sol, choice) in &candidates {
            if let Some(sys) = instantiate(stage, &plan, sol, &eta, reach, choice) {
                if let Ok(next) = Stage::new(sys, next_map.clone()) {
                    return Ok(next);
                }
            }
        }
        eta = eta.half();
    }
    Err(ContactError::EpsilonExhausted(budget))
}

/// Applies one split to a system whose quotient is `current`; returns the
/// new system and the split map.
pub fn apply_split_geometry<S: Scalar>(
    sys: &ContactSystem<S>,
    current: &AnnulusMap,
    step: &Split,
    budget: u32,
) -> Result<(ContactSystem<S>, AnnulusMap), ContactError> {
    let stage = Stage::new(sys.clone(), current.clone())?;
    let next = apply_stage(&stage, step, budget)?;
    Ok((next.sys, next.map))
}

pub fn apply_triangle_split_geometry<S: Scalar>(
    sys: &ContactSystem<S>,
    current: &AnnulusMap,
    step: &TriangleSplit,
) -> Result<(ContactSystem<S>, AnnulusMap), ContactError> {
    apply_split_geometry(sys, current, &Split::Triangle(step.clone()), DEFAULT_BUDGET)
}

pub fn apply_quad_split_geometry<S: Scalar>(
    sys: &ContactSystem<S>,
    current: &AnnulusMap,
    step: &QuadSplit,
) -> Result<(ContactSystem<S>, AnnulusMap), ContactError> {
    apply_split_geometry(sys, current, &Split::Quad(step.clone()), DEFAULT_BUDGET)
}

/// Replays a construction sequence into a validated contact system.
pub fn realize<S: Scalar>(
    seq: &ConstructionSequence,
    group: SymmetryGroup<S>,
) -> Result<ContactSystem<S>, ContactError> {
    realize_with_budget(seq, group, DEFAULT_BUDGET)
}

pub fn realize_with_budget<S: Scalar>(
    seq: &ConstructionSequence,
    group: SymmetryGroup<S>,
    budget: u32,
) -> Result<ContactSystem<S>, ContactError> {
    check_group_level(&group, seq.level)?;
    let base = realize_base(seq.base, &group)?;
    let mut stage = Stage::new(base, seq.base.map())?;
    for step in &seq.steps {
        stage = apply_stage(&stage, step, budget)?;
    }
    let mut sys = stage.sys;
    sys.provenance = Some(seq.clone());
    Ok(sys)
}

/// Realizes a tight map, trying other decompositions when a split has no
/// realization.
pub fn realize_map<S: Scalar>(
    map: &AnnulusMap,
    l: u8,
    group: SymmetryGroup<S>,
) -> Result<ContactSystem<S>, ContactError> {
    check_group_level(&group, l)?;
    let mut base = |b: Base, reduced: &AnnulusMap| Stage::new(realize_base(b, &group)?, reduced.clone());
    let mut step = |st: &Stage<S>, split: &Split| apply_stage(st, split, DEFAULT_BUDGET);
    let (stage, seq) = replay_with_backtracking(map, l, MAX_FAILED_SPLITS, &mut base, &mut step)?;
    let mut sys = stage.sys;
    sys.provenance = Some(seq);
    Ok(sys)
}
