//! Points, segments and the two symmetry groups, over any [`Scalar`].

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct Pt<S> {
    pub x: S,
    pub y: S,
}

impl<S: Scalar> Pt<S> {
    pub fn new(x: S, y: S) -> Self {
        Pt { x, y }
    }
    pub fn from_ratios(x: (i64, i64), y: (i64, i64)) -> Self {
        Pt::new(S::from_ratio(x.0, x.1), S::from_ratio(y.0, y.1))
    }
    pub fn zero() -> Self {
        Pt::new(S::zero(), S::zero())
    }
    pub fn add(&self, o: &Pt<S>) -> Pt<S> {
        Pt::new(self.x.clone() + o.x.clone(), self.y.clone() + o.y.clone())
    }
    pub fn sub(&self, o: &Pt<S>) -> Pt<S> {
        Pt::new(self.x.clone() - o.x.clone(), self.y.clone() - o.y.clone())
    }
    pub fn scale(&self, k: &S) -> Pt<S> {
        Pt::new(self.x.clone() * k.clone(), self.y.clone() * k.clone())
    }
    /// Rotation by a quarter turn counterclockwise.
    pub fn perp(&self) -> Pt<S> {
        Pt::new(-self.y.clone(), self.x.clone())
    }
    pub fn dot(&self, o: &Pt<S>) -> S {
        self.x.clone() * o.x.clone() + self.y.clone() * o.y.clone()
    }
    pub fn cross(&self, o: &Pt<S>) -> S {
        self.x.clone() * o.y.clone() - self.y.clone() * o.x.clone()
    }
    pub fn same(&self, o: &Pt<S>) -> bool {
        self.sub(o).is_zero_vec()
    }
    pub fn is_zero_vec(&self) -> bool {
        self.x.sign() == Ordering::Equal && self.y.sign() == Ordering::Equal
    }
    pub fn to_f64(&self) -> (f64, f64) {
        (self.x.to_f64(), self.y.to_f64())
    }
    pub fn dist_f64(&self, o: &Pt<S>) -> f64 {
        let (a, b) = self.to_f64();
        let (c, d) = o.to_f64();
        (a - c).hypot(b - d)
    }
}

/// Sign of the turn `a → b → c`; `Greater` is counterclockwise.
pub fn orient<S: Scalar>(a: &Pt<S>, b: &Pt<S>, c: &Pt<S>) -> Ordering {
    b.sub(a).cross(&c.sub(a)).sign()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Seg<S> {
    pub p: Pt<S>,
    pub q: Pt<S>,
}

impl<S: Scalar> Seg<S> {
    pub fn new(p: Pt<S>, q: Pt<S>) -> Self {
        Seg { p, q }
    }
    pub fn dir(&self) -> Pt<S> {
        self.q.sub(&self.p)
    }
    pub fn end(&self, which: End) -> &Pt<S> {
        match which {
            End::P => &self.p,
            End::Q => &self.q,
        }
    }
    pub fn end_mut(&mut self, which: End) -> &mut Pt<S> {
        match which {
            End::P => &mut self.p,
            End::Q => &mut self.q,
        }
    }
    /// Parameter of `x` along `p → q`, assuming `x` is on the line.
    pub fn param(&self, x: &Pt<S>) -> S {
        let d = self.dir();
        x.sub(&self.p).dot(&d) / d.dot(&d)
    }
    pub fn at(&self, t: &S) -> Pt<S> {
        self.p.add(&self.dir().scale(t))
    }
    /// Whether `x` lies strictly between the endpoints, for `x` on the line.
    fn strictly_inside(&self, x: &Pt<S>) -> bool {
        let t = self.param(x);
        t.sign() == Ordering::Greater && (S::one() - t).sign() == Ordering::Greater
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum End {
    P,
    Q,
}

impl End {
    pub fn other(self) -> End {
        match self {
            End::P => End::Q,
            End::Q => End::P,
        }
    }
}

/// How two segments meet.
#[derive(Clone, Debug, PartialEq)]
pub enum Meeting {
    Disjoint,
    /// The given end of the first segment lies inside the second.
    FirstTouches(End),
    SecondTouches(End),
    /// Any other intersection: crossing, shared endpoint, overlap.
    Degenerate(String),
}

/// Classifies the intersection of `a` and `b` with exact sign predicates.
pub fn meet<S: Scalar>(a: &Seg<S>, b: &Seg<S>) -> Meeting {
    use Ordering::*;
    let o1 = orient(&a.p, &a.q, &b.p);
    let o2 = orient(&a.p, &a.q, &b.q);
    let o3 = orient(&b.p, &b.q, &a.p);
    let o4 = orient(&b.p, &b.q, &a.q);
    if o1 == Equal && o2 == Equal {
        // collinear: any shared point is a defect
        let d = a.dir();
        let t1 = b.p.sub(&a.p).dot(&d) / d.dot(&d);
        let t2 = b.q.sub(&a.p).dot(&d) / d.dot(&d);
        let (lo, hi) = if t1.cmp_s(&t2) == Less { (t1, t2) } else { (t2, t1) };
        if hi.sign() == Less || (lo - S::one()).sign() == Greater {
            return Meeting::Disjoint;
        }
        return Meeting::Degenerate("collinear overlap".into());
    }
    let opposite = |x: Ordering, y: Ordering| (x == Less && y == Greater) || (x == Greater && y == Less);
    let straddle_a = opposite(o1, o2) || o1 == Equal || o2 == Equal;
    let straddle_b = opposite(o3, o4) || o3 == Equal || o4 == Equal;
    if !(straddle_a && straddle_b) {
        return Meeting::Disjoint;
    }
    // the lines meet in one point; locate it relative to each segment
    let b_end = if o1 == Equal {
        Some(End::P)
    } else if o2 == Equal {
        Some(End::Q)
    } else {
        None
    };
    let a_end = if o3 == Equal {
        Some(End::P)
    } else if o4 == Equal {
        Some(End::Q)
    } else {
        None
    };
    match (a_end, b_end) {
        (None, None) => Meeting::Degenerate("interior crossing".into()),
        (Some(_), Some(_)) => Meeting::Degenerate("shared endpoint".into()),
        (Some(e), None) => {
            if b.strictly_inside(a.end(e)) {
                Meeting::FirstTouches(e)
            } else {
                Meeting::Disjoint
            }
        }
        (None, Some(e)) => {
            if a.strictly_inside(b.end(e)) {
                Meeting::SecondTouches(e)
            } else {
                Meeting::Disjoint
            }
        }
    }
}

/// Intersection of the lines through two segments, if not parallel.
pub fn line_meet<S: Scalar>(a: &Seg<S>, b: &Seg<S>) -> Option<Pt<S>> {
    let d = a.dir();
    let e = b.dir();
    let den = d.cross(&e);
    if den.sign() == Ordering::Equal {
        return None;
    }
    let t = b.p.sub(&a.p).cross(&e) / den;
    Some(a.p.add(&d.scale(&t)))
}

/// A group generated by one isometry. Elements are integer powers; for a
/// rotation they are taken mod the order.
#[derive(Clone, Debug, PartialEq)]
pub enum SymmetryGroup<S> {
    Translation { v: Pt<S> },
    Rotation { k: u32, center: Pt<S>, cos: S, sin: S },
}

impl<S: Scalar> SymmetryGroup<S> {
    pub fn translation(v: Pt<S>) -> Option<Self> {
        if v.is_zero_vec() {
            None
        } else {
            Some(SymmetryGroup::Translation { v })
        }
    }

    /// `None` when the order is below 2 or `S` cannot represent the rotation.
    pub fn rotation(k: u32, center: Pt<S>) -> Option<Self> {
        if k < 2 {
            return None;
        }
        let (cos, sin) = S::unit_rotation(k)?;
        Some(SymmetryGroup::Rotation { k, center, cos, sin })
    }

    pub fn order(&self) -> Option<u32> {
        match self {
            SymmetryGroup::Translation { .. } => None,
            SymmetryGroup::Rotation { k, .. } => Some(*k),
        }
    }

    pub fn normalize(&self, g: i64) -> i64 {
        match self {
            SymmetryGroup::Translation { .. } => g,
            SymmetryGroup::Rotation { k, .. } => g.rem_euclid(i64::from(*k)),
        }
    }

    pub fn apply(&self, g: i64, x: &Pt<S>) -> Pt<S> {
        match self {
            SymmetryGroup::Translation { v } => x.add(&v.scale(&S::from_ratio(g, 1))),
            SymmetryGroup::Rotation { k, center, cos, sin } => {
                let mut r = x.sub(center);
                for _ in 0..g.rem_euclid(i64::from(*k)) {
                    r = Pt::new(
                        cos.clone() * r.x.clone() - sin.clone() * r.y.clone(),
                        sin.clone() * r.x.clone() + cos.clone() * r.y.clone(),
                    );
                }
                r.add(center)
            }
        }
    }

    pub fn apply_seg(&self, g: i64, s: &Seg<S>) -> Seg<S> {
        Seg::new(self.apply(g, &s.p), self.apply(g, &s.q))
    }

    /// Group elements `g` for which `g·b` can meet `a`. Exact for
    /// translations via projection onto the translation vector.
    pub fn candidates(&self, a: &Seg<S>, b: &Seg<S>) -> Vec<i64> {
        match self {
            SymmetryGroup::Rotation { k, .. } => (0..i64::from(*k)).collect(),
            SymmetryGroup::Translation { v } => {
                let vv = v.dot(v).to_f64();
                let pa = [a.p.dot(v).to_f64(), a.q.dot(v).to_f64()];
                let pb = [b.p.dot(v).to_f64(), b.q.dot(v).to_f64()];
                let (alo, ahi) = (pa[0].min(pa[1]), pa[0].max(pa[1]));
                let (blo, bhi) = (pb[0].min(pb[1]), pb[0].max(pb[1]));
                // one unit of slack covers float rounding of the bounds
                let lo = ((alo - bhi) / vv).floor() as i64 - 1;
                let hi = ((ahi - blo) / vv).ceil() as i64 + 1;
                (lo..=hi).collect()
            }
        }
    }

    /// Whether a nontrivial element fixes a point of `s`.
    pub fn has_fixed_point_on(&self, s: &Seg<S>) -> bool {
        match self {
            SymmetryGroup::Translation { .. } => false,
            SymmetryGroup::Rotation { center, .. } => {
                orient(&s.p, &s.q, center) == Ordering::Equal && {
                    let t = s.param(center);
                    t.sign() != Ordering::Less && (S::one() - t).sign() != Ordering::Less
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn p(x: i64, y: i64) -> Pt<Rational> {
        Pt::from_ratios((x, 1), (y, 1))
    }

    #[test]
    fn meetings() {
        let a = Seg::new(p(0, 0), p(4, 0));
        assert_eq!(meet(&a, &Seg::new(p(1, 0), p(1, 3))), Meeting::SecondTouches(End::P));
        assert_eq!(meet(&Seg::new(p(1, 3), p(1, 0)), &a), Meeting::FirstTouches(End::Q));
        assert!(matches!(meet(&a, &Seg::new(p(1, -1), p(1, 3))), Meeting::Degenerate(_)));
        assert!(matches!(meet(&a, &Seg::new(p(4, 0), p(5, 3))), Meeting::Degenerate(_)));
        assert!(matches!(meet(&a, &Seg::new(p(3, 0), p(6, 0))), Meeting::Degenerate(_)));
        assert_eq!(meet(&a, &Seg::new(p(5, 0), p(6, 0))), Meeting::Disjoint);
        assert_eq!(meet(&a, &Seg::new(p(5, -1), p(5, 3))), Meeting::Disjoint);
        assert_eq!(meet(&a, &Seg::new(p(4, 1), p(5, 3))), Meeting::Disjoint);
    }

    #[test]
    fn quarter_turn_is_exact() {
        let g = SymmetryGroup::rotation(4, p(1, 1)).unwrap();
        assert_eq!(g.apply(1, &p(2, 1)), p(1, 2));
        assert_eq!(g.apply(4, &p(2, 1)), p(2, 1));
        assert_eq!(g.apply(-1, &p(2, 1)), p(1, 0));
    }
}
