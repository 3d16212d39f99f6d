//! Deterministic SVG drawings of maps, contact systems and pseudotriangulations.
//!
//! Translations are drawn as a horizontal strip whose identified boundaries
//! are dashed; rotations show the requested images around a marked centre.

use std::fmt::Write;

use annulus::geometry::{Seg, SymmetryGroup};
use annulus::realize_contact::ContactSystem;
use annulus::realize_pseudo::PptRealization;
use annulus::{AnnulusMap, Dart, Scalar};

type P = (f64, f64);

#[derive(Default)]
struct Sketch {
    solid: Vec<(P, P)>,
    dashed: Vec<(P, P)>,
    dots: Vec<P>,
    marks: Vec<P>,
    crosses: Vec<P>,
}

impl Sketch {
    fn bounds(&self) -> (P, P) {
        let pts = self
            .solid
            .iter()
            .flat_map(|(a, b)| [*a, *b])
            .chain(self.dots.iter().copied())
            .chain(self.crosses.iter().copied());
        let mut lo = (f64::INFINITY, f64::INFINITY);
        let mut hi = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for (x, y) in pts {
            lo = (lo.0.min(x), lo.1.min(y));
            hi = (hi.0.max(x), hi.1.max(y));
        }
        if !lo.0.is_finite() {
            return ((0.0, 0.0), (1.0, 1.0));
        }
        (lo, hi)
    }

    /// Dashed lines are clipped to the content box, so they never widen it.
    fn finish(mut self) -> String {
        let ((x0, y0), (x1, y1)) = self.bounds();
        let span = (x1 - x0).max(y1 - y0).max(1e-9);
        let pad = 0.08 * span;
        let (x0, y0, x1, y1) = (x0 - pad, y0 - pad, x1 + pad, y1 + pad);
        self.dashed = self
            .dashed
            .iter()
            .map(|&((ax, ay), (bx, by))| ((ax.clamp(x0, x1), ay.clamp(y0, y1)), (bx.clamp(x0, x1), by.clamp(y0, y1))))
            .collect();
        let stroke = span / 250.0;
        let r = span / 120.0;
        // SVG's y axis points down
        let fy = |y: f64| y0 + y1 - y;
        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{:.4} {:.4} {:.4} {:.4}">"#,
            x0,
            y0,
            x1 - x0,
            y1 - y0
        );
        let _ =
            writeln!(out, r#"<g stroke="gray" stroke-width="{:.4}" stroke-dasharray="{:.4}">"#, stroke, 4.0 * stroke);
        for ((ax, ay), (bx, by)) in &self.dashed {
            let _ = writeln!(out, r#"<line x1="{ax:.4}" y1="{:.4}" x2="{bx:.4}" y2="{:.4}"/>"#, fy(*ay), fy(*by));
        }
        let _ = writeln!(out, "</g>");
        let _ = writeln!(out, r#"<g stroke="black" stroke-width="{stroke:.4}" stroke-linecap="round">"#);
        for ((ax, ay), (bx, by)) in &self.solid {
            let _ = writeln!(out, r#"<line x1="{ax:.4}" y1="{:.4}" x2="{bx:.4}" y2="{:.4}"/>"#, fy(*ay), fy(*by));
        }
        for (x, y) in &self.crosses {
            let _ = writeln!(
                out,
                r#"<path d="M{:.4} {:.4}L{:.4} {:.4}M{:.4} {:.4}L{:.4} {:.4}"/>"#,
                x - r,
                fy(*y) - r,
                x + r,
                fy(*y) + r,
                x - r,
                fy(*y) + r,
                x + r,
                fy(*y) - r
            );
        }
        let _ = writeln!(out, "</g>");
        let _ = writeln!(out, r#"<g fill="black">"#);
        for (x, y) in &self.dots {
            let _ = writeln!(out, r#"<circle cx="{x:.4}" cy="{:.4}" r="{r:.4}"/>"#, fy(*y));
        }
        let _ = writeln!(out, "</g>");
        let _ = writeln!(out, r#"<g fill="none" stroke="red" stroke-width="{stroke:.4}">"#);
        for (x, y) in &self.marks {
            let _ = writeln!(out, r#"<circle cx="{x:.4}" cy="{:.4}" r="{:.4}"/>"#, fy(*y), 1.5 * r);
        }
        let _ = writeln!(out, "</g>");
        out.push_str("</svg>\n");
        out
    }
}

/// Group elements drawn for `copies` copies.
fn elements<S>(group: &SymmetryGroup<S>, copies: usize) -> Vec<i64> {
    let n = match group {
        SymmetryGroup::Rotation { k, .. } => copies.min(*k as usize),
        SymmetryGroup::Translation { .. } => copies,
    };
    (0..n.max(1) as i64).collect()
}

/// Strip boundaries for translations, the centre for rotations.
fn frame<S: Scalar>(sketch: &mut Sketch, group: &SymmetryGroup<S>, copies: usize, anchor: Option<P>) {
    match group {
        SymmetryGroup::Rotation { center, .. } => sketch.crosses.push(center.to_f64()),
        SymmetryGroup::Translation { v } => {
            let (vx, vy) = v.to_f64();
            let (nx, ny) = (-vy, vx);
            let (ax, ay) = anchor.unwrap_or((0.0, 0.0));
            let big = 1e3 * (vx.abs() + vy.abs());
            for j in 0..=copies.max(1) {
                let (cx, cy) = (ax + j as f64 * vx, ay + j as f64 * vy);
                sketch.dashed.push(((cx - big * nx, cy - big * ny), (cx + big * nx, cy + big * ny)));
            }
        }
    }
}

fn seg_f64<S: Scalar>(s: &Seg<S>) -> (P, P) {
    (s.p.to_f64(), s.q.to_f64())
}

/// The fundamental domain's left boundary: just before the leftmost point.
fn strip_anchor<S: Scalar>(group: &SymmetryGroup<S>, pts: &[P]) -> Option<P> {
    let SymmetryGroup::Translation { v } = group else { return None };
    let (vx, vy) = v.to_f64();
    let vv = vx * vx + vy * vy;
    let t = pts.iter().map(|(x, y)| (x * vx + y * vy) / vv).fold(f64::INFINITY, f64::min);
    let t = if t.is_finite() { t - 0.05 } else { 0.0 };
    Some((t * vx, t * vy))
}

pub fn render_system<S: Scalar>(sys: &ContactSystem<S>, copies: usize) -> String {
    let mut sketch = Sketch::default();
    let gs = elements(&sys.group, copies);
    for &g in &gs {
        for s in &sys.reps {
            sketch.solid.push(seg_f64(&sys.group.apply_seg(g, s)));
        }
    }
    if let Ok(survey) = sys.survey() {
        for c in &survey.contacts {
            for &g in &gs {
                let x = sys.reps[c.tail].end(c.end);
                sketch.marks.push(sys.group.apply(g, x).to_f64());
            }
        }
    }
    let pts: Vec<P> = sys.reps.iter().flat_map(|s| [s.p.to_f64(), s.q.to_f64()]).collect();
    frame(&mut sketch, &sys.group, copies, strip_anchor(&sys.group, &pts));
    sketch.finish()
}

pub fn render_ppt<S: Scalar>(real: &PptRealization<S>, copies: usize) -> String {
    let mut sketch = Sketch::default();
    for &g in &elements(&real.group, copies) {
        for e in &real.edges {
            let s = Seg::new(real.pos[e.tail].clone(), real.group.apply(e.g, &real.pos[e.head]));
            sketch.solid.push(seg_f64(&real.group.apply_seg(g, &s)));
        }
        for p in &real.pos {
            sketch.dots.push(real.group.apply(g, p).to_f64());
        }
    }
    let pts: Vec<P> = real.pos.iter().map(|p| p.to_f64()).collect();
    frame(&mut sketch, &real.group, copies, strip_anchor(&real.group, &pts));
    sketch.finish()
}

/// A schematic strip drawing: vertices spread across one period, each edge
/// drawn towards the copy of its head given by its gain.
pub fn render_map(map: &AnnulusMap, copies: usize) -> String {
    let mut sketch = Sketch::default();
    let n = map.n_vertices().max(1) as f64;
    let place = |v: usize| ((v as f64 + 0.5) / n, 0.5 + 0.2 * ((v % 3) as f64 - 1.0));
    for j in 0..copies.max(1) {
        let shift = j as f64;
        for (k, e) in map.edges().iter().enumerate() {
            let g = map.dart_gain(Dart::new(k, true)) as f64;
            let (tx, ty) = place(e.tail);
            let (hx, hy) = place(e.head);
            sketch.solid.push(((tx + shift, ty), (hx + g + shift, hy)));
        }
        for v in 0..map.n_vertices() {
            let (x, y) = place(v);
            sketch.dots.push((x + shift, y));
        }
    }
    for j in 0..=copies.max(1) {
        sketch.dashed.push(((j as f64, -1e3), (j as f64, 1e3)));
    }
    sketch.finish()
}
