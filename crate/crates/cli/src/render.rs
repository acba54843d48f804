//! SVG pictures of the n-th piecewise-linear approximation of K_q.

use kq_core::numeric::{Field, FieldElement};
use kq_core::slice::psi;
use std::fmt::Write;
use std::sync::Arc;

/// Above this the polyline has 3^12 + 1 points, which is plenty.
pub const MAX_RESOLUTION: usize = 12;

#[derive(Clone, Debug)]
pub enum Overlay {
    /// Horizontal line at height y ∈ [0, 1].
    SliceLine {
        y: f64,
    },
    Point {
        x: f64,
        y: f64,
    },
    /// Closed intervals of heights drawn as a band down the left edge.
    GapBand {
        gaps: Vec<(f64, f64)>,
    },
}

#[derive(Clone, Debug)]
pub struct RenderSpec {
    pub width: u32,
    pub height: u32,
    pub iterations: usize,
    pub overlays: Vec<Overlay>,
}

/// The 3^n + 1 breakpoints of the n-th iterate, exactly: the point over
/// x = π₃(w) is the image of (0, 0) under the composed maps for w, and the
/// curve ends at (1, 1).
pub fn breakpoints(field: &Arc<Field>, n: usize) -> Vec<(f64, FieldElement)> {
    let maps = psi(field);
    let mut pieces = vec![(FieldElement::one(field), FieldElement::zero(field))];
    for _ in 0..n {
        let mut next = Vec::with_capacity(pieces.len() * 3);
        for (a, b) in &pieces {
            for (ai, bi) in &maps {
                next.push((a * ai, &(a * bi) + b));
            }
        }
        pieces = next;
    }
    let count = pieces.len() as f64;
    let mut out: Vec<(f64, FieldElement)> =
        pieces.into_iter().enumerate().map(|(k, (_, b))| (k as f64 / count, b)).collect();
    out.push((1.0, FieldElement::one(field)));
    out
}

pub fn render_kq(field: &Arc<Field>, spec: &RenderSpec) -> String {
    let n = spec.iterations.min(MAX_RESOLUTION);
    let (w, h) = (spec.width as f64, spec.height as f64);
    let px = |x: f64| x * w;
    let py = |y: f64| (1.0 - y) * h;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        spec.width, spec.height, spec.width, spec.height
    );
    let _ = writeln!(
        svg,
        r#"<rect x="0" y="0" width="{}" height="{}" fill="white" stroke="black"/>"#,
        spec.width, spec.height
    );
    let mut pts = String::new();
    for (i, (x, y)) in breakpoints(field, n).iter().enumerate() {
        if i > 0 {
            pts.push(' ');
        }
        let _ = write!(pts, "{:.3},{:.3}", px(*x), py(y.to_f64()));
    }
    let _ = writeln!(svg, r#"<polyline fill="none" stroke="black" stroke-width="0.5" points="{pts}"/>"#);
    for o in &spec.overlays {
        match o {
            Overlay::SliceLine { y } => {
                let _ = writeln!(
                    svg,
                    r#"<line x1="0" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="red" stroke-width="0.5"/>"#,
                    py(*y),
                    w,
                    py(*y)
                );
            }
            Overlay::Point { x, y } => {
                let _ = writeln!(
                    svg,
                    r#"<circle cx="{:.3}" cy="{:.3}" r="2.5" fill="none" stroke="blue"/>"#,
                    px(*x),
                    py(*y)
                );
            }
            Overlay::GapBand { gaps } => {
                for (lo, hi) in gaps {
                    let _ = writeln!(
                        svg,
                        r#"<rect x="0" y="{:.3}" width="{:.3}" height="{:.3}" fill="orange" opacity="0.6"/>"#,
                        py(*hi),
                        w / 60.0,
                        (py(*lo) - py(*hi)).max(0.2)
                    );
                }
            }
        }
    }
    svg.push_str("</svg>\n");
    svg
}
