//! Axis-parallel rectangles and convex polygon clipping in the plane.

use serde::Serialize;

/// Closed rectangle `I(c; h1, h2) = [c1 - h1, c1 + h1] x [c2 - h2, c2 + h2]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Rect {
    pub center: [f64; 2],
    pub half: [f64; 2],
}

impl Rect {
    pub fn new(center: [f64; 2], half: [f64; 2]) -> Self {
        Self { center, half }
    }

    pub fn lo(&self, i: usize) -> f64 {
        self.center[i] - self.half[i]
    }

    pub fn hi(&self, i: usize) -> f64 {
        self.center[i] + self.half[i]
    }

    /// `[lo1, hi1, lo2, hi2]`.
    pub fn bounds(&self) -> [f64; 4] {
        [self.lo(0), self.hi(0), self.lo(1), self.hi(1)]
    }

    pub fn contains(&self, x: [f64; 2]) -> bool {
        (0..2).all(|i| (x[i] - self.center[i]).abs() <= self.half[i])
    }

    /// Open-rectangle membership.
    pub fn contains_open(&self, x: [f64; 2]) -> bool {
        (0..2).all(|i| (x[i] - self.center[i]).abs() < self.half[i])
    }

    pub fn contains_rect(&self, o: &Rect, tol: f64) -> bool {
        (0..2).all(|i| o.lo(i) >= self.lo(i) - tol && o.hi(i) <= self.hi(i) + tol)
    }

    /// Per-axis gaps; zero when the projections overlap.
    pub fn gaps(&self, o: &Rect) -> [f64; 2] {
        let g = |i: usize| {
            ((self.center[i] - o.center[i]).abs() - self.half[i] - o.half[i]).max(0.0)
        };
        [g(0), g(1)]
    }

    /// Euclidean distance between the two closed rectangles.
    pub fn distance(&self, o: &Rect) -> f64 {
        let [a, b] = self.gaps(o);
        a.hypot(b)
    }

    pub fn area(&self) -> f64 {
        4.0 * self.half[0] * self.half[1]
    }
}

/// Clips a polygon against the half-plane `a . p <= b` (Sutherland-Hodgman step).
pub fn clip_half_plane(poly: &[[f64; 2]], a: [f64; 2], b: f64) -> Vec<[f64; 2]> {
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 1);
    if n == 0 {
        return out;
    }
    let side = |p: [f64; 2]| a[0] * p[0] + a[1] * p[1] - b;
    for i in 0..n {
        let cur = poly[i];
        let prev = poly[(i + n - 1) % n];
        let (sc, sp) = (side(cur), side(prev));
        if sc <= 0.0 {
            if sp > 0.0 {
                out.push(intersect(prev, cur, sp, sc));
            }
            out.push(cur);
        } else if sp <= 0.0 {
            out.push(intersect(prev, cur, sp, sc));
        }
    }
    out
}

fn intersect(p: [f64; 2], q: [f64; 2], sp: f64, sq: f64) -> [f64; 2] {
    let t = sp / (sp - sq);
    [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]
}

/// Shoelace area (absolute value).
pub fn polygon_area(poly: &[[f64; 2]]) -> f64 {
    let n = poly.len();
    let mut s = 0.0;
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        s += p[0] * q[1] - q[0] * p[1];
    }
    s.abs() / 2.0
}
