//! Lattices of the form `T · Z^3`: enumeration in boxes, successive minima,
//! duals and the membership predicates used by the tree construction.

use crate::arith::{cross_i128, det3_i128, gcd3};
use crate::error::{Error, Result};
use crate::weight::Weight;
use nalgebra::Matrix3;
use serde::Serialize;
use std::cmp::Ordering;

pub type Mat3 = Matrix3<f64>;

/// Default bound on the predicted number of enumerated points.
pub const DEFAULT_CAP: f64 = 1e8;

/// Relative boundary tolerance for closed boxes.
pub const BOUNDARY_TOL: f64 = 1e-9;

/// Integer vector `(p1, p2, q)`. Ordered lexicographically on `(q, p1, p2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct IntTriple {
    pub p1: i64,
    pub p2: i64,
    pub q: i64,
}

impl IntTriple {
    pub const fn new(p1: i64, p2: i64, q: i64) -> Self {
        Self { p1, p2, q }
    }

    pub fn from_array(m: [i64; 3]) -> Self {
        Self::new(m[0], m[1], m[2])
    }

    pub fn to_array(self) -> [i64; 3] {
        [self.p1, self.p2, self.q]
    }

    pub fn is_zero(self) -> bool {
        self.p1 == 0 && self.p2 == 0 && self.q == 0
    }

    pub fn gcd(self) -> i64 {
        gcd3(self.p1, self.p2, self.q)
    }

    pub fn is_primitive(self) -> bool {
        self.gcd() == 1
    }

    pub fn neg(self) -> Self {
        Self::new(-self.p1, -self.p2, -self.q)
    }

    pub fn sub(self, o: Self) -> Self {
        Self::new(self.p1 - o.p1, self.p2 - o.p2, self.q - o.q)
    }

    pub fn add(self, o: Self) -> Self {
        Self::new(self.p1 + o.p1, self.p2 + o.p2, self.q + o.q)
    }

    pub fn cross(self, o: Self) -> [i128; 3] {
        cross_i128(self.to_array(), o.to_array())
    }

    /// The rational point `p / q`.
    pub fn hat(self) -> [f64; 2] {
        [self.p1 as f64 / self.q as f64, self.p2 as f64 / self.q as f64]
    }
}

impl Ord for IntTriple {
    fn cmp(&self, o: &Self) -> Ordering {
        (self.q, self.p1, self.p2).cmp(&(o.q, o.p1, o.p2))
    }
}

impl PartialOrd for IntTriple {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Closed box `{|x_i| <= r_i}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Box3 {
    pub r: [f64; 3],
}

impl Box3 {
    pub fn new(r1: f64, r2: f64, r3: f64) -> Result<Self> {
        let r = [r1, r2, r3];
        if r.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(Error::InvalidInput(format!("box half-widths must be positive, got {r:?}")));
        }
        Ok(Self { r })
    }

    pub fn cube(r: f64) -> Result<Self> {
        Self::new(r, r, r)
    }

    pub fn volume(&self) -> f64 {
        8.0 * self.r[0] * self.r[1] * self.r[2]
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { r: self.r.map(|x| x * s) }
    }
}

/// `max_i |v_i| / r_i`.
pub fn knorm(v: [f64; 3], k: &Box3) -> f64 {
    (0..3).map(|i| v[i].abs() / k.r[i]).fold(0.0, f64::max)
}

/// Horizontal shift `x` of the unipotent factor `h(x)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Shift {
    Real([f64; 2]),
    /// `x = num / den`, `den > 0`.
    Rational { num: [i64; 2], den: i64 },
}

impl Shift {
    pub fn value(&self) -> [f64; 2] {
        match *self {
            Shift::Real(x) => x,
            Shift::Rational { num, den } => [num[0] as f64 / den as f64, num[1] as f64 / den as f64],
        }
    }

    pub fn zero() -> Self {
        Shift::Rational { num: [0, 0], den: 1 }
    }
}

/// Factored form of a transform: `diag(d) · h(x)` or, when `dual`,
/// `diag(d) · h(x)^{-T}`. Images are evaluated from the factors so the
/// shift is applied to the integer vector before scaling.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Structure {
    pub diag: [f64; 3],
    pub shift: Shift,
    pub dual: bool,
    pub tag: Option<FlowTag>,
}

/// Provenance of a flow lattice `extra · a_t · h(x) · Z^3`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FlowTag {
    pub t: f64,
    pub w: Weight,
    pub extra: [f64; 3],
}

#[derive(Clone, Debug, PartialEq)]
pub struct LatticeRep {
    transform: Mat3,
    structure: Option<Structure>,
}

fn h_matrix(x: [f64; 2]) -> Mat3 {
    Mat3::new(1.0, 0.0, x[0], 0.0, 1.0, x[1], 0.0, 0.0, 1.0)
}

fn h_inv_transpose(x: [f64; 2]) -> Mat3 {
    Mat3::new(1.0, 0.0, 0.0, 0.0, 1.0, 0.0, -x[0], -x[1], 1.0)
}

pub fn flow_diag(w: &Weight, t: f64) -> [f64; 3] {
    [(w.w1() * t).exp(), (w.w2() * t).exp(), (-t).exp()]
}

impl LatticeRep {
    pub fn from_matrix(transform: Mat3) -> Result<Self> {
        let det = transform.determinant();
        if !det.is_finite() || det.abs() < 1e-15 {
            return Err(Error::SingularMatrix(det));
        }
        Ok(Self { transform, structure: None })
    }

    pub fn standard() -> Self {
        Self::unipotent([1.0; 3], Shift::zero())
    }

    pub fn diagonal(d: [f64; 3]) -> Result<Self> {
        if d.iter().any(|x| !x.is_finite() || *x == 0.0) {
            return Err(Error::SingularMatrix(d[0] * d[1] * d[2]));
        }
        Ok(Self::unipotent(d, Shift::zero()))
    }

    /// `diag(d) · h(x) · Z^3`.
    pub fn unipotent(diag: [f64; 3], shift: Shift) -> Self {
        Self::from_structure(Structure { diag, shift, dual: false, tag: None })
    }

    /// `a_t · h(x) · Z^3`.
    pub fn flow(w: &Weight, t: f64, shift: Shift) -> Self {
        Self::flow_with_left(w, t, shift, [1.0; 3])
    }

    /// `diag(extra) · a_t · h(x) · Z^3`.
    pub fn flow_with_left(w: &Weight, t: f64, shift: Shift, extra: [f64; 3]) -> Self {
        let a = flow_diag(w, t);
        let diag = [a[0] * extra[0], a[1] * extra[1], a[2] * extra[2]];
        Self::from_structure(Structure {
            diag,
            shift,
            dual: false,
            tag: Some(FlowTag { t, w: *w, extra }),
        })
    }

    fn from_structure(s: Structure) -> Self {
        let d = Mat3::from_diagonal(&s.diag.into());
        let x = s.shift.value();
        let transform = if s.dual { d * h_inv_transpose(x) } else { d * h_matrix(x) };
        Self { transform, structure: Some(s) }
    }

    pub fn transform(&self) -> &Mat3 {
        &self.transform
    }

    pub fn structure(&self) -> Option<&Structure> {
        self.structure.as_ref()
    }

    pub fn det(&self) -> f64 {
        match &self.structure {
            Some(s) => s.diag[0] * s.diag[1] * s.diag[2],
            None => self.transform.determinant(),
        }
    }

    pub fn covolume(&self) -> f64 {
        self.det().abs()
    }

    pub fn is_unimodular(&self) -> bool {
        (self.covolume() - 1.0).abs() <= 1e-9
    }

    /// Left-multiplies by `diag(d)`, keeping the factored form.
    pub fn left_diag(&self, d: [f64; 3]) -> Self {
        match self.structure {
            Some(s) => {
                let diag = [s.diag[0] * d[0], s.diag[1] * d[1], s.diag[2] * d[2]];
                let tag = s.tag.map(|t| FlowTag {
                    extra: [t.extra[0] * d[0], t.extra[1] * d[1], t.extra[2] * d[2]],
                    ..t
                });
                Self::from_structure(Structure { diag, tag, ..s })
            }
            None => Self {
                transform: Mat3::from_diagonal(&d.into()) * self.transform,
                structure: None,
            },
        }
    }

    /// Image `T m`.
    pub fn image(&self, m: IntTriple) -> [f64; 3] {
        let Some(s) = &self.structure else {
            let v = self.transform * nalgebra::Vector3::new(m.p1 as f64, m.p2 as f64, m.q as f64);
            return [v[0], v[1], v[2]];
        };
        let d = s.diag;
        match (s.dual, s.shift) {
            (false, Shift::Real(x)) => [
                d[0] * (m.q as f64).mul_add(x[0], m.p1 as f64),
                d[1] * (m.q as f64).mul_add(x[1], m.p2 as f64),
                d[2] * m.q as f64,
            ],
            (false, Shift::Rational { num, den }) => {
                let a = m.p1 as i128 * den as i128 + num[0] as i128 * m.q as i128;
                let b = m.p2 as i128 * den as i128 + num[1] as i128 * m.q as i128;
                [
                    d[0] * (a as f64 / den as f64),
                    d[1] * (b as f64 / den as f64),
                    d[2] * m.q as f64,
                ]
            }
            (true, Shift::Real(x)) => {
                let c = (m.q as f64) - (m.p1 as f64).mul_add(x[0], m.p2 as f64 * x[1]);
                [d[0] * m.p1 as f64, d[1] * m.p2 as f64, d[2] * c]
            }
            (true, Shift::Rational { num, den }) => {
                let c = m.q as i128 * den as i128
                    - num[0] as i128 * m.p1 as i128
                    - num[1] as i128 * m.p2 as i128;
                [d[0] * m.p1 as f64, d[1] * m.p2 as f64, d[2] * (c as f64 / den as f64)]
            }
        }
    }

    /// The dual lattice `T^{-T} Z^3`; pairing of coefficient vectors is the
    /// integer dot product.
    pub fn dual(&self) -> Result<Self> {
        let det = self.det();
        if !det.is_finite() || det.abs() < 1e-15 {
            return Err(Error::SingularMatrix(det));
        }
        match self.structure {
            Some(s) => {
                let diag = s.diag.map(|x| 1.0 / x);
                Ok(Self::from_structure(Structure { diag, shift: s.shift, dual: !s.dual, tag: None }))
            }
            None => {
                let inv = self.transform.try_inverse().ok_or(Error::SingularMatrix(det))?;
                Ok(Self { transform: inv.transpose(), structure: None })
            }
        }
    }
}

/// Dual of `L`; alias kept for symmetry with the other free functions.
pub fn dual_lattice(l: &LatticeRep) -> Result<LatticeRep> {
    l.dual()
}

struct Slicer {
    t: Mat3,
    rr: [f64; 3],
}

fn int_range(lo: f64, hi: f64) -> Option<(i64, i64)> {
    let a = (lo - 1e-9 * (1.0 + lo.abs())).ceil();
    let b = (hi + 1e-9 * (1.0 + hi.abs())).floor();
    if a > b {
        None
    } else {
        Some((a as i64, b as i64))
    }
}

impl Slicer {
    /// Range of `m1` over the polygon `{(m1, m2): |T (m1, m2, m3)| <= R}`.
    fn m1_range(&self, m3: f64) -> Option<(f64, f64)> {
        let mut rows: Vec<([f64; 2], f64, f64)> = Vec::with_capacity(3);
        for i in 0..3 {
            let a = [self.t[(i, 0)], self.t[(i, 1)]];
            let c = self.t[(i, 2)] * m3;
            let r = self.rr[i];
            if a[0] == 0.0 && a[1] == 0.0 {
                if c.abs() > r * (1.0 + 1e-12) {
                    return None;
                }
            } else {
                rows.push((a, c, r));
            }
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..rows.len() {
            for j in (i + 1)..rows.len() {
                let (ai, ci, ri) = rows[i];
                let (aj, cj, rj) = rows[j];
                let det = ai[0] * aj[1] - ai[1] * aj[0];
                let scale = ai[0].hypot(ai[1]) * aj[0].hypot(aj[1]);
                if det.abs() <= 1e-13 * scale {
                    continue;
                }
                for si in [-1.0, 1.0] {
                    for sj in [-1.0, 1.0] {
                        let bi = si * ri - ci;
                        let bj = sj * rj - cj;
                        let z0 = (bi * aj[1] - ai[1] * bj) / det;
                        let z1 = (ai[0] * bj - bi * aj[0]) / det;
                        let ok = rows.iter().all(|&(a, c, r)| {
                            let v = a[0] * z0 + a[1] * z1 + c;
                            let slack = 1e-9 * (r + c.abs() + a[0].abs() * z0.abs() + a[1].abs() * z1.abs());
                            v.abs() <= r + slack
                        });
                        if ok {
                            lo = lo.min(z0);
                            hi = hi.max(z0);
                        }
                    }
                }
            }
        }
        if lo <= hi {
            Some((lo, hi))
        } else {
            None
        }
    }

    fn m2_range(&self, m3: f64, m1: f64) -> Option<(f64, f64)> {
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        for i in 0..3 {
            let b = self.t[(i, 1)];
            let c = self.t[(i, 0)] * m1 + self.t[(i, 2)] * m3;
            let r = self.rr[i];
            if b == 0.0 {
                let slack = 1e-9 * (r + self.t[(i, 0)].abs() * m1.abs() + self.t[(i, 2)].abs() * m3.abs());
                if c.abs() > r + slack {
                    return None;
                }
            } else {
                let (x, y) = ((-r - c) / b, (r - c) / b);
                lo = lo.max(x.min(y));
                hi = hi.min(x.max(y));
            }
        }
        if lo <= hi {
            Some((lo, hi))
        } else {
            None
        }
    }
}

/// Visits every nonzero `m` with `T m` in the closed box `K` (relative
/// boundary tolerance [`BOUNDARY_TOL`]), in lexicographic `(q, p1, p2)` order.
pub fn for_each_point<F: FnMut(IntTriple, [f64; 3])>(
    l: &LatticeRep,
    k: &Box3,
    primitive_only: bool,
    cap: f64,
    mut f: F,
) -> Result<()> {
    let cov = l.covolume();
    let predicted = k.volume() / cov;
    if !(predicted <= cap) {
        return Err(Error::CapacityExceeded { predicted, cap });
    }
    let t = *l.transform();
    let tinv = t.try_inverse().ok_or(Error::SingularMatrix(cov))?;
    let rr = k.r.map(|x| x * (1.0 + BOUNDARY_TOL));
    let bound3: f64 = (0..3).map(|i| tinv[(2, i)].abs() * rr[i]).sum();
    if !(bound3 < 1e15) {
        return Err(Error::CapacityExceeded { predicted: bound3, cap });
    }
    let slicer = Slicer { t, rr };
    let Some((q_lo, q_hi)) = int_range(-bound3, bound3) else {
        return Ok(());
    };
    let lim = 1.0 + BOUNDARY_TOL;
    for m3 in q_lo..=q_hi {
        let Some((a, b)) = slicer.m1_range(m3 as f64) else { continue };
        let Some((p_lo, p_hi)) = int_range(a, b) else { continue };
        for m1 in p_lo..=p_hi {
            let Some((c, d)) = slicer.m2_range(m3 as f64, m1 as f64) else { continue };
            let Some((r_lo, r_hi)) = int_range(c, d) else { continue };
            for m2 in r_lo..=r_hi {
                let m = IntTriple::new(m1, m2, m3);
                if m.is_zero() {
                    continue;
                }
                let y = l.image(m);
                if knorm(y, k) > lim {
                    continue;
                }
                if primitive_only && !m.is_primitive() {
                    continue;
                }
                f(m, y);
            }
        }
    }
    Ok(())
}

pub fn enumerate_points(l: &LatticeRep, k: &Box3, primitive_only: bool) -> Result<Vec<IntTriple>> {
    enumerate_points_capped(l, k, primitive_only, DEFAULT_CAP)
}

pub fn enumerate_points_capped(
    l: &LatticeRep,
    k: &Box3,
    primitive_only: bool,
    cap: f64,
) -> Result<Vec<IntTriple>> {
    let mut out = Vec::new();
    for_each_point(l, k, primitive_only, cap, |m, _| out.push(m))?;
    Ok(out)
}

pub fn count_points(l: &LatticeRep, k: &Box3, primitive_only: bool, cap: f64) -> Result<u64> {
    let mut n = 0u64;
    for_each_point(l, k, primitive_only, cap, |_, _| n += 1)?;
    Ok(n)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MinimaReport {
    pub lambdas: [f64; 3],
    pub witnesses: [IntTriple; 3],
    /// `vol(K) / cov(L)`.
    pub theta: f64,
}

impl MinimaReport {
    pub fn minkowski_product(&self) -> f64 {
        self.lambdas.iter().product::<f64>() * self.theta
    }

    /// `8/6 <= λ1 λ2 λ3 θ <= 8` within `tol`.
    pub fn minkowski_holds(&self, tol: f64) -> bool {
        let p = self.minkowski_product();
        p >= 8.0 / 6.0 - tol && p <= 8.0 + tol
    }
}

/// Greedy independent selection from points sorted by K-norm.
pub(crate) fn pick_independent(points: &[(f64, IntTriple)], want: usize) -> Vec<(f64, IntTriple)> {
    let mut chosen: Vec<(f64, IntTriple)> = Vec::with_capacity(want);
    for &(n, m) in points {
        let independent = match chosen.len() {
            0 => !m.is_zero(),
            1 => chosen[0].1.cross(m) != [0, 0, 0],
            2 => det3_i128(chosen[0].1.to_array(), chosen[1].1.to_array(), m.to_array()) != 0,
            _ => false,
        };
        if independent {
            chosen.push((n, m));
            if chosen.len() == want {
                break;
            }
        }
    }
    chosen
}

/// Successive minima by expanding shells: the box is doubled until it holds
/// three independent points, after which the sorted K-norms give the minima
/// exactly.
pub fn successive_minima(l: &LatticeRep, k: &Box3) -> Result<MinimaReport> {
    successive_minima_capped(l, k, DEFAULT_CAP)
}

pub fn successive_minima_capped(l: &LatticeRep, k: &Box3, cap: f64) -> Result<MinimaReport> {
    let theta = k.volume() / l.covolume();
    let mut s = theta.powf(-1.0 / 3.0);
    loop {
        let ks = k.scaled(s);
        let mut pts: Vec<(f64, IntTriple)> = Vec::new();
        for_each_point(l, &ks, false, cap, |m, y| pts.push((knorm(y, k), m)))?;
        pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let chosen = pick_independent(&pts, 3);
        if chosen.len() == 3 {
            return Ok(MinimaReport {
                lambdas: [chosen[0].0, chosen[1].0, chosen[2].0],
                witnesses: [chosen[0].1, chosen[1].1, chosen[2].1],
                theta,
            });
        }
        s *= 2.0;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KstarOutcome {
    pub member: bool,
    /// Shortest dual vector below `eps`, as coefficients and image.
    pub witness: Option<IntTriple>,
    pub witness_norm: Option<f64>,
}

fn euclid(y: [f64; 3]) -> f64 {
    (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).sqrt()
}

fn canonical_sign(m: IntTriple) -> IntTriple {
    let first = [m.p1, m.p2, m.q].into_iter().find(|&c| c != 0).unwrap_or(0);
    if first < 0 {
        m.neg()
    } else {
        m
    }
}

/// Shortest nonzero Euclidean vector inside the cube of half-width `radius`,
/// ties broken towards the sign-normalised vector largest in `(p1, p2, q)`.
fn shortest_in_cube(l: &LatticeRep, radius: f64, cap: f64) -> Result<Option<(IntTriple, f64)>> {
    let k = Box3::cube(radius)?;
    let mut best: Option<(IntTriple, f64)> = None;
    for_each_point(l, &k, false, cap, |m, y| {
        let n = euclid(y);
        let m = canonical_sign(m);
        let better = match best {
            None => true,
            Some((bm, bn)) => {
                if n < bn * (1.0 - 1e-12) {
                    true
                } else if n <= bn * (1.0 + 1e-12) {
                    m.to_array() > bm.to_array()
                } else {
                    false
                }
            }
        };
        if better {
            best = Some((m, n));
        }
    })?;
    Ok(best)
}

/// Whether every nonzero dual vector has Euclidean norm at least `eps`.
pub fn in_kstar(l: &LatticeRep, eps: f64) -> Result<KstarOutcome> {
    in_kstar_capped(l, eps, DEFAULT_CAP)
}

pub fn in_kstar_capped(l: &LatticeRep, eps: f64, cap: f64) -> Result<KstarOutcome> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidInput(format!("eps must be positive, got {eps}")));
    }
    if !l.is_unimodular() {
        return Err(Error::PreconditionViolated(format!(
            "lattice not unimodular (covolume {})",
            l.covolume()
        )));
    }
    let dual = l.dual()?;
    let found = shortest_in_cube(&dual, eps, cap)?;
    Ok(match found {
        Some((m, n)) if n < eps * (1.0 - 1e-12) => KstarOutcome {
            member: false,
            witness: Some(m),
            witness_norm: Some(n),
        },
        _ => KstarOutcome { member: true, witness: None, witness_norm: None },
    })
}

/// Euclidean systole with its witness. The search radius starts from the
/// Minkowski bound `sqrt(3) cov^{1/3}` and the basis images.
pub fn systole(l: &LatticeRep, cap: f64) -> Result<(f64, IntTriple)> {
    let mut radius = 3f64.sqrt() * l.covolume().cbrt();
    for e in [IntTriple::new(1, 0, 0), IntTriple::new(0, 1, 0), IntTriple::new(0, 0, 1)] {
        radius = radius.min(euclid(l.image(e)));
    }
    match shortest_in_cube(l, radius * (1.0 + 1e-9), cap)? {
        Some((m, n)) => Ok((n, m)),
        None => Err(Error::InvalidInput("no lattice vector found within the systole bound".into())),
    }
}

/// Returns `r` when `L ∩ R e3 = r Z e3` with `1/2 < r <= 1`.
pub fn in_l3prime(l: &LatticeRep) -> Option<f64> {
    let tol = 1e-9;
    if let Some(Structure { diag, shift: Shift::Rational { num, den }, dual: false, .. }) = l.structure {
        // (p1, p2, q) hits the axis iff q num / den is integral
        let q = den / gcd3(num[0], num[1], den);
        let r = (diag[2] * q as f64).abs();
        return (r > 0.5 + tol && r <= 1.0 + tol).then_some(r);
    }
    let k = Box3 { r: [tol, tol, 1.0 + tol] };
    let mut best: Option<f64> = None;
    for_each_point(l, &k, false, DEFAULT_CAP, |_, y| {
        let r = y[2].abs();
        if r > 0.0 && best.is_none_or(|b| r < b) {
            best = Some(r);
        }
    })
    .ok()?;
    best.filter(|&r| r > 0.5 + tol && r <= 1.0 + tol)
}
