//! Exact lattice-point counts: primitive
//! densities, ratio growth, hyperplane slices and the bad-hyperplane sets.

use crate::arith::{dot_i128, mobius_table, zeta3_inv};
use crate::error::{Error, Result};
use crate::geom::{clip_half_plane, polygon_area};
use crate::lattice::{
    for_each_point, in_kstar_capped, in_l3prime, knorm, pick_independent, successive_minima_capped,
    Box3, IntTriple, LatticeRep, BOUNDARY_TOL, DEFAULT_CAP,
};
use crate::weight::Weight;
use serde::Serialize;
use std::collections::BTreeSet;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CountReport {
    pub context: String,
    pub count: u64,
    /// `vol(K) / cov(L)`.
    pub theta: f64,
    pub ratio: f64,
    pub bound_window: Option<[f64; 2]>,
    pub pass: Option<bool>,
}

impl CountReport {
    fn new(context: String, count: u64, theta: f64, window: Option<[f64; 2]>) -> Self {
        let ratio = count as f64 / theta;
        let pass = window.map(|w| ratio >= w[0] && ratio <= w[1]);
        Self { context, count, theta, ratio, bound_window: window, pass }
    }
}

fn context(k: &Box3, l: &LatticeRep) -> String {
    format!("K = {:?}, covolume {:.12}", k.r, l.covolume())
}

fn theta(k: &Box3, l: &LatticeRep) -> f64 {
    k.volume() / l.covolume()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityReport {
    pub report: CountReport,
    pub zeta3_inv: f64,
    pub deviation: f64,
    pub lambda3: f64,
    /// Primitive points with `-r_i <= y_i < r_i`, which carries no boundary excess.
    pub half_open_count: u64,
    pub half_open_ratio: f64,
    pub half_open_deviation: f64,
}

/// Primitive points of `L` in `K` against `ζ(3)^{-1} θ(K, L)`; needs `λ3(K, L) <= 1`.
pub fn primitive_density(k: &Box3, l: &LatticeRep) -> Result<DensityReport> {
    let mins = successive_minima_capped(l, k, DEFAULT_CAP)?;
    let lambda3 = mins.lambdas[2];
    if lambda3 > 1.0 + BOUNDARY_TOL {
        return Err(Error::PreconditionViolated(format!("lambda3 = {lambda3} > 1")));
    }
    let mut n = 0u64;
    let mut h = 0u64;
    for_each_point(l, k, true, DEFAULT_CAP, |_, y| {
        n += 1;
        if (0..3).all(|i| y[i] < k.r[i] * (1.0 - BOUNDARY_TOL)) {
            h += 1;
        }
    })?;
    let report = CountReport::new(format!("primitive, {}", context(k, l)), n, theta(k, l), None);
    let z = zeta3_inv();
    let half_open_ratio = h as f64 / report.theta;
    Ok(DensityReport {
        deviation: (report.ratio - z).abs(),
        zeta3_inv: z,
        report,
        lambda3,
        half_open_count: h,
        half_open_ratio,
        half_open_deviation: (half_open_ratio - z).abs(),
    })
}

/// All nonzero points of `L` in `K`.
pub fn all_points_count(k: &Box3, l: &LatticeRep) -> Result<CountReport> {
    let mut n = 0u64;
    for_each_point(l, k, false, DEFAULT_CAP, |_, _| n += 1)?;
    Ok(CountReport::new(format!("all nonzero, {}", context(k, l)), n, theta(k, l), None))
}

/// `Σ_{n <= 1/λ1} μ(n) #(K ∩ (nL \ {0}))`, counted with plain enumeration
/// of `K / n`.
pub fn mobius_primitive_count(k: &Box3, l: &LatticeRep) -> Result<u64> {
    let mins = successive_minima_capped(l, k, DEFAULT_CAP)?;
    let top = (1.0 / mins.lambdas[0] * (1.0 + BOUNDARY_TOL)).floor() as usize;
    let mu = mobius_table(top.max(1));
    let mut total: i64 = 0;
    for (n, &m) in mu.iter().enumerate().skip(1) {
        if m == 0 {
            continue;
        }
        let mut c = 0i64;
        for_each_point(l, &k.scaled(1.0 / n as f64), false, DEFAULT_CAP, |_, _| c += 1)?;
        total += m as i64 * c;
    }
    Ok(total as u64)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioBoundsReport {
    pub count_s: u64,
    pub count_s_prime: u64,
    pub ratio: f64,
    /// `ratio / (s'/s)^i` and `ratio / (s'/s)^j`.
    pub normalized: [f64; 2],
    pub exponents: [usize; 2],
    pub window: [f64; 2],
    pub pass: bool,
}

pub const RATIO_WINDOW: [f64; 2] = [1.0 / 64.0, 64.0];

/// Counts in `sK` and `s'K` for `λ_i <= s <= s' <= λ_{j+1}` (`λ_0 = 0`, `λ_4 = ∞`).
pub fn count_ratio_bounds(
    k: &Box3,
    l: &LatticeRep,
    s: f64,
    s_prime: f64,
    i: usize,
    j: usize,
    window: [f64; 2],
) -> Result<RatioBoundsReport> {
    if i > 3 || j > 3 || i > j {
        return Err(Error::InvalidInput(format!("need 0 <= i <= j <= 3, got ({i}, {j})")));
    }
    if !(s > 0.0 && s <= s_prime) {
        return Err(Error::InvalidInput(format!("need 0 < s <= s', got ({s}, {s_prime})")));
    }
    let lam = successive_minima_capped(l, k, DEFAULT_CAP)?.lambdas;
    let lam_i = if i == 0 { 0.0 } else { lam[i - 1] };
    let lam_j1 = if j == 3 { f64::INFINITY } else { lam[j] };
    let tol = 1.0 + BOUNDARY_TOL;
    if !(lam_i <= s * tol && s_prime <= lam_j1 * tol) {
        return Err(Error::PreconditionViolated(format!(
            "need lambda_{i} = {lam_i} <= s = {s} <= s' = {s_prime} <= lambda_{} = {lam_j1}",
            j + 1
        )));
    }
    let mut a = 0u64;
    for_each_point(l, &k.scaled(s), false, DEFAULT_CAP, |_, _| a += 1)?;
    let mut b = 0u64;
    for_each_point(l, &k.scaled(s_prime), false, DEFAULT_CAP, |_, _| b += 1)?;
    if a == 0 {
        return Err(Error::PreconditionViolated(format!("sK holds no lattice point at s = {s}")));
    }
    let ratio = b as f64 / a as f64;
    let g = s_prime / s;
    let normalized = [ratio / g.powi(i as i32), ratio / g.powi(j as i32)];
    let pass = normalized.iter().all(|&x| x >= window[0] && x <= window[1]);
    Ok(RatioBoundsReport { count_s: a, count_s_prime: b, ratio, normalized, exponents: [i, j], window, pass })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SliceReport {
    pub slice_area: f64,
    /// `‖φ‖ vol(K) / ‖φ‖_K`.
    pub reference: f64,
    pub ratio: f64,
    pub window: [f64; 2],
    pub pass: bool,
    pub vertices: usize,
}

pub const SLICE_WINDOW: [f64; 2] = [1.0 / 12.0, 3.0];

/// Area of `K ∩ ker φ` by clipping, compared with `‖φ‖ vol(K) / ‖φ‖_K`.
pub fn hyperplane_slice(k: &Box3, phi: [f64; 3]) -> Result<SliceReport> {
    let norm = (phi[0] * phi[0] + phi[1] * phi[1] + phi[2] * phi[2]).sqrt();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::ZeroFunctional);
    }
    let n = phi.map(|x| x / norm);
    // orthonormal basis of the plane
    let pivot = if n[0].abs() <= n[1].abs() && n[0].abs() <= n[2].abs() {
        [1.0, 0.0, 0.0]
    } else if n[1].abs() <= n[2].abs() {
        [0.0, 1.0, 0.0]
    } else {
        [0.0, 0.0, 1.0]
    };
    let cross = |a: [f64; 3], b: [f64; 3]| {
        [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
    };
    let e1 = cross(n, pivot);
    let l1 = (e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]).sqrt();
    let e1 = e1.map(|x| x / l1);
    let e2 = cross(n, e1);
    let big = 2.0 * (k.r[0] + k.r[1] + k.r[2]);
    let mut poly = vec![[-big, -big], [big, -big], [big, big], [-big, big]];
    for i in 0..3 {
        let a = [e1[i], e2[i]];
        poly = clip_half_plane(&poly, a, k.r[i]);
        poly = clip_half_plane(&poly, [-a[0], -a[1]], k.r[i]);
    }
    let slice_area = polygon_area(&poly);
    let dual_norm: f64 = (0..3).map(|i| phi[i].abs() * k.r[i]).sum();
    let reference = norm * k.volume() / dual_norm;
    let ratio = slice_area / reference;
    let window = SLICE_WINDOW;
    Ok(SliceReport {
        slice_area,
        reference,
        ratio,
        window,
        pass: ratio >= window[0] && ratio <= window[1],
        vertices: poly.len(),
    })
}

fn validate_r(r: [f64; 3], s: f64) -> Result<()> {
    if !(r[0] >= 1.0 && r[0] <= r[1] && r[2] == 1.0) {
        return Err(Error::InvalidInput(format!("need 1 <= r1 <= r2 and r3 = 1, got {r:?}")));
    }
    if !(s > 0.0 && s < 0.5) {
        return Err(Error::InvalidInput(format!("need 0 < s < 1/2, got {s}")));
    }
    Ok(())
}

/// Box of `N_q(r, s)` in dual coordinates.
pub fn n_q_box(r: [f64; 3], s: f64, q: f64) -> Box3 {
    Box3 { r: [s.min(q / r[0]), s.min(q / r[1]), q] }
}

/// `‖φ‖_r = max{r1 |x1|, r2 |x2|, |x3|}`.
pub fn r_norm(y: [f64; 3], r: [f64; 3]) -> f64 {
    (r[0] * y[0].abs()).max(r[1] * y[1].abs()).max(y[2].abs())
}

fn canonical(m: IntTriple) -> IntTriple {
    let first = [m.p1, m.p2, m.q].into_iter().find(|&c| c != 0).unwrap_or(0);
    if first < 0 {
        m.neg()
    } else {
        m
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BadSetReport {
    pub r: [f64; 3],
    pub s: f64,
    /// `3 s r2`.
    pub q: f64,
    /// Primitive dual vectors in `N_q`, one per sign pair.
    pub functionals: Vec<IntTriple>,
    pub count: u64,
    pub vol: f64,
    /// `count / (s^{1/2} vol)`.
    pub ratio_sqrt: f64,
    /// `count / (s^2 vol)`.
    pub ratio_sq: f64,
    pub equal_case: bool,
}

/// `𝒮(L, r, s)`: primitive points of `M_r` killed by some primitive
/// functional of `N_{3 s r2}(r, s)`; pairings are exact integer dot products.
pub fn bad_hyperplane_count(l: &LatticeRep, r: [f64; 3], s: f64) -> Result<BadSetReport> {
    bad_hyperplane_count_capped(l, r, s, DEFAULT_CAP)
}

pub fn bad_hyperplane_count_capped(l: &LatticeRep, r: [f64; 3], s: f64, cap: f64) -> Result<BadSetReport> {
    validate_r(r, s)?;
    let q = 3.0 * s * r[1];
    let dual = l.dual()?;
    let mut fset = BTreeSet::new();
    for_each_point(&dual, &n_q_box(r, s, q), true, cap, |m, _| {
        fset.insert(canonical(m));
    })?;
    let functionals: Vec<IntTriple> = fset.into_iter().collect();
    let m_r = Box3 { r };
    let mut count = 0u64;
    if !functionals.is_empty() {
        for_each_point(l, &m_r, true, cap, |m, _| {
            if functionals.iter().any(|f| dot_i128(f.to_array(), m.to_array()) == 0) {
                count += 1;
            }
        })?;
    }
    let vol = m_r.volume();
    Ok(BadSetReport {
        r,
        s,
        q,
        functionals,
        count,
        vol,
        ratio_sqrt: count as f64 / (s.sqrt() * vol),
        ratio_sq: count as f64 / (s * s * vol),
        equal_case: r[0] == r[1],
    })
}

/// `q_i(L, r, s)`: the smallest `q` for which `N_q(r, s) ∩ L*` holds `i`
/// independent vectors, searched by doubling up to `limit`.
pub fn q_minima(l: &LatticeRep, r: [f64; 3], s: f64, limit: f64) -> Result<[Option<f64>; 3]> {
    validate_r(r, s)?;
    let dual = l.dual()?;
    let mut q = 1.0f64;
    loop {
        let top = q.min(limit);
        let mut pts = Vec::new();
        for_each_point(&dual, &n_q_box(r, s, top), false, DEFAULT_CAP, |m, y| pts.push((r_norm(y, r), m)))?;
        pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let chosen = pick_independent(&pts, 3);
        if chosen.len() == 3 || top >= limit {
            let mut out = [None; 3];
            for (i, c) in chosen.iter().enumerate() {
                out[i] = Some(c.0);
            }
            return Ok(out);
        }
        q *= 2.0;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Hypothesis {
    pub name: String,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ApplicationReport {
    pub which: u8,
    pub eps: f64,
    pub s: f64,
    pub t: f64,
    pub r: [f64; 3],
    pub q: [Option<f64>; 3],
    pub hypotheses: Vec<Hypothesis>,
    /// The lower exponential constraint on `eps` (rarely met at desk scale).
    pub exponential_regime: bool,
    pub bad: BadSetReport,
    /// `ε^{1/2} vol(M_r)` or `s vol(M_r)`.
    pub bound: f64,
    pub measured_ratio: f64,
}

/// Transports `L` by `a_t` (case 1) or `b_t` (case 2) and measures `#𝒮`
/// against the bound of the corresponding case; the small constants of the
/// statements are taken as 1.
pub fn application_regimes(which: u8, l: &LatticeRep, w: &Weight, eps: f64, s: f64, t: f64) -> Result<ApplicationReport> {
    w.require_nondegenerate()?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidInput(format!("t must be positive, got {t}")));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidInput(format!("eps must be positive, got {eps}")));
    }
    let (w1, w2) = (w.w1(), w.w2());
    let kstar = in_kstar_capped(l, eps * eps, DEFAULT_CAP)?;
    if !kstar.member {
        return Err(Error::PreconditionViolated(format!(
            "lattice not in K*_(eps^2): dual vector {:?} of norm {:e} < {:e}",
            kstar.witness,
            kstar.witness_norm.unwrap_or(0.0),
            eps * eps
        )));
    }
    let (s, r, moved, exponential_regime) = match which {
        1 => {
            if !(eps < 1.0) {
                return Err(Error::PreconditionViolated(format!("case 1 needs eps < 1, got {eps}")));
            }
            let s1 = eps * eps;
            let r = [eps * t.exp(), eps * t.exp(), 1.0];
            let moved = l.left_diag([(w1 * t).exp(), (w2 * t).exp(), (-t).exp()]);
            (s1, r, moved, (-w2 * t / 20.0).exp() < eps)
        }
        2 => {
            if !(eps < s) {
                return Err(Error::PreconditionViolated(format!("case 2 needs eps < s, got eps = {eps}, s = {s}")));
            }
            if !(s < 0.5) {
                return Err(Error::PreconditionViolated(format!("case 2 needs s < 1/2, got {s}")));
            }
            let r = [eps * (w1 * t).exp(), eps * ((w1 + 2.0 * w2) * t).exp(), 1.0];
            let moved = l.left_diag([((w1 - w2) * t).exp(), (2.0 * w2 * t).exp(), (-t).exp()]);
            let delta = w2.min(w1 - w2) / 20.0;
            (s, r, moved, (-delta * t).exp() < eps)
        }
        _ => return Err(Error::InvalidInput(format!("which must be 1 or 2, got {which}"))),
    };
    if r[0] < 1.0 {
        return Err(Error::PreconditionViolated(format!("r1 = {} < 1; increase t", r[0])));
    }
    let mut hypotheses = Vec::new();
    if which == 1 {
        hypotheses.push(Hypothesis { name: "L in L3'".into(), holds: in_l3prime(l).is_some() });
    }
    let limit = (s.powi(-2)).max(4.0 * r[1]).max(1.0);
    let q = q_minima(&moved, r, s, limit)?;
    hypotheses.push(Hypothesis {
        name: "q1 >= s^-2".into(),
        holds: q[0].is_none_or(|q1| q1 >= s.powi(-2)),
    });
    if which == 1 {
        hypotheses.push(Hypothesis {
            name: "q3 <= 2 s^(-1/2) r2".into(),
            holds: q[2].is_some_and(|q3| q3 <= 2.0 * r[1] / s.sqrt()),
        });
    } else {
        hypotheses.push(Hypothesis {
            name: "q3 log q3 <= s r2".into(),
            holds: q[2].is_some_and(|q3| q3 * q3.ln() <= s * r[1]),
        });
    }
    let bad = bad_hyperplane_count(&moved, r, s)?;
    let bound = if which == 1 { eps.sqrt() * bad.vol } else { s * bad.vol };
    Ok(ApplicationReport {
        which,
        eps,
        s,
        t,
        r,
        q,
        hypotheses,
        exponential_regime,
        measured_ratio: bad.count as f64 / bound,
        bad,
        bound,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BracketReport {
    pub hypotheses_hold: bool,
    pub lambdas: [f64; 3],
    pub count: u64,
    pub theta: f64,
    /// `[4/(5ζ(3)), 6/(5ζ(3))]`.
    pub window: [f64; 2],
    pub in_window: bool,
}

/// Primitive count bracket under `λ3 <= c` and `-λ3 log λ1 <= c`, at a user-chosen `c`.
pub fn many_vectors_bracket(k: &Box3, l: &LatticeRep, c: f64) -> Result<BracketReport> {
    let mins = successive_minima_capped(l, k, DEFAULT_CAP)?;
    let [l1, _, l3] = mins.lambdas;
    let hypotheses_hold = l3 <= c && -l3 * l1.ln() <= c;
    let mut n = 0u64;
    for_each_point(l, k, true, DEFAULT_CAP, |_, _| n += 1)?;
    let z = zeta3_inv();
    let window = [0.8 * z, 1.2 * z];
    let ratio = n as f64 / mins.theta;
    Ok(BracketReport {
        hypotheses_hold,
        lambdas: mins.lambdas,
        count: n,
        theta: mins.theta,
        window,
        in_window: ratio >= window[0] && ratio <= window[1],
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BoundaryBookkeeping {
    pub closed: u64,
    pub open: u64,
    pub half_open: u64,
    pub boundary: u64,
}

/// Closed, open and half-open (`-r_i <= x_i < r_i`) counts of nonzero points.
pub fn boundary_bookkeeping(k: &Box3, l: &LatticeRep) -> Result<BoundaryBookkeeping> {
    let tol = BOUNDARY_TOL;
    let mut out = BoundaryBookkeeping { closed: 0, open: 0, half_open: 0, boundary: 0 };
    for_each_point(l, k, false, DEFAULT_CAP, |_, y| {
        out.closed += 1;
        if knorm(y, k) < 1.0 - tol {
            out.open += 1;
        } else {
            out.boundary += 1;
        }
        if (0..3).all(|i| y[i] < k.r[i] * (1.0 - tol)) {
            out.half_open += 1;
        }
    })?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_counts() {
        let z3 = LatticeRep::standard();
        let r = all_points_count(&Box3::cube(5.5).unwrap(), &z3).unwrap();
        assert_eq!(r.count, 1330);
        assert_eq!(r.theta, 1331.0);
        let rb = count_ratio_bounds(&Box3::cube(1.0).unwrap(), &z3, 1.0, 4.0, 3, 3, RATIO_WINDOW).unwrap();
        assert_eq!((rb.count_s, rb.count_s_prime), (26, 728));
        assert_eq!(rb.normalized[0], 0.4375);
    }

    #[test]
    fn unit_slice() {
        let s = hyperplane_slice(&Box3::cube(1.0).unwrap(), [0.0, 0.0, 1.0]).unwrap();
        assert!((s.slice_area - 4.0).abs() < 1e-12);
        assert_eq!(s.reference, 8.0);
        assert!(s.pass);
        assert_eq!(hyperplane_slice(&Box3::cube(1.0).unwrap(), [0.0; 3]), Err(Error::ZeroFunctional));
    }
}
