//! Weighted best approximations: the quasi-norm `‖·‖_w`, record sequences
//! `Σ_x`, the function `r(u)` and the rectangles around `û`.

use crate::arith::{nearest_int_scaled, round_div_half_even};
use crate::error::{Error, Result};
use crate::geom::Rect;
use crate::lattice::IntTriple;
use crate::weight::{Number, Weight};
use num_integer::Integer;
use serde::Serialize;

/// Point being approximated. Rational targets are handled exactly; real
/// targets may carry a low-order part for the extended-precision path.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum ApproxTarget {
    Real { hi: [f64; 2], lo: [f64; 2] },
    Rational { num: [i64; 2], den: i64 },
}

/// Validity envelope of the plain binary64 path.
pub const QMAX_ENVELOPE: i64 = 1_000_000;

impl ApproxTarget {
    pub fn real(x: [f64; 2]) -> Self {
        ApproxTarget::Real { hi: x, lo: [0.0, 0.0] }
    }

    /// `x = hi + lo` with `|lo|` far below an ulp of `hi`.
    pub fn extended(hi: [f64; 2], lo: [f64; 2]) -> Self {
        ApproxTarget::Real { hi, lo }
    }

    pub fn rational(num: [i64; 2], den: i64) -> Result<Self> {
        if den <= 0 {
            return Err(Error::InvalidInput(format!("denominator must be positive, got {den}")));
        }
        let g = num[0].gcd(&num[1]).gcd(&den);
        Ok(ApproxTarget::Rational { num: [num[0] / g, num[1] / g], den: den / g })
    }

    /// Parses `"a,b"` where each component is an integer, `n/d` or a decimal
    /// (all exact) or a float in exponent form (real).
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 2 {
            return Err(Error::InvalidInput(format!("expected two components, got '{s}'")));
        }
        let a = Number::parse(parts[0])?;
        let b = Number::parse(parts[1])?;
        match (a, b) {
            (Number::Exact(a), Number::Exact(b)) => {
                let den = a.denom().lcm(b.denom());
                let n1 = a.numer() * (den / a.denom());
                let n2 = b.numer() * (den / b.denom());
                Self::rational([n1, n2], den)
            }
            (a, b) => Ok(Self::real([a.value(), b.value()])),
        }
    }

    pub fn value(&self) -> [f64; 2] {
        match *self {
            ApproxTarget::Real { hi, lo } => [hi[0] + lo[0], hi[1] + lo[1]],
            ApproxTarget::Rational { num, den } => [num[0] as f64 / den as f64, num[1] as f64 / den as f64],
        }
    }

    pub fn is_extended(&self) -> bool {
        matches!(self, ApproxTarget::Real { lo, .. } if lo[0] != 0.0 || lo[1] != 0.0)
    }

    /// `q x - p`, computed without cancellation beyond the input precision.
    pub fn residual(&self, u: IntTriple) -> [f64; 2] {
        match *self {
            ApproxTarget::Real { hi, lo } => {
                let q = u.q as f64;
                let p = [u.p1 as f64, u.p2 as f64];
                [0, 1].map(|i| q.mul_add(hi[i], -p[i]) + q * lo[i])
            }
            ApproxTarget::Rational { num, den } => {
                let p = [u.p1, u.p2];
                [0, 1].map(|i| {
                    let n = u.q as i128 * num[i] as i128 - p[i] as i128 * den as i128;
                    n as f64 / den as f64
                })
            }
        }
    }

    /// Componentwise nearest integers to `q x`, ties to even.
    pub fn nearest_p(&self, q: i64) -> [i64; 2] {
        match *self {
            ApproxTarget::Real { hi, lo } => {
                [0, 1].map(|i| nearest_int_scaled(q as f64, hi[i], lo[i]) as i64)
            }
            ApproxTarget::Rational { num, den } => {
                [0, 1].map(|i| round_div_half_even(q as i128 * num[i] as i128, den as i128) as i64)
            }
        }
    }

    /// Shift by an integer vector.
    pub fn translate(&self, m: [i64; 2]) -> Self {
        match *self {
            ApproxTarget::Real { hi, lo } => ApproxTarget::Real {
                hi: [hi[0] + m[0] as f64, hi[1] + m[1] as f64],
                lo,
            },
            ApproxTarget::Rational { num, den } => ApproxTarget::Rational {
                num: [num[0] + m[0] * den, num[1] + m[1] * den],
                den,
            },
        }
    }
}

/// `‖y‖_w = max{|y1|^{1/w1}, |y2|^{1/w2}}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WNorm {
    pub weight: Weight,
}

impl WNorm {
    pub fn new(weight: Weight) -> Result<Self> {
        weight.require_nondegenerate()?;
        Ok(Self { weight })
    }

    pub fn value(&self, y: [f64; 2]) -> f64 {
        wnorm(y, &self.weight)
    }

    /// Constant of the quasi-triangle inequality.
    pub fn triangle_constant(&self) -> f64 {
        2f64.powf(self.weight.w1() / self.weight.w2())
    }
}

pub fn wnorm(y: [f64; 2], w: &Weight) -> f64 {
    y[0].abs().powf(1.0 / w.w1()).max(y[1].abs().powf(1.0 / w.w2()))
}

/// `A(x, u) = ‖q x - p‖_w`.
pub fn quality(x: [f64; 2], u: IntTriple, w: &Weight) -> f64 {
    quality_target(&ApproxTarget::real(x), u, w)
}

pub fn quality_target(x: &ApproxTarget, u: IntTriple, w: &Weight) -> f64 {
    wnorm(x.residual(u), w)
}

/// `‖n / den‖_w` for integer numerators.
fn wnorm_frac(n: [i128; 2], den: i128, w: &Weight) -> f64 {
    let d = den as f64;
    wnorm([n[0] as f64 / d, n[1] as f64 / d], w)
}

/// `A(û, v)` evaluated exactly from integer numerators `l p - s q`.
pub fn quality_hat(u: IntTriple, v: IntTriple, w: &Weight) -> f64 {
    let n = [
        v.q as i128 * u.p1 as i128 - v.p1 as i128 * u.q as i128,
        v.q as i128 * u.p2 as i128 - v.p2 as i128 * u.q as i128,
    ];
    wnorm_frac(n, u.q as i128, w)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BestApproxRecord {
    pub u: IntTriple,
    pub quality: f64,
    pub exact: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SigmaSequence {
    pub x: [f64; 2],
    pub records: Vec<BestApproxRecord>,
    pub qmax: i64,
    /// The scan stopped at an exact hit.
    pub exact_hit: bool,
    /// `qmax` exceeds the binary64 envelope without an extended-precision target.
    pub beyond_envelope: bool,
}

impl SigmaSequence {
    /// `quality_i · |u_{i+1}|`, which tends to zero exactly for singular `x`.
    pub fn singularity_series(&self) -> Vec<f64> {
        self.records
            .windows(2)
            .map(|p| p[0].quality * p[1].u.q as f64)
            .collect()
    }
}

/// Strict records of `min_p A(x, (p, q))` over `q = 1..=qmax`, dropping `q = 1`.
pub fn best_approx_sequence(x: &ApproxTarget, w: &Weight, qmax: i64) -> Result<SigmaSequence> {
    w.require_nondegenerate()?;
    if qmax < 2 {
        return Err(Error::InvalidInput(format!("qmax must be at least 2, got {qmax}")));
    }
    let mut records = Vec::new();
    let mut best = f64::INFINITY;
    let mut exact_hit = false;
    for q in 1..=qmax {
        let p = x.nearest_p(q);
        let u = IntTriple::new(p[0], p[1], q);
        let a = quality_target(x, u, w);
        if a < best {
            best = a;
            let exact = a == 0.0;
            if q > 1 {
                debug_assert!(u.is_primitive());
                records.push(BestApproxRecord { u, quality: a, exact });
            }
            if exact {
                exact_hit = true;
                break;
            }
        }
    }
    Ok(SigmaSequence {
        x: x.value(),
        records,
        qmax,
        exact_hit,
        beyond_envelope: qmax > QMAX_ENVELOPE && !x.is_extended() && !matches!(x, ApproxTarget::Rational { .. }),
    })
}

fn check_u(u: IntTriple, w: &Weight) -> Result<()> {
    w.require_nondegenerate()?;
    if u.q == 1 {
        return Err(Error::DenominatorOne);
    }
    if u.q < 1 {
        return Err(Error::InvalidInput(format!("|u| = {} must be positive", u.q)));
    }
    if !u.is_primitive() {
        return Err(Error::NotPrimitive(u.to_array()));
    }
    Ok(())
}

const TIE: f64 = 1e-12;

/// Keeps the smaller quality; within the tie tolerance, the smaller vector.
fn consider(best: &mut Option<(f64, IntTriple)>, a: f64, v: IntTriple) {
    let replace = match *best {
        None => true,
        Some((b, bv)) => a < b * (1.0 - TIE) || (a <= b * (1.0 + TIE) && v < bv),
    };
    if replace {
        *best = Some((a, v));
    }
}

/// Route (a): scan `v ∈ Q` with `|v| <= |u|/2`.
pub fn r_of_brute(u: IntTriple, w: &Weight) -> Result<(f64, IntTriple)> {
    check_u(u, w)?;
    let q = u.q as i128;
    let p = [u.p1 as i128, u.p2 as i128];
    let mut best = None;
    for l in 1..=(u.q / 2) {
        let li = l as i128;
        // nearest s; on an exact half take the smaller one
        let s = [0, 1].map(|i| {
            let (fl, r) = (li * p[i]).div_mod_floor(&q);
            if 2 * r > q {
                fl + 1
            } else {
                fl
            }
        });
        let v = IntTriple::new(s[0] as i64, s[1] as i64, l);
        if !v.is_primitive() {
            continue;
        }
        let n = [li * p[0] - s[0] * q, li * p[1] - s[1] * q];
        consider(&mut best, wnorm_frac(n, q, w), v);
    }
    best.ok_or(Error::DenominatorOne)
}

#[derive(Clone, Copy, Debug)]
struct Lifted {
    img: [i128; 2],
    lift: [i128; 3],
}

impl Lifted {
    fn sub_mul(&mut self, o: &Lifted, f: i128) {
        for i in 0..2 {
            self.img[i] -= f * o.img[i];
        }
        for i in 0..3 {
            self.lift[i] -= f * o.lift[i];
        }
    }

    fn norm2(&self) -> i128 {
        self.img[0] * self.img[0] + self.img[1] * self.img[1]
    }
}

/// Euclid on one image coordinate; returns the pivot (if any) and the rest,
/// whose coordinate is then zero.
fn eliminate(mut vs: Vec<Lifted>, c: usize) -> (Option<Lifted>, Vec<Lifted>) {
    loop {
        let nz: Vec<usize> = (0..vs.len()).filter(|&i| vs[i].img[c] != 0).collect();
        if nz.len() <= 1 {
            let piv = nz.first().map(|&i| vs[i]);
            let rest = (0..vs.len()).filter(|i| !nz.contains(i)).map(|i| vs[i]).collect();
            return (piv, rest);
        }
        let &pi = nz.iter().min_by_key(|&&i| vs[i].img[c].abs()).unwrap();
        let piv = vs[pi];
        for &i in &nz {
            if i != pi {
                let f = vs[i].img[c] / piv.img[c];
                vs[i].sub_mul(&piv, f);
            }
        }
    }
}

/// Route (b): shortest `w`-norm vector of `Λ_u = π_u(Z^3)` from a reduced basis.
pub fn r_of_lattice(u: IntTriple, w: &Weight) -> Result<(f64, IntTriple)> {
    check_u(u, w)?;
    let q = u.q as i128;
    let gens = vec![
        Lifted { img: [q, 0], lift: [1, 0, 0] },
        Lifted { img: [0, q], lift: [0, 1, 0] },
        Lifted { img: [-(u.p1 as i128), -(u.p2 as i128)], lift: [0, 0, 1] },
    ];
    let (a, rest) = eliminate(gens, 0);
    let (b, _) = eliminate(rest, 1);
    let (mut a, mut b) = match (a, b) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::InvalidInput("projected lattice has rank below two".into())),
    };
    // Lagrange-Gauss reduction in the Euclidean norm on numerators.
    loop {
        if a.norm2() > b.norm2() {
            std::mem::swap(&mut a, &mut b);
        }
        let dot = a.img[0] * b.img[0] + a.img[1] * b.img[1];
        let mu = round_div_half_even(dot, a.norm2());
        if mu == 0 {
            break;
        }
        b.sub_mul(&a, mu);
    }
    let radius = wnorm_frac(a.img, q, w).min(wnorm_frac(b.img, q, w));
    let h = [0, 1].map(|i| q as f64 * radius.powf(w.get(i)) * (1.0 + 1e-9));
    let det = (a.img[0] * b.img[1] - a.img[1] * b.img[0]) as f64;
    // c = M^{-1} y with M = [a | b]
    let inv = [
        [b.img[1] as f64 / det, -b.img[0] as f64 / det],
        [-a.img[1] as f64 / det, a.img[0] as f64 / det],
    ];
    let cb = [0, 1].map(|j| (inv[j][0].abs() * h[0] + inv[j][1].abs() * h[1]).floor() as i128 + 1);
    let mut best = None;
    for c1 in -cb[0]..=cb[0] {
        for c2 in -cb[1]..=cb[1] {
            if c1 == 0 && c2 == 0 {
                continue;
            }
            let img = [c1 * a.img[0] + c2 * b.img[0], c1 * a.img[1] + c2 * b.img[1]];
            if (img[0].abs() as f64) > h[0] || (img[1].abs() as f64) > h[1] {
                continue;
            }
            let lift = [0, 1, 2].map(|i| c1 * a.lift[i] + c2 * b.lift[i]);
            let quality = wnorm_frac(img, q, w);
            for v in witnesses_from_lift(lift, u) {
                consider(&mut best, quality, v);
            }
        }
    }
    best.ok_or_else(|| Error::InvalidInput("no short vector found in projected lattice".into()))
}

/// Representatives `v ∈ Z^3` of a lifted vector modulo `u`, with
/// `1 <= |v| <= q/2` (both choices when `|v| = q/2`).
fn witnesses_from_lift(lift: [i128; 3], u: IntTriple) -> Vec<IntTriple> {
    let q = u.q as i128;
    let ut = [u.p1 as i128, u.p2 as i128, q];
    let k = lift[2];
    // l = k - m q in (-q/2, q/2]
    let m = Integer::div_floor(&(k * 2 + q - 1), &(2 * q));
    let v = [0, 1, 2].map(|i| lift[i] - m * ut[i]);
    let mut out = Vec::with_capacity(2);
    let mk = |a: [i128; 3]| IntTriple::new(a[0] as i64, a[1] as i64, a[2] as i64);
    let v = if v[2] < 0 { v.map(|c| -c) } else { v };
    if v[2] == 0 {
        return out;
    }
    out.push(mk(v));
    if 2 * v[2] == q {
        out.push(mk([0, 1, 2].map(|i| ut[i] - v[i])));
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ROf {
    pub value: f64,
    /// Lexicographically smallest minimiser with `|v| <= |u|/2`.
    pub witness: IntTriple,
    pub brute: f64,
    pub lattice: f64,
    pub lattice_witness: IntTriple,
}

/// `r(u)` by both routes; fails with [`Error::RouteMismatch`] if they differ.
pub fn r_of(u: IntTriple, w: &Weight) -> Result<ROf> {
    let (brute, witness) = r_of_brute(u, w)?;
    let (lattice, lattice_witness) = r_of_lattice(u, w)?;
    if (brute - lattice).abs() > 1e-9 * brute.max(lattice) {
        return Err(Error::RouteMismatch { brute, lattice });
    }
    Ok(ROf { value: brute, witness, brute, lattice, lattice_witness })
}

/// Whether `x ∈ Δ(u)`: `A(x, v) > A(x, u)` for `|v| < |u|` and `>=` for
/// `|v| = |u|`, `v != u`.
pub fn delta_membership(x: &ApproxTarget, u: IntTriple, w: &Weight, qscan: i64) -> Result<bool> {
    w.require_nondegenerate()?;
    if u.q < 1 {
        return Err(Error::InvalidInput("|u| must be positive".into()));
    }
    if qscan < u.q {
        return Err(Error::InvalidInput(format!("qscan {qscan} below |u| = {}", u.q)));
    }
    let au = quality_target(x, u, w);
    for l in 1..u.q {
        let p = x.nearest_p(l);
        if quality_target(x, IntTriple::new(p[0], p[1], l), w) <= au {
            return Ok(false);
        }
    }
    let p = x.nearest_p(u.q);
    for d1 in -1..=1 {
        for d2 in -1..=1 {
            let v = IntTriple::new(p[0] + d1, p[1] + d2, u.q);
            if v != u && quality_target(x, v, w) < au {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `B_w(u, ρ)`: open rectangle around `û` with half-widths `ρ^{w_i} / |u|`.
pub fn bw_rect(u: IntTriple, w: &Weight, rho: f64) -> Rect {
    let q = u.q as f64;
    Rect::new(u.hat(), [rho.powf(w.w1()) / q, rho.powf(w.w2()) / q])
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ApproxGeometry {
    pub u: IntTriple,
    pub r_of_u: f64,
    pub bw_inner: Rect,
    pub bw_outer: Rect,
}

impl ApproxGeometry {
    pub fn new(u: IntTriple, w: &Weight) -> Result<Self> {
        let r = r_of(u, w)?.value;
        let c = w.two_pow_inv_w2();
        Ok(Self {
            u,
            r_of_u: r,
            bw_inner: bw_rect(u, w, r / c),
            bw_outer: bw_rect(u, w, r * c),
        })
    }

    /// Nine points strictly inside the inner rectangle.
    pub fn inner_grid(&self) -> Vec<[f64; 2]> {
        let mut pts = Vec::with_capacity(9);
        for a in [-0.9, 0.0, 0.9] {
            for b in [-0.9, 0.0, 0.9] {
                let r = &self.bw_inner;
                pts.push([r.center[0] + a * r.half[0], r.center[1] + b * r.half[1]]);
            }
        }
        pts
    }

    /// Eight points just outside the outer rectangle.
    pub fn outer_ring(&self) -> Vec<[f64; 2]> {
        let mut pts = Vec::with_capacity(8);
        for a in [-1.1, 0.0, 1.1] {
            for b in [-1.1, 0.0, 1.1] {
                if a == 0.0 && b == 0.0 {
                    continue;
                }
                let r = &self.bw_outer;
                pts.push([r.center[0] + a * r.half[0], r.center[1] + b * r.half[1]]);
            }
        }
        pts
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SandwichReport {
    pub records: usize,
    pub checks: usize,
    pub violations: Vec<String>,
    /// `A(x, u_i) / r(u_{i+1})`.
    pub ratios: Vec<f64>,
    pub estimate_checks: usize,
    pub delta_checks: usize,
}

impl SandwichReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Evaluates the two-sided bounds along `Σ_x`, the estimate `A(x,v) <
/// 2^{1/w2} A(û,v)` for `|v| <= |u|/2`, and the `Δ(u)` inclusions.
pub fn sandwich_check(x: &ApproxTarget, w: &Weight, qmax: i64) -> Result<SandwichReport> {
    let seq = best_approx_sequence(x, w, qmax)?;
    let recs = &seq.records;
    if recs.len() < 2 {
        return Err(Error::SequenceTooShort(recs.len()));
    }
    let c = w.two_pow_inv_w2();
    let mut rep = SandwichReport { records: recs.len(), ..Default::default() };
    let fail = |rep: &mut SandwichReport, msg: String| rep.violations.push(msg);
    let xv = seq.x;
    for i in 0..recs.len() {
        let ui = recs[i].u;
        let ai = recs[i].quality;
        if i + 1 < recs.len() {
            let r_next = r_of(recs[i + 1].u, w)?.value;
            rep.checks += 1;
            if !(ai < c * r_next) {
                fail(&mut rep, format!("x={xv:?} i={i} upper: A={ai:e} >= {c}*r(u_next)={:e}", c * r_next));
            }
            let ratio = ai / r_next;
            rep.ratios.push(ratio);
            if !(ratio >= 1.0 / c && ratio <= c) {
                fail(&mut rep, format!("x={xv:?} i={i} ratio {ratio:e} outside [1/{c}, {c}]"));
            }
            for uj in recs.iter().skip(i + 1) {
                rep.checks += 1;
                let lhs = quality_hat(uj.u, ui, w) / c;
                if !(lhs < ai) {
                    fail(&mut rep, format!("x={xv:?} i={i} lower vs {:?}: {lhs:e} >= A={ai:e}", uj.u));
                }
            }
        }
        // check against the estimate for r(u)
        let uhat = ApproxTarget::Rational { num: [ui.p1, ui.p2], den: ui.q };
        for l in 1..=(ui.q / 2) {
            let mut cands: Vec<[i64; 2]> = Vec::with_capacity(18);
            for base in [x.nearest_p(l), uhat.nearest_p(l)] {
                for d1 in -1..=1 {
                    for d2 in -1..=1 {
                        let s = [base[0] + d1, base[1] + d2];
                        if !cands.contains(&s) {
                            cands.push(s);
                        }
                    }
                }
            }
            for s in cands {
                let v = IntTriple::new(s[0], s[1], l);
                let ax = quality_target(x, v, w);
                let ah = quality_hat(ui, v, w);
                rep.estimate_checks += 1;
                if !(ax < c * ah) {
                    fail(&mut rep, format!("x={xv:?} u={ui:?} v={v:?} estimate: {ax:e} >= {c}*{ah:e}"));
                }
            }
        }
        // Δ(u) inclusions
        let geo = ApproxGeometry::new(ui, w)?;
        rep.delta_checks += 1;
        if !delta_membership(x, ui, w, ui.q)? {
            fail(&mut rep, format!("x={xv:?} not in Δ({ui:?})"));
        }
        for p in geo.inner_grid() {
            rep.delta_checks += 1;
            if !delta_membership(&ApproxTarget::real(p), ui, w, ui.q)? {
                fail(&mut rep, format!("inner grid point {p:?} of u={ui:?} not in Δ(u)"));
            }
        }
        for p in geo.outer_ring() {
            rep.delta_checks += 1;
            if delta_membership(&ApproxTarget::real(p), ui, w, ui.q)? {
                fail(&mut rep, format!("point {p:?} outside outer rectangle of u={ui:?} lies in Δ(u)"));
            }
        }
    }
    Ok(rep)
}
