//! Dimension calculus: the closed form, the lower-bound expression for
//! self-affine structures, the upper relation, the cover relation on
//! `Q_ε`, and a box-counting estimator.

use crate::approx::{quality_hat, r_of, r_of_lattice};
use crate::error::{Error, Result};
use crate::geom::Rect;
use crate::lattice::IntTriple;
use crate::weight::{ratio_to_f64, Weight, Q64};
use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::HashSet;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DimResult {
    pub dim: f64,
    pub degenerate: bool,
    /// Exact value as `"n/d"` when the weight was given exactly.
    pub exact: Option<String>,
}

/// `2 - 1/(1 + w1)`; `(1, 0)` gives 1.
pub fn closed_form_dim(w: &Weight) -> DimResult {
    if w.is_degenerate() {
        return DimResult { dim: 1.0, degenerate: true, exact: Some("1".into()) };
    }
    match w.exact() {
        Some((w1, _)) => {
            let one = Q64::from_integer(1);
            let d = Q64::from_integer(2) - one / (one + w1);
            DimResult { dim: ratio_to_f64(d), degenerate: false, exact: Some(d.to_string()) }
        }
        None => DimResult { dim: 2.0 - 1.0 / (1.0 + w.w1()), degenerate: false, exact: None },
    }
}

/// Least-squares line `y = a x + b` with its `R^2`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<(f64, f64, f64)> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let a = sxy / sxx;
    let b = my - a * mx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Some((a, b, r2))
}

/// Sequences `W, L, ρ, C` indexed `0..=n_max`, stored as logarithms.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeqData {
    pub log_w: Vec<f64>,
    pub log_l: Vec<f64>,
    pub log_rho: Vec<f64>,
    pub log_c: Vec<f64>,
}

impl SeqData {
    pub fn from_logs(log_w: Vec<f64>, log_l: Vec<f64>, log_rho: Vec<f64>, log_c: Vec<f64>) -> Result<Self> {
        let n = log_w.len();
        if n < 3 || log_l.len() != n || log_rho.len() != n || log_c.len() != n {
            return Err(Error::InvalidInput("sequences need equal length >= 3".into()));
        }
        let s = Self { log_w, log_l, log_rho, log_c };
        s.validate()?;
        Ok(s)
    }

    pub fn from_values(w: &[f64], l: &[f64], rho: &[f64], c: &[f64]) -> Result<Self> {
        let ln = |v: &[f64]| v.iter().map(|x| x.ln()).collect::<Vec<_>>();
        Self::from_logs(ln(w), ln(l), ln(rho), ln(c))
    }

    fn validate(&self) -> Result<()> {
        let tol = 1e-12;
        for n in 0..self.len() {
            if self.log_w[n] > self.log_l[n] + tol {
                return Err(Error::AssumptionViolated(format!("W_{n} > L_{n}")));
            }
            if n > 0 && !(self.log_w[n] < self.log_w[n - 1]) {
                return Err(Error::AssumptionViolated(format!("W not strictly decreasing at n = {n}")));
            }
            if n > 0 && self.log_rho[n] > tol {
                return Err(Error::AssumptionViolated(format!("rho_{n} > 1")));
            }
            if self.log_c[n] < -tol {
                return Err(Error::AssumptionViolated(format!("C_{n} < 1")));
            }
            let vals = [self.log_w[n], self.log_l[n], self.log_rho[n], self.log_c[n]];
            if vals.iter().any(|v| !v.is_finite()) {
                return Err(Error::AssumptionViolated(format!("non-finite or non-positive term at n = {n}")));
            }
        }
        if self.log_c[0].abs() > tol {
            return Err(Error::AssumptionViolated("C_0 must be 1".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.log_w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_w.is_empty()
    }

    pub fn n_max(&self) -> usize {
        self.len() - 1
    }

    /// Planar Cantor dust: `W = L = 3^{-n}`, `C_n = 4`, `ρ_n = 1/3`.
    pub fn cantor_dust(n_max: usize) -> Self {
        let l3 = 3f64.ln();
        let log_w: Vec<f64> = (0..=n_max).map(|n| -(n as f64) * l3).collect();
        let log_c = (0..=n_max).map(|n| if n == 0 { 0.0 } else { 4f64.ln() }).collect();
        let log_rho = (0..=n_max).map(|n| if n == 0 { 0.0 } else { -l3 }).collect();
        Self { log_l: log_w.clone(), log_w, log_rho, log_c }
    }

    /// Widths, lengths, separations and son counts of the refined tree:
    /// `W_n = (2ε/n) e^{-w1 t_{n+1} - t_n}`, `L_n` likewise with `w2`,
    /// `C_n = ε^2 e^{2nt} / (100 n^2)`, `ρ_n = e^{-w1 n t}`, with
    /// `W_0 = e^{-w1 t}`, `L_0 = e^{-w2 t}`, `C_0 = 1`.
    pub fn tree_sequences(w: &Weight, eps: f64, t: f64, n_max: usize) -> Result<Self> {
        w.require_nondegenerate()?;
        let (w1, w2) = (w.w1(), w.w2());
        let tn = |n: usize| (n * (n + 1)) as f64 / 2.0 * t;
        let mut lw = Vec::with_capacity(n_max + 1);
        let mut ll = Vec::with_capacity(n_max + 1);
        let mut lr = Vec::with_capacity(n_max + 1);
        let mut lc = Vec::with_capacity(n_max + 1);
        for n in 0..=n_max {
            if n == 0 {
                lw.push(-w1 * t);
                ll.push(-w2 * t);
                lr.push(0.0);
                lc.push(0.0);
            } else {
                let nf = n as f64;
                let e = (2.0 * eps / nf).ln();
                lw.push(e - w1 * tn(n + 1) - tn(n));
                ll.push(e - w2 * tn(n + 1) - tn(n));
                lr.push(-w1 * nf * t);
                lc.push((eps * eps / (100.0 * nf * nf)).ln() + 2.0 * nf * t);
            }
        }
        Self::from_logs(lw, ll, lr, lc)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LowerBoundReport {
    pub horizon: usize,
    /// `D_n` for `n = 0..n_max-1`; `None` when it reaches the horizon.
    pub d: Vec<Option<usize>>,
    /// Indices `n` used for the trend fits.
    pub tail: Vec<usize>,
    /// Largest grid `t` whose expression still increases along the tail.
    pub s_grid: Option<f64>,
    /// Limit of the zero crossings `s_n` of the expression, extrapolated
    /// linearly from `n s_n` along the tail.
    pub trend_value: f64,
    pub crossings: Vec<(usize, f64)>,
    /// Per grid `t`: the tail slope and the expression values over the tail.
    pub series: Vec<(f64, f64, Vec<f64>)>,
    /// The dimension statement needs `s > 1`.
    pub applicable: bool,
}

/// `D_n = max{k >= n : L_k >= W_n}` within the horizon.
pub fn d_sequence(seq: &SeqData) -> Vec<Option<usize>> {
    let nm = seq.n_max();
    (0..nm)
        .map(|n| {
            let mut d = n;
            for k in n..=nm {
                if seq.log_l[k] >= seq.log_w[n] {
                    d = k;
                }
            }
            (d < nm).then_some(d)
        })
        .collect()
}

/// Evaluates `log(P_n W_n^t ρ_{n+1}^t Π_{i=n+1}^{D_n} ρ_i C_i) / max{D_n - n, 1}`
/// over `n` and the grid of `t`.
pub fn lower_bound_s(seq: &SeqData, t_grid: &[f64]) -> Result<LowerBoundReport> {
    let nm = seq.n_max();
    let d = d_sequence(seq);
    let mut log_p = vec![0.0; nm + 1];
    for n in 0..=nm {
        log_p[n] = seq.log_c[n] + if n > 0 { log_p[n - 1] } else { 0.0 };
    }
    let valid: Vec<usize> = (1..nm).filter(|&n| d[n].is_some()).collect();
    if !valid.iter().any(|&n| 2 * n >= nm) {
        return Err(Error::HorizonTooShort(format!(
            "D_n reaches the horizon {nm} for every n in the upper half"
        )));
    }
    let tail: Vec<usize> = valid[valid.len() / 2..].to_vec();
    if tail.len() < 2 {
        return Err(Error::HorizonTooShort(format!("only {} usable n", valid.len())));
    }
    // E_n(t) = (a_n + t b_n) / den_n
    let parts = |n: usize| {
        let dn = d[n].expect("valid n");
        let extra: f64 = (n + 1..=dn).map(|i| seq.log_rho[i] + seq.log_c[i]).fold(0.0, |a, b| a + b);
        let a = log_p[n] + extra;
        let b = seq.log_w[n] + seq.log_rho[n + 1];
        let den = ((dn - n) as f64).max(1.0);
        (a, b, den)
    };
    let xs: Vec<f64> = tail.iter().map(|&n| n as f64).collect();
    let mut series = Vec::with_capacity(t_grid.len());
    let mut s_grid: Option<f64> = None;
    for &t in t_grid {
        let ys: Vec<f64> = tail
            .iter()
            .map(|&n| {
                let (a, b, den) = parts(n);
                (a + t * b) / den
            })
            .collect();
        let (slope, _, _) = linear_fit(&xs, &ys).ok_or_else(|| Error::DegenerateFit("tail".into()))?;
        if slope > 0.0 && s_grid.is_none_or(|s| t > s) {
            s_grid = Some(t);
        }
        series.push((t, slope, ys));
    }
    let crossings: Vec<(usize, f64)> = valid
        .iter()
        .map(|&n| {
            let (a, b, _) = parts(n);
            (n, a / -b)
        })
        .collect();
    let ns: Vec<f64> = tail.iter().map(|&n| n as f64 * crossings.iter().find(|c| c.0 == n).unwrap().1).collect();
    let (trend_value, _, _) = linear_fit(&xs, &ns).ok_or_else(|| Error::DegenerateFit("trend".into()))?;
    Ok(LowerBoundReport {
        horizon: nm,
        d,
        tail,
        s_grid,
        trend_value,
        crossings,
        series,
        applicable: s_grid.is_some_and(|s| s > 1.0),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocalDimReport {
    pub dim: f64,
    /// `log(L_n C_n / L_{n-1}) / -log(W_n / W_{n-1})` for `n >= 1`.
    pub ratios: Vec<(usize, f64)>,
    /// Smallest `k` making each of the local assumptions hold over the tail:
    /// `[e^{n/k} <= C_n <= e^{kn}, ρ_n >= e^{-nk}, ρ_n C_n L_n / L_{n-1} >= n^{-k}]`.
    pub required_k: [f64; 3],
}

/// `1 + lim log(L_n C_n / L_{n-1}) / -log(W_n / W_{n-1})`, the limit taken
/// as the mean over the last quarter of the horizon.
pub fn local_dim_cor(seq: &SeqData) -> Result<LocalDimReport> {
    let nm = seq.n_max();
    let mut ratios = Vec::with_capacity(nm);
    for n in 1..=nm {
        let den = -(seq.log_w[n] - seq.log_w[n - 1]);
        if !(den > 0.0) {
            return Err(Error::AssumptionViolated(format!("W not decreasing at n = {n}")));
        }
        let num = seq.log_l[n] + seq.log_c[n] - seq.log_l[n - 1];
        ratios.push((n, num / den));
    }
    let from = nm - nm / 4;
    let quarter: Vec<f64> = ratios.iter().filter(|r| r.0 >= from.max(1)).map(|r| r.1).collect();
    let lim = quarter.iter().sum::<f64>() / quarter.len() as f64;
    let mut req = [0.0f64; 3];
    for n in (nm / 2).max(2)..=nm {
        let nf = n as f64;
        let lc = seq.log_c[n];
        if !(lc > 0.0) {
            return Err(Error::AssumptionViolated(format!(
                "item (ii): C_{n} <= 1, so e^(n/k) <= C_n fails for every k"
            )));
        }
        req[0] = req[0].max(nf / lc).max(lc / nf);
        req[1] = req[1].max(-seq.log_rho[n] / nf);
        let iv = seq.log_rho[n] + lc + seq.log_l[n] - seq.log_l[n - 1];
        req[2] = req[2].max(-iv / nf.ln());
    }
    Ok(LocalDimReport { dim: 1.0 + lim, ratios, required_k: req })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CoverNode {
    pub u: IntTriple,
    pub beta: Rect,
}

impl CoverNode {
    /// `β(u) = I(û; |u|^{-(w1+1)}, |u|^{-(w2+1)})`.
    pub fn new(u: IntTriple, w: &Weight) -> Self {
        let q = u.q as f64;
        Self { u, beta: Rect::new(u.hat(), [q.powf(-(w.w1() + 1.0)), q.powf(-(w.w2() + 1.0))]) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UpperReport {
    pub exponent: f64,
    /// `(node, Σ (|u|/|v|)^exponent)`.
    pub sums: Vec<(usize, f64)>,
    pub worst: Option<(usize, f64)>,
    pub pass: bool,
}

/// `Σ_{κ ∈ σ(τ)} L(κ) W(κ)^{s-1} <= L(τ) W(τ)^{s-1}` in its power form
/// `Σ (|u|/|v|)^{(s-1)(w1+1) + w2 + 1} <= 1`, for nodes given by their sizes.
pub fn upper_relation_sizes(sizes: &[f64], sigma: &dyn Fn(usize) -> Vec<usize>, w: &Weight, s: f64) -> Result<UpperReport> {
    if !(s > 1.0) {
        return Err(Error::InvalidInput(format!("s must exceed 1, got {s}")));
    }
    let e = (s - 1.0) * (w.w1() + 1.0) + w.w2() + 1.0;
    let mut sums = Vec::with_capacity(sizes.len());
    let mut worst: Option<(usize, f64)> = None;
    for (i, &su) in sizes.iter().enumerate() {
        let kids = sigma(i);
        if kids.is_empty() {
            continue;
        }
        let total: f64 = kids.iter().map(|&k| (su / sizes[k]).powf(e)).sum();
        if worst.is_none_or(|(_, v)| total > v) {
            worst = Some((i, total));
        }
        sums.push((i, total));
    }
    let pass = worst.is_none_or(|(_, v)| v <= 1.0 + 1e-12);
    Ok(UpperReport { exponent: e, sums, worst, pass })
}

pub fn upper_relation_check(nodes: &[CoverNode], sigma: &dyn Fn(usize) -> Vec<usize>, w: &Weight, s: f64) -> Result<UpperReport> {
    let sizes: Vec<f64> = nodes.iter().map(|n| n.u.q as f64).collect();
    upper_relation_sizes(&sizes, sigma, w, s)
}

/// Normal of the plane spanned by `u` and the minimiser `u'` of `r(u)`,
/// reduced and sign-normalised.
pub fn plane_normal(u: IntTriple, up: IntTriple) -> [i64; 3] {
    let c = u.cross(up);
    let g = c[0].gcd(&c[1]).gcd(&c[2]).max(1);
    let mut n = c.map(|x| (x / g) as i64);
    if n.iter().find(|&&x| x != 0).is_some_and(|&x| x < 0) {
        n = n.map(|x| -x);
    }
    n
}

fn in_plane(n: [i64; 3], v: IntTriple) -> bool {
    n[0] as i128 * v.p1 as i128 + n[1] as i128 * v.p2 as i128 + n[2] as i128 * v.q as i128 == 0
}

/// `r(v)|v| < ε` and `|v| > 1`, using the projected-lattice route.
pub fn in_q_eps(v: IntTriple, w: &Weight, eps: f64) -> Result<bool> {
    if v.q <= 1 || !v.is_primitive() {
        return Ok(false);
    }
    Ok(r_of_lattice(v, w)?.0 * (v.q as f64) < eps)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoverReport {
    pub u: IntTriple,
    pub u_prime: IntTriple,
    pub r_u: f64,
    pub normal: [i64; 3],
    pub eps: f64,
    pub vmax: i64,
    pub d_set: Vec<IntTriple>,
    /// `E(u, v, ε)` for each `v` of the D-set, same order.
    pub e_sets: Vec<Vec<IntTriple>>,
}

impl CoverReport {
    /// `Σ_{v ∈ D} (|u|/|v|)^t`.
    pub fn d_sum(&self, t: f64) -> f64 {
        let q = self.u.q as f64;
        self.d_set.iter().map(|v| (q / v.q as f64).powf(t)).fold(0.0, |a, b| a + b)
    }

    /// `Σ_{w ∈ E(u, v)} (|v|/|w|)^t` for each `v`.
    pub fn e_sums(&self, t: f64) -> Vec<f64> {
        self.d_set.iter().zip(&self.e_sets).map(|(v, es)| e_sum(*v, es, t)).collect()
    }
}

pub fn e_sum(v: IntTriple, es: &[IntTriple], t: f64) -> f64 {
    let q = v.q as f64;
    es.iter().map(|w| (q / w.q as f64).powf(t)).fold(0.0, |a, b| a + b)
}

/// `D(u, ε)` and the sets `E(u, v, ε)` with denominators up to `vmax`.
pub fn cover_relation(u: IntTriple, w: &Weight, eps: f64, vmax: i64) -> Result<CoverReport> {
    let r = r_of(u, w)?;
    let value = r.value * u.q as f64;
    if u.q <= 1 || !(value < eps) {
        return Err(Error::NotInQEps { u: u.to_array(), value, eps });
    }
    let normal = plane_normal(u, r.witness);
    let d_set = d_set(u, normal, r.value, w, eps, vmax)?;
    let mut e_sets = Vec::with_capacity(d_set.len());
    for &v in &d_set {
        e_sets.push(e_set(normal, v, w, eps, vmax)?);
    }
    Ok(CoverReport { u, u_prime: r.witness, r_u: r.value, normal, eps, vmax, d_set, e_sets })
}

/// Primitive `v` in the plane with `|u| <= |v| <= vmax`, `v ∈ Q_ε` and
/// `A(v̂, u) < 2^{2/w2} r(u)`.
pub fn d_set(u: IntTriple, normal: [i64; 3], r_u: f64, w: &Weight, eps: f64, vmax: i64) -> Result<Vec<IntTriple>> {
    if normal[0] == 0 && normal[1] == 0 {
        return Err(Error::InvalidInput(format!("plane {normal:?} misses the q-direction")));
    }
    let c = 2f64.powf(2.0 / w.w2()) * r_u;
    let qu = u.q as f64;
    let mut out = Vec::new();
    for l in u.q..=vmax {
        let lf = l as f64;
        // |q_u s_i - l p_i| < q_u (C r)^{w_i} after scaling by l / q_u
        let rad = [0, 1].map(|i| lf / qu * c.powf(w.get(i)));
        let ctr = [lf * u.p1 as f64 / qu, lf * u.p2 as f64 / qu];
        // run over one coordinate, solve the plane equation for the other
        let (f, o) = if normal[1] != 0 { (0, 1) } else { (1, 0) };
        let lo = (ctr[f] - rad[f]).floor() as i64;
        let hi = (ctr[f] + rad[f]).ceil() as i64;
        for sf in lo..=hi {
            let num = -(normal[f] as i128 * sf as i128 + normal[2] as i128 * l as i128);
            if num % normal[o] as i128 != 0 {
                continue;
            }
            let so = (num / normal[o] as i128) as i64;
            {
                let v = if f == 0 { IntTriple::new(sf, so, l) } else { IntTriple::new(so, sf, l) };
                if !in_plane(normal, v) || !v.is_primitive() {
                    continue;
                }
                if !(quality_hat(v, u, w) < c) {
                    continue;
                }
                if in_q_eps(v, w, eps)? {
                    out.push(v);
                }
            }
        }
    }
    Ok(out)
}

/// `w ∈ Q_ε` with `|v| < |w| <= vmax`, off the plane, and `A(ŵ, v) < ε/|w|`.
pub fn e_set(normal: [i64; 3], v: IntTriple, w: &Weight, eps: f64, vmax: i64) -> Result<Vec<IntTriple>> {
    let qv = v.q as f64;
    let mut out = Vec::new();
    // off the plane, 1 <= |n.w| and q_v n.w = n1 (q_v a - q_w p1) + n2 (q_v b - q_w p2)
    let reach = |qw: i64| {
        let q = qw as f64;
        [0, 1].iter().map(|&i| normal[i].unsigned_abs() as f64 * q * (eps / q).powf(w.get(i))).sum::<f64>()
    };
    let (mut lo, mut hi) = (v.q + 1, vmax + 1);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if reach(mid) > qv * (1.0 - 1e-9) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    for qw in lo..=vmax {
        let qwf = qw as f64;
        // |q_v p_{w,i} - q_w p_{v,i}| < q_w (ε/q_w)^{w_i}
        let bound = [0, 1].map(|i| qwf * (eps / qwf).powf(w.get(i)));
        let pv = [v.p1, v.p2];
        let ranges = [0, 1].map(|i| {
            let c = qwf * pv[i] as f64 / qv;
            let h = bound[i] / qv;
            ((c - h).floor() as i64, (c + h).ceil() as i64)
        });
        for a in ranges[0].0..=ranges[0].1 {
            for b in ranges[1].0..=ranges[1].1 {
                let cand = IntTriple::new(a, b, qw);
                let dev = [
                    (v.q as i128 * a as i128 - qw as i128 * v.p1 as i128).abs() as f64,
                    (v.q as i128 * b as i128 - qw as i128 * v.p2 as i128).abs() as f64,
                ];
                if !(dev[0] < bound[0] && dev[1] < bound[1]) {
                    continue;
                }
                if in_plane(normal, cand) || !cand.is_primitive() {
                    continue;
                }
                if in_q_eps(cand, w, eps)? {
                    out.push(cand);
                }
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoxCountFit {
    pub dim: f64,
    pub intercept: f64,
    pub r2: f64,
    /// `(log 1/δ, log N(δ))`.
    pub pairs: Vec<(f64, f64)>,
    pub residuals: Vec<f64>,
}

/// Slope of `log N(δ)` against `log(1/δ)` over grid-aligned boxes.
pub fn box_counting_dim(points: &[[f64; 2]], scales: &[f64]) -> Result<BoxCountFit> {
    if points.len() < 100 {
        return Err(Error::DegenerateFit(format!("need at least 100 points, got {}", points.len())));
    }
    if scales.len() < 4 || scales.iter().any(|&d| !(d > 0.0 && d.is_finite())) {
        return Err(Error::DegenerateFit("need at least 4 positive scales".into()));
    }
    let (lo, hi) = scales.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &d| (a.min(d), b.max(d)));
    if hi / lo < 10.0 * (1.0 - 1e-12) {
        return Err(Error::DegenerateFit(format!("scales span {:.3} < one decade", hi / lo)));
    }
    let mut pairs = Vec::with_capacity(scales.len());
    for &d in scales {
        let cells: HashSet<(i64, i64)> = points.iter().map(|p| ((p[0] / d).floor() as i64, (p[1] / d).floor() as i64)).collect();
        pairs.push(((1.0 / d).ln(), (cells.len() as f64).ln()));
    }
    let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let (a, b, r2) = linear_fit(&xs, &ys).ok_or_else(|| Error::DegenerateFit("repeated scales".into()))?;
    let residuals = pairs.iter().map(|p| p.1 - (a * p.0 + b)).collect();
    Ok(BoxCountFit { dim: a, intercept: b, r2, pairs, residuals })
}

/// Scales `δ_k = base^{-k}` for `k = k0..=k1`.
pub fn geometric_scales(base: f64, k0: i32, k1: i32) -> Vec<f64> {
    (k0..=k1).map(|k| base.powi(-k)).collect()
}

/// Seeded uniform points on the unit segment `[0,1] x {0}`.
pub fn synthetic_segment(n: usize, seed: u64) -> Vec<[f64; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| [rng.random::<f64>(), 0.0]).collect()
}

/// Seeded uniform points in the unit square.
pub fn synthetic_square(n: usize, seed: u64) -> Vec<[f64; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| [rng.random::<f64>(), rng.random::<f64>()]).collect()
}

/// Seeded points of the product of two middle-thirds Cantor sets: `depth`
/// random ternary digits, then uniform inside the last cell so no point sits
/// on a triadic grid line.
pub fn synthetic_cantor_dust(n: usize, depth: u32, seed: u64) -> Vec<[f64; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let mut p = [0.0f64; 2];
            let mut scale = 1.0;
            for _ in 0..depth {
                scale /= 3.0;
                for c in p.iter_mut() {
                    if rng.random::<bool>() {
                        *c += 2.0 * scale;
                    }
                }
            }
            for c in p.iter_mut() {
                *c += scale * rng.random::<f64>();
            }
            p
        })
        .collect()
}
