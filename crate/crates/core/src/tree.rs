//! The self-affine tree of rationals `τ = -p/q` whose flow lattices return
//! to the window `{r e3 : 1/2 < r <= 1}`.

use crate::error::{Error, Result};
use crate::geom::Rect;
use crate::lattice::{in_kstar_capped, in_l3prime, systole, IntTriple, LatticeRep, Shift, BOUNDARY_TOL, DEFAULT_CAP};
use crate::weight::Weight;
use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TreeParams {
    pub w: Weight,
    /// `e^t`, given directly so integer thresholds stay exact.
    pub et: f64,
    pub eps: f64,
    pub r: f64,
    pub depth: usize,
    pub proof_regime: bool,
    pub cap: f64,
}

impl TreeParams {
    pub fn new(w: Weight, et: f64, eps: f64, r: f64, depth: usize) -> Self {
        Self { w, et, eps, r, depth, proof_regime: false, cap: DEFAULT_CAP }
    }

    pub fn t(&self) -> f64 {
        self.et.ln()
    }

    /// `t_n = n(n+1) t / 2`.
    pub fn t_n(&self, n: usize) -> f64 {
        (n * (n + 1)) as f64 / 2.0 * self.t()
    }

    /// `e^{t_n}`, by repeated multiplication so integer `e^t` gives exact values.
    pub fn e_n(&self, n: usize) -> f64 {
        self.et.powi((n * (n + 1) / 2) as i32)
    }

    /// `ε_0 = 1`, `ε_n = ε / n`.
    pub fn eps_n(&self, n: usize) -> f64 {
        if n == 0 {
            1.0
        } else {
            self.eps / n as f64
        }
    }

    /// Half-widths of `β` at level `n`; `tilde` uses `ε_{n+1}`.
    pub fn half_widths(&self, n: usize, tilde: bool) -> [f64; 2] {
        let e = if tilde { self.eps_n(n + 1) } else { self.eps_n(n) };
        let (t1, t0) = (self.t_n(n + 1), self.t_n(n));
        [0, 1].map(|i| e * (-self.w.get(i) * t1 - t0).exp())
    }

    /// `b_n = diag(e^{-w2 n t}, e^{w2 n t}, 1)`.
    pub fn b_n(&self, n: usize) -> [f64; 3] {
        let s = self.w.w2() * n as f64 * self.t();
        [(-s).exp(), s.exp(), 1.0]
    }

    pub fn validate(&self) -> Result<()> {
        self.w.require_nondegenerate()?;
        if !(self.et > 1.0 && self.et.is_finite()) {
            return Err(Error::InvalidInput(format!("e^t must exceed 1, got {}", self.et)));
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::InvalidInput(format!("eps must be positive, got {}", self.eps)));
        }
        if !(self.r > 0.0 && self.r.is_finite()) {
            return Err(Error::InvalidInput(format!("r must be positive, got {}", self.r)));
        }
        if self.depth < 1 {
            return Err(Error::InvalidInput("depth must be at least 1".into()));
        }
        if self.proof_regime {
            // the unspecified counting constants are taken as 1
            let (w1, w2) = (self.w.w1(), self.w.w2());
            let limit = 1e-4 * 1f64.min(w2).min(w1 - w2);
            if !(self.eps < self.r) {
                return Err(Error::PreconditionViolated(format!(
                    "proof regime needs eps < r, got eps = {}, r = {}",
                    self.eps, self.r
                )));
            }
            if !(self.r < limit) {
                return Err(Error::PreconditionViolated(format!(
                    "proof regime needs r < 1e-4 min(1, w2, w1 - w2) = {limit:e}, got r = {}",
                    self.r
                )));
            }
            let want = 100.0 / (self.eps * self.eps);
            if (self.t() - want).abs() > 1e-9 * want {
                return Err(Error::PreconditionViolated(format!(
                    "proof regime needs t = 100/eps^2 = {want:e}, got t = {}",
                    self.t()
                )));
            }
            return Err(Error::PreconditionViolated(format!(
                "proof regime is consistent but infeasible: e^(2t) = e^{:e} sons per vertex",
                2.0 * self.t()
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TreeNode {
    pub level: usize,
    pub q: i64,
    /// `(p1, p2)` with `h(τ)(p1, p2, q)^T ∈ R e3`.
    pub p: [i64; 2],
    /// Numerators of `τ = -p / q`.
    pub tau: [i64; 2],
    pub beta: Rect,
    pub beta_tilde: Rect,
    pub parent: Option<usize>,
}

impl TreeNode {
    pub fn tau_f64(&self) -> [f64; 2] {
        [self.tau[0] as f64 / self.q as f64, self.tau[1] as f64 / self.q as f64]
    }

    pub fn shift(&self) -> Shift {
        Shift::Rational { num: self.tau, den: self.q }
    }

    fn make(params: &TreeParams, level: usize, tau: [i64; 2], q: i64, parent: Option<usize>) -> Self {
        let c = [tau[0] as f64 / q as f64, tau[1] as f64 / q as f64];
        Self {
            level,
            q,
            p: [-tau[0], -tau[1]],
            tau,
            beta: Rect::new(c, params.half_widths(level, false)),
            beta_tilde: Rect::new(c, params.half_widths(level, true)),
            parent,
        }
    }

    pub fn root(params: &TreeParams) -> Self {
        Self::make(params, 0, [0, 0], 1, None)
    }
}

/// Whether `a/q` lies in the closed rectangle with rational centre `c/cq`,
/// up to the relative boundary tolerance (half-widths come from `exp`).
fn in_rect_exact(a: [i64; 2], q: i64, c: [i64; 2], cq: i64, half: [f64; 2]) -> bool {
    (0..2).all(|i| {
        let diff = (a[i] as i128 * cq as i128 - c[i] as i128 * q as i128).abs() as f64;
        diff <= half[i] * q as f64 * cq as f64 * (1.0 + BOUNDARY_TOL)
    })
}

/// Whether the flow lattice of `τ = a/q` at level `n` passes both dual conditions.
pub fn refined_filter(params: &TreeParams, n: usize, tau: [i64; 2], q: i64) -> Result<bool> {
    let shift = Shift::Rational { num: tau, den: q };
    let tn = params.t_n(n);
    let en = params.eps_n(n);
    let l = LatticeRep::flow(&params.w, tn, shift);
    if !in_kstar_capped(&l, en * en, params.cap)?.member {
        return Ok(false);
    }
    let lb = LatticeRep::flow_with_left(&params.w, tn, shift, params.b_n(n));
    Ok(in_kstar_capped(&lb, params.r, params.cap)?.member)
}

/// Sons of `parent` at level `parent.level + 1`, ordered by `(q, τ1, τ2)`.
pub fn enumerate_sons(parent: &TreeNode, params: &TreeParams, refined: bool) -> Result<Vec<TreeNode>> {
    enumerate_sons_indexed(parent, None, params, refined)
}

fn enumerate_sons_indexed(
    parent: &TreeNode,
    index: Option<usize>,
    params: &TreeParams,
    refined: bool,
) -> Result<Vec<TreeNode>> {
    let n = parent.level + 1;
    let e = params.e_n(n);
    let (qlo, qhi) = ((e / 2.0).floor() + 1.0, e.floor());
    let rect = if refined { parent.beta_tilde } else { parent.beta };
    let predicted = (qhi - qlo + 1.0).max(0.0) * (2.0 * rect.half[0] * qhi + 1.0) * (2.0 * rect.half[1] * qhi + 1.0);
    if !(predicted <= params.cap) {
        return Err(Error::CapacityExceeded { predicted, cap: params.cap });
    }
    let (qlo, qhi) = (qlo as i64, qhi as i64);
    let mut sons = Vec::new();
    for q in qlo..=qhi {
        let qf = q as f64;
        let lo = [0, 1].map(|i| ((rect.center[i] - rect.half[i]) * qf).floor() as i64 - 1);
        let hi = [0, 1].map(|i| ((rect.center[i] + rect.half[i]) * qf).ceil() as i64 + 1);
        for a1 in lo[0]..=hi[0] {
            for a2 in lo[1]..=hi[1] {
                let a = [a1, a2];
                if !in_rect_exact(a, q, parent.tau, parent.q, rect.half) {
                    continue;
                }
                if a1.gcd(&a2).gcd(&q) != 1 {
                    continue;
                }
                if refined && !refined_filter(params, n, a, q)? {
                    continue;
                }
                sons.push(TreeNode::make(params, n, a, q, index));
            }
        }
    }
    Ok(sons)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelStats {
    pub level: usize,
    pub count: usize,
    pub min_sons: usize,
    pub max_sons: usize,
    /// Parents at this level's previous level that received no sons.
    pub childless: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FractalTree {
    pub params: TreeParams,
    pub refined: bool,
    pub levels: Vec<Vec<TreeNode>>,
    pub stats: Vec<LevelStats>,
}

impl FractalTree {
    pub fn root(&self) -> &TreeNode {
        &self.levels[0][0]
    }

    pub fn level_counts(&self) -> Vec<usize> {
        self.levels.iter().map(Vec::len).collect()
    }

    /// Index ranges of the sons of each node of level `n - 1` inside level `n`.
    pub fn son_ranges(&self, n: usize) -> Vec<std::ops::Range<usize>> {
        let parents = self.levels[n - 1].len();
        let mut ranges = vec![0..0; parents];
        let kids = &self.levels[n];
        let mut i = 0;
        while i < kids.len() {
            let p = kids[i].parent.expect("non-root node has a parent");
            let mut j = i;
            while j < kids.len() && kids[j].parent == Some(p) {
                j += 1;
            }
            ranges[p] = i..j;
            i = j;
        }
        ranges
    }

    /// Ancestors of `levels[n][i]`, from the root down to the node itself.
    pub fn path(&self, n: usize, i: usize) -> Vec<&TreeNode> {
        let mut out = Vec::with_capacity(n + 1);
        let (mut lvl, mut idx) = (n, i);
        loop {
            let node = &self.levels[lvl][idx];
            out.push(node);
            match node.parent {
                Some(p) => {
                    lvl -= 1;
                    idx = p;
                }
                None => break,
            }
        }
        out.reverse();
        out
    }

    /// One line per node: level, q, p1, p2, tau1, tau2, beta lo1 hi1 lo2 hi2,
    /// parent index (`-1` for the root), tab separated.
    pub fn export_lines(&self) -> Vec<String> {
        let mut out = Vec::new();
        for level in &self.levels {
            for nd in level {
                let tau = nd.tau_f64();
                let b = nd.beta.bounds();
                out.push(format!(
                    "{}\t{}\t{}\t{}\t{:.17e}\t{:.17e}\t{:.17e}\t{:.17e}\t{:.17e}\t{:.17e}\t{}",
                    nd.level,
                    nd.q,
                    nd.p[0],
                    nd.p[1],
                    tau[0],
                    tau[1],
                    b[0],
                    b[1],
                    b[2],
                    b[3],
                    nd.parent.map_or(-1, |p| p as i64)
                ));
            }
        }
        out
    }
}

/// Breadth-first construction to `params.depth`.
pub fn build_tree(params: &TreeParams, refined: bool) -> Result<FractalTree> {
    params.validate()?;
    let mut levels = vec![vec![TreeNode::root(params)]];
    let mut stats = vec![LevelStats { level: 0, count: 1, min_sons: 0, max_sons: 0, childless: 0 }];
    let mut total = 1usize;
    for n in 1..=params.depth {
        let prev = &levels[n - 1];
        let mut next = Vec::new();
        let (mut min_sons, mut max_sons, mut childless) = (usize::MAX, 0, 0);
        for (i, parent) in prev.iter().enumerate() {
            let sons = enumerate_sons_indexed(parent, Some(i), params, refined)?;
            min_sons = min_sons.min(sons.len());
            max_sons = max_sons.max(sons.len());
            if sons.is_empty() {
                childless += 1;
            }
            total += sons.len();
            if total as f64 > params.cap {
                return Err(Error::CapacityExceeded { predicted: total as f64, cap: params.cap });
            }
            next.extend(sons);
        }
        if next.is_empty() {
            return Err(Error::EmptyLevel {
                level: n,
                detail: format!("none of the {} vertices of level {} has a son", prev.len(), n - 1),
            });
        }
        stats.push(LevelStats { level: n, count: next.len(), min_sons, max_sons, childless });
        levels.push(next);
    }
    Ok(FractalTree { params: *params, refined, levels, stats })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvariantReport {
    pub nodes: usize,
    pub nesting_failures: Vec<String>,
    pub denominator_failures: Vec<String>,
    pub l3prime_failures: Vec<String>,
    pub primitive_failures: Vec<String>,
}

impl InvariantReport {
    pub fn passed(&self) -> bool {
        self.nesting_failures.is_empty()
            && self.denominator_failures.is_empty()
            && self.l3prime_failures.is_empty()
            && self.primitive_failures.is_empty()
    }
}

/// Exhaustive nesting, denominator-range, primitivity and return-window checks.
pub fn check_invariants(tree: &FractalTree) -> InvariantReport {
    let p = &tree.params;
    let mut rep = InvariantReport {
        nodes: 0,
        nesting_failures: vec![],
        denominator_failures: vec![],
        l3prime_failures: vec![],
        primitive_failures: vec![],
    };
    for (n, level) in tree.levels.iter().enumerate() {
        let e = p.e_n(n);
        for (i, nd) in level.iter().enumerate() {
            rep.nodes += 1;
            let qf = nd.q as f64;
            if !(qf > e / 2.0 && qf <= e) {
                rep.denominator_failures.push(format!("level {n} node {i}: q = {} not in ({}, {}]", nd.q, e / 2.0, e));
            }
            if !IntTriple::new(nd.p[0], nd.p[1], nd.q).is_primitive() {
                rep.primitive_failures.push(format!("level {n} node {i}: ({:?}, {}) not primitive", nd.p, nd.q));
            }
            if let Some(pi) = nd.parent {
                let par = &tree.levels[n - 1][pi];
                let tol = 1e-12 * par.beta.half[0].max(par.beta.half[1]);
                if !par.beta.contains_rect(&nd.beta, tol) {
                    rep.nesting_failures.push(format!("level {n} node {i}: beta not inside parent {pi}"));
                }
            }
            let l = LatticeRep::flow(&p.w, p.t_n(n), nd.shift());
            if in_l3prime(&l).is_none() {
                rep.l3prime_failures.push(format!("level {n} node {i}: a_t h(tau) Z^3 misses the return window"));
            }
        }
    }
    rep
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CardinalityReport {
    pub refined: bool,
    /// `(level of parent, parent index, sons, sons / (ε_n^2 e^{2nt}))`.
    pub ratios: Vec<(usize, usize, usize, f64)>,
    pub outside_window: usize,
    pub window: [f64; 2],
    /// Informational unless the parameters are in the proof regime.
    pub informational: bool,
}

pub fn verify_cardinality(tree: &FractalTree) -> CardinalityReport {
    let p = &tree.params;
    let window = [0.01, 10.0];
    let mut ratios = Vec::new();
    for n in 1..tree.levels.len() {
        let norm = p.eps_n(n).powi(2) * p.et.powi(2 * n as i32);
        for (i, rg) in tree.son_ranges(n).into_iter().enumerate() {
            ratios.push((n - 1, i, rg.len(), rg.len() as f64 / norm));
        }
    }
    let outside_window = ratios.iter().filter(|r| r.3 < window[0] || r.3 > window[1]).count();
    CardinalityReport { refined: tree.refined, ratios, outside_window, window, informational: !p.proof_regime }
}

/// Separation bound for sons at level `n`, using `W_0 = e^{-w1 t}` and
/// `W_m = 2 ε_m e^{-w1 t_{m+1} - t_m}`.
pub fn separation_bound(p: &TreeParams, n: usize) -> f64 {
    let w_prev = width_w(p, n - 1);
    let (w1, w2, t) = (p.w.w1(), p.w.w2(), p.t());
    let nf = n as f64;
    let m = (-w1 * nf * t).exp().min(((w1 - w2) * p.t_n(n) - (1.0 + w2) * nf * t).exp());
    w_prev * p.r / (8.0 * p.eps_n(n - 1)) * m
}

/// The same bound with `W_0 = 2 e^{-w1 t}`, which is what the argument yields at level one.
pub fn separation_bound_direct(p: &TreeParams, n: usize) -> f64 {
    let scale = if n == 1 { 2.0 } else { 1.0 };
    scale * separation_bound(p, n)
}

pub fn width_w(p: &TreeParams, n: usize) -> f64 {
    if n == 0 {
        (-p.w.w1() * p.t()).exp()
    } else {
        2.0 * p.eps_n(n) * (-p.w.w1() * p.t_n(n + 1) - p.t_n(n)).exp()
    }
}

pub fn length_l(p: &TreeParams, n: usize) -> f64 {
    if n == 0 {
        (-p.w.w2() * p.t()).exp()
    } else {
        2.0 * p.eps_n(n) * (-p.w.w2() * p.t_n(n + 1) - p.t_n(n)).exp()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeparationReport {
    pub refined: bool,
    pub pairs_checked: usize,
    pub violations: Vec<String>,
    /// Smallest `dist / bound` among pairs whose horizontal gap is below the bound.
    pub worst_margin: Option<f64>,
    pub direct_violations: usize,
    /// Whether `8 ε_n e^{-w2 t} <= r` and `8 ε_n e^{-n t} <= r` hold for all levels.
    pub proof_condition_holds: bool,
}

pub fn verify_separation(tree: &FractalTree) -> SeparationReport {
    let p = &tree.params;
    let mut rep = SeparationReport {
        refined: tree.refined,
        pairs_checked: 0,
        violations: vec![],
        worst_margin: None,
        direct_violations: 0,
        proof_condition_holds: true,
    };
    for n in 1..tree.levels.len() {
        let en = p.eps_n(n);
        if 8.0 * en * (-p.w.w2() * p.t()).exp() > p.r || 8.0 * en * (-(n as f64) * p.t()).exp() > p.r {
            rep.proof_condition_holds = false;
        }
        let bound = separation_bound(p, n);
        let direct = separation_bound_direct(p, n);
        let sweep = bound.max(direct);
        for (pi, rg) in tree.son_ranges(n).into_iter().enumerate() {
            let mut sons: Vec<&TreeNode> = tree.levels[n][rg.clone()].iter().collect();
            sons.sort_by(|a, b| a.beta.center[0].total_cmp(&b.beta.center[0]));
            for i in 0..sons.len() {
                for j in i + 1..sons.len() {
                    let gap = sons[j].beta.lo(0) - sons[i].beta.hi(0);
                    if gap >= sweep {
                        break;
                    }
                    rep.pairs_checked += 1;
                    let d = sons[i].beta.distance(&sons[j].beta);
                    let m = d / bound;
                    rep.worst_margin = Some(rep.worst_margin.map_or(m, |w: f64| w.min(m)));
                    if d < direct {
                        rep.direct_violations += 1;
                    }
                    if d < bound {
                        rep.violations.push(format!(
                            "level {n} parent {pi}: sons q={} tau=({},{}) and q={} tau=({},{}) at distance {d:e} < {bound:e}",
                            sons[i].q, sons[i].tau[0], sons[i].tau[1], sons[j].q, sons[j].tau[0], sons[j].tau[1]
                        ));
                    }
                }
            }
        }
    }
    rep
}

/// Centres of the deepest nodes, plus `per_leaf` seeded uniform points in each `β`.
pub fn sample_points(tree: &FractalTree, per_leaf: usize, seed: u64) -> Vec<[f64; 2]> {
    let leaves = tree.levels.last().expect("tree has a root");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(leaves.len() * (1 + per_leaf));
    for nd in leaves {
        out.push(nd.tau_f64());
        for _ in 0..per_leaf {
            let b = &nd.beta;
            let u: f64 = rng.random_range(-1.0..=1.0);
            let v: f64 = rng.random_range(-1.0..=1.0);
            out.push([b.center[0] + u * b.half[0], b.center[1] + v * b.half[1]]);
        }
    }
    out
}

/// `3 max{ε_k e^{-w1(t_{k+1}-t)}, ε_k e^{-w2(t_{k+1}-t)}, e^{-(t-t_k)}}`.
pub fn contained_bound(p: &TreeParams, k: usize, t: f64) -> f64 {
    let tk1 = p.t_n(k + 1);
    let ek = p.eps_n(k);
    3.0 * (ek * (-p.w.w1() * (tk1 - t)).exp())
        .max(ek * (-p.w.w2() * (tk1 - t)).exp())
        .max((-(t - p.t_n(k))).exp())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContainedReport {
    pub points: usize,
    pub samples: usize,
    pub violations: Vec<String>,
    /// Largest `systole / bound` seen.
    pub worst_ratio: f64,
}

/// Systole of `a_t h(x) Z^3` for leaf centres `x` on `steps + 1` points of
/// `[0, t_depth]`, against the smallest bound over the ancestors of `x`.
pub fn check_contained(tree: &FractalTree, max_points: usize, steps: usize) -> Result<ContainedReport> {
    let p = &tree.params;
    let depth = tree.levels.len() - 1;
    let leaves = &tree.levels[depth];
    let stride = (leaves.len() / max_points.max(1)).max(1);
    let t_end = p.t_n(depth);
    let mut rep = ContainedReport { points: 0, samples: 0, violations: vec![], worst_ratio: 0.0 };
    for i in (0..leaves.len()).step_by(stride).take(max_points) {
        rep.points += 1;
        let path = tree.path(depth, i);
        let x = path[depth].shift();
        for s in 0..=steps {
            let t = t_end * s as f64 / steps as f64;
            let bound = (0..=depth).map(|k| contained_bound(p, k, t)).fold(f64::INFINITY, f64::min);
            let (sys, _) = systole(&LatticeRep::flow(&p.w, t, x), p.cap)?;
            rep.samples += 1;
            rep.worst_ratio = rep.worst_ratio.max(sys / bound);
            if sys > bound * (1.0 + 1e-12) {
                rep.violations.push(format!("leaf {i} t={t}: systole {sys:e} > bound {bound:e}"));
            }
        }
    }
    Ok(rep)
}
