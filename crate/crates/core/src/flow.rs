//! The diagonal flow `a_t = diag(e^{w1 t}, e^{w2 t}, e^{-t})` on `h(x) Z^3`.

use crate::approx::ApproxTarget;
use crate::error::{Error, Result};
use crate::lattice::{flow_diag, systole, IntTriple, LatticeRep, Shift, DEFAULT_CAP};
use crate::weight::Weight;
use serde::Serialize;

#[derive(Clone, Debug, PartialEq)]
pub struct FlowPoint {
    pub x: Shift,
    pub w: Weight,
    pub t: f64,
    pub lattice: LatticeRep,
}

impl FlowPoint {
    pub fn new(x: Shift, w: &Weight, t: f64) -> Result<Self> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::InvalidInput(format!("t must be finite and >= 0, got {t}")));
        }
        Ok(Self { x, w: *w, t, lattice: LatticeRep::flow(w, t, x) })
    }

    pub fn diag(&self) -> [f64; 3] {
        flow_diag(&self.w, self.t)
    }
}

/// Converts a target into the shift of `h(x)`.
pub fn shift_of(x: &ApproxTarget) -> Shift {
    match *x {
        ApproxTarget::Rational { num, den } => Shift::Rational { num, den },
        other => Shift::Real(other.value()),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SystoleSeries {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub witnesses: Vec<IntTriple>,
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::InvalidInput("grid values must be finite and >= 0".into()));
    }
    if grid.windows(2).any(|p| p[1] <= p[0]) {
        return Err(Error::InvalidInput("grid must be strictly increasing".into()));
    }
    Ok(())
}

pub fn systole_profile(x: [f64; 2], w: &Weight, grid: &[f64]) -> Result<SystoleSeries> {
    systole_profile_shift(Shift::Real(x), w, grid, DEFAULT_CAP)
}

/// Shortest Euclidean vector of `a_t h(x) Z^3` for each `t` of the grid.
pub fn systole_profile_shift(x: Shift, w: &Weight, grid: &[f64], cap: f64) -> Result<SystoleSeries> {
    w.require_nondegenerate()?;
    check_grid(grid)?;
    let mut values = Vec::with_capacity(grid.len());
    let mut witnesses = Vec::with_capacity(grid.len());
    for &t in grid {
        if t.exp() > cap {
            return Err(Error::CapacityExceeded { predicted: t.exp(), cap });
        }
        let (v, m) = systole(&LatticeRep::flow(w, t, x), cap)?;
        values.push(v);
        witnesses.push(m);
    }
    Ok(SystoleSeries { grid: grid.to_vec(), values, witnesses })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DirichletOutcome {
    pub holds: bool,
    pub witness: Option<IntTriple>,
    /// Candidates within the `1e-12` band of a bound, not counted as witnesses.
    pub near_boundary: Vec<IntTriple>,
}

const STRICT_TOL: f64 = 1e-12;

/// Whether some `0 < q < T` has `|q x_i - p_i| < eps^{w_i} T^{-w_i}` for both `i`.
pub fn dirichlet_test(x: &ApproxTarget, w: &Weight, eps: f64, big_t: f64) -> Result<DirichletOutcome> {
    w.require_nondegenerate()?;
    if !(big_t > 1.0 && big_t.is_finite()) {
        return Err(Error::InvalidInput(format!("T must exceed 1, got {big_t}")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidInput(format!("eps must lie in (0, 1), got {eps}")));
    }
    let bound = [0, 1].map(|i| (eps / big_t).powf(w.get(i)));
    let qtop = big_t.ceil() as i64 - 1;
    let mut near_boundary = Vec::new();
    for q in 1..=qtop {
        if q as f64 >= big_t {
            break;
        }
        let p = x.nearest_p(q);
        let u = IntTriple::new(p[0], p[1], q);
        let r = x.residual(u);
        let strict = (0..2).all(|i| r[i].abs() < bound[i] * (1.0 - STRICT_TOL));
        if strict {
            return Ok(DirichletOutcome { holds: true, witness: Some(u), near_boundary });
        }
        let loose = (0..2).all(|i| r[i].abs() < bound[i] * (1.0 + STRICT_TOL));
        if loose {
            near_boundary.push(u);
        }
    }
    Ok(DirichletOutcome { holds: false, witness: None, near_boundary })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiProfile {
    pub grid: Vec<f64>,
    pub results: Vec<bool>,
    pub witnesses: Vec<Option<IntTriple>>,
    /// Smallest grid `T` from which every sampled test holds.
    pub threshold: Option<f64>,
}

pub fn di_profile(x: &ApproxTarget, w: &Weight, eps: f64, grid: &[f64]) -> Result<DiProfile> {
    if grid.windows(2).any(|p| p[1] <= p[0]) {
        return Err(Error::InvalidInput("T grid must be strictly increasing".into()));
    }
    let mut results = Vec::with_capacity(grid.len());
    let mut witnesses = Vec::with_capacity(grid.len());
    for &t in grid {
        let o = dirichlet_test(x, w, eps, t)?;
        results.push(o.holds);
        witnesses.push(o.witness);
    }
    let tail = results.iter().rev().take_while(|&&b| b).count();
    let threshold = (tail > 0).then(|| grid[grid.len() - tail]);
    Ok(DiProfile { grid: grid.to_vec(), results, witnesses, threshold })
}
