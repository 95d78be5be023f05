//! Weight pairs and rational parsing.

use crate::error::{Error, Result};
use num_rational::Ratio;
use serde::Serialize;

pub type Q64 = Ratio<i64>;

/// A weight `(w1, w2)` with `w1 + w2 = 1` and `w1 >= w2`.
///
/// When built from rationals the exact values are kept alongside the floats.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Weight {
    w1: f64,
    w2: f64,
    exact: Option<(Q64, Q64)>,
}

const SUM_TOL: f64 = 1e-12;

impl Weight {
    pub fn new(w1: f64, w2: f64) -> Result<Self> {
        let w = Self::new_allow_degenerate(w1, w2)?;
        w.require_nondegenerate()?;
        Ok(w)
    }

    /// Accepts `(1, 0)`; only the closed-form dimension uses this.
    pub fn new_allow_degenerate(w1: f64, w2: f64) -> Result<Self> {
        if !(w1.is_finite() && w2.is_finite()) {
            return Err(Error::InvalidWeight(format!("non-finite ({w1}, {w2})")));
        }
        if (w1 + w2 - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidWeight(format!("w1 + w2 = {} != 1", w1 + w2)));
        }
        if w2 < 0.0 || w1 < w2 {
            return Err(Error::InvalidWeight(format!(
                "need w1 >= w2 >= 0, got ({w1}, {w2})"
            )));
        }
        Ok(Self { w1, w2, exact: None })
    }

    pub fn from_ratios(w1: Q64, w2: Q64) -> Result<Self> {
        let w = Self::from_ratios_allow_degenerate(w1, w2)?;
        w.require_nondegenerate()?;
        Ok(w)
    }

    pub fn from_ratios_allow_degenerate(w1: Q64, w2: Q64) -> Result<Self> {
        if w1 + w2 != Q64::from_integer(1) {
            return Err(Error::InvalidWeight(format!("{w1} + {w2} != 1")));
        }
        if w2 < Q64::from_integer(0) || w1 < w2 {
            return Err(Error::InvalidWeight(format!(
                "need w1 >= w2 >= 0, got ({w1}, {w2})"
            )));
        }
        Ok(Self {
            w1: ratio_to_f64(w1),
            w2: ratio_to_f64(w2),
            exact: Some((w1, w2)),
        })
    }

    /// Parses `"2/3,1/3"` or `"0.75,0.25"`.
    pub fn parse(s: &str) -> Result<Self> {
        let (a, b) = Self::parse_parts(s)?;
        match (a, b) {
            (Number::Exact(a), Number::Exact(b)) => Self::from_ratios(a, b),
            (a, b) => Self::new(a.value(), b.value()),
        }
    }

    pub fn parse_allow_degenerate(s: &str) -> Result<Self> {
        let (a, b) = Self::parse_parts(s)?;
        match (a, b) {
            (Number::Exact(a), Number::Exact(b)) => Self::from_ratios_allow_degenerate(a, b),
            (a, b) => Self::new_allow_degenerate(a.value(), b.value()),
        }
    }

    fn parse_parts(s: &str) -> Result<(Number, Number)> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 2 {
            return Err(Error::InvalidWeight(format!("expected two components, got '{s}'")));
        }
        let a = Number::parse(parts[0]).map_err(|e| Error::InvalidWeight(e.to_string()))?;
        let b = Number::parse(parts[1]).map_err(|e| Error::InvalidWeight(e.to_string()))?;
        Ok((a, b))
    }

    pub fn w1(&self) -> f64 {
        self.w1
    }

    pub fn w2(&self) -> f64 {
        self.w2
    }

    pub fn exact(&self) -> Option<(Q64, Q64)> {
        self.exact
    }

    pub fn is_degenerate(&self) -> bool {
        self.w2 == 0.0
    }

    pub fn require_nondegenerate(&self) -> Result<()> {
        if self.is_degenerate() {
            Err(Error::InvalidWeight("w2 = 0 is only valid for the closed-form dimension".into()))
        } else {
            Ok(())
        }
    }

    pub fn get(&self, i: usize) -> f64 {
        if i == 0 {
            self.w1
        } else {
            self.w2
        }
    }

    /// `2^{1/w2}`, the constant in the best-approximation sandwiches.
    pub fn two_pow_inv_w2(&self) -> f64 {
        2f64.powf(1.0 / self.w2)
    }

    pub fn label(&self) -> [String; 2] {
        match self.exact {
            Some((a, b)) => [a.to_string(), b.to_string()],
            None => [fmt_real(self.w1), fmt_real(self.w2)],
        }
    }
}

impl Serialize for Weight {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.label().serialize(s)
    }
}

fn fmt_real(x: f64) -> String {
    format!("{x}")
}

pub fn ratio_to_f64(r: Q64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// A parsed scalar that remembers whether it was written exactly.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Number {
    Exact(Q64),
    Real(f64),
}

impl Number {
    /// Accepts integers, `a/b`, plain decimals (kept exact) and anything `f64` parses.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidInput(format!("cannot parse number '{s}'"));
        if let Some((n, d)) = s.split_once('/') {
            let n: i64 = n.trim().parse().map_err(|_| bad())?;
            let d: i64 = d.trim().parse().map_err(|_| bad())?;
            if d == 0 {
                return Err(Error::InvalidInput(format!("zero denominator in '{s}'")));
            }
            return Ok(Number::Exact(Q64::new(n, d)));
        }
        if let Ok(n) = s.parse::<i64>() {
            return Ok(Number::Exact(Q64::from_integer(n)));
        }
        if let Some(r) = parse_decimal(s) {
            return Ok(Number::Exact(r));
        }
        let v: f64 = s.parse().map_err(|_| bad())?;
        if !v.is_finite() {
            return Err(bad());
        }
        Ok(Number::Real(v))
    }

    pub fn value(&self) -> f64 {
        match self {
            Number::Exact(r) => ratio_to_f64(*r),
            Number::Real(v) => *v,
        }
    }
}

fn parse_decimal(s: &str) -> Option<Q64> {
    let (neg, body) = match s.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = body.split_once('.')?;
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().all(|c| c.is_ascii_digit()) || !frac.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    if int.len() + frac.len() > 17 {
        return None;
    }
    let digits = format!("{int}{frac}");
    let n: i64 = if digits.is_empty() { 0 } else { digits.parse().ok()? };
    let d = 10i64.checked_pow(frac.len() as u32)?;
    let r = Q64::new(n, d);
    Some(if neg { -r } else { r })
}
