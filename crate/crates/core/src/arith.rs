//! Small integer and series helpers.

use num_integer::Integer;

pub fn gcd3(a: i64, b: i64, c: i64) -> i64 {
    a.gcd(&b).gcd(&c)
}

pub fn is_primitive(m: [i64; 3]) -> bool {
    gcd3(m[0], m[1], m[2]) == 1
}

/// Nearest integer to `a / b` (b > 0), ties to even.
pub fn round_div_half_even(a: i128, b: i128) -> i128 {
    debug_assert!(b > 0);
    let (q, r) = a.div_mod_floor(&b);
    let twice = 2 * r;
    if twice > b || (twice == b && q.is_odd()) {
        q + 1
    } else {
        q
    }
}

/// Nearest integer to `q * hi + q * lo`, ties to even, without losing the
/// fractional part to the product's rounding.
pub fn nearest_int_scaled(q: f64, hi: f64, lo: f64) -> f64 {
    let c = (q * hi).round_ties_even();
    let r_hi = q.mul_add(hi, -c);
    let r_lo = q * lo;
    // r_hi -/+ 0.5 is exact for |r_hi| near one half
    let up = (r_hi - 0.5) + r_lo;
    let down = (r_hi + 0.5) + r_lo;
    if up > 0.0 {
        c + 1.0
    } else if down < 0.0 {
        c - 1.0
    } else if up == 0.0 || down == 0.0 {
        let alt = if up == 0.0 { c + 1.0 } else { c - 1.0 };
        if alt.rem_euclid(2.0) == 0.0 {
            alt
        } else {
            c
        }
    } else {
        c
    }
}

/// Moebius function on `0..=n` by a linear sieve (index 0 is unused).
pub fn mobius_table(n: usize) -> Vec<i8> {
    let mut mu = vec![1i8; n + 1];
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    if n >= 1 {
        mu[0] = 0;
    }
    for i in 2..=n {
        if !composite[i] {
            primes.push(i);
            mu[i] = -1;
        }
        for &p in &primes {
            let ip = i * p;
            if ip > n {
                break;
            }
            composite[ip] = true;
            if i % p == 0 {
                mu[ip] = 0;
                break;
            }
            mu[ip] = -mu[i];
        }
    }
    mu
}

/// zeta(3) by partial summation with an Euler-Maclaurin tail; error well below 1e-12.
pub fn zeta3() -> f64 {
    const N: u32 = 20_000;
    let mut s = 0.0f64;
    for n in (1..=N).rev() {
        let x = n as f64;
        s += 1.0 / (x * x * x);
    }
    let x = N as f64;
    // tail sum_{n>N} n^-3 = 1/(2N^2) - 1/(2N^3) + 1/(4N^4) - ...
    s + 1.0 / (2.0 * x * x) - 1.0 / (2.0 * x * x * x) + 1.0 / (4.0 * x.powi(4))
}

pub fn zeta3_inv() -> f64 {
    1.0 / zeta3()
}

pub fn cross_i128(a: [i64; 3], b: [i64; 3]) -> [i128; 3] {
    let a = a.map(i128::from);
    let b = b.map(i128::from);
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn det3_i128(a: [i64; 3], b: [i64; 3], c: [i64; 3]) -> i128 {
    let x = cross_i128(b, c);
    a[0] as i128 * x[0] + a[1] as i128 * x[1] + a[2] as i128 * x[2]
}

pub fn dot_i128(a: [i64; 3], b: [i64; 3]) -> i128 {
    (0..3).map(|i| a[i] as i128 * b[i] as i128).sum()
}
