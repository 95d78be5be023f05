use nalgebra::Vector3;
use num_integer::Integer;
use proptest::prelude::*;
use wsing::arith::{zeta3, zeta3_inv};
use wsing::counting::{
    all_points_count, application_regimes, bad_hyperplane_count, boundary_bookkeeping, count_ratio_bounds,
    hyperplane_slice, many_vectors_bracket, mobius_primitive_count, n_q_box, primitive_density, q_minima, r_norm,
    RATIO_WINDOW,
};
use wsing::lattice::{enumerate_points, Mat3};
use wsing::{Box3, Error, IntTriple, LatticeRep, Weight};

/// All `m != 0` with `T m` in the box, by scanning the bounding box of `T^{-1} K`.
fn scan(t: &Mat3, r: [f64; 3]) -> Vec<(IntTriple, [f64; 3])> {
    let inv = t.try_inverse().unwrap();
    let b: Vec<i64> = (0..3).map(|j| (0..3).map(|i| inv[(j, i)].abs() * r[i]).sum::<f64>().ceil() as i64 + 1).collect();
    let mut out = Vec::new();
    for a in -b[0]..=b[0] {
        for bb in -b[1]..=b[1] {
            for c in -b[2]..=b[2] {
                if (a, bb, c) == (0, 0, 0) {
                    continue;
                }
                let y = t * Vector3::new(a as f64, bb as f64, c as f64);
                if (0..3).all(|i| y[i].abs() <= r[i] * (1.0 + 1e-9)) {
                    out.push((IntTriple::new(a, bb, c), [y[0], y[1], y[2]]));
                }
            }
        }
    }
    out
}

fn skew() -> Mat3 {
    Mat3::new(1.0, 0.3, -0.2, 0.1, 1.1, 0.4, -0.25, 0.05, 0.9)
}

#[test]
fn zeta_series() {
    // Apéry's constant, independently summed with an Euler-Maclaurin tail
    let n = 20_000u64;
    let s: f64 = (1..=n).rev().map(|k| 1.0 / (k as f64).powi(3)).sum::<f64>() + 0.5 / (n as f64).powi(2);
    assert!((zeta3() - s).abs() < 1e-12);
    assert!((zeta3_inv() - 0.831907).abs() < 1e-6);
}

#[test]
fn density_examples() {
    let z3 = LatticeRep::standard();
    // the closed cube carries a boundary excess of about 1.5 ζ(3) / (ζ(2) N)
    let d = primitive_density(&Box3::cube(30.0).unwrap(), &z3).unwrap();
    let excess = 1.5 * zeta3() / (std::f64::consts::PI.powi(2) / 6.0) / 30.0;
    assert!((d.report.ratio / zeta3_inv() - 1.0 - excess).abs() < 0.005, "{}", d.report.ratio);
    assert!(d.half_open_deviation < 0.02 * zeta3_inv(), "{}", d.half_open_ratio);
    // closed, the third axis holds three layers for a width of two
    let d = primitive_density(&Box3::new(100.0, 10.0, 1.0).unwrap(), &z3).unwrap();
    assert!(d.half_open_deviation < 0.05, "{}", d.half_open_ratio);
    let want = scan(z3.transform(), [100.0, 10.0, 1.0]).into_iter().filter(|(m, _)| m.is_primitive()).count();
    assert_eq!(d.report.count, want as u64);
    let a = all_points_count(&Box3::cube(5.5).unwrap(), &z3).unwrap();
    assert_eq!((a.count, a.theta), (1330, 1331.0));
    assert!(matches!(
        primitive_density(&Box3::cube(0.5).unwrap(), &z3),
        Err(Error::PreconditionViolated(_))
    ));
}

#[test]
fn mobius_matches_direct_primitive_count() {
    for (l, r) in [
        (LatticeRep::standard(), [7.3, 4.1, 9.0]),
        (LatticeRep::from_matrix(skew()).unwrap(), [6.0, 6.0, 6.0]),
        (LatticeRep::diagonal([0.5, 1.0, 2.0]).unwrap(), [5.0, 3.0, 8.0]),
    ] {
        let k = Box3::new(r[0], r[1], r[2]).unwrap();
        let direct = scan(l.transform(), r).into_iter().filter(|(m, _)| m.is_primitive()).count() as u64;
        assert_eq!(mobius_primitive_count(&k, &l).unwrap(), direct);
        assert_eq!(enumerate_points(&l, &k, true).unwrap().len() as u64, direct);
    }
}

#[test]
fn ratio_examples() {
    let z3 = LatticeRep::standard();
    let k = Box3::cube(1.0).unwrap();
    let rb = count_ratio_bounds(&k, &z3, 1.0, 4.0, 3, 3, RATIO_WINDOW).unwrap();
    assert_eq!((rb.count_s, rb.count_s_prime), (3u64.pow(3) - 1, 9u64.pow(3) - 1));
    assert_eq!(rb.normalized, [0.4375, 0.4375]);
    assert!(rb.pass);
    let same = count_ratio_bounds(&k, &z3, 2.0, 2.0, 3, 3, RATIO_WINDOW).unwrap();
    assert_eq!((same.ratio, same.normalized), (1.0, [1.0, 1.0]));
    // minima of diag(4, 1, 1/4) in the unit box are 1/4, 1, 4
    let l = LatticeRep::diagonal([4.0, 1.0, 0.25]).unwrap();
    let rb = count_ratio_bounds(&k, &l, 1.0, 3.9, 2, 2, RATIO_WINDOW).unwrap();
    assert!(rb.pass, "{rb:?}");
    assert!(matches!(
        count_ratio_bounds(&k, &l, 0.5, 3.9, 2, 2, RATIO_WINDOW),
        Err(Error::PreconditionViolated(_))
    ));
}

#[test]
fn slice_examples() {
    let k = Box3::cube(1.0).unwrap();
    let s = hyperplane_slice(&k, [0.0, 0.0, 1.0]).unwrap();
    assert!((s.slice_area - 4.0).abs() < 1e-12);
    assert_eq!(s.ratio, 0.5);
    // regular hexagon with side sqrt(2)
    let h = hyperplane_slice(&k, [1.0, 1.0, 1.0]).unwrap();
    assert_eq!(h.vertices, 6);
    assert!((h.slice_area - 3.0 * 3f64.sqrt()).abs() < 1e-9);
    assert!(h.pass);
    let h2 = hyperplane_slice(&k, [2.0, 2.0, 2.0]).unwrap();
    assert!((h.ratio - h2.ratio).abs() < 1e-12);
    assert_eq!(hyperplane_slice(&k, [0.0; 3]).unwrap_err(), Error::ZeroFunctional);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn slice_ratio_in_window(phi in prop::array::uniform3(-3.0f64..3.0), r in prop::array::uniform3(0.1f64..5.0)) {
        prop_assume!(phi.iter().map(|x| x * x).sum::<f64>() > 1e-3);
        let k = Box3::new(r[0], r[1], r[2]).unwrap();
        let s = hyperplane_slice(&k, phi).unwrap();
        prop_assert!(s.pass, "{:?}", s);
        let s2 = hyperplane_slice(&k, phi.map(|x| -2.5 * x)).unwrap();
        prop_assert!((s.ratio - s2.ratio).abs() < 1e-9);
    }
}

#[test]
fn bad_set_on_standard_lattice() {
    // only ±e3* survives in N_3; S is the primitive part of the plane z = 0
    let rep = bad_hyperplane_count(&LatticeRep::standard(), [4.0, 4.0, 1.0], 0.25).unwrap();
    assert_eq!(rep.functionals, vec![IntTriple::new(0, 0, 1)]);
    let mut want = 0;
    for a in -4i64..=4 {
        for b in -4i64..=4 {
            if a.gcd(&b) == 1 {
                want += 1;
            }
        }
    }
    assert_eq!(rep.count, want);
    assert_eq!(rep.vol, 128.0);
}

#[test]
fn bad_set_two_stage_scan() {
    let t = skew() * (1.0 / skew().determinant().cbrt());
    let l = LatticeRep::from_matrix(t).unwrap();
    for (r, s) in [([2.0, 3.0, 1.0], 0.3), ([5.0, 5.0, 1.0], 0.2), ([1.0, 8.0, 1.0], 0.45)] {
        let rep = bad_hyperplane_count(&l, r, s).unwrap();
        let d = t.try_inverse().unwrap().transpose();
        let nb = n_q_box(r, s, 3.0 * s * r[1]).r;
        let fs: Vec<IntTriple> = scan(&d, nb).into_iter().map(|p| p.0).filter(|m| m.is_primitive()).collect();
        let mut want = 0u64;
        for (m, _) in scan(&t, r) {
            if m.is_primitive()
                && fs.iter().any(|f| f.p1 * m.p1 + f.p2 * m.p2 + f.q * m.q == 0)
            {
                want += 1;
            }
        }
        assert_eq!(rep.count, want, "r = {r:?}");
        assert_eq!(rep.functionals.len() * 2, fs.len());
    }
}

/// Greedy independent picks in increasing `‖·‖_r` over all of `N_limit ∩ L*`.
fn oracle_q(t: &Mat3, r: [f64; 3], s: f64, limit: f64) -> Vec<f64> {
    let d = t.try_inverse().unwrap().transpose();
    let mut pts = scan(&d, n_q_box(r, s, limit).r);
    pts.sort_by(|a, b| r_norm(a.1, r).total_cmp(&r_norm(b.1, r)));
    let mut chosen: Vec<[i64; 3]> = Vec::new();
    let mut out = Vec::new();
    for (m, y) in pts {
        let v = m.to_array();
        let independent = match chosen.len() {
            0 => true,
            1 => IntTriple::from_array(chosen[0]).cross(m) != [0; 3],
            2 => {
                let c = IntTriple::from_array(chosen[0]).cross(IntTriple::from_array(chosen[1]));
                c[0] * v[0] as i128 + c[1] * v[1] as i128 + c[2] * v[2] as i128 != 0
            }
            _ => false,
        };
        if independent {
            chosen.push(v);
            out.push(r_norm(y, r));
        }
    }
    out
}

#[test]
fn q_minima_examples() {
    // dual diag(1/8, 1/8, 64)
    let l = LatticeRep::diagonal([8.0, 8.0, 1.0 / 64.0]).unwrap();
    let q = q_minima(&l, [4.0, 4.0, 1.0], 0.25, 100.0).unwrap();
    assert_eq!(q, [Some(0.5), Some(0.5), Some(64.0)]);
    let q = q_minima(&LatticeRep::standard(), [4.0, 4.0, 1.0], 0.25, 50.0).unwrap();
    assert_eq!(q, [Some(1.0), None, None]);
    let t = skew() * (1.0 / skew().determinant().cbrt());
    for (r, s) in [([2.0, 3.0, 1.0], 0.3), ([1.0, 1.0, 1.0], 0.45), ([3.0, 6.0, 1.0], 0.4)] {
        let got: Vec<f64> = q_minima(&LatticeRep::from_matrix(t).unwrap(), r, s, 64.0).unwrap().into_iter().flatten().collect();
        let want = oracle_q(&t, r, s, 64.0);
        assert_eq!(got.len(), want.len());
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).abs() < 1e-12, "{got:?} vs {want:?}");
        }
    }
}

#[test]
fn count_one_error_shrinks() {
    let l = LatticeRep::from_matrix(skew()).unwrap();
    let errs: Vec<f64> = [4.0, 8.0, 16.0, 32.0, 64.0]
        .iter()
        .map(|&r| {
            let rep = all_points_count(&Box3::cube(r).unwrap(), &l).unwrap();
            (rep.ratio - 1.0).abs()
        })
        .collect();
    assert!(errs.windows(2).all(|p| p[1] < p[0]), "{errs:?}");
}

#[test]
fn boundary_counts() {
    let b = boundary_bookkeeping(&Box3::cube(2.0).unwrap(), &LatticeRep::standard()).unwrap();
    assert_eq!((b.closed, b.open, b.half_open, b.boundary), (124, 26, 63, 98));
    let l = LatticeRep::from_matrix(skew()).unwrap();
    let b = boundary_bookkeeping(&Box3::new(3.0, 2.5, 4.0).unwrap(), &l).unwrap();
    assert_eq!(b.closed, b.open + b.boundary);
    assert!(b.open <= b.half_open && b.half_open <= b.closed);
}

#[test]
fn application_cases() {
    let w = Weight::parse("2/3,1/3").unwrap();
    let z3 = LatticeRep::standard();
    let a = application_regimes(1, &z3, &w, 0.5, 0.25, 16f64.ln()).unwrap();
    assert!(a.measured_ratio.is_finite() && a.hypotheses.len() == 3);
    let b = application_regimes(2, &z3, &w, 0.2, 0.25, 64f64.ln()).unwrap();
    assert!(b.measured_ratio.is_finite());
    assert!(matches!(application_regimes(1, &z3, &w, 1.5, 0.25, 2.0), Err(Error::PreconditionViolated(_))));
    assert!(matches!(application_regimes(2, &z3, &w, 0.3, 0.25, 2.0), Err(Error::PreconditionViolated(_))));
}

#[test]
fn many_vectors_on_a_large_cube() {
    let b = many_vectors_bracket(&Box3::cube(40.0).unwrap(), &LatticeRep::standard(), 0.2).unwrap();
    assert!(b.hypotheses_hold && b.in_window);
}
