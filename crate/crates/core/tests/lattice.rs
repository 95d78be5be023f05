use proptest::prelude::*;
use std::collections::BTreeSet;
use wsing::lattice::{
    dual_lattice, enumerate_points, in_kstar, in_l3prime, knorm, successive_minima, systole, Mat3,
};
use wsing::{Box3, IntTriple, LatticeRep, Shift, Weight};

/// Every `m` in the bounding box of `T^{-1} K`, tested directly.
fn triple_loop(t: &Mat3, k: &Box3, primitive: bool) -> BTreeSet<IntTriple> {
    let inv = t.try_inverse().unwrap();
    let bound = |j: usize| -> i64 { (0..3).map(|i| inv[(j, i)].abs() * k.r[i]).sum::<f64>().ceil() as i64 + 1 };
    let (b0, b1, b2) = (bound(0), bound(1), bound(2));
    let mut out = BTreeSet::new();
    for a in -b0..=b0 {
        for b in -b1..=b1 {
            for c in -b2..=b2 {
                if a == 0 && b == 0 && c == 0 {
                    continue;
                }
                let y = t * nalgebra::Vector3::new(a as f64, b as f64, c as f64);
                if knorm([y[0], y[1], y[2]], k) > 1.0 + 1e-9 {
                    continue;
                }
                let m = IntTriple::new(a, b, c);
                if primitive && !m.is_primitive() {
                    continue;
                }
                out.insert(m);
            }
        }
    }
    out
}

fn matrix_strategy() -> impl Strategy<Value = Mat3> {
    prop::array::uniform9(-2.0f64..2.0)
        .prop_map(|a| Mat3::from_row_slice(&a))
        .prop_filter("well conditioned", |m| m.determinant().abs() > 0.3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn enumeration_matches_triple_loop(
        t in matrix_strategy(),
        r in prop::array::uniform3(0.3f64..4.0),
        primitive in any::<bool>(),
    ) {
        let l = LatticeRep::from_matrix(t).unwrap();
        let k = Box3::new(r[0], r[1], r[2]).unwrap();
        prop_assume!(k.volume() / l.covolume() < 2e4);
        let got: BTreeSet<IntTriple> = enumerate_points(&l, &k, primitive).unwrap().into_iter().collect();
        prop_assert_eq!(got, triple_loop(&t, &k, primitive));
    }

    #[test]
    fn minkowski_sandwich(t in matrix_strategy(), r in prop::array::uniform3(0.3f64..4.0)) {
        let l = LatticeRep::from_matrix(t).unwrap();
        let k = Box3::new(r[0], r[1], r[2]).unwrap();
        let m = successive_minima(&l, &k).unwrap();
        prop_assert!(m.lambdas[0] <= m.lambdas[1] && m.lambdas[1] <= m.lambdas[2]);
        prop_assert!(m.minkowski_holds(1e-6), "product {}", m.minkowski_product());
    }

    #[test]
    fn dual_pairing_is_integral(t in matrix_strategy()) {
        let l = LatticeRep::from_matrix(t).unwrap();
        let d = dual_lattice(&l).unwrap();
        let p = d.transform().transpose() * l.transform();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((p[(i, j)] - want).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn l3prime_fast_path_matches_enumeration(
        num in prop::array::uniform2(-40i64..40),
        den in 1i64..40,
        t in 0.0f64..4.0,
    ) {
        let w = Weight::parse("2/3,1/3").unwrap();
        let shift = Shift::Rational { num, den };
        let fast = LatticeRep::flow(&w, t, shift);
        let slow = LatticeRep::from_matrix(*fast.transform()).unwrap();
        match (in_l3prime(&fast), in_l3prime(&slow)) {
            (Some(a), Some(b)) => prop_assert!((a - b).abs() < 1e-9),
            (None, None) => {}
            (a, b) => {
                // only a value sitting on the 1/2 or 1 boundary may differ
                let v = a.or(b).unwrap();
                prop_assert!((v - 0.5).abs() < 1e-8 || (v - 1.0).abs() < 1e-8, "{:?} vs {:?}", a, b);
            }
        }
    }
}

#[test]
fn systole_of_standard_lattice_is_one() {
    let (n, m) = systole(&LatticeRep::standard(), 1e8).unwrap();
    assert_eq!(n, 1.0);
    assert_eq!(m.to_array().iter().map(|c| c.abs()).sum::<i64>(), 1);
}

#[test]
fn kstar_on_diagonal_lattices() {
    let l = LatticeRep::diagonal([4.0, 0.5, 0.5]).unwrap();
    // dual is diag(1/4, 2, 2)
    let o = in_kstar(&l, 0.3).unwrap();
    assert!(!o.member);
    assert!((o.witness_norm.unwrap() - 0.25).abs() < 1e-12);
    assert!(in_kstar(&l, 0.25).unwrap().member);
}

#[test]
fn l3prime_on_flow_lattices() {
    let w = Weight::parse("1/2,1/2").unwrap();
    // e3 lies in the lattice with height e^{-t} q
    let l = LatticeRep::flow(&w, 3f64.ln(), Shift::Rational { num: [1, 2], den: 3 });
    assert!((in_l3prime(&l).unwrap() - 1.0).abs() < 1e-12);
    let l = LatticeRep::flow(&w, 5f64.ln(), Shift::Rational { num: [1, 1], den: 2 });
    assert_eq!(in_l3prime(&l), None);
}
