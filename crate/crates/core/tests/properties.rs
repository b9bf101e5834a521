use num_complex::Complex64;
use proptest::prelude::*;

use moment_lab::closed_forms::{oneswap_closed_form, twoswap_closed_form, SqSampler};
use moment_lab::decomposer::{classify, verify_product_identity, MomentConfig, Quadruple, TermClass};
use moment_lab::farey::FareyArcs;
use moment_lab::shift_arith::{gcd, tau_symmetry_check, tau_table, ShiftQuadruple};
use moment_lab::special::{chi, zeta};
use moment_lab::weights::MellinWeight;

fn shift() -> impl Strategy<Value = f64> {
    0.03f64..0.3
}

fn distinct(s: &ShiftQuadruple) -> bool {
    s.check_nondegenerate(1e-3).is_ok()
        && [s.interchanged_pairs(), s.swapped_second(), s.swapped_second().interchanged_pairs()]
            .iter()
            .all(|v| v.check_nondegenerate(1e-3).is_ok())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn tau_is_symmetric_in_its_shifts(a in -0.5f64..0.5, b in -0.5f64..0.5, ia in -2.0f64..2.0, ib in -2.0f64..2.0) {
        let (a, b) = (Complex64::new(a, ia), Complex64::new(b, ib));
        let (ab, ba) = (tau_table(3000, a, b).unwrap(), tau_table(3000, b, a).unwrap());
        // rounding scale: the sum of |d^{-a} e^{-b}| over de = n
        let scale = tau_table(3000, Complex64::new(a.re, 0.0), Complex64::new(b.re, 0.0)).unwrap();
        for n in 1..=3000 {
            let gap = (ab[n] - ba[n]).norm();
            prop_assert!(gap <= 1e-14 * scale[n].re, "n = {}: {:e}", n, gap);
        }
        prop_assert!(tau_symmetry_check(&ab, &ba).unwrap() <= 1e-10);
    }

    #[test]
    fn zeta_satisfies_the_functional_equation(re in -1.0f64..2.0, im in 1.0f64..40.0) {
        let s = Complex64::new(re, im);
        let r = zeta(s).unwrap() - chi(s).unwrap() * zeta(Complex64::new(1.0, 0.0) - s).unwrap();
        prop_assert!(r.norm() <= 1e-10 * zeta(s).unwrap().norm().max(1.0));
    }

    #[test]
    fn zeta_commutes_with_conjugation(re in -3.0f64..3.0, im in 0.5f64..30.0) {
        let s = Complex64::new(re, im);
        prop_assert!((zeta(s.conj()).unwrap() - zeta(s).unwrap().conj()).norm() <= 1e-13 * zeta(s).unwrap().norm());
    }

    #[test]
    fn product_identity_and_arc_containment_hold(
        q in 1u64..40, m1 in 1u64..5000, m2 in 1u64..5000, n1 in 1u64..5000, n2 in 1u64..5000,
    ) {
        let arcs = FareyArcs::new(q).unwrap();
        let t = classify(Quadruple::new(m1, m2, n1, n2), &arcs);
        prop_assert!(verify_product_identity(&t));
        prop_assert!(t.arc.contains(t.oriented.m1, t.oriented.n1));
        prop_assert!(t.oriented.m1 <= t.oriented.n1);
        prop_assert_eq!(t.class == TermClass::Diagonal, t.h1 == 0 && t.h2 == 0);
    }

    #[test]
    fn reflection_does_not_change_the_class(q in 1u64..40, m1 in 1u64..2000, m2 in 1u64..2000, n1 in 1u64..2000, n2 in 1u64..2000) {
        prop_assume!(m1 != n1);
        let arcs = FareyArcs::new(q).unwrap();
        let a = classify(Quadruple::new(m1, m2, n1, n2), &arcs);
        let b = classify(Quadruple::new(n1, n2, m1, m2), &arcs);
        prop_assert_eq!(a.class, b.class);
        prop_assert_eq!(a.oriented, b.oriented);
    }

    #[test]
    fn farey_neighbours_are_unimodular(q in 1u64..200) {
        let arcs = FareyArcs::new(q).unwrap();
        let list = arcs.arcs();
        prop_assert_eq!(arcs.boundary().hi, list[0].lo);
        for w in list.windows(2) {
            prop_assert_eq!(w[0].hi, w[1].lo);
            prop_assert_eq!(w[0].center.det(w[1].center), -1);
            prop_assert_eq!(gcd(w[1].center.num, w[1].center.den), 1);
        }
    }

    #[test]
    fn mellin_weight_is_a_partition_of_unity(y in 0.05f64..1.0, z1 in 0.1f64..0.3, z2 in 0.1f64..0.3) {
        let phi = MellinWeight::new(2.0, &[Complex64::new(z1, 0.0), Complex64::new(z2, 0.0)]).unwrap();
        let (p, r) = (phi.phi(y).unwrap(), phi.phi(1.0 / y).unwrap());
        // small zeros make φ large, so the sum cancels
        prop_assert!((p + r - 1.0).abs() <= 1e-12 * p.abs().max(1.0));
    }

    #[test]
    fn sq_commutes_with_conjugation(q in 2u64..30, xr in shift(), er in shift(), xi in -1.0f64..1.0, ei in -1.0f64..1.0) {
        let (x, e) = (Complex64::new(xr, xi), Complex64::new(er, ei));
        let phi = MellinWeight::new(2.0, &[Complex64::new(0.2, 0.0)]).unwrap();
        let s = SqSampler::new(q, &phi).unwrap();
        let gap = (s.sum(x.conj(), e.conj()) - s.sum(x, e).conj()).norm();
        prop_assert!(gap <= 1e-12 * s.sum(x, e).norm());
    }

    #[test]
    fn twoswap_is_exactly_invariant_under_pair_interchange(a in shift(), b in shift(), g in shift(), d in shift()) {
        let s = ShiftQuadruple::real(a, b, g, d);
        prop_assume!(distinct(&s));
        let f = |s: ShiftQuadruple| twoswap_closed_form(&MomentConfig::new(300.0, 5000, 10, 0.1, s));
        match (f(s), f(s.interchanged_pairs())) {
            (Ok(x), Ok(y)) => prop_assert_eq!(x, y),
            (x, y) => prop_assert_eq!(x.is_err(), y.is_err()),
        }
    }

    #[test]
    fn closed_forms_are_real_for_real_shifts(a in shift(), b in shift(), g in shift(), d in shift()) {
        let s = ShiftQuadruple::real(a, b, g, d);
        prop_assume!(distinct(&s));
        let cfg = MomentConfig::new(300.0, 5000, 10, 0.1, s);
        if let (Ok(one), Ok(two)) = (oneswap_closed_form(&cfg), twoswap_closed_form(&cfg)) {
            prop_assert!(one.total.im.abs() <= 1e-12 * one.total.norm());
            prop_assert!(two.im.abs() <= 1e-12 * two.norm().max(1e-300));
        }
    }
}
