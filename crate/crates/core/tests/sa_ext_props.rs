mod common;

use common::{cm, commuting_case, cx, herm, hermitian, tol};
use nalgebra::DMatrix;
use opext_core::kvn::{kvn_extend, PartialPositiveOperator};
use opext_core::numkit::{diag, loewner_leq, unit_column};
use opext_core::oracle::{random_instance, Instance, InstanceKind, Rng};
use opext_core::sa_ext::{
    a_bound, alpha_of_total, check_commutation, extend_symmetric, in_interval,
    SymmetricPartialOperator,
};
use opext_core::PsdMatrix;
use proptest::prelude::*;

fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + b.abs())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn extremal_extensions(seed in any::<u64>(), n in 1usize..=12) {
        let Instance::SaExt { s0, a, .. } =
            random_instance(InstanceKind::SaExt, &[n], &mut Rng::new(seed)).unwrap()
        else { unreachable!() };
        let t = tol();
        let iv = extend_symmetric(&s0, &a, &t).unwrap();
        let scale = 1.0 + s0.values().norm();
        for s in [&iv.s_min, &iv.s_max] {
            prop_assert!(s0.extension_residual(s) <= 10.0 * t.eq * scale);
            let alpha = alpha_of_total(s, &a, &t).unwrap();
            prop_assert!(relative(alpha, iv.alpha) <= 1e-7, "{} vs {}", alpha, iv.alpha);
        }
        prop_assert!(loewner_leq(&iv.s_min, &iv.s_max, &t).unwrap());
        for step in 0..=10 {
            let s = iv.interpolate(step as f64 / 10.0);
            prop_assert!(in_interval(&s, &iv, &t).unwrap());
            prop_assert!(s0.extension_residual(&s) <= 10.0 * t.eq * scale);
            let alpha = alpha_of_total(&s, &a, &t).unwrap();
            prop_assert!(relative(alpha, iv.alpha) <= 1e-7);
        }
    }

    #[test]
    fn hilbert_case_matches_direct_kvn(seed in any::<u64>(), n in 1usize..=10) {
        let mut rng = Rng::new(seed);
        let k = rng.integer(1, n);
        let h = hermitian(n, &mut rng);
        let d = rng.gaussian_matrix(n, k);
        let v = &h * &d;
        let t = tol();
        let s0 = SymmetricPartialOperator::new(cm(d.clone()), cm(v.clone()), &t).unwrap();
        let id = PsdMatrix::identity(n);
        let iv = extend_symmetric(&s0, &id, &t).unwrap();
        let alpha = a_bound(&s0, &id, &t).unwrap();
        let shifted = |sign: f64| {
            let op = PartialPositiveOperator::new(cm(d.clone()), cm(&d * cx(alpha) + &v * cx(sign)), &t).unwrap();
            kvn_extend(&op, &t).unwrap().into_inner()
        };
        let eye = DMatrix::identity(n, n) * cx(alpha);
        let s_min = shifted(1.0) - &eye;
        let s_max = &eye - shifted(-1.0);
        let scale = 1.0 + alpha;
        prop_assert!((iv.s_min.as_matrix() - s_min).norm() <= 1e-8 * scale);
        prop_assert!((iv.s_max.as_matrix() - s_max).norm() <= 1e-8 * scale);
    }

    #[test]
    fn commuting_b_commutes_with_extremes(seed in any::<u64>(), n in 1usize..=10) {
        let mut rng = Rng::new(seed);
        let case = commuting_case(n, &mut rng);
        let v = &case.h * &case.d;
        let t = tol();
        let s0 = SymmetricPartialOperator::new(cm(case.d.clone()), cm(v), &t).unwrap();
        let ok = check_commutation(&herm(case.b.clone()), &s0, &PsdMatrix::identity(n), &t).unwrap();
        prop_assert!(ok);
    }
}

#[test]
fn norm_preserving_extensions_of_worked_family_lie_in_interval() {
    let t = tol();
    let s0 =
        SymmetricPartialOperator::new(cm(unit_column(2, 0)), cm(unit_column(2, 0)), &t).unwrap();
    let id = PsdMatrix::identity(2);
    let iv = extend_symmetric(&s0, &id, &t).unwrap();
    let mut found = 0;
    for i in 0..=300 {
        let x = -1.5 + 3.0 * i as f64 / 300.0;
        for j in 0..=20 {
            // Off-diagonal entries break the extension property unless zero.
            let off = -0.5 + j as f64 / 20.0;
            let mut s = diag(&[1.0, x]);
            s[(0, 1)] = cx(off);
            s[(1, 0)] = cx(off);
            let s = herm(s);
            let extends = s0.extension_residual(&s) <= t.eq;
            let preserves = alpha_of_total(&s, &id, &t).unwrap() <= 1.0 + t.eq;
            if extends && preserves {
                found += 1;
                assert!(in_interval(&s, &iv, &t).unwrap(), "x = {x}");
            }
        }
    }
    assert_eq!(found, 201);
}
