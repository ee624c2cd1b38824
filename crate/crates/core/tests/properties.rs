use bogoliubov_core::coefficients::{f_g_from, tau};
use bogoliubov_core::lattice::{negate, ModeSet, Momentum};
use bogoliubov_core::limitlaw::{covariance, limit_char_fn, CovMatrix};
use bogoliubov_core::observables::{dressed_vector, NuVector, ObservableSpec};
use bogoliubov_core::Complex64;
use proptest::prelude::*;

fn nonzero_n() -> impl Strategy<Value = [i32; 3]> {
    prop::array::uniform3(-5i32..=5).prop_filter("nonzero", |n| *n != [0, 0, 0])
}

fn complex() -> impl Strategy<Value = Complex64> {
    (-2.0f64..2.0, -2.0f64..2.0).prop_map(|(re, im)| Complex64::new(re, im))
}

proptest! {
    #[test]
    fn negation_is_an_involution(n in nonzero_n()) {
        let m = Momentum::new(n).unwrap();
        prop_assert_eq!(negate(negate(m)), m);
        prop_assert_eq!(m.p_sq(), negate(m).p_sq());
    }

    #[test]
    fn mode_sets_are_negation_closed(cutoff in 1u32..4, particles in 1u64..2000) {
        let set = ModeSet::build(cutoff, particles);
        for &m in set.modes() {
            prop_assert!(set.contains(m.negate()));
        }
        prop_assert_eq!(set.low_set().len() + set.high_set().len(), set.len());
    }

    #[test]
    fn bogoliubov_angles_are_consistent(p_sq in 1.0f64..1e4, vf in 0.0f64..5.0, eta in -0.5f64..0.0) {
        let (f, g) = f_g_from(p_sq, vf, eta).unwrap();
        prop_assert!(f > 0.0);
        prop_assume!((g / f).abs() < 1.0);
        let t = tau(f, g).unwrap();
        let closed = 0.25 * (p_sq / (p_sq + 2.0 * vf)).ln();
        prop_assert!((eta + t - closed).abs() < 1e-10);
        prop_assert!((eta.cosh().powi(2) - eta.sinh().powi(2) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fbarhat_is_conjugate_reflection(n in nonzero_n(), a in complex(), b in complex()) {
        let neg = [-n[0], -n[1], -n[2]];
        let o = ObservableSpec::from_multiplier(&[(n, a), (neg, b)], Some(1.0)).unwrap();
        let m = Momentum::new(n).unwrap();
        prop_assert_eq!(o.fbarhat(m), o.fhat(m.negate()).conj());
        prop_assert_eq!(o.fbarhat(m.negate()), o.fhat(m).conj());
    }

    #[test]
    fn real_multipliers_give_conjugate_symmetric_vectors(n in nonzero_n(), a in complex(), angle in -0.3f64..0.0) {
        let neg = [-n[0], -n[1], -n[2]];
        let o = ObservableSpec::from_multiplier(&[(n, a), (neg, a.conj())], None).unwrap();
        let m = Momentum::new(n).unwrap();
        let v = dressed_vector(&o, &[m, m.negate()], &[angle, angle]).unwrap();
        prop_assert!((v.values[1] - v.values[0].conj()).norm() < 1e-15);
    }

    #[test]
    fn negative_angles_do_not_amplify_cosines(n in nonzero_n(), angle in -2.0f64..0.0) {
        let o = ObservableSpec::cos(n).unwrap();
        let m = Momentum::new(n).unwrap();
        let v = dressed_vector(&o, &[m], &[angle]).unwrap();
        prop_assert!(v.values[0].norm() <= o.fhat(m).norm() + o.fbarhat(m).norm());
        prop_assert!(v.values[0].norm() <= 1.0);
    }

    #[test]
    fn covariance_real_part_is_psd(vals in prop::collection::vec(complex(), 12)) {
        let modes: Vec<Momentum> = [[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0]]
            .iter()
            .map(|&n| Momentum::new(n).unwrap())
            .collect();
        let nus: Vec<NuVector> = vals
            .chunks(4)
            .map(|c| NuVector::new(modes.clone(), c.to_vec()).unwrap())
            .collect();
        let sigma = covariance(&nus).unwrap();
        prop_assert!(sigma.is_psd(1e-12));
        for i in 0..3 {
            prop_assert!(sigma.get(i, i).im == 0.0 && sigma.get(i, i).re >= 0.0);
            for j in 0..3 {
                prop_assert_eq!(sigma.get(i, j), sigma.get(j, i));
            }
        }
    }

    #[test]
    fn char_fn_is_even_for_real_covariance(a in 0.1f64..3.0, b in -0.5f64..0.5, c in 0.1f64..3.0, s in prop::array::uniform2(-3.0f64..3.0)) {
        let sigma = CovMatrix::from_real(2, &[a, b, b, c]).unwrap();
        let neg = [-s[0], -s[1]];
        prop_assert_eq!(limit_char_fn(&sigma, &s), limit_char_fn(&sigma, &neg));
    }
}
