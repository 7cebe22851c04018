use proptest::prelude::*;
use weakcalc::momentproblem::hermite_functions;
use weakcalc::{
    cumulants_from_moments, empirical_weak_m1, weak_cf, DensityFamily, GeneralizedDistribution, KernelSpec, Tikhonov,
    WeakPair,
};

fn raw_moments(xs: &[f64], n_max: usize) -> Vec<f64> {
    (0..=n_max).map(|n| xs.iter().map(|x| x.powi(n as i32)).sum()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn empirical_m1_bounded(xs in prop::collection::vec(-1e6f64..1e6, 1..200), sigma in 0.05f64..20.0) {
        let m1 = empirical_weak_m1(&xs, sigma).unwrap();
        prop_assert!(m1.abs() <= sigma * (-0.5f64).exp() * (1.0 + 1e-12));
    }

    #[test]
    fn tikhonov_multiplier_bounded(x in -30f64..30.0, log_lambda in -8f64..1.0) {
        let r = Tikhonov::new(KernelSpec::standard_gaussian(), 10f64.powf(log_lambda)).unwrap();
        prop_assert!(r.multiplier(x) >= 0.0);
        prop_assert!(r.multiplier(x) <= r.norm_bound() * (1.0 + 1e-12));
    }

    #[test]
    fn hermite_parity(x in -8f64..8.0) {
        let a = hermite_functions(20, x);
        let b = hermite_functions(20, -x);
        for n in 0..=20 {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            prop_assert!((a[n] - sign * b[n]).abs() <= 1e-9 * a[n].abs().max(1.0));
        }
    }

    #[test]
    fn cumulants_of_shifted_sample(xs in prop::collection::vec(-3f64..3.0, 2..40), a in -2f64..2.0) {
        let shifted: Vec<f64> = xs.iter().map(|x| x + a).collect();
        let k = cumulants_from_moments(&raw_moments(&xs, 4), 4).unwrap();
        let ks = cumulants_from_moments(&raw_moments(&shifted, 4), 4).unwrap();
        prop_assert!((ks.kappa(1) - k.kappa(1) - a).abs() <= 1e-9);
        for n in 2..=4 {
            prop_assert!((ks.kappa(n) - k.kappa(n)).abs() <= 1e-8 * (1.0 + k.kappa(n).abs()));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn weak_cf_bounded_by_mass(t in -20f64..20.0, loc in -3f64..3.0) {
        let d = GeneralizedDistribution::density(DensityFamily::cauchy(loc, 1.0)).unwrap();
        let p = WeakPair::new(d, KernelSpec::standard_gaussian());
        let m0 = weak_cf(&p, 0.0).unwrap().re;
        prop_assert!(weak_cf(&p, t).unwrap().norm() <= m0 * (1.0 + 1e-9));
    }
}
