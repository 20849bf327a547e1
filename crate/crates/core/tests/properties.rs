use std::f64::consts::PI;

use edgetail::contours::{integrate, ContourOptions};
use edgetail::crossover::{fit_tail_envelope, MuContourSpec, TailSample};
use edgetail::fredholm::{nystrom_det_kernel, DetOptions, DomainMap};
use edgetail::operator::{crossover_weight, mu_factor, KernelSpec};
use edgetail::special::{gamma, recip_gamma, stirling_point};
use edgetail::{Complex64, Contour64};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

proptest! {
    #[test]
    fn gamma_recurrence(re in 0.1f64..10.0, im in -10.0f64..10.0) {
        let z = c(re, im);
        let lhs = gamma(z + 1.0).unwrap();
        let rhs = z * gamma(z).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-12 * rhs.norm());
    }

    #[test]
    fn gamma_reflection(re in -4.9f64..4.9, im in 0.05f64..5.0) {
        let z = c(re, im);
        let lhs = gamma(z).unwrap() * gamma(c(1.0, 0.0) - z).unwrap();
        let rhs = c(PI, 0.0) / (z * PI).sin();
        prop_assert!((lhs - rhs).norm() <= 1e-11 * rhs.norm());
    }

    #[test]
    fn reciprocal_gamma_is_reciprocal(re in -6.0f64..6.0, im in 0.01f64..6.0) {
        let z = c(re, im);
        prop_assert!((recip_gamma(z) * gamma(z).unwrap() - 1.0).norm() < 1e-12);
    }

    #[test]
    fn stirling_sandwich(lx in -3.0f64..3.0) {
        let p = stirling_point(10f64.powf(lx)).unwrap();
        prop_assert!(p.lower_margin > 0.0 && p.upper_margin > 0.0);
    }

    #[test]
    fn weight_is_conjugation_symmetric(t in -20.0f64..20.0, re in -5.0f64..5.0, im in 0.1f64..5.0) {
        let a = crossover_weight(t, &KernelSpec::new(8.0, c(re, im), 0.0)).unwrap();
        let b = crossover_weight(t, &KernelSpec::new(8.0, c(re, -im), 0.0)).unwrap();
        prop_assert!((a - b.conj()).norm() <= 1e-15 * a.norm().max(1e-300));
        let sigma = mu_factor(t, &KernelSpec::new(8.0, c(re, im), 0.0)).unwrap();
        prop_assert_eq!(a, -sigma);
    }

    #[test]
    fn contour_reversal_negates(re in -2.0f64..2.0, im in -2.0f64..2.0) {
        let k = MuContourSpec::default().contour().unwrap();
        let f = |z: Complex64| (-z).exp() / (z - c(re, im + 3.0));
        let opts = ContourOptions::with_abs(1e-12);
        let a = integrate(&k, f, &opts).unwrap().value;
        let b = integrate(&k.reversed(), f, &opts).unwrap().value;
        prop_assert!((a + b).norm() < 1e-11);
    }

    #[test]
    fn domain_map_is_increasing(s in -20.0f64..20.0, l in 0.1f64..20.0, u in -0.99f64..0.98) {
        let m = DomainMap::new(s, l).unwrap();
        prop_assert!(m.x(u + 0.01) > m.x(u));
        prop_assert!(m.x(u) > s);
        prop_assert!(m.jacobian(u) > 0.0);
    }

    #[test]
    fn fitted_envelope_dominates_samples(seed in proptest::collection::vec(-30.0f64..0.0, 12)) {
        let samples: Vec<TailSample> = seed
            .iter()
            .enumerate()
            .map(|(k, &y)| TailSample { s: 1.0 + (k % 4) as f64, t: if k < 6 { 2.0 } else { 16.0 }, tail: y.exp(), err: 0.0 })
            .collect();
        let fit = fit_tail_envelope(&samples).unwrap();
        for r in &samples {
            prop_assert!(r.tail.ln() <= fit.log_envelope(r.s, r.t) + 1e-9);
        }
        prop_assert!(fit.max_log_residual <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(5))]

    #[test]
    fn rank_one_identity(a in 0.1f64..2.0, b in 0.2f64..3.0, g in 0.1f64..2.0, d in 0.2f64..3.0, s in -1.0f64..2.0) {
        let r = nystrom_det_kernel(|x, y| Ok(c(a * (-b * x).exp() * g * (-d * y).exp(), 0.0)), s, &DetOptions::default()).unwrap();
        let want = 1.0 - a * g * (-(b + d) * s).exp() / (b + d);
        prop_assert!((r.det.re - want).abs() < 1e-8, "{} vs {}", r.det.re, want);
    }
}

#[test]
fn contour_spec_rejects_radius_below_delta() {
    assert!(MuContourSpec { delta: 0.6, radius: 0.5, truncation: 40.0 }.contour().is_err());
    assert!(Contour64::circle(c(0.0, 0.0), 1.0).is_ok());
}
