use edgetail::bounds::{certify_envelope, certify_with_refinement, default_x_grid, EnvelopeKind, EnvelopeSpec};
use edgetail::deformed_airy::AiryConfig;
use edgetail::operator::{fit_a2_envelope, mu_factor_envelope_scan, CrossoverKernel, KernelOptions, KernelSpec};
use edgetail::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn kernel_is_real_for_real_negative_mu() {
    let k = CrossoverKernel::new(KernelSpec::new(8.0, c(-1.0, 0.0), 2.0), &AiryConfig::default(), KernelOptions::default()).unwrap();
    for (x, y) in [(2.0, 2.0), (2.5, 4.0), (6.0, 3.0)] {
        let v = k.eval(x, y).unwrap();
        assert!(v.im.abs() <= 1e-8 * v.re.abs(), "{v}");
    }
}

#[test]
fn kernel_is_independent_of_t_window() {
    let k = CrossoverKernel::new(KernelSpec::new(2.0, c(-1.0, 1.0), 0.0), &AiryConfig::default(), KernelOptions::default()).unwrap();
    let (lo, hi) = k.t_window(0.5, 1e-12).unwrap();
    let a = k.eval_on_window(0.5, 1.5, lo, hi).unwrap();
    let b = k.eval_on_window(0.5, 1.5, lo - 10.0, hi + 10.0).unwrap();
    assert!((a - b).norm() < 1e-11 * a.norm());
}

#[test]
fn hs_split_is_consistent() {
    let k = CrossoverKernel::new(KernelSpec::new(8.0, c(-1.0, 0.0), 10.0), &AiryConfig::default(), KernelOptions::default()).unwrap();
    let r = k.hs_norms().unwrap();
    assert!(r.split_mismatch() <= r.i1_error + r.i34_error + 1e-12 * r.split.i1, "{r:?}");
    assert!(r.norm_a1 > 0.0 && r.norm_a2 > 0.0);
    assert!((r.product - r.norm_a1 * r.norm_a2).abs() <= 1e-12 * r.product);
}

#[test]
fn a2_norm_admits_mixed_exponential_envelope() {
    let cfg = AiryConfig::default();
    let samples: Vec<(f64, f64)> = [10.0, 12.0, 14.0, 16.0]
        .iter()
        .map(|&s| {
            let k = CrossoverKernel::new(KernelSpec::new(8.0, c(-1.0, 0.0), s), &cfg, KernelOptions::default()).unwrap();
            let r = k.hs_norms().unwrap();
            (s, r.split.i1 + r.split.i2)
        })
        .collect();
    let fit = fit_a2_envelope(&samples, KernelSpec::new(8.0, c(-1.0, 0.0), 0.0).kappa()).unwrap();
    assert!(fit.decreasing, "{fit:?}");
    assert!(fit.c > 0.0 && fit.ln_c.is_finite());
}

#[test]
fn squared_mu_factor_envelope_holds() {
    let ts: Vec<f64> = (-200..=200).map(|k| k as f64 * 0.1).collect();
    let r = mu_factor_envelope_scan(8.0, &ts, &[c(-1.0, 0.0), c(-1.0, 1.0), c(-1.0, -1.0)]).unwrap();
    assert!(r.squared_c.is_finite() && r.squared_c > 0.0);
    assert_eq!(r.violations, 0);
}

#[test]
fn envelopes_certify_on_default_grids() {
    let cfg = AiryConfig::default();
    for kind in EnvelopeKind::ALL {
        let spec = EnvelopeSpec::new(kind);
        let r = certify_with_refinement(&spec, &default_x_grid(kind), &[1.0, 8.0], &cfg).unwrap();
        assert_eq!(r.violations, 0, "{kind:?}");
        assert!(r.drift < 0.05, "{kind:?}: {}", r.drift);
    }
}

#[test]
fn single_point_envelope_constant() {
    let cfg = AiryConfig::default();
    let spec = EnvelopeSpec::new(EnvelopeKind::UpperAllX);
    let r = certify_envelope(&spec, &[0.0], &[2.0], &cfg).unwrap();
    assert_eq!(r.argmax, (0.0, 2.0));
    assert_eq!(r.rows.len(), 1);
}
