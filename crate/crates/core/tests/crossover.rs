use edgetail::contours::ContourOptions;
use edgetail::crossover::{
    contour_tail_integral, fit_tail_envelope, tail_probability, tail_sweep, MuContourSpec, TailOptions, TailSample,
};
use edgetail::deformed_airy::{AiryConfig, DeformedAiry};
use edgetail::fredholm::{airy_kernel_det, crossover_scale, DetOptions, FactorizedCrossover};
use edgetail::Error;

/// `∫_s^∞ Ai(x) dx` at 60 digits.
const AIRY_INTEGRAL: [(f64, f64); 4] = [
    (8.0, 1.6090849759132706554e-8),
    (10.0, 3.4164317390540094304e-11),
    (14.0, 2.6149861340732675726e-17),
    (20.0, 3.7518121989540651704e-28),
];

fn tail(s: f64, t: f64, opts: &TailOptions) -> f64 {
    let r = tail_probability(s, t, opts, &AiryConfig::default()).unwrap();
    assert!(r.converged && !r.clipped, "{r:?}");
    r.tail
}

#[test]
fn split_evaluation_matches_direct_contour_integral() {
    let cfg = AiryConfig::default();
    let airy = DeformedAiry::shared(2.0, &cfg).unwrap();
    let split = tail_probability(0.0, 2.0, &TailOptions::default(), &cfg).unwrap();
    let fc = FactorizedCrossover::new(&airy, 0.0, split.n, crossover_scale(airy.kappa())).unwrap();
    let direct = contour_tail_integral(
        &MuContourSpec::default(),
        |mu| Ok(fc.parts(mu)?.det_minus_one),
        &ContourOptions { abs_tol: 1e-12, rel_tol: 0.0, max_nodes_per_segment: 1 << 16 },
    )
    .unwrap();
    assert!((split.tail - direct.re).abs() < 1e-10, "{} vs {}", split.tail, direct);
    assert!(direct.im.abs() < 1e-12);
    assert!(split.tail > 0.0 && split.tail < 1.0);
}

#[test]
fn tail_decreases_in_s() {
    let opts = TailOptions::default();
    assert!(tail(12.0, 8.0, &opts) >= tail(14.0, 8.0, &opts));
    let rows = tail_sweep(&[-2.0, 0.0, 2.0, 4.0], &[2.0], &opts, &AiryConfig::default()).unwrap();
    assert!(rows.windows(2).all(|w| w[1].tail <= w[0].tail), "{rows:?}");
}

#[test]
fn tail_is_insensitive_to_contour_choice() {
    let base = TailOptions::default();
    let wide = TailOptions { contour: MuContourSpec { delta: 1.0, radius: 1.0, truncation: 40.0 }, ..base };
    let long = TailOptions { contour: MuContourSpec { truncation: 80.0, ..base.contour }, ..base };
    for (s, t) in [(0.0, 2.0), (10.0, 8.0)] {
        let a = tail(s, t, &base);
        for other in [&wide, &long] {
            let b = tail(s, t, other);
            assert!((a - b).abs() < 1e-5 * a, "s = {s}, T = {t}: {a} vs {b}");
        }
    }
}

#[test]
fn tail_is_real() {
    let r = tail_probability(10.0, 8.0, &TailOptions::default(), &AiryConfig::default()).unwrap();
    assert!(r.imag.abs() <= 1e-6 * r.tail.abs().max(1e-12));
    assert!(r.err_estimate < 1e-6 * r.tail);
}

#[test]
fn large_time_tail_matches_airy_integral() {
    for (s, want) in AIRY_INTEGRAL {
        let got = tail(s, 64.0, &TailOptions::default());
        assert!((got / want - 1.0).abs() < 1e-6, "s = {s}: {got} vs {want}");
    }
}

#[test]
fn upper_tail_is_heavier_than_gue() {
    // The edge tail decays like e^{−(2/3)s^{3/2}}, the GUE tail like e^{−(4/3)s^{3/2}}.
    let s = 3.0;
    let edge = tail(s, 64.0, &TailOptions::default());
    let gue = 1.0 - airy_kernel_det(s, &DetOptions::default()).unwrap().det.re;
    assert!(edge / gue > 100.0, "edge {edge}, gue {gue}");
}

fn synthetic(c1: f64, c2: f64, c3: f64) -> Vec<TailSample> {
    let mut out = vec![];
    for t in [1.0, 8.0, 27.0] {
        for k in 0..12 {
            let s = 0.5 + 0.5 * k as f64;
            let tail = c1 * ((-c2 * f64::cbrt(t) * s).exp() + (-c3 * s.powf(1.5)).exp());
            out.push(TailSample { s, t, tail, err: 0.0 });
        }
    }
    out
}

#[test]
fn fit_recovers_synthetic_constants() {
    let fit = fit_tail_envelope(&synthetic(1.0, 0.5, 0.6)).unwrap();
    for (got, want) in [(fit.c1, 1.0), (fit.c2, 0.5), (fit.c3, 0.6)] {
        assert!((got / want - 1.0).abs() < 0.05, "{fit:?}");
    }
    assert!(fit.max_log_residual <= 0.0);
    assert!(fit.rms_log_residual < 1e-3);
}

#[test]
fn fit_input_requirements() {
    let one_t: Vec<TailSample> = synthetic(1.0, 0.5, 0.6).into_iter().filter(|r| r.t == 8.0).collect();
    assert!(matches!(fit_tail_envelope(&one_t), Err(Error::InvalidArgument(_))));
    assert!(matches!(fit_tail_envelope(&synthetic(1.0, 0.5, 0.6)[..5]), Err(Error::InvalidArgument(_))));
    let mut bad = synthetic(1.0, 0.5, 0.6);
    bad[3].tail = -1e-20;
    assert!(matches!(fit_tail_envelope(&bad), Err(Error::InfeasibleFit(_))));
}

#[test]
fn computed_sweep_admits_envelope() {
    let s: Vec<f64> = (8..=14).map(f64::from).collect();
    let rows = tail_sweep(&s, &[8.0, 64.0], &TailOptions::default(), &AiryConfig::default()).unwrap();
    let fit = fit_tail_envelope(&rows).unwrap();
    for r in &rows {
        assert!(r.tail.ln() <= fit.log_envelope(r.s, r.t) + 1e-12);
    }
    assert!(fit.c1 > 0.0 && fit.c2 > 0.0 && fit.c3 > 0.0);
}
