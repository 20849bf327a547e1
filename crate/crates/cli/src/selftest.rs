use std::f64::consts::PI;

use edgetail::bounds::{certify_envelope, EnvelopeKind, EnvelopeSpec};
use edgetail::contours::{deform_check, integrate, ContourOptions};
use edgetail::crossover::{contour_tail_integral, fit_tail_envelope, MuContourSpec, TailSample};
use edgetail::deformed_airy::{ai_lower_gamma, upper_residue, DeformedAiryParams};
use edgetail::fredholm::{det_bound_check, nystrom_det_kernel, DetOptions};
use edgetail::operator::{a1_kernel, a2_kernel, mu_factor, KernelSpec};
use edgetail::special::{check_recip_gamma_envelope, check_stirling_sandwich, gamma, recip_gamma, Rect};
use edgetail::{Complex64, Contour64};

use crate::config::RunConfig;

pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn check(name: &'static str, f: impl FnOnce() -> edgetail::Result<(bool, String)>) -> Check {
    match f() {
        Ok((passed, detail)) => Check { name, passed, detail },
        Err(e) => Check { name, passed: false, detail: format!("error: {e}") },
    }
}

pub fn run_all(cfg: &RunConfig) -> Vec<Check> {
    let airy = cfg.airy();
    let opts = ContourOptions::with_abs(1e-12);
    vec![
        check("gamma(3/2) = sqrt(pi)/2", || {
            let v = gamma(c(1.5, 0.0))?;
            Ok(((v - c(PI.sqrt() / 2.0, 0.0)).norm() < 1e-14, format!("{v}")))
        }),
        check("gamma(1) = 1", || {
            let v = gamma(c(1.0, 0.0))?;
            Ok(((v - c(1.0, 0.0)).norm() < 1e-15, format!("{v}")))
        }),
        check("recip_gamma(-1) = 0", || {
            let v = recip_gamma(c(-1.0, 0.0));
            Ok((v.norm() == 0.0, format!("{v}")))
        }),
        check("recip_gamma(2) = 1", || {
            let v = recip_gamma(c(2.0, 0.0));
            Ok(((v - c(1.0, 0.0)).norm() < 1e-15, format!("{v}")))
        }),
        check("Stirling middle decreases to 1 up to x = 200", || {
            let r = check_stirling_sandwich(1.0, 1)?;
            let big = check_stirling_sandwich(200.0, 200)?;
            let last = big.points.last().map(|p| p.middle).unwrap_or(f64::NAN);
            Ok((big.monotone_decreasing && last > 1.0 && last < r.points[0].middle, format!("middle(200) = {last}")))
        }),
        check("reciprocal gamma envelope at z = 1 is e^-2", || {
            let r = check_recip_gamma_envelope(Rect::new(1.0, 1.0, 0.0, 0.0), 1.0)?;
            Ok(((r.max_ratio - (-2.0f64).exp()).abs() < 1e-15, format!("{}", r.max_ratio)))
        }),
        check("reciprocal gamma envelope at z = 2 is e^-4", || {
            let r = check_recip_gamma_envelope(Rect::new(2.0, 2.0, 0.0, 0.0), 1.0)?;
            Ok(((r.max_ratio - (-4.0f64).exp()).abs() < 1e-16, format!("{}", r.max_ratio)))
        }),
        check("circle integral of 1/z is 2 pi i", || {
            let q = integrate(&Contour64::circle(c(0.0, 0.0), 1.0)?, |z| z.inv(), &opts)?;
            Ok(((q.value - c(0.0, 2.0 * PI)).norm() < 1e-12, format!("{}", q.value)))
        }),
        check("Gaussian on a vertical line is sqrt(pi)", || {
            // ∫ e^{(z−1)²} dz over z = 1 + it equals i√π.
            let q = integrate(&Contour64::vertical_line(1.0, 40.0)?, |z| ((z - 1.0) * (z - 1.0)).exp(), &opts)?;
            Ok(((q.value - c(0.0, PI.sqrt())).norm() < 1e-12, format!("{}", q.value)))
        }),
        check("same contour twice gives zero", || {
            let k = Contour64::circle(c(0.0, 0.0), 1.0)?;
            let d = deform_check(&k, &k, |z| z.exp() / z, &[], &opts)?;
            Ok((d <= 2e-12, format!("{d:e}")))
        }),
        check("1/z on circles of radius 1 and 2 agree", || {
            let d = deform_check(&Contour64::circle(c(0.0, 0.0), 1.0)?, &Contour64::circle(c(0.0, 0.0), 2.0)?, |z| z.inv(), &[], &opts)?;
            Ok((d <= 2e-12, format!("{d:e}")))
        }),
        check("residue correction at T = 2 is 1", || {
            let r = upper_residue(2.0);
            Ok(((r - 1.0).abs() < 1e-15, format!("{r}")))
        }),
        check("lower_pos_x envelope at x = 0, T = 1", || {
            let spec = EnvelopeSpec::new(EnvelopeKind::LowerPosX);
            let r = certify_envelope(&spec, &[0.0], &[1.0], &airy)?;
            let v = ai_lower_gamma(&DeformedAiryParams::from_time(0.0, 1.0), &airy)?.value.abs();
            Ok(((r.empirical_c - v).abs() < 1e-12 * v, format!("C = {}, |Ai_G(0)| = {v}", r.empirical_c)))
        }),
        check("mu factor at mu = -1, t = 0 is -1/2", || {
            let v = mu_factor(0.0, &KernelSpec::new(2.0, c(-1.0, 0.0), 0.0))?;
            Ok(((v - c(-0.5, 0.0)).norm() < 1e-15, format!("{v}")))
        }),
        check("mu factor vanishes as t -> -inf", || {
            // |σ|² ≤ |μ̃|² e^{2κt}; |σ| itself decays only like e^{κt}.
            let spec = KernelSpec::new(2.0, c(-1.0, 0.0), 0.0);
            let v = mu_factor(-40.0, &spec)?;
            let env = (2.0 * spec.kappa() * -40.0).exp();
            Ok((v.norm_sqr() <= env, format!("|sigma|^2 = {:e}, envelope {env:e}", v.norm_sqr())))
        }),
        check("factor weights are 1 at x = t = 0", || {
            let spec = KernelSpec::new(2.0, c(-1.0, 0.0), 0.0);
            let a1 = a1_kernel(0.0, 0.0, &spec, &airy)?;
            let a2 = a2_kernel(0.0, 0.0, &spec, &airy)?;
            let ai_up = edgetail::deformed_airy::ai_upper_gamma(&DeformedAiryParams::from_time(0.0, 2.0), &airy)?.value;
            let ai_lo = ai_lower_gamma(&DeformedAiryParams::from_time(0.0, 2.0), &airy)?.value;
            let ok = (a1 - ai_up).abs() < 1e-10 * ai_up.abs() && (a2 - c(0.5 * ai_lo, 0.0)).norm() < 1e-10 * ai_lo.abs();
            Ok((ok, format!("A1 = {a1}, A2 = {a2}")))
        }),
        check("A2 is real for real negative mu", || {
            let v = a2_kernel(0.3, 1.0, &KernelSpec::new(8.0, c(-2.0, 0.0), 0.0), &airy)?;
            Ok((v.im == 0.0, format!("{v}")))
        }),
        check("zero kernel has determinant 1", || {
            let r = nystrom_det_kernel(|_, _| Ok(c(0.0, 0.0)), 0.0, &DetOptions::default())?;
            Ok((r.det == c(1.0, 0.0), format!("{}", r.det)))
        }),
        check("rank-one kernel e^-x e^-y has determinant 1/2", || {
            let r = nystrom_det_kernel(|x, y| Ok(c((-x - y).exp(), 0.0)), 0.0, &DetOptions::default())?;
            Ok(((r.det - c(0.5, 0.0)).norm() < 1e-8, format!("{}", r.det)))
        }),
        check("mu = 0 determinant bound is vacuous", || {
            let r = det_bound_check(&KernelSpec::new(8.0, c(0.0, 0.0), 10.0), &cfg.det(), &airy)?;
            Ok((r.passed && r.lhs == 0.0 && r.rhs == 0.0, format!("lhs {}, rhs {}", r.lhs, r.rhs)))
        }),
        check("unit determinant gives zero tail", || {
            let v = contour_tail_integral(&MuContourSpec::default(), |_| Ok(c(0.0, 0.0)), &ContourOptions::default())?;
            Ok((v == c(0.0, 0.0), format!("{v}")))
        }),
        check("single-T fit input is rejected", || {
            let samples: Vec<TailSample> = (0..6).map(|k| TailSample { s: k as f64 + 1.0, t: 8.0, tail: (-(k as f64)).exp(), err: 0.0 }).collect();
            let r = fit_tail_envelope(&samples);
            Ok((r.is_err(), r.err().map(|e| e.to_string()).unwrap_or_default()))
        }),
    ]
}
