//! The upper tail `1 − F_T(s) = −(2πi)⁻¹∮_C̃ e^{−μ̃} [det(I − K̃_{T,μ̃}) − 1] dμ̃/μ̃`
//! and the fit of its mixed exponential envelope.
//!
//! `C̃` runs counterclockwise around `(0, ∞)`: in along `Im μ̃ = δ`, around the
//! left of the origin on a circle of radius `r`, and out along `Im μ̃ = −δ`.
//!
//! Writing `det(I − K̃) − 1 = −tr K̃ + R`, the trace part has the closed form
//! `Σ_k τ_k e^{−e^{−κt_k}} Σ_i P_ik Q_ki` (residues at the poles `μ̃ = e^{−κt_k}`),
//! so only the remainder `R = O(K̃²)` is integrated numerically. This keeps
//! relative accuracy for tails far below the rounding level of `det`.

use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contours::{integrate, Contour, ContourOptions, Segment};
use crate::deformed_airy::{AiryConfig, DeformedAiry};
use crate::error::{Error, Result};
use crate::fredholm::{crossover_scale, DetOptions, FactorizedCrossover};
use crate::operator::KernelSpec;

type C64 = Complex<f64>;

/// Raw tails outside `[−CLIP_EPS, 1 + CLIP_EPS]` are clamped and flagged.
pub const CLIP_EPS: f64 = 1e-8;

/// Realness tolerance: `|Im| ≤ REAL_TOL·max(1e−12, |Re|)`.
pub const REAL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MuContourSpec {
    /// Distance of the horizontal lines from the positive real axis.
    pub delta: f64,
    /// Radius of the circle around the origin; at least `delta`.
    pub radius: f64,
    /// Right end of both lines.
    pub truncation: f64,
}

impl Default for MuContourSpec {
    fn default() -> Self {
        MuContourSpec { delta: 0.5, radius: 0.5, truncation: 40.0 }
    }
}

impl MuContourSpec {
    pub fn validate(&self) -> Result<()> {
        let finite = self.delta.is_finite() && self.radius.is_finite() && self.truncation.is_finite();
        if !(finite && self.delta > 0.0 && self.radius >= self.delta) {
            return Err(Error::InvalidContour(format!(
                "need 0 < delta <= radius, got delta = {}, radius = {}",
                self.delta, self.radius
            )));
        }
        if !(self.truncation > self.radius) {
            return Err(Error::InvalidContour(format!(
                "truncation {} must exceed the radius {}",
                self.truncation, self.radius
            )));
        }
        Ok(())
    }

    fn theta0(&self) -> f64 {
        (self.delta / self.radius).asin()
    }

    pub fn contour(&self) -> Result<Contour<f64>> {
        self.validate()?;
        let th = self.theta0();
        let corner = self.radius * th.cos();
        Contour::new(vec![
            Segment::line(C64::new(self.truncation, self.delta), C64::new(corner, self.delta)),
            Segment::arc(C64::new(0.0, 0.0), self.radius, th, 2.0 * PI - th),
            Segment::line(C64::new(corner, -self.delta), C64::new(self.truncation, -self.delta)),
        ])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailOptions {
    pub contour: MuContourSpec,
    pub det: DetOptions,
    /// Relative accuracy of the μ̃-quadrature of the remainder, measured against the trace part.
    pub mu_rel_tol: f64,
    pub max_mu_nodes: usize,
}

impl Default for TailOptions {
    fn default() -> Self {
        TailOptions { contour: MuContourSpec::default(), det: DetOptions::default(), mu_rel_tol: 1e-10, max_mu_nodes: 1 << 15 }
    }
}

impl TailOptions {
    pub fn validate(&self) -> Result<()> {
        self.contour.validate()?;
        self.det.validate()?;
        if !(self.mu_rel_tol > 0.0) {
            return Err(Error::InvalidArgument("mu_rel_tol must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailStep {
    pub n: usize,
    pub tail: f64,
    pub linear: f64,
    pub remainder: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailResult {
    pub s: f64,
    #[serde(rename = "T")]
    pub t: f64,
    /// `raw_tail`, clamped to `[0, 1]` when it leaves `[−CLIP_EPS, 1 + CLIP_EPS]`.
    pub tail: f64,
    pub raw_tail: f64,
    pub clipped: bool,
    pub imag: f64,
    /// Node-doubling difference plus μ̃-quadrature and truncation errors.
    pub err_estimate: f64,
    pub n: usize,
    pub converged: bool,
    /// Residue sum of the trace part.
    pub linear: f64,
    /// `(2πi)⁻¹∮ e^{−μ̃} R dμ̃/μ̃`, subtracted from `linear`.
    pub remainder: f64,
    pub mu_nodes: usize,
    pub history: Vec<TailStep>,
}

struct Level {
    linear: f64,
    remainder: C64,
    quad_error: f64,
    truncation_error: f64,
    mu_nodes: usize,
}

fn level(fc: &FactorizedCrossover, opts: &TailOptions) -> Result<Level> {
    let contour = opts.contour.contour()?;
    let linear = fc.linear_term();
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let g = |mu: C64| -> C64 {
        if failure.borrow().is_some() {
            return C64::new(0.0, 0.0);
        }
        match fc.parts(mu) {
            Ok(p) => (-mu).exp() / mu * p.remainder,
            Err(e) => {
                *failure.borrow_mut() = Some(e);
                C64::new(0.0, 0.0)
            }
        }
    };
    let tol = opts.mu_rel_tol * linear.abs().max(f64::MIN_POSITIVE);
    let copts = ContourOptions { abs_tol: tol, rel_tol: opts.mu_rel_tol, max_nodes_per_segment: opts.max_mu_nodes };
    let q = integrate(&contour, g, &copts);
    if let Some(e) = failure.borrow_mut().take() {
        return Err(e);
    }
    let q = q?;
    // Beyond the truncation |g| decays at least like e^{−Re μ̃}: the neglected tails are bounded by |g| at the cut.
    let cut = opts.contour.truncation;
    let truncation_error = (g(C64::new(cut, opts.contour.delta)).norm() + g(C64::new(cut, -opts.contour.delta)).norm()) / (2.0 * PI);
    let two_pi_i = C64::new(0.0, 2.0 * PI);
    Ok(Level {
        linear,
        remainder: q.value / two_pi_i,
        quad_error: q.abs_error_estimate / (2.0 * PI),
        truncation_error,
        mu_nodes: q.nodes_used,
    })
}

/// `1 − F_T(s)` with node doubling in the Nyström discretization.
pub fn tail_probability(s: f64, t: f64, opts: &TailOptions, cfg: &AiryConfig) -> Result<TailResult> {
    opts.validate()?;
    KernelSpec::new(t, C64::new(-1.0, 0.0), s).validate(cfg)?;
    let airy = DeformedAiry::shared(t, cfg)?;
    tail_with_airy(s, &airy, opts)
}

/// As [`tail_probability`] with a prebuilt deformed Airy table.
pub fn tail_with_airy(s: f64, airy: &DeformedAiry, opts: &TailOptions) -> Result<TailResult> {
    opts.validate()?;
    let scale = opts.det.scale.unwrap_or_else(|| crossover_scale(airy.kappa()));
    let mut history = vec![];
    let mut n = opts.det.n_min;
    let mut mu_nodes = 0;
    loop {
        let fc = FactorizedCrossover::new(airy, s, n, scale)?;
        let lv = level(&fc, opts)?;
        mu_nodes += lv.mu_nodes;
        let raw = lv.linear - lv.remainder.re;
        history.push(TailStep { n, tail: raw, linear: lv.linear, remainder: lv.remainder.re });
        let diff = (history.len() >= 2).then(|| (raw - history[history.len() - 2].tail).abs());
        let converged = diff.is_some_and(|d| d <= opts.det.det_tol * raw.abs());
        if converged || n >= opts.det.n_max {
            let imag = -lv.remainder.im;
            if imag.abs() > REAL_TOL * raw.abs().max(1e-12) {
                return Err(Error::ImaginaryResidual {
                    value: raw,
                    imag,
                    context: format!("tail at s = {s}, T = {}", airy.time()),
                });
            }
            let clipped = !(-CLIP_EPS..=1.0 + CLIP_EPS).contains(&raw);
            let tail = if clipped { raw.clamp(0.0, 1.0) } else { raw };
            return Ok(TailResult {
                s,
                t: airy.time(),
                tail,
                raw_tail: raw,
                clipped,
                imag,
                err_estimate: diff.unwrap_or(f64::INFINITY) + lv.quad_error + lv.truncation_error,
                n,
                converged,
                linear: lv.linear,
                remainder: lv.remainder.re,
                mu_nodes,
                history,
            });
        }
        n *= 2;
    }
}

/// `−(2πi)⁻¹∮ e^{−μ̃}(D(μ̃) − 1) dμ̃/μ̃` for a determinant function `D` given as `D − 1`.
///
/// No trace splitting: absolute accuracy only, at the rounding level of `D`.
pub fn contour_tail_integral(
    contour: &MuContourSpec,
    det_minus_one: impl Fn(C64) -> Result<C64>,
    opts: &ContourOptions,
) -> Result<C64> {
    let c = contour.contour()?;
    let mut failure = None;
    let q = integrate(
        &c,
        |mu: C64| match det_minus_one(mu) {
            Ok(d) => (-mu).exp() / mu * d,
            Err(e) => {
                failure.get_or_insert(e);
                C64::new(0.0, 0.0)
            }
        },
        opts,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(-q?.value / C64::new(0.0, 2.0 * PI))
}

/// One row of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailSample {
    pub s: f64,
    #[serde(rename = "T")]
    pub t: f64,
    pub tail: f64,
    pub err: f64,
}

/// Tails on `T_values × s_values`, ordered by `T` then `s` regardless of scheduling.
pub fn tail_sweep(s_values: &[f64], t_values: &[f64], opts: &TailOptions, cfg: &AiryConfig) -> Result<Vec<TailSample>> {
    opts.validate()?;
    let mut out = Vec::with_capacity(s_values.len() * t_values.len());
    for &t in t_values {
        KernelSpec::new(t, C64::new(-1.0, 0.0), 0.0).validate(cfg)?;
        let airy = DeformedAiry::shared(t, cfg)?;
        let rows = s_values
            .par_iter()
            .map(|&s| {
                let r = tail_with_airy(s, &airy, opts).map_err(|e| e.at(s, t))?;
                Ok(TailSample { s, t, tail: r.tail, err: r.err_estimate })
            })
            .collect::<Result<Vec<_>>>()?;
        out.extend(rows);
    }
    Ok(out)
}

/// Least-squares slope of `ln tail` against `s` for one `T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeSlope {
    #[serde(rename = "T")]
    pub t: f64,
    pub slope: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    /// RMS of `ln tail − ln envelope` (all residuals ≤ 0).
    pub rms_log_residual: f64,
    /// Largest residual, 0 at the active sample.
    pub max_log_residual: f64,
    pub s_range: (f64, f64),
    #[serde(rename = "T_range")]
    pub t_range: (f64, f64),
    pub slopes: Vec<RegimeSlope>,
    pub samples: usize,
}

impl TailFit {
    /// `ln(c₁(e^{−c₂T^{1/3}s} + e^{−c₃s^{3/2}}))`.
    pub fn log_envelope(&self, s: f64, t: f64) -> f64 {
        self.c1.ln() + log_shape(self.c2, self.c3, s, t)
    }

    /// Ratio of the empirical `ln tail` slopes at `t_hi` and `t_lo`.
    pub fn slope_ratio(&self, t_lo: f64, t_hi: f64) -> Option<f64> {
        let find = |t: f64| self.slopes.iter().find(|r| r.t == t).map(|r| r.slope);
        Some(find(t_hi)? / find(t_lo)?)
    }
}

fn log_shape(c2: f64, c3: f64, s: f64, t: f64) -> f64 {
    let a = -c2 * t.cbrt() * s;
    let b = -c3 * s.max(0.0).powf(1.5);
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Lower and upper bounds on `c₂, c₃` explored by the fit.
pub const FIT_BOUNDS: (f64, f64) = (1e-3, 1e2);

/// Offset `ln c₁` making every residual ≤ 0, and the sum of squared residuals.
fn fit_objective(samples: &[(f64, f64, f64)], c2: f64, c3: f64) -> (f64, f64) {
    let a = samples.iter().map(|&(s, t, y)| y - log_shape(c2, c3, s, t)).fold(f64::NEG_INFINITY, f64::max);
    let ss = samples
        .iter()
        .map(|&(s, t, y)| {
            let r = y - a - log_shape(c2, c3, s, t);
            r * r
        })
        .sum();
    (a, ss)
}

/// Nelder–Mead on `(ln c₂, ln c₃)` within [`FIT_BOUNDS`].
fn nelder_mead(f: impl Fn([f64; 2]) -> f64, start: [f64; 2], step: f64) -> [f64; 2] {
    let (lo, hi) = (FIT_BOUNDS.0.ln(), FIT_BOUNDS.1.ln());
    let clamp = |p: [f64; 2]| [p[0].clamp(lo, hi), p[1].clamp(lo, hi)];
    let eval = |p: [f64; 2]| f(clamp(p));
    let mut simplex = [start, [start[0] + step, start[1]], [start[0], start[1] + step]].map(|p| (clamp(p), eval(p)));
    for _ in 0..2000 {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = (simplex[2].1 - simplex[0].1).abs();
        let size = (0..2).map(|k| (simplex[2].0[k] - simplex[0].0[k]).abs().max((simplex[1].0[k] - simplex[0].0[k]).abs())).fold(0.0, f64::max);
        if spread <= 1e-15 * simplex[0].1.abs().max(1e-300) && size < 1e-10 {
            break;
        }
        let centroid = [(simplex[0].0[0] + simplex[1].0[0]) / 2.0, (simplex[0].0[1] + simplex[1].0[1]) / 2.0];
        let along = |c: f64| clamp([centroid[0] + c * (simplex[2].0[0] - centroid[0]), centroid[1] + c * (simplex[2].0[1] - centroid[1])]);
        let r = along(-1.0);
        let fr = eval(r);
        if fr < simplex[0].1 {
            let e = along(-2.0);
            let fe = eval(e);
            simplex[2] = if fe < fr { (e, fe) } else { (r, fr) };
        } else if fr < simplex[1].1 {
            simplex[2] = (r, fr);
        } else {
            let c = if fr < simplex[2].1 { along(-0.5) } else { along(0.5) };
            let fc = eval(c);
            if fc < simplex[2].1.min(fr) {
                simplex[2] = (c, fc);
            } else {
                let best = simplex[0].0;
                for v in simplex.iter_mut().skip(1) {
                    v.0 = clamp([(v.0[0] + best[0]) / 2.0, (v.0[1] + best[1]) / 2.0]);
                    v.1 = eval(v.0);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex[0].0
}

/// Upper-envelope fit `ln tail ≤ ln c₁ + ln(e^{−c₂T^{1/3}s} + e^{−c₃s^{3/2}})`.
///
/// For fixed `(c₂, c₃)` the constrained least-squares `ln c₁` is the largest residual;
/// `(c₂, c₃)` minimize the remaining sum of squares, first on a log grid, then by Nelder–Mead.
pub fn fit_tail_envelope(samples: &[TailSample]) -> Result<TailFit> {
    let mut ts: Vec<f64> = samples.iter().map(|x| x.t).collect();
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    let mut ss: Vec<f64> = samples.iter().map(|x| x.s).collect();
    ss.sort_by(f64::total_cmp);
    ss.dedup();
    if samples.len() < 6 || ts.len() < 2 || ss.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "fit needs >= 6 samples over >= 2 values of T and >= 3 values of s, got {} samples, {} T, {} s",
            samples.len(),
            ts.len(),
            ss.len()
        )));
    }
    if let Some(bad) = samples.iter().find(|x| !(x.tail > 0.0 && x.tail.is_finite()) || !x.s.is_finite() || !(x.t > 0.0)) {
        return Err(Error::InfeasibleFit(format!(
            "sample s = {}, T = {}, tail = {:e} admits no positive envelope",
            bad.s, bad.t, bad.tail
        )));
    }
    let data: Vec<(f64, f64, f64)> = samples.iter().map(|x| (x.s, x.t, x.tail.ln())).collect();
    let obj = |p: [f64; 2]| fit_objective(&data, p[0].exp(), p[1].exp()).1;
    let (lo, hi) = (FIT_BOUNDS.0.ln(), FIT_BOUNDS.1.ln());
    let m = 121;
    let grid = |i: usize| lo + (hi - lo) * i as f64 / (m - 1) as f64;
    let mut best = ([grid(0), grid(0)], f64::INFINITY);
    for i in 0..m {
        for j in 0..m {
            let p = [grid(i), grid(j)];
            let v = obj(p);
            if v < best.1 {
                best = (p, v);
            }
        }
    }
    let p = nelder_mead(obj, best.0, (hi - lo) / (m - 1) as f64);
    let (c2, c3) = (p[0].exp(), p[1].exp());
    let (a, sq) = fit_objective(&data, c2, c3);
    let max_res = data.iter().map(|&(s, t, y)| y - a - log_shape(c2, c3, s, t)).fold(f64::NEG_INFINITY, f64::max);
    let slopes = ts
        .iter()
        .map(|&t| {
            let pts: Vec<(f64, f64)> = data.iter().filter(|d| d.1 == t).map(|d| (d.0, d.2)).collect();
            RegimeSlope { t, slope: ls_slope(&pts), samples: pts.len() }
        })
        .collect();
    Ok(TailFit {
        c1: a.exp(),
        c2,
        c3,
        rms_log_residual: (sq / data.len() as f64).sqrt(),
        max_log_residual: max_res,
        s_range: (ss[0], ss[ss.len() - 1]),
        t_range: (ts[0], ts[ts.len() - 1]),
        slopes,
        samples: data.len(),
    })
}

/// Least-squares slope of `y` against `x` (NaN for fewer than two distinct `x`).
pub fn ls_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}
