//! The crossover kernel on `L²(s, ∞)` and its Hilbert–Schmidt factorization.
//!
//! ```text
//! K̃(x, y) = ∫ w(t) Ai^Γ(x + t) Ai_Γ(y + t) dt,      w(t) = μ̃ / (μ̃ − e^{−κ_T t})
//! A₁(x, t) = Ai^Γ(x + t) (x⁴+1)^{−1/2} (t⁴+1)^{−1/2}
//! A₂(t, y) = w(t) Ai_Γ(y + t) (y⁴+1)^{1/2} (t⁴+1)^{1/2}
//! ```
//!
//! so that `A₁A₂ = U⁻¹K̃U` with `Uf(x) = (x⁴+1)^{1/2}f(x)`. The weight `w` is the
//! negative of the factor `μ̃/(e^{−κt} − μ̃)` returned by [`mu_factor`];
//! with it `det(I − K̃)` produces a probability for a counterclockwise `C̃`.

use std::f64::consts::{PI, SQRT_2};
use std::sync::Arc;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::deformed_airy::{kappa_of, AiryConfig, DeformedAiry};
use crate::error::{Error, Result};
use crate::quadrature::{integrate_complex_line, integrate_real, integrate_real_semi_infinite, AdaptiveOptions};

type C64 = Complex<f64>;

/// Denominators smaller than this are treated as hitting the pole set `μ̃ ∈ (0, ∞)`.
pub const MU_POLE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    #[serde(rename = "T")]
    pub t: f64,
    pub mu: C64,
    pub s: f64,
}

impl KernelSpec {
    pub fn new(t: f64, mu: C64, s: f64) -> Self {
        KernelSpec { t, mu, s }
    }

    pub fn kappa(&self) -> f64 {
        kappa_of(self.t)
    }

    pub fn validate(&self, cfg: &AiryConfig) -> Result<()> {
        if !(self.t >= cfg.t0 && self.t.is_finite()) {
            return Err(Error::InvalidArgument(format!("T = {} must be finite and >= T0 = {}", self.t, cfg.t0)));
        }
        if !self.s.is_finite() {
            return Err(Error::InvalidArgument("s must be finite".into()));
        }
        if !(self.mu.re.is_finite() && self.mu.im.is_finite()) {
            return Err(Error::InvalidArgument("mu must be finite".into()));
        }
        if self.mu.im == 0.0 && self.mu.re > 0.0 {
            return Err(Error::InvalidArgument(format!("mu = {} lies on the pole set (0, inf)", self.mu.re)));
        }
        Ok(())
    }

    /// `s > 64 κ_{T₀}^{−4}`, the largeness condition of the `A₂` estimate.
    pub fn s_threshold(cfg: &AiryConfig) -> f64 {
        64.0 / cfg.kappa0().powi(4)
    }
}

fn denominator(t: f64, kappa: f64, mu: C64) -> Result<C64> {
    let d = C64::new((-kappa * t).exp(), 0.0) - mu;
    if !(d.norm() > MU_POLE_TOL) {
        return Err(Error::MuPole { t, mu_re: mu.re, mu_im: mu.im });
    }
    Ok(d)
}

/// The factor `σ(t) = μ̃ / (e^{−κ_T t} − μ̃)`.
pub fn mu_factor(t: f64, spec: &KernelSpec) -> Result<C64> {
    Ok(spec.mu / denominator(t, spec.kappa(), spec.mu)?)
}

/// The kernel weight `w(t) = −σ(t) = μ̃ / (μ̃ − e^{−κ_T t})`.
pub fn crossover_weight(t: f64, spec: &KernelSpec) -> Result<C64> {
    Ok(-mu_factor(t, spec)?)
}

fn quartic(x: f64) -> f64 {
    let x2 = x * x;
    x2 * x2 + 1.0
}

/// Ratios of `|σ|` to the first-power envelope `|μ̃|(e^{2κt} ∧ 1)` and of `|σ|²` to `|μ̃|²(e^{2κt} ∧ 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuFactorReport {
    /// `sup |σ| / (|μ̃|(e^{2κt} ∧ 1))` on the grid.
    pub linear_c: f64,
    /// The same supremum with the `t`-window doubled; growth exposes that the first-power shape fails as `t → −∞`.
    pub linear_c_doubled_window: f64,
    /// `sup |σ|² / (|μ̃|²(e^{2κt} ∧ 1))` on the grid.
    pub squared_c: f64,
    /// Bisected-grid points where the squared ratio exceeds `1.05·squared_c`.
    pub violations: usize,
    pub points: usize,
}

/// Scans `σ(t)` over `t_grid × mus` for one `T`.
pub fn mu_factor_envelope_scan(t_value: f64, t_grid: &[f64], mus: &[C64]) -> Result<MuFactorReport> {
    if t_grid.len() < 2 || mus.is_empty() {
        return Err(Error::InvalidArgument("need at least two t values and one mu".into()));
    }
    let kappa = kappa_of(t_value);
    let ratios = |t: f64, mu: C64| -> Result<(f64, f64)> {
        let spec = KernelSpec::new(t_value, mu, 0.0);
        let sigma = mu_factor(t, &spec)?.norm();
        let env = (2.0 * kappa * t).exp().min(1.0);
        let m = mu.norm();
        Ok((sigma / (m * env), sigma * sigma / (m * m * env)))
    };
    let mut ts = t_grid.to_vec();
    ts.sort_by(|a, b| a.total_cmp(b));
    let (mut linear, mut squared) = (0.0f64, 0.0f64);
    for &t in &ts {
        for &mu in mus {
            let (p, q) = ratios(t, mu)?;
            linear = linear.max(p);
            squared = squared.max(q);
        }
    }
    let (lo, hi) = (ts[0], ts[ts.len() - 1]);
    let mid = 0.5 * (lo + hi);
    let mut linear2 = linear;
    for &t in &ts {
        let t2 = mid + 2.0 * (t - mid);
        for &mu in mus {
            linear2 = linear2.max(ratios(t2, mu)?.0);
        }
    }
    let mut violations = 0;
    for w in ts.windows(2) {
        let t = 0.5 * (w[0] + w[1]);
        for &mu in mus {
            if ratios(t, mu)?.1 > 1.05 * squared {
                violations += 1;
            }
        }
    }
    Ok(MuFactorReport {
        linear_c: linear,
        linear_c_doubled_window: linear2,
        squared_c: squared,
        violations,
        points: ts.len() * mus.len(),
    })
}

/// Hilbert–Schmidt data of the factorization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HSSplit {
    /// `∫_s^∞ dy (y⁴+1) ∫_{−y}^∞ dt (t⁴+1) |w/μ̃|² Ai_Γ(y+t)²`
    #[serde(rename = "I1")]
    pub i1: f64,
    /// As `I1` with `t ∈ (−∞, −y]`.
    #[serde(rename = "I2")]
    pub i2: f64,
    /// As `I1` with `t ∈ [−y, −y/2]`.
    #[serde(rename = "I3")]
    pub i3: f64,
    /// As `I1` with `t ∈ [−y/2, ∞)`.
    #[serde(rename = "I4")]
    pub i4: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HSReport {
    pub norm_a1: f64,
    pub norm_a2: f64,
    pub split: HSSplit,
    /// `‖A₁‖₂‖A₂‖₂`.
    pub product: f64,
    /// Quadrature plus truncation error bound for `‖A₁‖₂²`.
    pub a1_sq_error: f64,
    /// Quadrature error estimates for `I1` and for `I3 + I4`.
    pub i1_error: f64,
    pub i34_error: f64,
    pub i2_error: f64,
}

impl HSReport {
    /// `|I1 − (I3 + I4)|`.
    pub fn split_mismatch(&self) -> f64 {
        (self.split.i1 - self.split.i3 - self.split.i4).abs()
    }
}

/// Integration options of the kernel layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelOptions {
    /// Target absolute error of `t`-integrals; truncation tails are kept below a tenth of it.
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_nodes: usize,
}

impl Default for KernelOptions {
    fn default() -> Self {
        KernelOptions { abs_tol: 1e-12, rel_tol: 1e-11, max_nodes: 1 << 16 }
    }
}

impl KernelOptions {
    fn adaptive(&self) -> AdaptiveOptions {
        AdaptiveOptions { abs_tol: self.abs_tol, rel_tol: self.rel_tol, max_nodes: self.max_nodes }
    }
}

/// Envelope constants used to size truncation windows (dominate the empirical ones).
const ENV_UPPER: f64 = 1.0;
const ENV_LOWER: f64 = 1.0;

/// The crossover kernel for one `(T, μ̃, s)` backed by the shared deformed-Airy tables.
#[derive(Debug, Clone)]
pub struct CrossoverKernel {
    pub spec: KernelSpec,
    pub opts: KernelOptions,
    airy: Arc<DeformedAiry>,
    kappa: f64,
}

impl CrossoverKernel {
    pub fn new(spec: KernelSpec, cfg: &AiryConfig, opts: KernelOptions) -> Result<Self> {
        spec.validate(cfg)?;
        let airy = DeformedAiry::shared(spec.t, cfg)?;
        Ok(CrossoverKernel { spec, opts, kappa: spec.kappa(), airy })
    }

    pub fn airy(&self) -> &DeformedAiry {
        &self.airy
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn weight(&self, t: f64) -> Result<C64> {
        crossover_weight(t, &self.spec)
    }

    /// `sup_{t ≥ 0} |w(t)|`, sampled.
    fn weight_sup_right(&self) -> Result<f64> {
        let mut m = 0.0f64;
        for k in 0..=400 {
            let t = 60.0 / self.kappa * k as f64 / 400.0;
            m = m.max(self.weight(t)?.norm());
        }
        Ok(m.max(1.0))
    }

    /// `[t_lo, t_hi]` such that the neglected parts of `∫ |w| |Ai^Γ(x+t)| |Ai_Γ(y+t)| dt`
    /// are below `tol/10` under the envelopes `|Ai^Γ| ≤ T^{1/3}`,
    /// `|Ai_Γ(v)| ≤ T^{−1/3}e^{−(2/3)v^{3/2}}` (`v ≥ 0`) and `T^{−1/3}e^{2κ⁻¹|v|^{1/2}}` (`v ≤ 0`).
    pub fn t_window(&self, y: f64, tol: f64) -> Result<(f64, f64)> {
        let k = self.kappa;
        let c = ENV_UPPER * ENV_LOWER;
        let target = (tol / 20.0).ln();
        let m = self.spec.mu.norm();
        // Left: |w| ≤ 2|μ̃|e^{κt} once |μ̃|e^{κt} ≤ 1/2, tail ≤ (2|μ̃|c/κ)e^{κt + 2κ⁻¹(|y|+|t|)^{1/2}}.
        let left = |t: f64| (2.0 * m * c / k).ln() + k * t + 2.0 / k * (y.abs() + t.abs()).sqrt();
        let mut t_lo = -(m.max(1.0).ln() + 1.0) / k;
        while left(t_lo) > target {
            t_lo -= 1.0;
        }
        // Right: tail ≤ M c e^{−(2/3)v^{3/2}}/v^{1/2} with v = y + t_hi ≥ 1.
        let sup = self.weight_sup_right()?;
        let right = |v: f64| (sup * c).ln() - 2.0 / 3.0 * v.powf(1.5) - 0.5 * v.ln();
        let mut v = 1.0;
        while right(v) > target {
            v += 0.25;
        }
        let t_hi = (v - y).max(t_lo + 1.0);
        Ok((t_lo, t_hi))
    }

    /// `K̃(x, y)` by adaptive quadrature on [`t_window`](Self::t_window).
    pub fn eval(&self, x: f64, y: f64) -> Result<C64> {
        let (lo, hi) = self.t_window(y, self.opts.abs_tol)?;
        self.eval_on_window(x, y, lo, hi)
    }

    /// `K̃(x, y)` with an explicit `t`-window.
    pub fn eval_on_window(&self, x: f64, y: f64, lo: f64, hi: f64) -> Result<C64> {
        let mut err: Option<Error> = None;
        let f = |t: f64| match self.integrand(x, y, t) {
            Ok(v) => v,
            Err(e) => {
                err.get_or_insert(e);
                C64::new(0.0, 0.0)
            }
        };
        let r = integrate_complex_line(f, lo, hi, &self.opts.adaptive());
        if let Some(e) = err {
            return Err(e);
        }
        Ok(r?.value)
    }

    fn integrand(&self, x: f64, y: f64, t: f64) -> Result<C64> {
        let lower = self.airy.lower(y + t)?;
        if lower == 0.0 {
            return Ok(C64::new(0.0, 0.0));
        }
        Ok(self.weight(t)? * (self.airy.upper(x + t)? * lower))
    }

    pub fn a1(&self, x: f64, t: f64) -> Result<f64> {
        Ok(self.airy.upper(x + t)? / (quartic(x) * quartic(t)).sqrt())
    }

    pub fn a2(&self, t: f64, y: f64) -> Result<C64> {
        Ok(self.weight(t)? * (self.airy.lower(y + t)? * (quartic(y) * quartic(t)).sqrt()))
    }

    /// `∫ A₁(x, t) A₂(t, y) dt`, built from the factor kernels.
    pub fn composed(&self, x: f64, y: f64) -> Result<C64> {
        let (lo, hi) = self.t_window(y, self.opts.abs_tol)?;
        let mut err: Option<Error> = None;
        let f = |t: f64| match self.a1(x, t).and_then(|a| Ok(self.a2(t, y)? * a)) {
            Ok(v) => v,
            Err(e) => {
                err.get_or_insert(e);
                C64::new(0.0, 0.0)
            }
        };
        let scale = (quartic(y) / quartic(x)).sqrt();
        let r = integrate_complex_line(f, lo, hi, &AdaptiveOptions { abs_tol: self.opts.abs_tol * scale, ..self.opts.adaptive() });
        if let Some(e) = err {
            return Err(e);
        }
        Ok(r?.value)
    }

    /// Hilbert–Schmidt norms of `A₁`, `A₂` and the `I1…I4` split.
    pub fn hs_norms(&self) -> Result<HSReport> {
        let (a1_sq, a1_err) = self.a1_norm_sq()?;
        let i1 = self.a2_piece(Piece::I1)?;
        let i2 = self.a2_piece(Piece::I2)?;
        let i3 = self.a2_piece(Piece::I3)?;
        let i4 = self.a2_piece(Piece::I4)?;
        let m2 = self.spec.mu.norm_sqr();
        let a2_sq = m2 * (i1.0 + i2.0);
        Ok(HSReport {
            norm_a1: a1_sq.sqrt(),
            norm_a2: a2_sq.sqrt(),
            split: HSSplit { i1: i1.0, i2: i2.0, i3: i3.0, i4: i4.0 },
            product: (a1_sq * a2_sq).sqrt(),
            a1_sq_error: a1_err,
            i1_error: i1.1,
            i34_error: i3.1 + i4.1,
            i2_error: i2.1,
        })
    }

    /// `‖A₁‖₂² = ∫_s^∞ dx (x⁴+1)^{−1} ∫ dt (t⁴+1)^{−1} Ai^Γ(x+t)²`.
    ///
    /// Above the table range `Ai^Γ = κ` and the `t`-integral is closed-form; below
    /// `x + t = −100` the integrand is dropped and `κ²∫dt/(t⁴+1)` is added to the error.
    fn a1_norm_sq(&self) -> Result<(f64, f64)> {
        let ((v_lo, v_hi), _) = self.airy.table_ranges();
        let k = self.kappa;
        let inner_opts = AdaptiveOptions { abs_tol: 1e-300, rel_tol: 1e-11, max_nodes: self.opts.max_nodes };
        let mut err: Option<Error> = None;
        let mut trunc = 0.0f64;
        let mut quad_err = 0.0f64;
        let mut inner = |x: f64| -> f64 {
            let (a, b) = (v_lo - x, v_hi - x);
            let tail_hi = k * k * (quartic_tail(f64::INFINITY) - quartic_tail(b));
            let t_lo_bound = k * k * (quartic_tail(a) - quartic_tail(f64::NEG_INFINITY));
            let body = integrate_real(
                |t| match self.airy.upper(x + t) {
                    Ok(u) => u * u / quartic(t),
                    Err(e) => {
                        err.get_or_insert(e);
                        0.0
                    }
                },
                a,
                b,
                &inner_opts,
            );
            match body {
                Ok(r) => {
                    trunc = trunc.max(t_lo_bound / quartic(x));
                    quad_err = quad_err.max(r.error / quartic(x));
                    (r.value + tail_hi) / quartic(x)
                }
                Err(e) => {
                    err.get_or_insert(e);
                    0.0
                }
            }
        };
        let outer = integrate_real_semi_infinite(
            &mut inner,
            self.spec.s,
            1.0 + self.spec.s.abs(),
            &AdaptiveOptions { abs_tol: 1e-300, rel_tol: 1e-10, max_nodes: 1 << 12 },
        );
        if let Some(e) = err {
            return Err(e);
        }
        let outer = outer?;
        // ∫_s^∞ dx/(x⁴+1) bounds the x-integral of the per-x error maxima.
        let xmass = quartic_tail(f64::INFINITY) - quartic_tail(self.spec.s);
        Ok((outer.value, outer.error + (trunc + quad_err) * xmass))
    }

    fn a2_piece(&self, piece: Piece) -> Result<(f64, f64)> {
        let (_, (v_lo, v_hi)) = self.airy.table_ranges();
        let k = self.kappa;
        let mu = self.spec.mu;
        let inner_opts = AdaptiveOptions { abs_tol: 1e-300, rel_tol: 1e-11, max_nodes: self.opts.max_nodes };
        let mut err: Option<Error> = None;
        let mut inner = |y: f64| -> f64 {
            let (a, b) = match piece {
                Piece::I1 => (-y, v_hi - y),
                Piece::I2 => (v_lo - y, -y),
                Piece::I3 => (-y, -0.5 * y),
                Piece::I4 => (-0.5 * y, v_hi - y),
            };
            if !(b > a) {
                return 0.0;
            }
            let body = integrate_real(
                |t| {
                    let d = C64::new((-k * t).exp(), 0.0) - mu;
                    match self.airy.lower(y + t) {
                        Ok(l) if l != 0.0 => quartic(t) * l * l / d.norm_sqr(),
                        Ok(_) => 0.0,
                        Err(e) => {
                            err.get_or_insert(e);
                            0.0
                        }
                    }
                },
                a,
                b,
                &inner_opts,
            );
            match body {
                Ok(r) => quartic(y) * r.value,
                Err(e) => {
                    err.get_or_insert(e);
                    0.0
                }
            }
        };
        let scale = (2.0 / k).clamp(0.5, 5.0);
        let outer = integrate_real_semi_infinite(
            &mut inner,
            self.spec.s,
            scale,
            &AdaptiveOptions { abs_tol: 1e-300, rel_tol: 1e-10, max_nodes: 1 << 12 },
        );
        if let Some(e) = err {
            return Err(e);
        }
        let r = outer?;
        Ok((r.value, r.error))
    }
}

#[derive(Debug, Clone, Copy)]
enum Piece {
    I1,
    I2,
    I3,
    I4,
}

/// `Φ(u) = ∫_0^u dt/(t⁴+1)`, odd, `Φ(±∞) = ±π/(2√2)`.
pub fn quartic_tail(u: f64) -> f64 {
    if u.is_infinite() {
        return u.signum() * PI / (2.0 * SQRT_2);
    }
    let log_part = ((u * u + SQRT_2 * u + 1.0) / (u * u - SQRT_2 * u + 1.0)).ln();
    let atan_part = 2.0 * ((SQRT_2 * u + 1.0).atan() + (SQRT_2 * u - 1.0).atan());
    (log_part + atan_part) / (4.0 * SQRT_2)
}

/// `K̃(x, y)` for a one-off spec with default options.
pub fn kernel_eval(x: f64, y: f64, spec: &KernelSpec, cfg: &AiryConfig) -> Result<C64> {
    if x < spec.s || y < spec.s {
        return Err(Error::InvalidArgument(format!("kernel arguments ({x}, {y}) must be >= s = {}", spec.s)));
    }
    CrossoverKernel::new(*spec, cfg, KernelOptions::default())?.eval(x, y)
}

/// `A₁(x, t)` for a one-off spec.
pub fn a1_kernel(x: f64, t: f64, spec: &KernelSpec, cfg: &AiryConfig) -> Result<f64> {
    CrossoverKernel::new(*spec, cfg, KernelOptions::default())?.a1(x, t)
}

/// `A₂(t, y)` for a one-off spec.
pub fn a2_kernel(t: f64, y: f64, spec: &KernelSpec, cfg: &AiryConfig) -> Result<C64> {
    CrossoverKernel::new(*spec, cfg, KernelOptions::default())?.a2(t, y)
}

pub fn hs_norms(spec: &KernelSpec, cfg: &AiryConfig) -> Result<HSReport> {
    CrossoverKernel::new(*spec, cfg, KernelOptions::default())?.hs_norms()
}

/// Fit of `ln(‖A₂‖₂²/|μ̃|²) ≤ ln C + 9 ln s + ln(e^{−κs} + e^{−c s^{3/2}})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct A2EnvelopeFit {
    #[serde(rename = "ln_C")]
    pub ln_c: f64,
    pub c: f64,
    /// Root-mean-square gap between the envelope and the data, in log units.
    pub rms_log_slack: f64,
    /// `d ln(‖A₂‖²)/ds` between consecutive samples.
    pub slopes: Vec<f64>,
    pub decreasing: bool,
}

/// Smallest-gap envelope of the given shape lying above every sample `(s, ‖A₂‖₂²/|μ̃|²)`.
pub fn fit_a2_envelope(samples: &[(f64, f64)], kappa: f64) -> Result<A2EnvelopeFit> {
    if samples.len() < 3 {
        return Err(Error::InfeasibleFit("need at least three samples".into()));
    }
    if samples.iter().any(|&(s, v)| !(v > 0.0 && v.is_finite() && s > 0.0)) {
        return Err(Error::InfeasibleFit("samples must be positive and finite".into()));
    }
    let mut pts = samples.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let shape = |s: f64, c: f64| {
        let (a, b) = (-kappa * s, -c * s.powf(1.5));
        let m = a.max(b);
        m + ((a - m).exp() + (b - m).exp()).ln() + 9.0 * s.ln()
    };
    let objective = |c: f64| {
        let d: Vec<f64> = pts.iter().map(|&(s, v)| v.ln() - shape(s, c)).collect();
        let ln_c = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let rms = (d.iter().map(|x| (ln_c - x).powi(2)).sum::<f64>() / d.len() as f64).sqrt();
        (rms, ln_c)
    };
    // Log-spaced search for c, then golden-section refinement.
    let mut best = (f64::INFINITY, 0.0, 1e-3);
    for k in 0..=200 {
        let c = 10f64.powf(-3.0 + 4.0 * k as f64 / 200.0);
        let (rms, ln_c) = objective(c);
        if rms < best.0 {
            best = (rms, ln_c, c);
        }
    }
    let (mut a, mut b) = (best.2.ln() - 0.05, best.2.ln() + 0.05);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..60 {
        let (m1, m2) = (b - g * (b - a), a + g * (b - a));
        if objective(m1.exp()).0 < objective(m2.exp()).0 {
            b = m2;
        } else {
            a = m1;
        }
    }
    let c = (0.5 * (a + b)).exp();
    let (rms, ln_c) = objective(c);
    let (rms, ln_c, c) = if rms <= best.0 { (rms, ln_c, c) } else { best };
    if !ln_c.is_finite() {
        return Err(Error::InfeasibleFit("envelope constant not finite".into()));
    }
    let slopes: Vec<f64> = pts.windows(2).map(|w| (w[1].1.ln() - w[0].1.ln()) / (w[1].0 - w[0].0)).collect();
    Ok(A2EnvelopeFit { ln_c, c, rms_log_slack: rms, decreasing: slopes.iter().all(|&d| d < 0.0), slopes })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_and_weight_at_origin() {
        let spec = KernelSpec::new(2.0, C64::new(-1.0, 0.0), 0.0);
        let v = mu_factor(0.0, &spec).unwrap();
        assert!((v - C64::new(-0.5, 0.0)).norm() < 1e-15);
        assert!((crossover_weight(0.0, &spec).unwrap() - C64::new(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn pole_detected() {
        let spec = KernelSpec::new(2.0, C64::new(1.0, 1e-14), 0.0);
        assert!(matches!(mu_factor(0.0, &spec), Err(Error::MuPole { .. })));
    }

    #[test]
    fn quartic_tail_closed_form() {
        let r = integrate_real(|t| 1.0 / quartic(t), 0.0, 3.0, &AdaptiveOptions::with_abs(1e-15)).unwrap();
        assert!((quartic_tail(3.0) - r.value).abs() < 1e-14);
        assert!((quartic_tail(-3.0) + r.value).abs() < 1e-14);
        assert!((quartic_tail(1e8) - quartic_tail(f64::INFINITY)).abs() < 1e-15);
    }

    #[test]
    fn envelope_fit_recovers_shape() {
        let (k, c) = (1.0, 0.4);
        let samples: Vec<(f64, f64)> =
            (10..=20).map(|s| s as f64).map(|s| (s, 3.0 * s.powi(9) * ((-k * s).exp() + (-c * s.powf(1.5)).exp()))).collect();
        let fit = fit_a2_envelope(&samples, k).unwrap();
        assert!((fit.c - c).abs() < 1e-3, "{fit:?}");
        assert!((fit.ln_c - 3f64.ln()).abs() < 1e-3);
    }
}
