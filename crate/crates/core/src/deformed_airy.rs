//! Gamma-deformed Airy functions
//!
//! ```text
//! Ai^Γ(x) = (2πi)⁻¹ ∫ e^{−z³/3 + xz} Γ(κ⁻¹z) dz     (upward, crossing ℝ right of 0)
//! Ai_Γ(x) = (2πi)⁻¹ ∫ e^{ z³/3 − xz} / Γ(κ⁻¹z) dz   (from ∞e^{−iπ/3} to ∞e^{iπ/3})
//! ```
//!
//! with `κ = κ_T = (T/2)^{1/3}`, evaluated on regime-dependent contours. Large
//! arguments use the substitution `z = a·s`, `a = |x|^{1/2}`, `X = a³`.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, PI};
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::chebyshev::PiecewiseChebyshev;
use crate::contours::{integrate, Contour, ContourOptions, QuadResult, Segment};
use crate::error::{Error, Result};
use crate::special::{ln_gamma_unchecked, recip_gamma};

type C64 = Complex<f64>;

/// `κ_T = 2^{−1/3} T^{1/3}`.
pub fn kappa_of(t: f64) -> f64 {
    (t / 2.0).cbrt()
}

/// Numerical settings shared by all deformed-Airy evaluations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AiryConfig {
    /// Smallest admissible time; fixes the line `Re z = −κ_{T₀}/2` and the regime thresholds.
    pub t0: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_nodes_per_segment: usize,
}

impl Default for AiryConfig {
    fn default() -> Self {
        AiryConfig { t0: 1.0, abs_tol: 1e-13, rel_tol: 1e-12, max_nodes_per_segment: 1 << 16 }
    }
}

impl AiryConfig {
    pub fn kappa0(&self) -> f64 {
        kappa_of(self.t0)
    }

    fn contour_options(&self) -> ContourOptions {
        ContourOptions {
            abs_tol: self.abs_tol,
            rel_tol: self.rel_tol,
            max_nodes_per_segment: self.max_nodes_per_segment,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t0 > 0.0 && self.t0.is_finite()) {
            return Err(Error::InvalidArgument(format!("T0 must be positive, got {}", self.t0)));
        }
        if !(self.abs_tol > 0.0) || !(self.rel_tol >= 0.0) {
            return Err(Error::InvalidArgument("Airy tolerances must be positive".into()));
        }
        Ok(())
    }
}

/// Selects one deformed Airy instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeformedAiryParams {
    pub x: f64,
    /// `κ_T⁻¹ = 2^{1/3} T^{−1/3}`.
    pub kappa_inv: f64,
    /// Always 0 here.
    pub shift: f64,
}

impl DeformedAiryParams {
    pub fn from_time(x: f64, t: f64) -> Self {
        DeformedAiryParams { x, kappa_inv: 1.0 / kappa_of(t), shift: 0.0 }
    }

    pub fn kappa(&self) -> f64 {
        1.0 / self.kappa_inv
    }

    /// `T = 2κ³`.
    pub fn time(&self) -> f64 {
        2.0 * self.kappa().powi(3)
    }

    pub fn validate(&self, cfg: &AiryConfig) -> Result<()> {
        if !self.x.is_finite() {
            return Err(Error::InvalidArgument(format!("x must be finite, got {}", self.x)));
        }
        if !(self.kappa_inv > 0.0 && self.kappa_inv.is_finite()) {
            return Err(Error::InvalidArgument(format!("kappa_inv must be positive, got {}", self.kappa_inv)));
        }
        if self.shift != 0.0 {
            return Err(Error::InvalidArgument("only shift = 0 is supported".into()));
        }
        if self.time() < cfg.t0 * (1.0 - 1e-12) {
            return Err(Error::InvalidArgument(format!("T = {} is below T0 = {}", self.time(), cfg.t0)));
        }
        Ok(())
    }
}

/// Which regime contour produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContourCase {
    UpperXPos,
    UpperCase1,
    UpperCase2,
    UpperCase3,
    LowerCase1Pos,
    LowerCase2Pos,
    LowerCase1Neg,
    LowerCase2Neg,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AiryEvalResult {
    pub value: f64,
    pub imag_residual: f64,
    pub contour_case: ContourCase,
    /// `value = scaled_value·e^{log_scale} + residue`; stays representable when `value` underflows.
    pub scaled_value: f64,
    pub log_scale: f64,
    /// Contour integral before the `(2πi)⁻¹` factor and any residue correction.
    pub quad: QuadResult<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    Upper,
    Lower,
    Classical,
    ClassicalPrime,
}

/// Evaluation plan: s-plane contour, `z = scale·s`, integrand multiplied by `e^{−log_shift}`.
struct Plan {
    contour: Contour<f64>,
    scale: f64,
    log_shift: f64,
    residue: f64,
}

fn integrand(kind: Kind, x: f64, kinv: f64, z: C64, log_shift: f64) -> C64 {
    let z3 = z * z * z / 3.0;
    match kind {
        Kind::Upper => (-z3 + z * x - log_shift + ln_gamma_unchecked(z * kinv)).exp(),
        Kind::Lower => {
            let poly = z3 - z * x - log_shift;
            let w = z * kinv;
            if w.re >= 0.5 {
                (poly - ln_gamma_unchecked(w)).exp()
            } else {
                poly.exp() * recip_gamma(w)
            }
        }
        Kind::Classical => (z3 - z * x - log_shift).exp(),
        Kind::ClassicalPrime => -z * (z3 - z * x - log_shift).exp(),
    }
}

/// Smallest `r ≥ 0` with `g(r) ≥ target`, for `g` increasing past its minimum.
fn solve_radius(target: f64, g: impl Fn(f64) -> f64) -> f64 {
    let mut hi = 1.0;
    while g(hi) < target {
        hi *= 2.0;
        if hi > 1e6 {
            return hi;
        }
    }
    let mut lo = 0.0;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Exponent decay needed on truncated rays (`e^{−52} ≈ 2.6e−23`).
const RAY_DECAY: f64 = 52.0;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// `Re z = s₀` upward, `s₀ = −κ_{T₀}/2`, for `Ai^Γ`.
fn upper_line(x: f64, kinv: f64, cfg: &AiryConfig) -> Result<Contour<f64>> {
    let s0 = -0.5 * cfg.kappa0();
    let growth = (x * s0).max(0.0) + 0.5 * PI * kinv;
    let r = solve_radius(RAY_DECAY + growth, |t| s0.abs() * t * t + 0.5 * PI * kinv * t - 0.5 * PI * kinv * t);
    Contour::new(vec![Segment::line(c(s0, -r), c(s0, r))])
}

/// Wedge in the s-plane: ray from `∞e^{−3πi/4}` to `−i`, right unit semicircle, ray from `i` to `∞e^{3πi/4}`.
fn upper_wedge(big_x: f64) -> Result<Contour<f64>> {
    let r = solve_radius(RAY_DECAY, |t| big_x * (t * t + t.powi(3) * 2f64.sqrt() / 6.0));
    Contour::new(vec![
        Segment::ray_in(c(0.0, -1.0), -3.0 * FRAC_PI_4, r),
        Segment::arc(c(0.0, 0.0), 1.0, -FRAC_PI_2, FRAC_PI_2),
        Segment::ray_out(c(0.0, 1.0), 3.0 * FRAC_PI_4, r),
    ])
}

/// `Re z = 1` upward, for `Ai_Γ` at small `|x|`.
fn lower_line(x: f64, kinv: f64) -> Result<Contour<f64>> {
    let b = 0.5 * PI * kinv;
    let r = solve_radius(RAY_DECAY + x.abs() + 1.0, |t| t * t - b * t);
    Contour::new(vec![Segment::line(c(1.0, -r), c(1.0, r))])
}

/// Rays through `s = 1` at `∓π/3` (steepest descent for `s³/3 − s`).
fn lower_rays(big_x: f64, growth_rate: f64) -> Result<Contour<f64>> {
    let r = solve_radius(RAY_DECAY, |t| big_x * (0.5 * t * t + t.powi(3) / 3.0) - growth_rate * t);
    Contour::rays_through(c(1.0, 0.0), FRAC_PI_3, r)
}

/// Chevron: ray from `∞e^{−iπ/4}` to `−i`, segment `−i → i`, ray from `i` to `∞e^{iπ/4}`.
fn lower_chevron(big_x: f64, growth_rate: f64) -> Result<Contour<f64>> {
    let r = solve_radius(RAY_DECAY, |t| {
        big_x * (t * t + t.powi(3) * 2f64.sqrt() / 6.0) - growth_rate * t / 2f64.sqrt()
    });
    Contour::new(vec![
        Segment::ray_in(c(0.0, -1.0), -FRAC_PI_4, r),
        Segment::line(c(0.0, -1.0), c(0.0, 1.0)),
        Segment::ray_out(c(0.0, 1.0), FRAC_PI_4, r),
    ])
}

fn upper_case(x: f64, kappa: f64, cfg: &AiryConfig) -> ContourCase {
    if x >= 0.0 {
        return ContourCase::UpperXPos;
    }
    let a = (-x).sqrt();
    if a <= cfg.kappa0() {
        ContourCase::UpperCase1
    } else if a <= kappa + 1.0 {
        ContourCase::UpperCase2
    } else {
        ContourCase::UpperCase3
    }
}

fn lower_case(x: f64, cfg: &AiryConfig) -> ContourCase {
    let a = x.abs().sqrt();
    match (x >= 0.0, a <= cfg.kappa0()) {
        (true, true) => ContourCase::LowerCase1Pos,
        (true, false) => ContourCase::LowerCase2Pos,
        (false, true) => ContourCase::LowerCase1Neg,
        (false, false) => ContourCase::LowerCase2Neg,
    }
}

fn plan(case: ContourCase, x: f64, kinv: f64, cfg: &AiryConfig) -> Result<Plan> {
    let a = x.abs().sqrt();
    let big_x = a * a * a;
    Ok(match case {
        ContourCase::UpperXPos | ContourCase::UpperCase1 => Plan {
            contour: upper_line(x, kinv, cfg)?,
            scale: 1.0,
            log_shift: 0.0,
            residue: 1.0 / kinv,
        },
        ContourCase::UpperCase2 | ContourCase::UpperCase3 => {
            if x >= 0.0 {
                return Err(Error::InvalidArgument("wedge contour needs x < 0".into()));
            }
            Plan { contour: upper_wedge(big_x)?, scale: a, log_shift: 0.0, residue: 0.0 }
        }
        ContourCase::LowerCase1Pos | ContourCase::LowerCase1Neg => {
            Plan { contour: lower_line(x, kinv)?, scale: 1.0, log_shift: 0.0, residue: 0.0 }
        }
        ContourCase::LowerCase2Pos => {
            if x <= 0.0 {
                return Err(Error::InvalidArgument("steepest-descent rays need x > 0".into()));
            }
            Plan {
                contour: lower_rays(big_x, 1.4 * kinv * a)?,
                scale: a,
                log_shift: -2.0 * big_x / 3.0,
                residue: 0.0,
            }
        }
        ContourCase::LowerCase2Neg => {
            if x >= 0.0 {
                return Err(Error::InvalidArgument("chevron contour needs x < 0".into()));
            }
            Plan { contour: lower_chevron(big_x, 0.5 * PI * kinv * a)?, scale: a, log_shift: 0.0, residue: 0.0 }
        }
    })
}

fn run(kind: Kind, plan: &Plan, x: f64, kinv: f64, cfg: &AiryConfig, case: ContourCase) -> Result<AiryEvalResult> {
    let a = plan.scale;
    let shift = plan.log_shift;
    let q = integrate(&plan.contour, |s| integrand(kind, x, kinv, s * a, shift) * a, &cfg.contour_options())?;
    // (2πi)⁻¹ (u + iv) = (v − iu)/(2π)
    let scaled_re = q.value.im / (2.0 * PI);
    let scaled_im = -q.value.re / (2.0 * PI);
    if !(scaled_im.abs() <= 1e-8 * scaled_re.abs().max(1.0)) {
        return Err(Error::ImaginaryResidual {
            value: scaled_re,
            imag: scaled_im,
            context: format!("{case:?} at x = {x}, kappa_inv = {kinv}"),
        });
    }
    let factor = shift.exp();
    Ok(AiryEvalResult {
        value: scaled_re * factor + plan.residue,
        imag_residual: scaled_im * factor,
        contour_case: case,
        scaled_value: scaled_re,
        log_scale: shift,
        quad: QuadResult {
            value: q.value * factor,
            abs_error_estimate: q.abs_error_estimate * factor,
            nodes_used: q.nodes_used,
        },
    })
}

/// `Ai^Γ(x, κ_T⁻¹, 0)` on the regime contour (line plus residue `κ_T`, or wedge).
pub fn ai_upper_gamma(p: &DeformedAiryParams, cfg: &AiryConfig) -> Result<AiryEvalResult> {
    p.validate(cfg)?;
    let case = upper_case(p.x, p.kappa(), cfg);
    ai_upper_gamma_with_case(p, cfg, case)
}

/// `Ai^Γ` on a caller-chosen regime contour (for overlap and continuity checks).
pub fn ai_upper_gamma_with_case(p: &DeformedAiryParams, cfg: &AiryConfig, case: ContourCase) -> Result<AiryEvalResult> {
    p.validate(cfg)?;
    if !matches!(
        case,
        ContourCase::UpperXPos | ContourCase::UpperCase1 | ContourCase::UpperCase2 | ContourCase::UpperCase3
    ) {
        return Err(Error::InvalidArgument(format!("{case:?} is not an Ai^Γ contour")));
    }
    let pl = plan(case, p.x, p.kappa_inv, cfg)?;
    run(Kind::Upper, &pl, p.x, p.kappa_inv, cfg, case)
}

/// `Ai_Γ(x, κ_T⁻¹, 0)` on the regime contour.
pub fn ai_lower_gamma(p: &DeformedAiryParams, cfg: &AiryConfig) -> Result<AiryEvalResult> {
    p.validate(cfg)?;
    let case = lower_case(p.x, cfg);
    ai_lower_gamma_with_case(p, cfg, case)
}

/// `Ai_Γ` on a caller-chosen regime contour.
pub fn ai_lower_gamma_with_case(p: &DeformedAiryParams, cfg: &AiryConfig, case: ContourCase) -> Result<AiryEvalResult> {
    p.validate(cfg)?;
    if !matches!(
        case,
        ContourCase::LowerCase1Pos | ContourCase::LowerCase2Pos | ContourCase::LowerCase1Neg | ContourCase::LowerCase2Neg
    ) {
        return Err(Error::InvalidArgument(format!("{case:?} is not an Ai_Γ contour")));
    }
    let pl = plan(case, p.x, p.kappa_inv, cfg)?;
    run(Kind::Lower, &pl, p.x, p.kappa_inv, cfg, case)
}

/// Residue of `e^{−z³/3 + xz} Γ(κ⁻¹z)` at `z = 0`, equal to `κ_T = 2^{−1/3}T^{1/3}`.
pub fn upper_residue(t: f64) -> f64 {
    kappa_of(t)
}

/// `e^{−z³/3 + xz} Γ(κ⁻¹z)` without normalization.
pub fn upper_integrand(x: f64, kappa_inv: f64) -> impl Fn(C64) -> C64 {
    move |z| integrand(Kind::Upper, x, kappa_inv, z, 0.0)
}

/// `e^{z³/3 − xz} / Γ(κ⁻¹z)` without normalization.
pub fn lower_integrand(x: f64, kappa_inv: f64) -> impl Fn(C64) -> C64 {
    move |z| integrand(Kind::Lower, x, kappa_inv, z, 0.0)
}

/// Undeformed `Γ̃_ζ`: rays through `1` at `∓2π/3`.
pub fn undeformed_upper_contour(radius: f64) -> Result<Contour<f64>> {
    Contour::rays_through(c(1.0, 0.0), 2.0 * FRAC_PI_3, radius)
}

/// Undeformed `Γ̃_η`: rays through `1` at `∓π/3`.
pub fn undeformed_lower_contour(radius: f64) -> Result<Contour<f64>> {
    Contour::rays_through(c(1.0, 0.0), FRAC_PI_3, radius)
}

/// The z-plane contour used for `Ai^Γ(x)` and the residue it requires.
pub fn upper_regime_contour(p: &DeformedAiryParams, cfg: &AiryConfig) -> Result<(Contour<f64>, ContourCase, f64)> {
    p.validate(cfg)?;
    let case = upper_case(p.x, p.kappa(), cfg);
    let pl = plan(case, p.x, p.kappa_inv, cfg)?;
    Ok((pl.contour.scaled(c(pl.scale, 0.0)), case, pl.residue))
}

/// The z-plane contour used for `Ai_Γ(x)`.
pub fn lower_regime_contour(p: &DeformedAiryParams, cfg: &AiryConfig) -> Result<(Contour<f64>, ContourCase)> {
    p.validate(cfg)?;
    let case = lower_case(p.x, cfg);
    let pl = plan(case, p.x, p.kappa_inv, cfg)?;
    Ok((pl.contour.scaled(c(pl.scale, 0.0)), case))
}

fn classical(kind: Kind, x: f64) -> Result<f64> {
    if !((-60.0..=200.0).contains(&x)) {
        return Err(Error::InvalidArgument(format!("classical Airy needs -60 <= x <= 200, got {x}")));
    }
    let cfg = AiryConfig { abs_tol: 1e-15, rel_tol: 1e-13, ..AiryConfig::default() };
    let a = x.abs().sqrt();
    let big_x = a * a * a;
    let pl = if x >= 1.0 {
        Plan { contour: lower_rays(big_x, 0.0)?, scale: a, log_shift: -2.0 * big_x / 3.0, residue: 0.0 }
    } else if x > -1.0 {
        let r = solve_radius(RAY_DECAY, |t| t.powi(3) / 3.0 + t * t / 2.0 - 0.5 * t * (1.0 + x.abs()));
        Plan { contour: Contour::rays_through(c(1.0, 0.0), FRAC_PI_3, r)?, scale: 1.0, log_shift: 0.0, residue: 0.0 }
    } else {
        Plan { contour: lower_chevron(big_x, 0.0)?, scale: a, log_shift: 0.0, residue: 0.0 }
    };
    Ok(run(kind, &pl, x, 1.0, &cfg, ContourCase::LowerCase2Pos)?.value)
}

/// Classical `Ai(x)` from `(2πi)⁻¹∫ e^{z³/3 − xz} dz` on rays through 1 (rescaled for `|x| ≥ 1`).
pub fn airy_classical(x: f64) -> Result<f64> {
    classical(Kind::Classical, x)
}

/// Classical `Ai′(x)`.
pub fn airy_classical_prime(x: f64) -> Result<f64> {
    classical(Kind::ClassicalPrime, x)
}

/// Interpolated `Ai^Γ` and `Ai_Γ` for one `T`, falling back to contour evaluation outside the tables.
///
/// The `Ai_Γ` table stores `Ai_Γ(v)·e^{h(v)}` with `h(v) = (2/3)((1+v²)^{3/4} − 1)`
/// for `v ≥ 0` and `h = 0` below, so that relative accuracy survives the
/// super-exponential decay; `h` is analytic on each panel.
#[derive(Debug)]
pub struct DeformedAiry {
    t: f64,
    kappa: f64,
    cfg: AiryConfig,
    upper: PiecewiseChebyshev,
    lower: PiecewiseChebyshev,
}

fn lower_scale(v: f64) -> f64 {
    if v > 0.0 {
        2.0 / 3.0 * ((1.0 + v * v).powf(0.75) - 1.0)
    } else {
        0.0
    }
}

const TABLE_DEGREE: usize = 24;
const UPPER_TABLE_MIN: f64 = -100.0;
const LOWER_TABLE_MAX: f64 = 105.0;

fn breakpoints(lo: f64, hi: f64) -> Vec<f64> {
    let mut neg = vec![];
    let mut b = 0.0f64;
    while b > lo {
        neg.push(b);
        b -= (3.5 / b.abs().max(1e-300).sqrt()).min(1.0);
    }
    neg.push(lo);
    neg.reverse();
    let mut out = neg;
    let mut b = 0.0;
    while b < hi {
        b = (b + 1.0f64).min(hi);
        out.push(b);
    }
    out.dedup();
    out
}

impl DeformedAiry {
    pub fn new(t: f64, cfg: &AiryConfig) -> Result<Self> {
        cfg.validate()?;
        let kappa = kappa_of(t);
        let probe = DeformedAiryParams::from_time(0.0, t);
        probe.validate(cfg)?;
        let kinv = probe.kappa_inv;
        let cfg_u = *cfg;
        let upper_src = Arc::new(move |v: f64| {
            ai_upper_gamma(&DeformedAiryParams { x: v, kappa_inv: kinv, shift: 0.0 }, &cfg_u).map(|r| r.value)
        });
        let cfg_l = *cfg;
        let lower_src = Arc::new(move |v: f64| {
            let p = DeformedAiryParams { x: v, kappa_inv: kinv, shift: 0.0 };
            let r = ai_lower_gamma(&p, &cfg_l)?;
            Ok(r.scaled_value * (r.log_scale + lower_scale(v)).exp())
        });
        let upper_hi = Self::upper_cut_for(kappa);
        let lower_lo = -(45.0 / kappa + 5.0);
        Ok(DeformedAiry {
            t,
            kappa,
            cfg: *cfg,
            upper: PiecewiseChebyshev::new(breakpoints(UPPER_TABLE_MIN, upper_hi), TABLE_DEGREE, upper_src),
            lower: PiecewiseChebyshev::new(breakpoints(lower_lo, LOWER_TABLE_MAX), TABLE_DEGREE, lower_src),
        })
    }

    /// Argument beyond which `Ai^Γ = κ` to double precision (next residue term `κe^{κ³/3 − κv}`).
    fn upper_cut_for(kappa: f64) -> f64 {
        (60.0f64).max((45.0 + kappa.powi(3) / 3.0) / kappa)
    }

    /// Process-wide instance for `(T, cfg)`, built once.
    pub fn shared(t: f64, cfg: &AiryConfig) -> Result<Arc<Self>> {
        type Key = (u64, u64, u64, u64, usize);
        static CACHE: OnceLock<Mutex<HashMap<Key, Arc<DeformedAiry>>>> = OnceLock::new();
        let key = (t.to_bits(), cfg.t0.to_bits(), cfg.abs_tol.to_bits(), cfg.rel_tol.to_bits(), cfg.max_nodes_per_segment);
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("airy cache poisoned");
        if let Some(v) = guard.get(&key) {
            return Ok(Arc::clone(v));
        }
        let v = Arc::new(DeformedAiry::new(t, cfg)?);
        guard.insert(key, Arc::clone(&v));
        Ok(v)
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn config(&self) -> &AiryConfig {
        &self.cfg
    }

    fn params(&self, v: f64) -> DeformedAiryParams {
        DeformedAiryParams { x: v, kappa_inv: 1.0 / self.kappa, shift: 0.0 }
    }

    /// `Ai^Γ(v)`.
    pub fn upper(&self, v: f64) -> Result<f64> {
        if v > self.upper.hi() {
            Ok(self.kappa)
        } else if v >= self.upper.lo() {
            self.upper.eval(v)
        } else {
            Ok(ai_upper_gamma(&self.params(v), &self.cfg)?.value)
        }
    }

    /// `Ai_Γ(v)`.
    pub fn lower(&self, v: f64) -> Result<f64> {
        if v > self.lower.hi() {
            Ok(0.0)
        } else if v >= self.lower.lo() {
            Ok(self.lower.eval(v)? * (-lower_scale(v)).exp())
        } else {
            Ok(ai_lower_gamma(&self.params(v), &self.cfg)?.value)
        }
    }

    /// Range covered by the interpolation tables (upper, lower).
    pub fn table_ranges(&self) -> ((f64, f64), (f64, f64)) {
        ((self.upper.lo(), self.upper.hi()), (self.lower.lo(), self.lower.hi()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kappa_at_two_is_one() {
        assert!((kappa_of(2.0) - 1.0).abs() < 1e-15);
        assert!((upper_residue(2.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn breakpoints_cover_range() {
        let b = breakpoints(-100.0, 60.0);
        assert_eq!(b[0], -100.0);
        assert_eq!(*b.last().unwrap(), 60.0);
        assert!(b.windows(2).all(|w| w[1] > w[0] && w[1] - w[0] <= 1.0 + 1e-12));
        assert!(b.contains(&0.0));
    }

    #[test]
    fn cases_follow_thresholds() {
        let cfg = AiryConfig::default();
        let k0 = cfg.kappa0();
        assert_eq!(upper_case(0.0, 1.0, &cfg), ContourCase::UpperXPos);
        assert_eq!(upper_case(-k0 * k0, 1.0, &cfg), ContourCase::UpperCase1);
        assert_eq!(upper_case(-4.0, 1.0, &cfg), ContourCase::UpperCase2);
        assert_eq!(upper_case(-4.5, 1.0, &cfg), ContourCase::UpperCase3);
        assert_eq!(lower_case(k0 * k0, &cfg), ContourCase::LowerCase1Pos);
        assert_eq!(lower_case(9.0, &cfg), ContourCase::LowerCase2Pos);
        assert_eq!(lower_case(-0.1, &cfg), ContourCase::LowerCase1Neg);
        assert_eq!(lower_case(-4.0, &cfg), ContourCase::LowerCase2Neg);
    }
}
