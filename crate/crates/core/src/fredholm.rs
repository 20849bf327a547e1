//! Fredholm determinants `det(I − K)` on `L²(s, ∞)` by Nyström discretization.
//!
//! Nodes are Gauss–Legendre points pulled back through `x = s + L(1+u)/(1−u)`.
//! The crossover kernel is never tabulated entry by entry: with `t`-quadrature
//! nodes `t_k` and weights `τ_k`,
//!
//! ```text
//! √w_i K̃(x_i, x_j) √w_j ≈ Σ_k P_ik τ_k w_μ(t_k) Q_kj,
//! P_ik = √w_i Ai^Γ(x_i + t_k),  Q_kj = Ai_Γ(x_j + t_k) √w_j,
//! ```
//!
//! so `P` and `Q` are built once per `(T, s, n)` and reused for every `μ̃`.

use nalgebra::DMatrix;
use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::deformed_airy::{airy_classical, airy_classical_prime, AiryConfig, DeformedAiry};
use crate::error::{Error, Result};
use crate::linalg::{fredholm_parts, DetMethod, DetParts};
use crate::operator::{crossover_weight, CrossoverKernel, HSReport, KernelOptions, KernelSpec};
use crate::quadrature::GaussLegendre;

type C64 = Complex<f64>;

/// `x = s + L(1+u)/(1−u)`, `u ∈ (−1, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainMap {
    pub s: f64,
    pub scale: f64,
}

impl DomainMap {
    pub fn new(s: f64, scale: f64) -> Result<Self> {
        if !(s.is_finite() && scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidArgument(format!("bad domain map s = {s}, L = {scale}")));
        }
        Ok(DomainMap { s, scale })
    }

    pub fn x(&self, u: f64) -> f64 {
        self.s + self.scale * (1.0 + u) / (1.0 - u)
    }

    pub fn jacobian(&self, u: f64) -> f64 {
        2.0 * self.scale / ((1.0 - u) * (1.0 - u))
    }

    pub fn describe(&self) -> String {
        format!("x = {} + {}(1+u)/(1-u)", self.s, self.scale)
    }
}

/// Mapped Gauss–Legendre rule on `(s, ∞)`; nodes strictly increasing, weights positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NystromGrid {
    pub n: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub map: DomainMap,
}

impl NystromGrid {
    pub fn new(map: DomainMap, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("Nystrom grid needs at least one node".into()));
        }
        let gl = GaussLegendre::<f64>::new(n);
        let nodes = gl.nodes.iter().map(|&u| map.x(u)).collect();
        let weights = gl.nodes.iter().zip(&gl.weights).map(|(&u, &w)| w * map.jacobian(u)).collect();
        Ok(NystromGrid { n, nodes, weights, map })
    }

    /// `Σ w_i f(x_i)`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetOptions {
    /// Convergence: `|det(n) − det(n/2)| ≤ det_tol·min(1, |det(n) − 1|)`.
    pub det_tol: f64,
    pub n_min: usize,
    pub n_max: usize,
    /// Map scale `L`; `None` selects `max(1, 10/κ_T)` for the crossover kernel and 2 for the Airy kernel.
    pub scale: Option<f64>,
}

impl Default for DetOptions {
    fn default() -> Self {
        DetOptions { det_tol: 1e-8, n_min: 16, n_max: 1024, scale: None }
    }
}

impl DetOptions {
    pub fn validate(&self) -> Result<()> {
        let pow2 = |n: usize| n >= 8 && n.is_power_of_two();
        if !pow2(self.n_min) || !pow2(self.n_max) || self.n_min > self.n_max || self.n_max > 1024 {
            return Err(Error::InvalidArgument(format!(
                "node counts must be powers of two with 8 <= n_min <= n_max <= 1024, got {} and {}",
                self.n_min, self.n_max
            )));
        }
        if !(self.det_tol > 0.0) {
            return Err(Error::InvalidArgument("det_tol must be positive".into()));
        }
        if let Some(l) = self.scale {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::InvalidArgument(format!("map scale must be positive, got {l}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetStep {
    pub n: usize,
    pub det: C64,
    pub det_minus_one: C64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetResult {
    pub det: C64,
    pub det_minus_one: C64,
    pub n: usize,
    /// Aitken Δ² extrapolation of the last three node-doubling values (last value if fewer).
    pub richardson_estimate: C64,
    pub converged: bool,
    pub method: DetMethod,
    pub history: Vec<DetStep>,
}

impl DetResult {
    /// `|det(n) − det(n/2)|` of the last doubling, if any.
    pub fn last_difference(&self) -> Option<f64> {
        let h = &self.history;
        (h.len() >= 2).then(|| (h[h.len() - 1].det_minus_one - h[h.len() - 2].det_minus_one).norm())
    }

    /// Ratios `|Δ_{k−1}| / |Δ_k|` of successive doubling differences.
    pub fn convergence_factors(&self) -> Vec<f64> {
        let d: Vec<f64> = self.history.windows(2).map(|w| (w[1].det_minus_one - w[0].det_minus_one).norm()).collect();
        d.windows(2).map(|w| w[0] / w[1]).collect()
    }
}

fn aitken(a: C64, b: C64, c: C64) -> C64 {
    let d1 = b - a;
    let d2 = c - b;
    let den = d2 - d1;
    if den.norm() <= 1e-300 || den.norm() < 1e-12 * d2.norm() {
        return c;
    }
    c - d2 * d2 / den
}

/// Node doubling driver: `step(n)` returns the determinant parts at `n` nodes.
pub fn doubling(opts: &DetOptions, mut step: impl FnMut(usize) -> Result<DetParts<f64>>) -> Result<DetResult> {
    opts.validate()?;
    let mut history: Vec<DetStep> = vec![];
    let mut n = opts.n_min;
    loop {
        let parts = step(n)?;
        let method = parts.method;
        history.push(DetStep { n, det: parts.det, det_minus_one: parts.det_minus_one });
        let converged = if history.len() >= 2 {
            let (a, b) = (history[history.len() - 2], history[history.len() - 1]);
            (b.det_minus_one - a.det_minus_one).norm() <= opts.det_tol * b.det_minus_one.norm().min(1.0)
        } else {
            false
        };
        if converged || n >= opts.n_max {
            let last = history[history.len() - 1];
            let rich = if history.len() >= 3 {
                let h = &history[history.len() - 3..];
                aitken(h[0].det_minus_one, h[1].det_minus_one, h[2].det_minus_one) + C64::new(1.0, 0.0)
            } else {
                last.det
            };
            return Ok(DetResult {
                det: last.det,
                det_minus_one: last.det_minus_one,
                n: last.n,
                richardson_estimate: rich,
                converged,
                method,
                history,
            });
        }
        n *= 2;
    }
}

/// `√w_i K(x_i, x_j) √w_j` on `grid`.
pub fn weighted_matrix(grid: &NystromGrid, kernel: impl Fn(f64, f64) -> Result<C64> + Sync) -> Result<DMatrix<C64>> {
    let n = grid.n;
    let rows: Vec<Vec<C64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| {
                    let k = kernel(grid.nodes[i], grid.nodes[j])?;
                    Ok(k * (grid.weights[i] * grid.weights[j]).sqrt())
                })
                .collect::<Result<Vec<C64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

/// `det(I − K)` on `L²(s, ∞)` for a pointwise kernel, doubling `n` until converged.
pub fn nystrom_det_kernel(
    kernel: impl Fn(f64, f64) -> Result<C64> + Sync,
    s: f64,
    opts: &DetOptions,
) -> Result<DetResult> {
    let map = DomainMap::new(s, opts.scale.unwrap_or(1.0))?;
    doubling(opts, |n| {
        let grid = NystromGrid::new(map, n)?;
        Ok(fredholm_parts(&weighted_matrix(&grid, &kernel)?))
    })
}

/// `t`-quadrature for the crossover kernel: unit panels of 16-point Gauss–Legendre.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TGrid {
    pub lo: f64,
    pub hi: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl TGrid {
    /// `[−s − 40/κ, (max(s,0)^{3/2} + 60)^{2/3} − s]`: beyond it `|w_μ|` carries `e^{−40}`
    /// relative to the kernel scale on the left and `Ai_Γ` carries `e^{−40}` on the right.
    pub fn for_crossover(s: f64, kappa: f64) -> Self {
        let lo = -s - 40.0 / kappa;
        let hi = (s.max(0.0).powf(1.5) + 60.0).powf(2.0 / 3.0) - s;
        Self::panels(lo, hi)
    }

    pub fn panels(lo: f64, hi: f64) -> Self {
        let rule = crate::quadrature::panel_rule();
        let m = ((hi - lo).ceil() as usize).max(1);
        let h = (hi - lo) / m as f64;
        let mut nodes = Vec::with_capacity(m * rule.len());
        let mut weights = Vec::with_capacity(m * rule.len());
        for p in 0..m {
            let a = lo + h * p as f64;
            for (&u, &w) in rule.nodes.iter().zip(&rule.weights) {
                nodes.push(a + 0.5 * h * (u + 1.0));
                weights.push(0.5 * h * w);
            }
        }
        TGrid { lo, hi, nodes, weights }
    }
}

/// Factor matrices of the crossover kernel at one `(T, s, n)`.
#[derive(Debug, Clone)]
pub struct FactorizedCrossover {
    pub grid: NystromGrid,
    pub tgrid: TGrid,
    kappa: f64,
    /// `n × m`
    p: DMatrix<f64>,
    /// `m × n`
    q: DMatrix<f64>,
    /// `τ_k Σ_i P_ik Q_ki`
    diag_pq: Vec<f64>,
}

impl FactorizedCrossover {
    pub fn new(airy: &DeformedAiry, s: f64, n: usize, scale: f64) -> Result<Self> {
        let kappa = airy.kappa();
        let grid = NystromGrid::new(DomainMap::new(s, scale)?, n)?;
        let tgrid = TGrid::for_crossover(s, kappa);
        let m = tgrid.nodes.len();
        let rows: Vec<(Vec<f64>, Vec<f64>)> = (0..n)
            .into_par_iter()
            .map(|i| {
                let (x, sw) = (grid.nodes[i], grid.weights[i].sqrt());
                let mut up = Vec::with_capacity(m);
                let mut lo = Vec::with_capacity(m);
                for &t in &tgrid.nodes {
                    up.push(sw * airy.upper(x + t).map_err(|e| e.at(x + t, airy.time()))?);
                    lo.push(sw * airy.lower(x + t).map_err(|e| e.at(x + t, airy.time()))?);
                }
                Ok((up, lo))
            })
            .collect::<Result<Vec<_>>>()?;
        let p = DMatrix::from_fn(n, m, |i, k| rows[i].0[k]);
        let q = DMatrix::from_fn(m, n, |k, j| rows[j].1[k]);
        let diag_pq = (0..m).map(|k| tgrid.weights[k] * (0..n).map(|i| p[(i, k)] * q[(k, i)]).sum::<f64>()).collect();
        Ok(FactorizedCrossover { grid, tgrid, kappa, p, q, diag_pq })
    }

    pub fn n(&self) -> usize {
        self.grid.n
    }

    /// `√w_i K̃_μ(x_i, x_j) √w_j`.
    pub fn matrix(&self, mu: C64) -> Result<DMatrix<C64>> {
        let spec = KernelSpec::new(2.0 * self.kappa.powi(3), mu, self.grid.map.s);
        let m = self.tgrid.nodes.len();
        let mut d = Vec::with_capacity(m);
        for k in 0..m {
            d.push(crossover_weight(self.tgrid.nodes[k], &spec)? * self.tgrid.weights[k]);
        }
        let mut pr = self.p.clone();
        let mut pi = self.p.clone();
        for (k, dk) in d.iter().enumerate() {
            pr.column_mut(k).scale_mut(dk.re);
            pi.column_mut(k).scale_mut(dk.im);
        }
        let kr = &pr * &self.q;
        let ki = &pi * &self.q;
        Ok(DMatrix::from_fn(self.grid.n, self.grid.n, |i, j| C64::new(kr[(i, j)], ki[(i, j)])))
    }

    pub fn parts(&self, mu: C64) -> Result<DetParts<f64>> {
        Ok(fredholm_parts(&self.matrix(mu)?))
    }

    /// `(2πi)⁻¹∮ e^{−μ̃}/μ̃ · tr K̃_μ dμ̃ = Σ_k τ_k e^{−e^{−κt_k}} Σ_i P_ik Q_ki` (counterclockwise around `(0, ∞)`).
    pub fn linear_term(&self) -> f64 {
        self.tgrid.nodes.iter().zip(&self.diag_pq).map(|(&t, &d)| d * (-(-self.kappa * t).exp()).exp()).sum()
    }
}

/// Default map scale `max(1, 10/κ_T)`.
pub fn crossover_scale(kappa: f64) -> f64 {
    (10.0 / kappa).max(1.0)
}

/// `det(I − K̃_{T,μ̃})` on `L²(s, ∞)` with node doubling.
pub fn nystrom_det(spec: &KernelSpec, opts: &DetOptions, cfg: &AiryConfig) -> Result<DetResult> {
    spec.validate(cfg)?;
    let airy = DeformedAiry::shared(spec.t, cfg)?;
    let scale = opts.scale.unwrap_or_else(|| crossover_scale(airy.kappa()));
    doubling(opts, |n| FactorizedCrossover::new(&airy, spec.s, n, scale)?.parts(spec.mu))
}

/// Classical Airy kernel `(Ai(x)Ai′(y) − Ai′(x)Ai(y))/(x − y)`, diagonal `Ai′(x)² − xAi(x)²`.
pub fn airy_kernel(x: f64, y: f64) -> Result<f64> {
    let (ax, dx) = airy_pair(x)?;
    let (ay, dy) = airy_pair(y)?;
    Ok(airy_kernel_from(x, ax, dx, y, ay, dy))
}

fn airy_kernel_from(x: f64, ax: f64, dx: f64, y: f64, ay: f64, dy: f64) -> f64 {
    if (x - y).abs() < 1e-10 * (1.0 + x.abs()) {
        dx * dx - x * ax * ax
    } else {
        (ax * dy - dx * ay) / (x - y)
    }
}

/// `(Ai(x), Ai′(x))`; both underflow to zero beyond `x = 120`.
fn airy_pair(x: f64) -> Result<(f64, f64)> {
    if x > 120.0 {
        return Ok((0.0, 0.0));
    }
    Ok((airy_classical(x)?, airy_classical_prime(x)?))
}

/// `F₂(s) = det(I − K_Ai)` on `L²(s, ∞)`.
pub fn airy_kernel_det(s: f64, opts: &DetOptions) -> Result<DetResult> {
    let map = DomainMap::new(s, opts.scale.unwrap_or(2.0))?;
    doubling(opts, |n| airy_kernel_parts(map, n))
}

/// `det(I − K_Ai)` at a fixed node count.
pub fn airy_kernel_parts(map: DomainMap, n: usize) -> Result<DetParts<f64>> {
    let grid = NystromGrid::new(map, n)?;
    let vals: Vec<(f64, f64)> = grid.nodes.par_iter().map(|&x| airy_pair(x)).collect::<Result<_>>()?;
    let m = DMatrix::from_fn(n, n, |i, j| {
        let k = airy_kernel_from(grid.nodes[i], vals[i].0, vals[i].1, grid.nodes[j], vals[j].0, vals[j].1);
        C64::new(k * (grid.weights[i] * grid.weights[j]).sqrt(), 0.0)
    });
    Ok(fredholm_parts(&m))
}

/// Both sides of `|det(I − K̃) − 1| ≤ ‖A₁‖₂‖A₂‖₂ e^{‖A₁‖₂‖A₂‖₂ + 1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetBoundReport {
    pub spec: KernelSpec,
    pub lhs: f64,
    pub rhs: f64,
    pub hs: HSReport,
    pub det: DetResult,
    /// Determinant discretization error plus the propagated HS quadrature error.
    pub numerical_error: f64,
    /// `lhs / rhs` (0 when both vanish).
    pub slack_ratio: f64,
    pub passed: bool,
}

pub fn det_bound_check(spec: &KernelSpec, opts: &DetOptions, cfg: &AiryConfig) -> Result<DetBoundReport> {
    let det = nystrom_det(spec, opts, cfg)?;
    let kernel = CrossoverKernel::new(*spec, cfg, KernelOptions::default())?;
    let hs = kernel.hs_norms()?;
    let p = hs.product;
    let rhs = p * (p + 1.0).exp();
    let lhs = det.det_minus_one.norm();
    // d(p e^{p+1})/dp = (1 + p)e^{p+1}; relative error of p is half the relative errors of the squared norms.
    let a1_sq = hs.norm_a1 * hs.norm_a1;
    let a2_over = hs.split.i1 + hs.split.i2;
    let rel_p = 0.5 * (hs.a1_sq_error / a1_sq.max(1e-300) + (hs.i1_error + hs.i2_error) / a2_over.max(1e-300));
    let det_err = det.last_difference().unwrap_or(0.0);
    let numerical_error = det_err + (1.0 + p) * (p + 1.0).exp() * p * rel_p;
    let slack_ratio = if rhs > 0.0 { lhs / rhs } else { 0.0 };
    let passed = lhs <= rhs + numerical_error;
    Ok(DetBoundReport { spec: *spec, lhs, rhs, hs, det, numerical_error, slack_ratio, passed })
}
