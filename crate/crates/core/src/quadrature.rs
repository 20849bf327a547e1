//! Gauss–Legendre rules and an adaptive bisection engine built on them.

use std::ops::{Add, Mul, Sub};
use std::sync::OnceLock;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre<F> {
    pub nodes: Vec<F>,
    pub weights: Vec<F>,
}

fn legendre_rule_f64(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
                p1 = x;
            }
            dp = nf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

impl<F: Scalar> GaussLegendre<F> {
    /// `n`-point rule; nodes by Newton iteration on the Legendre recurrence.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let (x, w) = legendre_rule_f64(n);
        GaussLegendre {
            nodes: x.into_iter().map(F::c).collect(),
            weights: w.into_iter().map(F::c).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Applies the rule on `[a, b]`.
    pub fn apply<V: QuadValue<F>>(&self, a: F, b: F, mut f: impl FnMut(F) -> V) -> V {
        let half = F::c(0.5);
        let (mid, rad) = ((a + b) * half, (b - a) * half);
        let mut acc = V::zero();
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc = acc + f(mid + rad * x) * (w * rad);
        }
        acc
    }

    /// Applies the rule and also returns the same rule applied to `|f|`.
    pub fn apply_with_magnitude<V: QuadValue<F>>(&self, a: F, b: F, mut f: impl FnMut(F) -> V) -> (V, F) {
        let half = F::c(0.5);
        let (mid, rad) = ((a + b) * half, (b - a) * half);
        let mut acc = V::zero();
        let mut mag = F::zero();
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            let v = f(mid + rad * x);
            acc = acc + v * (w * rad);
            mag = mag + v.magnitude() * (w * rad).abs();
        }
        (acc, mag)
    }
}

/// Panel rule used by the adaptive engine.
pub const PANEL_ORDER: usize = 16;

/// Shared 16-point rule in `f64`.
pub fn panel_rule() -> &'static GaussLegendre<f64> {
    static RULE: OnceLock<GaussLegendre<f64>> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(PANEL_ORDER))
}

/// Values the adaptive engine can accumulate: real or complex scalars.
pub trait QuadValue<F: Scalar>:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<F, Output = Self>
{
    fn zero() -> Self;
    fn magnitude(self) -> F;
    fn is_finite_value(self) -> bool;
}

impl<F: Scalar> QuadValue<F> for F {
    fn zero() -> Self {
        F::zero()
    }
    fn magnitude(self) -> F {
        self.abs()
    }
    fn is_finite_value(self) -> bool {
        self.is_finite()
    }
}

impl<F: Scalar> QuadValue<F> for Complex<F> {
    fn zero() -> Self {
        Complex::new(F::zero(), F::zero())
    }
    fn magnitude(self) -> F {
        self.norm()
    }
    fn is_finite_value(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

/// Tolerances and limits for adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Maximum integrand evaluations per interval.
    pub max_nodes: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        AdaptiveOptions { abs_tol: 1e-10, rel_tol: 0.0, max_nodes: 1 << 14 }
    }
}

impl AdaptiveOptions {
    pub fn with_abs(abs_tol: f64) -> Self {
        AdaptiveOptions { abs_tol, ..Default::default() }
    }

    pub fn with_tols(abs_tol: f64, rel_tol: f64) -> Self {
        AdaptiveOptions { abs_tol, rel_tol, ..Default::default() }
    }
}

/// Outcome of one adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Adaptive<V> {
    pub value: V,
    pub error: f64,
    pub nodes: usize,
}

/// Non-convergence detail: best estimate, its error and the evaluation count.
#[derive(Debug, Clone, Copy)]
pub struct AdaptiveFailure<V> {
    pub best: V,
    pub error: f64,
    pub nodes: usize,
}

const ROUNDOFF_FACTOR: f64 = 64.0;

struct Panel<F, V> {
    lo: F,
    hi: F,
    left: V,
    right: V,
    /// `|left + right − coarse|`.
    err: f64,
    /// Error still counted against the tolerance: 0 once at rounding level or minimal width.
    live: f64,
}

/// Global adaptive bisection of `[a, b]` with 16-point panels.
///
/// Each panel's error is the disagreement between its 16-point value and the
/// sum over its two halves. The panel with the largest error is split until the
/// total is below `max(abs_tol, rel_tol·|estimate|)`. Panels whose disagreement
/// is at the rounding level of `∫|f|` stop counting. Panels are summed in
/// position order, so results do not depend on traversal details.
pub fn adaptive<F, V, G>(
    mut f: G,
    a: F,
    b: F,
    opts: &AdaptiveOptions,
) -> std::result::Result<Adaptive<V>, AdaptiveFailure<V>>
where
    F: Scalar,
    V: QuadValue<F>,
    G: FnMut(F) -> V,
{
    let rule: GaussLegendre<F> = if std::any::TypeId::of::<F>() == std::any::TypeId::of::<f64>() {
        let r = panel_rule();
        GaussLegendre {
            nodes: r.nodes.iter().map(|&x| F::c(x)).collect(),
            weights: r.weights.iter().map(|&x| F::c(x)).collect(),
        }
    } else {
        GaussLegendre::new(PANEL_ORDER)
    };
    let order = rule.len();
    let half = F::c(0.5);
    let min_width = (b - a).abs() * F::c(1e-13);
    let mut nodes = 0usize;
    let mut finite = true;
    let whole = rule.apply(a, b, &mut f);
    nodes += order;
    let mut make = |lo: F, hi: F, coarse: V, nodes: &mut usize, finite: &mut bool| -> Panel<F, V> {
        let mid = (lo + hi) * half;
        let (left, lm) = rule.apply_with_magnitude(lo, mid, &mut f);
        let (right, rm) = rule.apply_with_magnitude(mid, hi, &mut f);
        *nodes += 2 * order;
        let refined = left + right;
        if !refined.is_finite_value() || !coarse.is_finite_value() {
            *finite = false;
        }
        let err = (refined - coarse).magnitude().to_f64_lossy();
        let noise = ROUNDOFF_FACTOR * f64::EPSILON * (lm + rm).to_f64_lossy();
        let live = if err <= noise || (hi - lo).abs() <= min_width { 0.0 } else { err };
        Panel { lo, hi, left, right, err, live }
    };
    let first = make(a, b, whole, &mut nodes, &mut finite);
    let mut panels: Vec<Panel<F, V>> = vec![first];
    let mut heap: std::collections::BinaryHeap<(Key, usize)> = std::collections::BinaryHeap::new();
    heap.push((Key(panels[0].live), 0));
    let mut live_total = panels[0].live;
    let mut estimate = panels[0].left + panels[0].right;
    let collect = |panels: &[Panel<F, V>]| {
        let mut order_idx: Vec<usize> = (0..panels.len()).collect();
        order_idx.sort_by(|&i, &j| panels[i].lo.partial_cmp(&panels[j].lo).unwrap_or(std::cmp::Ordering::Equal));
        let value = order_idx.iter().fold(V::zero(), |acc, &i| acc + panels[i].left + panels[i].right);
        let error = panels.iter().map(|p| p.err).sum::<f64>();
        (value, error)
    };
    loop {
        if !finite {
            return Err(AdaptiveFailure { best: estimate, error: f64::INFINITY, nodes });
        }
        let tol = opts.abs_tol.max(opts.rel_tol * estimate.magnitude().to_f64_lossy());
        if live_total <= tol {
            let (value, error) = collect(&panels);
            return Ok(Adaptive { value, error, nodes });
        }
        if nodes + 4 * order > opts.max_nodes {
            let (best, error) = collect(&panels);
            return Err(AdaptiveFailure { best, error, nodes });
        }
        let Some((_, idx)) = heap.pop() else {
            let (value, error) = collect(&panels);
            return Ok(Adaptive { value, error, nodes });
        };
        let (lo, hi, left, right, live) = {
            let p = &panels[idx];
            (p.lo, p.hi, p.left, p.right, p.live)
        };
        let mid = (lo + hi) * half;
        let pl = make(lo, mid, left, &mut nodes, &mut finite);
        let pr = make(mid, hi, right, &mut nodes, &mut finite);
        live_total = (live_total - live).max(0.0) + pl.live + pr.live;
        estimate = estimate - (left + right) + (pl.left + pl.right) + (pr.left + pr.right);
        let (ll, rl) = (pl.live, pr.live);
        panels[idx] = pl;
        panels.push(pr);
        let j = panels.len() - 1;
        if ll > 0.0 {
            heap.push((Key(ll), idx));
        }
        if rl > 0.0 {
            heap.push((Key(rl), j));
        }
    }
}

/// Total order on panel errors for the priority queue.
#[derive(PartialEq)]
struct Key(f64);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Adaptive integration of a real function on `[a, b]`.
pub fn integrate_real(
    f: impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    opts: &AdaptiveOptions,
) -> Result<Adaptive<f64>> {
    adaptive(f, a, b, opts).map_err(|e| Error::QuadratureNonConvergence {
        segment: 0,
        nodes: e.nodes,
        best_re: e.best,
        best_im: 0.0,
        error: e.error,
    })
}

/// Adaptive integration on `[a, ∞)` through `x = a + L·u/(1−u)`.
///
/// The integrand must decay fast enough for the map's endpoint singularity to be harmless.
pub fn integrate_real_semi_infinite(
    mut f: impl FnMut(f64) -> f64,
    a: f64,
    scale: f64,
    opts: &AdaptiveOptions,
) -> Result<Adaptive<f64>> {
    let g = |u: f64| {
        let d = 1.0 - u;
        let x = a + scale * u / d;
        let v = f(x);
        if v == 0.0 {
            0.0
        } else {
            v * scale / (d * d)
        }
    };
    integrate_real(g, 0.0, 1.0, opts)
}

/// Adaptive integration of a complex function of a real variable on `[a, b]`.
pub fn integrate_complex_line(
    f: impl FnMut(f64) -> Complex<f64>,
    a: f64,
    b: f64,
    opts: &AdaptiveOptions,
) -> Result<Adaptive<Complex<f64>>> {
    adaptive(f, a, b, opts).map_err(|e| Error::QuadratureNonConvergence {
        segment: 0,
        nodes: e.nodes,
        best_re: e.best.re,
        best_im: e.best.im,
        error: e.error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        let rule: GaussLegendre<f64> = GaussLegendre::new(8);
        let v = rule.apply(-1.0, 2.0, |x: f64| x.powi(15) + 3.0 * x.powi(2));
        let exact = (2f64.powi(16) - 1.0) / 16.0 + 9.0;
        assert!((v - exact).abs() < 1e-10 * exact);
        let w: f64 = rule.weights.iter().sum();
        assert!((w - 2.0).abs() < 1e-14);
    }

    #[test]
    fn large_rules_have_unit_measure() {
        for n in [64usize, 513, 1024] {
            let rule: GaussLegendre<f64> = GaussLegendre::new(n);
            let w: f64 = rule.weights.iter().sum();
            assert!((w - 2.0).abs() < 1e-12, "n = {n}");
            assert!(rule.nodes.windows(2).all(|p| p[0] < p[1]));
        }
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        let opts = AdaptiveOptions::with_abs(1e-12);
        let r = integrate_real(|x| 1.0 / (1e-4 + x * x), -1.0, 1.0, &opts).unwrap();
        let exact = 2.0 * (1.0f64 / 1e-2).atan() / 1e-2;
        assert!((r.value - exact).abs() < 1e-9, "{} vs {}", r.value, exact);
    }

    #[test]
    fn semi_infinite_exponential() {
        let opts = AdaptiveOptions::with_tols(1e-14, 1e-12);
        let r = integrate_real_semi_infinite(|x| (-2.0 * x).exp(), 0.0, 1.0, &opts).unwrap();
        assert!((r.value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn f32_rule_works() {
        let rule: GaussLegendre<f32> = GaussLegendre::new(16);
        let v = rule.apply(0.0f32, 1.0f32, |x| x * x);
        assert!((v - 1.0 / 3.0).abs() < 1e-6);
    }
}
