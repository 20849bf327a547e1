//! Empirical envelope constants for the deformed Airy functions.
//!
//! Three envelopes, each up to a constant `C` that may depend only on `T₀`:
//!
//! ```text
//! upper_all_x:  |Ai^Γ(x)| ≤ C T^{1/3}                              x ∈ ℝ
//! lower_pos_x:  |Ai_Γ(x)| ≤ C T^{−1/3} e^{−(2/3)x^{3/2}}             x ≥ 0
//! lower_neg_x:  |Ai_Γ(x)| ≤ C T^{−1/3} e^{2κ_T^{−1}|x|^{1/2}}        x ≤ 0
//! ```
//!
//! Ratios are formed in log space so that the super-exponential factors never
//! underflow.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::deformed_airy::{ai_lower_gamma, ai_upper_gamma, kappa_of, AiryConfig, DeformedAiryParams};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvelopeKind {
    UpperAllX,
    LowerPosX,
    LowerNegX,
}

impl std::str::FromStr for EnvelopeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "upper_all_x" => Ok(EnvelopeKind::UpperAllX),
            "lower_pos_x" => Ok(EnvelopeKind::LowerPosX),
            "lower_neg_x" => Ok(EnvelopeKind::LowerNegX),
            _ => Err(Error::InvalidArgument(format!("unknown envelope '{s}'"))),
        }
    }
}

impl EnvelopeKind {
    pub const ALL: [EnvelopeKind; 3] = [EnvelopeKind::UpperAllX, EnvelopeKind::LowerPosX, EnvelopeKind::LowerNegX];

    pub fn name(self) -> &'static str {
        match self {
            EnvelopeKind::UpperAllX => "upper_all_x",
            EnvelopeKind::LowerPosX => "lower_pos_x",
            EnvelopeKind::LowerNegX => "lower_neg_x",
        }
    }
}

/// An envelope shape together with its domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeSpec {
    pub which: EnvelopeKind,
}

impl EnvelopeSpec {
    pub fn new(which: EnvelopeKind) -> Self {
        EnvelopeSpec { which }
    }

    pub fn in_domain(&self, x: f64) -> bool {
        match self.which {
            EnvelopeKind::UpperAllX => x.is_finite(),
            EnvelopeKind::LowerPosX => x >= 0.0,
            EnvelopeKind::LowerNegX => x <= 0.0,
        }
    }

    /// `ln envelope(x, T)`.
    pub fn log_envelope(&self, x: f64, t: f64) -> f64 {
        let third = t.ln() / 3.0;
        match self.which {
            EnvelopeKind::UpperAllX => third,
            EnvelopeKind::LowerPosX => -third - 2.0 / 3.0 * x.max(0.0).powf(1.5),
            EnvelopeKind::LowerNegX => -third + 2.0 / kappa_of(t) * x.abs().sqrt(),
        }
    }

    pub fn envelope(&self, x: f64, t: f64) -> f64 {
        self.log_envelope(x, t).exp()
    }

    /// The deformed Airy value the envelope bounds.
    pub fn evaluate(&self, x: f64, t: f64, cfg: &AiryConfig) -> Result<f64> {
        let p = DeformedAiryParams::from_time(x, t);
        match self.which {
            EnvelopeKind::UpperAllX => Ok(ai_upper_gamma(&p, cfg)?.value),
            _ => Ok(ai_lower_gamma(&p, cfg)?.value),
        }
    }
}

/// One grid point of a scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeRow {
    pub x: f64,
    #[serde(rename = "T")]
    pub t: f64,
    pub value: f64,
    pub envelope: f64,
    /// `|value| / envelope`, computed in log space.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridDescription {
    pub x_min: f64,
    pub x_max: f64,
    pub x_points: usize,
    #[serde(rename = "T_values")]
    pub t_values: Vec<f64>,
}

/// Worst-case ratio restricted to one `T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerTime {
    #[serde(rename = "T")]
    pub t: f64,
    pub empirical_c: f64,
    pub argmax_x: f64,
    pub monotone_tail_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeReport {
    pub which: EnvelopeKind,
    #[serde(rename = "empirical_C")]
    pub empirical_c: f64,
    /// `(x, T)` of the largest ratio; ties go to the lexicographically smallest point.
    pub argmax: (f64, f64),
    pub grid: GridDescription,
    /// For every `T`, the largest ratio on the outer half of the largest decade of `|x|`
    /// is at most `1 + TAIL_SLACK` times the largest ratio on its inner half.
    pub monotone_tail_ok: bool,
    pub per_time: Vec<PerTime>,
    pub rows: Vec<EnvelopeRow>,
}

/// Relative slack in the tail monotonicity test.
pub const TAIL_SLACK: f64 = 0.01;

/// A ratio above `(1 + REFINE_SLACK)·C` on the refined grid counts as a violation.
pub const REFINE_SLACK: f64 = 0.05;

fn sorted_unique(v: &[f64]) -> Vec<f64> {
    let mut out = v.to_vec();
    out.sort_by(|a, b| a.total_cmp(b));
    out.dedup();
    out
}

fn validate_grids(spec: &EnvelopeSpec, x_grid: &[f64], t_grid: &[f64], cfg: &AiryConfig) -> Result<()> {
    if x_grid.is_empty() || t_grid.is_empty() {
        return Err(Error::InvalidArgument("envelope grids must be non-empty".into()));
    }
    if let Some(&x) = x_grid.iter().find(|&&x| !spec.in_domain(x) || x.abs() > 100.0) {
        return Err(Error::InvalidArgument(format!("x = {x} outside the {} domain", spec.which.name())));
    }
    if let Some(&t) = t_grid.iter().find(|&&t| !(t >= cfg.t0) || !t.is_finite()) {
        return Err(Error::InvalidArgument(format!("T = {t} below T0 = {}", cfg.t0)));
    }
    Ok(())
}

fn lexi_max(rows: &[EnvelopeRow]) -> Option<&EnvelopeRow> {
    rows.iter().reduce(|best, r| {
        let better = r.ratio > best.ratio
            || (r.ratio == best.ratio && (r.x, r.t).partial_cmp(&(best.x, best.t)) == Some(std::cmp::Ordering::Less));
        if better {
            r
        } else {
            best
        }
    })
}

fn tail_monotone(rows: &[&EnvelopeRow]) -> bool {
    let amax = rows.iter().map(|r| r.x.abs()).fold(0.0, f64::max);
    if amax == 0.0 {
        return true;
    }
    let (lo, split) = (amax / 10.0, amax * 0.55);
    let max_in = |a: f64, b: f64| {
        rows.iter().filter(|r| r.x.abs() >= a && r.x.abs() <= b).map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max)
    };
    let inner = max_in(lo, split);
    let outer = max_in(split, amax);
    !inner.is_finite() || !outer.is_finite() || outer <= (1.0 + TAIL_SLACK) * inner
}

fn scan(spec: &EnvelopeSpec, x_grid: &[f64], t_grid: &[f64], cfg: &AiryConfig) -> Result<Vec<EnvelopeRow>> {
    let points: Vec<(f64, f64)> = t_grid.iter().flat_map(|&t| x_grid.iter().map(move |&x| (x, t))).collect();
    points
        .par_iter()
        .map(|&(x, t)| {
            let value = spec.evaluate(x, t, cfg).map_err(|e| e.at(x, t))?;
            let log_env = spec.log_envelope(x, t);
            let ratio = if value == 0.0 { 0.0 } else { (value.abs().ln() - log_env).exp() };
            if !ratio.is_finite() {
                return Err(Error::NonFiniteIntegrand { re: value, im: 0.0 }.at(x, t));
            }
            Ok(EnvelopeRow { x, t, value, envelope: log_env.exp(), ratio })
        })
        .collect()
}

/// Largest `|value|/envelope` over the product grid `x_grid × t_grid`.
pub fn certify_envelope(spec: &EnvelopeSpec, x_grid: &[f64], t_grid: &[f64], cfg: &AiryConfig) -> Result<EnvelopeReport> {
    validate_grids(spec, x_grid, t_grid, cfg)?;
    let xs = sorted_unique(x_grid);
    let ts = sorted_unique(t_grid);
    let rows = scan(spec, &xs, &ts, cfg)?;
    let best = lexi_max(&rows).expect("non-empty grid");
    let per_time: Vec<PerTime> = ts
        .iter()
        .map(|&t| {
            let sub: Vec<&EnvelopeRow> = rows.iter().filter(|r| r.t == t).collect();
            let owned: Vec<EnvelopeRow> = sub.iter().map(|r| **r).collect();
            let b = lexi_max(&owned).expect("non-empty row set");
            PerTime { t, empirical_c: b.ratio, argmax_x: b.x, monotone_tail_ok: tail_monotone(&sub) }
        })
        .collect();
    Ok(EnvelopeReport {
        which: spec.which,
        empirical_c: best.ratio,
        argmax: (best.x, best.t),
        grid: GridDescription { x_min: xs[0], x_max: xs[xs.len() - 1], x_points: xs.len(), t_values: ts.clone() },
        monotone_tail_ok: per_time.iter().all(|p| p.monotone_tail_ok),
        per_time,
        rows,
    })
}

/// Coarse scan, then a scan with every x-gap bisected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementReport {
    pub coarse: EnvelopeReport,
    #[serde(rename = "refined_C")]
    pub refined_c: f64,
    /// `|C_refined − C_coarse| / C_coarse`.
    pub drift: f64,
    /// Refined points with ratio above `(1 + REFINE_SLACK)·C_coarse`.
    pub violations: usize,
    pub stable: bool,
}

/// Inserts the midpoint of every consecutive pair of the sorted grid.
pub fn bisect_grid(x_grid: &[f64]) -> Vec<f64> {
    let xs = sorted_unique(x_grid);
    let mut out = Vec::with_capacity(2 * xs.len());
    for w in xs.windows(2) {
        out.push(w[0]);
        out.push(0.5 * (w[0] + w[1]));
    }
    out.extend(xs.last());
    out
}

pub fn certify_with_refinement(
    spec: &EnvelopeSpec,
    x_grid: &[f64],
    t_grid: &[f64],
    cfg: &AiryConfig,
) -> Result<RefinementReport> {
    let coarse = certify_envelope(spec, x_grid, t_grid, cfg)?;
    let fine_x = bisect_grid(x_grid);
    let mids: Vec<f64> = fine_x.iter().copied().filter(|x| !coarse.rows.iter().any(|r| r.x == *x)).collect();
    let ts = sorted_unique(t_grid);
    let fine_rows = if mids.is_empty() { vec![] } else { scan(spec, &mids, &ts, cfg)? };
    let c = coarse.empirical_c;
    let refined_c = fine_rows.iter().map(|r| r.ratio).fold(c, f64::max);
    let violations = fine_rows.iter().filter(|r| r.ratio > (1.0 + REFINE_SLACK) * c).count();
    let drift = if c > 0.0 { (refined_c - c).abs() / c } else { 0.0 };
    Ok(RefinementReport { coarse, refined_c, drift, violations, stable: drift < REFINE_SLACK && violations == 0 })
}

fn linspace(a: f64, b: f64, step: f64) -> Vec<f64> {
    let n = ((b - a) / step).round() as usize;
    (0..=n).map(|k| a + step * k as f64).collect()
}

fn log_points(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    let (la, lb) = (lo.log10(), hi.log10());
    let n = ((lb - la) * per_decade as f64).round() as usize;
    (0..=n).map(|k| 10f64.powf(la + (lb - la) * k as f64 / n as f64)).collect()
}

/// Linear steps of 0.5 up to `|x| = 20`, plus logarithmic points on `10⁻³ ≤ |x| ≤ 1`.
pub fn default_x_grid(which: EnvelopeKind) -> Vec<f64> {
    let pos: Vec<f64> = log_points(1e-3, 1.0, 4).into_iter().chain(linspace(0.5, 20.0, 0.5)).collect();
    let mut out: Vec<f64> = match which {
        EnvelopeKind::UpperAllX => pos.iter().flat_map(|&x| [x, -x]).chain([0.0]).collect(),
        EnvelopeKind::LowerPosX => pos.into_iter().chain([0.0]).collect(),
        EnvelopeKind::LowerNegX => pos.into_iter().map(|x| -x).chain([0.0]).collect(),
    };
    out = sorted_unique(&out);
    out
}

/// `T ∈ {1, 2, 8, 27, 64}`.
pub fn default_t_grid() -> Vec<f64> {
    vec![1.0, 2.0, 8.0, 27.0, 64.0]
}

/// Uniform grid `x_min, x_min + step, …, x_max` for CLI and acceptance scans.
pub fn uniform_grid(x_min: f64, x_max: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(x_max >= x_min) {
        return Err(Error::InvalidArgument(format!("bad grid [{x_min}, {x_max}] step {step}")));
    }
    Ok(linspace(x_min, x_max, step))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn envelope_at_origin_is_power_of_t() {
        let s = EnvelopeSpec::new(EnvelopeKind::LowerPosX);
        assert!((s.envelope(0.0, 8.0) - 0.5).abs() < 1e-15);
        let u = EnvelopeSpec::new(EnvelopeKind::UpperAllX);
        assert!((u.envelope(3.0, 8.0) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn bisected_grid_has_midpoints() {
        assert_eq!(bisect_grid(&[0.0, 1.0, 3.0]), vec![0.0, 0.5, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn domain_checked() {
        let s = EnvelopeSpec::new(EnvelopeKind::LowerNegX);
        assert!(certify_envelope(&s, &[1.0], &[1.0], &AiryConfig::default()).is_err());
        assert!(certify_envelope(&s, &[-1.0], &[0.5], &AiryConfig::default()).is_err());
    }

    #[test]
    fn default_grids_respect_domains() {
        for k in EnvelopeKind::ALL {
            let s = EnvelopeSpec::new(k);
            assert!(default_x_grid(k).iter().all(|&x| s.in_domain(x)));
        }
    }
}
