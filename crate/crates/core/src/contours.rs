//! Oriented piecewise contours (lines, rays, circular arcs) and adaptive
//! integration of holomorphic integrands along them.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{adaptive, AdaptiveOptions};
use crate::scalar::Scalar;

/// Junction tolerance between consecutive segments.
pub const CONNECT_TOL: f64 = 1e-9;
/// Ray truncation radius used when no decay envelope is supplied.
pub const DEFAULT_RAY_RADIUS: f64 = 30.0;

/// One smooth piece of a contour, parametrized by `u ∈ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
#[serde(bound(serialize = "F: Serialize", deserialize = "F: Deserialize<'de>"))]
pub enum Segment<F> {
    /// Straight line from `z0` to `z1`.
    Line { z0: Complex<F>, z1: Complex<F> },
    /// Ray `z0 + r e^{iθ}`, `r ∈ [0, radius]`; traversed toward `z0` when `incoming`.
    Ray {
        z0: Complex<F>,
        angle: F,
        radius: F,
        #[serde(default)]
        incoming: bool,
    },
    /// Arc `center + radius e^{iθ}` from `theta0` to `theta1`.
    Arc { center: Complex<F>, radius: F, theta0: F, theta1: F },
}

impl<F: Scalar> Segment<F> {
    pub fn line(z0: Complex<F>, z1: Complex<F>) -> Self {
        Segment::Line { z0, z1 }
    }

    pub fn ray_out(z0: Complex<F>, angle: F, radius: F) -> Self {
        Segment::Ray { z0, angle, radius, incoming: false }
    }

    pub fn ray_in(z0: Complex<F>, angle: F, radius: F) -> Self {
        Segment::Ray { z0, angle, radius, incoming: true }
    }

    pub fn arc(center: Complex<F>, radius: F, theta0: F, theta1: F) -> Self {
        Segment::Arc { center, radius, theta0, theta1 }
    }

    /// Ray whose truncation radius is the first doubling of 1 at which
    /// `tail_bound(R)` (a bound on `∫_R^∞ |f|` along the ray) drops below `tol/10`.
    pub fn ray_with_envelope(
        z0: Complex<F>,
        angle: F,
        incoming: bool,
        tol: F,
        tail_bound: impl Fn(F) -> F,
    ) -> Self {
        let mut r = F::one();
        let limit = F::c(1e6);
        while tail_bound(r) >= tol / F::c(10.0) && r < limit {
            r = r + r;
        }
        Segment::Ray { z0, angle, radius: r, incoming }
    }

    pub fn point(&self, u: F) -> Complex<F> {
        match *self {
            Segment::Line { z0, z1 } => z0 + (z1 - z0) * u,
            Segment::Ray { z0, angle, radius, incoming } => {
                let r = if incoming { (F::one() - u) * radius } else { u * radius };
                z0 + Complex::from_polar(r, angle)
            }
            Segment::Arc { center, radius, theta0, theta1 } => {
                center + Complex::from_polar(radius, theta0 + (theta1 - theta0) * u)
            }
        }
    }

    /// `dz/du`.
    pub fn derivative(&self, u: F) -> Complex<F> {
        match *self {
            Segment::Line { z0, z1 } => z1 - z0,
            Segment::Ray { angle, radius, incoming, .. } => {
                let d = Complex::from_polar(radius, angle);
                if incoming {
                    -d
                } else {
                    d
                }
            }
            Segment::Arc { radius, theta0, theta1, .. } => {
                let dth = theta1 - theta0;
                Complex::new(F::zero(), radius * dth)
                    * Complex::from_polar(F::one(), theta0 + dth * u)
            }
        }
    }

    pub fn start(&self) -> Complex<F> {
        self.point(F::zero())
    }

    pub fn end(&self) -> Complex<F> {
        self.point(F::one())
    }

    pub fn reversed(&self) -> Self {
        match *self {
            Segment::Line { z0, z1 } => Segment::Line { z0: z1, z1: z0 },
            Segment::Ray { z0, angle, radius, incoming } => {
                Segment::Ray { z0, angle, radius, incoming: !incoming }
            }
            Segment::Arc { center, radius, theta0, theta1 } => {
                Segment::Arc { center, radius, theta0: theta1, theta1: theta0 }
            }
        }
    }

    /// Image under `z ↦ factor·z`.
    pub fn scaled(&self, factor: Complex<F>) -> Self {
        let (m, phi) = (factor.norm(), factor.arg());
        match *self {
            Segment::Line { z0, z1 } => Segment::Line { z0: z0 * factor, z1: z1 * factor },
            Segment::Ray { z0, angle, radius, incoming } => {
                Segment::Ray { z0: z0 * factor, angle: angle + phi, radius: radius * m, incoming }
            }
            Segment::Arc { center, radius, theta0, theta1 } => Segment::Arc {
                center: center * factor,
                radius: radius * m,
                theta0: theta0 + phi,
                theta1: theta1 + phi,
            },
        }
    }

    fn validate(&self, index: usize) -> Result<()> {
        let bad = |why: &str| Err(Error::InvalidContour(format!("segment {index}: {why}")));
        match *self {
            Segment::Line { z0, z1 } => {
                if (z1 - z0).norm() == F::zero() {
                    return bad("line endpoints coincide");
                }
            }
            Segment::Ray { radius, .. } => {
                if !(radius > F::zero()) || !radius.is_finite() {
                    return bad("ray truncation radius must be positive and finite");
                }
            }
            Segment::Arc { radius, theta0, theta1, .. } => {
                if !(radius > F::zero()) {
                    return bad("arc radius must be positive");
                }
                if theta0 == theta1 {
                    return bad("arc has zero angular extent");
                }
                if (theta1 - theta0).abs() > F::c(2.0) * F::PI() + F::c(1e-12) {
                    return bad("arc winds more than once");
                }
            }
        }
        Ok(())
    }
}

/// Ordered list of connected segments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "F: Serialize", deserialize = "F: Deserialize<'de>"))]
pub struct Contour<F> {
    pub segments: Vec<Segment<F>>,
}

fn cross<F: Scalar>(a: Complex<F>, b: Complex<F>) -> F {
    a.re * b.im - a.im * b.re
}

fn segments_cross<F: Scalar>(p1: Complex<F>, p2: Complex<F>, q1: Complex<F>, q2: Complex<F>) -> bool {
    let d1 = cross(p2 - p1, q1 - p1);
    let d2 = cross(p2 - p1, q2 - p1);
    let d3 = cross(q2 - q1, p1 - q1);
    let d4 = cross(q2 - q1, p2 - q1);
    let z = F::zero();
    if d1 == z && d2 == z {
        // Collinear: overlap of bounding boxes.
        let overlap = |a1: F, a2: F, b1: F, b2: F| a1.min(a2) <= b1.max(b2) && b1.min(b2) <= a1.max(a2);
        return overlap(p1.re, p2.re, q1.re, q2.re) && overlap(p1.im, p2.im, q1.im, q2.im);
    }
    (d1 * d2 <= z) && (d3 * d4 <= z)
}

impl<F: Scalar> Contour<F> {
    /// Validates segment shapes, connectivity and absence of self-intersections.
    pub fn new(segments: Vec<Segment<F>>) -> Result<Self> {
        let c = Contour { segments };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.segments.is_empty() {
            return Err(Error::InvalidContour("no segments".into()));
        }
        for (i, s) in self.segments.iter().enumerate() {
            s.validate(i)?;
        }
        for (i, w) in self.segments.windows(2).enumerate() {
            let gap = (w[0].end() - w[1].start()).norm();
            if gap > F::c(CONNECT_TOL) {
                return Err(Error::InvalidContour(format!(
                    "segments {i} and {} are disconnected (gap {gap:e})",
                    i + 1
                )));
            }
        }
        self.check_simple()
    }

    fn check_simple(&self) -> Result<()> {
        const SAMPLES: usize = 48;
        let polys: Vec<Vec<Complex<F>>> = self
            .segments
            .iter()
            .map(|s| (0..=SAMPLES).map(|k| s.point(F::n(k) / F::n(SAMPLES))).collect())
            .collect();
        let nseg = polys.len();
        let closed = (self.segments[nseg - 1].end() - self.segments[0].start()).norm()
            <= F::c(CONNECT_TOL);
        for i in 0..nseg {
            for j in (i + 1)..nseg {
                let adjacent = j == i + 1 || (closed && i == 0 && j == nseg - 1);
                for a in 0..SAMPLES {
                    for b in 0..SAMPLES {
                        if adjacent {
                            // Skip edges that touch the shared junction.
                            let touches = if j == i + 1 {
                                a == SAMPLES - 1 && b == 0
                            } else {
                                a == 0 && b == SAMPLES - 1
                            };
                            if touches {
                                continue;
                            }
                        }
                        if segments_cross(polys[i][a], polys[i][a + 1], polys[j][b], polys[j][b + 1]) {
                            return Err(Error::InvalidContour(format!(
                                "segments {i} and {j} intersect"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn start(&self) -> Complex<F> {
        self.segments[0].start()
    }

    pub fn end(&self) -> Complex<F> {
        self.segments[self.segments.len() - 1].end()
    }

    /// Same path traversed backwards.
    pub fn reversed(&self) -> Self {
        Contour { segments: self.segments.iter().rev().map(Segment::reversed).collect() }
    }

    /// Image under `z ↦ factor·z`.
    pub fn scaled(&self, factor: Complex<F>) -> Self {
        Contour { segments: self.segments.iter().map(|s| s.scaled(factor)).collect() }
    }

    /// Counterclockwise circle.
    pub fn circle(center: Complex<F>, radius: F) -> Result<Self> {
        Contour::new(vec![Segment::arc(center, radius, F::zero(), F::c(2.0) * F::PI())])
    }

    /// Upward vertical line `c + it`, `t ∈ [-half_height, half_height]`.
    pub fn vertical_line(c: F, half_height: F) -> Result<Self> {
        Contour::new(vec![Segment::line(
            Complex::new(c, -half_height),
            Complex::new(c, half_height),
        )])
    }

    /// Two rays through `c` at angles `∓angle`, from `∞e^{-i·angle}` to `∞e^{i·angle}`.
    pub fn rays_through(c: Complex<F>, angle: F, radius: F) -> Result<Self> {
        Contour::new(vec![
            Segment::ray_in(c, -angle, radius),
            Segment::ray_out(c, angle, radius),
        ])
    }
}

impl Contour<f64> {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("contour serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: Contour<f64> = serde_json::from_str(text)
            .map_err(|e| Error::InvalidContour(format!("bad contour JSON: {e}")))?;
        c.validate()?;
        Ok(c)
    }
}

/// Integral value with its error estimate and cost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "F: Serialize", deserialize = "F: Deserialize<'de>"))]
pub struct QuadResult<F> {
    pub value: Complex<F>,
    pub abs_error_estimate: F,
    pub nodes_used: usize,
}

/// Options for contour integration; tolerances apply to the whole contour.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_nodes_per_segment: usize,
}

impl Default for ContourOptions {
    fn default() -> Self {
        ContourOptions { abs_tol: 1e-10, rel_tol: 0.0, max_nodes_per_segment: 1 << 14 }
    }
}

impl ContourOptions {
    pub fn with_abs(abs_tol: f64) -> Self {
        ContourOptions { abs_tol, ..Default::default() }
    }
}

/// `∫_contour f(z) dz` by adaptive Gauss–Legendre panels on each segment.
pub fn integrate<F, G>(contour: &Contour<F>, mut f: G, opts: &ContourOptions) -> Result<QuadResult<F>>
where
    F: Scalar,
    G: FnMut(Complex<F>) -> Complex<F>,
{
    if !(opts.abs_tol > 0.0 || opts.rel_tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let nseg = contour.segments.len();
    let seg_opts = AdaptiveOptions {
        abs_tol: opts.abs_tol / nseg as f64,
        rel_tol: opts.rel_tol,
        max_nodes: opts.max_nodes_per_segment,
    };
    let mut value = Complex::new(F::zero(), F::zero());
    let mut error = 0.0f64;
    let mut nodes = 0usize;
    for (i, seg) in contour.segments.iter().enumerate() {
        let mut bad: Option<Complex<F>> = None;
        let g = |u: F| {
            let z = seg.point(u);
            let v = f(z) * seg.derivative(u);
            if !(v.re.is_finite() && v.im.is_finite()) && bad.is_none() {
                bad = Some(z);
            }
            v
        };
        match adaptive(g, F::zero(), F::one(), &seg_opts) {
            Ok(r) => {
                if let Some(z) = bad {
                    return Err(Error::NonFiniteIntegrand { re: z.re.to_f64_lossy(), im: z.im.to_f64_lossy() });
                }
                value = value + r.value;
                error += r.error;
                nodes += r.nodes;
            }
            Err(e) => {
                if let Some(z) = bad {
                    return Err(Error::NonFiniteIntegrand { re: z.re.to_f64_lossy(), im: z.im.to_f64_lossy() });
                }
                let best = value + e.best;
                return Err(Error::QuadratureNonConvergence {
                    segment: i,
                    nodes: nodes + e.nodes,
                    best_re: best.re.to_f64_lossy(),
                    best_im: best.im.to_f64_lossy(),
                    error: error + e.error,
                });
            }
        }
    }
    Ok(QuadResult { value, abs_error_estimate: F::c(error), nodes_used: nodes })
}

/// `|∫_{c1} f − ∫_{c2} f − 2πi Σ residues|`.
pub fn deform_check<F, G>(
    c1: &Contour<F>,
    c2: &Contour<F>,
    mut f: G,
    residues_between: &[Complex<F>],
    opts: &ContourOptions,
) -> Result<F>
where
    F: Scalar,
    G: FnMut(Complex<F>) -> Complex<F>,
{
    let a = integrate(c1, &mut f, opts)?;
    let b = integrate(c2, &mut f, opts)?;
    let two_pi_i = Complex::new(F::zero(), F::c(2.0) * F::PI());
    let res = residues_between.iter().fold(Complex::new(F::zero(), F::zero()), |acc, &r| acc + r);
    Ok((a.value - b.value - two_pi_i * res).norm())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_circle_residue() {
        let c = Contour::circle(Complex::new(0.0, 0.0), 1.0).unwrap();
        let r = integrate(&c, |z| z.inv(), &ContourOptions::with_abs(1e-12)).unwrap();
        assert!((r.value - Complex::new(0.0, 2.0 * std::f64::consts::PI)).norm() < 1e-12);
        assert!(r.nodes_used >= 2);
    }

    #[test]
    fn gaussian_along_vertical_line() {
        let c = Contour::vertical_line(1.0, 12.0).unwrap();
        let r = integrate(&c, |z: Complex<f64>| Complex::new((-z.im * z.im).exp(), 0.0), &ContourOptions::with_abs(1e-12))
            .unwrap();
        // dz = i dt
        assert!((r.value.im - std::f64::consts::PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn disconnected_and_crossing_contours_rejected() {
        let z = |a: f64, b: f64| Complex::new(a, b);
        let gap = Contour::new(vec![Segment::line(z(0.0, 0.0), z(1.0, 0.0)), Segment::line(z(1.0, 0.1), z(2.0, 0.0))]);
        assert!(gap.is_err());
        let bowtie = Contour::new(vec![
            Segment::line(z(0.0, 0.0), z(1.0, 1.0)),
            Segment::line(z(1.0, 1.0), z(1.0, 0.0)),
            Segment::line(z(1.0, 0.0), z(0.0, 1.0)),
        ]);
        assert!(bowtie.is_err());
        assert!(Contour::new(vec![Segment::<f64>::line(z(1.0, 1.0), z(1.0, 1.0))]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let c = Contour::rays_through(Complex::new(1.0, 0.0), std::f64::consts::FRAC_PI_3, 8.0).unwrap();
        let back = Contour::from_json(&c.to_json()).unwrap();
        assert_eq!(c, back);
    }

    #[test]
    fn envelope_driven_ray() {
        let s = Segment::ray_with_envelope(Complex::new(0.0, 0.0), 0.0, false, 1e-10, |r: f64| (-r * r).exp());
        match s {
            Segment::Ray { radius, .. } => assert!((4.0..=8.0).contains(&radius)),
            _ => unreachable!(),
        }
    }
}
