//! Piecewise Chebyshev interpolation with panels built on first use.

use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};

type Source = Arc<dyn Fn(f64) -> Result<f64> + Send + Sync>;

/// Interpolant of `f` on `[breaks[0], breaks[last]]`; panel `k` covers `[breaks[k], breaks[k+1]]`.
pub struct PiecewiseChebyshev {
    breaks: Vec<f64>,
    degree: usize,
    panels: Vec<OnceLock<std::result::Result<Vec<f64>, Error>>>,
    source: Source,
}

impl std::fmt::Debug for PiecewiseChebyshev {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PiecewiseChebyshev")
            .field("range", &(self.lo(), self.hi()))
            .field("panels", &self.panels.len())
            .field("degree", &self.degree)
            .finish()
    }
}

impl PiecewiseChebyshev {
    /// `breaks` must be strictly increasing with at least two entries.
    pub fn new(breaks: Vec<f64>, degree: usize, source: Source) -> Self {
        assert!(breaks.len() >= 2 && breaks.windows(2).all(|w| w[0] < w[1]), "bad breakpoints");
        let panels = (0..breaks.len() - 1).map(|_| OnceLock::new()).collect();
        PiecewiseChebyshev { breaks, degree, panels, source }
    }

    pub fn lo(&self) -> f64 {
        self.breaks[0]
    }

    pub fn hi(&self) -> f64 {
        self.breaks[self.breaks.len() - 1]
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo() && x <= self.hi()
    }

    fn coefficients(&self, k: usize) -> Result<&[f64]> {
        let entry = self.panels[k].get_or_init(|| {
            let (a, b) = (self.breaks[k], self.breaks[k + 1]);
            let m = self.degree + 1;
            let mut values = Vec::with_capacity(m);
            for j in 0..m {
                let theta = std::f64::consts::PI * (j as f64 + 0.5) / m as f64;
                let x = 0.5 * (a + b) + 0.5 * (b - a) * theta.cos();
                values.push((self.source)(x)?);
            }
            let mut coef = vec![0.0; m];
            for (i, c) in coef.iter_mut().enumerate() {
                let mut acc = 0.0;
                for (j, v) in values.iter().enumerate() {
                    let theta = std::f64::consts::PI * (j as f64 + 0.5) / m as f64;
                    acc += v * (i as f64 * theta).cos();
                }
                *c = 2.0 * acc / m as f64;
            }
            coef[0] *= 0.5;
            Ok(coef)
        });
        match entry {
            Ok(c) => Ok(c.as_slice()),
            Err(e) => Err(e.clone()),
        }
    }

    /// Interpolated value; `x` must lie within the table range.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !self.contains(x) {
            return Err(Error::InvalidArgument(format!(
                "{x} outside interpolation range [{}, {}]",
                self.lo(),
                self.hi()
            )));
        }
        let k = match self.breaks.binary_search_by(|b| b.partial_cmp(&x).expect("finite breakpoints")) {
            Ok(i) => i.min(self.panels.len() - 1),
            Err(i) => i - 1,
        };
        let coef = self.coefficients(k)?;
        let (a, b) = (self.breaks[k], self.breaks[k + 1]);
        let u = (2.0 * x - a - b) / (b - a);
        // Clenshaw recurrence.
        let (mut b1, mut b2) = (0.0, 0.0);
        for &c in coef.iter().skip(1).rev() {
            let b0 = 2.0 * u * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        Ok(u * b1 - b2 + coef[0])
    }

    /// Number of panels whose coefficients have been computed.
    pub fn built_panels(&self) -> usize {
        self.panels.iter().filter(|p| p.get().is_some()).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_smooth_function() {
        let breaks: Vec<f64> = (0..=10).map(|k| -5.0 + k as f64).collect();
        let t = PiecewiseChebyshev::new(breaks, 20, Arc::new(|x: f64| Ok((3.0 * x).sin() * (-0.1 * x * x).exp())));
        for k in 0..=200 {
            let x = -5.0 + 10.0 * k as f64 / 200.0;
            let exact = (3.0 * x).sin() * (-0.1 * x * x).exp();
            assert!((t.eval(x).unwrap() - exact).abs() < 1e-13, "x = {x}");
        }
        assert!(t.eval(5.5).is_err());
        assert_eq!(t.built_panels(), 10);
    }
}
