//! Dense complex determinants of `I − K`, accurate for `det − 1` when `K` is small.

use nalgebra::DMatrix;
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// How `det(I − K)` was evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetMethod {
    /// Unpivoted elimination on `I − K` storing only the deviation from `I`.
    DeltaElimination,
    /// LU with partial pivoting.
    PivotedLu,
}

/// `det(I − K)` together with quantities that would lose precision if formed by subtraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetParts<F> {
    pub det: Complex<F>,
    pub det_minus_one: Complex<F>,
    /// `det(I − K) − 1 + tr K`, the part of order `K²` and higher.
    pub remainder: Complex<F>,
    pub trace: Complex<F>,
    pub method: DetMethod,
}

fn cz<F: Scalar>() -> Complex<F> {
    Complex::new(F::zero(), F::zero())
}

/// Determinant by LU with partial pivoting (consumes the matrix).
pub fn lu_determinant<F: Scalar>(mut m: DMatrix<Complex<F>>) -> Complex<F> {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "determinant of a non-square matrix");
    let mut det = Complex::new(F::one(), F::zero());
    for k in 0..n {
        let mut p = k;
        let mut best = m[(k, k)].norm();
        for i in (k + 1)..n {
            let v = m[(i, k)].norm();
            if v > best {
                best = v;
                p = i;
            }
        }
        if best == F::zero() {
            return cz();
        }
        if p != k {
            m.swap_rows(p, k);
            det = -det;
        }
        let pivot = m[(k, k)];
        det = det * pivot;
        let inv = pivot.inv();
        for i in (k + 1)..n {
            let l = m[(i, k)] * inv;
            if l.re == F::zero() && l.im == F::zero() {
                continue;
            }
            for j in (k + 1)..n {
                let mkj = m[(k, j)];
                m[(i, j)] = m[(i, j)] - l * mkj;
            }
        }
    }
    det
}

/// `ln(1 + d)` without cancellation for small `d`.
pub fn ln_1p<F: Scalar>(d: Complex<F>) -> Complex<F> {
    let two = F::c(2.0);
    let re = (two * d.re + d.re * d.re + d.im * d.im).ln_1p() / two;
    let im = d.im.atan2(F::one() + d.re);
    Complex::new(re, im)
}

/// `e^z − 1` without cancellation for small `z`.
pub fn exp_m1<F: Scalar>(z: Complex<F>) -> Complex<F> {
    let (s, c) = z.im.sin_cos();
    let half_sin = (z.im / F::c(2.0)).sin();
    let re = z.re.exp_m1() * c - F::c(2.0) * half_sin * half_sin;
    Complex::new(re, z.re.exp() * s)
}

/// `ln(1 + d) − d`, by series when `|d|` is small.
fn ln_1p_minus_id<F: Scalar>(d: Complex<F>) -> Complex<F> {
    if d.norm() < F::c(0.1) {
        let mut term = d;
        let mut acc = cz();
        for k in 2..60 {
            term = -term * d;
            let add = term / F::n(k);
            acc = acc + add;
            if add.norm() <= F::epsilon() * acc.norm() {
                break;
            }
        }
        acc
    } else {
        ln_1p(d) - d
    }
}

/// `e^z − 1 − z`, by series when `|z|` is small.
fn exp_m1_minus_id<F: Scalar>(z: Complex<F>) -> Complex<F> {
    if z.norm() < F::c(0.1) {
        let mut term = z;
        let mut acc = cz();
        for k in 2..60 {
            term = term * z / F::n(k);
            acc = acc + term;
            if term.norm() <= F::epsilon() * acc.norm() {
                break;
            }
        }
        acc
    } else {
        exp_m1(z) - z
    }
}

/// Largest absolute row sum of `K`.
pub fn inf_norm<F: Scalar>(k: &DMatrix<Complex<F>>) -> F {
    (0..k.nrows())
        .map(|i| (0..k.ncols()).fold(F::zero(), |acc, j| acc + k[(i, j)].norm()))
        .fold(F::zero(), F::max)
}

/// `det(I − K)` with `det − 1` and `det − 1 + tr K` to relative accuracy.
///
/// When `‖K‖_∞ < 1/2`, `I − K` is strictly diagonally dominant and elimination
/// without pivoting is stable; the deviation `D = (I − K) − I` is stored and the
/// updates to its diagonal are accumulated separately, so every term of order
/// `K²` is formed from products rather than from differences of `O(K)` numbers.
pub fn fredholm_parts<F: Scalar>(k: &DMatrix<Complex<F>>) -> DetParts<F> {
    let n = k.nrows();
    assert_eq!(n, k.ncols(), "kernel matrix must be square");
    let trace = (0..n).fold(cz(), |acc, i| acc + k[(i, i)]);
    if n == 0 {
        let one = Complex::new(F::one(), F::zero());
        return DetParts { det: one, det_minus_one: cz(), remainder: cz(), trace, method: DetMethod::DeltaElimination };
    }
    if inf_norm(k) < F::c(0.5) {
        let mut d: DMatrix<Complex<F>> = k.map(|v| -v);
        let mut diag_updates = vec![cz::<F>(); n];
        for p in 0..n {
            let pivot = Complex::new(F::one(), F::zero()) + d[(p, p)];
            let inv = pivot.inv();
            for i in (p + 1)..n {
                let l = d[(i, p)] * inv;
                if l.re == F::zero() && l.im == F::zero() {
                    continue;
                }
                for j in (p + 1)..n {
                    let upd = l * d[(p, j)];
                    d[(i, j)] = d[(i, j)] - upd;
                    if i == j {
                        diag_updates[i] = diag_updates[i] - upd;
                    }
                }
            }
        }
        // log det = Σ ln(1 + D_pp); log det + tr K = Σ [ln(1+D_pp) − D_pp] + Σ updates_pp
        let mut log_det = cz::<F>();
        let mut log_det_plus_trace = cz::<F>();
        for p in 0..n {
            let dp = d[(p, p)];
            log_det = log_det + ln_1p(dp);
            log_det_plus_trace = log_det_plus_trace + ln_1p_minus_id(dp) + diag_updates[p];
        }
        let remainder = exp_m1_minus_id(log_det) + log_det_plus_trace;
        let det_minus_one = remainder - trace;
        let det = Complex::new(F::one(), F::zero()) + det_minus_one;
        DetParts { det, det_minus_one, remainder, trace, method: DetMethod::DeltaElimination }
    } else {
        let m = DMatrix::from_fn(n, n, |i, j| {
            let id = if i == j { F::one() } else { F::zero() };
            Complex::new(id, F::zero()) - k[(i, j)]
        });
        let det = lu_determinant(m);
        let det_minus_one = det - Complex::new(F::one(), F::zero());
        DetParts { det, det_minus_one, remainder: det_minus_one + trace, trace, method: DetMethod::PivotedLu }
    }
}
