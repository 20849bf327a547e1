//! Numerics for the upper tail of the KPZ edge crossover distribution.
//!
//! Layers, bottom to top: complex Gamma and Stirling bounds, contour quadrature,
//! Gamma-deformed Airy functions, envelope certification, the crossover kernel
//! and its Hilbert–Schmidt factorization, Fredholm determinants, and the
//! μ-contour integral that produces `1 − F_T(s)`.

pub mod bounds;
pub mod chebyshev;
pub mod contours;
pub mod crossover;
pub mod deformed_airy;
pub mod error;
pub mod fredholm;
pub mod linalg;
pub mod operator;
pub mod quadrature;
pub mod scalar;
pub mod special;

pub use contours::{Contour, ContourOptions, QuadResult, Segment};
pub use error::{Error, Result};
pub use num_complex::Complex;
pub use scalar::Scalar;

/// Double-precision complex number.
pub type Complex64 = Complex<f64>;
pub type Contour64 = Contour<f64>;
pub type Segment64 = Segment<f64>;
pub type QuadResult64 = QuadResult<f64>;
