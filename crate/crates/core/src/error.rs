use thiserror::Error;

/// Failures reported by the numerical routines.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("argument {re}{im:+}i is within {tol:e} of a pole of the gamma function")]
    PoleProximity { re: f64, im: f64, tol: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid contour: {0}")]
    InvalidContour(String),

    #[error("quadrature did not converge on segment {segment} after {nodes} nodes (estimate {best_re}{best_im:+}i, error {error:e})")]
    QuadratureNonConvergence {
        segment: usize,
        nodes: usize,
        best_re: f64,
        best_im: f64,
        error: f64,
    },

    #[error("imaginary residual {imag:e} exceeds tolerance for value {value:e} ({context})")]
    ImaginaryResidual { value: f64, imag: f64, context: String },

    #[error("integrand not finite at {re}{im:+}i")]
    NonFiniteIntegrand { re: f64, im: f64 },

    #[error("denominator e^(-kappa t) - mu vanishes at t = {t}, mu = {mu_re}{mu_im:+}i")]
    MuPole { t: f64, mu_re: f64, mu_im: f64 },

    #[error("Fredholm determinant did not converge: |det(n) - det(n/2)| = {diff:e} at n = {n}")]
    DeterminantNonConvergence { n: usize, diff: f64 },

    #[error("inequality violated: {0}")]
    BoundViolation(String),

    #[error("infeasible envelope fit: {0}")]
    InfeasibleFit(String),

    #[error("at x = {x}, T = {t}: {source}")]
    Located { x: f64, t: f64, source: Box<Error> },
}

impl Error {
    /// True for failures caused by numerics rather than by the caller's input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::InvalidArgument(_) | Error::InvalidContour(_) => false,
            Error::Located { source, .. } => source.is_numerical(),
            _ => true,
        }
    }

    /// Attaches the grid location `(x, T)` of the failure.
    pub fn at(self, x: f64, t: f64) -> Self {
        Error::Located { x, t, source: Box::new(self) }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
