use thiserror::Error;

/// Errors produced by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("covariance is not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("invalid covariance: {0}")]
    InvalidCovariance(String),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("(a, b) = ({a}, {b}) lies outside the positive-definite region")]
    OutsideRegion { a: f64, b: f64 },

    #[error("spectral factorization failed: {0}")]
    Factorization(String),

    #[error("root finder did not converge after {iterations} sweeps (residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("expected {expected} roots inside the unit disk, found {found}")]
    InsideCount { expected: usize, found: usize },

    #[error("degenerate polynomial input: {0}")]
    DegenerateInput(String),

    #[error("ambiguous branch matching at r = {r}: refine the grid")]
    AmbiguousMatching { r: f64 },

    #[error("inside roots closer than {separation:e}; residue sum is ill-conditioned")]
    NearMultipleRoot { separation: f64 },

    #[error("quadrature did not converge with {nodes} nodes (last change {change:e})")]
    NoConvergence { nodes: usize, change: f64 },

    #[error("odd multiplicity {multiplicity} for a spectral zero at angle {angle}")]
    OddMultiplicity { multiplicity: usize, angle: f64 },

    #[error("a zero lies on the counting circle |z| = {r}")]
    ZeroOnCircle { r: f64 },
}

impl Error {
    /// Whether the error stems from invalid input rather than a numerical failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::NotPositiveDefinite(_)
                | Error::InvalidCovariance(_)
                | Error::Domain(_)
                | Error::OutsideRegion { .. }
                | Error::DegenerateInput(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
