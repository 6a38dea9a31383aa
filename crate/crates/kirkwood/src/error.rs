use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("state outside the domain of the Delaunay chart: {0}")]
    Domain(String),

    /// The asteroid came within the collision cutoff of the perturbing body.
    #[error("collision: distance to the perturber {distance:e} is below the cutoff")]
    Collision { distance: f64 },

    #[error("quadrature did not converge (error estimate {error_estimate:e}, tolerance {tolerance:e})")]
    Quadrature { error_estimate: f64, tolerance: f64 },

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("root not bracketed: f({a}) = {fa:e}, f({b}) = {fb:e}")]
    NotBracketed { a: f64, fa: f64, b: f64, fb: f64 },

    /// The resonant phase function has zeros other than the two symmetry lines.
    #[error("nondegeneracy assumption fails: {0}")]
    Degenerate(String),

    #[error("integration failed: {0}")]
    Integration(String),

    /// A grown manifold stopped being a graph over the mean anomaly.
    #[error("manifold folds over at l = {at}")]
    FoldOver { at: f64 },
}

impl Error {
    /// Short machine-readable tag used by the command line front end.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::Domain(_) => "domain",
            Error::Collision { .. } => "collision",
            Error::Quadrature { .. } => "quadrature_non_convergence",
            Error::NoConvergence { .. } => "no_convergence",
            Error::NotBracketed { .. } => "not_bracketed",
            Error::Degenerate(_) => "assumption_a_violated",
            Error::Integration(_) => "integration",
            Error::FoldOver { .. } => "fold_over",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
