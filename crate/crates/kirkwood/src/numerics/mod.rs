//! Quadrature, interpolation and root finding used by the resonance theory.

pub mod chebyshev;
pub mod quadrature;
pub mod roots;

pub use chebyshev::Chebyshev;
pub use quadrature::{gauss_kronrod, gauss_kronrod_vec, gauss_legendre, Integral, Tolerance};
pub use roots::brent;
