//! Mean motion resonances of the planar circular restricted three-body
//! problem: the first-order return map near a `p:q` resonance, its fixed
//! points and separatrices, the thresholds where the expansion stops being
//! valid, and numerical checks against the full equations of motion.

pub mod dynamics;
pub mod error;
pub mod fourier;
pub mod kepler;
pub mod numerics;
pub mod perturbation;
pub mod return_map;
pub mod separatrix;
pub mod thresholds;

pub use error::{Error, Result};
