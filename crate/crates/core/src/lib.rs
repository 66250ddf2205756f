//! Numerical analysis of stationary discs for weighted homogeneous model
//! hypersurfaces `Re w = P(z)` and their perturbations.

pub mod birkhoff;
pub mod circle;
pub mod error;
mod fft;
pub mod hypersurface;
pub mod jets;
pub mod linalg;
pub mod model;
pub mod poly;
pub mod rhsolver;

pub use circle::CircleFunction;
pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
pub use poly::{HermitianPolynomial, WeightVector};
