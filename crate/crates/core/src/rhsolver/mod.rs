//! Riemann-Hilbert analysis of the linearized stationary-disc problem and
//! Newton attachment of discs to perturbed hypersurfaces.

pub mod linearize;
pub mod newton;
pub mod perturbed;
pub mod symbol;
pub mod transform;

pub use linearize::{linearize, LinearizeOptions, LinearizedSystem, UnknownLayout};
pub use newton::{axes_grid, disc_family, newton_attach, FamilyContext, FamilyMember, FamilyReport, NewtonOptions, NewtonReport};
pub use perturbed::{DeformationSpec, PerturbedHypersurface};
