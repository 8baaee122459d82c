//! Numerical laboratory for indefinite weighted forms on the real line.
//!
//! The crate realizes a one-parameter family of Krein-space closures
//! `t_alpha` of the form of a non-semibounded multiplication operator,
//! the eigenspectral function `E(Delta) = chi_Delta` together with
//! operator-norm growth estimates, a discretized Langer contour-integral
//! spectral projection, and an indefinite Sturm-Liouville example.

pub mod eigenspectral;
pub mod forms;
pub mod langer_contour;
pub mod membership;
pub mod model_space;
pub mod quadrature;
pub mod report;
pub mod sturm_liouville;
pub mod suite;
