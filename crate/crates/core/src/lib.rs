//! Unimodular multilinear forms on mixed `ℓ_p^n` sequence spaces.
//!
//! * [`exponents`]: exact exponent formulas for the smallest attainable norms.
//! * [`tensors`]: sign and unit-circle coefficient tensors, the Fourier matrix, file format.
//! * [`lp_geometry`]: `ℓ_p` norms and Hölder extremal vectors.
//! * [`normest`]: operator-norm estimates, exact oracles and lower-bound certificates.
//! * [`experiments`]: seeded, persisted experiment drivers.

pub mod error;
pub mod experiments;
pub mod exponents;
pub mod lp_geometry;
pub mod normest;
pub mod rng;
pub mod tensors;

pub use error::{Error, Result};
pub use exponents::{ExponentProfile, ExtendedExponent, Real};
pub use normest::{AscentSettings, EstimatorSettings, Method, MethodChoice, NormEstimate};
pub use tensors::{DomainSpec, Field, FormInstance, UnimodularTensor};
