//! Electromagnetic wave scattering by small bodies.
//!
//! Solves EM scattering by one and many small ball scatterers through
//! moment (polarization) asymptotics, reduces the many-body problem to a
//! linear algebraic system for the per-particle moments, and computes the
//! effective field and synthesized refraction coefficient in the limit of
//! vanishing particle size. Every analytic formula is backed by a
//! brute-force quadrature or collocation oracle living next to it.

pub mod effective_medium;
pub mod error;
pub mod green;
pub mod multi_scatter;
pub mod potential;
pub mod quadrature;
pub mod single_scatter;
pub mod types;

pub use error::{Error, Result};
pub use types::{c64, Box3, ComplexVec3, MediumSpec, Particle, PlaneWave, RadialProfileKind, Vec3};
