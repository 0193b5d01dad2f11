//! Numerical core for time-like radial geodesics, the Kustaanheimo–Stiefel
//! map from the zero-constants geodesic shell onto a four-dimensional
//! harmonic oscillator, and the oscillator's finite-difference spectrum.
//!
//! Everything here is pure computation in geometric units (c = ħ = G = 1);
//! file formats and the command line live in the `ksgeo` crate.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod geometry;
pub mod integrator;
pub mod ks;
mod math;
pub mod oscillator;
pub mod quadrature;
mod tridiag;

pub use error::{Error, Result};
pub use geometry::{CanonicalMomenta, ConstantsOfMotion, GeodesicState, SpacetimeParams};
pub use integrator::{Direction, IntegrationConfig, Sample, Termination, Trajectory};
pub use ks::{KsState, Vec3State};
pub use oscillator::{GridSpec, OscillatorParams, SpectrumLevel, SpectrumResult, Units};
