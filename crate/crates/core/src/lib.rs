//! Plane-wave dispersion analysis for the linear thermoelastic relaxed
//! micromorphic continuum.
//!
//! The crate assembles the longitudinal, transverse and uncoupled plane-wave
//! systems, turns their vanishing-determinant conditions into polynomial root
//! problems in the complex frequency, links the roots into dispersion
//! branches over a wavenumber grid, and detects frequency band gaps.

pub mod bandgap;
pub mod branches;
pub mod error;
pub mod io;
pub mod material;
pub mod polyeig;
pub mod wave;

pub use error::{Error, Result};
pub use material::{preset, thermal_off, validate, MaterialParams, ModelId};
pub use wave::SystemKind;
