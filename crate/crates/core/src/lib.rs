//! Productivity optimization and closed-loop control for light-limited
//! microalgae cultures.
//!
//! The crate is organized bottom-up:
//!
//! * [`numerics`]: quadrature, root finding, golden-section search, ODEs.
//! * [`growth`]: Haldane and Han light-response models.
//! * [`light`]: Beer-Lambert attenuation and the extinction law.
//! * [`productivity`]: mean growth, optical-depth and surface productivity.
//! * [`optimizer`]: compensation depth, directional optima, alternating search.
//! * [`controller`]: dilution feedback law and closed-loop simulation.
//! * [`params`]: parameter files and named presets.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod controller;
pub mod error;
pub mod growth;
pub mod light;
pub mod numerics;
pub mod optimizer;
pub mod params;
pub mod productivity;

pub use error::{Error, Result};
