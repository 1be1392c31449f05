//! Numerical kernels shared by the model modules: adaptive quadrature,
//! bracketed root finding, golden-section maximization and an adaptive
//! Dormand-Prince integrator.
//!
//! All routines are pure functions over caller-owned closures.

mod golden;
mod ode;
mod quadrature;
mod roots;

pub use golden::maximize_scalar;
pub use ode::{integrate_ode, integrate_ode_with, OdeOptions, Trajectory};
pub use quadrature::integrate;
pub use roots::find_root;

use crate::error::{Error, Result};

/// Stopping rule shared by the iterative kernels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
    pub max_iter: usize,
}

impl Tolerance {
    pub fn new(rel: f64, abs: f64, max_iter: usize) -> Result<Self> {
        if !(rel > 0.0) || !(abs >= 0.0) || max_iter < 1 {
            return Err(Error::Domain(format!(
                "tolerance requires rel > 0, abs >= 0, max_iter >= 1 (got {rel}, {abs}, {max_iter})"
            )));
        }
        Ok(Self { rel, abs, max_iter })
    }

    /// Quadrature default: relative 1e-10.
    pub const fn quadrature() -> Self {
        Self { rel: 1e-10, abs: 0.0, max_iter: 60 }
    }

    pub const fn root() -> Self {
        Self { rel: 1e-14, abs: 0.0, max_iter: 200 }
    }

    pub const fn search() -> Self {
        Self { rel: 1e-10, abs: 0.0, max_iter: 500 }
    }

    pub const fn ode() -> Self {
        Self { rel: 1e-9, abs: 1e-12, max_iter: 1_000_000 }
    }
}

/// Closed interval `[lo, hi]` with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    lo: f64,
    hi: f64,
}

impl Bracket {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidBracket { lo, hi, reason: "requires finite lo < hi" });
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}
