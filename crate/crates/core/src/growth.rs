//! Light-response growth models.
//!
//! The Haldane form `mu(I) = mu_max I / (I + (mu_max/theta)(I/I* - 1)^2)` is
//! the working model. It is the steady state of the three-state Han
//! photosynthetic-unit model, whose parameters are measured per second;
//! [`han_to_haldane`] is the single place where rates are converted to the
//! per-day basis used everywhere else.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SECONDS_PER_DAY: f64 = 86_400.0;

/// Han model parameters, rates per second.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HanParams {
    /// Repair rate [1/s].
    pub k_r: f64,
    /// Damage ratio [-].
    pub k_d: f64,
    /// Turnover time [s].
    pub tau: f64,
    /// Specific photon absorption [m^2/umol].
    pub sigma: f64,
    /// Yield factor [-].
    pub k: f64,
    /// Respiration rate [1/s].
    pub respiration: f64,
}

impl HanParams {
    pub fn new(k_r: f64, k_d: f64, tau: f64, sigma: f64, k: f64, respiration: f64) -> Result<Self> {
        let p = Self { k_r, k_d, tau, sigma, k, respiration };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("k_r", self.k_r),
            ("k_d", self.k_d),
            ("tau", self.tau),
            ("sigma", self.sigma),
            ("k", self.k),
            ("R", self.respiration),
        ];
        for (name, v) in fields {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Domain(format!("Han parameter {name} must be positive and finite (got {v})")));
            }
        }
        if self.k_d >= 1.0 {
            return Err(Error::Domain(format!("Han damage ratio k_d must be below 1 (got {})", self.k_d)));
        }
        Ok(())
    }

    /// Values of the reference table, respiration as printed (1.389e-7 1/s).
    pub fn table1() -> Self {
        Self { k_r: 6.8e-3, k_d: 2.99e-4, tau: 0.25, sigma: 0.047, k: 8.7e-6, respiration: 1.389e-7 }
    }

    /// Reference table with respiration 1.389e-6 1/s (0.12 1/d).
    pub fn table1_r_x10() -> Self {
        Self { respiration: 1.389e-6, ..Self::table1() }
    }

    /// Sign-determining part of the discriminant of the steady-state
    /// denominator: `b^2 - 4ac = k_r tau sigma^2 (k_r tau - 4 k_d)`.
    pub fn discriminant(&self) -> f64 {
        let a = self.k_d * self.tau * self.sigma * self.sigma;
        let b = self.k_r * self.tau * self.sigma;
        let c = self.k_r;
        b * b - 4.0 * a * c
    }
}

/// Haldane growth parameters in the canonical per-day basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HaldaneParams {
    /// Initial slope [1/d per umol m^-2 s^-1].
    pub theta: f64,
    /// Maximum growth rate [1/d].
    pub mu_max: f64,
    /// Optimal light intensity [umol m^-2 s^-1].
    pub i_star: f64,
    /// Respiration rate [1/d].
    pub respiration: f64,
}

impl HaldaneParams {
    pub fn new(theta: f64, mu_max: f64, i_star: f64, respiration: f64) -> Result<Self> {
        let p = Self { theta, mu_max, i_star, respiration };
        for (name, v) in [("theta", theta), ("mu_max", mu_max), ("I*", i_star), ("R", respiration)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Domain(format!("Haldane parameter {name} must be positive and finite (got {v})")));
            }
        }
        Ok(p)
    }

    /// Growth rate at light `light >= 0` [1/d]. Unchecked; see [`haldane_mu`].
    #[inline]
    pub fn growth_rate(&self, light: f64) -> f64 {
        let excess = light / self.i_star - 1.0;
        let denom = light + self.mu_max / self.theta * excess * excess;
        self.mu_max * light / denom
    }

    /// `theta` expressed per second, the basis in which it is usually quoted.
    pub fn theta_per_second(&self) -> f64 {
        self.theta / SECONDS_PER_DAY
    }

    /// Fails when respiration outpaces the best achievable growth.
    pub fn require_compensable(&self) -> Result<()> {
        if self.respiration >= self.mu_max {
            return Err(Error::InfeasibleRespiration { respiration: self.respiration, mu_max: self.mu_max });
        }
        Ok(())
    }

    /// The two light levels where gross growth equals respiration,
    /// `(I_low, I_high)` with `I_low < I* < I_high`.
    pub fn compensation_lights(&self) -> Result<(f64, f64)> {
        self.require_compensable()?;
        let (mu, r, th, is) = (self.mu_max, self.respiration, self.theta, self.i_star);
        // Quadratic q2 I^2 - q1 I + q0 = 0 obtained from mu(I) = R.
        let q2 = r * mu / (th * is * is);
        let q1 = mu - r + 2.0 * r * mu / (th * is);
        let q0 = r * mu / th;
        let disc = (mu - r) * (mu - r + 4.0 * r * mu / (th * is));
        let sq = disc.sqrt();
        // Cancellation-free pair: the large root directly, the small one via
        // the product of roots.
        let high = (q1 + sq) / (2.0 * q2);
        let low = 2.0 * q0 / (q1 + sq);
        Ok((low, high))
    }
}

/// Haldane growth rate [1/d].
pub fn haldane_mu(p: &HaldaneParams, light: f64) -> Result<f64> {
    if !(light >= 0.0) {
        return Err(Error::Domain(format!("light intensity must be non-negative (got {light})")));
    }
    Ok(p.growth_rate(light))
}

/// Steady-state Han growth rate [1/s].
pub fn han_mu(p: &HanParams, light: f64) -> Result<f64> {
    if !(light >= 0.0) {
        return Err(Error::Domain(format!("light intensity must be non-negative (got {light})")));
    }
    let si = p.sigma * light;
    Ok(p.k * si / (p.k_d / p.k_r * p.tau * si * si + p.tau * si + 1.0))
}

/// Identify the Haldane parameters reproducing the Han steady state, and
/// convert rates from per-second to per-day.
pub fn han_to_haldane(p: &HanParams) -> HaldaneParams {
    let theta = p.k * p.sigma;
    let i_star = (p.k_r / (p.k_d * p.tau * p.sigma * p.sigma)).sqrt();
    let mu_max = p.k * p.sigma / (p.tau * p.sigma + 2.0 * (p.k_d * p.tau * p.sigma * p.sigma / p.k_r).sqrt());
    HaldaneParams {
        theta: theta * SECONDS_PER_DAY,
        mu_max: mu_max * SECONDS_PER_DAY,
        i_star,
        respiration: p.respiration * SECONDS_PER_DAY,
    }
}

/// Frequencies of the open, excited and inhibited photosynthetic states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HanState {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl HanState {
    /// State with `B = 1 - A - C`.
    pub fn from_open_inhibited(a: f64, c: f64) -> Result<Self> {
        if !(a >= 0.0 && c >= 0.0 && a + c <= 1.0) {
            return Err(Error::Domain(format!("Han state needs A, C >= 0 and A + C <= 1 (got {a}, {c})")));
        }
        Ok(Self { a, b: 1.0 - a - c, c })
    }

    pub fn dark() -> Self {
        Self { a: 1.0, b: 0.0, c: 0.0 }
    }

    pub fn total(&self) -> f64 {
        self.a + self.b + self.c
    }
}

/// Time derivative of the Han state [1/s], with `B` eliminated through
/// `A + B + C = 1` so that the derivatives sum to exactly zero.
pub fn han_rhs(p: &HanParams, state: &HanState, light: f64) -> HanState {
    let si = p.sigma * light;
    let da = -(si + 1.0 / p.tau) * state.a + (1.0 - state.c) / p.tau;
    let dc = -(p.k_r + p.k_d * si) * state.c + p.k_d * si * (1.0 - state.a);
    HanState { a: da, b: -(da + dc), c: dc }
}

/// Fast-variable quasi-steady state `A = (1 - C) / (tau sigma I + 1)`.
pub fn quasi_steady_open(p: &HanParams, inhibited: f64, light: f64) -> f64 {
    (1.0 - inhibited) / (p.tau * p.sigma * light + 1.0)
}

/// Slow inhibited-state dynamics once `A` is at its quasi-steady state [1/s].
pub fn reduced_inhibition_rhs(p: &HanParams, inhibited: f64, light: f64) -> f64 {
    let si = p.sigma * light;
    let drive = p.k_d * p.tau * si * si / (p.tau * si + 1.0);
    -(drive + p.k_r) * inhibited + drive
}
