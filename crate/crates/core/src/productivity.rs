//! Depth-averaged growth and the two productivity measures.
//!
//! With `Y = eps(X) h` the mean growth rate only depends on the optical
//! depth. The integral of `mu` over optical depth reduces to
//! `integral_{I_b}^{I_s} mu(I)/I dI`, and `mu(I)/I` is the reciprocal of a
//! quadratic in `I` for both the Han and the Haldane parametrization, which
//! gives the closed forms in [`RationalKernel`].

use serde::Serialize;

use crate::error::{Error, Result};
use crate::growth::{HaldaneParams, HanParams, SECONDS_PER_DAY};
use crate::light::{ExtinctionModel, LightColumn};
use crate::numerics::{integrate, Tolerance};

/// Dimensionless optical depth `Y = eps(X) h >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct OpticalDepth(f64);

impl OpticalDepth {
    pub fn new(y: f64) -> Result<Self> {
        if !(y >= 0.0) || !y.is_finite() {
            return Err(Error::Domain(format!("optical depth must be finite and non-negative (got {y})")));
        }
        Ok(Self(y))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Which antiderivative applies to `1 / (a I^2 + b I + c)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DiscriminantBranch {
    /// Two real roots: logarithmic form.
    Positive,
    /// Double root: rational form.
    Zero,
    /// Complex roots: arctangent form.
    Negative,
}

/// `mu(I) / I = gain / (a I^2 + b I + c)` with rates per day.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RationalKernel {
    pub gain: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

/// Relative band around zero in which the discriminant is treated as zero.
const DISCRIMINANT_GUARD: f64 = 1e-12;

impl RationalKernel {
    pub fn from_haldane(p: &HaldaneParams) -> Self {
        Self { gain: p.theta, a: 1.0 / (p.i_star * p.i_star), b: p.theta / p.mu_max - 2.0 / p.i_star, c: 1.0 }
    }

    /// Constants `a = k_d tau sigma^2`, `b = k_r tau sigma`, `c = k_r` with
    /// prefactor `k_r k sigma`, converted to per day.
    pub fn from_han(p: &HanParams) -> Self {
        Self {
            gain: p.k_r * p.k * p.sigma * SECONDS_PER_DAY,
            a: p.k_d * p.tau * p.sigma * p.sigma,
            b: p.k_r * p.tau * p.sigma,
            c: p.k_r,
        }
    }

    pub fn discriminant(&self) -> f64 {
        self.b * self.b - 4.0 * self.a * self.c
    }

    pub fn branch(&self) -> DiscriminantBranch {
        let d = self.discriminant();
        if d.abs() < DISCRIMINANT_GUARD * self.b * self.b {
            DiscriminantBranch::Zero
        } else if d > 0.0 {
            DiscriminantBranch::Positive
        } else {
            DiscriminantBranch::Negative
        }
    }

    /// Gross growth rate at light `light`.
    pub fn growth_rate(&self, light: f64) -> f64 {
        self.gain * light / ((self.a * light + self.b) * light + self.c)
    }

    /// `integral_0^Y mu(I_s e^-y) dy = integral_{I_s e^-Y}^{I_s} gain / q(I) dI`.
    pub fn depth_integral(&self, surface_light: f64, y: f64) -> f64 {
        if y == 0.0 || surface_light == 0.0 {
            return 0.0;
        }
        let hi = surface_light;
        let lo = surface_light * (-y).exp();
        // hi - lo without cancellation.
        let span = -surface_light * (-y).exp_m1();
        let (a, b, c) = (self.a, self.b, self.c);
        match self.branch() {
            DiscriminantBranch::Positive => {
                let sq = self.discriminant().sqrt();
                // Stable root pair of a I^2 + b I + c.
                let q = -0.5 * (b + b.signum() * sq);
                let (r1, r2) = (q / a, c / q);
                let (d1, d2) = if r1 > r2 { (r1, r2) } else { (r2, r1) };
                let l1 = (span / (lo - d1)).ln_1p();
                let l2 = (span / (lo - d2)).ln_1p();
                self.gain / sq * (l1 - l2)
            }
            DiscriminantBranch::Zero => {
                let d = -b / (2.0 * a);
                self.gain / a * span / ((hi - d) * (lo - d))
            }
            DiscriminantBranch::Negative => {
                let w = (-self.discriminant()).sqrt();
                let u = (2.0 * a * hi + b) / w;
                let v = (2.0 * a * lo + b) / w;
                // atan(u) - atan(v) without cancellation for close arguments.
                let diff = if u * v > -1.0 { (2.0 * a * span / w / (1.0 + u * v)).atan() } else { u.atan() - v.atan() };
                self.gain * 2.0 / w * diff
            }
        }
    }

    /// Mean of `mu` over optical depth `[0, Y]`.
    pub fn mean_over_depth(&self, surface_light: f64, y: f64) -> f64 {
        if y < 1e-12 {
            return self.growth_rate(surface_light * (-0.5 * y).exp());
        }
        self.depth_integral(surface_light, y) / y
    }
}

impl From<&HaldaneParams> for RationalKernel {
    fn from(p: &HaldaneParams) -> Self {
        Self::from_haldane(p)
    }
}

impl From<&HanParams> for RationalKernel {
    fn from(p: &HanParams) -> Self {
        Self::from_han(p)
    }
}

/// Mean growth rate [1/d] by direct quadrature of `mu(I(X, z))` over depth.
pub fn mean_growth_quadrature(p: &HaldaneParams, c: &LightColumn, m: &ExtinctionModel) -> Result<f64> {
    mean_growth_quadrature_tol(p, c, m, Tolerance::quadrature())
}

pub fn mean_growth_quadrature_tol(
    p: &HaldaneParams,
    c: &LightColumn,
    m: &ExtinctionModel,
    tol: Tolerance,
) -> Result<f64> {
    let eps = m.extinction(c.concentration);
    let total = integrate(|z| p.growth_rate(c.surface_light * (eps * z).exp()), -c.depth, 0.0, tol)?;
    Ok(total / c.depth)
}

/// Mean growth rate [1/d] from the explicit antiderivative. Accepts either
/// [`HanParams`] or [`HaldaneParams`].
pub fn mean_growth_closed<'a, K>(p: &'a K, c: &LightColumn, m: &ExtinctionModel) -> f64
where
    RationalKernel: From<&'a K>,
{
    RationalKernel::from(p).mean_over_depth(c.surface_light, c.optical_depth(m))
}

/// Optical-depth productivity `P(Y) = integral_0^Y (mu(I_s e^-y) - R) dy` [1/d].
pub fn optical_productivity(p: &HaldaneParams, surface_light: f64, y: f64) -> f64 {
    RationalKernel::from_haldane(p).depth_integral(surface_light, y) - p.respiration * y
}

/// `dP/dY = mu(I_s e^-Y) - R`.
pub fn optical_productivity_slope(p: &HaldaneParams, surface_light: f64, y: f64) -> f64 {
    p.growth_rate(surface_light * (-y).exp()) - p.respiration
}

/// Surface biomass productivity `Pi = (mu_bar - R) X h` [g m^-2 d^-1].
/// Negative values (respiration-dominated columns) are returned as is.
pub fn surface_productivity(p: &HaldaneParams, m: &ExtinctionModel, x: f64, h: f64, surface_light: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let y = m.extinction(x) * h;
    let mu_bar = RationalKernel::from_haldane(p).mean_over_depth(surface_light, y);
    (mu_bar - p.respiration) * x * h
}

/// Analytic `d Pi / d X` at fixed depth.
pub fn surface_productivity_dx(p: &HaldaneParams, m: &ExtinctionModel, x: f64, h: f64, surface_light: f64) -> f64 {
    let eps = m.extinction(x);
    let slope = m.extinction_slope(x);
    let y = eps * h;
    let ratio_dx = (eps - x * slope) / (eps * eps);
    ratio_dx * optical_productivity(p, surface_light, y)
        + x / eps * optical_productivity_slope(p, surface_light, y) * slope * h
}

/// All productivity measures at one operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProductivityPoint {
    pub x: f64,
    pub h: f64,
    pub mu_bar: f64,
    pub p: f64,
    pub pi: f64,
}

impl ProductivityPoint {
    pub fn evaluate(p: &HaldaneParams, m: &ExtinctionModel, x: f64, h: f64, surface_light: f64) -> Self {
        let y = m.extinction(x) * h;
        let mu_bar = RationalKernel::from_haldane(p).mean_over_depth(surface_light, y);
        Self { x, h, mu_bar, p: (mu_bar - p.respiration) * y, pi: (mu_bar - p.respiration) * x * h }
    }
}

/// Growth model, extinction law and surface light of one culture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Scenario {
    pub growth: HaldaneParams,
    pub extinction: ExtinctionModel,
    /// Surface intensity I_s [umol m^-2 s^-1].
    pub surface_light: f64,
}

impl Scenario {
    pub fn new(growth: HaldaneParams, extinction: ExtinctionModel, surface_light: f64) -> Result<Self> {
        if !(surface_light > 0.0) || !surface_light.is_finite() {
            return Err(Error::Domain(format!("surface light must be positive (got {surface_light})")));
        }
        Ok(Self { growth, extinction, surface_light })
    }

    pub fn with_extinction(self, extinction: ExtinctionModel) -> Self {
        Self { extinction, ..self }
    }

    pub fn optical_depth(&self, x: f64, h: f64) -> f64 {
        self.extinction.extinction(x) * h
    }

    pub fn mean_growth(&self, x: f64, h: f64) -> f64 {
        RationalKernel::from_haldane(&self.growth).mean_over_depth(self.surface_light, self.optical_depth(x, h))
    }

    pub fn optical_productivity(&self, y: f64) -> f64 {
        optical_productivity(&self.growth, self.surface_light, y)
    }

    pub fn surface_productivity(&self, x: f64, h: f64) -> f64 {
        surface_productivity(&self.growth, &self.extinction, x, h, self.surface_light)
    }

    pub fn surface_productivity_dx(&self, x: f64, h: f64) -> f64 {
        surface_productivity_dx(&self.growth, &self.extinction, x, h, self.surface_light)
    }

    /// Net growth `mu(I_b) - R` at the bottom of the column [1/d].
    pub fn bottom_net_growth(&self, x: f64, h: f64) -> f64 {
        optical_productivity_slope(&self.growth, self.surface_light, self.optical_depth(x, h))
    }

    pub fn point(&self, x: f64, h: f64) -> ProductivityPoint {
        ProductivityPoint::evaluate(&self.growth, &self.extinction, x, h, self.surface_light)
    }
}
