//! Dilution feedback for a continuous culture.
//!
//! With the on-line signal `Phi = (mu_bar - R) X`, the law
//!
//! ```text
//! D = D_max            if X >= X_bar
//! D = Phi / X_star     otherwise
//! ```
//!
//! drives `dX/dt = (mu_bar - R - D) X` to `X_star` from any positive state.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{find_root, integrate_ode_with, Bracket, OdeOptions, Tolerance};
use crate::optimizer::y_opt;
use crate::productivity::Scenario;

/// Relative band around `X_star` used to report convergence time.
pub const CONVERGENCE_BAND: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ControlConfig {
    /// Target concentration [g/m^3].
    pub x_star: f64,
    /// Saturated dilution rate [1/d].
    pub d_max: f64,
    /// Saturation threshold [g/m^3].
    pub x_bar: f64,
}

impl ControlConfig {
    /// Checked constructor; `mu_max` and `respiration` in 1/d.
    pub fn new(x_star: f64, d_max: f64, x_bar: f64, mu_max: f64, respiration: f64) -> Result<Self> {
        let cfg = Self { x_star, d_max, x_bar };
        cfg.validate(mu_max, respiration)?;
        Ok(cfg)
    }

    /// Default threshold `min(0.9 D_max X*/(mu_max - R), 10 X*)`, further
    /// kept below the concentration where the column stops net growing.
    pub fn with_default_threshold(sc: &Scenario, x_star: f64, d_max: f64, h: f64) -> Result<Self> {
        let p = &sc.growth;
        p.require_compensable()?;
        let net = p.mu_max - p.respiration;
        let mut x_bar = (0.9 * d_max * x_star / net).min(10.0 * x_star);
        if let Some(xc) = compensation_biomass(sc, h)? {
            if xc > x_star {
                x_bar = x_bar.min(0.9 * xc);
                if x_bar <= x_star {
                    x_bar = 0.5 * (x_star + xc);
                }
            }
        }
        Self::new(x_star, d_max, x_bar, p.mu_max, p.respiration)
    }

    pub fn validate(&self, mu_max: f64, respiration: f64) -> Result<()> {
        if !(self.x_star > 0.0) || !self.x_star.is_finite() {
            return Err(Error::Config(format!("X_star must be positive (got {})", self.x_star)));
        }
        if !(self.d_max > mu_max) || !self.d_max.is_finite() {
            return Err(Error::Config(format!("D_max = {} must exceed mu_max = {mu_max}", self.d_max)));
        }
        if !(self.x_bar > self.x_star) || !self.x_bar.is_finite() {
            return Err(Error::Config(format!("X_bar = {} must exceed X_star = {}", self.x_bar, self.x_star)));
        }
        if !((mu_max - respiration) * self.x_bar / self.x_star < self.d_max) {
            return Err(Error::Config(format!(
                "(mu_max - R) X_bar / X_star = {} must stay below D_max = {}",
                (mu_max - respiration) * self.x_bar / self.x_star,
                self.d_max
            )));
        }
        Ok(())
    }
}

/// Concentration above which the column respires more than it grows,
/// `mu_bar(X_c, h) = R`, or `None` when no concentration reaches it.
pub fn compensation_biomass(sc: &Scenario, h: f64) -> Result<Option<f64>> {
    let y0 = y_opt(&sc.growth, sc.surface_light)?.y_opt.max(1e-9);
    let p = |y: f64| sc.optical_productivity(y);
    if p(y0) <= 0.0 {
        return Ok(sc.extinction.concentration_for(y0 / h));
    }
    let mut hi = 2.0 * y0 + 1.0;
    while p(hi) > 0.0 {
        hi *= 2.0;
        if hi > 1e12 {
            return Ok(None);
        }
    }
    let y = find_root(p, Bracket::new(y0, hi)?, Tolerance::root())?;
    Ok(sc.extinction.concentration_for(y / h))
}

/// Net volumetric production `(mu_bar(X, h) - R) X` [g/m^3/d].
pub fn phi(sc: &Scenario, x: f64, h: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    (sc.mean_growth(x, h) - sc.growth.respiration) * x
}

/// Source of the measured `Phi`.
pub trait PhiSensor {
    fn measure(&self, t: f64, x: f64, exact: f64) -> f64;
}

/// Noise-free measurement.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExactSensor;

impl PhiSensor for ExactSensor {
    fn measure(&self, _t: f64, _x: f64, exact: f64) -> f64 {
        exact
    }
}

/// Multiplicative perturbation `(1 + f(t)) Phi` with a caller-supplied `f`.
pub struct PerturbedSensor<F: Fn(f64) -> f64>(pub F);

impl<F: Fn(f64) -> f64> PhiSensor for PerturbedSensor<F> {
    fn measure(&self, t: f64, _x: f64, exact: f64) -> f64 {
        (1.0 + (self.0)(t)) * exact
    }
}

/// Which branch of the law is active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Saturated,
    Proportional,
    /// Proportional branch with negative `Phi`, dilution held at zero.
    Clamped,
}

/// Dilution and active regime given a measured `Phi`.
pub fn dilution_from_phi(cfg: &ControlConfig, x: f64, measured_phi: f64) -> (f64, Regime) {
    if x >= cfg.x_bar {
        (cfg.d_max, Regime::Saturated)
    } else if measured_phi < 0.0 {
        (0.0, Regime::Clamped)
    } else {
        (measured_phi / cfg.x_star, Regime::Proportional)
    }
}

/// Dilution rate [1/d] under exact measurement.
pub fn dilution_law(cfg: &ControlConfig, sc: &Scenario, x: f64, h: f64) -> Result<f64> {
    cfg.validate(sc.growth.mu_max, sc.growth.respiration)?;
    if !(x > 0.0) {
        return Err(Error::Domain(format!("dilution law needs X > 0 (got {x})")));
    }
    let (d, regime) = dilution_from_phi(cfg, x, phi(sc, x, h));
    if regime == Regime::Clamped {
        log::warn!("net growth negative below X_bar at X = {x}; dilution clamped to 0");
    }
    Ok(d)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimSample {
    pub t: f64,
    pub x: f64,
    pub d: f64,
    pub mu_bar: f64,
    pub phi: f64,
    pub pi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimTrace {
    pub samples: Vec<SimSample>,
    pub config: ControlConfig,
    pub depth: f64,
    /// Times at which the dilution was clamped to zero.
    pub warnings: Vec<f64>,
}

impl SimTrace {
    pub const CSV_HEADER: &'static str = "t_d,X_g_per_m3,D_per_d,mu_bar_per_d,Phi,Pi";

    /// Earliest time after which `X` stays within `band * X_star` of the
    /// target until the end of the trace.
    pub fn convergence_time(&self, band: f64) -> Option<f64> {
        let target = self.config.x_star;
        let inside = |s: &SimSample| ((s.x - target) / target).abs() < band;
        let last_out = self.samples.iter().rposition(|s| !inside(s));
        match last_out {
            None => self.samples.first().map(|s| s.t),
            Some(i) if i + 1 < self.samples.len() => Some(self.samples[i + 1].t),
            Some(_) => None,
        }
    }

    /// Index of the first sample where `X` rises back to `X_bar` after
    /// having been below it.
    pub fn threshold_recrossing(&self) -> Option<usize> {
        let first_below = self.samples.iter().position(|s| s.x < self.config.x_bar)?;
        self.samples[first_below..].iter().position(|s| s.x >= self.config.x_bar).map(|i| i + first_below)
    }

    /// Index of the first sample outside `[min(X*, X0), max(X0, X_bar)]`
    /// (relative slack `rel`).
    pub fn bound_violation(&self, rel: f64) -> Option<usize> {
        let x0 = self.samples.first()?.x;
        let lo = self.config.x_star.min(x0) * (1.0 - rel);
        let hi = x0.max(self.config.x_bar) * (1.0 + rel);
        self.samples.iter().position(|s| !(s.x > 0.0 && s.x >= lo && s.x <= hi))
    }

    /// Index where `|X - X*|` grows by more than `rel * X*` between
    /// consecutive samples of the proportional regime.
    pub fn contraction_violation(&self, rel: f64) -> Option<usize> {
        let target = self.config.x_star;
        self.samples
            .windows(2)
            .position(|w| {
                w[0].x < self.config.x_bar
                    && w[1].x < self.config.x_bar
                    && (w[1].x - target).abs() > (w[0].x - target).abs() + rel * target
            })
            .map(|i| i + 1)
    }

    pub fn write_csv<W: std::io::Write>(&self, mut w: W, fmt: impl Fn(f64) -> String) -> std::io::Result<()> {
        writeln!(w, "{}", Self::CSV_HEADER)?;
        for s in &self.samples {
            writeln!(w, "{},{},{},{},{},{}", fmt(s.t), fmt(s.x), fmt(s.d), fmt(s.mu_bar), fmt(s.phi), fmt(s.pi))?;
        }
        Ok(())
    }
}

/// Simulation settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    pub t_end: f64,
    pub ode: OdeOptions,
    /// Upper bound on the step as a fraction of the horizon.
    pub max_step_fraction: f64,
}

impl SimOptions {
    pub fn new(t_end: f64) -> Self {
        Self { t_end, ode: OdeOptions::default(), max_step_fraction: 1.0 / 3000.0 }
    }
}

/// Integrate the closed loop with exact measurement.
pub fn simulate_closed_loop(
    cfg: &ControlConfig,
    sc: &Scenario,
    x0: f64,
    h: f64,
    opts: &SimOptions,
) -> Result<SimTrace> {
    simulate_with_sensor(cfg, sc, x0, h, opts, &ExactSensor)
}

/// Integrate the closed loop; the controller sees `sensor`'s reading of `Phi`.
pub fn simulate_with_sensor<S: PhiSensor>(
    cfg: &ControlConfig,
    sc: &Scenario,
    x0: f64,
    h: f64,
    opts: &SimOptions,
    sensor: &S,
) -> Result<SimTrace> {
    cfg.validate(sc.growth.mu_max, sc.growth.respiration)?;
    if !(x0 > 0.0) || !x0.is_finite() {
        return Err(Error::Domain(format!("initial concentration must be positive (got {x0})")));
    }
    if !(h > 0.0) {
        return Err(Error::Domain(format!("depth must be positive (got {h})")));
    }
    if !(opts.t_end > 0.0) || !opts.t_end.is_finite() {
        return Err(Error::Domain(format!("horizon must be positive (got {})", opts.t_end)));
    }
    let r = sc.growth.respiration;
    let control = |t: f64, x: f64| {
        let mu_bar = sc.mean_growth(x, h);
        let exact = (mu_bar - r) * x;
        let (d, regime) = dilution_from_phi(cfg, x, sensor.measure(t, x, exact));
        (mu_bar, exact, d, regime)
    };
    let rhs = |t: f64, s: &[f64], ds: &mut [f64]| {
        let x = s[0].max(0.0);
        let (mu_bar, _, d, _) = control(t, x);
        ds[0] = (mu_bar - r - d) * x;
    };
    let ode = OdeOptions { max_step: Some(opts.t_end * opts.max_step_fraction), ..opts.ode };
    let traj = integrate_ode_with(rhs, &[x0], [0.0, opts.t_end], &ode)?;

    let mut samples = Vec::with_capacity(traj.len());
    let mut warnings = Vec::new();
    for (t, s) in traj.times.iter().zip(&traj.states) {
        let x = s[0];
        let (mu_bar, exact, d, regime) = control(*t, x);
        if regime == Regime::Clamped {
            warnings.push(*t);
        }
        samples.push(SimSample { t: *t, x, d, mu_bar, phi: exact, pi: exact * h });
    }
    if let Some(t) = warnings.first() {
        log::warn!("dilution clamped to 0 at {} samples (first at t = {t} d)", warnings.len());
    }
    Ok(SimTrace { samples, config: *cfg, depth: h, warnings })
}
