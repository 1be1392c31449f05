//! Optimal operating points.
//!
//! The optical-depth productivity `P(Y)` has a global maximum at the depth
//! where the bottom light compensates respiration, `mu(I_s e^-Y) = R`.
//! For a fixed concentration this fixes the best depth. For a fixed depth
//! the best concentration is found numerically, and alternating the two
//! directional optima gives the sequence `(X_n, h_n)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::growth::HaldaneParams;
use crate::numerics::{find_root, maximize_scalar, Bracket, Tolerance};
use crate::productivity::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum YOptBranch {
    /// `mu(I_s) > R`: the surface layer already grows faster than it respires.
    SurfaceAboveR,
    /// `mu(I_s) <= R`: the surface layer is photo-inhibited (or exactly compensated).
    SurfaceAtOrBelowR,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct YOptResult {
    pub y_opt: f64,
    pub branch: YOptBranch,
    /// Light at the compensated bottom, `I_s e^-Y_opt`.
    pub bottom_light: f64,
}

/// Optical depth maximizing `P`, in closed form.
///
/// The bottom light is the lower root `I_low` of `mu(I) = R`, the one that
/// sits on the light-limited side of `I*`, so `Y_opt = ln(I_s / I_low)` on
/// both branches. A surface intensity below `I_low` admits no compensated
/// column and yields [`Error::DarkSurface`].
pub fn y_opt(p: &HaldaneParams, surface_light: f64) -> Result<YOptResult> {
    if !(surface_light > 0.0) {
        return Err(Error::Domain(format!("surface light must be positive (got {surface_light})")));
    }
    let (low, _high) = p.compensation_lights()?;
    let branch = if p.growth_rate(surface_light) > p.respiration {
        YOptBranch::SurfaceAboveR
    } else {
        YOptBranch::SurfaceAtOrBelowR
    };
    let ratio = surface_light / low;
    let y = if (ratio - 1.0).abs() <= 1e-12 {
        0.0
    } else if ratio < 1.0 {
        return Err(Error::DarkSurface { surface_light, compensation_light: low });
    } else {
        ratio.ln()
    };
    Ok(YOptResult { y_opt: y, branch, bottom_light: surface_light * (-y).exp() })
}

/// Depth maximizing `Pi(X, .)`: `h* = Y_opt / eps(X)`.
pub fn optimal_depth_for_x(sc: &Scenario, x: f64) -> Result<f64> {
    let eps = sc.extinction.extinction(x);
    if !(x >= 0.0) || !(eps > 0.0) {
        return Err(Error::Domain(format!("optimal depth needs X >= 0 with eps(X) > 0 (X = {x}, eps = {eps})")));
    }
    Ok(y_opt(&sc.growth, sc.surface_light)?.y_opt / eps)
}

/// Concentration `X0` with `eps(X0) h = Y_opt`, when the background
/// turbidity alone does not already exceed `Y_opt`.
pub fn compensation_concentration(sc: &Scenario, h: f64) -> Result<Option<f64>> {
    let y = y_opt(&sc.growth, sc.surface_light)?.y_opt;
    Ok(sc.extinction.concentration_for(y / h))
}

/// Open interval of concentrations above `X0` that strictly improve on it
/// for a linear extinction law with turbidity:
/// `(X0, alpha1 P(Y_opt) / (alpha0 R Y_opt))`.
pub fn turbidity_improvement_range(sc: &Scenario, h: f64) -> Result<Option<(f64, f64)>> {
    let m = &sc.extinction;
    if m.s != 1.0 || m.alpha1 <= 0.0 {
        return Ok(None);
    }
    let y = y_opt(&sc.growth, sc.surface_light)?.y_opt;
    let Some(x0) = m.concentration_for(y / h) else {
        return Ok(None);
    };
    let upper = m.alpha1 * sc.optical_productivity(y) / (m.alpha0 * sc.growth.respiration * y);
    Ok((upper > x0).then_some((x0, upper)))
}

/// How the search interval over `X` is built for a given depth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BracketPolicy {
    /// Initial upper end is `growth * lo + offset`.
    pub growth: f64,
    pub offset: f64,
    /// Largest admissible upper end [g/m^3].
    pub cap: f64,
}

impl Default for BracketPolicy {
    fn default() -> Self {
        Self { growth: 4.0, offset: 100.0, cap: 1e6 }
    }
}

impl BracketPolicy {
    /// Lower end at the compensation concentration (or 0), upper end doubled
    /// until `Pi` decreases there.
    pub fn bracket(&self, sc: &Scenario, h: f64) -> Result<Bracket> {
        let lo = compensation_concentration(sc, h)?.unwrap_or(0.0);
        if lo >= self.cap {
            return Err(Error::BracketMiss { cap: self.cap });
        }
        let mut hi = (self.growth * lo + self.offset).min(self.cap);
        while sc.surface_productivity_dx(hi, h) >= 0.0 {
            if hi >= self.cap {
                return Err(Error::BracketMiss { cap: self.cap });
            }
            hi = (2.0 * hi).min(self.cap);
        }
        Bracket::new(lo, hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DirectionalOptimum {
    pub x: f64,
    pub pi: f64,
    /// Central difference of `Pi` at `x` with step `1e-6 x`.
    pub stationarity_residual: f64,
}

/// `argmax_X Pi(X, h)` over `bracket`, or over the default bracket when `None`.
///
/// Golden-section search localizes the maximum; it is then refined as the
/// root of the analytic `dPi/dX` in a narrow window around it.
pub fn optimal_x_for_h(sc: &Scenario, h: f64, bracket: Option<Bracket>) -> Result<DirectionalOptimum> {
    if !(h > 0.0) {
        return Err(Error::Domain(format!("depth must be positive (got {h})")));
    }
    let br = match bracket {
        Some(b) => {
            if sc.surface_productivity_dx(b.hi(), h) > 0.0 {
                return Err(Error::BracketMiss { cap: b.hi() });
            }
            b
        }
        None => BracketPolicy::default().bracket(sc, h)?,
    };
    directional_optimum(sc, h, br)
}

fn directional_optimum(sc: &Scenario, h: f64, br: Bracket) -> Result<DirectionalOptimum> {
    let (mut x, _) = maximize_scalar(|x| sc.surface_productivity(x, h), br, Tolerance::search())?;
    let dpi = |x: f64| sc.surface_productivity_dx(x, h);
    let window = 1e-6 * x.max(1e-9);
    let (a, b) = ((x - window).max(0.0), x + window);
    if a < b && dpi(a) > 0.0 && dpi(b) < 0.0 {
        x = find_root(dpi, Bracket::new(a, b)?, Tolerance::root())?;
    }
    let step = 1e-6 * x.max(1e-9);
    let residual = (sc.surface_productivity(x + step, h) - sc.surface_productivity(x - step, h)) / (2.0 * step);
    Ok(DirectionalOptimum { x, pi: sc.surface_productivity(x, h), stationarity_residual: residual })
}

/// Minimal practicable depths by reactor type [m].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DepthFloor {
    Raceway,
    Tubular,
    Biofilm,
}

impl DepthFloor {
    pub fn depth(self) -> f64 {
        match self {
            DepthFloor::Raceway => 0.1,
            DepthFloor::Tubular => 0.01,
            DepthFloor::Biofilm => 1e-4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    MaxIterations,
    /// The next depth would fall below the floor.
    DepthFloor,
    /// Successive concentrations agree to 1e-10.
    FixedPoint,
    /// The search interval for `X` reached the concentration cap.
    ConcentrationCap,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Iterate {
    pub n: usize,
    pub x: f64,
    pub h: f64,
    /// `eps(X_n) h_n`.
    pub y: f64,
    pub pi: f64,
    /// `mu(I_b) - R` at the bottom [1/d].
    pub bottom_net_growth: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SequenceTrace {
    pub iterates: Vec<Iterate>,
    pub converged: bool,
    pub stop_reason: StopReason,
    /// Best concentration at the depth floor when the floor stopped the search.
    pub floor_optimum: Option<DirectionalOptimum>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlternateOptions {
    pub n_max: usize,
    pub depth_floor: Option<f64>,
    pub bracket: BracketPolicy,
}

impl Default for AlternateOptions {
    fn default() -> Self {
        Self { n_max: 10_000, depth_floor: None, bracket: BracketPolicy::default() }
    }
}

const FIXED_POINT_TOL: f64 = 1e-10;

/// Alternate `h_n = Y_opt / eps(X_{n-1})` and `X_n = argmax_X Pi(X, h_n)`.
pub fn alternate(sc: &Scenario, x0: f64, opts: &AlternateOptions) -> Result<SequenceTrace> {
    if !(x0 > 0.0) {
        return Err(Error::Domain(format!("initial concentration must be positive (got {x0})")));
    }
    if opts.n_max < 1 {
        return Err(Error::Domain("n_max must be at least 1".into()));
    }
    let y_star = y_opt(&sc.growth, sc.surface_light)?.y_opt;
    let mut iterates = Vec::new();
    let mut prev = x0;
    let mut stop = StopReason::MaxIterations;
    let mut floor_optimum = None;

    for n in 1..=opts.n_max {
        let h = y_star / sc.extinction.extinction(prev);
        if let Some(floor) = opts.depth_floor {
            if h < floor {
                stop = StopReason::DepthFloor;
                let br = opts.bracket.bracket(sc, floor)?;
                floor_optimum = Some(directional_optimum(sc, floor, br)?);
                break;
            }
        }
        let br = match opts.bracket.bracket(sc, h) {
            Ok(b) => b,
            Err(Error::BracketMiss { .. }) => {
                stop = StopReason::ConcentrationCap;
                break;
            }
            Err(e) => return Err(e),
        };
        let opt = directional_optimum(sc, h, br)?;
        iterates.push(Iterate {
            n,
            x: opt.x,
            h,
            y: sc.optical_depth(opt.x, h),
            pi: opt.pi,
            bottom_net_growth: sc.bottom_net_growth(opt.x, h),
        });
        if ((opt.x - prev) / opt.x).abs() < FIXED_POINT_TOL {
            stop = StopReason::FixedPoint;
            break;
        }
        prev = opt.x;
    }
    Ok(SequenceTrace { converged: matches!(stop, StopReason::FixedPoint), iterates, stop_reason: stop, floor_optimum })
}

/// Asymptotic diagnostics of an alternating sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SequenceSummary {
    pub iterations: usize,
    pub y_opt: f64,
    pub final_optical_depth: f64,
    pub final_surface_biomass: f64,
    /// `Y_opt / alpha0`.
    pub surface_biomass_limit: f64,
    pub final_pi: f64,
    /// `P(Y_opt) / alpha0`.
    pub pi_limit: f64,
    pub relative_pi_gap: f64,
    /// Log-log slope of `Pi_n` against `X_n` over the last decade of iterates.
    pub pi_growth_exponent: f64,
    /// `1 - s`.
    pub expected_growth_exponent: f64,
    /// `Pi_n / X_n^(1-s)` at the last iterate.
    pub scaled_pi: f64,
    pub diverging: bool,
}

impl SequenceTrace {
    /// First index violating strict monotonicity of `X_n` (up), `h_n` (down)
    /// or `Pi_n` (up).
    pub fn monotonicity_violation(&self) -> Option<usize> {
        self.iterates.windows(2).position(|w| !(w[1].x > w[0].x && w[1].h < w[0].h && w[1].pi > w[0].pi)).map(|i| i + 1)
    }

    /// Iterates `n >= N/10` for the last iterate `N`.
    pub fn last_decade(&self) -> &[Iterate] {
        let n = self.iterates.len();
        let start = (n / 10).saturating_sub(1).min(n.saturating_sub(1));
        &self.iterates[start..]
    }

    pub fn summary(&self, sc: &Scenario) -> Result<SequenceSummary> {
        let last = *self.iterates.last().ok_or_else(|| Error::Domain("empty sequence".into()))?;
        let y = y_opt(&sc.growth, sc.surface_light)?.y_opt;
        let m = &sc.extinction;
        let pi_limit = sc.optical_productivity(y) / m.alpha0;
        let decade = self.last_decade();
        let first = decade[0];
        let exponent = if decade.len() >= 2 && last.x > first.x && first.pi > 0.0 && last.pi > 0.0 {
            (last.pi / first.pi).ln() / (last.x / first.x).ln()
        } else {
            f64::NAN
        };
        let expected = 1.0 - m.s;
        Ok(SequenceSummary {
            iterations: self.iterates.len(),
            y_opt: y,
            final_optical_depth: last.y,
            final_surface_biomass: last.x * last.h,
            surface_biomass_limit: y / m.alpha0,
            final_pi: last.pi,
            pi_limit,
            relative_pi_gap: (last.pi - pi_limit).abs() / pi_limit,
            pi_growth_exponent: exponent,
            expected_growth_exponent: expected,
            scaled_pi: last.pi / last.x.powf(expected),
            diverging: m.s < 1.0 && exponent > 0.5 * expected,
        })
    }
}
