//! Beer-Lambert light field in a well-mixed column.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Extinction law `eps(X) = alpha0 * X^s + alpha1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtinctionModel {
    /// Specific extinction of the biomass [m^(3s-1) g^-s; m^2/g for s = 1].
    pub alpha0: f64,
    /// Background turbidity [1/m].
    pub alpha1: f64,
    /// Exponent in (0, 1].
    pub s: f64,
}

impl ExtinctionModel {
    pub fn new(alpha0: f64, alpha1: f64, s: f64) -> Result<Self> {
        if !(alpha0 > 0.0) || !alpha0.is_finite() {
            return Err(Error::Domain(format!("alpha0 must be positive (got {alpha0})")));
        }
        if !(alpha1 >= 0.0) || !alpha1.is_finite() {
            return Err(Error::Domain(format!("alpha1 must be non-negative (got {alpha1})")));
        }
        if !(s > 0.0 && s <= 1.0) {
            return Err(Error::Domain(format!("extinction exponent s must lie in (0, 1] (got {s})")));
        }
        Ok(Self { alpha0, alpha1, s })
    }

    /// Linear law with the Chlorella coefficients (alpha0 = 0.2 m^2/g).
    pub fn chlorella(alpha1: f64) -> Self {
        Self { alpha0: 0.2, alpha1, s: 1.0 }
    }

    /// Extinction coefficient [1/m] at concentration `x` [g/m^3].
    #[inline]
    pub fn extinction(&self, x: f64) -> f64 {
        if self.s == 1.0 {
            self.alpha0 * x + self.alpha1
        } else {
            self.alpha0 * x.powf(self.s) + self.alpha1
        }
    }

    /// d eps / dX.
    #[inline]
    pub fn extinction_slope(&self, x: f64) -> f64 {
        if self.s == 1.0 {
            self.alpha0
        } else {
            self.alpha0 * self.s * x.powf(self.s - 1.0)
        }
    }

    /// Concentration with `eps(X) = target`, if one exists on X >= 0.
    pub fn concentration_for(&self, target: f64) -> Option<f64> {
        let excess = target - self.alpha1;
        if excess < 0.0 {
            return None;
        }
        let base = excess / self.alpha0;
        Some(if self.s == 1.0 { base } else { base.powf(1.0 / self.s) })
    }

    pub fn with_alpha1(self, alpha1: f64) -> Self {
        Self { alpha1, ..self }
    }
}

/// Light input and geometry of a culture column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LightColumn {
    /// Surface intensity [umol m^-2 s^-1].
    pub surface_light: f64,
    /// Depth h [m].
    pub depth: f64,
    /// Biomass concentration X [g/m^3].
    pub concentration: f64,
}

impl LightColumn {
    pub fn new(surface_light: f64, depth: f64, concentration: f64) -> Result<Self> {
        if !(surface_light >= 0.0) || !(depth > 0.0) || !(concentration >= 0.0) {
            return Err(Error::Domain(format!(
                "light column needs I_s >= 0, h > 0, X >= 0 (got {surface_light}, {depth}, {concentration})"
            )));
        }
        Ok(Self { surface_light, depth, concentration })
    }

    /// Optical depth `Y = eps(X) h`.
    pub fn optical_depth(&self, m: &ExtinctionModel) -> f64 {
        m.extinction(self.concentration) * self.depth
    }

    pub fn bottom_light(&self, m: &ExtinctionModel) -> f64 {
        self.surface_light * (-self.optical_depth(m)).exp()
    }
}

/// Intensity at height `z` in `[-h, 0]` (z = 0 at the surface).
pub fn intensity_at(c: &LightColumn, m: &ExtinctionModel, z: f64) -> Result<f64> {
    if !(z >= -c.depth && z <= 0.0) {
        return Err(Error::Domain(format!("z = {z} lies outside [-{}, 0]", c.depth)));
    }
    Ok(c.surface_light * (m.extinction(c.concentration) * z).exp())
}

/// `I_s * integral_{-h}^{0} exp(eps z) dz = (I_s / eps)(1 - exp(-eps h))`,
/// the light collected over the column [umol m^-1 s^-1].
pub fn column_light_integral(c: &LightColumn, m: &ExtinctionModel) -> f64 {
    mean_light(c, m) * c.depth
}

/// Depth-averaged intensity `(I_s / (eps h)) (1 - exp(-eps h))`.
pub fn mean_light(c: &LightColumn, m: &ExtinctionModel) -> f64 {
    let y = c.optical_depth(m);
    if y < 1e-8 {
        return c.surface_light * (1.0 - 0.5 * y);
    }
    c.surface_light * (-(-y).exp_m1()) / y
}

/// Best least-squares `alpha0` for exponent `s_new` against a linear law.
///
/// Minimizes `sum_i (alpha0(1) X_i - alpha0 X_i^s)^2` over a uniform grid of
/// `grid_n` points on `x_range`, giving
/// `alpha0 = alpha0(1) * sum X_i^(1+s) / sum X_i^(2s)`.
pub fn fit_alpha0(target: &ExtinctionModel, s_new: f64, x_range: (f64, f64), grid_n: usize) -> Result<f64> {
    if target.s != 1.0 {
        return Err(Error::Domain(format!("reference extinction law must be linear (s = {})", target.s)));
    }
    if !(s_new > 0.0 && s_new <= 1.0) {
        return Err(Error::Domain(format!("exponent must lie in (0, 1] (got {s_new})")));
    }
    let (lo, hi) = x_range;
    if lo == hi {
        return Err(Error::DegenerateRange { lo, hi });
    }
    if !(lo < hi) || lo < 0.0 || grid_n < 2 {
        return Err(Error::Domain(format!(
            "fit grid needs 0 <= X_min < X_max and >= 2 points (got [{lo}, {hi}], {grid_n})"
        )));
    }
    if s_new == 1.0 {
        return Ok(target.alpha0);
    }
    let step = (hi - lo) / (grid_n - 1) as f64;
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..grid_n {
        let x = lo + step * i as f64;
        num += x.powf(1.0 + s_new);
        den += x.powf(2.0 * s_new);
    }
    Ok(target.alpha0 * num / den)
}

/// Defaults for [`fit_alpha0`]: 1001 points over [0, 1000] g/m^3.
pub const DEFAULT_FIT_RANGE: (f64, f64) = (0.0, 1000.0);
pub const DEFAULT_FIT_POINTS: usize = 1001;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{integrate, Tolerance};

    #[test]
    fn extinction_values() {
        let m = ExtinctionModel::chlorella(10.0);
        assert_eq!(m.extinction(50.0), 20.0);
        assert_eq!(m.extinction(0.0), 10.0);
        let clear = ExtinctionModel::chlorella(0.0);
        assert!((clear.extinction(158.427) - 31.6854).abs() < 1e-9);
        let curved = ExtinctionModel::new(3.0, 2.5, 0.4).unwrap();
        assert_eq!(curved.extinction(0.0), 2.5);
    }

    #[test]
    fn invalid_models() {
        assert!(ExtinctionModel::new(0.0, 1.0, 1.0).is_err());
        assert!(ExtinctionModel::new(0.2, -1.0, 1.0).is_err());
        assert!(ExtinctionModel::new(0.2, 1.0, 0.0).is_err());
        assert!(ExtinctionModel::new(0.2, 1.0, 1.2).is_err());
    }

    #[test]
    fn intensity_profile() {
        let m = ExtinctionModel::chlorella(10.0);
        let c = LightColumn::new(2000.0, 0.31685, 50.0).unwrap();
        assert_eq!(intensity_at(&c, &m, 0.0).unwrap(), 2000.0);
        let bottom = intensity_at(&c, &m, -c.depth).unwrap();
        assert!((bottom - 2000.0 * (-6.337f64).exp()).abs() < 1e-10);
        assert!((bottom - 3.54).abs() < 5e-3);
        assert!(intensity_at(&c, &m, 0.1).is_err());
        assert!(intensity_at(&c, &m, -0.4).is_err());
        let transparent = LightColumn::new(2000.0, 1.0, 0.0).unwrap();
        let m0 = ExtinctionModel::chlorella(0.0);
        assert_eq!(intensity_at(&transparent, &m0, -0.7).unwrap(), 2000.0);
    }

    #[test]
    fn mean_light_values() {
        let m = ExtinctionModel::chlorella(10.0);
        let c = LightColumn::new(2000.0, 0.31685, 50.0).unwrap();
        let integral = column_light_integral(&c, &m);
        assert!((integral - 100.0 * (1.0 - (-6.337f64).exp())).abs() < 1e-9);
        assert!((integral - 99.82).abs() < 5e-3);
        assert!((mean_light(&c, &m) - integral / 0.31685).abs() < 1e-9);

        let quad =
            integrate(|z| intensity_at(&c, &m, z).unwrap(), -c.depth, 0.0, Tolerance::new(1e-13, 0.0, 60).unwrap())
                .unwrap();
        assert!(((quad / c.depth - mean_light(&c, &m)) / mean_light(&c, &m)).abs() < 1e-10);
    }

    #[test]
    fn mean_light_transparent_limit() {
        let m = ExtinctionModel::chlorella(0.0);
        let c = LightColumn::new(1500.0, 0.2, 0.0).unwrap();
        assert_eq!(mean_light(&c, &m), 1500.0);
        // Series branch vs closed form right at the switch.
        let tiny = ExtinctionModel::new(1e-8 / 0.2, 0.0, 1.0).unwrap();
        let c1 = LightColumn::new(1500.0, 0.2, 1.0).unwrap();
        let y: f64 = tiny.extinction(1.0) * 0.2;
        let closed = 1500.0 * (-(-y).exp_m1()) / y;
        assert!(((mean_light(&c1, &tiny) - closed) / closed).abs() < 1e-10);
    }

    #[test]
    fn mean_light_decreases_with_extinction() {
        let c = LightColumn::new(2000.0, 0.1, 100.0).unwrap();
        let mut last = f64::INFINITY;
        for a1 in [0.0, 1.0, 5.0, 20.0, 100.0] {
            let v = mean_light(&c, &ExtinctionModel::chlorella(a1));
            assert!(v < last);
            last = v;
        }
    }

    #[test]
    fn bottom_light_is_optical_depth_attenuation() {
        let m = ExtinctionModel::new(11.0, 4.0, 0.365).unwrap();
        let c = LightColumn::new(1800.0, 0.07, 320.0).unwrap();
        let y = c.optical_depth(&m);
        assert!((intensity_at(&c, &m, -c.depth).unwrap() - 1800.0 * (-y).exp()).abs() < 1e-12 * 1800.0);
    }

    #[test]
    fn fit_identity_and_oracle() {
        let reference = ExtinctionModel::chlorella(10.0);
        assert_eq!(fit_alpha0(&reference, 1.0, DEFAULT_FIT_RANGE, DEFAULT_FIT_POINTS).unwrap(), 0.2);

        // Oracle: minimize the sum of squared residuals by golden section on alpha0.
        let s = 0.365;
        let xs: Vec<f64> = (0..1001).map(|i| i as f64).collect();
        let sse = |a: f64| xs.iter().map(|x| (0.2 * x - a * x.powf(s)).powi(2)).sum::<f64>();
        let (best, _) = crate::numerics::maximize_scalar(
            |a| -sse(a),
            crate::numerics::Bracket::new(0.0, 100.0).unwrap(),
            Tolerance::new(1e-12, 0.0, 500).unwrap(),
        )
        .unwrap();
        let fitted = fit_alpha0(&reference, s, DEFAULT_FIT_RANGE, DEFAULT_FIT_POINTS).unwrap();
        assert!(((fitted - best) / best).abs() < 1e-7);
        assert!((fitted - 11.759353359243084).abs() < 1e-9);
    }

    #[test]
    fn fit_errors() {
        let reference = ExtinctionModel::chlorella(10.0);
        assert!(matches!(fit_alpha0(&reference, 0.5, (3.0, 3.0), 11), Err(Error::DegenerateRange { .. })));
        let curved = ExtinctionModel::new(1.0, 0.0, 0.5).unwrap();
        assert!(fit_alpha0(&curved, 0.5, (0.0, 10.0), 11).is_err());
    }

    proptest::proptest! {
        #[test]
        fn fit_scales_linearly(s in 0.05f64..1.0, scale in 0.1f64..10.0) {
            let base = ExtinctionModel::chlorella(0.0);
            let scaled = ExtinctionModel { alpha0: 0.2 * scale, ..base };
            let a = fit_alpha0(&base, s, DEFAULT_FIT_RANGE, DEFAULT_FIT_POINTS).unwrap();
            let b = fit_alpha0(&scaled, s, DEFAULT_FIT_RANGE, DEFAULT_FIT_POINTS).unwrap();
            proptest::prop_assert!(a > 0.0);
            proptest::prop_assert!(((b - scale * a) / (scale * a)).abs() < 1e-12);
        }

        #[test]
        fn extinction_strictly_increasing(a0 in 0.01f64..20.0, a1 in 0.0f64..30.0, s in 0.05f64..=1.0, x in 0.0f64..1e4) {
            let m = ExtinctionModel::new(a0, a1, s).unwrap();
            proptest::prop_assert!(m.extinction(x * 1.01 + 1e-3) > m.extinction(x));
        }
    }
}
