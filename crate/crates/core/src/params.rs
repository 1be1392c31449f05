//! Parameter files and named presets.
//!
//! A parameter file is a flat TOML table whose keys carry their unit:
//!
//! ```toml
//! k_r_per_s = 6.8e-3
//! k_d = 2.99e-4
//! tau_s = 0.25
//! sigma_m2_per_umol = 0.047
//! k_yield = 8.7e-6
//! R_per_s = 1.389e-6
//! alpha1_per_m = 10.0
//! s = 1.0
//! I_s_umol_per_m2_s = 2000.0
//! ```
//!
//! Growth is given either by the Han keys above or directly in Haldane form
//! (`theta_per_s`, `mu_max_per_d`, `I_star_umol_per_m2_s`, `R_per_d`).
//! When `alpha0_m2_per_g` is omitted it is fitted so that the extinction
//! law matches the linear reference law (`alpha0 = 0.2`, `s = 1`) on
//! `[0, 1000] g/m^3`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::growth::{han_to_haldane, HaldaneParams, HanParams, SECONDS_PER_DAY};
use crate::light::{fit_alpha0, ExtinctionModel, DEFAULT_FIT_POINTS, DEFAULT_FIT_RANGE};
use crate::productivity::Scenario;

pub const DEFAULT_SURFACE_LIGHT: f64 = 2000.0;
pub const DEFAULT_TURBIDITY: f64 = 10.0;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsFile {
    pub k_r_per_s: Option<f64>,
    pub k_d: Option<f64>,
    pub tau_s: Option<f64>,
    pub sigma_m2_per_umol: Option<f64>,
    pub k_yield: Option<f64>,
    #[serde(rename = "R_per_s")]
    pub r_per_s: Option<f64>,

    pub theta_per_s: Option<f64>,
    pub mu_max_per_d: Option<f64>,
    #[serde(rename = "I_star_umol_per_m2_s")]
    pub i_star_umol_per_m2_s: Option<f64>,
    #[serde(rename = "R_per_d")]
    pub r_per_d: Option<f64>,

    pub alpha0_m2_per_g: Option<f64>,
    pub alpha1_per_m: Option<f64>,
    pub s: Option<f64>,
    #[serde(rename = "I_s_umol_per_m2_s")]
    pub i_s_umol_per_m2_s: Option<f64>,
}

fn missing(key: &str) -> Error {
    Error::Params(format!("missing key `{key}`"))
}

impl ParamsFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Params(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Params(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("flat table of floats always serializes")
    }

    fn han_keys(&self) -> [Option<f64>; 5] {
        [self.k_r_per_s, self.k_d, self.tau_s, self.sigma_m2_per_umol, self.k_yield]
    }

    fn haldane_keys(&self) -> [Option<f64>; 3] {
        [self.theta_per_s, self.mu_max_per_d, self.i_star_umol_per_m2_s]
    }

    /// Han parameters, when the file is written in Han form.
    pub fn han(&self) -> Result<Option<HanParams>> {
        if self.han_keys().iter().all(Option::is_none) {
            return Ok(None);
        }
        let r = match (self.r_per_s, self.r_per_d) {
            (Some(r), None) => r,
            (None, Some(r)) => r / SECONDS_PER_DAY,
            (Some(_), Some(_)) => return Err(Error::Params("give only one of `R_per_s`, `R_per_d`".into())),
            (None, None) => return Err(missing("R_per_s")),
        };
        let p = HanParams::new(
            self.k_r_per_s.ok_or_else(|| missing("k_r_per_s"))?,
            self.k_d.ok_or_else(|| missing("k_d"))?,
            self.tau_s.ok_or_else(|| missing("tau_s"))?,
            self.sigma_m2_per_umol.ok_or_else(|| missing("sigma_m2_per_umol"))?,
            self.k_yield.ok_or_else(|| missing("k_yield"))?,
            r,
        )
        .map_err(|e| Error::Params(e.to_string()))?;
        Ok(Some(p))
    }

    pub fn growth(&self) -> Result<HaldaneParams> {
        let han_given = self.han_keys().iter().any(Option::is_some);
        let haldane_given = self.haldane_keys().iter().any(Option::is_some);
        if han_given && haldane_given {
            return Err(Error::Params("growth given in both Han and Haldane form".into()));
        }
        if let Some(h) = self.han()? {
            return Ok(han_to_haldane(&h));
        }
        let r = match (self.r_per_s, self.r_per_d) {
            (Some(r), None) => r * SECONDS_PER_DAY,
            (None, Some(r)) => r,
            (Some(_), Some(_)) => return Err(Error::Params("give only one of `R_per_s`, `R_per_d`".into())),
            (None, None) => return Err(missing("R_per_d")),
        };
        HaldaneParams::new(
            self.theta_per_s.ok_or_else(|| missing("theta_per_s"))? * SECONDS_PER_DAY,
            self.mu_max_per_d.ok_or_else(|| missing("mu_max_per_d"))?,
            self.i_star_umol_per_m2_s.ok_or_else(|| missing("I_star_umol_per_m2_s"))?,
            r,
        )
        .map_err(|e| Error::Params(e.to_string()))
    }

    pub fn extinction(&self) -> Result<ExtinctionModel> {
        let alpha1 = self.alpha1_per_m.unwrap_or(DEFAULT_TURBIDITY);
        let s = self.s.unwrap_or(1.0);
        let alpha0 = match self.alpha0_m2_per_g {
            Some(a) => a,
            None if s == 1.0 => ExtinctionModel::chlorella(alpha1).alpha0,
            None => {
                let reference = ExtinctionModel::chlorella(alpha1);
                fit_alpha0(&reference, s, DEFAULT_FIT_RANGE, DEFAULT_FIT_POINTS)
                    .map_err(|e| Error::Params(e.to_string()))?
            }
        };
        ExtinctionModel::new(alpha0, alpha1, s).map_err(|e| Error::Params(e.to_string()))
    }

    pub fn scenario(&self) -> Result<Scenario> {
        let is = self.i_s_umol_per_m2_s.unwrap_or(DEFAULT_SURFACE_LIGHT);
        Scenario::new(self.growth()?, self.extinction()?, is).map_err(|e| Error::Params(e.to_string()))
    }
}

/// Bundled parameter sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Preset {
    /// Reference table as printed (`R = 1.389e-7 1/s`).
    Table1AsPrinted,
    /// Reference table with `R = 1.389e-6 1/s`.
    Table1RX10,
    /// Linear extinction `alpha0 = 0.2`, `alpha1 = 10`.
    ChlorellaS1,
    /// Extinction exponent `s = 0.365`, `alpha0` fitted to the linear law.
    ChlorellaS0365,
}

impl Preset {
    pub const ALL: [Preset; 4] =
        [Preset::Table1AsPrinted, Preset::Table1RX10, Preset::ChlorellaS1, Preset::ChlorellaS0365];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Table1AsPrinted => "table1-as-printed",
            Preset::Table1RX10 => "table1-R-x10",
            Preset::ChlorellaS1 => "chlorella-s1",
            Preset::ChlorellaS0365 => "chlorella-s0365",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|p| p.name() == name).ok_or_else(|| {
            let names: Vec<_> = Self::ALL.iter().map(|p| p.name()).collect();
            Error::Params(format!("unknown preset `{name}` (known: {})", names.join(", ")))
        })
    }

    /// The preset written as a parameter file.
    pub fn file(self) -> ParamsFile {
        let han = match self {
            Preset::Table1AsPrinted => HanParams::table1(),
            _ => HanParams::table1_r_x10(),
        };
        let s = if self == Preset::ChlorellaS0365 { 0.365 } else { 1.0 };
        ParamsFile {
            k_r_per_s: Some(han.k_r),
            k_d: Some(han.k_d),
            tau_s: Some(han.tau),
            sigma_m2_per_umol: Some(han.sigma),
            k_yield: Some(han.k),
            r_per_s: Some(han.respiration),
            alpha0_m2_per_g: (s == 1.0).then_some(0.2),
            alpha1_per_m: Some(DEFAULT_TURBIDITY),
            s: Some(s),
            i_s_umol_per_m2_s: Some(DEFAULT_SURFACE_LIGHT),
            ..ParamsFile::default()
        }
    }

    pub fn scenario(self) -> Scenario {
        self.file().scenario().expect("bundled presets are valid")
    }
}
