use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("no convergence after {iterations} iterations ({what})")]
    NonConvergence { what: &'static str, iterations: usize },

    #[error("invalid bracket [{lo}, {hi}]: {reason}")]
    InvalidBracket { lo: f64, hi: f64, reason: &'static str },

    #[error("ODE step size collapsed to {step:e} at t = {t}")]
    StepUnderflow { t: f64, step: f64 },

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("degenerate range [{lo}, {hi}]")]
    DegenerateRange { lo: f64, hi: f64 },

    #[error("respiration R = {respiration} must be below mu_max = {mu_max} (no compensation light exists)")]
    InfeasibleRespiration { respiration: f64, mu_max: f64 },

    #[error("surface light {surface_light} is below the compensation light {compensation_light}")]
    DarkSurface { surface_light: f64, compensation_light: f64 },

    #[error("bracket expansion reached the concentration cap {cap} with productivity still increasing")]
    BracketMiss { cap: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parameter file: {0}")]
    Params(String),
}

impl Error {
    /// True for failures of a numerical kernel, as opposed to bad input.
    /// A bracket reaching its cap counts as input: the cap is a setting.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NonConvergence { .. } | Error::StepUnderflow { .. })
    }
}

#[cfg(test)]
mod tests {
    use super::Error;

    #[test]
    fn numerical_classification() {
        assert!(Error::NonConvergence { what: "x", iterations: 1 }.is_numerical());
        assert!(Error::StepUnderflow { t: 0.0, step: 0.0 }.is_numerical());
        assert!(!Error::BracketMiss { cap: 1.0 }.is_numerical());
        assert!(!Error::Config("x".into()).is_numerical());
    }
}
