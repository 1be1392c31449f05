use serde::Serialize;

use super::Tolerance;
use crate::error::{Error, Result};

/// Accepted steps of an ODE integration, including the initial point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &[f64] {
        self.states.last().expect("trajectory holds the initial state")
    }

    /// Linear interpolation of component `i` at time `t` (clamped to the span).
    pub fn sample(&self, i: usize, t: f64) -> f64 {
        let k = self.times.partition_point(|&s| s < t);
        if k == 0 {
            return self.states[0][i];
        }
        if k >= self.times.len() {
            return self.final_state()[i];
        }
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let w = (t - t0) / (t1 - t0);
        self.states[k - 1][i] * (1.0 - w) + self.states[k][i] * w
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub tol: Tolerance,
    /// First trial step; `None` picks one from the derivative norm.
    pub initial_step: Option<f64>,
    pub max_step: Option<f64>,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { tol: Tolerance::ode(), initial_step: None, max_step: None }
    }
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] =
    [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];

pub fn integrate_ode<F>(rhs: F, x0: &[f64], t_span: [f64; 2], tol: Tolerance) -> Result<Trajectory>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    integrate_ode_with(rhs, x0, t_span, &OdeOptions { tol, ..OdeOptions::default() })
}

/// Adaptive explicit Dormand-Prince 5(4) integration over `t_span`.
///
/// The local error of each accepted step satisfies the mixed
/// `abs + rel * |x|` test in RMS norm. `tol.max_iter` caps the number of
/// attempted steps.
pub fn integrate_ode_with<F>(rhs: F, x0: &[f64], t_span: [f64; 2], opts: &OdeOptions) -> Result<Trajectory>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    let [t0, t1] = t_span;
    if !(t0 < t1) {
        return Err(Error::Domain(format!("ODE span requires t0 < t1 (got {t0}, {t1})")));
    }
    let n = x0.len();
    let tol = opts.tol;
    let max_step = opts.max_step.unwrap_or(t1 - t0).min(t1 - t0);

    let mut t = t0;
    let mut x = x0.to_vec();
    let mut k = vec![vec![0.0; n]; 7];
    let mut stage = vec![0.0; n];
    let mut x5 = vec![0.0; n];
    rhs(t, &x, &mut k[0]);

    let mut step = match opts.initial_step {
        Some(h) => h,
        None => {
            let scale: f64 =
                x.iter().zip(&k[0]).map(|(xi, di)| (di / (tol.abs + tol.rel * xi.abs())).powi(2)).sum::<f64>();
            let d = (scale / n.max(1) as f64).sqrt();
            if d > 1e-10 {
                0.01 / d
            } else {
                1e-6 * (t1 - t0)
            }
        }
    }
    .min(max_step);

    let mut out = Trajectory { times: vec![t], states: vec![x.clone()] };
    for _ in 0..tol.max_iter {
        if t >= t1 {
            return Ok(out);
        }
        let last = t + step >= t1;
        let h = if last { t1 - t } else { step };

        for s in 1..7 {
            for i in 0..n {
                let mut acc = x[i];
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += h * A[s][j] * kj[i];
                }
                stage[i] = acc;
            }
            rhs(t + C[s] * h, &stage, &mut k[s]);
        }
        let mut err_sq = 0.0;
        for i in 0..n {
            let mut hi5 = 0.0;
            let mut hi4 = 0.0;
            for s in 0..7 {
                hi5 += B5[s] * k[s][i];
                hi4 += B4[s] * k[s][i];
            }
            x5[i] = x[i] + h * hi5;
            let sc = tol.abs + tol.rel * x[i].abs().max(x5[i].abs());
            err_sq += (h * (hi5 - hi4) / sc).powi(2);
        }
        let err = (err_sq / n.max(1) as f64).sqrt();
        if !err.is_finite() {
            step = 0.25 * h;
        } else if err <= 1.0 {
            t = if last { t1 } else { t + h };
            x.copy_from_slice(&x5);
            // FSAL: the last stage is the derivative at the new point.
            let (first, rest) = k.split_at_mut(6);
            first[0].copy_from_slice(&rest[0]);
            out.times.push(t);
            out.states.push(x.clone());
            let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            step = (h * grow).min(max_step);
            continue;
        } else {
            step = h * (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
        }
        if step < 1e-14 * t.abs().max(t1 - t0) {
            return Err(Error::StepUnderflow { t, step });
        }
    }
    if t >= t1 {
        return Ok(out);
    }
    Err(Error::NonConvergence { what: "ODE integration", iterations: tol.max_iter })
}
