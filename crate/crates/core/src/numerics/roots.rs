use super::{Bracket, Tolerance};
use crate::error::{Error, Result};

/// Root of `f` inside `bracket` by Illinois-weighted false position with a
/// bisection fallback whenever an iteration fails to halve the bracket.
///
/// Every iterate stays inside the bracket. Converged when `|f(x)| <= tol.abs`
/// or the bracket width is at most `tol.rel * |x|`.
pub fn find_root<F: Fn(f64) -> f64>(f: F, bracket: Bracket, tol: Tolerance) -> Result<f64> {
    let (mut a, mut b) = (bracket.lo(), bracket.hi());
    let (mut fa, mut fb) = (f(a), f(b));
    if fa.is_nan() || fb.is_nan() {
        return Err(Error::InvalidBracket { lo: a, hi: b, reason: "function is NaN at an endpoint" });
    }
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::InvalidBracket { lo: a, hi: b, reason: "function has the same sign at both ends" });
    }

    // Which side was retained on the previous step (-1 = a, +1 = b).
    let mut retained = 0i8;
    let mut width = b - a;
    for _ in 0..tol.max_iter {
        let secant = b - fb * (b - a) / (fb - fa);
        let x = if secant > a && secant < b { secant } else { 0.5 * (a + b) };
        let fx = f(x);
        if fx.is_nan() {
            return Err(Error::Domain(format!("function is NaN at {x}")));
        }
        if fx.abs() <= tol.abs || fx == 0.0 {
            return Ok(x);
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
            if retained == 1 {
                fb *= 0.5;
            }
            retained = 1;
        } else {
            b = x;
            fb = fx;
            if retained == -1 {
                fa *= 0.5;
            }
            retained = -1;
        }

        let new_width = b - a;
        let mid = 0.5 * (a + b);
        if new_width <= tol.rel * mid.abs() || new_width <= f64::EPSILON * mid.abs() || new_width == 0.0 {
            return Ok(if fa.abs() < fb.abs() { a } else { b });
        }
        if new_width > 0.5 * width {
            // Slow progress: force a bisection.
            let fm = f(mid);
            if fm.abs() <= tol.abs || fm == 0.0 {
                return Ok(mid);
            }
            if fm.signum() == fa.signum() {
                a = mid;
                fa = fm;
            } else {
                b = mid;
                fb = fm;
            }
            retained = 0;
        }
        width = b - a;
    }
    Err(Error::NonConvergence { what: "bracketed root finding", iterations: tol.max_iter })
}
