use super::{Bracket, Tolerance};
use crate::error::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section search for the maximum of `f` on `bracket`.
///
/// Unimodality is not checked. Stops once the bracket width is at most
/// `tol.rel * |x| + tol.abs`; returns the best interior point seen.
pub fn maximize_scalar<F: Fn(f64) -> f64>(f: F, bracket: Bracket, tol: Tolerance) -> Result<(f64, f64)> {
    let (mut a, mut b) = (bracket.lo(), bracket.hi());
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);

    for _ in 0..tol.max_iter {
        let (x, fx) = if fc >= fd { (c, fc) } else { (d, fd) };
        let width = b - a;
        if width <= tol.rel * x.abs() + tol.abs || width <= 4.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE) {
            return Ok((x, fx));
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    Err(Error::NonConvergence { what: "golden-section search", iterations: tol.max_iter })
}
