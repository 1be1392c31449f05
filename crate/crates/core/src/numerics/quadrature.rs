use std::collections::BinaryHeap;

use super::Tolerance;
use crate::error::{Error, Result};

struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    depth: usize,
}

struct Refined {
    err: f64,
    value: f64,
    left: Panel,
    right: Panel,
}

impl PartialEq for Refined {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Refined {}
impl PartialOrd for Refined {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Refined {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&other.err)
    }
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

fn refine<F: Fn(f64) -> f64>(f: &F, p: Panel) -> Refined {
    let m = 0.5 * (p.a + p.b);
    let lm = 0.5 * (p.a + m);
    let rm = 0.5 * (m + p.b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(p.a, m, p.fa, flm, p.fm);
    let right = simpson(m, p.b, p.fm, frm, p.fb);
    let halves = left + right;
    // Richardson: the composite rule is accurate to (halves - whole) / 15.
    let delta = (halves - p.whole) / 15.0;
    Refined {
        err: delta.abs(),
        value: halves + delta,
        left: Panel { a: p.a, b: m, fa: p.fa, fm: flm, fb: p.fm, whole: left, depth: p.depth + 1 },
        right: Panel { a: m, b: p.b, fa: p.fm, fm: frm, fb: p.fb, whole: right, depth: p.depth + 1 },
    }
}

/// Globally adaptive Simpson quadrature with a Richardson error estimate.
///
/// Panels are refined worst-first until the summed error estimate falls
/// below `max(tol.abs, tol.rel * |I|)`. `tol.max_iter` bounds the bisection
/// depth of any single panel. Reversed limits give the negated integral.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    if b < a {
        return integrate(f, b, a, tol).map(|v| -v);
    }
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::Domain(format!("integration limits must be finite ({a}, {b})")));
    }

    const MAX_PANELS: usize = 200_000;
    // Seed with a handful of panels so that narrow features are not missed.
    const SEED: usize = 8;
    let mut heap = BinaryHeap::new();
    let mut total = 0.0;
    let mut total_err = 0.0;
    let step = (b - a) / SEED as f64;
    let mut x0 = a;
    let mut f0 = f(a);
    for i in 0..SEED {
        let x1 = if i + 1 == SEED { b } else { a + step * (i + 1) as f64 };
        let f1 = f(x1);
        let fm = f(0.5 * (x0 + x1));
        let panel = Panel { a: x0, b: x1, fa: f0, fm, fb: f1, whole: simpson(x0, x1, f0, fm, f1), depth: 0 };
        let r = refine(&f, panel);
        total += r.value;
        total_err += r.err;
        heap.push(r);
        x0 = x1;
        f0 = f1;
    }

    let mut panels = SEED;
    loop {
        if !total.is_finite() {
            return Err(Error::Domain("integrand is not finite on the interval".into()));
        }
        let target = tol.abs.max(tol.rel * total.abs());
        if total_err <= target {
            return Ok(total);
        }
        let worst = heap.pop().expect("heap never empties");
        if worst.left.depth >= tol.max_iter || panels >= MAX_PANELS {
            // Accept if the remaining error is at rounding level.
            if total_err <= 64.0 * f64::EPSILON * total.abs().max(tol.abs) {
                return Ok(total);
            }
            return Err(Error::NonConvergence { what: "adaptive quadrature", iterations: panels });
        }
        total -= worst.value;
        total_err -= worst.err;
        for child in [worst.left, worst.right] {
            let r = refine(&f, child);
            total += r.value;
            total_err += r.err;
            heap.push(r);
        }
        panels += 1;
        // Re-sum periodically to stop drift from incremental updates.
        if panels.is_multiple_of(4096) {
            total = heap.iter().map(|r| r.value).sum();
            total_err = heap.iter().map(|r| r.err).sum();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerance {
        Tolerance::quadrature()
    }

    #[test]
    fn constant_on_unit_interval() {
        let v = integrate(|_| 1.0, 0.0, 1.0, tol()).unwrap();
        assert!((v - 1.0).abs() < 1e-14);
    }

    #[test]
    fn decaying_exponential() {
        let v = integrate(|x: f64| (-x).exp(), 0.0, 6.337, tol()).unwrap();
        let exact = 1.0 - (-6.337f64).exp();
        assert!(((v - exact) / exact).abs() < 1e-10);
        assert!((v - 0.998230397).abs() < 1e-9);
    }

    #[test]
    fn empty_and_reversed_intervals() {
        assert_eq!(integrate(|x| x * x, 2.0, 2.0, tol()).unwrap(), 0.0);
        let fwd = integrate(|x: f64| x.sin(), 0.0, 2.0, tol()).unwrap();
        let rev = integrate(|x: f64| x.sin(), 2.0, 0.0, tol()).unwrap();
        assert_eq!(fwd, -rev);
    }

    #[test]
    fn additivity_over_subintervals() {
        let f = |x: f64| 1.0 / (1.0 + x * x);
        let whole = integrate(f, 0.0, 5.0, tol()).unwrap();
        let split = integrate(f, 0.0, 1.7, tol()).unwrap() + integrate(f, 1.7, 5.0, tol()).unwrap();
        assert!((whole - split).abs() < 2e-10 * whole);
        assert!((whole - 5f64.atan()).abs() < 1e-10);
    }

    #[test]
    fn nonconvergence_on_singular_integrand() {
        let t = Tolerance::new(1e-12, 0.0, 12).unwrap();
        let r = integrate(|x: f64| 1.0 / x.abs().sqrt().max(1e-300), -1.0, 1.0, t);
        assert!(matches!(r, Err(Error::NonConvergence { .. })));
    }

    proptest::proptest! {
        #[test]
        fn linear_in_integrand(alpha in -5.0f64..5.0, beta in -5.0f64..5.0, b in 0.1f64..10.0) {
            let f = |x: f64| (0.3 * x).cos();
            let g = |x: f64| x * (-x).exp();
            let lhs = integrate(|x| alpha * f(x) + beta * g(x), 0.0, b, tol()).unwrap();
            let rhs = alpha * integrate(f, 0.0, b, tol()).unwrap() + beta * integrate(g, 0.0, b, tol()).unwrap();
            let scale = alpha.abs() * integrate(|x| f(x).abs(), 0.0, b, tol()).unwrap()
                + beta.abs() * integrate(|x| g(x).abs(), 0.0, b, tol()).unwrap();
            proptest::prop_assert!((lhs - rhs).abs() <= 2.0 * 1e-10 * scale.max(1e-300) + 1e-15);
        }
    }
}
