//! Bracketing root finders shared by the solvers.

use crate::error::{Error, Result};

/// Bisection on `[lo, hi]`; `f(lo)` and `f(hi)` must differ in sign.
///
/// Stops when the bracket is `x_tol` wide (relative to the midpoint) or after
/// `max_iter` halvings, whichever comes first.
pub fn bisect<F>(f: F, mut lo: f64, mut hi: f64, x_tol: f64, max_iter: usize) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::NoBracket { lo, hi });
    }
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if (hi - lo).abs() <= x_tol * mid.abs() || mid == lo || mid == hi {
            return Ok(mid);
        }
        let fmid = f(mid);
        if fmid == 0.0 {
            return Ok(mid);
        }
        if fmid.signum() == flo.signum() {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Newton's method kept inside a sign-changing bracket: any step that leaves
/// the bracket, or fails to halve it, is replaced by a bisection step.
pub fn newton_bisect<F, D>(
    f: F,
    df: D,
    mut lo: f64,
    mut hi: f64,
    x0: f64,
    x_tol: f64,
    max_iter: usize,
) -> Result<f64>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::NoBracket { lo, hi });
    }
    // Orient so that f(lo) < 0.
    if flo > 0.0 {
        std::mem::swap(&mut lo, &mut hi);
    }
    let mut x = if x0 > lo.min(hi) && x0 < lo.max(hi) {
        x0
    } else {
        0.5 * (lo + hi)
    };
    let mut last_width = (hi - lo).abs();
    for _ in 0..max_iter {
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let width = (hi - lo).abs();
        if width <= x_tol * x.abs().max(f64::MIN_POSITIVE) {
            return Ok(x);
        }
        let d = df(x);
        let newton = x - fx / d;
        let inside = newton.is_finite() && newton > lo.min(hi) && newton < lo.max(hi);
        x = if inside && (width < 0.75 * last_width || (newton - x).abs() < 0.5 * width) {
            newton
        } else {
            0.5 * (lo + hi)
        };
        last_width = width;
    }
    Err(Error::NonConvergence {
        iterations: max_iter,
        best: x,
        residual: f(x).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_sqrt2() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-15, 200).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn bisect_requires_sign_change() {
        assert!(matches!(
            bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-12, 100),
            Err(Error::NoBracket { .. })
        ));
    }

    #[test]
    fn newton_bisect_cubic() {
        let f = |x: f64| x * x * x - 2.0 * x - 5.0;
        let df = |x: f64| 3.0 * x * x - 2.0;
        let r = newton_bisect(f, df, 2.0, 3.0, 2.5, 1e-15, 100).unwrap();
        assert!((r - 2.094_551_481_542_326_6).abs() < 1e-14);
    }

    #[test]
    fn newton_bisect_survives_flat_derivative() {
        // Newton from x0 = 0 would divide by zero.
        let f = |x: f64| x * x * x - x - 1.0;
        let df = |x: f64| 3.0 * x * x - 1.0;
        let r = newton_bisect(f, df, -2.0, 2.0, 1.0 / 3f64.sqrt(), 1e-14, 200).unwrap();
        assert!(f(r).abs() < 1e-12);
    }
}
