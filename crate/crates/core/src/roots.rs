//! Bracketed scalar root finders.
//!
//! Both routines keep a sign-changing bracket at all times, so they converge
//! for any continuous function once a bracket is supplied.

use crate::error::{Error, Result};

const MAX_ITER: usize = 200;

/// Safeguarded Newton iteration. `f` returns the value and the derivative.
///
/// A Newton step is taken whenever it stays inside the current bracket and
/// shrinks the residual fast enough; otherwise the bracket is bisected.
/// Iteration stops once the bracket or the Newton correction is below `xtol`.
pub fn newton_bisect<F>(mut f: F, lo: f64, hi: f64, xtol: f64) -> Result<f64>
where
    F: FnMut(f64) -> (f64, f64),
{
    let (f_lo, _) = f(lo);
    let (f_hi, _) = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() || f_lo.is_nan() || f_hi.is_nan() {
        return Err(Error::RootNotBracketed { lo, hi, f_lo, f_hi });
    }
    // orient so that f(neg) < 0 < f(pos)
    let (mut neg, mut pos) = if f_lo < 0.0 { (lo, hi) } else { (hi, lo) };

    let mut x = 0.5 * (lo + hi);
    let mut dx_old = (hi - lo).abs();
    let mut dx = dx_old;
    let (mut fx, mut dfx) = f(x);

    for _ in 0..MAX_ITER {
        if fx == 0.0 {
            return Ok(x);
        }
        let newton_leaves = ((x - pos) * dfx - fx) * ((x - neg) * dfx - fx) > 0.0;
        let newton_slow = (2.0 * fx).abs() > (dx_old * dfx).abs();
        dx_old = dx;
        if newton_leaves || newton_slow || dfx == 0.0 {
            dx = 0.5 * (pos - neg);
            x = neg + dx;
        } else {
            dx = fx / dfx;
            x -= dx;
        }
        if dx.abs() <= xtol || (pos - neg).abs() <= xtol {
            return Ok(x);
        }
        (fx, dfx) = f(x);
        if fx < 0.0 {
            neg = x;
        } else {
            pos = x;
        }
    }
    Err(Error::RootNotConverged { iterations: MAX_ITER })
}

/// Bisection followed by Illinois-modified regula falsi, for functions that
/// are expensive or have no cheap derivative (event location, return maps).
///
/// Bisection runs until the bracket is narrower than `bisect_width`, then
/// the secant-type Illinois iteration polishes the root until the bracket
/// or the last step is below `xtol·(1 + |x|)`.
pub fn bisect_then_secant<F>(
    mut f: F,
    lo: f64,
    hi: f64,
    bisect_width: f64,
    xtol: f64,
) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut a = lo;
    let mut b = hi;
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || fa.is_nan() || fb.is_nan() {
        return Err(Error::RootNotBracketed { lo, hi, f_lo: fa, f_hi: fb });
    }

    let mut iterations = 0;
    while (b - a).abs() > bisect_width.max(xtol * (1.0 + b.abs())) {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            return Ok(m);
        }
        let fm = f(m)?;
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
            fb = fm;
        }
        iterations += 1;
        if iterations > MAX_ITER {
            return Err(Error::RootNotConverged { iterations });
        }
    }

    // Illinois: b is the newest iterate, a the retained end of the bracket
    let mut side = 0i8;
    for _ in 0..MAX_ITER {
        let mut c = (a * fb - b * fa) / (fb - fa);
        if !(c > a.min(b) && c < a.max(b)) {
            c = 0.5 * (a + b);
        }
        let fc = f(c)?;
        if fc == 0.0 {
            return Ok(c);
        }
        let step = (c - b).abs();
        if fc.signum() == fb.signum() {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = b;
            fa = fb;
            b = c;
            fb = fc;
            side = 1;
        }
        let tol = xtol * (1.0 + b.abs());
        if (b - a).abs() <= tol || step <= 0.1 * tol {
            return Ok(b);
        }
    }
    Err(Error::RootNotConverged { iterations: MAX_ITER })
}
