//! Bracketed scalar root finding: Brent's method (bisection safeguarded by
//! secant and inverse quadratic interpolation).

use crate::error::{Error, Result};

/// Finds `x` in `[lo, hi]` with `f(x) = 0`, assuming `f` changes sign over the
/// bracket. Stops when `|f| <= f_tol` or the bracket width drops below
/// `x_tol`; convergence is guaranteed because every step is confined to the
/// current bracket.
pub fn find_root<F>(
    mut f: F,
    lo: f64,
    hi: f64,
    f_tol: f64,
    x_tol: f64,
    max_iter: usize,
    what: &'static str,
) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = (lo, hi);
    let mut fa = f(a);
    let mut fb = f(b);
    if libm::fabs(fa) <= f_tol {
        return Ok(a);
    }
    if libm::fabs(fb) <= f_tol {
        return Ok(b);
    }
    if fa.is_nan() || fb.is_nan() || (fa > 0.0) == (fb > 0.0) {
        return Err(Error::RootFind(what));
    }
    // c is the previous value of b; (b, fb) is the best iterate so far.
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if (fb > 0.0) == (fc > 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if libm::fabs(fc) < libm::fabs(fb) {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * libm::fabs(b) + 0.5 * x_tol;
        let xm = 0.5 * (c - b);
        if libm::fabs(fb) <= f_tol || libm::fabs(xm) <= tol1 {
            return Ok(b);
        }
        if libm::fabs(e) >= tol1 && libm::fabs(fa) > libm::fabs(fb) {
            // Attempt secant (two points) or inverse quadratic (three points).
            let s = fb / fa;
            let (mut p, mut q) = if a == c {
                (2.0 * xm * s, 1.0 - s)
            } else {
                let q0 = fa / fc;
                let r = fb / fc;
                (
                    s * (2.0 * xm * q0 * (q0 - r) - (b - a) * (r - 1.0)),
                    (q0 - 1.0) * (r - 1.0) * (s - 1.0),
                )
            };
            if p > 0.0 {
                q = -q;
            }
            p = libm::fabs(p);
            let min1 = 3.0 * xm * q - libm::fabs(tol1 * q);
            let min2 = libm::fabs(e * q);
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if libm::fabs(d) > tol1 {
            d
        } else if xm >= 0.0 {
            tol1
        } else {
            -tol1
        };
        fb = f(b);
        if fb.is_nan() {
            return Err(Error::RootFind(what));
        }
    }
    Err(Error::RootFind(what))
}
