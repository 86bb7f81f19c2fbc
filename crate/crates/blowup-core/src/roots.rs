use crate::error::{Error, Result};

/// Root of `f` inside the bracket `[lo, hi]` to absolute tolerance `tol`.
///
/// Brent's method (inverse quadratic / secant with a bisection safeguard);
/// every iterate stays inside the original bracket. The endpoints must
/// straddle a sign change.
pub fn find_root_bracketed<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    if !(lo < hi) {
        return Err(Error::Domain(format!("invalid bracket [{lo}, {hi}]")));
    }
    let mut a = lo;
    let mut b = hi;
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoSignChange {
            lo,
            hi,
            detail: format!("f({lo:.6e}) = {fa:.6e}, f({hi:.6e}) = {fb:.6e}"),
        });
    }

    // classic Brent bookkeeping: b is the best iterate, a the previous one,
    // c the last iterate with f of opposite sign to f(b)
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;

    for _ in 0..200 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            // attempt interpolation
            let s = fb / fa;
            let (mut p, mut q) = if a == c {
                // secant
                (2.0 * xm * s, 1.0 - s)
            } else {
                // inverse quadratic
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
            p = p.abs();
            if 2.0 * p < (3.0 * xm * q - (tol1 * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                // interpolation rejected: bisect
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
    }
    Err(Error::NonConvergence(format!(
        "root finding stalled near {b:.12e} with residual {fb:.3e}"
    )))
}

/// Sub-brackets of `grid` on which `f` changes sign. Values of modulus at
/// most `floor` are treated as numerically zero and carry no sign.
pub fn sign_change_brackets<F: Fn(f64) -> f64>(f: F, grid: &[f64], floor: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut last: Option<(f64, f64)> = None; // (x, signed value) of last definite point
    for &x in grid {
        let v = f(x);
        if v.abs() <= floor || !v.is_finite() {
            continue;
        }
        if let Some((px, pv)) = last {
            if pv.signum() != v.signum() {
                out.push((px, x));
            }
        }
        last = Some((x, v));
    }
    out
}
