//! Radial moment constants and bubble norms.
//!
//! The basic object is the (n-1)-dimensional moment
//!
//! ```text
//! B(m, k; D) = int_{R^{n-1}} |y|^m (|y|^2 + D^2 - 1)^{-k} dy
//!            = omega(n-2) * Gamma((n+m-1)/2) Gamma(k - (n+m-1)/2)
//!              / ( 2 Gamma(k) (D^2-1)^{k-(n+m-1)/2} ),
//! ```
//!
//! finite exactly when n + m - 1 < 2k. Every closed form here has an
//! independent adaptive-quadrature route used by the verification suite.

use crate::error::{Error, Result};
use crate::params::ProblemParams;
use crate::quad::{integrate_halfline, QuadratureSpec};
use crate::special;
use serde::{Deserialize, Serialize};

pub use crate::special::gamma_fn;

/// Surface measure of the unit k-sphere.
pub fn omega(k: u32) -> f64 {
    special::omega(k)
}

/// Amplitude alpha(n) = (4 n (n-1))^{(n-2)/4}.
pub fn alpha(n: u32) -> Result<f64> {
    if n < 3 {
        return Err(Error::Domain(format!("alpha requires n >= 3, got {n}")));
    }
    let nf = n as f64;
    Ok((4.0 * nf * (nf - 1.0)).powf((nf - 2.0) / 4.0))
}

/// Exponent pair of a radial moment: numerator power `m`, kernel power `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MomentIndex {
    pub m: u32,
    pub k: u32,
}

/// Evaluation route for quantities that have both a Gamma closed form and a
/// direct quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Gamma,
    Quadrature,
    /// Run both routes, insist they agree to `spec.rel_tol`, return the
    /// Gamma value.
    Both,
}

fn moment_halfwidth(n: u32, idx: MomentIndex) -> f64 {
    (n as f64 + idx.m as f64 - 1.0) / 2.0
}

/// One-dimensional kernel J(a, q, c^2) = int_0^inf r^a (r^2 + c^2)^{-q} dr
/// = c^{a+1-2q} Gamma((a+1)/2) Gamma(q-(a+1)/2) / (2 Gamma(q)).
/// Caller guarantees a + 1 < 2q and c^2 > 0.
pub(crate) fn inner_kernel(a: f64, q: f64, c_sq: f64) -> f64 {
    let half = (a + 1.0) / 2.0;
    let g = special::gamma_fn(half).unwrap() * special::gamma_fn(q - half).unwrap()
        / (2.0 * special::gamma_fn(q).unwrap());
    g * c_sq.powf(half - q)
}

/// The moment B(m, k; D) in dimension `params.n()`.
pub fn radial_integral(
    params: &ProblemParams,
    idx: MomentIndex,
    method: Method,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let n = params.n();
    let half = moment_halfwidth(n, idx);
    let kf = idx.k as f64;
    if !(half < kf) {
        return Err(Error::Divergent(format!(
            "moment (m = {}, k = {}) in dimension {} needs n + m - 1 < 2k \
             ({} >= {})",
            idx.m,
            idx.k,
            n,
            n + idx.m - 1,
            2 * idx.k
        )));
    }
    let t = params.d() * params.d() - 1.0;
    let w = omega(n - 2);
    let gamma_value = || -> Result<f64> {
        let g = gamma_fn(half)? * gamma_fn(kf - half)? / (2.0 * gamma_fn(kf)?);
        Ok(w * g * t.powf(half - kf))
    };
    let quad_value = || -> Result<f64> {
        let a = (n + idx.m - 2) as f64;
        let v = integrate_halfline(|r| r.powf(a) * (r * r + t).powf(-kf), spec)?;
        Ok(w * v)
    };
    match method {
        Method::Gamma => gamma_value(),
        Method::Quadrature => quad_value(),
        Method::Both => {
            let g = gamma_value()?;
            let q = quad_value()?;
            let rel = (g - q).abs() / g.abs().max(f64::MIN_POSITIVE);
            if rel > spec.rel_tol.max(1e-13) {
                return Err(Error::NonConvergence(format!(
                    "gamma and quadrature routes disagree for (m = {}, k = {}), n = {}, \
                     D = {}: {g:.17e} vs {q:.17e} (rel {rel:.3e})",
                    idx.m,
                    idx.k,
                    n,
                    params.d()
                )));
            }
            Ok(g)
        }
    }
}

/// Integral norms of the unit-scale bubble centred at the origin with offset
/// ratio D.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BubbleNorm {
    /// int_{R^n_+} |grad U|^2
    GradSq,
    /// int_{R^n_+} U^2 (finite for n >= 5)
    L2Volume,
    /// int_{R^n_+} U^{2n/(n-2)}
    CritVolume,
    /// int_{boundary} U^{2(n-1)/(n-2)}
    CritTrace,
    /// int_{R^n_+} U^{2n/(n+2)} (finite for n >= 7)
    L2nNp2Volume,
    /// int_{boundary} U^2
    TraceL2,
}

fn offset_sq(params: &ProblemParams, x_n: f64) -> f64 {
    let s = x_n + params.d();
    s * s - 1.0
}

/// Norm of the unit bubble. Volume kinds pair the closed-form radial kernel
/// with an adaptive integral in the vertical coordinate; trace kinds are pure
/// closed forms.
pub fn bubble_norm(params: &ProblemParams, kind: BubbleNorm, spec: &QuadratureSpec) -> Result<f64> {
    let n = params.n();
    let nf = params.nf();
    let a = nf - 2.0;
    let w = omega(n - 2);
    let alpha = params.alpha();
    match kind {
        BubbleNorm::GradSq => {
            // |grad U|^2 = alpha^2 (n-2)^2 (g+1) g^{-n}, g = r^2 + (x_n+D)^2 - 1
            let c = alpha * alpha * a * a;
            let inner = |x_n: f64| {
                let t = offset_sq(params, x_n);
                inner_kernel(a, nf - 1.0, t) + inner_kernel(a, nf, t)
            };
            Ok(c * w * integrate_halfline(inner, spec)?)
        }
        BubbleNorm::L2Volume => {
            if n < 5 {
                return Err(Error::Divergent(format!(
                    "int U^2 over the half-space diverges for n = {n} (needs n >= 5)"
                )));
            }
            let c = alpha * alpha;
            let inner = |x_n: f64| inner_kernel(a, a, offset_sq(params, x_n));
            Ok(c * w * integrate_halfline(inner, spec)?)
        }
        BubbleNorm::CritVolume => {
            let c = alpha.powf(params.two_star());
            let inner = |x_n: f64| inner_kernel(a, nf, offset_sq(params, x_n));
            Ok(c * w * integrate_halfline(inner, spec)?)
        }
        BubbleNorm::CritTrace => {
            let c = alpha.powf(params.two_sharp());
            let idx = MomentIndex { m: 0, k: n - 1 };
            Ok(c * radial_integral(params, idx, Method::Gamma, spec)?)
        }
        BubbleNorm::L2nNp2Volume => {
            if n < 7 {
                return Err(Error::Divergent(format!(
                    "int U^{{2n/(n+2)}} over the half-space diverges for n = {n} (needs n >= 7)"
                )));
            }
            let q = 2.0 * nf / (nf + 2.0);
            let c = alpha.powf(q);
            let kernel_pow = a * q / 2.0;
            let inner = |x_n: f64| inner_kernel(a, kernel_pow, offset_sq(params, x_n));
            Ok(c * w * integrate_halfline(inner, spec)?)
        }
        BubbleNorm::TraceL2 => {
            if n < 4 {
                return Err(Error::Divergent(format!(
                    "boundary int U^2 diverges for n = {n} (needs n >= 4)"
                )));
            }
            let c = alpha * alpha;
            let idx = MomentIndex { m: 0, k: n - 2 };
            Ok(c * radial_integral(params, idx, Method::Gamma, spec)?)
        }
    }
}

/// Zeroth-order energy of the bubble on the exact half-space:
///
/// ```text
/// E = (2(n-1)/(n-2)) |grad U|_2^2 + ((n-2)/(2n)) int U^{2*}
///     - ((n-2) D / sqrt(n(n-1))) int_{boundary} U^{2#}
/// ```
pub fn bubble_energy_constant(params: &ProblemParams, spec: &QuadratureSpec) -> Result<f64> {
    let n = params.n();
    if n < 5 {
        return Err(Error::Domain(format!(
            "bubble_energy_constant requires n >= 5, got {n}"
        )));
    }
    let nf = params.nf();
    let grad = bubble_norm(params, BubbleNorm::GradSq, spec)?;
    let vol = bubble_norm(params, BubbleNorm::CritVolume, spec)?;
    let trace = bubble_norm(params, BubbleNorm::CritTrace, spec)?;
    Ok(
        2.0 * (nf - 1.0) / (nf - 2.0) * grad + (nf - 2.0) / (2.0 * nf) * vol
            - (nf - 2.0) * params.d() / (nf * (nf - 1.0)).sqrt() * trace,
    )
}

/// The four curvature-correction blocks of the first-order energy
/// coefficient, at unit mean curvature, in the order gradient, critical
/// volume, trace-critical, curvature trace. Their sum cancels identically;
/// see `reduction::c_n`.
pub fn first_order_blocks(params: &ProblemParams) -> Result<[f64; 4]> {
    let n = params.n();
    if n < 5 {
        return Err(Error::Domain(format!(
            "first-order blocks are defined for n >= 5, got {n}"
        )));
    }
    let nf = params.nf();
    let d = params.d();
    let spec = QuadratureSpec::default();
    let beta2 = radial_integral(params, MomentIndex { m: 2, k: n }, Method::Gamma, &spec)?;
    let beta4 = radial_integral(params, MomentIndex { m: 4, k: n }, Method::Gamma, &spec)?;
    let beta0_low = radial_integral(params, MomentIndex { m: 0, k: n - 2 }, Method::Gamma, &spec)?;
    let a2 = params.alpha() * params.alpha();
    let a_star = params.alpha().powf(params.two_star());
    let a_sharp = params.alpha().powf(params.two_sharp());
    Ok([
        -(nf - 1.0) * (nf - 2.0) * a2 * (d * d * beta2 + beta4),
        -a_star * (nf - 2.0) / (4.0 * nf) * beta2,
        (nf - 2.0) * ((nf - 1.0) / nf).sqrt() * a_sharp * d * d * beta2,
        (nf - 1.0) * a2 * beta0_low,
    ])
}
