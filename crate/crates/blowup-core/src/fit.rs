use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Outcome of a linear least-squares fit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitResult {
    /// Coefficients in the order of the supplied basis (for
    /// [`fit_polynomial`]: constant term first).
    pub coefficients: Vec<f64>,
    /// Euclidean norm of the residual vector.
    pub residual_norm: f64,
    /// Ratio of largest to smallest singular value of the design matrix.
    pub condition_estimate: f64,
}

/// Least-squares polynomial fit of degree `degree` to the points
/// `(xs[i], ys[i])`.
pub fn fit_polynomial(xs: &[f64], ys: &[f64], degree: usize) -> Result<FitResult> {
    let powers: Vec<f64> = (0..=degree).map(|j| j as f64).collect();
    fit_powers(xs, ys, &powers)
}

/// Least-squares fit to the basis `{ x^p : p in powers }`. Powers need not be
/// integers; `x^0` is treated as the constant function even at `x = 0`.
pub fn fit_powers(xs: &[f64], ys: &[f64], powers: &[f64]) -> Result<FitResult> {
    if xs.len() != ys.len() {
        return Err(Error::Domain(format!(
            "fit: {} abscissae vs {} ordinates",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < powers.len() {
        return Err(Error::Domain(format!(
            "fit: {} points cannot determine {} coefficients",
            xs.len(),
            powers.len()
        )));
    }
    let m = xs.len();
    let k = powers.len();
    let a = DMatrix::from_fn(m, k, |i, j| {
        let p = powers[j];
        if p == 0.0 {
            1.0
        } else {
            xs[i].powf(p)
        }
    });
    let b = DVector::from_column_slice(ys);

    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let cond = if smin > 0.0 {
        smax / smin
    } else {
        f64::INFINITY
    };
    if !(smin > smax * 1e-14) {
        return Err(Error::SingularFit { cond });
    }
    let sol = svd
        .solve(&b, 0.0)
        .map_err(|_| Error::SingularFit { cond })?;
    let resid = (&a * &sol - &b).norm();
    Ok(FitResult {
        coefficients: sol.iter().copied().collect(),
        residual_norm: resid,
        condition_estimate: cond,
    })
}

/// Slope of `log(ys)` against `log(xs)`; `ys` must be positive.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Result<FitResult> {
    if ys.iter().any(|&y| y <= 0.0) || xs.iter().any(|&x| x <= 0.0) {
        return Err(Error::Domain(
            "log_log_slope needs strictly positive data".into(),
        ));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    fit_polynomial(&lx, &ly, 1)
}
