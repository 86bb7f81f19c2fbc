use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Dimension and boundary-offset parameters of the half-space problem.
///
/// `d` is the offset ratio of the bubble centre below the boundary, in units
/// of the concentration scale; the bubble is defined for `d > 1` and the
/// boundary coupling strength grows with it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    n: u32,
    d: f64,
}

impl ProblemParams {
    pub fn new(n: u32, d: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::Domain(format!("dimension n = {n} must be >= 3")));
        }
        if !(d > 1.0) || !d.is_finite() {
            return Err(Error::Domain(format!(
                "offset ratio D = {d} must be a finite number > 1"
            )));
        }
        Ok(Self { n, d })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn nf(&self) -> f64 {
        self.n as f64
    }

    /// Offset ratio D.
    pub fn d(&self) -> f64 {
        self.d
    }

    /// Amplitude alpha = (4 n (n-1))^{(n-2)/4}, normalised so that the bubble
    /// solves the interior equation with unit coefficient on the critical
    /// power.
    pub fn alpha(&self) -> f64 {
        let nf = self.nf();
        (4.0 * nf * (nf - 1.0)).powf((nf - 2.0) / 4.0)
    }

    /// Critical volume exponent 2* = 2n/(n-2).
    pub fn two_star(&self) -> f64 {
        2.0 * self.nf() / (self.nf() - 2.0)
    }

    /// Critical trace exponent 2# = 2(n-1)/(n-2).
    pub fn two_sharp(&self) -> f64 {
        2.0 * (self.nf() - 1.0) / (self.nf() - 2.0)
    }

    /// Coefficient D / sqrt(n(n-1)) multiplying the nonlinear boundary term.
    pub fn boundary_coupling(&self) -> f64 {
        self.d / (self.nf() * (self.nf() - 1.0)).sqrt()
    }

    /// Coefficient 4(n-1)/(n-2) multiplying the Laplacian.
    pub fn laplace_coefficient(&self) -> f64 {
        4.0 * (self.nf() - 1.0) / (self.nf() - 2.0)
    }
}
