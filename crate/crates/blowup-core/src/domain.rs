//! Curved model domain: the region above the quadratic boundary graph
//! x_n = phi(xbar) = sum_i k_i x_i^2 inside a cylinder of radius rho, the
//! slab between the graph and the flat boundary, and a C^2 tensor cutoff.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDomain {
    /// Principal curvatures k_i >= 0 of the boundary graph at the origin,
    /// length n-1.
    pub curvatures: Vec<f64>,
    /// Cylinder radius (and height) of the coordinate patch.
    pub rho: f64,
}

impl ModelDomain {
    pub fn new(curvatures: Vec<f64>, rho: f64) -> Result<Self> {
        if curvatures.is_empty() {
            return Err(Error::Domain("need at least one curvature".into()));
        }
        if curvatures.iter().any(|k| !k.is_finite() || *k < 0.0) {
            return Err(Error::Domain(format!(
                "curvatures must be finite and nonnegative, got {curvatures:?}"
            )));
        }
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(Error::Domain(format!(
                "patch radius rho = {rho} must be > 0"
            )));
        }
        Ok(Self { curvatures, rho })
    }

    pub fn equal(k: f64, boundary_dim: usize, rho: f64) -> Result<Self> {
        Self::new(vec![k; boundary_dim], rho)
    }

    /// Dimension n of the ambient space.
    pub fn ambient_dim(&self) -> usize {
        self.curvatures.len() + 1
    }

    /// All curvatures equal (the radially reducible case)?
    pub fn equal_curvature(&self) -> Option<f64> {
        let k = self.curvatures[0];
        if self.curvatures.iter().all(|&v| v == k) {
            Some(k)
        } else {
            None
        }
    }

    fn check_base_point(&self, xbar: &[f64]) -> Result<f64> {
        if xbar.len() != self.curvatures.len() {
            return Err(Error::Domain(format!(
                "base point has {} coordinates, expected {}",
                xbar.len(),
                self.curvatures.len()
            )));
        }
        let r = xbar.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r > self.rho {
            return Err(Error::Domain(format!(
                "base point at radius {r} lies outside the patch of radius {}",
                self.rho
            )));
        }
        Ok(r)
    }

    /// Height of the boundary graph.
    pub fn phi(&self, xbar: &[f64]) -> Result<f64> {
        self.check_base_point(xbar)?;
        Ok(self
            .curvatures
            .iter()
            .zip(xbar)
            .map(|(k, x)| k * x * x)
            .sum())
    }

    /// Mean curvature of the graph at the point above `xbar`:
    /// H = (1/(n-1)) [ sum 2 k_i W^{-1/2} - sum 8 k_i^3 x_i^2 W^{-3/2} ],
    /// W = 1 + sum 4 k_j^2 x_j^2.
    pub fn mean_curvature(&self, xbar: &[f64]) -> Result<f64> {
        self.check_base_point(xbar)?;
        let w = 1.0
            + self
                .curvatures
                .iter()
                .zip(xbar)
                .map(|(k, x)| 4.0 * k * k * x * x)
                .sum::<f64>();
        let lead: f64 = self.curvatures.iter().map(|k| 2.0 * k).sum();
        let tilt: f64 = self
            .curvatures
            .iter()
            .zip(xbar)
            .map(|(k, x)| 8.0 * k.powi(3) * x * x)
            .sum();
        Ok((lead / w.sqrt() - tilt / w.powf(1.5)) / self.curvatures.len() as f64)
    }

    /// Mean curvature at the origin, 2 * (mean of the k_i).
    pub fn h0(&self) -> f64 {
        2.0 * self.curvatures.iter().sum::<f64>() / self.curvatures.len() as f64
    }
}

/// Where a point of the ambient half-space sits relative to the curved patch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    /// Above the graph, inside the cylinder.
    Omega,
    /// Between the flat boundary and the graph (the slab carved out by the
    /// curvature).
    Sigma,
    Outside,
}

/// Classify `x = (xbar, x_n)` against the cylinder `{ |xbar| < rho,
/// 0 <= x_n < rho }` split by the graph.
pub fn patch_membership(domain: &ModelDomain, x: &[f64]) -> Result<Region> {
    let n = domain.ambient_dim();
    if x.len() != n {
        return Err(Error::Domain(format!(
            "point has {} coordinates, expected {n}",
            x.len()
        )));
    }
    let (xbar, xn) = (&x[..n - 1], x[n - 1]);
    let r = xbar.iter().map(|v| v * v).sum::<f64>().sqrt();
    if r >= domain.rho || xn >= domain.rho || xn < 0.0 {
        return Ok(Region::Outside);
    }
    let height: f64 = domain
        .curvatures
        .iter()
        .zip(xbar)
        .map(|(k, v)| k * v * v)
        .sum();
    if xn >= height {
        Ok(Region::Omega)
    } else if xn > 0.0 {
        Ok(Region::Sigma)
    } else {
        Ok(Region::Outside)
    }
}

pub fn sigma_membership(domain: &ModelDomain, x: &[f64]) -> Result<bool> {
    Ok(matches!(patch_membership(domain, x)?, Region::Sigma))
}

/// Radial profile of the cutoff: identically 1 up to `inner`, identically 0
/// from `outer`, joined by the quintic smoothstep (twice continuously
/// differentiable).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffProfile {
    pub inner: f64,
    pub outer: f64,
    /// Number of continuous derivatives of the profile; the quintic join
    /// gives 2.
    pub smoothness: u32,
}

impl CutoffProfile {
    pub fn new(inner: f64, outer: f64) -> Result<Self> {
        if !(0.0 < inner && inner < outer) || !outer.is_finite() {
            return Err(Error::Domain(format!(
                "cutoff radii must satisfy 0 < inner < outer, got {inner}, {outer}"
            )));
        }
        Ok(Self {
            inner,
            outer,
            smoothness: 2,
        })
    }

    /// Standard choice for a patch: transition on [rho/2, rho].
    pub fn for_domain(domain: &ModelDomain) -> Self {
        Self {
            inner: domain.rho / 2.0,
            outer: domain.rho,
            smoothness: 2,
        }
    }

    /// Profile value s(t).
    pub fn s(&self, t: f64) -> f64 {
        if t <= self.inner {
            1.0
        } else if t >= self.outer {
            0.0
        } else {
            let u = (t - self.inner) / (self.outer - self.inner);
            // clamp: near u = 1 the polynomial can land at -1e-17, and a
            // tiny negative value poisons fractional powers downstream
            (1.0 - u * u * u * (10.0 - 15.0 * u + 6.0 * u * u)).clamp(0.0, 1.0)
        }
    }

    /// s'(t) = -30 u^2 (1-u)^2 / (outer - inner) on the transition band.
    pub fn s_d1(&self, t: f64) -> f64 {
        if t <= self.inner || t >= self.outer {
            0.0
        } else {
            let w = self.outer - self.inner;
            let u = (t - self.inner) / w;
            -30.0 * u * u * (1.0 - u) * (1.0 - u) / w
        }
    }

    /// s''(t) = -60 u (1-u)(1-2u) / (outer - inner)^2 on the transition band.
    pub fn s_d2(&self, t: f64) -> f64 {
        if t <= self.inner || t >= self.outer {
            0.0
        } else {
            let w = self.outer - self.inner;
            let u = (t - self.inner) / w;
            -60.0 * u * (1.0 - u) * (1.0 - 2.0 * u) / (w * w)
        }
    }
}

/// Tensor cutoff chi(x) = s(|xbar|) s(x_n).
pub fn cutoff_eval(profile: &CutoffProfile, x: &[f64]) -> f64 {
    let n = x.len();
    let r = x[..n - 1].iter().map(|v| v * v).sum::<f64>().sqrt();
    profile.s(r) * profile.s(x[n - 1])
}

pub fn cutoff_grad(profile: &CutoffProfile, x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let r = x[..n - 1].iter().map(|v| v * v).sum::<f64>().sqrt();
    let xn = x[n - 1];
    let mut out = vec![0.0; n];
    let sr1 = profile.s_d1(r);
    if sr1 != 0.0 && r > 0.0 {
        let c = sr1 * profile.s(xn) / r;
        for i in 0..n - 1 {
            out[i] = c * x[i];
        }
    }
    out[n - 1] = profile.s(r) * profile.s_d1(xn);
    out
}

pub fn cutoff_laplacian(profile: &CutoffProfile, x: &[f64]) -> f64 {
    let n = x.len();
    let r = x[..n - 1].iter().map(|v| v * v).sum::<f64>().sqrt();
    let xn = x[n - 1];
    // radial Laplacian in n-1 variables; s' vanishes identically near r = 0,
    // so the s'/r term never sees the axis
    let radial = if r > 0.0 {
        profile.s_d2(r) + (n as f64 - 2.0) * profile.s_d1(r) / r
    } else {
        0.0
    };
    radial * profile.s(xn) + profile.s(r) * profile.s_d2(xn)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fd::{fd_gradient, fd_laplacian};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn validation() {
        assert!(ModelDomain::new(vec![], 1.0).is_err());
        assert!(ModelDomain::new(vec![1.0, -0.5], 1.0).is_err());
        assert!(ModelDomain::new(vec![1.0], 0.0).is_err());
        assert!(CutoffProfile::new(0.5, 0.5).is_err());
    }

    #[test]
    fn graph_height_and_curvature_at_origin() {
        let d = ModelDomain::new(vec![1.0, 2.0, 3.0], 1.0).unwrap();
        let o = [0.0, 0.0, 0.0];
        assert_eq!(d.phi(&o).unwrap(), 0.0);
        assert!((d.mean_curvature(&o).unwrap() - 4.0).abs() < 1e-15);
        assert!((d.h0() - 4.0).abs() < 1e-15);
    }

    #[test]
    fn mean_curvature_of_a_sphere_graph() {
        // x_n = k |xbar|^2 osculates a sphere of radius 1/(2k); at the
        // origin every normal curvature is 2k
        let k = 0.7;
        let d = ModelDomain::equal(k, 5, 1.0).unwrap();
        assert!((d.mean_curvature(&[0.0; 5]).unwrap() - 2.0 * k).abs() < 1e-15);
        // away from the origin the formula must match the divergence form
        // computed by finite differences of the unit normal
        let xbar = [0.2, -0.1, 0.15, 0.05, 0.1];
        let phi = |y: &[f64]| k * y.iter().map(|v| v * v).sum::<f64>();
        let h_fd = {
            // div( grad phi / sqrt(1+|grad phi|^2) ) / (n-1)
            let comp = |i: usize, y: &[f64]| {
                let g: Vec<f64> = y.iter().map(|v| 2.0 * k * v).collect();
                let w = 1.0 + g.iter().map(|v| v * v).sum::<f64>();
                g[i] / w.sqrt()
            };
            let mut div = 0.0;
            let h = 1e-6;
            for i in 0..5 {
                let mut yp = xbar.to_vec();
                yp[i] += h;
                let mut ym = xbar.to_vec();
                ym[i] -= h;
                div += (comp(i, &yp) - comp(i, &ym)) / (2.0 * h);
            }
            let _ = phi;
            div / 5.0
        };
        let h = d.mean_curvature(&xbar).unwrap();
        assert!((h - h_fd).abs() < 1e-8, "{h} vs {h_fd}");
    }

    #[test]
    fn membership_partitions_the_cylinder() {
        let d = ModelDomain::new(vec![1.0, 0.5, 2.0, 0.0, 1.5], 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut seen_sigma = 0;
        for _ in 0..2000 {
            let mut x: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.2..1.2)).collect();
            x[5] = rng.gen_range(-0.1..1.2);
            let region = patch_membership(&d, &x).unwrap();
            let r = x[..5].iter().map(|v| v * v).sum::<f64>().sqrt();
            let height: f64 = d
                .curvatures
                .iter()
                .zip(&x[..5])
                .map(|(k, v)| k * v * v)
                .sum();
            let expected = if r >= 1.0 || x[5] >= 1.0 || x[5] < 0.0 {
                Region::Outside
            } else if x[5] >= height {
                Region::Omega
            } else if x[5] > 0.0 {
                Region::Sigma
            } else {
                Region::Outside
            };
            assert_eq!(region, expected, "x = {x:?}");
            if region == Region::Sigma {
                seen_sigma += 1;
                assert!(sigma_membership(&d, &x).unwrap());
            }
        }
        assert!(seen_sigma > 0, "sampler never hit the slab");
    }

    #[test]
    fn cutoff_profile_is_c2() {
        let p = CutoffProfile::new(0.5, 1.0).unwrap();
        assert_eq!(p.s(0.3), 1.0);
        assert_eq!(p.s(1.1), 0.0);
        // continuity of s, s', s'' across the joins
        for t0 in [0.5, 1.0] {
            let eps = 1e-7;
            assert!((p.s(t0 - eps) - p.s(t0 + eps)).abs() < 1e-6);
            assert!((p.s_d1(t0 - eps) - p.s_d1(t0 + eps)).abs() < 1e-5);
            assert!((p.s_d2(t0 - eps) - p.s_d2(t0 + eps)).abs() < 1e-4);
        }
        // derivative consistency in the band
        for &t in &[0.55, 0.7, 0.85, 0.95] {
            let h = 1e-6;
            let d1 = (p.s(t + h) - p.s(t - h)) / (2.0 * h);
            assert!((d1 - p.s_d1(t)).abs() < 1e-8);
            let d2 = (p.s_d1(t + h) - p.s_d1(t - h)) / (2.0 * h);
            assert!((d2 - p.s_d2(t)).abs() < 1e-7);
        }
    }

    #[test]
    fn cutoff_derivatives_match_finite_differences() {
        let p = CutoffProfile::new(0.5, 1.0).unwrap();
        let f = |x: &[f64]| cutoff_eval(&p, x);
        for x in [
            vec![0.4, 0.3, 0.2, 0.1, 0.0, 0.6],
            vec![0.5, 0.4, 0.0, 0.0, 0.1, 0.3],
            vec![0.1, 0.0, 0.0, 0.0, 0.0, 0.1],
        ] {
            let g = cutoff_grad(&p, &x);
            let g_fd = fd_gradient(f, &x, 1e-6);
            for i in 0..6 {
                assert!((g[i] - g_fd[i]).abs() < 1e-6, "grad[{i}] at {x:?}");
            }
            let lap = cutoff_laplacian(&p, &x);
            let lap_fd = fd_laplacian(f, &x, 1e-4);
            assert!(
                (lap - lap_fd).abs() < 1e-5,
                "lap at {x:?}: {lap} vs {lap_fd}"
            );
        }
    }

    #[test]
    fn cutoff_is_one_inside_and_zero_outside() {
        let p = CutoffProfile::new(0.5, 1.0).unwrap();
        assert_eq!(cutoff_eval(&p, &[0.2, 0.1, 0.0, 0.1, 0.2, 0.3]), 1.0);
        assert_eq!(cutoff_eval(&p, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.2]), 0.0);
        assert_eq!(cutoff_eval(&p, &[0.0, 0.0, 0.0, 0.0, 0.0, 1.0]), 0.0);
        let mid = cutoff_eval(&p, &[0.75, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(0.0 < mid && mid < 1.0);
    }
}
