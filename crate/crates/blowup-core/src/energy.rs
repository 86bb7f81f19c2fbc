//! Energy of the truncated bubble on the curved model domain.
//!
//! The energy splits into five blocks:
//!
//! ```text
//! E(W) = (2(n-1)/(n-2)) int_Omega |grad W|^2        (e1)
//!        + mu int_Omega W^2 / 2                      (mu * e2)
//!        + ((n-2)/(2n)) int_Omega W^{2n/(n-2)}       (e3)
//!        - ((n-2) D / sqrt(n(n-1))) int_Gamma W^{2(n-1)/(n-2)}   (e4)
//!        + (n-1) int_Gamma H W^2                     (e5)
//! ```
//!
//! with W = chi * U_delta, Omega the region above the boundary graph inside
//! the coordinate cylinder and Gamma the graph itself. Each volume block is
//! computed as (cylinder integral) - (slab integral): the slab between the
//! flat boundary and the graph carries the entire first order in delta, and
//! separating it keeps the small-delta fits well conditioned.
//!
//! With equal curvatures everything reduces to two-dimensional (r, x_n)
//! integrals evaluated adaptively in scaled variables; otherwise a seeded
//! Monte Carlo estimate with reported standard errors is used.

use crate::bubble::{bubble_eval, bubble_grad, BubbleParams};
use crate::constants::{
    bubble_norm, first_order_blocks, omega, radial_integral, BubbleNorm, Method, MomentIndex,
};
use crate::domain::{
    cutoff_eval, cutoff_grad, patch_membership, CutoffProfile, ModelDomain, Region,
};
use crate::error::{Error, Result};
use crate::fit::{fit_polynomial, fit_powers, FitResult};
use crate::mc::mc_integrate_box_peaked;
use crate::params::ProblemParams;
use crate::quad::{integrate, QuadratureSpec};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::cell::RefCell;

/// The five energy blocks at one concentration scale. `e2` is the
/// coefficient of mu, i.e. the value of int W^2 / 2 itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub e1: f64,
    pub e2: f64,
    pub e3: f64,
    pub e4: f64,
    pub e5: f64,
}

impl EnergyBreakdown {
    pub fn total(&self, mu: f64) -> f64 {
        self.e1 + mu * self.e2 + self.e3 + self.e4 + self.e5
    }
}

fn check_setup(params: &ProblemParams, domain: &ModelDomain, delta: f64) -> Result<()> {
    if domain.ambient_dim() != params.n() as usize {
        return Err(Error::Domain(format!(
            "domain has ambient dimension {}, parameters say {}",
            domain.ambient_dim(),
            params.n()
        )));
    }
    if !(delta > 0.0) || delta > domain.rho / 10.0 {
        return Err(Error::Domain(format!(
            "concentration scale delta = {delta} must lie in (0, rho/10] = (0, {}]",
            domain.rho / 10.0
        )));
    }
    Ok(())
}

/// Piecewise adaptive integral over consecutive segments of `pts`.
fn integrate_split<F: Fn(f64) -> f64>(f: &F, pts: &[f64], spec: &QuadratureSpec) -> Result<f64> {
    let mut acc = 0.0;
    for w in pts.windows(2) {
        acc += integrate(f, w[0], w[1], spec)?;
    }
    Ok(acc)
}

fn clamp_splits(raw: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let mut pts = vec![lo];
    for &p in raw {
        if p > lo && p < hi {
            pts.push(p);
        }
    }
    pts.push(hi);
    pts
}

/// Nested 2D integral: int over r of weight(r) * int_0^{upper(r)} f(r, y) dy,
/// with the outer variable split at `outer_pts` and the inner interval split
/// at the relevant subset of `inner_splits`.
fn nested_2d(
    outer_pts: &[f64],
    inner_splits: &[f64],
    upper: impl Fn(f64) -> f64,
    weight: impl Fn(f64) -> f64,
    f: impl Fn(f64, f64) -> f64,
    outer_spec: &QuadratureSpec,
    inner_spec: &QuadratureSpec,
) -> Result<f64> {
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let outer_f = |r: f64| {
        let hi = upper(r);
        if hi <= 0.0 {
            return 0.0;
        }
        let pts = clamp_splits(inner_splits, 0.0, hi);
        match integrate_split(&|y| f(r, y), &pts, inner_spec) {
            Ok(v) => weight(r) * v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        }
    };
    let res = integrate_split(&outer_f, outer_pts, outer_spec);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    res
}

/// Scaled-variable bubble pieces at unit scale: g, U, dU/dr, dU/dy_n.
#[inline]
fn bubble_radial(alpha: f64, nf: f64, d: f64, r: f64, yn: f64) -> (f64, f64, f64, f64) {
    let s = yn + d;
    let g = r * r + s * s - 1.0;
    let gp = g.powf(-(nf - 2.0) / 2.0);
    let u = alpha * gp;
    let c = alpha * (2.0 - nf) * gp / g; // alpha (2-n) g^{-n/2}
    (g, u, c * r, c * s)
}

fn radial_energy(
    params: &ProblemParams,
    k: f64,
    rho: f64,
    delta: f64,
    spec: &QuadratureSpec,
) -> Result<EnergyBreakdown> {
    let nf = params.nf();
    let d = params.d();
    let alpha = params.alpha();
    let w = omega(params.n() - 2);
    let big_r = rho / delta;
    let kd = k * delta; // scaled graph: y_n = kd * r^2
    let prof = CutoffProfile::new(rho / 2.0, rho)?;

    let outer_spec = *spec;
    let inner_spec = spec.scaled_tol(0.3);

    // chi and grad chi at the physical point (delta r, delta y_n)
    let chi = |r: f64, yn: f64| prof.s(delta * r) * prof.s(delta * yn);
    let chi_r = |r: f64, yn: f64| prof.s_d1(delta * r) * prof.s(delta * yn);
    let chi_n = |r: f64, yn: f64| prof.s(delta * r) * prof.s_d1(delta * yn);

    let f_grad = |r: f64, yn: f64| {
        let (_, u, ur, un) = bubble_radial(alpha, nf, d, r, yn);
        let c = chi(r, yn);
        let a = c * ur + delta * u * chi_r(r, yn);
        let b = c * un + delta * u * chi_n(r, yn);
        a * a + b * b
    };
    let f_mass = |r: f64, yn: f64| {
        let (_, u, _, _) = bubble_radial(alpha, nf, d, r, yn);
        let v = chi(r, yn) * u;
        v * v
    };
    let two_star = params.two_star();
    let f_crit = |r: f64, yn: f64| {
        let (_, u, _, _) = bubble_radial(alpha, nf, d, r, yn);
        (chi(r, yn) * u).powf(two_star)
    };

    let half = big_r / 2.0;
    let outer_pts = [0.0, half, big_r];
    let inner_splits = [half];
    let weight = |r: f64| r.powf(nf - 2.0);

    let cyl = |f: &dyn Fn(f64, f64) -> f64| {
        nested_2d(
            &outer_pts,
            &inner_splits,
            |_| big_r,
            weight,
            f,
            &outer_spec,
            &inner_spec,
        )
    };
    let slab = |f: &dyn Fn(f64, f64) -> f64| {
        nested_2d(
            &outer_pts,
            &[],
            |r| (kd * r * r).min(big_r),
            weight,
            f,
            &outer_spec,
            &inner_spec,
        )
    };

    let grad_int = w * (cyl(&f_grad)? - slab(&f_grad)?);
    let mass_int = w * (cyl(&f_mass)? - slab(&f_mass)?);
    let crit_int = w * (cyl(&f_crit)? - slab(&f_crit)?);

    // trace integrals along the graph y_n = kd r^2; physical surface element
    // sqrt(1 + 4 k^2 (delta r)^2) * (delta r)^{n-2} d(delta r) per unit sphere
    let two_sharp = params.two_sharp();
    let graph_chi = |r: f64| prof.s(delta * r) * prof.s(delta * kd * r * r);
    let graph_u = |r: f64| {
        let (_, u, _, _) = bubble_radial(alpha, nf, d, r, kd * r * r);
        u
    };
    let jac = |r: f64| {
        let t = 2.0 * k * delta * r;
        (1.0 + t * t).sqrt()
    };
    // extra split where the vertical cutoff factor starts to act on the graph
    let mut trace_pts = vec![0.0, half];
    if kd > 0.0 {
        let rt = (rho / (2.0 * k * delta * delta)).sqrt();
        if rt > 0.0 && rt < big_r {
            trace_pts.push(rt);
        }
    }
    trace_pts.push(big_r);
    trace_pts.sort_by(f64::total_cmp);

    let f_sharp = |r: f64| (graph_chi(r) * graph_u(r)).powf(two_sharp) * jac(r) * r.powf(nf - 2.0);
    let sharp_int = w * integrate_split(&f_sharp, &trace_pts, &outer_spec)?;

    let nm1 = nf - 1.0;
    let h_rad = |s: f64| {
        // mean curvature of the equal-curvature graph at physical radius s
        let t = 4.0 * k * k * s * s;
        2.0 * k / nm1 * (nm1 + (nf - 2.0) * t) / (1.0 + t).powf(1.5)
    };
    let f_htrace = |r: f64| {
        let v = graph_chi(r) * graph_u(r);
        h_rad(delta * r) * v * v * jac(r) * r.powf(nf - 2.0)
    };
    let htrace_int = w * integrate_split(&f_htrace, &trace_pts, &outer_spec)?;

    Ok(EnergyBreakdown {
        e1: 2.0 * (nf - 1.0) / (nf - 2.0) * grad_int,
        e2: 0.5 * delta * delta * mass_int,
        e3: (nf - 2.0) / (2.0 * nf) * crit_int,
        e4: -(nf - 2.0) * d / (nf * nm1).sqrt() * sharp_int,
        e5: nm1 * delta * htrace_int,
    })
}

/// Five blocks at concentration scale `bp.delta`. Equal curvatures with a
/// centred bubble go through the precise radial route; anything else falls
/// back to Monte Carlo (standard errors available via
/// [`energy_terms_mc`]).
pub fn energy_terms(
    params: &ProblemParams,
    domain: &ModelDomain,
    bp: &BubbleParams,
    spec: &QuadratureSpec,
) -> Result<EnergyBreakdown> {
    check_setup(params, domain, bp.delta)?;
    let centred = bp.xi.iter().all(|&v| v == 0.0);
    match (domain.equal_curvature(), centred) {
        (Some(k), true) => radial_energy(params, k, domain.rho, bp.delta, spec),
        _ => Ok(energy_terms_mc(params, domain, bp, spec)?.0),
    }
}

/// Monte Carlo route for arbitrary curvature vectors and centres. Returns the
/// blocks together with their one-sigma standard errors. The sampler mixes a
/// uniform stream with a radially log-uniform stream about the bubble centre,
/// so the delta-scale spike is resolved instead of missed.
pub fn energy_terms_mc(
    params: &ProblemParams,
    domain: &ModelDomain,
    bp: &BubbleParams,
    spec: &QuadratureSpec,
) -> Result<(EnergyBreakdown, [f64; 5])> {
    check_setup(params, domain, bp.delta)?;
    let n = params.n() as usize;
    let nf = params.nf();
    let rho = domain.rho;
    let prof = CutoffProfile::for_domain(domain);

    let mut vol_bounds = vec![(-rho, rho); n - 1];
    vol_bounds.push((0.0, rho));
    let mut vol_center = bp.xi.clone();
    vol_center.push(0.0);
    let r_lo = bp.delta / 20.0;
    let r_hi = 1.01
        * vol_bounds
            .iter()
            .zip(&vol_center)
            .map(|(&(a, b), c)| (c - a).abs().max((b - c).abs()).powi(2))
            .sum::<f64>()
            .sqrt();

    let in_omega = |x: &[f64]| matches!(patch_membership(domain, x), Ok(Region::Omega));

    let f1 = |x: &[f64]| {
        if !in_omega(x) {
            return 0.0;
        }
        let c = cutoff_eval(&prof, x);
        let gc = cutoff_grad(&prof, x);
        if c == 0.0 && gc.iter().all(|&v| v == 0.0) {
            return 0.0;
        }
        let u = bubble_eval(params, bp, x).unwrap();
        let gu = bubble_grad(params, bp, x).unwrap();
        gu.iter()
            .zip(&gc)
            .map(|(a, b)| {
                let v = c * a + u * b;
                v * v
            })
            .sum::<f64>()
    };
    let f2 = |x: &[f64]| {
        if !in_omega(x) {
            return 0.0;
        }
        let v = cutoff_eval(&prof, x) * bubble_eval(params, bp, x).unwrap();
        v * v
    };
    let two_star = params.two_star();
    let f3 = |x: &[f64]| {
        if !in_omega(x) {
            return 0.0;
        }
        (cutoff_eval(&prof, x) * bubble_eval(params, bp, x).unwrap()).powf(two_star)
    };

    let seed = spec.rng_seed;
    let vol_mc = |f: &dyn Fn(&[f64]) -> f64, s: u64| {
        mc_integrate_box_peaked(
            f,
            &vol_bounds,
            &vol_center,
            r_lo,
            r_hi,
            true,
            spec.mc_samples,
            s,
        )
    };
    let m1 = vol_mc(&f1, seed ^ 0xe1);
    let m2 = vol_mc(&f2, seed ^ 0xe2);
    let m3 = vol_mc(&f3, seed ^ 0xe3);

    // trace terms over the graph, parametrised by the base point
    let base_bounds = vec![(-rho, rho); n - 1];
    let graph_point = |xbar: &[f64]| -> Option<(Vec<f64>, f64)> {
        let r2: f64 = xbar.iter().map(|v| v * v).sum();
        if r2 >= rho * rho {
            return None;
        }
        let height: f64 = domain
            .curvatures
            .iter()
            .zip(xbar)
            .map(|(k, v)| k * v * v)
            .sum();
        let mut x = xbar.to_vec();
        x.push(height);
        let grad_sq: f64 = domain
            .curvatures
            .iter()
            .zip(xbar)
            .map(|(k, v)| {
                let t = 2.0 * k * v;
                t * t
            })
            .sum();
        Some((x, (1.0 + grad_sq).sqrt()))
    };
    let two_sharp = params.two_sharp();
    let f4 = |xbar: &[f64]| match graph_point(xbar) {
        Some((x, jac)) => {
            (cutoff_eval(&prof, &x) * bubble_eval(params, bp, &x).unwrap()).powf(two_sharp) * jac
        }
        None => 0.0,
    };
    let f5 = |xbar: &[f64]| match graph_point(xbar) {
        Some((x, jac)) => {
            let v = cutoff_eval(&prof, &x) * bubble_eval(params, bp, &x).unwrap();
            domain.mean_curvature(&x[..n - 1]).unwrap() * v * v * jac
        }
        None => 0.0,
    };
    let base_r_hi = 1.01
        * base_bounds
            .iter()
            .zip(&bp.xi)
            .map(|(&(a, b), c)| (c - a).abs().max((b - c).abs()).powi(2))
            .sum::<f64>()
            .sqrt();
    let m4 = mc_integrate_box_peaked(
        f4,
        &base_bounds,
        &bp.xi,
        r_lo,
        base_r_hi,
        false,
        spec.mc_samples,
        seed ^ 0xe4,
    );
    let m5 = mc_integrate_box_peaked(
        f5,
        &base_bounds,
        &bp.xi,
        r_lo,
        base_r_hi,
        false,
        spec.mc_samples,
        seed ^ 0xe5,
    );

    let c1 = 2.0 * (nf - 1.0) / (nf - 2.0);
    let c3 = (nf - 2.0) / (2.0 * nf);
    let c4 = -(nf - 2.0) * params.d() / (nf * (nf - 1.0)).sqrt();
    let c5 = nf - 1.0;
    Ok((
        EnergyBreakdown {
            e1: c1 * m1.value,
            e2: 0.5 * m2.value,
            e3: c3 * m3.value,
            e4: c4 * m4.value,
            e5: c5 * m5.value,
        },
        [
            c1 * m1.std_err,
            0.5 * m2.std_err,
            c3 * m3.std_err,
            c4.abs() * m4.std_err,
            c5 * m5.std_err,
        ],
    ))
}

/// Predicted linear coefficients of the four delta-expansion blocks
/// (gradient, critical volume, trace-critical, curvature trace) at mean
/// curvature `h0`.
pub fn first_order_references(params: &ProblemParams, h0: f64) -> Result<[f64; 4]> {
    let b = first_order_blocks(params)?;
    Ok([b[0] * h0, b[1] * h0, b[2] * h0, b[3] * h0])
}

/// delta -> 0 limits of the slab integrals divided by delta:
/// (1/delta) int_Sigma |grad U_delta|^2 -> (h0/2) alpha^2 (n-2)^2 (D^2 B(2,n) + B(4,n)),
/// (1/delta) int_Sigma U_delta^{2*}     -> (h0/2) alpha^{2*} B(2,n).
pub fn sigma_correction_limits(params: &ProblemParams, h0: f64) -> Result<[f64; 2]> {
    let spec = QuadratureSpec::default();
    let n = params.n();
    let nf = params.nf();
    let beta2 = radial_integral(params, MomentIndex { m: 2, k: n }, Method::Gamma, &spec)?;
    let beta4 = radial_integral(params, MomentIndex { m: 4, k: n }, Method::Gamma, &spec)?;
    let a2 = params.alpha() * params.alpha();
    let a_star = params.alpha().powf(params.two_star());
    let d = params.d();
    Ok([
        0.5 * h0 * a2 * (nf - 2.0) * (nf - 2.0) * (d * d * beta2 + beta4),
        0.5 * h0 * a_star * beta2,
    ])
}

/// Slab integrals at one scale next to their predicted limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaCorrections {
    pub grad_over_delta: f64,
    pub crit_over_delta: f64,
    pub grad_limit: f64,
    pub crit_limit: f64,
}

/// The two slab integrals (without cutoff) divided by delta, compared with
/// their limits. Equal curvatures only.
pub fn sigma_corrections(
    params: &ProblemParams,
    domain: &ModelDomain,
    delta: f64,
    spec: &QuadratureSpec,
) -> Result<SigmaCorrections> {
    check_setup(params, domain, delta)?;
    let k = domain.equal_curvature().ok_or_else(|| {
        Error::Domain("slab corrections are computed in the equal-curvature case".into())
    })?;
    let nf = params.nf();
    let d = params.d();
    let alpha = params.alpha();
    let w = omega(params.n() - 2);
    let big_r = domain.rho / delta;
    let kd = k * delta;
    let inner_spec = spec.scaled_tol(0.3);

    let f_grad = |r: f64, yn: f64| {
        let (_, _, ur, un) = bubble_radial(alpha, nf, d, r, yn);
        ur * ur + un * un
    };
    let two_star = params.two_star();
    let f_crit = |r: f64, yn: f64| {
        let (_, u, _, _) = bubble_radial(alpha, nf, d, r, yn);
        u.powf(two_star)
    };
    let outer_pts = [0.0, big_r / 2.0, big_r];
    let weight = |r: f64| r.powf(nf - 2.0);
    let upper = |r: f64| (kd * r * r).min(big_r);
    let grad = w * nested_2d(&outer_pts, &[], upper, weight, f_grad, spec, &inner_spec)? / delta;
    let crit = w * nested_2d(&outer_pts, &[], upper, weight, f_crit, spec, &inner_spec)? / delta;
    let lims = sigma_correction_limits(params, domain.h0())?;
    Ok(SigmaCorrections {
        grad_over_delta: grad,
        crit_over_delta: crit,
        grad_limit: lims[0],
        crit_limit: lims[1],
    })
}

/// Fitted linear coefficient of one expansion block next to its prediction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockFit {
    pub name: String,
    pub intercept: f64,
    /// Fitted coefficient of delta.
    pub slope: f64,
    /// Predicted coefficient.
    pub reference: f64,
    /// |slope - reference| / |reference|; infinite when the reference is 0.
    pub rel_error: f64,
    pub fit: FitResult,
}

fn block_fit(name: &str, deltas: &[f64], values: &[f64], reference: f64) -> Result<BlockFit> {
    let fit = fit_polynomial(deltas, values, 3)?;
    let slope = fit.coefficients[1];
    let rel_error = if reference != 0.0 {
        (slope - reference).abs() / reference.abs()
    } else {
        f64::INFINITY
    };
    Ok(BlockFit {
        name: name.into(),
        intercept: fit.coefficients[0],
        slope,
        reference,
        rel_error,
        fit,
    })
}

/// Quadratic-leading fit of the mu-coefficient block.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MassFit {
    /// Fitted coefficient of delta^2.
    pub c2: f64,
    /// Predicted coefficient: half the squared L^2 norm of the unit bubble.
    pub reference: f64,
    pub rel_error: f64,
    pub fit: FitResult,
}

/// Small-delta expansion of the energy over a grid of scales.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExpansionFit {
    pub deltas: Vec<f64>,
    pub breakdowns: Vec<EnergyBreakdown>,
    /// Fits for e1, e3, e4, e5 against their predicted linear coefficients.
    pub blocks: Vec<BlockFit>,
    /// Fit of e1+e3+e4+e5; its reference is the aggregated constant times
    /// H(0), which cancels identically.
    pub aggregate: BlockFit,
    pub mass: MassFit,
}

/// Run the energy over `deltas` (at least 5 values inside [1e-3, 1e-2]) and
/// fit each block with a cubic model, the mass block with
/// {delta^2, delta^3, delta^4}.
pub fn expansion_fit(
    params: &ProblemParams,
    domain: &ModelDomain,
    deltas: &[f64],
    spec: &QuadratureSpec,
) -> Result<ExpansionFit> {
    if deltas.len() < 5 {
        return Err(Error::Domain(format!(
            "expansion fit needs at least 5 scales, got {}",
            deltas.len()
        )));
    }
    let mut sorted = deltas.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Domain("expansion scales must be distinct".into()));
    }
    if sorted[0] < 1e-3 * (1.0 - 1e-9) || sorted[sorted.len() - 1] > 1e-2 * (1.0 + 1e-9) {
        return Err(Error::Domain(format!(
            "expansion scales must lie in [1e-3, 1e-2], got range [{}, {}]",
            sorted[0],
            sorted[sorted.len() - 1]
        )));
    }

    let breakdowns: Vec<EnergyBreakdown> = sorted
        .par_iter()
        .map(|&delta| {
            let bp = BubbleParams::centred(delta, params.n() as usize - 1)?;
            energy_terms(params, domain, &bp, spec)
        })
        .collect::<Result<Vec<_>>>()?;

    let h0 = domain.h0();
    let refs = first_order_references(params, h0)?;
    let series =
        |sel: fn(&EnergyBreakdown) -> f64| -> Vec<f64> { breakdowns.iter().map(sel).collect() };

    let blocks = vec![
        block_fit("gradient", &sorted, &series(|b| b.e1), refs[0])?,
        block_fit("critical_volume", &sorted, &series(|b| b.e3), refs[1])?,
        block_fit("trace_critical", &sorted, &series(|b| b.e4), refs[2])?,
        block_fit("curvature_trace", &sorted, &series(|b| b.e5), refs[3])?,
    ];
    let agg_ref: f64 = refs.iter().sum();
    let aggregate = block_fit(
        "aggregate",
        &sorted,
        &series(|b| b.e1 + b.e3 + b.e4 + b.e5),
        agg_ref,
    )?;

    let mass_fit = fit_powers(&sorted, &series(|b| b.e2), &[2.0, 3.0, 4.0])?;
    let mass_ref = 0.5 * bubble_norm(params, BubbleNorm::L2Volume, spec)?;
    let c2 = mass_fit.coefficients[0];
    let mass = MassFit {
        c2,
        reference: mass_ref,
        rel_error: (c2 - mass_ref).abs() / mass_ref.abs(),
        fit: mass_fit,
    };

    Ok(ExpansionFit {
        deltas: sorted,
        breakdowns,
        blocks,
        aggregate,
        mass,
    })
}

/// Norms quantifying how far the truncated bubble is from an exact solution
/// on the curved domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualNorms {
    /// ||chi U_delta||_{L^{2n/(n+2)}} over the region above the graph.
    pub w_volume: f64,
    /// L^{2n/(n+2)} norm of the interior commutator
    /// U^p (chi^p - chi) - c (2 grad chi . grad U + U lap chi).
    pub interior_op: f64,
    /// L^{2(n-1)/n} norm on the graph of the two cutoff components of the
    /// boundary operator.
    pub boundary_cutoff: f64,
    /// L^{2(n-1)/n} norm on the graph of H * chi U_delta.
    pub h_trace: f64,
}

/// The four residual norms at one scale. Needs n >= 6 and equal curvatures.
pub fn residual_norm_components(
    params: &ProblemParams,
    domain: &ModelDomain,
    delta: f64,
    spec: &QuadratureSpec,
) -> Result<ResidualNorms> {
    if params.n() < 6 {
        return Err(Error::Domain(format!(
            "residual norms are defined for n >= 6, got {}",
            params.n()
        )));
    }
    check_setup(params, domain, delta)?;
    let k = domain.equal_curvature().ok_or_else(|| {
        Error::Domain("residual norms are computed in the equal-curvature case".into())
    })?;

    let nf = params.nf();
    let n = params.n();
    let d = params.d();
    let alpha = params.alpha();
    let w = omega(n - 2);
    let rho = domain.rho;
    let prof = CutoffProfile::new(rho / 2.0, rho)?;
    let inner_spec = spec.scaled_tol(0.3);

    let q_vol = 2.0 * nf / (nf + 2.0);
    let q_tr = 2.0 * (nf - 1.0) / nf;

    // 1. W-norm in scaled variables over (cylinder - slab)
    let big_r = rho / delta;
    let kd = k * delta;
    let chi_scaled = |r: f64, yn: f64| prof.s(delta * r) * prof.s(delta * yn);
    let f_wq = |r: f64, yn: f64| {
        let (_, u, _, _) = bubble_radial(alpha, nf, d, r, yn);
        (chi_scaled(r, yn) * u).powf(q_vol)
    };
    let outer_pts = [0.0, big_r / 2.0, big_r];
    let weight_scaled = |r: f64| r.powf(nf - 2.0);
    let wq_cyl = nested_2d(
        &outer_pts,
        &[big_r / 2.0],
        |_| big_r,
        weight_scaled,
        f_wq,
        spec,
        &inner_spec,
    )?;
    let wq_slab = nested_2d(
        &outer_pts,
        &[],
        |r| (kd * r * r).min(big_r),
        weight_scaled,
        f_wq,
        spec,
        &inner_spec,
    )?;
    let dpow = nf - q_vol * (nf - 2.0) / 2.0;
    let w_volume = (delta.powf(dpow) * w * (wq_cyl - wq_slab)).powf(1.0 / q_vol);

    // 2. interior commutator in physical variables over the region above the
    // graph; supported where the cutoff varies
    let c_lap = params.laplace_coefficient();
    let p_crit = (nf + 2.0) / (nf - 2.0);
    let u_phys = |r: f64, xn: f64| {
        let s = xn + delta * d;
        let g = r * r + s * s - delta * delta;
        (
            alpha * delta.powf((nf - 2.0) / 2.0) * g.powf(-(nf - 2.0) / 2.0),
            g,
            s,
        )
    };
    let f_int = |r: f64, xn: f64| {
        let sc_r = prof.s(r);
        let sc_n = prof.s(xn);
        let chi = sc_r * sc_n;
        let d1r = prof.s_d1(r);
        let d1n = prof.s_d1(xn);
        if chi == 1.0 && d1r == 0.0 && d1n == 0.0 {
            return 0.0;
        }
        let (u, g, s) = u_phys(r, xn);
        let cgrad = alpha * delta.powf((nf - 2.0) / 2.0) * (2.0 - nf) * g.powf(-nf / 2.0);
        let (ur, un) = (cgrad * r, cgrad * s);
        let grad_dot = d1r * sc_n * ur + sc_r * d1n * un;
        let lap_chi =
            sc_n * (prof.s_d2(r) + (nf - 2.0) * d1r / r.max(1e-300)) + sc_r * prof.s_d2(xn);
        let val =
            u.powf(p_crit) * (chi.powf(p_crit) - chi) - c_lap * (2.0 * grad_dot + u * lap_chi);
        val.abs().powf(q_vol) * r.powf(nf - 2.0)
    };
    let phys_outer = [0.0, rho / 2.0, rho];
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let int_outer = |r: f64| {
        let lo = k * r * r;
        if lo >= rho {
            return 0.0;
        }
        let pts = clamp_splits(&[rho / 2.0], lo, rho);
        match integrate_split(&|xn| f_int(r, xn), &pts, &inner_spec) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        }
    };
    let int_res = integrate_split(&int_outer, &phys_outer, spec);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let interior_op = (w * int_res?).powf(1.0 / q_vol);

    // 3. cutoff components of the boundary operator on the graph:
    // (2/(n-2)) U dchi/dnu + (D/sqrt(n(n-1))) U^{n/(n-2)} (chi - chi^{n/(n-2)})
    let p_b = nf / (nf - 2.0);
    let f_bnd = |r: f64| {
        let xn = k * r * r;
        let sc_r = prof.s(r);
        let sc_n = prof.s(xn);
        let chi = sc_r * sc_n;
        let d1r = prof.s_d1(r);
        let d1n = prof.s_d1(xn);
        let grad_len = 2.0 * k * r;
        let wjac = (1.0 + grad_len * grad_len).sqrt();
        if d1r == 0.0 && d1n == 0.0 && (chi == 1.0 || chi == 0.0) {
            // dchi/dnu = 0 and chi - chi^p = 0: nothing to integrate
            return 0.0;
        }
        let (u, _, _) = u_phys(r, xn);
        // nu = (grad phi, -1)/sqrt(W)
        let dchi_dnu = (d1r * sc_n * grad_len - sc_r * d1n) / wjac;
        let val = 2.0 / (nf - 2.0) * u * dchi_dnu
            + params.boundary_coupling() * u.powf(p_b) * (chi - chi.powf(p_b));
        val.abs().powf(q_tr) * wjac * r.powf(nf - 2.0)
    };
    let mut bnd_pts = vec![0.0, rho / 2.0];
    if k > 0.0 {
        let rt = (rho / (2.0 * k)).sqrt();
        if rt > 0.0 && rt < rho {
            bnd_pts.push(rt);
        }
    }
    bnd_pts.push(rho);
    bnd_pts.sort_by(f64::total_cmp);
    let boundary_cutoff = (w * integrate_split(&f_bnd, &bnd_pts, spec)?).powf(1.0 / q_tr);

    // 4. curvature-weighted trace of W on the graph
    let nm1 = nf - 1.0;
    let h_rad = |s: f64| {
        let t = 4.0 * k * k * s * s;
        2.0 * k / nm1 * (nm1 + (nf - 2.0) * t) / (1.0 + t).powf(1.5)
    };
    let f_h = |r: f64| {
        let xn = k * r * r;
        let chi = prof.s(r) * prof.s(xn);
        if chi == 0.0 {
            return 0.0;
        }
        let (u, _, _) = u_phys(r, xn);
        let grad_len = 2.0 * k * r;
        let wjac = (1.0 + grad_len * grad_len).sqrt();
        (h_rad(r) * chi * u).abs().powf(q_tr) * wjac * r.powf(nf - 2.0)
    };
    let h_trace = (w * integrate_split(&f_h, &bnd_pts, spec)?).powf(1.0 / q_tr);

    Ok(ResidualNorms {
        w_volume,
        interior_op,
        boundary_cutoff,
        h_trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::bubble_energy_constant;

    fn p6() -> ProblemParams {
        ProblemParams::new(6, 1.5).unwrap()
    }

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    fn unit_domain(n: u32) -> ModelDomain {
        ModelDomain::equal(1.0, n as usize - 1, 1.0).unwrap()
    }

    #[test]
    fn rejects_mismatched_dimension_and_large_delta() {
        let params = p6();
        let dom5 = ModelDomain::equal(1.0, 5, 1.0).unwrap();
        let bp = BubbleParams::centred(0.2, 5).unwrap();
        assert!(energy_terms(&params, &dom5, &bp, &spec()).is_err()); // delta > rho/10
        let dom_wrong = ModelDomain::equal(1.0, 4, 1.0).unwrap();
        let bp_small = BubbleParams::centred(0.01, 4).unwrap();
        assert!(energy_terms(&params, &dom_wrong, &bp_small, &spec()).is_err());
    }

    #[test]
    fn blocks_have_the_predicted_signs_and_total_is_additive() {
        let params = p6();
        let dom = unit_domain(6);
        let bp = BubbleParams::centred(5e-3, 5).unwrap();
        let b = energy_terms(&params, &dom, &bp, &spec()).unwrap();
        assert!(b.e1 > 0.0 && b.e2 > 0.0 && b.e3 > 0.0 && b.e5 >= 0.0);
        assert!(b.e4 < 0.0);
        let mu = 0.7;
        let t = b.total(mu);
        assert_eq!(t, b.e1 + mu * b.e2 + b.e3 + b.e4 + b.e5);
    }

    #[test]
    fn flat_zero_curvature_blocks_approach_the_halfspace_constants() {
        let params = p6();
        let dom = ModelDomain::equal(0.0, 5, 1.0).unwrap();
        let bp = BubbleParams::centred(1e-3, 5).unwrap();
        let b = energy_terms(&params, &dom, &bp, &spec()).unwrap();
        let s = spec();
        let grad = bubble_norm(&params, BubbleNorm::GradSq, &s).unwrap();
        let vol = bubble_norm(&params, BubbleNorm::CritVolume, &s).unwrap();
        let trace = bubble_norm(&params, BubbleNorm::CritTrace, &s).unwrap();
        // cutoff tails are O(delta^{n-2}); at delta = 1e-3 they are invisible
        // at the 1e-6 relative level
        assert!((b.e1 - 2.5 * grad).abs() < 1e-6 * b.e1.abs());
        assert!((b.e3 - vol / 3.0).abs() < 1e-6 * b.e3.abs());
        assert!((b.e4 + 4.0 * 1.5 / 30.0f64.sqrt() * trace).abs() < 1e-6 * b.e4.abs());
        assert!(b.e5 == 0.0);
        let total = b.total(1.0);
        let e_flat = bubble_energy_constant(&params, &s).unwrap();
        // the mu-block contributes ~ delta^2 * l2/2 ~ 6.4e-3
        assert!(
            (total - e_flat).abs() < 1e-5 * e_flat.abs(),
            "{total} vs {e_flat}"
        );
    }

    #[test]
    fn linear_coefficients_match_the_moment_predictions_at_one_point() {
        // one-scale probe: (block(delta) - block(0)) / delta within a few
        // percent of the predicted linear coefficient (the quadratic term
        // contributes ~1% at delta = 1e-3)
        let params = p6();
        let dom = unit_domain(6);
        let delta = 1e-3;
        let bp = BubbleParams::centred(delta, 5).unwrap();
        let b = energy_terms(&params, &dom, &bp, &spec()).unwrap();
        let s = spec();
        let grad = bubble_norm(&params, BubbleNorm::GradSq, &s).unwrap();
        let vol = bubble_norm(&params, BubbleNorm::CritVolume, &s).unwrap();
        let trace = bubble_norm(&params, BubbleNorm::CritTrace, &s).unwrap();
        let refs = first_order_references(&params, 2.0).unwrap();
        let zero = [
            2.5 * grad,
            vol / 3.0,
            -4.0 * 1.5 / 30.0f64.sqrt() * trace,
            0.0,
        ];
        let got = [b.e1, b.e3, b.e4, b.e5];
        for i in 0..4 {
            let slope = (got[i] - zero[i]) / delta;
            let rel = (slope - refs[i]).abs() / refs[i].abs();
            assert!(
                rel < 0.05,
                "block {i}: slope {slope:.6e} vs {:.6e}",
                refs[i]
            );
        }
    }

    #[test]
    fn mass_block_correction_has_the_predicted_linear_coefficient() {
        // e2 = (delta^2/2) |U|_2^2 (1 - a delta + ...); the linear correction
        // is a first moment of the bubble mass over the slab and its value is
        // pinned here from the closed-form route
        let params = p6();
        let dom = unit_domain(6);
        let delta = 1e-3;
        let bp = BubbleParams::centred(delta, 5).unwrap();
        let b = energy_terms(&params, &dom, &bp, &spec()).unwrap();
        let l2 = bubble_norm(&params, BubbleNorm::L2Volume, &spec()).unwrap();
        let ratio = b.e2 / (0.5 * delta * delta * l2);
        let a = (1.0 - ratio) / delta;
        assert!(
            (a - 13.090169943749474).abs() < 0.6,
            "linear mass correction {a}"
        );
    }

    #[test]
    fn slab_corrections_approach_their_limits() {
        let params = p6();
        let dom = unit_domain(6);
        let sc = sigma_corrections(&params, &dom, 1e-3, &spec()).unwrap();
        assert!(
            (sc.grad_over_delta - sc.grad_limit).abs() < 0.02 * sc.grad_limit,
            "{} vs {}",
            sc.grad_over_delta,
            sc.grad_limit
        );
        assert!(
            (sc.crit_over_delta - sc.crit_limit).abs() < 0.02 * sc.crit_limit,
            "{} vs {}",
            sc.crit_over_delta,
            sc.crit_limit
        );
        // positive and strictly below the limit (the slab is a subset of the
        // asymptotic wedge at finite delta)
        assert!(sc.grad_over_delta > 0.0 && sc.crit_over_delta > 0.0);
    }

    #[test]
    fn first_order_references_are_linear_in_curvature() {
        let params = p6();
        let a = first_order_references(&params, 1.0).unwrap();
        let b = first_order_references(&params, 3.5).unwrap();
        for i in 0..4 {
            assert!((b[i] - 3.5 * a[i]).abs() <= 1e-12 * b[i].abs());
        }
    }

    #[test]
    fn monte_carlo_route_is_consistent_with_the_radial_route() {
        // run at the largest admissible scale where the spike is mildest;
        // the assertion is statistical (3 sigma) and the standard errors are
        // honest but wide
        let params = p6();
        let dom = unit_domain(6);
        let bp = BubbleParams::centred(0.1, 5).unwrap();
        let radial = energy_terms(&params, &dom, &bp, &spec()).unwrap();
        let mc_spec = QuadratureSpec {
            mc_samples: 300_000,
            rng_seed: 17,
            ..spec()
        };
        let (mc, se) = energy_terms_mc(&params, &dom, &bp, &mc_spec).unwrap();
        let got = [mc.e1, mc.e2, mc.e3, mc.e4, mc.e5];
        let want = [radial.e1, radial.e2, radial.e3, radial.e4, radial.e5];
        for i in 0..5 {
            assert!(
                (got[i] - want[i]).abs() <= 3.0 * se[i] + 1e-9 * want[i].abs(),
                "block {i}: mc {} vs radial {} (se {})",
                got[i],
                want[i],
                se[i]
            );
            assert!(se[i].is_finite());
        }
    }

    #[test]
    fn off_centre_bubble_takes_the_mc_route() {
        let params = p6();
        let dom = unit_domain(6);
        let bp = BubbleParams::new(0.1, vec![0.05, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let cheap = QuadratureSpec {
            mc_samples: 20_000,
            ..spec()
        };
        let b = energy_terms(&params, &dom, &bp, &cheap).unwrap();
        assert!(b.e1.is_finite() && b.e3 > 0.0);
    }

    #[test]
    fn expansion_grid_validation() {
        let params = p6();
        let dom = unit_domain(6);
        let s = spec();
        assert!(expansion_fit(&params, &dom, &[1e-3, 2e-3, 4e-3], &s).is_err());
        assert!(expansion_fit(&params, &dom, &[1e-4, 2e-3, 3e-3, 4e-3, 5e-3], &s).is_err());
        assert!(expansion_fit(&params, &dom, &[1e-3, 1e-3, 2e-3, 3e-3, 4e-3], &s).is_err());
    }

    #[test]
    fn radial_curvature_helper_matches_the_domain_formula() {
        let k = 0.8;
        let dom = ModelDomain::equal(k, 5, 10.0).unwrap();
        let nf = 6.0;
        for &s in &[0.0, 0.3, 1.0, 2.5] {
            let t = 4.0 * k * k * s * s;
            let h = 2.0 * k / (nf - 1.0) * ((nf - 1.0) + (nf - 2.0) * t) / (1.0 + t).powf(1.5);
            let mut x = vec![0.0; 5];
            x[0] = s;
            let want = dom.mean_curvature(&x).unwrap();
            assert!((h - want).abs() < 1e-13 * want.abs().max(1e-300), "s = {s}");
        }
    }

    #[test]
    fn residual_norms_are_positive_and_reject_low_dimension() {
        let params = ProblemParams::new(7, 1.5).unwrap();
        let dom = unit_domain(7);
        let r = residual_norm_components(&params, &dom, 5e-3, &spec()).unwrap();
        assert!(r.w_volume > 0.0);
        assert!(r.interior_op > 0.0);
        assert!(r.boundary_cutoff > 0.0);
        assert!(r.h_trace > 0.0);
        let p5 = ProblemParams::new(5, 1.5).unwrap();
        let dom5 = unit_domain(5);
        assert!(residual_norm_components(&p5, &dom5, 5e-3, &spec()).is_err());
    }
}
