use crate::special::omega;
use rand::distributions::{Distribution, Uniform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Monte Carlo estimate with its one-sigma standard error.
#[derive(Debug, Clone, Copy)]
pub struct McEstimate {
    pub value: f64,
    pub std_err: f64,
    pub samples: u64,
}

/// Mean-value Monte Carlo integration of `f` over the axis-aligned box with
/// the given per-coordinate bounds. Deterministic for a fixed seed.
pub fn mc_integrate_box<F: Fn(&[f64]) -> f64>(
    f: F,
    bounds: &[(f64, f64)],
    samples: u64,
    seed: u64,
) -> McEstimate {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dists: Vec<Uniform<f64>> = bounds.iter().map(|&(a, b)| Uniform::new(a, b)).collect();
    let vol: f64 = bounds.iter().map(|&(a, b)| b - a).product();
    let mut x = vec![0.0; bounds.len()];
    let mut sum = 0.0f64;
    let mut sum_sq = 0.0f64;
    for _ in 0..samples {
        for (xi, d) in x.iter_mut().zip(&dists) {
            *xi = d.sample(&mut rng);
        }
        let v = f(&x);
        sum += v;
        sum_sq += v * v;
    }
    let nf = samples as f64;
    let mean = sum / nf;
    let var = (sum_sq / nf - mean * mean).max(0.0);
    McEstimate {
        value: vol * mean,
        std_err: vol * (var / nf).sqrt(),
        samples,
    }
}

/// Importance-sampled Monte Carlo for integrands that concentrate around
/// `center` at a small scale inside the box.
///
/// Half the samples are uniform; the other half pick a radius log-uniformly
/// on [r_lo, r_hi] and a direction uniformly on the sphere about `center`
/// (upper hemisphere in the last coordinate when `halfspace` is set). The
/// log-uniform radius spends the same effort on every length scale, which is
/// what a power-law spike needs. The mixture density is known in closed form,
/// so the estimate is unbiased; samples falling outside the box contribute
/// zero. Deterministic for a fixed seed.
#[allow(clippy::too_many_arguments)]
pub fn mc_integrate_box_peaked<F: Fn(&[f64]) -> f64>(
    f: F,
    bounds: &[(f64, f64)],
    center: &[f64],
    r_lo: f64,
    r_hi: f64,
    halfspace: bool,
    samples: u64,
    seed: u64,
) -> McEstimate {
    let dim = bounds.len();
    assert_eq!(center.len(), dim);
    assert!(r_lo > 0.0 && r_lo < r_hi);
    // the hemisphere density is only correct when no box point lies below
    // the center plane
    assert!(!halfspace || center[dim - 1] <= bounds[dim - 1].0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dists: Vec<Uniform<f64>> = bounds.iter().map(|&(a, b)| Uniform::new(a, b)).collect();
    let vol: f64 = bounds.iter().map(|&(a, b)| b - a).product();
    let p_unif = 1.0 / vol;
    let log_span = (r_hi / r_lo).ln();
    // direction density on the (hemi)sphere times the radial log-uniform law
    let dir_density = if halfspace { 2.0 } else { 1.0 } / omega(dim as u32 - 1);
    let p_radial = |r: f64| {
        if r < r_lo || r > r_hi {
            0.0
        } else {
            dir_density / (log_span * r.powi(dim as i32))
        }
    };
    let in_box = |x: &[f64]| x.iter().zip(bounds).all(|(v, &(a, b))| *v >= a && *v <= b);

    let mut x = vec![0.0; dim];
    let mut dir = vec![0.0; dim];
    let mut sum = 0.0f64;
    let mut sum_sq = 0.0f64;
    for _ in 0..samples {
        let from_core = rng.gen::<f64>() < 0.5;
        if from_core {
            let r = r_lo * (rng.gen::<f64>() * log_span).exp();
            // Box-Muller direction, normalized
            let mut i = 0;
            while i < dim {
                let u1: f64 = 1.0 - rng.gen::<f64>();
                let u2: f64 = rng.gen();
                let m = (-2.0 * u1.ln()).sqrt();
                dir[i] = m * (std::f64::consts::TAU * u2).cos();
                if i + 1 < dim {
                    dir[i + 1] = m * (std::f64::consts::TAU * u2).sin();
                }
                i += 2;
            }
            let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
            for (xi, (d, c)) in x.iter_mut().zip(dir.iter().zip(center)) {
                *xi = c + r * d / norm;
            }
            if halfspace {
                x[dim - 1] = center[dim - 1] + r * dir[dim - 1].abs() / norm;
            }
        } else {
            for (xi, d) in x.iter_mut().zip(&dists) {
                *xi = d.sample(&mut rng);
            }
        }
        let inside = in_box(&x);
        let r = x
            .iter()
            .zip(center)
            .map(|(v, c)| (v - c) * (v - c))
            .sum::<f64>()
            .sqrt();
        let p = if inside { 0.5 * p_unif } else { 0.0 } + 0.5 * p_radial(r);
        let w = if inside && p > 0.0 { f(&x) / p } else { 0.0 };
        sum += w;
        sum_sq += w * w;
    }
    let nf = samples as f64;
    let mean = sum / nf;
    let var = (sum_sq / nf - mean * mean).max(0.0);
    McEstimate {
        value: mean,
        std_err: (var / nf).sqrt(),
        samples,
    }
}
