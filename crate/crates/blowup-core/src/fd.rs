//! Central finite differences, second order in the step.

/// Gradient of `f` at `x` by central differences with step `h`.
pub fn fd_gradient<F: Fn(&[f64]) -> f64>(f: F, x: &[f64], h: f64) -> Vec<f64> {
    let mut xp = x.to_vec();
    let mut out = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let xi = x[i];
        xp[i] = xi + h;
        let fp = f(&xp);
        xp[i] = xi - h;
        let fm = f(&xp);
        xp[i] = xi;
        out.push((fp - fm) / (2.0 * h));
    }
    out
}

/// Laplacian of `f` at `x` by the second central difference in each
/// coordinate.
pub fn fd_laplacian<F: Fn(&[f64]) -> f64>(f: F, x: &[f64], h: f64) -> f64 {
    let fc = f(x);
    let mut xp = x.to_vec();
    let mut acc = 0.0;
    for i in 0..x.len() {
        let xi = x[i];
        xp[i] = xi + h;
        let fp = f(&xp);
        xp[i] = xi - h;
        let fm = f(&xp);
        xp[i] = xi;
        acc += fp - 2.0 * fc + fm;
    }
    acc / (h * h)
}

/// Scalar derivative by the central two-point rule.
pub fn fd_derivative<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}
