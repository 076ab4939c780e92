//! Shared test oracles, independent of the solver implementations they
//! check.

use csmud::linalg::CMat;
use num_complex::Complex64;

/// Largest eigenvalue of `G^H G` by power iteration.
pub fn spectral_norm_sq(g: &CMat) -> f64 {
    let (_, k) = g.dim();
    let mut v = CMat::from_elem((k, 1), Complex64::new(1.0, 0.0));
    let mut lambda = 1.0;
    for _ in 0..200 {
        let w = conj_t(g).dot(&g.dot(&v));
        lambda = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if lambda == 0.0 {
            return 0.0;
        }
        v = w.mapv(|z| z / lambda);
    }
    lambda
}

pub fn conj_t(a: &CMat) -> CMat {
    let (m, n) = a.dim();
    let mut out = CMat::zeros((n, m));
    for i in 0..m {
        for c in 0..n {
            out[[c, i]] = a[[i, c]].conj();
        }
    }
    out
}

/// Reference minimizer of `0.5 ||Y - G X||^2 + (lambda0/2) ||X||^2` by plain
/// gradient iteration with a safe step size. Deliberately avoids coordinate
/// sweeps so it is an independent route to the same optimum.
pub fn reference_ridge_solution(y: &CMat, g: &CMat, lambda0: f64, max_iters: usize) -> CMat {
    let (_, k) = g.dim();
    let j = y.ncols();
    let lip = spectral_norm_sq(g) + lambda0;
    let step = 1.0 / (1.01 * lip);
    let mut x = CMat::zeros((k, j));
    let gh = conj_t(g);
    for _ in 0..max_iters {
        let grad = gh.dot(&(y - &g.dot(&x))) - &x.mapv(|z| z * lambda0);
        let delta: f64 = grad.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        x = x + grad.mapv(|z| z * step);
        if delta * step < 1e-13 {
            break;
        }
    }
    x
}

/// Objective value of the row-regularized least-squares problem.
pub fn ridge_objective(y: &CMat, g: &CMat, x: &CMat, lambda0: f64) -> f64 {
    let resid = y - &g.dot(x);
    let fit: f64 = resid.iter().map(|z| z.norm_sqr()).sum();
    let pen: f64 = x.iter().map(|z| z.norm_sqr()).sum();
    0.5 * fit + 0.5 * lambda0 * pen
}
