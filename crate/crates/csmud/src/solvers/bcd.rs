//! Plain cyclic block-coordinate sweeps with the closed-form row update.

use ndarray::ArrayView1;
use num_complex::Complex64;

use super::soa::{self, Planes};
use super::{RawEstimate, SolverParams};
use crate::complexity::PhaseTally;
use crate::error::{Error, Result};
use crate::linalg::{CMat, CVec};

/// Closed-form minimizer of the per-user subproblem
/// `0.5 ||R - g x^T||^2 + (lambda0 / 2) ||x||^2`, namely
/// `x^T = g^H R / (g^H g + lambda0)`.
pub fn closed_form_update(
    g_k: ArrayView1<'_, Complex64>,
    r_k: &CMat,
    lambda0: f64,
) -> Result<CVec> {
    let n = g_k.len();
    if r_k.nrows() != n {
        return Err(Error::ShapeMismatch(format!(
            "residual has {} rows for a length-{n} column",
            r_k.nrows()
        )));
    }
    let denom: f64 = g_k.iter().map(|z| z.norm_sqr()).sum::<f64>() + lambda0;
    if denom == 0.0 {
        return Err(Error::DegenerateInput(
            "zero column with zero regularization".into(),
        ));
    }
    let j = r_k.ncols();
    let mut out = CVec::zeros(j);
    for col in 0..j {
        let mut acc = Complex64::new(0.0, 0.0);
        for row in 0..n {
            acc += g_k[row].conj() * r_k[[row, col]];
        }
        out[col] = acc / denom;
    }
    Ok(out)
}

/// Residual seen by user `k`: the received frame minus the interference of
/// every other candidate, `R_k = Y - sum_{l in omega, l != k} g_l x_l^T`.
pub fn residual_for_user(
    y: &CMat,
    g: &CMat,
    x_hat: &CMat,
    omega: &[usize],
    k: usize,
) -> Result<CMat> {
    if !omega.contains(&k) {
        return Err(Error::NotInCandidateSet { user: k });
    }
    let (n, j) = y.dim();
    let mut r = y.clone();
    for &l in omega {
        if l == k {
            continue;
        }
        for col in 0..j {
            let x = x_hat[[l, col]];
            for row in 0..n {
                r[[row, col]] -= g[[row, l]] * x;
            }
        }
    }
    Ok(r)
}

/// The regularized objective the sweeps minimize:
/// `0.5 ||Y - G X||_F^2 + (lambda0 / 2) sum_k ||x_k||_2^2`.
pub fn objective(y: &CMat, g: &CMat, x_hat: &CMat, lambda0: f64) -> f64 {
    let resid = y - &g.dot(x_hat);
    let fit: f64 = resid.iter().map(|z| z.norm_sqr()).sum();
    let penalty: f64 = x_hat.iter().map(|z| z.norm_sqr()).sum();
    0.5 * fit + 0.5 * lambda0 * penalty
}

/// Snapshot handed to a sweep probe after each coordinate update.
pub struct BcdStep {
    pub sweep: usize,
    pub user: usize,
    pub x_hat: CMat,
}

/// `t` full sweeps over all users in index order, starting from zero.
pub fn run_bcd(y: &CMat, g: &CMat, params: &SolverParams) -> Result<RawEstimate> {
    run_bcd_inner(y, g, params, None)
}

/// As `run_bcd`, invoking `probe` after every coordinate update. Snapshots
/// copy the estimate, so keep this to small instances.
pub fn run_bcd_probed(
    y: &CMat,
    g: &CMat,
    params: &SolverParams,
    probe: &mut dyn FnMut(BcdStep),
) -> Result<RawEstimate> {
    run_bcd_inner(y, g, params, Some(probe))
}

fn run_bcd_inner(
    y: &CMat,
    g: &CMat,
    params: &SolverParams,
    mut probe: Option<&mut dyn FnMut(BcdStep)>,
) -> Result<RawEstimate> {
    let (n, j) = y.dim();
    let k = g.ncols();
    if g.nrows() != n {
        return Err(Error::ShapeMismatch(format!(
            "channel has {} rows, received has {n}",
            g.nrows()
        )));
    }
    params.validate_for(k)?;

    let yt = Planes::from_mat_transposed(y); // J x N
    let gt = Planes::from_mat_transposed(g); // K x N
    let mut x = Planes::zeros(k, j);
    let mut resid = Planes::zeros(j, n);
    let mut tally = PhaseTally::default();
    let (nj, nn) = ((n * j) as u64, n as u64);

    for sweep in 1..=params.t {
        for user in 0..k {
            resid.copy_from(&yt);
            for l in 0..k {
                if l == user {
                    continue;
                }
                let (gr, gi) = gt.row(l);
                let (xr, xi) = x.row(l);
                soa::outer_sub(&mut resid, gr, gi, xr, xi);
            }
            tally.sweeps += (k as u64 - 1) * nj;

            update_row(&gt, &resid, &mut x, user, params.lambda0)?;
            tally.sweeps += nj + nn;

            if let Some(p) = probe.as_deref_mut() {
                p(BcdStep {
                    sweep,
                    user,
                    x_hat: x.to_mat(),
                });
            }
        }
    }

    Ok(RawEstimate {
        x_hat: x.to_mat(),
        final_omega: (0..k).collect(),
        omega_history: vec![(0..k).collect(); params.t],
        tally,
    })
}

/// Shared closed-form update on the split-plane state.
pub(super) fn update_row(
    gt: &Planes,
    resid: &Planes,
    x: &mut Planes,
    user: usize,
    lambda0: f64,
) -> Result<()> {
    let j = x.cols;
    let (gr, gi) = gt.row(user);
    let mut zr = vec![0.0; j];
    let mut zi = vec![0.0; j];
    soa::conj_dot_slots(resid, gr, gi, &mut zr, &mut zi);
    let denom = soa::norm_sqr(gr, gi) + lambda0;
    if denom == 0.0 {
        return Err(Error::DegenerateInput(format!(
            "user {user} has a zero column and lambda0 = 0"
        )));
    }
    let (xr, xi) = x.row_mut(user);
    for col in 0..j {
        xr[col] = zr[col] / denom;
        xi[col] = zi[col] / denom;
    }
    Ok(())
}
