//! Pruning sweeps: the plain scheme restricted to a candidate set that
//! shrinks after each of the first `t_b` sweeps. Discarded users take their
//! optimal all-zero rows immediately, which both cuts work and removes their
//! interference from every later residual.

use super::soa::{self, Planes};
use super::support::select_top_energies;
use super::{CandidateState, RawEstimate, SolverParams};
use crate::complexity::PhaseTally;
use crate::error::{Error, Result};
use crate::linalg::CMat;

/// Discards the `psi_t` lowest-energy candidates: survivors keep their rows,
/// discarded rows are set to exact zero, and the surviving set stays sorted
/// by user index.
pub fn prune(state: CandidateState, psi_t: usize) -> Result<CandidateState> {
    let CandidateState { omega, mut x_hat } = state;
    if psi_t > omega.len() {
        return Err(Error::PruneTooLarge {
            requested: psi_t,
            available: omega.len(),
        });
    }
    let energies: Vec<(usize, f64)> = omega
        .iter()
        .map(|&k| (k, x_hat.row(k).iter().map(|z| z.norm_sqr()).sum()))
        .collect();
    let keep = select_top_energies(&energies, omega.len() - psi_t);
    let keep_set: std::collections::HashSet<usize> = keep.iter().copied().collect();
    for &k in &omega {
        if !keep_set.contains(&k) {
            x_hat.row_mut(k).fill(num_complex::Complex64::new(0.0, 0.0));
        }
    }
    Ok(CandidateState { omega: keep, x_hat })
}

/// Pruning sweeps with the residual rebuilt from scratch at every position.
pub fn run_ebcd(y: &CMat, g: &CMat, params: &SolverParams) -> Result<RawEstimate> {
    let (n, j) = y.dim();
    let k = g.ncols();
    if g.nrows() != n {
        return Err(Error::ShapeMismatch(format!(
            "channel has {} rows, received has {n}",
            g.nrows()
        )));
    }
    params.validate_for(k)?;

    let yt = Planes::from_mat_transposed(y);
    let gt = Planes::from_mat_transposed(g);
    let mut x = Planes::zeros(k, j);
    let mut resid = Planes::zeros(j, n);
    let mut omega: Vec<usize> = (0..k).collect();
    let mut omega_history = Vec::with_capacity(params.t);
    let mut tally = PhaseTally::default();
    let (nj, nn) = ((n * j) as u64, n as u64);

    for sweep in 1..=params.t {
        omega_history.push(omega.clone());
        let ka = omega.len() as u64;
        for pos in 0..omega.len() {
            let user = omega[pos];
            resid.copy_from(&yt);
            for &l in &omega {
                if l == user {
                    continue;
                }
                let (gr, gi) = gt.row(l);
                let (xr, xi) = x.row(l);
                soa::outer_sub(&mut resid, gr, gi, xr, xi);
            }
            super::bcd::update_row(&gt, &resid, &mut x, user, params.lambda0)?;
            tally.sweeps += (ka - 1) * nj + nj + nn;
        }

        if sweep <= params.t_b {
            let psi = params.psi_schedule[sweep - 1];
            tally.pruning += 2 * ka;
            if psi > omega.len() {
                return Err(Error::PruneTooLarge {
                    requested: psi,
                    available: omega.len(),
                });
            }
            let energies: Vec<(usize, f64)> =
                omega.iter().map(|&u| (u, soa::row_energy(&x, u))).collect();
            let keep = select_top_energies(&energies, omega.len() - psi);
            let keep_set: std::collections::HashSet<usize> = keep.iter().copied().collect();
            for &u in &omega {
                if !keep_set.contains(&u) {
                    x.zero_row(u);
                }
            }
            omega = keep;
        }
    }

    Ok(RawEstimate {
        x_hat: x.to_mat(),
        final_omega: omega,
        omega_history,
        tally,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RandomStream;
    use crate::solvers::run_bcd;
    use num_complex::Complex64;

    fn state_with_energies(energies: &[f64]) -> CandidateState {
        let mut x_hat = CMat::zeros((energies.len(), 1));
        for (i, &e) in energies.iter().enumerate() {
            x_hat[[i, 0]] = Complex64::new(e.sqrt(), 0.0);
        }
        CandidateState {
            omega: (0..energies.len()).collect(),
            x_hat,
        }
    }

    #[test]
    fn prune_drops_lowest_energy_rows() {
        let state = state_with_energies(&[5.0, 1.0, 4.0, 0.5, 3.0]);
        let pruned = prune(state, 2).unwrap();
        assert_eq!(pruned.omega, vec![0, 2, 4]);
        assert_eq!(pruned.x_hat[[1, 0]], Complex64::new(0.0, 0.0));
        assert_eq!(pruned.x_hat[[3, 0]], Complex64::new(0.0, 0.0));
        assert!(pruned.x_hat[[0, 0]].norm() > 0.0);
    }

    #[test]
    fn prune_zero_is_identity() {
        let state = state_with_energies(&[2.0, 1.0]);
        let same = prune(state.clone(), 0).unwrap();
        assert_eq!(same, state);
    }

    #[test]
    fn prune_breaks_ties_toward_small_index() {
        let state = state_with_energies(&[1.0, 1.0, 1.0]);
        let pruned = prune(state, 1).unwrap();
        assert_eq!(pruned.omega, vec![0, 1]);
    }

    #[test]
    fn prune_rejects_oversized_request() {
        let state = state_with_energies(&[1.0]);
        assert!(prune(state, 2).is_err());
    }

    #[test]
    fn zero_schedule_matches_plain_sweeps_exactly() {
        let mut rng = RandomStream::new(5);
        let g = rng.complex_gaussian_matrix(6, 10);
        let y = rng.complex_gaussian_matrix(6, 3);
        let mut params = SolverParams::plain(0.7, 5, 1.0);
        params.t_b = 3;
        params.psi_schedule = vec![0, 0, 0];
        let eb = run_ebcd(&y, &g, &params).unwrap();
        let plain = run_bcd(&y, &g, &SolverParams::plain(0.7, 5, 1.0)).unwrap();
        assert_eq!(eb.x_hat, plain.x_hat);
        assert_eq!(eb.final_omega.len(), 10);
    }

    #[test]
    fn single_survivor_schedule() {
        let mut rng = RandomStream::new(6);
        let g = rng.complex_gaussian_matrix(6, 8);
        let y = rng.complex_gaussian_matrix(6, 2);
        let params = SolverParams {
            lambda0: 0.7,
            t: 1,
            t_b: 1,
            psi_schedule: vec![7],
            v_th: 1.0,
        };
        let out = run_ebcd(&y, &g, &params).unwrap();
        assert_eq!(out.final_omega.len(), 1);
        let nonzero: Vec<usize> = (0..8)
            .filter(|&k| out.x_hat.row(k).iter().any(|z| z.norm_sqr() > 0.0))
            .collect();
        assert_eq!(nonzero, out.final_omega);
    }

    #[test]
    fn pruned_rows_stay_zero_and_sizes_follow_schedule() {
        let mut rng = RandomStream::new(7);
        let g = rng.complex_gaussian_matrix(8, 16);
        let y = rng.complex_gaussian_matrix(8, 3);
        let params = SolverParams {
            lambda0: 0.7,
            t: 6,
            t_b: 3,
            psi_schedule: vec![4, 4, 4],
            v_th: 1.0,
        };
        let out = run_ebcd(&y, &g, &params).unwrap();
        assert_eq!(out.final_omega.len(), 4);
        for k in 0..16 {
            let zero = out.x_hat.row(k).iter().all(|z| z.norm_sqr() == 0.0);
            assert_eq!(zero, !out.final_omega.contains(&k));
        }
    }

    #[test]
    fn sweep_tally_matches_budget() {
        let mut rng = RandomStream::new(8);
        let (n, k, j) = (5, 12, 2);
        let g = rng.complex_gaussian_matrix(n, k);
        let y = rng.complex_gaussian_matrix(n, j);
        let params = SolverParams {
            lambda0: 0.7,
            t: 4,
            t_b: 2,
            psi_schedule: vec![3, 3],
            v_th: 1.0,
        };
        let out = run_ebcd(&y, &g, &params).unwrap();
        let nj = (n * j) as u64;
        let expect_sweeps: u64 = [12u64, 9, 6, 6]
            .iter()
            .map(|&ka| ka * ((ka - 1) * nj + nj + n as u64))
            .sum();
        assert_eq!(out.tally.sweeps, expect_sweeps);
        assert_eq!(out.tally.pruning, 2 * (12 + 9));
    }
}
