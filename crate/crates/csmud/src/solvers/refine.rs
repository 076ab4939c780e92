//! Least-squares refinement over the detected support. The raw sweep output
//! still carries residual interference, so symbols are re-estimated from the
//! detected columns alone.

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};

pub struct LsRefined {
    /// K x J matrix, zero outside the detected support.
    pub x_refined: CMat,
    pub rank_deficient: bool,
}

/// Solves `min || G[gamma] Z - Y ||` and scatters `Z` back into the detected
/// rows; all other rows are exactly zero. Numerical rank deficiency falls
/// back to the minimum-norm solution and is flagged to the caller.
pub fn ls_refine(y: &CMat, g: &CMat, gamma_hat: &[usize]) -> Result<LsRefined> {
    let (n, j) = y.dim();
    let k = g.ncols();
    if g.nrows() != n {
        return Err(Error::ShapeMismatch(format!(
            "channel has {} rows, received has {n}",
            g.nrows()
        )));
    }
    let s = gamma_hat.len();
    if s > n {
        return Err(Error::SupportTooLarge { support: s, n });
    }
    if let Some(&bad) = gamma_hat.iter().find(|&&u| u >= k) {
        return Err(Error::ShapeMismatch(format!(
            "support index {bad} out of range for {k} users"
        )));
    }

    let mut x_refined = CMat::zeros((k, j));
    if s == 0 {
        return Ok(LsRefined {
            x_refined,
            rank_deficient: false,
        });
    }

    let mut sub = CMat::zeros((n, s));
    for (c, &user) in gamma_hat.iter().enumerate() {
        for row in 0..n {
            sub[[row, c]] = g[[row, user]];
        }
    }
    let out = linalg::lstsq(&sub, y)?;
    if out.rank_deficient {
        log::warn!(
            "rank-deficient support of size {s} (rank {}), using minimum-norm refinement",
            out.rank
        );
    }
    for (c, &user) in gamma_hat.iter().enumerate() {
        for col in 0..j {
            x_refined[[user, col]] = out.solution[[c, col]];
        }
    }
    Ok(LsRefined {
        x_refined,
        rank_deficient: out.rank_deficient,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::conj_t;
    use crate::rng::RandomStream;
    use num_complex::Complex64;

    #[test]
    fn orthonormal_single_column_reduces_to_correlation() {
        let n = 4;
        let mut g = CMat::zeros((n, n));
        for i in 0..n {
            g[[i, i]] = Complex64::new(1.0, 0.0);
        }
        let y = RandomStream::new(1).complex_gaussian_matrix(n, 3);
        let out = ls_refine(&y, &g, &[2]).unwrap();
        for col in 0..3 {
            // g_2^H Y with a unit column picks out row 2 of Y
            assert!((out.x_refined[[2, col]] - y[[2, col]]).norm() < 1e-14);
        }
        for user in [0, 1, 3] {
            for col in 0..3 {
                assert_eq!(out.x_refined[[user, col]], Complex64::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn noiseless_consistent_system_is_recovered() {
        let mut rng = RandomStream::new(2);
        let g = rng.complex_gaussian_matrix(10, 20);
        let gamma = vec![1, 7, 13];
        let mut x = CMat::zeros((20, 2));
        for &u in &gamma {
            for col in 0..2 {
                x[[u, col]] = rng.complex_gaussian();
            }
        }
        let y = g.dot(&x);
        let out = ls_refine(&y, &g, &gamma).unwrap();
        assert!(!out.rank_deficient);
        let gap: f64 = (&out.x_refined - &x).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(gap < 1e-10, "max entry gap {gap}");
    }

    #[test]
    fn residual_is_orthogonal_to_detected_columns() {
        let mut rng = RandomStream::new(3);
        let g = rng.complex_gaussian_matrix(12, 18);
        let y = rng.complex_gaussian_matrix(12, 4);
        let gamma = vec![0, 4, 9, 16];
        let out = ls_refine(&y, &g, &gamma).unwrap();
        let resid = &y - &g.dot(&out.x_refined);
        let mut sub = CMat::zeros((12, gamma.len()));
        for (c, &u) in gamma.iter().enumerate() {
            for row in 0..12 {
                sub[[row, c]] = g[[row, u]];
            }
        }
        let gram = conj_t(&sub).dot(&resid);
        let norm = crate::linalg::frob_norm(&gram) / crate::linalg::frob_norm(&y);
        assert!(norm < 1e-9, "normal-equations residual {norm}");
    }

    #[test]
    fn oversized_support_is_rejected() {
        let mut rng = RandomStream::new(4);
        let g = rng.complex_gaussian_matrix(4, 10);
        let y = rng.complex_gaussian_matrix(4, 1);
        let gamma: Vec<usize> = (0..5).collect();
        assert!(matches!(
            ls_refine(&y, &g, &gamma),
            Err(Error::SupportTooLarge { support: 5, n: 4 })
        ));
    }

    #[test]
    fn empty_support_returns_zeros() {
        let mut rng = RandomStream::new(5);
        let g = rng.complex_gaussian_matrix(4, 6);
        let y = rng.complex_gaussian_matrix(4, 2);
        let out = ls_refine(&y, &g, &[]).unwrap();
        assert!(out.x_refined.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn duplicate_columns_flag_rank_deficiency() {
        let mut rng = RandomStream::new(6);
        let base = rng.complex_gaussian_matrix(8, 5);
        let mut g = CMat::zeros((8, 5));
        for row in 0..8 {
            for c in 0..4 {
                g[[row, c]] = base[[row, c]];
            }
            g[[row, 4]] = base[[row, 0]]; // user 4 clones user 0
        }
        let y = rng.complex_gaussian_matrix(8, 2);
        let out = ls_refine(&y, &g, &[0, 1, 4]).unwrap();
        assert!(out.rank_deficient);
    }
}
