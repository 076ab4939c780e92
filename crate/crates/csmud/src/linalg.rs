//! Small dense complex linear-algebra kernels: Householder QR with column
//! pivoting and a minimum-norm least-squares solve. Sized for tall skinny
//! systems (tens of columns), which is all the detectors ever need.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = Array2<Complex64>;
pub type CVec = Array1<Complex64>;

/// Result of a least-squares solve.
pub struct LstSq {
    pub solution: CMat,
    pub rank: usize,
    /// True when the factorization detected numerical rank deficiency and a
    /// minimum-norm solution was substituted.
    pub rank_deficient: bool,
}

/// Solves `min_Z ||A Z - B||_F` for tall-or-square `A` (m x n, m >= n) via
/// Householder QR with column pivoting. Numerically rank-deficient systems
/// fall back to the minimum-norm solution through a complete orthogonal
/// decomposition.
pub fn lstsq(a: &CMat, b: &CMat) -> Result<LstSq> {
    let (m, n) = a.dim();
    let (mb, j) = b.dim();
    if mb != m {
        return Err(Error::ShapeMismatch(format!(
            "lstsq: A is {m}x{n} but B has {mb} rows"
        )));
    }
    if m < n {
        return Err(Error::SupportTooLarge { support: n, n: m });
    }
    if n == 0 {
        return Ok(LstSq {
            solution: CMat::zeros((0, j)),
            rank: 0,
            rank_deficient: false,
        });
    }

    let mut r = a.clone();
    let mut qtb = b.clone();
    let mut perm: Vec<usize> = (0..n).collect();

    // Pivoted Householder sweep; reflections are applied to B on the fly.
    for k in 0..n {
        // Pivot: bring the remaining column with the largest norm to front.
        let mut best = k;
        let mut best_norm = 0.0;
        for c in k..n {
            let nrm: f64 = (k..m).map(|i| r[[i, c]].norm_sqr()).sum();
            if nrm > best_norm {
                best_norm = nrm;
                best = c;
            }
        }
        if best != k {
            for i in 0..m {
                r.swap([i, k], [i, best]);
            }
            perm.swap(k, best);
        }

        let norm = best_norm.sqrt();
        if norm == 0.0 {
            break; // remaining block is exactly zero
        }

        // Householder vector v = x - a1*e1 with |a1| = ||x||.
        let x0 = r[[k, k]];
        let phase = if x0.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        let a1 = -phase * norm;
        let mut v: Vec<Complex64> = (k..m).map(|i| r[[i, k]]).collect();
        v[0] -= a1;
        let vsq: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vsq > 0.0 {
            reflect(&mut r, &v, vsq, k, k + 1, n);
            reflect(&mut qtb, &v, vsq, k, 0, j);
        }
        r[[k, k]] = a1;
        for i in k + 1..m {
            r[[i, k]] = Complex64::new(0.0, 0.0);
        }
    }

    // Numerical rank from the pivoted diagonal.
    let tol = (m.max(n) as f64) * f64::EPSILON * r[[0, 0]].norm();
    let mut rank = 0;
    while rank < n && r[[rank, rank]].norm() > tol {
        rank += 1;
    }

    let mut z_perm = CMat::zeros((n, j));
    let rank_deficient = rank < n;
    if !rank_deficient {
        // Back-substitution on the full triangle.
        for col in 0..j {
            for i in (0..n).rev() {
                let mut acc = qtb[[i, col]];
                for l in i + 1..n {
                    acc -= r[[i, l]] * z_perm[[l, col]];
                }
                z_perm[[i, col]] = acc / r[[i, i]];
            }
        }
    } else {
        // Complete orthogonal decomposition: factor R1^H = U T, so that
        // R1 = T^H U^H and the minimum-norm solution is U T^{-H} (Q^H B).
        let mut r1h = CMat::zeros((n, rank));
        for i in 0..rank {
            for l in 0..n {
                r1h[[l, i]] = r[[i, l]].conj();
            }
        }
        let (u, t) = thin_qr(&mut r1h);
        // Forward-substitute T^H W = C.
        let mut w = CMat::zeros((rank, j));
        for col in 0..j {
            for i in 0..rank {
                let mut acc = qtb[[i, col]];
                for l in 0..i {
                    acc -= t[[l, i]].conj() * w[[l, col]];
                }
                w[[i, col]] = acc / t[[i, i]].conj();
            }
        }
        z_perm = u.dot(&w);
    }

    let mut solution = CMat::zeros((n, j));
    for i in 0..n {
        for col in 0..j {
            solution[[perm[i], col]] = z_perm[[i, col]];
        }
    }
    Ok(LstSq {
        solution,
        rank,
        rank_deficient,
    })
}

/// Applies `I - 2 v v^H / vsq` to columns `c0..c1` of `mat`, rows `k..`.
fn reflect(mat: &mut CMat, v: &[Complex64], vsq: f64, k: usize, c0: usize, c1: usize) {
    let m = mat.nrows();
    for c in c0..c1 {
        let mut dot = Complex64::new(0.0, 0.0);
        for (o, &vi) in v.iter().enumerate() {
            dot += vi.conj() * mat[[k + o, c]];
        }
        let scale = dot * (2.0 / vsq);
        for (o, &vi) in v.iter().enumerate() {
            let idx = [k + o, c];
            let cur = mat[idx];
            mat[[k + o, c]] = cur - vi * scale;
        }
    }
    debug_assert!(m >= k + v.len());
}

/// Unpivoted thin QR of a tall matrix (m x n, m >= n, full column rank
/// assumed by construction here): returns (Q thin m x n, R n x n).
fn thin_qr(a: &mut CMat) -> (CMat, CMat) {
    let (m, n) = a.dim();
    let mut vs: Vec<(usize, Vec<Complex64>, f64)> = Vec::with_capacity(n);
    for k in 0..n {
        let norm: f64 = (k..m).map(|i| a[[i, k]].norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = a[[k, k]];
        let phase = if x0.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        let a1 = -phase * norm;
        let mut v: Vec<Complex64> = (k..m).map(|i| a[[i, k]]).collect();
        v[0] -= a1;
        let vsq: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vsq > 0.0 {
            reflect(a, &v, vsq, k, k + 1, n);
            vs.push((k, v, vsq));
        }
        a[[k, k]] = a1;
        for i in k + 1..m {
            a[[i, k]] = Complex64::new(0.0, 0.0);
        }
    }
    let mut rmat = CMat::zeros((n, n));
    for i in 0..n {
        for c in i..n {
            rmat[[i, c]] = a[[i, c]];
        }
    }
    // Q = H_1 ... H_p applied to the first n identity columns.
    let mut q = CMat::zeros((m, n));
    for i in 0..n {
        q[[i, i]] = Complex64::new(1.0, 0.0);
    }
    for (k, v, vsq) in vs.iter().rev() {
        reflect(&mut q, v, *vsq, *k, 0, n);
    }
    (q, rmat)
}

/// Conjugate transpose.
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

pub fn frob_norm(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// ||a - b||_F / max(||b||_F, floor)
pub fn rel_frob_diff(a: &CMat, b: &CMat) -> f64 {
    let mut num = 0.0;
    for (x, y) in a.iter().zip(b.iter()) {
        num += (x - y).norm_sqr();
    }
    let den = frob_norm(b).max(1e-300);
    num.sqrt() / den
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RandomStream;

    fn residual_orthogonality(a: &CMat, b: &CMat, z: &CMat) -> f64 {
        let resid = b - &a.dot(z);
        let gram = conj_t(a).dot(&resid);
        frob_norm(&gram) / frob_norm(b).max(1e-300)
    }

    #[test]
    fn consistent_system_recovered_exactly() {
        let mut rng = RandomStream::new(11);
        let a = rng.complex_gaussian_matrix(12, 5);
        let z_true = rng.complex_gaussian_matrix(5, 3);
        let b = a.dot(&z_true);
        let out = lstsq(&a, &b).unwrap();
        assert!(!out.rank_deficient);
        assert_eq!(out.rank, 5);
        assert!(rel_frob_diff(&out.solution, &z_true) < 1e-10);
    }

    #[test]
    fn overdetermined_residual_is_orthogonal() {
        let mut rng = RandomStream::new(12);
        let a = rng.complex_gaussian_matrix(30, 8);
        let b = rng.complex_gaussian_matrix(30, 4);
        let out = lstsq(&a, &b).unwrap();
        assert!(residual_orthogonality(&a, &b, &out.solution) < 1e-12);
    }

    #[test]
    fn rank_deficient_gets_min_norm() {
        let mut rng = RandomStream::new(13);
        let base = rng.complex_gaussian_matrix(10, 3);
        // Duplicate a column: rank 3 out of 4.
        let mut a = CMat::zeros((10, 4));
        for i in 0..10 {
            for c in 0..3 {
                a[[i, c]] = base[[i, c]];
            }
            a[[i, 3]] = base[[i, 1]];
        }
        let b = rng.complex_gaussian_matrix(10, 2);
        let out = lstsq(&a, &b).unwrap();
        assert!(out.rank_deficient);
        assert_eq!(out.rank, 3);
        // Still a least-squares solution...
        assert!(residual_orthogonality(&a, &b, &out.solution) < 1e-10);
        // ...and not beaten in norm by shifting weight between the twin
        // columns (the null direction is e_1 - e_3 up to scale).
        let sol_norm = frob_norm(&out.solution);
        for shift in [-0.5, -0.1, 0.1, 0.5] {
            let mut alt = out.solution.clone();
            for col in 0..2 {
                alt[[1, col]] += Complex64::new(shift, 0.0);
                alt[[3, col]] -= Complex64::new(shift, 0.0);
            }
            assert!(frob_norm(&alt) > sol_norm - 1e-12);
        }
    }

    #[test]
    fn wide_system_is_rejected() {
        let mut rng = RandomStream::new(14);
        let a = rng.complex_gaussian_matrix(4, 6);
        let b = rng.complex_gaussian_matrix(4, 1);
        assert!(lstsq(&a, &b).is_err());
    }
}
