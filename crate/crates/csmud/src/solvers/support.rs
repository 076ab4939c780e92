//! Support selection and symbol decisions.

use crate::constellation::Constellation;
use crate::linalg::CMat;

/// Relative guard under which two row energies count as tied. Keeps the
/// selection identical across detectors whose estimates agree only up to
/// floating-point reassociation.
const TIE_GUARD: f64 = 1e-12;

/// Squared l2 norm of every row of the estimate.
pub fn row_energies(x_hat: &CMat) -> Vec<f64> {
    (0..x_hat.nrows())
        .map(|k| x_hat.row(k).iter().map(|z| z.norm_sqr()).sum())
        .collect()
}

/// Indices whose row energy strictly exceeds the threshold, ascending.
pub fn threshold_support(x_hat: &CMat, v_th: f64) -> Vec<usize> {
    row_energies(x_hat)
        .into_iter()
        .enumerate()
        .filter(|&(_, e)| e > v_th)
        .map(|(k, _)| k)
        .collect()
}

/// Keeps the `keep` largest-energy candidates out of `(index, energy)`
/// pairs; energies within the tie guard of the cut resolve toward smaller
/// index. Returns ascending indices.
pub fn select_top_energies(candidates: &[(usize, f64)], keep: usize) -> Vec<usize> {
    if keep == 0 {
        return vec![];
    }
    if keep >= candidates.len() {
        let mut all: Vec<usize> = candidates.iter().map(|&(i, _)| i).collect();
        all.sort_unstable();
        return all;
    }
    let mut order: Vec<(usize, f64)> = candidates.to_vec();
    order.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.0.cmp(&b.0))
    });
    let cut = order[keep - 1].1;
    let tol = TIE_GUARD * cut.abs().max(1.0e-300);
    let tied = |e: f64| (e - cut).abs() <= tol || (e - cut).abs() <= TIE_GUARD * e.abs();

    let mut selected: Vec<usize> = Vec::with_capacity(keep);
    let mut boundary: Vec<usize> = Vec::new();
    for &(idx, e) in &order {
        if e > cut && !tied(e) {
            selected.push(idx);
        } else if tied(e) {
            boundary.push(idx);
        }
    }
    boundary.sort_unstable();
    for idx in boundary {
        if selected.len() == keep {
            break;
        }
        selected.push(idx);
    }
    selected.sort_unstable();
    selected
}

/// Top-`s_true` rows by energy, for detectors told the exact sparsity.
pub fn oracle_support(x_hat: &CMat, s_true: usize) -> Vec<usize> {
    let energies: Vec<(usize, f64)> = row_energies(x_hat).into_iter().enumerate().collect();
    select_top_energies(&energies, s_true.min(energies.len()))
}

/// Hard decisions: nearest constellation point for detected users, exact
/// zero elsewhere.
pub fn demap(x_refined: &CMat, gamma_hat: &[usize], constellation: &Constellation) -> CMat {
    let (k, j) = x_refined.dim();
    let mut out = CMat::zeros((k, j));
    for &user in gamma_hat {
        for col in 0..j {
            out[[user, col]] = constellation.decide(x_refined[[user, col]]);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn mat_with_energies(energies: &[f64]) -> CMat {
        // single column whose entries square to the requested energies
        let mut m = CMat::zeros((energies.len(), 1));
        for (i, &e) in energies.iter().enumerate() {
            m[[i, 0]] = Complex64::new(e.sqrt(), 0.0);
        }
        m
    }

    #[test]
    fn threshold_uses_strict_inequality() {
        let m = mat_with_energies(&[1.5, 0.2, 2.0]);
        assert_eq!(threshold_support(&m, 1.31), vec![0, 2]);
        assert_eq!(
            threshold_support(&CMat::zeros((4, 2)), 0.5),
            Vec::<usize>::new()
        );
        // an energy exactly at the threshold is excluded
        let mut exact = CMat::zeros((2, 1));
        exact[[0, 0]] = Complex64::new(1.0, 1.0); // energy exactly 2.0
        exact[[1, 0]] = Complex64::new(2.0, 0.0); // energy exactly 4.0
        assert_eq!(threshold_support(&exact, 2.0), vec![1]);
    }

    #[test]
    fn full_row_energy_counts_every_slot() {
        let mut m = CMat::zeros((2, 3));
        for col in 0..3 {
            m[[1, col]] = Complex64::new(0.0, 1.0);
        }
        assert_eq!(row_energies(&m), vec![0.0, 3.0]);
    }

    #[test]
    fn selection_keeps_largest_and_breaks_ties_low() {
        let cands = vec![(0, 5.0), (1, 1.0), (2, 4.0), (3, 0.5), (4, 3.0)];
        assert_eq!(select_top_energies(&cands, 3), vec![0, 2, 4]);
        // equal energies: smallest indices survive, largest dropped
        let equal = vec![(0, 2.0), (1, 2.0), (2, 2.0), (3, 2.0)];
        assert_eq!(select_top_energies(&equal, 3), vec![0, 1, 2]);
        assert_eq!(select_top_energies(&equal, 0), Vec::<usize>::new());
    }

    #[test]
    fn selection_is_stable_under_fp_noise() {
        let a = vec![(0, 1.0), (1, 1.0 + 1e-15), (2, 0.5)];
        let b = vec![(0, 1.0 + 1e-15), (1, 1.0), (2, 0.5)];
        assert_eq!(select_top_energies(&a, 1), select_top_energies(&b, 1));
    }

    #[test]
    fn oracle_support_extremes() {
        let m = mat_with_energies(&[3.0, 9.0, 1.0]);
        assert_eq!(oracle_support(&m, 0), Vec::<usize>::new());
        assert_eq!(oracle_support(&m, 3), vec![0, 1, 2]);
        assert_eq!(oracle_support(&m, 2), vec![0, 1]);
    }

    #[test]
    fn demap_decides_only_detected_rows() {
        let c = Constellation::qpsk();
        let v = std::f64::consts::FRAC_1_SQRT_2;
        let mut x = CMat::zeros((3, 2));
        x[[0, 0]] = Complex64::new(0.6, 0.8);
        x[[0, 1]] = Complex64::new(-0.1, -0.2);
        x[[2, 0]] = Complex64::new(5.0, -0.3);
        let d = demap(&x, &[0, 2], &c);
        assert_eq!(d[[0, 0]], Complex64::new(v, v));
        assert_eq!(d[[0, 1]], Complex64::new(-v, -v));
        assert_eq!(d[[2, 0]], Complex64::new(v, -v));
        // row 1 undetected: exact zero
        assert_eq!(d[[1, 0]], Complex64::new(0.0, 0.0));
        assert_eq!(d[[1, 1]], Complex64::new(0.0, 0.0));
    }
}
