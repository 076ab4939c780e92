//! Split real/imaginary working buffers for the sweep kernels. The inner
//! loops stream contiguous f64 slices so the compiler can vectorize the
//! complex multiply-accumulate chains.

use ndarray::Array2;
use num_complex::Complex64;

use crate::linalg::CMat;

/// Row-major pair of real/imaginary planes.
#[derive(Debug, Clone)]
pub(crate) struct Planes {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
    pub rows: usize,
    pub cols: usize,
}

impl Planes {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Planes {
            re: vec![0.0; rows * cols],
            im: vec![0.0; rows * cols],
            rows,
            cols,
        }
    }

    /// Copies `m` with its axes swapped, so `planes[r][c] = m[c][r]`.
    pub fn from_mat_transposed(m: &CMat) -> Self {
        let (mr, mc) = m.dim();
        let mut p = Planes::zeros(mc, mr);
        for r in 0..mr {
            for c in 0..mc {
                let z = m[[r, c]];
                p.re[c * mr + r] = z.re;
                p.im[c * mr + r] = z.im;
            }
        }
        p
    }

    pub fn to_mat(&self) -> CMat {
        let mut m = Array2::zeros((self.rows, self.cols));
        for r in 0..self.rows {
            for c in 0..self.cols {
                m[[r, c]] = Complex64::new(self.re[r * self.cols + c], self.im[r * self.cols + c]);
            }
        }
        m
    }

    /// Inverse of `from_mat_transposed`.
    pub fn to_mat_transposed(&self) -> CMat {
        let mut m = Array2::zeros((self.cols, self.rows));
        for r in 0..self.rows {
            for c in 0..self.cols {
                m[[c, r]] = Complex64::new(self.re[r * self.cols + c], self.im[r * self.cols + c]);
            }
        }
        m
    }

    pub fn row(&self, r: usize) -> (&[f64], &[f64]) {
        let span = r * self.cols..(r + 1) * self.cols;
        (&self.re[span.clone()], &self.im[span])
    }

    pub fn row_mut(&mut self, r: usize) -> (&mut [f64], &mut [f64]) {
        let span = r * self.cols..(r + 1) * self.cols;
        (&mut self.re[span.clone()], &mut self.im[span])
    }

    pub fn zero_row(&mut self, r: usize) {
        let (re, im) = self.row_mut(r);
        re.fill(0.0);
        im.fill(0.0);
    }

    pub fn fill_zero(&mut self) {
        self.re.fill(0.0);
        self.im.fill(0.0);
    }

    pub fn copy_from(&mut self, other: &Planes) {
        self.re.copy_from_slice(&other.re);
        self.im.copy_from_slice(&other.im);
    }

    pub fn add_slices(&mut self, re: &[f64], im: &[f64]) {
        for (d, s) in self.re.iter_mut().zip(re) {
            *d += s;
        }
        for (d, s) in self.im.iter_mut().zip(im) {
            *d += s;
        }
    }

    pub fn sub_slices(&mut self, re: &[f64], im: &[f64]) {
        for (d, s) in self.re.iter_mut().zip(re) {
            *d -= s;
        }
        for (d, s) in self.im.iter_mut().zip(im) {
            *d -= s;
        }
    }
}

/// `acc[j][:] -= g * x[j]` for every slot row j: subtracts the rank-one
/// interference term of one user from a slot-major residual.
pub(crate) fn outer_sub(acc: &mut Planes, g_re: &[f64], g_im: &[f64], x_re: &[f64], x_im: &[f64]) {
    let n = acc.cols;
    debug_assert_eq!(g_re.len(), n);
    for j in 0..acc.rows {
        let (xr, xi) = (x_re[j], x_im[j]);
        let row_re = &mut acc.re[j * n..(j + 1) * n];
        let row_im = &mut acc.im[j * n..(j + 1) * n];
        for i in 0..n {
            row_re[i] -= g_re[i] * xr - g_im[i] * xi;
            row_im[i] -= g_re[i] * xi + g_im[i] * xr;
        }
    }
}

/// Writes the rank-one product `g x^T` into `out` (slot-major).
pub(crate) fn outer_into(
    out_re: &mut [f64],
    out_im: &mut [f64],
    g_re: &[f64],
    g_im: &[f64],
    x_re: &[f64],
    x_im: &[f64],
) {
    let n = g_re.len();
    for (j, (&xr, &xi)) in x_re.iter().zip(x_im).enumerate() {
        let row_re = &mut out_re[j * n..(j + 1) * n];
        let row_im = &mut out_im[j * n..(j + 1) * n];
        for i in 0..n {
            row_re[i] = g_re[i] * xr - g_im[i] * xi;
            row_im[i] = g_re[i] * xi + g_im[i] * xr;
        }
    }
}

/// Per-slot correlation `z_j = sum_n conj(g[n]) r[j][n]`.
pub(crate) fn conj_dot_slots(
    r: &Planes,
    g_re: &[f64],
    g_im: &[f64],
    out_re: &mut [f64],
    out_im: &mut [f64],
) {
    let n = r.cols;
    for j in 0..r.rows {
        let row_re = &r.re[j * n..(j + 1) * n];
        let row_im = &r.im[j * n..(j + 1) * n];
        let mut acc_re = 0.0;
        let mut acc_im = 0.0;
        for i in 0..n {
            acc_re += g_re[i] * row_re[i] + g_im[i] * row_im[i];
            acc_im += g_re[i] * row_im[i] - g_im[i] * row_re[i];
        }
        out_re[j] = acc_re;
        out_im[j] = acc_im;
    }
}

pub(crate) fn norm_sqr(re: &[f64], im: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..re.len() {
        acc += re[i] * re[i] + im[i] * im[i];
    }
    acc
}

/// Row energies of a user-major estimate (`rows` users, `cols` slots).
pub(crate) fn row_energy(p: &Planes, r: usize) -> f64 {
    let (re, im) = p.row(r);
    norm_sqr(re, im)
}
