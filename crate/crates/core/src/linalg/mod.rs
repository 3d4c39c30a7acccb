//! Dense complex linear algebra on split re/im storage.
//!
//! Everything here is self-contained: matrix products, LU with partial
//! pivoting, a Hermitian eigensolver (Householder tridiagonalization plus
//! implicit QL) and a complex Hessenberg/QR eigensolver. Split storage keeps
//! the inner loops auto-vectorizable.

mod hermitian;
mod lu;
mod schur;
mod simd;

pub use hermitian::hermitian_eigenvalues;
pub use lu::LuFactors;
pub use schur::hessenberg_qr_eigenvalues;

pub(crate) use simd::{axpy, axpy_conj, dot_conj, dot_mul, givens_rows, rank2_row};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense row-major complex matrix with separate real and imaginary parts.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    pub(crate) re: Vec<f64>,
    pub(crate) im: Vec<f64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            re: vec![0.0; rows * cols],
            im: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m.re[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = CMatrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                let v = f(i, j);
                m.re[i * cols + j] = v.re;
                m.im[i * cols + j] = v.im;
            }
        }
        m
    }

    pub fn diag(values: &[Complex64]) -> Self {
        let n = values.len();
        let mut m = CMatrix::zeros(n, n);
        for (i, v) in values.iter().enumerate() {
            m.re[i * n + i] = v.re;
            m.im[i * n + i] = v.im;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        let k = i * self.cols + j;
        Complex64::new(self.re[k], self.im[k])
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        let k = i * self.cols + j;
        self.re[k] = v.re;
        self.im[k] = v.im;
    }

    pub fn is_finite(&self) -> bool {
        self.re.iter().all(|x| x.is_finite()) && self.im.iter().all(|x| x.is_finite())
    }

    pub fn trace(&self) -> Complex64 {
        debug_assert!(self.is_square());
        let mut t = Complex64::new(0.0, 0.0);
        for i in 0..self.rows {
            t += self.get(i, i);
        }
        t
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        self.re.iter().map(|x| x * x).sum::<f64>() + self.im.iter().map(|x| x * x).sum::<f64>()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.frobenius_norm_sq().sqrt()
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let k = i * self.cols + j;
                out.re[j * self.rows + i] = self.re[k];
                out.im[j * self.rows + i] = -self.im[k];
            }
        }
        out
    }

    pub fn scale(&mut self, s: f64) {
        for x in self.re.iter_mut() {
            *x *= s;
        }
        for x in self.im.iter_mut() {
            *x *= s;
        }
    }

    /// `self - alpha * I`; requires a square matrix.
    pub fn shift_diag(&self, alpha: Complex64) -> Result<CMatrix> {
        if !self.is_square() {
            return Err(Error::Shape(format!(
                "shift needs a square matrix, got {}x{}",
                self.rows, self.cols
            )));
        }
        let mut out = self.clone();
        for i in 0..self.rows {
            let k = i * self.cols + i;
            out.re[k] -= alpha.re;
            out.im[k] -= alpha.im;
        }
        Ok(out)
    }

    /// Matrix product, `self * rhs`.
    pub fn mul(&self, rhs: &CMatrix) -> Result<CMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::Shape(format!(
                "product of {}x{} and {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let (n, k_dim, p) = (self.rows, self.cols, rhs.cols);
        let mut out = CMatrix::zeros(n, p);
        for i in 0..n {
            let crow_re = &mut out.re[i * p..(i + 1) * p];
            let crow_im = &mut out.im[i * p..(i + 1) * p];
            for k in 0..k_dim {
                let ar = self.re[i * k_dim + k];
                let ai = self.im[i * k_dim + k];
                if ar == 0.0 && ai == 0.0 {
                    continue;
                }
                let brow_re = &rhs.re[k * p..(k + 1) * p];
                let brow_im = &rhs.im[k * p..(k + 1) * p];
                axpy(crow_re, crow_im, ar, ai, brow_re, brow_im);
            }
        }
        Ok(out)
    }

    /// Hermitian Gram matrix `self * self^H`.
    ///
    /// Rows are dotted against rows, which keeps every inner loop
    /// contiguous; four output rows share each streamed pass over the
    /// other rows. Both triangles of the result are filled.
    pub fn gram(&self) -> CMatrix {
        let mut out = self.gram_lower();
        let n = self.rows;
        for i in 0..n {
            for j in 0..i {
                out.re[j * n + i] = out.re[i * n + j];
                out.im[j * n + i] = -out.im[i * n + j];
            }
        }
        out
    }

    /// Like [`CMatrix::gram`], but only the lower triangle (and diagonal)
    /// of the result is written; the upper triangle stays zero. Enough for
    /// the Hermitian eigensolver, which never reads the upper part.
    pub fn gram_lower(&self) -> CMatrix {
        let n = self.rows;
        let p = self.cols;
        let mut out = CMatrix::zeros(n, n);
        let mut i = 0;
        while i < n {
            let b = (n - i).min(4);
            // Full-width part: every row of the block dots row j.
            for j in 0..i {
                let rj_re = &self.re[j * p..(j + 1) * p];
                let rj_im = &self.im[j * p..(j + 1) * p];
                for bi_idx in 0..b {
                    let row = i + bi_idx;
                    let (sre, sim) = dot_conj(
                        &self.re[row * p..(row + 1) * p],
                        &self.im[row * p..(row + 1) * p],
                        rj_re,
                        rj_im,
                    );
                    out.re[row * n + j] = sre;
                    out.im[row * n + j] = sim;
                }
            }
            // Diagonal corner of the block.
            for bi_idx in 0..b {
                let row = i + bi_idx;
                for j in i..=row {
                    let (sre, sim) = dot_conj(
                        &self.re[row * p..(row + 1) * p],
                        &self.im[row * p..(row + 1) * p],
                        &self.re[j * p..(j + 1) * p],
                        &self.im[j * p..(j + 1) * p],
                    );
                    out.re[row * n + j] = sre;
                    out.im[row * n + j] = sim;
                }
            }
            i += b;
        }
        out
    }

    /// Row-major CSV dump of interleaved (re, im) entries.
    pub fn to_interleaved_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.rows {
            for j in 0..self.cols {
                if j > 0 {
                    out.push(',');
                }
                let k = i * self.cols + j;
                out.push_str(&format!("{},{}", self.re[k], self.im[k]));
            }
            out.push('\n');
        }
        out
    }

    /// Max absolute deviation from Hermitian symmetry.
    pub fn hermitian_defect(&self) -> f64 {
        debug_assert!(self.is_square());
        let n = self.rows;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..=i {
                let a = self.get(i, j);
                let b = self.get(j, i).conj();
                worst = worst.max((a - b).norm());
            }
        }
        worst
    }
}

/// Product of a slice of conformable factors, left to right.
pub fn mul_chain(factors: &[CMatrix]) -> Result<CMatrix> {
    let mut iter = factors.iter();
    let first = iter
        .next()
        .ok_or_else(|| Error::Shape("empty factor list".into()))?;
    let mut acc = first.clone();
    for f in iter {
        acc = acc.mul(f)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn product_against_hand_computation() {
        let a = CMatrix::from_fn(2, 2, |i, j| c((i + 1) as f64, j as f64));
        let b = CMatrix::from_fn(2, 2, |i, j| c(0.0, (i + j) as f64));
        let p = a.mul(&b).unwrap();
        // row 0 of a: (1, 1+i); col 0 of b: (0, i) => (1+i)*i = -1+i
        assert_eq!(p.get(0, 0), c(-1.0, 1.0));
    }

    #[test]
    fn gram_matches_explicit_product() {
        let a = CMatrix::from_fn(3, 2, |i, j| c(i as f64 - 1.0, (j as f64) * 0.5));
        let g = a.gram();
        let g2 = a.mul(&a.adjoint()).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((g.get(i, j) - g2.get(i, j)).norm() < 1e-14);
            }
        }
        assert!(g.hermitian_defect() < 1e-15);
    }

    #[test]
    fn adjoint_involution() {
        let a = CMatrix::from_fn(2, 3, |i, j| c(i as f64, j as f64));
        let b = a.adjoint().adjoint();
        assert_eq!(a, b);
    }

    #[test]
    fn shift_diag_rejects_rectangular() {
        let a = CMatrix::zeros(2, 3);
        assert!(matches!(a.shift_diag(c(1.0, 0.0)), Err(Error::Shape(_))));
    }
}
