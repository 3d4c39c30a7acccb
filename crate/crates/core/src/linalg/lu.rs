//! Complex LU factorization with partial pivoting.

use num_complex::Complex64;

use super::CMatrix;
use crate::error::{Error, Result};

/// PA = LU factorization of a square complex matrix.
pub struct LuFactors {
    n: usize,
    // Combined L (unit lower) and U storage, row-major split arrays.
    re: Vec<f64>,
    im: Vec<f64>,
    pivots: Vec<usize>,
    swaps: usize,
}

impl LuFactors {
    pub fn new(a: &CMatrix) -> Result<LuFactors> {
        if !a.is_square() {
            return Err(Error::Shape(format!(
                "LU needs a square matrix, got {}x{}",
                a.rows(),
                a.cols()
            )));
        }
        let n = a.rows();
        let mut re = a.re.clone();
        let mut im = a.im.clone();
        let mut pivots = vec![0usize; n];
        let mut swaps = 0usize;

        for k in 0..n {
            // Pivot search on column k.
            let mut best = k;
            let mut best_mag = re[k * n + k] * re[k * n + k] + im[k * n + k] * im[k * n + k];
            for i in k + 1..n {
                let mag = re[i * n + k] * re[i * n + k] + im[i * n + k] * im[i * n + k];
                if mag > best_mag {
                    best = i;
                    best_mag = mag;
                }
            }
            pivots[k] = best;
            if best_mag == 0.0 {
                return Err(Error::ZeroPivot { step: k });
            }
            if best != k {
                swaps += 1;
                for j in 0..n {
                    re.swap(k * n + j, best * n + j);
                    im.swap(k * n + j, best * n + j);
                }
            }
            let pr = re[k * n + k];
            let pi = im[k * n + k];
            let pm = pr * pr + pi * pi;
            for i in k + 1..n {
                // multiplier = a_ik / pivot
                let ar = re[i * n + k];
                let ai = im[i * n + k];
                let mr = (ar * pr + ai * pi) / pm;
                let mi = (ai * pr - ar * pi) / pm;
                re[i * n + k] = mr;
                im[i * n + k] = mi;
                if mr == 0.0 && mi == 0.0 {
                    continue;
                }
                let (rk, rest) = {
                    let (head, tail) = (k * n + k + 1, i * n + k + 1);
                    (head, tail)
                };
                for j in 0..n - k - 1 {
                    let ur = re[rk + j];
                    let ui = im[rk + j];
                    re[rest + j] -= mr * ur - mi * ui;
                    im[rest + j] -= mr * ui + mi * ur;
                }
            }
        }
        Ok(LuFactors {
            n,
            re,
            im,
            pivots,
            swaps,
        })
    }

    pub fn det(&self) -> Complex64 {
        let mut d = if self.swaps % 2 == 0 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(-1.0, 0.0)
        };
        for k in 0..self.n {
            d *= Complex64::new(self.re[k * self.n + k], self.im[k * self.n + k]);
        }
        d
    }

    /// Solve `A X = B` for a matrix right-hand side.
    pub fn solve(&self, b: &CMatrix) -> Result<CMatrix> {
        if b.rows() != self.n {
            return Err(Error::Shape(format!(
                "rhs has {} rows, expected {}",
                b.rows(),
                self.n
            )));
        }
        let n = self.n;
        let m = b.cols();
        let mut xr = b.re.clone();
        let mut xi = b.im.clone();
        // Apply row permutation.
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                for j in 0..m {
                    xr.swap(k * m + j, p * m + j);
                    xi.swap(k * m + j, p * m + j);
                }
            }
        }
        // Forward substitution with unit lower factor.
        for k in 0..n {
            for i in k + 1..n {
                let lr = self.re[i * n + k];
                let li = self.im[i * n + k];
                if lr == 0.0 && li == 0.0 {
                    continue;
                }
                for j in 0..m {
                    let br = xr[k * m + j];
                    let bi = xi[k * m + j];
                    xr[i * m + j] -= lr * br - li * bi;
                    xi[i * m + j] -= lr * bi + li * br;
                }
            }
        }
        // Back substitution with U.
        for k in (0..n).rev() {
            let pr = self.re[k * n + k];
            let pi = self.im[k * n + k];
            let pm = pr * pr + pi * pi;
            for j in 0..m {
                let br = xr[k * m + j];
                let bi = xi[k * m + j];
                xr[k * m + j] = (br * pr + bi * pi) / pm;
                xi[k * m + j] = (bi * pr - br * pi) / pm;
            }
            for i in 0..k {
                let ur = self.re[i * n + k];
                let ui = self.im[i * n + k];
                if ur == 0.0 && ui == 0.0 {
                    continue;
                }
                for j in 0..m {
                    let br = xr[k * m + j];
                    let bi = xi[k * m + j];
                    xr[i * m + j] -= ur * br - ui * bi;
                    xi[i * m + j] -= ur * bi + ui * br;
                }
            }
        }
        Ok(CMatrix {
            rows: n,
            cols: m,
            re: xr,
            im: xi,
        })
    }

    pub fn inverse(&self) -> Result<CMatrix> {
        self.solve(&CMatrix::identity(self.n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn inverse_of_small_complex_matrix() {
        let a = CMatrix::from_fn(3, 3, |i, j| {
            c(
                1.0 + (i as f64) * 0.3 - (j as f64) * 0.1,
                ((i + 2 * j) % 3) as f64 * 0.2,
            )
        });
        let inv = LuFactors::new(&a).unwrap().inverse().unwrap();
        let p = a.mul(&inv).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((p.get(i, j) - c(want, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn determinant_of_triangular() {
        let mut a = CMatrix::identity(3);
        a.set(0, 0, c(2.0, 0.0));
        a.set(1, 1, c(0.0, 3.0));
        a.set(0, 2, c(5.0, -1.0));
        let d = LuFactors::new(&a).unwrap().det();
        assert!((d - c(0.0, 6.0)).norm() < 1e-13);
    }

    #[test]
    fn singular_matrix_reports_zero_pivot() {
        let mut a = CMatrix::zeros(2, 2);
        a.set(0, 0, c(1.0, 0.0));
        a.set(0, 1, c(2.0, 0.0));
        // Second row identical to the first => singular.
        a.set(1, 0, c(1.0, 0.0));
        a.set(1, 1, c(2.0, 0.0));
        assert!(matches!(
            LuFactors::new(&a),
            Err(Error::ZeroPivot { .. })
        ));
    }
}
