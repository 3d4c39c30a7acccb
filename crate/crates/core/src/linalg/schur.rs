//! Eigenvalues of general complex matrices.
//!
//! Householder reduction to upper Hessenberg form followed by an explicit
//! shifted QR iteration with Givens rotations, restricted to the active
//! diagonal window. Values only.

use num_complex::Complex64;

use super::CMatrix;
use crate::error::{Error, Result};

/// Eigenvalues of a general complex square matrix.
///
/// Deflation threshold is `1e-10` times the Frobenius norm of the input;
/// the iteration budget is `30 n` QR steps in total.
pub fn hessenberg_qr_eigenvalues(a: &CMatrix) -> Result<Vec<Complex64>> {
    if !a.is_square() {
        return Err(Error::Shape(format!(
            "eigensolve needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    if n == 0 {
        return Ok(Vec::new());
    }
    if n == 1 {
        return Ok(vec![a.get(0, 0)]);
    }
    let mut h = a.clone();
    hessenberg(&mut h);
    qr_eigenvalues(&mut h)
}

/// In-place Householder reduction to upper Hessenberg form.
fn hessenberg(a: &mut CMatrix) {
    let n = a.rows();
    if n < 3 {
        return;
    }
    let mut ure = vec![0.0; n];
    let mut uim = vec![0.0; n];
    let mut wre = vec![0.0; n];
    let mut wim = vec![0.0; n];

    for k in 0..n - 2 {
        let off = k + 1;
        let m = n - off;

        let mut sigma2 = 0.0;
        for i in 0..m {
            let idx = (off + i) * n + k;
            ure[i] = a.re[idx];
            uim[i] = a.im[idx];
            sigma2 += ure[i] * ure[i] + uim[i] * uim[i];
        }
        let sigma = sigma2.sqrt();
        if sigma == 0.0 {
            continue;
        }
        let a0 = (ure[0] * ure[0] + uim[0] * uim[0]).sqrt();
        let (phr, phi) = if a0 > 0.0 {
            (ure[0] / a0, uim[0] / a0)
        } else {
            (1.0, 0.0)
        };
        ure[0] += phr * sigma;
        uim[0] += phi * sigma;
        let c = 2.0 / (2.0 * sigma * (sigma + a0));

        // Left: A[off.., k..] -= c * u (u^H A).
        let width = n - k;
        for j in 0..width {
            wre[j] = 0.0;
            wim[j] = 0.0;
        }
        for i in 0..m {
            let row = (off + i) * n + k;
            // w += conj(u_i) * row
            super::axpy(
                &mut wre[..width],
                &mut wim[..width],
                ure[i],
                -uim[i],
                &a.re[row..row + width],
                &a.im[row..row + width],
            );
        }
        for i in 0..m {
            let row = (off + i) * n + k;
            super::axpy(
                &mut a.re[row..row + width],
                &mut a.im[row..row + width],
                -c * ure[i],
                -c * uim[i],
                &wre[..width],
                &wim[..width],
            );
        }

        // Right: A[.., off..] -= c * (A u) u^H.
        for i in 0..n {
            let row = i * n + off;
            let rre = &a.re[row..row + m];
            let rim = &a.im[row..row + m];
            let (sre, sim) = super::dot_mul(rre, rim, &ure[..m], &uim[..m]);
            wre[i] = c * sre;
            wim[i] = c * sim;
        }
        for i in 0..n {
            let row = i * n + off;
            // row -= v_i * conj(u)
            super::axpy_conj(
                &mut a.re[row..row + m],
                &mut a.im[row..row + m],
                -wre[i],
                -wim[i],
                &ure[..m],
                &uim[..m],
            );
        }

        // The reflected column is known analytically.
        a.re[off * n + k] = -phr * sigma;
        a.im[off * n + k] = -phi * sigma;
        for i in 1..m {
            a.re[(off + i) * n + k] = 0.0;
            a.im[(off + i) * n + k] = 0.0;
        }
    }
}

#[inline]
fn cmag(re: f64, im: f64) -> f64 {
    re.hypot(im)
}

/// Explicit shifted QR on an upper Hessenberg matrix; returns eigenvalues.
fn qr_eigenvalues(h: &mut CMatrix) -> Result<Vec<Complex64>> {
    let n = h.rows();
    let norm = h.frobenius_norm();
    let tol = 1e-10 * norm.max(f64::MIN_POSITIVE);
    let max_iter = 30 * n;

    let mut eig = Vec::with_capacity(n);
    let mut hi = n - 1;
    let mut total_iter = 0usize;
    let mut window_iter = 0usize;

    let mut cos = vec![0.0f64; n];
    let mut sre = vec![0.0f64; n];
    let mut sim = vec![0.0f64; n];

    loop {
        // Zero out negligible sub-diagonal entries up to hi.
        for i in 1..=hi {
            let k = i * n + i - 1;
            let sub = cmag(h.re[k], h.im[k]);
            let local = f64::EPSILON
                * (cmag(h.re[(i - 1) * n + i - 1], h.im[(i - 1) * n + i - 1])
                    + cmag(h.re[i * n + i], h.im[i * n + i]));
            if sub <= tol.max(local) {
                h.re[k] = 0.0;
                h.im[k] = 0.0;
            }
        }
        // Deflate converged eigenvalues at the bottom.
        loop {
            if hi == 0 {
                eig.push(h.get(0, 0));
                eig.reverse();
                return Ok(eig);
            }
            let k = hi * n + hi - 1;
            if h.re[k] == 0.0 && h.im[k] == 0.0 {
                eig.push(h.get(hi, hi));
                hi -= 1;
                window_iter = 0;
            } else {
                break;
            }
        }
        // Active window [lo, hi].
        let mut lo = hi;
        while lo > 0 {
            let k = lo * n + lo - 1;
            if h.re[k] == 0.0 && h.im[k] == 0.0 {
                break;
            }
            lo -= 1;
        }
        if lo + 1 == hi {
            // 2x2 block: solve the quadratic directly.
            let a = h.get(lo, lo);
            let b = h.get(lo, hi);
            let c = h.get(hi, lo);
            let d = h.get(hi, hi);
            let half = (a + d) * 0.5;
            let disc = ((a - d) * 0.5).powu(2) + b * c;
            let s = disc.sqrt();
            eig.push(half + s);
            eig.push(half - s);
            if hi == 1 {
                eig.reverse();
                return Ok(eig);
            }
            hi -= 2;
            window_iter = 0;
            continue;
        }

        total_iter += 1;
        window_iter += 1;
        if total_iter > max_iter {
            let k = hi * n + hi - 1;
            return Err(Error::NonConvergence {
                iterations: total_iter,
                residual: cmag(h.re[k], h.im[k]),
            });
        }

        // Shift: Wilkinson from the trailing 2x2, exceptional every 10 steps.
        let shift = if window_iter % 10 == 0 {
            let sub = cmag(h.re[hi * n + hi - 1], h.im[hi * n + hi - 1]);
            h.get(hi, hi) + Complex64::new(0.75 * sub, 0.0)
        } else {
            let a = h.get(hi - 1, hi - 1);
            let b = h.get(hi - 1, hi);
            let c = h.get(hi, hi - 1);
            let d = h.get(hi, hi);
            let half = (a - d) * 0.5;
            let s = (half * half + b * c).sqrt();
            let r1 = d + half + s;
            let r2 = d + half - s;
            if (r1 - d).norm() <= (r2 - d).norm() {
                r1
            } else {
                r2
            }
        };

        // Shift the window diagonal.
        for i in lo..=hi {
            let k = i * n + i;
            h.re[k] -= shift.re;
            h.im[k] -= shift.im;
        }

        // Left Givens sweep: eliminate the sub-diagonal, store rotations.
        for i in lo..hi {
            let ka = i * n + i;
            let kb = (i + 1) * n + i;
            let (ar, ai) = (h.re[ka], h.im[ka]);
            let (br, bi) = (h.re[kb], h.im[kb]);
            let amag = cmag(ar, ai);
            let r = (amag * amag + br * br + bi * bi).sqrt();
            let (c_i, s_r, s_i) = if r == 0.0 {
                (1.0, 0.0, 0.0)
            } else if amag == 0.0 {
                (0.0, 1.0, 0.0)
            } else {
                // s = (a/|a|) * conj(b) / r
                let (pr, pi) = (ar / amag, ai / amag);
                (
                    amag / r,
                    (pr * br + pi * bi) / r,
                    (pi * br - pr * bi) / r,
                )
            };
            cos[i] = c_i;
            sre[i] = s_r;
            sim[i] = s_i;
            // Apply to rows i, i+1 over columns i..=hi.
            let split = (i + 1) * n;
            let (top_re, bot_re) = h.re.split_at_mut(split);
            let (top_im, bot_im) = h.im.split_at_mut(split);
            super::givens_rows(
                &mut top_re[i * n + i..i * n + hi + 1],
                &mut top_im[i * n + i..i * n + hi + 1],
                &mut bot_re[i..hi + 1],
                &mut bot_im[i..hi + 1],
                c_i,
                s_r,
                s_i,
            );
        }

        // Right sweep: per-row application of the conjugated rotations.
        for r in lo..=hi {
            let row = r * n;
            let kmin = if r > lo { r - 1 } else { lo };
            for k in kmin..hi {
                let (c_k, s_r, s_i) = (cos[k], sre[k], sim[k]);
                let (pr, pi) = (h.re[row + k], h.im[row + k]);
                let (qr, qi) = (h.re[row + k + 1], h.im[row + k + 1]);
                // p' = c p + conj(s) q ; q' = -s p + c q
                h.re[row + k] = c_k * pr + s_r * qr + s_i * qi;
                h.im[row + k] = c_k * pi + s_r * qi - s_i * qr;
                h.re[row + k + 1] = c_k * qr - (s_r * pr - s_i * pi);
                h.im[row + k + 1] = c_k * qi - (s_r * pi + s_i * pr);
            }
        }

        // Undo the shift.
        for i in lo..=hi {
            let k = i * n + i;
            h.re[k] += shift.re;
            h.im[k] += shift.im;
        }
    }
}
