//! Eigenvalues of Hermitian matrices.
//!
//! Householder tridiagonalization with the off-diagonal phases absorbed into
//! an (implicit) diagonal unitary, followed by implicit-shift QL on the real
//! tridiagonal matrix. Eigenvalues only; no transforms are accumulated.

use super::CMatrix;
use crate::error::{Error, Result};

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(a: &CMatrix) -> Result<Vec<f64>> {
    if !a.is_square() {
        return Err(Error::Shape(format!(
            "hermitian eigensolve needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut work = a.clone();
    let (mut d, mut e) = tridiagonalize(&mut work);
    tridiag_eigenvalues(&mut d, &mut e)?;
    d.sort_unstable_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(d)
}

/// Reduce a Hermitian matrix to real symmetric tridiagonal form in place.
///
/// Only the lower triangle is referenced. The rank-2 update of each
/// Householder step is applied lazily, fused into the next step's
/// matrix-vector pass, so the trailing block is streamed once per step.
/// Returns the diagonal `d` and the sub-diagonal magnitudes `e`.
fn tridiagonalize(a: &mut CMatrix) -> (Vec<f64>, Vec<f64>) {
    let n = a.rows();
    let mut e = vec![0.0; n.saturating_sub(1)];
    let mut d: Vec<f64> = (0..n).map(|i| a.get(i, i).re).collect();
    if n < 2 {
        return (d, e);
    }

    let mut ure = vec![0.0; n];
    let mut uim = vec![0.0; n];
    let mut pre = vec![0.0; n];
    let mut pim = vec![0.0; n];
    // Pending rank-2 update (u_prev, q_prev) on the previous block; local
    // index i of the current block is index i + 1 of the previous one.
    let mut upre = vec![0.0; n];
    let mut upim = vec![0.0; n];
    let mut qpre = vec![0.0; n];
    let mut qpim = vec![0.0; n];
    let mut pending = false;

    for k in 0..n - 2 {
        let off = k + 1;
        let m = n - off;

        // Column k below the diagonal, with the pending update applied on
        // the fly (the column is local column 0 of the previous block).
        let mut sigma2 = 0.0;
        for i in 0..m {
            let idx = (off + i) * n + k;
            let mut cr = a.re[idx];
            let mut ci = a.im[idx];
            if pending {
                let (ur, ui) = (upre[i + 1], upim[i + 1]);
                let (qr, qi) = (qpre[i + 1], qpim[i + 1]);
                let (q0r, q0i) = (qpre[0], qpim[0]);
                let (u0r, u0i) = (upre[0], upim[0]);
                cr -= ur * q0r + ui * q0i + qr * u0r + qi * u0i;
                ci -= ui * q0r - ur * q0i + qi * u0r - qr * u0i;
            }
            ure[i] = cr;
            uim[i] = ci;
            sigma2 += cr * cr + ci * ci;
        }
        let sigma = sigma2.sqrt();
        e[k] = sigma;
        if sigma == 0.0 {
            // Materialize the pending update before skipping the step.
            if pending {
                flush_pending(a, n, off, m, &upre, &upim, &qpre, &qpim);
                pending = false;
            }
            continue;
        }

        // u = x + phase * sigma * e1, phase = x0/|x0| (or 1).
        let a0 = (ure[0] * ure[0] + uim[0] * uim[0]).sqrt();
        let (phr, phi) = if a0 > 0.0 {
            (ure[0] / a0, uim[0] / a0)
        } else {
            (1.0, 0.0)
        };
        ure[0] += phr * sigma;
        uim[0] += phi * sigma;
        let c = 2.0 / (2.0 * sigma * (sigma + a0));

        // Fused pass: bring each row up to date, then accumulate
        // p = B u over the lower triangle.
        for i in 0..m {
            pre[i] = 0.0;
            pim[i] = 0.0;
        }
        for i in 0..m {
            let row = (off + i) * n + off;
            if pending && i > 0 {
                let (ua, ub) = (upre[i + 1], upim[i + 1]);
                let (qa, qb) = (qpre[i + 1], qpim[i + 1]);
                let (row_re, row_im) = (&mut a.re[row..row + i], &mut a.im[row..row + i]);
                super::rank2_row(
                    row_re,
                    row_im,
                    ua,
                    ub,
                    qa,
                    qb,
                    &upre[1..1 + i],
                    &upim[1..1 + i],
                    &qpre[1..1 + i],
                    &qpim[1..1 + i],
                );
            }
            let rre = &a.re[row..row + i];
            let rim = &a.im[row..row + i];
            let (sre, sim) = super::dot_mul(rre, rim, &ure[..i], &uim[..i]);
            let (vr, vi) = (ure[i], uim[i]);
            super::axpy_conj(&mut pre[..i], &mut pim[..i], vr, vi, rre, rim);
            let dii = d[off + i];
            pre[i] += sre + dii * vr;
            pim[i] += sim + dii * vi;
        }

        // q = c (p - K u) with K = (c/2) Re(u^H p).
        let mut uhp = 0.0;
        for i in 0..m {
            uhp += ure[i] * pre[i] + uim[i] * pim[i];
        }
        let kk = 0.5 * c * uhp;
        for i in 0..m {
            qpre[i] = c * pre[i] - c * kk * ure[i];
            qpim[i] = c * pim[i] - c * kk * uim[i];
        }
        upre[..m].copy_from_slice(&ure[..m]);
        upim[..m].copy_from_slice(&uim[..m]);
        pending = true;

        // The diagonal update is applied eagerly.
        for i in 0..m {
            d[off + i] -= 2.0 * (upre[i] * qpre[i] + upim[i] * qpim[i]);
        }
    }

    // Final sub-diagonal entry, with the last pending update folded in.
    let idx = (n - 1) * n + (n - 2);
    let (mut cr, mut ci) = (a.re[idx], a.im[idx]);
    if pending {
        let (ur, ui) = (upre[1], upim[1]);
        let (qr, qi) = (qpre[1], qpim[1]);
        let (q0r, q0i) = (qpre[0], qpim[0]);
        let (u0r, u0i) = (upre[0], upim[0]);
        cr -= ur * q0r + ui * q0i + qr * u0r + qi * u0i;
        ci -= ui * q0r - ur * q0i + qi * u0r - qr * u0i;
    }
    e[n - 2] = cr.hypot(ci);
    (d, e)
}

/// Apply a deferred rank-2 update to the lower triangle of the block that
/// starts at `off` (prev-block local indices are shifted by one).
fn flush_pending(
    a: &mut CMatrix,
    n: usize,
    off: usize,
    m: usize,
    upre: &[f64],
    upim: &[f64],
    qpre: &[f64],
    qpim: &[f64],
) {
    for i in 1..m {
        let row = (off + i) * n + off;
        let (row_re, row_im) = (&mut a.re[row..row + i], &mut a.im[row..row + i]);
        super::rank2_row(
            row_re,
            row_im,
            upre[i + 1],
            upim[i + 1],
            qpre[i + 1],
            qpim[i + 1],
            &upre[1..1 + i],
            &upim[1..1 + i],
            &qpre[1..1 + i],
            &qpim[1..1 + i],
        );
    }
}

/// Implicit-shift QL iteration on a real symmetric tridiagonal matrix.
///
/// `d` holds the diagonal and is overwritten with the eigenvalues; `sub`
/// holds the n-1 sub-diagonal entries.
fn tridiag_eigenvalues(d: &mut [f64], sub: &mut [f64]) -> Result<()> {
    let n = d.len();
    if n <= 1 {
        return Ok(());
    }
    // One extra slot of rotation workspace past the sub-diagonal.
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(sub);
    let e = &mut e[..];
    let eps = f64::EPSILON;
    for l in 0..n {
        let mut iter = 0usize;
        loop {
            // Look for a negligible sub-diagonal element.
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= eps * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 64 {
                return Err(Error::NonConvergence {
                    iterations: iter,
                    residual: e[l].abs(),
                });
            }
            // Wilkinson-style shift.
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut underflow = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                f = 0.0;
                let _ = f;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}
