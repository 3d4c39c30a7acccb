//! Inner kernels for split-complex slices.
//!
//! Reductions over f64 do not auto-vectorize (strict FP semantics), so the
//! dot products are written with explicit SIMD where the target has it and
//! a multi-lane scalar fallback elsewhere. Elementwise update kernels get
//! FMA contraction from the intrinsics as well.

#![allow(clippy::too_many_arguments)]

/// `sum_k a_k * conj(b_k)`.
#[inline]
pub fn dot_conj(ar: &[f64], ai: &[f64], br: &[f64], bi: &[f64]) -> (f64, f64) {
    debug_assert!(ar.len() == ai.len() && ar.len() == br.len() && ar.len() == bi.len());
    #[cfg(all(target_arch = "x86_64", target_feature = "avx512f"))]
    {
        return unsafe { avx512::dot(ar, ai, br, bi, true) };
    }
    #[cfg(all(
        target_arch = "x86_64",
        not(target_feature = "avx512f"),
        target_feature = "avx2",
        target_feature = "fma"
    ))]
    {
        return unsafe { avx2::dot(ar, ai, br, bi, true) };
    }
    #[allow(unreachable_code)]
    scalar::dot(ar, ai, br, bi, true)
}

/// `sum_k a_k * b_k`.
#[inline]
pub fn dot_mul(ar: &[f64], ai: &[f64], br: &[f64], bi: &[f64]) -> (f64, f64) {
    debug_assert!(ar.len() == ai.len() && ar.len() == br.len() && ar.len() == bi.len());
    #[cfg(all(target_arch = "x86_64", target_feature = "avx512f"))]
    {
        return unsafe { avx512::dot(ar, ai, br, bi, false) };
    }
    #[cfg(all(
        target_arch = "x86_64",
        not(target_feature = "avx512f"),
        target_feature = "avx2",
        target_feature = "fma"
    ))]
    {
        return unsafe { avx2::dot(ar, ai, br, bi, false) };
    }
    #[allow(unreachable_code)]
    scalar::dot(ar, ai, br, bi, false)
}

/// `c_k += s * b_k` for a complex scalar `s`.
#[inline]
pub fn axpy(cre: &mut [f64], cim: &mut [f64], sr: f64, si: f64, br: &[f64], bi: &[f64]) {
    #[cfg(all(target_arch = "x86_64", target_feature = "avx512f"))]
    {
        return unsafe { avx512::axpy(cre, cim, sr, si, br, bi) };
    }
    #[allow(unreachable_code)]
    {
        for k in 0..cre.len() {
            let br_k = br[k];
            let bi_k = bi[k];
            cre[k] += sr * br_k - si * bi_k;
            cim[k] += sr * bi_k + si * br_k;
        }
    }
}

/// `p_k += conj(b_k) * s` for a complex scalar `s`.
#[inline]
pub fn axpy_conj(pre: &mut [f64], pim: &mut [f64], sr: f64, si: f64, br: &[f64], bi: &[f64]) {
    #[cfg(all(target_arch = "x86_64", target_feature = "avx512f"))]
    {
        return unsafe { avx512::axpy_conj(pre, pim, sr, si, br, bi) };
    }
    #[allow(unreachable_code)]
    {
        for k in 0..pre.len() {
            let br_k = br[k];
            let bi_k = bi[k];
            pre[k] += br_k * sr + bi_k * si;
            pim[k] += br_k * si - bi_k * sr;
        }
    }
}

/// Hermitian rank-2 row update: `row_k -= u * conj(q_k) + q * conj(u_k)`
/// for complex scalars `u`, `q`.
#[inline]
pub fn rank2_row(
    rre: &mut [f64],
    rim: &mut [f64],
    ur: f64,
    ui: f64,
    qr: f64,
    qi: f64,
    ure: &[f64],
    uim: &[f64],
    qre: &[f64],
    qim: &[f64],
) {
    #[cfg(all(target_arch = "x86_64", target_feature = "avx512f"))]
    {
        return unsafe { avx512::rank2_row(rre, rim, ur, ui, qr, qi, ure, uim, qre, qim) };
    }
    #[allow(unreachable_code)]
    {
        for j in 0..rre.len() {
            let t_re = ur * qre[j] + ui * qim[j] + qr * ure[j] + qi * uim[j];
            let t_im = ui * qre[j] - ur * qim[j] + qi * ure[j] - qr * uim[j];
            rre[j] -= t_re;
            rim[j] -= t_im;
        }
    }
}

/// Complex Givens rotation applied from the left to a row pair:
/// `a_k' = c a_k + s b_k`, `b_k' = c b_k - conj(s) a_k`, with real `c`.
#[inline]
pub fn givens_rows(
    are: &mut [f64],
    aim: &mut [f64],
    bre: &mut [f64],
    bim: &mut [f64],
    c: f64,
    sr: f64,
    si: f64,
) {
    #[cfg(all(target_arch = "x86_64", target_feature = "avx512f"))]
    {
        return unsafe { avx512::givens_rows(are, aim, bre, bim, c, sr, si) };
    }
    #[allow(unreachable_code)]
    {
        for k in 0..are.len() {
            let (xr, xi) = (are[k], aim[k]);
            let (yr, yi) = (bre[k], bim[k]);
            are[k] = c * xr + sr * yr - si * yi;
            aim[k] = c * xi + sr * yi + si * yr;
            bre[k] = c * yr - (sr * xr + si * xi);
            bim[k] = c * yi - (sr * xi - si * xr);
        }
    }
}

mod scalar {
    /// Multi-lane scalar dot; `conj` selects `a * conj(b)` vs `a * b`.
    #[inline]
    pub fn dot(ar: &[f64], ai: &[f64], br: &[f64], bi: &[f64], conj: bool) -> (f64, f64) {
        const L: usize = 8;
        let n = ar.len();
        let sign = if conj { 1.0 } else { -1.0 };
        let mut accr = [0.0f64; L];
        let mut acci = [0.0f64; L];
        let chunks = n / L;
        for c in 0..chunks {
            let o = c * L;
            for l in 0..L {
                let x = ar[o + l];
                let y = ai[o + l];
                let u = br[o + l];
                let v = bi[o + l];
                accr[l] += x * u + sign * y * v;
                acci[l] += y * u - sign * x * v;
            }
        }
        let mut sre: f64 = accr.iter().sum();
        let mut sim: f64 = acci.iter().sum();
        for k in chunks * L..n {
            let x = ar[k];
            let y = ai[k];
            let u = br[k];
            let v = bi[k];
            sre += x * u + sign * y * v;
            sim += y * u - sign * x * v;
        }
        (sre, sim)
    }
}

#[cfg(all(target_arch = "x86_64", target_feature = "avx512f"))]
mod avx512 {
    use core::arch::x86_64::*;

    #[inline]
    pub unsafe fn dot(ar: &[f64], ai: &[f64], br: &[f64], bi: &[f64], conj: bool) -> (f64, f64) {
        let n = ar.len();
        let chunks = n / 16;
        let mut r1 = _mm512_setzero_pd();
        let mut r2 = _mm512_setzero_pd();
        let mut r3 = _mm512_setzero_pd();
        let mut r4 = _mm512_setzero_pd();
        let mut i1 = _mm512_setzero_pd();
        let mut i2 = _mm512_setzero_pd();
        let mut i3 = _mm512_setzero_pd();
        let mut i4 = _mm512_setzero_pd();
        for c in 0..chunks {
            let o = c * 16;
            let xa = _mm512_loadu_pd(ar.as_ptr().add(o));
            let ya = _mm512_loadu_pd(ai.as_ptr().add(o));
            let ua = _mm512_loadu_pd(br.as_ptr().add(o));
            let va = _mm512_loadu_pd(bi.as_ptr().add(o));
            r1 = _mm512_fmadd_pd(xa, ua, r1);
            r2 = _mm512_fmadd_pd(ya, va, r2);
            i1 = _mm512_fmadd_pd(ya, ua, i1);
            i2 = _mm512_fmadd_pd(xa, va, i2);
            let xb = _mm512_loadu_pd(ar.as_ptr().add(o + 8));
            let yb = _mm512_loadu_pd(ai.as_ptr().add(o + 8));
            let ub = _mm512_loadu_pd(br.as_ptr().add(o + 8));
            let vb = _mm512_loadu_pd(bi.as_ptr().add(o + 8));
            r3 = _mm512_fmadd_pd(xb, ub, r3);
            r4 = _mm512_fmadd_pd(yb, vb, r4);
            i3 = _mm512_fmadd_pd(yb, ub, i3);
            i4 = _mm512_fmadd_pd(xb, vb, i4);
        }
        let dot_uu = _mm512_reduce_add_pd(_mm512_add_pd(r1, r3));
        let dot_vv = _mm512_reduce_add_pd(_mm512_add_pd(r2, r4));
        let dot_yu = _mm512_reduce_add_pd(_mm512_add_pd(i1, i3));
        let dot_xv = _mm512_reduce_add_pd(_mm512_add_pd(i2, i4));
        let sign = if conj { 1.0 } else { -1.0 };
        let mut sre = dot_uu + sign * dot_vv;
        let mut sim = dot_yu - sign * dot_xv;
        for k in chunks * 16..n {
            let x = ar[k];
            let y = ai[k];
            let u = br[k];
            let v = bi[k];
            sre += x * u + sign * y * v;
            sim += y * u - sign * x * v;
        }
        (sre, sim)
    }

    #[inline]
    pub unsafe fn axpy(cre: &mut [f64], cim: &mut [f64], sr: f64, si: f64, br: &[f64], bi: &[f64]) {
        let n = cre.len();
        let chunks = n / 8;
        let vsr = _mm512_set1_pd(sr);
        let vsi = _mm512_set1_pd(si);
        for c in 0..chunks {
            let o = c * 8;
            let b_re = _mm512_loadu_pd(br.as_ptr().add(o));
            let b_im = _mm512_loadu_pd(bi.as_ptr().add(o));
            let mut c_re = _mm512_loadu_pd(cre.as_ptr().add(o));
            let mut c_im = _mm512_loadu_pd(cim.as_ptr().add(o));
            c_re = _mm512_fmadd_pd(vsr, b_re, c_re);
            c_re = _mm512_fnmadd_pd(vsi, b_im, c_re);
            c_im = _mm512_fmadd_pd(vsr, b_im, c_im);
            c_im = _mm512_fmadd_pd(vsi, b_re, c_im);
            _mm512_storeu_pd(cre.as_mut_ptr().add(o), c_re);
            _mm512_storeu_pd(cim.as_mut_ptr().add(o), c_im);
        }
        for k in chunks * 8..n {
            let br_k = br[k];
            let bi_k = bi[k];
            cre[k] += sr * br_k - si * bi_k;
            cim[k] += sr * bi_k + si * br_k;
        }
    }

    #[inline]
    pub unsafe fn axpy_conj(
        pre: &mut [f64],
        pim: &mut [f64],
        sr: f64,
        si: f64,
        br: &[f64],
        bi: &[f64],
    ) {
        let n = pre.len();
        let chunks = n / 8;
        let vsr = _mm512_set1_pd(sr);
        let vsi = _mm512_set1_pd(si);
        for c in 0..chunks {
            let o = c * 8;
            let b_re = _mm512_loadu_pd(br.as_ptr().add(o));
            let b_im = _mm512_loadu_pd(bi.as_ptr().add(o));
            let mut p_re = _mm512_loadu_pd(pre.as_ptr().add(o));
            let mut p_im = _mm512_loadu_pd(pim.as_ptr().add(o));
            p_re = _mm512_fmadd_pd(b_re, vsr, p_re);
            p_re = _mm512_fmadd_pd(b_im, vsi, p_re);
            p_im = _mm512_fmadd_pd(b_re, vsi, p_im);
            p_im = _mm512_fnmadd_pd(b_im, vsr, p_im);
            _mm512_storeu_pd(pre.as_mut_ptr().add(o), p_re);
            _mm512_storeu_pd(pim.as_mut_ptr().add(o), p_im);
        }
        for k in chunks * 8..n {
            let br_k = br[k];
            let bi_k = bi[k];
            pre[k] += br_k * sr + bi_k * si;
            pim[k] += br_k * si - bi_k * sr;
        }
    }

    #[inline]
    pub unsafe fn givens_rows(
        are: &mut [f64],
        aim: &mut [f64],
        bre: &mut [f64],
        bim: &mut [f64],
        c: f64,
        sr: f64,
        si: f64,
    ) {
        let n = are.len();
        let chunks = n / 8;
        let vc = _mm512_set1_pd(c);
        let vsr = _mm512_set1_pd(sr);
        let vsi = _mm512_set1_pd(si);
        for ch in 0..chunks {
            let o = ch * 8;
            let xr = _mm512_loadu_pd(are.as_ptr().add(o));
            let xi = _mm512_loadu_pd(aim.as_ptr().add(o));
            let yr = _mm512_loadu_pd(bre.as_ptr().add(o));
            let yi = _mm512_loadu_pd(bim.as_ptr().add(o));
            // a' = c x + s y
            let mut ar2 = _mm512_mul_pd(vc, xr);
            ar2 = _mm512_fmadd_pd(vsr, yr, ar2);
            ar2 = _mm512_fnmadd_pd(vsi, yi, ar2);
            let mut ai2 = _mm512_mul_pd(vc, xi);
            ai2 = _mm512_fmadd_pd(vsr, yi, ai2);
            ai2 = _mm512_fmadd_pd(vsi, yr, ai2);
            // b' = c y - conj(s) x
            let mut br2 = _mm512_mul_pd(vc, yr);
            br2 = _mm512_fnmadd_pd(vsr, xr, br2);
            br2 = _mm512_fnmadd_pd(vsi, xi, br2);
            let mut bi2 = _mm512_mul_pd(vc, yi);
            bi2 = _mm512_fnmadd_pd(vsr, xi, bi2);
            bi2 = _mm512_fmadd_pd(vsi, xr, bi2);
            _mm512_storeu_pd(are.as_mut_ptr().add(o), ar2);
            _mm512_storeu_pd(aim.as_mut_ptr().add(o), ai2);
            _mm512_storeu_pd(bre.as_mut_ptr().add(o), br2);
            _mm512_storeu_pd(bim.as_mut_ptr().add(o), bi2);
        }
        for k in chunks * 8..n {
            let (xr, xi) = (are[k], aim[k]);
            let (yr, yi) = (bre[k], bim[k]);
            are[k] = c * xr + sr * yr - si * yi;
            aim[k] = c * xi + sr * yi + si * yr;
            bre[k] = c * yr - (sr * xr + si * xi);
            bim[k] = c * yi - (sr * xi - si * xr);
        }
    }

    #[inline]
    pub unsafe fn rank2_row(
        rre: &mut [f64],
        rim: &mut [f64],
        ur: f64,
        ui: f64,
        qr: f64,
        qi: f64,
        ure: &[f64],
        uim: &[f64],
        qre: &[f64],
        qim: &[f64],
    ) {
        let n = rre.len();
        let chunks = n / 8;
        let vur = _mm512_set1_pd(ur);
        let vui = _mm512_set1_pd(ui);
        let vqr = _mm512_set1_pd(qr);
        let vqi = _mm512_set1_pd(qi);
        for c in 0..chunks {
            let o = c * 8;
            let u_re = _mm512_loadu_pd(ure.as_ptr().add(o));
            let u_im = _mm512_loadu_pd(uim.as_ptr().add(o));
            let q_re = _mm512_loadu_pd(qre.as_ptr().add(o));
            let q_im = _mm512_loadu_pd(qim.as_ptr().add(o));
            let mut r_re = _mm512_loadu_pd(rre.as_ptr().add(o));
            let mut r_im = _mm512_loadu_pd(rim.as_ptr().add(o));
            // t_re = ur*qre + ui*qim + qr*ure + qi*uim
            r_re = _mm512_fnmadd_pd(vur, q_re, r_re);
            r_re = _mm512_fnmadd_pd(vui, q_im, r_re);
            r_re = _mm512_fnmadd_pd(vqr, u_re, r_re);
            r_re = _mm512_fnmadd_pd(vqi, u_im, r_re);
            // t_im = ui*qre - ur*qim + qi*ure - qr*uim
            r_im = _mm512_fnmadd_pd(vui, q_re, r_im);
            r_im = _mm512_fmadd_pd(vur, q_im, r_im);
            r_im = _mm512_fnmadd_pd(vqi, u_re, r_im);
            r_im = _mm512_fmadd_pd(vqr, u_im, r_im);
            _mm512_storeu_pd(rre.as_mut_ptr().add(o), r_re);
            _mm512_storeu_pd(rim.as_mut_ptr().add(o), r_im);
        }
        for j in chunks * 8..n {
            let t_re = ur * qre[j] + ui * qim[j] + qr * ure[j] + qi * uim[j];
            let t_im = ui * qre[j] - ur * qim[j] + qi * ure[j] - qr * uim[j];
            rre[j] -= t_re;
            rim[j] -= t_im;
        }
    }
}

#[cfg(all(
    target_arch = "x86_64",
    not(target_feature = "avx512f"),
    target_feature = "avx2",
    target_feature = "fma"
))]
mod avx2 {
    use core::arch::x86_64::*;

    #[inline]
    pub unsafe fn dot(ar: &[f64], ai: &[f64], br: &[f64], bi: &[f64], conj: bool) -> (f64, f64) {
        let n = ar.len();
        let chunks = n / 8;
        let mut r1 = _mm256_setzero_pd();
        let mut r2 = _mm256_setzero_pd();
        let mut r3 = _mm256_setzero_pd();
        let mut r4 = _mm256_setzero_pd();
        let mut i1 = _mm256_setzero_pd();
        let mut i2 = _mm256_setzero_pd();
        let mut i3 = _mm256_setzero_pd();
        let mut i4 = _mm256_setzero_pd();
        for c in 0..chunks {
            let o = c * 8;
            let xa = _mm256_loadu_pd(ar.as_ptr().add(o));
            let ya = _mm256_loadu_pd(ai.as_ptr().add(o));
            let ua = _mm256_loadu_pd(br.as_ptr().add(o));
            let va = _mm256_loadu_pd(bi.as_ptr().add(o));
            r1 = _mm256_fmadd_pd(xa, ua, r1);
            r2 = _mm256_fmadd_pd(ya, va, r2);
            i1 = _mm256_fmadd_pd(ya, ua, i1);
            i2 = _mm256_fmadd_pd(xa, va, i2);
            let xb = _mm256_loadu_pd(ar.as_ptr().add(o + 4));
            let yb = _mm256_loadu_pd(ai.as_ptr().add(o + 4));
            let ub = _mm256_loadu_pd(br.as_ptr().add(o + 4));
            let vb = _mm256_loadu_pd(bi.as_ptr().add(o + 4));
            r3 = _mm256_fmadd_pd(xb, ub, r3);
            r4 = _mm256_fmadd_pd(yb, vb, r4);
            i3 = _mm256_fmadd_pd(yb, ub, i3);
            i4 = _mm256_fmadd_pd(xb, vb, i4);
        }
        let hsum = |v: __m256d| -> f64 {
            let lo = _mm256_castpd256_pd128(v);
            let hi = _mm256_extractf128_pd(v, 1);
            let s = _mm_add_pd(lo, hi);
            _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)))
        };
        let dot_uu = hsum(_mm256_add_pd(r1, r3));
        let dot_vv = hsum(_mm256_add_pd(r2, r4));
        let dot_yu = hsum(_mm256_add_pd(i1, i3));
        let dot_xv = hsum(_mm256_add_pd(i2, i4));
        let sign = if conj { 1.0 } else { -1.0 };
        let mut sre = dot_uu + sign * dot_vv;
        let mut sim = dot_yu - sign * dot_xv;
        for k in chunks * 8..n {
            let x = ar[k];
            let y = ai[k];
            let u = br[k];
            let v = bi[k];
            sre += x * u + sign * y * v;
            sim += y * u - sign * x * v;
        }
        (sre, sim)
    }
}
