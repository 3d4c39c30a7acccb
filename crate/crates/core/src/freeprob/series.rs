//! Truncated power series arithmetic on real coefficient vectors.
//!
//! Coefficient index equals the power of z. Everything is plain O(K^2..K^4)
//! triangular recursion; the truncation order is small (default 32).

use crate::error::{Error, Result};

/// Cauchy product truncated to `len` coefficients.
pub fn mul(a: &[f64], b: &[f64], len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len];
    for (i, &ai) in a.iter().enumerate().take(len) {
        if ai == 0.0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate().take(len - i) {
            out[i + j] += ai * bj;
        }
    }
    out
}

/// Composition `f(g(z))` truncated to `len`; requires `g[0] = 0`.
pub fn compose(f: &[f64], g: &[f64], len: usize) -> Vec<f64> {
    debug_assert!(g.first().map_or(true, |&c| c == 0.0));
    // Horner from the top coefficient down.
    let mut acc = vec![0.0; len];
    for &fk in f.iter().rev() {
        acc = mul(&acc, g, len);
        if !acc.is_empty() {
            acc[0] += fk;
        }
    }
    acc
}

/// Compositional inverse of `f` with `f[0] = 0`, `f[1] != 0`:
/// returns `w` with `f(w(z)) = z` through the truncation order.
pub fn invert_composition(f: &[f64], len: usize) -> Result<Vec<f64>> {
    if f.len() < 2 || f[0] != 0.0 {
        return Err(Error::Domain("series inversion needs f(0) = 0".into()));
    }
    let f1 = f[1];
    if f1 == 0.0 {
        return Err(Error::Domain("series inversion needs a nonzero linear coefficient".into()));
    }
    let mut w = vec![0.0; len];
    if len < 2 {
        return Ok(w);
    }
    w[1] = 1.0 / f1;
    for n in 2..len {
        // [z^n] f(w) with w known below order n; the unknown w[n] enters
        // only through the linear term of f.
        let comp = compose(&f[..f.len().min(n + 1)], &w, n + 1);
        w[n] = -comp[n] / f1;
    }
    Ok(w)
}

/// Square root of a series with positive constant term.
pub fn sqrt(p: &[f64], len: usize) -> Result<Vec<f64>> {
    let p0 = *p.first().unwrap_or(&0.0);
    if p0 <= 0.0 {
        return Err(Error::Domain(format!(
            "series sqrt needs a positive constant term, got {p0}"
        )));
    }
    let mut t = vec![0.0; len];
    t[0] = p0.sqrt();
    for n in 1..len {
        let mut conv = 0.0;
        for j in 1..n {
            conv += t[j] * t[n - j];
        }
        let pn = p.get(n).copied().unwrap_or(0.0);
        t[n] = (pn - conv) / (2.0 * t[0]);
    }
    Ok(t)
}

/// Divide `a` by `b` with `b[0] != 0`, truncated to `len`.
pub fn div(a: &[f64], b: &[f64], len: usize) -> Result<Vec<f64>> {
    let b0 = *b.first().unwrap_or(&0.0);
    if b0 == 0.0 {
        return Err(Error::Domain("series division by zero constant term".into()));
    }
    let mut out = vec![0.0; len];
    for n in 0..len {
        let mut acc = a.get(n).copied().unwrap_or(0.0);
        for j in 1..=n {
            acc -= b.get(j).copied().unwrap_or(0.0) * out[n - j];
        }
        out[n] = acc / b0;
    }
    Ok(out)
}

/// Moments `m_1..m_K` -> free cumulants `k_1..k_K` via
/// `M(y) = C(y M(y))` with `M(y) = 1 + sum m_n y^n`, `C(y) = 1 + sum k_n y^n`.
pub fn moments_to_cumulants(m: &[f64]) -> Vec<f64> {
    let kk = m.len();
    let len = kk + 1;
    let mut mfull = vec![0.0; len];
    mfull[0] = 1.0;
    mfull[1..].copy_from_slice(m);

    // Precompute powers of M.
    let mut mpow = Vec::with_capacity(kk + 1);
    let mut acc = vec![0.0; len];
    acc[0] = 1.0;
    mpow.push(acc.clone());
    for _ in 1..=kk {
        acc = mul(&acc, &mfull, len);
        mpow.push(acc.clone());
    }

    let mut kappa = vec![0.0; kk];
    for n in 1..=kk {
        // m_n = sum_{s=1}^{n} k_s [y^{n-s}] M^s
        let mut acc = 0.0;
        for s in 1..n {
            acc += kappa[s - 1] * mpow[s][n - s];
        }
        kappa[n - 1] = m[n - 1] - acc;
    }
    kappa
}

/// Free cumulants back to moments; inverse of [`moments_to_cumulants`].
pub fn cumulants_to_moments(kappa: &[f64]) -> Vec<f64> {
    let kk = kappa.len();
    let len = kk + 1;
    let mut mfull = vec![0.0; len];
    mfull[0] = 1.0;
    for n in 1..=kk {
        // m_n = sum_{s=1}^{n} k_s [y^{n-s}] M^s; the coefficient of M^s at
        // y^{n-s} involves moments of index < n only, all known.
        let mut acc = 0.0;
        for s in 1..=n {
            let mut pow = vec![0.0; n - s + 1];
            pow[0] = 1.0;
            for _ in 0..s {
                pow = mul(&pow, &mfull, n - s + 1);
            }
            acc += kappa[s - 1] * pow[n - s];
        }
        mfull[n] = acc;
    }
    mfull[1..].to_vec()
}
