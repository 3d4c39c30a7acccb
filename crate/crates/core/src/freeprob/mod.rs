//! Free-probability transform calculus.
//!
//! Moment series, R- and S-transforms via coefficient recursions, the
//! symmetric-measure S-transform on the sqrt(z) grading, the two-point-law
//! transforms in closed form, and free additive convolution by
//! subordination.

mod convolve;
pub mod series;

pub use convolve::{free_add, GridMeasure, GridSpec, PointMass, Semicircle, StieltjesEval, TwoPointLaw};

use num_complex::Complex64;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Default truncation order of the series calculus.
pub const DEFAULT_ORDER: usize = 32;

/// Moments `m_1..m_K` of a probability measure (`m_0 = 1` implicit).
#[derive(Clone, Debug, PartialEq)]
pub struct MomentSeries {
    m: Vec<f64>,
}

impl MomentSeries {
    pub fn new(m: Vec<f64>) -> Result<Self> {
        if m.is_empty() || m.len() > DEFAULT_ORDER {
            return Err(Error::Domain(format!(
                "moment series length {} outside 1..={DEFAULT_ORDER}",
                m.len()
            )));
        }
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("moments must be finite".into()));
        }
        // Hankel window positivity for a genuine measure.
        if m.len() >= 2 {
            let det = m[1] - m[0] * m[0];
            if det < -1e-9 {
                return Err(Error::Domain(format!(
                    "Hankel window det [[1,m1],[m1,m2]] = {det} is negative"
                )));
            }
        }
        Ok(MomentSeries { m })
    }

    pub fn moments(&self) -> &[f64] {
        &self.m
    }

    pub fn order(&self) -> usize {
        self.m.len()
    }

    pub fn m1(&self) -> f64 {
        self.m[0]
    }

    /// True when all odd moments vanish (relative to the even scale).
    pub fn is_symmetric(&self) -> bool {
        let scale = self.m.iter().fold(1.0f64, |a, b| a.max(b.abs()));
        self.m
            .iter()
            .step_by(2)
            .all(|&odd| odd.abs() <= 1e-9 * scale)
    }
}

/// Which transform a series represents.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransformKind {
    M,
    G,
    R,
    Rtilde,
    S,
}

/// Series grading: plain powers of z, or powers of z shifted by z^(-1/2)
/// (the symmetric-measure branch).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Grading {
    Z,
    SqrtZ,
}

/// A truncated transform expansion.
///
/// With `Grading::Z`, coefficient `j` multiplies `z^j`. With
/// `Grading::SqrtZ`, coefficient `j` multiplies `z^(j - 1/2)`, evaluated
/// with the principal square root (the upper branch of the symmetric
/// S-transform: `Im S >= 0` on (-1, 0)).
#[derive(Clone, Debug, PartialEq)]
pub struct TransformSeries {
    pub kind: TransformKind,
    pub grading: Grading,
    coeffs: Vec<f64>,
}

impl TransformSeries {
    pub fn new(kind: TransformKind, grading: Grading, coeffs: Vec<f64>) -> Self {
        TransformSeries {
            kind,
            grading,
            coeffs,
        }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        match self.grading {
            Grading::Z => acc,
            Grading::SqrtZ => acc / z.sqrt(),
        }
    }
}

impl Serialize for TransformSeries {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("TransformSeries", 4)?;
        let kind = match self.kind {
            TransformKind::M => "M",
            TransformKind::G => "G",
            TransformKind::R => "R",
            TransformKind::Rtilde => "Rtilde",
            TransformKind::S => "S",
        };
        let grading = match self.grading {
            Grading::Z => "z",
            Grading::SqrtZ => "sqrt_z",
        };
        let pairs: Vec<(f64, f64)> = self.coeffs.iter().map(|&c| (c, 0.0)).collect();
        st.serialize_field("kind", kind)?;
        st.serialize_field("grading", grading)?;
        st.serialize_field("branch", "upper")?;
        st.serialize_field("coefficients", &pairs)?;
        st.end()
    }
}

/// Anything that can report raw moments `m_k = E x^k`.
pub trait MomentSource {
    fn moment(&self, k: usize) -> Result<f64>;
}

/// Collect `m_1..m_K` of a source into a series.
pub fn moments_of(source: &dyn MomentSource, order: usize) -> Result<MomentSeries> {
    if order == 0 || order > DEFAULT_ORDER {
        return Err(Error::Domain(format!(
            "moment order {order} outside 1..={DEFAULT_ORDER}"
        )));
    }
    let m: Vec<f64> = (1..=order)
        .map(|k| source.moment(k))
        .collect::<Result<_>>()?;
    MomentSeries::new(m)
}

/// Free cumulant expansion `R(z) = sum_k kappa_k z^(k-1)`.
pub fn r_from_moments(ms: &MomentSeries) -> Result<TransformSeries> {
    if ms.order() < 2 {
        return Err(Error::Domain("R-transform needs at least two moments".into()));
    }
    let kappa = series::moments_to_cumulants(ms.moments());
    Ok(TransformSeries::new(TransformKind::R, Grading::Z, kappa))
}

/// Reconstruct moments from an R-series (round-trip direction).
pub fn moments_from_r(r: &TransformSeries) -> Result<MomentSeries> {
    if r.kind != TransformKind::R || r.grading != Grading::Z {
        return Err(Error::Domain("expected an R-series in powers of z".into()));
    }
    MomentSeries::new(series::cumulants_to_moments(r.coeffs()))
}

/// `S(z) = (z+1)/z * Minv(z)` as a truncated series; needs `m_1 != 0`.
pub fn s_from_moments(ms: &MomentSeries) -> Result<TransformSeries> {
    if ms.m1().abs() < 1e-12 {
        return Err(Error::Domain(
            "S-transform needs m1 != 0; use symmetric_s for symmetric measures".into(),
        ));
    }
    let kk = ms.order();
    let mut f = vec![0.0; kk + 1];
    f[1..].copy_from_slice(ms.moments());
    let w = series::invert_composition(&f, kk + 1)?;
    // S_j = w_{j+1} + w_j (with w_0 = 0).
    let coeffs: Vec<f64> = (0..kk)
        .map(|j| w[j + 1] + if j > 0 { w[j] } else { 0.0 })
        .collect();
    Ok(TransformSeries::new(TransformKind::S, Grading::Z, coeffs))
}

/// Reconstruct moments from an ordinary S-series (round-trip direction).
pub fn moments_from_s(s: &TransformSeries) -> Result<MomentSeries> {
    if s.kind != TransformKind::S || s.grading != Grading::Z {
        return Err(Error::Domain("expected an S-series in powers of z".into()));
    }
    let kk = s.coeffs().len();
    // Unfold S_j = w_{j+1} + w_j.
    let mut w = vec![0.0; kk + 1];
    for j in 0..kk {
        w[j + 1] = s.coeffs()[j] - w[j];
    }
    let m = series::invert_composition(&w, kk + 1)?;
    MomentSeries::new(m[1..].to_vec())
}

/// Symmetric-measure S-transform on the sqrt(z) grading:
/// `S(z) = sqrt((z+1)/z * S_Q(z))` with Q the pushforward under x -> x^2,
/// branch such that `Im S >= 0` on (-1, 0).
pub fn symmetric_s(ms: &MomentSeries) -> Result<TransformSeries> {
    if !ms.is_symmetric() {
        return Err(Error::Symmetry("odd moments are not all zero".into()));
    }
    if ms.order() < 2 {
        return Err(Error::Domain("symmetric S needs at least m2".into()));
    }
    let m2 = ms.moments()[1];
    if m2 <= 0.0 {
        return Err(Error::Domain(format!("symmetric S needs m2 > 0, got {m2}")));
    }
    let q: Vec<f64> = ms.moments().iter().skip(1).step_by(2).cloned().collect();
    let sq = s_from_moments(&MomentSeries::new(q)?)?;
    // (z+1) * S_Q, then the positive-branch square root; the upper branch
    // of sqrt((z+1)/z * S_Q) carries an overall minus sign.
    let len = sq.coeffs().len();
    let mut p = vec![0.0; len];
    for j in 0..len {
        p[j] = sq.coeffs()[j] + if j > 0 { sq.coeffs()[j - 1] } else { 0.0 };
    }
    let t = series::sqrt(&p, len)?;
    let coeffs: Vec<f64> = t.iter().map(|&c| -c).collect();
    Ok(TransformSeries::new(TransformKind::S, Grading::SqrtZ, coeffs))
}

/// Moments back from a symmetric-branch S-series (round trip).
pub fn moments_from_symmetric_s(s: &TransformSeries, order: usize) -> Result<MomentSeries> {
    if s.kind != TransformKind::S || s.grading != Grading::SqrtZ {
        return Err(Error::Domain("expected a symmetric-branch S-series".into()));
    }
    let len = s.coeffs().len();
    let t: Vec<f64> = s.coeffs().iter().map(|&c| -c).collect();
    let p = series::mul(&t, &t, len);
    // S_Q = P / (1+z)
    let sq = series::div(&p, &[1.0, 1.0], len)?;
    let q = moments_from_s(&TransformSeries::new(TransformKind::S, Grading::Z, sq))?;
    let mut m = vec![0.0; order];
    for (k, &qk) in q.moments().iter().enumerate() {
        let idx = 2 * (k + 1) - 1;
        if idx < order {
            m[idx] = qk;
        }
    }
    MomentSeries::new(m)
}

/// Residual of the identity `z S(z) = Rtilde^{-1}(z)` for the measure's
/// series, handled on the correct branch for symmetric measures.
pub fn nica_roundtrip_check(ms: &MomentSeries) -> Result<f64> {
    let kappa = series::moments_to_cumulants(ms.moments());
    let kk = ms.order();
    if ms.m1().abs() > 1e-12 {
        // Ordinary case: invert Rtilde(z) = sum kappa_n z^n directly.
        let mut rt = vec![0.0; kk + 1];
        rt[1..].copy_from_slice(&kappa);
        let rinv = series::invert_composition(&rt, kk + 1)?;
        let s = s_from_moments(ms)?;
        // z S(z) has coefficients S_{j-1} at z^j.
        let mut worst: f64 = 0.0;
        for j in 1..=kk {
            let zs = s.coeffs()[j - 1];
            worst = worst.max((zs - rinv[j]).abs());
        }
        Ok(worst)
    } else {
        // Symmetric case: Rtilde is even, Rtilde(u) = g(u^2); the branch
        // convention makes both sides -sqrt of an ordinary series, so the
        // identity reduces to z P(z) = g^{-1}(z) coefficientwise.
        if kk < 2 || ms.moments()[1] <= 0.0 {
            return Err(Error::Symmetry("symmetric nica check needs m2 > 0".into()));
        }
        let half = kk / 2;
        let mut g = vec![0.0; half + 1];
        for n in 1..=half {
            g[n] = kappa[2 * n - 1];
        }
        let ginv = series::invert_composition(&g, half + 1)?;
        let s = symmetric_s(ms)?;
        let t: Vec<f64> = s.coeffs().iter().map(|&c| -c).collect();
        let p = series::mul(&t, &t, half);
        let mut worst: f64 = 0.0;
        for j in 1..=half {
            let zp = p[j - 1];
            worst = worst.max((zp - ginv[j]).abs());
        }
        Ok(worst)
    }
}

/// Product of S-series, respecting the sqrt(z) grading.
pub fn free_mult_s(s1: &TransformSeries, s2: &TransformSeries) -> Result<TransformSeries> {
    if s1.kind != TransformKind::S || s2.kind != TransformKind::S {
        return Err(Error::Domain("free_mult_s needs S-series".into()));
    }
    let grading = match (s1.grading, s2.grading) {
        (Grading::Z, Grading::Z) => Grading::Z,
        (Grading::SqrtZ, Grading::Z) | (Grading::Z, Grading::SqrtZ) => Grading::SqrtZ,
        (Grading::SqrtZ, Grading::SqrtZ) => {
            return Err(Error::Domain(
                "product of two symmetric-branch series carries a full 1/z pole".into(),
            ))
        }
    };
    let len = s1.coeffs().len().min(s2.coeffs().len());
    let coeffs = series::mul(s1.coeffs(), s2.coeffs(), len);
    Ok(TransformSeries::new(TransformKind::S, grading, coeffs))
}

/// Rectangular composition `S_xi(z) = S_mu(z) * S_nu(z y)`.
pub fn rectangular_compose(
    s_mu: &TransformSeries,
    s_nu: &TransformSeries,
    y: f64,
) -> Result<TransformSeries> {
    if y <= 0.0 {
        return Err(Error::Domain(format!("shape ratio y = {y} must be positive")));
    }
    if s_nu.grading != Grading::Z {
        return Err(Error::Domain(
            "rectangular composition needs an ordinary series for the second factor".into(),
        ));
    }
    let scaled: Vec<f64> = s_nu
        .coeffs()
        .iter()
        .enumerate()
        .map(|(j, &c)| c * y.powi(j as i32))
        .collect();
    free_mult_s(
        s_mu,
        &TransformSeries::new(TransformKind::S, Grading::Z, scaled),
    )
}

/// Closed-form transforms of the two-point law `T(alpha)`, the spectral
/// distribution of the shift block `J(alpha)`.
#[derive(Clone, Copy, Debug)]
pub struct TwoPointTransforms {
    a: f64,
}

impl TwoPointTransforms {
    pub fn new(alpha: Complex64) -> Result<Self> {
        let a = alpha.norm();
        if a == 0.0 {
            return Err(Error::Domain("T(alpha) transforms need alpha != 0".into()));
        }
        Ok(TwoPointTransforms { a })
    }

    pub fn abs_alpha(&self) -> f64 {
        self.a
    }

    /// Moment generating series `M(z) = a^2 z^2 / (1 - a^2 z^2)`.
    pub fn m(&self, z: Complex64) -> Complex64 {
        let t = self.a * self.a * z * z;
        t / (Complex64::new(1.0, 0.0) - t)
    }

    /// Cauchy transform `G(z) = z / (z^2 - a^2)`.
    pub fn g(&self, z: Complex64) -> Complex64 {
        z / (z * z - Complex64::new(self.a * self.a, 0.0))
    }

    /// `R(z) = (-1 + sqrt(1 + 4 a^2 z^2)) / (2z)`, analytic at 0.
    pub fn r(&self, z: Complex64) -> Complex64 {
        let root = (Complex64::new(1.0, 0.0) + 4.0 * self.a * self.a * z * z).sqrt();
        (root - 1.0) / (2.0 * z)
    }

    /// `Rtilde(z) = z R(z)`.
    pub fn rtilde(&self, z: Complex64) -> Complex64 {
        let root = (Complex64::new(1.0, 0.0) + 4.0 * self.a * self.a * z * z).sqrt();
        (root - 1.0) * 0.5
    }

    /// `S(z) = sqrt((1+z)/z) / a` on the branch with `Im S >= 0`.
    pub fn s(&self, z: Complex64) -> Complex64 {
        let mut root = ((z + 1.0) / z).sqrt();
        if root.im < 0.0 {
            root = -root;
        }
        root / self.a
    }
}

/// `t_alpha_transforms` record per the two-point law.
pub fn t_alpha_transforms(alpha: Complex64) -> Result<TwoPointTransforms> {
    TwoPointTransforms::new(alpha)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    const CATALAN: [f64; 16] = [
        1.0, 2.0, 5.0, 14.0, 42.0, 132.0, 429.0, 1430.0, 4862.0, 16796.0, 58786.0, 208012.0,
        742900.0, 2674440.0, 9694845.0, 35357670.0,
    ];

    fn semicircle_moments(order: usize) -> MomentSeries {
        // Unit variance: m_{2k} = Catalan_k.
        let m: Vec<f64> = (1..=order)
            .map(|k| {
                if k % 2 == 0 {
                    CATALAN[k / 2 - 1]
                } else {
                    0.0
                }
            })
            .collect();
        MomentSeries::new(m).unwrap()
    }

    fn mp1_moments(order: usize) -> MomentSeries {
        MomentSeries::new(CATALAN[..order].to_vec()).unwrap()
    }

    #[test]
    fn r_transform_examples() {
        // Semicircle: R(z) = z.
        let r = r_from_moments(&semicircle_moments(8)).unwrap();
        assert!((r.coeffs()[1] - 1.0).abs() < 1e-12);
        for (j, &v) in r.coeffs().iter().enumerate() {
            if j != 1 {
                assert!(v.abs() < 1e-12, "coeff {j} = {v}");
            }
        }

        // Point mass at a: R(z) = a.
        let a: f64 = 0.7;
        let pm = MomentSeries::new((1..=6).map(|k| a.powi(k)).collect()).unwrap();
        let r = r_from_moments(&pm).unwrap();
        assert!((r.coeffs()[0] - a).abs() < 1e-12);
        for &v in &r.coeffs()[1..] {
            assert!(v.abs() < 1e-10);
        }

        // MP(1): all free cumulants are 1, so R(z) = 1/(1-z).
        let r = r_from_moments(&mp1_moments(8)).unwrap();
        for &v in r.coeffs() {
            assert!((v - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn s_transform_examples() {
        // Point mass at 1: S == 1.
        let pm = MomentSeries::new(vec![1.0; 6]).unwrap();
        let s = s_from_moments(&pm).unwrap();
        assert!((s.coeffs()[0] - 1.0).abs() < 1e-12);
        for &v in &s.coeffs()[1..] {
            assert!(v.abs() < 1e-12);
        }

        // MP(1): S(z) = 1/(1+z).
        let s = s_from_moments(&mp1_moments(8)).unwrap();
        for (j, &v) in s.coeffs().iter().enumerate() {
            let want = if j % 2 == 0 { 1.0 } else { -1.0 };
            assert!((v - want).abs() < 1e-10, "S[{j}] = {v}");
        }

        // Symmetric input is routed to symmetric_s.
        assert!(s_from_moments(&semicircle_moments(6)).is_err());
    }

    #[test]
    fn round_trips_to_order_16() {
        for ms in [mp1_moments(16), semicircle_moments(16)] {
            let r = r_from_moments(&ms).unwrap();
            let back = moments_from_r(&r).unwrap();
            for (a, b) in back.moments().iter().zip(ms.moments()) {
                assert!((a - b).abs() <= 1e-9, "R round trip {a} vs {b}");
            }
        }
        let ms = mp1_moments(16);
        let s = s_from_moments(&ms).unwrap();
        let back = moments_from_s(&s).unwrap();
        for (a, b) in back.moments().iter().zip(ms.moments()) {
            assert!((a - b).abs() <= 1e-9, "S round trip {a} vs {b}");
        }
        let ms = semicircle_moments(16);
        let s = symmetric_s(&ms).unwrap();
        let back = moments_from_symmetric_s(&s, 16).unwrap();
        for (a, b) in back.moments().iter().zip(ms.moments()) {
            assert!((a - b).abs() <= 1e-9, "symmetric S round trip {a} vs {b}");
        }
    }

    #[test]
    fn symmetric_s_of_semicircle_is_inverse_sqrt() {
        let s = symmetric_s(&semicircle_moments(12)).unwrap();
        assert_eq!(s.grading, Grading::SqrtZ);
        assert!((s.coeffs()[0] + 1.0).abs() < 1e-12);
        for &vv in &s.coeffs()[1..] {
            assert!(vv.abs() < 1e-10);
        }
        // At z = -1/4 the branch gives 2i.
        let v = s.eval(c(-0.25, 0.0));
        assert!((v - c(0.0, 2.0)).norm() < 1e-10);
        assert!(v.im >= 0.0);
    }

    #[test]
    fn symmetric_s_of_two_point_law() {
        // T(1): all even moments 1. S(z) = -sqrt(1+z)/sqrt(z); at -1/2: i.
        // The series is truncated, so the tolerance reflects the tail of
        // the binomial sqrt expansion at |z| = 1/2.
        let m: Vec<f64> = (1..=32).map(|k| if k % 2 == 0 { 1.0 } else { 0.0 }).collect();
        let s = symmetric_s(&MomentSeries::new(m).unwrap()).unwrap();
        let v = s.eval(c(-0.5, 0.0));
        assert!((v - c(0.0, 1.0)).norm() < 1e-6, "S(-1/2) = {v}");
        assert!(v.im >= 0.0);
        // Matches the closed form of T(alpha) at |alpha| = 1.
        let t = t_alpha_transforms(c(1.0, 0.0)).unwrap();
        let w = t.s(c(-0.5, 0.0));
        assert!((v - w).norm() < 1e-6);
    }

    #[test]
    fn symmetric_s_dilation_scaling() {
        // Scaling the measure by c > 0 scales S by 1/c.
        let base = semicircle_moments(10);
        let cc: f64 = 2.0;
        let scaled = MomentSeries::new(
            base.moments()
                .iter()
                .enumerate()
                .map(|(i, &m)| m * cc.powi(i as i32 + 1))
                .collect(),
        )
        .unwrap();
        let s1 = symmetric_s(&base).unwrap();
        let s2 = symmetric_s(&scaled).unwrap();
        for &z in &[c(-0.3, 0.0), c(-0.11, 0.0), c(-0.62, 0.0)] {
            let a = s1.eval(z);
            let b = s2.eval(z);
            assert!((a / b - cc).norm() < 1e-9, "ratio {}", a / b);
        }
    }

    #[test]
    fn nica_identity_residuals() {
        let pm = MomentSeries::new(vec![1.0; 8]).unwrap();
        assert!(nica_roundtrip_check(&pm).unwrap() < 1e-12);
        assert!(nica_roundtrip_check(&mp1_moments(10)).unwrap() < 1e-9);
        assert!(nica_roundtrip_check(&semicircle_moments(12)).unwrap() < 1e-9);
    }

    #[test]
    fn free_mult_examples() {
        // S == 1 is the identity.
        let one = TransformSeries::new(TransformKind::S, Grading::Z, vec![1.0, 0.0, 0.0, 0.0]);
        let mp = s_from_moments(&mp1_moments(4)).unwrap();
        let p = free_mult_s(&one, &mp).unwrap();
        for (a, b) in p.coeffs().iter().zip(mp.coeffs()) {
            assert!((a - b).abs() < 1e-12);
        }

        // MP(1) * MP(1) = Fuss-Catalan m=2: S = 1/(1+z)^2.
        let p = free_mult_s(&mp, &mp).unwrap();
        for (j, &v) in p.coeffs().iter().enumerate() {
            let want = (j as f64 + 1.0) * if j % 2 == 0 { 1.0 } else { -1.0 };
            assert!((v - want).abs() < 1e-10, "coeff {j} = {v}");
        }

        // MP(1) * inverse-MP limit (-z): -z/(1+z).
        let inv = TransformSeries::new(TransformKind::S, Grading::Z, vec![0.0, -1.0, 0.0, 0.0]);
        let p = free_mult_s(&mp, &inv).unwrap();
        let want = [0.0, -1.0, 1.0, -1.0];
        for (a, b) in p.coeffs().iter().zip(want.iter()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn rectangular_compose_examples() {
        let mp = s_from_moments(&mp1_moments(6)).unwrap();
        // y = 1 reduces to the plain product.
        let a = rectangular_compose(&mp, &mp, 1.0).unwrap();
        let b = free_mult_s(&mp, &mp).unwrap();
        assert_eq!(a.coeffs(), b.coeffs());

        // S_nu == 1 leaves S_mu unchanged for any y.
        let one_fix = TransformSeries::new(TransformKind::S, Grading::Z, {
            let mut v = vec![0.0; 6];
            v[0] = 1.0;
            v
        });
        let u = rectangular_compose(&mp, &one_fix, 0.37).unwrap();
        for (x, ycoef) in u.coeffs().iter().zip(mp.coeffs()) {
            assert!((x - ycoef).abs() < 1e-12);
        }

        // Chained MP factors with equal ratios: S_mu = 1/(1+y1 z) composed
        // with S_nu = 1/(1+z) at ratio y1 gives 1/(1+y1 z)^2.
        let y1: f64 = 0.5;
        let s_mu = TransformSeries::new(
            TransformKind::S,
            Grading::Z,
            (0..8).map(|j| (-y1).powi(j as i32)).collect::<Vec<_>>(),
        );
        let s_nu = TransformSeries::new(
            TransformKind::S,
            Grading::Z,
            (0..8).map(|j| (-1.0f64).powi(j as i32)).collect::<Vec<_>>(),
        );
        let comp = rectangular_compose(&s_mu, &s_nu, y1).unwrap();
        // Both factors become 1/(1+y1 z): product 1/(1+y1 z)^2.
        for (j, &v) in comp.coeffs().iter().enumerate() {
            let want = (j as f64 + 1.0) * (-y1).powi(j as i32);
            assert!((v - want).abs() < 1e-10, "coeff {j}: {v} vs {want}");
        }
    }

    #[test]
    fn two_point_transforms() {
        let t = t_alpha_transforms(c(0.6, 0.8)).unwrap(); // |alpha| = 1
        // Rtilde(z) ~ a^2 z^2 near zero.
        let z = c(1e-3, 0.0);
        let rt = t.rtilde(z);
        assert!((rt.re - 1e-6).abs() < 1e-11 && rt.im.abs() < 1e-12);
        // S(-1/2) = i.
        assert!((t.s(c(-0.5, 0.0)) - c(0.0, 1.0)).norm() < 1e-12);
        // G(i) = -i/2, so the Stieltjes transform g = -G is i/2 and agrees
        // with the empirical transform of atoms at +-1.
        let g = t.g(c(0.0, 1.0));
        assert!((g - c(0.0, -0.5)).norm() < 1e-12);
        let emp = crate::spectra::EmpiricalMeasure::new(vec![-1.0, 1.0]).unwrap();
        let ge = emp.stieltjes(c(0.0, 1.0)).unwrap();
        assert!((ge + g).norm() < 1e-12);
        // alpha = 0 is rejected.
        assert!(t_alpha_transforms(c(0.0, 0.0)).is_err());
    }

    #[test]
    fn two_point_nica_identity_on_the_branch() {
        // z S(z) equals the Im <= 0 branch of Rtilde^{-1} on (-1, 0):
        // both sides are -i sqrt(x(1-x))/|alpha| at z = -x.
        for &aa in &[0.5f64, 1.0, 2.3] {
            let t = t_alpha_transforms(c(aa, 0.0)).unwrap();
            for &x in &[0.05f64, 0.3, 0.5, 0.7, 0.95] {
                let z = c(-x, 0.0);
                let zs = z * t.s(z);
                let rtinv = c(0.0, -(x * (1.0 - x)).sqrt() / aa);
                assert!(
                    (zs - rtinv).norm() < 1e-9,
                    "a={aa}, x={x}: zS = {zs} vs Rtilde^-1 = {rtinv}"
                );
                assert!(rtinv.im <= 0.0);
                // And Rtilde maps the value back to z on the matching branch:
                // here 1 + 4 a^2 (zS)^2 = (1-2x)^2, so the principal square
                // root recovers z only below the branch point x = 1/2.
                if x < 0.5 {
                    assert!((t.rtilde(zs) - z).norm() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn transform_series_serializes_with_grading_and_branch() {
        let s = TransformSeries::new(TransformKind::S, Grading::SqrtZ, vec![-1.0, 0.25]);
        let json = serde_json::to_value(&s).unwrap();
        assert_eq!(json["grading"], "sqrt_z");
        assert_eq!(json["branch"], "upper");
        assert_eq!(json["coefficients"][0][0], -1.0);
        assert_eq!(json["coefficients"][0][1], 0.0);
    }
}
