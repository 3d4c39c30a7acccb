//! Random matrix tuples and the matrix-valued functions built from them.
//!
//! Entries are sampled i.i.d. from a small catalog of normalized laws, each
//! factor `q` scaled by `1/sqrt(n_q)`. Seeding is counter-based: factor `q`
//! draws from its own ChaCha stream, so a factor is reproducible regardless
//! of how many other factors the function uses.

use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{mul_chain, CMatrix, LuFactors};

/// Condition-estimate guard for exact inverses of spherical factors.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Base dimension and the per-factor shape ratios `y_q`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionProfile {
    n: usize,
    ratios: Vec<f64>,
}

impl DimensionProfile {
    pub fn new(n: usize, ratios: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::Config(format!("base dimension must be >= 2, got {n}")));
        }
        if ratios.is_empty() {
            return Err(Error::Config("at least one shape ratio is required".into()));
        }
        for (q, &y) in ratios.iter().enumerate() {
            if !(y > 0.0 && y <= 1.0) {
                return Err(Error::Config(format!(
                    "ratio y_{} = {y} outside (0, 1]",
                    q + 1
                )));
            }
        }
        Ok(DimensionProfile { n, ratios })
    }

    /// All ratios equal to one (square factors only).
    pub fn square(n: usize, factors: usize) -> Result<Self> {
        DimensionProfile::new(n, vec![1.0; factors.max(1)])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ratios(&self) -> &[f64] {
        &self.ratios
    }

    /// Derived inner dimensions `n_q = round(n / y_q)`, q = 1..=m.
    pub fn inner_dims(&self) -> Vec<usize> {
        self.ratios
            .iter()
            .map(|y| (self.n as f64 / y).round() as usize)
            .collect()
    }

    pub fn is_square(&self) -> bool {
        self.ratios.iter().all(|&y| y == 1.0)
    }
}

/// Catalog of normalized entry laws: mean 0, variance 1.
///
/// The complex Gaussian puts variance 1/2 in each of the independent real
/// and imaginary parts.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum EntryLaw {
    StandardRealGaussian,
    StandardComplexGaussian,
    Rademacher,
    UniformSymmetric,
    TwoPoint { p: f64 },
}

impl EntryLaw {
    pub fn validate(&self) -> Result<()> {
        if let EntryLaw::TwoPoint { p } = self {
            if !(*p > 0.0 && *p < 1.0) {
                return Err(Error::Config(format!("two-point parameter p = {p} outside (0, 1)")));
            }
        }
        Ok(())
    }

    pub fn is_complex(&self) -> bool {
        matches!(self, EntryLaw::StandardComplexGaussian)
    }

    /// Draw one unscaled entry.
    fn sample(&self, rng: &mut ChaCha8Rng) -> Complex64 {
        match self {
            EntryLaw::StandardRealGaussian => Complex64::new(standard_normal(rng), 0.0),
            EntryLaw::StandardComplexGaussian => {
                let (a, b) = normal_pair(rng);
                Complex64::new(a * std::f64::consts::FRAC_1_SQRT_2, b * std::f64::consts::FRAC_1_SQRT_2)
            }
            EntryLaw::Rademacher => {
                let v = if rng.random::<f64>() < 0.5 { -1.0 } else { 1.0 };
                Complex64::new(v, 0.0)
            }
            EntryLaw::UniformSymmetric => {
                // Uniform on [-sqrt(3), sqrt(3)] has unit variance.
                let v = (2.0 * rng.random::<f64>() - 1.0) * 3.0f64.sqrt();
                Complex64::new(v, 0.0)
            }
            EntryLaw::TwoPoint { p } => {
                let a = ((1.0 - p) / p).sqrt();
                let b = -(p / (1.0 - p)).sqrt();
                let v = if rng.random::<f64>() < *p { a } else { b };
                Complex64::new(v, 0.0)
            }
        }
    }
}

/// Marsaglia polar pair of independent standard normals.
fn normal_pair(rng: &mut ChaCha8Rng) -> (f64, f64) {
    loop {
        let v1 = 2.0 * rng.random::<f64>() - 1.0;
        let v2 = 2.0 * rng.random::<f64>() - 1.0;
        let s = v1 * v1 + v2 * v2;
        if s > 0.0 && s < 1.0 {
            let mult = (-2.0 * s.ln() / s).sqrt();
            return (v1 * mult, v2 * mult);
        }
    }
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    normal_pair(rng).0
}

/// Which matrix-valued function to assemble from the sampled tuple.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum FunctionKind {
    /// F = X^(1), a single (possibly rectangular) factor.
    Identity,
    /// F = X^(1) ... X^(m).
    Product { m: usize },
    /// F = X^m for a single square factor.
    Power { m: usize },
    /// F = (X^(1))^(m_1) ... (X^(k))^(m_k), all square.
    ProductOfPowers { exponents: Vec<usize> },
    /// F = X^(1) (X^(2))^(-1) ... X^(2m-1) (X^(2m))^(-1), all square.
    ///
    /// With `ridge` t > 0 every inverse is the regularized inverse
    /// `(X*X + tI)^(-1) X*`; with t = 0 the exact inverse guarded by a
    /// condition estimate.
    SphericalProduct { m: usize, ridge: f64 },
}

/// A function kind plus the dimension profile of its factors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionSpec {
    pub kind: FunctionKind,
    pub profile: DimensionProfile,
}

impl FunctionSpec {
    pub fn new(kind: FunctionKind, profile: DimensionProfile) -> Result<Self> {
        let spec = FunctionSpec { kind, profile };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.factor_count();
        if self.profile.ratios().len() != m {
            return Err(Error::Config(format!(
                "function needs {m} shape ratios, profile has {}",
                self.profile.ratios().len()
            )));
        }
        match &self.kind {
            FunctionKind::Identity => {}
            FunctionKind::Product { m } => {
                if *m == 0 {
                    return Err(Error::Config("product needs m >= 1".into()));
                }
            }
            FunctionKind::Power { m } => {
                if *m == 0 {
                    return Err(Error::Config("power needs m >= 1".into()));
                }
                if !self.profile.is_square() {
                    return Err(Error::Config("powers require square factors".into()));
                }
            }
            FunctionKind::ProductOfPowers { exponents } => {
                if exponents.is_empty() || exponents.iter().any(|&e| e == 0) {
                    return Err(Error::Config("product-of-powers needs positive exponents".into()));
                }
                if !self.profile.is_square() {
                    return Err(Error::Config("product-of-powers requires square factors".into()));
                }
            }
            FunctionKind::SphericalProduct { m, ridge } => {
                if *m == 0 {
                    return Err(Error::Config("spherical-product needs m >= 1".into()));
                }
                if *ridge < 0.0 {
                    return Err(Error::Config(format!("ridge t = {ridge} must be >= 0")));
                }
                if !self.profile.is_square() {
                    return Err(Error::Config("spherical-product requires square factors".into()));
                }
            }
        }
        Ok(())
    }

    /// Number of independent random factors the function consumes.
    pub fn factor_count(&self) -> usize {
        match &self.kind {
            FunctionKind::Identity => 1,
            FunctionKind::Product { m } => *m,
            FunctionKind::Power { .. } => 1,
            FunctionKind::ProductOfPowers { exponents } => exponents.len(),
            FunctionKind::SphericalProduct { m, .. } => 2 * m,
        }
    }

    /// Shapes of the factors in the tuple, chained.
    pub fn factor_shapes(&self) -> Vec<(usize, usize)> {
        let n = self.profile.n();
        match &self.kind {
            FunctionKind::Identity | FunctionKind::Product { .. } => {
                let dims = self.profile.inner_dims();
                let mut shapes = Vec::with_capacity(dims.len());
                let mut prev = n;
                for &d in &dims {
                    shapes.push((prev, d));
                    prev = d;
                }
                shapes
            }
            _ => vec![(n, n); self.factor_count()],
        }
    }

    /// Shape of the assembled matrix F.
    pub fn output_shape(&self) -> (usize, usize) {
        let shapes = self.factor_shapes();
        (shapes[0].0, shapes[shapes.len() - 1].1)
    }
}

/// A sampled tuple of scaled factors plus the seed that generated it.
#[derive(Clone, Debug)]
pub struct MatrixTuple {
    pub factors: Vec<CMatrix>,
    pub seed: u64,
    /// Base dimension of the generating spec (used by the truncation ops).
    pub base_n: usize,
}

/// Sample the factor tuple for `spec` under `law`, deterministically in `seed`.
pub fn sample_tuple(spec: &FunctionSpec, law: EntryLaw, seed: u64) -> Result<MatrixTuple> {
    spec.validate()?;
    law.validate()?;
    let shapes = spec.factor_shapes();
    let mut factors = Vec::with_capacity(shapes.len());
    for (q, &(rows, cols)) in shapes.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(q as u64 + 1);
        let scale = 1.0 / (cols as f64).sqrt();
        let mut m = CMatrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                let v = law.sample(&mut rng);
                m.set(i, j, v * scale);
            }
        }
        factors.push(m);
    }
    Ok(MatrixTuple {
        factors,
        seed,
        base_n: spec.profile.n(),
    })
}

/// Regularized inverse `(X*X + tI)^(-1) X*`; the exact inverse at t = 0.
pub fn regularized_inverse(x: &CMatrix, t: f64) -> Result<CMatrix> {
    if !x.is_square() {
        return Err(Error::Shape(format!(
            "inverse needs a square matrix, got {}x{}",
            x.rows(),
            x.cols()
        )));
    }
    if t < 0.0 {
        return Err(Error::Domain(format!("ridge t = {t} must be >= 0")));
    }
    if t == 0.0 {
        return LuFactors::new(x)?.inverse();
    }
    let xh = x.adjoint();
    let mut a = xh.gram(); // X^H (X^H)^H = X^H X
    for i in 0..a.rows() {
        let v = a.get(i, i);
        a.set(i, i, v + Complex64::new(t, 0.0));
    }
    LuFactors::new(&a)?.solve(&xh)
}

/// Exact inverse with the spherical condition guard.
fn guarded_inverse(x: &CMatrix) -> Result<CMatrix> {
    let inv = LuFactors::new(x)
        .map_err(|_| Error::Singular {
            cond: f64::INFINITY,
            limit: CONDITION_LIMIT,
        })?
        .inverse()?;
    let cond = x.frobenius_norm() * inv.frobenius_norm();
    if cond > CONDITION_LIMIT {
        return Err(Error::Singular {
            cond,
            limit: CONDITION_LIMIT,
        });
    }
    Ok(inv)
}

/// Assemble the matrix function from a sampled tuple.
pub fn assemble(spec: &FunctionSpec, tuple: &MatrixTuple) -> Result<CMatrix> {
    let shapes = spec.factor_shapes();
    if tuple.factors.len() != shapes.len() {
        return Err(Error::Shape(format!(
            "tuple has {} factors, spec needs {}",
            tuple.factors.len(),
            shapes.len()
        )));
    }
    for (f, &(r, c)) in tuple.factors.iter().zip(&shapes) {
        if f.rows() != r || f.cols() != c {
            return Err(Error::Shape(format!(
                "factor is {}x{}, spec needs {}x{}",
                f.rows(),
                f.cols(),
                r,
                c
            )));
        }
    }
    match &spec.kind {
        FunctionKind::Identity => Ok(tuple.factors[0].clone()),
        FunctionKind::Product { .. } => mul_chain(&tuple.factors),
        FunctionKind::Power { m } => {
            let x = &tuple.factors[0];
            let mut acc = x.clone();
            for _ in 1..*m {
                acc = acc.mul(x)?;
            }
            Ok(acc)
        }
        FunctionKind::ProductOfPowers { exponents } => {
            let mut parts = Vec::with_capacity(exponents.len());
            for (x, &e) in tuple.factors.iter().zip(exponents) {
                let mut acc = x.clone();
                for _ in 1..e {
                    acc = acc.mul(x)?;
                }
                parts.push(acc);
            }
            mul_chain(&parts)
        }
        FunctionKind::SphericalProduct { m, ridge } => {
            let mut parts = Vec::with_capacity(2 * m);
            for q in 0..*m {
                parts.push(tuple.factors[2 * q].clone());
                let denom = &tuple.factors[2 * q + 1];
                let inv = if *ridge > 0.0 {
                    regularized_inverse(denom, *ridge)?
                } else {
                    guarded_inverse(denom)?
                };
                parts.push(inv);
            }
            mul_chain(&parts)
        }
    }
}

/// `F - alpha I` for square F.
pub fn shift(f: &CMatrix, alpha: Complex64) -> Result<CMatrix> {
    f.shift_diag(alpha)
}

/// Girko hermitization: `[[0, F - alpha I], [(F - alpha I)^*, 0]]`.
///
/// `alpha != 0` requires a square F; `alpha = 0` also accepts rectangular F.
pub fn hermitize(f: &CMatrix, alpha: Complex64) -> Result<CMatrix> {
    let shifted = if alpha == Complex64::new(0.0, 0.0) {
        f.clone()
    } else {
        f.shift_diag(alpha)?
    };
    let (n, p) = (shifted.rows(), shifted.cols());
    let dim = n + p;
    let mut v = CMatrix::zeros(dim, dim);
    for i in 0..n {
        for j in 0..p {
            let x = shifted.get(i, j);
            v.set(i, n + j, x);
            v.set(n + j, i, x.conj());
        }
    }
    Ok(v)
}

/// The shift block `J(alpha) = [[0, -alpha I], [-conj(alpha) I, 0]]`.
pub fn j_alpha(n: usize, alpha: Complex64) -> CMatrix {
    let mut v = CMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        v.set(i, n + i, -alpha);
        v.set(n + i, i, -alpha.conj());
    }
    v
}

/// Zero all entries whose unscaled magnitude exceeds `tau * sqrt(n)`.
///
/// Idempotent; `n` is the base dimension recorded in the tuple.
pub fn truncate_entries(tuple: &MatrixTuple, tau: f64) -> Result<MatrixTuple> {
    if tau <= 0.0 {
        return Err(Error::Domain(format!("tau = {tau} must be positive")));
    }
    let cut = tau * (tuple.base_n as f64).sqrt();
    let mut out = tuple.clone();
    for f in out.factors.iter_mut() {
        let unscale = (f.cols() as f64).sqrt();
        for k in 0..f.re.len() {
            let mag = (f.re[k] * f.re[k] + f.im[k] * f.im[k]).sqrt() * unscale;
            if mag > cut {
                f.re[k] = 0.0;
                f.im[k] = 0.0;
            }
        }
    }
    Ok(out)
}

/// Lindeberg truncation functional on the unscaled entries,
/// `L_n(tau) = n^-2 sum |X|^2 1{|X| > tau sqrt(n)}`.
pub fn lindeberg_statistic(tuple: &MatrixTuple, tau: f64) -> Result<f64> {
    if tau <= 0.0 {
        return Err(Error::Domain(format!("tau = {tau} must be positive")));
    }
    let n = tuple.base_n as f64;
    let cut_sq = tau * tau * n;
    let mut total = 0.0;
    for f in &tuple.factors {
        let unscale_sq = f.cols() as f64;
        for k in 0..f.re.len() {
            let mag_sq = (f.re[k] * f.re[k] + f.im[k] * f.im[k]) * unscale_sq;
            if mag_sq > cut_sq {
                total += mag_sq;
            }
        }
    }
    Ok(total / (n * n))
}

/// Monte Carlo estimate of the alternating centered-power trace that
/// vanishes exactly when the two matrix families are asymptotically free.
///
/// `pattern` lists the exponent pairs `(j_i, l_i)`; the centering constants
/// are the mean normalized traces of the corresponding powers, estimated
/// from the same sample of matrices.
pub fn freeness_statistic(
    sample_a: impl Fn(u64) -> CMatrix,
    sample_b: impl Fn(u64) -> CMatrix,
    pattern: &[(usize, usize)],
    trials: usize,
    seed: u64,
) -> Result<f64> {
    if pattern.is_empty() {
        return Err(Error::Config("freeness pattern must be nonempty".into()));
    }
    if trials == 0 {
        return Err(Error::Config("freeness statistic needs trials >= 1".into()));
    }
    let max_j = pattern.iter().map(|&(j, _)| j).max().unwrap();
    let max_l = pattern.iter().map(|&(_, l)| l).max().unwrap();

    let mut a_samples = Vec::with_capacity(trials);
    let mut b_samples = Vec::with_capacity(trials);
    for t in 0..trials {
        let a = sample_a(seed.wrapping_add(t as u64));
        let b = sample_b(seed.wrapping_add(t as u64));
        if !a.is_square() || !b.is_square() || a.rows() != b.rows() {
            return Err(Error::Shape(format!(
                "freeness statistic needs equal square matrices, got {}x{} and {}x{}",
                a.rows(),
                a.cols(),
                b.rows(),
                b.cols()
            )));
        }
        a_samples.push(powers_of(&a, max_j)?);
        b_samples.push(powers_of(&b, max_l)?);
    }

    let dim = a_samples[0][0].rows() as f64;
    // Centering constants tau_j = mean (1/dim) Tr A^j over the sample.
    let center = |powers: &[Vec<CMatrix>], order: usize| -> Vec<f64> {
        (1..=order)
            .map(|j| {
                powers
                    .iter()
                    .map(|p| p[j - 1].trace().re / dim)
                    .sum::<f64>()
                    / powers.len() as f64
            })
            .collect()
    };
    let tau_a = center(&a_samples, max_j);
    let tau_b = center(&b_samples, max_l);

    let mut acc = 0.0;
    for t in 0..trials {
        let mut prod: Option<CMatrix> = None;
        for &(j, l) in pattern {
            let mut fa = a_samples[t][j - 1].clone();
            let ca = tau_a[j - 1];
            for i in 0..fa.rows() {
                let v = fa.get(i, i);
                fa.set(i, i, v - Complex64::new(ca, 0.0));
            }
            let mut fb = b_samples[t][l - 1].clone();
            let cb = tau_b[l - 1];
            for i in 0..fb.rows() {
                let v = fb.get(i, i);
                fb.set(i, i, v - Complex64::new(cb, 0.0));
            }
            let step = fa.mul(&fb)?;
            prod = Some(match prod {
                None => step,
                Some(p) => p.mul(&step)?,
            });
        }
        acc += prod.unwrap().trace().re / dim;
    }
    Ok(acc / trials as f64)
}

fn powers_of(a: &CMatrix, up_to: usize) -> Result<Vec<CMatrix>> {
    let mut out = Vec::with_capacity(up_to);
    let mut acc = a.clone();
    out.push(acc.clone());
    for _ in 1..up_to {
        acc = acc.mul(a)?;
        out.push(acc.clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn product_spec(m: usize, n: usize) -> FunctionSpec {
        FunctionSpec::new(
            FunctionKind::Product { m },
            DimensionProfile::square(n, m).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn rademacher_scaling_forced_by_sqrt_n() {
        let spec = product_spec(1, 2);
        let t = sample_tuple(&spec, EntryLaw::Rademacher, 7).unwrap();
        let want = 1.0 / 2.0f64.sqrt();
        for i in 0..2 {
            for j in 0..2 {
                let v = t.factors[0].get(i, j);
                assert!((v.re.abs() - want).abs() < 1e-15);
                assert!(v.im == 0.0);
            }
        }
    }

    #[test]
    fn reseeding_is_deterministic() {
        let spec = product_spec(2, 8);
        let a = sample_tuple(&spec, EntryLaw::StandardComplexGaussian, 42).unwrap();
        let b = sample_tuple(&spec, EntryLaw::StandardComplexGaussian, 42).unwrap();
        assert_eq!(a.factors, b.factors);
        let c = sample_tuple(&spec, EntryLaw::StandardComplexGaussian, 43).unwrap();
        assert_ne!(a.factors, c.factors);
    }

    #[test]
    fn factor_streams_do_not_depend_on_m() {
        let one = product_spec(1, 8);
        let two = product_spec(2, 8);
        let a = sample_tuple(&one, EntryLaw::StandardRealGaussian, 5).unwrap();
        let b = sample_tuple(&two, EntryLaw::StandardRealGaussian, 5).unwrap();
        assert_eq!(a.factors[0], b.factors[0]);
    }

    #[test]
    fn frobenius_scaling_of_factors() {
        // E ||X_q||_F^2 = n_{q-1}; average over draws, 5% tolerance.
        let spec = product_spec(2, 4);
        let mut mean = [0.0; 2];
        let trials = 10_000;
        for s in 0..trials {
            let t = sample_tuple(&spec, EntryLaw::StandardComplexGaussian, s as u64).unwrap();
            mean[0] += t.factors[0].frobenius_norm_sq();
            mean[1] += t.factors[1].frobenius_norm_sq();
        }
        for m in mean.iter_mut() {
            *m /= trials as f64;
        }
        assert!((mean[0] - 4.0).abs() / 4.0 < 0.05, "factor 1 mean {}", mean[0]);
        assert!((mean[1] - 4.0).abs() / 4.0 < 0.05, "factor 2 mean {}", mean[1]);
    }

    #[test]
    fn entry_laws_are_normalized() {
        // Empirical mean -> 0 and second moment -> 1 at large sample size.
        let laws = [
            EntryLaw::StandardRealGaussian,
            EntryLaw::StandardComplexGaussian,
            EntryLaw::Rademacher,
            EntryLaw::UniformSymmetric,
            EntryLaw::TwoPoint { p: 0.3 },
        ];
        let n_samples = 1_000_000usize;
        for law in laws {
            let mut rng = ChaCha8Rng::seed_from_u64(9);
            let mut mean = Complex64::new(0.0, 0.0);
            let mut second = 0.0;
            let mut cross = 0.0;
            for _ in 0..n_samples {
                let v = law.sample(&mut rng);
                mean += v;
                second += v.norm_sqr();
                cross += v.re * v.im;
            }
            let inv = 1.0 / n_samples as f64;
            mean *= inv;
            second *= inv;
            cross *= inv;
            // 3 sigma at 1e6 samples with unit variance.
            assert!(mean.norm() < 3.0e-3, "{law:?} mean {mean}");
            assert!((second - 1.0).abs() < 6.0e-3, "{law:?} second {second}");
            assert!(cross.abs() < 3.0e-3, "{law:?} re-im correlation {cross}");
        }
    }

    #[test]
    fn assemble_power_one_is_identity_function() {
        let spec = FunctionSpec::new(
            FunctionKind::Power { m: 1 },
            DimensionProfile::square(4, 1).unwrap(),
        )
        .unwrap();
        let t = sample_tuple(&spec, EntryLaw::StandardRealGaussian, 3).unwrap();
        let f = assemble(&spec, &t).unwrap();
        assert_eq!(f, t.factors[0]);
    }

    #[test]
    fn assemble_power_of_identity_matrix() {
        let spec = FunctionSpec::new(
            FunctionKind::Power { m: 2 },
            DimensionProfile::square(3, 1).unwrap(),
        )
        .unwrap();
        let tuple = MatrixTuple {
            factors: vec![CMatrix::identity(3)],
            seed: 0,
            base_n: 3,
        };
        let f = assemble(&spec, &tuple).unwrap();
        assert_eq!(f, CMatrix::identity(3));
    }

    #[test]
    fn spherical_product_with_identity_denominator() {
        let spec = FunctionSpec::new(
            FunctionKind::SphericalProduct { m: 1, ridge: 0.0 },
            DimensionProfile::square(3, 2).unwrap(),
        )
        .unwrap();
        let a = CMatrix::from_fn(3, 3, |i, j| c((i * 3 + j) as f64, 0.1));
        let tuple = MatrixTuple {
            factors: vec![a.clone(), CMatrix::identity(3)],
            seed: 0,
            base_n: 3,
        };
        let f = assemble(&spec, &tuple).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((f.get(i, j) - a.get(i, j)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn exactly_singular_factor_advises_ridge() {
        let spec = FunctionSpec::new(
            FunctionKind::SphericalProduct { m: 1, ridge: 0.0 },
            DimensionProfile::square(2, 2).unwrap(),
        )
        .unwrap();
        let tuple = MatrixTuple {
            factors: vec![CMatrix::identity(2), CMatrix::zeros(2, 2)],
            seed: 0,
            base_n: 2,
        };
        assert!(matches!(
            assemble(&spec, &tuple),
            Err(Error::Singular { .. })
        ));
    }

    #[test]
    fn regularized_inverse_examples() {
        let i3 = CMatrix::identity(3);
        let r = regularized_inverse(&i3, 0.0).unwrap();
        assert_eq!(r, i3);

        let mut two = CMatrix::identity(3);
        two.scale(2.0);
        let r = regularized_inverse(&two, 0.0).unwrap();
        for i in 0..3 {
            assert!((r.get(i, i) - c(0.5, 0.0)).norm() < 1e-14);
        }

        // diag(1,2) with t = 1: entries x/(x^2+1) per diagonal.
        let d = CMatrix::diag(&[c(1.0, 0.0), c(2.0, 0.0)]);
        let r = regularized_inverse(&d, 1.0).unwrap();
        assert!((r.get(0, 0) - c(0.5, 0.0)).norm() < 1e-14);
        assert!((r.get(1, 1) - c(0.4, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn regularized_inverse_converges_as_ridge_shrinks() {
        // || R_t X - I || <= t ||(X*X)^-1|| on a diagonal matrix.
        let d = CMatrix::diag(&[c(1.0, 0.0), c(0.5, 0.0), c(2.0, 0.0)]);
        for &t in &[1e-2, 1e-4, 1e-6] {
            let r = regularized_inverse(&d, t).unwrap();
            let p = r.mul(&d).unwrap();
            let mut defect: f64 = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    let want = if i == j { 1.0 } else { 0.0 };
                    defect = defect.max((p.get(i, j) - c(want, 0.0)).norm());
                }
            }
            // ||(X*X)^-1|| = 1/0.25 = 4 for the smallest diagonal entry.
            assert!(defect <= t * 4.0 + 1e-14, "t={t} defect={defect}");
        }
    }

    #[test]
    fn shift_examples() {
        let f = CMatrix::identity(2);
        let s = shift(&f, c(1.0, 0.0)).unwrap();
        assert_eq!(s.frobenius_norm(), 0.0);

        let z = CMatrix::zeros(2, 2);
        let s = shift(&z, c(0.0, 1.0)).unwrap();
        for i in 0..2 {
            assert!((s.get(i, i) - c(0.0, -1.0)).norm() < 1e-15);
        }

        let d = CMatrix::diag(&[c(2.0, 0.0), c(3.0, 0.0)]);
        let s = shift(&d, c(1.0, 0.0)).unwrap();
        assert!((s.get(0, 0) - c(1.0, 0.0)).norm() < 1e-15);
        assert!((s.get(1, 1) - c(2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn hermitize_structure() {
        // 1x1 zero with alpha 0 -> 2x2 zero.
        let z = CMatrix::zeros(1, 1);
        let v = hermitize(&z, c(0.0, 0.0)).unwrap();
        assert_eq!(v.frobenius_norm(), 0.0);

        // identity with alpha = 1 -> zero matrix.
        let v = hermitize(&CMatrix::identity(2), c(1.0, 0.0)).unwrap();
        assert_eq!(v.frobenius_norm(), 0.0);

        // nonzero 1x1: eigenvalues +-|c|.
        let f = CMatrix::from_fn(1, 1, |_, _| c(3.0, 4.0));
        let v = hermitize(&f, c(0.0, 0.0)).unwrap();
        let ev = crate::linalg::hermitian_eigenvalues(&v).unwrap();
        assert!((ev[0] + 5.0).abs() < 1e-12);
        assert!((ev[1] - 5.0).abs() < 1e-12);
        assert!(v.hermitian_defect() == 0.0);
    }

    #[test]
    fn hermitize_rejects_shifted_rectangular() {
        let f = CMatrix::zeros(2, 3);
        assert!(hermitize(&f, c(0.0, 0.0)).is_ok());
        assert!(matches!(
            hermitize(&f, c(1.0, 0.0)),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn truncation_behaviour() {
        let spec = product_spec(1, 16);
        let t = sample_tuple(&spec, EntryLaw::Rademacher, 11).unwrap();

        // tau sqrt(n) = 8 > 1: nothing truncated.
        let kept = truncate_entries(&t, 2.0).unwrap();
        assert_eq!(kept.factors, t.factors);

        // tau sqrt(n) < 1: everything truncated.
        let gone = truncate_entries(&t, 0.1).unwrap();
        assert_eq!(gone.factors[0].frobenius_norm(), 0.0);

        // Idempotence.
        let tau = 0.24;
        let once = truncate_entries(&t, tau).unwrap();
        let twice = truncate_entries(&once, tau).unwrap();
        assert_eq!(once.factors, twice.factors);

        // tau >= n^(-1/3) admissible lower bound is accepted.
        let tau_min = (16.0f64).powf(-1.0 / 3.0);
        assert!(truncate_entries(&t, tau_min).is_ok());
    }

    #[test]
    fn lindeberg_bounded_law_vanishes() {
        let spec = product_spec(1, 16);
        let t = sample_tuple(&spec, EntryLaw::Rademacher, 11).unwrap();
        // tau sqrt(n) = 4 > 1 = |X|.
        assert_eq!(lindeberg_statistic(&t, 1.0).unwrap(), 0.0);

        let zero = MatrixTuple {
            factors: vec![CMatrix::zeros(16, 16)],
            seed: 0,
            base_n: 16,
        };
        assert_eq!(lindeberg_statistic(&zero, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn lindeberg_gaussian_tail_negligible() {
        // Gaussian entries, n = 256, tau = 0.5: the truncation point is
        // 8 standard deviations out. The analytic tail integral
        // E |Z|^2 1{|Z| > 8} = 2*8*phi(8) + 2Q(8) is about 8e-14, so both
        // the statistic and its expectation are far below 1e-12.
        let spec = product_spec(1, 256);
        let t = sample_tuple(&spec, EntryLaw::StandardRealGaussian, 17).unwrap();
        let l = lindeberg_statistic(&t, 0.5).unwrap();
        assert!(l < 1e-12, "L = {l}");

        let phi8 = (-32.0f64).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let tail_bound = 2.0 * 8.0 * phi8 + 2.0 * phi8 / 8.0;
        assert!(tail_bound < 1e-12);
    }

    #[test]
    fn freeness_statistic_of_zero_matrix_is_zero() {
        let spec = product_spec(1, 16);
        let sample_a = |s: u64| {
            let t = sample_tuple(&spec, EntryLaw::StandardRealGaussian, s).unwrap();
            let f = assemble(&spec, &t).unwrap();
            hermitize(&f, c(0.0, 0.0)).unwrap()
        };
        let sample_b = |_s: u64| CMatrix::zeros(32, 32);
        let v = freeness_statistic(sample_a, sample_b, &[(1, 1)], 4, 1).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn freeness_statistic_detects_dependence() {
        // A = B semicircular; pattern [(2,2)] estimates m4 - m2^2 = 1.
        let n = 96;
        let spec = product_spec(1, n);
        let sample = |s: u64| {
            let t = sample_tuple(&spec, EntryLaw::StandardComplexGaussian, s).unwrap();
            let f = assemble(&spec, &t).unwrap();
            hermitize(&f, c(0.0, 0.0)).unwrap()
        };
        let v = freeness_statistic(&sample, &sample, &[(2, 2)], 12, 100).unwrap();
        assert!((v - 1.0).abs() < 0.15, "fourth central statistic {v}");
    }
}
