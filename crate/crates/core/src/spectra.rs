//! Singular values, complex eigenvalues, empirical measures and the
//! (C0)/(C1)/(C2) spectral diagnostics.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::ensembles::{assemble, sample_tuple, EntryLaw, FunctionSpec};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, hessenberg_qr_eigenvalues, CMatrix};

/// Singular values sorted descending.
#[derive(Clone, Debug, PartialEq)]
pub struct SingularSpectrum {
    values: Vec<f64>,
    dim: usize,
}

impl SingularSpectrum {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn smallest(&self) -> f64 {
        *self.values.last().unwrap_or(&0.0)
    }

    pub fn largest(&self) -> f64 {
        *self.values.first().unwrap_or(&0.0)
    }

    /// Sum of squares; equals the squared Frobenius norm of the matrix.
    pub fn energy(&self) -> f64 {
        self.values.iter().map(|s| s * s).sum()
    }
}

/// Unordered complex eigenvalues.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexSpectrum {
    values: Vec<Complex64>,
}

impl ComplexSpectrum {
    pub fn from_values(values: Vec<Complex64>) -> Self {
        ComplexSpectrum { values }
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn moduli(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.norm()).collect()
    }

    pub fn arguments(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.arg()).collect()
    }
}

/// Sorted real sample points with uniform weights 1/n.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalMeasure {
    points: Vec<f64>,
}

impl EmpiricalMeasure {
    pub fn new(mut points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Domain("empirical measure needs at least one point".into()));
        }
        if points.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("empirical measure points must be finite".into()));
        }
        points.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(EmpiricalMeasure { points })
    }

    /// Squared singular values (the `s_j^2 <= x` convention).
    pub fn from_squared_singular(s: &SingularSpectrum) -> Self {
        EmpiricalMeasure::new(s.values.iter().map(|v| v * v).collect()).unwrap()
    }

    pub fn from_singular(s: &SingularSpectrum) -> Self {
        EmpiricalMeasure::new(s.values.clone()).unwrap()
    }

    /// Symmetrization: each singular value contributes +-s.
    pub fn symmetrized_from_singular(s: &SingularSpectrum) -> Self {
        let mut pts = Vec::with_capacity(2 * s.values.len());
        for &v in &s.values {
            pts.push(v);
            pts.push(-v);
        }
        EmpiricalMeasure::new(pts).unwrap()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Right-continuous step CDF.
    pub fn cdf(&self, x: f64) -> f64 {
        let n = self.points.len();
        // Number of points <= x.
        let count = self.points.partition_point(|&p| p <= x);
        count as f64 / n as f64
    }

    /// Left limit of the CDF at x.
    pub fn cdf_left(&self, x: f64) -> f64 {
        let n = self.points.len();
        let count = self.points.partition_point(|&p| p < x);
        count as f64 / n as f64
    }

    /// Stieltjes transform `(1/n) sum 1/(x_j - z)` for Im z > 0.
    pub fn stieltjes(&self, z: Complex64) -> Result<Complex64> {
        if z.im <= 0.0 {
            return Err(Error::Domain(format!("stieltjes transform needs Im z > 0, got {}", z.im)));
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for &x in &self.points {
            acc += (Complex64::new(x, 0.0) - z).inv();
        }
        Ok(acc / self.points.len() as f64)
    }

    pub fn moment(&self, k: usize) -> f64 {
        self.points.iter().map(|x| x.powi(k as i32)).sum::<f64>() / self.points.len() as f64
    }
}

/// Singular values of an arbitrary rectangular matrix, descending.
///
/// Computed as square roots of the Hermitian eigenvalues of `F F^*`
/// (or `F^* F` when that is smaller); tiny negative eigenvalues from
/// rounding are clamped to zero.
pub fn singular_values(f: &CMatrix) -> Result<SingularSpectrum> {
    if !f.is_finite() {
        return Err(Error::Domain("matrix has non-finite entries".into()));
    }
    let work = if f.rows() <= f.cols() {
        f.gram_lower()
    } else {
        f.adjoint().gram_lower()
    };
    let mut ev = hermitian_eigenvalues(&work)?;
    for v in ev.iter_mut() {
        *v = if *v > 0.0 { v.sqrt() } else { 0.0 };
    }
    ev.reverse();
    Ok(SingularSpectrum {
        dim: ev.len(),
        values: ev,
    })
}

/// Eigenvalues of a square complex matrix (dimension capped at 4096).
pub fn eigenvalues(f: &CMatrix) -> Result<ComplexSpectrum> {
    if !f.is_square() {
        return Err(Error::Shape(format!(
            "eigenvalues need a square matrix, got {}x{}",
            f.rows(),
            f.cols()
        )));
    }
    if f.rows() > 4096 {
        return Err(Error::Config(format!("dimension {} exceeds the 4096 cap", f.rows())));
    }
    if !f.is_finite() {
        return Err(Error::Domain("matrix has non-finite entries".into()));
    }
    let values = hessenberg_qr_eigenvalues(f)?;
    Ok(ComplexSpectrum { values })
}

/// Logarithmic potential at `alpha`: `-(1/n) sum log s_j(F - alpha I)`.
pub fn log_potential(f: &CMatrix, alpha: Complex64) -> Result<f64> {
    let shifted = f.shift_diag(alpha)?;
    let s = singular_values(&shifted)?;
    if s.smallest() < 1e-300 {
        return Err(Error::LogSingular);
    }
    Ok(-s.values().iter().map(|v| v.ln()).sum::<f64>() / s.dim() as f64)
}

/// The empirical (C0)/(C1)/(C2) diagnostics of the universality conditions.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionDiagnostics {
    /// `(1/n) sum s_k^p(F)` on the unshifted matrix.
    pub c0: f64,
    /// Smallest singular value of `F - alpha I`.
    pub c1_smallest: f64,
    /// `(1/n) sum_{n1 <= j <= n2} |log s_j(F - alpha I)|`.
    pub c2_tail: f64,
    /// True when the (C2) index window `[n1, n2]` was empty.
    pub c2_window_empty: bool,
}

/// Evaluate the three diagnostics with window `n1 = [n - n delta] + 1`,
/// `n2 = [n - n^gamma]` (1-based ranks of descending singular values).
pub fn condition_diagnostics(
    f: &CMatrix,
    alpha: Complex64,
    p: f64,
    gamma: f64,
    delta: f64,
) -> Result<ConditionDiagnostics> {
    if p <= 0.0 {
        return Err(Error::Domain(format!("p = {p} must be positive")));
    }
    if !(0.0 < gamma && gamma < 1.0) || !(0.0 < delta && delta < 1.0) {
        return Err(Error::Domain(format!(
            "gamma = {gamma} and delta = {delta} must lie in (0,1)"
        )));
    }
    let n = f.rows();
    let plain = singular_values(f)?;
    let c0 = plain.values().iter().map(|s| s.powf(p)).sum::<f64>() / n as f64;

    let shifted = singular_values(&f.shift_diag(alpha)?)?;
    let c1 = shifted.smallest();

    let nf = n as f64;
    let n1 = (nf - nf * delta).floor() as i64 + 1;
    let n2 = (nf - nf.powf(gamma)).floor() as i64;
    let (c2, empty) = if n1 > n2 || n2 < 1 {
        (0.0, true)
    } else {
        let lo = (n1.max(1) - 1) as usize;
        let hi = (n2 as usize).min(n);
        let mut acc = 0.0;
        for &s in &shifted.values()[lo..hi] {
            if s <= 0.0 {
                return Err(Error::LogSingular);
            }
            acc += s.ln().abs();
        }
        (acc / nf, false)
    };

    Ok(ConditionDiagnostics {
        c0,
        c1_smallest: c1,
        c2_tail: c2,
        c2_window_empty: empty,
    })
}

/// [`condition_diagnostics`] with the default window gamma = 1/2,
/// delta = 1/log n.
pub fn condition_diagnostics_default(
    f: &CMatrix,
    alpha: Complex64,
    p: f64,
) -> Result<ConditionDiagnostics> {
    let n = f.rows().max(3) as f64;
    condition_diagnostics(f, alpha, p, 0.5, (1.0 / n.ln()).min(0.999))
}

/// Result of a variance probe across Monte Carlo trials.
#[derive(Clone, Debug, PartialEq)]
pub struct VarianceProbe {
    pub variance: f64,
    pub n: usize,
    pub trials: usize,
}

/// Sample variance of the hermitized resolvent trace
/// `g(z) = (1/2n) sum 1/(lambda_k - z)` across the given seeds.
pub fn variance_probe(
    spec: &FunctionSpec,
    law: EntryLaw,
    z: Complex64,
    seeds: &[u64],
) -> Result<VarianceProbe> {
    if z.im <= 0.0 {
        return Err(Error::Domain("variance probe needs Im z > 0".into()));
    }
    if seeds.len() < 2 {
        return Err(Error::Config("variance probe needs at least two trials".into()));
    }
    let traces: Vec<Complex64> = seeds
        .par_iter()
        .map(|&seed| -> Result<Complex64> {
            let tuple = sample_tuple(spec, law, seed)?;
            let f = assemble(spec, &tuple)?;
            // Hermitization spectrum is +-s_j; the resolvent trace follows
            // directly from the singular values.
            let s = singular_values(&f)?;
            let mut acc = Complex64::new(0.0, 0.0);
            for &sv in s.values() {
                acc += (Complex64::new(sv, 0.0) - z).inv();
                acc += (Complex64::new(-sv, 0.0) - z).inv();
            }
            Ok(acc / (2.0 * s.dim() as f64))
        })
        .collect::<Result<Vec<_>>>()?;

    let n_tr = traces.len() as f64;
    let mean = traces.iter().sum::<Complex64>() / n_tr;
    let variance = traces.iter().map(|t| (t - mean).norm_sqr()).sum::<f64>() / (n_tr - 1.0);
    Ok(VarianceProbe {
        variance,
        n: spec.profile.n(),
        trials: seeds.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{hermitize, DimensionProfile, FunctionKind};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn singular_values_of_diagonal() {
        let f = CMatrix::diag(&[c(3.0, 0.0), c(4.0, 0.0)]);
        let s = singular_values(&f).unwrap();
        assert_eq!(s.values(), &[4.0, 3.0]);
    }

    #[test]
    fn singular_values_of_zero_rectangular() {
        let f = CMatrix::zeros(3, 5);
        let s = singular_values(&f).unwrap();
        assert_eq!(s.values(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn singular_values_of_jordan_block() {
        let mut f = CMatrix::zeros(2, 2);
        f.set(0, 1, c(1.0, 0.0));
        let s = singular_values(&f).unwrap();
        assert!((s.values()[0] - 1.0).abs() < 1e-14);
        assert!(s.values()[1].abs() < 1e-14);
    }

    #[test]
    fn weyl_energy_identity() {
        let f = CMatrix::from_fn(5, 3, |i, j| c(0.3 * i as f64 - 0.2, 0.1 * j as f64));
        let s = singular_values(&f).unwrap();
        let rel = (s.energy() - f.frobenius_norm_sq()).abs() / f.frobenius_norm_sq();
        assert!(rel < 1e-8);
    }

    #[test]
    fn eigenvalues_examples() {
        let f = CMatrix::diag(&[c(1.0, 0.0), c(0.0, 1.0)]);
        let ev = eigenvalues(&f).unwrap();
        let mut mods: Vec<f64> = ev.values().iter().map(|z| (z - c(1.0, 0.0)).norm()).collect();
        mods.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!(mods[0] < 1e-12);

        let mut rot = CMatrix::zeros(2, 2);
        rot.set(0, 1, c(1.0, 0.0));
        rot.set(1, 0, c(-1.0, 0.0));
        let ev = eigenvalues(&rot).unwrap();
        let mut ims: Vec<f64> = ev.values().iter().map(|z| z.im).collect();
        ims.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((ims[0] + 1.0).abs() < 1e-12 && (ims[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empirical_cdf_step_values() {
        let m = EmpiricalMeasure::new(vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(m.cdf(0.5), 0.0);
        assert_eq!(m.cdf(3.5), 1.0);
        assert!((m.cdf(2.0) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn empirical_stieltjes_examples() {
        let atom = EmpiricalMeasure::new(vec![0.0]).unwrap();
        let g = atom.stieltjes(c(0.0, 1.0)).unwrap();
        assert!((g - c(0.0, 1.0)).norm() < 1e-15); // 1/(0 - i) = i

        let sym = EmpiricalMeasure::new(vec![-1.0, 1.0]).unwrap();
        let g = sym.stieltjes(c(0.0, 1.0)).unwrap();
        assert!((g - c(0.0, 0.5)).norm() < 1e-15);

        assert!(atom.stieltjes(c(0.0, -1.0)).is_err());
    }

    #[test]
    fn stieltjes_maps_upper_half_plane_up_and_decays() {
        let m = EmpiricalMeasure::new(vec![0.3, 1.7, 2.2, 5.0]).unwrap();
        for &z in &[c(0.1, 0.5), c(-3.0, 2.0), c(4.0, 0.01)] {
            assert!(m.stieltjes(z).unwrap().im > 0.0);
        }
        let z = c(1000.0, 10.0);
        let g = m.stieltjes(z).unwrap();
        let err = (g + z.inv()).norm();
        assert!(err <= 10.0 * 25.0 / z.norm_sqr(), "err {err}");
    }

    #[test]
    fn symmetrized_measure_reflection_identity() {
        let s = SingularSpectrum {
            values: vec![2.5, 1.0, 0.25],
            dim: 3,
        };
        let m = EmpiricalMeasure::symmetrized_from_singular(&s);
        for &x in &[0.1, 0.25, 1.0, 2.0, 3.0] {
            let lhs = m.cdf(-x) + m.cdf_left(x);
            assert!((lhs - 1.0).abs() < 1e-15, "x = {x}");
        }
    }

    #[test]
    fn log_potential_examples() {
        let z3 = CMatrix::zeros(3, 3);
        let u = log_potential(&z3, c(1.0, 0.0)).unwrap();
        assert!(u.abs() < 1e-12);

        let e = std::f64::consts::E;
        let u = log_potential(&z3, c(e, 0.0)).unwrap();
        assert!((u + 1.0).abs() < 1e-12);

        let d = CMatrix::diag(&[c(2.0, 0.0), c(0.5, 0.0)]);
        let u = log_potential(&d, c(0.0, 0.0)).unwrap();
        assert!(u.abs() < 1e-12);

        assert!(matches!(
            log_potential(&CMatrix::identity(2), c(1.0, 0.0)),
            Err(Error::LogSingular)
        ));
    }

    #[test]
    fn log_potential_matches_determinant_route() {
        let n = 8;
        let f = CMatrix::from_fn(n, n, |i, j| c(((i * 5 + j * 3) % 7) as f64 * 0.2 - 0.5, 0.1 * ((i + j) % 3) as f64));
        let alpha = c(0.3, 0.1);
        let u = log_potential(&f, alpha).unwrap();
        let det = crate::linalg::LuFactors::new(&f.shift_diag(alpha).unwrap())
            .unwrap()
            .det();
        let via_det = -det.norm().ln() / n as f64;
        assert!((u - via_det).abs() < 1e-10);
    }

    #[test]
    fn diagnostics_identity_and_zero() {
        let diag = condition_diagnostics(&CMatrix::identity(4), c(0.0, 0.0), 2.0, 0.5, 0.5).unwrap();
        assert!((diag.c0 - 1.0).abs() < 1e-14);
        assert!((diag.c1_smallest - 1.0).abs() < 1e-14);
        assert_eq!(diag.c2_tail, 0.0);

        let z = condition_diagnostics(&CMatrix::zeros(4, 4), c(1.0, 0.0), 2.0, 0.5, 0.5).unwrap();
        assert!(z.c0.abs() < 1e-14);
        assert!((z.c1_smallest - 1.0).abs() < 1e-14);
        assert_eq!(z.c2_tail, 0.0);
    }

    #[test]
    fn hermitization_pairs_eigenvalues_with_singular_values() {
        let f = CMatrix::from_fn(3, 3, |i, j| c((i + j) as f64 * 0.4 - 0.6, (i as f64) * 0.3));
        let alpha = c(0.2, -0.1);
        let v = hermitize(&f, alpha).unwrap();
        assert!(v.hermitian_defect() <= 1e-12 * v.frobenius_norm());
        let ev = hermitian_eigenvalues(&v).unwrap();
        let s = singular_values(&f.shift_diag(alpha).unwrap()).unwrap();
        // Positive eigenvalues of V descending = singular values.
        let pos: Vec<f64> = ev.iter().rev().filter(|&&x| x > 0.0).cloned().collect();
        for (a, b) in pos.iter().zip(s.values()) {
            assert!((a - b).abs() < 1e-8 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn variance_probe_zero_for_identical_seeds() {
        let spec = FunctionSpec::new(
            FunctionKind::Product { m: 1 },
            DimensionProfile::square(16, 1).unwrap(),
        )
        .unwrap();
        let probe = variance_probe(
            &spec,
            EntryLaw::StandardComplexGaussian,
            c(0.0, 1.0),
            &[7, 7, 7, 7],
        )
        .unwrap();
        assert!(probe.variance < 1e-30);
    }

    #[test]
    fn variance_probe_invariant_under_seed_duplication() {
        let spec = FunctionSpec::new(
            FunctionKind::Product { m: 1 },
            DimensionProfile::square(12, 1).unwrap(),
        )
        .unwrap();
        let base: Vec<u64> = (0..8).collect();
        let doubled: Vec<u64> = base.iter().chain(base.iter()).cloned().collect();
        let v1 = variance_probe(&spec, EntryLaw::StandardRealGaussian, c(0.0, 1.0), &base)
            .unwrap()
            .variance;
        let v2 = variance_probe(&spec, EntryLaw::StandardRealGaussian, c(0.0, 1.0), &doubled)
            .unwrap()
            .variance;
        // Duplicating every seed scales the (n-1) denominator but not the
        // spread; the biased variances agree exactly.
        let b1 = v1 * (base.len() as f64 - 1.0) / base.len() as f64;
        let b2 = v2 * (doubled.len() as f64 - 1.0) / doubled.len() as f64;
        assert!((b1 - b2).abs() < 1e-18);
    }
}
