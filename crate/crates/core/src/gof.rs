//! Goodness of fit between empirical spectra and limit laws:
//! Kolmogorov-Smirnov, Levy distance, radial/angular tests for planar
//! spectra, moment matching and the two-sample universality test.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::limitlaws::LimitLaw;
use crate::spectra::{ComplexSpectrum, EmpiricalMeasure};

/// Asymptotic Kolmogorov quantile at the 1% level.
pub const KOLMOGOROV_Q99: f64 = 1.63;

/// Outcome of a statistical comparison.
#[derive(Clone, Debug, Serialize)]
pub struct GoFReport {
    pub statistic: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n2: Option<usize>,
    pub law: String,
    pub convention: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// Either a second empirical sample or a law CDF.
pub enum CdfTarget<'a> {
    Law(&'a LimitLaw),
    Empirical(&'a EmpiricalMeasure),
}

impl CdfTarget<'_> {
    fn cdf(&self, x: f64) -> f64 {
        match self {
            CdfTarget::Law(law) => law.cdf(x),
            CdfTarget::Empirical(m) => m.cdf(x),
        }
    }

    fn cdf_left(&self, x: f64) -> f64 {
        match self {
            CdfTarget::Law(law) => law.cdf(x),
            CdfTarget::Empirical(m) => m.cdf_left(x),
        }
    }

    fn jump_points(&self) -> &[f64] {
        match self {
            CdfTarget::Law(_) => &[],
            CdfTarget::Empirical(m) => m.points(),
        }
    }
}

/// Kolmogorov-Smirnov distance `sup_x |F(x) - G(x)|`.
///
/// The sup of the difference of two cadlag step/continuous CDFs is
/// attained arbitrarily close to a jump point of either side, comparing
/// right values with right values and left limits with left limits.
pub fn ks_distance(emp: &EmpiricalMeasure, target: &CdfTarget) -> f64 {
    let mut worst: f64 = 0.0;
    for &x in emp.points() {
        worst = worst
            .max((emp.cdf(x) - target.cdf(x)).abs())
            .max((emp.cdf_left(x) - target.cdf_left(x)).abs());
    }
    for &x in target.jump_points() {
        worst = worst
            .max((emp.cdf(x) - target.cdf(x)).abs())
            .max((emp.cdf_left(x) - target.cdf_left(x)).abs());
    }
    worst.min(1.0)
}

/// Levy distance by bisection on the band-inclusion condition, to 1e-6.
pub fn levy_distance(f: &EmpiricalMeasure, g: &CdfTarget) -> f64 {
    // Feasibility of F(x - eps) - eps <= G(x) <= F(x + eps) + eps for all
    // x, checked at the jumps of either side plus +-eps offsets, where the
    // inequalities are extremal.
    let feasible = |eps: f64| -> bool {
        let probes = f
            .points()
            .iter()
            .chain(g.jump_points().iter())
            .flat_map(|&x| [x - eps, x, x + eps])
            .collect::<Vec<_>>();
        for &x in &probes {
            let f_lo = f.cdf(x - eps) - eps;
            let f_hi = f.cdf(x + eps) + eps;
            let g_lo = g.cdf_left(x);
            let g_hi = g.cdf(x);
            if f_lo > g_hi + 1e-15 || g_lo > f_hi + 1e-15 {
                return false;
            }
        }
        true
    };
    if feasible(0.0) {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..20 {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Radial KS of a planar spectrum against a radially symmetric law.
pub fn radial_ks(spectrum: &ComplexSpectrum, law: &LimitLaw) -> Result<f64> {
    if !law.is_radial() {
        return Err(Error::Config(format!(
            "{} is not a radially symmetric planar law",
            law.name()
        )));
    }
    let radii = EmpiricalMeasure::new(spectrum.moduli())?;
    Ok(ks_distance(&radii, &CdfTarget::Law(law)))
}

/// KS of the normalized eigenvalue arguments against the uniform law; the
/// rotational-invariance companion of [`radial_ks`].
pub fn angular_uniformity_ks(spectrum: &ComplexSpectrum) -> Result<f64> {
    let args: Vec<f64> = spectrum
        .arguments()
        .iter()
        .map(|a| (a + std::f64::consts::PI) / (2.0 * std::f64::consts::PI))
        .collect();
    let emp = EmpiricalMeasure::new(args)?;
    let n = emp.len() as f64;
    let mut worst: f64 = 0.0;
    for (i, &x) in emp.points().iter().enumerate() {
        let t = x.clamp(0.0, 1.0);
        worst = worst
            .max(((i + 1) as f64 / n - t).abs())
            .max((i as f64 / n - t).abs());
    }
    Ok(worst)
}

/// Relative errors of the first K empirical moments against the law.
///
/// Divergent law moments truncate the report.
pub fn moment_match(emp: &EmpiricalMeasure, law: &LimitLaw, k_max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        match law.moment(k) {
            Ok(mk) if mk != 0.0 => out.push((emp.moment(k) - mk).abs() / mk.abs()),
            _ => break,
        }
    }
    out
}

/// Two-sample KS with the asymptotic threshold
/// `q * sqrt((n1 + n2) / (n1 n2))`.
pub fn universality_test(
    a: &EmpiricalMeasure,
    b: &EmpiricalMeasure,
    quantile: f64,
    law_label: &str,
    seed: Option<u64>,
) -> GoFReport {
    let value = ks_distance(a, &CdfTarget::Empirical(b));
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let threshold = quantile * ((n1 + n2) / (n1 * n2)).sqrt();
    GoFReport {
        statistic: "two-sample-ks".into(),
        value,
        threshold,
        pass: value <= threshold,
        n: a.len(),
        n2: Some(b.len()),
        law: law_label.into(),
        convention: "squared-singular".into(),
        seed,
    }
}
