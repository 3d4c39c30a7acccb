//! Free additive convolution by subordination.
//!
//! For measures mu, nu with Stieltjes transforms available, the reciprocal
//! Cauchy transforms F = -1/g admit unique subordinating functions Z1, Z2
//! with F_{mu + nu}(z) = F_mu(Z1(z)) = F_nu(Z2(z)) and
//! z = Z1(z) + Z2(z) - F(z). The fixed point is solved per grid point and
//! the density recovered by Stieltjes inversion at finite eta.

use num_complex::Complex64;

use super::MomentSource;
use crate::error::{Error, Result};
use crate::spectra::EmpiricalMeasure;

/// Stieltjes transform `g(z) = integral 1/(t - z) dmu(t)`, `Im z > 0`.
pub trait StieltjesEval {
    fn stieltjes(&self, z: Complex64) -> Complex64;

    /// Reciprocal Cauchy transform `F(z) = -1/g(z)`.
    fn reciprocal_cauchy(&self, z: Complex64) -> Complex64 {
        -self.stieltjes(z).inv()
    }
}

/// Unit atom at a point.
#[derive(Clone, Copy, Debug)]
pub struct PointMass(pub f64);

impl StieltjesEval for PointMass {
    fn stieltjes(&self, z: Complex64) -> Complex64 {
        (Complex64::new(self.0, 0.0) - z).inv()
    }
}

impl MomentSource for PointMass {
    fn moment(&self, k: usize) -> Result<f64> {
        Ok(self.0.powi(k as i32))
    }
}

/// Centered semicircle law with the given variance (support `[-2s, 2s]`).
#[derive(Clone, Copy, Debug)]
pub struct Semicircle {
    pub variance: f64,
}

impl Semicircle {
    pub fn density(&self, x: f64) -> f64 {
        let s2 = self.variance;
        let r2 = 4.0 * s2 - x * x;
        if r2 <= 0.0 {
            0.0
        } else {
            r2.sqrt() / (2.0 * std::f64::consts::PI * s2)
        }
    }
}

impl StieltjesEval for Semicircle {
    fn stieltjes(&self, z: Complex64) -> Complex64 {
        let s2 = self.variance;
        let mut w = (z * z - 4.0 * s2).sqrt();
        // Branch with Im g > 0 on the upper half-plane.
        if (w.im * z.im) < 0.0 {
            w = -w;
        }
        (w - z) / (2.0 * s2)
    }
}

impl MomentSource for Semicircle {
    fn moment(&self, k: usize) -> Result<f64> {
        if k % 2 == 1 {
            return Ok(0.0);
        }
        let h = k / 2;
        // Catalan number C_h times variance^h.
        let mut cat = 1.0f64;
        for i in 0..h {
            cat = cat * 2.0 * (2.0 * i as f64 + 1.0) / (i as f64 + 2.0);
        }
        Ok(cat * self.variance.powi(h as i32))
    }
}

/// The symmetric two-point law `T(a) = (delta_a + delta_-a) / 2`.
#[derive(Clone, Copy, Debug)]
pub struct TwoPointLaw(pub f64);

impl StieltjesEval for TwoPointLaw {
    fn stieltjes(&self, z: Complex64) -> Complex64 {
        -z / (z * z - Complex64::new(self.0 * self.0, 0.0))
    }
}

impl MomentSource for TwoPointLaw {
    fn moment(&self, k: usize) -> Result<f64> {
        Ok(if k % 2 == 0 { self.0.powi(k as i32) } else { 0.0 })
    }
}

impl StieltjesEval for EmpiricalMeasure {
    fn stieltjes(&self, z: Complex64) -> Complex64 {
        EmpiricalMeasure::stieltjes(self, z).expect("Im z > 0 required")
    }
}

/// Uniform-grid density table with trapezoid quadrature.
#[derive(Clone, Debug, PartialEq)]
pub struct GridMeasure {
    x: Vec<f64>,
    f: Vec<f64>,
}

impl GridMeasure {
    pub fn new(x: Vec<f64>, f: Vec<f64>) -> Result<Self> {
        if x.len() != f.len() || x.len() < 2 {
            return Err(Error::Domain("grid measure needs matching x/f of length >= 2".into()));
        }
        if f.iter().any(|&v| v < 0.0 || !v.is_finite()) {
            return Err(Error::Domain("grid density must be nonnegative and finite".into()));
        }
        let gm = GridMeasure { x, f };
        let mass = gm.mass();
        if (mass - 1.0).abs() > 1e-3 {
            return Err(Error::Domain(format!("grid measure mass {mass} outside 1 +- 1e-3")));
        }
        Ok(gm)
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn density(&self) -> &[f64] {
        &self.f
    }

    pub fn mass(&self) -> f64 {
        let mut acc = 0.0;
        for i in 1..self.x.len() {
            acc += 0.5 * (self.f[i] + self.f[i - 1]) * (self.x[i] - self.x[i - 1]);
        }
        acc
    }

    /// CDF by cumulative trapezoid, clamped to [0, 1].
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.x[0] {
            return 0.0;
        }
        let mut acc = 0.0;
        for i in 1..self.x.len() {
            if self.x[i] <= x {
                acc += 0.5 * (self.f[i] + self.f[i - 1]) * (self.x[i] - self.x[i - 1]);
            } else {
                let h = x - self.x[i - 1];
                let w = self.x[i] - self.x[i - 1];
                let fm = self.f[i - 1] + (self.f[i] - self.f[i - 1]) * (h / w);
                acc += 0.5 * (self.f[i - 1] + fm) * h;
                break;
            }
        }
        acc.clamp(0.0, 1.0)
    }

    pub fn density_at(&self, x: f64) -> f64 {
        if x < self.x[0] || x > *self.x.last().unwrap() {
            return 0.0;
        }
        let idx = self.x.partition_point(|&p| p <= x).min(self.x.len() - 1);
        if idx == 0 {
            return self.f[0];
        }
        let (x0, x1) = (self.x[idx - 1], self.x[idx]);
        let t = if x1 > x0 { (x - x0) / (x1 - x0) } else { 0.0 };
        self.f[idx - 1] * (1.0 - t) + self.f[idx] * t
    }
}

impl StieltjesEval for GridMeasure {
    fn stieltjes(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 1..self.x.len() {
            let h = self.x[i] - self.x[i - 1];
            let a = self.f[i - 1] * (Complex64::new(self.x[i - 1], 0.0) - z).inv();
            let b = self.f[i] * (Complex64::new(self.x[i], 0.0) - z).inv();
            acc += 0.5 * (a + b) * h;
        }
        acc
    }
}

impl MomentSource for GridMeasure {
    fn moment(&self, k: usize) -> Result<f64> {
        let mut acc = 0.0;
        for i in 1..self.x.len() {
            let h = self.x[i] - self.x[i - 1];
            let a = self.f[i - 1] * self.x[i - 1].powi(k as i32);
            let b = self.f[i] * self.x[i].powi(k as i32);
            acc += 0.5 * (a + b) * h;
        }
        Ok(acc)
    }
}

/// Evaluation grid for [`free_add`].
#[derive(Clone, Debug)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub points: usize,
    /// Stieltjes inversion height.
    pub eta: f64,
    /// One Richardson step in eta (evaluates at eta and eta/2).
    pub richardson: bool,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            x_min: -4.0,
            x_max: 4.0,
            points: 801,
            eta: 1e-3,
            richardson: true,
        }
    }
}

const FP_TOL: f64 = 1e-12;
const FP_MAX_ITER: usize = 10_000;

/// Subordination fixed point at one spectral parameter z; returns
/// `g_{mu + nu}(z)` and the subordinator `Z1`.
fn subordinate(
    mu: &dyn StieltjesEval,
    nu: &dyn StieltjesEval,
    z: Complex64,
    warm: Option<Complex64>,
) -> Result<(Complex64, Complex64)> {
    let h_mu = |w: Complex64| mu.reciprocal_cauchy(w) - w;
    let h_nu = |w: Complex64| nu.reciprocal_cauchy(w) - w;

    let mut z1 = warm.unwrap_or(z);
    if z1.im <= 0.0 {
        z1 = z;
    }
    let mut damping = 1.0;
    let mut last_res = f64::INFINITY;
    for _ in 0..FP_MAX_ITER {
        let t = z + h_nu(z + h_mu(z1));
        let step = t - z1;
        let res = step.norm();
        if res > last_res && damping > 0.5 {
            damping = 0.5;
        }
        last_res = res;
        let mut next = z1 + damping * step;
        if next.im <= 0.0 {
            // F maps C+ to C+; a transient excursion is pulled back.
            next = Complex64::new(next.re, z.im);
        }
        let moved = (next - z1).norm();
        z1 = next;
        if moved < FP_TOL {
            let f = mu.reciprocal_cauchy(z1);
            return Ok((-f.inv(), z1));
        }
    }
    Err(Error::NonConvergence {
        iterations: FP_MAX_ITER,
        residual: last_res,
    })
}

/// Density of `mu (+) nu` (free additive convolution) on a uniform grid.
pub fn free_add(
    mu: &dyn StieltjesEval,
    nu: &dyn StieltjesEval,
    grid: &GridSpec,
) -> Result<GridMeasure> {
    if grid.points < 2 || grid.x_max <= grid.x_min || grid.eta <= 0.0 {
        return Err(Error::Config("invalid free_add grid".into()));
    }
    let n = grid.points;
    let step = (grid.x_max - grid.x_min) / (n - 1) as f64;
    let xs: Vec<f64> = (0..n).map(|i| grid.x_min + step * i as f64).collect();

    let densities_at = |eta: f64| -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(n);
        let mut warm = None;
        for &x in &xs {
            let z = Complex64::new(x, eta);
            let (g, z1) = subordinate(mu, nu, z, warm)?;
            warm = Some(z1);
            out.push(g.im / std::f64::consts::PI);
        }
        Ok(out)
    };

    let mut f = densities_at(grid.eta)?;
    if grid.richardson {
        let fine = densities_at(grid.eta / 2.0)?;
        for i in 0..n {
            f[i] = 2.0 * fine[i] - f[i];
        }
    }
    for v in f.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    GridMeasure::new(xs, f)
}
