//! Master-system solver for the Stieltjes transform of shifted
//! hermitizations, its z -> 0 limit, and the radial psi/kappa field that
//! yields the planar eigenvalue density.
//!
//! On the imaginary axis z = iy the system
//!
//! ```text
//! w = iy + Rtilde_alpha(-g)/g,
//! g = (1 + w g) S_V(-(1 + w g))
//! ```
//!
//! reduces to real scalar equations. Writing kappa = -i g, psi = -w g,
//! beta = 1 - psi and u = beta + y xi(beta) with xi(x) = i (-x) S_V(-x),
//! the pair (g, w) solves the system iff
//!
//! ```text
//! PSI(beta) = u^2 - u + |alpha|^2 xi(beta)^2 = 0,
//! ```
//!
//! and the square-root branch sign is sign(2u - 1). The solver tracks the
//! root beta by continuation: in y down to zero for the shifted Stieltjes
//! transform, and in the radius r = |alpha| for the psi/kappa field. The
//! branch flips exactly where u crosses 1/2, i.e. where
//! 1 + 4 |alpha|^2 g^2 passes through zero; tracking beta continuously
//! subsumes the sign bookkeeping.

use num_complex::Complex64;
use rayon::prelude::*;
use std::sync::Arc;

use crate::ensembles::{assemble, sample_tuple, EntryLaw, FunctionSpec};
use crate::error::{Error, Result};
use crate::freeprob::{Grading, TransformKind, TransformSeries};
use crate::spectra::singular_values;

/// Symmetric-branch S-transform of a singular-value symmetrization,
/// carried as the real function `xi(x) = i (-x) S_V(-x)` on [0, 1].
#[derive(Clone)]
pub struct SvTransform {
    xi: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    name: String,
    two_point: bool,
}

impl std::fmt::Debug for SvTransform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SvTransform")
            .field("name", &self.name)
            .field("two_point", &self.two_point)
            .finish()
    }
}

impl SvTransform {
    /// Build from the xi function of a named law.
    pub fn from_xi(
        name: impl Into<String>,
        xi: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        SvTransform {
            xi: Arc::new(xi),
            name: name.into(),
            two_point: false,
        }
    }

    /// The two-point law T(a); flagged so the z -> 0 limit refuses it.
    pub fn two_point(a: f64) -> Self {
        SvTransform {
            // S(z) = sqrt((1+z)/z)/a gives xi(x) = sqrt(x(1-x))/a.
            xi: Arc::new(move |x: f64| (x.clamp(0.0, 1.0) * (1.0 - x).max(0.0)).sqrt() / a),
            name: format!("two-point({a})"),
            two_point: true,
        }
    }

    /// Series-derived transform (symmetric branch).
    pub fn from_series(name: impl Into<String>, series: &TransformSeries) -> Result<Self> {
        if series.kind != TransformKind::S || series.grading != Grading::SqrtZ {
            return Err(Error::Domain(
                "SvTransform needs a symmetric-branch S-series".into(),
            ));
        }
        let s = series.clone();
        Ok(SvTransform {
            xi: Arc::new(move |x: f64| {
                let x = x.clamp(0.0, 1.0);
                if x == 0.0 {
                    return 0.0;
                }
                let z = Complex64::new(-x, 0.0);
                let v = Complex64::new(0.0, -x) * s.eval(z);
                v.re
            }),
            name: name.into(),
            two_point: false,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_two_point(&self) -> bool {
        self.two_point
    }

    /// `xi(x) = i (-x) S_V(-x)`, clamped to the domain [0, 1].
    pub fn xi(&self, x: f64) -> f64 {
        (self.xi)(x.clamp(0.0, 1.0))
    }

    /// `S_V(z)` for z in (-1, 0): purely imaginary, `i xi(-z)/(-z)`.
    pub fn s_eval(&self, z: f64) -> Complex64 {
        let x = (-z).clamp(f64::MIN_POSITIVE, 1.0);
        Complex64::new(0.0, self.xi(x) / x)
    }

    /// Nonnegativity and finiteness of xi on a sample of (0, 1).
    pub fn validate(&self) -> Result<()> {
        for i in 1..64 {
            let x = i as f64 / 64.0;
            let v = self.xi(x);
            if !v.is_finite() && x < 0.99 {
                return Err(Error::Domain(format!(
                    "xi({x}) is not finite for {}",
                    self.name
                )));
            }
            if v < -1e-12 {
                return Err(Error::Domain(format!(
                    "xi({x}) = {v} < 0 for {}; not an S_V branch",
                    self.name
                )));
            }
        }
        Ok(())
    }
}

/// One accepted continuation point of the master system at z = iy.
#[derive(Clone, Copy, Debug)]
pub struct GSample {
    pub y: f64,
    pub g: Complex64,
    pub w: Complex64,
    /// Sign of the square root in Rtilde_alpha(-g), from 2u - 1.
    pub branch: i8,
    pub psi: f64,
    pub kappa: f64,
}

/// Continuation trace of g(iy, alpha) along a descending y-path.
#[derive(Clone, Debug)]
pub struct ShiftedStieltjes {
    pub alpha: Complex64,
    pub samples: Vec<GSample>,
}

/// Limit data at z = 0.
#[derive(Clone, Copy, Debug)]
pub struct GLimit {
    pub g0: Complex64,
    pub wg0: f64,
    pub psi: f64,
    pub kappa: f64,
}

const ROOT_EVAL_BUDGET: usize = 10_000;
const ROOT_TOL: f64 = 1e-14;

/// Roots of `f(sigmoid(t))` for t in [tau_lo, tau_hi], by sign scan plus
/// bisection in the logit variable (resolves both endpoints of (0,1)).
fn scan_roots(f: &impl Fn(f64) -> f64, tau_lo: f64, tau_hi: f64, points: usize) -> Vec<f64> {
    let sigmoid = |t: f64| 1.0 / (1.0 + (-t).exp());
    let mut roots = Vec::new();
    let mut prev_t = tau_lo;
    let mut prev_v = f(sigmoid(prev_t));
    for i in 1..=points {
        let t = tau_lo + (tau_hi - tau_lo) * i as f64 / points as f64;
        let v = f(sigmoid(t));
        if prev_v.is_finite()
            && v.is_finite()
            && prev_v != 0.0
            && v != 0.0
            && prev_v.signum() != v.signum()
        {
            let (mut a, mut b) = (prev_t, t);
            let mut fa = prev_v;
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                let fm = f(sigmoid(mid));
                if fm == 0.0 {
                    a = mid;
                    b = mid;
                    break;
                }
                if fa.signum() == fm.signum() {
                    a = mid;
                    fa = fm;
                } else {
                    b = mid;
                }
                if (b - a).abs() < 1e-15 {
                    break;
                }
            }
            roots.push(sigmoid(0.5 * (a + b)));
        } else if v == 0.0 {
            roots.push(sigmoid(t));
        }
        prev_t = t;
        prev_v = v;
    }
    roots
}

/// Track a root of `f` near `prev` (or the large-u branch if `prev` is
/// None); also reports whether other admissible roots were seen.
fn track_root(f: &impl Fn(f64) -> f64, prev: Option<f64>) -> (Option<f64>, bool) {
    let logit = |b: f64| (b / (1.0 - b)).ln();
    if let Some(p) = prev {
        let t0 = logit(p.clamp(1e-15, 1.0 - 1e-15));
        let local = scan_roots(f, t0 - 4.0, t0 + 4.0, 320);
        if !local.is_empty() {
            let best = *local
                .iter()
                .min_by(|a, b| ((*a - p).abs()).partial_cmp(&((*b - p).abs())).unwrap())
                .unwrap();
            let multiple = local.iter().any(|&r| (r - best).abs() > 1e-6);
            return (Some(best), multiple);
        }
    }
    let global = scan_roots(f, -36.0, 36.0, 4096);
    match prev {
        Some(p) => {
            let best = global
                .iter()
                .cloned()
                .min_by(|a, b| ((a - p).abs()).partial_cmp(&((b - p).abs())).unwrap());
            let multiple = match best {
                Some(b) => global.iter().any(|&r| (r - b).abs() > 1e-6),
                None => false,
            };
            (best, multiple)
        }
        None => {
            let multiple = global.len() > 1;
            (global.last().cloned(), multiple)
        }
    }
}

/// Master-system scalar residual at spectral height y.
fn master_residual(sv: &SvTransform, a: f64, y: f64, beta: f64) -> f64 {
    let xi = sv.xi(beta);
    let u = beta + y * xi;
    u * u - u + a * a * xi * xi
}

fn sample_from_beta(sv: &SvTransform, y: f64, beta: f64) -> GSample {
    let kappa = sv.xi(beta);
    let u = beta + y * kappa;
    let branch: i8 = if 2.0 * u - 1.0 >= 0.0 { 1 } else { -1 };
    let g = Complex64::new(0.0, kappa);
    let w = if kappa > 0.0 {
        Complex64::new(0.0, y + (1.0 - u) / kappa)
    } else {
        Complex64::new(0.0, f64::INFINITY)
    };
    GSample {
        y,
        g,
        w,
        branch,
        psi: 1.0 - beta,
        kappa,
    }
}

fn box_check(sample: &GSample, a: f64) -> Result<()> {
    let tol = 1e-9;
    let kappa = sample.kappa;
    if kappa < -tol || kappa > 1.0 / (2.0 * a) + tol {
        return Err(Error::Branch(format!(
            "-i g = {kappa} escaped [0, 1/(2|alpha|)] at y = {}",
            sample.y
        )));
    }
    let beta = 1.0 - sample.psi;
    if !(-tol..=1.0 + tol).contains(&beta) {
        return Err(Error::Branch(format!(
            "1 + w g = {beta} escaped (0, 1) at y = {}",
            sample.y
        )));
    }
    Ok(())
}

/// Geometric continuation schedule from `y_start` down to `y_end`.
fn descending_schedule(y_start: f64, y_end: f64) -> Vec<f64> {
    let mut ys = Vec::new();
    let mut y = y_start;
    while y > y_end * (1.0 + 1e-12) {
        ys.push(y);
        y *= 0.5;
    }
    ys.push(y_end);
    ys
}

/// Solve the master system along a continuation down to `y`, returning the
/// whole accepted trace (the last sample is the requested height).
pub fn solve_g_trace(sv: &SvTransform, alpha: Complex64, y: f64) -> Result<ShiftedStieltjes> {
    if alpha.norm() == 0.0 {
        return Err(Error::Domain("solve_g needs alpha != 0".into()));
    }
    if y <= 0.0 {
        return Err(Error::Domain(format!(
            "spectral height y = {y} must be positive"
        )));
    }
    sv.validate()?;
    let a = alpha.norm();
    let y_start = (8.0 * a.max(1.0)).max(2.0 * y);
    let schedule = descending_schedule(y_start, y);

    let mut samples = Vec::with_capacity(schedule.len());
    let mut prev: Option<f64> = None;
    let mut evals = 0usize;
    for &yk in &schedule {
        let f = |b: f64| master_residual(sv, a, yk, b);
        let (root, _multiple) = track_root(&f, prev);
        evals += 1;
        if evals > ROOT_EVAL_BUDGET {
            return Err(Error::NonConvergence {
                iterations: evals,
                residual: f64::NAN,
            });
        }
        // Outside the support the branch collapses onto the trivial root
        // beta = 0 as y falls; once the tracked root drops below the scan
        // floor, carry it as collapsed instead of failing.
        let collapsed = root.is_none() && prev.is_some_and(|p| p < 1e-12);
        let beta = if collapsed {
            prev.unwrap()
        } else {
            root.ok_or_else(|| Error::NonConvergence {
                iterations: evals,
                residual: prev.map_or(f64::NAN, |p| master_residual(sv, a, yk, p).abs()),
            })?
        };
        let res = master_residual(sv, a, yk, beta).abs();
        if res > 1e-10 && !collapsed {
            return Err(Error::NonConvergence {
                iterations: evals,
                residual: res,
            });
        }
        let sample = sample_from_beta(sv, yk, beta);
        box_check(&sample, a)?;
        samples.push(sample);
        prev = Some(beta);
    }
    Ok(ShiftedStieltjes { alpha, samples })
}

/// The master-system solution (g, w) at z = iy.
pub fn solve_g(sv: &SvTransform, alpha: Complex64, y: f64) -> Result<GSample> {
    let trace = solve_g_trace(sv, alpha, y)?;
    Ok(*trace.samples.last().unwrap())
}

/// The z -> 0 limit (g(0, alpha), (wg)(0, alpha)) by continuation down to
/// y = 1e-6 and quadratic extrapolation of the geometric tail.
pub fn limit_g0(sv: &SvTransform, alpha: Complex64) -> Result<GLimit> {
    if sv.is_two_point() {
        return Err(Error::Domain(
            "z -> 0 limit is undefined for a two-point singular distribution".into(),
        ));
    }
    let y_min = 1e-6;
    let trace = solve_g_trace(sv, alpha, y_min)?;
    let tail: Vec<&GSample> = trace.samples.iter().rev().take(3).collect();
    if tail.len() < 3 {
        return Err(Error::Domain(
            "continuation too short for extrapolation".into(),
        ));
    }

    // Oscillation guard: the tail increments must not grow.
    let d1 = (tail[0].kappa - tail[1].kappa).abs();
    let d2 = (tail[1].kappa - tail[2].kappa).abs();
    if d1 > 4.0 * d2 + 1e-12 {
        let lo = tail.iter().map(|s| s.kappa).fold(f64::INFINITY, f64::min);
        let hi = tail.iter().map(|s| s.kappa).fold(f64::NEG_INFINITY, f64::max);
        return Err(Error::OscillatingLimit { lo, hi });
    }

    // Quadratic Lagrange extrapolation to y = 0 through the actual tail
    // heights (the final continuation step is not exactly geometric).
    let ys: Vec<f64> = tail.iter().map(|s| s.y).collect();
    let extrap = |v: [f64; 3]| -> f64 {
        let mut acc = 0.0;
        for i in 0..3 {
            let mut weight = 1.0;
            for j in 0..3 {
                if j != i {
                    weight *= -ys[j] / (ys[i] - ys[j]);
                }
            }
            acc += v[i] * weight;
        }
        acc
    };
    let kappa0 = extrap([tail[0].kappa, tail[1].kappa, tail[2].kappa]).max(0.0);
    let psi0 = extrap([tail[0].psi, tail[1].psi, tail[2].psi]).clamp(0.0, 1.0);

    // Residual of the limiting equation (mainequation at y = 0).
    let a = alpha.norm();
    let res = master_residual(sv, a, 0.0, 1.0 - psi0).abs();
    if res > 1e-8 {
        return Err(Error::NonConvergence {
            iterations: trace.samples.len(),
            residual: res,
        });
    }
    Ok(GLimit {
        g0: Complex64::new(0.0, kappa0),
        wg0: -psi0,
        psi: psi0,
        kappa: kappa0,
    })
}

/// Radial grid for the psi/kappa field.
#[derive(Clone, Debug)]
pub struct RadialGrid {
    pub r0: f64,
    pub r_max: f64,
    pub step: f64,
}

impl Default for RadialGrid {
    fn default() -> Self {
        RadialGrid {
            r0: 1e-3,
            r_max: 1.5,
            step: 1e-3,
        }
    }
}

impl RadialGrid {
    pub fn radii(&self) -> Vec<f64> {
        let n = ((self.r_max - self.r0) / self.step).round() as usize + 1;
        (0..n).map(|i| self.r0 + self.step * i as f64).collect()
    }
}

/// Radial solution of `psi (1 - psi) = r^2 kappa^2`, `kappa = xi(1 - psi)`.
#[derive(Clone, Debug)]
pub struct PsiKappaField {
    pub r: Vec<f64>,
    pub psi: Vec<f64>,
    pub kappa: Vec<f64>,
    /// Radii where the nontrivial branch entered or left (the finite set A).
    pub transitions: Vec<f64>,
    /// Radii at which extra admissible roots were seen.
    pub multiplicity: Vec<f64>,
    pub step: f64,
}

/// Solve the radial system by homotopy in r, starting at `r0` where the
/// nontrivial branch is guaranteed, and switching to the trivial solution
/// `(psi, kappa) = (1, 0)` where the branch exits [0, 1].
pub fn solve_psi_kappa(sv: &SvTransform, grid: &RadialGrid) -> Result<PsiKappaField> {
    if grid.r0 > 1e-3 {
        return Err(Error::Config(format!(
            "radial grid must start near zero (r0 = {} > 1e-3)",
            grid.r0
        )));
    }
    if grid.step <= 0.0 || grid.r_max <= grid.r0 {
        return Err(Error::Config("invalid radial grid".into()));
    }
    sv.validate()?;
    let radii = grid.radii();
    let mut psi = Vec::with_capacity(radii.len());
    let mut kappa = Vec::with_capacity(radii.len());
    let mut transitions = Vec::new();
    let mut multiplicity = Vec::new();

    let mut prev: Option<f64> = None;
    let mut on_branch = false;
    for (idx, &r) in radii.iter().enumerate() {
        let f = |b: f64| b * (1.0 - b) - r * r * sv.xi(b) * sv.xi(b);
        let (root, multiple) = track_root(&f, prev);
        match root {
            Some(beta) if beta > ROOT_TOL => {
                if !on_branch {
                    if idx > 0 {
                        transitions.push(r);
                    }
                    on_branch = true;
                }
                if multiple {
                    multiplicity.push(r);
                }
                psi.push(1.0 - beta);
                kappa.push(sv.xi(beta));
                prev = Some(beta);
            }
            _ => {
                if idx == 0 {
                    return Err(Error::Domain(format!(
                        "no nontrivial root at r0 = {r}; xi is inconsistent for {}",
                        sv.name()
                    )));
                }
                if on_branch {
                    transitions.push(r);
                    on_branch = false;
                }
                psi.push(1.0);
                kappa.push(0.0);
                prev = None;
            }
        }
    }
    Ok(PsiKappaField {
        r: radii,
        psi,
        kappa,
        transitions,
        multiplicity,
        step: grid.step,
    })
}

/// Radial density table produced from a psi field.
#[derive(Clone, Debug)]
pub struct RadialDensity {
    pub r: Vec<f64>,
    pub f: Vec<f64>,
    /// Grid points whose curvature estimate exceeded the resolution bound.
    pub resolution_warnings: usize,
    mass: f64,
}

impl RadialDensity {
    /// Total mass `integral 2 pi r f(r) dr` over the table range.
    ///
    /// Since `2 pi r f = psi'`, the integral telescopes exactly to
    /// `psi(r_max) - psi(r_0)`, which is how it is evaluated; a trapezoid
    /// over the tabulated values would lose the integrable spike that the
    /// product laws carry at r = 0.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn density_at(&self, r: f64) -> f64 {
        if r < self.r[0] || r > *self.r.last().unwrap() {
            return 0.0;
        }
        let idx = self.r.partition_point(|&p| p <= r).min(self.r.len() - 1);
        if idx == 0 {
            return self.f[0];
        }
        let (x0, x1) = (self.r[idx - 1], self.r[idx]);
        let t = if x1 > x0 { (r - x0) / (x1 - x0) } else { 0.0 };
        self.f[idx - 1] * (1.0 - t) + self.f[idx] * t
    }
}

/// `f(r) = psi'(r) / (2 pi r)` by central differences, one-sided at the
/// ends and at the recorded transition radii.
pub fn density_from_psi(field: &PsiKappaField) -> Result<RadialDensity> {
    let n = field.r.len();
    if n < 3 {
        return Err(Error::Domain("psi field too short to differentiate".into()));
    }
    let h = field.step;
    for i in 1..n {
        if ((field.r[i] - field.r[i - 1]) - h).abs() > 1e-9 * h.max(1.0) {
            return Err(Error::Domain("psi field grid must be uniform".into()));
        }
    }
    // Transition radii snap to grid indices; stencils never straddle them.
    // The boundary point itself differentiates one-sided toward whichever
    // side carries the nontrivial branch (psi is continuous, psi' jumps).
    let mut cut = vec![false; n];
    for &t in &field.transitions {
        let idx = ((t - field.r[0]) / h).round() as usize;
        if idx < n {
            cut[idx] = true;
        }
    }
    let branch_left = |i: usize| i > 0 && field.psi[i - 1] < 1.0 - 1e-12;
    let branch_right = |i: usize| i + 1 < n && field.psi[i + 1] < 1.0 - 1e-12;
    let mut f = Vec::with_capacity(n);
    let mut warnings = 0usize;
    for i in 0..n {
        let dpsi = if cut[i] {
            if branch_left(i) {
                (field.psi[i] - field.psi[i - 1]) / h
            } else if branch_right(i) {
                (field.psi[i + 1] - field.psi[i]) / h
            } else {
                0.0
            }
        } else {
            let left_ok = i > 0 && !cut[i];
            let right_ok = i + 1 < n;
            match (left_ok, right_ok) {
                (true, true) => (field.psi[i + 1] - field.psi[i - 1]) / (2.0 * h),
                (true, false) => (field.psi[i] - field.psi[i - 1]) / h,
                (false, true) => (field.psi[i + 1] - field.psi[i]) / h,
                (false, false) => 0.0,
            }
        };
        let val = (dpsi / (2.0 * std::f64::consts::PI * field.r[i])).max(0.0);
        if !cut[i] && i > 0 && i + 1 < n {
            let curv = (field.psi[i + 1] - 2.0 * field.psi[i] + field.psi[i - 1]).abs();
            if curv > 1e-2 * val.max(1e-12) * h {
                warnings += 1;
            }
        }
        f.push(val);
    }
    Ok(RadialDensity {
        r: field.r.clone(),
        f,
        resolution_warnings: warnings,
        mass: field.psi[n - 1] - field.psi[0],
    })
}

/// Monte Carlo configuration for the log-transform gradient probe.
#[derive(Clone, Debug)]
pub struct PhiProbe {
    pub spec: FunctionSpec,
    pub law: EntryLaw,
    pub trials: usize,
    pub seed: u64,
    /// Finite-difference step in the real direction.
    pub du: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct PhiGradientReport {
    pub predicted: f64,
    pub measured: f64,
    pub residual: f64,
    pub trials_used: usize,
    pub discarded: usize,
}

/// Compare the finite-difference d/du of the empirical logarithmic
/// transform against `(u/|alpha|^2) psi(alpha)`.
pub fn phi_gradient_check(
    sv: &SvTransform,
    alpha: Complex64,
    probe: &PhiProbe,
) -> Result<PhiGradientReport> {
    if alpha.norm() == 0.0 {
        return Err(Error::Domain("phi gradient needs alpha != 0".into()));
    }
    let limit = limit_g0(sv, alpha)?;
    let predicted = alpha.re / alpha.norm_sqr() * limit.psi;

    let du = probe.du;
    let results: Vec<Option<(f64, f64)>> = (0..probe.trials)
        .into_par_iter()
        .map(|t| -> Option<(f64, f64)> {
            let tuple =
                sample_tuple(&probe.spec, probe.law, probe.seed.wrapping_add(t as u64)).ok()?;
            let f = assemble(&probe.spec, &tuple).ok()?;
            let phi_at = |shift: Complex64| -> Option<f64> {
                let s = singular_values(&f.shift_diag(shift).ok()?).ok()?;
                if s.smallest() < 1e-300 {
                    return None;
                }
                Some(s.values().iter().map(|v| v.ln()).sum::<f64>() / s.dim() as f64)
            };
            let plus = phi_at(alpha + Complex64::new(du, 0.0))?;
            let minus = phi_at(alpha - Complex64::new(du, 0.0))?;
            Some((plus, minus))
        })
        .collect();

    let used: Vec<(f64, f64)> = results.iter().flatten().cloned().collect();
    let discarded = probe.trials - used.len();
    if used.is_empty() {
        return Err(Error::Domain("all phi-gradient trials were discarded".into()));
    }
    let mean_plus: f64 = used.iter().map(|(p, _)| p).sum::<f64>() / used.len() as f64;
    let mean_minus: f64 = used.iter().map(|(_, m)| m).sum::<f64>() / used.len() as f64;
    let measured = (mean_plus - mean_minus) / (2.0 * du);
    Ok(PhiGradientReport {
        predicted,
        measured,
        residual: (measured - predicted).abs(),
        trials_used: used.len(),
        discarded,
    })
}
