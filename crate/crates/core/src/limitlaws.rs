//! Catalog of closed-form and equation-defined limit distributions.
//!
//! Singular-value laws live on the squared-singular-value axis (the
//! `s_j^2 <= x` convention); eigenvalue laws are radially symmetric
//! planar densities reported through their radial profile `f(r)` and
//! radial CDF (which equals the field `psi(r)`).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::freeprob::{MomentSource, StieltjesEval};
use crate::solver::SvTransform;

const PI: f64 = std::f64::consts::PI;

#[derive(Clone, Debug, PartialEq)]
pub enum LawKind {
    MarchenkoPastur { y: f64 },
    FussCatalan { m: u32 },
    ProductRectSv { ratios: Vec<f64> },
    SphericalSv,
    ProductSphericalSv { m: u32 },
    CircularEv,
    ProductEv { m: u32 },
    ProductRectEv { ratios: Vec<f64> },
    SphericalEv,
    ProductSphericalEv { m: u32 },
}

/// A limit law with its eagerly built CDF knot cache (quadrature laws only).
#[derive(Clone, Debug)]
pub struct LimitLaw {
    kind: LawKind,
    cache: Option<CdfCache>,
}

#[derive(Clone, Debug)]
struct CdfCache {
    x: Vec<f64>,
    cdf: Vec<f64>,
    /// Quadrature mass before normalization; the unit-mass invariant.
    #[cfg_attr(not(test), allow(dead_code))]
    raw_mass: f64,
}

impl CdfCache {
    fn eval(&self, x: f64) -> f64 {
        if x <= self.x[0] {
            return 0.0;
        }
        if x >= *self.x.last().unwrap() {
            return 1.0;
        }
        let idx = self.x.partition_point(|&p| p <= x);
        let (x0, x1) = (self.x[idx - 1], self.x[idx]);
        let (f0, f1) = (self.cdf[idx - 1], self.cdf[idx]);
        let t = if x1 > x0 { (x - x0) / (x1 - x0) } else { 0.0 };
        (f0 + (f1 - f0) * t).clamp(0.0, 1.0)
    }
}

impl LimitLaw {
    pub fn new(kind: LawKind) -> Result<Self> {
        match &kind {
            LawKind::MarchenkoPastur { y } => {
                if !(*y > 0.0 && *y <= 1.0) {
                    return Err(Error::Config(format!("MP ratio y = {y} outside (0, 1]")));
                }
            }
            LawKind::FussCatalan { m } | LawKind::ProductSphericalSv { m } => {
                if *m == 0 {
                    return Err(Error::Config("law order m must be >= 1".into()));
                }
            }
            LawKind::ProductEv { m } | LawKind::ProductSphericalEv { m } => {
                if *m == 0 {
                    return Err(Error::Config("law order m must be >= 1".into()));
                }
            }
            LawKind::ProductRectSv { ratios } => {
                if ratios.is_empty() || ratios.iter().any(|&y| !(y > 0.0 && y <= 1.0)) {
                    return Err(Error::Config("ratios must lie in (0, 1]".into()));
                }
            }
            LawKind::ProductRectEv { ratios } => {
                if ratios.is_empty() || ratios.iter().any(|&y| !(y > 0.0 && y <= 1.0)) {
                    return Err(Error::Config("ratios must lie in (0, 1]".into()));
                }
                if (ratios[ratios.len() - 1] - 1.0).abs() > 1e-12 {
                    return Err(Error::Config(
                        "rectangular eigenvalue law needs a square product (last ratio 1)".into(),
                    ));
                }
            }
            LawKind::SphericalSv | LawKind::CircularEv | LawKind::SphericalEv => {}
        }
        let mut law = LimitLaw { kind, cache: None };
        law.cache = law.build_cache()?;
        Ok(law)
    }

    pub fn marchenko_pastur(y: f64) -> Result<Self> {
        LimitLaw::new(LawKind::MarchenkoPastur { y })
    }

    pub fn fuss_catalan(m: u32) -> Result<Self> {
        LimitLaw::new(LawKind::FussCatalan { m })
    }

    pub fn product_rect_sv(ratios: Vec<f64>) -> Result<Self> {
        LimitLaw::new(LawKind::ProductRectSv { ratios })
    }

    pub fn spherical_sv() -> Result<Self> {
        LimitLaw::new(LawKind::SphericalSv)
    }

    pub fn product_spherical_sv(m: u32) -> Result<Self> {
        LimitLaw::new(LawKind::ProductSphericalSv { m })
    }

    pub fn circular_ev() -> Result<Self> {
        LimitLaw::new(LawKind::CircularEv)
    }

    pub fn product_ev(m: u32) -> Result<Self> {
        LimitLaw::new(LawKind::ProductEv { m })
    }

    pub fn product_rect_ev(ratios: Vec<f64>) -> Result<Self> {
        LimitLaw::new(LawKind::ProductRectEv { ratios })
    }

    pub fn spherical_ev() -> Result<Self> {
        LimitLaw::new(LawKind::SphericalEv)
    }

    pub fn product_spherical_ev(m: u32) -> Result<Self> {
        LimitLaw::new(LawKind::ProductSphericalEv { m })
    }

    /// Squared-singular-value limit of a product of powers: alias for
    /// `fuss_catalan(sum of exponents)`. The identification is checked
    /// empirically by the integration suite rather than assumed exact.
    pub fn product_of_powers(exponents: &[u32]) -> Result<Self> {
        if exponents.is_empty() || exponents.iter().any(|&e| e == 0) {
            return Err(Error::Config("product-of-powers needs positive exponents".into()));
        }
        LimitLaw::fuss_catalan(exponents.iter().sum())
    }

    pub fn kind(&self) -> &LawKind {
        &self.kind
    }

    pub fn name(&self) -> String {
        match &self.kind {
            LawKind::MarchenkoPastur { y } => format!("marchenko-pastur({y})"),
            LawKind::FussCatalan { m } => format!("fuss-catalan({m})"),
            LawKind::ProductRectSv { ratios } => format!("product-rect-sv({ratios:?})"),
            LawKind::SphericalSv => "spherical-sv".into(),
            LawKind::ProductSphericalSv { m } => format!("product-spherical-sv({m})"),
            LawKind::CircularEv => "circular-ev".into(),
            LawKind::ProductEv { m } => format!("product-ev({m})"),
            LawKind::ProductRectEv { ratios } => format!("product-rect-ev({ratios:?})"),
            LawKind::SphericalEv => "spherical-ev".into(),
            LawKind::ProductSphericalEv { m } => format!("product-spherical-ev({m})"),
        }
    }

    /// Planar (radially symmetric) eigenvalue laws.
    pub fn is_radial(&self) -> bool {
        matches!(
            self.kind,
            LawKind::CircularEv
                | LawKind::ProductEv { .. }
                | LawKind::ProductRectEv { .. }
                | LawKind::SphericalEv
                | LawKind::ProductSphericalEv { .. }
        )
    }

    /// Support on the squared-singular-value axis (1-D laws) or the radial
    /// axis (planar laws).
    pub fn support(&self) -> (f64, f64) {
        match &self.kind {
            LawKind::MarchenkoPastur { y } => {
                let s = y.sqrt();
                ((1.0 - s) * (1.0 - s), (1.0 + s) * (1.0 + s))
            }
            LawKind::FussCatalan { m } => {
                let mf = *m as f64;
                (0.0, (mf + 1.0).powf(mf + 1.0) / mf.powf(mf))
            }
            LawKind::ProductRectSv { ratios } => {
                let hi: f64 = ratios.iter().map(|&y| (1.0 + y.sqrt()).powi(2)).product();
                (0.0, hi)
            }
            LawKind::SphericalSv | LawKind::ProductSphericalSv { .. } => (0.0, f64::INFINITY),
            LawKind::CircularEv | LawKind::ProductEv { .. } | LawKind::ProductRectEv { .. } => {
                (0.0, 1.0)
            }
            LawKind::SphericalEv | LawKind::ProductSphericalEv { .. } => (0.0, f64::INFINITY),
        }
    }

    /// Density: on the squared-singular-value axis for 1-D laws, the radial
    /// planar profile `f(r)` for eigenvalue laws. Points outside the
    /// support (and singular support endpoints) return 0.
    pub fn density(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        match &self.kind {
            LawKind::MarchenkoPastur { y } => {
                let (a, b) = self.support();
                if x <= a.max(1e-12) || x >= b {
                    return 0.0;
                }
                ((x - a) * (b - x)).sqrt() / (2.0 * PI * x * y)
            }
            LawKind::FussCatalan { m } => {
                if *m == 1 {
                    return LimitLaw::marchenko_pastur(1.0).unwrap().density(x);
                }
                let (a, b) = self.support();
                if x <= a.max(1e-12) || x >= b {
                    return 0.0;
                }
                self.stieltjes_density(x)
            }
            LawKind::ProductRectSv { .. } => {
                let (_, b) = self.support();
                if x <= 1e-12 || x >= b {
                    return 0.0;
                }
                self.stieltjes_density(x)
            }
            LawKind::SphericalSv => {
                if x <= 1e-12 {
                    0.0
                } else {
                    1.0 / (PI * x.sqrt() * (1.0 + x))
                }
            }
            LawKind::ProductSphericalSv { m } => {
                if x <= 1e-12 {
                    return 0.0;
                }
                let mf = *m as f64;
                let theta = PI * mf / (mf + 1.0);
                let u = x.powf(1.0 / (mf + 1.0));
                theta.sin() / (PI * x.powf(mf / (mf + 1.0)) * (u * u - 2.0 * u * theta.cos() + 1.0))
            }
            LawKind::CircularEv => {
                if x <= 1.0 {
                    1.0 / PI
                } else {
                    0.0
                }
            }
            LawKind::ProductEv { m } => {
                let mf = *m as f64;
                if x > 1.0 || x <= 1e-12 {
                    if x <= 1e-12 && *m == 1 {
                        return 1.0 / PI;
                    }
                    return 0.0;
                }
                1.0 / (mf * PI * x.powf(2.0 * (mf - 1.0) / mf))
            }
            LawKind::ProductRectEv { ratios } => {
                if x > 1.0 {
                    return 0.0;
                }
                let psi = rect_psi(ratios, x);
                1.0 / (PI * rect_poly_derivative(ratios, psi))
            }
            LawKind::SphericalEv => 1.0 / (PI * (1.0 + x * x).powi(2)),
            LawKind::ProductSphericalEv { m } => {
                let mf = *m as f64;
                if x <= 1e-12 {
                    if *m == 1 {
                        return 1.0 / PI;
                    }
                    return 0.0;
                }
                let t = x.powf(2.0 / mf);
                1.0 / (mf * PI * x.powf(2.0 * (mf - 1.0) / mf) * (1.0 + t).powi(2))
            }
        }
    }

    /// CDF of a 1-D law, or the radial CDF (mass within radius) of a
    /// planar law.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        match &self.kind {
            LawKind::MarchenkoPastur { .. }
            | LawKind::FussCatalan { .. }
            | LawKind::ProductRectSv { .. } => self.cache.as_ref().map_or(0.0, |c| c.eval(x)),
            LawKind::SphericalSv => 2.0 / PI * x.sqrt().atan(),
            LawKind::ProductSphericalSv { m } => {
                let mf = *m as f64;
                let theta = PI * mf / (mf + 1.0);
                let u = x.powf(1.0 / (mf + 1.0));
                let lower = (-theta.cos() / theta.sin()).atan();
                ((mf + 1.0) / PI * (((u - theta.cos()) / theta.sin()).atan() - lower))
                    .clamp(0.0, 1.0)
            }
            LawKind::CircularEv => (x * x).clamp(0.0, 1.0),
            LawKind::ProductEv { m } => x.powf(2.0 / *m as f64).clamp(0.0, 1.0),
            LawKind::ProductRectEv { ratios } => rect_psi(ratios, x.min(1.0)),
            LawKind::SphericalEv => x * x / (1.0 + x * x),
            LawKind::ProductSphericalEv { m } => {
                let t = x.powf(2.0 / *m as f64);
                t / (1.0 + t)
            }
        }
    }

    /// Raw moment `m_k`; errors at the smallest divergent order for the
    /// heavy-tailed spherical families.
    pub fn moment(&self, k: usize) -> Result<f64> {
        if k == 0 {
            return Ok(1.0);
        }
        match &self.kind {
            LawKind::MarchenkoPastur { y } => {
                // Narayana expansion: sum_r y^r / (r+1) C(k, r) C(k-1, r).
                let mut acc = 0.0;
                for r in 0..k {
                    acc += y.powi(r as i32) / (r as f64 + 1.0)
                        * binom(k as u64, r as u64)
                        * binom(k as u64 - 1, r as u64);
                }
                Ok(acc)
            }
            LawKind::FussCatalan { m } => {
                let mm = *m as u64;
                let kk = k as u64;
                Ok(binom((mm + 1) * kk, kk) / (mm as f64 * kk as f64 + 1.0))
            }
            LawKind::ProductRectSv { .. } => {
                let cache = self.cache.as_ref().unwrap();
                let mut acc = 0.0;
                for i in 1..cache.x.len() {
                    let mid = 0.5 * (cache.x[i] + cache.x[i - 1]);
                    acc += mid.powi(k as i32) * (cache.cdf[i] - cache.cdf[i - 1]);
                }
                Ok(acc)
            }
            LawKind::SphericalSv => Err(Error::DivergentMoment { k: 1 }),
            LawKind::ProductSphericalSv { .. } => Err(Error::DivergentMoment { k: 1 }),
            LawKind::CircularEv => Ok(2.0 / (k as f64 + 2.0)),
            LawKind::ProductEv { m } => Ok(2.0 / (*m as f64 * k as f64 + 2.0)),
            LawKind::ProductRectEv { ratios } => {
                // E r^k = integral r^k dpsi by quadrature on [0, 1].
                let n = 4000;
                let mut acc = 0.0;
                let mut prev = 0.0;
                for i in 1..=n {
                    let r = i as f64 / n as f64;
                    let cur = rect_psi(ratios, r);
                    acc += (0.5 * (r + (i as f64 - 1.0) / n as f64)).powi(k as i32) * (cur - prev);
                    prev = cur;
                }
                Ok(acc)
            }
            LawKind::SphericalEv => {
                if k >= 2 {
                    Err(Error::DivergentMoment { k: 2 })
                } else {
                    Ok(PI / 2.0)
                }
            }
            LawKind::ProductSphericalEv { m } => {
                let threshold = (2.0 / *m as f64).ceil() as usize;
                if k as f64 >= 2.0 / *m as f64 {
                    Err(Error::DivergentMoment { k: threshold })
                } else {
                    // Only reachable for m = 1, k = 1.
                    Ok(PI / 2.0)
                }
            }
        }
    }

    /// Stieltjes transform of the equation-defined squared-singular laws,
    /// by Newton continuation from the large-|z| branch `s ~ -1/z`.
    pub fn stieltjes_solve(&self, z: Complex64) -> Result<Complex64> {
        if z.im <= 0.0 {
            return Err(Error::Domain("stieltjes_solve needs Im z > 0".into()));
        }
        let poly = |zz: Complex64| self.stieltjes_poly_at(zz);
        if poly(z).is_empty() {
            return Err(Error::Domain(format!(
                "no Stieltjes equation for {}",
                self.name()
            )));
        }

        // Imaginary-part descent from far above the real axis.
        let mut im = 1e6_f64.max(4.0 * z.norm());
        let mut s = -Complex64::new(z.re, im).inv();
        loop {
            let zz = Complex64::new(z.re, im);
            s = newton_poly_root(&poly(zz), s)?;
            if (im - z.im).abs() < 1e-30 || im <= z.im {
                break;
            }
            im = (im * 0.5).max(z.im);
        }
        if s.im < -1e-12 {
            return Err(Error::Branch(format!(
                "stieltjes root left the upper half-plane: {s}"
            )));
        }
        Ok(s)
    }

    /// The S-transform evaluator: ordinary S for singular-value laws, the
    /// symmetric-branch S_V for eigenvalue laws (z on (-1, 0)).
    pub fn s_transform(&self, z: Complex64) -> Result<Complex64> {
        let one = Complex64::new(1.0, 0.0);
        match &self.kind {
            LawKind::MarchenkoPastur { y } => Ok((one + *y * z).inv()),
            LawKind::FussCatalan { m } => Ok((one + z).powu(*m).inv()),
            LawKind::ProductRectSv { ratios } => {
                let mut acc = one;
                for &y in ratios {
                    acc *= (one + y * z).inv();
                }
                Ok(acc)
            }
            LawKind::SphericalSv => Ok(-z / (z + one)),
            LawKind::ProductSphericalSv { m } => Ok((-z / (z + one)).powu(*m)),
            _ => {
                if z.im != 0.0 || !(-1.0 < z.re && z.re < 0.0) {
                    return Err(Error::Domain(
                        "symmetric-branch S_V is evaluated on (-1, 0)".into(),
                    ));
                }
                Ok(self.sv_transform()?.s_eval(z.re))
            }
        }
    }

    /// The hermitized transform feeding the master-system solver
    /// (eigenvalue laws only).
    pub fn sv_transform(&self) -> Result<SvTransform> {
        let name = self.name();
        match &self.kind {
            LawKind::CircularEv => Ok(SvTransform::from_xi(name, |x| x.sqrt())),
            LawKind::ProductEv { m } => {
                let e = (*m as f64 - 1.0) / 2.0;
                Ok(SvTransform::from_xi(name, move |x| {
                    x.sqrt() / (1.0 - x).max(f64::MIN_POSITIVE).powf(e)
                }))
            }
            LawKind::ProductRectEv { ratios } => {
                let ys: Vec<f64> = ratios[..ratios.len() - 1].to_vec();
                Ok(SvTransform::from_xi(name, move |x| {
                    let mut denom = 1.0;
                    for &y in &ys {
                        denom *= (1.0 - y * x).max(f64::MIN_POSITIVE).sqrt();
                    }
                    x.sqrt() / denom
                }))
            }
            LawKind::SphericalEv => Ok(SvTransform::from_xi(name, |x| x)),
            LawKind::ProductSphericalEv { m } => {
                let e = (*m as f64 - 1.0) / 2.0;
                Ok(SvTransform::from_xi(name, move |x| {
                    x * (x / (1.0 - x).max(f64::MIN_POSITIVE)).powf(e)
                }))
            }
            _ => Err(Error::Domain(format!(
                "{} is not an eigenvalue law; no hermitized S_V",
                self.name()
            ))),
        }
    }

    /// Density via the Stieltjes equation with imaginary part
    /// proportional to x, so the pointwise bias stays relative.
    fn stieltjes_density(&self, x: f64) -> f64 {
        let eta = 1e-7 * x.max(1e-30);
        match self.stieltjes_solve(Complex64::new(x, eta)) {
            Ok(s) => (s.im / PI).max(0.0),
            Err(_) => 0.0,
        }
    }

    /// Warm-started version for sweeps along ascending x.
    fn stieltjes_density_warm(&self, x: f64, warm: &mut Option<Complex64>) -> f64 {
        let eta = 1e-7 * x.max(1e-30);
        if let Some(s0) = *warm {
            let z = Complex64::new(x, eta);
            if let Ok(s) = newton_poly_root(&self.stieltjes_poly_at(z), s0) {
                if s.im >= -1e-12 {
                    *warm = Some(s);
                    return (s.im / PI).max(0.0);
                }
            }
        }
        let eta = 1e-7 * x.max(1e-30);
        match self.stieltjes_solve(Complex64::new(x, eta)) {
            Ok(s) => {
                *warm = Some(s);
                (s.im / PI).max(0.0)
            }
            Err(_) => 0.0,
        }
    }

    fn stieltjes_poly_at(&self, z: Complex64) -> Vec<Complex64> {
        match &self.kind {
            LawKind::MarchenkoPastur { y } => rect_stieltjes_poly(&[*y], z),
            LawKind::FussCatalan { m } => {
                let mm = *m as usize;
                let mut c = vec![Complex64::new(0.0, 0.0); mm + 2];
                c[0] = Complex64::new(1.0, 0.0);
                c[1] = z;
                let sign = if mm % 2 == 0 { -1.0 } else { 1.0 };
                c[mm + 1] = sign * z.powu(mm as u32);
                c
            }
            LawKind::ProductRectSv { ratios } => rect_stieltjes_poly(ratios, z),
            _ => Vec::new(),
        }
    }

    /// Density evaluated for quadrature: the closed formula or the
    /// Stieltjes route without the public edge cutoffs, warm-started
    /// along ascending sweeps.
    fn density_for_quadrature(&self, x: f64, warm: &mut Option<Complex64>) -> f64 {
        match &self.kind {
            LawKind::MarchenkoPastur { y } => {
                let (a, b) = self.support();
                if x <= a || x >= b {
                    return 0.0;
                }
                ((x - a) * (b - x)).sqrt() / (2.0 * PI * x * y)
            }
            LawKind::FussCatalan { m } => {
                if *m == 1 {
                    return LimitLaw::marchenko_pastur(1.0)
                        .unwrap()
                        .density_for_quadrature(x, warm);
                }
                let (_, b) = self.support();
                if x <= 0.0 || x >= b {
                    return 0.0;
                }
                self.stieltjes_density_warm(x, warm)
            }
            LawKind::ProductRectSv { .. } => {
                let (_, b) = self.support();
                if x <= 0.0 || x >= b {
                    return 0.0;
                }
                self.stieltjes_density_warm(x, warm)
            }
            _ => self.density(x),
        }
    }

    /// Eagerly integrate the CDF knots for the quadrature laws.
    ///
    /// Laws with a hard edge at zero (density ~ x^(-q), q < 1) integrate
    /// in the substituted variable u = x^(1/msub), which removes the pole,
    /// and carry an analytic power-law estimate of the tiny [0, x0] tail.
    fn build_cache(&self) -> Result<Option<CdfCache>> {
        // The hard edge at zero goes like x^(-k/(k+1)) where k counts the
        // square factors; the substitution power must match it, or the
        // transformed integrand keeps a fractional cusp.
        let (pole_order, n_knots) = match &self.kind {
            LawKind::MarchenkoPastur { y } => {
                if *y == 1.0 {
                    (2usize, 6000)
                } else {
                    (1, 6000)
                }
            }
            LawKind::FussCatalan { m } => (*m as usize + 1, 6000),
            LawKind::ProductRectSv { ratios } => {
                let units = ratios.iter().filter(|&&y| y >= 1.0 - 1e-9).count();
                (units + 1, 6000)
            }
            _ => return Ok(None),
        };
        let (a, b) = self.support();

        let x: Vec<f64>;
        let mut cdf: Vec<f64>;
        if a == 0.0 && pole_order > 1 {
            // Substituted variable u = x^(1/msub) removes the x^(-q) pole;
            // the integrand g(u) = f(u^msub) msub u^(msub-1) is bounded.
            // Quartic clustering toward the soft upper edge.
            let msub = pole_order as f64;
            let u0 = 1e-20f64.powf(1.0 / msub);
            let ub = b.powf(1.0 / msub);
            let mid = u0 + 0.618 * (ub - u0);
            let mut us = Vec::with_capacity(2 * n_knots + 1);
            for i in 0..=n_knots {
                us.push(u0 + (mid - u0) * i as f64 / n_knots as f64);
            }
            for i in 1..=n_knots {
                let t = i as f64 / n_knots as f64;
                us.push(ub - (ub - mid) * (1.0 - t).powi(4));
            }
            x = us.iter().map(|&u| u.powf(msub)).collect();

            // Power-law tail of the omitted [0, x0] sliver.
            let mut warm = None;
            let f1 = self.density_for_quadrature(x[0], &mut warm);
            let f2 = self.density_for_quadrature(x[2], &mut warm);
            let qhat = if f1 > 0.0 && f2 > 0.0 {
                (-((f2 / f1).ln() / (x[2] / x[0]).ln())).clamp(0.0, 0.999)
            } else {
                0.0
            };
            let tail = f1 * x[0] / (1.0 - qhat);

            let mut warm = None;
            let g = |u: f64, w: &mut Option<Complex64>| {
                self.density_for_quadrature(u.powf(msub), w) * msub * u.powf(msub - 1.0)
            };
            cdf = Vec::with_capacity(us.len());
            let mut acc = tail;
            let mut prev_u = us[0];
            let mut prev_g = g(prev_u, &mut warm);
            cdf.push(acc);
            for &ui in &us[1..] {
                let gi = g(ui, &mut warm);
                acc += 0.5 * (gi + prev_g) * (ui - prev_u);
                cdf.push(acc);
                prev_u = ui;
                prev_g = gi;
            }
        } else {
            // Soft edges on both sides: quartic clustering at each.
            let mid = a + 0.5 * (b - a);
            let mut xs = Vec::with_capacity(2 * n_knots + 1);
            for i in 0..=n_knots {
                let t = i as f64 / n_knots as f64;
                xs.push(a + (mid - a) * t.powi(4));
            }
            for i in 1..=n_knots {
                let t = i as f64 / n_knots as f64;
                xs.push(b - (b - mid) * (1.0 - t).powi(4));
            }
            x = xs;
            cdf = Vec::with_capacity(x.len());
            let mut warm = None;
            let mut acc = 0.0;
            let mut prev_x = x[0];
            let mut prev_f = self.density_for_quadrature(x[0], &mut warm);
            cdf.push(0.0);
            for &xi in &x[1..] {
                let fi = self.density_for_quadrature(xi, &mut warm);
                acc += 0.5 * (fi + prev_f) * (xi - prev_x);
                cdf.push(acc);
                prev_x = xi;
                prev_f = fi;
            }
        }
        let total = *cdf.last().unwrap();
        if (total - 1.0).abs() > 1e-4 {
            return Err(Error::Domain(format!(
                "quadrature mass {total} for {} too far from 1",
                self.name()
            )));
        }
        for v in cdf.iter_mut() {
            *v /= total;
        }
        Ok(Some(CdfCache {
            x,
            cdf,
            raw_mass: total,
        }))
    }
}

impl StieltjesEval for LimitLaw {
    fn stieltjes(&self, z: Complex64) -> Complex64 {
        match &self.kind {
            LawKind::MarchenkoPastur { .. }
            | LawKind::FussCatalan { .. }
            | LawKind::ProductRectSv { .. } => self
                .stieltjes_solve(z)
                .expect("stieltjes continuation failed"),
            LawKind::SphericalSv => {
                // g solves z(z+1) g^2 + 2 z g + 1 = 0 with Im g > 0.
                let disc = (-z).sqrt();
                let den = z * (z + 1.0);
                let g1 = (-z + disc) / den;
                let g2 = (-z - disc) / den;
                if g1.im >= g2.im {
                    g1
                } else {
                    g2
                }
            }
            LawKind::ProductSphericalSv { m } => {
                let mf = *m as f64;
                let theta = PI * mf / (mf + 1.0);
                let omega = Complex64::new(theta.cos(), -theta.sin());
                -(z - omega * z.powf(mf / (mf + 1.0))).inv()
            }
            _ => panic!("planar law has no real-axis Stieltjes transform"),
        }
    }
}

impl MomentSource for LimitLaw {
    fn moment(&self, k: usize) -> Result<f64> {
        LimitLaw::moment(self, k)
    }
}

/// psi(r) for the rectangular product: unique root in [0, 1] of
/// `psi prod_{v<m} (1 - y_v + y_v psi) = r^2`.
fn rect_psi(ratios: &[f64], r: f64) -> f64 {
    if r >= 1.0 {
        return 1.0;
    }
    let target = r * r;
    let poly = |p: f64| -> f64 {
        let mut acc = p;
        for &y in &ratios[..ratios.len() - 1] {
            acc *= 1.0 - y + y * p;
        }
        acc
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if poly(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// d/dpsi of the rectangular product polynomial.
fn rect_poly_derivative(ratios: &[f64], psi: f64) -> f64 {
    let ys = &ratios[..ratios.len() - 1];
    let factors: Vec<f64> = ys.iter().map(|&y| 1.0 - y + y * psi).collect();
    let prod: f64 = factors.iter().product();
    let mut acc = prod;
    for (i, &y) in ys.iter().enumerate() {
        let mut term = psi * y;
        for (j, &f) in factors.iter().enumerate() {
            if j != i {
                term *= f;
            }
        }
        acc += term;
    }
    acc
}

/// Coefficients (ascending) of `1 + z s - s prod_q (1 - y_q - y_q z s)`.
fn rect_stieltjes_poly(ratios: &[f64], z: Complex64) -> Vec<Complex64> {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let mut prod = vec![one];
    for &y in ratios {
        let c = Complex64::new(1.0 - y, 0.0);
        let d = -y * z;
        let mut next = vec![zero; prod.len() + 1];
        for (j, &p) in prod.iter().enumerate() {
            next[j] += p * c;
            next[j + 1] += p * d;
        }
        prod = next;
    }
    let mut out = vec![zero; prod.len() + 1];
    out[0] = one;
    out[1] += z;
    for (j, &p) in prod.iter().enumerate() {
        out[j + 1] -= p;
    }
    out
}

fn newton_poly_root(coeffs: &[Complex64], start: Complex64) -> Result<Complex64> {
    let eval = |s: Complex64| -> (Complex64, Complex64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for &c in coeffs.iter().rev() {
            dp = dp * s + p;
            p = p * s + c;
        }
        (p, dp)
    };
    let mut s = start;
    for _ in 0..100 {
        let (p, dp) = eval(s);
        if dp.norm() == 0.0 {
            break;
        }
        let step = p / dp;
        s -= step;
        if step.norm() <= 1e-14 * s.norm().max(1e-30) {
            return Ok(s);
        }
    }
    let (p, _) = eval(s);
    if p.norm() < 1e-9 {
        return Ok(s);
    }
    Err(Error::NonConvergence {
        iterations: 100,
        residual: p.norm(),
    })
}

fn binom(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}
