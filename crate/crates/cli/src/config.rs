//! JSON experiment configurations. Unknown fields are rejected so typos
//! fail before any computation runs.

use serde::{Deserialize, Serialize};

use rmtlab::ensembles::{DimensionProfile, EntryLaw, FunctionKind, FunctionSpec};
use rmtlab::limitlaws::LimitLaw;
use rmtlab::{Error, Result};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    /// identity | product | power | product-of-powers | spherical-product
    pub function: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponents: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ridge: Option<f64>,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratios: Option<Vec<f64>>,
    /// complex-gaussian | real-gaussian | rademacher | uniform | two-point
    pub entry_law: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub two_point_p: Option<f64>,
}

impl EnsembleConfig {
    pub fn function_spec(&self) -> Result<FunctionSpec> {
        let kind = match self.function.as_str() {
            "identity" => FunctionKind::Identity,
            "product" => FunctionKind::Product {
                m: self.m.ok_or_else(|| Error::Config("product needs m".into()))?,
            },
            "power" => FunctionKind::Power {
                m: self.m.ok_or_else(|| Error::Config("power needs m".into()))?,
            },
            "product-of-powers" => FunctionKind::ProductOfPowers {
                exponents: self
                    .exponents
                    .clone()
                    .ok_or_else(|| Error::Config("product-of-powers needs exponents".into()))?,
            },
            "spherical-product" => FunctionKind::SphericalProduct {
                m: self.m.ok_or_else(|| Error::Config("spherical-product needs m".into()))?,
                ridge: self.ridge.unwrap_or(0.0),
            },
            other => {
                return Err(Error::Config(format!(
                    "unknown function '{other}' (expected identity, product, power, product-of-powers, spherical-product)"
                )))
            }
        };
        let factor_count = match &kind {
            FunctionKind::Identity => 1,
            FunctionKind::Product { m } => *m,
            FunctionKind::Power { .. } => 1,
            FunctionKind::ProductOfPowers { exponents } => exponents.len(),
            FunctionKind::SphericalProduct { m, .. } => 2 * m,
        };
        let profile = match &self.ratios {
            Some(r) => DimensionProfile::new(self.n, r.clone())?,
            None => DimensionProfile::square(self.n, factor_count)?,
        };
        FunctionSpec::new(kind, profile)
    }

    pub fn entry_law(&self) -> Result<EntryLaw> {
        let law = match self.entry_law.as_str() {
            "complex-gaussian" => EntryLaw::StandardComplexGaussian,
            "real-gaussian" => EntryLaw::StandardRealGaussian,
            "rademacher" => EntryLaw::Rademacher,
            "uniform" => EntryLaw::UniformSymmetric,
            "two-point" => EntryLaw::TwoPoint {
                p: self
                    .two_point_p
                    .ok_or_else(|| Error::Config("two-point law needs two_point_p".into()))?,
            },
            other => {
                return Err(Error::Config(format!(
                    "unknown entry law '{other}' (expected complex-gaussian, real-gaussian, rademacher, uniform, two-point)"
                )))
            }
        };
        law.validate()?;
        Ok(law)
    }
}

pub const LAW_CATALOG: &[&str] = &[
    "marchenko-pastur",
    "fuss-catalan",
    "product-rect-sv",
    "spherical-sv",
    "product-spherical-sv",
    "circular-ev",
    "product-ev",
    "product-rect-ev",
    "spherical-ev",
    "product-spherical-ev",
];

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LawId {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratios: Option<Vec<f64>>,
}

impl LawId {
    pub fn build(&self) -> Result<LimitLaw> {
        let need_m = || self.m.ok_or_else(|| Error::Config(format!("law '{}' needs m", self.id)));
        let need_ratios = || {
            self.ratios
                .clone()
                .ok_or_else(|| Error::Config(format!("law '{}' needs ratios", self.id)))
        };
        match self.id.as_str() {
            "marchenko-pastur" => LimitLaw::marchenko_pastur(
                self.y.ok_or_else(|| Error::Config("marchenko-pastur needs y".into()))?,
            ),
            "fuss-catalan" => LimitLaw::fuss_catalan(need_m()?),
            "product-rect-sv" => LimitLaw::product_rect_sv(need_ratios()?),
            "spherical-sv" => LimitLaw::spherical_sv(),
            "product-spherical-sv" => LimitLaw::product_spherical_sv(need_m()?),
            "circular-ev" => LimitLaw::circular_ev(),
            "product-ev" => LimitLaw::product_ev(need_m()?),
            "product-rect-ev" => LimitLaw::product_rect_ev(need_ratios()?),
            "spherical-ev" => LimitLaw::spherical_ev(),
            "product-spherical-ev" => LimitLaw::product_spherical_ev(need_m()?),
            other => Err(Error::Config(format!(
                "unknown law '{other}'; catalog: {}",
                LAW_CATALOG.join(", ")
            ))),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsConfig {
    pub alpha: [f64; 2],
    pub p: f64,
    pub gamma: f64,
    pub delta: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub ensemble: EnsembleConfig,
    pub trials: usize,
    pub seed: u64,
    /// singular | eigen
    pub mode: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<DiagnosticsConfig>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LawConfig {
    pub law: LawId,
    pub grid: GridConfig,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadialConfig {
    pub r0: f64,
    pub r_max: f64,
    pub step: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub law: Option<LawId>,
    /// Moments m_1..m_K of a symmetric measure, as an alternative to a
    /// catalog law.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moments: Option<Vec<f64>>,
    pub radial: RadialConfig,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareConfig {
    /// One spectra file (against `law`) or two (two-sample).
    pub spectra: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub law: Option<LawId>,
    /// squared | raw | radial | angular
    pub convention: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantile: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniversalityConfig {
    pub ensemble: EnsembleConfig,
    /// Entry law of the second sample.
    pub entry_law_b: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub two_point_p_b: Option<f64>,
    pub trials: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantile: Option<f64>,
    /// Fraction of paired runs that must pass (default 0.95).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pass_fraction: Option<f64>,
}
