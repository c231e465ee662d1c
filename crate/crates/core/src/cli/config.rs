//! JSON run configuration. A file holds either one run object or
//! `{"runs": [...]}`; every object is tagged by `command` and unknown keys
//! are rejected.

use serde::Deserialize;
use serde_json::Value;

use super::defaults as d;
use crate::density::{DensityField, Grid1D, Model, PotentialField};
use crate::gaussian::{SpdMatrix, SymMatrix};

/// Reason a configuration was rejected before any computation.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemaError {
    pub message: String,
    /// Index of the offending run inside `runs`, if any.
    pub run: Option<usize>,
}

impl std::fmt::Display for SchemaError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.run {
            Some(i) => write!(f, "run {i}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for SchemaError {}

fn schema(message: impl Into<String>) -> SchemaError {
    SchemaError {
        message: message.into(),
        run: None,
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum RunConfig {
    GaussGeodesic(GaussGeodesicConfig),
    GaussConnect(GaussConnectConfig),
    PdeEvolve(PdeEvolveConfig),
    PdeMetric(PdeMetricConfig),
    FrGeodesic(FrGeodesicConfig),
    ConeGeodesic(ConeGeodesicConfig),
    BbAction(BbActionConfig),
    Check(CheckConfig),
}

impl RunConfig {
    pub fn command(&self) -> &'static str {
        match self {
            RunConfig::GaussGeodesic(_) => "gauss-geodesic",
            RunConfig::GaussConnect(_) => "gauss-connect",
            RunConfig::PdeEvolve(_) => "pde-evolve",
            RunConfig::PdeMetric(_) => "pde-metric",
            RunConfig::FrGeodesic(_) => "fr-geodesic",
            RunConfig::ConeGeodesic(_) => "cone-geodesic",
            RunConfig::BbAction(_) => "bb-action",
            RunConfig::Check(_) => "check",
        }
    }

    pub fn output(&self) -> Option<&str> {
        match self {
            RunConfig::GaussGeodesic(c) => c.output.as_deref(),
            RunConfig::GaussConnect(c) => c.output.as_deref(),
            RunConfig::PdeEvolve(c) => c.output.as_deref(),
            RunConfig::PdeMetric(c) => c.output.as_deref(),
            RunConfig::FrGeodesic(c) => c.output.as_deref(),
            RunConfig::ConeGeodesic(c) => c.output.as_deref(),
            RunConfig::BbAction(c) => c.output.as_deref(),
            RunConfig::Check(c) => c.output.as_deref(),
        }
    }
}

/// Parses a configuration file body into its runs.
pub fn parse_config(text: &str) -> Result<Vec<RunConfig>, SchemaError> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| schema(format!("invalid JSON: {e}")))?;
    let Value::Object(map) = &value else {
        return Err(schema("configuration must be a JSON object"));
    };
    if map.contains_key("runs") {
        if map.len() != 1 {
            return Err(schema("a batch configuration may only contain `runs`"));
        }
        let Some(Value::Array(runs)) = map.get("runs") else {
            return Err(schema("`runs` must be an array"));
        };
        if runs.is_empty() {
            return Err(schema("`runs` is empty"));
        }
        runs.iter()
            .enumerate()
            .map(|(i, v)| {
                RunConfig::deserialize(v).map_err(|e| SchemaError {
                    message: e.to_string(),
                    run: Some(i),
                })
            })
            .collect()
    } else {
        RunConfig::deserialize(&value)
            .map(|c| vec![c])
            .map_err(|e| schema(e.to_string()))
    }
}

/// Field values: either explicit node values or a Fourier description
/// `constant + Σ_k cos[k−1]·cos(kx') + sin[k−1]·sin(kx')`, `x' = 2πx/L`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum FieldSpec {
    Values(Vec<f64>),
    Modes(Modes),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Modes {
    #[serde(default)]
    pub constant: f64,
    #[serde(default)]
    pub cos: Vec<f64>,
    #[serde(default)]
    pub sin: Vec<f64>,
}

impl FieldSpec {
    fn explicit_len(&self) -> Option<usize> {
        match self {
            FieldSpec::Values(v) => Some(v.len()),
            FieldSpec::Modes(_) => None,
        }
    }

    pub fn sample(&self, grid: &Grid1D) -> Result<Vec<f64>, SchemaError> {
        match self {
            FieldSpec::Values(v) => {
                if v.len() != grid.n() {
                    return Err(schema(format!(
                        "field has {} values but the grid has {} points",
                        v.len(),
                        grid.n()
                    )));
                }
                Ok(v.clone())
            }
            FieldSpec::Modes(m) => {
                let w = std::f64::consts::TAU / grid.length();
                Ok(grid.sample(|x| {
                    let mut f = m.constant;
                    for (k, a) in m.cos.iter().enumerate() {
                        f += a * ((k + 1) as f64 * w * x).cos();
                    }
                    for (k, b) in m.sin.iter().enumerate() {
                        f += b * ((k + 1) as f64 * w * x).sin();
                    }
                    f
                }))
            }
        }
    }
}

/// Grid from an optional `n`, `length` and the fields that must fit it.
pub(crate) fn grid_for(
    n: Option<usize>,
    length: Option<f64>,
    fields: &[&FieldSpec],
) -> Result<Grid1D, SchemaError> {
    let explicit: Vec<usize> = fields.iter().filter_map(|f| f.explicit_len()).collect();
    let n = match (n, explicit.first()) {
        (Some(n), _) => n,
        (None, Some(&len)) => len,
        (None, None) => d::GRID_POINTS,
    };
    if let Some(bad) = explicit.iter().find(|&&len| len != n) {
        return Err(schema(format!(
            "field has {bad} values but the grid has {n} points"
        )));
    }
    Grid1D::new(n, length.unwrap_or(d::DOMAIN_LENGTH)).map_err(|e| schema(e.to_string()))
}

pub(crate) fn density(
    grid: &Grid1D,
    spec: &FieldSpec,
    name: &str,
) -> Result<DensityField, SchemaError> {
    DensityField::new(*grid, spec.sample(grid)?).map_err(|e| schema(format!("{name}: {e}")))
}

pub(crate) fn potential(
    grid: &Grid1D,
    spec: &FieldSpec,
    name: &str,
) -> Result<PotentialField, SchemaError> {
    PotentialField::new(spec.sample(grid)?).map_err(|e| schema(format!("{name}: {e}")))
}

fn square_dim(len: usize, name: &str) -> Result<usize, SchemaError> {
    let n = (len as f64).sqrt().round() as usize;
    if n == 0 || n * n != len {
        return Err(schema(format!(
            "{name} must be a non-empty square matrix in row-major order (got {len} entries)"
        )));
    }
    Ok(n)
}

pub(crate) fn spd(entries: &[f64], name: &str) -> Result<SpdMatrix, SchemaError> {
    let n = square_dim(entries.len(), name)?;
    SpdMatrix::from_row_major(n, entries).map_err(|e| schema(format!("{name}: {e}")))
}

pub(crate) fn sym(entries: &[f64], n: usize, name: &str) -> Result<SymMatrix, SchemaError> {
    if square_dim(entries.len(), name)? != n {
        return Err(schema(format!("{name} must be {n}×{n}")));
    }
    SymMatrix::from_row_major(n, entries).map_err(|e| schema(format!("{name}: {e}")))
}

pub(crate) fn positive(x: f64, name: &str) -> Result<f64, SchemaError> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(schema(format!(
            "{name} must be positive and finite, got {x}"
        )))
    }
}

pub(crate) fn count(x: usize, name: &str) -> Result<usize, SchemaError> {
    if x > 0 {
        Ok(x)
    } else {
        Err(schema(format!("{name} must be at least 1")))
    }
}

/// Integrate the Gaussian geodesic equations from a cotangent state.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussGeodesicConfig {
    /// Covariance, row-major.
    pub sigma: Vec<f64>,
    pub m: f64,
    /// Covariance momentum, row-major; zero if omitted.
    pub p: Option<Vec<f64>>,
    #[serde(default)]
    pub xi: f64,
    pub dt: Option<f64>,
    pub steps: Option<usize>,
    pub output: Option<String>,
}

/// Connect two Gaussians by shooting.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussConnectConfig {
    pub sigma0: Vec<f64>,
    pub m0: f64,
    pub sigma1: Vec<f64>,
    pub m1: f64,
    pub tol: Option<f64>,
    pub steps: Option<usize>,
    pub max_iterations: Option<usize>,
    pub output: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdeEvolveConfig {
    pub model: Model,
    pub n: Option<usize>,
    pub length: Option<f64>,
    pub rho: FieldSpec,
    pub theta: FieldSpec,
    pub dt: Option<f64>,
    pub steps: Option<usize>,
    pub output: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Small,
    Gdiv,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdeMetricConfig {
    pub metric: MetricKind,
    pub n: Option<usize>,
    pub length: Option<f64>,
    pub rho: FieldSpec,
    pub rho_dot: FieldSpec,
    pub output: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrGeodesicConfig {
    pub n: Option<usize>,
    pub length: Option<f64>,
    pub rho0: FieldSpec,
    pub rho1: FieldSpec,
    /// Number of intervals sampled on `[0, 1]`.
    pub samples: Option<usize>,
    pub output: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaseKind {
    Circle,
    Euclidean,
    Sphere2,
    /// Bures–Wasserstein on `n × n` covariances (row-major coordinates).
    Bures,
    /// Bures–Wasserstein scaled by 1/4: the cone is the Gaussian model.
    GaussianCone,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeGeodesicConfig {
    pub base: BaseKind,
    pub p: Option<f64>,
    pub q: Vec<f64>,
    pub q_dot: Vec<f64>,
    pub alpha: f64,
    pub alpha_dot: f64,
    pub dt: Option<f64>,
    pub steps: Option<usize>,
    pub output: Option<String>,
}

/// Action of the small-model geodesic from `(rho, theta)` against random
/// admissible perturbations.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BbActionConfig {
    pub n: Option<usize>,
    pub length: Option<f64>,
    pub rho: FieldSpec,
    pub theta: FieldSpec,
    pub dt: Option<f64>,
    pub steps: Option<usize>,
    pub perturbations: Option<usize>,
    pub amplitude: Option<f64>,
    pub continuity_tol: Option<f64>,
    pub seed: Option<u64>,
    pub output: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct CheckConfig {
    pub cases: Option<usize>,
    pub seed: Option<u64>,
    pub output: Option<String>,
}
