//! JSON run configuration and its translation into library objects.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use wstar_geom::algebra::{AlgebraElement, AlgebraShape, CMatrix, C64};
use wstar_geom::channel::KrausMap;
use wstar_geom::functional::Functional;
use wstar_geom::model::{
    make_bloch_model, make_classical_model, ClassicalFamily, FiniteDifference, ParametricModel,
    RankOneUnitaryModel,
};

use crate::CliError;

/// Matrix entry: a real number or a `[re, im]` pair.
#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl Entry {
    fn value(self) -> C64 {
        match self {
            Entry::Real(x) => C64::new(x, 0.0),
            Entry::Complex([re, im]) => C64::new(re, im),
        }
    }
}

/// Row-major matrix of entries.
pub type MatrixSpec = Vec<Vec<Entry>>;

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraSpec {
    pub blocks: Vec<usize>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    /// `family` is one of `simplex` (needs `outcomes`), `exponential` (needs `features`),
    /// `binomial` (needs `trials`).
    Classical {
        family: String,
        #[serde(default)]
        outcomes: Option<usize>,
        #[serde(default)]
        features: Option<Vec<Vec<f64>>>,
        #[serde(default)]
        trials: Option<usize>,
    },
    Bloch,
    RankOneUnitary {
        phi: Vec<Entry>,
        generators: Vec<MatrixSpec>,
    },
    /// Explicit table: densities and coordinate tangents at each listed parameter point.
    Custom { points: Vec<CustomPoint> },
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct CustomPoint {
    pub params: Vec<f64>,
    /// One matrix per block.
    pub density: Vec<MatrixSpec>,
    /// One block list per parameter.
    pub tangents: Vec<Vec<MatrixSpec>>,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

#[derive(Clone, Copy, Debug, Default, Deserialize, Serialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum TangentSpec {
    #[default]
    Analytic,
    FiniteDifference {
        step: f64,
        #[serde(default = "default_true")]
        richardson: bool,
    },
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Copy, Debug, Default, Deserialize, Serialize, PartialEq, Eq, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub path: Option<String>,
    #[serde(default)]
    pub format: Option<Format>,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySpec {
    /// Suite names; empty runs every suite.
    #[serde(default)]
    pub suites: Vec<String>,
    /// Trial count per suite name.
    #[serde(default)]
    pub trials: BTreeMap<String, usize>,
}

/// Block-diagonal Kraus family; each operator is `domain_k × codomain_k`.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    pub domain: Vec<usize>,
    pub codomain: Vec<usize>,
    pub kraus: Vec<Vec<MatrixSpec>>,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub algebra: Option<AlgebraSpec>,
    #[serde(default)]
    pub model: Option<ModelSpec>,
    #[serde(default)]
    pub grid: Vec<Axis>,
    #[serde(default)]
    pub tangents: TangentSpec,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub verify: VerifySpec,
    #[serde(default)]
    pub channel: Option<ChannelSpec>,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| config_err(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Structural checks that do not need a model: grid axes, tolerances, channel.
    pub fn validate(&self) -> Result<(), CliError> {
        for (i, axis) in self.grid.iter().enumerate() {
            if axis.steps == 0 {
                return Err(config_err(format!("grid axis {} has steps = 0", i + 1)));
            }
            if !axis.min.is_finite() || !axis.max.is_finite() || axis.min > axis.max {
                return Err(config_err(format!(
                    "grid axis {} has invalid bounds [{}, {}]",
                    i + 1,
                    axis.min,
                    axis.max
                )));
            }
        }
        if let Some((name, t)) = self.tolerances.iter().find(|(_, t)| !(t.is_finite() && **t > 0.0)) {
            return Err(config_err(format!("tolerance {name} must be positive, got {t}")));
        }
        if let TangentSpec::FiniteDifference { step, .. } = self.tangents {
            if !(step.is_finite() && step > 0.0) {
                return Err(config_err(format!("finite-difference step must be positive, got {step}")));
            }
        }
        self.channel()?;
        Ok(())
    }

    pub fn tolerance(&self, name: &str, default: f64) -> f64 {
        self.tolerances.get(name).copied().unwrap_or(default)
    }

    pub fn shape(&self) -> Result<Option<AlgebraShape>, CliError> {
        self.algebra
            .as_ref()
            .map(|a| AlgebraShape::new(a.blocks.clone()).map_err(|e| config_err(e.to_string())))
            .transpose()
    }

    pub fn channel(&self) -> Result<Option<KrausMap>, CliError> {
        let Some(spec) = &self.channel else {
            return Ok(None);
        };
        let domain = AlgebraShape::new(spec.domain.clone()).map_err(|e| config_err(e.to_string()))?;
        let codomain = AlgebraShape::new(spec.codomain.clone()).map_err(|e| config_err(e.to_string()))?;
        let families = spec
            .kraus
            .iter()
            .map(|family| family.iter().map(matrix).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        KrausMap::block_diagonal(domain, codomain, families)
            .map(Some)
            .map_err(|e| config_err(format!("channel rejected: {e}")))
    }

    /// Builds the configured model. Custom tables are returned separately by [`RunConfig::custom_table`].
    pub fn model(&self) -> Result<ParametricModel, CliError> {
        let spec = self.model.as_ref().ok_or_else(|| config_err("no model given"))?;
        let model = match spec {
            ModelSpec::Classical {
                family,
                outcomes,
                features,
                trials,
            } => make_classical_model(&classical_family(family, *outcomes, features.clone(), *trials)?),
            ModelSpec::Bloch => make_bloch_model(),
            ModelSpec::RankOneUnitary { phi, generators } => rank_one(phi, generators)?.to_model(),
            ModelSpec::Custom { .. } => {
                return Err(config_err("custom models are tables, not parametric maps"));
            }
        };
        if let Some(shape) = self.shape()? {
            if &shape != model.shape() {
                return Err(config_err(format!(
                    "algebra {shape} does not match the model's algebra {}",
                    model.shape()
                )));
            }
        }
        Ok(match self.tangents {
            TangentSpec::Analytic => model,
            TangentSpec::FiniteDifference { step, richardson } => {
                model.with_finite_differences(FiniteDifference { step, richardson })
            }
        })
    }

    pub fn classical_family(&self) -> Result<Option<ClassicalFamily>, CliError> {
        match &self.model {
            Some(ModelSpec::Classical {
                family,
                outcomes,
                features,
                trials,
            }) => Ok(Some(classical_family(family, *outcomes, features.clone(), *trials)?)),
            _ => Ok(None),
        }
    }

    pub fn rank_one_model(&self) -> Result<Option<RankOneUnitaryModel>, CliError> {
        match &self.model {
            Some(ModelSpec::RankOneUnitary { phi, generators }) => Ok(Some(rank_one(phi, generators)?)),
            _ => Ok(None),
        }
    }

    /// Parsed custom table, if the model is one.
    pub fn custom_table(&self) -> Result<Option<Vec<TablePoint>>, CliError> {
        let Some(ModelSpec::Custom { points }) = &self.model else {
            return Ok(None);
        };
        let shape = self
            .shape()?
            .ok_or_else(|| config_err("custom models need an explicit algebra"))?;
        if self.tangents != TangentSpec::Analytic {
            return Err(config_err("custom tables carry their own tangents; finite differences are unavailable"));
        }
        if points.is_empty() {
            return Err(config_err("custom table has no points"));
        }
        let k = points[0].params.len();
        points
            .iter()
            .enumerate()
            .map(|(i, p)| {
                if p.params.len() != k || p.tangents.len() != k {
                    return Err(config_err(format!(
                        "table point {}: expected {k} parameters and {k} tangents",
                        i + 1
                    )));
                }
                let density = element(&shape, &p.density)
                    .map_err(|e| config_err(format!("table point {}: density: {e}", i + 1)))?;
                let tangents = p
                    .tangents
                    .iter()
                    .map(|t| {
                        element(&shape, t)
                            .and_then(|a| Functional::new(a).map_err(|e| config_err(e.to_string())))
                    })
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| config_err(format!("table point {}: tangent: {e}", i + 1)))?;
                Ok(TablePoint {
                    params: p.params.clone(),
                    density,
                    tangents,
                })
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }

    /// Grid points in row-major order (last axis fastest). `steps = 1` yields `min`.
    pub fn grid_points(&self) -> Vec<Vec<f64>> {
        let axes: Vec<Vec<f64>> = self
            .grid
            .iter()
            .map(|a| {
                if a.steps == 1 {
                    vec![a.min]
                } else {
                    (0..a.steps)
                        .map(|i| a.min + (a.max - a.min) * i as f64 / (a.steps - 1) as f64)
                        .collect()
                }
            })
            .collect();
        axes.iter().fold(vec![vec![]], |acc, axis| {
            acc.iter()
                .flat_map(|prefix| {
                    axis.iter().map(move |&x| {
                        let mut p = prefix.clone();
                        p.push(x);
                        p
                    })
                })
                .collect()
        })
    }
}

/// One row of a custom table; the density is not yet checked for positivity.
#[derive(Clone, Debug)]
pub struct TablePoint {
    pub params: Vec<f64>,
    pub density: AlgebraElement,
    pub tangents: Vec<Functional>,
}

fn classical_family(
    family: &str,
    outcomes: Option<usize>,
    features: Option<Vec<Vec<f64>>>,
    trials: Option<usize>,
) -> Result<ClassicalFamily, CliError> {
    match family {
        "simplex" => match outcomes {
            Some(n) if n >= 1 => Ok(ClassicalFamily::simplex(n)),
            _ => Err(config_err("simplex family needs outcomes >= 1")),
        },
        "exponential" => {
            let f = features.ok_or_else(|| config_err("exponential family needs features"))?;
            ClassicalFamily::exponential(f).map_err(|e| config_err(e.to_string()))
        }
        "binomial" => match trials {
            Some(t) if t >= 1 => Ok(ClassicalFamily::binomial(t)),
            _ => Err(config_err("binomial family needs trials >= 1")),
        },
        other => Err(config_err(format!("unknown classical family {other:?}"))),
    }
}

fn rank_one(phi: &[Entry], generators: &[MatrixSpec]) -> Result<RankOneUnitaryModel, CliError> {
    let phi = DVector::from_iterator(phi.len(), phi.iter().map(|e| e.value()));
    let gens = generators.iter().map(matrix).collect::<Result<Vec<_>, _>>()?;
    RankOneUnitaryModel::new(phi, gens).map_err(|e| config_err(e.to_string()))
}

pub fn matrix(spec: &MatrixSpec) -> Result<CMatrix, CliError> {
    let rows = spec.len();
    let cols = spec.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 || spec.iter().any(|r| r.len() != cols) {
        return Err(config_err("matrices must be non-empty and rectangular"));
    }
    Ok(CMatrix::from_fn(rows, cols, |i, j| spec[i][j].value()))
}

fn element(shape: &AlgebraShape, blocks: &[MatrixSpec]) -> Result<AlgebraElement, CliError> {
    let blocks = blocks.iter().map(matrix).collect::<Result<Vec<_>, _>>()?;
    AlgebraElement::from_blocks_with_shape(shape, blocks).map_err(|e| config_err(e.to_string()))
}

/// Parameter points stored in a previous JSON output.
pub fn points_from_json_output(path: &Path) -> Result<Vec<Vec<f64>>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
    let records: Vec<crate::output::Record> =
        serde_json::from_str(&text).map_err(|e| config_err(format!("invalid points file: {e}")))?;
    Ok(records.into_iter().map(|r| r.params).collect())
}

