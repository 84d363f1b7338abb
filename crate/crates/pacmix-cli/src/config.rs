//! TOML configuration schemas and their mapping onto library types.

use serde::{Deserialize, Serialize};

use pacmix::bound::BoundConfig;
use pacmix::datagen::{SyntheticKind, SyntheticSpec};
use pacmix::hdr::HdrConfig;
use pacmix::mixture::LossSpec;
use pacmix::models::{CandidateConfig, CandidateStrategy, ErrorDensity};
use pacmix::sbs::{GammaSchedule, SbsConfig};

use crate::CliError;

fn default_count() -> usize {
    1
}
fn default_sigma() -> f64 {
    1.0
}
fn default_intercept() -> f64 {
    1.0
}
fn default_delta() -> f64 {
    0.01
}
fn default_step_size() -> f64 {
    0.1
}
fn default_max_iters() -> usize {
    10_000
}
fn default_tolerance() -> f64 {
    1e-8
}
fn default_budget() -> usize {
    200
}
fn default_repeats() -> usize {
    20
}
fn default_split_fraction() -> f64 {
    0.5
}
fn default_folds() -> usize {
    5
}

/// `[dataset]` block: a synthetic data distribution.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    /// linear | nonlinear-1 | nonlinear-2 | classification-toy
    pub kind: String,
    pub n: usize,
    pub d: usize,
    /// Coefficients of the linear kind; shorter vectors are zero-padded
    /// to dimension `d`.
    #[serde(default)]
    pub beta: Vec<f64>,
    #[serde(default)]
    pub rho: f64,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default = "default_intercept")]
    pub intercept: f64,
}

impl DatasetConfig {
    pub fn to_spec(&self, seed: u64) -> Result<SyntheticSpec, CliError> {
        let kind = match self.kind.as_str() {
            "linear" => SyntheticKind::Linear,
            "nonlinear-1" => SyntheticKind::Nonlinear1,
            "nonlinear-2" => SyntheticKind::Nonlinear2,
            "classification-toy" => SyntheticKind::ClassificationToy,
            other => {
                return Err(CliError::Config(format!(
                    "dataset.kind: unknown kind '{other}'"
                )))
            }
        };
        let mut beta = self.beta.clone();
        if kind == SyntheticKind::Linear {
            if beta.len() > self.d {
                return Err(CliError::Config(format!(
                    "dataset.beta: {} entries exceed d = {}",
                    beta.len(),
                    self.d
                )));
            }
            beta.resize(self.d, 0.0);
        }
        Ok(SyntheticSpec {
            kind,
            n: self.n,
            d: self.d,
            beta,
            sigma: self.sigma,
            rho: self.rho,
            intercept: self.intercept,
            seed,
        })
    }
}

/// Config for `simulate`: a dataset block plus how many independently
/// seeded datasets to produce.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub dataset: DatasetConfig,
    #[serde(default = "default_count")]
    pub count: usize,
}

/// `[candidates]` block.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CandidatesConfig {
    pub max_subset_size: Option<usize>,
    pub ridge_lambda: Option<f64>,
    /// ranked-subsets | lambda-grid
    pub strategy: Option<String>,
}

impl CandidatesConfig {
    pub fn to_config(&self) -> Result<CandidateConfig, CliError> {
        let strategy = match self.strategy.as_deref() {
            None | Some("ranked-subsets") => CandidateStrategy::RankedSubsets,
            Some("lambda-grid") => CandidateStrategy::LambdaGrid,
            Some(other) => {
                return Err(CliError::Config(format!(
                    "candidates.strategy: unknown strategy '{other}'"
                )))
            }
        };
        Ok(CandidateConfig {
            max_subset_size: self.max_subset_size,
            ridge_lambda: self.ridge_lambda,
            strategy,
        })
    }
}

/// `[bound]` block.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundSection {
    pub delta: f64,
    pub step_size: f64,
    pub max_iters: usize,
    pub tolerance: f64,
    /// Loss clip; omitted means the response range of the training data.
    pub clip_scale: Option<f64>,
}

impl Default for BoundSection {
    fn default() -> Self {
        Self {
            delta: default_delta(),
            step_size: default_step_size(),
            max_iters: default_max_iters(),
            tolerance: default_tolerance(),
            clip_scale: None,
        }
    }
}

impl BoundSection {
    /// Resolves against a training set (for the default clip).
    pub fn to_config(&self, train: &pacmix::LabeledDataset) -> BoundConfig {
        let loss = match self.clip_scale {
            Some(c) => LossSpec { clip_scale: c },
            None => LossSpec::for_dataset(train),
        };
        BoundConfig {
            delta: self.delta,
            step_size: self.step_size,
            max_iters: self.max_iters,
            tolerance: self.tolerance,
            loss,
        }
    }
}

/// `[sbs]` block.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SbsSection {
    pub steps: usize,
    pub batch_size: usize,
    #[serde(default = "default_budget")]
    pub candidate_budget: usize,
    /// Explicit thresholds γ₂…γ_b; omitted means the per-step median.
    pub gamma: Option<Vec<f64>>,
    /// Synthetic label source; without it the data CSV serves as a
    /// finite pool.
    pub generator: Option<DatasetConfig>,
}

impl SbsSection {
    pub fn to_config(&self, bound: &BoundSection) -> SbsConfig {
        let mut cfg = SbsConfig::new(self.steps, self.batch_size);
        cfg.candidate_budget = self.candidate_budget;
        if let Some(g) = &self.gamma {
            cfg.gamma = GammaSchedule::Explicit(g.clone());
        }
        cfg.bound = BoundConfig {
            delta: bound.delta,
            step_size: bound.step_size,
            max_iters: bound.max_iters,
            tolerance: bound.tolerance,
            loss: LossSpec {
                clip_scale: bound.clip_scale.unwrap_or(1.0),
            },
        };
        if bound.clip_scale.is_some() {
            cfg.clip = None; // explicit clip overrides the derive-from-init rule
        }
        cfg
    }
}

/// `[hdr]` block.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HdrSection {
    pub repeats: usize,
    pub split_fraction: f64,
    /// standard-normal | double-exponential | student-t (with `nu`)
    pub density: String,
    pub nu: Option<f64>,
}

impl Default for HdrSection {
    fn default() -> Self {
        Self {
            repeats: default_repeats(),
            split_fraction: default_split_fraction(),
            density: "standard-normal".to_string(),
            nu: None,
        }
    }
}

impl HdrSection {
    pub fn to_config(&self) -> Result<HdrConfig, CliError> {
        let density = match self.density.as_str() {
            "standard-normal" => ErrorDensity::StandardNormal,
            "double-exponential" => ErrorDensity::DoubleExponential,
            "student-t" => {
                let nu = self.nu.ok_or_else(|| {
                    CliError::Config("hdr.density = \"student-t\" needs hdr.nu".into())
                })?;
                ErrorDensity::StudentT { nu }
            }
            other => {
                return Err(CliError::Config(format!(
                    "hdr.density: unknown density '{other}'"
                )))
            }
        };
        Ok(HdrConfig {
            repeats: self.repeats,
            split_fraction: self.split_fraction,
            density,
        })
    }
}

/// `[baseline]` block.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BaselineSection {
    pub folds: usize,
}

impl Default for BaselineSection {
    fn default() -> Self {
        Self {
            folds: default_folds(),
        }
    }
}

/// Config for `fit`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitConfig {
    pub candidates: CandidatesConfig,
    pub bound: BoundSection,
    pub sbs: Option<SbsSection>,
    pub hdr: HdrSection,
    pub baseline: BaselineSection,
}

pub fn load_toml<T: serde::de::DeserializeOwned>(path: &std::path::Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}
