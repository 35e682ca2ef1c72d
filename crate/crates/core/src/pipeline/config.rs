//! Pipeline configuration: one TOML file covering every hyperparameter,
//! with CLI flags overriding individual fields.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::kernel::{self, TrainingMode};
use crate::registration::{RegistrationParams, StepControl};
use crate::synthetic::ParamRanges;

use super::PipelineError;

/// Complete toolkit configuration. Every field has a default, so an empty
/// file (or no file) is valid.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub registration: RegistrationConfig,
    pub kernel: KernelConfig,
    pub crossval: CrossvalConfig,
    pub synthetic: SyntheticConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RegistrationConfig {
    /// Clip constraint weight ω; 0 reproduces the clip-free method.
    pub clip_weight: f64,
    /// Laplacian preservation weight μ.
    pub laplacian_weight: f64,
    pub max_iterations: usize,
    /// Relative total-energy decrease that stops the run.
    pub convergence_tol: f64,
    /// Largest per-vertex move attempted on the first iteration, mm.
    pub initial_step_mm: f64,
}

impl Default for RegistrationConfig {
    fn default() -> Self {
        Self {
            clip_weight: 1.0,
            laplacian_weight: 1.0,
            max_iterations: 300,
            convergence_tol: 1e-6,
            initial_step_mm: 1.0,
        }
    }
}

impl RegistrationConfig {
    pub fn to_params(&self) -> RegistrationParams {
        RegistrationParams {
            clip_weight: self.clip_weight,
            laplacian_weight: self.laplacian_weight,
            max_iterations: self.max_iterations,
            convergence_tol: self.convergence_tol,
            step: StepControl {
                initial_step_mm: self.initial_step_mm,
                ..StepControl::default()
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KernelConfig {
    /// Ridge regularization λ.
    pub lambda: f64,
    /// Kernel width β; omit to use the median heuristic.
    pub beta: Option<f64>,
    /// Divide squared feature distances by the training count inside the
    /// kernel exponent.
    pub divide_by_n: bool,
    /// Reference vertices per feature vector.
    pub sampling_n: usize,
    pub sampling_mode: SamplingModeConfig,
    pub training_mode: TrainingModeConfig,
    /// Surface neighbors used to transport interior points.
    pub interior_neighbors: usize,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self {
            lambda: kernel::DEFAULT_LAMBDA,
            beta: None,
            divide_by_n: true,
            sampling_n: kernel::DEFAULT_SAMPLING_N,
            sampling_mode: SamplingModeConfig::FixedIds,
            training_mode: TrainingModeConfig::PerRegion,
            interior_neighbors: kernel::DEFAULT_INTERIOR_NEIGHBORS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplingModeConfig {
    /// Farthest-point reference vertices shared across cases.
    FixedIds,
    /// Per-vertex nearest neighbors.
    NearestK,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrainingModeConfig {
    PerRegion,
    PerPatient,
}

impl From<TrainingModeConfig> for TrainingMode {
    fn from(c: TrainingModeConfig) -> Self {
        match c {
            TrainingModeConfig::PerRegion => TrainingMode::PerRegion,
            TrainingModeConfig::PerPatient => TrainingMode::PerPatient,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CrossvalConfig {
    /// Where training correspondence fields come from: stored truth fields
    /// or registration runs.
    pub training_field: TrainingFieldConfig,
    /// Seed for the deterministic parts of model selection (median
    /// heuristic pair sampling).
    pub seed: u64,
}

impl Default for CrossvalConfig {
    fn default() -> Self {
        Self {
            training_field: TrainingFieldConfig::Truth,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrainingFieldConfig {
    /// Use each case's stored correspondence field; error when absent.
    Truth,
    /// Register each training pair (with clips) and use the result.
    Registration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SyntheticConfig {
    pub n_cases: usize,
    pub base_seed: u64,
    pub contraction_ratio: (f64, f64),
    pub rotation_deg: (f64, f64),
    pub sag_mm: (f64, f64),
    pub vertex_budget: usize,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        let r = ParamRanges::default();
        Self {
            n_cases: 12,
            base_seed: 7,
            contraction_ratio: r.contraction_ratio,
            rotation_deg: r.rotation_deg,
            sag_mm: r.sag_mm,
            vertex_budget: r.vertex_budget,
        }
    }
}

impl SyntheticConfig {
    pub fn ranges(&self) -> ParamRanges {
        ParamRanges {
            contraction_ratio: self.contraction_ratio,
            rotation_deg: self.rotation_deg,
            sag_mm: self.sag_mm,
            vertex_budget: self.vertex_budget,
        }
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path).map_err(|e| PipelineError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self, PipelineError> {
        toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serialization cannot fail")
    }
}
