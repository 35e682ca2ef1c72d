//! Leave-one-out cross-validation of the kernel deformation model.
//!
//! Each fold holds out one case, trains on the correspondence fields of the
//! remaining cases, reconstructs the held-out deflated state from its
//! inflated mesh alone, and scores the prediction against the true deflated
//! mesh. Reported numbers are rounded to 1e-6 before aggregation, so the
//! aggregate rows are exactly recomputable from the per-fold rows.

use serde::{Deserialize, Serialize};

use crate::kernel::{
    self, build_training_set, extract_features, median_heuristic_beta, ModelOptions,
    SamplingScheme, TrainingCase,
};
use crate::mesh::{apply_displacement, DisplacementField, Point3};
use crate::metrics;
use crate::registration;

use super::config::{
    PipelineConfig, SamplingModeConfig, TrainingFieldConfig,
};
use super::{Case, PipelineError};

/// Rounding applied to every reported value.
fn round6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

/// Per-fold evaluation of one held-out case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub case_id: String,
    pub volume_ratio_true: f64,
    pub volume_ratio_predicted: f64,
    /// |predicted − true| volume ratio, in percentage points.
    pub volume_ratio_error_pp: f64,
    /// Per-clip TRE of the predicted deflated clips, mm.
    pub clip_tre_mm: Vec<f64>,
    /// Per-clip true displacement magnitudes, mm (the scale the TREs
    /// should be judged against).
    pub clip_displacement_mm: Vec<f64>,
    pub md_mm: f64,
    pub hd_mm: f64,
    /// Mean interior-point position error, when the case has interior
    /// points with known true positions.
    pub interior_error_mm: Option<f64>,
}

/// Mean and min–max range of one metric across folds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl Aggregate {
    fn over(values: impl IntoIterator<Item = f64>) -> Option<Self> {
        let values: Vec<f64> = values.into_iter().collect();
        if values.is_empty() {
            return None;
        }
        let mean = round6(values.iter().sum::<f64>() / values.len() as f64);
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Some(Self { mean, min, max })
    }
}

/// Full leave-one-out report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossValReport {
    pub folds: Vec<FoldReport>,
    pub volume_ratio_error_pp: Aggregate,
    pub clip_tre_mm: Aggregate,
    pub clip_displacement_mm: Aggregate,
    pub md_mm: Aggregate,
    pub hd_mm: Aggregate,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interior_error_mm: Option<Aggregate>,
    /// Set when at least one case skipped interior evaluation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CrossValReport {
    fn from_folds(folds: Vec<FoldReport>) -> Self {
        let volume_ratio_error_pp =
            Aggregate::over(folds.iter().map(|f| f.volume_ratio_error_pp)).expect("non-empty");
        let clip_tre_mm =
            Aggregate::over(folds.iter().flat_map(|f| f.clip_tre_mm.iter().copied()))
                .expect("non-empty");
        let clip_displacement_mm = Aggregate::over(
            folds
                .iter()
                .flat_map(|f| f.clip_displacement_mm.iter().copied()),
        )
        .expect("non-empty");
        let md_mm = Aggregate::over(folds.iter().map(|f| f.md_mm)).expect("non-empty");
        let hd_mm = Aggregate::over(folds.iter().map(|f| f.hd_mm)).expect("non-empty");
        let interior_error_mm =
            Aggregate::over(folds.iter().filter_map(|f| f.interior_error_mm));
        let skipped = folds.iter().filter(|f| f.interior_error_mm.is_none()).count();
        let note = (skipped > 0).then(|| {
            format!("{skipped} of {} folds had no interior points; interior evaluation skipped there", folds.len())
        });
        Self {
            folds,
            volume_ratio_error_pp,
            clip_tre_mm,
            clip_displacement_mm,
            md_mm,
            hd_mm,
            interior_error_mm,
            note,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    /// Aligned-column text rendering: per-fold rows plus mean (min - max)
    /// summary lines.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<10} {:>10} {:>10} {:>9} {:>9} {:>9} {:>9} {:>9}\n",
            "case", "vcr_true", "vcr_pred", "err_pp", "tre1_mm", "tre2_mm", "md_mm", "hd_mm"
        ));
        for f in &self.folds {
            let tre1 = f.clip_tre_mm.first().copied().unwrap_or(f64::NAN);
            let tre2 = f.clip_tre_mm.get(1).copied().unwrap_or(f64::NAN);
            out.push_str(&format!(
                "{:<10} {:>10.4} {:>10.4} {:>9.3} {:>9.3} {:>9.3} {:>9.3} {:>9.3}\n",
                f.case_id,
                f.volume_ratio_true,
                f.volume_ratio_predicted,
                f.volume_ratio_error_pp,
                tre1,
                tre2,
                f.md_mm,
                f.hd_mm
            ));
        }
        out.push('\n');
        let line = |name: &str, a: &Aggregate| {
            format!("{:<24} {:.3} ({:.3} - {:.3})\n", name, a.mean, a.min, a.max)
        };
        out.push_str(&line("volume error [pp]", &self.volume_ratio_error_pp));
        out.push_str(&line("clip TRE [mm]", &self.clip_tre_mm));
        out.push_str(&line("clip displacement [mm]", &self.clip_displacement_mm));
        out.push_str(&line("MD [mm]", &self.md_mm));
        out.push_str(&line("HD [mm]", &self.hd_mm));
        if let Some(a) = &self.interior_error_mm {
            out.push_str(&line("interior error [mm]", a));
        }
        if let Some(note) = &self.note {
            out.push_str(&format!("note: {note}\n"));
        }
        out
    }
}

/// Runs leave-one-out cross-validation over `cases`.
///
/// Deterministic for a fixed config and dataset. Any fold failure aborts
/// the whole run, naming the held-out case.
pub fn run_crossval(
    cases: &[Case],
    config: &PipelineConfig,
) -> Result<CrossValReport, PipelineError> {
    if cases.len() < 2 {
        return Err(PipelineError::TooFewCases(cases.len()));
    }

    let mut folds = Vec::with_capacity(cases.len());
    for held_out in 0..cases.len() {
        let fold = run_fold(cases, held_out, config).map_err(|e| PipelineError::FoldFailed {
            case: cases[held_out].id.clone(),
            source: Box::new(e),
        })?;
        folds.push(fold);
    }
    Ok(CrossValReport::from_folds(folds))
}

fn run_fold(
    cases: &[Case],
    held_out: usize,
    config: &PipelineConfig,
) -> Result<FoldReport, PipelineError> {
    let test = &cases[held_out];
    let train_indices: Vec<usize> = (0..cases.len()).filter(|&i| i != held_out).collect();
    debug_assert!(!train_indices.contains(&held_out));

    // Training correspondence fields, either stored or freshly registered.
    let mut registered: Vec<DisplacementField> = Vec::new();
    let mut field_refs: Vec<(usize, &DisplacementField)> = Vec::new();
    match config.crossval.training_field {
        TrainingFieldConfig::Truth => {
            for &i in &train_indices {
                let f = cases[i]
                    .truth_field
                    .as_ref()
                    .ok_or_else(|| PipelineError::MissingTruth {
                        case: cases[i].id.clone(),
                    })?;
                field_refs.push((i, f));
            }
        }
        TrainingFieldConfig::Registration => {
            let params = config.registration.to_params();
            for &i in &train_indices {
                let result = registration::register(
                    &cases[i].inflated,
                    &cases[i].deflated,
                    &cases[i].clips,
                    &params,
                )?;
                registered.push(result.displacement);
            }
            for (k, &i) in train_indices.iter().enumerate() {
                field_refs.push((i, &registered[k]));
            }
        }
    }

    // Feature scheme from the first training case; reference ids are vertex
    // indices, shared across cases by correspondence.
    let reference = &cases[field_refs[0].0].inflated;
    let scheme = match config.kernel.sampling_mode {
        SamplingModeConfig::FixedIds => {
            SamplingScheme::fixed_farthest_point(reference, config.kernel.sampling_n)?
        }
        SamplingModeConfig::NearestK => SamplingScheme::nearest_k(config.kernel.sampling_n)?,
    };

    let training_cases: Vec<TrainingCase<'_>> = field_refs
        .iter()
        .map(|&(i, f)| TrainingCase {
            case_id: i,
            source: &cases[i].inflated,
            displacement: f,
        })
        .collect();
    let mode = config.kernel.training_mode.into();
    let training = build_training_set(&training_cases, &scheme, mode)?;

    let beta = match config.kernel.beta {
        Some(b) => b,
        None => median_heuristic_beta(
            &training.features,
            config.kernel.divide_by_n,
            config.crossval.seed,
        )?,
    };
    let model = kernel::fit(
        &training.features,
        &training.targets,
        beta,
        config.kernel.lambda,
        ModelOptions {
            divide_by_n: config.kernel.divide_by_n,
            sampling: scheme.clone(),
            mode,
        },
    )?;

    let test_features = extract_features(&test.inflated, &scheme)?;
    let predicted_field = kernel::predict(&model, &test_features)?;
    let predicted = apply_displacement(&test.inflated, &predicted_field)?;

    // Scores against the true deflated state.
    let vcr_true = metrics::volume_change_ratio(&test.inflated, &test.deflated)?;
    let vcr_pred = metrics::volume_change_ratio(&test.inflated, &predicted)?;
    let md = metrics::mean_distance(&predicted, &test.deflated)?;
    let hd = metrics::hausdorff_distance(&predicted, &test.deflated)?;

    let predicted_clips: Vec<Point3> = test
        .clips
        .iter()
        .map(|c| c.transported(test.inflated.triangles(), predicted.vertices()))
        .collect();
    let true_clips: Vec<Point3> = test.clips.iter().map(|c| c.target_pos).collect();
    let tre = if test.clips.is_empty() {
        Vec::new()
    } else {
        metrics::target_registration_error(&predicted_clips, &true_clips)?
    };
    let clip_disp: Vec<f64> = test
        .clips
        .iter()
        .map(|c| (c.target_pos - c.source_pos).norm())
        .collect();

    let interior_error_mm = match (&test.interior, &test.interior_deflated) {
        (Some(interior), Some(truth)) if !interior.points.is_empty() => {
            let disp = kernel::interpolate_interior(
                &test.inflated,
                &predicted_field,
                interior,
                config.kernel.interior_neighbors,
            )?;
            let mean_err = interior
                .points
                .iter()
                .zip(&disp)
                .zip(&truth.points)
                .map(|((p, d), t)| (p + d - t).norm())
                .sum::<f64>()
                / interior.points.len() as f64;
            Some(round6(mean_err))
        }
        _ => None,
    };

    Ok(FoldReport {
        case_id: test.id.clone(),
        volume_ratio_true: round6(vcr_true),
        volume_ratio_predicted: round6(vcr_pred),
        volume_ratio_error_pp: round6((vcr_pred - vcr_true).abs() * 100.0),
        clip_tre_mm: tre.into_iter().map(round6).collect(),
        clip_displacement_mm: clip_disp.into_iter().map(round6).collect(),
        md_mm: round6(md),
        hd_mm: round6(hd),
        interior_error_mm,
    })
}
