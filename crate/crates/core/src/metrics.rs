//! Surface comparison metrics: mean distance, Hausdorff distance, target
//! registration error, and volume-change ratio.
//!
//! Distances are sampled at mesh vertices and measured point-to-surface in
//! both directions, so MD and HD are symmetric in their arguments by
//! construction. Dense surface sampling can be added behind the same
//! interface if vertex resolution ever becomes the bottleneck.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mesh::{self, ClosestPointIndex, CompensatedSum, MeshError, Point3, SurfaceMesh};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error("landmark lists have different lengths ({predicted} vs {truth})")]
    LandmarkMismatch { predicted: usize, truth: usize },
    #[error("landmark lists are empty")]
    NoLandmarks,
    #[error("inflated mesh has zero volume")]
    ZeroVolume,
    #[error("inconsistent report: {0}")]
    InvalidReport(String),
}

/// Evaluation summary for one mesh pair.
///
/// Serializes to a flat JSON object with these exact key names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub md_mm: f64,
    pub hd_mm: f64,
    /// Raw per-landmark errors, never collapsed to a mean, so min–max
    /// ranges stay reproducible.
    pub tre_mm: Vec<f64>,
    /// Deflated volume divided by inflated volume.
    pub volume_change_ratio: f64,
}

impl MetricsReport {
    pub fn new(
        md_mm: f64,
        hd_mm: f64,
        tre_mm: Vec<f64>,
        volume_change_ratio: f64,
    ) -> Result<Self, MetricsError> {
        if !(md_mm >= 0.0 && hd_mm >= 0.0) || md_mm > hd_mm {
            return Err(MetricsError::InvalidReport(format!(
                "require 0 <= md ({md_mm}) <= hd ({hd_mm})"
            )));
        }
        if tre_mm.iter().any(|t| !(*t >= 0.0)) {
            return Err(MetricsError::InvalidReport(
                "negative or non-finite TRE entry".into(),
            ));
        }
        if !(volume_change_ratio > 0.0) {
            return Err(MetricsError::InvalidReport(format!(
                "volume change ratio must be positive, got {volume_change_ratio}"
            )));
        }
        Ok(Self {
            md_mm,
            hd_mm,
            tre_mm,
            volume_change_ratio,
        })
    }
}

/// Mean of the nearest bidirectional point-to-surface distances:
/// `½·[mean over a's vertices of dist(v, b) + mean over b's vertices of dist(v, a)]`.
pub fn mean_distance(a: &SurfaceMesh, b: &SurfaceMesh) -> Result<f64, MetricsError> {
    let (sum_ab, _) = directed_distances(a, b)?;
    let (sum_ba, _) = directed_distances(b, a)?;
    Ok(0.5 * (sum_ab / a.vertex_count() as f64 + sum_ba / b.vertex_count() as f64))
}

/// Vertex-sampled symmetric Hausdorff distance: the largest of the nearest
/// point-to-surface distances taken over the vertices of both meshes.
pub fn hausdorff_distance(a: &SurfaceMesh, b: &SurfaceMesh) -> Result<f64, MetricsError> {
    let (_, max_ab) = directed_distances(a, b)?;
    let (_, max_ba) = directed_distances(b, a)?;
    Ok(max_ab.max(max_ba))
}

/// Both directed reductions in one pass: compensated distance sum and max.
fn directed_distances(from: &SurfaceMesh, to: &SurfaceMesh) -> Result<(f64, f64), MetricsError> {
    let index = ClosestPointIndex::new(to)?;
    let mut sum = CompensatedSum::new();
    let mut max = 0.0f64;
    for v in from.vertices() {
        let d = index.closest(v).distance;
        sum.add(d);
        max = max.max(d);
    }
    Ok((sum.total(), max))
}

/// Per-landmark Euclidean errors `|predicted_k − truth_k|`.
pub fn target_registration_error(
    predicted: &[Point3],
    truth: &[Point3],
) -> Result<Vec<f64>, MetricsError> {
    if predicted.len() != truth.len() {
        return Err(MetricsError::LandmarkMismatch {
            predicted: predicted.len(),
            truth: truth.len(),
        });
    }
    if predicted.is_empty() {
        return Err(MetricsError::NoLandmarks);
    }
    Ok(predicted
        .iter()
        .zip(truth)
        .map(|(p, t)| (p - t).norm())
        .collect())
}

/// `volume(deflated) / volume(inflated)`; both meshes must be closed.
pub fn volume_change_ratio(
    inflated: &SurfaceMesh,
    deflated: &SurfaceMesh,
) -> Result<f64, MetricsError> {
    let vi = mesh::mesh_volume(inflated)?.mm3;
    let vd = mesh::mesh_volume(deflated)?.mm3;
    if vi == 0.0 {
        return Err(MetricsError::ZeroVolume);
    }
    Ok(vd / vi)
}

#[cfg(test)]
mod tests;
