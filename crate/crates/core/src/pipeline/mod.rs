//! End-to-end orchestration: mesh and dataset I/O, rigid coordinate
//! normalization, kernel cross-validation, and report emission.

pub mod align;
pub mod config;
pub mod crossval;
pub mod io;

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::kernel::KernelError;
use crate::mesh::{DisplacementField, InteriorPointSet, MeshError, SurfaceMesh};
use crate::metrics::MetricsError;
use crate::registration::{LandmarkPair, RegistrationError};
use crate::synthetic::{SyntheticCase, SyntheticError};

pub use align::rigid_align;
pub use config::PipelineConfig;
pub use crossval::{run_crossval, CrossValReport, FoldReport};
pub use io::{load_mesh, save_mesh};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("unsupported mesh extension {extension:?} (expected .off or .ply)")]
    UnsupportedExtension { extension: String },
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Registration(#[from] RegistrationError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Synthetic(#[from] SyntheticError),
    #[error("need at least {needed} landmark pairs, got {got}")]
    NotEnoughLandmarks { needed: usize, got: usize },
    #[error("degenerate landmark configuration")]
    DegenerateLandmarks,
    #[error("case {case} has no correspondence field and the config asks to train on truth fields")]
    MissingTruth { case: String },
    #[error("cross-validation needs at least 2 cases, got {0}")]
    TooFewCases(usize),
    #[error("fold {case} failed: {source}")]
    FoldFailed {
        case: String,
        #[source]
        source: Box<PipelineError>,
    },
}

impl PipelineError {
    /// CLI exit code: 2 for numerical failures, 1 for validation and I/O
    /// problems.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Registration(RegistrationError::Diverged { .. })
            | PipelineError::Kernel(KernelError::Singular) => 2,
            PipelineError::FoldFailed { source, .. } => source.exit_code(),
            _ => 1,
        }
    }
}

/// Fully loaded case ready for registration or cross-validation.
#[derive(Debug, Clone)]
pub struct Case {
    pub id: String,
    pub inflated: SurfaceMesh,
    pub deflated: SurfaceMesh,
    pub clips: Vec<LandmarkPair>,
    /// Exact correspondence field (synthetic truth or a stored registration
    /// result), when available.
    pub truth_field: Option<DisplacementField>,
    pub interior: Option<InteriorPointSet>,
    /// True deflated interior positions, when known.
    pub interior_deflated: Option<InteriorPointSet>,
}

impl From<SyntheticCase> for Case {
    fn from(c: SyntheticCase) -> Self {
        Self {
            id: format!("case_{:03}", c.id),
            inflated: c.inflated,
            deflated: c.deflated,
            clips: c.clips,
            truth_field: Some(c.truth_field),
            interior: Some(c.interior),
            interior_deflated: Some(c.interior_deflated),
        }
    }
}

/// On-disk description of one case; all paths are validated (existence and
/// parse) before any compute starts.
#[derive(Debug, Clone)]
pub struct CaseRecord {
    pub id: String,
    pub source_mesh: PathBuf,
    pub target_mesh: PathBuf,
    pub clips: PathBuf,
    pub truth_field: Option<PathBuf>,
    pub interior: Option<PathBuf>,
    /// Optional rigid transform into a common reference frame, applied to
    /// meshes and clips on load.
    pub reference_transform: Option<PathBuf>,
}

impl CaseRecord {
    /// Record for the fixed directory layout written by
    /// [`io::save_dataset`].
    pub fn from_dir(dir: &Path) -> Result<Self, PipelineError> {
        let id = dir
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "case".to_string());
        let require = |name: &str| -> Result<PathBuf, PipelineError> {
            let p = dir.join(name);
            if p.exists() {
                Ok(p)
            } else {
                Err(PipelineError::Io {
                    path: p,
                    source: std::io::Error::new(std::io::ErrorKind::NotFound, "missing file"),
                })
            }
        };
        let optional = |name: &str| {
            let p = dir.join(name);
            p.exists().then_some(p)
        };
        Ok(Self {
            id,
            source_mesh: require("inflated.off")?,
            target_mesh: require("deflated.off")?,
            clips: require("clips.json")?,
            truth_field: optional("truth.csv"),
            interior: optional("interior.json"),
            reference_transform: optional("transform.json"),
        })
    }

    /// Loads and validates everything the record references.
    pub fn load(&self) -> Result<Case, PipelineError> {
        let mut inflated = io::load_mesh(&self.source_mesh)?;
        let mut deflated = io::load_mesh(&self.target_mesh)?;
        let raw_clips = io::load_clips(&self.clips)?;

        let mut clip_pairs: Vec<(crate::mesh::Point3, crate::mesh::Point3)> = raw_clips;
        if let Some(tf_path) = &self.reference_transform {
            let (r, t) = io::load_transform(tf_path)?;
            inflated = align::transform_mesh(&inflated, &r, &t);
            deflated = align::transform_mesh(&deflated, &r, &t);
            for (s, d) in &mut clip_pairs {
                *s = r * *s + t;
                *d = r * *d + t;
            }
        }

        let clips = clip_pairs
            .into_iter()
            .map(|(s, d)| LandmarkPair::on_surface(&inflated, s, d))
            .collect::<Result<Vec<_>, _>>()?;

        let truth_field = match &self.truth_field {
            Some(p) => {
                let f = io::load_displacement_csv(p, inflated.vertex_count())?;
                Some(f)
            }
            None => None,
        };
        let (interior, interior_deflated) = match &self.interior {
            Some(p) => {
                let (pts, displaced) = io::load_interior(p)?;
                (Some(pts), displaced)
            }
            None => (None, None),
        };

        Ok(Case {
            id: self.id.clone(),
            inflated,
            deflated,
            clips,
            truth_field,
            interior,
            interior_deflated,
        })
    }
}

/// Loads a dataset directory (one subdirectory per case), fail-fast: every
/// referenced file is located and parsed before the first case is returned.
pub fn load_dataset(dir: &Path) -> Result<Vec<Case>, PipelineError> {
    let mut case_dirs: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| PipelineError::Io {
            path: dir.to_path_buf(),
            source: e,
        })?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    case_dirs.sort();

    let records = case_dirs
        .iter()
        .map(|d| CaseRecord::from_dir(d))
        .collect::<Result<Vec<_>, _>>()?;
    records.iter().map(|r| r.load()).collect()
}
