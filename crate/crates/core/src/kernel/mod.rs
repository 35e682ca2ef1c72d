//! Per-region kernel ridge regression of deformation fields.
//!
//! Each surface vertex contributes one training sample: a feature vector of
//! relative positions to `n` sampled reference vertices, paired with the
//! vertex's displacement between the inflated and deflated states. A
//! Gaussian kernel compares features and ridge regression with closed-form
//! weights `α = (K + λI)⁻¹Y` learns the mapping; prediction assembles a
//! full displacement field for an unseen inflated mesh. A per-patient mode
//! treats each whole case as a single concatenated sample instead.
//!
//! Displacements for interior structures (nodules, bronchi, vessels) are
//! transported from the deformed surface by inverse-distance interpolation.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mesh::{DisplacementField, InteriorPointSet, MeshError, Point3, SurfaceMesh, Vec3};

/// Reference-vertex count used when no sampling scheme is configured.
pub const DEFAULT_SAMPLING_N: usize = 32;
/// Surface neighbors used to transport interior points.
pub const DEFAULT_INTERIOR_NEIGHBORS: usize = 8;
/// Ridge regularization default.
pub const DEFAULT_LAMBDA: f64 = 0.1;

#[derive(Debug, Error)]
pub enum KernelError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error("feature vectors have different lengths ({a} vs {b})")]
    FeatureLengthMismatch { a: usize, b: usize },
    #[error("sampling scheme references vertex {index} but mesh has {vertex_count} vertices")]
    IndexOutOfRange { index: usize, vertex_count: usize },
    #[error("sampling scheme needs n >= 1")]
    EmptyScheme,
    #[error("mesh with {vertices} vertices cannot supply {needed} distinct references")]
    NotEnoughVertices { vertices: usize, needed: usize },
    #[error("empty training set")]
    EmptyTraining,
    #[error("training cases have mismatched vertex counts ({a} vs {b})")]
    VertexCountMismatch { a: usize, b: usize },
    #[error("displacement field length {field} does not match mesh vertex count {vertex_count}")]
    FieldLengthMismatch { field: usize, vertex_count: usize },
    #[error("feature dimension {got} incompatible with model ({expected})")]
    DimensionMismatch { got: usize, expected: usize },
    #[error("{name} must be positive, got {value}")]
    BadParam { name: &'static str, value: f64 },
    #[error("singular system, increase lambda")]
    Singular,
    #[error("all features coincide; kernel width heuristic is undefined")]
    DegenerateFeatures,
    #[error("unsupported model format tag {0:?}")]
    BadFormat(String),
}

/// Relative-position feature bundle for one vertex: the flattened
/// `v_i − v_j` differences to the scheme's `n` reference vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    /// Flattened entries, length exactly `3n`.
    pub values: Vec<f64>,
    /// Owner vertex index in its mesh.
    pub vertex: usize,
    /// Owner case id (stamped by [`build_training_set`]).
    pub case_id: usize,
}

/// How the `n` reference vertices are chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum SamplingMode {
    /// Per vertex, its `n` nearest other vertices within the same mesh.
    NearestK,
    /// A fixed reference-vertex set shared by every case. When the owner
    /// vertex is itself a reference, `substitute` takes its place so no
    /// feature ever pairs a vertex with itself.
    FixedIds { ids: Vec<usize>, substitute: usize },
}

/// Feature sampling configuration shared between training and prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingScheme {
    pub n: usize,
    #[serde(flatten)]
    pub mode: SamplingMode,
}

impl SamplingScheme {
    pub fn nearest_k(n: usize) -> Result<Self, KernelError> {
        if n == 0 {
            return Err(KernelError::EmptyScheme);
        }
        Ok(Self {
            n,
            mode: SamplingMode::NearestK,
        })
    }

    /// Fixed reference ids spread over `reference` by farthest-point
    /// sampling; one extra point is kept as the owner substitute.
    pub fn fixed_farthest_point(reference: &SurfaceMesh, n: usize) -> Result<Self, KernelError> {
        if n == 0 {
            return Err(KernelError::EmptyScheme);
        }
        if reference.vertex_count() < n + 2 {
            return Err(KernelError::NotEnoughVertices {
                vertices: reference.vertex_count(),
                needed: n + 2,
            });
        }
        let picked = farthest_point_sample(reference.vertices(), n + 1);
        Ok(Self {
            n,
            mode: SamplingMode::FixedIds {
                ids: picked[..n].to_vec(),
                substitute: picked[n],
            },
        })
    }

    fn max_index(&self) -> Option<usize> {
        match &self.mode {
            SamplingMode::NearestK => None,
            SamplingMode::FixedIds { ids, substitute } => {
                ids.iter().copied().chain([*substitute]).max()
            }
        }
    }
}

/// Greedy farthest-point selection, seeded at the vertex farthest from the
/// centroid; deterministic with index tie-breaks.
fn farthest_point_sample(vertices: &[Point3], count: usize) -> Vec<usize> {
    let centroid = vertices.iter().fold(Vec3::zeros(), |acc, v| acc + v.coords)
        / vertices.len() as f64;
    let start = (0..vertices.len())
        .max_by(|&a, &b| {
            let da = (vertices[a].coords - centroid).norm_squared();
            let db = (vertices[b].coords - centroid).norm_squared();
            da.partial_cmp(&db).unwrap().then(b.cmp(&a))
        })
        .expect("non-empty vertex list");

    let mut picked = vec![start];
    let mut min_dist: Vec<f64> = vertices
        .iter()
        .map(|v| (v - vertices[start]).norm_squared())
        .collect();
    while picked.len() < count {
        let next = (0..vertices.len())
            .max_by(|&a, &b| min_dist[a].partial_cmp(&min_dist[b]).unwrap().then(b.cmp(&a)))
            .unwrap();
        picked.push(next);
        for (i, d) in min_dist.iter_mut().enumerate() {
            *d = d.min((vertices[i] - vertices[next]).norm_squared());
        }
    }
    picked
}

/// One feature vector per vertex of `m`, in vertex order.
pub fn extract_features(
    m: &SurfaceMesh,
    s: &SamplingScheme,
) -> Result<Vec<FeatureVector>, KernelError> {
    if s.n == 0 {
        return Err(KernelError::EmptyScheme);
    }
    if let Some(max) = s.max_index() {
        if max >= m.vertex_count() {
            return Err(KernelError::IndexOutOfRange {
                index: max,
                vertex_count: m.vertex_count(),
            });
        }
    }
    let vertices = m.vertices();
    let mut out = Vec::with_capacity(vertices.len());
    match &s.mode {
        SamplingMode::FixedIds { ids, substitute } => {
            for (i, v) in vertices.iter().enumerate() {
                let mut values = Vec::with_capacity(3 * s.n);
                for &j in ids.iter().take(s.n) {
                    let j = if j == i { *substitute } else { j };
                    let r = v - vertices[j];
                    values.extend_from_slice(&[r.x, r.y, r.z]);
                }
                out.push(FeatureVector {
                    values,
                    vertex: i,
                    case_id: 0,
                });
            }
        }
        SamplingMode::NearestK => {
            if m.vertex_count() < s.n + 1 {
                return Err(KernelError::NotEnoughVertices {
                    vertices: m.vertex_count(),
                    needed: s.n + 1,
                });
            }
            for (i, v) in vertices.iter().enumerate() {
                let mut order: Vec<usize> = (0..vertices.len()).filter(|&j| j != i).collect();
                order.sort_by(|&a, &b| {
                    let da = (vertices[a] - v).norm_squared();
                    let db = (vertices[b] - v).norm_squared();
                    da.partial_cmp(&db).unwrap().then(a.cmp(&b))
                });
                let mut values = Vec::with_capacity(3 * s.n);
                for &j in order.iter().take(s.n) {
                    let r = v - vertices[j];
                    values.extend_from_slice(&[r.x, r.y, r.z]);
                }
                out.push(FeatureVector {
                    values,
                    vertex: i,
                    case_id: 0,
                });
            }
        }
    }
    Ok(out)
}

/// Gaussian kernel `exp(−β‖xi − xj‖² / N)`.
///
/// `n_train` is the training-set size; it rescales the squared distance as
/// written in the model formulation. Callers that disable that behavior
/// pass 1.
pub fn gaussian_kernel(
    xi: &FeatureVector,
    xj: &FeatureVector,
    beta: f64,
    n_train: usize,
) -> Result<f64, KernelError> {
    if xi.values.len() != xj.values.len() {
        return Err(KernelError::FeatureLengthMismatch {
            a: xi.values.len(),
            b: xj.values.len(),
        });
    }
    if !(beta > 0.0) {
        return Err(KernelError::BadParam {
            name: "beta",
            value: beta,
        });
    }
    if n_train == 0 {
        return Err(KernelError::BadParam {
            name: "n_train",
            value: 0.0,
        });
    }
    let d_sq: f64 = xi
        .values
        .iter()
        .zip(&xj.values)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok((-beta * d_sq / n_train as f64).exp())
}

/// Whether samples are per vertex or per case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrainingMode {
    /// One sample per vertex per case; targets are single displacements.
    PerRegion,
    /// One concatenated sample per case; targets are whole fields.
    PerPatient,
}

/// One registered (or ground-truth) case pair available for training.
#[derive(Debug, Clone, Copy)]
pub struct TrainingCase<'a> {
    pub case_id: usize,
    /// Inflated (source) mesh the features are extracted from.
    pub source: &'a SurfaceMesh,
    /// Correspondence displacement field (source to deflated), from
    /// registration or from synthetic ground truth.
    pub displacement: &'a DisplacementField,
}

/// Assembled training matrices: `features` is N×F, `targets` N×D.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    pub features: DMatrix<f64>,
    pub targets: DMatrix<f64>,
    /// (case id, vertex index) provenance per row; for per-patient mode the
    /// vertex index is 0.
    pub provenance: Vec<(usize, usize)>,
}

/// Builds the training matrices for `mode` from registered case pairs.
pub fn build_training_set(
    cases: &[TrainingCase<'_>],
    s: &SamplingScheme,
    mode: TrainingMode,
) -> Result<TrainingSet, KernelError> {
    if cases.is_empty() {
        return Err(KernelError::EmptyTraining);
    }
    for c in cases {
        if c.displacement.len() != c.source.vertex_count() {
            return Err(KernelError::FieldLengthMismatch {
                field: c.displacement.len(),
                vertex_count: c.source.vertex_count(),
            });
        }
    }
    let first_count = cases[0].source.vertex_count();
    let counts_match = cases
        .iter()
        .all(|c| c.source.vertex_count() == first_count);
    let fixed_ids = matches!(s.mode, SamplingMode::FixedIds { .. });
    if (fixed_ids || mode == TrainingMode::PerPatient) && !counts_match {
        let other = cases
            .iter()
            .map(|c| c.source.vertex_count())
            .find(|&v| v != first_count)
            .unwrap();
        return Err(KernelError::VertexCountMismatch {
            a: first_count,
            b: other,
        });
    }

    match mode {
        TrainingMode::PerRegion => {
            let mut rows_x: Vec<Vec<f64>> = Vec::new();
            let mut rows_y: Vec<[f64; 3]> = Vec::new();
            let mut provenance = Vec::new();
            for c in cases {
                let feats = extract_features(c.source, s)?;
                for f in feats {
                    let d = c.displacement.vectors()[f.vertex];
                    provenance.push((c.case_id, f.vertex));
                    rows_x.push(f.values);
                    rows_y.push([d.x, d.y, d.z]);
                }
            }
            Ok(TrainingSet {
                features: rows_to_matrix(&rows_x),
                targets: DMatrix::from_fn(rows_y.len(), 3, |r, c| rows_y[r][c]),
                provenance,
            })
        }
        TrainingMode::PerPatient => {
            let mut rows_x: Vec<Vec<f64>> = Vec::new();
            let mut rows_y: Vec<Vec<f64>> = Vec::new();
            let mut provenance = Vec::new();
            for c in cases {
                let feats = extract_features(c.source, s)?;
                let mut x = Vec::with_capacity(feats.len() * 3 * s.n);
                for f in feats {
                    x.extend_from_slice(&f.values);
                }
                let mut y = Vec::with_capacity(3 * c.source.vertex_count());
                for d in c.displacement.vectors() {
                    y.extend_from_slice(&[d.x, d.y, d.z]);
                }
                provenance.push((c.case_id, 0));
                rows_x.push(x);
                rows_y.push(y);
            }
            Ok(TrainingSet {
                features: rows_to_matrix(&rows_x),
                targets: rows_to_matrix(&rows_y),
                provenance,
            })
        }
    }
}

fn rows_to_matrix(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let ncols = rows.first().map_or(0, |r| r.len());
    DMatrix::from_fn(rows.len(), ncols, |r, c| rows[r][c])
}

/// Fitted kernel ridge model plus everything needed to reuse it.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelModel {
    /// Training features, N×F.
    pub features: DMatrix<f64>,
    /// Training targets, N×D.
    pub targets: DMatrix<f64>,
    /// Ridge weights `(K + λI)⁻¹ targets`, N×D.
    pub weights: DMatrix<f64>,
    pub beta: f64,
    pub lambda: f64,
    /// Divide squared feature distances by the training count inside the
    /// kernel exponent.
    pub divide_by_n: bool,
    pub sampling: SamplingScheme,
    pub mode: TrainingMode,
}

/// Metadata attached to a fit; the numerical hyperparameters go to [`fit`]
/// directly.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelOptions {
    pub divide_by_n: bool,
    pub sampling: SamplingScheme,
    pub mode: TrainingMode,
}

impl KernelModel {
    fn exponent_divisor(&self) -> f64 {
        if self.divide_by_n {
            self.features.nrows() as f64
        } else {
            1.0
        }
    }

    /// Kernel matrix over the stored training features.
    pub fn kernel_matrix(&self) -> DMatrix<f64> {
        kernel_matrix(&self.features, self.beta, self.exponent_divisor())
    }
}

/// Symmetric Gaussian kernel matrix with exact unit diagonal.
fn kernel_matrix(x: &DMatrix<f64>, beta: f64, divisor: f64) -> DMatrix<f64> {
    let n = x.nrows();
    let gram = x * x.transpose();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        k[(i, i)] = 1.0;
        for j in (i + 1)..n {
            let d_sq = (gram[(i, i)] + gram[(j, j)] - 2.0 * gram[(i, j)]).max(0.0);
            let v = (-beta * d_sq / divisor).exp();
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    k
}

/// Rectangular kernel block between query rows and training rows.
fn kernel_cross(q: &DMatrix<f64>, x: &DMatrix<f64>, beta: f64, divisor: f64) -> DMatrix<f64> {
    let cross = q * x.transpose();
    let q_sq: Vec<f64> = (0..q.nrows()).map(|i| q.row(i).norm_squared()).collect();
    let x_sq: Vec<f64> = (0..x.nrows()).map(|j| x.row(j).norm_squared()).collect();
    DMatrix::from_fn(q.nrows(), x.nrows(), |i, j| {
        let d_sq = (q_sq[i] + x_sq[j] - 2.0 * cross[(i, j)]).max(0.0);
        (-beta * d_sq / divisor).exp()
    })
}

/// Kernel width from the median heuristic: β such that the median training
/// squared feature distance (after the /N rescale, when enabled) maps to
/// exponent 1. Pair sampling is deterministic.
pub fn median_heuristic_beta(
    features: &DMatrix<f64>,
    divide_by_n: bool,
    seed: u64,
) -> Result<f64, KernelError> {
    let n = features.nrows();
    if n < 2 {
        return Err(KernelError::EmptyTraining);
    }
    let divisor = if divide_by_n { n as f64 } else { 1.0 };
    const MAX_PAIRS: usize = 20_000;
    let total_pairs = n * (n - 1) / 2;
    let mut d_sq: Vec<f64> = Vec::new();
    if total_pairs <= MAX_PAIRS {
        for i in 0..n {
            for j in (i + 1)..n {
                d_sq.push((features.row(i) - features.row(j)).norm_squared() / divisor);
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        while d_sq.len() < MAX_PAIRS {
            let i = rng.gen_range(0..n);
            let j = rng.gen_range(0..n);
            if i != j {
                d_sq.push((features.row(i) - features.row(j)).norm_squared() / divisor);
            }
        }
    }
    let mid = d_sq.len() / 2;
    d_sq.select_nth_unstable_by(mid, |a, b| a.partial_cmp(b).unwrap());
    let median = d_sq[mid];
    if median <= 0.0 {
        return Err(KernelError::DegenerateFeatures);
    }
    Ok(1.0 / median)
}

/// Solves the ridge problem `α = (K + λI)⁻¹ Y` with all target columns
/// sharing one kernel matrix.
pub fn fit(
    features: &DMatrix<f64>,
    targets: &DMatrix<f64>,
    beta: f64,
    lambda: f64,
    options: ModelOptions,
) -> Result<KernelModel, KernelError> {
    let n = features.nrows();
    if n == 0 || targets.nrows() == 0 {
        return Err(KernelError::EmptyTraining);
    }
    if targets.nrows() != n {
        return Err(KernelError::DimensionMismatch {
            got: targets.nrows(),
            expected: n,
        });
    }
    if !(beta > 0.0) {
        return Err(KernelError::BadParam {
            name: "beta",
            value: beta,
        });
    }
    if lambda < 0.0 {
        return Err(KernelError::BadParam {
            name: "lambda",
            value: lambda,
        });
    }

    let divisor = if options.divide_by_n { n as f64 } else { 1.0 };
    let k = kernel_matrix(features, beta, divisor);
    let mut system = k.clone();
    for i in 0..n {
        system[(i, i)] += lambda;
    }
    let chol = system.clone().cholesky().ok_or(KernelError::Singular)?;
    let weights = chol.solve(targets);

    // Cholesky can succeed numerically on a near-singular system; verify the
    // solution actually solves it.
    let residual = (&system * &weights - targets).norm();
    if residual > 1e-8 * targets.norm().max(f64::MIN_POSITIVE) {
        return Err(KernelError::Singular);
    }

    Ok(KernelModel {
        features: features.clone(),
        targets: targets.clone(),
        weights,
        beta,
        lambda,
        divide_by_n: options.divide_by_n,
        sampling: options.sampling,
        mode: options.mode,
    })
}

/// Predicts a displacement field for the mesh whose per-vertex features are
/// given (in vertex order, as produced by [`extract_features`]).
pub fn predict(
    model: &KernelModel,
    features: &[FeatureVector],
) -> Result<DisplacementField, KernelError> {
    if features.is_empty() {
        return Err(KernelError::EmptyTraining);
    }
    let f = model.features.ncols();
    let divisor = model.exponent_divisor();
    match model.mode {
        TrainingMode::PerRegion => {
            for fv in features {
                if fv.values.len() != f {
                    return Err(KernelError::DimensionMismatch {
                        got: fv.values.len(),
                        expected: f,
                    });
                }
            }
            let q = DMatrix::from_fn(features.len(), f, |r, c| features[r].values[c]);
            let kq = kernel_cross(&q, &model.features, model.beta, divisor);
            let out = kq * &model.weights;
            let vectors: Vec<Vec3> = (0..out.nrows())
                .map(|r| Vec3::new(out[(r, 0)], out[(r, 1)], out[(r, 2)]))
                .collect();
            Ok(DisplacementField::new(vectors)?)
        }
        TrainingMode::PerPatient => {
            let concat_len: usize = features.iter().map(|fv| fv.values.len()).sum();
            if concat_len != f {
                return Err(KernelError::DimensionMismatch {
                    got: concat_len,
                    expected: f,
                });
            }
            let mut row = Vec::with_capacity(concat_len);
            for fv in features {
                row.extend_from_slice(&fv.values);
            }
            let q = DMatrix::from_fn(1, f, |_, c| row[c]);
            let kq = kernel_cross(&q, &model.features, model.beta, divisor);
            let out = kq * &model.weights;
            if out.ncols() % 3 != 0 {
                return Err(KernelError::DimensionMismatch {
                    got: out.ncols(),
                    expected: 3,
                });
            }
            let vectors: Vec<Vec3> = (0..out.ncols() / 3)
                .map(|i| Vec3::new(out[(0, 3 * i)], out[(0, 3 * i + 1)], out[(0, 3 * i + 2)]))
                .collect();
            Ok(DisplacementField::new(vectors)?)
        }
    }
}

/// Transports interior points with the surface deformation: each point gets
/// the normalized inverse-distance weighted mean of its `m` nearest surface
/// vertices' displacements. A point coinciding with a surface vertex takes
/// that vertex's displacement exactly.
pub fn interpolate_interior(
    surface_before: &SurfaceMesh,
    surface_disp: &DisplacementField,
    interior: &InteriorPointSet,
    m: usize,
) -> Result<Vec<Vec3>, KernelError> {
    if surface_disp.len() != surface_before.vertex_count() {
        return Err(KernelError::FieldLengthMismatch {
            field: surface_disp.len(),
            vertex_count: surface_before.vertex_count(),
        });
    }
    if m == 0 {
        return Err(KernelError::BadParam {
            name: "m",
            value: 0.0,
        });
    }
    if interior.points.is_empty() {
        return Ok(Vec::new());
    }
    let m = m.min(surface_before.vertex_count());
    let vertices = surface_before.vertices();
    let disp = surface_disp.vectors();
    const SNAP_MM: f64 = 1e-12;

    let mut out = Vec::with_capacity(interior.points.len());
    for p in &interior.points {
        let mut order: Vec<usize> = (0..vertices.len()).collect();
        order.sort_by(|&a, &b| {
            let da = (vertices[a] - p).norm_squared();
            let db = (vertices[b] - p).norm_squared();
            da.partial_cmp(&db).unwrap().then(a.cmp(&b))
        });
        let nearest = &order[..m];
        let d0 = (vertices[nearest[0]] - p).norm();
        if d0 <= SNAP_MM {
            out.push(disp[nearest[0]]);
            continue;
        }
        let inv: Vec<f64> = nearest
            .iter()
            .map(|&j| 1.0 / (vertices[j] - p).norm())
            .collect();
        let total: f64 = inv.iter().sum();
        let mut v = Vec3::zeros();
        for (&j, w) in nearest.iter().zip(&inv) {
            v += disp[j] * (w / total);
        }
        out.push(v);
    }
    Ok(out)
}

/// Serializable mirror of [`KernelModel`]; versioned by `format`.
#[derive(Debug, Serialize, Deserialize)]
struct KernelModelFile {
    format: String,
    beta: f64,
    lambda: f64,
    divide_by_n: bool,
    sampling: SamplingScheme,
    mode: TrainingMode,
    features: Vec<Vec<f64>>,
    targets: Vec<Vec<f64>>,
    weights: Vec<Vec<f64>>,
}

const MODEL_FORMAT: &str = "kernel-model/v1";

impl KernelModel {
    pub fn to_json(&self) -> String {
        let file = KernelModelFile {
            format: MODEL_FORMAT.to_string(),
            beta: self.beta,
            lambda: self.lambda,
            divide_by_n: self.divide_by_n,
            sampling: self.sampling.clone(),
            mode: self.mode,
            features: matrix_rows(&self.features),
            targets: matrix_rows(&self.targets),
            weights: matrix_rows(&self.weights),
        };
        serde_json::to_string(&file).expect("model serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, KernelError> {
        let file: KernelModelFile =
            serde_json::from_str(text).map_err(|e| KernelError::BadFormat(e.to_string()))?;
        if file.format != MODEL_FORMAT {
            return Err(KernelError::BadFormat(file.format));
        }
        Ok(Self {
            features: rows_to_matrix(&file.features),
            targets: rows_to_matrix(&file.targets),
            weights: rows_to_matrix(&file.weights),
            beta: file.beta,
            lambda: file.lambda,
            divide_by_n: file.divide_by_n,
            sampling: file.sampling,
            mode: file.mode,
        })
    }
}

fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|r| m.row(r).iter().copied().collect())
        .collect()
}

#[cfg(test)]
mod tests;
