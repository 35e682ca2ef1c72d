//! Deformable mesh registration with optional surgical-clip constraints.
//!
//! [`register`] deforms a source surface onto a target by minimizing
//!
//! ```text
//! E(u) = E_shape(u) + E_clip(u) + E_laplacian(u)
//! ```
//!
//! where `E_shape` is the bidirectional mean point-to-surface distance
//! between the deformed source and the target, `E_clip` is the weighted sum
//! of distances between transported clip positions and their target
//! positions, and `E_laplacian` penalizes change of the per-vertex discrete
//! Laplacian relative to the source (the shape-preservation term).
//!
//! The optimizer is plain gradient descent on the per-vertex displacements
//! with a backtracking line search. Closest-point correspondences are
//! refreshed once per outer iteration and held fixed inside the line
//! search; the frozen energy upper-bounds the true energy and touches it at
//! the current iterate, so every accepted step decreases the true energy
//! and the reported trace is monotone.

use thiserror::Error;

use crate::mesh::{
    self, apply_displacement, laplacian_with_neighbors, ClosestPointIndex, DisplacementField,
    MeshError, Point3, SurfaceMesh, Vec3,
};
use crate::metrics::{self, MetricsError, MetricsReport};

/// Clips must sit within this distance of the source surface.
pub const CLIP_SURFACE_TOL_MM: f64 = 1e-3;

#[derive(Debug, Error)]
pub enum RegistrationError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("clip position contains a non-finite coordinate")]
    NonFiniteClip,
    #[error("clip at ({x}, {y}, {z}) is {distance:.6} mm from the source surface (tolerance {tolerance} mm)")]
    ClipOffSurface {
        x: f64,
        y: f64,
        z: f64,
        distance: f64,
        tolerance: f64,
    },
    #[error("negative weight: {name} = {value}")]
    NegativeWeight { name: &'static str, value: f64 },
    #[error("{name} must be at least {min}, got {value}")]
    ParamOutOfRange {
        name: &'static str,
        min: f64,
        value: f64,
    },
    #[error("mesh has {count} vertices; registration requires at least 4")]
    TooFewVertices { count: usize },
    #[error("diverged: non-finite energy at iteration {iteration}")]
    Diverged {
        iteration: usize,
        trace: Vec<EnergyTraceRow>,
    },
}

/// Attachment of a point to a fixed location on a mesh surface: a triangle,
/// barycentric coordinates inside it, and the residual offset from that
/// surface point. Evaluating the anchor on deformed vertices transports the
/// point with the deformation, and the evaluation is differentiable in the
/// vertex positions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceAnchor {
    pub triangle: usize,
    pub barycentric: [f64; 3],
    /// Attached point minus the anchored surface point; at most
    /// [`CLIP_SURFACE_TOL_MM`] long for clips.
    pub offset: Vec3,
    /// Corner of `triangle` with the largest barycentric weight.
    pub nearest_vertex: usize,
}

impl SurfaceAnchor {
    /// Anchors `p` to the closest point of `mesh`.
    pub fn bind(mesh: &SurfaceMesh, p: &Point3) -> Result<Self, MeshError> {
        let hit = ClosestPointIndex::new(mesh)?.closest(p);
        let tri = mesh.triangles()[hit.triangle];
        let corner = (0..3)
            .max_by(|&a, &b| {
                hit.barycentric[a]
                    .partial_cmp(&hit.barycentric[b])
                    .unwrap()
            })
            .unwrap();
        Ok(Self {
            triangle: hit.triangle,
            barycentric: hit.barycentric,
            offset: p - hit.point,
            nearest_vertex: tri[corner],
        })
    }

    /// Anchor position evaluated against an arbitrary vertex array sharing
    /// the source connectivity.
    pub fn evaluate(&self, triangles: &[[usize; 3]], vertices: &[Point3]) -> Point3 {
        let [i0, i1, i2] = triangles[self.triangle];
        let p = vertices[i0].coords * self.barycentric[0]
            + vertices[i1].coords * self.barycentric[1]
            + vertices[i2].coords * self.barycentric[2];
        Point3::from(p + self.offset)
    }
}

/// Paired clip positions on the source and target surfaces.
#[derive(Debug, Clone, PartialEq)]
pub struct LandmarkPair {
    /// Clip position on the inflated (source) surface.
    pub source_pos: Point3,
    /// Matching clip position on the deflated (target) surface.
    pub target_pos: Point3,
    /// Source-side attachment, captured once when the pair is built.
    pub source_anchor: SurfaceAnchor,
}

impl LandmarkPair {
    /// Builds a pair whose source position must lie on `source` (within
    /// [`CLIP_SURFACE_TOL_MM`]).
    pub fn on_surface(
        source: &SurfaceMesh,
        source_pos: Point3,
        target_pos: Point3,
    ) -> Result<Self, RegistrationError> {
        for p in [&source_pos, &target_pos] {
            if !(p.x.is_finite() && p.y.is_finite() && p.z.is_finite()) {
                return Err(RegistrationError::NonFiniteClip);
            }
        }
        let anchor = SurfaceAnchor::bind(source, &source_pos)?;
        let distance = anchor.offset.norm();
        if distance > CLIP_SURFACE_TOL_MM {
            return Err(RegistrationError::ClipOffSurface {
                x: source_pos.x,
                y: source_pos.y,
                z: source_pos.z,
                distance,
                tolerance: CLIP_SURFACE_TOL_MM,
            });
        }
        Ok(Self {
            source_pos,
            target_pos,
            source_anchor: anchor,
        })
    }

    /// Clip position transported by the deformation that produced
    /// `deformed_vertices`.
    pub fn transported(&self, triangles: &[[usize; 3]], deformed_vertices: &[Point3]) -> Point3 {
        self.source_anchor.evaluate(triangles, deformed_vertices)
    }
}

/// Line-search step control.
#[derive(Debug, Clone, PartialEq)]
pub struct StepControl {
    /// Largest per-vertex move (mm) attempted on the first iteration.
    pub initial_step_mm: f64,
    /// Growth factor applied to the accepted step for the next iteration.
    pub step_growth: f64,
    /// Shrink factor inside the backtracking loop.
    pub backtrack: f64,
    /// Armijo sufficient-decrease constant.
    pub armijo_c1: f64,
    /// Maximum backtracking halvings per iteration.
    pub max_backtracks: u32,
    /// The search stops when the trial step falls below this (mm).
    pub min_step_mm: f64,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            initial_step_mm: 1.0,
            step_growth: 2.0,
            backtrack: 0.5,
            armijo_c1: 1e-4,
            max_backtracks: 40,
            min_step_mm: 1e-10,
        }
    }
}

/// Weights and termination settings for [`register`].
#[derive(Debug, Clone, PartialEq)]
pub struct RegistrationParams {
    /// Clip constraint weight ω; 0 disables the clip term entirely.
    pub clip_weight: f64,
    /// Laplacian preservation weight μ.
    pub laplacian_weight: f64,
    pub max_iterations: usize,
    /// Relative total-energy decrease below which the run stops.
    pub convergence_tol: f64,
    pub step: StepControl,
}

impl Default for RegistrationParams {
    fn default() -> Self {
        Self {
            clip_weight: 1.0,
            laplacian_weight: 1.0,
            max_iterations: 300,
            convergence_tol: 1e-6,
            step: StepControl::default(),
        }
    }
}

impl RegistrationParams {
    fn validate(&self) -> Result<(), RegistrationError> {
        if self.clip_weight < 0.0 {
            return Err(RegistrationError::NegativeWeight {
                name: "clip_weight",
                value: self.clip_weight,
            });
        }
        if self.laplacian_weight < 0.0 {
            return Err(RegistrationError::NegativeWeight {
                name: "laplacian_weight",
                value: self.laplacian_weight,
            });
        }
        if self.max_iterations < 1 {
            return Err(RegistrationError::ParamOutOfRange {
                name: "max_iterations",
                min: 1.0,
                value: self.max_iterations as f64,
            });
        }
        if !(self.convergence_tol > 0.0) {
            return Err(RegistrationError::ParamOutOfRange {
                name: "convergence_tol",
                min: f64::MIN_POSITIVE,
                value: self.convergence_tol,
            });
        }
        Ok(())
    }
}

/// Energy value split into its three terms; weights are already applied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBreakdown {
    pub total: f64,
    pub shape: f64,
    pub clip: f64,
    pub laplacian: f64,
}

/// One row of the per-iteration energy trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyTraceRow {
    pub iteration: usize,
    pub energy: EnergyBreakdown,
}

/// Renders the trace as CSV with columns
/// `iteration,E,E_shape,E_clip,E_laplacian`.
pub fn trace_to_csv(trace: &[EnergyTraceRow]) -> String {
    let mut out = String::from("iteration,E,E_shape,E_clip,E_laplacian\n");
    for row in trace {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            row.iteration,
            row.energy.total,
            row.energy.shape,
            row.energy.clip,
            row.energy.laplacian
        ));
    }
    out
}

/// Output of [`register`].
#[derive(Debug, Clone)]
pub struct RegistrationResult {
    /// Deformed source mesh, vertex-wise corresponding to the source.
    pub deformed: SurfaceMesh,
    /// Deformed minus source, per vertex.
    pub displacement: DisplacementField,
    /// True (refreshed-correspondence) energy at every accepted iterate;
    /// non-increasing in `total`.
    pub energy_trace: Vec<EnergyTraceRow>,
    pub converged: bool,
    /// Deformed-vs-target evaluation; `volume_change_ratio` here is
    /// volume(deformed) / volume(target), ~1 for a good fit.
    pub metrics: MetricsReport,
}

/// Evaluates the registration energy at displacement `u` with fresh
/// closest-point correspondences.
pub fn registration_energy(
    source: &SurfaceMesh,
    u: &DisplacementField,
    target: &SurfaceMesh,
    clips: &[LandmarkPair],
    params: &RegistrationParams,
) -> Result<EnergyBreakdown, RegistrationError> {
    params.validate()?;
    let deformed = apply_displacement(source, u)?;
    let shape = metrics::mean_distance(target, &deformed)?;

    let mut clip = 0.0;
    for c in clips {
        let transported = c.transported(source.triangles(), deformed.vertices());
        clip += (transported - c.target_pos).norm();
    }
    clip *= params.clip_weight;

    let neighbors = source.vertex_neighbors();
    let source_lap = laplacian_with_neighbors(source.vertices(), &neighbors)?;
    let deformed_lap = laplacian_with_neighbors(deformed.vertices(), &neighbors)?;
    let mut lap = mesh::CompensatedSum::new();
    for (d, s) in deformed_lap.iter().zip(&source_lap) {
        lap.add((d - s).norm_squared());
    }
    let laplacian = params.laplacian_weight * lap.total() / source.vertex_count() as f64;

    Ok(EnergyBreakdown {
        total: shape + clip + laplacian,
        shape,
        clip,
        laplacian,
    })
}

/// Closest-point correspondences captured at one iterate.
///
/// The target mesh is static, so the deformed-to-target direction freezes a
/// point on the target. The target-to-deformed direction freezes a triangle
/// and barycentric coordinates on the deformed source, which keeps that term
/// differentiable in the displacements.
struct Correspondences {
    /// Per source vertex: closest point on the target surface.
    to_target: Vec<Point3>,
    /// Per target vertex: (triangle, barycentric) on the deformed source.
    from_target: Vec<(usize, [f64; 3])>,
}

/// Shared data for one registration run.
struct Objective<'a> {
    source: &'a SurfaceMesh,
    target: &'a SurfaceMesh,
    clips: &'a [LandmarkPair],
    params: &'a RegistrationParams,
    target_index: ClosestPointIndex<'a>,
    neighbors: Vec<Vec<usize>>,
    source_laplacian: Vec<Vec3>,
    /// Per-vertex diagonal of the Laplacian-term Hessian `(2μ/V)·LᵀL`.
    laplacian_diag: Vec<f64>,
}

impl<'a> Objective<'a> {
    fn new(
        source: &'a SurfaceMesh,
        target: &'a SurfaceMesh,
        clips: &'a [LandmarkPair],
        params: &'a RegistrationParams,
    ) -> Result<Self, RegistrationError> {
        let neighbors = source.vertex_neighbors();
        let source_laplacian = laplacian_with_neighbors(source.vertices(), &neighbors)?;
        Ok(Self {
            source,
            target,
            clips,
            params,
            target_index: ClosestPointIndex::new(target)?,
            neighbors,
            source_laplacian,
        })
    }

    fn refresh(&self, deformed: &SurfaceMesh) -> Result<Correspondences, RegistrationError> {
        let to_target = deformed
            .vertices()
            .iter()
            .map(|v| self.target_index.closest(v).point)
            .collect();
        let deformed_index = ClosestPointIndex::new(deformed)?;
        let from_target = self
            .target
            .vertices()
            .iter()
            .map(|t| {
                let hit = deformed_index.closest(t);
                (hit.triangle, hit.barycentric)
            })
            .collect();
        Ok(Correspondences {
            to_target,
            from_target,
        })
    }

    /// Energy with frozen correspondences; upper-bounds the true energy and
    /// equals it at the iterate where `corr` was refreshed.
    fn frozen_energy(&self, x: &[Point3], corr: &Correspondences) -> EnergyBreakdown {
        let nv = x.len() as f64;
        let nt = self.target.vertices().len() as f64;
        let triangles = self.source.triangles();

        let mut sum_to_target = mesh::CompensatedSum::new();
        for (xi, qi) in x.iter().zip(&corr.to_target) {
            sum_to_target.add((xi - qi).norm());
        }
        let mut sum_from_target = mesh::CompensatedSum::new();
        for (t, (tri, bary)) in self.target.vertices().iter().zip(&corr.from_target) {
            let [i0, i1, i2] = triangles[*tri];
            let c = x[i0].coords * bary[0] + x[i1].coords * bary[1] + x[i2].coords * bary[2];
            sum_from_target.add((c - t.coords).norm());
        }
        let shape = 0.5 * (sum_to_target.total() / nv + sum_from_target.total() / nt);

        let mut clip = 0.0;
        for c in self.clips {
            let transported = c.transported(triangles, x);
            clip += (transported - c.target_pos).norm();
        }
        clip *= self.params.clip_weight;

        let deformed_lap =
            laplacian_with_neighbors(x, &self.neighbors).expect("adjacency fixed at setup");
        let mut lap = mesh::CompensatedSum::new();
        for (d, s) in deformed_lap.iter().zip(&self.source_laplacian) {
            lap.add((d - s).norm_squared());
        }
        let laplacian = self.params.laplacian_weight * lap.total() / nv;

        EnergyBreakdown {
            total: shape + clip + laplacian,
            shape,
            clip,
            laplacian,
        }
    }

    /// Descent direction: the norm terms pull with their full residual
    /// vectors (`w·r`) rather than unit vectors (`w·r̂`). Near-satisfied
    /// terms then fade out instead of polluting the direction with
    /// unit-magnitude noise, which is what lets the Laplacian term finish
    /// the alignment once the surfaces coincide. The quadratic Laplacian
    /// term contributes its exact negative gradient.
    fn descent_direction(&self, x: &[Point3], corr: &Correspondences) -> Vec<Vec3> {
        let nv = x.len();
        let nt = self.target.vertices().len() as f64;
        let triangles = self.source.triangles();
        let mut dir = vec![Vec3::zeros(); nv];

        let w_to = 0.5 / nv as f64;
        for i in 0..nv {
            dir[i] -= (x[i] - corr.to_target[i]) * w_to;
        }

        let w_from = 0.5 / nt;
        for (t, (tri, bary)) in self.target.vertices().iter().zip(&corr.from_target) {
            let [i0, i1, i2] = triangles[*tri];
            let c = x[i0].coords * bary[0] + x[i1].coords * bary[1] + x[i2].coords * bary[2];
            let pull = (c - t.coords) * w_from;
            dir[i0] -= pull * bary[0];
            dir[i1] -= pull * bary[1];
            dir[i2] -= pull * bary[2];
        }

        if self.params.clip_weight > 0.0 {
            for c in self.clips {
                let transported = c.transported(triangles, x);
                let pull = (transported - c.target_pos) * self.params.clip_weight;
                let [i0, i1, i2] = triangles[c.source_anchor.triangle];
                dir[i0] -= pull * c.source_anchor.barycentric[0];
                dir[i1] -= pull * c.source_anchor.barycentric[1];
                dir[i2] -= pull * c.source_anchor.barycentric[2];
            }
        }

        if self.params.laplacian_weight > 0.0 {
            let deformed_lap =
                laplacian_with_neighbors(x, &self.neighbors).expect("adjacency fixed at setup");
            let residual: Vec<Vec3> = deformed_lap
                .iter()
                .zip(&self.source_laplacian)
                .map(|(d, s)| d - s)
                .collect();
            let w_lap = 2.0 * self.params.laplacian_weight / nv as f64;
            for k in 0..nv {
                let mut g = residual[k];
                for &i in &self.neighbors[k] {
                    g -= residual[i] / self.neighbors[i].len() as f64;
                }
                dir[k] -= g * w_lap;
            }
        }

        dir
    }

    /// Gradient of the frozen energy with respect to the deformed vertex
    /// positions (equivalently the displacements).
    fn frozen_gradient(&self, x: &[Point3], corr: &Correspondences) -> Vec<Vec3> {
        let nv = x.len();
        let nt = self.target.vertices().len() as f64;
        let triangles = self.source.triangles();
        let mut grad = vec![Vec3::zeros(); nv];

        // Deformed-vertex-to-target half of E_shape.
        let w_to = 0.5 / nv as f64;
        for i in 0..nv {
            let r = x[i] - corr.to_target[i];
            let len = r.norm();
            if len > 0.0 {
                grad[i] += r * (w_to / len);
            }
        }

        // Target-vertex-to-deformed half of E_shape.
        let w_from = 0.5 / nt;
        for (t, (tri, bary)) in self.target.vertices().iter().zip(&corr.from_target) {
            let [i0, i1, i2] = triangles[*tri];
            let c = x[i0].coords * bary[0] + x[i1].coords * bary[1] + x[i2].coords * bary[2];
            let r = c - t.coords;
            let len = r.norm();
            if len > 0.0 {
                let dir = r * (w_from / len);
                grad[i0] += dir * bary[0];
                grad[i1] += dir * bary[1];
                grad[i2] += dir * bary[2];
            }
        }

        // Clip term.
        if self.params.clip_weight > 0.0 {
            for c in self.clips {
                let transported = c.transported(triangles, x);
                let r = transported - c.target_pos;
                let len = r.norm();
                if len > 0.0 {
                    let dir = r * (self.params.clip_weight / len);
                    let [i0, i1, i2] = triangles[c.source_anchor.triangle];
                    grad[i0] += dir * c.source_anchor.barycentric[0];
                    grad[i1] += dir * c.source_anchor.barycentric[1];
                    grad[i2] += dir * c.source_anchor.barycentric[2];
                }
            }
        }

        // Laplacian term: residual r_i = δ_i(x) − δ_i(source); the energy is
        // (μ/V)·Σ|r_i|², so the gradient is (2μ/V)·Lᵀr with L the uniform
        // umbrella operator (symmetric adjacency, per-row normalization).
        if self.params.laplacian_weight > 0.0 {
            let deformed_lap =
                laplacian_with_neighbors(x, &self.neighbors).expect("adjacency fixed at setup");
            let residual: Vec<Vec3> = deformed_lap
                .iter()
                .zip(&self.source_laplacian)
                .map(|(d, s)| d - s)
                .collect();
            let w_lap = 2.0 * self.params.laplacian_weight / nv as f64;
            for k in 0..nv {
                let mut g = residual[k];
                for &i in &self.neighbors[k] {
                    g -= residual[i] / self.neighbors[i].len() as f64;
                }
                grad[k] += g * w_lap;
            }
        }

        grad
    }
}

/// Registers `source` onto `target`, optionally constrained by clips.
///
/// Both meshes must be closed (the result metrics include a volume ratio)
/// and have at least 4 vertices. Clips may be empty, which reproduces the
/// unconstrained method; `params.clip_weight == 0` has the same effect.
/// Deterministic: identical inputs give bitwise-identical results.
pub fn register(
    source: &SurfaceMesh,
    target: &SurfaceMesh,
    clips: &[LandmarkPair],
    params: &RegistrationParams,
) -> Result<RegistrationResult, RegistrationError> {
    params.validate()?;
    for m in [source, target] {
        if m.vertex_count() < 4 {
            return Err(RegistrationError::TooFewVertices {
                count: m.vertex_count(),
            });
        }
    }
    // Anchors must reproduce the stated clip position on this source mesh.
    for c in clips {
        let at = c.source_anchor.evaluate(source.triangles(), source.vertices());
        let drift = (at - c.source_pos).norm();
        if drift > CLIP_SURFACE_TOL_MM {
            return Err(RegistrationError::ClipOffSurface {
                x: c.source_pos.x,
                y: c.source_pos.y,
                z: c.source_pos.z,
                distance: drift,
                tolerance: CLIP_SURFACE_TOL_MM,
            });
        }
    }

    let objective = Objective::new(source, target, clips, params)?;
    let mut x: Vec<Point3> = source.vertices().to_vec();
    let mut corr = objective.refresh(&source.with_vertices(x.clone()))?;
    let mut energy = objective.frozen_energy(&x, &corr);
    let mut trace = vec![EnergyTraceRow {
        iteration: 0,
        energy,
    }];
    if !energy.total.is_finite() {
        return Err(RegistrationError::Diverged {
            iteration: 0,
            trace,
        });
    }

    let mut step = params.step.initial_step_mm;
    let mut converged = energy.total == 0.0;
    let mut iteration = 0;

    let step_cap = source.diameter().max(1.0);
    while !converged && iteration < params.max_iterations {
        iteration += 1;
        let grad = objective.frozen_gradient(&x, &corr);
        let mut dir = objective.descent_direction(&x, &corr);
        // The scaled direction must descend the frozen energy; fall back to
        // steepest descent when it does not.
        let mut slope: f64 = grad.iter().zip(&dir).map(|(g, d)| g.dot(d)).sum();
        if !(slope < 0.0) {
            dir = grad.iter().map(|g| -g).collect();
            slope = -grad.iter().map(|g| g.norm_squared()).sum::<f64>();
        }
        let dir_max = dir.iter().map(|d| d.norm()).fold(0.0f64, f64::max);
        if dir_max == 0.0 || slope == 0.0 {
            converged = true;
            break;
        }

        // First trial moves the fastest vertex exactly `step` mm.
        let alpha0 = step / dir_max;
        let mut accepted = None;
        let mut alpha = alpha0;
        for _ in 0..params.step.max_backtracks {
            if alpha * dir_max < params.step.min_step_mm {
                break;
            }
            let trial: Vec<Point3> = x
                .iter()
                .zip(&dir)
                .map(|(xi, di)| xi + di * alpha)
                .collect();
            let trial_energy = objective.frozen_energy(&trial, &corr);
            if trial_energy.total <= energy.total + params.step.armijo_c1 * alpha * slope {
                accepted = Some((trial, alpha));
                break;
            }
            alpha *= params.step.backtrack;
        }

        let Some((next_x, used_alpha)) = accepted else {
            // No admissible descent step: stationary to line-search
            // precision.
            converged = true;
            break;
        };
        x = next_x;
        step = (used_alpha * dir_max * params.step.step_growth)
            .clamp(params.step.min_step_mm, step_cap);

        corr = objective.refresh(&source.with_vertices(x.clone()))?;
        let new_energy = objective.frozen_energy(&x, &corr);
        trace.push(EnergyTraceRow {
            iteration,
            energy: new_energy,
        });
        if !new_energy.total.is_finite() {
            return Err(RegistrationError::Diverged { iteration, trace });
        }

        let decrease = energy.total - new_energy.total;
        if new_energy.total == 0.0 || decrease <= params.convergence_tol * energy.total {
            converged = true;
        }
        energy = new_energy;
    }

    let deformed = source.with_vertices(x.clone());
    let displacement = DisplacementField::new(
        x.iter()
            .zip(source.vertices())
            .map(|(xi, vi)| xi - vi)
            .collect(),
    )?;

    let predicted_clips: Vec<Point3> = clips
        .iter()
        .map(|c| c.transported(source.triangles(), deformed.vertices()))
        .collect();
    let clip_targets: Vec<Point3> = clips.iter().map(|c| c.target_pos).collect();
    let tre = if clips.is_empty() {
        Vec::new()
    } else {
        metrics::target_registration_error(&predicted_clips, &clip_targets)?
    };
    let report = MetricsReport::new(
        metrics::mean_distance(&deformed, target)?,
        metrics::hausdorff_distance(&deformed, target)?,
        tre,
        mesh::mesh_volume(&deformed)?.mm3 / mesh::mesh_volume(target)?.mm3,
    )?;

    Ok(RegistrationResult {
        deformed,
        displacement,
        energy_trace: trace,
        converged,
        metrics: report,
    })
}

/// Per-vertex correspondence displacements of a finished registration:
/// deformed vertex minus source vertex, index for index.
pub fn correspondence_displacements(result: &RegistrationResult) -> DisplacementField {
    result.displacement.clone()
}
