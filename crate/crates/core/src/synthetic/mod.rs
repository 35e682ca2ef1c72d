//! Seed-deterministic synthetic lung cases with exact ground truth.
//!
//! Real paired inflated/deflated scans are not redistributable, so every
//! test and benchmark in this toolkit runs on generated stand-ins: smooth
//! ellipsoid-based surfaces deformed by an analytic map composed of a
//! gravity sag (a volume-preserving shear), a rotation about a
//! hilum-anchored axis, and an anisotropic contraction toward the hilum
//! that hits a prescribed volume ratio. Because the map is closed-form and
//! applied per vertex, the generator hands out exact correspondences, clip
//! trajectories, and interior-point trajectories.
//!
//! Within a dataset, a case's overall proportions co-vary with its
//! deformation parameters (larger lungs deflate further, more elongated
//! ones rotate and sag more). The learnable shape-to-deformation coupling
//! is what makes the dataset a meaningful benchmark for the kernel
//! regressor; the magnitudes are stand-ins, not clinical measurements.

pub mod primitives;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mesh::{
    apply_displacement, DisplacementField, InteriorPointSet, MeshError, Point3, SurfaceMesh, Vec3,
};
use crate::registration::{LandmarkPair, RegistrationError};

/// How strongly the contraction prefers the directions perpendicular to the
/// hilum axis; 0 is isotropic. The perpendicular scale is
/// `(1 − ANISOTROPY·(1 − ratio))` times the axial scale, so the map stays
/// the exact identity at `ratio = 1`.
pub const CONTRACTION_ANISOTROPY: f64 = 0.25;

const CLIP_MIN_SEPARATION_FRACTION: f64 = 0.25;
const INTERIOR_POINT_COUNT: usize = 12;

#[derive(Debug, Error)]
pub enum SyntheticError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Registration(#[from] RegistrationError),
    #[error("contraction ratio must be in (0, 1], got {0}")]
    BadRatio(f64),
    #[error("hilum point ({x}, {y}, {z}) lies outside the mesh bounding box")]
    HilumOutsideBox { x: f64, y: f64, z: f64 },
    #[error("vertex budget must be at least 100, got {0}")]
    BudgetTooSmall(usize),
    #[error("empty parameter range for {name}: [{lo}, {hi}]")]
    EmptyRange { name: &'static str, lo: f64, hi: f64 },
    #[error("a dataset needs at least 2 cases, got {0}")]
    TooFewCases(usize),
    #[error("could not place interior points inside the mesh")]
    InteriorPlacement,
}

/// Parameters of one synthetic deflation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeflationParams {
    /// Target deflated/inflated volume ratio, in (0, 1].
    pub contraction_ratio: f64,
    /// Rotation about the hilum-anchored axis (the +y axis), degrees.
    pub rotation_deg: f64,
    /// Peak sag displacement along gravity (−z), mm.
    pub sag_mm: f64,
    /// Fixed anatomical anchor; contraction and rotation are taken about
    /// this point.
    pub hilum_point: Point3,
    /// Drives clip and interior-point placement.
    pub seed: u64,
}

impl DeflationParams {
    /// Identity deformation anchored at `hilum_point`.
    pub fn identity(hilum_point: Point3, seed: u64) -> Self {
        Self {
            contraction_ratio: 1.0,
            rotation_deg: 0.0,
            sag_mm: 0.0,
            hilum_point,
            seed,
        }
    }
}

/// One generated case: paired meshes with exact correspondence, two clip
/// landmarks, and interior sample points with their true displaced
/// positions.
#[derive(Debug, Clone)]
pub struct SyntheticCase {
    pub id: usize,
    pub inflated: SurfaceMesh,
    /// Same connectivity as `inflated`; equals
    /// `apply_displacement(inflated, truth_field)` exactly.
    pub deflated: SurfaceMesh,
    pub truth_field: DisplacementField,
    /// Exactly two clips, placed at surface vertices.
    pub clips: Vec<LandmarkPair>,
    pub interior: InteriorPointSet,
    /// True deflated positions of `interior`, same order.
    pub interior_deflated: InteriorPointSet,
    pub params: DeflationParams,
}

/// The analytic deflation map: sag, then rotation, then contraction. Each
/// stage is skipped entirely at its identity parameter so identity params
/// reproduce input points bitwise.
#[derive(Debug, Clone)]
pub struct DeflationMap {
    hilum: Point3,
    sag_mm: f64,
    /// 1/L² for the quadratic sag profile; L is the largest in-plane (x, y)
    /// distance from the hilum over the inflated mesh.
    inv_l_sq: f64,
    /// (cos θ, sin θ) of the rotation about +y, None at θ = 0.
    rotation: Option<(f64, f64)>,
    /// (perpendicular, axial, perpendicular) scales, None at ratio = 1.
    scale: Option<(f64, f64, f64)>,
}

impl DeflationMap {
    pub fn new(mesh: &SurfaceMesh, params: &DeflationParams) -> Result<Self, SyntheticError> {
        if !(params.contraction_ratio > 0.0 && params.contraction_ratio <= 1.0) {
            return Err(SyntheticError::BadRatio(params.contraction_ratio));
        }
        let (lo, hi) = mesh.bounding_box();
        let h = params.hilum_point;
        if h.x < lo.x || h.y < lo.y || h.z < lo.z || h.x > hi.x || h.y > hi.y || h.z > hi.z {
            return Err(SyntheticError::HilumOutsideBox {
                x: h.x,
                y: h.y,
                z: h.z,
            });
        }

        let l_sq = mesh
            .vertices()
            .iter()
            .map(|v| {
                let dx = v.x - h.x;
                let dy = v.y - h.y;
                dx * dx + dy * dy
            })
            .fold(0.0f64, f64::max);

        let rotation = if params.rotation_deg != 0.0 {
            let theta = params.rotation_deg.to_radians();
            Some((theta.cos(), theta.sin()))
        } else {
            None
        };

        let scale = if params.contraction_ratio != 1.0 {
            let ratio = params.contraction_ratio;
            let f = 1.0 - CONTRACTION_ANISOTROPY * (1.0 - ratio);
            let s_axis = (ratio / (f * f)).cbrt();
            let s_perp = f * s_axis;
            Some((s_perp, s_axis, s_perp))
        } else {
            None
        };

        Ok(Self {
            hilum: params.hilum_point,
            sag_mm: params.sag_mm,
            inv_l_sq: if l_sq > 0.0 { 1.0 / l_sq } else { 0.0 },
            rotation,
            scale,
        })
    }

    /// Deflated position of any point in space.
    pub fn apply(&self, p: &Point3) -> Point3 {
        let mut q = *p;
        if self.sag_mm != 0.0 {
            let dx = q.x - self.hilum.x;
            let dy = q.y - self.hilum.y;
            let profile = (dx * dx + dy * dy) * self.inv_l_sq;
            q.z -= self.sag_mm * profile;
        }
        if let Some((cos_t, sin_t)) = self.rotation {
            let dx = q.x - self.hilum.x;
            let dz = q.z - self.hilum.z;
            q.x = self.hilum.x + cos_t * dx + sin_t * dz;
            q.z = self.hilum.z - sin_t * dx + cos_t * dz;
        }
        if let Some((sx, sy, sz)) = self.scale {
            q.x = self.hilum.x + sx * (q.x - self.hilum.x);
            q.y = self.hilum.y + sy * (q.y - self.hilum.y);
            q.z = self.hilum.z + sz * (q.z - self.hilum.z);
        }
        q
    }
}

/// Generates a closed lung-like surface: an ellipsoid elongated along +y
/// with smooth, band-limited radial perturbations. Deterministic in
/// `case_seed`; the vertex count lands within ~10% of `vertex_budget`.
pub fn generate_lung_like_mesh(
    case_seed: u64,
    vertex_budget: usize,
) -> Result<SurfaceMesh, SyntheticError> {
    if vertex_budget < 100 {
        return Err(SyntheticError::BudgetTooSmall(vertex_budget));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(case_seed);

    let rx = rng.gen_range(55.0..65.0);
    let ry = rng.gen_range(65.0..80.0);
    let rz = rng.gen_range(50.0..60.0);

    // Band-limited radial bump field: a handful of low-frequency plane
    // waves evaluated on the unit direction sphere.
    let waves: Vec<(Vec3, f64, f64)> = (0..6)
        .map(|_| {
            let dir = Vec3::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            let dir = if dir.norm() > 1e-6 {
                dir.normalize()
            } else {
                Vec3::x()
            };
            let freq = rng.gen_range(1.0..3.0);
            let phase = rng.gen_range(0.0..std::f64::consts::TAU);
            (dir * freq, phase, rng.gen_range(0.005..0.02))
        })
        .collect();
    let perturb = |d: &Vec3| -> f64 {
        let mut p = 0.0;
        for (w, phase, amp) in &waves {
            p += amp * (w.dot(d) + phase).cos();
        }
        p.clamp(-0.05, 0.05)
    };

    let mesh = primitives::uv_sphere_with(vertex_budget, |d| {
        let r = 1.0 + perturb(d);
        Point3::new(rx * r * d.x, ry * r * d.y, rz * r * d.z)
    })?;
    Ok(mesh)
}

/// Applies `params` to `m`, producing the full ground-truth case.
pub fn apply_deflation(
    m: &SurfaceMesh,
    params: &DeflationParams,
) -> Result<SyntheticCase, SyntheticError> {
    let map = DeflationMap::new(m, params)?;

    let field: Vec<Vec3> = m.vertices().iter().map(|v| map.apply(v) - v).collect();
    let truth_field = DisplacementField::new(field).map_err(SyntheticError::Mesh)?;
    let deflated = apply_displacement(m, &truth_field)?;

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let clips = place_clips(m, &deflated, &mut rng)?;
    let (interior, interior_deflated) = place_interior(m, &map, &mut rng)?;

    Ok(SyntheticCase {
        id: 0,
        inflated: m.clone(),
        deflated,
        truth_field,
        clips,
        interior,
        interior_deflated,
        params: params.clone(),
    })
}

/// Two clips at surface vertices at least a quarter of the mesh diameter
/// apart; targets are the same vertices on the deflated mesh, so clip
/// correspondence is exact.
fn place_clips(
    inflated: &SurfaceMesh,
    deflated: &SurfaceMesh,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<LandmarkPair>, SyntheticError> {
    let n = inflated.vertex_count();
    let min_sep = CLIP_MIN_SEPARATION_FRACTION * inflated.diameter();
    let first = rng.gen_range(0..n);
    let candidates: Vec<usize> = (0..n)
        .filter(|&i| (inflated.vertices()[i] - inflated.vertices()[first]).norm() >= min_sep)
        .collect();
    if candidates.is_empty() {
        return Err(SyntheticError::InteriorPlacement);
    }
    let second = candidates[rng.gen_range(0..candidates.len())];

    let mut clips = Vec::with_capacity(2);
    for idx in [first, second] {
        clips.push(LandmarkPair::on_surface(
            inflated,
            inflated.vertices()[idx],
            deflated.vertices()[idx],
        )?);
    }
    Ok(clips)
}

/// A small cluster of "nodule" points placed strictly inside the mesh; the
/// deflated positions come from the same analytic map.
fn place_interior(
    m: &SurfaceMesh,
    map: &DeflationMap,
    rng: &mut ChaCha8Rng,
) -> Result<(InteriorPointSet, InteriorPointSet), SyntheticError> {
    let (lo, hi) = m.bounding_box();
    let center = Point3::from((lo.coords + hi.coords) * 0.5);
    let half = (hi - lo) * 0.5;

    let mut nodule_center = Point3::new(
        center.x + rng.gen_range(-0.35..0.35) * half.x,
        center.y + rng.gen_range(-0.35..0.35) * half.y,
        center.z + rng.gen_range(-0.35..0.35) * half.z,
    );
    let mut radius = 6.0_f64.min(0.1 * m.diameter());
    for _ in 0..24 {
        let points: Vec<Point3> = (0..INTERIOR_POINT_COUNT)
            .map(|_| {
                // Rejection-free ball sample: scale a cube sample onto the ball.
                let u = Vec3::new(
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                );
                let u = if u.norm() > 1.0 { u.normalize() } else { u };
                nodule_center + u * radius
            })
            .collect();
        if points.iter().all(|p| m.winding_number(p) > 0.5) {
            let displaced: Vec<Point3> = points.iter().map(|p| map.apply(p)).collect();
            return Ok((
                InteriorPointSet::new(points),
                InteriorPointSet::new(displaced),
            ));
        }
        // Pull toward the centroid and shrink until the cluster fits.
        nodule_center = Point3::from(center.coords + (nodule_center - center) * 0.7);
        radius *= 0.8;
    }
    Err(SyntheticError::InteriorPlacement)
}

/// Uniform sampling ranges for [`make_dataset`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamRanges {
    /// Target volume ratio range, within (0, 1].
    pub contraction_ratio: (f64, f64),
    /// Rotation range, degrees.
    pub rotation_deg: (f64, f64),
    /// Sag amplitude range, mm.
    pub sag_mm: (f64, f64),
    /// Approximate vertices per mesh; all cases share one connectivity.
    pub vertex_budget: usize,
}

impl Default for ParamRanges {
    fn default() -> Self {
        Self {
            contraction_ratio: (0.3, 0.6),
            rotation_deg: (5.0, 25.0),
            sag_mm: (2.0, 10.0),
            vertex_budget: 500,
        }
    }
}

impl ParamRanges {
    fn validate(&self) -> Result<(), SyntheticError> {
        let checks = [
            ("contraction_ratio", self.contraction_ratio),
            ("rotation_deg", self.rotation_deg),
            ("sag_mm", self.sag_mm),
        ];
        for (name, (lo, hi)) in checks {
            if !(lo <= hi) {
                return Err(SyntheticError::EmptyRange { name, lo, hi });
            }
        }
        let (rlo, rhi) = self.contraction_ratio;
        if !(rlo > 0.0 && rhi <= 1.0) {
            return Err(SyntheticError::BadRatio(if rlo <= 0.0 { rlo } else { rhi }));
        }
        Ok(())
    }
}

/// Generates `n_cases` independent cases, fully determined by `base_seed`.
///
/// Each case draws its deformation parameters uniformly from `ranges` and
/// derives its overall proportions from the same latent draws, giving the
/// dataset its shape-to-deformation correlation.
pub fn make_dataset(
    n_cases: usize,
    base_seed: u64,
    ranges: &ParamRanges,
) -> Result<Vec<SyntheticCase>, SyntheticError> {
    if n_cases < 2 {
        return Err(SyntheticError::TooFewCases(n_cases));
    }
    ranges.validate()?;

    let mut cases = Vec::with_capacity(n_cases);
    for i in 0..n_cases {
        let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
        rng.set_stream(i as u64);

        let t_ratio: f64 = rng.gen();
        let t_rot: f64 = rng.gen();
        let t_sag: f64 = rng.gen();
        let lerp = |(lo, hi): (f64, f64), t: f64| lo + (hi - lo) * t;

        let case_seed: u64 = rng.gen();
        let base = generate_lung_like_mesh(case_seed, ranges.vertex_budget)?;

        // Proportions co-vary with the deformation latents.
        let gx = 1.0 + 0.12 * (2.0 * t_ratio - 1.0);
        let gy = 1.0 + 0.10 * (2.0 * t_rot - 1.0);
        let gz = 1.0 + 0.10 * (2.0 * t_sag - 1.0);
        let scaled: Vec<Point3> = base
            .vertices()
            .iter()
            .map(|v| Point3::new(gx * v.x, gy * v.y, gz * v.z))
            .collect();
        let inflated = base.with_vertices(scaled);

        let (lo, hi) = inflated.bounding_box();
        let hilum = Point3::new(0.0, lo.y + 0.15 * (hi.y - lo.y), 0.0);

        let params = DeflationParams {
            contraction_ratio: lerp(ranges.contraction_ratio, t_ratio),
            rotation_deg: lerp(ranges.rotation_deg, t_rot),
            sag_mm: lerp(ranges.sag_mm, t_sag),
            hilum_point: hilum,
            seed: rng.gen(),
        };
        let mut case = apply_deflation(&inflated, &params)?;
        case.id = i;
        cases.push(case);
    }
    Ok(cases)
}

#[cfg(test)]
mod tests;
