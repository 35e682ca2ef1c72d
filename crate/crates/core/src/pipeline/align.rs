//! Landmark-based rigid normalization into a common reference frame.

use nalgebra::Matrix3;

use crate::mesh::{Point3, SurfaceMesh, Vec3};

use super::PipelineError;

/// Least-squares rigid transform (no scaling) mapping `moving_landmarks`
/// onto `fixed_landmarks`, solved with the SVD (Kabsch) construction, plus
/// the moving mesh carried through it.
///
/// Needs at least 3 non-collinear pairs. The returned rotation is proper
/// (`det = +1`).
pub fn rigid_align(
    moving: &SurfaceMesh,
    fixed_landmarks: &[Point3],
    moving_landmarks: &[Point3],
) -> Result<(Matrix3<f64>, Vec3, SurfaceMesh), PipelineError> {
    if fixed_landmarks.len() != moving_landmarks.len() || moving_landmarks.len() < 3 {
        return Err(PipelineError::NotEnoughLandmarks {
            needed: 3,
            got: fixed_landmarks.len().min(moving_landmarks.len()),
        });
    }
    let n = moving_landmarks.len() as f64;

    let centroid = |pts: &[Point3]| -> Vec3 {
        pts.iter().fold(Vec3::zeros(), |acc, p| acc + p.coords) / n
    };
    let c_moving = centroid(moving_landmarks);
    let c_fixed = centroid(fixed_landmarks);

    let mut h = Matrix3::zeros();
    for (m, f) in moving_landmarks.iter().zip(fixed_landmarks) {
        let a = m.coords - c_moving;
        let b = f.coords - c_fixed;
        h += a * b.transpose();
    }

    let svd = h.svd(true, true);
    // Collinear landmarks leave a rotation about the line unconstrained.
    if svd.singular_values[1] <= 1e-9 * svd.singular_values[0].max(f64::MIN_POSITIVE) {
        return Err(PipelineError::DegenerateLandmarks);
    }
    let u = svd.u.expect("svd computed with u");
    let v_t = svd.v_t.expect("svd computed with v_t");

    let d = (v_t.transpose() * u.transpose()).determinant();
    let sign = if d < 0.0 { -1.0 } else { 1.0 };
    let correction = Matrix3::from_diagonal(&Vec3::new(1.0, 1.0, sign));
    let rotation = v_t.transpose() * correction * u.transpose();
    let translation = c_fixed - rotation * c_moving;

    Ok((rotation, translation, transform_mesh(moving, &rotation, &translation)))
}

/// Applies `p ↦ R·p + t` to every vertex.
pub fn transform_mesh(m: &SurfaceMesh, r: &Matrix3<f64>, t: &Vec3) -> SurfaceMesh {
    let vertices: Vec<Point3> = m
        .vertices()
        .iter()
        .map(|v| Point3::from(r * v.coords + t))
        .collect();
    m.with_vertices(vertices)
}
