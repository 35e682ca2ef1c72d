//! Triangle surface meshes and the geometric queries built on them.
//!
//! A [`SurfaceMesh`] is an indexed triangle mesh in millimeters. Construction
//! validates connectivity and rejects non-finite coordinates and degenerate
//! triangles, so downstream code can assume a well-formed surface. Queries:
//!
//! - [`closest_point_on_surface`] / [`ClosestPointIndex`] — exact closest
//!   point on the surface, optionally accelerated by an AABB tree,
//! - [`discrete_laplacian`] — uniform-weight umbrella operator,
//! - [`mesh_volume`] — enclosed volume of a closed oriented mesh via the
//!   divergence theorem,
//! - [`apply_displacement`] — per-vertex displacement application.

mod bvh;

use std::collections::BTreeSet;

use thiserror::Error;

pub use bvh::ClosestPointIndex;

/// 3D point in millimeters.
pub type Point3 = nalgebra::Point3<f64>;
/// 3D vector; millimeters when it carries a displacement.
pub type Vec3 = nalgebra::Vector3<f64>;

/// Triangles thinner than this area (mm²) are rejected at construction.
pub const DEGENERATE_AREA_MM2: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("empty surface")]
    EmptySurface,
    #[error("non-finite coordinate at vertex {index}")]
    NonFiniteVertex { index: usize },
    #[error("triangle {triangle} references vertex {index} but mesh has {vertex_count} vertices")]
    IndexOutOfRange {
        triangle: usize,
        index: usize,
        vertex_count: usize,
    },
    #[error("degenerate triangle {triangle} (area {area:.3e} mm^2)")]
    DegenerateTriangle { triangle: usize, area: f64 },
    #[error("label count {labels} does not match vertex count {vertex_count}")]
    LabelMismatch { labels: usize, vertex_count: usize },
    #[error("isolated vertex {index}")]
    IsolatedVertex { index: usize },
    #[error("mesh not closed: edge ({a}, {b}) is on a boundary")]
    NotClosed { a: usize, b: usize },
    #[error("inconsistent orientation: directed edge ({a}, {b}) appears more than once")]
    InconsistentOrientation { a: usize, b: usize },
    #[error("displacement field has {field} vectors but mesh has {vertex_count} vertices")]
    LengthMismatch { field: usize, vertex_count: usize },
    #[error("non-finite displacement at index {index}")]
    NonFiniteDisplacement { index: usize },
}

/// Indexed triangle mesh in millimeters.
///
/// Invariants enforced at construction: all coordinates finite, every
/// triangle references three distinct in-range vertices, and every triangle
/// has area above [`DEGENERATE_AREA_MM2`].
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceMesh {
    vertices: Vec<Point3>,
    triangles: Vec<[usize; 3]>,
    labels: Option<Vec<u32>>,
}

impl SurfaceMesh {
    pub fn new(vertices: Vec<Point3>, triangles: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        if vertices.is_empty() || triangles.is_empty() {
            return Err(MeshError::EmptySurface);
        }
        for (i, v) in vertices.iter().enumerate() {
            if !(v.x.is_finite() && v.y.is_finite() && v.z.is_finite()) {
                return Err(MeshError::NonFiniteVertex { index: i });
            }
        }
        for (t, tri) in triangles.iter().enumerate() {
            for &i in tri {
                if i >= vertices.len() {
                    return Err(MeshError::IndexOutOfRange {
                        triangle: t,
                        index: i,
                        vertex_count: vertices.len(),
                    });
                }
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(MeshError::DegenerateTriangle {
                    triangle: t,
                    area: 0.0,
                });
            }
            let area = triangle_area(&vertices[tri[0]], &vertices[tri[1]], &vertices[tri[2]]);
            if !(area > DEGENERATE_AREA_MM2) {
                return Err(MeshError::DegenerateTriangle { triangle: t, area });
            }
        }
        Ok(Self {
            vertices,
            triangles,
            labels: None,
        })
    }

    /// Same connectivity and labels, replacement vertex positions. Skips
    /// re-validation; callers guarantee finite coordinates.
    pub(crate) fn with_vertices(&self, vertices: Vec<Point3>) -> Self {
        debug_assert_eq!(vertices.len(), self.vertices.len());
        Self {
            vertices,
            triangles: self.triangles.clone(),
            labels: self.labels.clone(),
        }
    }

    /// Attach one label per vertex (e.g., a region tag).
    pub fn with_labels(mut self, labels: Vec<u32>) -> Result<Self, MeshError> {
        if labels.len() != self.vertices.len() {
            return Err(MeshError::LabelMismatch {
                labels: labels.len(),
                vertex_count: self.vertices.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn vertices(&self) -> &[Point3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn labels(&self) -> Option<&[u32]> {
        self.labels.as_deref()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    /// Corner points of triangle `t`.
    pub fn triangle_points(&self, t: usize) -> (Point3, Point3, Point3) {
        let [a, b, c] = self.triangles[t];
        (self.vertices[a], self.vertices[b], self.vertices[c])
    }

    /// Axis-aligned bounding box as (min, max) corners.
    pub fn bounding_box(&self) -> (Point3, Point3) {
        let mut lo = self.vertices[0];
        let mut hi = self.vertices[0];
        for v in &self.vertices {
            lo = Point3::new(lo.x.min(v.x), lo.y.min(v.y), lo.z.min(v.z));
            hi = Point3::new(hi.x.max(v.x), hi.y.max(v.y), hi.z.max(v.z));
        }
        (lo, hi)
    }

    /// Bounding-box diagonal; the length scale used for relative tolerances.
    pub fn diameter(&self) -> f64 {
        let (lo, hi) = self.bounding_box();
        (hi - lo).norm()
    }

    /// Sorted one-ring neighbor lists derived from triangle edges.
    pub fn vertex_neighbors(&self) -> Vec<Vec<usize>> {
        let mut sets: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); self.vertices.len()];
        for tri in &self.triangles {
            for k in 0..3 {
                let a = tri[k];
                let b = tri[(k + 1) % 3];
                sets[a].insert(b);
                sets[b].insert(a);
            }
        }
        sets.into_iter().map(|s| s.into_iter().collect()).collect()
    }

    /// Generalized winding number of `p` with respect to this mesh.
    ///
    /// Approximately 1 inside a closed outward-oriented surface and 0
    /// outside. Computed as the summed signed solid angle over triangles
    /// (van Oosterom–Strackee), divided by 4π.
    pub fn winding_number(&self, p: &Point3) -> f64 {
        let mut sum = CompensatedSum::new();
        for tri in &self.triangles {
            let a = self.vertices[tri[0]] - p;
            let b = self.vertices[tri[1]] - p;
            let c = self.vertices[tri[2]] - p;
            let la = a.norm();
            let lb = b.norm();
            let lc = c.norm();
            let num = a.dot(&b.cross(&c));
            let den = la * lb * lc + a.dot(&b) * lc + b.dot(&c) * la + c.dot(&a) * lb;
            sum.add(2.0 * num.atan2(den));
        }
        sum.total() / (4.0 * std::f64::consts::PI)
    }

    /// True when `p` is inside the surface or within `tol` of it.
    pub fn contains(&self, p: &Point3, tol: f64) -> bool {
        if self.winding_number(p) > 0.5 {
            return true;
        }
        let (_, d) = closest_point_on_surface(p, self).expect("validated mesh is non-empty");
        d <= tol
    }
}

/// Per-vertex displacement vectors in millimeters.
#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementField {
    vectors: Vec<Vec3>,
}

impl DisplacementField {
    pub fn new(vectors: Vec<Vec3>) -> Result<Self, MeshError> {
        for (i, v) in vectors.iter().enumerate() {
            if !(v.x.is_finite() && v.y.is_finite() && v.z.is_finite()) {
                return Err(MeshError::NonFiniteDisplacement { index: i });
            }
        }
        Ok(Self { vectors })
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            vectors: vec![Vec3::zeros(); len],
        }
    }

    pub fn vectors(&self) -> &[Vec3] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Mean Euclidean magnitude over all vectors.
    pub fn mean_magnitude(&self) -> f64 {
        if self.vectors.is_empty() {
            return 0.0;
        }
        let mut sum = CompensatedSum::new();
        for v in &self.vectors {
            sum.add(v.norm());
        }
        sum.total() / self.vectors.len() as f64
    }
}

/// Sample points inside a surface mesh (nodule, bronchi, vessel samples).
#[derive(Debug, Clone, PartialEq)]
pub struct InteriorPointSet {
    pub points: Vec<Point3>,
}

impl InteriorPointSet {
    pub fn new(points: Vec<Point3>) -> Self {
        Self { points }
    }

    /// Checks every point lies inside `mesh` or within `tol` of its surface.
    pub fn validate_inside(&self, mesh: &SurfaceMesh, tol: f64) -> Result<(), MeshError> {
        for (i, p) in self.points.iter().enumerate() {
            if !mesh.contains(p, tol) {
                return Err(MeshError::NonFiniteVertex { index: i });
            }
        }
        Ok(())
    }
}

/// Signed enclosed volume of a closed mesh, reported as a magnitude plus an
/// inversion flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshVolume {
    /// |signed volume| in mm³.
    pub mm3: f64,
    /// True when the signed volume was negative (inward-facing normals).
    pub inverted: bool,
}

/// Closest point of `m` to `p` and the distance between them.
///
/// Exact over all triangles; equivalent to the accelerated
/// [`ClosestPointIndex`] query. Prefer the index for repeated queries
/// against the same mesh.
pub fn closest_point_on_surface(p: &Point3, m: &SurfaceMesh) -> Result<(Point3, f64), MeshError> {
    let hit = ClosestPointIndex::new(m)?.closest(p);
    Ok((hit.point, hit.distance))
}

/// Uniform-weight (umbrella) discrete Laplacian: per vertex `i`,
/// `δ_i = v_i − mean of one-ring neighbors`.
///
/// Approximates the mean curvature normal on near-uniform meshes. Uniform
/// weights are used rather than cotangent; swap the weighting here if the
/// target meshes become strongly anisotropic.
pub fn discrete_laplacian(m: &SurfaceMesh) -> Result<Vec<Vec3>, MeshError> {
    let neighbors = m.vertex_neighbors();
    laplacian_with_neighbors(m.vertices(), &neighbors)
}

/// Laplacian evaluation against a precomputed neighbor table.
///
/// The registration inner loop calls this on every trial displacement, so
/// the adjacency is built once by the caller.
pub fn laplacian_with_neighbors(
    vertices: &[Point3],
    neighbors: &[Vec<usize>],
) -> Result<Vec<Vec3>, MeshError> {
    let mut out = Vec::with_capacity(vertices.len());
    for (i, v) in vertices.iter().enumerate() {
        let ring = &neighbors[i];
        if ring.is_empty() {
            return Err(MeshError::IsolatedVertex { index: i });
        }
        let mut mean = Vec3::zeros();
        for &j in ring {
            mean += vertices[j].coords;
        }
        mean /= ring.len() as f64;
        out.push(v.coords - mean);
    }
    Ok(out)
}

/// Enclosed volume of a closed, consistently oriented mesh.
///
/// Uses the divergence theorem: `V = (1/6) Σ det[a, b, c]` over triangles.
/// Determinants are accumulated with compensated summation in triangle
/// order and divided by 6 once at the end, so integer-coordinate meshes
/// (e.g. the unit cube) come out exact.
pub fn mesh_volume(m: &SurfaceMesh) -> Result<MeshVolume, MeshError> {
    check_closed(m)?;
    let mut sum = CompensatedSum::new();
    for tri in m.triangles() {
        let a = m.vertices()[tri[0]].coords;
        let b = m.vertices()[tri[1]].coords;
        let c = m.vertices()[tri[2]].coords;
        sum.add(a.dot(&b.cross(&c)));
    }
    let signed = sum.total() / 6.0;
    Ok(MeshVolume {
        mm3: signed.abs(),
        inverted: signed < 0.0,
    })
}

/// Verifies every edge is shared by exactly two triangles with opposite
/// orientation.
pub fn check_closed(m: &SurfaceMesh) -> Result<(), MeshError> {
    let mut directed: Vec<(usize, usize)> = Vec::with_capacity(m.triangle_count() * 3);
    for tri in m.triangles() {
        directed.push((tri[0], tri[1]));
        directed.push((tri[1], tri[2]));
        directed.push((tri[2], tri[0]));
    }
    let mut sorted = directed.clone();
    sorted.sort_unstable();
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            return Err(MeshError::InconsistentOrientation { a: w[0].0, b: w[0].1 });
        }
    }
    for &(a, b) in &directed {
        if sorted.binary_search(&(b, a)).is_err() {
            return Err(MeshError::NotClosed { a, b });
        }
    }
    Ok(())
}

/// New mesh with `v_i' = v_i + d_i`; connectivity and labels unchanged.
pub fn apply_displacement(
    m: &SurfaceMesh,
    d: &DisplacementField,
) -> Result<SurfaceMesh, MeshError> {
    if d.len() != m.vertex_count() {
        return Err(MeshError::LengthMismatch {
            field: d.len(),
            vertex_count: m.vertex_count(),
        });
    }
    let vertices: Vec<Point3> = m
        .vertices()
        .iter()
        .zip(d.vectors())
        .map(|(v, u)| v + u)
        .collect();
    Ok(SurfaceMesh {
        vertices,
        triangles: m.triangles().to_vec(),
        labels: m.labels.clone(),
    })
}

pub fn triangle_area(a: &Point3, b: &Point3, c: &Point3) -> f64 {
    0.5 * (b - a).cross(&(c - a)).norm()
}

/// Closest point to `p` on triangle `(a, b, c)` with its barycentric
/// coordinates, after Ericson, "Real-Time Collision Detection".
pub fn closest_point_on_triangle(
    p: &Point3,
    a: &Point3,
    b: &Point3,
    c: &Point3,
) -> (Point3, [f64; 3]) {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;

    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return (*a, [1.0, 0.0, 0.0]);
    }

    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return (*b, [0.0, 1.0, 0.0]);
    }

    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return (a + ab * v, [1.0 - v, v, 0.0]);
    }

    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return (*c, [0.0, 0.0, 1.0]);
    }

    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return (a + ac * w, [1.0 - w, 0.0, w]);
    }

    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return (b + (c - b) * w, [0.0, 1.0 - w, w]);
    }

    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    (a + ab * v + ac * w, [1.0 - v - w, v, w])
}

/// Neumaier compensated accumulator; results are independent of how the
/// summation is chunked, to well below 1e-12 relative.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}
