//! Closed, consistently outward-oriented primitive meshes.

use std::collections::BTreeMap;

use crate::mesh::{Point3, SurfaceMesh, Vec3};

use super::SyntheticError;

/// Unit cube [0,1]³ as 12 triangles with outward normals.
pub fn unit_cube() -> SurfaceMesh {
    let v = vec![
        Point3::new(0.0, 0.0, 0.0),
        Point3::new(1.0, 0.0, 0.0),
        Point3::new(1.0, 1.0, 0.0),
        Point3::new(0.0, 1.0, 0.0),
        Point3::new(0.0, 0.0, 1.0),
        Point3::new(1.0, 0.0, 1.0),
        Point3::new(1.0, 1.0, 1.0),
        Point3::new(0.0, 1.0, 1.0),
    ];
    let t = vec![
        [0, 2, 1],
        [0, 3, 2],
        [4, 5, 6],
        [4, 6, 7],
        [0, 1, 5],
        [0, 5, 4],
        [2, 3, 7],
        [2, 7, 6],
        [0, 4, 7],
        [0, 7, 3],
        [1, 2, 6],
        [1, 6, 5],
    ];
    SurfaceMesh::new(v, t).expect("static cube is valid")
}

/// Latitude/longitude sphere with poles on ±y, shaped by `radial`: each
/// unit direction maps to its surface point. The vertex count comes out
/// near `vertex_budget` (exactly `rings·segments + 2`).
pub fn uv_sphere_with<F>(vertex_budget: usize, radial: F) -> Result<SurfaceMesh, SyntheticError>
where
    F: Fn(&Vec3) -> Point3,
{
    if vertex_budget < 100 {
        return Err(SyntheticError::BudgetTooSmall(vertex_budget));
    }
    let interior = vertex_budget - 2;
    let rings = ((interior as f64 / 2.0).sqrt().round() as usize).max(3);
    let segments = ((interior as f64 / rings as f64).round() as usize).max(3);

    let mut dirs = Vec::with_capacity(rings * segments + 2);
    dirs.push(Vec3::new(0.0, 1.0, 0.0));
    for i in 1..=rings {
        let theta = std::f64::consts::PI * i as f64 / (rings + 1) as f64;
        let (sin_t, cos_t) = (theta.sin(), theta.cos());
        for j in 0..segments {
            let phi = std::f64::consts::TAU * j as f64 / segments as f64;
            dirs.push(Vec3::new(sin_t * phi.cos(), cos_t, sin_t * phi.sin()));
        }
    }
    dirs.push(Vec3::new(0.0, -1.0, 0.0));

    let vertices: Vec<Point3> = dirs.iter().map(|d| radial(d)).collect();
    let south = vertices.len() - 1;
    let idx = |ring: usize, seg: usize| 1 + (ring - 1) * segments + (seg % segments);

    let mut triangles = Vec::with_capacity(2 * rings * segments);
    for j in 0..segments {
        triangles.push([0, idx(1, j + 1), idx(1, j)]);
    }
    for i in 1..rings {
        for j in 0..segments {
            let (u0, u1) = (idx(i, j), idx(i, j + 1));
            let (l0, l1) = (idx(i + 1, j), idx(i + 1, j + 1));
            triangles.push([u0, l1, l0]);
            triangles.push([u0, u1, l1]);
        }
    }
    for j in 0..segments {
        triangles.push([south, idx(rings, j), idx(rings, j + 1)]);
    }

    Ok(SurfaceMesh::new(vertices, triangles).map_err(SyntheticError::Mesh)?)
}

/// Sphere of the given radius with `vertex_budget` vertices.
pub fn uv_sphere(radius: f64, vertex_budget: usize) -> Result<SurfaceMesh, SyntheticError> {
    uv_sphere_with(vertex_budget, |d| Point3::from(d * radius))
}

/// Icosphere: icosahedron with `subdivisions` rounds of 4-way triangle
/// splitting, vertices projected to the given radius. Vertex counts are
/// 12, 42, 162, 642, ... per level.
pub fn icosphere(radius: f64, subdivisions: u32) -> SurfaceMesh {
    let phi = (1.0 + 5.0_f64.sqrt()) / 2.0;
    let mut vertices: Vec<Point3> = [
        (-1.0, phi, 0.0),
        (1.0, phi, 0.0),
        (-1.0, -phi, 0.0),
        (1.0, -phi, 0.0),
        (0.0, -1.0, phi),
        (0.0, 1.0, phi),
        (0.0, -1.0, -phi),
        (0.0, 1.0, -phi),
        (phi, 0.0, -1.0),
        (phi, 0.0, 1.0),
        (-phi, 0.0, -1.0),
        (-phi, 0.0, 1.0),
    ]
    .into_iter()
    .map(|(x, y, z)| {
        let v = Vec3::new(x, y, z).normalize() * radius;
        Point3::from(v)
    })
    .collect();

    let mut triangles: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];

    for _ in 0..subdivisions {
        let mut midpoints: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut midpoint = |a: usize, b: usize, vertices: &mut Vec<Point3>| -> usize {
            let key = (a.min(b), a.max(b));
            *midpoints.entry(key).or_insert_with(|| {
                let m = (vertices[a].coords + vertices[b].coords) * 0.5;
                let v = m.normalize() * radius;
                vertices.push(Point3::from(v));
                vertices.len() - 1
            })
        };
        let mut next = Vec::with_capacity(triangles.len() * 4);
        for [a, b, c] in triangles {
            let ab = midpoint(a, b, &mut vertices);
            let bc = midpoint(b, c, &mut vertices);
            let ca = midpoint(c, a, &mut vertices);
            next.push([a, ab, ca]);
            next.push([b, bc, ab]);
            next.push([c, ca, bc]);
            next.push([ab, bc, ca]);
        }
        triangles = next;
    }

    SurfaceMesh::new(vertices, triangles).expect("icosphere construction is valid")
}
