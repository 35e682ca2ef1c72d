//! AABB tree for accelerated closest-point queries against a triangle mesh.
//!
//! The tree is an accelerator only: queries return exactly the global
//! minimum a brute-force scan over triangles would, because subtrees are
//! pruned only when their bounding box is strictly farther than the best
//! hit found so far.

use super::{closest_point_on_triangle, MeshError, Point3, SurfaceMesh};

const LEAF_SIZE: usize = 4;

#[derive(Debug, Clone, Copy)]
struct Aabb {
    lo: Point3,
    hi: Point3,
}

impl Aabb {
    fn empty() -> Self {
        Self {
            lo: Point3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY),
            hi: Point3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
        }
    }

    fn grow(&mut self, p: &Point3) {
        self.lo = Point3::new(self.lo.x.min(p.x), self.lo.y.min(p.y), self.lo.z.min(p.z));
        self.hi = Point3::new(self.hi.x.max(p.x), self.hi.y.max(p.y), self.hi.z.max(p.z));
    }

    fn dist_sq(&self, p: &Point3) -> f64 {
        let dx = (self.lo.x - p.x).max(0.0).max(p.x - self.hi.x);
        let dy = (self.lo.y - p.y).max(0.0).max(p.y - self.hi.y);
        let dz = (self.lo.z - p.z).max(0.0).max(p.z - self.hi.z);
        dx * dx + dy * dy + dz * dz
    }
}

#[derive(Debug, Clone)]
enum Node {
    Leaf { start: usize, len: usize },
    Inner { left: usize, right: usize },
}

/// Result of a closest-point query.
#[derive(Debug, Clone, Copy)]
pub struct SurfaceHit {
    /// Closest point on the surface.
    pub point: Point3,
    /// Euclidean distance from the query to `point`, in mm.
    pub distance: f64,
    /// Index of the triangle holding `point`.
    pub triangle: usize,
    /// Barycentric coordinates of `point` within that triangle.
    pub barycentric: [f64; 3],
}

/// Closest-point accelerator over one mesh's triangles.
pub struct ClosestPointIndex<'a> {
    mesh: &'a SurfaceMesh,
    boxes: Vec<Aabb>,
    nodes: Vec<Node>,
    order: Vec<usize>,
    root: usize,
}

impl<'a> ClosestPointIndex<'a> {
    pub fn new(mesh: &'a SurfaceMesh) -> Result<Self, MeshError> {
        if mesh.triangle_count() == 0 {
            return Err(MeshError::EmptySurface);
        }
        let tri_boxes: Vec<Aabb> = (0..mesh.triangle_count())
            .map(|t| {
                let (a, b, c) = mesh.triangle_points(t);
                let mut bb = Aabb::empty();
                bb.grow(&a);
                bb.grow(&b);
                bb.grow(&c);
                bb
            })
            .collect();
        let centroids: Vec<Point3> = (0..mesh.triangle_count())
            .map(|t| {
                let (a, b, c) = mesh.triangle_points(t);
                Point3::from((a.coords + b.coords + c.coords) / 3.0)
            })
            .collect();

        let mut index = Self {
            mesh,
            boxes: Vec::new(),
            nodes: Vec::new(),
            order: (0..mesh.triangle_count()).collect(),
            root: 0,
        };
        index.root = index.build(0, mesh.triangle_count(), &tri_boxes, &centroids);
        Ok(index)
    }

    fn build(
        &mut self,
        start: usize,
        len: usize,
        tri_boxes: &[Aabb],
        centroids: &[Point3],
    ) -> usize {
        let mut bb = Aabb::empty();
        for &t in &self.order[start..start + len] {
            bb.grow(&tri_boxes[t].lo);
            bb.grow(&tri_boxes[t].hi);
        }
        if len <= LEAF_SIZE {
            self.boxes.push(bb);
            self.nodes.push(Node::Leaf { start, len });
            return self.nodes.len() - 1;
        }

        // Split at the median centroid along the widest axis; ties broken
        // by triangle index to keep the build deterministic.
        let mut cb = Aabb::empty();
        for &t in &self.order[start..start + len] {
            cb.grow(&centroids[t]);
        }
        let extent = cb.hi - cb.lo;
        let axis = if extent.x >= extent.y && extent.x >= extent.z {
            0
        } else if extent.y >= extent.z {
            1
        } else {
            2
        };
        let mid = start + len / 2;
        self.order[start..start + len].select_nth_unstable_by(len / 2, |&a, &b| {
            centroids[a][axis]
                .partial_cmp(&centroids[b][axis])
                .unwrap()
                .then(a.cmp(&b))
        });

        let left = self.build(start, mid - start, tri_boxes, centroids);
        let right = self.build(mid, start + len - mid, tri_boxes, centroids);
        self.boxes.push(bb);
        self.nodes.push(Node::Inner { left, right });
        self.nodes.len() - 1
    }

    /// Global closest point on the mesh to `p`.
    pub fn closest(&self, p: &Point3) -> SurfaceHit {
        let mut best = SurfaceHit {
            point: *p,
            distance: f64::INFINITY,
            triangle: usize::MAX,
            barycentric: [0.0; 3],
        };
        let mut best_sq = f64::INFINITY;
        self.descend(self.root, p, &mut best, &mut best_sq);
        best.distance = best_sq.sqrt();
        best
    }

    fn descend(&self, node: usize, p: &Point3, best: &mut SurfaceHit, best_sq: &mut f64) {
        match &self.nodes[node] {
            Node::Leaf { start, len } => {
                for &t in &self.order[*start..*start + *len] {
                    let (a, b, c) = self.mesh.triangle_points(t);
                    let (q, bary) = closest_point_on_triangle(p, &a, &b, &c);
                    let d_sq = (p - q).norm_squared();
                    if d_sq < *best_sq {
                        *best_sq = d_sq;
                        best.point = q;
                        best.triangle = t;
                        best.barycentric = bary;
                    }
                }
            }
            Node::Inner { left, right } => {
                let dl = self.boxes[*left].dist_sq(p);
                let dr = self.boxes[*right].dist_sq(p);
                let (first, first_d, second, second_d) = if dl <= dr {
                    (*left, dl, *right, dr)
                } else {
                    (*right, dr, *left, dl)
                };
                if first_d < *best_sq {
                    self.descend(first, p, best, best_sq);
                }
                if second_d < *best_sq {
                    self.descend(second, p, best, best_sq);
                }
            }
        }
    }
}
