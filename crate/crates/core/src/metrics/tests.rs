use approx::assert_relative_eq;
use nalgebra::Rotation3;

use super::*;
use crate::mesh::Vec3;
use crate::synthetic::generate_lung_like_mesh;
use crate::synthetic::primitives::unit_cube;

fn square_at(z: f64, x_offset: f64) -> SurfaceMesh {
    SurfaceMesh::new(
        vec![
            Point3::new(x_offset, 0.0, z),
            Point3::new(x_offset + 1.0, 0.0, z),
            Point3::new(x_offset + 1.0, 1.0, z),
            Point3::new(x_offset, 1.0, z),
        ],
        vec![[0, 1, 2], [0, 2, 3]],
    )
    .unwrap()
}

#[test]
fn identical_meshes_have_zero_md_and_hd() {
    let m = unit_cube();
    assert_eq!(mean_distance(&m, &m).unwrap(), 0.0);
    assert_eq!(hausdorff_distance(&m, &m).unwrap(), 0.0);
}

#[test]
fn parallel_sheets_md_is_separation() {
    let a = square_at(0.0, 0.0);
    let b = square_at(2.0, 0.0);
    // Brute force: every vertex of either sheet projects straight onto the
    // other, so all eight vertex distances equal the separation.
    for v in a.vertices() {
        let (_, d) = crate::mesh::closest_point_on_surface(v, &b).unwrap();
        assert_eq!(d, 2.0);
    }
    for v in b.vertices() {
        let (_, d) = crate::mesh::closest_point_on_surface(v, &a).unwrap();
        assert_eq!(d, 2.0);
    }
    assert_eq!(mean_distance(&a, &b).unwrap(), 2.0);
}

#[test]
fn translated_square_hd_comes_from_far_edge() {
    let a = square_at(0.0, 0.0);
    let b = square_at(0.0, 3.0);
    // Brute force over all vertex/triangle pairs.
    let mut expected = 0.0f64;
    for (from, to) in [(&a, &b), (&b, &a)] {
        for v in from.vertices() {
            let (_, d) = crate::mesh::closest_point_on_surface(v, to).unwrap();
            expected = expected.max(d);
        }
    }
    assert_eq!(expected, 3.0);
    assert_eq!(hausdorff_distance(&a, &b).unwrap(), 3.0);
    assert_relative_eq!(mean_distance(&a, &b).unwrap(), 2.5, epsilon = 1e-12);
}

#[test]
fn md_hd_symmetric_and_ordered_on_random_pairs() {
    for seed in 0..8u64 {
        let a = generate_lung_like_mesh(seed, 150).unwrap();
        let b = generate_lung_like_mesh(seed + 100, 150).unwrap();
        let md_ab = mean_distance(&a, &b).unwrap();
        let md_ba = mean_distance(&b, &a).unwrap();
        let hd_ab = hausdorff_distance(&a, &b).unwrap();
        let hd_ba = hausdorff_distance(&b, &a).unwrap();
        assert_eq!(md_ab, md_ba);
        assert_eq!(hd_ab, hd_ba);
        assert!(md_ab >= 0.0 && md_ab <= hd_ab);
    }
}

#[test]
fn md_hd_tre_invariant_under_rigid_motion() {
    let a = generate_lung_like_mesh(1, 150).unwrap();
    let b = generate_lung_like_mesh(2, 150).unwrap();
    let md0 = mean_distance(&a, &b).unwrap();
    let hd0 = hausdorff_distance(&a, &b).unwrap();

    let r = Rotation3::from_euler_angles(0.3, -0.9, 1.4);
    let t = Vec3::new(40.0, -12.0, 7.0);
    let move_mesh = |m: &SurfaceMesh| {
        let moved: Vec<Point3> = m.vertices().iter().map(|v| r * v + t).collect();
        SurfaceMesh::new(moved, m.triangles().to_vec()).unwrap()
    };
    let (ra, rb) = (move_mesh(&a), move_mesh(&b));
    assert_relative_eq!(mean_distance(&ra, &rb).unwrap(), md0, epsilon = 1e-9);
    assert_relative_eq!(hausdorff_distance(&ra, &rb).unwrap(), hd0, epsilon = 1e-9);

    let p = vec![Point3::new(1.0, 2.0, 3.0), Point3::new(-4.0, 0.5, 2.0)];
    let q = vec![Point3::new(0.0, 1.0, 3.0), Point3::new(-4.0, 2.5, 0.0)];
    let tre0 = target_registration_error(&p, &q).unwrap();
    let rp: Vec<Point3> = p.iter().map(|v| r * v + t).collect();
    let rq: Vec<Point3> = q.iter().map(|v| r * v + t).collect();
    let tre1 = target_registration_error(&rp, &rq).unwrap();
    for (x, y) in tre0.iter().zip(&tre1) {
        assert_relative_eq!(x, y, epsilon = 1e-9);
    }
}

#[test]
fn tre_examples() {
    let truth = vec![Point3::new(0.0, 0.0, 0.0), Point3::new(1.0, 1.0, 1.0)];
    assert_eq!(
        target_registration_error(&truth, &truth).unwrap(),
        vec![0.0, 0.0]
    );

    let predicted = vec![Point3::new(3.0, 4.0, 0.0)];
    let truth = vec![Point3::new(0.0, 0.0, 0.0)];
    assert_eq!(target_registration_error(&predicted, &truth).unwrap(), vec![5.0]);

    let predicted = vec![Point3::new(1.0, 0.0, 0.0), Point3::new(0.0, 0.0, 2.0)];
    let truth = vec![Point3::origin(), Point3::origin()];
    assert_eq!(
        target_registration_error(&predicted, &truth).unwrap(),
        vec![1.0, 2.0]
    );

    assert!(matches!(
        target_registration_error(&predicted, &truth[..1]),
        Err(MetricsError::LandmarkMismatch { .. })
    ));
    assert!(matches!(
        target_registration_error(&[], &[]),
        Err(MetricsError::NoLandmarks)
    ));
}

#[test]
fn volume_ratio_identity_and_scaling() {
    let m = unit_cube();
    assert_eq!(volume_change_ratio(&m, &m).unwrap(), 1.0);

    let shrunk = SurfaceMesh::new(
        m.vertices()
            .iter()
            .map(|v| Point3::from(v.coords * 0.7))
            .collect(),
        m.triangles().to_vec(),
    )
    .unwrap();
    assert_relative_eq!(
        volume_change_ratio(&m, &shrunk).unwrap(),
        0.343,
        epsilon = 1e-12
    );
}

#[test]
fn report_invariants_are_enforced() {
    assert!(MetricsReport::new(1.0, 0.5, vec![], 1.0).is_err());
    assert!(MetricsReport::new(-0.1, 0.5, vec![], 1.0).is_err());
    assert!(MetricsReport::new(0.1, 0.5, vec![-1.0], 1.0).is_err());
    assert!(MetricsReport::new(0.1, 0.5, vec![1.0], 0.0).is_err());
    let ok = MetricsReport::new(0.1, 0.5, vec![1.0, 2.0], 0.33).unwrap();
    let json = serde_json::to_value(&ok).unwrap();
    assert_eq!(json["md_mm"], 0.1);
    assert_eq!(json["hd_mm"], 0.5);
    assert_eq!(json["tre_mm"][1], 2.0);
    assert_eq!(json["volume_change_ratio"], 0.33);
}
