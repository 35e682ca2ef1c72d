use approx::assert_relative_eq;

use super::*;
use crate::mesh::mesh_volume;
use crate::metrics::volume_change_ratio;

fn default_hilum(m: &SurfaceMesh) -> Point3 {
    let (lo, hi) = m.bounding_box();
    Point3::new(0.0, lo.y + 0.15 * (hi.y - lo.y), 0.0)
}

#[test]
fn generator_is_deterministic() {
    let a = generate_lung_like_mesh(42, 500).unwrap();
    let b = generate_lung_like_mesh(42, 500).unwrap();
    assert_eq!(a, b);
}

#[test]
fn generator_respects_vertex_budget_and_volume_band() {
    for seed in [1u64, 7, 99] {
        let m = generate_lung_like_mesh(seed, 500).unwrap();
        let n = m.vertex_count();
        assert!((450..=550).contains(&n), "vertex count {n}");
        let v = mesh_volume(&m).unwrap();
        assert!(!v.inverted, "generator must emit outward orientation");
        // 0.5 to 2.0 liters in mm³.
        assert!(
            (5.0e5..=2.0e6).contains(&v.mm3),
            "volume {} mm³ out of band",
            v.mm3
        );
    }
}

#[test]
fn generator_rejects_tiny_budget() {
    assert!(matches!(
        generate_lung_like_mesh(1, 50),
        Err(SyntheticError::BudgetTooSmall(50))
    ));
}

#[test]
fn identity_params_produce_identity_case() {
    let m = generate_lung_like_mesh(3, 300).unwrap();
    let params = DeflationParams::identity(default_hilum(&m), 5);
    let case = apply_deflation(&m, &params).unwrap();
    assert_eq!(case.deflated, case.inflated);
    assert!(case.truth_field.vectors().iter().all(|v| *v == Vec3::zeros()));
    for (p, q) in case.interior.points.iter().zip(&case.interior_deflated.points) {
        assert_eq!(p, q);
    }
}

#[test]
fn contraction_only_hits_volume_ratio() {
    let m = generate_lung_like_mesh(4, 500).unwrap();
    let params = DeflationParams {
        contraction_ratio: 0.33,
        rotation_deg: 0.0,
        sag_mm: 0.0,
        hilum_point: default_hilum(&m),
        seed: 1,
    };
    let case = apply_deflation(&m, &params).unwrap();
    let ratio = volume_change_ratio(&case.inflated, &case.deflated).unwrap();
    assert!((ratio - 0.33).abs() <= 0.01, "ratio {ratio}");
    // The map is affine here, so the ratio is exact to rounding.
    assert_relative_eq!(ratio, 0.33, epsilon = 1e-9);
}

#[test]
fn pure_rotation_preserves_distance_to_hilum_axis() {
    let m = generate_lung_like_mesh(5, 300).unwrap();
    let hilum = default_hilum(&m);
    let params = DeflationParams {
        contraction_ratio: 1.0,
        rotation_deg: 20.0,
        sag_mm: 0.0,
        hilum_point: hilum,
        seed: 2,
    };
    let case = apply_deflation(&m, &params).unwrap();
    for (v, w) in case.inflated.vertices().iter().zip(case.deflated.vertices()) {
        // The rotation axis is the y line through the hilum.
        let r_before = ((v.x - hilum.x).powi(2) + (v.z - hilum.z).powi(2)).sqrt();
        let r_after = ((w.x - hilum.x).powi(2) + (w.z - hilum.z).powi(2)).sqrt();
        assert!((r_before - r_after).abs() <= 1e-9, "{r_before} vs {r_after}");
        assert_eq!(v.y, w.y);
    }
}

#[test]
fn deflation_invariants_hold_on_general_case() {
    let m = generate_lung_like_mesh(6, 500).unwrap();
    let params = DeflationParams {
        contraction_ratio: 0.45,
        rotation_deg: 15.0,
        sag_mm: 6.0,
        hilum_point: default_hilum(&m),
        seed: 3,
    };
    let case = apply_deflation(&m, &params).unwrap();

    // Stored deflated mesh is exactly the displaced inflated mesh.
    let reapplied = crate::mesh::apply_displacement(&case.inflated, &case.truth_field).unwrap();
    assert_eq!(reapplied, case.deflated);

    // Exactly two clips, placed at vertices, transported exactly.
    assert_eq!(case.clips.len(), 2);
    let sep = (case.clips[0].source_pos - case.clips[1].source_pos).norm();
    assert!(sep >= 0.25 * case.inflated.diameter());
    let map = DeflationMap::new(&case.inflated, &params).unwrap();
    for clip in &case.clips {
        assert_eq!(map.apply(&clip.source_pos), clip.target_pos);
        let transported = clip.transported(case.inflated.triangles(), case.deflated.vertices());
        assert!((transported - clip.target_pos).norm() <= 1e-9);
    }

    // Interior points stay strictly inside their surfaces.
    case.interior.validate_inside(&case.inflated, 1e-6).unwrap();
    case.interior_deflated
        .validate_inside(&case.deflated, 1e-6)
        .unwrap();

    // Sag and rotation are volume preserving, so the ratio still tracks the
    // contraction parameter tightly.
    let ratio = volume_change_ratio(&case.inflated, &case.deflated).unwrap();
    assert!((ratio - 0.45).abs() <= 0.01, "ratio {ratio}");
}

#[test]
fn dataset_is_deterministic_and_diverse() {
    let ranges = ParamRanges::default();
    let a = make_dataset(6, 123, &ranges).unwrap();
    let b = make_dataset(6, 123, &ranges).unwrap();
    assert_eq!(a.len(), 6);
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.inflated, y.inflated);
        assert_eq!(x.deflated, y.deflated);
        assert_eq!(x.params, y.params);
    }
    for i in 0..a.len() {
        for j in (i + 1)..a.len() {
            assert_ne!(
                a[i].inflated.vertices(),
                a[j].inflated.vertices(),
                "cases {i} and {j} share a vertex array"
            );
        }
    }
}

#[test]
fn dataset_default_ranges_generate_valid_cases() {
    let cases = make_dataset(12, 7, &ParamRanges::default()).unwrap();
    assert_eq!(cases.len(), 12);
    for case in &cases {
        assert_eq!(case.clips.len(), 2);
        let ratio = volume_change_ratio(&case.inflated, &case.deflated).unwrap();
        assert!((ratio - case.params.contraction_ratio).abs() <= 0.01);
        assert!(case.params.contraction_ratio >= 0.3 && case.params.contraction_ratio <= 0.6);
        assert!(case.params.rotation_deg >= 5.0 && case.params.rotation_deg <= 25.0);
        assert!(case.params.sag_mm >= 2.0 && case.params.sag_mm <= 10.0);
    }
}

#[test]
fn invalid_inputs_error() {
    let m = generate_lung_like_mesh(1, 200).unwrap();
    let bad_ratio = DeflationParams {
        contraction_ratio: 0.0,
        ..DeflationParams::identity(default_hilum(&m), 0)
    };
    assert!(matches!(
        apply_deflation(&m, &bad_ratio),
        Err(SyntheticError::BadRatio(_))
    ));

    let outside = DeflationParams::identity(Point3::new(1000.0, 0.0, 0.0), 0);
    assert!(matches!(
        apply_deflation(&m, &outside),
        Err(SyntheticError::HilumOutsideBox { .. })
    ));

    assert!(matches!(
        make_dataset(1, 0, &ParamRanges::default()),
        Err(SyntheticError::TooFewCases(1))
    ));

    let empty = ParamRanges {
        contraction_ratio: (0.6, 0.3),
        ..ParamRanges::default()
    };
    assert!(matches!(
        make_dataset(3, 0, &empty),
        Err(SyntheticError::EmptyRange { .. })
    ));
}
