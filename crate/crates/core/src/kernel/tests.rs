use approx::assert_relative_eq;
use nalgebra::{DMatrix, DVector, Rotation3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::mesh::apply_displacement;
use crate::synthetic::primitives::icosphere;
use crate::synthetic::{apply_deflation, generate_lung_like_mesh, DeflationParams};

fn feature(values: Vec<f64>) -> FeatureVector {
    FeatureVector {
        values,
        vertex: 0,
        case_id: 0,
    }
}

fn random_features(rng: &mut ChaCha8Rng, n: usize, dim: usize, scale: f64) -> DMatrix<f64> {
    DMatrix::from_fn(n, dim, |_, _| rng.gen_range(-scale..scale))
}

fn default_options() -> ModelOptions {
    ModelOptions {
        divide_by_n: true,
        sampling: SamplingScheme::nearest_k(1).unwrap(),
        mode: TrainingMode::PerRegion,
    }
}

/// Ridge cost evaluated literally; the oracle below minimizes this with
/// finite-difference gradient descent, independently of the closed form.
fn ridge_cost(k: &DMatrix<f64>, y: &DVector<f64>, lambda: f64, alpha: &DVector<f64>) -> f64 {
    let r = y - k * alpha;
    r.norm_squared() + lambda * (alpha.transpose() * (k * alpha))[(0, 0)]
}

fn oracle_minimize(k: &DMatrix<f64>, y: &DVector<f64>, lambda: f64) -> DVector<f64> {
    let n = y.len();
    let mut alpha: DVector<f64> = DVector::zeros(n);
    let mut step = 0.1;
    for _ in 0..50_000 {
        let h = 1e-6 * (1.0 + alpha.norm());
        let mut grad = DVector::zeros(n);
        for i in 0..n {
            let mut up = alpha.clone();
            up[i] += h;
            let mut down = alpha.clone();
            down[i] -= h;
            grad[i] = (ridge_cost(k, y, lambda, &up) - ridge_cost(k, y, lambda, &down)) / (2.0 * h);
        }
        let g_sq = grad.norm_squared();
        if g_sq.sqrt() < 1e-10 {
            break;
        }
        let e0 = ridge_cost(k, y, lambda, &alpha);
        let mut accepted = false;
        while step > 1e-18 {
            let trial = &alpha - &grad * step;
            if ridge_cost(k, y, lambda, &trial) < e0 - 1e-4 * step * g_sq {
                alpha = trial;
                step *= 1.5;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    alpha
}

#[test]
fn gaussian_kernel_examples() {
    let x = feature(vec![1.0, 2.0, 3.0]);
    assert_eq!(gaussian_kernel(&x, &x, 1.0, 1).unwrap(), 1.0);

    // Unit squared distance, beta 1, N 1.
    let a = feature(vec![0.0, 0.0, 0.0]);
    let b = feature(vec![1.0, 0.0, 0.0]);
    assert_relative_eq!(
        gaussian_kernel(&a, &b, 1.0, 1).unwrap(),
        (-1.0f64).exp(),
        epsilon = 1e-15
    );

    // Squared distance 2, beta 3, N 6 also lands on exp(-1).
    let c = feature(vec![1.0, 1.0, 0.0]);
    assert_relative_eq!(
        gaussian_kernel(&a, &c, 3.0, 6).unwrap(),
        (-1.0f64).exp(),
        epsilon = 1e-15
    );

    assert!(matches!(
        gaussian_kernel(&a, &feature(vec![1.0]), 1.0, 1),
        Err(KernelError::FeatureLengthMismatch { .. })
    ));
    assert!(gaussian_kernel(&a, &b, 0.0, 1).is_err());
}

#[test]
fn features_translation_invariant_and_rotation_equivariant() {
    let m = icosphere(20.0, 1);
    let scheme = SamplingScheme::fixed_farthest_point(&m, 8).unwrap();
    let base = extract_features(&m, &scheme).unwrap();

    let t = crate::mesh::Vec3::new(12.0, -3.0, 40.0);
    let translated = SurfaceMesh::new(
        m.vertices().iter().map(|v| v + t).collect(),
        m.triangles().to_vec(),
    )
    .unwrap();
    let moved = extract_features(&translated, &scheme).unwrap();
    for (f0, f1) in base.iter().zip(&moved) {
        for (a, b) in f0.values.iter().zip(&f1.values) {
            assert_relative_eq!(a, b, epsilon = 1e-10);
        }
    }

    let r = Rotation3::from_euler_angles(0.7, -0.2, 1.9);
    let rotated = SurfaceMesh::new(
        m.vertices().iter().map(|v| r * v).collect(),
        m.triangles().to_vec(),
    )
    .unwrap();
    let rot_feats = extract_features(&rotated, &scheme).unwrap();
    for (f0, f1) in base.iter().zip(&rot_feats) {
        for (v0, v1) in f0.values.chunks(3).zip(f1.values.chunks(3)) {
            let rv = r * crate::mesh::Vec3::new(v0[0], v0[1], v0[2]);
            assert_relative_eq!(rv.x, v1[0], epsilon = 1e-9);
            assert_relative_eq!(rv.y, v1[1], epsilon = 1e-9);
            assert_relative_eq!(rv.z, v1[2], epsilon = 1e-9);
        }
    }
}

#[test]
fn single_reference_feature_is_relative_position() {
    // Vertex 1 sits at (1,2,3); the only reference (vertex 0) at the origin.
    let m = SurfaceMesh::new(
        vec![
            crate::mesh::Point3::new(0.0, 0.0, 0.0),
            crate::mesh::Point3::new(1.0, 2.0, 3.0),
            crate::mesh::Point3::new(1.0, 0.0, 0.0),
            crate::mesh::Point3::new(0.0, 1.0, 1.0),
        ],
        vec![[0, 1, 2], [0, 2, 3], [0, 3, 1], [1, 3, 2]],
    )
    .unwrap();
    let scheme = SamplingScheme {
        n: 1,
        mode: SamplingMode::FixedIds {
            ids: vec![0],
            substitute: 2,
        },
    };
    let feats = extract_features(&m, &scheme).unwrap();
    assert_eq!(feats[1].values, vec![1.0, 2.0, 3.0]);
    // The owner vertex 0 is itself a reference; the substitute replaces it.
    assert_eq!(feats[0].values, vec![-1.0, 0.0, 0.0]);
}

#[test]
fn nearest_k_never_includes_owner() {
    let m = icosphere(10.0, 1);
    let scheme = SamplingScheme::nearest_k(5).unwrap();
    let feats = extract_features(&m, &scheme).unwrap();
    for f in feats {
        assert_eq!(f.values.len(), 15);
        for r in f.values.chunks(3) {
            let norm = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
            assert!(norm > 1e-9, "owner paired with itself");
        }
    }
}

#[test]
fn fit_single_sample() {
    let x = DMatrix::from_row_slice(1, 3, &[1.0, 2.0, 3.0]);
    let y = DMatrix::from_row_slice(1, 3, &[4.0, -5.0, 6.0]);

    // λ = 0: K = [1], α = y, prediction at the training feature returns y.
    let model = fit(&x, &y, 1.0, 0.0, default_options()).unwrap();
    assert_eq!(model.weights, y);
    let pred = predict(&model, &[feature(vec![1.0, 2.0, 3.0])]).unwrap();
    assert_eq!(pred.vectors()[0], crate::mesh::Vec3::new(4.0, -5.0, 6.0));

    // λ = 0.1: α = y / 1.1.
    let model = fit(&x, &y, 1.0, 0.1, default_options()).unwrap();
    for c in 0..3 {
        assert_relative_eq!(model.weights[(0, c)], y[(0, c)] / 1.1, epsilon = 1e-15);
    }
}

#[test]
fn closed_form_matches_numerical_minimizer() {
    // 5 samples, 96-dimensional features (n = 32 references).
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let x = random_features(&mut rng, 5, 96, 10.0);
    let y = DMatrix::from_fn(5, 3, |_, _| rng.gen_range(-5.0..5.0));
    let lambda = 0.1;

    let model = fit(&x, &y, 1.0, lambda, default_options()).unwrap();
    let k = model.kernel_matrix();

    for c in 0..3 {
        let y_col = DVector::from_iterator(5, (0..5).map(|r| y[(r, c)]));
        let oracle = oracle_minimize(&k, &y_col, lambda);
        for r in 0..5 {
            assert!(
                (oracle[r] - model.weights[(r, c)]).abs() <= 1e-6,
                "component {c} sample {r}: oracle {} vs closed form {}",
                oracle[r],
                model.weights[(r, c)]
            );
        }
    }

    // Residual of the linear system.
    let mut system = k.clone();
    for i in 0..5 {
        system[(i, i)] += lambda;
    }
    let residual = (&system * &model.weights - &y).norm();
    assert!(residual <= 1e-8 * y.norm());
}

#[test]
fn kernel_matrix_agrees_with_scalar_kernel() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let x = random_features(&mut rng, 6, 9, 4.0);
    let model = fit(
        &x,
        &DMatrix::zeros(6, 3),
        0.7,
        0.1,
        ModelOptions {
            divide_by_n: true,
            ..default_options()
        },
    )
    .unwrap();
    let k = model.kernel_matrix();
    for i in 0..6 {
        for j in 0..6 {
            let fi = feature(x.row(i).iter().copied().collect());
            let fj = feature(x.row(j).iter().copied().collect());
            let expected = gaussian_kernel(&fi, &fj, 0.7, 6).unwrap();
            assert_relative_eq!(k[(i, j)], expected, epsilon = 1e-12);
        }
    }
}

#[test]
fn exact_interpolation_at_zero_lambda() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let x = random_features(&mut rng, 12, 24, 8.0);
    let y = DMatrix::from_fn(12, 3, |_, _| rng.gen_range(-10.0..10.0));
    let model = fit(&x, &y, 0.5, 0.0, default_options()).unwrap();

    let queries: Vec<FeatureVector> = (0..12)
        .map(|r| feature(x.row(r).iter().copied().collect()))
        .collect();
    let pred = predict(&model, &queries).unwrap();
    for r in 0..12 {
        let p = pred.vectors()[r];
        for c in 0..3 {
            assert!(
                (p[c] - y[(r, c)]).abs() <= 1e-8,
                "row {r} col {c}: {} vs {}",
                p[c],
                y[(r, c)]
            );
        }
    }
}

#[test]
fn far_queries_predict_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let x = random_features(&mut rng, 6, 6, 1.0);
    let y = DMatrix::from_fn(6, 3, |_, _| rng.gen_range(-3.0..3.0));
    let model = fit(&x, &y, 1.0, 0.1, default_options()).unwrap();
    let far = feature(vec![1e6; 6]);
    let pred = predict(&model, &[far]).unwrap();
    assert!(pred.vectors()[0].norm() == 0.0);
}

#[test]
fn duplicate_features_at_zero_lambda_are_singular() {
    let mut x = DMatrix::zeros(3, 4);
    x.row_mut(0).copy_from_slice(&[1.0, 2.0, 3.0, 4.0]);
    x.row_mut(1).copy_from_slice(&[1.0, 2.0, 3.0, 4.0]);
    x.row_mut(2).copy_from_slice(&[0.0, 1.0, 0.0, 1.0]);
    let y = DMatrix::from_fn(3, 3, |r, c| (r + c) as f64);
    assert!(matches!(
        fit(&x, &y, 1.0, 0.0, default_options()),
        Err(KernelError::Singular)
    ));
}

#[test]
fn ridge_cost_is_locally_minimal_at_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let x = random_features(&mut rng, 8, 12, 5.0);
    let y = DMatrix::from_fn(8, 3, |_, _| rng.gen_range(-4.0..4.0));
    let lambda = 0.1;
    let model = fit(&x, &y, 1.0, lambda, default_options()).unwrap();
    let k = model.kernel_matrix();

    for c in 0..3 {
        let y_col = DVector::from_iterator(8, (0..8).map(|r| y[(r, c)]));
        let alpha = DVector::from_iterator(8, (0..8).map(|r| model.weights[(r, c)]));
        let e_star = ridge_cost(&k, &y_col, lambda, &alpha);
        for _ in 0..20 {
            let dir = DVector::from_fn(8, |_, _| rng.gen_range(-1.0..1.0)).normalize();
            let perturbed = &alpha + dir * 1e-3;
            assert!(e_star <= ridge_cost(&k, &y_col, lambda, &perturbed) + 1e-12);
        }
    }
}

#[test]
fn regularization_monotonically_shrinks_weights() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let x = random_features(&mut rng, 10, 9, 6.0);
    let y = DMatrix::from_fn(10, 3, |_, _| rng.gen_range(-5.0..5.0));
    let lambdas = [0.01, 0.1, 1.0, 10.0];
    let mut last: Option<Vec<f64>> = None;
    for lambda in lambdas {
        let model = fit(&x, &y, 1.0, lambda, default_options()).unwrap();
        let norms: Vec<f64> = (0..3).map(|c| model.weights.column(c).norm()).collect();
        if let Some(prev) = &last {
            for (bigger, smaller) in prev.iter().zip(&norms) {
                assert!(bigger >= smaller, "{bigger} < {smaller} at lambda {lambda}");
            }
        }
        last = Some(norms);
    }
}

#[test]
fn kernel_matrix_is_spd_with_ridge_floor() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let x = random_features(&mut rng, 9, 6, 3.0);
    let lambda = 0.25;
    let model = fit(&x, &DMatrix::zeros(9, 3), 0.8, lambda, default_options()).unwrap();
    let k = model.kernel_matrix();
    assert_eq!(k.transpose(), k);
    for i in 0..9 {
        assert_eq!(k[(i, i)], 1.0);
    }
    let mut system = k;
    for i in 0..9 {
        system[(i, i)] += lambda;
    }
    let eigs = system.symmetric_eigen().eigenvalues;
    for e in eigs.iter() {
        assert!(*e >= lambda - 1e-9, "eigenvalue {e} below ridge floor");
    }
}

#[test]
fn median_heuristic_puts_median_pair_at_unit_exponent() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let x = random_features(&mut rng, 40, 5, 2.0);
    let beta = median_heuristic_beta(&x, false, 0).unwrap();
    let mut d_sq: Vec<f64> = Vec::new();
    for i in 0..40 {
        for j in (i + 1)..40 {
            d_sq.push((x.row(i) - x.row(j)).norm_squared());
        }
    }
    d_sq.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = d_sq[d_sq.len() / 2];
    assert_relative_eq!(beta * median, 1.0, epsilon = 1e-9);
}

#[test]
fn training_set_counts_per_mode() {
    let meshes: Vec<SurfaceMesh> = (0..3)
        .map(|s| generate_lung_like_mesh(s, 150).unwrap())
        .collect();
    let fields: Vec<crate::mesh::DisplacementField> = meshes
        .iter()
        .map(|m| crate::mesh::DisplacementField::zeros(m.vertex_count()))
        .collect();
    let cases: Vec<TrainingCase<'_>> = meshes
        .iter()
        .zip(&fields)
        .enumerate()
        .map(|(i, (m, f))| TrainingCase {
            case_id: i,
            source: m,
            displacement: f,
        })
        .collect();
    let scheme = SamplingScheme::fixed_farthest_point(&meshes[0], 8).unwrap();

    let per_region = build_training_set(&cases, &scheme, TrainingMode::PerRegion).unwrap();
    let v: usize = meshes.iter().map(|m| m.vertex_count()).sum();
    assert_eq!(per_region.features.nrows(), v);
    assert_eq!(per_region.targets.ncols(), 3);

    let per_patient = build_training_set(&cases, &scheme, TrainingMode::PerPatient).unwrap();
    assert_eq!(per_patient.features.nrows(), 3);
    assert_eq!(per_patient.targets.ncols(), 3 * meshes[0].vertex_count());
}

#[test]
fn mismatched_vertex_counts_error_under_fixed_ids() {
    let a = generate_lung_like_mesh(0, 150).unwrap();
    let b = generate_lung_like_mesh(1, 300).unwrap();
    let fa = crate::mesh::DisplacementField::zeros(a.vertex_count());
    let fb = crate::mesh::DisplacementField::zeros(b.vertex_count());
    let cases = [
        TrainingCase {
            case_id: 0,
            source: &a,
            displacement: &fa,
        },
        TrainingCase {
            case_id: 1,
            source: &b,
            displacement: &fb,
        },
    ];
    let scheme = SamplingScheme::fixed_farthest_point(&a, 8).unwrap();
    assert!(matches!(
        build_training_set(&cases, &scheme, TrainingMode::PerRegion),
        Err(KernelError::VertexCountMismatch { .. })
    ));
}

#[test]
fn self_training_reproduces_own_field() {
    // Per-region training on one case, prediction on the same case at λ=0.
    let m = generate_lung_like_mesh(21, 150).unwrap();
    let (lo, hi) = m.bounding_box();
    let params = DeflationParams {
        contraction_ratio: 0.5,
        rotation_deg: 10.0,
        sag_mm: 4.0,
        hilum_point: crate::mesh::Point3::new(0.0, lo.y + 0.15 * (hi.y - lo.y), 0.0),
        seed: 2,
    };
    let case = apply_deflation(&m, &params).unwrap();

    let scheme = SamplingScheme::fixed_farthest_point(&case.inflated, 16).unwrap();
    let cases = [TrainingCase {
        case_id: 0,
        source: &case.inflated,
        displacement: &case.truth_field,
    }];
    let training = build_training_set(&cases, &scheme, TrainingMode::PerRegion).unwrap();
    // λ = 0 needs a numerically nonsingular K: pick β so even the closest
    // feature pair sits at a decisive kernel exponent.
    let n = training.features.nrows();
    let mut min_sq = f64::INFINITY;
    for i in 0..n {
        for j in (i + 1)..n {
            min_sq = min_sq.min((training.features.row(i) - training.features.row(j)).norm_squared());
        }
    }
    assert!(min_sq > 0.0, "features must be distinct");
    let beta = 30.0 * n as f64 / min_sq;
    let model = fit(
        &training.features,
        &training.targets,
        beta,
        0.0,
        ModelOptions {
            divide_by_n: true,
            sampling: scheme.clone(),
            mode: TrainingMode::PerRegion,
        },
    )
    .unwrap();
    let pred = predict(&model, &extract_features(&case.inflated, &scheme).unwrap()).unwrap();
    for (p, t) in pred.vectors().iter().zip(case.truth_field.vectors()) {
        assert!((p - t).norm() <= 1e-8, "{p:?} vs {t:?}");
    }
}

#[test]
fn prediction_is_translation_invariant() {
    let m = generate_lung_like_mesh(30, 150).unwrap();
    let (lo, hi) = m.bounding_box();
    let params = DeflationParams {
        contraction_ratio: 0.45,
        rotation_deg: 12.0,
        sag_mm: 5.0,
        hilum_point: crate::mesh::Point3::new(0.0, lo.y + 0.15 * (hi.y - lo.y), 0.0),
        seed: 4,
    };
    let case = apply_deflation(&m, &params).unwrap();
    let scheme = SamplingScheme::fixed_farthest_point(&case.inflated, 12).unwrap();
    let cases = [TrainingCase {
        case_id: 0,
        source: &case.inflated,
        displacement: &case.truth_field,
    }];
    let training = build_training_set(&cases, &scheme, TrainingMode::PerRegion).unwrap();
    let beta = median_heuristic_beta(&training.features, true, 0).unwrap();
    let model = fit(
        &training.features,
        &training.targets,
        beta,
        0.1,
        ModelOptions {
            divide_by_n: true,
            sampling: scheme.clone(),
            mode: TrainingMode::PerRegion,
        },
    )
    .unwrap();

    let base = predict(&model, &extract_features(&case.inflated, &scheme).unwrap()).unwrap();
    let t = crate::mesh::Vec3::new(250.0, -40.0, 90.0);
    let moved = SurfaceMesh::new(
        case.inflated.vertices().iter().map(|v| v + t).collect(),
        case.inflated.triangles().to_vec(),
    )
    .unwrap();
    let shifted = predict(&model, &extract_features(&moved, &scheme).unwrap()).unwrap();
    for (a, b) in base.vectors().iter().zip(shifted.vectors()) {
        assert!((a - b).norm() <= 1e-9, "{a:?} vs {b:?}");
    }
}

#[test]
fn interior_interpolation_properties() {
    let m = icosphere(30.0, 2);

    // Constant field transports every interior point by the same vector.
    let t = crate::mesh::Vec3::new(3.0, -2.0, 1.0);
    let field =
        crate::mesh::DisplacementField::new(vec![t; m.vertex_count()]).unwrap();
    let interior = InteriorPointSet::new(vec![
        crate::mesh::Point3::new(0.0, 0.0, 0.0),
        crate::mesh::Point3::new(10.0, -5.0, 2.0),
    ]);
    let disp = interpolate_interior(&m, &field, &interior, 8).unwrap();
    for d in &disp {
        assert_relative_eq!(d, &t, epsilon = 1e-12);
    }

    // A point coincident with a surface vertex takes that displacement.
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let varying = crate::mesh::DisplacementField::new(
        (0..m.vertex_count())
            .map(|_| {
                crate::mesh::Vec3::new(
                    rng.gen_range(-2.0..2.0),
                    rng.gen_range(-2.0..2.0),
                    rng.gen_range(-2.0..2.0),
                )
            })
            .collect(),
    )
    .unwrap();
    let on_vertex = InteriorPointSet::new(vec![m.vertices()[17]]);
    let snapped = interpolate_interior(&m, &varying, &on_vertex, 8).unwrap();
    assert_eq!(snapped[0], varying.vectors()[17]);

    // Convex combination: each component within its neighbors' range.
    let probe = InteriorPointSet::new(vec![crate::mesh::Point3::new(5.0, 5.0, -4.0)]);
    let out = interpolate_interior(&m, &varying, &probe, 8).unwrap();
    let all: Vec<f64> = varying.vectors().iter().flat_map(|v| [v.x, v.y, v.z]).collect();
    let lo = all.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = all.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    for c in [out[0].x, out[0].y, out[0].z] {
        assert!(c >= lo && c <= hi);
    }

    // Empty interior set is fine.
    let empty = InteriorPointSet::new(vec![]);
    assert!(interpolate_interior(&m, &varying, &empty, 8).unwrap().is_empty());
}

#[test]
fn interior_interpolation_tracks_linear_field() {
    let m = icosphere(25.0, 2);
    // u(v) = A·v + b with a mild random A.
    let a = nalgebra::Matrix3::new(0.05, 0.01, 0.0, -0.02, 0.08, 0.01, 0.0, 0.03, -0.04);
    let b = crate::mesh::Vec3::new(1.0, -0.5, 2.0);
    let field = crate::mesh::DisplacementField::new(
        m.vertices().iter().map(|v| a * v.coords + b).collect(),
    )
    .unwrap();

    // Peripheral interior points (nodules sit near the pleural surface);
    // nearest-vertex interpolation cannot see the field gradient for deep
    // points, only for points close to their supporting surface patch.
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let points: Vec<crate::mesh::Point3> = (0..40)
        .map(|_| {
            let dir = crate::mesh::Vec3::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            )
            .normalize();
            let radius = rng.gen_range(14.0..21.0);
            crate::mesh::Point3::from(dir * radius)
        })
        .collect();
    let interior = InteriorPointSet::new(points.clone());
    let disp = interpolate_interior(&m, &field, &interior, 8).unwrap();

    let mut total_err = 0.0;
    let mut total_mag = 0.0;
    for (p, d) in points.iter().zip(&disp) {
        let exact = a * p.coords + b;
        total_err += (d - exact).norm();
        total_mag += exact.norm();
    }
    assert!(
        total_err <= 0.10 * total_mag,
        "interior interpolation error {total_err} vs magnitude {total_mag}"
    );
}

#[test]
fn model_serialization_round_trips() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let x = random_features(&mut rng, 7, 6, 4.0);
    let y = DMatrix::from_fn(7, 3, |_, _| rng.gen_range(-2.0..2.0));
    let model = fit(&x, &y, 0.9, 0.1, default_options()).unwrap();
    let text = model.to_json();
    let restored = KernelModel::from_json(&text).unwrap();
    assert_eq!(model, restored);

    assert!(KernelModel::from_json("{\"format\":\"other/v9\"}").is_err());
}

#[test]
fn per_patient_mode_round_trip() {
    let meshes: Vec<SurfaceMesh> = (0..3)
        .map(|s| generate_lung_like_mesh(s + 50, 150).unwrap())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let fields: Vec<crate::mesh::DisplacementField> = meshes
        .iter()
        .map(|m| {
            crate::mesh::DisplacementField::new(
                (0..m.vertex_count())
                    .map(|_| {
                        crate::mesh::Vec3::new(
                            rng.gen_range(-5.0..5.0),
                            rng.gen_range(-5.0..5.0),
                            rng.gen_range(-5.0..5.0),
                        )
                    })
                    .collect(),
            )
            .unwrap()
        })
        .collect();
    let cases: Vec<TrainingCase<'_>> = meshes
        .iter()
        .zip(&fields)
        .enumerate()
        .map(|(i, (m, f))| TrainingCase {
            case_id: i,
            source: m,
            displacement: f,
        })
        .collect();
    let scheme = SamplingScheme::fixed_farthest_point(&meshes[0], 8).unwrap();
    let training = build_training_set(&cases, &scheme, TrainingMode::PerPatient).unwrap();
    let beta = median_heuristic_beta(&training.features, true, 0).unwrap();
    let model = fit(
        &training.features,
        &training.targets,
        beta,
        0.0,
        ModelOptions {
            divide_by_n: true,
            sampling: scheme.clone(),
            mode: TrainingMode::PerPatient,
        },
    )
    .unwrap();

    // λ = 0 with distinct cases: prediction at a training case recovers its
    // whole field.
    let pred = predict(&model, &extract_features(&meshes[1], &scheme).unwrap()).unwrap();
    assert_eq!(pred.len(), meshes[1].vertex_count());
    for (p, t) in pred.vectors().iter().zip(fields[1].vectors()) {
        assert!((p - t).norm() <= 1e-6, "{p:?} vs {t:?}");
    }
}
