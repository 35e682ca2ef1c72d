use pneumo_core::mesh::{apply_displacement, DisplacementField, Vec3};
use pneumo_core::registration::{register, registration_energy, RegistrationParams, StepControl};
use pneumo_core::synthetic::{apply_deflation, generate_lung_like_mesh, DeflationParams};
use pneumo_core::Point3;

#[test]
#[ignore]
fn translation_diag() {
    let m = generate_lung_like_mesh(6, 150).unwrap();
    let t = Vec3::new(2.0, -1.0, 1.5);
    let field = DisplacementField::new(vec![t; m.vertex_count()]).unwrap();
    let target = apply_displacement(&m, &field).unwrap();
    let params = RegistrationParams {
        max_iterations: 2000,
        convergence_tol: 1e-12,
        ..RegistrationParams::default()
    };
    let result = register(&m, &target, &[], &params).unwrap();
    let n = result.energy_trace.len();
    println!("iterations: {}", n - 1);
    println!("converged: {}", result.converged);
    for row in result.energy_trace.iter().rev().take(5) {
        println!("it {}: E={:.3e} shape={:.3e} lap={:.3e}", row.iteration, row.energy.total, row.energy.shape, row.energy.laplacian);
    }
    let mean_err: f64 = result.displacement.vectors().iter().map(|u| (u - t).norm()).sum::<f64>() / m.vertex_count() as f64;
    let max_err: f64 = result.displacement.vectors().iter().map(|u| (u - t).norm()).fold(0.0, f64::max);
    println!("mean err {mean_err:.4} max err {max_err:.4}");
    // true optimum energy
    let e_opt = registration_energy(&m, &field, &target, &[], &params).unwrap();
    println!("energy at true optimum: {:.3e}", e_opt.total);
}

#[test]
#[ignore]
fn rotation_diag() {
    let m = generate_lung_like_mesh(11, 500).unwrap();
    let (lo, hi) = m.bounding_box();
    let dp = DeflationParams {
        contraction_ratio: 0.45,
        rotation_deg: 20.0,
        sag_mm: 5.0,
        hilum_point: Point3::new(0.0, lo.y + 0.15 * (hi.y - lo.y), 0.0),
        seed: 11 ^ 0xabcd,
    };
    let case = apply_deflation(&m, &dp).unwrap();
    for (label, clips, omega, mu) in [
        ("no clips mu=1", false, 1.0, 1.0),
        ("clips om=1 mu=1", true, 1.0, 1.0),
        ("clips om=1 mu=0.1", true, 1.0, 0.1),
        ("no clips mu=0.1", false, 1.0, 0.1),
    ] {
        let params = RegistrationParams {
            clip_weight: omega,
            laplacian_weight: mu,
            max_iterations: 400,
            convergence_tol: 1e-6,
            step: StepControl::default(),
        };
        let cl = if clips { case.clips.clone() } else { vec![] };
        let start = std::time::Instant::now();
        let result = register(&case.inflated, &case.deflated, &cl, &params).unwrap();
        let tre: Vec<f64> = case.clips.iter().map(|c| {
            let moved = c.transported(case.inflated.triangles(), result.deformed.vertices());
            (moved - c.target_pos).norm()
        }).collect();
        let last = result.energy_trace.last().unwrap();
        println!(
            "{label}: iters={} conv={} md={:.3} hd={:.3} tre={:.2?} E={:.4e} (shape {:.2e} clip {:.2e} lap {:.2e}) [{:?}]",
            result.energy_trace.len() - 1,
            result.converged,
            result.metrics.md_mm,
            result.metrics.hd_mm,
            tre,
            last.energy.total, last.energy.shape, last.energy.clip, last.energy.laplacian,
            start.elapsed()
        );
    }
}
