use passive_center::bilinear::{cayley_c2d, cayley_d2c};
use passive_center::center::{compute_analytic_center, stationarity_systems};
use passive_center::io::{parse_model_document, write_model_string, ModelDocument};
use passive_center::lmi::{barrier, lmi_matrix};
use passive_center::model::random_passive_model;
use passive_center::radius::{probe_perturbations, x_passivity_bound};
use passive_center::riccati::solve_extremal;
use passive_center::TimeDomain;

#[test]
fn file_to_center_to_radius() {
    for domain in [TimeDomain::Continuous, TimeDomain::Discrete] {
        let model = random_passive_model(5, 2, 11, domain).unwrap();
        let mut doc = ModelDocument::new(model);
        let text = write_model_string(&doc);
        let parsed = parse_model_document(&text).unwrap();
        assert_eq!(parsed.model.a(), doc.model.a());
        assert_eq!(parsed.model.d(), doc.model.d());

        let res = compute_analytic_center(&parsed.model).unwrap();
        assert!(res.converged);
        let s = stationarity_systems(&parsed.model, &res.x_center).unwrap();
        let scale = 1.0 + res.x_center.matrix().norm();
        assert!(s.f.max(s.x).max(s.p) <= 1e-8 * scale, "{s:?}");

        // The center lies strictly between the extremal Riccati solutions.
        let pair = solve_extremal(&parsed.model).unwrap();
        assert!(res.x_center.sub(&pair.x_min).min_eigenvalue() > 0.0);
        assert!(pair.x_max.sub(&res.x_center).min_eigenvalue() > 0.0);

        let bound = x_passivity_bound(&parsed.model, &res.x_center).unwrap();
        assert!(bound.value > 0.0);
        let report = probe_perturbations(&parsed.model, &bound, 50, 0.9, 1).unwrap();
        assert_eq!(report.passed, report.samples);

        // X survives a write/read cycle bit for bit.
        doc.x = Some(res.x_center.clone());
        let again = parse_model_document(&write_model_string(&doc)).unwrap();
        assert_eq!(again.x.unwrap().matrix(), res.x_center.matrix());
    }
}

#[test]
fn transformed_barrier_differs_by_constant() {
    let model = random_passive_model(4, 2, 5, TimeDomain::Continuous).unwrap();
    let res = compute_analytic_center(&model).unwrap();
    let t = cayley_c2d(&model, None).unwrap();
    let back = cayley_d2c(&t.model, Some(&t.weight)).unwrap();
    assert!((back.model.a() - model.a()).norm() < 1e-10);

    let x = &res.x_center;
    let bc = barrier(&model, x, None).unwrap();
    let bd = barrier(&t.model, x, Some(&t.weight)).unwrap();
    assert!((bd - (bc - t.det_ratio.ln())).abs() < 1e-9 * bc.abs().max(1.0));
    assert!(lmi_matrix(&t.model, x, Some(&t.weight)).unwrap().min_eigenvalue() > 0.0);
}
