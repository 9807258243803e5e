mod common;

use std::f64::consts::PI;

use centroid_sections::config::RunConfig;
use centroid_sections::counterexample::{
    self, body_for, construct, make_body_k, make_g, make_h, make_phi_lambda, negativity_threshold,
    section_identity_check, verify_certificate, PhiOptions,
};
use centroid_sections::fourier::{euclidean_constant, ft_homogeneous, HomogeneousFunction};
use centroid_sections::revolution::{curvature, make_body_m, rho_m_transform, BodyIntegrator};

use common::rel;

#[test]
fn threshold_is_the_sign_change_of_the_transform() {
    for (n, a) in [(5, 0.4), (5, 0.3), (6, 0.5), (7, 0.5)] {
        let u_star = negativity_threshold(n, a).unwrap();
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if rho_m_transform(n, a, mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((lo - u_star).abs() < 1e-12, "n={n} a={a}: {lo} vs {u_star}");
        assert!(rel(rho_m_transform(n, a, 1.0), -euclidean_constant(n)) < 1e-14);
    }
}

#[test]
fn h_transform_closed_form_against_spectrum() {
    for n in [5, 6] {
        let h = make_h(n).unwrap();
        let bare = HomogeneousFunction::new(h.profile.clone(), 1.0).unwrap();
        let numeric = ft_homogeneous(&bare, 120).unwrap().profile;
        let exact = h.attached_transform().unwrap();
        let cn = euclidean_constant(n);
        for i in 0..=200 {
            let u = -1.0 + i as f64 / 100.0;
            assert!((numeric.eval(u) - exact.eval(u)).abs() <= 1e-8 * cn, "n={n} u={u}");
            assert!(exact.eval(u) >= 0.0);
        }
        assert_eq!(exact.eval(0.0), 0.0);
        assert!(rel(exact.eval(1.0), cn * (1.0 - 2f64.powi(1 - n as i32))) < 1e-14);
    }
    assert!(rel(make_h(5).unwrap().attached_transform().unwrap().eval(-1.0), 15.0 * PI * PI) < 1e-14);
}

#[test]
fn bump_lives_on_the_negativity_caps() {
    let (n, a) = (5, 0.4);
    let u_star = negativity_threshold(n, a).unwrap();
    let u0 = u_star + 0.5 * (1.0 - u_star);
    let g = make_g(n, a, u0).unwrap();
    for i in 0..=1000 {
        let u = -1.0 + i as f64 / 500.0;
        let v = g.eval(u);
        if u.abs() <= u0 || u.abs() == 1.0 {
            assert_eq!(v, 0.0, "u={u}");
        } else {
            assert!(v > 0.0 && rho_m_transform(n, a, u) < 0.0, "u={u}");
        }
        assert_eq!(v, g.eval(-u));
    }
    assert!(make_g(n, a, 0.5 * u_star).is_err());
}

#[test]
fn identity_for_the_pure_h_body() {
    // lambda = 1 needs no bump fit and has a closed-form phi
    let n = 5;
    let m = make_body_m(n, 0.4).unwrap();
    let h = make_h(n).unwrap();
    let phi = make_phi_lambda(h.attached_transform().unwrap(), &PhiOptions::default()).unwrap();
    assert!(phi.branch_mismatch < 1e-9);
    let eps = 1e-3;
    let k = make_body_k(&m, &phi.profile, eps, 1.0).unwrap();
    let integ = BodyIntegrator::for_body(&k, 256).unwrap();
    let grid: Vec<f64> = (0..=40).map(|i| -1.0 + i as f64 / 20.0).collect();
    let r = section_identity_check(&k, &h.profile, eps, &integ, &grid).unwrap();
    assert!(r.max_rel_err < 1e-9, "{}", r.max_rel_err);
    for row in r.rows.iter().filter(|row| row.u_xi.abs() < 1.0) {
        assert!(row.centroid_quadrature > 0.0);
        assert!(row.u_xi == 0.0 || (row.centroid_quadrature - r.rows[40 - (row.u_xi * 20.0 + 20.0).round() as usize].centroid_quadrature).abs() < 1e-15);
    }
    assert!(integ.centroid_axis(&k).unwrap() > 0.0);
}

#[test]
fn eps_too_large_is_rejected() {
    let m = make_body_m(5, 0.4).unwrap();
    let phi = make_phi_lambda(make_h(5).unwrap().attached_transform().unwrap(), &PhiOptions::default()).unwrap();
    assert!(make_body_k(&m, &phi.profile, 1e3, 1.0).is_err());
}

#[test]
fn dimension_four_is_refused() {
    let cfg = RunConfig { n: 4, ..RunConfig::default() };
    let e = construct(&cfg).unwrap_err().to_string();
    assert!(e.contains("n = 4") || e.contains("n=4") || e.contains("4"), "{e}");
    assert!(e.contains("intersection"), "{e}");
}

#[test]
fn reduced_construction_n5() {
    let cfg = RunConfig { alpha_grid: 41, ..RunConfig::default() };
    let c = construct(&cfg).unwrap();
    let cert = &c.certificate;
    assert!(cert.valid, "{:?}", cert.failures);
    assert!(cert.lambda0 > 0.0 && cert.lambda0 < 1.0);
    assert!(cert.f_at_root.abs() <= 1e-12);
    assert!(cert.bracket.at_zero < 0.0 && cert.bracket.at_one > 0.0);
    assert_eq!(cert.bracket.eps, cert.eps0);
    assert!(cert.kappa_min_k > 0.0 && cert.kappa_min_m > 0.0);
    assert!(cert.identity_max_relerr <= 1e-6);
    assert!(cert.min_section_margin > 0.0);
    assert!(cert.pole_section_centroid.iter().all(|p| p.abs() <= 1e-12));
    assert!(cert.parseval_residual <= 1e-8);
    assert!(cert.equator_ratios.iter().all(|r| r[1] <= 1e-8));
    assert_eq!(c.sections.rows.len(), 41);

    // the section centroid has one sign off the poles
    for row in &c.sections.rows[1..40] {
        assert!(row.centroid_quadrature > 0.0, "u = {}", row.u_xi);
    }

    // curvature of K(lambda0, eps) approaches that of M linearly in eps
    let opts = PhiOptions::default();
    let km = curvature(&c.parts.m).kappa_min;
    let dev: Vec<f64> = [1e-7, 1e-8, 1e-9]
        .iter()
        .map(|&eps| (curvature(&body_for(&c.parts, cert.lambda0, eps, &opts).unwrap().0).kappa_min - km).abs())
        .collect();
    assert!(dev[1] <= 0.2 * dev[0] && dev[2] <= 0.2 * dev[1] + 1e-9, "{dev:?}");

    // recomputation at the recorded grids reproduces the recorded values
    let report = verify_certificate(cert, &cfg).unwrap();
    assert!(report.pass, "{report:?}");

    let json = serde_json::to_string(cert).unwrap();
    let back: counterexample::CounterexampleCertificate = serde_json::from_str(&json).unwrap();
    assert_eq!(&back, cert);
}
