mod common;

use std::f64::consts::PI;

use proptest::prelude::*;
use rand::Rng;

use centroid_sections::planar::{
    bisected_chords, centroid_moments, chord_function, ellipse, equilateral_triangle, planar_centroid, read_body_csv,
    recenter, ChordCount, PlanarBody, SymmetricAll,
};

use common::{brute_sign_changes, rng, SEED};

fn finite(c: ChordCount) -> usize {
    match c {
        ChordCount::Finite(k) => k,
        ChordCount::All(_) => panic!("unexpected symmetric body"),
    }
}

/// Angular distance modulo `pi`.
fn line_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(PI);
    d.min(PI - d)
}

fn smooth_body(k: usize) -> PlanarBody {
    let samples: Vec<(f64, f64)> = (0..k)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / k as f64;
            (t, 1.0 + 0.2 * t.cos() + 0.05 * (2.0 * t).sin())
        })
        .collect();
    PlanarBody::from_radial([0.0, 0.0], &samples).unwrap()
}

#[test]
fn half_disk_centroid() {
    let k = 10_000;
    let pts: Vec<[f64; 2]> = (0..=k).map(|i| PI * i as f64 / k as f64).map(|t| [t.cos(), t.sin()]).collect();
    let body = PlanarBody::from_polygon(pts).unwrap();
    let c = planar_centroid(&body).unwrap();
    assert!(c[0].abs() < 1e-9);
    assert!((c[1] - 4.0 / (3.0 * PI)).abs() < 1e-6, "{c:?}");
}

#[test]
fn recentering_a_shifted_disk() {
    let disk = ellipse(1.0, 1.0, 4096).unwrap().translated([0.2, 0.0]);
    let o = [0.0, 0.0];
    assert!((disk.radial(o, 0.0).unwrap() - disk.radial(o, PI).unwrap() - 0.4).abs() < 1e-6);
    let centred = recenter(&disk).unwrap();
    assert!((centred.radial(o, 0.0).unwrap() - centred.radial(o, PI).unwrap()).abs() < 1e-12);
    assert!(bisected_chords(&disk).is_err());
}

#[test]
fn triangle_has_three_side_directions() {
    let r = bisected_chords(&equilateral_triangle()).unwrap();
    assert_eq!(r.count, ChordCount::Finite(3));
    for (d, side) in r.directions.iter().zip([0.0, PI / 3.0, 2.0 * PI / 3.0]) {
        assert!(line_gap(*d, side) < 1e-8, "{d} vs {side}");
    }
}

#[test]
fn ellipse_is_symmetric_all() {
    let r = bisected_chords(&ellipse(2.0, 1.0, 1024).unwrap()).unwrap();
    assert_eq!(r.count, ChordCount::All(SymmetricAll::SymmetricAll));
    assert_eq!(serde_json::to_string(&r.count).unwrap(), "\"symmetric_all\"");
}

#[test]
fn random_hulls_have_odd_counts() {
    let mut g = rng(SEED);
    for trial in 0..100 {
        let pts: Vec<[f64; 2]> = (0..20).map(|_| [g.gen_range(-1.0..1.0), g.gen_range(-1.0..1.0)]).collect();
        let body = recenter(&PlanarBody::hull(&pts).unwrap()).unwrap();
        let r = bisected_chords(&body).unwrap();
        let k = finite(r.count);
        assert!(k >= 3 && k % 2 == 1, "trial {trial}: {k}");
        assert!(r.resolution_warning.is_none());
    }
}

#[test]
fn affine_triangles_keep_side_directions() {
    let mut g = rng(SEED + 7);
    for _ in 0..25 {
        let v: Vec<[f64; 2]> = (0..3).map(|_| [g.gen_range(-2.0..2.0), g.gen_range(-2.0..2.0)]).collect();
        let Ok(body) = PlanarBody::hull(&v) else { continue };
        if body.area() < 0.2 {
            continue;
        }
        let body = recenter(&body).unwrap();
        let r = bisected_chords(&body).unwrap();
        assert_eq!(r.count, ChordCount::Finite(3));
        let p = body.vertices();
        for i in 0..3 {
            let (a, b) = (p[i], p[(i + 1) % 3]);
            let side = (b[1] - a[1]).atan2(b[0] - a[0]);
            let best = r.directions.iter().map(|d| line_gap(*d, side)).fold(f64::INFINITY, f64::min);
            assert!(best < 1e-8, "side {side}: {:?}", r.directions);
        }
    }
}

#[test]
fn smooth_body_matches_brute_scan() {
    let body = recenter(&smooth_body(4000)).unwrap();
    let r = bisected_chords(&body).unwrap();
    let k = finite(r.count);
    let brute = brute_sign_changes(|t| chord_function(&body, t).unwrap(), 0.0123, 0.0123 + PI, 200_000);
    assert_eq!(k, brute);
    assert!(k >= 3 && k % 2 == 1);
}

#[test]
fn csv_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let xy = dir.path().join("tri.csv");
    std::fs::write(&xy, "x,y\n0,0\n3,0\n0,3\n").unwrap();
    let body = recenter(&read_body_csv(&xy, [0.0, 0.0]).unwrap()).unwrap();
    assert_eq!(bisected_chords(&body).unwrap().count, ChordCount::Finite(3));

    let polar = dir.path().join("smooth.csv");
    let mut s = String::from("theta,rho\n");
    for i in 0..720 {
        let t = 2.0 * PI * i as f64 / 720.0;
        s.push_str(&format!("{t},{}\n", 1.0 + 0.2 * t.cos() + 0.05 * (2.0 * t).sin()));
    }
    std::fs::write(&polar, s).unwrap();
    assert!(read_body_csv(&polar, [0.0, 0.0]).is_ok());

    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "a,b\n1,2\n").unwrap();
    assert!(read_body_csv(&bad, [0.0, 0.0]).is_err());
}

#[test]
fn non_convex_polygon_rejected() {
    let dart = vec![[0.0, 0.0], [2.0, 1.0], [0.0, 2.0], [0.5, 1.0]];
    assert!(PlanarBody::from_polygon(dart).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn chord_function_is_antiperiodic(seed in 0u64..1000, t in 0.0f64..PI) {
        let mut g = rng(seed);
        let pts: Vec<[f64; 2]> = (0..12).map(|_| [g.gen_range(-1.0..1.0), g.gen_range(-1.0..1.0)]).collect();
        let body = recenter(&PlanarBody::hull(&pts).unwrap()).unwrap();
        let a = chord_function(&body, t).unwrap();
        let b = chord_function(&body, t + PI).unwrap();
        prop_assert!((a + b).abs() < 1e-12);
    }

    #[test]
    fn centred_hulls_have_vanishing_moments(seed in 0u64..1000) {
        let mut g = rng(seed);
        let pts: Vec<[f64; 2]> = (0..15).map(|_| [g.gen_range(-1.0..1.0), g.gen_range(-1.0..1.0)]).collect();
        let body = recenter(&PlanarBody::hull(&pts).unwrap()).unwrap();
        let m = centroid_moments(&body).unwrap();
        let fmax = (0..400).map(|i| chord_function(&body, PI * i as f64 / 400.0).unwrap().abs()).fold(0.0, f64::max);
        prop_assert!(m[0].abs().max(m[1].abs()) <= 1e-8 * fmax * PI, "{m:?}");
    }
}
