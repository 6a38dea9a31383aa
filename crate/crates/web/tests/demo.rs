use std::f64::consts::{PI, TAU};

use kirkwood_web::{onset_eccentricity, Resonance};

#[test]
fn phi_curve_is_odd_and_closes() {
    let r = Resonance::build(1, 3, 0.1, false).unwrap();
    let v = r.phi_values(64);
    assert_eq!(v.len(), 65);
    assert!((v[0] - v[64]).abs() < 1e-10);
    for k in 1..32 {
        assert!((v[k] + v[64 - k]).abs() < 1e-9, "k = {k}");
    }
    assert!(v[32].abs() < 1e-9);
}

#[test]
fn orbits_inside_the_resonance_stay_bounded() {
    let r = Resonance::build(1, 3, 0.1, false).unwrap();
    let width = r.libration_width();
    assert!(width.is_finite() && width > 0.0);
    let fps = r.fixed_point_triples(1e-5).unwrap();
    assert_eq!(fps.len(), 6);
    let elliptic = fps.chunks(3).find(|t| t[2] == 0.0).unwrap();
    let pts = r.orbit_points(1e-5, elliptic[0] + 0.3, elliptic[1], 5000, 10.0 * width).unwrap();
    assert_eq!(pts.len(), 10_000);
    let max_lambda = pts.chunks(2).map(|p| p[1].abs()).fold(0.0, f64::max);
    assert!(max_lambda < width, "{max_lambda} vs {width}");
    assert!(pts.chunks(2).all(|p| (0.0..TAU).contains(&p[0])));
}

#[test]
fn fixed_points_sit_near_the_symmetry_lines() {
    let r = Resonance::build(2, 5, 0.15, true).unwrap();
    let fps = r.fixed_point_triples(1e-5).unwrap();
    assert_eq!(fps.len(), 12);
    for (j, t) in fps.chunks(3).enumerate() {
        let line = j as f64 * PI / 2.0;
        let d = (t[0] - line + PI).rem_euclid(TAU) - PI;
        // the O(μ) terms of the truncated map shift them slightly
        assert!(d.abs() < 1e-3, "j = {j}: {}", t[0]);
    }
    let hyperbolic = fps.chunks(3).filter(|t| t[2] == 1.0).count();
    assert_eq!(hyperbolic, 2);
}

#[test]
fn bad_inputs_are_errors() {
    assert!(Resonance::build(2, 2, 0.1, false).is_err());
    let r = Resonance::build(1, 2, 0.1, false).unwrap();
    assert!(r.orbit_points(0.7, 0.0, 0.0, 10, 1.0).is_err());
    assert!(onset_eccentricity(1).is_err());
}

#[test]
fn onset_matches_cli_reference() {
    let e = onset_eccentricity(3).unwrap();
    assert!((e - 0.121094).abs() < 1e-5, "{e}");
}
