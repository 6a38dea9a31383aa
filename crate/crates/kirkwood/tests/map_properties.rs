use std::f64::consts::{PI, TAU};
use std::sync::OnceLock;

use kirkwood::kepler::{cartesian_to_delaunay, delaunay_to_cartesian, DelaunayState};
use kirkwood::return_map::{FixedPointKind, ResonanceContext, ResonanceFunctions, Section};
use proptest::prelude::*;

fn one_three() -> &'static ResonanceFunctions {
    static F: OnceLock<ResonanceFunctions> = OnceLock::new();
    F.get_or_init(|| ResonanceFunctions::new(&ResonanceContext::new(1, 3, 0.1, Section::Zero).unwrap()).unwrap())
}

fn det(j: [[f64; 2]; 2]) -> f64 {
    j[0][0] * j[1][1] - j[0][1] * j[1][0]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    // Without the cancellation in the O(μ) part, (det - 1)/μ would be of
    // the size of χ', ψ and c1 φ' (tens here); what is left is O(μ^{1/2}).
    #[test]
    fn truncated_map_preserves_area_to_order_mu(l in 0.0f64..TAU, lambda in -0.05f64..0.05) {
        let f = one_three();
        let mu = 1e-8;
        let linear = (det(f.jacobian(mu, l, lambda)) - 1.0) / mu;
        let scale = f.chi_prime(l).abs() + f.psi(l).abs() + (f.c1() * f.phi_prime(l)).abs();
        prop_assert!(linear.abs() <= 1e-2 * scale, "{linear:e} vs {scale:e}");
    }

    #[test]
    fn truncated_map_is_reversible(l in 0.0f64..TAU, lambda in -0.05f64..0.05) {
        // R(l, λ) = (-l, λ) conjugates the map to its inverse up to O(μ^{3/2}).
        let f = one_three();
        let mu = 1e-6;
        let (l1, lambda1) = f.apply_scaled_map(mu, l, lambda);
        let (l2, lambda2) = f.apply_scaled_map(mu, -l1, lambda1);
        let dl = (l2 + l + PI).rem_euclid(TAU) - PI;
        prop_assert!(dl.abs() < 1e-6 && (lambda2 - lambda).abs() < 1e-6, "{dl:e} {:e}", lambda2 - lambda);
    }

    #[test]
    fn delaunay_round_trip(big_l in 0.6f64..1.4, e in 0.01f64..0.6, l in -PI..PI, g in -PI..PI, mu in 0.0f64..1e-2) {
        let s = DelaunayState::new(big_l, l, big_l * (1.0 - e * e).sqrt(), g).unwrap();
        let back = cartesian_to_delaunay(&delaunay_to_cartesian(&s, mu).unwrap(), mu).unwrap();
        let wrap = |x: f64| (x + PI).rem_euclid(TAU) - PI;
        prop_assert!((back.action - s.action).abs() < 1e-12);
        prop_assert!((back.ang_momentum - s.ang_momentum).abs() < 1e-12);
        prop_assert!(wrap(back.mean_anomaly - s.mean_anomaly).abs() < 1e-9);
        prop_assert!(wrap(back.perihelion - s.perihelion).abs() < 1e-9);
    }
}

#[test]
fn fixed_points_alternate_in_type() {
    let fps = one_three().fixed_points(1e-5).unwrap();
    assert_eq!(fps.len(), 2);
    assert_ne!(fps[0].kind, fps[1].kind);
    let hyperbolic = fps.iter().find(|f| f.kind == FixedPointKind::Hyperbolic).unwrap();
    let d = (hyperbolic.l + PI).rem_euclid(TAU) - PI;
    assert!(d.abs() < 1e-3, "{}", hyperbolic.l);
}
