//! The disturbing function in Delaunay variables and its analytic partial
//! derivatives.
//!
//! `Ω = 1/Δ - r cos θ - 1/L²`, where `Δ` is the distance to the planet. The
//! `-1/L²` shift makes the Hamiltonian `-1/(2L²) - G - μΩ + O(μ²)`.
//!
//! Every function takes a `geometry_mu`: the semi-major axis is
//! `a = L²/(1 - geometry_mu)`. The first-order theory is usually stated with
//! `geometry_mu = 0`; the exact Hamiltonian uses the true mass ratio.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kepler::{DelaunayState, Ellipse};

/// Distances to the planet below this are reported as collisions.
pub const COLLISION_CUTOFF: f64 = 1e-8;

/// Partial derivatives of `Ω` needed by the return map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmegaPartials {
    pub value: f64,
    /// ∂Ω/∂l
    pub d_l: f64,
    /// ∂Ω/∂L
    pub d_action: f64,
    /// ∂Ω/∂G
    pub d_ang: f64,
    /// ∂Ω/∂g
    pub d_g: f64,
    pub d_ll: f64,
    pub d_l_action: f64,
    pub d_l_ang: f64,
}

fn inverse_distance(x: f64, y: f64) -> Result<(f64, f64)> {
    let dist = (x - 1.0).hypot(y);
    if dist < COLLISION_CUTOFF {
        return Err(Error::Collision { distance: dist });
    }
    Ok((dist, 1.0 / dist))
}

/// `Ω(L, l, G, g)`.
pub fn omega(s: &DelaunayState, geometry_mu: f64) -> Result<f64> {
    omega_raw(s.action, s.mean_anomaly, s.ang_momentum, s.perihelion, geometry_mu)
}

pub(crate) fn omega_raw(action: f64, l: f64, ang: f64, g: f64, geometry_mu: f64) -> Result<f64> {
    let el = Ellipse::new(action, l, ang, g, geometry_mu)?;
    let (_, inv) = inverse_distance(el.x, el.y)?;
    Ok(inv - el.x - 1.0 / (action * action))
}

/// The Delaunay form of the exact Hamiltonian,
/// `-(1-μ)²/(2L²) - G - μ(1/Δ - r cos θ)` with the true geometry.
pub fn hamiltonian_delaunay(s: &DelaunayState, mu: f64) -> Result<f64> {
    let big_l = s.action;
    let om = omega(s, mu)? + 1.0 / (big_l * big_l);
    Ok(-(1.0 - mu).powi(2) / (2.0 * big_l * big_l) - s.ang_momentum - mu * om)
}

/// Analytic first and second partials of `Ω`.
pub fn omega_partials(s: &DelaunayState, geometry_mu: f64) -> Result<OmegaPartials> {
    omega_partials_raw(s.action, s.mean_anomaly, s.ang_momentum, s.perihelion, geometry_mu)
}

pub(crate) fn omega_partials_raw(
    action: f64,
    l: f64,
    ang: f64,
    g: f64,
    geometry_mu: f64,
) -> Result<OmegaPartials> {
    let el = Ellipse::new(action, l, ang, g, geometry_mu)?;
    if el.e < 1e-10 {
        return Err(Error::Domain(
            "action derivatives are singular on circular orbits".into(),
        ));
    }
    let Ellipse { a, e, eta, sin_ea: s, cos_ea: c, d, sin_g, cos_g, x, y } = el;

    let a_l = 2.0 * action / (1.0 - geometry_mu);
    let eta_l = -eta / action;
    let eta_g = 1.0 / action;
    let e_l = eta * eta / (e * action);
    let e_g = -eta / (e * action);

    // Derivatives of the eccentric anomaly at fixed l.
    let ea_e = s / d;
    // ∂/∂e of s/D and c/D at fixed l.
    let sd_e = 2.0 * c * s / (d * d) - e * s * s * s / (d * d * d);
    let cd_e = c * c / (d * d) - s * s / (d * d * d);

    let xi_l = -a * s / d;
    let zeta_l = a * eta * c / d;
    let xi_ll = -a * (c / (d * d) - e * s * s / (d * d * d));
    let zeta_ll = a * eta * (-s / (d * d) - e * c * s / (d * d * d));

    let xi_de = a * (-s * ea_e - 1.0);
    let xi_big_l = a_l * (c - e) + xi_de * e_l;
    let xi_big_g = xi_de * e_g;
    let zeta_de = a * eta * c * ea_e;
    let zeta_big_l = a_l * eta * s + a * eta_l * s + zeta_de * e_l;
    let zeta_big_g = a * eta_g * s + zeta_de * e_g;

    let xi_l_big_l = -a_l * s / d - a * sd_e * e_l;
    let xi_l_big_g = -a * sd_e * e_g;
    let zeta_l_big_l = a_l * eta * c / d + a * eta_l * c / d + a * eta * cd_e * e_l;
    let zeta_l_big_g = a * eta_g * c / d + a * eta * cd_e * e_g;

    let rot = |p: f64, q: f64| (p * cos_g - q * sin_g, p * sin_g + q * cos_g);
    let (x_l, y_l) = rot(xi_l, zeta_l);
    let (x_ll, y_ll) = rot(xi_ll, zeta_ll);
    let (x_big_l, y_big_l) = rot(xi_big_l, zeta_big_l);
    let (x_big_g, y_big_g) = rot(xi_big_g, zeta_big_g);
    let (x_l_big_l, y_l_big_l) = rot(xi_l_big_l, zeta_l_big_l);
    let (x_l_big_g, y_l_big_g) = rot(xi_l_big_g, zeta_l_big_g);

    let (_, inv) = inverse_distance(x, y)?;
    let inv3 = inv * inv * inv;
    let inv5 = inv3 * inv * inv;
    let dx = x - 1.0;
    let f_x = -dx * inv3 - 1.0;
    let f_y = -y * inv3;
    let f_xx = -inv3 + 3.0 * dx * dx * inv5;
    let f_xy = 3.0 * dx * y * inv5;
    let f_yy = -inv3 + 3.0 * y * y * inv5;

    let hess = |xa: f64, ya: f64, xb: f64, yb: f64| {
        f_xx * xa * xb + f_xy * (xa * yb + xb * ya) + f_yy * ya * yb
    };

    Ok(OmegaPartials {
        value: inv - x - 1.0 / (action * action),
        d_l: f_x * x_l + f_y * y_l,
        d_action: f_x * x_big_l + f_y * y_big_l + 2.0 / (action * action * action),
        d_ang: f_x * x_big_g + f_y * y_big_g,
        d_g: -f_x * y + f_y * x,
        d_ll: hess(x_l, y_l, x_l, y_l) + f_x * x_ll + f_y * y_ll,
        d_l_action: hess(x_l, y_l, x_big_l, y_big_l) + f_x * x_l_big_l + f_y * y_l_big_l,
        d_l_ang: hess(x_l, y_l, x_big_g, y_big_g) + f_x * x_l_big_g + f_y * y_l_big_g,
    })
}

/// Finite-difference partials built only from [`omega`]. Slow; kept as the
/// reference the analytic derivatives are tested against. The action step
/// must stay well below `L - G`, where the chart has a branch point.
pub fn omega_partials_fd(
    s: &DelaunayState,
    geometry_mu: f64,
    action_step: f64,
    angle_step: f64,
) -> Result<OmegaPartials> {
    let (bl, l, bg, g) = (s.action, s.mean_anomaly, s.ang_momentum, s.perihelion);
    let f = |bl: f64, l: f64, bg: f64, g: f64| omega_raw(bl, l, bg, g, geometry_mu);
    // Fourth-order central stencil.
    fn diff(h: f64, mut f: impl FnMut(f64) -> Result<f64>) -> Result<f64> {
        Ok((f(-2.0 * h)? - 8.0 * f(-h)? + 8.0 * f(h)? - f(2.0 * h)?) / (12.0 * h))
    }
    let (ha, hl) = (action_step, angle_step);
    let d_l_at = |bl: f64, bg: f64| diff(hl, |h| f(bl, l + h, bg, g));
    Ok(OmegaPartials {
        value: f(bl, l, bg, g)?,
        d_l: d_l_at(bl, bg)?,
        d_action: diff(ha, |h| f(bl + h, l, bg, g))?,
        d_ang: diff(ha, |h| f(bl, l, bg + h, g))?,
        d_g: diff(hl, |h| f(bl, l, bg, g + h))?,
        d_ll: diff(hl, |h| diff(hl, |k| f(bl, l + h + k, bg, g)))?,
        d_l_action: diff(ha, |h| d_l_at(bl + h, bg))?,
        d_l_ang: diff(ha, |h| d_l_at(bl, bg + h))?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kepler::{delaunay_to_cartesian, hamiltonian_cartesian};
    use proptest::prelude::*;
    use std::f64::consts::TAU;

    fn close(a: f64, b: f64, scale: f64) -> bool {
        (a - b).abs() <= 1e-6 * scale.max(1.0)
    }

    fn check_against_fd(s: &DelaunayState, mu: f64) {
        let an = omega_partials(s, mu).unwrap();
        // The chart has a branch point at G = L; keep the stencil well inside.
        let step = (0.005 * (s.action - s.ang_momentum)).min(2e-4);
        let fd = omega_partials_fd(s, mu, step, 1e-3).unwrap();
        let pairs = [
            ("value", an.value, fd.value),
            ("l", an.d_l, fd.d_l),
            ("L", an.d_action, fd.d_action),
            ("G", an.d_ang, fd.d_ang),
            ("g", an.d_g, fd.d_g),
            ("ll", an.d_ll, fd.d_ll),
            ("lL", an.d_l_action, fd.d_l_action),
            ("lG", an.d_l_ang, fd.d_l_ang),
        ];
        for (name, x, y) in pairs {
            assert!(close(x, y, x.abs()), "{name}: analytic {x} vs fd {y} at {s:?}");
        }
    }

    #[test]
    fn partials_match_fd_interior() {
        let lstar = 3f64.powf(-1.0 / 3.0);
        for e in [0.1f64, 0.2, 0.3] {
            for k in 0..7 {
                let s = DelaunayState::new(lstar, 0.3 + k as f64, lstar * (1.0 - e * e).sqrt(), 1.1 * k as f64)
                    .unwrap();
                check_against_fd(&s, 0.0);
                check_against_fd(&s, 1e-3);
            }
        }
    }

    #[test]
    fn partials_match_fd_exterior() {
        let lstar = 7f64.powf(1.0 / 3.0);
        let e = 0.3f64;
        for k in 0..7 {
            let s = DelaunayState::new(lstar, 0.5 * k as f64, lstar * (1.0 - e * e).sqrt(), 0.9 * k as f64).unwrap();
            check_against_fd(&s, 0.0);
        }
    }

    // Reference from a 40-digit evaluation of the mixed derivative.
    #[test]
    fn mixed_partial_reference() {
        let s = DelaunayState::new(0.7937005259840998, 4.929442133140517, 0.7637375981040204, 1.449729929719828)
            .unwrap();
        let d = omega_partials(&s, 0.0).unwrap();
        assert!((d.d_l_action - 1.785_548_431_252_882).abs() < 1e-12);
    }

    #[test]
    fn collision_is_reported() {
        // Circular orbit of radius one passing through the planet.
        let s = DelaunayState { action: 1.0, mean_anomaly: 0.0, ang_momentum: 1.0, perihelion: 0.0 };
        assert!(matches!(omega(&s, 0.0), Err(Error::Collision { .. })));
    }

    #[test]
    fn hamiltonian_forms_agree() {
        let mu = 1e-3;
        let s = DelaunayState::new(0.72, 1.3, 0.7, 2.2).unwrap();
        let c = delaunay_to_cartesian(&s, mu).unwrap();
        let h1 = hamiltonian_cartesian(&c, mu);
        let h2 = hamiltonian_delaunay(&s, mu).unwrap();
        assert!((h1 - h2).abs() < 1e-14, "{h1} {h2}");
    }

    proptest! {
        #[test]
        fn partials_match_fd_random(e in 0.1f64..0.4, l in 0.0f64..TAU, g in 0.0f64..TAU) {
            let lstar = 0.5f64.powf(1.0 / 3.0);
            let s = DelaunayState::new(lstar, l, lstar * (1.0 - e * e).sqrt(), g).unwrap();
            check_against_fd(&s, 0.0);
        }

        #[test]
        fn hamiltonian_forms_agree_random(big_l in 0.6f64..1.5, e in 0.0f64..0.3, l in 0.0f64..TAU, g in 0.0f64..TAU, mu in 0.0f64..1e-2) {
            let s = DelaunayState::new(big_l, l, big_l * (1.0 - e * e).sqrt(), g).unwrap();
            if let Ok(h2) = hamiltonian_delaunay(&s, mu) {
                let h1 = hamiltonian_cartesian(&delaunay_to_cartesian(&s, mu).unwrap(), mu);
                prop_assert!((h1 - h2).abs() < 1e-12 * h1.abs().max(1.0) / (1.0 - big_l * big_l).abs().min(1.0).max(1e-3));
            }
        }
    }
}
