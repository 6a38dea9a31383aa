//! Kepler's equation and the change of variables between Delaunay elements
//! and rotating-frame Cartesian coordinates.
//!
//! Units: the primaries are separated by 1, the total mass is 1 and the
//! frame rotates with unit angular velocity. The Sun sits at the origin and
//! the planet at `(1, 0)`.

use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};

const KEPLER_MAX_ITER: usize = 60;

/// Solves `E - e sin E = l` for the eccentric anomaly.
///
/// Any real `l` is accepted; the returned `E` lies on the same branch, so
/// `E - e sin E` reproduces `l` itself rather than `l mod 2π`.
pub fn solve_kepler(e: f64, l: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&e) || !l.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "kepler needs 0 <= e < 1 and finite l, got e = {e}, l = {l}"
        )));
    }
    let turns = (l / TAU).round();
    let m = l - turns * TAU;
    Ok(solve_reduced(e, m)? + turns * TAU)
}

// Newton with a bisection safeguard on |m| <= π, where E - e sin E is monotone.
fn solve_reduced(e: f64, m: f64) -> Result<f64> {
    if e == 0.0 {
        return Ok(m);
    }
    let (mut lo, mut hi) = if m >= 0.0 { (m, PI) } else { (-PI, m) };
    let mut ecc = if e < 0.8 { m + e * m.sin() } else { m.signum() * PI * 0.85 + m * 0.15 };
    ecc = ecc.clamp(lo, hi);
    for _ in 0..KEPLER_MAX_ITER {
        let (s, c) = ecc.sin_cos();
        let f = ecc - e * s - m;
        if f == 0.0 {
            return Ok(ecc);
        }
        if f > 0.0 {
            hi = hi.min(ecc);
        } else {
            lo = lo.max(ecc);
        }
        let step = f / (1.0 - e * c);
        let mut next = ecc - step;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - ecc).abs() <= 4.0 * f64::EPSILON * ecc.abs().max(1.0) {
            return Ok(next);
        }
        ecc = next;
    }
    let residual = ecc - e * ecc.sin() - m;
    if residual.abs() < 1e-13 {
        Ok(ecc)
    } else {
        Err(Error::NoConvergence { what: "kepler solver", iterations: KEPLER_MAX_ITER, residual })
    }
}

/// Delaunay variables of the planar problem.
///
/// `action` is the square root of the scaled semi-major axis, `ang_momentum`
/// the angular momentum, and the two angles are the mean anomaly and the
/// argument of perihelion measured in the rotating frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DelaunayState {
    pub action: f64,
    pub mean_anomaly: f64,
    pub ang_momentum: f64,
    pub perihelion: f64,
}

impl DelaunayState {
    /// Builds a state, reducing both angles to `[0, 2π)`.
    pub fn new(action: f64, mean_anomaly: f64, ang_momentum: f64, perihelion: f64) -> Result<Self> {
        if !(action > 0.0) || !(ang_momentum > 0.0) || ang_momentum > action {
            return Err(Error::Domain(format!(
                "need 0 < G <= L, got L = {action}, G = {ang_momentum}"
            )));
        }
        if !mean_anomaly.is_finite() || !perihelion.is_finite() {
            return Err(Error::InvalidParameter("non-finite angle".into()));
        }
        Ok(Self {
            action,
            mean_anomaly: mean_anomaly.rem_euclid(TAU),
            ang_momentum,
            perihelion: perihelion.rem_euclid(TAU),
        })
    }

    pub fn eccentricity(&self) -> f64 {
        let eta = self.ang_momentum / self.action;
        (1.0 - eta * eta).max(0.0).sqrt()
    }
}

/// Rotating-frame position together with the inertial velocity expressed in
/// rotating axes (the canonical momenta).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CartesianState {
    pub x: f64,
    pub y: f64,
    pub px: f64,
    pub py: f64,
}

/// Everything about the osculating ellipse that the disturbing function and
/// its derivatives need. `mu` only enters through `a = L²/(1-μ)`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Ellipse {
    pub a: f64,
    pub e: f64,
    pub eta: f64,
    pub sin_ea: f64,
    pub cos_ea: f64,
    /// `1 - e cos E`, i.e. `r / a`.
    pub d: f64,
    pub sin_g: f64,
    pub cos_g: f64,
    /// Rotating-frame coordinates.
    pub x: f64,
    pub y: f64,
}

impl Ellipse {
    pub fn new(action: f64, mean_anomaly: f64, ang_momentum: f64, perihelion: f64, mu: f64) -> Result<Self> {
        if !(action > 0.0) || !(ang_momentum > 0.0) || ang_momentum > action * (1.0 + 1e-15) {
            return Err(Error::Domain(format!(
                "need 0 < G <= L, got L = {action}, G = {ang_momentum}"
            )));
        }
        let a = action * action / (1.0 - mu);
        let eta = (ang_momentum / action).min(1.0);
        let e = (1.0 - eta * eta).max(0.0).sqrt();
        let ea = solve_kepler(e, mean_anomaly.rem_euclid(TAU))?;
        let (sin_ea, cos_ea) = ea.sin_cos();
        let (sin_g, cos_g) = perihelion.sin_cos();
        let xi = a * (cos_ea - e);
        let zeta = a * eta * sin_ea;
        Ok(Self {
            a,
            e,
            eta,
            sin_ea,
            cos_ea,
            d: 1.0 - e * cos_ea,
            sin_g,
            cos_g,
            x: xi * cos_g - zeta * sin_g,
            y: xi * sin_g + zeta * cos_g,
        })
    }
}

/// Heliocentric polar coordinates `(r, θ)` of the asteroid, `θ` in `[0, 2π)`.
pub fn delaunay_to_polar(s: &DelaunayState, mu: f64) -> Result<(f64, f64)> {
    let el = Ellipse::new(s.action, s.mean_anomaly, s.ang_momentum, s.perihelion, mu)?;
    let r = el.a * el.d;
    Ok((r, el.y.atan2(el.x).rem_euclid(TAU)))
}

pub fn delaunay_to_cartesian(s: &DelaunayState, mu: f64) -> Result<CartesianState> {
    check_mu(mu)?;
    let el = Ellipse::new(s.action, s.mean_anomaly, s.ang_momentum, s.perihelion, mu)?;
    let k = 1.0 - mu;
    let n = (k / (el.a * el.a * el.a)).sqrt();
    let vxi = -el.a * n * el.sin_ea / el.d;
    let vzeta = el.a * n * el.eta * el.cos_ea / el.d;
    Ok(CartesianState {
        x: el.x,
        y: el.y,
        px: vxi * el.cos_g - vzeta * el.sin_g,
        py: vxi * el.sin_g + vzeta * el.cos_g,
    })
}

/// Osculating Delaunay elements of a rotating-frame state, using `GM = 1-μ`
/// for the central body.
pub fn cartesian_to_delaunay(c: &CartesianState, mu: f64) -> Result<DelaunayState> {
    check_mu(mu)?;
    let k = 1.0 - mu;
    let r = c.x.hypot(c.y);
    if !(r > 0.0) {
        return Err(Error::Domain("state at the central body".into()));
    }
    let v2 = c.px * c.px + c.py * c.py;
    let energy = 0.5 * v2 - k / r;
    if !(energy < 0.0) {
        return Err(Error::Domain(format!("osculating orbit is not elliptic (energy {energy:e})")));
    }
    let a = -k / (2.0 * energy);
    let action = (k * a).sqrt();
    let ang_momentum = c.x * c.py - c.y * c.px;
    if !(ang_momentum > 0.0) {
        return Err(Error::Domain("retrograde or radial osculating orbit".into()));
    }
    let rv = c.x * c.px + c.y * c.py;
    let ex = ((v2 - k / r) * c.x - rv * c.px) / k;
    let ey = ((v2 - k / r) * c.y - rv * c.py) / k;
    let e = ex.hypot(ey);
    // Near-circular orbits: anchor the perihelion at the current position.
    let perihelion = if e > 0.0 { ey.atan2(ex) } else { c.y.atan2(c.x) };
    let nu = c.y.atan2(c.x) - perihelion;
    let half = 0.5 * nu;
    let ea = 2.0 * ((1.0 - e).sqrt() * half.sin()).atan2((1.0 + e).sqrt() * half.cos());
    let mean_anomaly = ea - e * ea.sin();
    DelaunayState::new(action, mean_anomaly, ang_momentum.min(action), perihelion)
}

/// The rotating-frame Hamiltonian in Cartesian form.
pub fn hamiltonian_cartesian(c: &CartesianState, mu: f64) -> f64 {
    let r = c.x.hypot(c.y);
    let delta = (c.x - 1.0).hypot(c.y);
    0.5 * (c.px * c.px + c.py * c.py) + c.y * c.px - c.x * c.py - (1.0 - mu) / r
        - mu * (1.0 / delta - c.x)
}

fn check_mu(mu: f64) -> Result<()> {
    if (0.0..0.5).contains(&mu) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("mass ratio must lie in [0, 0.5), got {mu}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn kepler_reference_value() {
        let ea = solve_kepler(0.1, 1.0).unwrap();
        assert!((ea - 1.088_597_752_397_894).abs() < 1e-12, "{ea}");
    }

    #[test]
    fn kepler_keeps_branch() {
        let l = 7.0 * TAU + 0.3;
        let ea = solve_kepler(0.4, l).unwrap();
        assert!((ea - 0.4 * ea.sin() - l).abs() < 1e-12);
    }

    #[test]
    fn kepler_rejects_hyperbolic() {
        assert!(solve_kepler(1.0, 0.5).is_err());
        assert!(solve_kepler(-0.1, 0.5).is_err());
    }

    #[test]
    fn kepler_residual_on_grid() {
        for i in 0..=95 {
            let e = i as f64 * 0.01;
            for j in 0..400 {
                let l = -PI + TAU * j as f64 / 400.0;
                let ea = solve_kepler(e, l).unwrap();
                assert!((ea - e * ea.sin() - l).abs() <= 1e-13, "e = {e}, l = {l}");
            }
        }
    }

    #[test]
    fn circular_orbit_is_at_radius_a() {
        let s = DelaunayState::new(1.2, 0.7, 1.2, 0.4).unwrap();
        let (r, theta) = delaunay_to_polar(&s, 0.0).unwrap();
        assert!((r - 1.44).abs() < 1e-14);
        assert!((theta - 1.1).abs() < 1e-14);
    }

    #[test]
    fn momentum_is_angular_momentum() {
        let s = DelaunayState::new(0.8, 2.1, 0.75, 5.0).unwrap();
        let c = delaunay_to_cartesian(&s, 1e-3).unwrap();
        assert!((c.x * c.py - c.y * c.px - 0.75).abs() < 1e-14);
    }

    #[test]
    fn rejects_g_above_l() {
        assert!(DelaunayState::new(1.0, 0.0, 1.1, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn round_trip(big_l in 0.6f64..1.6, e in 0.01f64..0.6, l in 0.0f64..TAU, g in 0.0f64..TAU, mu in 0.0f64..1e-2) {
            let s = DelaunayState::new(big_l, l, big_l * (1.0 - e * e).sqrt(), g).unwrap();
            let back = cartesian_to_delaunay(&delaunay_to_cartesian(&s, mu).unwrap(), mu).unwrap();
            prop_assert!((back.action - s.action).abs() < 1e-12);
            prop_assert!((back.ang_momentum - s.ang_momentum).abs() < 1e-12);
            let dl = (back.mean_anomaly - s.mean_anomaly + PI).rem_euclid(TAU) - PI;
            let dg = (back.perihelion - s.perihelion + PI).rem_euclid(TAU) - PI;
            prop_assert!(dl.abs() < 1e-10 / e, "dl = {}", dl);
            prop_assert!(dg.abs() < 1e-10 / e, "dg = {}", dg);
        }

        #[test]
        fn kepler_solution_is_exact(e in 0.0f64..0.99, l in -50.0f64..50.0) {
            let ea = solve_kepler(e, l).unwrap();
            prop_assert!((ea - e * ea.sin() - l).abs() <= 1e-12);
        }
    }
}
