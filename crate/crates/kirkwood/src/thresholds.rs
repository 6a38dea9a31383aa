//! Where the first-order picture breaks down: extra zeros of `φ`
//! (nondegeneracy), the pitchfork at `l = π/p` for exterior `p:1`
//! resonances, and the low-eccentricity boundary of the map's validity.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::dynamics::{numeric_fixed_point, SectionMap};
use crate::error::{Error, Result};
use crate::numerics::brent;
use crate::return_map::{ContextOptions, Linearization, ResonanceContext, ResonanceFunctions, Section};

/// Jupiter/Sun mass ratio.
pub const JUPITER_MASS_RATIO: f64 = 1.0 / 1047.35;

const ZERO_GRID: usize = 1024;

/// Outcome of the nondegeneracy check on `[0, 2π/p)`: `φ` should vanish
/// only at `0` and `π/p`, with nonzero slope there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub holds: bool,
    /// Every zero found in `[0, 2π/p)`.
    pub zeros: Vec<f64>,
    /// Zeros other than `0` and `π/p`.
    pub extra_zeros: Vec<f64>,
    pub slope_at_zero: f64,
    pub slope_at_half: f64,
}

/// Scans `φ` on a staggered 1024-point grid and refines each sign change.
pub fn check_assumption_a(funcs: &ResonanceFunctions) -> Result<AssumptionReport> {
    let p = funcs.context.p as f64;
    let width = 2.0 * PI / p;
    let step = width / ZERO_GRID as f64;
    let grid: Vec<f64> = (0..=ZERO_GRID).map(|i| (i as f64 - 0.5) * step).collect();
    let vals: Vec<f64> = grid.iter().map(|&l| funcs.phi(l)).collect();
    let mut zeros = Vec::new();
    for i in 0..ZERO_GRID {
        let (a, b) = (grid[i], grid[i + 1]);
        if vals[i] == 0.0 || vals[i].signum() != vals[i + 1].signum() {
            let z = brent(|l| Ok(funcs.phi(l)), a, b, 1e-10)?;
            let z = z.rem_euclid(width);
            zeros.push(if width - z < 1e-12 { 0.0 } else { z });
        }
    }
    zeros.sort_by(f64::total_cmp);
    let near = |z: f64, target: f64| {
        let d = (z - target).rem_euclid(width);
        d.min(width - d) < 2.0 * step
    };
    let extra_zeros: Vec<f64> = zeros.iter().copied().filter(|&z| !near(z, 0.0) && !near(z, PI / p)).collect();
    let has_zero = zeros.iter().any(|&z| near(z, 0.0));
    let has_half = zeros.iter().any(|&z| near(z, PI / p));
    let slope_at_zero = funcs.phi_prime(0.0);
    let slope_at_half = funcs.phi_prime(PI / p);
    let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let transversal = slope_at_zero.abs() > 1e-9 * scale && slope_at_half.abs() > 1e-9 * scale;
    Ok(AssumptionReport {
        holds: extra_zeros.is_empty() && has_zero && has_half && transversal,
        zeros,
        extra_zeros,
        slope_at_zero,
        slope_at_half,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdOptions {
    pub e_min: f64,
    pub e_max: f64,
    pub scan_step: f64,
    pub xtol: f64,
    pub geometry_mu: f64,
}

impl Default for ThresholdOptions {
    fn default() -> Self {
        Self { e_min: 0.02, e_max: 0.6, scan_step: 1e-3, xtol: 1e-7, geometry_mu: JUPITER_MASS_RATIO }
    }
}

/// Eccentricity at which `φ'(π/p)` changes sign for the exterior `p:1`
/// resonance (section `g = 0`): below it `l = π/p` is elliptic; above it the
/// point has gone through a pitchfork and `φ` gains two zeros beside it.
pub fn asymmetric_threshold(p: u32, q: u32, opts: &ThresholdOptions) -> Result<f64> {
    if p <= q {
        return Err(Error::InvalidParameter(format!("asymmetric threshold needs an exterior resonance, got {p}:{q}")));
    }
    let options = ContextOptions { geometry_mu: opts.geometry_mu, ..ContextOptions::default() };
    let slope = |e: f64| -> Result<f64> {
        let ctx = ResonanceContext::with_options(p, q, e, Section::Zero, options)?;
        ctx.phi_prime(PI / p as f64)
    };
    let mut e_lo = opts.e_min;
    let mut s_lo = slope(e_lo)?;
    let n = ((opts.e_max - opts.e_min) / opts.scan_step).ceil() as usize;
    for i in 1..=n {
        let e_hi = (opts.e_min + i as f64 * opts.scan_step).min(opts.e_max);
        let s_hi = match slope(e_hi) {
            Ok(s) => s,
            // Ran into the collision clearance before finding a change.
            Err(Error::InvalidParameter(_)) => break,
            Err(err) => return Err(err),
        };
        if s_lo > 0.0 && s_hi <= 0.0 {
            return brent(slope, e_lo, e_hi, opts.xtol);
        }
        e_lo = e_hi;
        s_lo = s_hi;
    }
    Err(Error::NotBracketed { a: opts.e_min, fa: slope(opts.e_min)?, b: e_lo, fb: s_lo })
}

/// Which existence test defines the low-eccentricity boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryCriterion {
    /// `φ(l) + μ χ(l) ψ(l) / c1` has a zero in every window
    /// `|l - jπ/p| < π/(2p)`, crossing with the sign of `φ'(jπ/p)`.
    TruncatedSystem,
    /// Fixed points of the numerically integrated `T_p`, continued down in
    /// `e`, stay within their windows and keep their linear type.
    NumericContinuation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryOptions {
    /// The scan starts here and moves down.
    pub e_max: f64,
    pub e_min: f64,
    pub scan_step: f64,
    pub xtol: f64,
    /// Samples of the truncated function per window.
    pub window_samples: usize,
    /// Disagreement between the two criteria that raises the flag.
    pub sensitivity: f64,
}

impl Default for BoundaryOptions {
    fn default() -> Self {
        Self { e_max: 0.3, e_min: 0.005, scan_step: 5e-3, xtol: 1e-4, window_samples: 64, sensitivity: 0.02 }
    }
}

/// Smallest eccentricity at which the resonant periodic points exist,
/// under both criteria.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryThreshold {
    pub p: u32,
    pub q: u32,
    pub mu: f64,
    /// `None` when the points exist down to `e_min`.
    pub truncated: Option<f64>,
    pub continuation: Option<f64>,
    /// Fixed points lost by continuation, one entry per lost `j`.
    pub continuation_ends: Vec<ContinuationEnd>,
    pub criterion_sensitive: bool,
}

impl BoundaryThreshold {
    pub fn value(&self, criterion: BoundaryCriterion) -> Option<f64> {
        match criterion {
            BoundaryCriterion::TruncatedSystem => self.truncated,
            BoundaryCriterion::NumericContinuation => self.continuation,
        }
    }
}

fn boundary_context(p: u32, q: u32, e: f64, mu: f64) -> Result<ResonanceContext> {
    let options = ContextOptions { geometry_mu: mu, ..ContextOptions::default() };
    ResonanceContext::with_options(p, q, e, Section::Zero, options)
}

/// Whether the truncated fixed-point equation has a zero near every `jπ/p`
/// of the orientation `φ` has there.
///
/// Near `jπ/p` the equation is roughly `(φ' + μ(χψ)'/c1)(l - jπ/p) + A`.
/// Since `χ, ψ` grow like `1/e` while `φ'` vanishes like `e^{|p-q|}`, the
/// bracket changes sign at small `e`: the zero runs off through infinity
/// and comes back with the wrong slope, so a bare sign-change count would
/// only see a narrow gap.
pub fn truncated_points_exist(p: u32, q: u32, e: f64, mu: f64, samples: usize) -> Result<bool> {
    let ctx = boundary_context(p, q, e, mu)?;
    let funcs = ResonanceFunctions::new(&ctx)?;
    let c1 = funcs.c1();
    let f = |l: f64| funcs.phi(l) + mu * funcs.chi(l) * funcs.psi(l) / c1;
    let half = PI / p as f64;
    let n = samples.max(2);
    for j in 0..2 * p {
        let centre = j as f64 * half;
        let orientation = funcs.phi_prime(centre).signum();
        let vals: Vec<f64> = (0..=n).map(|i| f(centre - 0.5 * half + half * i as f64 / n as f64)).collect();
        let found = vals.windows(2).any(|w| w[0].signum() != w[1].signum() && (w[1] - w[0]).signum() == orientation);
        if !found {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Scans `e` downward for the first failure of `exists`, then bisects.
fn first_failure(opts: &BoundaryOptions, mut exists: impl FnMut(f64) -> Result<bool>) -> Result<Option<f64>> {
    let n = ((opts.e_max - opts.e_min) / opts.scan_step).round() as usize;
    let mut good = None;
    for i in 0..=n {
        let e = (opts.e_max - i as f64 * opts.scan_step).max(opts.e_min);
        if exists(e)? {
            good = Some(e);
            continue;
        }
        // Points that are missing at the top of the scan (for example,
        // orbits crossing the planet's) are skipped until they appear.
        let Some(mut good) = good else { continue };
        let mut bad = e;
        while good - bad > opts.xtol {
            let mid = 0.5 * (good + bad);
            if exists(mid)? {
                good = mid;
            } else {
                bad = mid;
            }
        }
        return Ok(Some(0.5 * (good + bad)));
    }
    match good {
        Some(_) => Ok(None),
        None => Err(Error::NotBracketed { a: opts.e_min, fa: f64::NAN, b: opts.e_max, fb: f64::NAN }),
    }
}

/// Boundary under the truncated criterion alone.
pub fn truncated_boundary(p: u32, q: u32, mu: f64, opts: &BoundaryOptions) -> Result<Option<f64>> {
    first_failure(opts, |e| match truncated_points_exist(p, q, e, mu, opts.window_samples) {
        // Orbits too close to the planet for the map to be defined count as
        // failures; at the top of the scan they are skipped.
        Err(Error::InvalidParameter(_) | Error::Quadrature { .. } | Error::Collision { .. }) => Ok(false),
        other => other,
    })
}

/// Where and why continuation lost a fixed point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuationEnd {
    pub j: u32,
    pub e: f64,
    pub reason: String,
}

/// Follows fixed point `j` of the numerical `T_p` down in `e`.
pub fn continuation_boundary(p: u32, q: u32, mu: f64, j: u32, opts: &BoundaryOptions) -> Result<Option<ContinuationEnd>> {
    let half = PI / p as f64;
    let centre = j as f64 * half;
    let solve = |e: f64, from: (f64, f64)| -> std::result::Result<(f64, f64), String> {
        let ctx = boundary_context(p, q, e, mu).map_err(|err| err.to_string())?;
        let hyperbolic = ctx.phi_prime(centre).map_err(|err| err.to_string())? < 0.0;
        let map = SectionMap::new(&ctx, mu).map_err(|err| err.to_string())?;
        let fp = numeric_fixed_point(&map, p, from.0, from.1).map_err(|err| err.to_string())?;
        let drift = (fp.l - centre + PI).rem_euclid(2.0 * PI) - PI;
        if drift.abs() >= 0.5 * half {
            return Err(format!("fixed point drifted to l = {:.4}", fp.l));
        }
        let saddle = matches!(fp.linearization, Linearization::Saddle { .. });
        if saddle != hyperbolic {
            return Err("fixed point changed type".into());
        }
        Ok((centre + drift, fp.action))
    };
    // Start from the highest eccentricity where the map is defined and the
    // truncated fixed point refines to a numerical one.
    let n = ((opts.e_max - opts.e_min) / opts.scan_step).round() as usize;
    let seed = |e: f64| -> Option<(f64, f64)> {
        let ctx = boundary_context(p, q, e, mu).ok()?;
        let guess = ResonanceFunctions::new(&ctx).ok()?.fixed_point(mu, j as i32).ok()?;
        solve(e, (guess.l, ctx.lstar() + guess.lambda * mu.sqrt())).ok()
    };
    let (top, mut last) = (0..=n)
        .map(|i| opts.e_max - i as f64 * opts.scan_step)
        .find_map(|e| seed(e).map(|s| (e, s)))
        .ok_or(Error::NoConvergence { what: "numeric fixed point at the top of the scan", iterations: n, residual: f64::NAN })?;
    let opts = &BoundaryOptions { e_max: top, ..*opts };
    let mut reason = String::new();
    // Successes only ever move down in e, so `last` is always the solution
    // nearest above the point being tried.
    let end = first_failure(opts, |e| match solve(e, last) {
        Ok(sol) => {
            last = sol;
            Ok(true)
        }
        Err(why) => {
            reason = why;
            Ok(false)
        }
    })?;
    Ok(end.map(|e| ContinuationEnd { j, e, reason }))
}

/// Resonance-boundary entry: both criteria and whether they disagree.
pub fn boundary_threshold(p: u32, q: u32, mu: f64, opts: &BoundaryOptions) -> Result<BoundaryThreshold> {
    let truncated = truncated_boundary(p, q, mu, opts)?;
    let ends = (0..2 * p).map(|j| continuation_boundary(p, q, mu, j, opts)).collect::<Result<Vec<_>>>()?;
    let continuation = ends.iter().flatten().map(|c| c.e).reduce(f64::max);
    let criterion_sensitive = (truncated.unwrap_or(opts.e_min) - continuation.unwrap_or(opts.e_min)).abs() > opts.sensitivity;
    Ok(BoundaryThreshold { p, q, mu, truncated, continuation, continuation_ends: ends.into_iter().flatten().collect(), criterion_sensitive })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn assumption_holds_for_three_to_one() {
        let ctx = ResonanceContext::new(1, 3, 0.15, Section::Zero).unwrap();
        let f = ResonanceFunctions::new(&ctx).unwrap();
        let r = check_assumption_a(&f).unwrap();
        assert!(r.holds, "{r:?}");
        assert_eq!(r.zeros.len(), 2);
    }

    #[test]
    fn slope_at_half_has_opposite_sign() {
        let ctx = ResonanceContext::new(2, 5, 0.15, Section::Zero).unwrap();
        let f = ResonanceFunctions::new(&ctx).unwrap();
        let r = check_assumption_a(&f).unwrap();
        assert!(r.slope_at_zero * r.slope_at_half < 0.0);
    }

    #[test]
    fn rejects_interior_resonance() {
        assert!(asymmetric_threshold(1, 2, &ThresholdOptions::default()).is_err());
    }
}
