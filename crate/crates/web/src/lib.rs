//! WebAssembly bindings for the static demo page in `www/`.
//!
//! The plain Rust methods on [`Resonance`] carry the logic so they can be
//! tested natively; the `#[wasm_bindgen]` wrappers only convert errors.

use std::f64::consts::TAU;

use kirkwood::return_map::{FixedPointKind, ResonanceContext, ResonanceFunctions, Section};
use kirkwood::thresholds::{asymmetric_threshold, ThresholdOptions};
use wasm_bindgen::prelude::*;

/// Orbits longer than this are truncated; the page never asks for more.
pub const MAX_STEPS: usize = 20_000;

fn js(e: kirkwood::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// One resonance at fixed energy, with the map functions interpolated once
/// so the page can draw curves and orbits without recomputing quadratures.
#[wasm_bindgen]
pub struct Resonance {
    funcs: ResonanceFunctions,
}

impl Resonance {
    pub fn build(p: u32, q: u32, e: f64, pi_section: bool) -> kirkwood::Result<Self> {
        let section = if pi_section { Section::Pi } else { Section::Zero };
        let ctx = ResonanceContext::new(p, q, e, section)?;
        Ok(Self { funcs: ResonanceFunctions::new(&ctx)? })
    }

    pub fn functions(&self) -> &ResonanceFunctions {
        &self.funcs
    }

    /// `samples + 1` values of φ at `l = 2πk/samples`.
    pub fn phi_values(&self, samples: usize) -> Vec<f64> {
        let n = samples.max(1);
        (0..=n).map(|k| self.funcs.phi(TAU * k as f64 / n as f64)).collect()
    }

    /// Iterates the truncated map in the scaled action `λ`, returning
    /// `(l mod 2π, λ)` pairs flattened. Stops early if `λ` leaves `±limit`.
    pub fn orbit_points(&self, mu: f64, l0: f64, lambda0: f64, steps: usize, limit: f64) -> kirkwood::Result<Vec<f64>> {
        if !(mu > 0.0 && mu < 0.5) {
            return Err(kirkwood::Error::InvalidParameter(format!("mass ratio must lie in (0, 0.5), got {mu}")));
        }
        let (mut l, mut lambda) = (l0, lambda0);
        let mut out = Vec::with_capacity(2 * steps.min(MAX_STEPS));
        for _ in 0..steps.min(MAX_STEPS) {
            if !lambda.is_finite() || lambda.abs() > limit {
                break;
            }
            out.push(l.rem_euclid(TAU));
            out.push(lambda);
            (l, lambda) = self.funcs.apply_scaled_map(mu, l, lambda);
        }
        Ok(out)
    }

    /// Fixed points as `(l, λ, hyperbolic)` triples, `hyperbolic` as 1 or 0.
    pub fn fixed_point_triples(&self, mu: f64) -> kirkwood::Result<Vec<f64>> {
        let mut out = Vec::new();
        for fp in self.funcs.fixed_points(mu)? {
            let hyperbolic = matches!(fp.kind, FixedPointKind::Hyperbolic);
            out.extend([fp.l.rem_euclid(TAU), fp.lambda, f64::from(u8::from(hyperbolic))]);
        }
        Ok(out)
    }
}

#[wasm_bindgen]
impl Resonance {
    #[wasm_bindgen(constructor)]
    pub fn new(p: u32, q: u32, e: f64, pi_section: bool) -> Result<Resonance, JsError> {
        Self::build(p, q, e, pi_section).map_err(js)
    }

    pub fn phi(&self, samples: usize) -> Vec<f64> {
        self.phi_values(samples)
    }

    pub fn orbit(&self, mu: f64, l0: f64, lambda0: f64, steps: usize, limit: f64) -> Result<Vec<f64>, JsError> {
        self.orbit_points(mu, l0, lambda0, steps, limit).map_err(js)
    }

    #[wasm_bindgen(js_name = fixedPoints)]
    pub fn fixed_points(&self, mu: f64) -> Result<Vec<f64>, JsError> {
        self.fixed_point_triples(mu).map_err(js)
    }

    #[wasm_bindgen(js_name = librationWidth)]
    pub fn libration_width(&self) -> f64 {
        libration_half_width(&self.funcs)
    }
}

/// Half width in `λ` of the resonance, `sqrt(2 (max U - min U) / |c1|)`.
/// The truncated map conserves `c1 λ²/2 + U(l)` to leading order, `U' = φ`.
pub fn libration_half_width(funcs: &ResonanceFunctions) -> f64 {
    let p = funcs.context.p as f64;
    let steps = 512;
    let h = TAU / p / steps as f64;
    // Trapezoid primitive of φ over one period of length 2π/p.
    let (mut acc, mut lo, mut hi) = (0.0_f64, 0.0_f64, 0.0_f64);
    let mut prev = funcs.phi(0.0);
    for k in 1..=steps {
        let next = funcs.phi(k as f64 * h);
        acc += 0.5 * h * (prev + next);
        lo = lo.min(acc);
        hi = hi.max(acc);
        prev = next;
    }
    let c1 = funcs.c1().abs();
    if c1 == 0.0 { f64::NAN } else { (2.0 * (hi - lo) / c1).sqrt() }
}

pub fn onset_eccentricity(p: u32) -> kirkwood::Result<f64> {
    asymmetric_threshold(p, 1, &ThresholdOptions::default())
}

/// Eccentricity above which the exterior `p:1` resonance has asymmetric
/// librations.
#[wasm_bindgen(js_name = asymmetricOnset)]
pub fn asymmetric_onset(p: u32) -> Result<f64, JsError> {
    onset_eccentricity(p).map_err(js)
}
