//! The first-order return map to the section `g = g0` near a `p:q` mean
//! motion resonance, in the scaled variables `(l, λ)` with
//! `L = L* + λ μ^{1/2}`:
//!
//! ```text
//! l1 = l - c1 λ μ^{1/2} + (c2 λ² + χ(l)) μ
//! λ1 = λ + φ(l) μ^{1/2} + λ ψ(l) μ
//! ```
//!
//! `φ`, `ψ` and `χ` are integrals of partials of the disturbing function
//! along the unperturbed resonant orbit `l = l0 + (q/p) t`, `g = g0 - t`,
//! `0 <= t <= 2πp`.

use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::numerics::{gauss_kronrod_vec, Chebyshev, Tolerance};
use crate::perturbation::omega_partials_raw;

/// Which half of the `g` circle the section sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Section {
    /// `g = 0`
    Zero,
    /// `g = π`
    Pi,
}

impl Section {
    pub fn angle(self) -> f64 {
        match self {
            Section::Zero => 0.0,
            Section::Pi => PI,
        }
    }

    pub fn other(self) -> Self {
        match self {
            Section::Zero => Section::Pi,
            Section::Pi => Section::Zero,
        }
    }
}

impl std::str::FromStr for Section {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "0" | "zero" => Ok(Section::Zero),
            "pi" | "PI" | "Pi" => Ok(Section::Pi),
            _ => Err(Error::InvalidParameter(format!("section must be 0 or pi, got {s:?}"))),
        }
    }
}

/// How the eccentricity label `e` fixes the energy of the section.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum EnergyConvention {
    /// `G* = L* sqrt(1 - e²)`, so `e` is the eccentricity of the resonant
    /// orbit.
    #[default]
    Eccentricity,
    /// `G* = L* (1 - e²)`.
    Squared,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContextOptions {
    /// Minimum gap between the orbit and the planet's circle, as required
    /// by [`ResonanceContext::new`].
    pub clearance: f64,
    /// Mass ratio used in `a = L²/(1-μ)` inside the disturbing function.
    pub geometry_mu: f64,
    pub energy: EnergyConvention,
    /// Absolute tolerance of the time quadratures.
    pub quadrature_tol: f64,
}

impl Default for ContextOptions {
    fn default() -> Self {
        Self {
            clearance: 0.05,
            geometry_mu: 0.0,
            energy: EnergyConvention::Eccentricity,
            quadrature_tol: 1e-11,
        }
    }
}

/// A `p:q` resonance at a fixed energy and section.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonanceContext {
    pub p: u32,
    pub q: u32,
    pub e: f64,
    pub section: Section,
    pub options: ContextOptions,
    lstar: f64,
    gstar: f64,
}

/// All time integrals at one initial phase, from a single quadrature pass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapIntegrals {
    pub phi: f64,
    pub phi_prime: f64,
    pub psi: f64,
    pub chi: f64,
    pub chi_prime: f64,
    /// `∫ Ω dt`, the resonant average of the disturbing function; its
    /// derivative in `l0` is `φ`.
    pub mean_potential: f64,
}

pub(crate) fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 { a } else { gcd(b, a % b) }
}

impl ResonanceContext {
    pub fn new(p: u32, q: u32, e: f64, section: Section) -> Result<Self> {
        Self::with_options(p, q, e, section, ContextOptions::default())
    }

    pub fn with_options(p: u32, q: u32, e: f64, section: Section, options: ContextOptions) -> Result<Self> {
        if p == 0 || q == 0 || p == q || gcd(p, q) != 1 {
            return Err(Error::InvalidParameter(format!(
                "need coprime positive p != q, got {p}:{q}"
            )));
        }
        if !(e > 0.0 && e < 1.0) {
            return Err(Error::InvalidParameter(format!("eccentricity must lie in (0, 1), got {e}")));
        }
        if !(0.0..0.5).contains(&options.geometry_mu) {
            return Err(Error::InvalidParameter("geometry mass ratio outside [0, 0.5)".into()));
        }
        let lstar = (p as f64 / q as f64).cbrt();
        let a = lstar * lstar / (1.0 - options.geometry_mu);
        let delta = options.clearance;
        let clear = if p > q { a * (1.0 - e) > 1.0 + delta } else { a * (1.0 + e) < 1.0 - delta };
        if !clear {
            return Err(Error::InvalidParameter(format!(
                "orbit with a = {a:.6}, e = {e} comes within {delta} of the planet's orbit"
            )));
        }
        let gstar = match options.energy {
            EnergyConvention::Eccentricity => lstar * (1.0 - e * e).sqrt(),
            EnergyConvention::Squared => lstar * (1.0 - e * e),
        };
        Ok(Self { p, q, e, section, options, lstar, gstar })
    }

    pub fn with_section(&self, section: Section) -> Self {
        Self { section, ..*self }
    }

    pub fn lstar(&self) -> f64 {
        self.lstar
    }

    pub fn gstar(&self) -> f64 {
        self.gstar
    }

    /// Energy of the section in the unperturbed problem.
    pub fn energy(&self) -> f64 {
        -0.5 / (self.lstar * self.lstar) - self.gstar
    }

    /// Return time of the unperturbed resonant orbit, `2πp`.
    pub fn period(&self) -> f64 {
        TAU * self.p as f64
    }

    pub fn ratio(&self) -> f64 {
        self.q as f64 / self.p as f64
    }

    pub fn c1(&self) -> f64 {
        6.0 * PI * (self.q as f64).powf(4.0 / 3.0) * (self.p as f64).powf(-1.0 / 3.0)
    }

    pub fn c2(&self) -> f64 {
        12.0 * PI * (self.q as f64).powf(5.0 / 3.0) * (self.p as f64).powf(-2.0 / 3.0)
    }

    /// Every map integral at initial phase `l0`.
    pub fn integrals(&self, l0: f64) -> Result<MapIntegrals> {
        let ratio = self.ratio();
        let k = 3.0 * ratio.powf(4.0 / 3.0);
        let period = self.period();
        let g0 = self.section.angle();
        let (lstar, gstar, gmu) = (self.lstar, self.gstar, self.options.geometry_mu);
        let integrand = |t: f64| -> Result<[f64; 6]> {
            let d = omega_partials_raw(lstar, l0 + ratio * t, gstar, g0 - t, gmu)?;
            let mixed = d.d_l_action + ratio * d.d_l_ang;
            Ok([
                d.d_l,
                d.d_ll,
                mixed - k * t * d.d_ll,
                -d.d_action - ratio * d.d_ang - k * (period - t) * d.d_l,
                -mixed - k * (period - t) * d.d_ll,
                d.value,
            ])
        };
        let tol = Tolerance::absolute(self.options.quadrature_tol);
        let r = gauss_kronrod_vec(integrand, 0.0, period, 4 * self.p as usize, tol)?;
        let [phi, phi_prime, psi, chi, chi_prime, mean_potential] = r.value;
        Ok(MapIntegrals { phi, phi_prime, psi, chi, chi_prime, mean_potential })
    }

    pub fn phi(&self, l0: f64) -> Result<f64> {
        self.phi_and_derivative(l0).map(|(v, _)| v)
    }

    pub fn phi_prime(&self, l0: f64) -> Result<f64> {
        self.phi_and_derivative(l0).map(|(_, d)| d)
    }

    /// `φ` and `φ'` only; cheaper than [`ResonanceContext::integrals`].
    pub fn phi_and_derivative(&self, l0: f64) -> Result<(f64, f64)> {
        let ratio = self.ratio();
        let g0 = self.section.angle();
        let (lstar, gstar, gmu) = (self.lstar, self.gstar, self.options.geometry_mu);
        let integrand = |t: f64| -> Result<[f64; 2]> {
            let d = omega_partials_raw(lstar, l0 + ratio * t, gstar, g0 - t, gmu)?;
            Ok([d.d_l, d.d_ll])
        };
        let tol = Tolerance::absolute(self.options.quadrature_tol);
        let r = gauss_kronrod_vec(integrand, 0.0, self.period(), 4 * self.p as usize, tol)?;
        Ok((r.value[0], r.value[1]))
    }

    pub fn psi_chi(&self, l0: f64) -> Result<(f64, f64)> {
        let m = self.integrals(l0)?;
        Ok((m.psi, m.chi))
    }
}

/// Chebyshev interpolants of the map functions on `[0, 2π]`.
#[derive(Debug, Clone)]
pub struct ResonanceFunctions {
    pub context: ResonanceContext,
    phi: Chebyshev,
    phi_prime: Chebyshev,
    psi: Chebyshev,
    psi_prime: Chebyshev,
    chi: Chebyshev,
    chi_prime: Chebyshev,
    mean_potential: Chebyshev,
    /// Largest trailing Chebyshev coefficient, a rough absolute accuracy.
    pub tail: f64,
}

pub const DEFAULT_NODES: usize = 257;
const MAX_NODES: usize = 4097;

#[cfg(feature = "parallel")]
fn sample(ctx: &ResonanceContext, nodes: &[f64]) -> Result<Vec<MapIntegrals>> {
    use rayon::prelude::*;
    nodes.par_iter().map(|&l| ctx.integrals(l)).collect()
}

#[cfg(not(feature = "parallel"))]
fn sample(ctx: &ResonanceContext, nodes: &[f64]) -> Result<Vec<MapIntegrals>> {
    nodes.iter().map(|&l| ctx.integrals(l)).collect()
}

impl ResonanceFunctions {
    /// Builds the interpolants, doubling the node count (starting at
    /// `nodes`) until the trailing coefficients fall below `tail_tol` or
    /// 4097 nodes are reached.
    pub fn build(context: &ResonanceContext, nodes: usize, tail_tol: f64) -> Result<Self> {
        let mut n = nodes.max(9);
        loop {
            let f = Self::build_fixed(context, n)?;
            if f.tail <= tail_tol || 2 * n - 1 > MAX_NODES {
                return Ok(f);
            }
            n = 2 * n - 1;
        }
    }

    pub fn new(context: &ResonanceContext) -> Result<Self> {
        Self::build(context, DEFAULT_NODES, 1e-10)
    }

    /// Interpolants on exactly `n` nodes.
    pub fn build_fixed(context: &ResonanceContext, n: usize) -> Result<Self> {
        let nodes = Chebyshev::nodes(0.0, TAU, n);
        let samples = sample(context, &nodes)?;
        let fit = |pick: fn(&MapIntegrals) -> f64| {
            let v: Vec<f64> = samples.iter().map(pick).collect();
            Chebyshev::from_values(0.0, TAU, &v)
        };
        let phi = fit(|m| m.phi);
        let psi = fit(|m| m.psi);
        let chi = fit(|m| m.chi);
        let tail_abs = |c: &Chebyshev| {
            let cs = c.coeffs();
            cs[cs.len() - (cs.len() / 8).max(1)..].iter().fold(0.0f64, |m, v| m.max(v.abs()))
        };
        let tail = tail_abs(&phi).max(tail_abs(&psi)).max(tail_abs(&chi));
        Ok(Self {
            context: *context,
            phi_prime: fit(|m| m.phi_prime),
            psi_prime: psi.derivative(),
            chi_prime: fit(|m| m.chi_prime),
            mean_potential: fit(|m| m.mean_potential),
            phi,
            psi,
            chi,
            tail,
        })
    }

    fn wrap(l: f64) -> f64 {
        l.rem_euclid(TAU)
    }

    pub fn phi(&self, l: f64) -> f64 {
        self.phi.eval(Self::wrap(l))
    }
    pub fn phi_prime(&self, l: f64) -> f64 {
        self.phi_prime.eval(Self::wrap(l))
    }
    pub fn psi(&self, l: f64) -> f64 {
        self.psi.eval(Self::wrap(l))
    }
    pub fn psi_prime(&self, l: f64) -> f64 {
        self.psi_prime.eval(Self::wrap(l))
    }
    pub fn chi(&self, l: f64) -> f64 {
        self.chi.eval(Self::wrap(l))
    }
    pub fn chi_prime(&self, l: f64) -> f64 {
        self.chi_prime.eval(Self::wrap(l))
    }
    pub fn mean_potential(&self, l: f64) -> f64 {
        self.mean_potential.eval(Self::wrap(l))
    }

    pub fn c1(&self) -> f64 {
        self.context.c1()
    }
    pub fn c2(&self) -> f64 {
        self.context.c2()
    }

    /// One step of the truncated map. `l` is not reduced mod 2π.
    pub fn apply_scaled_map(&self, mu: f64, l: f64, lambda: f64) -> (f64, f64) {
        let s = mu.sqrt();
        let l1 = l - self.c1() * lambda * s + (self.c2() * lambda * lambda + self.chi(l)) * mu;
        let lambda1 = lambda + self.phi(l) * s + lambda * self.psi(l) * mu;
        (l1, lambda1)
    }

    /// Jacobian of [`ResonanceFunctions::apply_scaled_map`].
    pub fn jacobian(&self, mu: f64, l: f64, lambda: f64) -> [[f64; 2]; 2] {
        let s = mu.sqrt();
        [
            [1.0 + self.chi_prime(l) * mu, -self.c1() * s + 2.0 * self.c2() * lambda * mu],
            [self.phi_prime(l) * s + lambda * self.psi_prime(l) * mu, 1.0 + self.psi(l) * mu],
        ]
    }

    /// The `2p` fixed points of the truncated map, seeded at `l = jπ/p`.
    pub fn fixed_points(&self, mu: f64) -> Result<Vec<FixedPoint>> {
        (0..2 * self.context.p as i32).map(|j| self.fixed_point(mu, j)).collect()
    }

    /// The fixed point seeded at `l = jπ/p`; any integer `j` is accepted.
    pub fn fixed_point(&self, mu: f64, j: i32) -> Result<FixedPoint> {
        if !(mu > 0.0 && mu < 0.5) {
            return Err(Error::InvalidParameter(format!("mass ratio must lie in (0, 0.5), got {mu}")));
        }
        let p = self.context.p as f64;
        let s = mu.sqrt();
        let (c1, c2) = (self.c1(), self.c2());
        let seed = j as f64 * PI / p;
        let mut l = seed;
        let mut lambda = self.chi(seed) * s / c1;
        let residual = |l: f64, lambda: f64| {
            (
                -c1 * lambda + (c2 * lambda * lambda + self.chi(l)) * s,
                self.phi(l) + lambda * self.psi(l) * s,
            )
        };
        let mut converged = false;
        let mut last = f64::INFINITY;
        for _ in 0..50 {
            let (r1, r2) = residual(l, lambda);
            last = r1.abs().max(r2.abs());
            if last < 1e-14 {
                converged = true;
                break;
            }
            let j11 = self.chi_prime(l) * s;
            let j12 = -c1 + 2.0 * c2 * lambda * s;
            let j21 = self.phi_prime(l) + lambda * self.psi_prime(l) * s;
            let j22 = self.psi(l) * s;
            let det = j11 * j22 - j12 * j21;
            if det == 0.0 || !det.is_finite() {
                break;
            }
            l -= (j22 * r1 - j12 * r2) / det;
            lambda -= (-j21 * r1 + j11 * r2) / det;
        }
        let (l1, lambda1) = self.apply_scaled_map(mu, l, lambda);
        let map_residual = (l1 - l).abs().max((lambda1 - lambda).abs());
        if !converged && map_residual > 1e-10 {
            return Err(Error::NoConvergence { what: "fixed point newton", iterations: 50, residual: last });
        }
        if map_residual > 1e-10 {
            return Err(Error::NoConvergence { what: "fixed point check", iterations: 0, residual: map_residual });
        }
        let kind = if self.phi_prime(seed) < 0.0 { FixedPointKind::Hyperbolic } else { FixedPointKind::Elliptic };
        Ok(FixedPoint {
            j,
            l,
            lambda,
            kind,
            linearization: Linearization::of(self.jacobian(mu, l, lambda)),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FixedPointKind {
    Hyperbolic,
    Elliptic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub j: i32,
    pub l: f64,
    pub lambda: f64,
    pub kind: FixedPointKind,
    pub linearization: Linearization,
}

/// Eigen-data of a 2×2 map Jacobian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Linearization {
    /// Real multipliers; slopes are `dλ/dl` of the eigenvectors.
    Saddle { stable: f64, unstable: f64, stable_slope: f64, unstable_slope: f64 },
    /// Complex pair `modulus · exp(±i rotation)`.
    Center { modulus: f64, rotation: f64 },
}

impl Linearization {
    pub fn of(m: [[f64; 2]; 2]) -> Self {
        let [[a, b], [c, d]] = m;
        let half_trace = 0.5 * (a + d);
        let det = a * d - b * c;
        let disc = half_trace * half_trace - det;
        if disc > 0.0 {
            let root = disc.sqrt();
            // Avoid cancellation in the smaller root.
            let big = half_trace + root.copysign(half_trace);
            let small = det / big;
            let (stable, unstable) = if small.abs() < big.abs() { (small, big) } else { (big, small) };
            let slope = |lam: f64| if b.abs() > c.abs() { (lam - a) / b } else { c / (lam - d) };
            Linearization::Saddle {
                stable,
                unstable,
                stable_slope: slope(stable),
                unstable_slope: slope(unstable),
            }
        } else {
            Linearization::Center { modulus: det.max(0.0).sqrt(), rotation: (-disc).sqrt().atan2(half_trace) }
        }
    }

    pub fn product(&self) -> f64 {
        match *self {
            Linearization::Saddle { stable, unstable, .. } => stable * unstable,
            Linearization::Center { modulus, .. } => modulus * modulus,
        }
    }
}
