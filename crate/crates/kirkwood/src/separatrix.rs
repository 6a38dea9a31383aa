//! Asymptotic expansion of the stable manifold of a hyperbolic fixed point
//! of the truncated map:
//!
//! ```text
//! L(l) = L* + χ(jπ/p) μ / c1 + u(l - jπ/p) μ^{1/2} + v(l - jπ/p) μ + O(μ^{3/2})
//! ```
//!
//! with `u² = U = -(2/c1) ∫₀^l Φ` and `v` the first correction. Both are
//! stored as `u(x) = x û(x)`, `v(x) = x v̂(x)` where `û`, `v̂` are smooth, so
//! nothing is divided by a vanishing quantity near the fixed point.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numerics::{gauss_legendre, Chebyshev};
use crate::return_map::{ResonanceFunctions, Section};

const INNER_NODES: usize = 48;
const GRAPH_NODES: usize = 129;

#[derive(Debug, Clone)]
pub struct Separatrix {
    funcs: ResonanceFunctions,
    pub j: i32,
    /// `jπ/p`
    pub center: f64,
    /// Half-width of the domain of `u` and `v`, `3π/(2p)`.
    pub reach: f64,
    pub alpha: f64,
    phi_d1: f64,
    phi_d3: f64,
    chi_center: f64,
    chi_d1: f64,
    chi_d2: f64,
    psi_center: f64,
    taylor_radius: f64,
    u_hat: Chebyshev,
    v_hat: Chebyshev,
}

impl Separatrix {
    /// Expansion around the fixed point seeded at `jπ/p`, which must be
    /// hyperbolic (`φ'(jπ/p) < 0`).
    pub fn new(funcs: &ResonanceFunctions, j: i32) -> Result<Self> {
        let ctx = &funcs.context;
        let p = ctx.p as f64;
        let center = j as f64 * PI / p;
        let h = 0.01 / p;
        let mid = ctx.integrals(center)?;
        let plus = ctx.integrals(center + h)?;
        let minus = ctx.integrals(center - h)?;
        let phi_d1 = mid.phi_prime;
        if !(phi_d1 < 0.0) {
            return Err(Error::InvalidParameter(format!(
                "fixed point at l = {center:.6} is not hyperbolic (phi' = {phi_d1:e})"
            )));
        }
        let c1 = ctx.c1();
        let mut sep = Self {
            funcs: funcs.clone(),
            j,
            center,
            reach: 1.5 * PI / p,
            alpha: (-phi_d1 / c1).powf(0.25),
            phi_d1,
            phi_d3: (plus.phi_prime - 2.0 * phi_d1 + minus.phi_prime) / (h * h),
            chi_center: funcs.chi(center),
            chi_d1: mid.chi_prime,
            chi_d2: (plus.chi_prime - minus.chi_prime) / (2.0 * h),
            psi_center: mid.psi,
            taylor_radius: 1e-3 / p,
            u_hat: Chebyshev::from_values(0.0, 1.0, &[0.0, 0.0]),
            v_hat: Chebyshev::from_values(0.0, 1.0, &[0.0, 0.0]),
        };
        let (gl_x, gl_w) = gauss_legendre(INNER_NODES);
        let tau: Vec<f64> = gl_x.iter().map(|x| 0.5 * (x + 1.0)).collect();
        let weight: Vec<f64> = gl_w.iter().map(|w| 0.5 * w).collect();
        let reach = sep.reach;
        let nodes = Chebyshev::nodes(-reach, reach, GRAPH_NODES);

        let mut u_vals = Vec::with_capacity(nodes.len());
        for &x in &nodes {
            let inner: f64 = tau.iter().zip(&weight).map(|(t, w)| w * t * sep.phi_ratio(x * t)).sum();
            let big_u_hat = -2.0 / c1 * inner;
            if !(big_u_hat > 0.0) {
                return Err(Error::Degenerate(format!(
                    "U vanishes at l - jπ/p = {x:.6} inside the separatrix domain"
                )));
            }
            u_vals.push(big_u_hat.sqrt());
        }
        sep.u_hat = Chebyshev::from_values(-reach, reach, &u_vals);

        let v_vals: Vec<f64> = nodes
            .iter()
            .map(|&x| {
                let inner: f64 = tau.iter().zip(&weight).map(|(t, w)| w * t * sep.v_kernel(x * t)).sum();
                -inner / (c1 * sep.u_hat.eval(x))
            })
            .collect();
        sep.v_hat = Chebyshev::from_values(-reach, reach, &v_vals);
        Ok(sep)
    }

    pub fn functions(&self) -> &ResonanceFunctions {
        &self.funcs
    }

    /// `Φ(x)/x` with `Φ(x) = φ(jπ/p + x)`.
    fn phi_ratio(&self, x: f64) -> f64 {
        if x.abs() < self.taylor_radius {
            self.phi_d1 + self.phi_d3 * x * x / 6.0
        } else {
            self.funcs.phi(self.center + x) / x
        }
    }

    /// `(χ(jπ/p + x) - χ(jπ/p)) / x`.
    fn chi_ratio(&self, x: f64) -> f64 {
        if x.abs() < self.taylor_radius {
            self.chi_d1 + 0.5 * self.chi_d2 * x
        } else {
            (self.funcs.chi(self.center + x) - self.chi_center) / x
        }
    }

    /// The integrand of the `v` integral divided by `x`.
    fn v_kernel(&self, x: f64) -> f64 {
        let c1 = self.funcs.c1();
        let c2 = self.funcs.c2();
        let uh = self.u_hat.eval(x);
        let r = self.phi_ratio(x);
        c1 * uh * self.funcs.phi_prime(self.center + x) / 2.0
            + (c2 * x * uh * uh + self.chi_ratio(x)) * r / (c1 * uh)
            + r * r / (2.0 * uh)
            + uh * self.funcs.psi(self.center + x)
    }

    fn check_domain(&self, x: f64) -> Result<()> {
        if x.abs() <= self.reach * (1.0 + 1e-12) {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "l - jπ/p = {x} outside [-{r}, {r}]",
                r = self.reach
            )))
        }
    }

    /// `u(x)`, with `x = l - jπ/p`; negative for `x < 0`.
    pub fn u(&self, x: f64) -> Result<f64> {
        self.check_domain(x)?;
        Ok(x * self.u_hat.eval(x))
    }

    /// `U(x) = u(x)²`.
    pub fn big_u(&self, x: f64) -> Result<f64> {
        self.u(x).map(|u| u * u)
    }

    pub fn v(&self, x: f64) -> Result<f64> {
        self.check_domain(x)?;
        Ok(x * self.v_hat.eval(x))
    }

    /// `u'(0)`; equals `α²`.
    pub fn u_slope(&self) -> f64 {
        self.u_hat.eval(0.0)
    }

    /// `v'(0)`.
    pub fn v_slope(&self) -> f64 {
        self.v_hat.eval(0.0)
    }

    /// The value `v'(0)` must take for the expansion to be tangent to the
    /// stable eigenvector: `(χ'(jπ/p) - ψ(jπ/p)) / (2 c1)`.
    pub fn eigen_v_slope(&self) -> f64 {
        (self.chi_d1 - self.psi_center) / (2.0 * self.funcs.c1())
    }

    /// Reduces `l` to the representative closest to the centre.
    pub fn offset(&self, l: f64) -> f64 {
        let x = (l - self.center).rem_euclid(std::f64::consts::TAU);
        if x > PI { x - std::f64::consts::TAU } else { x }
    }

    /// `λ` of the stable manifold at `l`, through order `μ^{1/2}`.
    pub fn lambda(&self, l: f64, mu: f64) -> Result<f64> {
        let x = self.offset(l);
        let s = mu.sqrt();
        Ok(self.chi_center * s / self.funcs.c1() + self.u(x)? + self.v(x)? * s)
    }

    /// `L` of the stable manifold at `l`.
    pub fn action(&self, l: f64, mu: f64) -> Result<f64> {
        Ok(self.funcs.context.lstar() + mu.sqrt() * self.lambda(l, mu)?)
    }
}

/// The homoclinic crossing predicted on a symmetry line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HomoclinicEstimate {
    pub section: Section,
    pub j: i32,
    /// The symmetry line crossed, `0` or `π`.
    pub l_h: f64,
    /// `u(π/p)`.
    pub u_at_crossing: f64,
    pub v_at_crossing: f64,
    /// `L* + u(π/p) μ^{1/2}`.
    pub leading: f64,
    /// Including the order-`μ` terms.
    pub corrected: f64,
}

/// Applies the section and fixed-point choice that puts the homoclinic
/// crossing on a symmetry line.
///
/// `funcs_zero` must be built on the `g = 0` section; when `p` is even and
/// `φ'(0) < 0` there, `funcs_pi` (the `g = π` section) is used instead.
pub fn choose_homoclinic(funcs_zero: &ResonanceFunctions) -> Result<(Section, i32)> {
    let ctx = &funcs_zero.context;
    if ctx.section != Section::Zero {
        return Err(Error::InvalidParameter("expected the g = 0 section".into()));
    }
    let p = ctx.p as i32;
    let slope0 = ctx.phi_prime(0.0)?;
    Ok(if slope0 > 0.0 {
        (Section::Zero, -1)
    } else if p % 2 == 1 {
        (Section::Zero, p - 1)
    } else {
        (Section::Pi, -1)
    })
}

pub fn homoclinic_estimate(funcs_zero: &ResonanceFunctions, funcs_pi: Option<&ResonanceFunctions>, mu: f64) -> Result<HomoclinicEstimate> {
    let (section, j) = choose_homoclinic(funcs_zero)?;
    let built;
    let funcs = match section {
        Section::Zero => funcs_zero,
        Section::Pi => match funcs_pi {
            Some(f) => f,
            None => {
                built = ResonanceFunctions::new(&funcs_zero.context.with_section(Section::Pi))?;
                &built
            }
        },
    };
    let sep = Separatrix::new(funcs, j)?;
    let p = funcs.context.p as f64;
    let x = PI / p;
    let l_h = ((j + 1) as f64 * PI / p).rem_euclid(std::f64::consts::TAU);
    let u = sep.u(x)?;
    let v = sep.v(x)?;
    let lstar = funcs.context.lstar();
    let s = mu.sqrt();
    Ok(HomoclinicEstimate {
        section,
        j,
        l_h,
        u_at_crossing: u,
        v_at_crossing: v,
        leading: lstar + u * s,
        corrected: lstar + u * s + (sep.chi_center / funcs.c1() + v) * mu,
    })
}
