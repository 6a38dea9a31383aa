//! Direct integration of the rotating-frame equations of motion: numerical
//! return maps to the section `g = g0`, their fixed points and invariant
//! manifolds, and measured error orders of the perturbative formulas.
//!
//! The flow is integrated in Cartesian coordinates. The osculating
//! perihelion angle `g` (in rotating axes) is tracked along the solution and
//! a return is the instant it has decreased by `2π`.

use ode_solvers::{Dop853, OutputType, System, Vector4};
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::kepler::{cartesian_to_delaunay, delaunay_to_cartesian, hamiltonian_cartesian, CartesianState, DelaunayState};
use crate::numerics::{gauss_kronrod_vec, Tolerance};
use crate::perturbation::omega_partials_raw;
use crate::return_map::{Linearization, ResonanceContext, ResonanceFunctions, Section};
use crate::separatrix::{homoclinic_estimate, HomoclinicEstimate, Separatrix};

type State = Vector4<f64>;

/// Integrations passing closer than this to the planet are aborted.
pub const CLOSE_APPROACH: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    /// Tolerance on the crossing time.
    pub event_tol: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self { rtol: 1e-12, atol: 1e-14, event_tol: 1e-12 }
    }
}

impl IntegratorConfig {
    /// Tolerances for measuring remainders of order `μ²` at `μ = 1e-6`.
    pub fn tight() -> Self {
        Self { rtol: 1e-14, atol: 1e-16, event_tol: 1e-14 }
    }
}

fn wrap_pi(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(TAU) - PI;
    if y == -PI { PI } else { y }
}

fn perihelion_angle(y: &State, k: f64) -> f64 {
    let (x, yy, px, py) = (y[0], y[1], y[2], y[3]);
    let r = x.hypot(yy);
    let v2 = px * px + py * py;
    let rv = x * px + yy * py;
    let ex = (v2 - k / r) * x - rv * px;
    let ey = (v2 - k / r) * yy - rv * py;
    ey.atan2(ex)
}

struct Flow {
    mu: f64,
    /// Unwrapped `g` at the last accepted step.
    g_unwrapped: f64,
    g_last: f64,
    target: f64,
    /// `+1` forward in time (g decreasing), `-1` backward.
    direction: f64,
}

impl System<f64, State> for Flow {
    fn system(&self, _t: f64, y: &State, dy: &mut State) {
        let mu = self.mu;
        let (x, yy, px, py) = (y[0], y[1], y[2], y[3]);
        let r2 = x * x + yy * yy;
        let r3 = r2 * r2.sqrt();
        let dx = x - 1.0;
        let d2 = dx * dx + yy * yy;
        let d3 = d2 * d2.sqrt();
        dy[0] = px + yy;
        dy[1] = py - x;
        dy[2] = py - (1.0 - mu) * x / r3 - mu * dx / d3 - mu;
        dy[3] = -px - (1.0 - mu) * yy / r3 - mu * yy / d3;
    }

    fn solout(&mut self, _t: f64, y: &State, _dy: &State) -> bool {
        let g = perihelion_angle(y, 1.0 - self.mu);
        self.g_unwrapped += wrap_pi(g - self.g_last);
        self.g_last = g;
        let close = (y[0] - 1.0).hypot(y[1]) < CLOSE_APPROACH;
        close || (self.target - self.g_unwrapped) * self.direction >= 0.0
    }
}

fn to_state(c: &CartesianState) -> State {
    State::new(c.x, c.y, c.px, c.py)
}

fn to_cartesian(y: &State) -> CartesianState {
    CartesianState { x: y[0], y: y[1], px: y[2], py: y[3] }
}

/// Outcome of one section return.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectionReturn {
    pub l: f64,
    pub action: f64,
    pub ang_momentum: f64,
    pub time: f64,
    /// `|H(end) - H(start)|`.
    pub energy_drift: f64,
}

/// A point on the section together with the data that fixes it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectionPoint {
    pub l: f64,
    pub action: f64,
    pub energy: f64,
    pub section: Section,
    pub mu: f64,
}

/// Sampled solution between two section crossings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<CartesianState>,
    pub energy_drift: f64,
}

/// The numerical first return map of the exact problem at fixed energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectionMap {
    pub mu: f64,
    pub section: Section,
    pub energy: f64,
    pub config: IntegratorConfig,
}

impl SectionMap {
    /// The section of `ctx` at the energy of its resonant orbit.
    pub fn new(ctx: &ResonanceContext, mu: f64) -> Result<Self> {
        if !(0.0..0.5).contains(&mu) {
            return Err(Error::InvalidParameter(format!("mass ratio must lie in [0, 0.5), got {mu}")));
        }
        Ok(Self { mu, section: ctx.section, energy: ctx.energy(), config: IntegratorConfig::default() })
    }

    pub fn with_config(self, config: IntegratorConfig) -> Self {
        Self { config, ..self }
    }

    /// Solves `H(L, l, G, g0) = energy` for `G` by Newton's method.
    pub fn solve_ang_momentum(&self, l: f64, action: f64) -> Result<f64> {
        let mu = self.mu;
        let g0 = self.section.angle();
        let kepler = -(1.0 - mu).powi(2) / (2.0 * action * action);
        let mut ang = -self.energy + kepler;
        if mu == 0.0 {
            return if ang > 0.0 && ang <= action {
                Ok(ang)
            } else {
                Err(Error::Domain(format!("no elliptic orbit with L = {action} at this energy")))
            };
        }
        let f = |ang: f64| -> Result<(f64, f64)> {
            let d = omega_partials_raw(action, l, ang, g0, mu)?;
            let om = d.value + 1.0 / (action * action);
            Ok((kepler - ang - mu * om - self.energy, -1.0 - mu * d.d_ang))
        };
        // The residual decreases in G. Keep a bracket so that a poor first
        // guess (the unperturbed value can exceed L) falls back to bisection.
        let mut lo = 0.0;
        let mut hi = action * (1.0 - 1e-8f64).sqrt();
        let (f_hi, _) = f(hi)?;
        if f_hi > 0.0 {
            return Err(Error::Domain(format!("no orbit with L = {action} and e > 1e-4 at this energy")));
        }
        if !(ang > lo && ang < hi) {
            ang = 0.5 * (lo + hi);
        }
        let mut residual = f64::INFINITY;
        for _ in 0..100 {
            let (r, slope) = f(ang)?;
            residual = r;
            if r > 0.0 { lo = ang } else { hi = ang }
            let mut next = ang - r / slope;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            let step = next - ang;
            ang = next;
            if step.abs() <= 1e-15 * ang.abs() || hi - lo <= 1e-15 * ang {
                let (r, _) = f(ang)?;
                residual = r;
                if r.abs() <= 1e-12 {
                    return Ok(ang);
                }
            }
        }
        Err(Error::NoConvergence { what: "energy relation", iterations: 100, residual })
    }

    fn cartesian(&self, l: f64, action: f64) -> Result<CartesianState> {
        let ang = self.solve_ang_momentum(l, action)?;
        delaunay_to_cartesian(&DelaunayState::new(action, l, ang, self.section.angle())?, self.mu)
    }

    fn solver(&self, flow: Flow, t0: f64, t1: f64, y: State) -> Dop853<f64, State, Flow> {
        let mut s = Dop853::new(flow, t0, t1, (t1 - t0).abs(), y, self.config.rtol, self.config.atol);
        s.set_output(OutputType::Sparse);
        s
    }

    fn propagate(&self, t0: f64, t1: f64, y: State) -> Result<State> {
        if t1 == t0 {
            return Ok(y);
        }
        let flow = Flow { mu: self.mu, g_unwrapped: 0.0, g_last: 0.0, target: f64::INFINITY, direction: 0.0 };
        let mut s = self.solver(flow, t0, t1, y);
        s.integrate().map_err(|e| Error::Integration(e.to_string()))?;
        Ok(*s.y_out().last().expect("solver records the final state"))
    }

    /// Integrates to the next crossing (`direction = +1`) or the previous one
    /// (`-1`), returning the crossing time and state.
    fn to_crossing(&self, y0: State, direction: f64, keep: bool) -> Result<(f64, State, Option<Trajectory>)> {
        let k = 1.0 - self.mu;
        let g0 = perihelion_angle(&y0, k);
        let target = g0 - direction * TAU;
        let flow = Flow { mu: self.mu, g_unwrapped: g0, g_last: g0, target, direction };
        let t_max = 1.6 * TAU;
        let mut s = self.solver(flow, 0.0, direction * t_max, y0);
        s.integrate().map_err(|e| Error::Integration(e.to_string()))?;
        let ts = s.x_out();
        let ys = s.y_out();
        let last = ys.len() - 1;
        let dist = (ys[last][0] - 1.0).hypot(ys[last][1]);
        if dist < CLOSE_APPROACH {
            return Err(Error::Collision { distance: dist });
        }
        // Rebuild the unwrapped angle along the accepted steps.
        let mut g_unw = g0;
        let mut g_prev = g0;
        let mut unwrapped = Vec::with_capacity(ys.len());
        for y in ys.iter() {
            let g = perihelion_angle(y, k);
            g_unw += wrap_pi(g - g_prev);
            g_prev = g;
            unwrapped.push(g_unw);
        }
        let crossed = |g: f64| (target - g) * direction >= 0.0;
        if !crossed(unwrapped[last]) || last == 0 {
            return Err(Error::Integration(format!("no section crossing within t = {t_max:.3}")));
        }
        let (mut ta, ya, ga) = (ts[last - 1], ys[last - 1], unwrapped[last - 1]);
        let mut tb = ts[last];
        let mut fa = ga - target;
        let mut fb = unwrapped[last] - target;
        let eval = |t: f64| -> Result<(f64, State)> {
            let y = self.propagate(ts[last - 1], t, ya)?;
            let g = ga + wrap_pi(perihelion_angle(&y, k) - perihelion_angle(&ya, k));
            Ok((g - target, y))
        };
        // Illinois regula falsi on the crossing time.
        let mut best = (tb, ys[last]);
        let mut side = 0;
        for _ in 0..100 {
            if (tb - ta).abs() <= self.config.event_tol {
                break;
            }
            let t = (ta * fb - tb * fa) / (fb - fa);
            let (f, y) = eval(t)?;
            best = (t, y);
            if f == 0.0 {
                break;
            }
            if f.signum() == fb.signum() {
                tb = t;
                fb = f;
                if side == -1 {
                    fa *= 0.5;
                }
                side = -1;
            } else {
                ta = t;
                fa = f;
                if side == 1 {
                    fb *= 0.5;
                }
                side = 1;
            }
            if f.abs() < 1e-15 {
                break;
            }
        }
        let trajectory = keep.then(|| {
            let mut times: Vec<f64> = ts[..last].to_vec();
            let mut states: Vec<CartesianState> = ys[..last].iter().map(to_cartesian).collect();
            times.push(best.0);
            states.push(to_cartesian(&best.1));
            let h0 = hamiltonian_cartesian(&to_cartesian(&y0), self.mu);
            let energy_drift = states.iter().map(|c| (hamiltonian_cartesian(c, self.mu) - h0).abs()).fold(0.0, f64::max);
            Trajectory { times, states, energy_drift }
        });
        Ok((best.0, best.1, trajectory))
    }

    fn return_once(&self, l: f64, action: f64, direction: f64) -> Result<SectionReturn> {
        let c0 = self.cartesian(l, action)?;
        let y0 = to_state(&c0);
        let (t, y, _) = self.to_crossing(y0, direction, false)?;
        let c1 = to_cartesian(&y);
        let d = cartesian_to_delaunay(&c1, self.mu)?;
        let dg = wrap_pi(d.perihelion - self.section.angle());
        if dg.abs() > 1e-8 {
            return Err(Error::Integration(format!("crossing missed the section by {dg:e}")));
        }
        let h0 = hamiltonian_cartesian(&c0, self.mu);
        Ok(SectionReturn {
            l: d.mean_anomaly,
            action: d.action,
            ang_momentum: d.ang_momentum,
            time: t,
            energy_drift: (hamiltonian_cartesian(&c1, self.mu) - h0).abs(),
        })
    }

    /// `T_1` applied `|n|` times; negative `n` applies the inverse map.
    pub fn iterate(&self, l: f64, action: f64, n: i32) -> Result<SectionReturn> {
        let direction = if n >= 0 { 1.0 } else { -1.0 };
        let mut r = SectionReturn { l, action, ang_momentum: f64::NAN, time: 0.0, energy_drift: 0.0 };
        let mut time = 0.0;
        let mut drift: f64 = 0.0;
        for _ in 0..n.unsigned_abs() {
            r = self.return_once(r.l, r.action, direction)?;
            time += r.time;
            drift = drift.max(r.energy_drift);
        }
        r.time = time;
        r.energy_drift = drift;
        Ok(r)
    }

    /// The samples of one return starting from `(l, L)`.
    pub fn trajectory(&self, l: f64, action: f64) -> Result<Trajectory> {
        let y0 = to_state(&self.cartesian(l, action)?);
        let (_, _, traj) = self.to_crossing(y0, 1.0, true)?;
        Ok(traj.expect("trajectory requested"))
    }

    pub fn point(&self, l: f64, action: f64) -> SectionPoint {
        SectionPoint { l, action, energy: self.energy, section: self.section, mu: self.mu }
    }
}

/// First-order prediction of `T_p` in unscaled variables: the twist plus
/// the order-`μ` integrals along the unperturbed orbit through `(l0, L0)`.
pub fn first_order_map(ctx: &ResonanceContext, map: &SectionMap, l0: f64, action: f64) -> Result<(f64, f64)> {
    let ang = map.solve_ang_momentum(l0, action)?;
    let rate = 1.0 / action.powi(3);
    let period = ctx.period();
    let g0 = ctx.section.angle();
    let gmu = ctx.options.geometry_mu;
    let integrand = |t: f64| -> Result<[f64; 4]> {
        let d = omega_partials_raw(action, l0 + rate * t, ang, g0 - t, gmu)?;
        Ok([d.d_l, d.d_action, d.d_ang, (period - t) * d.d_l])
    };
    let tol = Tolerance::absolute(1e-13);
    let [i_l, i_action, i_ang, i_weighted] =
        gauss_kronrod_vec(integrand, 0.0, period, 8 * ctx.p as usize, tol)?.value;
    let mu = map.mu;
    let l1 = l0 + period * rate + mu * (-rate * i_ang - i_action - 3.0 / action.powi(4) * i_weighted);
    Ok((l1, action + mu * i_l))
}

/// Measured remainders of the two perturbative maps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorScan {
    pub mus: Vec<f64>,
    /// Max-norm of numeric `T_p` minus the unscaled first-order map.
    pub first_order: Vec<f64>,
    /// Max-norm residual of the scaled map in `(l, λ)`.
    pub scaled: Vec<f64>,
    pub first_order_exponent: f64,
    pub scaled_exponent: f64,
    pub max_energy_drift: f64,
}

/// Least-squares slope of `log y` against `log x`.
pub fn fit_exponent(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Compares numeric `T_p` with both truncated maps at the given section
/// points `(l0, λ0)`, where `L0 = L* + λ0 μ^{1/2}` for the scaled map and
/// `L0 = L*` for the unscaled one.
pub fn perturbative_error_scan(
    funcs: &ResonanceFunctions,
    points: &[(f64, f64)],
    mus: &[f64],
    config: IntegratorConfig,
) -> Result<ErrorScan> {
    let ctx = &funcs.context;
    let p = ctx.p as i32;
    let lstar = ctx.lstar();
    let mut first_order = Vec::new();
    let mut scaled = Vec::new();
    let mut max_energy_drift: f64 = 0.0;
    for &mu in mus {
        let map = SectionMap::new(ctx, mu)?.with_config(config);
        let s = mu.sqrt();
        let mut e1: f64 = 0.0;
        let mut e2: f64 = 0.0;
        for &(l0, lambda0) in points {
            let num = map.iterate(l0, lstar, p)?;
            let (l1, big_l1) = first_order_map(ctx, &map, l0, lstar)?;
            e1 = e1.max(wrap_pi(num.l - l1).abs()).max((num.action - big_l1).abs());
            max_energy_drift = max_energy_drift.max(num.energy_drift);

            let num = map.iterate(l0, lstar + lambda0 * s, p)?;
            let (l1, lambda1) = funcs.apply_scaled_map(mu, l0, lambda0);
            let num_lambda = (num.action - lstar) / s;
            e2 = e2.max(wrap_pi(num.l - l1).abs()).max((num_lambda - lambda1).abs());
        }
        first_order.push(e1);
        scaled.push(e2);
    }
    Ok(ErrorScan {
        first_order_exponent: fit_exponent(mus, &first_order),
        scaled_exponent: fit_exponent(mus, &scaled),
        mus: mus.to_vec(),
        first_order,
        scaled,
        max_energy_drift,
    })
}

/// A fixed point of the numeric `T_p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NumericFixedPoint {
    pub l: f64,
    pub action: f64,
    pub jacobian: [[f64; 2]; 2],
    pub linearization: Linearization,
}

/// `T_p` as a map of `(l, L)` with `l` unreduced differences.
fn residual(map: &SectionMap, p: i32, l: f64, action: f64) -> Result<[f64; 2]> {
    let r = map.iterate(l, action, p)?;
    Ok([wrap_pi(r.l - l), r.action - action])
}

fn fd_jacobian(map: &SectionMap, p: i32, l: f64, action: f64, h: f64) -> Result<[[f64; 2]; 2]> {
    let a = map.iterate(l + h, action, p)?;
    let b = map.iterate(l - h, action, p)?;
    let c = map.iterate(l, action + h, p)?;
    let d = map.iterate(l, action - h, p)?;
    Ok([
        [wrap_pi(a.l - b.l) / (2.0 * h), wrap_pi(c.l - d.l) / (2.0 * h)],
        [(a.action - b.action) / (2.0 * h), (c.action - d.action) / (2.0 * h)],
    ])
}

/// Newton's method for a fixed point of `T_p`, started at `(l, L)`.
pub fn numeric_fixed_point(map: &SectionMap, p: u32, l: f64, action: f64) -> Result<NumericFixedPoint> {
    let fp = fixed_point_of(map, p as i32, l, action)?;
    Ok(NumericFixedPoint { l: fp.l.rem_euclid(TAU), ..fp })
}

/// Fixed point of `T_1^steps` near `l` (not reduced); negative `steps`
/// iterate the inverse map.
fn fixed_point_of(map: &SectionMap, p: i32, l: f64, action: f64) -> Result<NumericFixedPoint> {
    let (mut l, mut action) = (l, action);
    let h = 1e-7;
    let mut res = residual(map, p, l, action)?;
    // The action residual is amplified by the weak coupling `∂L'/∂l`, so a
    // couple of Newton steps are taken past the residual test.
    let mut polish = 2;
    let norm = |r: [f64; 2]| r[0].abs().max(r[1].abs());
    let mut best = (l, action, norm(res));
    let finish = |l: f64, action: f64| -> Result<NumericFixedPoint> {
        let jac = fd_jacobian(map, p, l, action, 1e-6)?;
        Ok(NumericFixedPoint { l, action, jacobian: jac, linearization: Linearization::of(jac) })
    };
    for _ in 0..30 {
        let small = norm(res) < 1e-12;
        if small && polish == 0 {
            return finish(l, action);
        }
        if small {
            polish -= 1;
        }
        let j = fd_jacobian(map, p, l, action, h)?;
        let a = [[j[0][0] - 1.0, j[0][1]], [j[1][0], j[1][1] - 1.0]];
        let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        if det == 0.0 || !det.is_finite() {
            break;
        }
        l -= (a[1][1] * res[0] - a[0][1] * res[1]) / det;
        action -= (-a[1][0] * res[0] + a[0][0] * res[1]) / det;
        res = residual(map, p, l, action)?;
        if norm(res) < best.2 {
            best = (l, action, norm(res));
        }
    }
    // Near the edge of the chart the integration noise can sit just above
    // the target; a stalled iteration at that level is still a fixed point.
    if best.2 < STALLED_RESIDUAL {
        return finish(best.0, best.1);
    }
    Err(Error::NoConvergence { what: "numeric fixed point", iterations: 30, residual: best.2 })
}

const STALLED_RESIDUAL: f64 = 1e-10;

const FOLD_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Stable,
    Unstable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ManifoldOptions {
    /// Seeds spread over one fundamental domain.
    pub seeds: usize,
    /// Distance of the first seed from the fixed point, in units of
    /// `μ^{1/2}` along `l`.
    pub seed_distance: f64,
    pub max_iterations: usize,
}

impl Default for ManifoldOptions {
    fn default() -> Self {
        Self { seeds: 32, seed_distance: 1e-6, max_iterations: 200_000 }
    }
}

/// A branch of an invariant manifold as a graph over `l`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifoldArc {
    pub fixed_point: NumericFixedPoint,
    pub branch: Branch,
    /// `+1` if the arc leaves the fixed point towards larger `l`.
    pub side: i32,
    /// `(l - l_fixed, L)` sorted by the offset, which is not reduced mod `2π`.
    pub points: Vec<(f64, f64)>,
}

impl ManifoldArc {
    /// Linear interpolation of `L` at offset `x` from the fixed point.
    pub fn action_at(&self, x: f64) -> Option<f64> {
        let i = self.points.partition_point(|&(o, _)| o < x);
        if i == 0 || i == self.points.len() {
            return None;
        }
        let (x0, y0) = self.points[i - 1];
        let (x1, y1) = self.points[i];
        Some(y0 + (y1 - y0) * (x - x0) / (x1 - x0))
    }

    /// Cubic (Lagrange, four nearest points) interpolation of `L` at offset
    /// `x`.
    pub fn action_at_cubic(&self, x: f64) -> Option<f64> {
        let n = self.points.len();
        let i = self.points.partition_point(|&(o, _)| o < x);
        if i < 2 || i + 1 >= n {
            return self.action_at(x);
        }
        let idx = [i - 2, i - 1, i, i + 1];
        let mut sum = 0.0;
        for &a in &idx {
            let mut w = 1.0;
            for &b in &idx {
                if a != b {
                    w *= (x - self.points[b].0) / (self.points[a].0 - self.points[b].0);
                }
            }
            sum += w * self.points[a].1;
        }
        Some(sum)
    }
}

#[cfg(feature = "parallel")]
pub(crate) fn par_map<T: Send, R: Send>(items: Vec<T>, f: impl Fn(T) -> R + Sync + Send) -> Vec<R> {
    use rayon::prelude::*;
    items.into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn par_map<T, R>(items: Vec<T>, f: impl Fn(T) -> R) -> Vec<R> {
    items.into_iter().map(f).collect()
}

/// Grows one branch of the stable (iterating `T_p⁻¹`) or unstable
/// (iterating `T_p`) manifold of a numeric fixed point out to `|l - l*| =
/// extent`.
///
/// Seeds are placed along the eigenvector over one fundamental domain and
/// every iterate is kept. A fold is reported when an orbit on the arc moves
/// back towards the fixed point. Comparing points of different orbits is
/// not useful: integration noise along the manifold grows as fast as the
/// distance to the fixed point, so seeds this close drift by a sizeable
/// fraction of their spacing. That noise moves points along the manifold,
/// not off it. Errors transverse to the
/// manifold contract by the square of the multiplier at each step, so the
/// linear seeding does not limit accuracy.
pub fn grow_manifold(
    map: &SectionMap,
    p: u32,
    fp: &NumericFixedPoint,
    branch: Branch,
    side: i32,
    extent: f64,
    opts: &ManifoldOptions,
) -> Result<ManifoldArc> {
    if !matches!(fp.linearization, Linearization::Saddle { .. }) {
        return Err(Error::InvalidParameter("fixed point is not hyperbolic".into()));
    }
    let steps = match branch {
        Branch::Stable => -(p as i32),
        Branch::Unstable => p as i32,
    };
    // The inverse map is integrated backward and has its own fixed point a
    // rounding error away; seeds must sit on the eigenvector of the map
    // actually iterated.
    let base = fixed_point_of(map, steps, fp.l, fp.action)?;
    let slope = match base.linearization {
        Linearization::Saddle { unstable, unstable_slope, .. } if unstable > 1.0 => unstable_slope,
        _ => return Err(Error::InvalidParameter("manifold needs a positive multiplier off the unit circle".into())),
    };
    let fp = &base;
    let sign = side.signum() as f64;
    let d0 = opts.seed_distance * map.mu.sqrt();
    let p0 = (fp.l + sign * d0, fp.action + sign * d0 * slope);
    let image = map.iterate(p0.0, p0.1, steps)?;
    let p1 = (p0.0 + wrap_pi(image.l - p0.0), image.action);
    if (p1.0 - p0.0) * sign <= 0.0 {
        return Err(Error::Degenerate("first seed did not move away from the fixed point".into()));
    }
    let n = opts.seeds.max(1);
    let seeds: Vec<usize> = (0..n).collect();
    let chains = par_map(seeds, |k| -> Result<Vec<(f64, f64, f64)>> {
        // Seeds on the segment from p0 to its image form a fundamental domain
        // of the numerical map even when the fixed point is slightly off.
        let frac = k as f64 / n as f64;
        let mut l = p0.0 + frac * (p1.0 - p0.0);
        let mut action = p0.1 + frac * (p1.1 - p0.1);
        let mut out = Vec::new();
        let mut last = f64::NEG_INFINITY;
        for it in 0..opts.max_iterations {
            let x = l - fp.l;
            if x * sign > extent {
                return Ok(out);
            }
            if x * sign < -extent {
                break;
            }
            if x * sign < last - FOLD_TOLERANCE {
                return Err(Error::FoldOver { at: l });
            }
            last = x * sign;
            out.push((it as f64 + frac, x, action));
            let r = map.iterate(l, action, steps)?;
            // Keep l continuous along the branch.
            l += wrap_pi(r.l - l);
            action = r.action;
        }
        Err(Error::NoConvergence { what: "manifold growth", iterations: opts.max_iterations, residual: l - fp.l })
    });
    let mut all = Vec::new();
    for c in chains {
        all.extend(c?);
    }
    let mut points: Vec<(f64, f64)> = all.into_iter().map(|(_, x, a)| (x, a)).collect();
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(ManifoldArc { fixed_point: *fp, branch, side, points })
}

/// Largest `|L_arc - L_graph|` over offsets in `[from, to]` (signed by the
/// arc's side), sampled at `n` points.
pub fn graph_deviation(arc: &ManifoldArc, sep: &Separatrix, mu: f64, from: f64, to: f64, n: usize) -> Result<f64> {
    let sign = arc.side.signum() as f64;
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let x = sign * (from + (to - from) * i as f64 / (n - 1).max(1) as f64);
        let numeric = arc
            .action_at_cubic(x)
            .ok_or_else(|| Error::Domain(format!("offset {x} lies outside the grown arc")))?;
        worst = worst.max((numeric - sep.action(arc.fixed_point.l + x, mu)?).abs());
    }
    Ok(worst)
}

/// The stable and unstable arcs evaluated on the symmetry line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HomoclinicCrossing {
    pub estimate: HomoclinicEstimate,
    pub fixed_point: NumericFixedPoint,
    pub stable_action: f64,
    pub unstable_action: f64,
    pub stable_points: usize,
    pub unstable_points: usize,
}

impl HomoclinicCrossing {
    /// `|L - (L* + u μ^{1/2})|` for the stable arc.
    pub fn leading_error(&self) -> f64 {
        (self.stable_action - self.estimate.leading).abs()
    }
}

/// Grows the stable arc of the chosen saddle forward in `l` and the
/// unstable arc of its translate by `2π/p` backward, and reads both off at
/// the symmetry line `l_h`.
pub fn homoclinic_crossing(funcs_zero: &ResonanceFunctions, mu: f64, opts: &ManifoldOptions) -> Result<HomoclinicCrossing> {
    let estimate = homoclinic_estimate(funcs_zero, None, mu)?;
    let ctx = funcs_zero.context.with_section(estimate.section);
    let funcs = if estimate.section == funcs_zero.context.section {
        funcs_zero.clone()
    } else {
        ResonanceFunctions::new(&ctx)?
    };
    let p = ctx.p;
    let guess = funcs.fixed_point(mu, estimate.j)?;
    let map = SectionMap::new(&ctx, mu)?;
    let fp = numeric_fixed_point(&map, p, guess.l, ctx.lstar() + guess.lambda * mu.sqrt())?;
    let half = PI / p as f64;
    let target = wrap_pi(estimate.l_h - fp.l);
    let target = if target < 0.0 { target + TAU } else { target };
    let reach = target + 0.25 * half;
    let stable = grow_manifold(&map, p, &fp, Branch::Stable, 1, reach, opts)?;
    // The saddle one period of `φ` further on carries the unstable branch.
    let shifted = NumericFixedPoint { l: fp.l + 2.0 * half, ..fp };
    let unstable = grow_manifold(&map, p, &shifted, Branch::Unstable, -1, 2.0 * half - target + 0.25 * half, opts)?;
    let missing = || Error::Domain("symmetry line not reached by the grown arcs".into());
    Ok(HomoclinicCrossing {
        estimate,
        fixed_point: fp,
        stable_action: stable.action_at_cubic(target).ok_or_else(missing)?,
        unstable_action: unstable.action_at_cubic(target - 2.0 * half).ok_or_else(missing)?,
        stable_points: stable.points.len(),
        unstable_points: unstable.points.len(),
    })
}
