//! Fourier expansion of the disturbing function over the `(l, g)` torus,
//! Laplace coefficients, and the leading eccentricity coefficient `c*` of
//! the resonant term.
//!
//! `Ω(l, g) = Σ c_{mn} cos(ml + ng)` with `m ≥ 0`. For `m = 0` the terms
//! `n` and `-n` coincide; they are stored at `n > 0` and `c_{0,-n}` is zero.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::dynamics::{fit_exponent, par_map};
use crate::error::{Error, Result};
use crate::kepler::Ellipse;
use crate::perturbation::COLLISION_CUTOFF;
use crate::return_map::ResonanceContext;

const LAPLACE_MAX_TERMS: usize = 200_000;

/// Default side of the `(l, g)` sampling grid.
pub const DEFAULT_GRID: usize = 512;
/// Largest grid tried before giving up on aliasing.
pub const MAX_GRID: usize = 2048;
/// Two grids must agree to this on every tabulated coefficient.
pub const ALIASING_TOL: f64 = 1e-9;

/// `b_n(α)` and its first few α-derivatives, defined by
/// `(1 + α² - 2α cos θ)^{-1/2} = ½ Σ_n b_n(α) e^{inθ}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaplaceSeries {
    pub n: u32,
    pub alpha: f64,
    /// `derivs[r]` is the r-th derivative; `derivs[0]` is `b_n(α)`.
    pub derivs: Vec<f64>,
}

impl LaplaceSeries {
    /// Sums the hypergeometric series
    /// `b_n = 2 (½)_n/n! α^n F(½, n+½; n+1; α²)` and differentiates it
    /// term by term. Every term is positive, so the only error is the tail.
    pub fn new(n: i32, alpha: f64, max_order: u32) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidParameter(format!("laplace coefficient needs 0 < alpha < 1, got {alpha}")));
        }
        let n = n.unsigned_abs();
        let orders = max_order as usize + 1;
        let mut t = 2.0;
        for i in 0..n {
            t *= (0.5 + i as f64) / (i as f64 + 1.0);
        }
        let mut sums = vec![0.0; orders];
        let mut prev = vec![f64::INFINITY; orders];
        for k in 0..LAPLACE_MAX_TERMS {
            let s = (n + 2 * k as u32) as f64;
            let mut done = true;
            for (r, sum) in sums.iter_mut().enumerate() {
                // falling factorial s(s-1)...(s-r+1)
                let ff: f64 = (0..r).map(|i| s - i as f64).product();
                let term = t * ff * alpha.powf(s - r as f64);
                *sum += term;
                let ratio = if prev[r].is_finite() && prev[r] > 0.0 { term / prev[r] } else { f64::INFINITY };
                let tail = if ratio < 1.0 { term * ratio / (1.0 - ratio) } else { f64::INFINITY };
                if !(tail <= 1e-15 * sum.abs()) {
                    done = false;
                }
                prev[r] = term;
            }
            if done && k > 2 {
                return Ok(Self { n, alpha, derivs: sums });
            }
            let kf = k as f64;
            t *= (0.5 + kf) * (0.5 + n as f64 + kf) / ((kf + 1.0) * (n as f64 + 1.0 + kf));
        }
        Err(Error::NoConvergence { what: "laplace series", iterations: LAPLACE_MAX_TERMS, residual: alpha })
    }
}

/// The `deriv_order`-th α-derivative of `b_n(α)`.
pub fn laplace_b(n: i32, alpha: f64, deriv_order: u32) -> Result<f64> {
    Ok(LaplaceSeries::new(n, alpha, deriv_order)?.derivs[deriv_order as usize])
}

/// `b_n(α)` by the trapezoid rule on the generating function, which is
/// spectrally accurate for a smooth periodic integrand.
pub fn laplace_b_quadrature(n: i32, alpha: f64, samples: usize) -> f64 {
    let h = TAU / samples as f64;
    let sum: f64 = (0..samples)
        .map(|j| {
            let th = j as f64 * h;
            (n as f64 * th).cos() / (1.0 + alpha * alpha - 2.0 * alpha * th.cos()).sqrt()
        })
        .sum();
    sum * h / PI
}

/// Tabulated `c_{mn}` for `0 ≤ m ≤ mmax`, `|n| ≤ nmax` at `(L*, G*)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierTable {
    pub ctx: ResonanceContext,
    pub mmax: usize,
    pub nmax: usize,
    /// Side of the sampling grid that passed the aliasing check.
    pub grid: usize,
    c: Vec<f64>,
}

fn fft_2d(samples: &mut [Complex64], n: usize) {
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n);
    fft.process(samples);
    let mut col = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..n {
        for j in 0..n {
            col[j] = samples[j * n + k];
        }
        fft.process(&mut col);
        for j in 0..n {
            samples[j * n + k] = col[j];
        }
    }
}

// Rows are l, columns g. Returns c_{mn} laid out like `FourierTable::c`.
fn coefficients(samples: &mut [Complex64], grid: usize, mmax: usize, nmax: usize) -> Vec<Complex64> {
    fft_2d(samples, grid);
    let norm = (grid * grid) as f64;
    let width = 2 * nmax + 1;
    let mut out = vec![Complex64::new(0.0, 0.0); (mmax + 1) * width];
    for m in 0..=mmax {
        for n in -(nmax as i64)..=nmax as i64 {
            let col = n.rem_euclid(grid as i64) as usize;
            let f = samples[m * grid + col] / norm;
            let c = match (m, n) {
                (0, 0) => f,
                (0, n) if n < 0 => Complex64::new(0.0, 0.0),
                _ => 2.0 * f,
            };
            out[m * width + (n + nmax as i64) as usize] = c;
        }
    }
    out
}

fn real_samples(ctx: &ResonanceContext, grid: usize) -> Result<Vec<Complex64>> {
    let (big_l, big_g, gmu) = (ctx.lstar(), ctx.gstar(), ctx.options.geometry_mu);
    let rows = par_map((0..grid).collect(), |j| -> Result<Vec<Complex64>> {
        let l = TAU * j as f64 / grid as f64;
        let el = Ellipse::new(big_l, l, big_g, 0.0, gmu)?;
        (0..grid)
            .map(|k| {
                let (s, c) = (TAU * k as f64 / grid as f64).sin_cos();
                let x = el.x * c - el.y * s;
                let y = el.x * s + el.y * c;
                let dist = (x - 1.0).hypot(y);
                if dist < COLLISION_CUTOFF {
                    return Err(Error::Collision { distance: dist });
                }
                Ok(Complex64::new(1.0 / dist - x - 1.0 / (big_l * big_l), 0.0))
            })
            .collect()
    });
    let mut out = Vec::with_capacity(grid * grid);
    for row in rows {
        out.extend(row?);
    }
    Ok(out)
}

impl FourierTable {
    /// Samples `Ω` on a `DEFAULT_GRID²` grid and doubles the grid until
    /// every tabulated coefficient is stable to `ALIASING_TOL`.
    pub fn new(ctx: &ResonanceContext, mmax: usize, nmax: usize) -> Result<Self> {
        Self::with_grid(ctx, mmax, nmax, DEFAULT_GRID)
    }

    pub fn with_grid(ctx: &ResonanceContext, mmax: usize, nmax: usize, grid: usize) -> Result<Self> {
        let mut grid = grid.max(2 * mmax.max(nmax) + 2).next_power_of_two();
        let mut prev = Self::at_grid(ctx, mmax, nmax, grid)?;
        loop {
            if 2 * grid > MAX_GRID {
                return Err(Error::NoConvergence {
                    what: "fourier aliasing check",
                    iterations: grid,
                    residual: f64::NAN,
                });
            }
            let next = Self::at_grid(ctx, mmax, nmax, 2 * grid)?;
            let diff = prev.c.iter().zip(&next.c).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            if diff <= ALIASING_TOL {
                return Ok(prev);
            }
            prev = next;
            grid *= 2;
        }
    }

    /// One transform with no aliasing check.
    pub fn at_grid(ctx: &ResonanceContext, mmax: usize, nmax: usize, grid: usize) -> Result<Self> {
        if grid < 2 * mmax.max(nmax) + 2 {
            return Err(Error::InvalidParameter(format!("grid {grid} too small for orders {mmax}, {nmax}")));
        }
        let mut samples = real_samples(ctx, grid)?;
        let c = coefficients(&mut samples, grid, mmax, nmax).into_iter().map(|z| z.re).collect();
        Ok(Self { ctx: *ctx, mmax, nmax, grid, c })
    }

    /// `c_{mn}`, zero outside the table.
    pub fn get(&self, m: usize, n: i64) -> f64 {
        if m > self.mmax || n.unsigned_abs() as usize > self.nmax {
            return 0.0;
        }
        self.c[m * (2 * self.nmax + 1) + (n + self.nmax as i64) as usize]
    }

    /// The table cut down to smaller orders.
    pub fn truncated(&self, mmax: usize, nmax: usize) -> Self {
        let (mmax, nmax) = (mmax.min(self.mmax), nmax.min(self.nmax));
        let mut c = Vec::with_capacity((mmax + 1) * (2 * nmax + 1));
        for m in 0..=mmax {
            for n in -(nmax as i64)..=nmax as i64 {
                c.push(self.get(m, n));
            }
        }
        Self { ctx: self.ctx, mmax, nmax, grid: self.grid, c }
    }

    /// The truncated sum at `(l, g)`.
    pub fn evaluate(&self, l: f64, g: f64) -> f64 {
        self.entries().map(|(m, n, c)| c * (m as f64 * l + n as f64 * g).cos()).sum()
    }

    /// `(m, n, c_{mn})` in table order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, i64, f64)> + '_ {
        let width = 2 * self.nmax + 1;
        self.c.iter().enumerate().map(move |(i, &c)| (i / width, (i % width) as i64 - self.nmax as i64, c))
    }

    /// Max-norm difference between the truncated sum and `Ω` on a
    /// `samples²` grid offset from the FFT nodes.
    pub fn reconstruction_error(&self, samples: usize) -> Result<f64> {
        let ctx = &self.ctx;
        let (big_l, big_g, gmu) = (ctx.lstar(), ctx.gstar(), ctx.options.geometry_mu);
        let mut worst: f64 = 0.0;
        for j in 0..samples {
            let l = TAU * (j as f64 + 0.37) / samples as f64;
            for k in 0..samples {
                let g = TAU * (k as f64 + 0.61) / samples as f64;
                let exact = crate::perturbation::omega_raw(big_l, l, big_g, g, gmu)?;
                worst = worst.max((exact - self.evaluate(l, g)).abs());
            }
        }
        Ok(worst)
    }

    /// `m,n,c` rows with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("m,n,c\n");
        for (m, n, c) in self.entries() {
            out.push_str(&format!("{m},{n},{c:.17e}\n"));
        }
        out
    }

    /// `φ(l0)` from the resonant coefficients,
    /// `-2πp² Σ_{k≥1} k c_{kp,kq} sin(kp l0 + kq g0)`, using every resonant
    /// term in the table.
    pub fn phi(&self, l0: f64) -> f64 {
        let (p, q) = (self.ctx.p as usize, self.ctx.q as usize);
        let g0 = self.ctx.section.angle();
        let mut sum = 0.0;
        let mut k = 1;
        while k * p <= self.mmax && k * q <= self.nmax {
            let c = self.get(k * p, (k * q) as i64);
            sum += k as f64 * c * ((k * p) as f64 * l0 + (k * q) as f64 * g0).sin();
            k += 1;
        }
        -TAU * (p * p) as f64 * sum
    }
}

/// A single coefficient `c_{mn}` at the context's `(L*, G*)`.
pub fn fourier_c(ctx: &ResonanceContext, m: usize, n: i64) -> Result<f64> {
    let nmax = n.unsigned_abs() as usize;
    Ok(FourierTable::new(ctx, m, nmax)?.get(m, n))
}

/// `Ω` with a complex eccentricity, the analytic continuation of the real
/// function. Only used on small circles around `e = 0`.
fn omega_complex(big_l: f64, gmu: f64, e: Complex64, l: f64, g: f64) -> Result<Complex64> {
    let a = big_l * big_l / (1.0 - gmu);
    let mut ea = Complex64::new(l, 0.0) + e * l.sin();
    for _ in 0..60 {
        let f = ea - e * ea.sin() - l;
        let step = f / (1.0 - e * ea.cos());
        ea -= step;
        if step.norm() < 1e-15 {
            let xi = a * (ea.cos() - e);
            let zeta = a * (1.0 - e * e).sqrt() * ea.sin();
            let (s, c) = g.sin_cos();
            let x = xi * c - zeta * s;
            let y = xi * s + zeta * c;
            let d2 = (x - 1.0) * (x - 1.0) + y * y;
            return Ok(1.0 / d2.sqrt() - x - 1.0 / (big_l * big_l));
        }
    }
    Err(Error::NoConvergence { what: "complex kepler solver", iterations: 60, residual: e.norm() })
}

/// Taylor coefficients in `e` of every `c_{mn}` with `m ≤ mmax`,
/// `|n| ≤ nmax`, at fixed `L`, from Cauchy's formula on the circle
/// `|e| = radius`.
///
/// Working with Taylor coefficients sidesteps cancellation: `c_{mn}` itself
/// is of size `e^{|m-n|}` and is lost below double precision long before
/// `e = 10⁻³`, but the coefficient of `e^{|m-n|}` is of order one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EccentricitySeries {
    pub action: f64,
    pub radius: f64,
    pub mmax: usize,
    pub nmax: usize,
    /// `coeffs[(m, n)][k]` flattened as in [`FourierTable`].
    coeffs: Vec<Vec<f64>>,
    /// Rounding level of the k-th coefficient, `64 ε max|Ω| / radius^k`.
    pub noise: Vec<f64>,
}

impl EccentricitySeries {
    /// `order` Taylor coefficients from `2·order` points on the circle and a
    /// `grid²` FFT at each.
    pub fn new(action: f64, geometry_mu: f64, mmax: usize, nmax: usize, radius: f64, order: usize, grid: usize) -> Result<Self> {
        let points = 2 * order;
        let width = 2 * nmax + 1;
        let per_point = par_map((0..points).collect(), |j| -> Result<(Vec<Complex64>, f64)> {
            let e = Complex64::from_polar(radius, TAU * j as f64 / points as f64);
            let mut samples = Vec::with_capacity(grid * grid);
            let mut peak: f64 = 0.0;
            for r in 0..grid {
                let l = TAU * r as f64 / grid as f64;
                for k in 0..grid {
                    let w = omega_complex(action, geometry_mu, e, l, TAU * k as f64 / grid as f64)?;
                    peak = peak.max(w.norm());
                    samples.push(w);
                }
            }
            Ok((coefficients(&mut samples, grid, mmax, nmax), peak))
        });
        let mut values = Vec::with_capacity(points);
        let mut peak: f64 = 0.0;
        for r in per_point {
            let (v, pk) = r?;
            peak = peak.max(pk);
            values.push(v);
        }
        let mut coeffs = vec![vec![0.0; order]; (mmax + 1) * width];
        for (idx, series) in coeffs.iter_mut().enumerate() {
            for (k, a) in series.iter_mut().enumerate() {
                let sum: Complex64 = values
                    .iter()
                    .enumerate()
                    .map(|(j, v)| v[idx] * Complex64::from_polar(1.0, -TAU * (j * k) as f64 / points as f64))
                    .sum();
                *a = sum.re / points as f64 / radius.powi(k as i32);
            }
        }
        let noise = (0..order).map(|k| 64.0 * f64::EPSILON * peak / radius.powi(k as i32)).collect();
        Ok(Self { action, radius, mmax, nmax, coeffs, noise })
    }

    pub fn coefficients(&self, m: usize, n: i64) -> &[f64] {
        &self.coeffs[m * (2 * self.nmax + 1) + (n + self.nmax as i64) as usize]
    }

    /// Lowest power of `e` whose coefficient stands clear of rounding.
    pub fn leading_power(&self, m: usize, n: i64) -> Option<usize> {
        self.coefficients(m, n).iter().zip(&self.noise).position(|(a, eps)| a.abs() > *eps)
    }

    /// Largest `|a_k| / noise_k` over powers below `below`; values under one
    /// mean the coefficients are zero to rounding.
    pub fn max_noise_ratio(&self, m: usize, n: i64, below: usize) -> f64 {
        self.coefficients(m, n).iter().zip(&self.noise).take(below).map(|(a, eps)| a.abs() / eps).fold(0.0, f64::max)
    }

    /// `c_{mn}(e)` summed from the coefficients that clear rounding, for
    /// `|e|` well inside the circle.
    pub fn value(&self, m: usize, n: i64, e: f64) -> f64 {
        self.coefficients(m, n)
            .iter()
            .zip(&self.noise)
            .enumerate()
            .filter(|(_, (a, eps))| a.abs() > **eps)
            .map(|(k, (a, _))| a * e.powi(k as i32))
            .sum()
    }

    /// Least-squares slope of `log|c_{mn}|` against `log e` over the points.
    pub fn exponent(&self, m: usize, n: i64, es: &[f64]) -> f64 {
        let ys: Vec<f64> = es.iter().map(|&e| self.value(m, n, e).abs()).collect();
        fit_exponent(es, &ys)
    }
}

/// Eccentricities log-spaced over `[1e-3, 1e-2]`.
pub fn small_eccentricities(count: usize) -> Vec<f64> {
    (0..count).map(|i| 1e-3 * 10f64.powf(i as f64 / (count - 1) as f64)).collect()
}

/// How one coefficient scales with `e` near zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub m: usize,
    pub n: i64,
    /// `|m - n|`
    pub expected: usize,
    pub leading_power: Option<usize>,
    /// Log-log slope over `[1e-3, 1e-2]`.
    pub exponent: f64,
    /// Largest `|a_k| / noise_k` below the expected power.
    pub noise_ratio: f64,
}

/// Eccentricity scaling of every `c_{mn}` with `m ≤ mmax`, `|n| ≤ nmax`
/// at the `p:q` resonant action.
pub fn eccentricity_scaling(p: u32, q: u32, mmax: usize, nmax: usize) -> Result<Vec<ScalingRow>> {
    let action = (p as f64 / q as f64).cbrt();
    let order = mmax + nmax + 14;
    let series = EccentricitySeries::new(action, 0.0, mmax, nmax, limit_radius(p, q), order, 128)?;
    let es = small_eccentricities(9);
    let mut rows = Vec::new();
    for m in 0..=mmax {
        for n in -(nmax as i64)..=nmax as i64 {
            if m == 0 && n < 0 {
                continue;
            }
            let expected = (m as i64 - n).unsigned_abs() as usize;
            rows.push(ScalingRow {
                m,
                n,
                expected,
                leading_power: series.leading_power(m, n),
                exponent: series.exponent(m, n, &es),
                noise_ratio: series.max_noise_ratio(m, n, expected),
            });
        }
    }
    Ok(rows)
}

/// Closed form of `c*(p, q)` for `p < q`:
/// `-(-1)^{q-p} q^{2/3} / (6·2^{q-p} π p^{8/3}) Σ_k binom(D+q, k) p^{q-p-k}/(q-p-k)! (α b_q(α))`
/// at `α = (p/q)^{1/3}`, with `D = α d/dα` and `binom(D+q, k)` the falling
/// factorial polynomial in `D`. Each power of `D` is expanded into plain
/// derivatives with Stirling numbers of the second kind.
pub fn c_star_closed_form(p: u32, q: u32) -> Result<f64> {
    c_star_closed_form_at(p, q, (p as f64 / q as f64).cbrt())
}

pub fn c_star_closed_form_at(p: u32, q: u32, alpha: f64) -> Result<f64> {
    if p >= q {
        return Err(Error::InvalidParameter(format!("closed form needs p < q, got {p}:{q}")));
    }
    let d = (q - p) as usize;
    let b = LaplaceSeries::new(q as i32, alpha, d as u32)?.derivs;
    // f = α b_q, f^{(i)} = α b^{(i)} + i b^{(i-1)}
    let f_deriv = |i: usize| alpha * b[i] + if i > 0 { i as f64 * b[i - 1] } else { 0.0 };
    let d_power = |j: usize| -> f64 { (0..=j).map(|i| stirling2(j, i) * alpha.powi(i as i32) * f_deriv(i)).sum() };
    let mut total = 0.0;
    for k in 0..=d {
        let poly = falling_binomial_poly(q as f64, k);
        let applied: f64 = poly.iter().enumerate().map(|(j, c)| c * d_power(j)).sum();
        total += applied * (p as f64).powi((d - k) as i32) / factorial(d - k);
    }
    let sign = if d % 2 == 0 { 1.0 } else { -1.0 };
    let pre = -sign * (q as f64).powf(2.0 / 3.0) / (6.0 * 2f64.powi(d as i32) * PI * (p as f64).powf(8.0 / 3.0));
    Ok(pre * total)
}

/// The same closed form, applying `binom(D+q, k)` to each monomial
/// `α^s` of the series for `α b_q` as the number `binom(s+q, k)`.
pub fn c_star_closed_form_termwise(p: u32, q: u32) -> Result<f64> {
    if p >= q {
        return Err(Error::InvalidParameter(format!("closed form needs p < q, got {p}:{q}")));
    }
    let d = (q - p) as usize;
    let alpha = (p as f64 / q as f64).cbrt();
    let weight = |s: f64| -> f64 {
        (0..=d)
            .map(|k| {
                let binom: f64 = (0..k).map(|i| (s + q as f64 - i as f64) / (i + 1) as f64).product();
                binom * (p as f64).powi((d - k) as i32) / factorial(d - k)
            })
            .sum()
    };
    let mut t = 2.0;
    for i in 0..q {
        t *= (0.5 + i as f64) / (i as f64 + 1.0);
    }
    let mut total = 0.0;
    for k in 0..LAPLACE_MAX_TERMS {
        let s = (q as usize + 2 * k + 1) as f64;
        let term = t * alpha.powf(s) * weight(s);
        total += term;
        if term.abs() < 1e-17 * total.abs() && k > 10 {
            let sign = if d % 2 == 0 { 1.0 } else { -1.0 };
            let pre = -sign * (q as f64).powf(2.0 / 3.0) / (6.0 * 2f64.powi(d as i32) * PI * (p as f64).powf(8.0 / 3.0));
            return Ok(pre * total);
        }
        let kf = k as f64;
        t *= (0.5 + kf) * (0.5 + q as f64 + kf) / ((kf + 1.0) * (q as f64 + 1.0 + kf));
    }
    Err(Error::NoConvergence { what: "closed form series", iterations: LAPLACE_MAX_TERMS, residual: alpha })
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

fn stirling2(n: usize, k: usize) -> f64 {
    let mut row = vec![0.0; n + 1];
    row[0] = 1.0;
    for i in 1..=n {
        for j in (1..=i).rev() {
            row[j] = j as f64 * row[j] + row[j - 1];
        }
        row[0] = 0.0;
    }
    if k <= n { row[k] } else { 0.0 }
}

// Coefficients in D of (D+q)(D+q-1)...(D+q-k+1)/k!.
fn falling_binomial_poly(q: f64, k: usize) -> Vec<f64> {
    let mut poly = vec![1.0];
    for i in 0..k {
        let shift = q - i as f64;
        let mut next = vec![0.0; poly.len() + 1];
        for (j, c) in poly.iter().enumerate() {
            next[j] += c * shift;
            next[j + 1] += c;
        }
        poly = next;
    }
    let kf = factorial(k);
    poly.iter().map(|c| c / kf).collect()
}

/// `lim_{e→0} c_{p,q}(e) / e^{|p-q|}`, read off as a Taylor coefficient.
pub fn c_star_limit(p: u32, q: u32, geometry_mu: f64) -> Result<f64> {
    let d = p.abs_diff(q) as usize;
    let action = (p as f64 / q as f64).cbrt();
    let radius = limit_radius(p, q);
    let series = EccentricitySeries::new(action, geometry_mu, p as usize, q as usize, radius, d + 12, 128)?;
    Ok(series.coefficients(p as usize, q as i64)[d])
}

// Keeps the complex orbit well clear of the planet's circle.
fn limit_radius(p: u32, q: u32) -> f64 {
    let a = (p as f64 / q as f64).powf(2.0 / 3.0);
    (0.25 * (1.0 - a).abs() / a.max(1.0)).min(0.2)
}

/// The closed form rescaled to the normalisation of `c_{p,q}`: evaluated at
/// the semi-major axis ratio `α = (p/q)^{2/3}` and multiplied by `-6πp²`.
///
/// With these two changes the displayed operator formula reproduces the
/// numeric limit for every `p < q` tried. As displayed, with
/// `α = (p/q)^{1/3}`, it does not.
pub fn c_star_reconciled(p: u32, q: u32) -> Result<f64> {
    let alpha = (p as f64 / q as f64).powf(2.0 / 3.0);
    Ok(-6.0 * PI * (p * p) as f64 * c_star_closed_form_at(p, q, alpha)?)
}

/// Every route to `c*(p, q)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CStar {
    pub p: u32,
    pub q: u32,
    /// `lim c_{p,q}/e^{|p-q|}`; the reference value.
    pub numeric_limit: f64,
    /// The displayed formula taken literally; only for `p < q`.
    pub closed_form: Option<f64>,
    pub closed_form_mismatch: Option<f64>,
    pub reconciled: Option<f64>,
    pub reconciled_mismatch: Option<f64>,
}

impl CStar {
    pub fn value(&self) -> f64 {
        self.numeric_limit
    }

    /// Whether the literal closed form matches the numeric limit.
    pub fn closed_form_agrees(&self, tol: f64) -> Option<bool> {
        self.closed_form_mismatch.map(|r| r <= tol)
    }
}

pub fn c_star(p: u32, q: u32) -> Result<CStar> {
    let numeric_limit = c_star_limit(p, q, 0.0)?;
    let rel = |v: f64| ((v - numeric_limit) / numeric_limit).abs();
    let (closed_form, reconciled) = if p < q {
        (Some(c_star_closed_form(p, q)?), Some(c_star_reconciled(p, q)?))
    } else {
        (None, None)
    };
    Ok(CStar {
        p,
        q,
        numeric_limit,
        closed_form,
        closed_form_mismatch: closed_form.map(rel),
        reconciled,
        reconciled_mismatch: reconciled.map(rel),
    })
}

/// Extrapolates `φ(l0) / (2πp² sin(p l0) e^{|p-q|})` to `e = 0` from `e`,
/// `e/2` and `e/4` with a quadratic in `e`.
///
/// The limit is `-c*` when `sin(p l0 + q g0) = sin(p l0)` and `+c*`
/// otherwise.
pub fn phi_ratio_limit(ctx: &ResonanceContext, l0: f64) -> Result<f64> {
    let d = ctx.p.abs_diff(ctx.q) as i32;
    let mut r = [0.0; 3];
    for (i, v) in r.iter_mut().enumerate() {
        let e = ctx.e / f64::from(1u32 << i);
        let c = ResonanceContext::with_options(ctx.p, ctx.q, e, ctx.section, ctx.options)?;
        *v = c.phi(l0)? / (TAU * (c.p * c.p) as f64 * (c.p as f64 * l0).sin() * e.powi(d));
    }
    // Neville at h = 1, 1/2, 1/4 evaluated at 0
    let r01 = 2.0 * r[1] - r[0];
    let r12 = 2.0 * r[2] - r[1];
    Ok((4.0 * r12 - r01) / 3.0)
}
