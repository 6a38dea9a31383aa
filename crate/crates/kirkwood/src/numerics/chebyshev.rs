//! Chebyshev interpolants on Chebyshev–Lobatto points.

use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Chebyshev {
    a: f64,
    b: f64,
    coeffs: Vec<f64>,
}

impl Chebyshev {
    /// The `n` Lobatto points `cos(πj/(n-1))` mapped to `[a, b]`, in
    /// decreasing order.
    pub fn nodes(a: f64, b: f64, n: usize) -> Vec<f64> {
        assert!(n >= 2, "need at least two nodes");
        let m = (n - 1) as f64;
        (0..n)
            .map(|j| 0.5 * (a + b) + 0.5 * (b - a) * (PI * j as f64 / m).cos())
            .collect()
    }

    /// Builds the interpolant from samples at [`Chebyshev::nodes`].
    pub fn from_values(a: f64, b: f64, values: &[f64]) -> Self {
        let n = values.len();
        assert!(n >= 2, "need at least two nodes");
        let m = n - 1;
        let period = 2 * m;
        let table: Vec<f64> = (0..period).map(|i| (PI * i as f64 / m as f64).cos()).collect();
        let mut coeffs = vec![0.0; n];
        for (k, c) in coeffs.iter_mut().enumerate() {
            let mut sum = 0.5 * (values[0] + values[m] * table[(m * k) % period]);
            for (j, v) in values.iter().enumerate().take(m).skip(1) {
                sum += v * table[(j * k) % period];
            }
            *c = 2.0 * sum / m as f64;
        }
        coeffs[0] *= 0.5;
        coeffs[m] *= 0.5;
        Self { a, b, coeffs }
    }

    pub fn fit<F>(mut f: F, a: f64, b: f64, n: usize) -> Result<Self>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        if !(b > a) {
            return Err(Error::InvalidParameter(format!("empty interval [{a}, {b}]")));
        }
        let values = Self::nodes(a, b, n).into_iter().map(&mut f).collect::<Result<Vec<_>>>()?;
        Ok(Self::from_values(a, b, &values))
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Clenshaw evaluation. Points outside the domain are extrapolated.
    pub fn eval(&self, x: f64) -> f64 {
        let t = (2.0 * x - self.a - self.b) / (self.b - self.a);
        let (mut b1, mut b2) = (0.0, 0.0);
        for &c in self.coeffs.iter().skip(1).rev() {
            let b0 = 2.0 * t * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        t * b1 - b2 + self.coeffs[0]
    }

    pub fn derivative(&self) -> Self {
        let n = self.coeffs.len();
        let mut d = vec![0.0; n.max(2)];
        for k in (1..n).rev() {
            let next = if k + 1 < n { d[k + 1] } else { 0.0 };
            d[k - 1] = next + 2.0 * k as f64 * self.coeffs[k];
        }
        d[0] *= 0.5;
        let scale = 2.0 / (self.b - self.a);
        d.truncate(n.saturating_sub(1).max(1));
        for v in &mut d {
            *v *= scale;
        }
        Self { a: self.a, b: self.b, coeffs: d }
    }

    /// Largest coefficient magnitude among the last eighth of the series,
    /// relative to the largest coefficient overall. A cheap convergence gauge.
    pub fn relative_tail(&self) -> f64 {
        let n = self.coeffs.len();
        let head = self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        let tail = self.coeffs[n - (n / 8).max(1)..].iter().fold(0.0f64, |m, c| m.max(c.abs()));
        if head == 0.0 { 0.0 } else { tail / head }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::TAU;

    #[test]
    fn reproduces_polynomials() {
        let p = |x: f64| 3.0 - 2.0 * x + 0.5 * x.powi(3) - x.powi(6);
        let c = Chebyshev::fit(|x| Ok(p(x)), -2.0, 3.0, 9).unwrap();
        for i in 0..50 {
            let x = -2.0 + 5.0 * i as f64 / 49.0;
            assert!((c.eval(x) - p(x)).abs() < 1e-10 * p(x).abs().max(1.0));
        }
        assert!(c.coeffs()[7].abs() < 1e-12 && c.coeffs()[8].abs() < 1e-12);
    }

    #[test]
    fn derivative_of_exp() {
        let c = Chebyshev::fit(|x| Ok(x.exp()), 0.0, 2.0, 30).unwrap();
        let d = c.derivative();
        let dd = d.derivative();
        for i in 0..20 {
            let x = 0.1 * i as f64;
            assert!((d.eval(x) - x.exp()).abs() < 1e-11);
            assert!((dd.eval(x) - x.exp()).abs() < 1e-9);
        }
    }

    proptest! {
        #[test]
        fn periodic_trig_interpolation(k in 1u32..8, x in 0.0f64..TAU) {
            let kf = k as f64;
            let c = Chebyshev::fit(|t| Ok((kf * t).sin()), 0.0, std::f64::consts::TAU, 129).unwrap();
            prop_assert!((c.eval(x) - (kf * x).sin()).abs() < 1e-12);
            prop_assert!((c.derivative().eval(x) - kf * (kf * x).cos()).abs() < 1e-9);
        }
    }
}
