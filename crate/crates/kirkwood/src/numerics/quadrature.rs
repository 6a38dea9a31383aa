//! Globally adaptive Gauss–Kronrod (7/15) quadrature for scalar and small
//! vector integrands, plus fixed Gauss–Legendre rules.

use std::collections::BinaryHeap;

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss weights for the odd-indexed Kronrod nodes 1, 3, 5, 7.
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { abs: 1e-11, rel: 1e-11, max_intervals: 2000 }
    }
}

impl Tolerance {
    pub fn absolute(abs: f64) -> Self {
        Self { abs, rel: 0.0, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral<const N: usize> {
    pub value: [f64; N],
    pub error: f64,
    pub evaluations: usize,
}

struct Piece<const N: usize> {
    a: f64,
    b: f64,
    value: [f64; N],
    error: f64,
}

impl<const N: usize> PartialEq for Piece<N> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<const N: usize> Eq for Piece<N> {}
impl<const N: usize> PartialOrd for Piece<N> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl<const N: usize> Ord for Piece<N> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod_panel<const N: usize, F>(f: &mut F, a: f64, b: f64) -> Result<Piece<N>>
where
    F: FnMut(f64) -> Result<[f64; N]>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;
    let mut kron = [0.0; N];
    let mut gauss = [0.0; N];
    for k in 0..N {
        kron[k] = WGK[7] * fc[k];
        gauss[k] = WG[3] * fc[k];
    }
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx)?;
        let f2 = f(center + dx)?;
        for k in 0..N {
            let sum = f1[k] + f2[k];
            kron[k] += WGK[j] * sum;
            if j % 2 == 1 {
                gauss[k] += WG[j / 2] * sum;
            }
        }
    }
    let mut error: f64 = 0.0;
    for k in 0..N {
        kron[k] *= half;
        gauss[k] *= half;
        error = error.max((kron[k] - gauss[k]).abs());
    }
    if error.is_nan() {
        return Err(Error::Quadrature { error_estimate: f64::NAN, tolerance: 0.0 });
    }
    Ok(Piece { a, b, value: kron, error })
}

/// Integrates a vector-valued integrand over `[a, b]`.
///
/// The interval is first cut into `initial` equal panels (useful for
/// oscillatory integrands), then the panel with the largest error is bisected
/// until the summed error estimate, taken as the maximum over components,
/// meets `max(tol.abs, tol.rel * max_k |I_k|)`.
pub fn gauss_kronrod_vec<const N: usize, F>(
    mut f: F,
    a: f64,
    b: f64,
    initial: usize,
    tol: Tolerance,
) -> Result<Integral<N>>
where
    F: FnMut(f64) -> Result<[f64; N]>,
{
    let initial = initial.max(1);
    let mut heap = BinaryHeap::with_capacity(initial * 4);
    let width = (b - a) / initial as f64;
    for i in 0..initial {
        let lo = a + width * i as f64;
        let hi = if i + 1 == initial { b } else { lo + width };
        heap.push(kronrod_panel(&mut f, lo, hi)?);
    }
    let mut evaluations = 15 * initial;
    loop {
        let mut total = [0.0; N];
        let mut error = 0.0;
        for p in heap.iter() {
            for k in 0..N {
                total[k] += p.value[k];
            }
            error += p.error;
        }
        let scale = total.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let target = tol.abs.max(tol.rel * scale);
        if error <= target {
            return Ok(Integral { value: total, error, evaluations });
        }
        if heap.len() >= tol.max_intervals {
            return Err(Error::Quadrature { error_estimate: error, tolerance: target });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            return Err(Error::Quadrature { error_estimate: error, tolerance: target });
        }
        heap.push(kronrod_panel(&mut f, worst.a, mid)?);
        heap.push(kronrod_panel(&mut f, mid, worst.b)?);
        evaluations += 30;
    }
}

/// Scalar convenience wrapper around [`gauss_kronrod_vec`].
pub fn gauss_kronrod<F>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Result<Integral<1>>
where
    F: FnMut(f64) -> Result<f64>,
{
    gauss_kronrod_vec(|x| Ok([f(x)?]), a, b, 1, tol)
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn kronrod_rule_is_exact_to_degree_22() {
        for deg in 0..=22 {
            let mut f = |x: f64| Ok([x.powi(deg)]);
            let p = kronrod_panel(&mut f, -1.0, 1.0).unwrap();
            let exact = if deg % 2 == 0 { 2.0 / (deg as f64 + 1.0) } else { 0.0 };
            assert!((p.value[0] - exact).abs() < 1e-15, "degree {deg}");
        }
    }

    #[test]
    fn embedded_gauss_rule_is_exact_to_degree_13() {
        for deg in 0..=13 {
            let mut f = |x: f64| Ok([x.powi(deg)]);
            let p = kronrod_panel(&mut f, -1.0, 1.0).unwrap();
            assert!(p.error < 1e-15, "degree {deg}: {}", p.error);
        }
    }

    #[test]
    fn adaptive_handles_peaks() {
        let r = gauss_kronrod(|x| Ok(1.0 / (1e-4 + x * x)), -1.0, 1.0, Tolerance::default()).unwrap();
        let exact = 2.0 * 100.0 * (100.0f64).atan();
        assert!((r.value[0] - exact).abs() < 1e-8 * exact);
    }

    #[test]
    fn reports_non_convergence() {
        let tol = Tolerance { abs: 1e-14, rel: 0.0, max_intervals: 4 };
        let r = gauss_kronrod(|x| Ok(x.abs().sqrt()), -1.0, 1.0, tol);
        assert!(matches!(r, Err(Error::Quadrature { .. })));
    }

    #[test]
    fn legendre_rule() {
        for n in [1usize, 2, 5, 20, 41] {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
            for deg in 0..(2 * n) {
                let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let exact = if deg % 2 == 0 { 2.0 / (deg as f64 + 1.0) } else { 0.0 };
                assert!((s - exact).abs() < 1e-13, "n = {n}, degree {deg}");
            }
        }
    }

    proptest! {
        #[test]
        fn trig_integrals(k in 1u32..20, a in -3.0f64..0.0, b in 0.1f64..6.0) {
            let kf = k as f64;
            let r = gauss_kronrod(|x| Ok((kf * x).cos()), a, b, Tolerance::default()).unwrap();
            let exact = ((kf * b).sin() - (kf * a).sin()) / kf;
            prop_assert!((r.value[0] - exact).abs() < 1e-10);
        }
    }
}
