//! Numerical integration: adaptive Gauss–Kronrod for general integrands and
//! fixed-order Gauss–Legendre rules for smooth finite-range integrals.

use std::collections::BinaryHeap;
use std::cmp::Ordering;

use crate::error::{Error, Result};

// 15-point Kronrod extension of the 7-point Gauss rule (abscissae on [0, 1]).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_SEGMENTS: usize = 4000;

#[derive(Debug, Clone, Copy)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub segments: usize,
}

struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> (f64, f64) {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += w * pair;
        // odd indices are the embedded Gauss nodes
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Globally adaptive Gauss–Kronrod (7/15) integration over a finite interval.
pub fn integrate<F>(f: F, lo: f64, hi: f64, abs_tol: f64, rel_tol: f64) -> Result<Integral>
where
    F: Fn(f64) -> f64,
{
    if lo == hi {
        return Ok(Integral { value: 0.0, error: 0.0, segments: 0 });
    }
    let (value, error) = gk15(&f, lo, hi);
    let mut heap = BinaryHeap::new();
    heap.push(Segment { lo, hi, value, error });
    let mut total = value;
    let mut total_err = error;

    while total_err > abs_tol.max(rel_tol * total.abs()) {
        if heap.len() >= MAX_SEGMENTS {
            return Err(Error::Numerical(format!(
                "quadrature on [{lo}, {hi}] did not converge: value {total:e}, error estimate {total_err:e} after {} segments",
                heap.len()
            )));
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.lo + worst.hi);
        let (lv, le) = gk15(&f, worst.lo, mid);
        let (rv, re) = gk15(&f, mid, worst.hi);
        total += lv + rv - worst.value;
        total_err += le + re - worst.error;
        heap.push(Segment { lo: worst.lo, hi: mid, value: lv, error: le });
        heap.push(Segment { lo: mid, hi: worst.hi, value: rv, error: re });
        if !total.is_finite() {
            return Err(Error::Numerical(format!(
                "quadrature on [{lo}, {hi}] produced a non-finite value"
            )));
        }
    }
    // re-sum from scratch to drop the drift of the running updates
    let mut value = 0.0;
    let mut error = 0.0;
    for seg in heap.iter() {
        value += seg.value;
        error += seg.error;
    }
    Ok(Integral { value, error, segments: heap.len() })
}

/// Integrates over `[lo, ∞)` using the map `x = lo + t/(1 - t)`.
pub fn integrate_to_infinity<F>(f: F, lo: f64, abs_tol: f64, rel_tol: f64) -> Result<Integral>
where
    F: Fn(f64) -> f64,
{
    let mapped = |t: f64| {
        if t >= 1.0 {
            return 0.0;
        }
        let u = 1.0 - t;
        let x = lo + t / u;
        let v = f(x) / (u * u);
        if v.is_finite() { v } else { 0.0 }
    };
    integrate(mapped, 0.0, 1.0, abs_tol, rel_tol)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "Gauss-Legendre order must be positive");
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let half = n.div_ceil(2);
        for i in 0..half {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let step = p / d;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Applies the rule on `[lo, hi]`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, lo: f64, hi: f64) -> f64 {
        let c = 0.5 * (lo + hi);
        let h = 0.5 * (hi - lo);
        let mut acc = crate::special::NeumaierSum::default();
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc.add(w * f(c + h * x));
        }
        acc.total() * h
    }

    /// Maps the rule onto `[lo, hi]`, returning (abscissae, weights).
    pub fn mapped(&self, lo: f64, hi: f64) -> (Vec<f64>, Vec<f64>) {
        let c = 0.5 * (lo + hi);
        let h = 0.5 * (hi - lo);
        let xs = self.nodes.iter().map(|&x| c + h * x).collect();
        let ws = self.weights.iter().map(|&w| w * h).collect();
        (xs, ws)
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let (p_n, p_prev) = if n == 0 { (1.0, 0.0) } else { (p1, p0) };
    let d = n as f64 * (x * p_n - p_prev) / (x * x - 1.0);
    (p_n, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_polynomial_exact() {
        let r = integrate(|x| x.powi(5) - 2.0 * x * x, 0.0, 2.0, 1e-14, 1e-14).unwrap();
        let exact = 64.0 / 6.0 - 16.0 / 3.0;
        assert!((r.value - exact).abs() < 1e-12);
    }

    #[test]
    fn semi_infinite_gamma_integral() {
        // ∫ x^4 e^{-x} = 24
        let r = integrate_to_infinity(|x| x.powi(4) * (-x).exp(), 0.0, 1e-13, 1e-13).unwrap();
        assert!((r.value - 24.0).abs() < 1e-10, "{}", r.value);
    }

    #[test]
    fn legendre_weights_sum_to_two() {
        for n in [1, 2, 5, 16, 64, 257] {
            let g = GaussLegendre::new(n);
            let s: f64 = g.weights.iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "order {n}: {s}");
        }
    }

    #[test]
    fn legendre_exact_for_degree_2n_minus_1() {
        let g = GaussLegendre::new(6);
        let v = g.integrate(|x| x.powi(11) + x.powi(10), -1.0, 1.0);
        assert!((v - 2.0 / 11.0).abs() < 1e-14);
    }

    #[test]
    fn nonconvergence_reported() {
        let err = integrate(|x| 1.0 / x, 0.0, 1.0, 1e-14, 1e-14).unwrap_err();
        assert!(matches!(err, Error::Numerical(_)));
    }
}
