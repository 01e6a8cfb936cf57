//! Special-function kernels for integer-order gamma families.
//!
//! Every closed form in this crate reduces to finite exponential series in the
//! integer fading parameter, so the incomplete gamma functions here are only
//! defined for integer order.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::quadrature;

/// Largest n with n! finite in double precision.
pub const MAX_FACTORIAL: u32 = 170;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Neumaier's variant of Kahan compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn new(v: f64) -> Self {
        NeumaierSum { sum: v, comp: 0.0 }
    }

    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &NeumaierSum) {
        self.add(other.sum);
        self.add(other.comp);
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

impl std::iter::FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = NeumaierSum::default();
        for v in iter {
            s.add(v);
        }
        s
    }
}

/// Compensated sum of an iterator.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<NeumaierSum>().total()
}

fn factorial_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(MAX_FACTORIAL as usize + 1);
        let mut acc = 1.0f64;
        t.push(acc);
        for k in 1..=MAX_FACTORIAL {
            acc *= k as f64;
            t.push(acc);
        }
        t
    })
}

/// n! for n ≤ 170.
pub fn factorial(n: u32) -> Result<f64> {
    factorial_table()
        .get(n as usize)
        .copied()
        .ok_or_else(|| Error::Numerical(format!("factorial({n}) overflows double precision (max {MAX_FACTORIAL})")))
}

/// ln n! for any n; exact table lookup where the table reaches.
pub fn ln_factorial(n: u32) -> f64 {
    match factorial_table().get(n as usize) {
        Some(v) => v.ln(),
        None => {
            // Stirling with three correction terms, accurate to ~1e-15 for n > 170
            let x = n as f64 + 1.0;
            (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln() + 1.0 / (12.0 * x)
                - 1.0 / (360.0 * x.powi(3))
                + 1.0 / (1260.0 * x.powi(5))
        }
    }
}

/// Σ_{i=0}^{m-1} xⁱ/i!
pub fn truncated_exp_series(m: u32, x: f64) -> f64 {
    let mut term = 1.0;
    let mut acc = NeumaierSum::default();
    for i in 0..m {
        if i > 0 {
            term *= x / i as f64;
        }
        acc.add(term);
    }
    acc.total()
}

/// Γ(n, x) = (n-1)! e^{-x} Σ_{i<n} xⁱ/i! for integer n ≥ 1.
pub fn upper_incomplete_gamma_int(n: u32, x: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::config("n", "upper incomplete gamma needs integer order n >= 1"));
    }
    if x < 0.0 || x.is_nan() {
        return Err(Error::config("x", format!("argument must be >= 0, got {x}")));
    }
    Ok(factorial(n - 1)? * (-x).exp() * truncated_exp_series(n, x))
}

/// Regularized upper incomplete gamma Q(n, x) = e^{-x} Σ_{i<n} xⁱ/i!.
pub fn regularized_upper_gamma_int(n: u32, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < n as f64 {
        1.0 - regularized_lower_gamma_int(n, x)
    } else {
        // terms computed in log space so large x/n stay finite
        let mut acc = NeumaierSum::default();
        let lx = x.ln();
        for i in 0..n {
            acc.add((i as f64 * lx - x - ln_factorial(i)).exp());
        }
        acc.total()
    }
}

/// Regularized lower incomplete gamma P(n, x) = 1 − Q(n, x).
///
/// Below the mode the tail series e^{-x} Σ_{j≥n} xʲ/j! is used directly, so
/// small arguments keep full relative precision.
pub fn regularized_lower_gamma_int(n: u32, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if n == 0 {
        return 1.0;
    }
    if x < n as f64 + 1.0 {
        let mut term = (n as f64 * x.ln() - x - ln_factorial(n)).exp();
        let mut acc = NeumaierSum::default();
        let mut j = n;
        loop {
            acc.add(term);
            j += 1;
            term *= x / j as f64;
            if term < 1e-17 * acc.total() || j > n + 2000 {
                break;
            }
        }
        acc.total()
    } else {
        1.0 - regularized_upper_gamma_int(n, x)
    }
}

/// e^x · E₁(x) for x > 0.
pub fn scaled_exp_integral_e1(x: f64) -> f64 {
    assert!(x > 0.0, "E1 requires a positive argument");
    if x <= 1.0 {
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..200 {
            term *= -x / k as f64;
            let contrib = -term / k as f64;
            sum += contrib;
            if contrib.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        (-EULER_GAMMA - x.ln() + sum) * x.exp()
    } else {
        // modified Lentz evaluation of the continued fraction
        let tiny = 1e-300;
        let mut b = x + 1.0;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..10_000 {
            let an = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (an * d + b);
            c = b + an / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        h
    }
}

/// Exponential integral E₁(x) for x > 0.
pub fn exp_integral_e1(x: f64) -> f64 {
    scaled_exp_integral_e1(x) * (-x).exp()
}

/// Relative error budget above which the closed form hands over to quadrature.
const CLOSED_FORM_REL_BUDGET: f64 = 1e-11;

/// ∫₀^∞ xⁿ e^{-ax} ln(1+x) dx.
///
/// Integrating by parts against the upper incomplete gamma function gives
/// `n!/a^{n+1} Σ_k a^k/k! q_k` with `q_k = ∫ x^k e^{-ax}/(1+x) dx`, and the
/// `q_k` follow `q_k = (k-1)!/a^k − q_{k-1}` from `q_0 = e^a E₁(a)`. The
/// recurrence is forward-unstable for large `a`; its error is tracked and the
/// value is recomputed by quadrature when the budget is exceeded.
pub fn exp_log_integral(n: u32, a: f64) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::config("a", format!("decay rate must be positive and finite, got {a}")));
    }
    match exp_log_integral_closed_form(n, a) {
        Some(v) => Ok(v),
        None => exp_log_integral_quadrature(n, a),
    }
}

/// Closed-form route; `None` when the recurrence's error bound is too loose.
pub fn exp_log_integral_closed_form(n: u32, a: f64) -> Option<f64> {
    let eps = f64::EPSILON;
    let ln_a = a.ln();
    let mut q = scaled_exp_integral_e1(a);
    let mut q_err = 4.0 * eps * q;
    let ln_n_fact = ln_factorial(n);
    let mut acc = NeumaierSum::default();
    let mut acc_err = 0.0;
    for k in 0..=n {
        if k > 0 {
            let lead = (ln_factorial(k - 1) - k as f64 * ln_a).exp();
            let next = lead - q;
            q_err += eps * (lead.abs() + q.abs() + next.abs());
            q = next;
            if !(q > 0.0) {
                return None;
            }
        }
        let w = (ln_n_fact - ln_factorial(k) - (n + 1 - k) as f64 * ln_a).exp();
        acc.add(w * q);
        acc_err += w * q_err;
    }
    let value = acc.total();
    if !value.is_finite() || acc_err > CLOSED_FORM_REL_BUDGET * value {
        return None;
    }
    Some(value)
}

/// Quadrature route for the same integral, used as fallback and cross-check.
pub fn exp_log_integral_quadrature(n: u32, a: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::config("a", format!("decay rate must be positive, got {a}")));
    }
    // substitute t = a x so the integrand peaks near t = n regardless of a
    let nf = n as f64;
    let lnf = ln_factorial(n);
    let integrand = move |t: f64| {
        if t <= 0.0 {
            return 0.0;
        }
        (nf * t.ln() - t - lnf).exp() * (t / a).ln_1p()
    };
    let split = nf + 1.0;
    let head = quadrature::integrate(integrand, 0.0, split, 1e-300, 1e-13)?;
    let tail = quadrature::integrate_to_infinity(integrand, split, 1e-300, 1e-13)?;
    let scale = (lnf - (nf + 1.0) * a.ln()).exp();
    Ok((head.value + tail.value) * scale)
}

/// Cross-checks the two routes of [`exp_log_integral`] once per process.
pub fn exp_log_integral_self_check() -> Result<()> {
    static CHECK: OnceLock<std::result::Result<(), String>> = OnceLock::new();
    CHECK
        .get_or_init(|| {
            for &(n, a) in &[(0u32, 1.0f64), (3, 0.5), (8, 2.0), (5, 10.0)] {
                let closed = exp_log_integral(n, a).map_err(|e| e.to_string())?;
                let quad = exp_log_integral_quadrature(n, a).map_err(|e| e.to_string())?;
                let rel = ((closed - quad) / quad).abs();
                if rel > 1e-8 {
                    return Err(format!(
                        "exp_log_integral self-check failed at n={n}, a={a}: closed {closed:e} vs quadrature {quad:e} (rel {rel:e})"
                    ));
                }
            }
            Ok(())
        })
        .clone()
        .map_err(Error::Numerical)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorial_values() {
        assert_eq!(factorial(0).unwrap(), 1.0);
        assert_eq!(factorial(5).unwrap(), 120.0);
        // iterative integer product
        let oracle: u64 = (1..=20u64).product();
        assert_eq!(oracle, 2_432_902_008_176_640_000);
        assert_eq!(factorial(20).unwrap(), oracle as f64);
        assert!(factorial(170).unwrap().is_finite());
        assert!(matches!(factorial(171), Err(Error::Numerical(_))));
    }

    #[test]
    fn ln_factorial_continuity_past_table() {
        let a = ln_factorial(170);
        let b = ln_factorial(171);
        assert!((b - a - 171f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn incomplete_gamma_examples() {
        assert_eq!(upper_incomplete_gamma_int(1, 0.0).unwrap(), 1.0);
        assert!((upper_incomplete_gamma_int(1, 2f64.ln()).unwrap() - 0.5).abs() < 1e-15);
        // quadrature of ∫_1^∞ t² e^{-t} dt
        let quad = quadrature::integrate_to_infinity(|t| t * t * (-t).exp(), 1.0, 1e-15, 1e-13).unwrap().value;
        let v = upper_incomplete_gamma_int(3, 1.0).unwrap();
        assert!((v - quad).abs() < 1e-12);
        assert!((v - 1.839_397_205_857_211_6).abs() < 1e-12);
        assert!(upper_incomplete_gamma_int(0, 1.0).is_err());
    }

    #[test]
    fn truncated_series_examples() {
        assert_eq!(truncated_exp_series(1, 7.3), 1.0);
        assert_eq!(truncated_exp_series(2, 0.0), 1.0);
        assert_eq!(truncated_exp_series(3, 2.0), 5.0);
        let gap = (5f64.exp() - truncated_exp_series(60, 5.0)) / 5f64.exp();
        assert!(gap.abs() < 1e-12);
    }

    #[test]
    fn regularized_gamma_complement() {
        for n in 1..12 {
            for &x in &[1e-6, 0.3, 1.0, 4.0, 11.0, 40.0] {
                let p = regularized_lower_gamma_int(n, x);
                let q = regularized_upper_gamma_int(n, x);
                assert!((p + q - 1.0).abs() < 1e-14, "n={n} x={x}");
            }
        }
        // P(3, 1e-3) ≈ x³/6 to leading order
        let p = regularized_lower_gamma_int(3, 1e-3);
        assert!((p / (1e-9 / 6.0) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn e1_reference_values() {
        // e·E1(1) and e²·E1(2)
        assert!((scaled_exp_integral_e1(1.0) - 0.596_347_362_323_194_1).abs() < 1e-14);
        assert!((exp_integral_e1(2.0) - 0.048_900_510_708_061_19).abs() < 1e-15);
        assert!((exp_integral_e1(0.1) - 1.822_923_958_419_390_7).abs() < 1e-13);
    }

    #[test]
    fn exp_log_integral_examples() {
        let v = exp_log_integral(0, 1.0).unwrap();
        assert!((v - 0.596_347_362_323_194_1).abs() < 1e-13);
        let v = exp_log_integral(0, 2.0).unwrap();
        let expected = 2f64.exp() * exp_integral_e1(2.0) / 2.0;
        assert!((v - expected).abs() < 1e-13);
        assert!((v - 0.180_664_308_444_111_3).abs() < 1e-13);
        // ∫ x e^{-x} ln(1+x) dx = q0 + (1 - q0) = 1
        assert!((exp_log_integral(1, 1.0).unwrap() - 1.0).abs() < 1e-14);
        assert!(exp_log_integral(2, 0.0).is_err());
    }

    #[test]
    fn exp_log_integral_routes_agree_on_grid() {
        for n in 0..=8 {
            for &a in &[0.1, 0.5, 1.0, 2.0, 5.0, 10.0] {
                let closed = exp_log_integral(n, a).unwrap();
                let quad = exp_log_integral_quadrature(n, a).unwrap();
                assert!(((closed - quad) / quad).abs() < 1e-8, "n={n} a={a}: {closed} vs {quad}");
            }
        }
    }

    #[test]
    fn closed_form_falls_back_for_large_rate() {
        let v = exp_log_integral(20, 60.0).unwrap();
        let quad = exp_log_integral_quadrature(20, 60.0).unwrap();
        assert!(((v - quad) / quad).abs() < 1e-10);
    }

    #[test]
    fn self_check_passes() {
        exp_log_integral_self_check().unwrap();
    }
}
