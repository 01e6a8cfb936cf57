//! Selection-combining SNR density as an exponential-polynomial mixture, and
//! the closed forms built on it: MGF, M-PSK symbol error probability and
//! average capacity.

use std::ops::{Add, Mul};

use crate::channel::{Antennas, BranchRates, SystemConfig};
use crate::error::{Error, Result};
use crate::quadrature::{integrate_to_infinity, GaussLegendre};
use crate::special::{
    exp_log_integral, exp_log_integral_self_check, ln_factorial, regularized_lower_gamma_int, NeumaierSum,
};

use super::branch::{branch_cdf, BranchDistribution};

/// Default limit on raw (pre-aggregation) products per multiplication step.
pub const DEFAULT_TERM_CAP: usize = 1_000_000;

/// Tolerance used when validating a freshly built density.
pub const DENSITY_TOLERANCE: f64 = 1e-9;

/// One term `coeff · γ^power · e^{-rate·γ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpPolyTerm {
    pub coeff: f64,
    pub power: u32,
    pub rate: f64,
}

impl ExpPolyTerm {
    /// ∫₀^∞ of the term: coeff · power! / rate^(power+1).
    pub fn integral(&self) -> f64 {
        self.laplace(0.0)
    }

    /// coeff · power! / (rate + s)^(power+1).
    pub fn laplace(&self, s: f64) -> f64 {
        let n = self.power;
        self.coeff * (ln_factorial(n) - (n as f64 + 1.0) * (self.rate + s).ln()).exp()
    }

    pub fn eval(&self, gamma: f64) -> f64 {
        if self.coeff == 0.0 {
            return 0.0;
        }
        if gamma == 0.0 {
            return if self.power == 0 { self.coeff } else { 0.0 };
        }
        let mag = self.coeff.abs().ln() + self.power as f64 * gamma.ln() - self.rate * gamma;
        self.coeff.signum() * mag.exp()
    }
}

/// The selection-combining law a mixture was expanded from: the maximum of
/// `relays` i.i.d. copies of `branch`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureOrigin {
    pub branch: BranchRates,
    pub antennas: Antennas,
    pub relays: usize,
}

impl MixtureOrigin {
    fn cdf(&self, gamma: f64) -> f64 {
        branch_cdf(&self.branch, self.antennas, gamma).powi(self.relays as i32)
    }
}

/// Finite sum of [`ExpPolyTerm`]s.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExpPolyMixture {
    pub terms: Vec<ExpPolyTerm>,
    /// Set for densities built by [`sc_pdf_mixture_for_branch`].
    pub origin: Option<MixtureOrigin>,
}

impl ExpPolyMixture {
    pub fn from_terms(terms: Vec<ExpPolyTerm>) -> Self {
        ExpPolyMixture { terms, origin: None }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn pdf(&self, gamma: f64) -> f64 {
        if gamma < 0.0 {
            return 0.0;
        }
        self.terms.iter().map(|t| t.eval(gamma)).collect::<NeumaierSum>().total()
    }

    /// ∫₀^x of the mixture, term by term through the regularized lower gamma.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        self.terms
            .iter()
            .map(|t| t.integral() * regularized_lower_gamma_int(t.power + 1, t.rate * x))
            .collect::<NeumaierSum>()
            .total()
    }

    pub fn total_mass(&self) -> f64 {
        self.terms.iter().map(|t| t.integral()).collect::<NeumaierSum>().total()
    }

    /// First moment: Σ coeff · (n+1)! / rate^(n+2).
    pub fn mean(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let n = t.power + 1;
                t.coeff * (ln_factorial(n) - (n as f64 + 1.0) * t.rate.ln()).exp()
            })
            .collect::<NeumaierSum>()
            .total()
    }

    /// Smallest decay rate among the terms.
    pub fn min_rate(&self) -> f64 {
        self.terms.iter().map(|t| t.rate).fold(f64::INFINITY, f64::min)
    }

    /// Checks normalization and that the CDF stays in [0, 1] at a few points.
    pub fn check_density(&self, tol: f64) -> Result<()> {
        let mass = self.total_mass();
        if !((mass - 1.0).abs() <= tol) {
            return Err(Error::Numerical(format!(
                "mixture with {} terms integrates to {mass:.17e}, not 1 (tolerance {tol:e})",
                self.len()
            )));
        }
        let scale = 1.0 / self.min_rate();
        for k in [0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 40.0] {
            let x = k * scale;
            let c = self.cdf(x);
            if !(-tol..=1.0 + tol).contains(&c) {
                return Err(Error::Numerical(format!(
                    "mixture CDF at {x:e} is {c:e}, outside [0, 1]"
                )));
            }
        }
        Ok(())
    }
}

impl Add for ExpPolyMixture {
    type Output = ExpPolyMixture;

    fn add(mut self, rhs: ExpPolyMixture) -> ExpPolyMixture {
        self.terms.extend(rhs.terms);
        self.origin = None;
        self
    }
}

impl Mul<f64> for ExpPolyMixture {
    type Output = ExpPolyMixture;

    fn mul(mut self, rhs: f64) -> ExpPolyMixture {
        for t in &mut self.terms {
            t.coeff *= rhs;
        }
        self.origin = None;
        self
    }
}

/// Density of the maximum of `k` i.i.d. branches, each with every link at
/// shape `m` and rate `alpha`.
pub fn sc_pdf_mixture(k: usize, m: u32, alpha: f64, antennas: Antennas) -> Result<ExpPolyMixture> {
    sc_pdf_mixture_for_branch(k, &BranchRates::uniform(m, alpha), antennas, DEFAULT_TERM_CAP)
}

/// Density of the maximum of `k` i.i.d. copies of the given branch.
///
/// The branch CDF F is expanded as an exponential polynomial, F^{k-1} is
/// formed by repeated coefficient convolution, and the result is multiplied
/// by k·F' with like (power, rate) terms merged after every step. `term_cap`
/// bounds the raw product count of any single step.
pub fn sc_pdf_mixture_for_branch(
    k: usize,
    branch: &BranchRates,
    antennas: Antennas,
    term_cap: usize,
) -> Result<ExpPolyMixture> {
    if k == 0 {
        return Err(Error::config("relays", "at least one relay is required"));
    }
    for l in branch.active_links(antennas) {
        if l.m == 0 || !(l.rate > 0.0) || !l.rate.is_finite() {
            return Err(Error::config("link", format!("need m >= 1 and a positive rate, got {l:?}")));
        }
    }
    let dist = BranchDistribution::new(*branch, antennas);
    let cdf = dist.cdf_exppoly();
    let pdf = cdf.derivative();
    let power = cdf.pow((k - 1) as u32, term_cap)?;
    let density = power.mul(&pdf, term_cap)?.scale(k as f64);
    let mut mix = density.into_mixture()?;
    mix.origin = Some(MixtureOrigin { branch: *branch, antennas, relays: k });
    mix.check_density(DENSITY_TOLERANCE)?;
    Ok(mix)
}

/// Mixture for an i.i.d. configuration at its current power split.
pub fn sc_pdf_mixture_for_config(cfg: &SystemConfig) -> Result<ExpPolyMixture> {
    let check = cfg.validate()?;
    if !check.is_iid {
        return Err(Error::Unsupported(
            "closed-form SNR density needs identical relays; use the Monte-Carlo estimator for heterogeneous configurations"
                .into(),
        ));
    }
    let rates = cfg.branch_rates()[0];
    sc_pdf_mixture_for_branch(cfg.relay_count(), &rates, cfg.antennas, DEFAULT_TERM_CAP)
}

/// Largest tolerated ratio Σ|terms| / |Σ terms| in the closed-form MGF.
const MGF_MAX_CANCELLATION: f64 = 1e3;

/// M(s) = E[e^{-sγ}] = Σ coeff · n! / (rate + s)^(n+1).
///
/// Where M(s) is tiny the signed terms cancel and the sum keeps only
/// absolute accuracy. If the cancellation ratio exceeds 10³ and the mixture
/// knows its origin, M(s) is instead computed as s ∫₀^∞ e^{-sγ} F(γ)^K dγ,
/// whose integrand has no cancellation.
pub fn mgf(mix: &ExpPolyMixture, s: f64) -> f64 {
    let mut sum = NeumaierSum::default();
    let mut abs = 0.0;
    for t in &mix.terms {
        let v = t.laplace(s);
        sum.add(v);
        abs += v.abs();
    }
    let value = sum.total();
    match mix.origin {
        Some(origin) if s > 0.0 && abs > MGF_MAX_CANCELLATION * value.abs() => {
            integrate_to_infinity(|g| (-s * g).exp() * origin.cdf(g), 0.0, 0.0, 1e-12)
                .map(|i| s * i.value)
                .unwrap_or(value)
        }
        _ => value,
    }
}

const SEP_START_ORDER: usize = 32;
const SEP_MAX_ORDER: usize = 4096;
const SEP_ORDER_TOL: f64 = 1e-10;

/// Average M-PSK symbol error probability by the MGF method:
/// (1/π) ∫₀^{(M-1)π/M} M(sin²(π/M) / sin²θ) dθ.
///
/// Gauss–Legendre order starts at 32 and doubles until the result moves by
/// less than 1e-10.
pub fn sep_mpsk(mix: &ExpPolyMixture, modulation_order: u32) -> Result<f64> {
    sep_from_mgf(|s| mgf(mix, s), modulation_order)
}

/// The MGF-method SEP integral for an arbitrary MGF.
pub fn sep_from_mgf<F: Fn(f64) -> f64>(mgf_fn: F, modulation_order: u32) -> Result<f64> {
    if modulation_order < 2 {
        return Err(Error::config("modulation_order", "must be at least 2"));
    }
    let mf = modulation_order as f64;
    let g = (std::f64::consts::PI / mf).sin().powi(2);
    let upper = (mf - 1.0) * std::f64::consts::PI / mf;
    let integrand = |theta: f64| {
        let s2 = theta.sin().powi(2);
        if s2 == 0.0 { 0.0 } else { mgf_fn(g / s2) }
    };
    let mut order = SEP_START_ORDER;
    let mut prev = GaussLegendre::new(order).integrate(integrand, 0.0, upper);
    while order < SEP_MAX_ORDER {
        order *= 2;
        let next = GaussLegendre::new(order).integrate(integrand, 0.0, upper);
        if (next - prev).abs() < SEP_ORDER_TOL {
            return Ok(next / std::f64::consts::PI);
        }
        prev = next;
    }
    Err(Error::Numerical(format!(
        "SEP quadrature did not settle below {SEP_ORDER_TOL:e} by order {SEP_MAX_ORDER}"
    )))
}

/// Average capacity (BW/2)·E[log₂(1+γ)] in bits/s; the ½ accounts for the
/// two transmission phases.
pub fn avg_capacity(mix: &ExpPolyMixture, bandwidth: f64) -> Result<f64> {
    exp_log_integral_self_check()?;
    let mut acc = NeumaierSum::default();
    for t in &mix.terms {
        acc.add(t.coeff * exp_log_integral(t.power, t.rate)?);
    }
    Ok(bandwidth / (2.0 * std::f64::consts::LN_2) * acc.total())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::exp_integral_e1;

    fn rayleigh_single() -> ExpPolyMixture {
        sc_pdf_mixture(1, 1, 1.0, Antennas::Two).unwrap()
    }

    fn has_term(mix: &ExpPolyMixture, coeff: f64, power: u32, rate: f64) -> bool {
        mix.terms
            .iter()
            .any(|t| t.power == power && (t.rate - rate).abs() < 1e-15 && (t.coeff - coeff).abs() < 1e-14)
    }

    #[test]
    fn single_rayleigh_branch_terms() {
        let mix = rayleigh_single();
        assert_eq!(mix.len(), 2);
        assert!(has_term(&mix, 4.0, 0, 2.0));
        assert!(has_term(&mix, -3.0, 0, 3.0));
    }

    #[test]
    fn two_rayleigh_branches_symbolic() {
        // d/dγ (1 - 2e^{-2γ} + e^{-3γ})²
        //   = 8e^{-2γ} - 6e^{-3γ} - 16e^{-4γ} + 20e^{-5γ} - 6e^{-6γ}
        let mix = sc_pdf_mixture(2, 1, 1.0, Antennas::Two).unwrap();
        let expected = [(8.0, 2.0), (-6.0, 3.0), (-16.0, 4.0), (20.0, 5.0), (-6.0, 6.0)];
        assert_eq!(mix.len(), expected.len());
        for (c, r) in expected {
            assert!(has_term(&mix, c, 0, r), "missing {c}·e^(-{r}γ): {mix:?}");
        }
    }

    #[test]
    fn mgf_examples() {
        let mix = rayleigh_single();
        assert!((mgf(&mix, 0.0) - 1.0).abs() < 1e-15);
        assert!((mgf(&mix, 1.0) - 7.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn capacity_single_rayleigh_branch() {
        let mix = rayleigh_single();
        let c = avg_capacity(&mix, 1.0).unwrap();
        let e2 = 2f64.exp() * exp_integral_e1(2.0) / 2.0;
        let e3 = 3f64.exp() * exp_integral_e1(3.0) / 3.0;
        let expected = (4.0 * e2 - 3.0 * e3) / (2.0 * std::f64::consts::LN_2);
        assert!((c - expected).abs() < 1e-13);
        assert!((c - 0.332_233_547_533_917_4).abs() < 1e-12);
    }

    #[test]
    fn capacity_concentrated_density() {
        // Gamma(n+1) density with mean γ0 concentrates as n grows
        let g0 = 3.0f64;
        let target = (1.0 + g0).log2() / 2.0 * 2.0;
        let mut last_gap = f64::INFINITY;
        for n in [10u32, 40, 150] {
            let rate = (n as f64 + 1.0) / g0;
            let coeff = ((n as f64 + 1.0) * rate.ln() - ln_factorial(n)).exp();
            let mix = ExpPolyMixture::from_terms(vec![ExpPolyTerm { coeff, power: n, rate }]);
            let gap = (avg_capacity(&mix, 2.0).unwrap() - target).abs();
            assert!(gap < last_gap);
            last_gap = gap;
        }
        // second-order Jensen gap for variance 9/151 is about 2.7e-3
        assert!(last_gap < 3e-3);
    }

    #[test]
    fn mgf_keeps_relative_accuracy_in_the_tail() {
        let rates = BranchRates::uniform(3, 0.05);
        let mix = sc_pdf_mixture(4, 3, 0.05, Antennas::Two).unwrap();
        let s = 5.0;
        let naive: f64 = mix.terms.iter().map(|t| t.laplace(s)).sum();
        let density = |g: f64| {
            4.0 * branch_cdf(&rates, Antennas::Two, g).powi(3) * super::super::branch_pdf(&rates, Antennas::Two, g)
        };
        let reference = crate::quadrature::integrate_to_infinity(|g| density(g) * (-s * g).exp(), 0.0, 0.0, 1e-12)
            .unwrap()
            .value;
        assert!(((mgf(&mix, s) - reference) / reference).abs() < 1e-9);
        assert!(((naive - reference) / reference).abs() > 1e-3);
    }

    #[test]
    fn mixture_algebra() {
        let a = rayleigh_single();
        let half = (a.clone() * 0.5) + (a.clone() * 0.5);
        assert!((half.total_mass() - 1.0).abs() < 1e-15);
        assert!((half.pdf(0.7) - a.pdf(0.7)).abs() < 1e-15);
    }

    #[test]
    fn mean_is_mgf_slope() {
        let mix = sc_pdf_mixture(3, 2, 0.4, Antennas::Two).unwrap();
        let h = 1e-5;
        let slope = (mgf(&mix, h) - mgf(&mix, -h)) / (2.0 * h);
        assert!(((-slope - mix.mean()) / mix.mean()).abs() < 1e-6);
    }

    #[test]
    fn term_cap_reported() {
        let err = sc_pdf_mixture_for_branch(4, &BranchRates::uniform(3, 1.0), Antennas::Two, 50).unwrap_err();
        assert!(matches!(err, Error::Resource(_)));
    }

    #[test]
    fn heterogeneous_config_redirected() {
        let err = sc_pdf_mixture_for_config(&SystemConfig::asymmetric_preset()).unwrap_err();
        assert!(matches!(err, Error::Unsupported(ref msg) if msg.contains("Monte-Carlo")));
    }

    #[test]
    fn sep_at_zero_snr_limit() {
        // M(s) ≡ 1 gives (M-1)/M
        let p = sep_from_mgf(|_| 1.0, 16).unwrap();
        assert!((p - 15.0 / 16.0).abs() < 1e-12);
    }
}
