//! Per-branch SNR distribution: min(max(γ₁, γ₂), γ₃), or min(γ₁, γ₃) with
//! a single relay antenna. Links are independent gamma variables.

use crate::channel::{Antennas, BranchRates, LinkRate, SystemConfig};
use crate::error::Result;
use crate::special::{ln_factorial, regularized_lower_gamma_int, regularized_upper_gamma_int};

use super::exppoly::{ExpPoly, MAX_BASIS};

fn link_cdf(l: LinkRate, gamma: f64) -> f64 {
    regularized_lower_gamma_int(l.m, l.rate * gamma)
}

fn link_sf(l: LinkRate, gamma: f64) -> f64 {
    regularized_upper_gamma_int(l.m, l.rate * gamma)
}

fn link_pdf(l: LinkRate, gamma: f64) -> f64 {
    if gamma < 0.0 {
        return 0.0;
    }
    if gamma == 0.0 {
        return if l.m == 1 { l.rate } else { 0.0 };
    }
    let m = l.m as f64;
    (m * l.rate.ln() + (m - 1.0) * gamma.ln() - l.rate * gamma - ln_factorial(l.m - 1)).exp()
}

/// CDF and PDF of one branch's end-to-end SNR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchDistribution {
    pub rates: BranchRates,
    pub antennas: Antennas,
}

impl BranchDistribution {
    pub fn new(rates: BranchRates, antennas: Antennas) -> Self {
        BranchDistribution { rates, antennas }
    }

    pub fn cdf(&self, gamma: f64) -> f64 {
        branch_cdf(&self.rates, self.antennas, gamma)
    }

    pub fn pdf(&self, gamma: f64) -> f64 {
        branch_pdf(&self.rates, self.antennas, gamma)
    }

    /// Smallest link rate; sets the decay scale of the branch tail.
    pub fn min_rate(&self) -> f64 {
        self.rates
            .active_links(self.antennas)
            .iter()
            .map(|l| l.rate)
            .fold(f64::INFINITY, f64::min)
    }

    /// The branch CDF as an exponential polynomial over the distinct link rates.
    pub(crate) fn cdf_exppoly(&self) -> ExpPoly {
        let links = self.rates.active_links(self.antennas);
        let mut basis: Vec<f64> = Vec::with_capacity(MAX_BASIS);
        let mut index = Vec::with_capacity(links.len());
        for l in &links {
            match basis.iter().position(|&r| r == l.rate) {
                Some(i) => index.push(i),
                None => {
                    basis.push(l.rate);
                    index.push(basis.len() - 1);
                }
            }
        }
        let sf = |i: usize| ExpPoly::gamma_survival(&basis, index[i], links[i].m);
        let one = ExpPoly::constant(&basis, 1.0);
        match self.antennas {
            Antennas::One => one.sub(&mul(&sf(0), &sf(1))),
            Antennas::Two => {
                // 1 - F1 F2 = S1 + S2 - S1 S2
                let (s1, s2, s3) = (sf(0), sf(1), sf(2));
                let not_both = s1.add(&s2).sub(&mul(&s1, &s2));
                one.sub(&mul(&not_both, &s3))
            }
        }
    }
}

fn mul(a: &ExpPoly, b: &ExpPoly) -> ExpPoly {
    a.mul(b, usize::MAX).expect("uncapped product")
}

/// P[branch SNR ≤ γ].
///
/// Written as F₃ + F₁F₂·S₃ (two antennas) or F₃ + F₁·S₃ (one antenna), which
/// avoids the 1 − (…) cancellation at small γ.
pub fn branch_cdf(b: &BranchRates, antennas: Antennas, gamma: f64) -> f64 {
    if gamma <= 0.0 {
        return 0.0;
    }
    let f3 = link_cdf(b.dest, gamma);
    let s3 = link_sf(b.dest, gamma);
    let source_fail = match antennas {
        Antennas::One => link_cdf(b.source[0], gamma),
        Antennas::Two => link_cdf(b.source[0], gamma) * link_cdf(b.source[1], gamma),
    };
    (f3 + source_fail * s3).min(1.0)
}

/// Exact derivative of [`branch_cdf`].
pub fn branch_pdf(b: &BranchRates, antennas: Antennas, gamma: f64) -> f64 {
    if gamma < 0.0 {
        return 0.0;
    }
    let s3 = link_sf(b.dest, gamma);
    let f3 = link_pdf(b.dest, gamma);
    match antennas {
        Antennas::One => {
            let l1 = b.source[0];
            link_pdf(l1, gamma) * s3 + link_sf(l1, gamma) * f3
        }
        Antennas::Two => {
            let (l1, l2) = (b.source[0], b.source[1]);
            let c1 = link_cdf(l1, gamma);
            let c2 = link_cdf(l2, gamma);
            let d_both = link_pdf(l1, gamma) * c2 + c1 * link_pdf(l2, gamma);
            d_both * s3 + (1.0 - c1 * c2) * f3
        }
    }
}

/// P[γ_SC < γ_th] = Π_k F_k(γ_th); heterogeneous relays allowed.
pub fn outage_probability(cfg: &SystemConfig) -> Result<f64> {
    cfg.validate()?;
    Ok(outage_at(cfg, cfg.gamma_th))
}

/// Product of branch CDFs at `gamma` without re-validating the config.
pub fn outage_at(cfg: &SystemConfig, gamma: f64) -> f64 {
    cfg.branch_rates()
        .iter()
        .map(|r| branch_cdf(r, cfg.antennas, gamma))
        .product()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_threshold() {
        let b = BranchRates::uniform(2, 0.7);
        assert_eq!(branch_cdf(&b, Antennas::Two, 0.0), 0.0);
    }

    #[test]
    fn exponential_order_statistics() {
        let b = BranchRates::uniform(1, 1.0);
        let v = branch_cdf(&b, Antennas::Two, 2f64.ln());
        assert!((v - 0.625).abs() < 1e-15);
        // single antenna: 1 - ½·½
        let v1 = branch_cdf(&b, Antennas::One, 2f64.ln());
        assert!((v1 - 0.75).abs() < 1e-15);
    }

    #[test]
    fn pdf_rayleigh_at_origin() {
        let b = BranchRates::uniform(1, 1.0);
        assert!((branch_pdf(&b, Antennas::Two, 0.0) - 1.0).abs() < 1e-15);
        // 4e^{-2γ} - 3e^{-3γ}
        let g = 0.8f64;
        let expected = 4.0 * (-2.0 * g).exp() - 3.0 * (-3.0 * g).exp();
        assert!((branch_pdf(&b, Antennas::Two, g) - expected).abs() < 1e-14);
    }

    #[test]
    fn printed_iid_pdf_form_matches() {
        // 4e^{-2αγ}/(m-1)! Σ_u α^{m+u}γ^{m-1+u}/u! − 3e^{-3αγ}/(m-1)! Σ_{v,w} α^{m+v+w}γ^{m-1+v+w}/(v!w!)
        let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
        for m in 1..=4u32 {
            let a = 0.6;
            let b = BranchRates::uniform(m, a);
            for &g in &[0.3f64, 1.7, 5.0] {
                let mut first = 0.0;
                let mut second = 0.0;
                for u in 0..m {
                    first += a.powi((m + u) as i32) * g.powi((m - 1 + u) as i32) / fact(u);
                    for w in 0..m {
                        second += a.powi((m + u + w) as i32) * g.powi((m - 1 + u + w) as i32) / (fact(u) * fact(w));
                    }
                }
                let printed = (4.0 * (-2.0 * a * g).exp() * first - 3.0 * (-3.0 * a * g).exp() * second) / fact(m - 1);
                let exact = branch_pdf(&b, Antennas::Two, g);
                assert!((printed - exact).abs() < 1e-13, "m={m} γ={g}: {printed} vs {exact}");
            }
        }
    }

    #[test]
    fn exppoly_cdf_matches_direct() {
        let rates = BranchRates {
            source: [LinkRate::new(2, 0.4), LinkRate::new(3, 0.9)],
            dest: LinkRate::new(1, 0.4),
        };
        for ant in [Antennas::One, Antennas::Two] {
            let d = BranchDistribution::new(rates, ant);
            let p = d.cdf_exppoly();
            for g in [0.05, 0.5, 2.0, 9.0] {
                assert!((p.eval(g) - d.cdf(g)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn outage_is_product() {
        let cfg = SystemConfig::asymmetric_preset();
        let rates = cfg.branch_rates();
        let prod: f64 = rates.iter().map(|r| branch_cdf(r, cfg.antennas, 3.0)).product();
        assert_eq!(outage_probability(&cfg).unwrap(), prod);
    }
}
