//! Sparse exponential polynomials Σ c·γⁿ·e^{-ργ}.
//!
//! Every decay rate ρ is an integer combination of a small basis of link rates,
//! so terms are keyed on `(power, multipliers)` and like terms merge on exact
//! integer keys. Coefficients accumulate with compensated summation.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::special::NeumaierSum;

use super::mixture::{ExpPolyMixture, ExpPolyTerm};

pub(crate) const MAX_BASIS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub(crate) struct TermKey {
    pub power: u32,
    pub mult: [u16; MAX_BASIS],
}

impl TermKey {
    fn times(self, other: TermKey) -> TermKey {
        let mut mult = [0u16; MAX_BASIS];
        for (i, m) in mult.iter_mut().enumerate() {
            *m = self.mult[i] + other.mult[i];
        }
        TermKey {
            power: self.power + other.power,
            mult,
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct ExpPoly {
    basis: Vec<f64>,
    terms: BTreeMap<TermKey, NeumaierSum>,
}

impl ExpPoly {
    pub fn zero(basis: &[f64]) -> Self {
        assert!(basis.len() <= MAX_BASIS);
        ExpPoly {
            basis: basis.to_vec(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(basis: &[f64], c: f64) -> Self {
        let mut p = Self::zero(basis);
        p.add_term(TermKey { power: 0, mult: [0; MAX_BASIS] }, c);
        p
    }

    /// e^{-rγ} Σ_{j<m} (rγ)ʲ/j! with `r = basis[idx]`: the survival function of a
    /// gamma variable with integer shape `m`.
    pub fn gamma_survival(basis: &[f64], idx: usize, m: u32) -> Self {
        let mut p = Self::zero(basis);
        let r = basis[idx];
        let mut mult = [0u16; MAX_BASIS];
        mult[idx] = 1;
        let mut coeff = 1.0;
        for j in 0..m {
            if j > 0 {
                coeff *= r / j as f64;
            }
            p.add_term(TermKey { power: j, mult }, coeff);
        }
        p
    }

    fn add_term(&mut self, key: TermKey, c: f64) {
        self.terms.entry(key).or_default().add(c);
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn rate_of(&self, key: &TermKey) -> f64 {
        key.mult
            .iter()
            .zip(&self.basis)
            .map(|(&k, &r)| k as f64 * r)
            .sum()
    }

    fn prune(mut self) -> Self {
        self.terms.retain(|_, c| c.total() != 0.0);
        self
    }

    pub fn add(&self, other: &ExpPoly) -> ExpPoly {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.terms.entry(*k).or_default().merge(c);
        }
        out.prune()
    }

    pub fn scale(&self, s: f64) -> ExpPoly {
        let mut out = ExpPoly::zero(&self.basis);
        for (k, c) in &self.terms {
            out.add_term(*k, c.total() * s);
        }
        out.prune()
    }

    pub fn sub(&self, other: &ExpPoly) -> ExpPoly {
        self.add(&other.scale(-1.0))
    }

    /// Product with aggregation; fails when the raw pair count exceeds `cap`.
    pub fn mul(&self, other: &ExpPoly, cap: usize) -> Result<ExpPoly> {
        let raw = self.len().saturating_mul(other.len());
        if raw > cap {
            return Err(Error::Resource(format!(
                "exponential-polynomial product would create {raw} terms before aggregation (cap {cap})"
            )));
        }
        let mut out = ExpPoly::zero(&self.basis);
        for (ka, ca) in &self.terms {
            let a = ca.total();
            for (kb, cb) in &other.terms {
                out.add_term(ka.times(*kb), a * cb.total());
            }
        }
        Ok(out.prune())
    }

    /// `self^k` by repeated multiplication.
    pub fn pow(&self, k: u32, cap: usize) -> Result<ExpPoly> {
        let mut acc = ExpPoly::constant(&self.basis, 1.0);
        for _ in 0..k {
            acc = acc.mul(self, cap)?;
        }
        Ok(acc)
    }

    /// Exact term-wise derivative in γ.
    pub fn derivative(&self) -> ExpPoly {
        let mut out = ExpPoly::zero(&self.basis);
        for (k, c) in &self.terms {
            let c = c.total();
            let rho = self.rate_of(k);
            if k.power > 0 {
                out.add_term(TermKey { power: k.power - 1, mult: k.mult }, c * k.power as f64);
            }
            if rho != 0.0 {
                out.add_term(*k, -c * rho);
            }
        }
        out.prune()
    }

    #[cfg_attr(not(test), allow(dead_code))]
    pub fn eval(&self, gamma: f64) -> f64 {
        let mut acc = NeumaierSum::default();
        for (k, c) in &self.terms {
            acc.add(c.total() * gamma.powi(k.power as i32) * (-self.rate_of(k) * gamma).exp());
        }
        acc.total()
    }

    /// Converts to a mixture; every term must decay.
    pub fn into_mixture(self) -> Result<ExpPolyMixture> {
        let mut terms = Vec::with_capacity(self.terms.len());
        for (k, c) in &self.terms {
            let rate = self.rate_of(k);
            if !(rate > 0.0) {
                return Err(Error::Numerical(format!(
                    "non-decaying term γ^{} with coefficient {:e} in a density expansion",
                    k.power,
                    c.total()
                )));
            }
            terms.push(ExpPolyTerm {
                coeff: c.total(),
                power: k.power,
                rate,
            });
        }
        Ok(ExpPolyMixture::from_terms(terms))
    }
}
