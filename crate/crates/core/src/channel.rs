//! Fading topology and the mapping from physical link parameters to gamma
//! rate parameters.
//!
//! A link's instantaneous SNR is gamma distributed with integer shape `m` and
//! mean `omega · power · gain / noise`. `omega` is the dimensionless mean-SNR
//! scale of the link at unit power, unit gain and unit noise; everything
//! downstream works with the rate `m / mean`.

use serde::Serialize;

use crate::error::{Error, Result};

/// Nakagami-m statistics of one link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinkParams {
    pub m: u32,
    pub omega: f64,
}

impl LinkParams {
    pub fn new(m: u32, omega: f64) -> Self {
        LinkParams { m, omega }
    }

    pub fn rayleigh(omega: f64) -> Self {
        LinkParams { m: 1, omega }
    }
}

/// Gamma shape and rate of a link SNR for a fixed power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkRate {
    pub m: u32,
    pub rate: f64,
}

impl LinkRate {
    pub fn new(m: u32, rate: f64) -> Self {
        LinkRate { m, rate }
    }

    pub fn mean(&self) -> f64 {
        self.m as f64 / self.rate
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(into = "u8")]
pub enum Antennas {
    One,
    Two,
}

impl Antennas {
    pub fn count(self) -> u8 {
        match self {
            Antennas::One => 1,
            Antennas::Two => 2,
        }
    }

    pub fn from_count(n: u8) -> Result<Self> {
        match n {
            1 => Ok(Antennas::One),
            2 => Ok(Antennas::Two),
            other => Err(Error::config("antennas", format!("must be 1 or 2, got {other}"))),
        }
    }
}

impl From<Antennas> for u8 {
    fn from(a: Antennas) -> u8 {
        a.count()
    }
}

/// Per-relay description of the three links and the noise at each receiver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchParams {
    pub s_to_relay_ant1: LinkParams,
    /// Ignored when the relays have a single antenna.
    pub s_to_relay_ant2: LinkParams,
    pub relay_to_dest: LinkParams,
    pub relay_noise_var: f64,
    pub dest_noise_var: f64,
    /// μ² for the s→k→1, s→k→2 and k→d links.
    pub mean_sq_gains: [f64; 3],
}

impl BranchParams {
    /// Unit noise and unit gains; the link `omega`s are the mean SNRs at unit power.
    pub fn from_links(ant1: LinkParams, ant2: LinkParams, dest: LinkParams) -> Self {
        BranchParams {
            s_to_relay_ant1: ant1,
            s_to_relay_ant2: ant2,
            relay_to_dest: dest,
            relay_noise_var: 1.0,
            dest_noise_var: 1.0,
            mean_sq_gains: [1.0; 3],
        }
    }

    /// All three links share `(m, omega)`.
    pub fn uniform(m: u32, omega: f64) -> Self {
        let l = LinkParams::new(m, omega);
        Self::from_links(l, l, l)
    }

    pub fn rates(&self, p_source: f64, p_relay: f64) -> BranchRates {
        let r1 = link_rate(self.s_to_relay_ant1, p_source, self.relay_noise_var, self.mean_sq_gains[0]);
        let r2 = link_rate(self.s_to_relay_ant2, p_source, self.relay_noise_var, self.mean_sq_gains[1]);
        let r3 = link_rate(self.relay_to_dest, p_relay, self.dest_noise_var, self.mean_sq_gains[2]);
        BranchRates {
            source: [
                LinkRate::new(self.s_to_relay_ant1.m, r1),
                LinkRate::new(self.s_to_relay_ant2.m, r2),
            ],
            dest: LinkRate::new(self.relay_to_dest.m, r3),
        }
    }

    /// Effective gain `omega · μ²` of each link (s→k→1, s→k→2, k→d).
    pub fn effective_gains(&self) -> [f64; 3] {
        [
            self.s_to_relay_ant1.omega * self.mean_sq_gains[0],
            self.s_to_relay_ant2.omega * self.mean_sq_gains[1],
            self.relay_to_dest.omega * self.mean_sq_gains[2],
        ]
    }

    fn validate(&self, idx: usize) -> Result<()> {
        let links = [
            ("s_to_relay_ant1", self.s_to_relay_ant1),
            ("s_to_relay_ant2", self.s_to_relay_ant2),
            ("relay_to_dest", self.relay_to_dest),
        ];
        for (name, link) in links {
            if link.m < 1 {
                return Err(Error::config(format!("relays[{idx}].{name}.m"), "must be an integer >= 1"));
            }
            if !(link.omega > 0.0) || !link.omega.is_finite() {
                return Err(Error::config(
                    format!("relays[{idx}].{name}.omega"),
                    format!("must be positive and finite, got {}", link.omega),
                ));
            }
        }
        positive(self.relay_noise_var, || format!("relays[{idx}].relay_noise_var"))?;
        positive(self.dest_noise_var, || format!("relays[{idx}].dest_noise_var"))?;
        for (j, g) in self.mean_sq_gains.iter().enumerate() {
            positive(*g, || format!("relays[{idx}].mean_sq_gains[{j}]"))?;
        }
        Ok(())
    }
}

/// Link rates of one branch at a fixed power split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchRates {
    pub source: [LinkRate; 2],
    pub dest: LinkRate,
}

impl BranchRates {
    /// Same shape and rate on every link.
    pub fn uniform(m: u32, rate: f64) -> Self {
        let l = LinkRate::new(m, rate);
        BranchRates { source: [l, l], dest: l }
    }

    /// Links that actually take part for the given antenna count, source side first.
    pub fn active_links(&self, antennas: Antennas) -> Vec<LinkRate> {
        match antennas {
            Antennas::One => vec![self.source[0], self.dest],
            Antennas::Two => vec![self.source[0], self.source[1], self.dest],
        }
    }
}

/// Result of validating a configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct IidCheck {
    pub is_iid: bool,
    /// The common branch description when every relay is identical.
    pub shared_branch: Option<BranchParams>,
}

/// Network-level description.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemConfig {
    pub relays: Vec<BranchParams>,
    pub antennas: Antennas,
    pub p_source: f64,
    pub p_relay: f64,
    pub gamma_th: f64,
    pub modulation_order: u32,
    pub bandwidth: f64,
}

impl SystemConfig {
    /// `k` identical relays with every link at `(m, omega)`; unit powers,
    /// two antennas, 16-PSK, threshold 3, unit bandwidth.
    pub fn symmetric_with(k: usize, m: u32, omega: f64) -> Self {
        SystemConfig {
            relays: vec![BranchParams::uniform(m, omega); k],
            antennas: Antennas::Two,
            p_source: 1.0,
            p_relay: 1.0,
            gamma_th: 3.0,
            modulation_order: 16,
            bandwidth: 1.0,
        }
    }

    /// Three identical relays, Ω = 3 and m = 2 on every link.
    pub fn symmetric_preset() -> Self {
        Self::symmetric_with(3, 2, 3.0)
    }

    /// Relay k (1-based) has Ω = m = k on both source links and
    /// Ω = m = 4 − k on the relay→destination link.
    pub fn asymmetric_preset() -> Self {
        let relays = (1..=3u32)
            .map(|k| {
                let s = LinkParams::new(k, k as f64);
                let d = LinkParams::new(4 - k, (4 - k) as f64);
                BranchParams::from_links(s, s, d)
            })
            .collect();
        SystemConfig {
            relays,
            ..Self::symmetric_preset()
        }
    }

    pub fn relay_count(&self) -> usize {
        self.relays.len()
    }

    pub fn with_powers(&self, p_source: f64, p_relay: f64) -> Self {
        SystemConfig {
            p_source,
            p_relay,
            ..self.clone()
        }
    }

    /// Equal source and relay power of `10^(dB/10)`, scaling every link's
    /// mean SNR jointly.
    pub fn at_snr_db(&self, snr_db: f64) -> Self {
        let p = db_to_linear(snr_db);
        self.with_powers(p, p)
    }

    pub fn with_antennas(&self, antennas: Antennas) -> Self {
        SystemConfig {
            antennas,
            ..self.clone()
        }
    }

    /// Replaces every link shape by 1 (Rayleigh), keeping the Ω values.
    pub fn to_rayleigh(&self) -> Self {
        let mut out = self.clone();
        for b in &mut out.relays {
            b.s_to_relay_ant1.m = 1;
            b.s_to_relay_ant2.m = 1;
            b.relay_to_dest.m = 1;
        }
        out
    }

    /// The first `k` relays, or `k` copies of the only relay for a single-relay config.
    pub fn with_relay_count(&self, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::config("relays", "at least one relay is required"));
        }
        let relays = if self.relays.iter().all(|r| *r == self.relays[0]) {
            vec![self.relays[0]; k]
        } else if k <= self.relays.len() {
            self.relays[..k].to_vec()
        } else {
            return Err(Error::config(
                "relays",
                format!("cannot extend {} heterogeneous relays to {k}", self.relays.len()),
            ));
        };
        Ok(SystemConfig {
            relays,
            ..self.clone()
        })
    }

    pub fn branch_rates(&self) -> Vec<BranchRates> {
        self.relays.iter().map(|b| b.rates(self.p_source, self.p_relay)).collect()
    }

    pub fn validate(&self) -> Result<IidCheck> {
        validate_config(self)
    }
}

/// Rate α = m / (omega · power · gain / noise) of a link's SNR.
pub fn link_rate(link: LinkParams, power: f64, noise_var: f64, mean_sq_gain: f64) -> f64 {
    link.m as f64 * noise_var / (link.omega * power * mean_sq_gain)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

fn positive(v: f64, field: impl FnOnce() -> String) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(field(), format!("must be positive and finite, got {v}")))
    }
}

/// Checks every numeric invariant and reports whether the relays are identical.
pub fn validate_config(cfg: &SystemConfig) -> Result<IidCheck> {
    if cfg.relays.is_empty() {
        return Err(Error::config("relays", "at least one relay is required"));
    }
    for (i, b) in cfg.relays.iter().enumerate() {
        b.validate(i)?;
    }
    positive(cfg.p_source, || "p_source".into())?;
    positive(cfg.p_relay, || "p_relay".into())?;
    positive(cfg.gamma_th, || "gamma_th".into())?;
    if cfg.bandwidth < 0.0 || !cfg.bandwidth.is_finite() {
        return Err(Error::config("bandwidth", format!("must be non-negative, got {}", cfg.bandwidth)));
    }
    if cfg.modulation_order < 2 || !cfg.modulation_order.is_power_of_two() {
        return Err(Error::config(
            "modulation_order",
            format!("must be a power of two >= 2, got {}", cfg.modulation_order),
        ));
    }
    let first = normalized_branch(&cfg.relays[0], cfg.antennas);
    let is_iid = cfg
        .relays
        .iter()
        .all(|b| normalized_branch(b, cfg.antennas) == first);
    Ok(IidCheck {
        is_iid,
        shared_branch: is_iid.then_some(first),
    })
}

// the unused second antenna must not break the comparison
fn normalized_branch(b: &BranchParams, antennas: Antennas) -> BranchParams {
    let mut out = *b;
    if antennas == Antennas::One {
        out.s_to_relay_ant2 = out.s_to_relay_ant1;
        out.mean_sq_gains[1] = out.mean_sq_gains[0];
    }
    out
}
