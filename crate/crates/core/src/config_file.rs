//! TOML configuration files.
//!
//! ```toml
//! antennas = 2
//! p_source = 1.0
//! p_relay = 1.0
//! gamma_th = 3.0
//! modulation_order = 16
//! bandwidth = 1.0
//!
//! [[relays]]
//! s_to_relay_ant1 = { m = 2, omega = 3.0 }
//! s_to_relay_ant2 = { m = 2, omega = 3.0 }
//! relay_to_dest = { m = 2, omega = 3.0 }
//! # optional: relay_noise_var, dest_noise_var, mean_sq_gains = [1.0, 1.0, 1.0]
//! ```
//!
//! A file may instead name a `preset` ("symmetric" or "asymmetric") and
//! override any top-level scalar. Every field is optional except that a
//! file without `relays` must name a preset.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::{Antennas, BranchParams, LinkParams, SystemConfig};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Symmetric,
    Asymmetric,
}

impl Preset {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "symmetric" => Ok(Preset::Symmetric),
            "asymmetric" => Ok(Preset::Asymmetric),
            other => Err(Error::config(
                "preset",
                format!("unknown preset {other:?}; expected symmetric or asymmetric"),
            )),
        }
    }

    pub fn config(self) -> SystemConfig {
        match self {
            Preset::Symmetric => SystemConfig::symmetric_preset(),
            Preset::Asymmetric => SystemConfig::asymmetric_preset(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLink {
    m: f64,
    omega: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRelay {
    s_to_relay_ant1: RawLink,
    s_to_relay_ant2: Option<RawLink>,
    relay_to_dest: RawLink,
    relay_noise_var: Option<f64>,
    dest_noise_var: Option<f64>,
    mean_sq_gains: Option<[f64; 3]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    preset: Option<String>,
    antennas: Option<i64>,
    p_source: Option<f64>,
    p_relay: Option<f64>,
    gamma_th: Option<f64>,
    modulation_order: Option<i64>,
    bandwidth: Option<f64>,
    relays: Option<Vec<RawRelay>>,
}

fn shape(m: f64, field: String) -> Result<u32> {
    if m.fract() != 0.0 || !(1.0..=f64::from(u16::MAX)).contains(&m) {
        return Err(Error::config(field, format!("m must be an integer >= 1, got {m}")));
    }
    Ok(m as u32)
}

fn link(raw: &RawLink, field: String) -> Result<LinkParams> {
    Ok(LinkParams::new(shape(raw.m, format!("{field}.m"))?, raw.omega))
}

impl RawRelay {
    fn into_params(self, idx: usize) -> Result<BranchParams> {
        let f = |name: &str| format!("relays[{idx}].{name}");
        let ant1 = link(&self.s_to_relay_ant1, f("s_to_relay_ant1"))?;
        let ant2 = match &self.s_to_relay_ant2 {
            Some(l) => link(l, f("s_to_relay_ant2"))?,
            None => ant1,
        };
        let dest = link(&self.relay_to_dest, f("relay_to_dest"))?;
        let mut b = BranchParams::from_links(ant1, ant2, dest);
        if let Some(v) = self.relay_noise_var {
            b.relay_noise_var = v;
        }
        if let Some(v) = self.dest_noise_var {
            b.dest_noise_var = v;
        }
        if let Some(g) = self.mean_sq_gains {
            b.mean_sq_gains = g;
        }
        Ok(b)
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<SystemConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let msg = e.message().replace('\n', " ");
        Error::config("config", msg)
    })?;
    let mut cfg = match (&raw.preset, &raw.relays) {
        (Some(p), _) => Preset::parse(p)?.config(),
        (None, Some(_)) => SystemConfig::symmetric_preset(),
        (None, None) => return Err(Error::config("relays", "give a relay list or a preset")),
    };
    if let Some(relays) = raw.relays {
        cfg.relays = relays
            .into_iter()
            .enumerate()
            .map(|(i, r)| r.into_params(i))
            .collect::<Result<_>>()?;
    }
    if let Some(a) = raw.antennas {
        cfg.antennas = u8::try_from(a)
            .map_err(|_| Error::config("antennas", format!("must be 1 or 2, got {a}")))
            .and_then(Antennas::from_count)?;
    }
    if let Some(m) = raw.modulation_order {
        cfg.modulation_order = u32::try_from(m)
            .map_err(|_| Error::config("modulation_order", format!("must be a power of two >= 2, got {m}")))?;
    }
    cfg.p_source = raw.p_source.unwrap_or(cfg.p_source);
    cfg.p_relay = raw.p_relay.unwrap_or(cfg.p_relay);
    cfg.gamma_th = raw.gamma_th.unwrap_or(cfg.gamma_th);
    cfg.bandwidth = raw.bandwidth.unwrap_or(cfg.bandwidth);
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<SystemConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config("config", format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

#[derive(Serialize)]
struct OutLink {
    m: u32,
    omega: f64,
}

impl From<LinkParams> for OutLink {
    fn from(l: LinkParams) -> Self {
        OutLink { m: l.m, omega: l.omega }
    }
}

#[derive(Serialize)]
struct OutRelay {
    s_to_relay_ant1: OutLink,
    s_to_relay_ant2: OutLink,
    relay_to_dest: OutLink,
    relay_noise_var: f64,
    dest_noise_var: f64,
    mean_sq_gains: [f64; 3],
}

#[derive(Serialize)]
struct OutConfig {
    antennas: u8,
    p_source: f64,
    p_relay: f64,
    gamma_th: f64,
    modulation_order: u32,
    bandwidth: f64,
    relays: Vec<OutRelay>,
}

/// Renders a configuration in the same format [`parse_config`] reads.
pub fn render_config(cfg: &SystemConfig) -> Result<String> {
    let out = OutConfig {
        antennas: cfg.antennas.count(),
        p_source: cfg.p_source,
        p_relay: cfg.p_relay,
        gamma_th: cfg.gamma_th,
        modulation_order: cfg.modulation_order,
        bandwidth: cfg.bandwidth,
        relays: cfg
            .relays
            .iter()
            .map(|b| OutRelay {
                s_to_relay_ant1: b.s_to_relay_ant1.into(),
                s_to_relay_ant2: b.s_to_relay_ant2.into(),
                relay_to_dest: b.relay_to_dest.into(),
                relay_noise_var: b.relay_noise_var,
                dest_noise_var: b.dest_noise_var,
                mean_sq_gains: b.mean_sq_gains,
            })
            .collect(),
    };
    toml::to_string(&out).map_err(|e| Error::Numerical(format!("cannot render configuration: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_presets() {
        for p in [Preset::Symmetric, Preset::Asymmetric] {
            let cfg = p.config();
            let text = render_config(&cfg).unwrap();
            assert_eq!(parse_config(&text).unwrap(), cfg);
        }
    }

    #[test]
    fn preset_with_overrides() {
        let cfg = parse_config("preset = \"asymmetric\"\nantennas = 1\ngamma_th = 2.5\n").unwrap();
        assert_eq!(cfg.antennas, Antennas::One);
        assert_eq!(cfg.gamma_th, 2.5);
        assert_eq!(cfg.relays, SystemConfig::asymmetric_preset().relays);
    }

    #[test]
    fn non_integer_shape_names_field() {
        let text = r#"
            [[relays]]
            s_to_relay_ant1 = { m = 1.5, omega = 1.0 }
            relay_to_dest = { m = 1, omega = 1.0 }
        "#;
        match parse_config(text).unwrap_err() {
            Error::Config { field, .. } => assert_eq!(field, "relays[0].s_to_relay_ant1.m"),
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn invalid_values_rejected() {
        assert!(parse_config("preset = \"symmetric\"\nantennas = 3\n").is_err());
        assert!(parse_config("preset = \"symmetric\"\nmodulation_order = 12\n").is_err());
        assert!(parse_config("preset = \"symmetric\"\ngamma = 1.0\n").is_err());
        assert!(parse_config("antennas = 2\n").is_err());
        assert!(parse_config("preset = \"diamond\"\n").is_err());
    }
}
