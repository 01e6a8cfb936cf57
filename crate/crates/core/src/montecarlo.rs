//! Monte-Carlo estimators for outage, symbol error probability and capacity.
//!
//! Samples are split into fixed-size blocks. Block `b` draws from a ChaCha8
//! generator seeded with the run seed and switched to stream `b`, so every
//! block is an independent, reproducible stream. Per-block statistics are
//! merged in block order, which makes an estimate a pure function of
//! `(config, n_samples, seed)` whatever the thread count or [`ExecMode`].
//!
//! Link SNRs with integer shape `m` are drawn as `-ln(U₁⋯U_m)/rate`, i.e. a
//! sum of `m` exponentials.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::channel::{Antennas, BranchRates, LinkRate, SystemConfig};
use crate::error::{Error, Result};
use crate::parallel::{map_indexed, ExecMode};
use crate::quadrature::GaussLegendre;

/// Samples per independent stream.
pub const BLOCK_SIZE: u64 = 1 << 16;

/// Smallest accepted sample count.
pub const MIN_SAMPLES: u64 = 1_000;

/// Gauss–Legendre order for the per-draw conditional SEP integral.
pub const CONDITIONAL_SEP_ORDER: usize = 128;

/// Point estimate with its standard error and the inputs needed to reproduce it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: u64,
    pub seed: u64,
}

impl McEstimate {
    /// |value − mean| in units of the standard error (∞ when the s.e. is 0 and they differ).
    pub fn z_score(&self, value: f64) -> f64 {
        let d = (value - self.mean).abs();
        if d == 0.0 {
            0.0
        } else if self.std_error == 0.0 {
            f64::INFINITY
        } else {
            d / self.std_error
        }
    }

    /// z-score of an indicator mean against probability `p`, using the
    /// standard error √(p(1−p)/n) implied by `p` itself. Unlike the sample
    /// s.e. this stays meaningful when no event was observed.
    pub fn binomial_z_score(&self, p: f64) -> f64 {
        let d = (p - self.mean).abs();
        let se = (p * (1.0 - p) / self.n_samples as f64).sqrt();
        if d == 0.0 {
            0.0
        } else if se == 0.0 {
            f64::INFINITY
        } else {
            d / se
        }
    }
}

/// Welford accumulator with Chan's pairwise merge.
#[derive(Debug, Clone, Copy, Default)]
struct RunningStats {
    n: u64,
    mean: f64,
    m2: f64,
}

impl RunningStats {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(&mut self, other: &RunningStats) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let (na, nb) = (self.n as f64, other.n as f64);
        self.mean += delta * nb / n as f64;
        self.m2 += other.m2 + delta * delta * na * nb / n as f64;
        self.n = n;
    }

    fn std_error(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let var = (self.m2 / (self.n - 1) as f64).max(0.0);
        (var / self.n as f64).sqrt()
    }
}

/// Generator for block `block` of a run seeded with `seed`.
pub fn block_rng(seed: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    rng
}

/// Gamma(m, rate) draw for integer m.
pub fn draw_link_snr<R: Rng + ?Sized>(link: LinkRate, rng: &mut R) -> f64 {
    let mut prod = 1.0f64;
    let mut log_acc = 0.0f64;
    for _ in 0..link.m {
        // (0, 1]
        prod *= 1.0 - rng.random::<f64>();
        if prod < 1e-280 {
            log_acc += prod.ln();
            prod = 1.0;
        }
    }
    -(log_acc + prod.ln()) / link.rate
}

/// min(max(γ₁, γ₂), γ₃), or min(γ₁, γ₃) for a single antenna.
pub fn draw_branch_snr<R: Rng + ?Sized>(b: &BranchRates, antennas: Antennas, rng: &mut R) -> f64 {
    let first = draw_link_snr(b.source[0], rng);
    let source = match antennas {
        Antennas::One => first,
        Antennas::Two => first.max(draw_link_snr(b.source[1], rng)),
    };
    source.min(draw_link_snr(b.dest, rng))
}

/// Selection-combining SNR: best branch over all relays.
pub fn draw_sc_snr<R: Rng + ?Sized>(branches: &[BranchRates], antennas: Antennas, rng: &mut R) -> f64 {
    branches
        .iter()
        .map(|b| draw_branch_snr(b, antennas, rng))
        .fold(0.0, f64::max)
}

/// Conditional M-PSK symbol error probability given the SNR,
/// (1/π) ∫₀^{(M-1)π/M} exp(−γ sin²(π/M)/sin²θ) dθ, on a fixed rule.
#[derive(Debug, Clone)]
pub struct ConditionalSep {
    exponents: Vec<f64>,
    weights: Vec<f64>,
}

impl ConditionalSep {
    pub fn new(modulation_order: u32) -> Self {
        Self::with_order(modulation_order, CONDITIONAL_SEP_ORDER)
    }

    pub fn with_order(modulation_order: u32, order: usize) -> Self {
        let mf = modulation_order as f64;
        let g = (std::f64::consts::PI / mf).sin().powi(2);
        let upper = (mf - 1.0) * std::f64::consts::PI / mf;
        let (thetas, ws) = GaussLegendre::new(order).mapped(0.0, upper);
        let exponents = thetas.iter().map(|t| g / t.sin().powi(2)).collect();
        let weights = ws.iter().map(|w| w / std::f64::consts::PI).collect();
        ConditionalSep { exponents, weights }
    }

    pub fn eval(&self, gamma: f64) -> f64 {
        self.exponents
            .iter()
            .zip(&self.weights)
            .map(|(c, w)| w * (-gamma * c).exp())
            .sum()
    }
}

/// Which SEP estimator to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SepEstimator {
    /// Average of the exact conditional SEP over SNR draws.
    #[default]
    Conditional,
    /// Explicit symbol transmission and nearest-phase detection.
    SymbolDecision,
}

/// Monte-Carlo runner; the execution mode only affects speed, never results.
#[derive(Debug, Clone, Copy, Default)]
pub struct MonteCarlo {
    pub mode: ExecMode,
}

impl MonteCarlo {
    pub fn new(mode: ExecMode) -> Self {
        MonteCarlo { mode }
    }

    /// Mean and standard error of `sample(rng)` over `n` draws.
    pub fn estimate<F>(&self, n_samples: u64, seed: u64, sample: F) -> Result<McEstimate>
    where
        F: Fn(&mut ChaCha8Rng) -> f64 + Sync + Send,
    {
        if n_samples < MIN_SAMPLES {
            return Err(Error::config(
                "mc_samples",
                format!("need at least {MIN_SAMPLES} samples, got {n_samples}"),
            ));
        }
        let blocks = n_samples.div_ceil(BLOCK_SIZE);
        let partials = map_indexed(blocks as usize, self.mode, |b| {
            let b = b as u64;
            let count = BLOCK_SIZE.min(n_samples - b * BLOCK_SIZE);
            let mut rng = block_rng(seed, b);
            let mut stats = RunningStats::default();
            for _ in 0..count {
                stats.push(sample(&mut rng));
            }
            stats
        });
        let mut total = RunningStats::default();
        for p in &partials {
            total.merge(p);
        }
        Ok(McEstimate {
            mean: total.mean,
            std_error: total.std_error(),
            n_samples,
            seed,
        })
    }

    pub fn outage(&self, cfg: &SystemConfig, n_samples: u64, seed: u64) -> Result<McEstimate> {
        cfg.validate()?;
        let branches = cfg.branch_rates();
        let (ant, th) = (cfg.antennas, cfg.gamma_th);
        self.estimate(n_samples, seed, |rng| {
            if draw_sc_snr(&branches, ant, rng) < th { 1.0 } else { 0.0 }
        })
    }

    pub fn sep(&self, cfg: &SystemConfig, n_samples: u64, seed: u64, estimator: SepEstimator) -> Result<McEstimate> {
        cfg.validate()?;
        let branches = cfg.branch_rates();
        let ant = cfg.antennas;
        match estimator {
            SepEstimator::Conditional => {
                let cond = ConditionalSep::new(cfg.modulation_order);
                self.estimate(n_samples, seed, |rng| cond.eval(draw_sc_snr(&branches, ant, rng)))
            }
            SepEstimator::SymbolDecision => {
                let half_sector = std::f64::consts::PI / cfg.modulation_order as f64;
                self.estimate(n_samples, seed, |rng| {
                    let gamma = draw_sc_snr(&branches, ant, rng);
                    // unit-energy symbol at phase 0, complex noise of unit variance
                    let re: f64 = gamma.sqrt() + rng.sample::<f64, _>(StandardNormal) * std::f64::consts::FRAC_1_SQRT_2;
                    let im: f64 = rng.sample::<f64, _>(StandardNormal) * std::f64::consts::FRAC_1_SQRT_2;
                    if im.atan2(re).abs() < half_sector { 0.0 } else { 1.0 }
                })
            }
        }
    }

    pub fn capacity(&self, cfg: &SystemConfig, n_samples: u64, seed: u64) -> Result<McEstimate> {
        cfg.validate()?;
        let branches = cfg.branch_rates();
        let ant = cfg.antennas;
        let scale = cfg.bandwidth / 2.0;
        self.estimate(n_samples, seed, |rng| scale * draw_sc_snr(&branches, ant, rng).ln_1p() / std::f64::consts::LN_2)
    }
}

/// Outage estimate with the default (parallel when available) runner.
pub fn simulate_outage(cfg: &SystemConfig, n_samples: u64, seed: u64) -> Result<McEstimate> {
    MonteCarlo::default().outage(cfg, n_samples, seed)
}

/// Rao–Blackwellized SEP estimate.
pub fn simulate_sep(cfg: &SystemConfig, n_samples: u64, seed: u64) -> Result<McEstimate> {
    MonteCarlo::default().sep(cfg, n_samples, seed, SepEstimator::Conditional)
}

pub fn simulate_capacity(cfg: &SystemConfig, n_samples: u64, seed: u64) -> Result<McEstimate> {
    MonteCarlo::default().capacity(cfg, n_samples, seed)
}
