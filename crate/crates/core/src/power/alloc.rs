//! Source/relay power splits under a total-power budget.

use serde::Serialize;

use crate::analytic::branch_cdf;
use crate::channel::{Antennas, SystemConfig};
use crate::error::{Error, Result};

use super::cubic::{cubic_coefficients, CubicCoefficients, CubicSolution};

/// Distance kept from the open boundary `P_s, P_r > 0`, relative to `P_tot`.
pub const BOUNDARY_MARGIN: f64 = 1e-9;

const SCAN_POINTS: usize = 64;
const GOLDEN: f64 = 0.618_033_988_749_894_8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AllocationMethod {
    Equal,
    Adaptive,
    Numeric,
    Cubic,
}

impl AllocationMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            AllocationMethod::Equal => "equal",
            AllocationMethod::Adaptive => "adaptive",
            AllocationMethod::Numeric => "numeric",
            AllocationMethod::Cubic => "cubic",
        }
    }
}

/// A feasible `(P_s, P_r)` with the exact outage it achieves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerSplit {
    pub p_source: f64,
    pub p_relay: f64,
    pub method: AllocationMethod,
    pub objective_value: f64,
    /// The scalar search saw several local minima and refined each of them.
    pub used_grid_fallback: bool,
}

impl PowerSplit {
    fn evaluate(cfg: &SystemConfig, p_source: f64, p_tot: f64, method: AllocationMethod) -> Self {
        let p_relay = p_tot - p_source;
        PowerSplit {
            p_source,
            p_relay,
            method,
            objective_value: exact_outage(cfg, p_source, p_relay),
            used_grid_fallback: false,
        }
    }
}

/// Exact outage with the given powers.
pub fn exact_outage(cfg: &SystemConfig, p_source: f64, p_relay: f64) -> f64 {
    log_outage(cfg, p_source, p_relay).exp()
}

/// ln P_out as a sum of log branch CDFs.
pub fn log_outage(cfg: &SystemConfig, p_source: f64, p_relay: f64) -> f64 {
    cfg.relays
        .iter()
        .map(|b| branch_cdf(&b.rates(p_source, p_relay), cfg.antennas, cfg.gamma_th).ln())
        .sum()
}

fn check_budget(p_tot: f64) -> Result<()> {
    if p_tot > 0.0 && p_tot.is_finite() {
        Ok(())
    } else {
        Err(Error::config("p_tot", format!("total power must be positive, got {p_tot}")))
    }
}

pub fn equal_split(cfg: &SystemConfig, p_tot: f64) -> Result<PowerSplit> {
    cfg.validate()?;
    check_budget(p_tot)?;
    Ok(PowerSplit::evaluate(cfg, 0.5 * p_tot, p_tot, AllocationMethod::Equal))
}

/// Heuristic split from the antenna count, mean-SNR ratio and shape ratio:
/// P_s = (1/(Ant+1) + Ω₃/(Ω+Ω₃) + m/(m+m₃))·P_tot/3.
///
/// Ω and Ω₃ are the per-unit-power mean SNRs of the source and relay links.
/// With heterogeneous relays the per-relay fractions are averaged.
pub fn adaptive_split(cfg: &SystemConfig, p_tot: f64) -> Result<PowerSplit> {
    cfg.validate()?;
    check_budget(p_tot)?;
    let ant = cfg.antennas.count() as f64;
    let mut frac_sum = 0.0;
    for (i, b) in cfg.relays.iter().enumerate() {
        let g = b.effective_gains();
        let omega_s = g[0] / b.relay_noise_var;
        let omega_d = g[2] / b.dest_noise_var;
        let m_s = b.s_to_relay_ant1.m as f64;
        let m_d = b.relay_to_dest.m as f64;
        if cfg.antennas == Antennas::Two {
            let omega_s2 = g[1] / b.relay_noise_var;
            if b.s_to_relay_ant2.m != b.s_to_relay_ant1.m || omega_s2 != omega_s {
                return Err(Error::config(
                    format!("relays[{i}].s_to_relay_ant2"),
                    "adaptive allocation needs both source links of a relay to share m and mean SNR",
                ));
            }
        }
        frac_sum += (1.0 / (ant + 1.0) + omega_d / (omega_s + omega_d) + m_s / (m_s + m_d)) / 3.0;
    }
    let frac = frac_sum / cfg.relay_count() as f64;
    Ok(PowerSplit::evaluate(cfg, frac * p_tot, p_tot, AllocationMethod::Adaptive))
}

fn golden_section<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64, tol: f64, best: &mut (f64, f64)) {
    let mut x1 = hi - GOLDEN * (hi - lo);
    let mut x2 = lo + GOLDEN * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    consider(best, x1, f1);
    consider(best, x2, f2);
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - GOLDEN * (hi - lo);
            f1 = f(x1);
            consider(best, x1, f1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + GOLDEN * (hi - lo);
            f2 = f(x2);
            consider(best, x2, f2);
        }
    }
}

fn consider(best: &mut (f64, f64), x: f64, fx: f64) {
    if fx < best.1 {
        *best = (x, fx);
    }
}

/// Minimizes exact outage over `P_s ∈ (0, P_tot)`.
///
/// A uniform scan brackets the minimum and golden-section search on ln P_out
/// refines it to `tol · P_tot`. If the scan shows several local minima each is
/// refined and the best kept; the result is flagged. The equal split is
/// always among the candidates, so the result never does worse than it.
pub fn numeric_split(cfg: &SystemConfig, p_tot: f64, tol: f64) -> Result<PowerSplit> {
    cfg.validate()?;
    check_budget(p_tot)?;
    if !(tol > 0.0) {
        return Err(Error::config("tol", format!("must be positive, got {tol}")));
    }
    let f = |x: f64| log_outage(cfg, x, p_tot - x);
    let (best_x, minima) = scan_and_refine(&f, p_tot, tol * p_tot);
    let mut split = PowerSplit::evaluate(cfg, best_x, p_tot, AllocationMethod::Numeric);
    split.used_grid_fallback = minima > 1;
    Ok(split)
}

/// Returns the best point and the number of local minima found by the scan.
fn scan_and_refine<F: Fn(f64) -> f64>(f: &F, p_tot: f64, x_tol: f64) -> (f64, usize) {
    let lo = BOUNDARY_MARGIN * p_tot;
    let hi = p_tot - lo;
    let xs: Vec<f64> = (0..=SCAN_POINTS)
        .map(|i| lo + (hi - lo) * i as f64 / SCAN_POINTS as f64)
        .collect();
    let fs: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut best = (0.5 * p_tot, f(0.5 * p_tot));
    for (&x, &fx) in xs.iter().zip(&fs) {
        consider(&mut best, x, fx);
    }
    let minima: Vec<usize> = (0..xs.len())
        .filter(|&i| {
            let left = if i == 0 { f64::INFINITY } else { fs[i - 1] };
            let right = if i + 1 == xs.len() { f64::INFINITY } else { fs[i + 1] };
            fs[i] <= left && fs[i] < right
        })
        .collect();
    for &i in &minima {
        let a = xs[i.saturating_sub(1)];
        let b = xs[(i + 1).min(xs.len() - 1)];
        golden_section(f, a, b, x_tol, &mut best);
    }
    (best.0, minima.len().max(1))
}

/// Small-threshold Rayleigh approximation of outage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproxOutage {
    pub value: f64,
    /// Every per-branch factor lies in [0, 1].
    pub in_domain: bool,
}

fn require_rayleigh(cfg: &SystemConfig) -> Result<()> {
    for (i, b) in cfg.relays.iter().enumerate() {
        let ms = [b.s_to_relay_ant1.m, b.s_to_relay_ant2.m, b.relay_to_dest.m];
        let used = if cfg.antennas == Antennas::One { &ms[..1] } else { &ms[..2] };
        if used.iter().chain(std::iter::once(&ms[2])).any(|&m| m != 1) {
            return Err(Error::Unsupported(format!(
                "relay {i} is not Rayleigh (m = 1); the cubic allocation only covers Rayleigh links, use numeric_split"
            )));
        }
    }
    Ok(())
}

/// Π_k (β_k γ + α_k η_k γ² − α_k η_k β_k γ³) for two antennas, or
/// Π_k ((α_k + β_k)γ − α_k β_k γ²) for one, at the config's powers.
pub fn approx_outage_rayleigh(cfg: &SystemConfig, gamma_th: f64) -> Result<ApproxOutage> {
    cfg.validate()?;
    require_rayleigh(cfg)?;
    let mut value = 1.0;
    let mut in_domain = true;
    for r in cfg.branch_rates() {
        let (alpha, eta, beta) = (r.source[0].rate, r.source[1].rate, r.dest.rate);
        let g = gamma_th;
        let factor = match cfg.antennas {
            Antennas::Two => beta * g + alpha * eta * g * g - alpha * eta * beta * g * g * g,
            Antennas::One => (alpha + beta) * g - alpha * beta * g * g,
        };
        in_domain &= (0.0..=1.0).contains(&factor);
        value *= factor;
    }
    Ok(ApproxOutage { value, in_domain })
}

/// Per-relay constants of the Rayleigh surrogate: with P_s, P_r the powers,
/// each branch factor is a/P_r + b/P_s² − c/(P_s² P_r).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurrogateConstants {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

/// a = σ_d² γ_th / g₃, b = σ_k⁴ γ_th² / (g₁ g₂), c = a·b, where gᵢ = Ω·μ² is
/// the effective gain of each link.
pub fn surrogate_constants(cfg: &SystemConfig) -> Result<Vec<SurrogateConstants>> {
    cfg.validate()?;
    require_rayleigh(cfg)?;
    if cfg.antennas != Antennas::Two {
        return Err(Error::Unsupported(
            "the cubic allocation is derived for two relay antennas; use numeric_split".into(),
        ));
    }
    let th = cfg.gamma_th;
    Ok(cfg
        .relays
        .iter()
        .map(|r| {
            let g = r.effective_gains();
            let a = r.dest_noise_var * th / g[2];
            let b = r.relay_noise_var.powi(2) * th * th / (g[0] * g[1]);
            SurrogateConstants { a, b, c: a * b }
        })
        .collect())
}

/// Σ_k ln(a_k/P_r + b_k/P_s² − c_k/(P_s² P_r)) at `P_s = x`, or `None` if a
/// factor is not positive.
pub fn surrogate_log_objective(consts: &[SurrogateConstants], p_tot: f64, x: f64) -> Option<f64> {
    let y = p_tot - x;
    if !(x > 0.0 && y > 0.0) {
        return None;
    }
    let mut acc = 0.0;
    for k in consts {
        let g = k.a / y + k.b / (x * x) - k.c / (x * x * y);
        if !(g > 0.0) {
            return None;
        }
        acc += g.ln();
    }
    Some(acc)
}

/// d/dP_s of the surrogate log-objective, up to the positive factor 1/(P_s P_r):
/// Σ_k (a_k x³ − 2b_k y² + 2c_k y − c_k x) / (a_k x² + b_k y − c_k).
fn surrogate_stationarity(consts: &[SurrogateConstants], p_tot: f64, x: f64) -> f64 {
    let y = p_tot - x;
    consts
        .iter()
        .map(|k| {
            let num = k.a * x * x * x - 2.0 * k.b * y * y + 2.0 * k.c * y - k.c * x;
            let den = k.a * x * x + k.b * y - k.c;
            num / den
        })
        .sum()
}

/// Cubic for identical Rayleigh relays at budget `p_tot`, with the root chosen.
pub fn rayleigh_cubic_solution(cfg: &SystemConfig, p_tot: f64) -> Result<CubicSolution> {
    check_budget(p_tot)?;
    let consts = surrogate_constants(cfg)?;
    let k0 = consts[0];
    if consts.iter().any(|k| *k != k0) {
        return Err(Error::Unsupported(
            "the closed-form cubic needs identical relays; heterogeneous relays use the stationarity search".into(),
        ));
    }
    cubic_coefficients(k0.a, k0.b, k0.c, p_tot).solve()
}

/// KKT split of the Rayleigh surrogate.
///
/// Identical relays share one cubic, solved in closed form. Heterogeneous
/// relays give a rational stationarity equation, whose sign changes are
/// located on a scan and bisected to machine precision. Either way the
/// stationary point with the lowest surrogate objective wins.
pub fn rayleigh_optimal_split(cfg: &SystemConfig, p_tot: f64) -> Result<PowerSplit> {
    check_budget(p_tot)?;
    let consts = surrogate_constants(cfg)?;
    let identical = consts.iter().all(|k| *k == consts[0]);
    let p_s = if identical {
        let k0 = consts[0];
        let coeffs: CubicCoefficients = cubic_coefficients(k0.a, k0.b, k0.c, p_tot);
        coeffs.solve()?.selected_root.expect("solve sets the selected root")
    } else {
        stationary_point(&consts, p_tot)?
    };
    Ok(PowerSplit::evaluate(cfg, p_s, p_tot, AllocationMethod::Cubic))
}

const STATIONARITY_SCAN: usize = 4096;

fn stationary_point(consts: &[SurrogateConstants], p_tot: f64) -> Result<f64> {
    let lo = BOUNDARY_MARGIN * p_tot;
    let hi = p_tot - lo;
    let feasible = |x: f64| surrogate_log_objective(consts, p_tot, x).is_some();
    let xs: Vec<f64> = (0..=STATIONARITY_SCAN)
        .map(|i| lo + (hi - lo) * i as f64 / STATIONARITY_SCAN as f64)
        .collect();
    let mut best: Option<(f64, f64)> = None;
    for w in xs.windows(2) {
        let (a, b) = (w[0], w[1]);
        if !(feasible(a) && feasible(b)) {
            continue;
        }
        let (fa, fb) = (surrogate_stationarity(consts, p_tot, a), surrogate_stationarity(consts, p_tot, b));
        // a minimum is where the slope turns from negative to non-negative
        if !(fa < 0.0 && fb >= 0.0) {
            continue;
        }
        let (mut l, mut r) = (a, b);
        while r - l > 4.0 * f64::EPSILON * r.abs().max(1.0) {
            let mid = 0.5 * (l + r);
            if !feasible(mid) {
                break;
            }
            if surrogate_stationarity(consts, p_tot, mid) < 0.0 {
                l = mid;
            } else {
                r = mid;
            }
        }
        let x = 0.5 * (l + r);
        if let Some(obj) = surrogate_log_objective(consts, p_tot, x) {
            if best.is_none_or(|(_, o)| obj < o) {
                best = Some((x, obj));
            }
        }
    }
    best.map(|(x, _)| x).ok_or_else(|| {
        Error::Infeasible(format!(
            "the Rayleigh surrogate has no interior stationary minimum for P_tot = {p_tot}; use numeric_split"
        ))
    })
}
