//! Sweeps and comparison tables.
//!
//! An SNR of `x` dB means `P_s = P_r = 10^(x/10)`, which scales every link
//! mean SNR jointly. Power comparisons instead take a total budget
//! `P_tot = 10^(x/10)` that the allocation methods split between source and relays.
//!
//! Tables are written as CSV with a fixed header. Reals are printed with
//! 17 significant digits, so reruns with the same inputs are byte-identical.

use std::fmt::Write as _;
use std::path::Path;

use crate::analytic::{avg_capacity, outage_probability, sc_pdf_mixture_for_config, sep_mpsk};
use crate::channel::{db_to_linear, Antennas, SystemConfig};
use crate::error::{Error, Result};
use crate::montecarlo::{simulate_capacity, simulate_outage, simulate_sep, McEstimate, MIN_SAMPLES};
use crate::parallel::{map_slice, ExecMode};
use crate::power::{adaptive_split, equal_split, exact_outage, numeric_split, rayleigh_optimal_split};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Outage,
    Sep,
    Capacity,
}

impl Quantity {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "outage" => Ok(Quantity::Outage),
            "sep" => Ok(Quantity::Sep),
            "capacity" => Ok(Quantity::Capacity),
            other => Err(Error::config("quantity", format!("expected outage, sep or capacity, got {other:?}"))),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Quantity::Outage => "outage",
            Quantity::Sep => "sep",
            Quantity::Capacity => "capacity",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Method {
    Analytic,
    MonteCarlo,
}

impl Method {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "analytic" => Ok(Method::Analytic),
            "montecarlo" => Ok(Method::MonteCarlo),
            other => Err(Error::config("methods", format!("expected analytic or montecarlo, got {other:?}"))),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Analytic => "analytic",
            Method::MonteCarlo => "montecarlo",
        }
    }
}

/// Inclusive grid `start, start + step, …` up to `stop`.
pub fn snr_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(start.is_finite() && stop.is_finite()) {
        return Err(Error::config("snr_start", "grid bounds must be finite"));
    }
    if !(step > 0.0) {
        return Err(Error::config("snr_step", format!("must be positive, got {step}")));
    }
    if stop < start {
        return Err(Error::config("snr_stop", format!("{stop} is below snr_start {start}")));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    if n > 100_000 {
        return Err(Error::config("snr_step", "grid has more than 100000 points"));
    }
    Ok((0..=n).map(|i| start + i as f64 * step).collect())
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub quantity: Quantity,
    pub snr_grid: Vec<f64>,
    pub config: SystemConfig,
    pub methods: Vec<Method>,
    pub mc_samples: u64,
    pub seed: u64,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        let check = self.config.validate()?;
        if self.snr_grid.is_empty() {
            return Err(Error::config("snr_grid", "empty"));
        }
        if self.snr_grid.iter().any(|x| !x.is_finite()) || self.snr_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::config("snr_grid", "must be finite and strictly increasing"));
        }
        if self.methods.is_empty() {
            return Err(Error::config("methods", "at least one method is required"));
        }
        if self.methods.contains(&Method::MonteCarlo) && self.mc_samples < MIN_SAMPLES {
            return Err(Error::config(
                "mc_samples",
                format!("need at least {MIN_SAMPLES} samples, got {}", self.mc_samples),
            ));
        }
        if self.methods.contains(&Method::Analytic) && self.quantity != Quantity::Outage && !check.is_iid {
            return Err(Error::Unsupported(format!(
                "analytic {} needs identical relays; use the montecarlo method for this configuration",
                self.quantity.as_str()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Empty,
    Real(f64),
    Int(u64),
    Text(String),
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Real(x) => Some(*x),
            Cell::Int(n) => Some(*n as f64),
            _ => None,
        }
    }

    fn opt(x: Option<f64>) -> Cell {
        x.map_or(Cell::Empty, Cell::Real)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Numeric view of a column; non-numeric cells become `None`.
    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let i = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[i].as_f64()).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            for (i, cell) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                match cell {
                    Cell::Empty => {}
                    Cell::Real(x) => write!(out, "{x:.16e}").unwrap(),
                    Cell::Int(n) => write!(out, "{n}").unwrap(),
                    Cell::Text(s) => out.push_str(s),
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

fn analytic_value(cfg: &SystemConfig, q: Quantity) -> Result<f64> {
    match q {
        Quantity::Outage => outage_probability(cfg),
        Quantity::Sep => sep_mpsk(&sc_pdf_mixture_for_config(cfg)?, cfg.modulation_order),
        Quantity::Capacity => avg_capacity(&sc_pdf_mixture_for_config(cfg)?, cfg.bandwidth),
    }
}

fn simulated_value(cfg: &SystemConfig, q: Quantity, n: u64, seed: u64) -> Result<McEstimate> {
    match q {
        Quantity::Outage => simulate_outage(cfg, n, seed),
        Quantity::Sep => simulate_sep(cfg, n, seed),
        Quantity::Capacity => simulate_capacity(cfg, n, seed),
    }
}

fn collect_rows(points: Vec<Result<Vec<Vec<Cell>>>>) -> Result<Vec<Vec<Cell>>> {
    let mut rows = Vec::new();
    for p in points {
        rows.extend(p?);
    }
    Ok(rows)
}

/// One row per SNR point and method: `snr_db, method, value, std_error, n_samples, seed`.
/// The s.e., sample count and seed are empty for analytic rows.
pub fn run_sweep(spec: &SweepSpec) -> Result<Table> {
    spec.validate()?;
    let mut methods = spec.methods.clone();
    methods.sort();
    methods.dedup();
    let points = map_slice(&spec.snr_grid, ExecMode::default(), |&snr| {
        let cfg = spec.config.at_snr_db(snr);
        let mut rows = Vec::new();
        for &m in &methods {
            let row = match m {
                Method::Analytic => vec![
                    Cell::Real(snr),
                    Cell::Text(m.as_str().into()),
                    Cell::Real(analytic_value(&cfg, spec.quantity)?),
                    Cell::Empty,
                    Cell::Empty,
                    Cell::Empty,
                ],
                Method::MonteCarlo => {
                    let est = simulated_value(&cfg, spec.quantity, spec.mc_samples, spec.seed)?;
                    vec![
                        Cell::Real(snr),
                        Cell::Text(m.as_str().into()),
                        Cell::Real(est.mean),
                        Cell::Real(est.std_error),
                        Cell::Int(est.n_samples),
                        Cell::Int(est.seed),
                    ]
                }
            };
            rows.push(row);
        }
        Ok(rows)
    });
    let mut table = Table::new(["snr_db", "method", "value", "std_error", "n_samples", "seed"]);
    table.rows = collect_rows(points)?;
    Ok(table)
}

/// Result of [`run_power_comparison`].
#[derive(Debug, Clone)]
pub struct PowerComparison {
    pub table: Table,
    /// Largest matched-outage saving of numeric over equal allocation, in dB.
    pub max_saving_db: Option<f64>,
}

fn uses_rayleigh_cubic(cfg: &SystemConfig) -> bool {
    cfg.antennas == Antennas::Two
        && cfg.relays.iter().all(|b| {
            b.s_to_relay_ant1.m == 1 && b.s_to_relay_ant2.m == 1 && b.relay_to_dest.m == 1
        })
}

const NUMERIC_TOL: f64 = 1e-10;

/// Budget in dB at which equal allocation reaches `target` outage, searched
/// upward from `from_db`. Equal-split outage falls monotonically with the budget.
fn equal_budget_for_outage(cfg: &SystemConfig, target: f64, from_db: f64) -> Option<f64> {
    let f = |db: f64| {
        let p = db_to_linear(db);
        exact_outage(cfg, 0.5 * p, 0.5 * p).ln() - target.ln()
    };
    let mut lo = from_db;
    if f(lo) <= 0.0 {
        return Some(lo);
    }
    let mut hi = lo + 1.0;
    while f(hi) > 0.0 {
        lo = hi;
        hi += 1.0;
        if hi > from_db + 60.0 {
            return None;
        }
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Outage under each allocation method for every budget `P_tot = 10^(dB/10)`.
///
/// Columns: `p_tot_db, p_tot, equal, adaptive, numeric, cubic,
/// numeric_p_source, cubic_p_source, saving_db`. The cubic columns are empty
/// unless every link is Rayleigh with two antennas, or when the cubic has no
/// feasible root; the adaptive column is empty when a relay's two source
/// links differ. `saving_db` is the extra budget equal allocation needs to
/// reach the numeric split's outage.
pub fn run_power_comparison(cfg: &SystemConfig, p_tot_db: &[f64]) -> Result<PowerComparison> {
    cfg.validate()?;
    if p_tot_db.is_empty() {
        return Err(Error::config("snr_grid", "empty"));
    }
    let rayleigh = uses_rayleigh_cubic(cfg);
    let points = map_slice(p_tot_db, ExecMode::default(), |&db| -> Result<Vec<Vec<Cell>>> {
        let p = db_to_linear(db);
        let eq = equal_split(cfg, p)?;
        let adaptive = match adaptive_split(cfg, p) {
            Ok(s) => Some(s.objective_value),
            Err(Error::Config { .. }) => None,
            Err(e) => return Err(e),
        };
        let num = numeric_split(cfg, p, NUMERIC_TOL)?;
        let cubic = if rayleigh {
            match rayleigh_optimal_split(cfg, p) {
                Ok(s) => Some(s),
                Err(Error::Infeasible(_)) => None,
                Err(e) => return Err(e),
            }
        } else {
            None
        };
        let saving = equal_budget_for_outage(cfg, num.objective_value, db).map(|x| x - db);
        Ok(vec![vec![
            Cell::Real(db),
            Cell::Real(p),
            Cell::Real(eq.objective_value),
            Cell::opt(adaptive),
            Cell::Real(num.objective_value),
            Cell::opt(cubic.map(|s| s.objective_value)),
            Cell::Real(num.p_source),
            Cell::opt(cubic.map(|s| s.p_source)),
            Cell::opt(saving),
        ]])
    });
    let mut table = Table::new([
        "p_tot_db",
        "p_tot",
        "equal",
        "adaptive",
        "numeric",
        "cubic",
        "numeric_p_source",
        "cubic_p_source",
        "saving_db",
    ]);
    table.rows = collect_rows(points)?;
    let max_saving_db = table
        .column("saving_db")
        .unwrap()
        .into_iter()
        .flatten()
        .fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |a| a.max(x))));
    Ok(PowerComparison { table, max_saving_db })
}

/// `(K, antennas)` pairs of the antenna comparison: K = 1..5 with one and two antennas.
pub fn antenna_pairs() -> Vec<(usize, Antennas)> {
    (1..=5).flat_map(|k| [(k, Antennas::One), (k, Antennas::Two)]).collect()
}

pub fn antenna_column(k: usize, antennas: Antennas) -> String {
    format!("k{k}_ant{}", antennas.count())
}

/// Outage for each `(K, antennas)` pair over the SNR grid. Relays are copies
/// of the template's relay, so the template must have identical relays.
pub fn run_antenna_comparison(template: &SystemConfig, snr_grid: &[f64]) -> Result<Table> {
    template.validate()?;
    let pairs = antenna_pairs();
    let configs = pairs
        .iter()
        .map(|&(k, a)| Ok(template.with_relay_count(k)?.with_antennas(a)))
        .collect::<Result<Vec<_>>>()?;
    let points = map_slice(snr_grid, ExecMode::default(), |&snr| -> Result<Vec<Vec<Cell>>> {
        let mut row = vec![Cell::Real(snr)];
        for c in &configs {
            row.push(Cell::Real(outage_probability(&c.at_snr_db(snr))?));
        }
        Ok(vec![row])
    });
    let mut header = vec!["snr_db".to_string()];
    header.extend(pairs.iter().map(|&(k, a)| antenna_column(k, a)));
    let mut table = Table::new(header);
    table.rows = collect_rows(points)?;
    Ok(table)
}

/// Maximal runs of consecutive rows where column `a` is strictly below column `b`,
/// as `(first_snr, last_snr)`.
pub fn advantage_ranges(table: &Table, a: &str, b: &str) -> Option<Vec<(f64, f64)>> {
    let x = table.column("snr_db")?;
    let ya = table.column(a)?;
    let yb = table.column(b)?;
    let mut out = Vec::new();
    let mut start: Option<f64> = None;
    let mut last = f64::NAN;
    for i in 0..x.len() {
        let wins = matches!((ya[i], yb[i]), (Some(p), Some(q)) if p < q);
        let snr = x[i].unwrap_or(f64::NAN);
        if wins {
            start.get_or_insert(snr);
            last = snr;
        } else if let Some(s) = start.take() {
            out.push((s, last));
        }
    }
    if let Some(s) = start {
        out.push((s, last));
    }
    Some(out)
}

#[derive(Debug, Clone)]
pub struct ValidationSpec {
    pub config: SystemConfig,
    pub snr_grid: Vec<f64>,
    pub mc_samples: u64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub table: Table,
    pub failures: usize,
}

/// Analytic value against simulation for outage, SEP and capacity at every
/// SNR point. SEP and capacity rows need identical relays and are skipped otherwise.
///
/// Columns: `quantity, snr_db, analytic, mc_mean, mc_std_error, z_score,
/// n_samples, seed, within_3se`. Outage z-scores use the binomial standard
/// error implied by the analytic probability; the others use the sample s.e.
pub fn run_validation(spec: &ValidationSpec) -> Result<ValidationReport> {
    let check = spec.config.validate()?;
    if spec.mc_samples < MIN_SAMPLES {
        return Err(Error::config("mc_samples", format!("need at least {MIN_SAMPLES} samples")));
    }
    if spec.snr_grid.is_empty() {
        return Err(Error::config("snr_grid", "empty"));
    }
    let quantities: &[Quantity] = if check.is_iid {
        &[Quantity::Outage, Quantity::Sep, Quantity::Capacity]
    } else {
        &[Quantity::Outage]
    };
    let jobs: Vec<(Quantity, f64)> = quantities
        .iter()
        .flat_map(|&q| spec.snr_grid.iter().map(move |&s| (q, s)))
        .collect();
    let points = map_slice(&jobs, ExecMode::default(), |&(q, snr)| -> Result<Vec<Vec<Cell>>> {
        let cfg = spec.config.at_snr_db(snr);
        let exact = analytic_value(&cfg, q)?;
        let est = simulated_value(&cfg, q, spec.mc_samples, spec.seed)?;
        let z = match q {
            Quantity::Outage => est.binomial_z_score(exact),
            _ => est.z_score(exact),
        };
        Ok(vec![vec![
            Cell::Text(q.as_str().into()),
            Cell::Real(snr),
            Cell::Real(exact),
            Cell::Real(est.mean),
            Cell::Real(est.std_error),
            Cell::Real(z),
            Cell::Int(est.n_samples),
            Cell::Int(est.seed),
            Cell::Text(if z <= 3.0 { "true" } else { "false" }.into()),
        ]])
    });
    let mut table = Table::new([
        "quantity",
        "snr_db",
        "analytic",
        "mc_mean",
        "mc_std_error",
        "z_score",
        "n_samples",
        "seed",
        "within_3se",
    ]);
    table.rows = collect_rows(points)?;
    let failures = table.rows.iter().filter(|r| r[8] == Cell::Text("false".into())).count();
    Ok(ValidationReport { table, failures })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_inclusive() {
        assert_eq!(snr_grid(0.0, 20.0, 2.0).unwrap().len(), 11);
        assert_eq!(snr_grid(0.0, 1.0, 0.1).unwrap().len(), 11);
        assert_eq!(snr_grid(5.0, 5.0, 1.0).unwrap(), vec![5.0]);
        assert!(snr_grid(1.0, 0.0, 1.0).is_err());
        assert!(snr_grid(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn csv_formatting() {
        let mut t = Table::new(["a", "b", "c", "d"]);
        t.rows.push(vec![Cell::Real(0.1), Cell::Empty, Cell::Int(7), Cell::Text("x".into())]);
        assert_eq!(t.to_csv(), "a,b,c,d\n1.0000000000000001e-1,,7,x\n");
    }

    #[test]
    fn sweep_rejects_analytic_sep_for_heterogeneous() {
        let spec = SweepSpec {
            quantity: Quantity::Sep,
            snr_grid: vec![0.0],
            config: SystemConfig::asymmetric_preset(),
            methods: vec![Method::Analytic],
            mc_samples: 1000,
            seed: 1,
        };
        assert!(matches!(run_sweep(&spec), Err(Error::Unsupported(_))));
    }

    #[test]
    fn sweep_rows_are_ordered() {
        let spec = SweepSpec {
            quantity: Quantity::Outage,
            snr_grid: vec![0.0, 4.0],
            config: SystemConfig::symmetric_preset(),
            methods: vec![Method::MonteCarlo, Method::Analytic],
            mc_samples: 2000,
            seed: 3,
        };
        let t = run_sweep(&spec).unwrap();
        assert_eq!(t.rows.len(), 4);
        assert_eq!(t.rows[0][1], Cell::Text("analytic".into()));
        assert_eq!(t.rows[1][1], Cell::Text("montecarlo".into()));
        assert_eq!(t.rows[2][0], Cell::Real(4.0));
    }

    #[test]
    fn advantage_runs() {
        let mut t = Table::new(["snr_db", "a", "b"]);
        for (x, a, b) in [(0.0, 1.0, 2.0), (1.0, 1.0, 2.0), (2.0, 3.0, 2.0), (3.0, 1.0, 2.0)] {
            t.rows.push(vec![Cell::Real(x), Cell::Real(a), Cell::Real(b)]);
        }
        assert_eq!(advantage_ranges(&t, "a", "b").unwrap(), vec![(0.0, 1.0), (3.0, 3.0)]);
    }
}
