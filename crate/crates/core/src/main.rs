use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use scdf::config_file::{load_config, render_config, Preset};
use scdf::experiments::{
    advantage_ranges, antenna_column, run_antenna_comparison, run_power_comparison, run_sweep, run_validation,
    snr_grid, Method, Quantity, SweepSpec, ValidationSpec,
};
use scdf::{Antennas, Error, Result, SystemConfig};

#[derive(Parser)]
#[command(name = "scdf", version, about = "Selective-combining DF relay network analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Outage, SEP or capacity over an SNR grid
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "outage")]
        quantity: String,
        /// Comma-separated subset of analytic,montecarlo
        #[arg(long, default_value = "analytic,montecarlo")]
        methods: String,
    },
    /// Outage of each power allocation method; the grid is the total budget in dB
    PowerCompare {
        #[command(flatten)]
        common: Common,
    },
    /// Outage for K = 1..5 relays with one and two antennas
    AntennaCompare {
        #[command(flatten)]
        common: Common,
    },
    /// Analytic results against Monte-Carlo estimates
    Validate {
        #[command(flatten)]
        common: Common,
    },
    /// Print the resolved configuration
    ShowConfig {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// symmetric or asymmetric
    #[arg(long, default_value = "symmetric", conflicts_with = "config")]
    preset: String,
    /// TOML configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    snr_start: f64,
    #[arg(long, default_value_t = 20.0, allow_negative_numbers = true)]
    snr_stop: f64,
    #[arg(long, default_value_t = 2.0)]
    snr_step: f64,
    /// Relay count K
    #[arg(long)]
    relays: Option<usize>,
    /// Receive antennas per relay (1 or 2)
    #[arg(long)]
    antennas: Option<u8>,
    /// Set every fading shape to 1
    #[arg(long)]
    rayleigh: bool,
    #[arg(long, default_value_t = 100_000)]
    mc_samples: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output file (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn system_config(&self) -> Result<SystemConfig> {
        let mut cfg = match &self.config {
            Some(path) => load_config(path)?,
            None => Preset::parse(&self.preset)?.config(),
        };
        if let Some(k) = self.relays {
            cfg = cfg.with_relay_count(k)?;
        }
        if let Some(a) = self.antennas {
            cfg = cfg.with_antennas(Antennas::from_count(a)?);
        }
        if self.rayleigh {
            cfg = cfg.to_rayleigh();
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn grid(&self) -> Result<Vec<f64>> {
        snr_grid(self.snr_start, self.snr_stop, self.snr_step)
    }

    fn emit(&self, text: &str) -> Result<()> {
        match &self.out {
            Some(path) => std::fs::write(path, text)?,
            None => std::io::stdout().write_all(text.as_bytes())?,
        }
        Ok(())
    }
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Sweep { common, quantity, methods } => {
            let methods = methods.split(',').map(|m| Method::parse(m.trim())).collect::<Result<Vec<_>>>()?;
            let spec = SweepSpec {
                quantity: Quantity::parse(&quantity)?,
                snr_grid: common.grid()?,
                config: common.system_config()?,
                methods,
                mc_samples: common.mc_samples,
                seed: common.seed,
            };
            common.emit(&run_sweep(&spec)?.to_csv())
        }
        Command::PowerCompare { common } => {
            let report = run_power_comparison(&common.system_config()?, &common.grid()?)?;
            common.emit(&report.table.to_csv())?;
            match report.max_saving_db {
                Some(s) => eprintln!("max_saving_db={s:.6}"),
                None => eprintln!("max_saving_db=none"),
            }
            Ok(())
        }
        Command::AntennaCompare { common } => {
            let table = run_antenna_comparison(&common.system_config()?, &common.grid()?)?;
            common.emit(&table.to_csv())?;
            let (a, b) = (antenna_column(4, Antennas::Two), antenna_column(5, Antennas::One));
            let ranges = advantage_ranges(&table, &a, &b).unwrap_or_default();
            let text: Vec<String> = ranges.iter().map(|(s, e)| format!("{s}..{e}")).collect();
            eprintln!("{a}_below_{b}_db={}", if text.is_empty() { "none".into() } else { text.join(";") });
            Ok(())
        }
        Command::Validate { common } => {
            let spec = ValidationSpec {
                config: common.system_config()?,
                snr_grid: common.grid()?,
                mc_samples: common.mc_samples,
                seed: common.seed,
            };
            let report = run_validation(&spec)?;
            common.emit(&report.table.to_csv())?;
            eprintln!("rows={} outside_3se={}", report.table.rows.len(), report.failures);
            Ok(())
        }
        Command::ShowConfig { common } => common.emit(&render_config(&common.system_config()?)?),
    }
}

fn fail(code: &str, field: Option<&str>, message: &str, status: u8) -> ExitCode {
    let message = message.replace(['\n', '\r'], " ");
    match field {
        Some(f) => eprintln!("error: code={code} field={f} message={message}"),
        None => eprintln!("error: code={code} message={message}"),
    }
    ExitCode::from(status)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                e.exit();
            }
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            return fail("CONFIG", None, first.trim_start_matches("error: "), 2);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let status = e.exit_status() as u8;
            match &e {
                Error::Config { field, reason } => fail(e.code(), Some(field), reason, status),
                other => fail(other.code(), None, &other.to_string(), status),
            }
        }
    }
}
