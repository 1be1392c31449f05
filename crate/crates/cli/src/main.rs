#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod format;
mod output;

use output::Format;

#[derive(Debug, Parser)]
#[command(name = "pbropt", version, about = "Productivity optimization and dilution control for microalgae cultures")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Parameter file (flat TOML with unit-suffixed keys).
    #[arg(long, global = true, conflicts_with = "preset")]
    pub params: Option<PathBuf>,
    /// Bundled parameter set: table1-as-printed, table1-R-x10, chlorella-s1, chlorella-s0365.
    #[arg(long, global = true)]
    pub preset: Option<String>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, global = true, value_enum, default_value = "csv")]
    pub format: Format,
    /// Override the specific extinction coefficient [m^2/g].
    #[arg(long, global = true)]
    pub alpha0: Option<f64>,
    /// Override the background turbidity [1/m].
    #[arg(long, global = true)]
    pub alpha1: Option<f64>,
    /// Override the extinction exponent; alpha0 is refitted unless given.
    #[arg(long, global = true)]
    pub s: Option<f64>,
    /// Override the surface light [umol m^-2 s^-1].
    #[arg(long = "surface-light", global = true)]
    pub surface_light: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimal optical depth.
    Yopt {
        /// Also report a grid-scan argmax of P(Y).
        #[arg(long)]
        scan: bool,
        #[arg(long, default_value_t = 30.0)]
        scan_max: f64,
        #[arg(long, default_value_t = 1e-5)]
        scan_step: f64,
    },
    /// Tabulate a productivity or extinction curve.
    Sweep(commands::SweepArgs),
    /// Best depth for a concentration, or best concentration for a depth.
    Optimize {
        #[arg(long, required_unless_present = "x", conflicts_with = "x")]
        h: Option<f64>,
        #[arg(long)]
        x: Option<f64>,
    },
    /// Alternate directional optima over concentration and depth.
    Alternate {
        #[arg(long, default_value_t = 50.0)]
        x0: f64,
        #[arg(long, default_value_t = 10_000)]
        n_max: usize,
        /// Depth floor in metres, or one of raceway, tubular, biofilm.
        #[arg(long)]
        h_min: Option<String>,
        /// Largest concentration searched [g/m^3].
        #[arg(long, default_value_t = 1e6)]
        cap: f64,
    },
    /// Closed-loop simulation under the dilution feedback law.
    Simulate {
        #[arg(long, default_value_t = 2500.0)]
        x0: f64,
        #[arg(long, default_value_t = 0.1)]
        h: f64,
        #[arg(long, default_value_t = 30.0)]
        t_end: f64,
        /// Saturated dilution [1/d]; defaults to 10 mu_max.
        #[arg(long)]
        d_max: Option<f64>,
        /// Target concentration; defaults to the best concentration at depth h.
        #[arg(long)]
        x_star: Option<f64>,
        /// Saturation threshold; defaults to the built-in rule.
        #[arg(long)]
        x_bar: Option<f64>,
    },
    /// Print the resolved parameters as a parameter file.
    Params,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match commands::run(&cli, &argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let numerical = e
                .chain()
                .find_map(|c| c.downcast_ref::<pbropt_core::Error>())
                .is_some_and(pbropt_core::Error::is_numerical);
            ExitCode::from(if numerical { 3 } else { 2 })
        }
    }
}
