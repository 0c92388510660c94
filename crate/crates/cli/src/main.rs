//! `semirad` — measure weighted resolvent norms of semiclassical radial
//! Schrödinger operators, verify phase/mollifier certificates and fit
//! scaling laws.

mod commands;
mod config;
mod output;
mod parallel;

use std::path::PathBuf;

use anyhow::Result;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "semirad",
    version,
    about = "Resolvent-norm laboratory for radial semiclassical Schrödinger operators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the angular mode table (degree, eigenvalue, nu, multiplicity).
    Modes {
        #[arg(long, default_value_t = 3)]
        dim: u32,
        #[arg(long)]
        h: f64,
        #[arg(long, default_value_t = 20.0)]
        r_max: f64,
        #[arg(long, default_value_t = 1.0)]
        energy: f64,
        #[arg(long, default_value_t = 0.0)]
        v_sup: f64,
        /// Emit structured records instead of the tab-separated table.
        #[arg(long)]
        json: bool,
    },
    /// Phase certificates for a regime: curvature constant, coercivity
    /// margin, remainder bound and the h-uniform phase/scale ratio.
    CarlemanCheck {
        #[arg(long)]
        regime: String,
        #[arg(long)]
        h: f64,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        energy: f64,
        #[arg(long, default_value_t = 1.0)]
        s: f64,
        #[arg(long, default_value_t = semirad::potential::DEFAULT_WEIERSTRASS_TERMS)]
        terms: u32,
    },
    /// Mollifier diagnostics: bump calibration, smoothing-error constants
    /// and their stability across smoothing lengths.
    MollifyCheck {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long, default_value_t = semirad::potential::DEFAULT_WEIERSTRASS_TERMS)]
        terms: u32,
        /// Comma-separated smoothing lengths.
        #[arg(long, default_value = "0.2,0.1,0.05,0.025", value_delimiter = ',')]
        thetas: Vec<f64>,
    },
    /// Either predict the scale/exponent plan for a regime (`--predict`)
    /// or fit a scaling model to a results file (`--input`).
    Fit {
        #[arg(long)]
        predict: bool,
        #[arg(long)]
        regime: Option<String>,
        #[arg(long)]
        h: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        rho: Option<f64>,
        /// Constant for the consistency certificate in predict mode.
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long, default_value_t = 1.0)]
        energy: f64,
        #[arg(long, default_value_t = 1.0)]
        v_sup: f64,
        /// Results CSV produced by `sweep`.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value = "pure-power")]
        model: String,
    },
    /// Run an h-sweep from a config file and write results.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Worker threads (default: one per logical CPU). Outputs are
        /// bit-identical for any value.
        #[arg(long)]
        threads: Option<usize>,
        /// Also write plot-ready (log(1/h), log g) columns.
        #[arg(long)]
        emit_plot_data: bool,
        /// Dump |u(r)| of the worst mode per row into this directory.
        #[arg(long)]
        dump_wave: Option<PathBuf>,
    },
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Modes {
            dim,
            h,
            r_max,
            energy,
            v_sup,
            json,
        } => commands::run_modes(dim, h, r_max, energy, v_sup, json),
        Command::CarlemanCheck {
            regime,
            h,
            delta,
            alpha,
            beta,
            rho,
            energy,
            s,
            terms,
        } => commands::run_carleman_check(&regime, h, delta, alpha, beta, rho, energy, s, terms),
        Command::MollifyCheck {
            alpha,
            beta,
            terms,
            thetas,
        } => commands::run_mollify_check(alpha, beta, terms, &thetas),
        Command::Fit {
            predict,
            regime,
            h,
            delta,
            alpha,
            beta,
            rho,
            c,
            energy,
            v_sup,
            input,
            model,
        } => {
            if predict {
                let regime = regime
                    .ok_or_else(|| anyhow::anyhow!("--predict needs --regime"))?;
                let h = h.ok_or_else(|| anyhow::anyhow!("--predict needs --h"))?;
                commands::run_fit_predict(&regime, h, delta, alpha, beta, rho, c, energy, v_sup)
            } else {
                let input = input
                    .ok_or_else(|| anyhow::anyhow!("use --predict or provide --input"))?;
                commands::run_fit_input(&input, &model)
            }
        }
        Command::Sweep {
            config,
            out,
            threads,
            emit_plot_data,
            dump_wave,
        } => commands::run_sweep_cmd(&config, &out, threads, emit_plot_data, dump_wave),
    }
}
