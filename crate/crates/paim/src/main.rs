use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use paim::config::load_config;
use paim::harness::{
    bound_curve, run_ber_sweep, run_complexity_sweep, run_na_sweep, run_precoder_ab, snr_range,
    ExperimentPlan, Precoding, SnrAxis,
};
use paim::output::{write_bound_rows, write_precoder_ab, write_rows, Format};
use paim_core::analysis::PepVariant;
use paim_core::config::SystemConfig;
use paim_core::detector::DetectorKind;

#[derive(Parser)]
#[command(
    name = "paim",
    version,
    about = "Pinching-antenna index modulation link simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// BER sweep for one detector and precoding mode
    Ber(Common),
    /// Search effort of ML and BO-SD against the modulation order
    Complexity {
        #[command(flatten)]
        common: Common,
        /// Modulation orders to compare
        #[arg(long, value_delimiter = ',', default_value = "4,16,64")]
        mod_orders: Vec<u32>,
    },
    /// Unprecoded vs manifold-precoded BER on common random numbers
    PrecoderAb {
        #[command(flatten)]
        common: Common,
        /// BER at which the SNR gain is estimated
        #[arg(long, default_value_t = 1e-3)]
        target_ber: f64,
    },
    /// BER against the number of activated PAs at fixed total power
    NaSweep {
        #[command(flatten)]
        common: Common,
        #[arg(long = "n-a", value_delimiter = ',', default_value = "1,2,4")]
        n_a: Vec<usize>,
    },
    /// Analytical BER upper bound
    Bound {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = VariantArg::ClosedForm)]
        variant: VariantArg,
    },
}

#[derive(Args)]
struct Common {
    /// Scenario file (TOML); defaults to the built-in scenario
    #[arg(long)]
    config: Option<PathBuf>,
    /// SNR points as lo:hi:step
    #[arg(long)]
    snr: Option<String>,
    /// Meaning of the SNR axis
    #[arg(long, value_enum, default_value_t = AxisArg::Normalized)]
    snr_axis: AxisArg,
    /// Trials per SNR point
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    /// Stop a point after this many bit errors
    #[arg(long)]
    min_errors: Option<u64>,
    #[arg(long, value_enum, default_value_t = DetectorArg::Bosd)]
    detector: DetectorArg,
    #[arg(long, value_enum, default_value_t = PrecodingArg::None)]
    precoding: PrecodingArg,
    /// Overrides the scenario's rng_seed
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Worker threads
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Frames per small-scale channel draw
    #[arg(long, default_value_t = 1)]
    frames_per_channel: u64,
    /// Trials per large-scale map (0 = one map for the whole run)
    #[arg(long, default_value_t = paim::harness::DEFAULT_BLOCK_TRIALS)]
    block: u64,
    /// Stopping tolerance of the precoder
    #[arg(long)]
    precoder_tol: Option<f64>,
    /// Attach the union bound to BER rows
    #[arg(long)]
    bound: bool,
    /// Record wall time (output is then no longer reproducible)
    #[arg(long)]
    timing: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum AxisArg {
    Normalized,
    Power,
}

#[derive(Clone, Copy, ValueEnum)]
enum DetectorArg {
    Ml,
    Bosd,
}

#[derive(Clone, Copy, ValueEnum)]
enum PrecodingArg {
    None,
    Manifold,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    ClosedForm,
    Quadrature,
}

fn parse_snr(arg: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = arg.split(':').collect();
    let [lo, hi, step] = parts[..] else {
        bail!("--snr expects lo:hi:step, got {arg:?}");
    };
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .with_context(|| format!("bad number {s:?} in --snr"))
    };
    Ok(snr_range(num(lo)?, num(hi)?, num(step)?)?)
}

impl Common {
    fn plan(&self) -> Result<ExperimentPlan> {
        let scenario = match &self.config {
            Some(path) => load_config(path)?,
            None => SystemConfig::default(),
        };
        let mut plan = ExperimentPlan::new(scenario);
        plan.snr_axis = match self.snr_axis {
            AxisArg::Normalized => SnrAxis::Normalized,
            AxisArg::Power => SnrAxis::Power,
        };
        plan.snr_points = match (&self.snr, plan.snr_axis) {
            (Some(s), _) => parse_snr(s)?,
            (None, SnrAxis::Power) => vec![plan.scenario.p_t_dbm],
            (None, SnrAxis::Normalized) => plan.snr_points,
        };
        plan.trials_per_point = self.trials;
        plan.min_errors = self.min_errors;
        plan.detector = match self.detector {
            DetectorArg::Ml => DetectorKind::Ml,
            DetectorArg::Bosd => DetectorKind::Bosd,
        };
        plan.precoding = match self.precoding {
            PrecodingArg::None => Precoding::None,
            PrecodingArg::Manifold => Precoding::Manifold,
        };
        if let Some(seed) = self.seed {
            plan.seed = seed;
        }
        plan.workers = self.workers;
        plan.frames_per_channel = self.frames_per_channel;
        plan.large_scale_block = self.block;
        if let Some(tol) = self.precoder_tol {
            if tol.is_nan() || tol <= 0.0 {
                bail!("--precoder-tol must be positive");
            }
            plan.precoder.tolerance = tol;
        }
        plan.with_bound = self.bound;
        plan.timing = self.timing;
        plan.validate()?;
        Ok(plan)
    }

    fn format(&self) -> Format {
        match self.format {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }

    fn sink(&self) -> Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(path) => Box::new(BufWriter::new(
                File::create(path).with_context(|| format!("cannot create {}", path.display()))?,
            )),
            None => Box::new(BufWriter::new(std::io::stdout().lock())),
        })
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ber(c) => {
            let rows = run_ber_sweep(&c.plan()?)?;
            write_rows(&rows, c.format(), c.sink()?)?;
        }
        Command::Complexity {
            common: c,
            mod_orders,
        } => {
            let rows = run_complexity_sweep(&c.plan()?, &mod_orders)?;
            write_rows(&rows, c.format(), c.sink()?)?;
        }
        Command::PrecoderAb {
            common: c,
            target_ber,
        } => {
            let ab = run_precoder_ab(&c.plan()?, target_ber)?;
            match ab.gain_db {
                Some(g) => eprintln!("SNR gain at BER {target_ber:e}: {g:.2} dB"),
                None => eprintln!("SNR gain at BER {target_ber:e}: not bracketed by the sweep"),
            }
            write_precoder_ab(&ab, c.format(), c.sink()?)?;
        }
        Command::NaSweep { common: c, n_a } => {
            let plan = c.plan()?;
            for &k in &n_a {
                let cfg = SystemConfig {
                    n_a: k,
                    ..plan.scenario.clone()
                };
                eprintln!(
                    "N_a = {k}: {} bits per channel use",
                    cfg.spectral_efficiency()
                );
            }
            let rows = run_na_sweep(&plan, &n_a)?;
            write_rows(&rows, c.format(), c.sink()?)?;
        }
        Command::Bound { common: c, variant } => {
            let variant = match variant {
                VariantArg::ClosedForm => PepVariant::ClosedForm,
                VariantArg::Quadrature => PepVariant::Quadrature,
            };
            let rows = bound_curve(&c.plan()?, variant)?;
            write_bound_rows(&rows, c.format(), c.sink()?)?;
        }
    }
    Ok(())
}

fn main() -> std::process::ExitCode {
    match run(Cli::parse()) {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::ExitCode::FAILURE
        }
    }
}
