//! Experiment harness for pinching-antenna index modulation.
//!
//! Runs seeded Monte Carlo BER sweeps, detector complexity measurements,
//! precoder A/B comparisons and `N_a` sweeps on top of [`paim_core`], and
//! handles the file formats: TOML scenarios, channel dumps, precoder weights
//! and CSV/JSON result tables.
//!
//! ```no_run
//! use paim::harness::{run_ber_sweep, ExperimentPlan};
//! use paim_core::config::SystemConfig;
//!
//! let mut plan = ExperimentPlan::new(SystemConfig::default());
//! plan.snr_points = vec![0.0, 10.0, 20.0];
//! plan.trials_per_point = 10_000;
//! let rows = run_ber_sweep(&plan)?;
//! paim::output::write_rows(&rows, paim::output::Format::Csv, std::io::stdout())?;
//! # Ok::<(), paim::HarnessError>(())
//! ```

pub mod config;
pub mod harness;
pub mod io;
pub mod output;
pub mod streams;

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] paim_core::Error),

    #[error("detection failed at trial {trial} of SNR point {snr}")]
    Trial {
        snr: f64,
        trial: u64,
        #[source]
        source: paim_core::Error,
    },

    #[error("invalid plan: {0}")]
    Plan(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Stream(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("malformed file: {0}")]
    Format(String),
}
