//! TOML scenario files.
//!
//! Keys mirror [`SystemConfig`] one to one. Missing keys take the default
//! scenario's value and unknown keys are rejected.

use std::path::Path;

use crate::{HarnessError, Result};
use paim_core::config::SystemConfig;

/// Parses and validates a scenario.
pub fn parse_config(text: &str) -> Result<SystemConfig> {
    let cfg: SystemConfig =
        toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<SystemConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    parse_config(&text).map_err(|e| match e {
        HarnessError::Config(msg) => HarnessError::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// The scenario as a TOML document accepted by [`parse_config`].
pub fn to_toml(cfg: &SystemConfig) -> Result<String> {
    toml::to_string(cfg).map_err(|e| HarnessError::Config(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_file_takes_defaults() {
        let cfg = parse_config("n_t = 8\nmod_order = 2\n").unwrap();
        assert_eq!(cfg.n_t, 8);
        assert_eq!(cfg.mod_order, 2);
        assert_eq!(cfg.n0_dbm, -90.0);
    }

    #[test]
    fn unknown_key_is_an_error() {
        let err = parse_config("n_t = 8\nnum_tx = 3\n").unwrap_err();
        assert!(err.to_string().contains("num_tx"), "{err}");
    }

    #[test]
    fn invalid_values_are_rejected() {
        assert!(parse_config("n_a = 9\n").is_err());
        assert!(parse_config("mod_order = 3\n").is_err());
        assert!(parse_config("n_t = \"four\"\n").is_err());
    }

    #[test]
    fn round_trips_through_toml() {
        let cfg = SystemConfig {
            n_t: 6,
            n_wg: 2,
            p_t_dbm: 17.25,
            rx_position_m: [123.5, 40.0, 1.5],
            rng_seed: 99,
            ..SystemConfig::default()
        };
        assert_eq!(parse_config(&to_toml(&cfg).unwrap()).unwrap(), cfg);
    }
}
