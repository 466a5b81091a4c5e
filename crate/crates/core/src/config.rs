//! Scenario parameters.

use alloc::format;

use crate::{Error, Result};

/// All scenario parameters: antenna counts, modulation order, powers,
/// carrier and geometry constants.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields, default))]
pub struct SystemConfig {
    /// Candidate PA positions per waveguide.
    pub n_t: usize,
    /// Number of waveguides (one RF chain each).
    pub n_wg: usize,
    /// Activated PAs per waveguide.
    pub n_a: usize,
    /// Receive antennas.
    pub n_r: usize,
    /// QAM constellation size.
    pub mod_order: u32,
    /// Total transmit power (dBm).
    pub p_t_dbm: f64,
    /// Noise power (dBm).
    pub n0_dbm: f64,
    /// Carrier frequency (Hz).
    pub f_c_hz: f64,
    /// Effective refractive index of the waveguide.
    pub eta_eff: f64,
    /// Side of the square deployment region (m).
    pub area_side_m: f64,
    /// Waveguide height (m).
    pub tx_height_m: f64,
    /// Centre of the receive ULA (m).
    pub rx_position_m: [f64; 3],
    /// Shadow-fading split between PA-side and receiver-side terms.
    pub delta_sf: f64,
    /// Shadow-fading standard deviation (dB).
    pub sigma_sf_db: f64,
    /// Shadow-fading decorrelation distance (m).
    pub d_decorr_m: f64,
    pub rng_seed: u64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            n_t: 4,
            n_wg: 1,
            n_a: 1,
            n_r: 2,
            mod_order: 4,
            p_t_dbm: 20.0,
            n0_dbm: -90.0,
            f_c_hz: 3e9,
            eta_eff: 1.4,
            area_side_m: 500.0,
            tx_height_m: 12.5,
            rx_position_m: [400.0, 50.0, 1.5],
            delta_sf: 0.5,
            sigma_sf_db: 8.0,
            d_decorr_m: 100.0,
            rng_seed: 0,
        }
    }
}

/// Largest total bit count a transmit frame may carry.
pub const MAX_FRAME_BITS: u32 = 63;

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: alloc::string::String| Err(Error::InvalidConfig(msg));
        if self.n_t == 0 || self.n_wg == 0 || self.n_r == 0 {
            return bad(format!(
                "n_t, n_wg and n_r must be >= 1 (got {}, {}, {})",
                self.n_t, self.n_wg, self.n_r
            ));
        }
        if self.n_a == 0 || self.n_a > self.n_t {
            return bad(format!(
                "need 1 <= n_a <= n_t (got n_a = {}, n_t = {})",
                self.n_a, self.n_t
            ));
        }
        if self.n_t > 62 {
            return bad(format!("n_t = {} is too large", self.n_t));
        }
        if self.mod_order < 2 || !self.mod_order.is_power_of_two() {
            return Err(Error::InvalidModOrder(self.mod_order));
        }
        let finite = [
            ("p_t_dbm", self.p_t_dbm),
            ("n0_dbm", self.n0_dbm),
            ("f_c_hz", self.f_c_hz),
            ("eta_eff", self.eta_eff),
            ("area_side_m", self.area_side_m),
            ("tx_height_m", self.tx_height_m),
            ("rx_position_m[0]", self.rx_position_m[0]),
            ("rx_position_m[1]", self.rx_position_m[1]),
            ("rx_position_m[2]", self.rx_position_m[2]),
            ("delta_sf", self.delta_sf),
            ("sigma_sf_db", self.sigma_sf_db),
            ("d_decorr_m", self.d_decorr_m),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return bad(format!("{name} must be finite"));
            }
        }
        if self.f_c_hz <= 0.0 {
            return bad(format!("f_c_hz must be positive (got {})", self.f_c_hz));
        }
        if self.eta_eff <= 1.0 {
            return bad(format!("eta_eff must exceed 1 (got {})", self.eta_eff));
        }
        if self.area_side_m <= 0.0 {
            return bad(format!(
                "area_side_m must be positive (got {})",
                self.area_side_m
            ));
        }
        if !(0.0..=1.0).contains(&self.delta_sf) {
            return bad(format!(
                "delta_sf must lie in [0, 1] (got {})",
                self.delta_sf
            ));
        }
        if self.sigma_sf_db < 0.0 {
            return bad(format!(
                "sigma_sf_db must be >= 0 (got {})",
                self.sigma_sf_db
            ));
        }
        if self.d_decorr_m <= 0.0 {
            return bad(format!(
                "d_decorr_m must be positive (got {})",
                self.d_decorr_m
            ));
        }
        let eta = self.spectral_efficiency();
        if eta > MAX_FRAME_BITS {
            return bad(format!(
                "{eta} bits per frame exceeds the limit of {MAX_FRAME_BITS}"
            ));
        }
        Ok(())
    }

    /// Bits carried by the activation pattern of one waveguide.
    pub fn im_bits_per_waveguide(&self) -> u32 {
        floor_log2(binomial(self.n_t as u64, self.n_a as u64))
    }

    pub fn apm_bits_per_waveguide(&self) -> u32 {
        self.mod_order.trailing_zeros()
    }

    /// `eta = N_wg floor(log2 C(N_t, N_a)) + N_wg log2 M` bits per channel use.
    pub fn spectral_efficiency(&self) -> u32 {
        self.n_wg as u32 * (self.im_bits_per_waveguide() + self.apm_bits_per_waveguide())
    }

    /// Number of legitimate activation patterns across all waveguides.
    pub fn num_patterns(&self) -> u64 {
        1u64 << (self.im_bits_per_waveguide() as u64 * self.n_wg as u64)
    }

    pub fn wavelength_m(&self) -> f64 {
        crate::SPEED_OF_LIGHT / self.f_c_hz
    }

    pub fn guided_wavelength_m(&self) -> f64 {
        self.wavelength_m() / self.eta_eff
    }

    /// Normalized transmit power per activated antenna, `P_t / (N_wg N_a)` (mW).
    pub fn rho_mw(&self) -> f64 {
        crate::dbm_to_mw(self.p_t_dbm) / (self.n_wg * self.n_a) as f64
    }

    pub fn n0_mw(&self) -> f64 {
        crate::dbm_to_mw(self.n0_dbm)
    }

    /// Columns of the overall channel matrix, `N_t N_wg`.
    pub fn n_cols(&self) -> usize {
        self.n_t * self.n_wg
    }
}

pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}

fn floor_log2(x: u64) -> u32 {
    63 - x.leading_zeros()
}
