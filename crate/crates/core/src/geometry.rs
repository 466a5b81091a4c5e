//! Deployment geometry: waveguides parallel to the x-axis at the transmitter
//! height, candidate PA clusters centred on the point nearest the receiver,
//! and a half-wavelength receive ULA along x.

use alloc::vec::Vec;

use crate::config::SystemConfig;
use crate::{Error, Result};

pub type Point3 = [f64; 3];

pub fn distance(a: &Point3, b: &Point3) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    libm::sqrt(dx * dx + dy * dy + dz * dz)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeploymentGeometry {
    /// One feed point per waveguide.
    pub feed_points: Vec<Point3>,
    /// `candidate_pa_positions[n][j]`: candidate `j` on waveguide `n`.
    pub candidate_pa_positions: Vec<Vec<Point3>>,
    pub rx_elements: Vec<Point3>,
    /// Free-space wavelength (m).
    pub lambda_m: f64,
    /// Guided wavelength `lambda / eta_eff` (m).
    pub lambda_g_m: f64,
}

impl DeploymentGeometry {
    pub fn n_wg(&self) -> usize {
        self.feed_points.len()
    }

    pub fn n_t(&self) -> usize {
        self.candidate_pa_positions.first().map_or(0, Vec::len)
    }

    pub fn n_r(&self) -> usize {
        self.rx_elements.len()
    }

    /// Candidate position for channel column `col = n * N_t + j`.
    pub fn pa_position(&self, col: usize) -> &Point3 {
        let n_t = self.n_t();
        &self.candidate_pa_positions[col / n_t][col % n_t]
    }

    /// All candidate positions in channel-column order.
    pub fn pa_positions(&self) -> impl Iterator<Item = &Point3> {
        self.candidate_pa_positions.iter().flatten()
    }
}

/// Lays out waveguides, candidate PA positions and receive elements.
///
/// Waveguide `k` runs along x at `y = D (k + 1/2) / N_wg`, fed at `x = 0`.
/// Its `N_t` candidates are spaced `lambda / 2` and centred on the receiver's
/// x-coordinate.
pub fn build_geometry(cfg: &SystemConfig) -> Result<DeploymentGeometry> {
    cfg.validate()?;
    let lambda = cfg.wavelength_m();
    let lambda_g = lambda / cfg.eta_eff;
    let side = cfg.area_side_m;
    let z_tx = cfg.tx_height_m;
    let [rx_x, rx_y, rx_z] = cfg.rx_position_m;
    let spacing = lambda / 2.0;

    let mut feed_points = Vec::with_capacity(cfg.n_wg);
    let mut candidates = Vec::with_capacity(cfg.n_wg);
    for k in 0..cfg.n_wg {
        let y = side * (k as f64 + 0.5) / cfg.n_wg as f64;
        feed_points.push([0.0, y, z_tx]);
        let centre = rx_x;
        let offset = |j: usize| (j as f64 - (cfg.n_t as f64 - 1.0) / 2.0) * spacing;
        let x_min = centre + offset(0);
        let x_max = centre + offset(cfg.n_t - 1);
        if x_min < 0.0 || x_max > side {
            return Err(Error::ClusterOutOfBounds {
                waveguide: k,
                x_min,
                x_max,
                side,
            });
        }
        candidates.push(
            (0..cfg.n_t)
                .map(|j| [centre + offset(j), y, z_tx])
                .collect(),
        );
    }

    let rx_elements = (0..cfg.n_r)
        .map(|m| {
            let off = (m as f64 - (cfg.n_r as f64 - 1.0) / 2.0) * spacing;
            [rx_x + off, rx_y, rx_z]
        })
        .collect();

    Ok(DeploymentGeometry {
        feed_points,
        candidate_pa_positions: candidates,
        rx_elements,
        lambda_m: lambda,
        lambda_g_m: lambda_g,
    })
}
