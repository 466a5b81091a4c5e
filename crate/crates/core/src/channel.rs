//! Channel generation and second-order statistics.
//!
//! Each entry of the `N_r x (N_t N_wg)` channel is
//! `h = sqrt(beta) * (sqrt(K/(K+1)) * hbar + sqrt(1/(K+1)) * htilde) * gamma`,
//! where `beta` folds path loss and correlated shadowing, `hbar = 1` is the
//! deterministic LoS term, `htilde ~ CN(0, 1)` and `gamma` is the in-waveguide
//! phase shift from the feed point to the PA. Column `n * N_t + j` is candidate
//! `j` on waveguide `n`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, PI};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::config::SystemConfig;
use crate::geometry::{distance, DeploymentGeometry, Point3};
use crate::linalg::{commutation_matrix, symmetric_eigen, CMat};
use crate::{db_to_linear, Error, Result, C64};

/// Probability of a line-of-sight component at distance `d` (m).
pub fn los_probability(d: f64) -> f64 {
    if d < 300.0 {
        (1.0 - d / 300.0).clamp(0.0, 1.0)
    } else {
        0.0
    }
}

/// Linear Rician factor; zero without a LoS component.
pub fn rician_factor(d: f64, has_los: bool) -> f64 {
    if has_los {
        libm::pow(10.0, 1.3 - 0.003 * d)
    } else {
        0.0
    }
}

/// Path gain in dB, excluding shadowing.
pub fn path_loss_db(d: f64, has_los: bool) -> f64 {
    if has_los {
        -30.18 - 26.0 * libm::log10(d)
    } else {
        -34.53 - 38.0 * libm::log10(d)
    }
}

/// Unit-modulus phase accumulated between the feed point and a PA.
pub fn waveguide_phase(feed: &Point3, pa: &Point3, lambda_g: f64) -> C64 {
    let phi = -2.0 * PI * distance(feed, pa) / lambda_g;
    C64::new(libm::cos(phi), libm::sin(phi))
}

/// Row-major real or boolean grid shaped like the channel matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<T>,
}

impl<T: Copy> Grid<T> {
    pub fn filled(rows: usize, cols: usize, value: T) -> Self {
        Self {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> T {
        self.data[r * self.cols + c]
    }
}

/// Large-scale state of every (receive antenna, candidate PA) link.
#[derive(Debug, Clone, PartialEq)]
pub struct LargeScaleMap {
    /// Linear power gain including shadowing.
    pub beta: Grid<f64>,
    /// Linear Rician factor.
    pub k_factor: Grid<f64>,
    pub has_los: Grid<bool>,
    /// Correlated shadowing (dB).
    pub shadow_db: Grid<f64>,
}

impl LargeScaleMap {
    /// Map with the same `beta` and `K` on every link and no shadowing.
    pub fn uniform(n_r: usize, n_cols: usize, beta: f64, k_factor: f64) -> Self {
        Self {
            beta: Grid::filled(n_r, n_cols, beta),
            k_factor: Grid::filled(n_r, n_cols, k_factor),
            has_los: Grid::filled(n_r, n_cols, k_factor > 0.0),
            shadow_db: Grid::filled(n_r, n_cols, 0.0),
        }
    }

    pub fn n_r(&self) -> usize {
        self.beta.rows
    }

    pub fn n_cols(&self) -> usize {
        self.beta.cols
    }

    /// Mean of `beta` over all links.
    pub fn mean_beta(&self) -> f64 {
        self.beta.data.iter().sum::<f64>() / self.beta.data.len() as f64
    }

    fn check_shape(&self, geom: &DeploymentGeometry) -> Result<()> {
        let cols = geom.n_t() * geom.n_wg();
        for (grid_rows, grid_cols) in [
            (self.beta.rows, self.beta.cols),
            (self.k_factor.rows, self.k_factor.cols),
            (self.has_los.rows, self.has_los.cols),
        ] {
            if grid_rows != geom.n_r() {
                return Err(Error::DimensionMismatch {
                    what: "large-scale map rows",
                    expected: geom.n_r(),
                    found: grid_rows,
                });
            }
            if grid_cols != cols {
                return Err(Error::DimensionMismatch {
                    what: "large-scale map columns",
                    expected: cols,
                    found: grid_cols,
                });
            }
        }
        Ok(())
    }
}

/// Zero-mean Gaussian field over a point set with correlation
/// `2^(-d / d_decorr)` between points at distance `d`.
#[derive(Debug, Clone)]
pub struct CorrelatedField {
    n: usize,
    /// Symmetric square root of the correlation matrix, row-major.
    sqrt_corr: Vec<f64>,
}

const CORRELATION_JITTER: f64 = 1e-12;

impl CorrelatedField {
    pub fn new(points: &[Point3], d_decorr: f64) -> Result<Self> {
        let n = points.len();
        let mut corr = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                corr[i * n + j] = libm::exp2(-distance(&points[i], &points[j]) / d_decorr);
            }
            corr[i * n + i] += CORRELATION_JITTER;
        }
        let (vals, vecs) = symmetric_eigen(&corr, n);
        let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let max = vals.iter().copied().fold(0.0, f64::max);
        if min < -1e-9 * max.max(1.0) {
            return Err(Error::NotPositiveSemidefinite { eigenvalue: min });
        }
        let roots: Vec<f64> = vals.iter().map(|&v| libm::sqrt(v.max(0.0))).collect();
        let mut sqrt_corr = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                sqrt_corr[i * n + j] = (0..n)
                    .map(|k| vecs[i * n + k] * roots[k] * vecs[j * n + k])
                    .sum();
            }
        }
        Ok(Self { n, sqrt_corr })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Draws one realization with marginal standard deviation `sigma`.
    pub fn sample<R: Rng + ?Sized>(&self, sigma: f64, rng: &mut R) -> Vec<f64> {
        let g: Vec<f64> = (0..self.n)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        (0..self.n)
            .map(|i| {
                sigma
                    * (0..self.n)
                        .map(|k| self.sqrt_corr[i * self.n + k] * g[k])
                        .sum::<f64>()
            })
            .collect()
    }
}

/// Draws large-scale maps for a fixed geometry.
#[derive(Debug, Clone)]
pub struct LargeScaleSampler {
    pa_field: CorrelatedField,
    rx_field: CorrelatedField,
    /// Link distances, `N_r x (N_t N_wg)`.
    distances: Grid<f64>,
    sigma_sf_db: f64,
    delta_sf: f64,
}

impl LargeScaleSampler {
    pub fn new(geom: &DeploymentGeometry, cfg: &SystemConfig) -> Result<Self> {
        if cfg.d_decorr_m <= 0.0 || !(0.0..=1.0).contains(&cfg.delta_sf) {
            return Err(Error::InvalidConfig(alloc::format!(
                "shadow fading needs d_decorr > 0 and 0 <= delta <= 1 (got {}, {})",
                cfg.d_decorr_m,
                cfg.delta_sf
            )));
        }
        let pa: Vec<Point3> = geom.pa_positions().copied().collect();
        let pa_field = CorrelatedField::new(&pa, cfg.d_decorr_m)?;
        let rx_field = CorrelatedField::new(&geom.rx_elements, cfg.d_decorr_m)?;
        let distances = Grid::from_fn(geom.n_r(), pa.len(), |i, c| {
            distance(&geom.rx_elements[i], &pa[c])
        });
        Ok(Self {
            pa_field,
            rx_field,
            distances,
            sigma_sf_db: cfg.sigma_sf_db,
            delta_sf: cfg.delta_sf,
        })
    }

    pub fn distances(&self) -> &Grid<f64> {
        &self.distances
    }

    /// `F = sqrt(delta) a_j^n + sqrt(1 - delta) b_i` in dB.
    pub fn sample_shadow<R: Rng + ?Sized>(&self, rng: &mut R) -> Grid<f64> {
        let a = self.pa_field.sample(self.sigma_sf_db, rng);
        let b = self.rx_field.sample(self.sigma_sf_db, rng);
        let (wa, wb) = (libm::sqrt(self.delta_sf), libm::sqrt(1.0 - self.delta_sf));
        Grid::from_fn(b.len(), a.len(), |i, c| wa * a[c] + wb * b[i])
    }

    /// Draws shadowing, then LoS existence per link, then `K` and `beta`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> LargeScaleMap {
        let shadow_db = self.sample_shadow(rng);
        let d = &self.distances;
        let has_los = Grid::from_fn(d.rows, d.cols, |i, c| {
            rng.random_bool(los_probability(d.get(i, c)))
        });
        let k_factor = Grid::from_fn(d.rows, d.cols, |i, c| {
            rician_factor(d.get(i, c), has_los.get(i, c))
        });
        let beta = Grid::from_fn(d.rows, d.cols, |i, c| {
            db_to_linear(path_loss_db(d.get(i, c), has_los.get(i, c)) + shadow_db.get(i, c))
        });
        LargeScaleMap {
            beta,
            k_factor,
            has_los,
            shadow_db,
        }
    }
}

/// Correlated shadowing over all candidate PA positions and receive elements.
pub fn sample_shadow_field<R: Rng + ?Sized>(
    geom: &DeploymentGeometry,
    cfg: &SystemConfig,
    rng: &mut R,
) -> Result<Grid<f64>> {
    Ok(LargeScaleSampler::new(geom, cfg)?.sample_shadow(rng))
}

/// `Gamma`: the `N_r x (N_t N_wg)` matrix of feed-to-PA phase shifts.
pub fn phase_matrix(geom: &DeploymentGeometry) -> CMat {
    let n_t = geom.n_t();
    let cols = n_t * geom.n_wg();
    CMat::from_fn(geom.n_r(), cols, |_, c| {
        waveguide_phase(
            &geom.feed_points[c / n_t],
            geom.pa_position(c),
            geom.lambda_g_m,
        )
    })
}

/// One channel draw together with the factors it was composed from.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    pub h: CMat,
    /// `sqrt(beta)`.
    pub b: CMat,
    /// `sqrt(K / (K + 1))`.
    pub k_los: CMat,
    /// `sqrt(1 / (K + 1))`.
    pub k_nlos: CMat,
    /// Deterministic LoS component (all ones).
    pub h_bar: CMat,
    /// Scattered component, i.i.d. `CN(0, 1)`.
    pub h_tilde: CMat,
    pub gamma: CMat,
    n_t: usize,
}

impl ChannelRealization {
    /// `B ⊙ (K_LoS ⊙ H̄ + K_NLoS ⊙ H̃) ⊙ Γ`, recomputed from the stored factors.
    pub fn recompose(&self) -> CMat {
        self.b
            .hadamard(
                &self
                    .k_los
                    .hadamard(&self.h_bar)
                    .add(&self.k_nlos.hadamard(&self.h_tilde)),
            )
            .hadamard(&self.gamma)
    }

    /// Columns `n N_t .. (n + 1) N_t` of a full-width factor.
    pub fn waveguide_block(&self, m: &CMat, n: usize) -> CMat {
        CMat::from_fn(m.rows(), self.n_t, |r, c| m[(r, n * self.n_t + c)])
    }

    /// Sub-channel `H_n` of waveguide `n`.
    pub fn sub_channel(&self, n: usize) -> CMat {
        self.waveguide_block(&self.h, n)
    }
}

fn sample_cn<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
}

fn factor_matrices(
    geom: &DeploymentGeometry,
    ls: &LargeScaleMap,
) -> Result<(CMat, CMat, CMat, CMat)> {
    ls.check_shape(geom)?;
    let (rows, cols) = (ls.n_r(), ls.n_cols());
    let real = |v: f64| C64::new(v, 0.0);
    let b = CMat::from_fn(rows, cols, |r, c| real(libm::sqrt(ls.beta.get(r, c))));
    let k_los = CMat::from_fn(rows, cols, |r, c| {
        let k = ls.k_factor.get(r, c);
        real(libm::sqrt(k / (k + 1.0)))
    });
    let k_nlos = CMat::from_fn(rows, cols, |r, c| {
        real(libm::sqrt(1.0 / (ls.k_factor.get(r, c) + 1.0)))
    });
    Ok((b, k_los, k_nlos, phase_matrix(geom)))
}

/// Draws the small-scale fading for a fixed large-scale map and assembles `H`.
pub fn realize_channel<R: Rng + ?Sized>(
    geom: &DeploymentGeometry,
    large_scale: &LargeScaleMap,
    rng: &mut R,
) -> Result<ChannelRealization> {
    let (b, k_los, k_nlos, gamma) = factor_matrices(geom, large_scale)?;
    let (rows, cols) = (b.rows(), b.cols());
    let h_bar = CMat::from_fn(rows, cols, |_, _| C64::new(1.0, 0.0));
    let h_tilde = CMat::from_fn(rows, cols, |_, _| sample_cn(rng));
    let mut real = ChannelRealization {
        h: CMat::zeros(rows, cols),
        b,
        k_los,
        k_nlos,
        h_bar,
        h_tilde,
        gamma,
        n_t: geom.n_t(),
    };
    real.h = real.recompose();
    Ok(real)
}

/// Per-link mean and scattered scale, precomputed for repeated draws under one
/// large-scale map.
///
/// [`ChannelModel::draw`] consumes the RNG exactly like [`realize_channel`]
/// and returns `mean + scale * htilde` entrywise.
#[derive(Debug, Clone)]
pub struct ChannelModel {
    mean: CMat,
    scale: CMat,
}

impl ChannelModel {
    pub fn new(geom: &DeploymentGeometry, large_scale: &LargeScaleMap) -> Result<Self> {
        let (b, k_los, k_nlos, gamma) = factor_matrices(geom, large_scale)?;
        Ok(Self {
            mean: b.hadamard(&k_los).hadamard(&gamma),
            scale: b.hadamard(&k_nlos).hadamard(&gamma),
        })
    }

    pub fn mean(&self) -> &CMat {
        &self.mean
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> CMat {
        let mut h = self.mean.clone();
        for (z, s) in h.as_mut_slice().iter_mut().zip(self.scale.as_slice()) {
            *z += *s * sample_cn(rng);
        }
        h
    }
}

/// Mean and covariance of `u = vec(H^H)`, conditioned on the large-scale map.
#[derive(Debug, Clone)]
pub struct ChannelStatistics {
    pub u_bar: Vec<C64>,
    pub c_u: CMat,
    /// `K` with `K vec(A) = vec(A^T)` for `A` of shape `N_r x (N_t N_wg)`.
    pub k_commutation: CMat,
    n_r: usize,
    n_cols: usize,
}

impl ChannelStatistics {
    pub fn n_r(&self) -> usize {
        self.n_r
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn dim(&self) -> usize {
        self.u_bar.len()
    }

    /// Statistics of a known channel: `u_bar = vec(H^H)`, `C_u = 0`.
    pub fn deterministic(h: &CMat) -> Self {
        let (n_r, n_cols) = (h.rows(), h.cols());
        Self {
            u_bar: h.adjoint().vec(),
            c_u: CMat::zeros(n_r * n_cols, n_r * n_cols),
            k_commutation: commutation_matrix(n_r, n_cols),
            n_r,
            n_cols,
        }
    }

    /// Assembles statistics from an explicit mean and covariance of `vec(H^H)`.
    pub fn from_moments(n_r: usize, n_cols: usize, u_bar: Vec<C64>, c_u: CMat) -> Result<Self> {
        let dim = n_r * n_cols;
        if u_bar.len() != dim || c_u.rows() != dim || c_u.cols() != dim {
            return Err(Error::DimensionMismatch {
                what: "channel statistics",
                expected: dim,
                found: u_bar.len(),
            });
        }
        Ok(Self {
            u_bar,
            c_u,
            k_commutation: commutation_matrix(n_r, n_cols),
            n_r,
            n_cols,
        })
    }
}

/// Exact `E{vec(H^H)}` and covariance of `vec(H^H)` given the large-scale map.
///
/// Both are first assembled in `vec(H^*)` order, i.e. the per-waveguide blocks
/// `vec(H_n^*)` stacked, and then permuted by the commutation matrix. The mean
/// carries the deterministic LoS matrix and the covariance the NLoS weights.
pub fn channel_statistics(
    geom: &DeploymentGeometry,
    large_scale: &LargeScaleMap,
) -> Result<ChannelStatistics> {
    let (b, k_los, k_nlos, gamma) = factor_matrices(geom, large_scale)?;
    let (n_r, n_cols) = (b.rows(), b.cols());
    let h_bar = CMat::from_fn(n_r, n_cols, |_, _| C64::new(1.0, 0.0));

    let stacked_mean = b.conj().vec();
    let stacked_mean: Vec<C64> = stacked_mean
        .iter()
        .zip(k_los.conj().vec())
        .zip(h_bar.conj().vec())
        .zip(gamma.conj().vec())
        .map(|(((b, k), h), g)| b * k * h * g)
        .collect();

    // vec(B*)vec(B*)^H ⊙ vec(K_NLoS*)vec(K_NLoS*)^H ⊙ I ⊙ vec(Γ*)vec(Γ*)^H is
    // diagonal; build it entry by entry.
    let bv = b.conj().vec();
    let kv = k_nlos.conj().vec();
    let gv = gamma.conj().vec();
    let dim = n_r * n_cols;
    let mut stacked_cov = CMat::zeros(dim, dim);
    for i in 0..dim {
        stacked_cov[(i, i)] =
            (bv[i] * bv[i].conj()) * (kv[i] * kv[i].conj()) * (gv[i] * gv[i].conj());
    }

    let k = commutation_matrix(n_r, n_cols);
    let u_bar = k.mul_vec(&stacked_mean);
    let c_u = k.matmul(&stacked_cov).matmul(&k.transpose());
    Ok(ChannelStatistics {
        u_bar,
        c_u,
        k_commutation: k,
        n_r,
        n_cols,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_geometry;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn los_probability_values() {
        assert!((los_probability(150.0) - 0.5).abs() < 1e-15);
        assert_eq!(los_probability(300.0), 0.0);
        assert_eq!(los_probability(1000.0), 0.0);
        assert!((los_probability(1e-9) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rician_factor_values() {
        assert!((rician_factor(100.0, true) - 10.0).abs() < 1e-12);
        assert_eq!(rician_factor(100.0, false), 0.0);
        assert!((rician_factor(1300.0 / 3.0, true) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn path_loss_values() {
        assert!((path_loss_db(1.0, true) + 30.18).abs() < 1e-12);
        assert!((path_loss_db(100.0, true) + 82.18).abs() < 1e-12);
        assert!((path_loss_db(10.0, false) + 72.53).abs() < 1e-12);
    }

    #[test]
    fn phase_examples() {
        let lg = 0.07;
        let feed = [0.0, 1.0, 2.0];
        assert!((waveguide_phase(&feed, &[lg, 1.0, 2.0], lg) - C64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(
            (waveguide_phase(&feed, &[lg / 2.0, 1.0, 2.0], lg) - C64::new(-1.0, 0.0)).norm()
                < 1e-12
        );
        assert_eq!(waveguide_phase(&feed, &feed, lg), C64::new(1.0, 0.0));
    }

    #[test]
    fn correlated_field_same_point_is_fully_correlated() {
        let f = CorrelatedField::new(&[[0.0; 3], [0.0; 3], [100.0, 0.0, 0.0]], 100.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let s = f.sample(8.0, &mut rng);
            assert!((s[0] - s[1]).abs() < 1e-4);
        }
    }

    #[test]
    fn shadow_variance_is_sigma_squared() {
        let cfg = SystemConfig::default();
        let geom = build_geometry(&cfg).unwrap();
        let sampler = LargeScaleSampler::new(&geom, &cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 20_000;
        let mut acc = 0.0;
        let mut acc2 = 0.0;
        for _ in 0..n {
            let f = sampler.sample_shadow(&mut rng).get(1, 2);
            acc += f;
            acc2 += f * f;
        }
        let mean = acc / n as f64;
        let var = acc2 / n as f64 - mean * mean;
        // sigma^2 = 64; the sample variance of 2e4 draws has relative sd ~1%.
        assert!((var - 64.0).abs() < 64.0 * 0.05, "var = {var}");
    }

    #[test]
    fn realization_recomposes_and_phases_are_unit() {
        let cfg = SystemConfig {
            n_wg: 2,
            n_r: 3,
            ..SystemConfig::default()
        };
        let geom = build_geometry(&cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let ls = LargeScaleSampler::new(&geom, &cfg)
            .unwrap()
            .sample(&mut rng);
        let real = realize_channel(&geom, &ls, &mut rng).unwrap();
        assert!(real.recompose().max_abs_diff(&real.h) == 0.0);
        for g in real.gamma.as_slice() {
            assert!((g.norm() - 1.0).abs() < 1e-12);
        }
        assert_eq!(real.gamma, phase_matrix(&geom));
        let h2 = real.sub_channel(1);
        assert_eq!(h2[(2, 3)], real.h[(2, 7)]);
    }

    #[test]
    fn channel_model_matches_realization_draws() {
        let cfg = SystemConfig::default();
        let geom = build_geometry(&cfg).unwrap();
        let ls = LargeScaleMap::uniform(2, 4, 2.0, 3.0);
        let model = ChannelModel::new(&geom, &ls).unwrap();
        let a = realize_channel(&geom, &ls, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        let b = model.draw(&mut ChaCha8Rng::seed_from_u64(4));
        assert!(a.h.max_abs_diff(&b) < 1e-14);
    }

    #[test]
    fn deterministic_seed_gives_identical_channel() {
        let cfg = SystemConfig::default();
        let geom = build_geometry(&cfg).unwrap();
        let sampler = LargeScaleSampler::new(&geom, &cfg).unwrap();
        let run = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let ls = sampler.sample(&mut rng);
            realize_channel(&geom, &ls, &mut rng).unwrap().h
        };
        assert_eq!(run(77), run(77));
    }

    #[test]
    fn strong_los_limit_has_modulus_sqrt_beta() {
        let cfg = SystemConfig::default();
        let geom = build_geometry(&cfg).unwrap();
        let ls = LargeScaleMap::uniform(2, 4, 4.0, 1e12);
        let real = realize_channel(&geom, &ls, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        for z in real.h.as_slice() {
            assert!((z.norm() - 2.0).abs() < 1e-5);
        }
    }

    #[test]
    fn statistics_without_los_have_zero_mean() {
        let cfg = SystemConfig::default();
        let geom = build_geometry(&cfg).unwrap();
        let ls = LargeScaleMap::uniform(2, 4, 1.5, 0.0);
        let stats = channel_statistics(&geom, &ls).unwrap();
        assert!(stats.u_bar.iter().all(|z| z.norm() == 0.0));
        assert!((stats.c_u.trace().re - 1.5 * 8.0).abs() < 1e-12);
    }

    #[test]
    fn covariance_is_hermitian_psd_with_expected_trace() {
        let cfg = SystemConfig {
            n_wg: 2,
            ..SystemConfig::default()
        };
        let geom = build_geometry(&cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let ls = LargeScaleSampler::new(&geom, &cfg)
            .unwrap()
            .sample(&mut rng);
        let stats = channel_statistics(&geom, &ls).unwrap();
        let c = &stats.c_u;
        assert!(c.max_abs_diff(&c.adjoint()) == 0.0);
        let expected: f64 = ls
            .beta
            .data
            .iter()
            .zip(&ls.k_factor.data)
            .map(|(b, k)| b / (k + 1.0))
            .sum();
        assert!((c.trace().re - expected).abs() <= 1e-12 * expected);
        for i in 0..c.rows() {
            assert!(c[(i, i)].im == 0.0 && c[(i, i)].re >= 0.0);
        }
    }

    #[test]
    fn mean_vector_is_vec_of_mean_channel_adjoint() {
        let cfg = SystemConfig {
            n_wg: 2,
            n_r: 3,
            ..SystemConfig::default()
        };
        let geom = build_geometry(&cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let ls = LargeScaleSampler::new(&geom, &cfg)
            .unwrap()
            .sample(&mut rng);
        let stats = channel_statistics(&geom, &ls).unwrap();
        let model = ChannelModel::new(&geom, &ls).unwrap();
        let direct = model.mean().adjoint().vec();
        for (a, b) in stats.u_bar.iter().zip(&direct) {
            assert!((a - b).norm() <= 1e-15 * b.norm().max(1e-300));
        }
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let cfg = SystemConfig::default();
        let geom = build_geometry(&cfg).unwrap();
        let ls = LargeScaleMap::uniform(3, 4, 1.0, 1.0);
        assert!(matches!(
            channel_statistics(&geom, &ls),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
