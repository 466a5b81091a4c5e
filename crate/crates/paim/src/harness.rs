//! Monte Carlo experiments.
//!
//! Trials are grouped into work units: one small-scale channel draw carrying
//! `frames_per_channel` frames. Unit `u` draws its channel, bits and noise
//! from substream `u`, and large-scale block `b` from its own substream, so
//! every SNR point, detector and precoding arm sees the same channels, bits
//! and noise (common random numbers). Units run in fixed-size batches on a
//! rayon pool and are reduced in unit order; early stopping is checked only
//! between batches. Results are therefore identical for any worker count.
//!
//! SNR axes:
//! - `normalized`: the axis value is `P_t beta_bar / N0` in dB, with `beta_bar`
//!   the mean large-scale gain of the current map.
//! - `power`: the axis value is `P_t` in dBm against the scenario's `N0`.
//!
//! In both cases `rho = P_t / (N_wg N_a)` and the noise is `CN(0, N0)` per
//! receive antenna.

use std::time::Instant;

use paim_core::analysis::{union_bound, BoundInput, PepVariant};
use paim_core::channel::{channel_statistics, ChannelModel, LargeScaleMap, LargeScaleSampler};
use paim_core::config::SystemConfig;
use paim_core::detector::{detect, DetectorKind};
use paim_core::geometry::{build_geometry, DeploymentGeometry};
use paim_core::linalg::CMat;
use paim_core::modem::{hamming, Modem};
use paim_core::precoder::{
    apply_to_channel, optimize_precoder, PairDifferenceBlocks, PrecoderOptions,
};
use paim_core::{db_to_linear, dbm_to_mw, linear_to_db, C64};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rayon::ThreadPool;
use serde::{Deserialize, Serialize};

use crate::streams::{stream, Domain};
use crate::{HarnessError, Result};

pub const DEFAULT_BLOCK_TRIALS: u64 = 100;
pub const DEFAULT_BATCH_UNITS: u64 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SnrAxis {
    Normalized,
    Power,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precoding {
    None,
    Manifold,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Ber,
    Complexity,
    PrecoderAb,
    NaSweep,
}

#[derive(Debug, Clone)]
pub struct ExperimentPlan {
    pub scenario: SystemConfig,
    pub snr_axis: SnrAxis,
    /// dB on the normalized axis, dBm of `P_t` on the power axis.
    pub snr_points: Vec<f64>,
    pub trials_per_point: u64,
    /// Stop a point once this many bit errors are counted.
    pub min_errors: Option<u64>,
    pub detector: DetectorKind,
    pub precoding: Precoding,
    pub seed: u64,
    /// Frames sent over each small-scale channel draw.
    pub frames_per_channel: u64,
    /// Trials per large-scale map; 0 keeps a single map for the whole run.
    pub large_scale_block: u64,
    pub workers: usize,
    /// Work units per batch; early stopping is checked between batches.
    pub batch_units: u64,
    pub precoder: PrecoderOptions,
    /// Attach the closed-form union bound, averaged over the maps visited.
    pub with_bound: bool,
    /// Measure wall time; otherwise `wall_time_s` is 0 so that output is
    /// reproducible byte for byte.
    pub timing: bool,
}

impl ExperimentPlan {
    pub fn new(scenario: SystemConfig) -> Self {
        Self {
            seed: scenario.rng_seed,
            scenario,
            snr_axis: SnrAxis::Normalized,
            snr_points: vec![0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0],
            trials_per_point: 1000,
            min_errors: None,
            detector: DetectorKind::Bosd,
            precoding: Precoding::None,
            frames_per_channel: 1,
            large_scale_block: DEFAULT_BLOCK_TRIALS,
            workers: 1,
            batch_units: DEFAULT_BATCH_UNITS,
            precoder: PrecoderOptions::default(),
            with_bound: false,
            timing: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(HarnessError::Plan(m));
        self.scenario.validate()?;
        if self.trials_per_point == 0 {
            return bad("trials_per_point must be >= 1".into());
        }
        if self.snr_points.is_empty() {
            return bad("the SNR axis is empty".into());
        }
        if self.snr_points.iter().any(|v| !v.is_finite()) {
            return bad("SNR points must be finite".into());
        }
        if self.snr_points.windows(2).any(|w| w[1] <= w[0]) {
            return bad("SNR points must be strictly increasing".into());
        }
        if self.frames_per_channel == 0 || self.workers == 0 || self.batch_units == 0 {
            return bad("frames_per_channel, workers and batch_units must be >= 1".into());
        }
        if self.scenario.spectral_efficiency() == 0 {
            return bad("the scenario carries no bits".into());
        }
        Ok(())
    }

    fn pool(&self) -> Result<ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| HarnessError::Plan(e.to_string()))
    }
}

/// One row of a result table. Field order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    /// Normalized SNR, or `P_t / N0` in dB on the power axis.
    pub snr_db: f64,
    pub bit_errors: u64,
    pub bits_sent: u64,
    pub ber: f64,
    pub mean_metric_evals: f64,
    pub mean_qp_solves: f64,
    pub wall_time_s: f64,
    pub bound_value: Option<f64>,
    pub experiment: Experiment,
    pub detector: DetectorKind,
    pub precoding: Precoding,
    pub mod_order: u32,
    pub n_wg: usize,
    pub n_a: usize,
    pub n_r: usize,
    /// Bits per channel use.
    pub eta: u32,
    /// Total transmit power, when it is the same for every trial of the point.
    pub pt_dbm: Option<f64>,
    /// `rho / N0` in dB, under the same condition.
    pub rho_n0_db: Option<f64>,
    pub trials: u64,
    pub mean_nodes_visited: f64,
    /// Precoder runs whose line search found no admissible step.
    pub precoder_stalled: u64,
    /// Precoder runs whose objective history increased somewhere.
    pub precoder_nonmonotone: u64,
}

/// Analytical bound at one SNR point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub snr_db: f64,
    pub bound: f64,
    pub bound_clamped: f64,
    pub variant: String,
}

/// Paired rows of a precoder A/B run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrecoderAb {
    pub rows: Vec<ResultRow>,
    pub target_ber: f64,
    /// SNR of the unprecoded arm minus that of the precoded arm at
    /// `target_ber`, when both curves cross it.
    pub gain_db: Option<f64>,
}

/// One transmitted frame: its index, transmit vector and unit-variance noise.
#[derive(Debug, Clone)]
pub struct FrameDraw {
    pub index: u64,
    pub x: Vec<C64>,
    pub noise: Vec<C64>,
}

/// Everything random about one work unit at one SNR point.
#[derive(Debug, Clone)]
pub struct UnitDraw {
    pub block: u64,
    pub h: CMat,
    pub rho: f64,
    pub frames: Vec<FrameDraw>,
}

impl UnitDraw {
    /// `y = sqrt(rho) H_eff x + sqrt(N0) n`.
    pub fn received(&self, h_eff: &CMat, frame: &FrameDraw, n0: f64) -> Vec<C64> {
        let (a, b) = (self.rho.sqrt(), n0.sqrt());
        h_eff
            .mul_vec(&frame.x)
            .iter()
            .zip(&frame.noise)
            .map(|(s, n)| s * a + n * b)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Tally {
    trials: u64,
    bits: u64,
    bit_errors: u64,
    metric_evals: u64,
    qp_solves: u64,
    nodes: u64,
    stalled: u64,
    nonmonotone: u64,
}

impl std::ops::AddAssign for Tally {
    fn add_assign(&mut self, o: Self) {
        self.trials += o.trials;
        self.bits += o.bits;
        self.bit_errors += o.bit_errors;
        self.metric_evals += o.metric_evals;
        self.qp_solves += o.qp_solves;
        self.nodes += o.nodes;
        self.stalled += o.stalled;
        self.nonmonotone += o.nonmonotone;
    }
}

/// Scenario state shared by all trials of a plan.
#[derive(Debug, Clone)]
pub struct Simulator {
    cfg: SystemConfig,
    geom: DeploymentGeometry,
    modem: Modem,
    sampler: LargeScaleSampler,
    n0: f64,
    seed: u64,
    axis: SnrAxis,
    frames_per_channel: u64,
    block: u64,
}

impl Simulator {
    pub fn new(plan: &ExperimentPlan) -> Result<Self> {
        plan.validate()?;
        let cfg = plan.scenario.clone();
        let geom = build_geometry(&cfg)?;
        Ok(Self {
            modem: Modem::new(&cfg)?,
            sampler: LargeScaleSampler::new(&geom, &cfg)?,
            n0: cfg.n0_mw(),
            geom,
            cfg,
            seed: plan.seed,
            axis: plan.snr_axis,
            frames_per_channel: plan.frames_per_channel,
            block: plan.large_scale_block,
        })
    }

    pub fn config(&self) -> &SystemConfig {
        &self.cfg
    }

    pub fn geometry(&self) -> &DeploymentGeometry {
        &self.geom
    }

    pub fn modem(&self) -> &Modem {
        &self.modem
    }

    pub fn n0_mw(&self) -> f64 {
        self.n0
    }

    pub fn block_of(&self, unit: u64) -> u64 {
        (unit * self.frames_per_channel)
            .checked_div(self.block)
            .unwrap_or(0)
    }

    pub fn large_scale_map(&self, block: u64) -> LargeScaleMap {
        self.sampler
            .sample(&mut stream(self.seed, Domain::LargeScale, block))
    }

    pub fn transmit_power_mw(&self, map: &LargeScaleMap, axis_value: f64) -> f64 {
        match self.axis {
            SnrAxis::Power => dbm_to_mw(axis_value),
            SnrAxis::Normalized => db_to_linear(axis_value) * self.n0 / map.mean_beta(),
        }
    }

    pub fn rho(&self, map: &LargeScaleMap, axis_value: f64) -> f64 {
        self.transmit_power_mw(map, axis_value) / (self.cfg.n_wg * self.cfg.n_a) as f64
    }

    /// Channel, bits and noise of unit `unit`, carrying `frames` frames.
    pub fn draw_unit(&self, unit: u64, frames: u64, axis_value: f64) -> Result<UnitDraw> {
        let block = self.block_of(unit);
        let map = self.large_scale_map(block);
        let model = ChannelModel::new(&self.geom, &map)?;
        let mut rng = stream(self.seed, Domain::SmallScale, unit);
        let h = model.draw(&mut rng);
        let eta = self.modem.eta();
        let frames = (0..frames)
            .map(|_| {
                let index = rng.random::<u64>() >> (64 - eta);
                let noise = (0..self.cfg.n_r)
                    .map(|_| {
                        let re: f64 = rng.sample(StandardNormal);
                        let im: f64 = rng.sample(StandardNormal);
                        C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
                    })
                    .collect();
                Ok(FrameDraw {
                    index,
                    x: self.modem.frame_from_index(index)?.x,
                    noise,
                })
            })
            .collect::<Result<_>>()?;
        Ok(UnitDraw {
            block,
            rho: self.rho(&map, axis_value),
            h,
            frames,
        })
    }

    fn units(&self, trials: u64) -> u64 {
        trials.div_ceil(self.frames_per_channel)
    }

    fn frames_in_unit(&self, trials: u64, unit: u64) -> u64 {
        self.frames_per_channel
            .min(trials - unit * self.frames_per_channel)
    }

    fn run_unit(&self, plan: &ExperimentPlan, axis_value: f64, unit: u64) -> Result<Tally> {
        let draw = self.draw_unit(
            unit,
            self.frames_in_unit(plan.trials_per_point, unit),
            axis_value,
        )?;
        let mut t = Tally::default();
        let h_eff = match plan.precoding {
            Precoding::None => draw.h.clone(),
            Precoding::Manifold => {
                let blocks = PairDifferenceBlocks::new(&draw.h, &self.modem)?;
                let out = optimize_precoder(&blocks, draw.rho, self.n0, &plan.precoder)?;
                t.stalled += out.stalled as u64;
                t.nonmonotone += out.history.windows(2).any(|w| w[1] > w[0]) as u64;
                apply_to_channel(&draw.h, &out.w.w, self.cfg.n_t)
            }
        };
        let eta = self.modem.eta() as u64;
        for (k, frame) in draw.frames.iter().enumerate() {
            let y = draw.received(&h_eff, frame, self.n0);
            let det =
                detect(plan.detector, &y, &h_eff, draw.rho, &self.modem).map_err(|source| {
                    HarnessError::Trial {
                        snr: axis_value,
                        trial: unit * self.frames_per_channel + k as u64,
                        source,
                    }
                })?;
            t.trials += 1;
            t.bits += eta;
            t.bit_errors += hamming(frame.index, det.index) as u64;
            t.metric_evals += det.counters.metric_evals;
            t.qp_solves += det.counters.qp_solves;
            t.nodes += det.counters.nodes_visited;
        }
        Ok(t)
    }

    /// Runs one SNR point; returns the tally and the number of units used.
    fn run_point(
        &self,
        plan: &ExperimentPlan,
        pool: &ThreadPool,
        axis_value: f64,
    ) -> Result<(Tally, u64)> {
        let units = self.units(plan.trials_per_point);
        let mut tally = Tally::default();
        let mut done = 0;
        while done < units {
            let end = (done + plan.batch_units).min(units);
            let parts: Vec<Result<Tally>> = pool.install(|| {
                (done..end)
                    .into_par_iter()
                    .map(|u| self.run_unit(plan, axis_value, u))
                    .collect()
            });
            for p in parts {
                tally += p?;
            }
            done = end;
            if plan.min_errors.is_some_and(|m| tally.bit_errors >= m) {
                break;
            }
        }
        Ok((tally, done))
    }

    /// Closed-form union bound averaged over the large-scale maps of the
    /// first `units` units.
    fn mean_bound(&self, pool: &ThreadPool, axis_value: f64, units: u64) -> Result<f64> {
        let blocks = self.block_of(units.saturating_sub(1)) + 1;
        let values: Vec<Result<f64>> = pool.install(|| {
            (0..blocks)
                .into_par_iter()
                .map(|b| {
                    let map = self.large_scale_map(b);
                    let stats = channel_statistics(&self.geom, &map)?;
                    let rho = self.rho(&map, axis_value);
                    Ok(union_bound(
                        &self.modem,
                        BoundInput::Statistics(&stats),
                        rho,
                        self.n0,
                        PepVariant::ClosedForm,
                        false,
                    )?
                    .value)
                })
                .collect()
        });
        let mut sum = 0.0;
        for v in values {
            sum += v?;
        }
        Ok(sum / blocks as f64)
    }

    fn snr_db(&self, axis_value: f64) -> f64 {
        match self.axis {
            SnrAxis::Normalized => axis_value,
            SnrAxis::Power => axis_value - self.cfg.n0_dbm,
        }
    }

    fn point_row(
        &self,
        plan: &ExperimentPlan,
        pool: &ThreadPool,
        experiment: Experiment,
        axis_value: f64,
    ) -> Result<ResultRow> {
        let start = Instant::now();
        let (t, units) = self.run_point(plan, pool, axis_value)?;
        let bound_value = match (plan.with_bound, plan.precoding) {
            (true, Precoding::None) => Some(self.mean_bound(pool, axis_value, units)?),
            _ => None,
        };
        let wall_time_s = if plan.timing {
            start.elapsed().as_secs_f64()
        } else {
            0.0
        };
        let single_map = self.block_of(units.saturating_sub(1)) == 0;
        let (pt_dbm, rho_n0_db) = if single_map || self.axis == SnrAxis::Power {
            let map = self.large_scale_map(0);
            let pt = self.transmit_power_mw(&map, axis_value);
            (
                Some(linear_to_db(pt)),
                Some(linear_to_db(self.rho(&map, axis_value) / self.n0)),
            )
        } else {
            (None, None)
        };
        let n = t.trials as f64;
        Ok(ResultRow {
            snr_db: self.snr_db(axis_value),
            bit_errors: t.bit_errors,
            bits_sent: t.bits,
            ber: t.bit_errors as f64 / t.bits as f64,
            mean_metric_evals: t.metric_evals as f64 / n,
            mean_qp_solves: t.qp_solves as f64 / n,
            wall_time_s,
            bound_value,
            experiment,
            detector: plan.detector,
            precoding: plan.precoding,
            mod_order: self.cfg.mod_order,
            n_wg: self.cfg.n_wg,
            n_a: self.cfg.n_a,
            n_r: self.cfg.n_r,
            eta: self.modem.eta(),
            pt_dbm,
            rho_n0_db,
            trials: t.trials,
            mean_nodes_visited: t.nodes as f64 / n,
            precoder_stalled: t.stalled,
            precoder_nonmonotone: t.nonmonotone,
        })
    }

    fn sweep(&self, plan: &ExperimentPlan, experiment: Experiment) -> Result<Vec<ResultRow>> {
        let pool = plan.pool()?;
        plan.snr_points
            .iter()
            .map(|&v| self.point_row(plan, &pool, experiment, v))
            .collect()
    }
}

fn sweep_as(plan: &ExperimentPlan, experiment: Experiment) -> Result<Vec<ResultRow>> {
    Simulator::new(plan)?.sweep(plan, experiment)
}

/// BER and search effort per SNR point.
pub fn run_ber_sweep(plan: &ExperimentPlan) -> Result<Vec<ResultRow>> {
    sweep_as(plan, Experiment::Ber)
}

/// Both detectors for every modulation order in `mod_orders`.
pub fn run_complexity_sweep(plan: &ExperimentPlan, mod_orders: &[u32]) -> Result<Vec<ResultRow>> {
    if mod_orders.is_empty() {
        return Err(HarnessError::Plan("no modulation orders given".into()));
    }
    let mut rows = Vec::new();
    for &m in mod_orders {
        for detector in [DetectorKind::Ml, DetectorKind::Bosd] {
            let mut p = plan.clone();
            p.scenario.mod_order = m;
            p.detector = detector;
            rows.extend(sweep_as(&p, Experiment::Complexity)?);
        }
    }
    Ok(rows)
}

/// Unprecoded and manifold-precoded arms on common random numbers.
pub fn run_precoder_ab(plan: &ExperimentPlan, target_ber: f64) -> Result<PrecoderAb> {
    if !(target_ber > 0.0 && target_ber < 1.0) {
        return Err(HarnessError::Plan(format!(
            "target BER {target_ber} outside (0, 1)"
        )));
    }
    let mut arms = Vec::new();
    for precoding in [Precoding::None, Precoding::Manifold] {
        let mut p = plan.clone();
        p.precoding = precoding;
        arms.push(sweep_as(&p, Experiment::PrecoderAb)?);
    }
    let gain_db = snr_gain_db(&arms[0], &arms[1], target_ber);
    Ok(PrecoderAb {
        rows: arms.concat(),
        target_ber,
        gain_db,
    })
}

/// BER against `N_a` at fixed total power.
pub fn run_na_sweep(plan: &ExperimentPlan, n_a_values: &[usize]) -> Result<Vec<ResultRow>> {
    if n_a_values.is_empty() {
        return Err(HarnessError::Plan("no N_a values given".into()));
    }
    let mut rows = Vec::new();
    for &n_a in n_a_values {
        if n_a == 0 || n_a > plan.scenario.n_t {
            return Err(HarnessError::Plan(format!(
                "N_a = {n_a} outside 1..={}",
                plan.scenario.n_t
            )));
        }
        let mut p = plan.clone();
        p.scenario.n_a = n_a;
        rows.extend(sweep_as(&p, Experiment::NaSweep)?);
    }
    Ok(rows)
}

/// Union bound per SNR point for the map of large-scale block 0.
pub fn bound_curve(plan: &ExperimentPlan, variant: PepVariant) -> Result<Vec<BoundRow>> {
    if variant == PepVariant::Conditional {
        return Err(HarnessError::Plan(
            "the conditional bound needs a fixed channel".into(),
        ));
    }
    let sim = Simulator::new(plan)?;
    let map = sim.large_scale_map(0);
    let stats = channel_statistics(&sim.geom, &map)?;
    plan.snr_points
        .iter()
        .map(|&v| {
            let b = union_bound(
                &sim.modem,
                BoundInput::Statistics(&stats),
                sim.rho(&map, v),
                sim.n0,
                variant,
                false,
            )?;
            Ok(BoundRow {
                snr_db: sim.snr_db(v),
                bound: b.value,
                bound_clamped: b.clamped,
                variant: variant.name().to_string(),
            })
        })
        .collect()
}

/// SNR at which a BER curve crosses `target`, interpolating `log10(ber)`
/// linearly in dB between the first bracketing pair of points.
pub fn snr_at_ber(curve: &[(f64, f64)], target: f64) -> Option<f64> {
    curve.windows(2).find_map(|w| {
        let ((s0, b0), (s1, b1)) = (w[0], w[1]);
        if b0 >= target && target >= b1 && b1 > 0.0 {
            let (l0, l1, lt) = (b0.log10(), b1.log10(), target.log10());
            Some(if l0 == l1 {
                s0
            } else {
                s0 + (s1 - s0) * (l0 - lt) / (l0 - l1)
            })
        } else {
            None
        }
    })
}

/// `SNR_none - SNR_manifold` at `target`.
pub fn snr_gain_db(none: &[ResultRow], manifold: &[ResultRow], target: f64) -> Option<f64> {
    let curve = |rows: &[ResultRow]| rows.iter().map(|r| (r.snr_db, r.ber)).collect::<Vec<_>>();
    Some(snr_at_ber(&curve(none), target)? - snr_at_ber(&curve(manifold), target)?)
}

/// `lo, lo + step, ...` up to `hi` inclusive.
pub fn snr_range(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite() && step.is_finite() && step > 0.0 && hi >= lo) {
        return Err(HarnessError::Plan(format!(
            "invalid SNR range {lo}:{hi}:{step}"
        )));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    Ok((0..n).map(|k| lo + k as f64 * step).collect())
}
