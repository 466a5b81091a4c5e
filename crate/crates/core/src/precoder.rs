//! Per-waveguide transmit weights chosen by Riemannian gradient descent on
//! the complex sphere `||w||^2 = N_wg`.
//!
//! The objective is the closed-form union bound conditioned on the channel.
//! For the pair `(i, j)` let `D_ij` be the `N_t N_wg x N_wg` block diagonal
//! matrix whose `k`-th column holds the waveguide-`k` part of
//! `x_i - x_j`; then `H W (x_i - x_j) = H D_ij w`.
//!
//! Gradients follow the convention `f(w + d) ~ f(w) + 2 Re{grad^H d}`.

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{compensated_sum, inner, norm_sqr, CMat};
use crate::modem::{Modem, DEFAULT_ENUMERATION_CAP};
use crate::{Error, Result, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct PrecodingVector {
    pub w: Vec<C64>,
    /// Objective value at `w`.
    pub objective: f64,
}

/// One unordered signal pair.
#[derive(Debug, Clone)]
pub struct PairBlock {
    /// `D_ij`.
    pub d_mat: CMat,
    /// `H D_ij`.
    pub hd: CMat,
    /// `2 n_ij / (eta 2^eta)`: both orders of the pair.
    weight: f64,
}

/// Cached `D_ij` and `H D_ij` for every pair of legitimate signals.
#[derive(Debug, Clone)]
pub struct PairDifferenceBlocks {
    pub pairs: Vec<PairBlock>,
    n_wg: usize,
    n_r: usize,
}

impl PairDifferenceBlocks {
    pub fn new(h: &CMat, modem: &Modem) -> Result<Self> {
        let (n_t, n_wg) = (modem.n_t(), modem.n_wg());
        if h.cols() != n_t * n_wg {
            return Err(Error::DimensionMismatch {
                what: "channel columns",
                expected: n_t * n_wg,
                found: h.cols(),
            });
        }
        let eta = modem.eta();
        if eta == 0 {
            return Err(Error::SingleSignal);
        }
        let frames = modem.enumerate_signal_set(DEFAULT_ENUMERATION_CAP)?;
        let norm = eta as f64 * libm::exp2(eta as f64);
        let mut pairs = Vec::new();
        for (a, fa) in frames.iter().enumerate() {
            for fb in &frames[a + 1..] {
                let n_bits = (fa.index ^ fb.index).count_ones();
                let d_mat = CMat::from_fn(n_t * n_wg, n_wg, |r, k| {
                    if r / n_t == k {
                        fa.x[r] - fb.x[r]
                    } else {
                        C64::new(0.0, 0.0)
                    }
                });
                let hd = h.matmul(&d_mat);
                pairs.push(PairBlock {
                    d_mat,
                    hd,
                    weight: 2.0 * n_bits as f64 / norm,
                });
            }
        }
        Ok(Self {
            pairs,
            n_wg,
            n_r: h.rows(),
        })
    }

    pub fn n_wg(&self) -> usize {
        self.n_wg
    }
}

fn exponent_scale(rho: f64, n0: f64) -> f64 {
    rho / (4.0 * n0)
}

/// `H D w` into `out`; returns `||H D w||^2`.
fn apply(hd: &CMat, w: &[C64], out: &mut [C64]) -> f64 {
    let mut g = 0.0;
    for (r, o) in out.iter_mut().enumerate() {
        *o = hd.row(r).iter().zip(w).map(|(a, b)| a * b).sum();
        g += o.norm_sqr();
    }
    g
}

/// `(e^{-a g}, e^{-4 a g / 3})` from a single exponential.
fn decays(a: f64, g: f64) -> (f64, f64) {
    let e = libm::exp(-a * g / 3.0);
    let e3 = e * e * e;
    (e3, e3 * e)
}

/// `sum n_ij / (eta 2^eta) [(1/12) exp(-a g) + (1/4) exp(-4 a g / 3)]`
/// with `g = ||H D_ij w||^2`, `a = rho / (4 N0)`.
pub fn objective_f(w: &[C64], blocks: &PairDifferenceBlocks, rho: f64, n0: f64) -> f64 {
    let a = exponent_scale(rho, n0);
    let mut v = vec![C64::new(0.0, 0.0); blocks.n_r];
    compensated_sum(blocks.pairs.iter().map(|p| {
        let (e1, e2) = decays(a, apply(&p.hd, w, &mut v));
        p.weight * (e1 / 12.0 + e2 / 4.0)
    }))
}

/// `-sum c_ij [(rho/48N0) e^{-a g} + (rho/12N0) e^{-4ag/3}] (HD)^H HD w`.
pub fn euclidean_gradient(w: &[C64], blocks: &PairDifferenceBlocks, rho: f64, n0: f64) -> Vec<C64> {
    let a = exponent_scale(rho, n0);
    let mut grad = vec![C64::new(0.0, 0.0); w.len()];
    let mut v = vec![C64::new(0.0, 0.0); blocks.n_r];
    for p in &blocks.pairs {
        let (e1, e2) = decays(a, apply(&p.hd, w, &mut v));
        let coeff = -p.weight * (a / 12.0 * e1 + a / 3.0 * e2);
        for (k, acc) in grad.iter_mut().enumerate() {
            let col: C64 = (0..blocks.n_r).map(|r| p.hd[(r, k)].conj() * v[r]).sum();
            *acc += col * coeff;
        }
    }
    grad
}

/// Projection onto the tangent space at `w`.
pub fn riemannian_gradient(w: &[C64], egrad: &[C64]) -> Vec<C64> {
    let k = inner(egrad, w).re / norm_sqr(w);
    egrad.iter().zip(w).map(|(g, x)| g - x * k).collect()
}

/// `sqrt(N_wg) (w + step) / ||w + step||`.
pub fn retract(w: &[C64], step: &[C64]) -> Result<Vec<C64>> {
    let v: Vec<C64> = w.iter().zip(step).map(|(a, b)| a + b).collect();
    let n = libm::sqrt(norm_sqr(&v));
    if n == 0.0 || !n.is_finite() {
        return Err(Error::RetractionUndefined);
    }
    let k = libm::sqrt(w.len() as f64) / n;
    Ok(v.iter().map(|z| z * k).collect())
}

/// `W = diag(w) ⊗ I_{N_t}`.
pub fn expand_to_matrix(w: &[C64], n_t: usize) -> CMat {
    CMat::from_diag(
        &w.iter()
            .flat_map(|&x| core::iter::repeat_n(x, n_t))
            .collect::<Vec<_>>(),
    )
}

/// `H W`: each column of waveguide `n` scaled by `w_n`.
pub fn apply_to_channel(h: &CMat, w: &[C64], n_t: usize) -> CMat {
    CMat::from_fn(h.rows(), h.cols(), |r, c| h[(r, c)] * w[c / n_t])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrecoderOptions {
    /// Relative objective decrease below which the iteration stops.
    pub tolerance: f64,
    pub grad_tolerance: f64,
    pub max_iterations: usize,
    pub initial_step: f64,
    pub contraction: f64,
    pub armijo_c: f64,
    pub max_halvings: usize,
}

impl Default for PrecoderOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            grad_tolerance: 1e-8,
            max_iterations: 500,
            initial_step: 1.0,
            contraction: 0.5,
            armijo_c: 1e-4,
            max_halvings: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrecoderOutcome {
    pub w: PrecodingVector,
    /// Objective at `w_0` followed by the value after every accepted step.
    pub history: Vec<f64>,
    pub iterations: usize,
    /// The line search found no admissible step.
    pub stalled: bool,
}

/// Armijo-backtracked Riemannian descent from `w_0 = 1`.
pub fn optimize_precoder(
    blocks: &PairDifferenceBlocks,
    rho: f64,
    n0: f64,
    opts: &PrecoderOptions,
) -> Result<PrecoderOutcome> {
    let mut w = vec![C64::new(1.0, 0.0); blocks.n_wg()];
    let mut f = objective_f(&w, blocks, rho, n0);
    let mut history = vec![f];
    let mut stalled = false;
    let mut iterations = 0;

    while iterations < opts.max_iterations {
        let rgrad = riemannian_gradient(&w, &euclidean_gradient(&w, blocks, rho, n0));
        let gnorm2 = norm_sqr(&rgrad);
        if libm::sqrt(gnorm2) < opts.grad_tolerance {
            break;
        }
        let mut beta = opts.initial_step;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let step: Vec<C64> = rgrad.iter().map(|g| g * -beta).collect();
            let cand = retract(&w, &step)?;
            let f_new = objective_f(&cand, blocks, rho, n0);
            if f_new <= f - opts.armijo_c * beta * gnorm2 {
                accepted = Some((cand, f_new));
                break;
            }
            beta *= opts.contraction;
        }
        let Some((w_new, f_new)) = accepted else {
            stalled = true;
            break;
        };
        iterations += 1;
        let decrease = f - f_new;
        w = w_new;
        f = f_new;
        history.push(f);
        if decrease <= opts.tolerance * f.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    Ok(PrecoderOutcome {
        w: PrecodingVector { w, objective: f },
        history,
        iterations,
        stalled,
    })
}
