//! Pairwise error probabilities and the union bound on the bit error rate.
//!
//! For a pair of signals with difference `delta = x_i - x_j` the received
//! distance is the Hermitian form `gamma = u^H Q u`, `u = vec(H^H)`,
//! `Q = I_{N_r} ⊗ delta delta^H`. Given the large-scale state, `u` is complex
//! Gaussian, so `E{exp(s gamma)}` has a closed resolvent/determinant form.
//! Since `Q = V V^H` with `V = I_{N_r} ⊗ delta`, that form is evaluated on the
//! `N_r x N_r` core `V^H C_u V`.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_4, SQRT_2};

use crate::channel::ChannelStatistics;
use crate::linalg::{compensated_sum, gauss_legendre, inner, CMat, Lu};
use crate::modem::{hamming, Modem, TransmitFrame, DEFAULT_ENUMERATION_CAP};
use crate::{Error, Result, C64};

pub const DEFAULT_QUADRATURE_ORDER: usize = 64;

/// Gaussian tail probability.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

fn h_delta_norm_sqr(h: &CMat, delta: &[C64]) -> f64 {
    h.mul_vec(delta).iter().map(|z| z.norm_sqr()).sum()
}

/// `Q(sqrt(rho ||H delta||^2 / (2 N0)))`.
pub fn conditional_pep(h: &CMat, delta: &[C64], rho: f64, n0: f64) -> f64 {
    q_function(libm::sqrt(rho * h_delta_norm_sqr(h, delta) / (2.0 * n0)))
}

/// One ordered signal pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseContext {
    pub delta: Vec<C64>,
    pub n_bits: u32,
}

impl PairwiseContext {
    pub fn new(a: &TransmitFrame, b: &TransmitFrame) -> Self {
        Self {
            delta: a.x.iter().zip(&b.x).map(|(p, q)| p - q).collect(),
            n_bits: hamming(a.index, b.index),
        }
    }

    /// Dense `I_{N_r} ⊗ delta delta^H`.
    pub fn q_form(&self, n_r: usize) -> CMat {
        let n = self.delta.len();
        let dd = CMat::from_fn(n, n, |i, j| self.delta[i] * self.delta[j].conj());
        CMat::identity(n_r).kron(&dd)
    }
}

/// `u^H Q u` with `u = vec(H^H)` and `Q = I_{N_r} ⊗ delta delta^H`, formed
/// explicitly.
pub fn quadratic_form_value(h: &CMat, delta: &[C64]) -> f64 {
    let u = h.adjoint().vec();
    let q = PairwiseContext {
        delta: delta.to_vec(),
        n_bits: 0,
    }
    .q_form(h.rows());
    inner(&u, &q.mul_vec(&u)).re
}

/// `exp(s u_bar^H Q (I - s C Q)^{-1} u_bar) / det(I - s C Q)` on the full
/// `N_r N_t N_wg` space.
pub fn pep_mgf(stats: &ChannelStatistics, q_form: &CMat, s: f64) -> Result<f64> {
    let dim = stats.dim();
    if q_form.rows() != dim || q_form.cols() != dim {
        return Err(Error::DimensionMismatch {
            what: "quadratic form",
            expected: dim,
            found: q_form.rows(),
        });
    }
    let sc = C64::new(s, 0.0);
    let a = CMat::identity(dim).sub(&stats.c_u.matmul(q_form).scale(sc));
    let lu = Lu::new(&a).map_err(|_| Error::SingularResolvent { s })?;
    let w = lu.solve(&stats.u_bar);
    let exponent = sc * inner(&stats.u_bar, &q_form.mul_vec(&w));
    Ok(libm::exp((exponent - lu.log_det()).re))
}

/// MGF of `gamma` for one pair, reduced to the `N_r`-dimensional core.
#[derive(Debug, Clone)]
pub struct MgfCore {
    /// `V^H u_bar`.
    a: Vec<C64>,
    /// `V^H C_u V`.
    m: CMat,
}

impl MgfCore {
    pub fn new(stats: &ChannelStatistics, delta: &[C64]) -> Result<Self> {
        let (n_r, n) = (stats.n_r(), stats.n_cols());
        if delta.len() != n {
            return Err(Error::DimensionMismatch {
                what: "signal difference",
                expected: n,
                found: delta.len(),
            });
        }
        // Block m of u and of V is indexed by k + m * n.
        let a = (0..n_r)
            .map(|m| {
                (0..n)
                    .map(|k| delta[k].conj() * stats.u_bar[k + m * n])
                    .sum()
            })
            .collect();
        let support: Vec<usize> = (0..n).filter(|&k| delta[k] != C64::new(0.0, 0.0)).collect();
        let m = CMat::from_fn(n_r, n_r, |p, q| {
            let mut acc = C64::new(0.0, 0.0);
            for &k in &support {
                for &l in &support {
                    acc += delta[k].conj() * stats.c_u[(k + p * n, l + q * n)] * delta[l];
                }
            }
            acc
        });
        Ok(Self { a, m })
    }

    pub fn eval(&self, s: f64) -> Result<f64> {
        let sc = C64::new(s, 0.0);
        let core = CMat::identity(self.a.len()).sub(&self.m.scale(sc));
        let lu = Lu::new(&core).map_err(|_| Error::SingularResolvent { s })?;
        let w = lu.solve(&self.a);
        let exponent = sc * inner(&self.a, &w);
        Ok(libm::exp((exponent - lu.log_det()).re))
    }
}

/// Same value as [`pep_mgf`] for `Q = I ⊗ delta delta^H`, via the core.
pub fn pep_mgf_low_rank(stats: &ChannelStatistics, delta: &[C64], s: f64) -> Result<f64> {
    MgfCore::new(stats, delta)?.eval(s)
}

/// `(1/pi) int_0^{pi/2} M(-rho / (4 N0 sin^2 theta)) dtheta` by Gauss-Legendre.
pub fn pep_quadrature_with(
    mgf: impl Fn(f64) -> Result<f64>,
    rho: f64,
    n0: f64,
    order: usize,
) -> Result<f64> {
    let (nodes, weights) = gauss_legendre(order);
    let mut acc = 0.0;
    for (x, w) in nodes.iter().zip(&weights) {
        let theta = FRAC_PI_4 * (x + 1.0);
        let sin = libm::sin(theta);
        acc += w * mgf(-rho / (4.0 * n0 * sin * sin))?;
    }
    // dtheta = (pi / 4) dx, and the prefactor is 1 / pi.
    Ok(acc / 4.0)
}

pub fn pep_quadrature(stats: &ChannelStatistics, delta: &[C64], rho: f64, n0: f64) -> Result<f64> {
    let core = MgfCore::new(stats, delta)?;
    pep_quadrature_with(|s| core.eval(s), rho, n0, DEFAULT_QUADRATURE_ORDER)
}

/// `(1/12) M(-rho / 4N0) + (1/4) M(-rho / 3N0)`.
pub fn pep_closed_form_with(mgf: impl Fn(f64) -> Result<f64>, rho: f64, n0: f64) -> Result<f64> {
    Ok(mgf(-rho / (4.0 * n0))? / 12.0 + mgf(-rho / (3.0 * n0))? / 4.0)
}

pub fn pep_closed_form(stats: &ChannelStatistics, delta: &[C64], rho: f64, n0: f64) -> Result<f64> {
    let core = MgfCore::new(stats, delta)?;
    pep_closed_form_with(|s| core.eval(s), rho, n0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum PepVariant {
    /// Exact `Q` given the channel realization.
    Conditional,
    ClosedForm,
    Quadrature,
}

impl PepVariant {
    pub fn name(self) -> &'static str {
        match self {
            PepVariant::Conditional => "conditional",
            PepVariant::ClosedForm => "closed_form",
            PepVariant::Quadrature => "quadrature",
        }
    }
}

/// What the bound is conditioned on.
#[derive(Debug, Clone, Copy)]
pub enum BoundInput<'a> {
    /// A known channel matrix. The MGF variants then use the degenerate
    /// statistics `u_bar = vec(H^H)`, `C_u = 0`.
    Channel(&'a CMat),
    /// Gaussian statistics given the large-scale state.
    Statistics(&'a ChannelStatistics),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairTerm {
    pub i: u64,
    pub j: u64,
    pub n_bits: u32,
    /// Clipped to `[0, 0.5]`.
    pub pep: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BerBound {
    /// Unclamped union bound.
    pub value: f64,
    /// `min(value, 1)`.
    pub clamped: f64,
    pub variant: PepVariant,
    /// Unordered pairs `i < j`; each stands for both orders.
    pub per_pair_terms: Option<Vec<PairTerm>>,
}

/// `(1 / (eta 2^eta)) sum_{i != j} n_ij PEP(i -> j)`.
///
/// The pair PEPs are symmetric, so each unordered pair is evaluated once and
/// counted twice.
pub fn union_bound(
    modem: &Modem,
    input: BoundInput<'_>,
    rho: f64,
    n0: f64,
    variant: PepVariant,
    keep_terms: bool,
) -> Result<BerBound> {
    let eta = modem.eta();
    if eta == 0 {
        return Err(Error::SingleSignal);
    }
    if n0.is_nan() || n0 <= 0.0 {
        return Err(Error::InvalidConfig(alloc::format!(
            "n0 must be positive (got {n0})"
        )));
    }
    let frames = modem.enumerate_signal_set(DEFAULT_ENUMERATION_CAP)?;
    let owned;
    let (h, stats) = match input {
        BoundInput::Channel(h) => {
            owned = ChannelStatistics::deterministic(h);
            (Some(h), &owned)
        }
        BoundInput::Statistics(s) => (None, s),
    };
    if stats.n_cols() != frames[0].x.len() {
        return Err(Error::DimensionMismatch {
            what: "channel columns",
            expected: frames[0].x.len(),
            found: stats.n_cols(),
        });
    }
    if variant == PepVariant::Conditional && h.is_none() {
        return Err(Error::InvalidConfig(
            "the conditional variant needs a channel realization".into(),
        ));
    }

    let mut weighted = Vec::with_capacity(frames.len() * (frames.len() - 1) / 2);
    let mut terms = Vec::new();
    for (a, fa) in frames.iter().enumerate() {
        for fb in &frames[a + 1..] {
            let pair = PairwiseContext::new(fa, fb);
            let pep = match (variant, h) {
                (PepVariant::Conditional, Some(h)) => conditional_pep(h, &pair.delta, rho, n0),
                (PepVariant::ClosedForm, _) => {
                    let core = MgfCore::new(stats, &pair.delta)?;
                    pep_closed_form_with(|s| core.eval(s), rho, n0)?
                }
                _ => {
                    let core = MgfCore::new(stats, &pair.delta)?;
                    pep_quadrature_with(|s| core.eval(s), rho, n0, DEFAULT_QUADRATURE_ORDER)?
                }
            };
            let pep = pep.clamp(0.0, 0.5);
            weighted.push(2.0 * pair.n_bits as f64 * pep);
            if keep_terms {
                terms.push(PairTerm {
                    i: fa.index,
                    j: fb.index,
                    n_bits: pair.n_bits,
                    pep,
                });
            }
        }
    }
    let value = compensated_sum(weighted) / (eta as f64 * libm::exp2(eta as f64));
    Ok(BerBound {
        value,
        clamped: value.min(1.0),
        variant,
        per_pair_terms: keep_terms.then_some(terms),
    })
}
