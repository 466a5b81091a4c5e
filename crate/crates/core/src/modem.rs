//! Bit mapping: activation patterns, Gray-labelled QAM and transmit frames.
//!
//! A frame of `eta` bits is split per waveguide into `p` index bits followed by
//! `log2 M` symbol bits, waveguide 0 first. Bits are read MSB first, so the
//! frame index (the bit string as an integer) orders frames lexicographically.
//! Candidate positions are numbered from 0.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::config::{binomial, SystemConfig};
use crate::linalg::CMat;
use crate::{Error, Result, C64};

/// Default largest `eta` that [`Modem::enumerate_signal_set`] accepts.
pub const DEFAULT_ENUMERATION_CAP: u32 = 20;

/// Unit-energy rectangular QAM with independent Gray labels on each axis.
///
/// A label of `k` bits puts its upper `ceil(k/2)` bits on the in-phase axis and
/// the rest on quadrature. Level `l` on an axis with `L` levels has amplitude
/// `(L - 1) - 2l` before normalization, so label 0 is the upper-right corner.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    order: u32,
    i_bits: u32,
    q_bits: u32,
    scale: f64,
    /// `points[label]`.
    points: Vec<C64>,
}

fn gray(l: u32) -> u32 {
    l ^ (l >> 1)
}

fn gray_inverse(mut g: u32) -> u32 {
    let mut l = g;
    while g > 0 {
        g >>= 1;
        l ^= g;
    }
    l
}

impl Constellation {
    pub fn new(order: u32) -> Result<Self> {
        if order < 2 || !order.is_power_of_two() {
            return Err(Error::InvalidModOrder(order));
        }
        let k = order.trailing_zeros();
        let i_bits = k.div_ceil(2);
        let q_bits = k / 2;
        let (li, lq) = ((1u64 << i_bits) as f64, (1u64 << q_bits) as f64);
        let scale = libm::sqrt((li * li - 1.0) / 3.0 + (lq * lq - 1.0) / 3.0);
        let mut c = Self {
            order,
            i_bits,
            q_bits,
            scale,
            points: Vec::new(),
        };
        c.points = (0..order).map(|label| c.point_of(label)).collect();
        Ok(c)
    }

    fn levels(bits: u32) -> u32 {
        1 << bits
    }

    fn amplitude(&self, bits: u32, level: u32) -> f64 {
        (Self::levels(bits) as f64 - 1.0 - 2.0 * level as f64) / self.scale
    }

    fn point_of(&self, label: u32) -> C64 {
        let il = gray_inverse(label >> self.q_bits);
        let ql = gray_inverse(label & ((1 << self.q_bits) - 1));
        C64::new(
            self.amplitude(self.i_bits, il),
            self.amplitude(self.q_bits, ql),
        )
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn bits_per_symbol(&self) -> u32 {
        self.i_bits + self.q_bits
    }

    /// Symbols indexed by label.
    pub fn points(&self) -> &[C64] {
        &self.points
    }

    pub fn point(&self, label: u32) -> C64 {
        self.points[label as usize]
    }

    /// Largest in-phase and quadrature magnitudes; the box hull is
    /// `[-re, re] x [-im, im]`.
    pub fn half_widths(&self) -> (f64, f64) {
        (
            (Self::levels(self.i_bits) - 1) as f64 / self.scale,
            (Self::levels(self.q_bits) - 1) as f64 / self.scale,
        )
    }

    fn nearest_level(&self, bits: u32, a: f64) -> u32 {
        let top = Self::levels(bits) - 1;
        let l = libm::round((top as f64 - a * self.scale) / 2.0);
        if l.is_nan() || l < 0.0 {
            0
        } else if l > top as f64 {
            top
        } else {
            l as u32
        }
    }

    /// Label of the nearest constellation point (per-axis slicing).
    pub fn quantize(&self, z: C64) -> u32 {
        let il = self.nearest_level(self.i_bits, z.re);
        let ql = self.nearest_level(self.q_bits, z.im);
        (gray(il) << self.q_bits) | gray(ql)
    }

    /// Level range `[lo, hi]` whose amplitudes fall inside `[a_min, a_max]`.
    fn level_range(&self, bits: u32, a_min: f64, a_max: f64) -> Option<(u32, u32)> {
        let top = (Self::levels(bits) - 1) as f64;
        let lo = libm::ceil((top - a_max * self.scale) / 2.0).max(0.0);
        let hi = libm::floor((top - a_min * self.scale) / 2.0).min(top);
        (lo <= hi).then_some((lo as u32, hi as u32))
    }

    /// Labels of all points within distance `radius` of `centre`, in
    /// ascending label order. The disc is slightly inflated so boundary
    /// points are never lost to rounding; callers re-check the exact metric.
    pub fn labels_in_disc(&self, centre: C64, radius: f64, out: &mut Vec<u32>) {
        out.clear();
        if radius.is_nan() || radius < 0.0 {
            return;
        }
        let r = radius * (1.0 + 1e-9) + 1e-12;
        let Some((il0, il1)) = self.level_range(self.i_bits, centre.re - r, centre.re + r) else {
            return;
        };
        for il in il0..=il1 {
            let dx = self.amplitude(self.i_bits, il) - centre.re;
            let span = libm::sqrt((r * r - dx * dx).max(0.0));
            if let Some((ql0, ql1)) =
                self.level_range(self.q_bits, centre.im - span, centre.im + span)
            {
                for ql in ql0..=ql1 {
                    out.push((gray(il) << self.q_bits) | gray(ql));
                }
            }
        }
        out.sort_unstable();
    }
}

/// Per-waveguide index sets and their ranks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActivationPattern {
    /// Strictly increasing candidate indices on each waveguide.
    pub index_sets: Vec<Vec<usize>>,
    pub ranks: Vec<u64>,
}

/// Combinadic ranking of size-`n_a` subsets of `0..n_t` in lexicographic
/// order, restricted to the first `2^p` subsets.
#[derive(Debug, Clone)]
pub struct PatternTable {
    n_t: usize,
    n_a: usize,
    bits: u32,
    /// Cached subsets when the table is small.
    cache: Option<Vec<Vec<usize>>>,
}

const PATTERN_CACHE_BITS: u32 = 16;

impl PatternTable {
    pub fn new(n_t: usize, n_a: usize) -> Result<Self> {
        if n_a == 0 || n_a > n_t || n_t > 62 {
            return Err(Error::InvalidConfig(alloc::format!(
                "no activation patterns for n_t = {n_t}, n_a = {n_a}"
            )));
        }
        let count = binomial(n_t as u64, n_a as u64);
        let bits = 63 - count.leading_zeros();
        let mut table = Self {
            n_t,
            n_a,
            bits,
            cache: None,
        };
        if bits <= PATTERN_CACHE_BITS {
            let subsets = (0..table.len()).map(|r| table.unrank(r)).collect();
            table.cache = Some(subsets);
        }
        Ok(table)
    }

    /// Index bits per waveguide.
    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn len(&self) -> u64 {
        1 << self.bits
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn unrank(&self, mut rank: u64) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.n_a);
        let mut c = 0usize;
        for i in 0..self.n_a {
            loop {
                let with_c = binomial((self.n_t - c - 1) as u64, (self.n_a - i - 1) as u64);
                if rank < with_c {
                    break;
                }
                rank -= with_c;
                c += 1;
            }
            out.push(c);
            c += 1;
        }
        out
    }

    /// Subset of the given rank.
    pub fn subset(&self, rank: u64) -> Result<Vec<usize>> {
        if rank >= self.len() {
            return Err(Error::InvalidRank {
                rank,
                count: self.len(),
            });
        }
        Ok(match &self.cache {
            Some(c) => c[rank as usize].clone(),
            None => self.unrank(rank),
        })
    }

    /// Cached subset, if the table is small enough to hold them all.
    pub fn cached(&self, rank: u64) -> Option<&[usize]> {
        self.cache.as_ref().map(|c| c[rank as usize].as_slice())
    }

    /// Rank of a subset; fails for subsets outside the legitimate set.
    pub fn rank(&self, subset: &[usize]) -> Result<u64> {
        if subset.len() != self.n_a
            || subset.windows(2).any(|w| w[0] >= w[1])
            || subset.last().is_some_and(|&c| c >= self.n_t)
        {
            return Err(Error::IllegalPattern);
        }
        let mut rank = 0u64;
        let mut start = 0usize;
        for (i, &s) in subset.iter().enumerate() {
            for c in start..s {
                rank += binomial((self.n_t - c - 1) as u64, (self.n_a - i - 1) as u64);
            }
            start = s + 1;
        }
        if rank >= self.len() {
            return Err(Error::IllegalPattern);
        }
        Ok(rank)
    }
}

/// One legitimate transmit signal.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmitFrame {
    pub bits: Vec<u8>,
    /// The bit string read as an MSB-first integer.
    pub index: u64,
    pub pattern: ActivationPattern,
    /// Symbol labels, one per waveguide.
    pub labels: Vec<u32>,
    pub symbols: Vec<C64>,
    /// Sparse transmit vector of length `N_t N_wg`.
    pub x: Vec<C64>,
}

pub fn hamming(i: u64, j: u64) -> u32 {
    (i ^ j).count_ones()
}

pub fn bits_to_index(bits: &[u8]) -> Result<u64> {
    if bits.len() > 64 {
        return Err(Error::BitCount {
            expected: 64,
            found: bits.len(),
        });
    }
    bits.iter().try_fold(0u64, |acc, &b| match b {
        0 | 1 => Ok((acc << 1) | b as u64),
        other => Err(Error::NotABit(other)),
    })
}

pub fn index_to_bits(index: u64, n: u32) -> Vec<u8> {
    (0..n).rev().map(|k| ((index >> k) & 1) as u8).collect()
}

/// Maps bits to frames and back for one system configuration.
#[derive(Debug, Clone)]
pub struct Modem {
    n_t: usize,
    n_wg: usize,
    n_a: usize,
    constellation: Constellation,
    patterns: PatternTable,
}

impl Modem {
    pub fn new(cfg: &SystemConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            n_t: cfg.n_t,
            n_wg: cfg.n_wg,
            n_a: cfg.n_a,
            constellation: Constellation::new(cfg.mod_order)?,
            patterns: PatternTable::new(cfg.n_t, cfg.n_a)?,
        })
    }

    pub fn constellation(&self) -> &Constellation {
        &self.constellation
    }

    pub fn patterns(&self) -> &PatternTable {
        &self.patterns
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }

    pub fn n_wg(&self) -> usize {
        self.n_wg
    }

    pub fn n_a(&self) -> usize {
        self.n_a
    }

    fn block_bits(&self) -> u32 {
        self.patterns.bits() + self.constellation.bits_per_symbol()
    }

    /// Bits per frame.
    pub fn eta(&self) -> u32 {
        self.n_wg as u32 * self.block_bits()
    }

    /// Number of legitimate activation patterns over all waveguides.
    pub fn num_patterns(&self) -> u64 {
        1u64 << (self.patterns.bits() as u64 * self.n_wg as u64)
    }

    /// Per-waveguide ranks of the `k`-th joint pattern, waveguide 0 most
    /// significant.
    pub fn pattern_ranks(&self, k: u64, out: &mut [u64]) {
        let p = self.patterns.bits();
        let mask = (1u64 << p) - 1;
        for (n, r) in out.iter_mut().enumerate() {
            let shift = p * (self.n_wg - 1 - n) as u32;
            *r = if p == 0 { 0 } else { (k >> shift) & mask };
        }
    }

    pub fn pattern_from_ranks(&self, ranks: &[u64]) -> Result<ActivationPattern> {
        if ranks.len() != self.n_wg {
            return Err(Error::DimensionMismatch {
                what: "pattern ranks",
                expected: self.n_wg,
                found: ranks.len(),
            });
        }
        let index_sets = ranks
            .iter()
            .map(|&r| self.patterns.subset(r))
            .collect::<Result<_>>()?;
        Ok(ActivationPattern {
            index_sets,
            ranks: ranks.to_vec(),
        })
    }

    /// Builds a pattern from `N_wg * p` index bits.
    pub fn pattern_from_bits(&self, bits: &[u8]) -> Result<ActivationPattern> {
        let p = self.patterns.bits() as usize;
        if bits.len() != p * self.n_wg {
            return Err(Error::BitCount {
                expected: p * self.n_wg,
                found: bits.len(),
            });
        }
        let ranks = if p == 0 {
            vec![0; self.n_wg]
        } else {
            bits.chunks(p)
                .map(bits_to_index)
                .collect::<Result<Vec<_>>>()?
        };
        self.pattern_from_ranks(&ranks)
    }

    pub fn pattern_to_bits(&self, pattern: &ActivationPattern) -> Result<Vec<u8>> {
        let mut out = Vec::with_capacity(self.patterns.bits() as usize * self.n_wg);
        for set in &pattern.index_sets {
            let rank = self.patterns.rank(set)?;
            out.extend(index_to_bits(rank, self.patterns.bits()));
        }
        Ok(out)
    }

    /// Frame index from per-waveguide ranks and symbol labels.
    pub fn compose_index(&self, ranks: &[u64], labels: &[u32]) -> u64 {
        let k = self.constellation.bits_per_symbol();
        let p = self.patterns.bits();
        ranks.iter().zip(labels).fold(0u64, |acc, (&r, &l)| {
            let acc = if p == 0 { acc } else { (acc << p) | r };
            (acc << k) | l as u64
        })
    }

    fn split_index(&self, index: u64) -> (Vec<u64>, Vec<u32>) {
        let k = self.constellation.bits_per_symbol();
        let p = self.patterns.bits();
        let b = self.block_bits();
        let mut ranks = vec![0u64; self.n_wg];
        let mut labels = vec![0u32; self.n_wg];
        for n in 0..self.n_wg {
            let block = (index >> (b * (self.n_wg - 1 - n) as u32)) & ((1u64 << b) - 1);
            labels[n] = (block & ((1 << k) - 1)) as u32;
            ranks[n] = if p == 0 { 0 } else { block >> k };
        }
        (ranks, labels)
    }

    /// Sparse `x = E_I (s ⊗ 1_{N_a})`.
    pub fn transmit_vector(&self, pattern: &ActivationPattern, symbols: &[C64]) -> Vec<C64> {
        let mut x = vec![C64::new(0.0, 0.0); self.n_t * self.n_wg];
        for (n, (set, &s)) in pattern.index_sets.iter().zip(symbols).enumerate() {
            for &j in set {
                x[n * self.n_t + j] = s;
            }
        }
        x
    }

    pub fn frame_from_index(&self, index: u64) -> Result<TransmitFrame> {
        let eta = self.eta();
        if eta < 64 && index >> eta != 0 {
            return Err(Error::BitCount {
                expected: eta as usize,
                found: (64 - index.leading_zeros()) as usize,
            });
        }
        let (ranks, labels) = self.split_index(index);
        let pattern = self.pattern_from_ranks(&ranks)?;
        let symbols: Vec<C64> = labels
            .iter()
            .map(|&l| self.constellation.point(l))
            .collect();
        let x = self.transmit_vector(&pattern, &symbols);
        Ok(TransmitFrame {
            bits: index_to_bits(index, eta),
            index,
            pattern,
            labels,
            symbols,
            x,
        })
    }

    pub fn build_transmit(&self, bits: &[u8]) -> Result<TransmitFrame> {
        if bits.len() != self.eta() as usize {
            return Err(Error::BitCount {
                expected: self.eta() as usize,
                found: bits.len(),
            });
        }
        self.frame_from_index(bits_to_index(bits)?)
    }

    /// Recovers the bits from a detected pattern and symbols.
    pub fn decode(&self, pattern: &ActivationPattern, symbols: &[C64]) -> Result<Vec<u8>> {
        if symbols.len() != self.n_wg || pattern.index_sets.len() != self.n_wg {
            return Err(Error::DimensionMismatch {
                what: "decoded frame",
                expected: self.n_wg,
                found: symbols.len(),
            });
        }
        let ranks = pattern
            .index_sets
            .iter()
            .map(|s| self.patterns.rank(s))
            .collect::<Result<Vec<_>>>()?;
        let labels: Vec<u32> = symbols
            .iter()
            .map(|&s| self.constellation.quantize(s))
            .collect();
        Ok(index_to_bits(
            self.compose_index(&ranks, &labels),
            self.eta(),
        ))
    }

    /// `E_I`: `N_t N_wg x N_a N_wg`, block diagonal with unit basis columns.
    pub fn selection_matrix(&self, pattern: &ActivationPattern) -> CMat {
        let mut e = CMat::zeros(self.n_t * self.n_wg, self.n_a * self.n_wg);
        for (n, set) in pattern.index_sets.iter().enumerate() {
            for (a, &j) in set.iter().enumerate() {
                e[(n * self.n_t + j, n * self.n_a + a)] = C64::new(1.0, 0.0);
            }
        }
        e
    }

    /// All `2^eta` frames in index order.
    pub fn enumerate_signal_set(&self, cap: u32) -> Result<Vec<TransmitFrame>> {
        let eta = self.eta();
        if eta > cap {
            return Err(Error::EnumerationCap { eta, cap });
        }
        (0..1u64 << eta).map(|i| self.frame_from_index(i)).collect()
    }
}

/// Orders `(metric, index)` pairs; lower index wins exact ties.
pub(crate) fn better(a: (f64, u64), b: (f64, u64)) -> bool {
    match a.0.partial_cmp(&b.0) {
        Some(Ordering::Less) => true,
        Some(Ordering::Equal) => a.1 < b.1,
        _ => false,
    }
}
