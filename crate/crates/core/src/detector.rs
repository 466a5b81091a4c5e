//! Joint detection of the activation pattern and the QAM symbols.
//!
//! Both detectors minimize `||y' - H_eq(I) s||^2` with `y' = y / sqrt(rho)`
//! over all legitimate patterns `I` and symbol vectors `s`. [`ml_detect`]
//! enumerates everything; [`bo_sd_detect`] runs a depth-first sphere search
//! per pattern whose pruning combines the cost of already fixed layers with
//! a box-relaxation lower bound on the layers still open.
//!
//! Exact ties are resolved towards the lowest frame index in both detectors.

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{norm_sqr, qr, CMat};
use crate::modem::{
    better, index_to_bits, ActivationPattern, Constellation, Modem, DEFAULT_ENUMERATION_CAP,
};
use crate::qp::{solve_box_qp, BoxQpProblem};
use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum DetectorKind {
    Ml,
    Bosd,
}

/// Work counters, summed over all patterns of one detection.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchCounters {
    /// Tree nodes admitted by the pruning test (leaves included).
    pub nodes_visited: u64,
    pub qp_solves: u64,
    /// Metric or pruning-inequality evaluations.
    pub metric_evals: u64,
}

impl core::ops::AddAssign for SearchCounters {
    fn add_assign(&mut self, o: Self) {
        self.nodes_visited += o.nodes_visited;
        self.qp_solves += o.qp_solves;
        self.metric_evals += o.metric_evals;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionResult {
    pub pattern: ActivationPattern,
    pub labels: Vec<u32>,
    pub symbols: Vec<C64>,
    pub bits: Vec<u8>,
    pub index: u64,
    /// `||y' - H_eq s||^2` of the decision.
    pub metric: f64,
    pub counters: SearchCounters,
    /// Number of activation patterns searched.
    pub patterns: u64,
}

/// Counters divided by the number of patterns searched.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchEffort {
    pub metric_evals: f64,
    pub qp_solves: f64,
    pub nodes_visited: f64,
    pub metric_evals_per_pattern: f64,
    pub qp_solves_per_pattern: f64,
    pub nodes_visited_per_pattern: f64,
}

pub fn search_effort(result: &DetectionResult) -> SearchEffort {
    let c = result.counters;
    let p = result.patterns.max(1) as f64;
    SearchEffort {
        metric_evals: c.metric_evals as f64,
        qp_solves: c.qp_solves as f64,
        nodes_visited: c.nodes_visited as f64,
        metric_evals_per_pattern: c.metric_evals as f64 / p,
        qp_solves_per_pattern: c.qp_solves as f64 / p,
        nodes_visited_per_pattern: c.nodes_visited as f64 / p,
    }
}

/// `H_eq`: column `n` is the sum of the active columns of waveguide `n`.
pub fn equivalent_channel(h: &CMat, n_t: usize, index_sets: &[&[usize]]) -> CMat {
    CMat::from_fn(h.rows(), index_sets.len(), |r, n| {
        index_sets[n].iter().map(|&j| h[(r, n * n_t + j)]).sum()
    })
}

/// Per-pattern QR data.
#[derive(Debug, Clone)]
pub struct EquivalentChannel {
    pub h_eq: CMat,
    /// Thin `N_r x min(N_r, N_wg)` factor.
    pub q: CMat,
    /// `N_wg x N_wg` upper triangular; rows past `N_r` are zero.
    pub r: CMat,
    /// `Q^H y'`, zero-padded to `N_wg`.
    pub z: Vec<C64>,
    /// `||y'||^2 - ||Q^H y'||^2`, the energy outside the range of `Q`.
    pub offset: f64,
}

impl EquivalentChannel {
    pub fn new(h_eq: CMat, y_prime: &[C64]) -> Self {
        let n = h_eq.cols();
        let f = qr(&h_eq);
        let k = f.r.rows();
        let r = CMat::from_fn(n, n, |i, j| {
            if i < k {
                f.r[(i, j)]
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let mut z = f.q.adjoint().mul_vec(y_prime);
        z.resize(n, C64::new(0.0, 0.0));
        let offset = (norm_sqr(y_prime) - norm_sqr(&z)).max(0.0);
        Self {
            h_eq,
            q: f.q,
            r,
            z,
            offset,
        }
    }

    pub fn n(&self) -> usize {
        self.r.cols()
    }

    /// `|z_l - sum_{j >= l} r_{l j} s_j|^2` with `s` holding layers `l..`.
    pub fn row_term(&self, l: usize, s: &[C64]) -> f64 {
        let mut acc = self.z[l];
        for (j, sj) in (l..self.n()).zip(&s[l..]) {
            acc -= self.r[(l, j)] * sj;
        }
        acc.norm_sqr()
    }

    /// `||z - R s||^2`.
    pub fn qr_metric(&self, s: &[C64]) -> f64 {
        (0..self.n()).map(|l| self.row_term(l, s)).sum()
    }
}

/// `||y' - H_eq s||^2`, the metric shared by both detectors.
pub fn direct_metric(y_prime: &[C64], h_eq: &CMat, s: &[C64]) -> f64 {
    let mut acc = 0.0;
    for (i, &yi) in y_prime.iter().enumerate() {
        let mut e = yi;
        for (n, &sn) in s.iter().enumerate() {
            e -= h_eq[(i, n)] * sn;
        }
        acc += e.norm_sqr();
    }
    acc
}

fn scaled_observation(y: &[C64], h: &CMat, rho: f64) -> Result<Vec<C64>> {
    if y.len() != h.rows() {
        return Err(Error::DimensionMismatch {
            what: "received vector",
            expected: h.rows(),
            found: y.len(),
        });
    }
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::InvalidConfig(alloc::format!(
            "rho must be positive (got {rho})"
        )));
    }
    let k = 1.0 / libm::sqrt(rho);
    Ok(y.iter().map(|v| v * k).collect())
}

fn check_channel(h: &CMat, modem: &Modem) -> Result<()> {
    let cols = modem.n_t() * modem.n_wg();
    if h.cols() != cols {
        return Err(Error::DimensionMismatch {
            what: "channel columns",
            expected: cols,
            found: h.cols(),
        });
    }
    Ok(())
}

/// Index sets for the `k`-th joint pattern.
struct PatternCursor<'a> {
    modem: &'a Modem,
    ranks: Vec<u64>,
    owned: Vec<Vec<usize>>,
}

impl<'a> PatternCursor<'a> {
    fn new(modem: &'a Modem) -> Self {
        Self {
            modem,
            ranks: vec![0; modem.n_wg()],
            owned: vec![Vec::new(); modem.n_wg()],
        }
    }

    fn load(&mut self, k: u64) -> Result<()> {
        self.modem.pattern_ranks(k, &mut self.ranks);
        for (n, &r) in self.ranks.iter().enumerate() {
            if self.modem.patterns().cached(r).is_none() {
                self.owned[n] = self.modem.patterns().subset(r)?;
            }
        }
        Ok(())
    }

    fn sets(&self) -> Vec<&[usize]> {
        self.ranks
            .iter()
            .zip(&self.owned)
            .map(|(&r, o)| self.modem.patterns().cached(r).unwrap_or(o.as_slice()))
            .collect()
    }
}

#[derive(Clone)]
struct Best {
    metric: f64,
    index: u64,
    ranks: Vec<u64>,
    labels: Vec<u32>,
}

impl Best {
    fn offer(&mut self, metric: f64, index: u64, ranks: &[u64], labels: &[u32]) -> bool {
        if better((metric, index), (self.metric, self.index)) {
            self.metric = metric;
            self.index = index;
            self.ranks.clear();
            self.ranks.extend_from_slice(ranks);
            self.labels.clear();
            self.labels.extend_from_slice(labels);
            true
        } else {
            false
        }
    }
}

fn finish(modem: &Modem, best: Best, counters: SearchCounters) -> Result<DetectionResult> {
    let pattern = modem.pattern_from_ranks(&best.ranks)?;
    let symbols = best
        .labels
        .iter()
        .map(|&l| modem.constellation().point(l))
        .collect();
    Ok(DetectionResult {
        pattern,
        symbols,
        bits: index_to_bits(best.index, modem.eta()),
        index: best.index,
        labels: best.labels,
        metric: best.metric,
        counters,
        patterns: modem.num_patterns(),
    })
}

fn empty_best(n_wg: usize) -> Best {
    Best {
        metric: f64::INFINITY,
        index: u64::MAX,
        ranks: vec![0; n_wg],
        labels: vec![0; n_wg],
    }
}

/// Exhaustive search over all `|I| M^{N_wg}` legitimate signals.
pub fn ml_detect(y: &[C64], h: &CMat, rho: f64, modem: &Modem) -> Result<DetectionResult> {
    let eta = modem.eta();
    if eta > DEFAULT_ENUMERATION_CAP {
        return Err(Error::EnumerationCap {
            eta,
            cap: DEFAULT_ENUMERATION_CAP,
        });
    }
    check_channel(h, modem)?;
    let y_prime = scaled_observation(y, h, rho)?;
    let n_wg = modem.n_wg();
    let c = modem.constellation();
    let m = c.order();
    let mut best = empty_best(n_wg);
    let mut counters = SearchCounters::default();
    let mut cursor = PatternCursor::new(modem);
    let mut labels = vec![0u32; n_wg];
    let mut s = vec![C64::new(0.0, 0.0); n_wg];

    for k in 0..modem.num_patterns() {
        cursor.load(k)?;
        let h_eq = equivalent_channel(h, modem.n_t(), &cursor.sets());
        labels.fill(0);
        loop {
            for (sn, &l) in s.iter_mut().zip(&labels) {
                *sn = c.point(l);
            }
            let metric = direct_metric(&y_prime, &h_eq, &s);
            counters.metric_evals += 1;
            let index = modem.compose_index(&cursor.ranks, &labels);
            best.offer(metric, index, &cursor.ranks, &labels);
            // Odometer over label tuples.
            let mut pos = n_wg;
            while pos > 0 {
                pos -= 1;
                labels[pos] += 1;
                if labels[pos] < m {
                    break;
                }
                labels[pos] = 0;
                if pos == 0 {
                    pos = usize::MAX;
                    break;
                }
            }
            if pos == usize::MAX {
                break;
            }
        }
    }
    counters.nodes_visited = counters.metric_evals;
    finish(modem, best, counters)
}

/// Box hull of the constellation.
fn box_of(c: &Constellation) -> ([f64; 2], [f64; 2]) {
    let (a, b) = c.half_widths();
    ([-a, a], [-b, b])
}

/// Constellation points admitted at one layer of the sphere search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerCandidate {
    pub label: u32,
    /// Cost of this layer's row.
    pub row_term: f64,
    /// Box-relaxation lower bound on the rows below.
    pub lower_bound: f64,
}

/// Scratch and counters for one pattern's search.
struct LayerSearch<'a> {
    eq: &'a EquivalentChannel,
    c: &'a Constellation,
    re_box: [f64; 2],
    im_box: [f64; 2],
    tol: f64,
    counters: SearchCounters,
    disc: Vec<u32>,
}

impl<'a> LayerSearch<'a> {
    fn new(eq: &'a EquivalentChannel, c: &'a Constellation, tol: f64) -> Self {
        let (re_box, im_box) = box_of(c);
        Self {
            eq,
            c,
            re_box,
            im_box,
            tol,
            counters: SearchCounters::default(),
            disc: Vec::new(),
        }
    }

    /// `min ||z_{0..l} - R_{0..l, 0..} s||^2` over the box for rows `0..l`
    /// with layers `l..` fixed to `s[l..]`.
    fn lower_bound(&mut self, l: usize, s: &[C64]) -> Result<f64> {
        if l == 0 {
            return Ok(0.0);
        }
        let eq = self.eq;
        let n = eq.n();
        let target = (0..l)
            .map(|i| {
                let mut t = eq.z[i];
                for (j, sj) in (l..n).zip(&s[l..]) {
                    t -= eq.r[(i, j)] * sj;
                }
                t
            })
            .collect();
        let prob = BoxQpProblem {
            r_mat: CMat::from_fn(l, l, |i, j| eq.r[(i, j)]),
            target,
            re_box: self.re_box,
            im_box: self.im_box,
        };
        self.counters.qp_solves += 1;
        Ok(solve_box_qp(&prob)?.lower_bound)
    }

    /// Points `s_l` with `row_term + C_1(s_l) <= d2 - c2 (+ tol)`, given
    /// the layers above already fixed in `s[l + 1..]`.
    fn candidates(
        &mut self,
        l: usize,
        s: &mut [C64],
        d2: f64,
        c2: f64,
        out: &mut Vec<LayerCandidate>,
    ) -> Result<()> {
        out.clear();
        let eq = self.eq;
        let budget = d2 - c2 + self.tol;
        if budget < 0.0 {
            return Ok(());
        }
        let mut centre = eq.z[l];
        for (j, sj) in (l + 1..eq.n()).zip(&s[l + 1..]) {
            centre -= eq.r[(l, j)] * sj;
        }
        let rll = eq.r[(l, l)].re;
        let mut disc = core::mem::take(&mut self.disc);
        if rll > 0.0 {
            self.c
                .labels_in_disc(centre / rll, libm::sqrt(budget) / rll, &mut disc);
        } else {
            disc.clear();
            disc.extend(0..self.c.order());
        }
        for &label in &disc {
            s[l] = self.c.point(label);
            let row_term = eq.row_term(l, s);
            self.counters.metric_evals += 1;
            if row_term > budget {
                continue;
            }
            let lower_bound = self.lower_bound(l, s)?;
            if row_term <= budget - lower_bound {
                out.push(LayerCandidate {
                    label,
                    row_term,
                    lower_bound,
                });
            }
        }
        self.disc = disc;
        Ok(())
    }
}

/// Candidates admitted at layer `l` for radius `d2`, accumulated upper cost
/// `c2` and upper-layer symbols `upper = s[l + 1..]`.
pub fn layer_candidates(
    eq: &EquivalentChannel,
    constellation: &Constellation,
    l: usize,
    upper: &[C64],
    d2: f64,
    c2: f64,
) -> Result<Vec<LayerCandidate>> {
    let n = eq.n();
    if l >= n || upper.len() != n - l - 1 {
        return Err(Error::DimensionMismatch {
            what: "upper-layer symbols",
            expected: n.saturating_sub(l + 1),
            found: upper.len(),
        });
    }
    let mut s = vec![C64::new(0.0, 0.0); n];
    s[l + 1..].copy_from_slice(upper);
    let mut search = LayerSearch::new(eq, constellation, 0.0);
    let mut out = Vec::new();
    search.candidates(l, &mut s, d2, c2, &mut out)?;
    Ok(out)
}

struct PatternState<'a> {
    search: LayerSearch<'a>,
    y_prime: &'a [C64],
    modem: &'a Modem,
    ranks: &'a [u64],
    d2: f64,
    s: Vec<C64>,
    labels: Vec<u32>,
    best: &'a mut Best,
    scratch: Vec<Vec<LayerCandidate>>,
}

impl PatternState<'_> {
    fn descend(&mut self, l: usize, c2: f64) -> Result<()> {
        let mut cands = core::mem::take(&mut self.scratch[l]);
        self.search
            .candidates(l, &mut self.s, self.d2, c2, &mut cands)?;
        for cand in &cands {
            // The radius may have shrunk since the list was built.
            if cand.row_term + cand.lower_bound + c2 > self.d2 + self.search.tol {
                continue;
            }
            self.search.counters.nodes_visited += 1;
            self.s[l] = self.search.c.point(cand.label);
            self.labels[l] = cand.label;
            let c2_next = c2 + cand.row_term;
            if l == 0 {
                let metric = direct_metric(self.y_prime, &self.search.eq.h_eq, &self.s);
                let index = self.modem.compose_index(self.ranks, &self.labels);
                self.best.offer(metric, index, self.ranks, &self.labels);
                self.d2 = self.d2.min(c2_next);
            } else {
                self.descend(l - 1, c2_next)?;
            }
        }
        self.scratch[l] = cands;
        Ok(())
    }
}

/// Box-optimized sphere decoding; returns the same decision as [`ml_detect`].
///
/// Per pattern: QR of `H_eq`, a box-relaxed solve for the initial radius
/// (taken at the sliced relaxed solution, which also seeds the search), then
/// a depth-first search from the last layer down to the first.
pub fn bo_sd_detect(y: &[C64], h: &CMat, rho: f64, modem: &Modem) -> Result<DetectionResult> {
    check_channel(h, modem)?;
    let y_prime = scaled_observation(y, h, rho)?;
    let n_wg = modem.n_wg();
    let c = modem.constellation();
    let (re_box, im_box) = box_of(c);
    let mut best = empty_best(n_wg);
    let mut counters = SearchCounters::default();
    let mut cursor = PatternCursor::new(modem);
    let scale = norm_sqr(&y_prime);

    for k in 0..modem.num_patterns() {
        cursor.load(k)?;
        let h_eq = equivalent_channel(h, modem.n_t(), &cursor.sets());
        let eq = EquivalentChannel::new(h_eq, &y_prime);

        let relaxed = solve_box_qp(&BoxQpProblem {
            r_mat: eq.r.clone(),
            target: eq.z.clone(),
            re_box,
            im_box,
        })?;
        counters.qp_solves += 1;
        let labels: Vec<u32> = relaxed.s.iter().map(|&v| c.quantize(v)).collect();
        let s0: Vec<C64> = labels.iter().map(|&l| c.point(l)).collect();
        let d2 = eq.qr_metric(&s0);
        counters.metric_evals += 1;
        let metric = direct_metric(&y_prime, &eq.h_eq, &s0);
        best.offer(
            metric,
            modem.compose_index(&cursor.ranks, &labels),
            &cursor.ranks,
            &labels,
        );

        let tol = 1e-9 * (d2 + scale);
        let mut state = PatternState {
            search: LayerSearch::new(&eq, c, tol),
            y_prime: &y_prime,
            modem,
            ranks: &cursor.ranks,
            d2,
            s: s0,
            labels,
            best: &mut best,
            scratch: vec![Vec::new(); n_wg],
        };
        state.descend(n_wg - 1, 0.0)?;
        counters += state.search.counters;
    }
    finish(modem, best, counters)
}

pub fn detect(
    kind: DetectorKind,
    y: &[C64],
    h: &CMat,
    rho: f64,
    modem: &Modem,
) -> Result<DetectionResult> {
    match kind {
        DetectorKind::Ml => ml_detect(y, h, rho, modem),
        DetectorKind::Bosd => bo_sd_detect(y, h, rho, modem),
    }
}
