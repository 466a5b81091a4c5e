//! Box-constrained complex least squares.
//!
//! Minimizes `||target - A s||^2` over `s` with every real part in `re_box`
//! and every imaginary part in `im_box`. The problem is embedded in real
//! coordinates `[Re s; Im s]`, rescaled to a unit-diagonal Hessian, and
//! solved with a primal active-set method. Every solution carries a
//! certified lower bound on the box minimum.

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{norm_sqr, psd_solve, CMat};
use crate::{Error, Result, C64};

pub const MAX_QP_ITERATIONS: usize = 1000;

#[derive(Debug, Clone)]
pub struct BoxQpProblem {
    pub r_mat: CMat,
    pub target: Vec<C64>,
    /// `[lower, upper]` for every real part.
    pub re_box: [f64; 2],
    /// `[lower, upper]` for every imaginary part.
    pub im_box: [f64; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoxQpSolution {
    pub s: Vec<C64>,
    /// `||target - A s||^2` at the returned point.
    pub objective: f64,
    /// Lower bound on the minimum over the box: the objective plus the
    /// smallest first-order change over the box, which convexity makes valid
    /// at any feasible point.
    pub lower_bound: f64,
    /// Norm of `x - clamp(x - grad)` in the real embedding.
    pub residual: f64,
    pub iterations: usize,
    /// The multiplier test passed before the iteration limit.
    pub converged: bool,
}

impl BoxQpProblem {
    fn validate(&self) -> Result<()> {
        if self.target.len() != self.r_mat.rows() {
            return Err(Error::DimensionMismatch {
                what: "box QP target",
                expected: self.r_mat.rows(),
                found: self.target.len(),
            });
        }
        for [lo, hi] in [self.re_box, self.im_box] {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::InvalidConfig(alloc::format!(
                    "invalid box [{lo}, {hi}]"
                )));
            }
        }
        Ok(())
    }

    /// Objective at an arbitrary point.
    pub fn objective(&self, s: &[C64]) -> f64 {
        let rs = self.r_mat.mul_vec(s);
        self.target
            .iter()
            .zip(&rs)
            .map(|(t, v)| (t - v).norm_sqr())
            .sum()
    }

    /// Centre of the box.
    pub fn centre(&self) -> Vec<C64> {
        let c = C64::new(
            0.5 * (self.re_box[0] + self.re_box[1]),
            0.5 * (self.im_box[0] + self.im_box[1]),
        );
        vec![c; self.r_mat.cols()]
    }
}

/// Real data of `(1/2) y^T G y - c^T y` with bounds, in the coordinates
/// `y = d x` where `x` embeds `s` and `G = D^-1 A_r^T A_r D^-1` has a unit
/// diagonal.
struct RealQp {
    n: usize,
    g: Vec<f64>,
    c: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    d: Vec<f64>,
    /// Bounds of `x`, so that active constraints map back exactly.
    x_box: Vec<[f64; 2]>,
}

impl RealQp {
    fn new(p: &BoxQpProblem) -> Self {
        let (m, k) = (p.r_mat.rows(), p.r_mat.cols());
        let n = 2 * k;
        // Columns of the real embedding [[Re A, -Im A], [Im A, Re A]].
        let col = |j: usize| -> Vec<f64> {
            let mut v = vec![0.0; 2 * m];
            for i in 0..m {
                let a = p.r_mat[(i, j % k)];
                if j < k {
                    v[i] = a.re;
                    v[m + i] = a.im;
                } else {
                    v[i] = -a.im;
                    v[m + i] = a.re;
                }
            }
            v
        };
        let cols: Vec<Vec<f64>> = (0..n).map(col).collect();
        let t: Vec<f64> = p
            .target
            .iter()
            .map(|z| z.re)
            .chain(p.target.iter().map(|z| z.im))
            .collect();
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let mut g = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = dot(&cols[i], &cols[j]);
                g[i * n + j] = v;
                g[j * n + i] = v;
            }
        }
        let c = cols.iter().map(|a| dot(a, &t)).collect();
        let mut lo: Vec<f64> = (0..n)
            .map(|j| if j < k { p.re_box[0] } else { p.im_box[0] })
            .collect();
        let mut hi: Vec<f64> = (0..n)
            .map(|j| if j < k { p.re_box[1] } else { p.im_box[1] })
            .collect();
        // A coordinate the objective ignores is pinned inside its box.
        let d: Vec<f64> = (0..n)
            .map(|i| {
                if g[i * n + i] > 0.0 {
                    libm::sqrt(g[i * n + i])
                } else {
                    1.0
                }
            })
            .collect();
        let mut c: Vec<f64> = c;
        let mut x_box = vec![[0.0; 2]; n];
        for i in 0..n {
            if g[i * n + i] == 0.0 {
                let v = 0.0f64.clamp(lo[i], hi[i]);
                (lo[i], hi[i]) = (v, v);
            }
            x_box[i] = [lo[i], hi[i]];
            for j in 0..n {
                g[i * n + j] /= d[i] * d[j];
            }
            c[i] /= d[i];
            lo[i] *= d[i];
            hi[i] *= d[i];
        }
        Self {
            n,
            g,
            c,
            lo,
            hi,
            d,
            x_box,
        }
    }

    fn unscale(&self, y: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let [lo, hi] = self.x_box[i];
                if y[i] == self.lo[i] {
                    lo
                } else if y[i] == self.hi[i] {
                    hi
                } else {
                    (y[i] / self.d[i]).clamp(lo, hi)
                }
            })
            .collect()
    }

    /// Objective minus the largest first-order decrease over the box.
    fn lower_bound(&self, y: &[f64], objective: f64) -> f64 {
        let g = self.gradient(y);
        let drop: f64 = (0..self.n)
            .map(|i| {
                (g[i] * (self.lo[i] - y[i]))
                    .min(g[i] * (self.hi[i] - y[i]))
                    .min(0.0)
            })
            .sum();
        // The objective is ||t - A s||^2 = 2 q(y) + ||t||^2.
        (objective + 2.0 * drop).clamp(0.0, objective)
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                (0..self.n)
                    .map(|j| self.g[i * self.n + j] * x[j])
                    .sum::<f64>()
                    - self.c[i]
            })
            .collect()
    }

    /// Projected-gradient residual in the unscaled coordinates.
    fn projected_residual(&self, y: &[f64]) -> f64 {
        let g = self.gradient(y);
        let r2: f64 = (0..self.n)
            .map(|i| {
                let d = self.d[i];
                let x = y[i] / d;
                let r = x - (x - g[i] * d).clamp(self.lo[i] / d, self.hi[i] / d);
                r * r
            })
            .sum();
        libm::sqrt(r2)
    }

    /// Minimizer over the free set `free` with the others held at `x`,
    /// reached by the minimum-norm Newton step from `x`.
    fn subproblem(&self, x: &[f64], free: &[usize]) -> Vec<f64> {
        let nf = free.len();
        let grad = self.gradient(x);
        let mut gff = vec![0.0; nf * nf];
        for (a, &i) in free.iter().enumerate() {
            for (b, &j) in free.iter().enumerate() {
                gff[a * nf + b] = self.g[i * self.n + j];
            }
        }
        let rhs: Vec<f64> = free.iter().map(|&i| -grad[i]).collect();
        let step = psd_solve(&gff, nf, &rhs);
        free.iter().zip(step).map(|(&i, p)| x[i] + p).collect()
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Bound {
    Free,
    Lower,
    Upper,
    Fixed,
}

/// Primal active-set solve, warm-started from the clamped unconstrained
/// minimizer. Releases one constraint (most negative multiplier) at a time.
pub fn solve_box_qp(prob: &BoxQpProblem) -> Result<BoxQpSolution> {
    prob.validate()?;
    let k = prob.r_mat.cols();
    if k == 0 {
        return Ok(BoxQpSolution {
            s: Vec::new(),
            objective: norm_sqr(&prob.target),
            lower_bound: norm_sqr(&prob.target),
            residual: 0.0,
            iterations: 0,
            converged: true,
        });
    }
    let qp = RealQp::new(prob);
    let n = qp.n;
    let scale = qp.g.iter().chain(&qp.c).fold(0.0f64, |m, v| m.max(v.abs()));
    let mult_tol = 1e-12 * if scale > 0.0 { scale } else { 1.0 };

    let all: Vec<usize> = (0..n).collect();
    let unconstrained = qp.subproblem(&vec![0.0; n], &all);
    let mut state = vec![Bound::Free; n];
    let mut x = vec![0.0; n];
    for i in 0..n {
        let v = unconstrained[i];
        (x[i], state[i]) = if qp.lo[i] == qp.hi[i] {
            (qp.lo[i], Bound::Fixed)
        } else if v <= qp.lo[i] {
            (qp.lo[i], Bound::Lower)
        } else if v >= qp.hi[i] {
            (qp.hi[i], Bound::Upper)
        } else {
            (v, Bound::Free)
        };
    }

    // A constraint released and immediately re-hit by a zero-length step is
    // numerically degenerate; it stays held until some step makes progress.
    let mut released = None;
    let mut held = vec![false; n];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < MAX_QP_ITERATIONS {
        iterations += 1;
        let free: Vec<usize> = (0..n).filter(|&i| state[i] == Bound::Free).collect();
        let target = qp.subproblem(&x, &free);

        // Longest feasible step towards the subproblem minimizer.
        let mut alpha = 1.0;
        let mut blocking = None;
        for (a, &i) in free.iter().enumerate() {
            let d = target[a] - x[i];
            let limit = if d < 0.0 {
                (qp.lo[i] - x[i]) / d
            } else if d > 0.0 {
                (qp.hi[i] - x[i]) / d
            } else {
                f64::INFINITY
            };
            if limit < alpha {
                alpha = limit.max(0.0);
                blocking = Some((i, if d < 0.0 { Bound::Lower } else { Bound::Upper }));
            }
        }
        for (a, &i) in free.iter().enumerate() {
            x[i] += alpha * (target[a] - x[i]);
            x[i] = x[i].clamp(qp.lo[i], qp.hi[i]);
        }
        if alpha > 0.0 {
            held.fill(false);
        }
        if let Some((i, b)) = blocking {
            state[i] = b;
            x[i] = if b == Bound::Lower {
                qp.lo[i]
            } else {
                qp.hi[i]
            };
            if alpha == 0.0 && released == Some(i) {
                held[i] = true;
            }
            released = None;
            continue;
        }

        // Subproblem optimum reached: check the multipliers.
        let g = qp.gradient(&x);
        let mut worst = None;
        let mut worst_val = -mult_tol;
        for i in 0..n {
            let lambda = match state[i] {
                Bound::Lower => g[i],
                Bound::Upper => -g[i],
                _ => continue,
            };
            if held[i] {
                continue;
            }
            if lambda < worst_val {
                worst_val = lambda;
                worst = Some(i);
            }
        }
        match worst {
            Some(i) => {
                state[i] = Bound::Free;
                released = Some(i);
            }
            None => {
                converged = true;
                break;
            }
        }
    }

    let s = to_complex(&qp.unscale(&x), k);
    let objective = prob.objective(&s);
    Ok(BoxQpSolution {
        lower_bound: qp.lower_bound(&x, objective),
        objective,
        residual: qp.projected_residual(&x),
        s,
        iterations,
        converged,
    })
}

fn to_complex(x: &[f64], k: usize) -> Vec<C64> {
    (0..k).map(|j| C64::new(x[j], x[k + j])).collect()
}
