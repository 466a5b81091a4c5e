//! Small dense complex linear algebra.
//!
//! Matrices in this crate are at most a few dozen rows wide (the largest is the
//! `N_r N_t N_wg` square covariance of `vec(H^H)`), so everything is row-major
//! `Vec` storage with straightforward loops.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::{Error, Result, C64};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row-major data.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                what: "row-major matrix data",
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[C64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn col(&self, c: usize) -> Vec<C64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, k: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * k).collect(),
        }
    }

    /// Column-stacking vectorization.
    pub fn vec(&self) -> Vec<C64> {
        let mut v = Vec::with_capacity(self.rows * self.cols);
        for c in 0..self.cols {
            for r in 0..self.rows {
                v.push(self[(r, c)]);
            }
        }
        v
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a == ZERO {
                    continue;
                }
                let src = rhs.row(k);
                let dst = &mut out.data[r * rhs.cols..(r + 1) * rhs.cols];
                for (d, &b) in dst.iter_mut().zip(src) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, x.len(), "mul_vec shape mismatch");
        (0..self.rows)
            .map(|r| self.row(r).iter().zip(x).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// Elementwise (Hadamard) product.
    pub fn hadamard(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a * b)
                .collect(),
        }
    }

    pub fn kron(&self, rhs: &Self) -> Self {
        Self::from_fn(self.rows * rhs.rows, self.cols * rhs.cols, |r, c| {
            self[(r / rhs.rows, c / rhs.cols)] * rhs[(r % rhs.rows, c % rhs.cols)]
        })
    }

    pub fn frobenius_norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn max_abs_diff(&self, rhs: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        self.data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }
}

impl Index<(usize, usize)> for CMat {
    type Output = C64;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for CMat {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

pub fn norm_sqr(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// `a^H b`.
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Permutation `K` with `K vec(A) = vec(A^T)` for `A` of shape `m x n`.
pub fn commutation_matrix(m: usize, n: usize) -> CMat {
    let mut k = CMat::zeros(m * n, m * n);
    for i in 0..m {
        for j in 0..n {
            k[(j + i * n, i + j * m)] = ONE;
        }
    }
    k
}

/// Thin QR factorization `A = Q R` with `Q^H Q = I` and `R` upper
/// trapezoidal with a real non-negative diagonal.
#[derive(Debug, Clone)]
pub struct Qr {
    /// `rows x k` with orthonormal columns, `k = min(rows, cols)`.
    pub q: CMat,
    /// `k x cols`.
    pub r: CMat,
}

/// Householder QR.
pub fn qr(a: &CMat) -> Qr {
    let (m, n) = (a.rows(), a.cols());
    let k = m.min(n);
    let mut r = a.clone();
    // Householder vectors, applied in reverse to build the thin Q.
    let mut reflectors: Vec<Option<Vec<C64>>> = Vec::with_capacity(k);

    for j in 0..k {
        let x: Vec<C64> = (j..m).map(|i| r[(i, j)]).collect();
        let xnorm = libm::sqrt(norm_sqr(&x));
        if xnorm == 0.0 {
            reflectors.push(None);
            continue;
        }
        let phase = if x[0].norm() > 0.0 {
            x[0] / x[0].norm()
        } else {
            ONE
        };
        // v = x + phase * |x| e1 maps x onto -phase * |x| e1.
        let mut v = x;
        v[0] += phase * xnorm;
        let vnorm = libm::sqrt(norm_sqr(&v));
        for z in &mut v {
            *z /= vnorm;
        }
        for c in j..n {
            let dot: C64 = (j..m).map(|i| v[i - j].conj() * r[(i, c)]).sum();
            for i in j..m {
                r[(i, c)] -= 2.0 * v[i - j] * dot;
            }
        }
        reflectors.push(Some(v));
    }

    let mut q = CMat::zeros(m, k);
    for i in 0..k {
        q[(i, i)] = ONE;
    }
    for j in (0..k).rev() {
        if let Some(v) = &reflectors[j] {
            for c in 0..k {
                let dot: C64 = (j..m).map(|i| v[i - j].conj() * q[(i, c)]).sum();
                for i in j..m {
                    q[(i, c)] -= 2.0 * v[i - j] * dot;
                }
            }
        }
    }

    let mut r_thin = CMat::from_fn(k, n, |i, c| if c < i { ZERO } else { r[(i, c)] });
    // Rotate each row of R (and column of Q) so the diagonal is real and >= 0.
    for i in 0..k {
        let d = r_thin[(i, i)];
        let mag = d.norm();
        if mag > 0.0 {
            let ph = d / mag;
            for c in i..n {
                r_thin[(i, c)] *= ph.conj();
            }
            for row in 0..m {
                q[(row, i)] *= ph;
            }
            r_thin[(i, i)] = C64::new(mag, 0.0);
        }
    }
    Qr { q, r: r_thin }
}

/// LU factorization with partial pivoting of a square complex matrix.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: CMat,
    perm: Vec<usize>,
    swaps: usize,
}

impl Lu {
    pub fn new(a: &CMat) -> Result<Self> {
        assert_eq!(a.rows(), a.cols(), "LU of a non-square matrix");
        let n = a.rows();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut swaps = 0;
        let scale = a.as_slice().iter().map(|z| z.norm()).fold(0.0, f64::max);
        let tiny = f64::EPSILON * scale * n as f64;
        for k in 0..n {
            let (p, pmag) = (k..n)
                .map(|i| (i, lu[(i, k)].norm()))
                .fold(
                    (k, -1.0),
                    |best, cur| if cur.1 > best.1 { cur } else { best },
                );
            if pmag <= tiny || pmag == 0.0 {
                return Err(Error::Singular);
            }
            if p != k {
                for c in 0..n {
                    let tmp = lu[(k, c)];
                    lu[(k, c)] = lu[(p, c)];
                    lu[(p, c)] = tmp;
                }
                perm.swap(k, p);
                swaps += 1;
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / pivot;
                lu[(i, k)] = f;
                if f != ZERO {
                    for c in k + 1..n {
                        let t = lu[(k, c)];
                        lu[(i, c)] -= f * t;
                    }
                }
            }
        }
        Ok(Self { lu, perm, swaps })
    }

    /// Natural log of the determinant (principal branch of each factor).
    pub fn log_det(&self) -> C64 {
        let n = self.lu.rows();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n {
            acc += self.lu[(i, i)].ln();
        }
        if self.swaps % 2 == 1 {
            acc += C64::new(0.0, core::f64::consts::PI);
        }
        acc
    }

    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let n = self.lu.rows();
        assert_eq!(b.len(), n);
        let mut x: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for k in 0..i {
                let t = self.lu[(i, k)] * x[k];
                x[i] -= t;
            }
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                let t = self.lu[(i, k)] * x[k];
                x[i] -= t;
            }
            x[i] /= self.lu[(i, i)];
        }
        x
    }
}

/// Eigen-decomposition of a real symmetric `n x n` matrix (row-major) by
/// cyclic Jacobi rotations. Returns `(eigenvalues, eigenvectors)` with the
/// eigenvectors stored as columns of a row-major matrix.
pub fn symmetric_eigen(a: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(a.len(), n * n);
    let mut m = a.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i * n + j] * m[i * n + j])
            .sum();
        let total: f64 = m.iter().map(|x| x * x).sum();
        if off <= 1e-30 * total || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + libm::sqrt(1.0 + theta * theta))
                } else {
                    -1.0 / (-theta + libm::sqrt(1.0 + theta * theta))
                };
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let vals = (0..n).map(|i| m[i * n + i]).collect();
    (vals, v)
}

/// Minimum-norm least-squares solution of `G x = rhs` for symmetric positive
/// semidefinite `G` (row-major, `n x n`).
///
/// Well-conditioned systems go through LDL^T; if a pivot falls below
/// `1e-8 max(diag G)` the pseudo-inverse is applied instead, discarding
/// eigenvalues below `1e-12` of the largest.
pub(crate) fn psd_solve(g: &[f64], n: usize, rhs: &[f64]) -> Vec<f64> {
    let max_diag = (0..n).map(|i| g[i * n + i].abs()).fold(0.0, f64::max);
    let tol = 1e-8 * max_diag.max(f64::MIN_POSITIVE);
    let mut l = vec![0.0; n * n];
    let mut d = vec![0.0; n];
    for j in 0..n {
        let mut dj = g[j * n + j];
        for k in 0..j {
            dj -= l[j * n + k] * l[j * n + k] * d[k];
        }
        if dj <= tol {
            return pinv_solve(g, n, rhs);
        }
        d[j] = dj;
        l[j * n + j] = 1.0;
        for i in j + 1..n {
            let mut v = g[i * n + j];
            for k in 0..j {
                v -= l[i * n + k] * l[j * n + k] * d[k];
            }
            l[i * n + j] = v / dj;
        }
    }
    let mut y = rhs.to_vec();
    for i in 0..n {
        for k in 0..i {
            y[i] -= l[i * n + k] * y[k];
        }
    }
    for i in 0..n {
        y[i] /= d[i];
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            y[i] -= l[k * n + i] * y[k];
        }
    }
    y
}

fn pinv_solve(g: &[f64], n: usize, rhs: &[f64]) -> Vec<f64> {
    let (vals, v) = symmetric_eigen(g, n);
    let cut = 1e-12 * vals.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut x = vec![0.0; n];
    for (k, &lam) in vals.iter().enumerate() {
        if lam <= cut {
            continue;
        }
        let coeff = (0..n).map(|i| v[i * n + k] * rhs[i]).sum::<f64>() / lam;
        for i in 0..n {
            x[i] += coeff * v[i * n + k];
        }
    }
    x
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = libm::cos(core::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Neumaier-compensated sum, evaluated in iteration order.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}
