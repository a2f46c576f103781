//! Symmetric Toeplitz systems.
//!
//! [`levinson_solve`] is the `O(n^2)` Levinson recursion. [`ToeplitzInverse`]
//! runs it once against `e_0` and then applies `T^{-1}` in `O(n log n)` by
//! the Gohberg–Semencul formula. That pays off when one matrix serves many
//! right-hand sides.

use crate::error::{Error, Result};
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// Reflection denominators below this are treated as breakdown.
pub const BREAKDOWN_TOL: f64 = 1e-13;

/// `T x = rhs` with `T` the symmetric Toeplitz matrix whose first row is
/// `first_row`.
#[derive(Debug, Clone, PartialEq)]
pub struct ToeplitzSystem {
    pub first_row: Vec<f64>,
    pub rhs: Vec<f64>,
}

impl ToeplitzSystem {
    pub fn new(first_row: Vec<f64>, rhs: Vec<f64>) -> Result<Self> {
        let sys = Self { first_row, rhs };
        sys.check()?;
        Ok(sys)
    }

    fn check(&self) -> Result<()> {
        if self.first_row.len() != self.rhs.len() {
            return Err(Error::Dimension(format!(
                "first row has {} entries, rhs {}",
                self.first_row.len(),
                self.rhs.len()
            )));
        }
        if self.first_row.is_empty() {
            return Err(Error::Dimension("empty Toeplitz system".into()));
        }
        if self.first_row[0] == 0.0 {
            return Err(Error::LevinsonBreakdown {
                order: 0,
                denominator: 0.0,
            });
        }
        Ok(())
    }

    /// Strict diagonal dominance of every row; the first and middle rows are
    /// the extremes for a symmetric Toeplitz matrix.
    pub fn is_diagonally_dominant(&self) -> bool {
        let n = self.first_row.len();
        let t = &self.first_row;
        let row_sum = |i: usize| -> f64 {
            (0..n).filter(|&j| j != i).map(|j| t[i.abs_diff(j)].abs()).sum()
        };
        let d = t[0].abs();
        [0, n / 2, n - 1].iter().all(|&i| row_sum(i) < d)
    }
}

pub fn levinson_solve(sys: &ToeplitzSystem) -> Result<Vec<f64>> {
    sys.check()?;
    levinson(&sys.first_row, &sys.rhs)
}

/// Symmetric Levinson recursion on the normalised matrix `T / t_0`.
pub(crate) fn levinson(first_row: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = first_row.len();
    let t0 = first_row[0];
    let r: Vec<f64> = first_row[1..].iter().map(|v| v / t0).collect();
    let b: Vec<f64> = rhs.iter().map(|v| v / t0).collect();
    let mut x = Vec::with_capacity(n);
    x.push(b[0]);
    if n == 1 {
        return Ok(x);
    }
    let mut y = Vec::with_capacity(n);
    y.push(-r[0]);
    let mut alpha = -r[0];
    let mut beta = 1.0;
    let mut scratch = Vec::with_capacity(n);
    for k in 1..n {
        beta *= 1.0 - alpha * alpha;
        if beta.abs() < BREAKDOWN_TOL {
            return Err(Error::LevinsonBreakdown {
                order: k,
                denominator: beta,
            });
        }
        let dot = rev_dot(&r[..k], &x[..k]);
        let mu = (b[k] - dot) / beta;
        for i in 0..k {
            x[i] += mu * y[k - 1 - i];
        }
        x.push(mu);
        if k < n - 1 {
            let dot = rev_dot(&r[..k], &y[..k]);
            alpha = (-r[k] - dot) / beta;
            scratch.clear();
            scratch.extend((0..k).map(|i| y[i] + alpha * y[k - 1 - i]));
            y.clear();
            y.extend_from_slice(&scratch);
            y.push(alpha);
        }
    }
    Ok(x)
}

/// `Σ_i a[i] b[len-1-i]` with four interleaved accumulators.
fn rev_dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len();
    let mut acc = [0.0f64; 4];
    let chunks = n / 4;
    for c in 0..chunks {
        let i = 4 * c;
        for l in 0..4 {
            acc[l] += a[i + l] * b[n - 1 - i - l];
        }
    }
    let mut tail = 0.0;
    for i in 4 * chunks..n {
        tail += a[i] * b[n - 1 - i];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Durbin recursion: first column of `T^{-1}`, in about half the work of a
/// general Levinson solve.
pub(crate) fn first_column_of_inverse(first_row: &[f64]) -> Result<Vec<f64>> {
    let n = first_row.len();
    let t0 = first_row[0];
    if n == 1 {
        return Ok(vec![1.0 / t0]);
    }
    // Solve T_{n-1} y = -r on the normalised matrix, then T [1; y] = [b; 0].
    let r: Vec<f64> = first_row[1..].iter().map(|v| v / t0).collect();
    let m = n - 1;
    let mut y = Vec::with_capacity(m);
    y.push(-r[0]);
    let mut alpha = -r[0];
    let mut beta = 1.0;
    let mut scratch = Vec::with_capacity(m);
    for k in 1..m {
        beta *= 1.0 - alpha * alpha;
        if beta.abs() < BREAKDOWN_TOL {
            return Err(Error::LevinsonBreakdown {
                order: k,
                denominator: beta,
            });
        }
        alpha = (-r[k] - rev_dot(&r[..k], &y[..k])) / beta;
        scratch.clear();
        scratch.extend((0..k).map(|i| y[i] + alpha * y[k - 1 - i]));
        y.clear();
        y.extend_from_slice(&scratch);
        y.push(alpha);
    }
    let b: f64 = 1.0 + r.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>();
    if b.abs() < BREAKDOWN_TOL {
        return Err(Error::LevinsonBreakdown {
            order: m,
            denominator: b,
        });
    }
    let scale = 1.0 / (b * t0);
    let mut x = Vec::with_capacity(n);
    x.push(scale);
    x.extend(y.iter().map(|v| v * scale));
    Ok(x)
}

/// Dense product `T x`, `O(n^2)`.
pub fn toeplitz_matvec(first_row: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    let n = first_row.len();
    if x.len() != n {
        return Err(Error::Dimension(format!("matrix order {n}, vector length {}", x.len())));
    }
    Ok((0..n)
        .map(|i| (0..n).map(|j| first_row[i.abs_diff(j)] * x[j]).sum())
        .collect())
}

/// `T^{-1} = (A A^T - B B^T) / x_0`, where `x = T^{-1} e_0`, `A` is lower
/// triangular Toeplitz with first column `x`, and `B` is lower triangular
/// Toeplitz with first column `(0, x_{n-1}, ..., x_1)`.
pub struct ToeplitzInverse {
    n: usize,
    size: usize,
    x0: f64,
    a_hat: Vec<Complex64>,
    b_hat: Vec<Complex64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for ToeplitzInverse {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ToeplitzInverse").field("n", &self.n).field("size", &self.size).finish()
    }
}

impl ToeplitzInverse {
    pub fn new(first_row: &[f64]) -> Result<Self> {
        let n = first_row.len();
        if n == 0 {
            return Err(Error::Dimension("empty Toeplitz system".into()));
        }
        if first_row[0] == 0.0 {
            return Err(Error::LevinsonBreakdown {
                order: 0,
                denominator: 0.0,
            });
        }
        let x = first_column_of_inverse(first_row)?;
        let size = (2 * n).next_power_of_two();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(size);
        let inverse = planner.plan_fft_inverse(size);
        let mut a_hat = vec![Complex64::new(0.0, 0.0); size];
        let mut b_hat = vec![Complex64::new(0.0, 0.0); size];
        for i in 0..n {
            a_hat[i].re = x[i];
            if i > 0 {
                b_hat[i].re = x[n - i];
            }
        }
        forward.process(&mut a_hat);
        forward.process(&mut b_hat);
        Ok(Self {
            n,
            size,
            x0: x[0],
            a_hat,
            b_hat,
            forward,
            inverse,
        })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let (n, size) = (self.n, self.size);
        if rhs.len() != n {
            return Err(Error::Dimension(format!("matrix order {n}, rhs length {}", rhs.len())));
        }
        let zero = Complex64::new(0.0, 0.0);
        let i_unit = Complex64::new(0.0, 1.0);
        // A^T v = J A J v and B^T v = J B J v, with J the reversal.
        let mut buf = vec![zero; size];
        for (i, &v) in rhs.iter().rev().enumerate() {
            buf[i].re = v;
        }
        self.forward.process(&mut buf);
        // One inverse transform yields both real products: A(Jv) + i B(Jv).
        for ((z, &a), &b) in buf.iter_mut().zip(&self.a_hat).zip(&self.b_hat) {
            *z *= a + i_unit * b;
        }
        self.inverse.process(&mut buf);
        let scale = 1.0 / size as f64;
        // Reverse and pack p = A^T v, q = B^T v as p + i q.
        let mut packed = vec![zero; size];
        for i in 0..n {
            packed[i] = buf[n - 1 - i] * scale;
        }
        self.forward.process(&mut packed);
        // Split the transform of p + i q into P and Q, then form A P - B Q.
        let mut out = vec![zero; size];
        for k in 0..size {
            let zk = packed[k];
            let zc = packed[(size - k) % size].conj();
            let p = 0.5 * (zk + zc);
            let q = -0.5 * i_unit * (zk - zc);
            out[k] = self.a_hat[k] * p - self.b_hat[k] * q;
        }
        self.inverse.process(&mut out);
        let scale = scale / self.x0;
        Ok(out[..n].iter().map(|c| c.re * scale).collect())
    }
}

#[cfg(test)]
#[path = "../tests/common/dense.rs"]
mod dense;
