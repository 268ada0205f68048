//! Small dense and banded linear algebra used by the solvers.
//!
//! Everything here is sized by either the grid (tridiagonal systems, O(n)) or
//! the number of components K (dense K×K blocks), so nothing beyond direct
//! elimination is needed.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Tridiagonal matrix stored by diagonals. `lower[i]` couples row `i + 1`
/// to column `i`; `upper[i]` couples row `i` to column `i + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Tridiagonal {
    pub fn symmetric(diag: Vec<f64>, off: Vec<f64>) -> Self {
        debug_assert_eq!(off.len() + 1, diag.len().max(1));
        Tridiagonal {
            lower: off.clone(),
            diag,
            upper: off,
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut s = self.diag[i] * x[i];
            if i > 0 {
                s += self.lower[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                s += self.upper[i] * x[i + 1];
            }
            y[i] = s;
        }
        y
    }

    /// Solves `A x = b` by Gaussian elimination with partial pivoting
    /// (the `gtsv` scheme), so indefinite Jacobians are handled.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.len();
        if rhs.len() != n {
            return Err(Error::invalid("tridiagonal solve: dimension mismatch"));
        }
        if n == 0 {
            return Ok(Vec::new());
        }
        let mut d = self.diag.clone();
        let mut dl = self.lower.clone();
        let mut du = self.upper.clone();
        let mut b = rhs.to_vec();
        if n == 1 {
            if d[0] == 0.0 {
                return Err(Error::InvalidState("singular tridiagonal system".into()));
            }
            b[0] /= d[0];
            return Ok(b);
        }
        for i in 0..n - 1 {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    return Err(Error::InvalidState("singular tridiagonal system".into()));
                }
                let fact = dl[i] / d[i];
                d[i + 1] -= fact * du[i];
                b[i + 1] -= fact * b[i];
                dl[i] = 0.0;
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                let temp = d[i + 1];
                d[i + 1] = du[i] - fact * temp;
                if i + 2 < n {
                    dl[i] = du[i + 1];
                    du[i + 1] = -fact * dl[i];
                } else {
                    dl[i] = 0.0;
                }
                du[i] = temp;
                let tb = b[i];
                b[i] = b[i + 1];
                b[i + 1] = tb - fact * b[i + 1];
            }
        }
        if d[n - 1] == 0.0 {
            return Err(Error::InvalidState("singular tridiagonal system".into()));
        }
        b[n - 1] /= d[n - 1];
        b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
        for i in (0..n - 2).rev() {
            b[i] = (b[i] - du[i] * b[i + 1] - dl[i] * b[i + 2]) / d[i];
        }
        Ok(b)
    }
}

/// Solves the dense `n×n` system `a x = b` (row-major) with partial pivoting.
pub fn solve_dense(a: &[f64], b: &[f64], n: usize) -> Result<Vec<f64>> {
    let mut m = a.to_vec();
    let mut x = b.to_vec();
    for col in 0..n {
        let mut piv = col;
        let mut best = m[col * n + col].abs();
        for row in col + 1..n {
            let v = m[row * n + col].abs();
            if v > best {
                best = v;
                piv = row;
            }
        }
        if best == 0.0 || !best.is_finite() {
            return Err(Error::InvalidState("singular dense system".into()));
        }
        if piv != col {
            for k in 0..n {
                m.swap(col * n + k, piv * n + k);
            }
            x.swap(col, piv);
        }
        let p = m[col * n + col];
        for row in col + 1..n {
            let f = m[row * n + col] / p;
            if f != 0.0 {
                for k in col..n {
                    m[row * n + k] -= f * m[col * n + k];
                }
                x[row] -= f * x[col];
            }
        }
    }
    for row in (0..n).rev() {
        let mut s = x[row];
        for k in row + 1..n {
            s -= m[row * n + k] * x[k];
        }
        x[row] = s / m[row * n + row];
    }
    Ok(x)
}

/// Inverse of a dense `n×n` matrix (row-major).
pub fn invert_dense(a: &[f64], n: usize) -> Result<Vec<f64>> {
    let mut inv = vec![0.0; n * n];
    let mut e = vec![0.0; n];
    for col in 0..n {
        e.iter_mut().for_each(|v| *v = 0.0);
        e[col] = 1.0;
        let x = solve_dense(a, &e, n)?;
        for row in 0..n {
            inv[row * n + col] = x[row];
        }
    }
    Ok(inv)
}

/// Eigenvalues of a symmetric `n×n` matrix by cyclic Jacobi rotations,
/// returned in ascending order.
pub fn symmetric_eigenvalues(a: &[f64], n: usize) -> Vec<f64> {
    let mut m = a.to_vec();
    for _sweep in 0..100 {
        let mut off = 0.0;
        let mut scale = 0.0;
        for i in 0..n {
            for j in 0..n {
                let v = m[i * n + j] * m[i * n + j];
                scale += v;
                if i != j {
                    off += v;
                }
            }
        }
        if off <= 1e-30 * scale || off == 0.0 {
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
                let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
                let t = sign / (theta.abs() + crate::math::sqrt(theta * theta + 1.0));
                let c = 1.0 / crate::math::sqrt(t * t + 1.0);
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
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m[i * n + i]).collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    ev
}

/// Block-tridiagonal system with dense `k×k` diagonal blocks and diagonal
/// off-diagonal blocks, symmetric in the sense that the block coupling node
/// `j` to `j + 1` equals the one coupling `j + 1` to `j`.
///
/// Unknowns are ordered node-major: `x[j * k + i]` is component `i` at node `j`.
#[derive(Debug, Clone)]
pub struct BlockTridiagonal {
    pub k: usize,
    /// `n` dense blocks, each `k*k` row-major.
    pub diag: Vec<Vec<f64>>,
    /// `n - 1` diagonal coupling blocks, each of length `k`.
    pub off: Vec<Vec<f64>>,
}

impl BlockTridiagonal {
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let k = self.k;
        let n = self.diag.len();
        if rhs.len() != n * k {
            return Err(Error::invalid("block solve: dimension mismatch"));
        }
        let mut inv: Vec<Vec<f64>> = Vec::with_capacity(n);
        let mut y = rhs.to_vec();
        for j in 0..n {
            let mut block = self.diag[j].clone();
            if j > 0 {
                // D'_j = D_j - E D'^{-1}_{j-1} E,  y_j -= E D'^{-1}_{j-1} y_{j-1}
                let e = &self.off[j - 1];
                let prev = &inv[j - 1];
                for r in 0..k {
                    for c in 0..k {
                        block[r * k + c] -= e[r] * prev[r * k + c] * e[c];
                    }
                }
                let (head, tail) = y.split_at_mut(j * k);
                let yp = &head[(j - 1) * k..];
                for r in 0..k {
                    let mut s = 0.0;
                    for c in 0..k {
                        s += prev[r * k + c] * yp[c];
                    }
                    tail[r] -= e[r] * s;
                }
            }
            inv.push(invert_dense(&block, k)?);
        }
        let mut x = vec![0.0; n * k];
        for j in (0..n).rev() {
            let mut t: Vec<f64> = y[j * k..(j + 1) * k].to_vec();
            if j + 1 < n {
                let e = &self.off[j];
                for r in 0..k {
                    t[r] -= e[r] * x[(j + 1) * k + r];
                }
            }
            let bi = &inv[j];
            for r in 0..k {
                let mut s = 0.0;
                for c in 0..k {
                    s += bi[r * k + c] * t[c];
                }
                x[j * k + r] = s;
            }
        }
        Ok(x)
    }
}
