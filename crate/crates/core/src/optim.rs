//! Generic low-dimensional optimizers: golden-section search and BFGS.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Result;
use crate::math;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Result of a one-dimensional search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineMin {
    pub x: f64,
    pub value: f64,
    pub evaluations: usize,
}

/// Golden-section search for a minimum of `f` on `[a, b]`, stopping when
/// the bracket is shorter than `tol·(1 + |x|)`.
pub fn golden_section<F>(mut f: F, mut a: f64, mut b: f64, tol: f64, max_evals: usize) -> Result<LineMin>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    let mut evals = 2;
    while (b - a) > tol * (1.0 + x1.abs().max(x2.abs())) && evals < max_evals {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2)?;
        }
        evals += 1;
    }
    let (x, value) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    Ok(LineMin {
        x,
        value,
        evaluations: evals,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct BfgsOptions {
    pub max_iter: usize,
    /// Stop when the max-norm of the gradient drops below this.
    pub grad_tol: f64,
    /// Stop when the relative decrease of the objective over one step is
    /// below this.
    pub f_tol: f64,
    /// Longest trial step (Euclidean length) a line search may start from.
    pub max_step: f64,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        BfgsOptions {
            max_iter: 500,
            grad_tol: 1e-12,
            f_tol: 1e-16,
            max_step: f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BfgsResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Quasi-Newton minimization with an inverse-Hessian BFGS update and a
/// backtracking Armijo line search. `fg` returns the value and gradient;
/// non-finite values are treated as "step too long".
pub fn bfgs<F>(mut fg: F, x0: &[f64], opts: BfgsOptions) -> BfgsResult
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let (mut fx, mut g) = fg(&x);
    let mut hinv = vec![0.0; n * n];
    for i in 0..n {
        hinv[i * n + i] = 1.0;
    }
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iter {
        if max_abs(&g) <= opts.grad_tol {
            converged = true;
            break;
        }
        iterations += 1;
        let mut dir: Vec<f64> = (0..n)
            .map(|i| -(0..n).map(|j| hinv[i * n + j] * g[j]).sum::<f64>())
            .collect();
        let mut slope = dot(&dir, &g);
        if !(slope < 0.0) {
            // lost positive definiteness: restart from steepest descent
            for i in 0..n {
                for j in 0..n {
                    hinv[i * n + j] = if i == j { 1.0 } else { 0.0 };
                }
            }
            dir = g.iter().map(|v| -v).collect();
            slope = -dot(&g, &g);
        }
        let len = norm2(&dir);
        let mut step = if len > opts.max_step { opts.max_step / len } else { 1.0 };
        let mut accepted = None;
        for _ in 0..60 {
            let xn: Vec<f64> = x.iter().zip(&dir).map(|(a, d)| a + step * d).collect();
            let (fnew, gnew) = fg(&xn);
            if fnew.is_finite() && fnew <= fx + 1e-4 * step * slope {
                accepted = Some((xn, fnew, gnew));
                break;
            }
            step *= 0.5;
        }
        let Some((xn, fnew, gnew)) = accepted else {
            // no descent possible at working precision
            converged = max_abs(&g) <= opts.grad_tol.max(1e-8);
            break;
        };
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gnew.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-300 {
            let rho = 1.0 / sy;
            let hy: Vec<f64> = (0..n)
                .map(|i| (0..n).map(|j| hinv[i * n + j] * y[j]).sum())
                .collect();
            let yhy = dot(&y, &hy);
            for i in 0..n {
                for j in 0..n {
                    hinv[i * n + j] += -rho * (hy[i] * s[j] + s[i] * hy[j])
                        + (rho * rho * yhy + rho) * s[i] * s[j];
                }
            }
        }
        let decrease = fx - fnew;
        x = xn;
        g = gnew;
        let prev = fx;
        fx = fnew;
        if decrease <= opts.f_tol * prev.abs().max(1e-300) && max_abs(&g) <= 1e-8 {
            converged = true;
            break;
        }
    }
    BfgsResult {
        grad_norm: max_abs(&g),
        x,
        value: fx,
        iterations,
        converged,
    }
}

/// `sqrt(Σ v²)`.
pub fn norm2(v: &[f64]) -> f64 {
    math::sqrt(dot(v, v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_minimum() {
        let r = golden_section(|x| Ok((x - 1.3) * (x - 1.3)), 0.0, 4.0, 1e-10, 200).unwrap();
        assert!((r.x - 1.3).abs() < 1e-8);
        assert!(r.value < 1e-16);
    }

    #[test]
    fn bfgs_rosenbrock() {
        let fg = |x: &[f64]| {
            let (a, b) = (x[0], x[1]);
            let f = (1.0 - a) * (1.0 - a) + 100.0 * (b - a * a) * (b - a * a);
            let g = vec![
                -2.0 * (1.0 - a) - 400.0 * a * (b - a * a),
                200.0 * (b - a * a),
            ];
            (f, g)
        };
        let r = bfgs(fg, &[-1.2, 1.0], BfgsOptions::default());
        assert!((r.x[0] - 1.0).abs() < 1e-6, "{:?}", r);
        assert!((r.x[1] - 1.0).abs() < 1e-6);
    }
}
