//! The single equation `-Δw + λw = μ|w|^{p-2}w`: ground states on the whole
//! space and on radial subdomains, the Rayleigh constants
//!
//! ```text
//! c_Ω = inf { ‖u‖²_λ / (μ∫|u|^p)^{2/p} : u ∈ H¹_0,rad(Ω) \ {0} }
//! ```
//!
//! and least-energy sign-changing radial solutions built from a ball and
//! an exterior domain glued at an interface radius.
//!
//! Ground states are computed in two stages. A normalized nonlinear inverse
//! iteration `v = L⁻¹(μ|u|^{p-2}u)` followed by rescaling onto the Nehari set
//! decreases the Rayleigh quotient monotonically from any positive start and
//! stays in the positive cone. Once the decrease stalls, Newton's method on
//! the discrete Euler–Lagrange equation brings the residual down to
//! rounding level.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::Tridiagonal;
use crate::math;
use crate::optim::golden_section;
use crate::radial::{Domain, RadialField, RadialGrid};

/// The scalar problem datum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarProblem {
    pub p: f64,
    pub lambda: f64,
    pub mu: f64,
    pub domain: Domain,
}

impl ScalarProblem {
    pub fn full(p: f64, lambda: f64, mu: f64) -> Self {
        ScalarProblem {
            p,
            lambda,
            mu,
            domain: Domain::Full,
        }
    }

    pub fn on(domain: Domain, p: f64, lambda: f64, mu: f64) -> Self {
        ScalarProblem {
            p,
            lambda,
            mu,
            domain,
        }
    }

    pub fn validate(&self, grid: &RadialGrid) -> Result<()> {
        if !(self.p > 2.0 && self.p.is_finite()) {
            return Err(Error::Inadmissible(format!("exponent p = {} must exceed 2", self.p)));
        }
        if grid.d >= 3 {
            let crit = 2.0 * grid.d as f64 / (grid.d as f64 - 2.0);
            if !(self.p < crit) {
                return Err(Error::Inadmissible(format!(
                    "p = {} is not subcritical in dimension {} (need p < {crit})",
                    self.p, grid.d
                )));
            }
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::Inadmissible(format!("lambda = {} must be positive", self.lambda)));
        }
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(Error::Inadmissible(format!("mu = {} must be positive", self.mu)));
        }
        self.domain.validate(grid.rmax)
    }
}

/// Diagnostics attached to a solution that is usable but suspicious.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalarWarning {
    /// The profile is not small at `rmax`, so the truncation is visible.
    Truncation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarSolution {
    pub profile: RadialField,
    /// `c_Ω`, the Rayleigh quotient at the solution.
    pub c_value: f64,
    /// `(½ - 1/p)‖w‖²_λ`.
    pub energy: f64,
    /// Max-norm of the strong-form residual `-Δw + λw - μ|w|^{p-2}w`.
    pub residual: f64,
    /// Maximum of the profile (the extrapolated value at the origin for
    /// domains containing it).
    pub peak: f64,
    pub iterations: usize,
    pub warnings: Vec<ScalarWarning>,
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    /// Inverse iteration stops when the relative energy decrease per step
    /// falls below this.
    pub flow_tol: f64,
    pub max_flow_iter: usize,
    /// Newton target, relative to the peak.
    pub newton_tol: f64,
    /// Largest residual (relative to the peak) accepted when the target is
    /// not reached.
    pub accept_tol: f64,
    pub max_newton_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            flow_tol: 1e-12,
            max_flow_iter: 20_000,
            newton_tol: 1e-10,
            accept_tol: 1e-8,
            max_newton_iter: 40,
        }
    }
}

/// Closed-form one-dimensional ground state
/// `w(r) = [(p/2)λ/μ]^{1/(p-2)} sech^{2/(p-2)}((p-2)√λ r / 2)`.
pub fn soliton_1d(p: f64, lambda: f64, mu: f64, r: f64) -> f64 {
    let a = math::powf(0.5 * p * lambda / mu, 1.0 / (p - 2.0));
    let z = 0.5 * (p - 2.0) * math::sqrt(lambda) * r;
    a * math::powf(1.0 / math::cosh(z), 2.0 / (p - 2.0))
}

/// Positive radial ground state on the whole (truncated) space.
pub fn solve_scalar_ground_state(prob: &ScalarProblem, grid: &Arc<RadialGrid>) -> Result<ScalarSolution> {
    solve_with(prob, grid, &SolverOptions::default())
}

/// Positive radial ground state with Dirichlet conditions on the boundary
/// of `prob.domain`; the profile is zero outside the domain.
pub fn solve_dirichlet_ground_state(prob: &ScalarProblem, grid: &Arc<RadialGrid>) -> Result<ScalarSolution> {
    solve_with(prob, grid, &SolverOptions::default())
}

/// `c_{p,λ,μ}` (or `c_Ω` on a subdomain).
pub fn compute_c(prob: &ScalarProblem, grid: &Arc<RadialGrid>) -> Result<f64> {
    Ok(solve_with(prob, grid, &SolverOptions::default())?.c_value)
}

fn initial_guess(prob: &ScalarProblem, nodes: &[f64], rmax: f64) -> Vec<f64> {
    let scale = 1.0 / math::sqrt(prob.lambda);
    let (a, b) = prob.domain.bounds(rmax);
    let (center, width) = if a == 0.0 {
        (0.0, (1.5 * scale).min(0.5 * b))
    } else {
        (a + (1.5 * scale).min(0.5 * (b - a)), scale.min(0.25 * (b - a)))
    };
    nodes
        .iter()
        .map(|&r| {
            let z = (r - center) / width;
            math::exp(-z * z).max(1e-300)
        })
        .collect()
}

pub fn solve_with(prob: &ScalarProblem, grid: &Arc<RadialGrid>, opts: &SolverOptions) -> Result<ScalarSolution> {
    prob.validate(grid)?;
    let st = grid.stiffness_on(prob.domain)?;
    let (start, end) = (st.start, st.end);
    let wts = &grid.weights[start..end];
    let mut l = st.matrix;
    for (dj, wj) in l.diag.iter_mut().zip(wts) {
        *dj += prob.lambda * wj;
    }
    let (p, mu) = (prob.p, prob.mu);
    let quad = |u: &[f64]| -> f64 {
        let lu = l.mul_vec(u);
        u.iter().zip(&lu).map(|(a, b)| a * b).sum()
    };
    let lp = |u: &[f64]| -> f64 {
        mu * wts
            .iter()
            .zip(u)
            .map(|(w, v)| w * math::abs_pow(*v, p))
            .sum::<f64>()
    };
    // rescale onto the Nehari set, returning the energy (½ - 1/p) N
    let nehari = |u: &mut Vec<f64>| -> f64 {
        let n2 = quad(u);
        let np = lp(u);
        let t = math::powf(n2 / np, 1.0 / (p - 2.0));
        u.iter_mut().for_each(|v| *v *= t);
        (0.5 - 1.0 / p) * t * t * n2
    };

    let mut u = initial_guess(prob, &grid.nodes[start..end], grid.rmax);
    let mut energy = nehari(&mut u);
    let mut iterations = 0;
    while iterations < opts.max_flow_iter {
        iterations += 1;
        let rhs: Vec<f64> = u
            .iter()
            .zip(wts)
            .map(|(v, w)| mu * w * math::abs_pow(*v, p - 2.0) * v)
            .collect();
        let mut v = l.solve(&rhs)?;
        let e_new = nehari(&mut v);
        let decrease = energy - e_new;
        u = v;
        energy = e_new;
        if decrease <= opts.flow_tol * energy {
            break;
        }
    }

    let strong = |u: &[f64]| -> (Vec<f64>, f64) {
        let lu = l.mul_vec(u);
        let f: Vec<f64> = lu
            .iter()
            .zip(u)
            .zip(wts)
            .map(|((a, v), w)| a - mu * w * math::abs_pow(*v, p - 2.0) * v)
            .collect();
        let res = f.iter().zip(wts).fold(0.0_f64, |m, (fj, w)| m.max((fj / w).abs()));
        (f, res)
    };
    let peak_of = |u: &[f64]| u.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    let (mut f, mut res) = strong(&u);
    let mut newton = 0;
    while res > opts.newton_tol * peak_of(&u) && newton < opts.max_newton_iter {
        newton += 1;
        let mut jac = Tridiagonal {
            lower: l.lower.clone(),
            diag: l.diag.clone(),
            upper: l.upper.clone(),
        };
        for ((dj, v), w) in jac.diag.iter_mut().zip(&u).zip(wts) {
            *dj -= mu * (p - 1.0) * w * math::abs_pow(*v, p - 2.0);
        }
        let delta = match jac.solve(&f) {
            Ok(d) => d,
            Err(_) => break,
        };
        let mut step = 1.0;
        let mut improved = false;
        for _ in 0..20 {
            let cand: Vec<f64> = u.iter().zip(&delta).map(|(a, d)| a - step * d).collect();
            let (fc, rc) = strong(&cand);
            if rc < res {
                u = cand;
                f = fc;
                res = rc;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    iterations += newton;
    let peak = peak_of(&u);
    if !(res <= opts.accept_tol * peak) || !res.is_finite() {
        return Err(Error::ConvergenceFailure {
            iterations,
            residual: res / peak.max(f64::MIN_POSITIVE),
        });
    }

    let n2 = quad(&u);
    let np = lp(&u);
    let c_value = n2 / math::powf(np, 2.0 / p);
    let energy = (0.5 - 1.0 / p) * n2;
    let mut values = vec![0.0; grid.n];
    values[start..end].copy_from_slice(&u);
    let peak = if start == 0 {
        grid.value_at_origin(&values).max(peak)
    } else {
        peak
    };
    let mut warnings = Vec::new();
    if end == grid.n && values[grid.n - 1].abs() > 1e-8 * peak {
        warnings.push(ScalarWarning::Truncation);
    }
    Ok(ScalarSolution {
        profile: RadialField {
            grid: grid.clone(),
            values,
        },
        c_value,
        energy,
        residual: res,
        peak,
        iterations,
        warnings,
    })
}

/// Optimal gluing of a ball ground state and an exterior ground state.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceOptimum {
    pub radius: f64,
    /// Sum of the two Dirichlet ground energies.
    pub energy: f64,
    pub inner: ScalarSolution,
    pub outer: ScalarSolution,
    /// Coarse scan `(R, energy)` used to bracket the optimum.
    pub scan: Vec<(f64, f64)>,
    /// More than one strict local minimum in the coarse scan.
    pub multimodal: bool,
    /// The optimum sits at the edge of the admissible radii.
    pub boundary_optimum: bool,
}

/// Minimizes `E_ball(R)[inner] + E_ext(R)[outer]` over the interface radius,
/// where `inner` and `outer` are `(λ, μ)` pairs sharing the exponent `p`.
pub fn optimize_interface(
    p: f64,
    inner: (f64, f64),
    outer: (f64, f64),
    grid: &Arc<RadialGrid>,
) -> Result<InterfaceOptimum> {
    let solve_pair = |r: f64| -> Result<(ScalarSolution, ScalarSolution)> {
        let a = solve_dirichlet_ground_state(&ScalarProblem::on(Domain::Ball(r), p, inner.0, inner.1), grid)?;
        let b = solve_dirichlet_ground_state(&ScalarProblem::on(Domain::Exterior(r), p, outer.0, outer.1), grid)?;
        Ok((a, b))
    };
    let samples = 16;
    let mut scan = Vec::with_capacity(samples);
    for k in 1..=samples {
        let r = k as f64 * grid.rmax / (samples + 1) as f64;
        let (a, b) = solve_pair(r)?;
        scan.push((r, a.energy + b.energy));
    }
    let best = (0..samples)
        .min_by(|&i, &j| scan[i].1.partial_cmp(&scan[j].1).unwrap_or(core::cmp::Ordering::Equal))
        .unwrap_or(0);
    let local_minima = (0..samples)
        .filter(|&i| {
            let left = i == 0 || scan[i].1 < scan[i - 1].1;
            let right = i + 1 == samples || scan[i].1 < scan[i + 1].1;
            left && right
        })
        .count();
    let r_min = (4.0 * grid.h).max(0.25 * scan[0].0);
    let r_max = grid.rmax - 4.0 * grid.h;
    let lo = if best == 0 { r_min } else { scan[best - 1].0 };
    let hi = if best + 1 == samples { r_max } else { scan[best + 1].0 };
    let line = golden_section(
        |r| solve_pair(r).map(|(a, b)| a.energy + b.energy),
        lo,
        hi,
        1e-7,
        120,
    )?;
    let (a, b) = solve_pair(line.x)?;
    let span = hi - lo;
    let boundary_optimum = (best == 0 && line.x - r_min < 0.01 * span)
        || (best + 1 == samples && r_max - line.x < 0.01 * span);
    Ok(InterfaceOptimum {
        radius: line.x,
        energy: a.energy + b.energy,
        inner: a,
        outer: b,
        scan,
        multimodal: local_minima > 1,
        boundary_optimum,
    })
}

/// Least-energy sign-changing radial solution of the two-parameter problem:
/// positive where it solves the `(λ₁, μ₁)` equation, negative where it
/// solves the `(λ₂, μ₂)` equation, with a single interface.
#[derive(Debug, Clone, PartialEq)]
pub struct SignChanging {
    /// Profile of the `(λ₁, μ₁)` part (non-negative).
    pub positive: ScalarSolution,
    /// Magnitude of the `(λ₂, μ₂)` part (non-negative; the solution is
    /// `positive - negative`).
    pub negative: ScalarSolution,
    pub radius: f64,
    pub energy: f64,
    /// Whether the `(λ₁, μ₁)` part occupies the ball.
    pub positive_inside: bool,
    /// Optimal energies with pair 1 inside and with pair 2 inside.
    pub orientation_energies: [f64; 2],
    pub multimodal: bool,
    pub boundary_optimum: bool,
    pub scan: Vec<(f64, f64)>,
}

impl SignChanging {
    pub fn signed_profile(&self) -> Vec<f64> {
        self.positive
            .profile
            .values
            .iter()
            .zip(&self.negative.profile.values)
            .map(|(a, b)| a - b)
            .collect()
    }
}

pub fn solve_sign_changing(
    lambda1: f64,
    lambda2: f64,
    mu1: f64,
    mu2: f64,
    p: f64,
    grid: &Arc<RadialGrid>,
) -> Result<SignChanging> {
    let first = optimize_interface(p, (lambda1, mu1), (lambda2, mu2), grid)?;
    let second = optimize_interface(p, (lambda2, mu2), (lambda1, mu1), grid)?;
    let energies = [first.energy, second.energy];
    let (opt, positive_inside) = if second.energy < first.energy {
        (second, false)
    } else {
        (first, true)
    };
    let (positive, negative) = if positive_inside {
        (opt.inner, opt.outer)
    } else {
        (opt.outer, opt.inner)
    };
    Ok(SignChanging {
        positive,
        negative,
        radius: opt.radius,
        energy: opt.energy,
        positive_inside,
        orientation_energies: energies,
        multimodal: opt.multimodal,
        boundary_optimum: opt.boundary_optimum,
        scan: opt.scan,
    })
}
