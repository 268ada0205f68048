//! Constrained minimization of `I_β` on the Nehari set (`Σ_i G_i = 0`) and
//! on the componentwise set (`G_i = 0` for all `i`), together with the
//! explicit constructions used to bracket the levels: disjoint cut-off
//! bumps and the structured strong-competition limit.
//!
//! The descent works on feasible states only. At a feasible `u` the weak
//! gradient `e` is preconditioned componentwise by the `H¹_i` Gram matrix
//! `A + λ_i W` (plus the repulsive part of the Hessian when `β < 0`), the
//! trial point `u - τd` is projected back onto the constraint set, and the
//! step is accepted under an Armijo condition on the projected energy. Both
//! constraints are natural (their constrained critical points are free
//! critical points), so `e → 0` at a minimizer and the relative dual norm
//! `⟨e, d⟩^{1/2} / (Σ‖u_i‖²_i)^{1/2}` measures stationarity. For `q ≥ 2` a
//! final Newton solve on the full system sharpens the result.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::linalg::{solve_dense, BlockTridiagonal, Tridiagonal};
use crate::math;
use crate::radial::{product_integral, Domain, Params, RadialField, RadialGrid, SystemState};
use crate::scalar::{solve_dirichlet_ground_state, solve_scalar_ground_state, solve_sign_changing, ScalarProblem};
use crate::system::{
    energy_gradient_weak, m_project, nehari_project, partial_products, quantities, signed_pow,
    Quantities,
};

/// Which constraint set the descent stays on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constraint {
    Nehari,
    Componentwise,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Classification {
    FullyNonTrivial,
    /// Indices of the (numerically) vanishing components.
    SemiTrivial(Vec<usize>),
    /// Every component vanishes.
    Degenerate,
}

impl Classification {
    pub fn label(&self) -> String {
        match self {
            Classification::FullyNonTrivial => "fully-non-trivial".into(),
            Classification::SemiTrivial(v) => {
                let idx: Vec<String> = v.iter().map(|i| format!("{}", i + 1)).collect();
                format!("semi-trivial({})", idx.join(" "))
            }
            Classification::Degenerate => "degenerate".into(),
        }
    }
}

/// `max(1e-4, 0.1·S̄^{1/(Kq-2)})`, an order of magnitude below the proven
/// lower bound for `|u_i|_{Kq,i}` on the componentwise set when `β < 0`.
pub fn default_delta(params: &Params, s_bar: f64) -> f64 {
    (0.1 * math::powf(s_bar, 1.0 / (params.p() - 2.0))).max(1e-4)
}

/// Components with `|u_i|_{Kq,i} < delta` are the vanishing ones.
pub fn classify(u: &SystemState, params: &Params, delta: f64) -> Classification {
    let qn = quantities(u, params);
    classify_quantities(&qn, params, delta)
}

fn classify_quantities(qn: &Quantities, params: &Params, delta: f64) -> Classification {
    let p = params.p();
    let small: Vec<usize> = qn
        .lp
        .iter()
        .enumerate()
        .filter(|(_, &l)| math::powf(l.max(0.0), 1.0 / p) < delta)
        .map(|(i, _)| i)
        .collect();
    if small.len() == qn.lp.len() {
        Classification::Degenerate
    } else if small.is_empty() {
        Classification::FullyNonTrivial
    } else {
        Classification::SemiTrivial(small)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct MinimizeOptions {
    pub max_iter: usize,
    /// Stop when the relative dual gradient norm falls below this.
    pub grad_tol: f64,
    /// Stop after three consecutive accepted steps with relative energy
    /// decrease below this.
    pub energy_tol: f64,
    pub armijo: f64,
    /// Largest step length the adaptive step may grow to.
    pub max_step: f64,
    /// Polish with Newton's method on the full system (only for `q ≥ 2`).
    pub newton_polish: bool,
    pub delta_classify: f64,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        MinimizeOptions {
            max_iter: 20_000,
            grad_tol: 1e-9,
            energy_tol: 1e-12,
            armijo: 1e-4,
            max_step: 1.5,
            newton_polish: true,
            delta_classify: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub state: SystemState,
    pub level: f64,
    pub classification: Classification,
    /// Max-norm (strong form, relative to the largest component peak) of
    /// `I'(u) - Σγ_i G_i'(u)` after the least-squares multiplier fit.
    pub multiplier_residual: f64,
    pub multipliers: Vec<f64>,
    /// Largest `|G_i| / max(1, ‖u_i‖²_i)`, or the relative Nehari residual.
    pub constraint_residual: f64,
    /// Relative dual norm of the gradient at the returned state.
    pub gradient_norm: f64,
    pub converged: bool,
    pub iterations: usize,
    pub projection_failures: usize,
    pub polished: bool,
    pub norms: Vec<f64>,
    pub lp: Vec<f64>,
    pub interaction: f64,
}

impl Solution {
    /// `|u_i|_{Kq,i}` for every component.
    pub fn lp_norms(&self, params: &Params) -> Vec<f64> {
        let p = params.p();
        self.lp.iter().map(|&l| math::powf(l.max(0.0), 1.0 / p)).collect()
    }
}

fn project(u: &SystemState, params: &Params, constraint: Constraint) -> Result<SystemState> {
    match constraint {
        Constraint::Nehari => nehari_project(u, params).map(|(_, v)| v),
        Constraint::Componentwise => m_project(u, params).map(|(_, v)| v),
    }
}

fn constraint_residual(qn: &Quantities, params: &Params, constraint: Constraint) -> f64 {
    match constraint {
        Constraint::Nehari => {
            let n: f64 = qn.norms.iter().sum();
            qn.nehari_residual(params).abs() / n.max(1.0)
        }
        Constraint::Componentwise => qn.max_relative_g(params),
    }
}

/// Componentwise preconditioners `A + λ_i W (+ |β|(q-1) W |u_i|^{q-2}∏_{k≠i}|u_k|^q)`.
fn preconditioners(u: &SystemState, params: &Params) -> Vec<Tridiagonal> {
    let g = &u.grid;
    let base = g.stiffness();
    let repulsive = params.beta < 0.0 && params.q >= 2.0;
    let others = if repulsive {
        Some(partial_products(u, params.q))
    } else {
        None
    };
    (0..params.k)
        .map(|i| {
            let mut m = base.clone();
            for j in 0..g.n {
                let mut extra = params.lambda[i];
                if let Some(o) = &others {
                    extra += -params.beta
                        * (params.q - 1.0)
                        * math::abs_pow(u.components[i][j], params.q - 2.0)
                        * o[i][j];
                }
                m.diag[j] += g.weights[j] * extra;
            }
            m
        })
        .collect()
}

fn dot2(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>())
        .sum()
}

fn peak(u: &SystemState) -> f64 {
    u.components
        .iter()
        .flatten()
        .fold(0.0, |m: f64, v| m.max(v.abs()))
}

/// Minimizes `I_β` on the Nehari set starting from `init`.
pub fn minimize_on_nehari(params: &Params, init: &SystemState, opts: &MinimizeOptions) -> Result<Solution> {
    if params.beta < 0.0 {
        return Err(Error::invalid("Nehari minimization is posed for beta >= 0"));
    }
    descend(params, init, Constraint::Nehari, opts)
}

/// Minimizes `I_β` on the componentwise constraint set starting from `init`.
pub fn minimize_on_mr(params: &Params, init: &SystemState, opts: &MinimizeOptions) -> Result<Solution> {
    descend(params, init, Constraint::Componentwise, opts)
}

pub fn minimize(params: &Params, init: &SystemState, constraint: Constraint, opts: &MinimizeOptions) -> Result<Solution> {
    match constraint {
        Constraint::Nehari => minimize_on_nehari(params, init, opts),
        Constraint::Componentwise => minimize_on_mr(params, init, opts),
    }
}

fn descend(params: &Params, init: &SystemState, constraint: Constraint, opts: &MinimizeOptions) -> Result<Solution> {
    params.validate()?;
    if init.k() != params.k {
        return Err(Error::invalid(format!(
            "initial state has {} components, expected {}",
            init.k(),
            params.k
        )));
    }
    if init.grid.d != params.d {
        return Err(Error::invalid("grid dimension differs from the parameters"));
    }
    let mut u = project(init, params, constraint).map_err(|e| Error::InfeasibleStart(format!("{e}")))?;
    let mut level = quantities(&u, params).energy(params);
    let mut tau = 1.0;
    let mut iterations = 0;
    let mut failures = 0;
    let mut small_steps = 0;
    let mut converged = false;
    let mut gradient_norm = f64::INFINITY;
    while iterations < opts.max_iter {
        let grad = energy_gradient_weak(&u, params)?;
        let pre = preconditioners(&u, params);
        let mut dir = Vec::with_capacity(params.k);
        for (m, e) in pre.iter().zip(&grad) {
            dir.push(m.solve(e)?);
        }
        let slope = dot2(&grad, &dir).max(0.0);
        let scale: f64 = quantities(&u, params).norms.iter().sum();
        gradient_norm = math::sqrt(slope / scale.max(f64::MIN_POSITIVE));
        if gradient_norm < opts.grad_tol {
            converged = true;
            break;
        }
        iterations += 1;
        let mut accepted = None;
        while tau > 1e-14 {
            match project(&u.axpy(-tau, &dir), params, constraint) {
                Ok(v) => {
                    let e = quantities(&v, params).energy(params);
                    if e.is_finite() && e <= level - opts.armijo * tau * slope {
                        accepted = Some((v, e));
                        break;
                    }
                }
                Err(_) => failures += 1,
            }
            tau *= 0.5;
        }
        let Some((v, e)) = accepted else {
            break;
        };
        let decrease = level - e;
        u = v;
        level = e;
        if decrease <= opts.energy_tol * level.abs() {
            small_steps += 1;
            if small_steps >= 3 {
                converged = true;
                break;
            }
        } else {
            small_steps = 0;
        }
        tau = (2.0 * tau).min(opts.max_step);
    }

    let mut polished = false;
    if opts.newton_polish && params.q >= 2.0 {
        if let Ok(v) = newton_critical_point(&u, params, 30) {
            if let Ok(v) = project(&v, params, constraint) {
                let e = quantities(&v, params).energy(params);
                let before = strong_residual(&u, params)?;
                let after = strong_residual(&v, params)?;
                if after < before && (e - level).abs() <= 1e-6 * level.abs() && e <= level + 1e-10 * level.abs() {
                    u = v;
                    polished = true;
                }
            }
        }
    }
    finish(u, params, constraint, opts, iterations, failures, converged, polished, gradient_norm)
}

#[allow(clippy::too_many_arguments)]
fn finish(
    u: SystemState,
    params: &Params,
    constraint: Constraint,
    opts: &MinimizeOptions,
    iterations: usize,
    failures: usize,
    converged: bool,
    polished: bool,
    mut gradient_norm: f64,
) -> Result<Solution> {
    let qn = quantities(&u, params);
    let level = qn.energy(params);
    let residual = constraint_residual(&qn, params, constraint);
    if polished {
        let grad = energy_gradient_weak(&u, params)?;
        let pre = preconditioners(&u, params);
        let mut slope = 0.0;
        for ((m, e), _) in pre.iter().zip(&grad).zip(0..) {
            let d = m.solve(e)?;
            slope += e.iter().zip(&d).map(|(a, b)| a * b).sum::<f64>();
        }
        let scale: f64 = qn.norms.iter().sum();
        gradient_norm = math::sqrt(slope.max(0.0) / scale);
    }
    let (multipliers, multiplier_residual) = fit_multipliers(&u, params, constraint)?;
    Ok(Solution {
        classification: classify_quantities(&qn, params, opts.delta_classify),
        level,
        multiplier_residual,
        multipliers,
        constraint_residual: residual,
        gradient_norm,
        converged: (converged || polished) && residual < 1e-8,
        iterations,
        projection_failures: failures,
        polished,
        norms: qn.norms,
        lp: qn.lp,
        interaction: qn.interaction,
        state: u,
    })
}

/// Weak gradients of every `G_i`, as `K` full states.
fn constraint_gradients(u: &SystemState, params: &Params) -> Vec<Vec<Vec<f64>>> {
    let g = &u.grid;
    let k = params.k;
    let p = params.p();
    let q = params.q;
    let beta = params.beta;
    let others = partial_products(u, q);
    // ∂P/∂u_m at each node (weak form), without the factor β
    let dp: Vec<Vec<f64>> = (0..k)
        .map(|m| {
            (0..g.n)
                .map(|j| g.weights[j] * q * signed_pow(u.components[m][j], q - 1.0) * others[m][j])
                .collect()
        })
        .collect();
    (0..k)
        .map(|i| {
            (0..k)
                .map(|m| {
                    let mut v: Vec<f64> = dp[m].iter().map(|x| -beta * x).collect();
                    if m == i {
                        let c = &u.components[i];
                        let a = g.stiffness_apply(c);
                        for j in 0..g.n {
                            v[j] += 2.0 * (a[j] + params.lambda[i] * g.weights[j] * c[j])
                                - p * params.mu[i] * g.weights[j] * signed_pow(c[j], p - 1.0);
                        }
                    }
                    v
                })
                .collect()
        })
        .collect()
}

/// Least-squares multipliers `γ` for `I'(u) ≈ Σγ_i G_i'(u)` (one multiplier
/// for the Nehari constraint), in the `W^{-1}` metric, and the max-norm of
/// the strong-form remainder relative to the state's peak.
pub fn fit_multipliers(u: &SystemState, params: &Params, constraint: Constraint) -> Result<(Vec<f64>, f64)> {
    let g = &u.grid;
    let grad = energy_gradient_weak(u, params)?;
    let cg = constraint_gradients(u, params);
    let basis: Vec<Vec<Vec<f64>>> = match constraint {
        Constraint::Componentwise => cg,
        Constraint::Nehari => {
            let mut sum = vec![vec![0.0; g.n]; params.k];
            for gi in &cg {
                for (s, c) in sum.iter_mut().zip(gi) {
                    for (a, b) in s.iter_mut().zip(c) {
                        *a += b;
                    }
                }
            }
            vec![sum]
        }
    };
    let m = basis.len();
    let inner = |a: &[Vec<f64>], b: &[Vec<f64>]| -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| {
                x.iter()
                    .zip(y)
                    .zip(&g.weights)
                    .map(|((p, q), w)| p * q / w)
                    .sum::<f64>()
            })
            .sum()
    };
    let mut gram = vec![0.0; m * m];
    let mut rhs = vec![0.0; m];
    for a in 0..m {
        for b in 0..m {
            gram[a * m + b] = inner(&basis[a], &basis[b]);
        }
        rhs[a] = inner(&basis[a], &grad);
    }
    let gamma = solve_dense(&gram, &rhs, m).unwrap_or_else(|_| vec![0.0; m]);
    let mut worst: f64 = 0.0;
    for i in 0..params.k {
        for j in 0..g.n {
            let mut r = grad[i][j];
            for (a, b) in basis.iter().enumerate() {
                r -= gamma[a] * b[i][j];
            }
            worst = worst.max((r / g.weights[j]).abs());
        }
    }
    Ok((gamma, worst / peak(u).max(f64::MIN_POSITIVE)))
}

/// Max-norm of the strong-form residual of the system relative to the
/// state's peak.
pub fn strong_residual(u: &SystemState, params: &Params) -> Result<f64> {
    let e = energy_gradient_weak(u, params)?;
    let mut worst: f64 = 0.0;
    for c in &e {
        for (v, w) in c.iter().zip(&u.grid.weights) {
            worst = worst.max((v / w).abs());
        }
    }
    Ok(worst / peak(u).max(f64::MIN_POSITIVE))
}

/// Newton's method on `I_β'(u) = 0` with the exact block-tridiagonal
/// Hessian. Requires `q ≥ 2` so that the Hessian is continuous.
pub fn newton_critical_point(u0: &SystemState, params: &Params, max_iter: usize) -> Result<SystemState> {
    if params.q < 2.0 {
        return Err(Error::invalid("Newton polish needs q >= 2"));
    }
    let g = u0.grid.clone();
    let k = params.k;
    let n = g.n;
    let p = params.p();
    let q = params.q;
    let beta = params.beta;
    let mut u = u0.clone();
    let mut res = strong_residual(&u, params)?;
    for _ in 0..max_iter {
        if res < 1e-11 {
            break;
        }
        let grad = energy_gradient_weak(&u, params)?;
        let others = partial_products(&u, q);
        let mut diag = Vec::with_capacity(n);
        for j in 0..n {
            let w = g.weights[j];
            let mut block = vec![0.0; k * k];
            let left = if j > 0 { g.faces[j - 1] } else { 0.0 };
            let right = if j + 1 < n { g.faces[j] } else { g.boundary };
            for i in 0..k {
                let ui = u.components[i][j];
                block[i * k + i] = left + right
                    + w * (params.lambda[i]
                        - params.mu[i] * (p - 1.0) * math::abs_pow(ui, p - 2.0)
                        - beta * (q - 1.0) * math::abs_pow(ui, q - 2.0) * others[i][j]);
                for m in 0..k {
                    if m == i {
                        continue;
                    }
                    let mut rest = 1.0;
                    for (l, c) in u.components.iter().enumerate() {
                        if l != i && l != m {
                            rest *= math::abs_pow(c[j], q);
                        }
                    }
                    block[i * k + m] = -w
                        * beta
                        * q
                        * signed_pow(ui, q - 1.0)
                        * signed_pow(u.components[m][j], q - 1.0)
                        * rest;
                }
            }
            diag.push(block);
        }
        let off: Vec<Vec<f64>> = g.faces.iter().map(|&c| vec![-c; k]).collect();
        let bt = BlockTridiagonal { k, diag, off };
        let mut rhs = vec![0.0; n * k];
        for j in 0..n {
            for i in 0..k {
                rhs[j * k + i] = grad[i][j];
            }
        }
        let delta = bt.solve(&rhs)?;
        let dir: Vec<Vec<f64>> = (0..k).map(|i| (0..n).map(|j| delta[j * k + i]).collect()).collect();
        let mut step = 1.0;
        let mut improved = false;
        for _ in 0..12 {
            let cand = u.axpy(-step, &dir);
            let r = strong_residual(&cand, params)?;
            if r < res {
                u = cand;
                res = r;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    Ok(u)
}

/// Scalar ground states `w_i` of every component's own `(λ_i, μ_i)` with
/// exponent `Kq` (shared between components with equal parameters).
pub fn ground_profiles(params: &Params, grid: &Arc<RadialGrid>) -> Result<Vec<Vec<f64>>> {
    let p = params.p();
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(params.k);
    for i in 0..params.k {
        let (l, m) = (params.lambda[i], params.mu[i]);
        let w = match (0..i).find(|&j| params.lambda[j] == l && params.mu[j] == m) {
            Some(j) => out[j].clone(),
            None => solve_scalar_ground_state(&ScalarProblem::full(p, l, m), grid)?.profile.values,
        };
        out.push(w);
    }
    Ok(out)
}

/// Smooth step: 0 for `x ≤ 0`, 1 for `x ≥ 1`, `C^∞` in between.
pub fn smooth_step(x: f64) -> f64 {
    let psi = |t: f64| if t > 0.0 { math::exp(-1.0 / t) } else { 0.0 };
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        psi(x) / (psi(x) + psi(1.0 - x))
    }
}

/// Cut-off `η(t)`: 1 for `t ≤ ½`, 0 for `t ≥ 1`.
pub fn cutoff(t: f64) -> f64 {
    1.0 - smooth_step(2.0 * t - 1.0)
}

/// Warm-started minimization at `params.beta` from a minimizer `prev`
/// obtained at `beta_prev`. When `prev` cannot be projected at the target
/// coupling, intermediate couplings are inserted (geometrically when both
/// couplings share a sign) and followed with a loose tolerance until the
/// target becomes reachable.
pub fn continue_in_beta(
    params: &Params,
    prev: &SystemState,
    beta_prev: f64,
    constraint: Constraint,
    opts: &MinimizeOptions,
) -> Result<Solution> {
    let loose = MinimizeOptions {
        grad_tol: opts.grad_tol.max(1e-6),
        newton_polish: false,
        ..*opts
    };
    let target = params.beta;
    let mut state = prev.clone();
    let mut current = beta_prev;
    for _ in 0..64 {
        if project(&state, params, constraint).is_ok() {
            return minimize(params, &state, constraint, opts);
        }
        let mut next = target;
        let mut reached = false;
        for _ in 0..30 {
            next = if current * next > 0.0 {
                current.signum() * math::sqrt(current.abs() * next.abs())
            } else {
                0.5 * (current + next)
            };
            if project(&state, &params.with_beta(next), constraint).is_ok() {
                reached = true;
                break;
            }
        }
        if !reached {
            break;
        }
        state = minimize(&params.with_beta(next), &state, constraint, &loose)?.state;
        current = next;
    }
    Err(Error::InfeasibleStart(format!(
        "continuation from beta = {beta_prev} to {target} did not reach a feasible state"
    )))
}

/// The deterministic battery of starting states for the multistart search:
/// symmetric ground states, staggered bumps (both orders), the best
/// semi-trivial state plus a small perturbation, a segregated warm start
/// (the given `limit_state`, or a cheap ball/shell surrogate), and three
/// pseudo-random bump mixtures drawn from `seed`.
pub fn initial_states(
    params: &Params,
    grid: &Arc<RadialGrid>,
    seed: u64,
    semi_trivial_index: usize,
    limit_state: Option<&SystemState>,
) -> Result<Vec<(String, SystemState)>> {
    let k = params.k;
    let w = ground_profiles(params, grid)?;
    let nodes = &grid.nodes;
    let bump = |center: f64, width: f64| -> Vec<f64> {
        nodes
            .iter()
            .map(|&r| {
                let z = (r - center) / width;
                math::exp(-z * z)
            })
            .collect()
    };
    let scale = |i: usize| 1.0 / math::sqrt(params.lambda[i]);
    let mut out = Vec::new();
    out.push(("symmetric".into(), SystemState::new(grid.clone(), w.clone())?));
    let staggered: Vec<Vec<f64>> = (0..k).map(|i| bump(2.0 * i as f64 * scale(i), scale(i))).collect();
    out.push(("staggered".into(), SystemState::new(grid.clone(), staggered)?));
    let reversed: Vec<Vec<f64>> = (0..k)
        .map(|i| bump(2.0 * (k - 1 - i) as f64 * scale(i), scale(i)))
        .collect();
    out.push(("staggered-reversed".into(), SystemState::new(grid.clone(), reversed)?));
    let semi: Vec<Vec<f64>> = (0..k)
        .map(|i| {
            let f = if i == semi_trivial_index { 1.0 } else { 0.05 };
            w[i].iter().map(|v| f * v).collect()
        })
        .collect();
    out.push((
        format!("semi-trivial-{}-perturbed", semi_trivial_index + 1),
        SystemState::new(grid.clone(), semi)?,
    ));
    let warm = match limit_state {
        Some(s) => s.clone(),
        None => {
            let r0 = scale(0);
            let mut comps = w.clone();
            comps[0] = nodes
                .iter()
                .zip(&w[0])
                .map(|(&r, v)| v * (1.0 - smooth_step(2.0 * r / r0 - 1.0)))
                .collect();
            let c1 = r0 + 1.5 * scale(1);
            comps[1] = bump(c1, scale(1))
                .iter()
                .zip(nodes)
                .map(|(v, &r)| v * smooth_step(2.0 * (r - r0) / r0))
                .collect();
            SystemState::new(grid.clone(), comps)?
        }
    };
    out.push(("segregated-warm-start".into(), warm));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut uniform = move || (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    for r in 0..3 {
        let comps: Vec<Vec<f64>> = (0..k)
            .map(|i| {
                let mut v = vec![0.0; grid.n];
                for _ in 0..2 {
                    let c = 4.0 * scale(i) * uniform();
                    let width = (0.5 + 1.5 * uniform()) * scale(i);
                    let amp = 0.2 + 0.8 * uniform();
                    for (x, b) in v.iter_mut().zip(bump(c, width)) {
                        *x += amp * b;
                    }
                }
                v
            })
            .collect();
        out.push((format!("random-{}", r + 1), SystemState::new(grid.clone(), comps)?));
    }
    Ok(out)
}

/// Outcome of one start in a multistart search.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub label: String,
    pub result: Result<Solution>,
}

/// Runs every start and returns the outcomes; the best one is the
/// converged (or, failing that, any) solution with the lowest level.
pub fn multistart(
    params: &Params,
    starts: &[(String, SystemState)],
    constraint: Constraint,
    opts: &MinimizeOptions,
) -> Vec<RunOutcome> {
    starts
        .iter()
        .map(|(label, u)| RunOutcome {
            label: label.clone(),
            result: minimize(params, u, constraint, opts),
        })
        .collect()
}

/// Index of the best run: lowest level among converged runs, falling back
/// to all successful runs.
pub fn best_run(runs: &[RunOutcome]) -> Option<usize> {
    let pick = |require: bool| {
        runs.iter()
            .enumerate()
            .filter_map(|(i, r)| match &r.result {
                Ok(s) if s.converged || !require => Some((i, s.level)),
                _ => None,
            })
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(core::cmp::Ordering::Equal))
            .map(|(i, _)| i)
    };
    pick(true).or_else(|| pick(false))
}

/// The cut-off bump configuration: component 1 is `η(|x - 2Re₁|/R) w_1`,
/// the others `η(|x|/R) w_i`, each rescaled onto its own Nehari identity.
/// The supports only touch at one point, so the product vanishes and every
/// constraint holds exactly. The radial profiles are stored unshifted;
/// `centers` records the translation, and the energy is translation
/// invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct DisjointBumps {
    pub state: SystemState,
    pub centers: Vec<f64>,
    pub support_radius: f64,
    pub scalings: Vec<f64>,
    pub energy: f64,
    /// `G_i` of each component (its own Nehari identity, the product being
    /// zero).
    pub residuals: Vec<f64>,
    /// `Σ_i (½ - 1/Kq) c_i^{Kq/(Kq-2)}` computed on the same grid.
    pub limit: f64,
}

pub fn build_disjoint_test_state(params: &Params, r: f64, grid: &Arc<RadialGrid>) -> Result<DisjointBumps> {
    params.validate()?;
    if !(r > 0.0) || r > grid.rmax {
        return Err(Error::invalid(format!(
            "bump radius {r} must lie in (0, rmax = {}]",
            grid.rmax
        )));
    }
    if r < 8.0 * grid.h {
        return Err(Error::invalid("bump radius is below the grid resolution"));
    }
    let p = params.p();
    let w = ground_profiles(params, grid)?;
    let comps: Vec<Vec<f64>> = w
        .iter()
        .map(|wi| {
            grid.nodes
                .iter()
                .zip(wi)
                .map(|(&x, v)| v * cutoff(x / r))
                .collect()
        })
        .collect();
    let raw = SystemState::new(grid.clone(), comps)?;
    let qn = quantities(&raw, params);
    let scalings: Vec<f64> = qn
        .norms
        .iter()
        .zip(&qn.lp)
        .map(|(n, l)| math::powf(n / l, 1.0 / (p - 2.0)))
        .collect();
    let state = raw.scaled(&scalings);
    let qs = quantities(&state, params);
    let residuals: Vec<f64> = qs.norms.iter().zip(&qs.lp).map(|(n, l)| n - l).collect();
    let energy = qs.norms.iter().zip(&qs.lp).map(|(n, l)| 0.5 * n - l / p).sum();
    let limit = w
        .iter()
        .zip(&params.lambda)
        .map(|(wi, l)| (0.5 - 1.0 / p) * (grid.dirichlet_energy(wi) + l * grid.inner(wi, wi)))
        .sum();
    let mut centers = vec![0.0; params.k];
    centers[0] = 2.0 * r;
    Ok(DisjointBumps {
        state,
        centers,
        support_radius: r,
        scalings,
        energy,
        residuals,
        limit,
    })
}

/// The structured minimizer of the strong-competition limit problem: one
/// pair of components glued into a least-energy sign-changing radial
/// solution, the others free scalar ground states.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitStructure {
    /// `(i₁, i₂)`: `i₂` occupies the ball, `i₁` the exterior.
    pub pair: (usize, usize),
    pub interface_radius: f64,
    pub level: f64,
    pub pair_energy: f64,
    /// Ball part, then exterior part.
    pub segregated_parts: [RadialField; 2],
    pub free_components: Vec<(usize, RadialField)>,
    /// The assembled K-component state.
    pub state: SystemState,
    /// Level of every unordered pair examined, `(i, j, level)`.
    pub candidates: Vec<(usize, usize, f64)>,
    pub multimodal: bool,
    pub boundary_optimum: bool,
    /// `(R, pair energy)` samples of the interface scan for the best pair.
    pub scan: Vec<(f64, f64)>,
}

/// Minimizes the limit energy over pairs and interface radii.
pub fn minimize_limit_problem(params: &Params, grid: &Arc<RadialGrid>) -> Result<LimitStructure> {
    params.validate()?;
    let k = params.k;
    let p = params.p();
    let w = ground_profiles(params, grid)?;
    let free_energy: Vec<f64> = {
        let s = SystemState::new(grid.clone(), w.clone())?;
        let qn = quantities(&s, params);
        qn.norms.iter().map(|n| (0.5 - 1.0 / p) * n).collect()
    };
    let mut cache: Vec<((f64, f64, f64, f64), crate::scalar::SignChanging)> = Vec::new();
    let mut best: Option<(usize, usize, f64, crate::scalar::SignChanging)> = None;
    let mut candidates = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            let key = (params.lambda[i], params.mu[i], params.lambda[j], params.mu[j]);
            let sc = match cache.iter().find(|(kk, _)| *kk == key) {
                Some((_, s)) => s.clone(),
                None => {
                    let s = solve_sign_changing(key.0, key.2, key.1, key.3, p, grid)?;
                    cache.push((key, s.clone()));
                    s
                }
            };
            let free: f64 = (0..k).filter(|&m| m != i && m != j).map(|m| free_energy[m]).sum();
            let level = sc.energy + free;
            candidates.push((i, j, level));
            if best.as_ref().is_none_or(|b| level < b.2) {
                best = Some((i, j, level, sc));
            }
        }
    }
    let (i, j, level, sc) = best.ok_or_else(|| Error::invalid("no component pair"))?;
    // sc.positive carries component i's parameters, sc.negative component j's
    let (inner_idx, outer_idx, inner, outer) = if sc.positive_inside {
        (i, j, sc.positive.profile.clone(), sc.negative.profile.clone())
    } else {
        (j, i, sc.negative.profile.clone(), sc.positive.profile.clone())
    };
    let mut comps = w.clone();
    comps[inner_idx] = inner.values.clone();
    comps[outer_idx] = outer.values.clone();
    let free_components = (0..k)
        .filter(|&m| m != i && m != j)
        .map(|m| Ok((m, RadialField::new(grid.clone(), w[m].clone())?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(LimitStructure {
        pair: (outer_idx, inner_idx),
        interface_radius: sc.radius,
        level,
        pair_energy: sc.energy,
        segregated_parts: [inner, outer],
        free_components,
        state: SystemState::new(grid.clone(), comps)?,
        candidates,
        multimodal: sc.multimodal,
        boundary_optimum: sc.boundary_optimum,
        scan: sc.scan,
    })
}

/// Energy of a fully segregated configuration: component `i` is the
/// Dirichlet ground state of its own parameters on the `i`-th of the shells
/// `B_r`, `B_{2r} \ B_r`, …, `ℝ^d \ B_{(K-1)r}`.
pub fn segregated_shells_level(params: &Params, grid: &Arc<RadialGrid>, r: f64) -> Result<f64> {
    let k = params.k;
    let p = params.p();
    let mut total = 0.0;
    for i in 0..k {
        let domain = if i == 0 {
            Domain::Ball(r)
        } else if i + 1 == k {
            Domain::Exterior(i as f64 * r)
        } else {
            Domain::Annulus(i as f64 * r, (i + 1) as f64 * r)
        };
        total += solve_dirichlet_ground_state(&ScalarProblem::on(domain, p, params.lambda[i], params.mu[i]), grid)?.energy;
    }
    Ok(total)
}

/// `∫∏|u_i|^q` of the limit state (zero by construction).
pub fn limit_product(ls: &LimitStructure, q: f64) -> f64 {
    product_integral(&ls.state, q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::make_grid;

    #[test]
    fn cutoff_shape() {
        assert_eq!(cutoff(0.3), 1.0);
        assert_eq!(cutoff(0.5), 1.0);
        assert_eq!(cutoff(1.0), 0.0);
        assert!((cutoff(0.75) - 0.5).abs() < 1e-15);
        let mut prev = 1.0;
        for i in 0..=100 {
            let v = cutoff(0.5 + 0.005 * i as f64);
            assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn classification_rules() {
        let params = Params::uniform(2, 3, 2.0, 0.0).unwrap();
        let g = make_grid(10.0, 200, 2).unwrap();
        let u = SystemState::zeros(g.clone(), 3);
        assert_eq!(classify(&u, &params, 1e-4), Classification::Degenerate);
        let mut v = u.clone();
        v.components[1] = g.nodes.iter().map(|r| math::exp(-r * r)).collect();
        assert_eq!(classify(&v, &params, 1e-4), Classification::SemiTrivial(vec![0, 2]));
        assert_eq!(Classification::SemiTrivial(vec![0, 2]).label(), "semi-trivial(1 3)");
    }

    fn small() -> (Params, Arc<RadialGrid>) {
        let params = Params::uniform(2, 3, 2.0, 0.0).unwrap();
        (params, make_grid(20.0, 1200, 2).unwrap())
    }

    #[test]
    fn disjoint_bumps_are_exactly_feasible() {
        let (params, g) = small();
        let b = build_disjoint_test_state(&params, 5.0, &g).unwrap();
        // every profile vanishes beyond R, so B(2R e₁, R) and B(0, R) only touch
        for c in &b.state.components {
            for (x, v) in g.nodes.iter().zip(c) {
                if *x >= 5.0 {
                    assert_eq!(*v, 0.0);
                }
            }
        }
        assert_eq!(b.centers[0], 10.0);
        for r in &b.residuals {
            assert!(r.abs() < 1e-12);
        }
        assert!(b.energy > b.limit);
        assert!(build_disjoint_test_state(&params, 25.0, &g).is_err());
        assert!(build_disjoint_test_state(&params, 0.1, &g).is_err());
    }

    #[test]
    fn decoupled_nehari_minimum_is_semi_trivial() {
        let (params, g) = small();
        let starts = initial_states(&params, &g, 1, 0, None).unwrap();
        assert_eq!(starts.len(), 8);
        let runs = multistart(&params, &starts, Constraint::Nehari, &MinimizeOptions::default());
        let best = runs[best_run(&runs).unwrap()].result.as_ref().unwrap();
        let w = ground_profiles(&params, &g).unwrap();
        let ceiling = (0.5 - 1.0 / params.p()) * (g.dirichlet_energy(&w[0]) + g.inner(&w[0], &w[0]));
        assert!((best.level - ceiling).abs() < 1e-8 * ceiling, "{} {}", best.level, ceiling);
        match &best.classification {
            Classification::SemiTrivial(v) => assert_eq!(v.len(), 2),
            c => panic!("unexpected {c:?}"),
        }
    }

    #[test]
    fn nehari_rejects_negative_beta() {
        let (params, g) = small();
        let u = SystemState::new(g.clone(), ground_profiles(&params, &g).unwrap()).unwrap();
        assert!(minimize_on_nehari(&params.with_beta(-1.0), &u, &MinimizeOptions::default()).is_err());
    }

    #[test]
    fn repulsive_minimizer_is_a_free_critical_point() {
        let (params, g) = small();
        let p = params.with_beta(-2.0);
        let starts = initial_states(&p, &g, 1, 0, None).unwrap();
        let sol = minimize_on_mr(&p, &starts[1].1, &MinimizeOptions::default()).unwrap();
        assert!(sol.converged);
        assert_eq!(sol.classification, Classification::FullyNonTrivial);
        assert!(sol.constraint_residual < 1e-8);
        assert!(sol.multipliers.iter().all(|g| g.abs() < 1e-6));
        assert!(sol.multiplier_residual < 1e-6);
        assert!(strong_residual(&sol.state, &p).unwrap() < 1e-6);
    }

    #[test]
    fn continuation_reaches_strong_repulsion() {
        let (params, g) = small();
        let p = params.with_beta(-1.0);
        let starts = initial_states(&p, &g, 1, 0, None).unwrap();
        let opts = MinimizeOptions::default();
        let first = minimize_on_mr(&p, &starts[1].1, &opts).unwrap();
        let next = continue_in_beta(&params.with_beta(-100.0), &first.state, -1.0, Constraint::Componentwise, &opts).unwrap();
        assert!(next.converged);
        assert!(next.level > first.level);
    }

    #[test]
    fn limit_state_is_partially_segregated() {
        let (params, g) = small();
        let ls = minimize_limit_problem(&params, &g).unwrap();
        assert_eq!(limit_product(&ls, params.q), 0.0);
        assert_eq!(ls.free_components.len(), 1);
        assert_eq!(ls.candidates.len(), 3);
        assert_eq!(classify(&ls.state, &params, 1e-4), Classification::FullyNonTrivial);
        let (a, b) = ls.pair;
        let support = |i: usize| ls.state.components[i].iter().map(|v| *v != 0.0).collect::<Vec<_>>();
        let (sa, sb) = (support(a), support(b));
        assert!(sa.iter().zip(&sb).all(|(x, y)| !(*x && *y)));
        assert!(ls.level < segregated_shells_level(&params, &g, 1.0).unwrap());
    }
}
