//! Explicit constants and thresholds of the coupled problem.
//!
//! * `S̄ = min_i c_{Kq,λ_i,μ_i}`, which fixes the semi-trivial ceiling
//!   `(½ - 1/Kq) S̄^{Kq/(Kq-2)}`;
//! * `C̄`, a β-uniform upper bound for the radial constrained level, built
//!   from Dirichlet Sobolev constants of a partition with empty common
//!   intersection;
//! * `ubar-β` and `L`, the small-β thresholds;
//! * the reduced quotient `F` on the positive orthant, whose infimum times
//!   `(∏μ_i)^{1/K}` bounds the ground-state threshold `β̄` from below, and
//!   sampled quotients bounding `β̄` from above.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::math;
use crate::optim::{bfgs, golden_section, BfgsOptions};
use crate::radial::{Domain, Params, RadialGrid, SystemState};
use crate::scalar::{optimize_interface, solve_dirichlet_ground_state, solve_scalar_ground_state, ScalarProblem};
use crate::system::quantities;

/// `F(s) = ((1+Σs_i²)^{Kq/2} - 1 - Σs_i^{Kq}) / (K ∏s_i^q)` for
/// `s ∈ (0,∞)^{K-1}`.
pub fn reduced_quotient_f(s: &[f64], k: usize, q: f64) -> Result<f64> {
    if s.len() + 1 != k {
        return Err(Error::Domain(format!(
            "reduced quotient for K = {k} takes {} variables, got {}",
            k.saturating_sub(1),
            s.len()
        )));
    }
    if let Some(bad) = s.iter().find(|&&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::Domain(format!("reduced quotient needs s_i > 0, got {bad}")));
    }
    let x: Vec<f64> = s.iter().map(|&v| math::ln(v)).collect();
    Ok(reduced_in_logs(&x, k, q).0)
}

/// `F` and its gradient with respect to `x_i = ln s_i`.
///
/// With `t = (1, s_1², …, s_{K-1}²)`, `T = Σt_j` and `m = Kq/2` the numerator
/// is `T^m (1 - Σ_j (t_j/T)^m)`. Each ratio is formed as
/// `1 - (T - t_j)/T` with `T - t_j` summed from the other terms, so the
/// bracket keeps full relative accuracy even when one term dominates and
/// the direct formula would cancel catastrophically.
fn reduced_in_logs(x: &[f64], k: usize, q: f64) -> (f64, Vec<f64>) {
    let kq = k as f64 * q;
    let m = 0.5 * kq;
    let mut t = Vec::with_capacity(k);
    t.push(1.0);
    t.extend(x.iter().map(|&v| math::exp(2.0 * v)));
    let total: f64 = t.iter().sum();
    if !total.is_finite() {
        return (f64::INFINITY, vec![0.0; x.len()]);
    }
    let ln_ratio: Vec<f64> = (0..k)
        .map(|j| {
            let others: f64 = t.iter().enumerate().filter(|&(i, _)| i != j).map(|(_, v)| v).sum();
            math::ln_1p(-others / total)
        })
        .collect();
    let dominant = (0..k)
        .max_by(|&a, &b| t[a].partial_cmp(&t[b]).unwrap_or(core::cmp::Ordering::Equal))
        .unwrap_or(0);
    let mut bracket = -math::expm1(m * ln_ratio[dominant]);
    for j in 0..k {
        if j != dominant {
            bracket -= math::exp(m * ln_ratio[j]);
        }
    }
    let ln_total = math::ln(total);
    let ln_scale = m * ln_total - math::ln(k as f64) - q * x.iter().sum::<f64>();
    let f = math::exp(ln_scale) * bracket;
    // ∂F/∂x_i = Kq s_i² T^{m-1} (1 - (s_i²/T)^{m-1}) / (K∏s^q) - qF
    let grad = (0..x.len())
        .map(|i| {
            let j = i + 1;
            let g = -math::expm1((m - 1.0) * ln_ratio[j]);
            kq * math::exp(ln_scale + 2.0 * x[i] - ln_total) * g - q * f
        })
        .collect();
    (f, grad)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedMinimum {
    pub value: f64,
    pub argmin: Vec<f64>,
    /// Number of distinct converged local minima among all starts.
    pub distinct_minima: usize,
    pub starts: usize,
    /// Smallest value sampled along rays `s = ρθ` with `ρ → 0` and `ρ → ∞`.
    pub boundary_min: f64,
    /// `K^{Kq/2-1} - 1`, the value at the symmetric point.
    pub symmetric_value: f64,
}

/// Seed of the multistart sampler; fixed so the search is reproducible.
pub const REDUCED_SEED: u64 = 0x4b_57_49_53_45;

fn unit_uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Global minimum estimate of the reduced quotient by BFGS in logarithmic
/// coordinates from 64 log-uniform random starts in `[1e-2, 1e2]^{K-1}`,
/// the symmetric point and coordinate-skewed points.
pub fn minimize_reduced_quotient(k: usize, q: f64) -> Result<ReducedMinimum> {
    if k < 3 || !(q >= 1.0) {
        return Err(Error::Domain(format!("need K >= 3 and q >= 1, got K = {k}, q = {q}")));
    }
    let m = k - 1;
    let ln10 = math::ln(10.0);
    let mut starts: Vec<Vec<f64>> = Vec::new();
    starts.push(vec![0.0; m]);
    for i in 0..m {
        for &skew in &[ln10, -ln10] {
            let mut x = vec![0.0; m];
            x[i] = skew;
            starts.push(x);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(REDUCED_SEED);
    for _ in 0..64 {
        starts.push((0..m).map(|_| (4.0 * unit_uniform(&mut rng) - 2.0) * ln10).collect());
    }
    let opts = BfgsOptions {
        max_iter: 400,
        grad_tol: 1e-11,
        f_tol: 0.0,
        max_step: 2.0,
    };
    let mut minima: Vec<(f64, Vec<f64>)> = Vec::new();
    let mut best = (f64::INFINITY, vec![0.0; m]);
    for x0 in &starts {
        let r = bfgs(|x| reduced_in_logs(x, k, q), x0, opts);
        if r.value < best.0 {
            best = (r.value, r.x.clone());
        }
        if r.converged && r.x.iter().all(|v| v.abs() < 20.0) {
            let known = minima
                .iter()
                .any(|(_, y)| y.iter().zip(&r.x).all(|(a, b)| (a - b).abs() < 1e-3));
            if !known {
                minima.push((r.value, r.x));
            }
        }
    }
    let boundary_min = boundary_samples(k, q)
        .iter()
        .map(|x| reduced_in_logs(x, k, q).0)
        .fold(f64::INFINITY, f64::min);
    let kq = k as f64 * q;
    Ok(ReducedMinimum {
        value: best.0,
        argmin: best.1.iter().map(|&v| math::exp(v)).collect(),
        distinct_minima: minima.len(),
        starts: starts.len(),
        boundary_min,
        symmetric_value: math::powf(k as f64, 0.5 * kq - 1.0) - 1.0,
    })
}

/// Log-coordinates of points `ρθ` with `ρ ∈ {1e-4, 1e4}` and `θ` ranging
/// over the symmetric direction, directions near each corner of the
/// positive sphere, and a few mixed directions.
pub fn boundary_samples(k: usize, _q: f64) -> Vec<Vec<f64>> {
    let m = k - 1;
    let mut dirs: Vec<Vec<f64>> = vec![vec![1.0; m]];
    for i in 0..m {
        for &eps in &[1e-1, 1e-3] {
            let mut t = vec![eps; m];
            t[i] = 1.0;
            dirs.push(t);
        }
        let mut t = vec![1.0; m];
        t[i] = 0.5;
        dirs.push(t);
    }
    let mut out = Vec::new();
    for t in &dirs {
        let norm = math::sqrt(t.iter().map(|v| v * v).sum());
        for &rho in &[1e-4, 1e4] {
            out.push(t.iter().map(|v| math::ln(rho * v / norm)).collect());
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct SBar {
    pub value: f64,
    /// `c_{Kq,λ_i,μ_i}` for every component.
    pub per_component: Vec<f64>,
    /// Component achieving the minimum (first one on ties).
    pub argmin: usize,
}

/// `S̄ = min_i c_{Kq,λ_i,μ_i}`.
pub fn compute_s_bar(params: &Params, grid: &Arc<RadialGrid>) -> Result<SBar> {
    params.validate()?;
    let p = params.p();
    let mut per: Vec<f64> = Vec::with_capacity(params.k);
    for i in 0..params.k {
        let (l, m) = (params.lambda[i], params.mu[i]);
        let dup = (0..i).find(|&j| params.lambda[j] == l && params.mu[j] == m);
        let c = match dup {
            Some(j) => per[j],
            None => solve_scalar_ground_state(&ScalarProblem::full(p, l, m), grid)?.c_value,
        };
        per.push(c);
    }
    let mut argmin = 0;
    for i in 1..per.len() {
        if per[i] < per[argmin] {
            argmin = i;
        }
    }
    Ok(SBar {
        value: per[argmin],
        per_component: per,
        argmin,
    })
}

/// `(½ - 1/Kq) S̄^{Kq/(Kq-2)}`, the energy of the best semi-trivial state.
pub fn semi_trivial_ceiling(params: &Params, s_bar: f64) -> f64 {
    let p = params.p();
    (0.5 - 1.0 / p) * math::powf(s_bar, p / (p - 2.0))
}

/// Partition used to evaluate the `C̄` formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Partition {
    /// `Ω₁ = B_R`, `Ω₂ = ℝ^d \ B_R`, `Ω₃ = … = Ω_K = ℝ^d`.
    BallExterior,
    /// `K` disjoint shells `B_R`, `B_{2R} \ B_R`, …, `ℝ^d \ B_{(K-1)R}`.
    Annuli,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CBar {
    pub value: f64,
    pub partition: Partition,
    /// Optimized radius parameter of the partition.
    pub radius: f64,
    /// `Σ_i S̃(Ω_i)^{Kq/(Kq-2)}` at the optimum.
    pub partition_sum: f64,
    /// `max_i (1+λ_i²)^{Kq/(Kq-2)} / μ_i^{2/(Kq-2)}`.
    pub prefactor: f64,
}

fn c_bar_prefactor(params: &Params) -> f64 {
    let p = params.p();
    let a = p / (p - 2.0);
    params
        .lambda
        .iter()
        .zip(&params.mu)
        .map(|(&l, &m)| math::powf(1.0 + l * l, a) / math::powf(m, 2.0 / (p - 2.0)))
        .fold(0.0, f64::max)
}

/// Upper bound for `C̄`, optimizing the radius of the chosen partition.
/// Sobolev constants are taken with Dirichlet conditions on the partition
/// boundaries, which is what the zero-extension argument requires.
pub fn compute_c_bar(params: &Params, grid: &Arc<RadialGrid>) -> Result<CBar> {
    compute_c_bar_with(params, grid, Partition::BallExterior)
}

pub fn compute_c_bar_with(params: &Params, grid: &Arc<RadialGrid>, partition: Partition) -> Result<CBar> {
    params.validate()?;
    let p = params.p();
    let a = p / (p - 2.0);
    let factor = 0.5 - 1.0 / p;
    let k = params.k;
    let (radius, partition_sum) = match partition {
        Partition::BallExterior => {
            let full = solve_scalar_ground_state(&ScalarProblem::full(p, 1.0, 1.0), grid)?.c_value;
            let opt = optimize_interface(p, (1.0, 1.0), (1.0, 1.0), grid)?;
            (opt.radius, opt.energy / factor + (k - 2) as f64 * math::powf(full, a))
        }
        Partition::Annuli => {
            let sum_at = |r: f64| -> Result<f64> { annuli_sum(p, k, r, grid) };
            let hi = grid.rmax / (k as f64 - 1.0) - 4.0 * grid.h;
            let lo = 8.0 * grid.h;
            let line = golden_section(sum_at, lo, hi, 1e-6, 100)?;
            (line.x, line.value)
        }
    };
    let prefactor = c_bar_prefactor(params);
    Ok(CBar {
        value: factor * prefactor * partition_sum,
        partition,
        radius,
        partition_sum,
        prefactor,
    })
}

/// `C̄` evaluated at a prescribed radius (no optimization), used to certify
/// the optimized radius.
pub fn c_bar_at_radius(params: &Params, grid: &Arc<RadialGrid>, partition: Partition, r: f64) -> Result<f64> {
    let p = params.p();
    let a = p / (p - 2.0);
    let k = params.k;
    let sum = match partition {
        Partition::BallExterior => {
            let c = |d: Domain| -> Result<f64> {
                Ok(math::powf(
                    solve_dirichlet_ground_state(&ScalarProblem::on(d, p, 1.0, 1.0), grid)?.c_value,
                    a,
                ))
            };
            c(Domain::Ball(r))? + c(Domain::Exterior(r))? + (k - 2) as f64 * c(Domain::Full)?
        }
        Partition::Annuli => annuli_sum(p, k, r, grid)?,
    };
    Ok((0.5 - 1.0 / p) * c_bar_prefactor(params) * sum)
}

fn annuli_sum(p: f64, k: usize, r: f64, grid: &Arc<RadialGrid>) -> Result<f64> {
    let a = p / (p - 2.0);
    let mut s = 0.0;
    for i in 0..k {
        let domain = if i == 0 {
            Domain::Ball(r)
        } else if i + 1 == k {
            Domain::Exterior(i as f64 * r)
        } else {
            Domain::Annulus(i as f64 * r, (i + 1) as f64 * r)
        };
        let c = solve_dirichlet_ground_state(&ScalarProblem::on(domain, p, 1.0, 1.0), grid)?.c_value;
        s += math::powf(c, a);
    }
    Ok(s)
}

fn mu_geometric_mean(params: &Params) -> f64 {
    let k = params.k as f64;
    params.mu.iter().map(|&m| math::powf(m, 1.0 / k)).product()
}

/// `ubar-β = S̄(Kq-2)/(2q(K-1)) · ∏μ_i^{1/K} · (4Kq/(Kq-2) · C̄/S̄)^{(2-Kq)/2}`.
pub fn compute_ubar_beta(params: &Params, s_bar: f64, c_bar: f64) -> f64 {
    let p = params.p();
    let k = params.k as f64;
    let q = params.q;
    s_bar * (p - 2.0) / (2.0 * q * (k - 1.0))
        * mu_geometric_mean(params)
        * math::powf(4.0 * p / (p - 2.0) * c_bar / s_bar, 0.5 * (2.0 - p))
}

/// `L = ∏μ_i^{1/K} · (K-1)^{K-1} S̄^K / (2^{K-1} K^{K-1} C̄^{K-1})`, defined
/// for `q = 2` only.
pub fn compute_l(params: &Params, s_bar: f64, c_bar: f64) -> Result<f64> {
    if params.q != 2.0 {
        return Err(Error::Domain(format!("L is defined for q = 2 only, got q = {}", params.q)));
    }
    let k = params.k as i32;
    let kf = params.k as f64;
    Ok(mu_geometric_mean(params) * math::powi(kf - 1.0, k - 1) * math::powi(s_bar, k)
        / (math::powi(2.0, k - 1) * math::powi(kf, k - 1) * math::powi(c_bar, k - 1)))
}

/// The quotient whose infimum defines `β̄`:
/// `[S̄^{-Kq/2}(Σ‖u_i‖²_i)^{Kq/2} - Σμ_i|u_i|^{Kq}_{Kq}] / (K∫∏|u_i|^q)`.
/// `None` when the product vanishes.
pub fn beta_bar_quotient(u: &SystemState, params: &Params, s_bar: f64) -> Option<f64> {
    let qn = quantities(u, params);
    if !(qn.interaction > 0.0) {
        return None;
    }
    let p = params.p();
    let n: f64 = qn.norms.iter().sum();
    let l: f64 = qn.lp.iter().sum();
    Some((math::powf(n / s_bar, 0.5 * p) - l) / (params.k as f64 * qn.interaction))
}

/// Quotient of the amplitude-rescaled state `(a_1u_1, …, a_Ku_K)`,
/// minimized over the amplitudes (the quotient is invariant under a common
/// factor, so `a_K = 1`). Works on the integrals only.
fn optimize_amplitudes(norms: &[f64], lp: &[f64], interaction: f64, params: &Params, s_bar: f64) -> (f64, Vec<f64>) {
    let k = params.k;
    let p = params.p();
    let q = params.q;
    let eval = |x: &[f64]| -> (f64, Vec<f64>) {
        let xs = |i: usize| if i + 1 == k { 0.0 } else { x[i] };
        let mut n = 0.0;
        let mut l = 0.0;
        let mut sx = 0.0;
        for i in 0..k {
            n += math::exp(2.0 * xs(i)) * norms[i];
            l += math::exp(p * xs(i)) * lp[i];
            sx += xs(i);
        }
        let pi = k as f64 * math::exp(q * sx) * interaction;
        let lead = math::powf(n / s_bar, 0.5 * p);
        let f = (lead - l) / pi;
        let grad = (0..k - 1)
            .map(|i| {
                let dnum = lead * p / n * math::exp(2.0 * x[i]) * norms[i] - p * math::exp(p * x[i]) * lp[i];
                dnum / pi - q * f
            })
            .collect();
        (f, grad)
    };
    let opts = BfgsOptions {
        max_iter: 300,
        grad_tol: 1e-11,
        f_tol: 0.0,
        max_step: 2.0,
    };
    // start from the amplitudes equalizing the Lᵖ norms
    let lk = math::powf(lp[k - 1], 1.0 / p);
    let x0: Vec<f64> = (0..k - 1).map(|i| math::ln(lk / math::powf(lp[i], 1.0 / p))).collect();
    let r = bfgs(eval, &x0, opts);
    let (f0, _) = eval(&x0);
    if f0 <= r.value {
        (f0, x0.iter().map(|&v| math::exp(v)).collect())
    } else {
        (r.value, r.x.iter().map(|&v| math::exp(v)).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BetaBarUpper {
    pub value: f64,
    /// `(label, best quotient)` for every family member evaluated.
    pub members: Vec<(String, f64)>,
    /// Members skipped because their product vanished.
    pub skipped: Vec<String>,
}

/// Upper bound for `β̄` from a family of fully non-trivial trial states,
/// each optimized over componentwise amplitudes. The default family holds
/// the state made of every component's own ground state and the state with
/// all components equal to the ground state realizing `S̄`; `extra` states
/// are appended.
pub fn estimate_beta_bar_upper(
    params: &Params,
    grid: &Arc<RadialGrid>,
    s_bar: &SBar,
    extra: &[SystemState],
) -> Result<BetaBarUpper> {
    let p = params.p();
    let mut profiles: Vec<Vec<f64>> = Vec::with_capacity(params.k);
    for i in 0..params.k {
        let (l, m) = (params.lambda[i], params.mu[i]);
        let dup = (0..i).find(|&j| params.lambda[j] == l && params.mu[j] == m);
        let w = match dup {
            Some(j) => profiles[j].clone(),
            None => solve_scalar_ground_state(&ScalarProblem::full(p, l, m), grid)?.profile.values,
        };
        profiles.push(w);
    }
    let own = SystemState::new(grid.clone(), profiles.clone())?;
    let common = SystemState::new(grid.clone(), vec![profiles[s_bar.argmin].clone(); params.k])?;
    let mut family: Vec<(String, SystemState)> = vec![
        ("own ground states".into(), own),
        (format!("common profile w{}", s_bar.argmin + 1), common),
    ];
    for (j, u) in extra.iter().enumerate() {
        family.push((format!("extra trial {}", j + 1), u.clone()));
    }
    let mut members = Vec::new();
    let mut skipped = Vec::new();
    let mut best = f64::INFINITY;
    for (label, u) in family {
        if u.k() != params.k {
            return Err(Error::invalid(format!("trial state '{label}' has the wrong number of components")));
        }
        let qn = quantities(&u, params);
        if !(qn.interaction > 0.0) || qn.lp.iter().any(|&l| !(l > 0.0)) {
            skipped.push(label);
            continue;
        }
        let (v, _) = optimize_amplitudes(&qn.norms, &qn.lp, qn.interaction, params, s_bar.value);
        best = best.min(v);
        members.push((label, v));
    }
    if members.is_empty() {
        return Err(Error::invalid("no trial state with a non-vanishing product"));
    }
    Ok(BetaBarUpper {
        value: best,
        members,
        skipped,
    })
}

/// Everything the threshold experiment reports.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdReport {
    pub s_bar: SBar,
    pub c_bar: CBar,
    pub ubar_beta: f64,
    /// `Some` only when `q = 2`.
    pub l_value: Option<f64>,
    pub reduced: ReducedMinimum,
    pub beta_bar_lower: f64,
    pub beta_bar_upper: BetaBarUpper,
    pub semi_trivial_ceiling: f64,
}

pub fn compute_thresholds(params: &Params, grid: &Arc<RadialGrid>) -> Result<ThresholdReport> {
    compute_thresholds_with(params, grid, Partition::BallExterior, &[])
}

pub fn compute_thresholds_with(
    params: &Params,
    grid: &Arc<RadialGrid>,
    partition: Partition,
    extra_trials: &[SystemState],
) -> Result<ThresholdReport> {
    let s_bar = compute_s_bar(params, grid)?;
    let c_bar = compute_c_bar_with(params, grid, partition)?;
    let ubar_beta = compute_ubar_beta(params, s_bar.value, c_bar.value);
    let l_value = if params.q == 2.0 {
        Some(compute_l(params, s_bar.value, c_bar.value)?)
    } else {
        None
    };
    let reduced = minimize_reduced_quotient(params.k, params.q)?;
    let beta_bar_lower = mu_geometric_mean(params) * reduced.value;
    let beta_bar_upper = estimate_beta_bar_upper(params, grid, &s_bar, extra_trials)?;
    Ok(ThresholdReport {
        semi_trivial_ceiling: semi_trivial_ceiling(params, s_bar.value),
        s_bar,
        c_bar,
        ubar_beta,
        l_value,
        reduced,
        beta_bar_lower,
        beta_bar_upper,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduced_quotient_direct_values() {
        assert!((reduced_quotient_f(&[1.0, 1.0], 3, 2.0).unwrap() - 8.0).abs() < 1e-13);
        assert!((reduced_quotient_f(&[1.0, 1.0, 1.0], 4, 1.0).unwrap() - 3.0).abs() < 1e-13);
        let v = reduced_quotient_f(&[1.0, 1.0], 3, 1.0).unwrap();
        assert!((v - (math::sqrt(3.0) - 1.0)).abs() < 1e-14);
        assert!(matches!(reduced_quotient_f(&[1.0, 0.0], 3, 2.0), Err(Error::Domain(_))));
        assert!(matches!(reduced_quotient_f(&[1.0], 3, 2.0), Err(Error::Domain(_))));
    }

    #[test]
    fn log_gradient_matches_differences() {
        let x = [0.3, -0.7];
        let (_, g) = reduced_in_logs(&x, 3, 1.5);
        for i in 0..2 {
            let h = 1e-6;
            let mut xp = x;
            let mut xm = x;
            xp[i] += h;
            xm[i] -= h;
            let fd = (reduced_in_logs(&xp, 3, 1.5).0 - reduced_in_logs(&xm, 3, 1.5).0) / (2.0 * h);
            assert!((fd - g[i]).abs() < 1e-7 * (1.0 + g[i].abs()));
        }
    }

    #[test]
    fn formula_evaluations() {
        let params = Params::uniform(2, 3, 2.0, 0.0).unwrap();
        let ub = compute_ubar_beta(&params, 1.0, 1.0);
        assert!((ub - 1.0 / 72.0).abs() < 1e-15);
        let l = compute_l(&params, 1.0, 1.0).unwrap();
        assert!((l - 1.0 / 9.0).abs() < 1e-15);
        assert!((compute_l(&params, 1.0, 4.0).unwrap() - l / 16.0).abs() < 1e-16);
        let doubled = Params::new(2, 2.0, vec![1.0; 3], vec![2.0; 3], 0.0).unwrap();
        assert!((compute_ubar_beta(&doubled, 1.0, 1.0) - 2.0 * ub).abs() < 1e-15);
        let q1 = Params::uniform(2, 3, 1.0, 0.0).unwrap();
        assert!(matches!(compute_l(&q1, 1.0, 1.0), Err(Error::Domain(_))));
    }
}
