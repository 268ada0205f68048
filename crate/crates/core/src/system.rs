//! The energy of the coupled system and everything built from it:
//!
//! ```text
//! I_β(u) = ½ Σ‖u_i‖²_i - (1/Kq) Σ μ_i∫|u_i|^{Kq} - (β/q) ∫∏|u_i|^q
//! G_i(u) = ‖u_i‖²_i - μ_i∫|u_i|^{Kq} - β∫∏|u_j|^q
//! ```
//!
//! with `‖u‖²_i = ∫|∇u|² + λ_i u²`. The Nehari set is `Σ G_i = 0`, the
//! componentwise constraint set is `G_i = 0` for every `i`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{solve_dense, symmetric_eigenvalues};
use crate::math;
use crate::radial::{lp_pow_values, norm_sq_values, product_integral, Params, SystemState};

/// The integral quantities every functional here is built from.
#[derive(Debug, Clone, PartialEq)]
pub struct Quantities {
    /// `‖u_i‖²_i`.
    pub norms: Vec<f64>,
    /// `μ_i ∫|u_i|^{Kq}`.
    pub lp: Vec<f64>,
    /// `∫∏|u_i|^q`.
    pub interaction: f64,
}

pub fn quantities(u: &SystemState, params: &Params) -> Quantities {
    let p = params.p();
    let g = &u.grid;
    let norms = u
        .components
        .iter()
        .zip(&params.lambda)
        .map(|(c, &l)| norm_sq_values(g, c, l))
        .collect();
    let lp = u
        .components
        .iter()
        .zip(&params.mu)
        .map(|(c, &m)| lp_pow_values(g, c, p, m))
        .collect();
    Quantities {
        norms,
        lp,
        interaction: product_integral(u, params.q),
    }
}

impl Quantities {
    pub fn energy(&self, params: &Params) -> f64 {
        let p = params.p();
        0.5 * self.norms.iter().sum::<f64>() - self.lp.iter().sum::<f64>() / p
            - params.beta / params.q * self.interaction
    }

    pub fn g_residuals(&self, params: &Params) -> Vec<f64> {
        self.norms
            .iter()
            .zip(&self.lp)
            .map(|(n, l)| n - l - params.beta * self.interaction)
            .collect()
    }

    /// `I'(u)[u]`.
    pub fn nehari_residual(&self, params: &Params) -> f64 {
        self.norms.iter().sum::<f64>()
            - self.lp.iter().sum::<f64>()
            - params.k as f64 * params.beta * self.interaction
    }

    /// Largest `|G_i| / max(1, ‖u_i‖²_i)`.
    pub fn max_relative_g(&self, params: &Params) -> f64 {
        self.g_residuals(params)
            .iter()
            .zip(&self.norms)
            .fold(0.0, |m, (g, n)| m.max(g.abs() / n.max(1.0)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    pub total: f64,
    pub per_component_norms: Vec<f64>,
    pub per_component_lp: Vec<f64>,
    pub interaction: f64,
    pub nehari_residual: f64,
    pub g_residuals: Vec<f64>,
}

fn check_shape(u: &SystemState, params: &Params) -> Result<()> {
    if u.k() != params.k {
        return Err(Error::invalid(format!(
            "state has {} components but the parameters describe {}",
            u.k(),
            params.k
        )));
    }
    Ok(())
}

/// Evaluates `I_β` together with its constituent integrals.
pub fn energy(u: &SystemState, params: &Params) -> Result<EnergyReport> {
    check_shape(u, params)?;
    let qn = quantities(u, params);
    Ok(EnergyReport {
        total: qn.energy(params),
        nehari_residual: qn.nehari_residual(params),
        g_residuals: qn.g_residuals(params),
        interaction: qn.interaction,
        per_component_norms: qn.norms,
        per_component_lp: qn.lp,
    })
}

/// `|x|^{q-2} x`, extended by 0 at the origin.
pub(crate) fn signed_pow(x: f64, e: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        math::signum(x) * math::abs_pow(x, e)
    }
}

/// For each component `i` and node `j`, `∏_{k≠i} |u_k(r_j)|^q`.
pub(crate) fn partial_products(u: &SystemState, q: f64) -> Vec<Vec<f64>> {
    let k = u.k();
    let n = u.grid.n;
    let mut out = vec![vec![0.0; n]; k];
    let mut pows = vec![0.0; k];
    for j in 0..n {
        for (i, c) in u.components.iter().enumerate() {
            pows[i] = math::abs_pow(c[j], q);
        }
        for i in 0..k {
            let mut prod = 1.0;
            for (m, pw) in pows.iter().enumerate() {
                if m != i {
                    prod *= pw;
                }
            }
            out[i][j] = prod;
        }
    }
    out
}

/// Gradient of `I_β` with respect to the nodal values (the coefficient
/// vector of the weak form, `I'(u)[v] = Σ_ij e_ij v_ij`).
pub fn energy_gradient_weak(u: &SystemState, params: &Params) -> Result<Vec<Vec<f64>>> {
    check_shape(u, params)?;
    let g = &u.grid;
    let p = params.p();
    let q = params.q;
    let others = partial_products(u, q);
    Ok(u
        .components
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let mut e = g.stiffness_apply(c);
            for j in 0..g.n {
                let w = g.weights[j];
                let local = params.lambda[i] * c[j]
                    - params.mu[i] * signed_pow(c[j], p - 1.0)
                    - params.beta * signed_pow(c[j], q - 1.0) * others[i][j];
                e[j] += w * local;
            }
            e
        })
        .collect())
}

/// The `L²`-Riesz representative of `I_β'(u)`: `I'(u)[v] = Σ_ij w_j g_ij v_ij`.
/// At each node it is the strong-form residual of the system.
pub fn grad_energy(u: &SystemState, params: &Params) -> Result<Vec<Vec<f64>>> {
    let mut e = energy_gradient_weak(u, params)?;
    for c in e.iter_mut() {
        for (v, w) in c.iter_mut().zip(&u.grid.weights) {
            *v /= w;
        }
    }
    Ok(e)
}

/// `G_{β,i}(u)` for every component.
pub fn constraints_g(u: &SystemState, params: &Params) -> Result<Vec<f64>> {
    check_shape(u, params)?;
    Ok(quantities(u, params).g_residuals(params))
}

/// Scales `u` onto the Nehari set: returns `t` with `I'(tu)[tu] = 0`.
pub fn nehari_project(u: &SystemState, params: &Params) -> Result<(f64, SystemState)> {
    check_shape(u, params)?;
    let qn = quantities(u, params);
    let num: f64 = qn.norms.iter().sum();
    let den = qn.lp.iter().sum::<f64>() + params.k as f64 * params.beta * qn.interaction;
    if !(num > 0.0) {
        return Err(Error::InvalidState("cannot project the zero state".into()));
    }
    if !(den > 0.0) {
        return Err(Error::NotProjectable {
            reason: format!("Nehari denominator {den:e} is not positive"),
            residuals: vec![den],
        });
    }
    let t = math::powf(num / den, 1.0 / (params.p() - 2.0));
    let tv = vec![t; params.k];
    Ok((t, u.scaled(&tv)))
}

/// Componentwise scalings `t_i` that solve `G_i(t₁u₁, …, t_Ku_K) = 0` for
/// all `i`, obtained by Newton's method in `s_i = ln t_i` from the decoupled
/// solution.
pub fn m_project(u: &SystemState, params: &Params) -> Result<(Vec<f64>, SystemState)> {
    check_shape(u, params)?;
    let qn = quantities(u, params);
    let t = m_project_scalings(&qn, params)?;
    Ok((t.clone(), u.scaled(&t)))
}

/// The scalings of [`m_project`] computed from precomputed integrals.
pub fn m_project_scalings(qn: &Quantities, params: &Params) -> Result<Vec<f64>> {
    let k = params.k;
    let p = params.p();
    let q = params.q;
    let lp_norms: Vec<f64> = qn.lp.iter().map(|l| math::powf(l.max(0.0), 1.0 / p)).collect();
    let largest = lp_norms.iter().cloned().fold(0.0, f64::max);
    for i in 0..k {
        if !(lp_norms[i] >= 1e-10 * largest) || !(largest > 0.0) || !(qn.norms[i] > 0.0) {
            return Err(Error::NotProjectable {
                reason: format!("component {i} is numerically zero"),
                residuals: qn.g_residuals(params),
            });
        }
    }
    // decoupled closed form
    let s0: Vec<f64> = (0..k)
        .map(|i| math::ln(qn.norms[i] / qn.lp[i]) / (p - 2.0))
        .collect();
    let bp = params.beta * qn.interaction;
    if bp == 0.0 {
        return Ok(s0.iter().map(|&s| math::exp(s)).collect());
    }
    let a: Vec<f64> = (0..k).map(|i| qn.lp[i] / qn.norms[i]).collect();
    let b: Vec<f64> = (0..k).map(|i| bp / qn.norms[i]).collect();
    let residual = |s: &[f64]| -> Vec<f64> {
        let sum: f64 = s.iter().sum();
        (0..k)
            .map(|i| 1.0 - a[i] * math::exp((p - 2.0) * s[i]) - b[i] * math::exp(q * sum - 2.0 * s[i]))
            .collect()
    };
    let norm = |f: &[f64]| {
        f.iter()
            .fold(0.0, |m: f64, v| if v.is_finite() { m.max(v.abs()) } else { f64::INFINITY })
    };
    let mut s = s0;
    let mut f = residual(&s);
    let mut fnorm = norm(&f);
    for _ in 0..50 {
        if fnorm < 1e-14 {
            break;
        }
        let sum: f64 = s.iter().sum();
        let mut jac = vec![0.0; k * k];
        for i in 0..k {
            let cross = b[i] * math::exp(q * sum - 2.0 * s[i]);
            for m in 0..k {
                jac[i * k + m] = -q * cross;
            }
            jac[i * k + i] = -(p - 2.0) * a[i] * math::exp((p - 2.0) * s[i]) - (q - 2.0) * cross;
        }
        let delta = match solve_dense(&jac, &f, k) {
            Ok(d) => d,
            Err(_) => break,
        };
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let cand: Vec<f64> = s.iter().zip(&delta).map(|(x, d)| x - step * d).collect();
            let fc = residual(&cand);
            let nc = norm(&fc);
            if nc.is_finite() && nc < fnorm {
                s = cand;
                f = fc;
                fnorm = nc;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if !(fnorm <= 1e-11) {
        return Err(Error::NotProjectable {
            reason: format!("Newton iteration stalled at relative residual {fnorm:e}"),
            residuals: f,
        });
    }
    Ok(s.iter().map(|&x| math::exp(x)).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct InteractionMatrix {
    pub k: usize,
    /// Row-major `K×K` entries.
    pub entries: Vec<f64>,
    pub max_eigenvalue: f64,
}

impl InteractionMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.k + j]
    }
}

/// `M_β(u)`, the Hessian of the fibering map at `t = (1, …, 1)` in the
/// directions `u_i`, in its closed form valid on the constraint set.
pub fn interaction_matrix(u: &SystemState, params: &Params) -> Result<InteractionMatrix> {
    check_shape(u, params)?;
    let qn = quantities(u, params);
    interaction_matrix_from(&qn, params)
}

pub fn interaction_matrix_from(qn: &Quantities, params: &Params) -> Result<InteractionMatrix> {
    let off = qn.max_relative_g(params);
    if !(off <= 1e-8) {
        return Err(Error::InvalidState(format!(
            "state is off the constraint set (relative residual {off:e})"
        )));
    }
    let k = params.k;
    let p = params.p();
    let q = params.q;
    let bp = params.beta * qn.interaction;
    let mut entries = vec![-q * bp; k * k];
    for i in 0..k {
        entries[i * k + i] = (2.0 - p) * qn.lp[i] + (2.0 - q) * bp;
    }
    let ev = symmetric_eigenvalues(&entries, k);
    Ok(InteractionMatrix {
        k,
        max_eigenvalue: ev[k - 1],
        entries,
    })
}

/// The decoupled energy `Σ_i [½‖u_i‖²_i - (1/Kq)μ_i∫|u_i|^{Kq}]`.
pub fn energy_limit(u: &SystemState, params: &Params) -> Result<f64> {
    check_shape(u, params)?;
    let qn = quantities(u, params);
    let p = params.p();
    Ok(qn
        .norms
        .iter()
        .zip(&qn.lp)
        .map(|(n, l)| 0.5 * n - l / p)
        .sum())
}

/// `Ī(u) = Σ_i (‖u_i‖_i / |u_i|_{Kq,i})^{2Kq/(Kq-2)}`, invariant under
/// componentwise scaling.
pub fn quotient_ibar(u: &SystemState, params: &Params) -> Result<f64> {
    check_shape(u, params)?;
    let qn = quantities(u, params);
    let p = params.p();
    let mut s = 0.0;
    for (i, (n, l)) in qn.norms.iter().zip(&qn.lp).enumerate() {
        if !(*l > 0.0) {
            return Err(Error::InvalidState(format!("component {i} vanishes")));
        }
        s += math::powf(n / math::powf(*l, 2.0 / p), p / (p - 2.0));
    }
    Ok(s)
}

/// `∫ min(|u_i|, |u_j|)^p` divided by the smaller of `∫|u_i|^p`, `∫|u_j|^p`:
/// zero for disjoint supports, one for identical components.
pub fn normalized_overlap(u: &SystemState, i: usize, j: usize, p: f64) -> f64 {
    let g = &u.grid;
    let (a, b) = (&u.components[i], &u.components[j]);
    let mut both = 0.0;
    let mut ma = 0.0;
    let mut mb = 0.0;
    for ((w, x), y) in g.weights.iter().zip(a).zip(b) {
        let (x, y) = (x.abs(), y.abs());
        both += w * math::abs_pow(x.min(y), p);
        ma += w * math::abs_pow(x, p);
        mb += w * math::abs_pow(y, p);
    }
    let m = ma.min(mb);
    if m > 0.0 {
        both / m
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::make_grid;

    fn sample_state(k: usize) -> SystemState {
        let g = make_grid(12.0, 600, 2).unwrap();
        let comps = (0..k)
            .map(|i| {
                let c = 0.7 + 0.3 * i as f64;
                g.nodes.iter().map(|&r| c * math::exp(-r * r / (1.0 + i as f64))).collect()
            })
            .collect();
        SystemState::new(g, comps).unwrap()
    }

    #[test]
    fn zero_state() {
        let params = Params::uniform(2, 3, 2.0, 1.5).unwrap();
        let g = make_grid(10.0, 100, 2).unwrap();
        let u = SystemState::zeros(g, 3);
        let r = energy(&u, &params).unwrap();
        assert_eq!(r.total, 0.0);
        assert_eq!(r.nehari_residual, 0.0);
        assert!(r.g_residuals.iter().all(|&x| x == 0.0));
        assert!(grad_energy(&u, &params).unwrap().iter().flatten().all(|&x| x == 0.0));
    }

    #[test]
    fn nehari_projection_closed_form() {
        // single nonzero component with ‖u‖² = 2, μ|u|^6 = 1, Kq = 6
        let qn = Quantities {
            norms: vec![2.0, 0.0, 0.0],
            lp: vec![1.0, 0.0, 0.0],
            interaction: 0.0,
        };
        let num: f64 = qn.norms.iter().sum();
        let den: f64 = qn.lp.iter().sum();
        let t = math::powf(num / den, 1.0 / 4.0);
        assert!((t - 1.189_207_115_002_721).abs() < 1e-14);
    }

    #[test]
    fn nehari_projection_is_idempotent() {
        let params = Params::uniform(2, 3, 2.0, 0.7).unwrap();
        let u = sample_state(3);
        let (_, v) = nehari_project(&u, &params).unwrap();
        let (t2, _) = nehari_project(&v, &params).unwrap();
        assert!((t2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn m_projection_fixed_point_and_energy_identity() {
        for beta in [-0.2, 0.0, 0.05] {
            let params = Params::uniform(2, 3, 2.0, beta).unwrap();
            let u = sample_state(3);
            let (_, v) = m_project(&u, &params).unwrap();
            let r = energy(&v, &params).unwrap();
            let n: f64 = r.per_component_norms.iter().sum();
            let p = params.p();
            assert!((r.total - (0.5 - 1.0 / p) * n).abs() < 1e-10 * r.total.abs());
            let (t2, _) = m_project(&v, &params).unwrap();
            assert!(t2.iter().all(|t| (t - 1.0).abs() < 1e-10), "{t2:?}");
        }
    }

    #[test]
    fn strongly_overlapping_state_at_very_negative_beta_is_not_projectable() {
        let params = Params::uniform(2, 3, 2.0, -50.0).unwrap();
        let u = sample_state(3);
        assert!(matches!(m_project(&u, &params), Err(Error::NotProjectable { .. })));
        // a single overlap-free configuration projects with the closed form
        let mut v = u.clone();
        let n = v.grid.n;
        for j in 0..n {
            if j < n / 12 {
                v.components[0][j] = 0.0;
            }
        }
        for j in n / 12..n {
            v.components[1][j] = 0.0;
        }
        let (t, _) = m_project(&v, &params).unwrap();
        let (t0, _) = m_project(&v, &params.with_beta(0.0)).unwrap();
        assert_eq!(t, t0);
    }

    #[test]
    fn interaction_matrix_decoupled() {
        let qn = Quantities {
            norms: vec![1.0; 3],
            lp: vec![1.0; 3],
            interaction: 0.3,
        };
        let params = Params::uniform(2, 3, 2.0, 0.0).unwrap();
        let m = interaction_matrix_from(&qn, &params).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(m.get(i, j), if i == j { -4.0 } else { 0.0 });
            }
        }
        assert!((m.max_eigenvalue + 4.0).abs() < 1e-14);
        let bad = Quantities {
            norms: vec![1.0; 3],
            lp: vec![0.5; 3],
            interaction: 0.0,
        };
        assert!(matches!(
            interaction_matrix_from(&bad, &params),
            Err(Error::InvalidState(_))
        ));
    }

    #[test]
    fn ibar_scale_invariance() {
        let params = Params::uniform(2, 3, 2.0, 0.0).unwrap();
        let u = sample_state(3);
        let a = quotient_ibar(&u, &params).unwrap();
        let b = quotient_ibar(&u.scaled(&[2.0, 0.5, 7.0]), &params).unwrap();
        assert!((a - b).abs() < 1e-12 * a);
    }
}
