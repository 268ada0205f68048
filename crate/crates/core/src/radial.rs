//! Radial discretization of ℝ^d.
//!
//! The grid is cell-centred: `[0, rmax]` is cut into `n` cells of width
//! `h = rmax / n` and unknowns live at the cell midpoints `r_j = (j + ½) h`.
//! Quadrature is the midpoint rule against `σ_{d-1} r^{d-1} dr`. The Dirichlet
//! energy is a sum over cell faces, each face carrying the conductance
//! `σ_{d-1} ρ^{d-1} / h` at its radius `ρ`; there is no face at the origin
//! (the symmetry condition `u'(0) = 0`) and the face at `rmax` sees a ghost
//! value of zero half a cell away (homogeneous Dirichlet condition).
//!
//! The stiffness operator is assembled from exactly the same face
//! coefficients, so the quadratic form of the assembled operator and the
//! face-sum energy agree to rounding.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::Tridiagonal;
use crate::math;

/// Problem datum of the coupled system.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub d: usize,
    pub k: usize,
    pub q: f64,
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
    pub beta: f64,
}

impl Params {
    pub fn new(d: usize, q: f64, lambda: Vec<f64>, mu: Vec<f64>, beta: f64) -> Result<Self> {
        let p = Params {
            d,
            k: lambda.len(),
            q,
            lambda,
            mu,
            beta,
        };
        p.validate()?;
        Ok(p)
    }

    /// Unit coefficients `λ_i = μ_i = 1`.
    pub fn uniform(d: usize, k: usize, q: f64, beta: f64) -> Result<Self> {
        Self::new(d, q, vec![1.0; k], vec![1.0; k], beta)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::Inadmissible("dimension must be at least 1".into()));
        }
        if self.k < 3 {
            return Err(Error::Inadmissible(format!(
                "need at least 3 components, got {}",
                self.k
            )));
        }
        if self.lambda.len() != self.k || self.mu.len() != self.k {
            return Err(Error::Inadmissible(format!(
                "lambda and mu must both have {} entries (got {} and {})",
                self.k,
                self.lambda.len(),
                self.mu.len()
            )));
        }
        if !(self.q >= 1.0) || !self.q.is_finite() {
            return Err(Error::Inadmissible(format!("q must be >= 1, got {}", self.q)));
        }
        for (i, (&l, &m)) in self.lambda.iter().zip(&self.mu).enumerate() {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::Inadmissible(format!("lambda[{i}] = {l} is not positive")));
            }
            if !(m > 0.0 && m.is_finite()) {
                return Err(Error::Inadmissible(format!("mu[{i}] = {m} is not positive")));
            }
        }
        if !self.beta.is_finite() {
            return Err(Error::Inadmissible("beta must be finite".into()));
        }
        if self.d >= 3 {
            let bound = 2.0 * self.d as f64 / (self.k as f64 * (self.d as f64 - 2.0));
            if !(self.q < bound) {
                return Err(Error::Inadmissible(format!(
                    "q = {} is not subcritical: need q < {bound} for d = {}, K = {}",
                    self.q, self.d, self.k
                )));
            }
        }
        Ok(())
    }

    /// The self-interaction exponent `Kq`.
    pub fn p(&self) -> f64 {
        self.k as f64 * self.q
    }

    pub fn with_beta(&self, beta: f64) -> Self {
        let mut p = self.clone();
        p.beta = beta;
        p
    }
}

/// Truncated, cell-centred radial grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    pub rmax: f64,
    pub n: usize,
    pub d: usize,
    pub h: f64,
    /// `σ_{d-1}`, the area of the unit sphere.
    pub sigma: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// `faces[j]` couples node `j` and `j + 1` (`n - 1` entries).
    pub faces: Vec<f64>,
    /// Coupling of the last node to the Dirichlet ghost value at `rmax`.
    pub boundary: f64,
}

/// Builds a uniform grid of `n` cells on `[0, rmax]` for dimension `d`.
pub fn make_grid(rmax: f64, n: usize, d: usize) -> Result<Arc<RadialGrid>> {
    if !(rmax > 0.0 && rmax.is_finite()) {
        return Err(Error::invalid(format!("rmax must be positive, got {rmax}")));
    }
    if n < 16 {
        return Err(Error::invalid(format!("need at least 16 nodes, got {n}")));
    }
    if d == 0 {
        return Err(Error::invalid("dimension must be at least 1"));
    }
    let h = rmax / n as f64;
    let sigma = math::sphere_area(d);
    let dm1 = (d - 1) as i32;
    let nodes: Vec<f64> = (0..n).map(|j| (j as f64 + 0.5) * h).collect();
    let weights = nodes.iter().map(|&r| sigma * math::powi(r, dm1) * h).collect();
    let faces = (1..n)
        .map(|j| sigma * math::powi(j as f64 * h, dm1) / h)
        .collect();
    let boundary = sigma * math::powi(rmax, dm1) / (0.5 * h);
    Ok(Arc::new(RadialGrid {
        rmax,
        n,
        d,
        h,
        sigma,
        nodes,
        weights,
        faces,
        boundary,
    }))
}

/// Default truncation `rmax = 30·max_i λ_i^{-1/2}` with 4000 nodes.
pub fn default_grid(params: &Params) -> Result<Arc<RadialGrid>> {
    let lmin = params.lambda.iter().cloned().fold(f64::INFINITY, f64::min);
    make_grid(30.0 / math::sqrt(lmin), 4000, params.d)
}

/// Radial subdomain on which a scalar problem is posed, with homogeneous
/// Dirichlet conditions on its boundary spheres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    Full,
    Ball(f64),
    Annulus(f64, f64),
    Exterior(f64),
}

impl Domain {
    /// Inner and outer radius, `(0, rmax)` for the full space.
    pub fn bounds(&self, rmax: f64) -> (f64, f64) {
        match *self {
            Domain::Full => (0.0, rmax),
            Domain::Ball(r) => (0.0, r),
            Domain::Annulus(a, b) => (a, b),
            Domain::Exterior(r) => (r, rmax),
        }
    }

    pub fn validate(&self, rmax: f64) -> Result<()> {
        let (a, b) = self.bounds(rmax);
        if !(a >= 0.0 && b > a && b <= rmax * (1.0 + 1e-12)) {
            return Err(Error::invalid(format!(
                "subdomain radii ({a}, {b}) must satisfy 0 <= a < b <= rmax = {rmax}"
            )));
        }
        Ok(())
    }
}

/// Discrete `-Δ` restricted to a subdomain: the nodes strictly inside it and
/// the stiffness matrix acting on them.
#[derive(Debug, Clone)]
pub struct Stiffness {
    pub start: usize,
    pub end: usize,
    pub matrix: Tridiagonal,
}

impl RadialGrid {
    /// `∫ f` by the radial midpoint rule.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        self.weights.iter().zip(f).map(|(w, v)| w * v).sum()
    }

    /// `∫ f g`.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(f.iter().zip(g))
            .map(|(w, (a, b))| w * a * b)
            .sum()
    }

    /// `∫ |∇f|²` as a sum over faces.
    pub fn dirichlet_energy(&self, f: &[f64]) -> f64 {
        let mut s = 0.0;
        for j in 0..self.n - 1 {
            let df = f[j + 1] - f[j];
            s += self.faces[j] * df * df;
        }
        s + self.boundary * f[self.n - 1] * f[self.n - 1]
    }

    /// `A f`, with `A` the assembled stiffness (so `f·A f` is the Dirichlet
    /// energy and `(A f)_j / w_j` approximates `-Δf(r_j)`).
    pub fn stiffness_apply(&self, f: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n];
        for j in 0..n - 1 {
            let flux = self.faces[j] * (f[j + 1] - f[j]);
            out[j] -= flux;
            out[j + 1] += flux;
        }
        out[n - 1] += self.boundary * f[n - 1];
        out
    }

    /// Full-grid stiffness matrix.
    pub fn stiffness(&self) -> Tridiagonal {
        self.stiffness_on(Domain::Full)
            .expect("full domain is always valid")
            .matrix
    }

    /// Index range `[start, end)` of the nodes strictly inside `domain`.
    /// Nodes closer than `1e-3·h` to a boundary sphere are treated as lying on
    /// it (and hence excluded) to keep the boundary coupling bounded.
    pub fn domain_range(&self, domain: Domain) -> Result<(usize, usize)> {
        domain.validate(self.rmax)?;
        let (a, b) = domain.bounds(self.rmax);
        let eps = 1e-3 * self.h;
        let start = self
            .nodes
            .iter()
            .position(|&r| r > a + eps)
            .unwrap_or(self.n);
        let end = self
            .nodes
            .iter()
            .rposition(|&r| r < b - eps)
            .map_or(0, |i| i + 1);
        if end <= start || end - start < 3 {
            return Err(Error::invalid(format!(
                "subdomain ({a}, {b}) contains fewer than 3 grid nodes"
            )));
        }
        Ok((start, end))
    }

    /// Stiffness restricted to the nodes of `domain`, with Dirichlet
    /// conditions imposed at the true boundary radii (the coupling to the
    /// boundary uses the actual node-to-boundary distance).
    pub fn stiffness_on(&self, domain: Domain) -> Result<Stiffness> {
        let (start, end) = self.domain_range(domain)?;
        let (a, b) = domain.bounds(self.rmax);
        let m = end - start;
        let dm1 = (self.d - 1) as i32;
        let mut diag = vec![0.0; m];
        let mut off = vec![0.0; m - 1];
        for j in 0..m - 1 {
            let c = self.faces[start + j];
            diag[j] += c;
            diag[j + 1] += c;
            off[j] = -c;
        }
        let r_hi = self.nodes[end - 1];
        diag[m - 1] += if end == self.n && b >= self.rmax {
            self.boundary
        } else {
            self.sigma * math::powi(b, dm1) / (b - r_hi)
        };
        if a > 0.0 {
            let r_lo = self.nodes[start];
            diag[0] += self.sigma * math::powi(a, dm1) / (r_lo - a);
        }
        Ok(Stiffness {
            start,
            end,
            matrix: Tridiagonal::symmetric(diag, off),
        })
    }

    /// Value at the origin extrapolated from the first two nodes.
    pub fn value_at_origin(&self, f: &[f64]) -> f64 {
        (9.0 * f[0] - f[1]) / 8.0
    }
}

/// One component's radial profile.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialField {
    pub grid: Arc<RadialGrid>,
    pub values: Vec<f64>,
}

impl RadialField {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n {
            return Err(Error::invalid(format!(
                "field has {} values but the grid has {} nodes",
                values.len(),
                grid.n
            )));
        }
        Ok(RadialField { grid, values })
    }

    pub fn zeros(grid: Arc<RadialGrid>) -> Self {
        let n = grid.n;
        RadialField {
            grid,
            values: vec![0.0; n],
        }
    }

    /// Samples `f(r)` at the grid nodes.
    pub fn from_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes.iter().map(|&r| f(r)).collect();
        RadialField { grid, values }
    }

    pub fn scaled(&self, c: f64) -> Self {
        RadialField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// `‖f‖²_λ = ∫ |∇f|² + λ f²`.
pub fn weighted_norm_sq(f: &RadialField, lambda: f64) -> f64 {
    norm_sq_values(&f.grid, &f.values, lambda)
}

pub(crate) fn norm_sq_values(grid: &RadialGrid, f: &[f64], lambda: f64) -> f64 {
    grid.dirichlet_energy(f) + lambda * grid.inner(f, f)
}

/// `|f|_{p,μ} = (∫ μ|f|^p)^{1/p}`.
pub fn lp_norm(f: &RadialField, p: f64, mu: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::invalid(format!("lp_norm needs p >= 1, got {p}")));
    }
    if !(mu > 0.0) {
        return Err(Error::invalid(format!("lp_norm needs mu > 0, got {mu}")));
    }
    let s = lp_pow_values(&f.grid, &f.values, p, mu);
    Ok(math::powf(s, 1.0 / p))
}

/// `∫ μ|f|^p` (the `p`-th power of [`lp_norm`]).
pub(crate) fn lp_pow_values(grid: &RadialGrid, f: &[f64], p: f64, mu: f64) -> f64 {
    mu * grid
        .weights
        .iter()
        .zip(f)
        .map(|(w, v)| w * math::abs_pow(*v, p))
        .sum::<f64>()
}

/// K radial components on one shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemState {
    pub grid: Arc<RadialGrid>,
    pub components: Vec<Vec<f64>>,
}

impl SystemState {
    pub fn new(grid: Arc<RadialGrid>, components: Vec<Vec<f64>>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::invalid("a state needs at least one component"));
        }
        for (i, c) in components.iter().enumerate() {
            if c.len() != grid.n {
                return Err(Error::invalid(format!(
                    "component {i} has {} values but the grid has {} nodes",
                    c.len(),
                    grid.n
                )));
            }
        }
        Ok(SystemState { grid, components })
    }

    /// Collects fields into a state, checking that they share one grid.
    pub fn from_fields(fields: Vec<RadialField>) -> Result<Self> {
        let grid = match fields.first() {
            Some(f) => f.grid.clone(),
            None => return Err(Error::invalid("a state needs at least one component")),
        };
        let mut components = Vec::with_capacity(fields.len());
        for (i, f) in fields.into_iter().enumerate() {
            if !Arc::ptr_eq(&f.grid, &grid) && *f.grid != *grid {
                return Err(Error::invalid(format!("component {i} lives on a different grid")));
            }
            components.push(f.values);
        }
        Ok(SystemState { grid, components })
    }

    pub fn zeros(grid: Arc<RadialGrid>, k: usize) -> Self {
        let n = grid.n;
        SystemState {
            grid,
            components: vec![vec![0.0; n]; k],
        }
    }

    pub fn k(&self) -> usize {
        self.components.len()
    }

    pub fn field(&self, i: usize) -> RadialField {
        RadialField {
            grid: self.grid.clone(),
            values: self.components[i].clone(),
        }
    }

    /// Multiplies component `i` by `t[i]`.
    pub fn scaled(&self, t: &[f64]) -> Self {
        SystemState {
            grid: self.grid.clone(),
            components: self
                .components
                .iter()
                .zip(t)
                .map(|(c, &ti)| c.iter().map(|v| ti * v).collect())
                .collect(),
        }
    }

    /// `self + s·dir`, componentwise.
    pub fn axpy(&self, s: f64, dir: &[Vec<f64>]) -> Self {
        SystemState {
            grid: self.grid.clone(),
            components: self
                .components
                .iter()
                .zip(dir)
                .map(|(c, d)| c.iter().zip(d).map(|(a, b)| a + s * b).collect())
                .collect(),
        }
    }
}

/// `∫ ∏_i |u_i|^q`.
pub fn product_integral(u: &SystemState, q: f64) -> f64 {
    let g = &u.grid;
    let mut s = 0.0;
    for j in 0..g.n {
        let mut prod = 1.0;
        for c in &u.components {
            prod *= math::abs_pow(c[j], q);
            if prod == 0.0 {
                break;
            }
        }
        s += g.weights[j] * prod;
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_volumes() {
        let g3 = make_grid(1.0, 2000, 3).unwrap();
        let v3: f64 = g3.weights.iter().sum();
        assert!((v3 / (4.0 * math::PI / 3.0) - 1.0).abs() < 1e-6);
        let g2 = make_grid(1.0, 2000, 2).unwrap();
        let v2: f64 = g2.weights.iter().sum();
        assert!((v2 / math::PI - 1.0).abs() < 1e-6);
    }

    #[test]
    fn grid_preconditions() {
        assert!(matches!(make_grid(0.0, 100, 2), Err(Error::InvalidArgument(_))));
        assert!(matches!(make_grid(1.0, 8, 2), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn stiffness_quadratic_form_matches_face_sum() {
        let g = make_grid(5.0, 64, 3).unwrap();
        let f: Vec<f64> = g.nodes.iter().map(|r| math::exp(-r * r) * (1.0 + r)).collect();
        let af = g.stiffness_apply(&f);
        let q1: f64 = f.iter().zip(&af).map(|(a, b)| a * b).sum();
        let q2 = g.dirichlet_energy(&f);
        assert!((q1 - q2).abs() <= 1e-12 * q2);
        let m = g.stiffness().mul_vec(&f);
        for (a, b) in m.iter().zip(&af) {
            assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn domain_ranges() {
        let g = make_grid(10.0, 100, 2).unwrap();
        assert_eq!(g.domain_range(Domain::Full).unwrap(), (0, 100));
        assert_eq!(g.domain_range(Domain::Ball(2.0)).unwrap(), (0, 20));
        assert_eq!(g.domain_range(Domain::Exterior(2.0)).unwrap(), (20, 100));
        assert_eq!(g.domain_range(Domain::Annulus(2.05, 3.0)).unwrap(), (21, 30));
        assert!(g.domain_range(Domain::Ball(0.1)).is_err());
        assert!(g.domain_range(Domain::Ball(11.0)).is_err());
    }

    #[test]
    fn params_admissibility() {
        assert!(Params::uniform(2, 3, 2.0, 1.0).is_ok());
        assert!(Params::uniform(2, 2, 2.0, 1.0).is_err());
        assert!(Params::uniform(3, 3, 1.0, 1.0).is_ok());
        // d = 3, K = 3: subcritical iff q < 2
        assert!(Params::uniform(3, 3, 2.0, 1.0).is_err());
        assert!(Params::new(2, 2.0, vec![1.0, -1.0, 1.0], vec![1.0; 3], 0.0).is_err());
        assert!(Params::uniform(2, 3, 0.5, 0.0).is_err());
    }
}
