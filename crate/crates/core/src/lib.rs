//! Least-energy solutions of K-wise coupled nonlinear Schrödinger systems
//! under radial symmetry.
//!
//! The system studied is
//!
//! ```text
//! -Δu_i + λ_i u_i = μ_i |u_i|^{Kq-2} u_i + β |u_i|^{q-2} u_i ∏_{j≠i} |u_j|^q   in ℝ^d,  i = 1..K
//! ```
//!
//! whose coupling involves the product of *all* K components. The crate is
//! organised bottom-up:
//!
//! * [`radial`]: truncated radial grids, quadrature, the weak-form radial
//!   Laplacian, and the field/state containers.
//! * [`scalar`]: single-equation ground states, Rayleigh constants
//!   `c_{p,λ,μ}`, Dirichlet ground states on radial subdomains and least-energy
//!   sign-changing radial solutions.
//! * [`system`]: the energy `I_β`, its gradient, the constraints `G_{β,i}`,
//!   Nehari and componentwise projections, the interaction matrix and the
//!   strong-competition limit functionals.
//! * [`minimize`]: projected descent on the Nehari set and on the
//!   componentwise constraint set, the disjoint-bump construction and the
//!   structured limit problem.
//! * [`thresholds`]: the explicit constants `S̄`, `C̄`, `ubar-β`, `L` and the
//!   bounds for the ground-state threshold `β̄`.
//!
//! The crate is `no_std` (with `alloc`) when the default `std` feature is
//! disabled; all transcendental functions go through `libm` so results are
//! bit-identical either way.

#![cfg_attr(not(feature = "std"), no_std)]

// negated float comparisons are deliberate: NaN must take the error path
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

pub mod error;
pub mod linalg;
pub mod math;
pub mod minimize;
pub mod optim;
pub mod radial;
pub mod scalar;
pub mod system;
pub mod thresholds;

pub use error::{Error, Result};
pub use radial::{make_grid, Params, RadialField, RadialGrid, SystemState};
