//! Fractional block-centered finite differences for the one-dimensional
//! two-sided variable-coefficient space-fractional diffusion equation
//!
//! ```text
//! ∂t u − ∂x [γ K^L ∂x J_L^{2−α} u + (1−γ) K^R ∂x J_R^{2−α} u] = f,   x ∈ (a, b)
//! ```
//!
//! with fractional Neumann (flux) boundary data, discretized on arbitrary
//! nonuniform staggered grids and marched with Crank–Nicolson.
//!
//! Two spatial operators are provided:
//!
//! * [`dense`]: the explicitly assembled `M × M` stiffness matrix, solved by
//!   LU or BiCGSTAB. `O(M²)` memory.
//! * [`fast`]: a matrix-free operator that compresses the far-field part of
//!   the fractional integrals with a sum-of-exponentials kernel ([`soe`]) and
//!   evaluates it by exponential recurrences in `O(M·N_exp)` work and memory.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod dense;
pub mod error;
pub mod fast;
pub mod gauss;
pub mod grid;
pub mod krylov;
pub mod march;
pub mod problem;
pub mod problems;
pub mod quadrature;
pub mod soe;
mod special;

pub use error::{Error, Result};
pub use grid::StaggeredGrid;
pub use problem::ProblemSpec;
