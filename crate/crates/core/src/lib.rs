//! Numerical tools for slow periodic homogenization of nonconvex
//! Hamilton–Jacobi equations: two explicit differential games, their
//! Hamiltonians, strategy simulation, a monotone finite-difference solver and
//! effective-Hamiltonian audits.

// `!(x > 0.0)` rejects NaN along with the bad range.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod game;
pub mod effective;
pub mod engine;
pub mod experiments;
pub mod policies;
pub mod solver;
pub mod torus;

pub use error::{Error, Result};
