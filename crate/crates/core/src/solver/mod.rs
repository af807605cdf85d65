//! Lax–Friedrichs solvers for the oscillatory, corrector and effective
//! problems, plus the Hopf–Lax formula for convex effective Hamiltonians.

pub mod grid;
pub mod hopf_lax;
pub mod problems;
pub mod scheme;

pub use grid::{Axis, Grid, ScalarField};
pub use hopf_lax::HopfLax;
pub use problems::{
    corrector_pde, line_grid, solve_corrector_periodic, solve_effective, solve_hj, solve_micro, CorrectorResult,
    GameNodeHamiltonian, InitialData, MicroGrid, MicroSolution,
};
pub use scheme::{estimate_dissipation, evolve, lf_step, DissipationBounds, EvolveOptions, EvolveReport, NodeHamiltonian};
