//! Quasiparticle kinetic equation: energy grid, collision terms, the
//! linearised steady state and implicit time marching.

mod analytic;
mod grid;
mod rhs;
mod solver;

pub use analytic::{analytic_steady_state, emission_integral, validate, AnalyticSteadyState, ValidationMetrics};
pub use grid::{EnergyGrid, GridSpec, NodeFlag, OccupationFunction, CLAMP_TOLERANCE, MIN_NODES};
pub use rhs::{GapEdgeBoundary, KineticModel, RhsBreakdown};
pub use solver::{evolve, evolve_with_report, SolverOptions, SolverOutput};
