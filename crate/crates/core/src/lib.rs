//! Pseudospectral solver and diagnostics for the damped Korteweg-de Vries
//! equation
//!
//! ```text
//! u_t + u u_x + u_xxx + a(x) u = 0
//! ```
//!
//! on a periodic box, with x-dependent damping a(x) ≥ 0.
//!
//! The crate provides:
//! - spectral grids, fields, derivatives, and norms ([`grid`]);
//! - damping profiles (constant, smooth one-sided steps, sponge) and initial
//!   data (solitons, Gaussians, seeded random H¹ fields) ([`profiles`]);
//! - the Airy group e^{−t∂ₓ³} and empirical checks of its space-time
//!   smoothing estimates ([`airy`]);
//! - an integrating-factor RK4 time stepper with two-thirds dealiasing
//!   ([`integrator`]);
//! - energy bookkeeping: the L² dissipation identity, the damped Hamiltonian
//!   balance, exponential decay fits, and an observability ratio ([`energy`]);
//! - the mild-solution (Duhamel) formulation: Picard iteration, contraction
//!   horizons, and the scale-invariant norms behind them ([`mild`]);
//! - potential-well thresholds: the sharp constant k₀, the well function and
//!   its roots, supercritical data, and the non-decay experiment ([`well`]).

pub mod airy;
pub mod energy;
pub mod error;
pub mod grid;
pub mod integrator;
pub mod mild;
pub mod profiles;
pub mod well;

pub use airy::{airy_propagate, verify_linear_estimates, LinearEstimateReport};
pub use energy::{
    dissipation_residual, fit_decay, hamiltonian_residual, observability_ratio, record, DecayFit,
    EnergyRecord,
};
pub use error::{KdvError, Result};
pub use grid::{dealias, make_grid, norms, spectral_derivative, Field, FieldNorms, Grid, GridSpec};
pub use integrator::{
    cfl_suggest, rhs_nonstiff, simulate, step, ConfigEcho, SolverConfig, TimeSeries,
};
pub use mild::{
    duhamel, kpv_norms, picard_map, picard_solve, t_kappa, ContractionReport, KpvNorms, Trajectory,
};
pub use profiles::{
    gaussian, make_damping, random_h1, realize, soliton, DampingKind, DampingProfile, DampingSpec,
    InitialDataSpec,
};
pub use well::{
    construct_supercritical, estimate_k0, f_eval, ratio, sech2_dilate_ratio, solve_xi2,
    vitillaro_experiment, K0LogEntry, PotentialWellConstants, PreconditionFlags, VitillaroReport,
    Xi2Roots,
};
