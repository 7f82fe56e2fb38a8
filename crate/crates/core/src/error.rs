//! Error taxonomy shared across the crate.

use crate::integrator::TimeSeries;

/// Everything that can go wrong, from bad arguments to mid-run blow-up.
#[derive(Debug, thiserror::Error)]
pub enum KdvError {
    /// A constructor or configuration argument violates its contract.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Two fields (or a field and a profile) live on different grids.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// The solution left the representable range; `t_last` is the last finite time.
    /// Records accumulated up to that point ride along when available.
    #[error("solution blew up after t = {t_last}")]
    Blowup {
        t_last: f64,
        partial: Option<Box<TimeSeries>>,
    },

    /// An iteration failed to reach its tolerance; the per-iterate distances ride along.
    #[error(
        "iteration failed to converge after {iterations} steps (last distance {last_distance:.3e})"
    )]
    NonConvergence {
        iterations: usize,
        last_distance: f64,
        log: Vec<f64>,
    },

    /// An analysis was asked to run outside its hypotheses.
    #[error("precondition unmet: {0}")]
    PreconditionUnmet(String),
}

pub type Result<T> = std::result::Result<T, KdvError>;
