//! Compiles a binary quadratic problem into a projector chain whose
//! variation over two free sites encodes it.
//!
//! Chain regions, left to right: a tail of `m` sites that ramps the bond
//! dimension up to `D`, six centre sites holding the variables, `N^2`
//! indicator sites, and a tail of `m` sites ramping back down.

pub mod bqp;
pub mod embedding;
pub mod indicator;
pub mod instance;
pub mod solve;

pub use bqp::{
    big_minimum, big_objective, bit_strings, penalty_surrogate, BigMinimum, BqpInstance, BqpSource, PenaltyTable,
    Witness,
};
pub use embedding::{
    embed_point, embed_variables, extract_relaxed, extract_variables, fixed_center_tensors, gauge_complete, kappa,
    CenterTensors,
};
pub use indicator::{indicator_dim, shift_operator, IndicatorFamily};
pub use instance::{
    assemble_instance, shortcut_energy, AffineRecord, AssemblyOptions, Layout, ReductionInstance, Region,
    WindowEnergy, WindowKind,
};
pub use solve::{solve_instance, SolveMode, SolveOptions, SolveOutcome};

/// Builds the indicator family for `Y` starting from scale `gamma`.
pub fn build_indicator_family(y: &nalgebra::DMatrix<f64>, gamma: f64) -> crate::Result<IndicatorFamily> {
    IndicatorFamily::build(y, gamma)
}
