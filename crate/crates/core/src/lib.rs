//! Recovery of binary (±1) functions from blurred, noisy data by phase-field
//! relaxation of perimeter-regularised least squares.
//!
//! The pipeline is: build a [`mesh::Mesh`], assemble the P1 operators in
//! [`fem`], blur with [`blur::BlurOperator`], and run one of the splitting
//! schemes in [`solver`] on the energy defined in [`phasefield`].

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod blur;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod fem;
pub mod mesh;
pub mod oracle;
pub mod pgm;
pub mod phasefield;
pub mod solver;

pub use blur::BlurOperator;
pub use error::{Error, Result};
pub use experiments::{
    averaged_error, error_metric, initial_guess, min_feature_width, project_binary, rasterize,
    synthesize_data, tv_binary, BinaryPattern, NoiseSpec, RecoveryProblem,
};
pub use fem::{FeFunction, FeSystem, SparseMatrix};
pub use mesh::{build_interval_mesh, build_square_mesh, Mesh};
pub use phasefield::{parameter_heuristics, total_energy, ModelParams, Potential};
pub use solver::{
    do_step, dw_step, gradient_flow_run, run_recovery, stationarity_residual, RecoveryResult,
    StopRule,
};
