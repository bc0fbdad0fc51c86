//! The three-step ADMM for one MPC step, the receding-horizon loop around it,
//! and an independent audit of converged iterates.

pub mod kernels;
mod mpc;
mod solve;
mod verify;

pub use kernels::{column_residuals, lambda_update, phi_row_solve, psi_column_solve};
pub use mpc::{
    closed_loop_cost, dlmpc_simulate, extract_control, step_dynamics, PhaseTimes, SimConfig,
    SimReport, Trajectory,
};
pub use solve::{admm_solve, AdmmState};
pub use verify::{prediction_violation, verify_fixed_point, FixedPointReport};
