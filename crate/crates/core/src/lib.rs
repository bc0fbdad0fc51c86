//! Distributed and localized model predictive control.
//!
//! The controller is parametrized by a closed-loop response matrix `Φ` whose
//! sparsity encodes d-hop locality on the subsystem graph. Each MPC step solves
//! for `Φ` with a three-block ADMM (row-wise explicit solve, column-wise
//! dynamics projection, elementwise dual update), and the ADMM stages can be
//! scheduled by several execution strategies that mirror kernel layouts on an
//! accelerator: naive staging, longest-vector padding, fused column kernels and
//! column patches.
//!
//! The crate is `no_std` (it needs `alloc`). Parallel execution and wall-clock
//! timing are injected through the [`exec::Executor`] and [`clock::Clock`]
//! traits.

#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod admm;
pub mod clock;
pub mod error;
pub mod exec;
pub mod graph;
pub mod linalg;
pub mod mask;
pub mod oracle;
pub mod sls;
pub mod system;

pub use admm::{
    admm_solve, closed_loop_cost, dlmpc_simulate, verify_fixed_point, AdmmState,
    FixedPointReport, PhaseTimes, SimConfig, SimReport, Trajectory,
};
pub use clock::{Clock, NoClock};
pub use error::{Error, Result};
pub use exec::{ExecStrategy, Executor, Inline, Scheduler, StrategyKind, SyncLedger};
pub use graph::SubsystemGraph;
pub use mask::{build_locality_mask, lemma1_bounds, LocalityMask};
pub use oracle::{kkt_oracle_equality, oracle_simulate};
pub use sls::{Bounds, PhiTriple, ProblemSpec};
pub use system::{build_chain_network, ChainConfig, LtiSystem, SubsystemPartition};
