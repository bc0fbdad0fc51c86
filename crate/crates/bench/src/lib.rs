//! Benchmark harness for `locality-mpc`: scenario generation on the chain
//! benchmark, parameter sweeps, phase breakdowns, CSV/SVG output and an
//! invariant verification suite.

pub mod clock;
pub mod commands;
pub mod config;
pub mod pool;
pub mod report;
pub mod scenario;
pub mod svg;
pub mod verify;
