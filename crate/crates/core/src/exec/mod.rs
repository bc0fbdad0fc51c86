//! Execution strategies for the ADMM stages.
//!
//! A strategy decides how the four stages (row Φ-step, column Ψ-step, dual
//! update, convergence check) are grouped into parallel-for launches and
//! where results must be gathered by the coordinator between them. The
//! [`SyncLedger`] records those gathers as deterministic counts, modelling
//! host/device transfers of an accelerator implementation.

mod ledger;
mod patch;
mod schedule;
mod shared;

pub use ledger::{StageTimes, SyncLedger};
pub use patch::{build_patches, duplicated_rows_per_iter, ColumnPatch};
pub use schedule::{reduce_convergence, Convergence, Scheduler, Stages};
pub use shared::SharedSlice;

use core::fmt;
use core::str::FromStr;

/// Runs a parallel-for: `body(i)` for every `i < n`, returning only after
/// all calls finished (barrier semantics). Calls may run concurrently and in
/// any order.
pub trait Executor: Sync {
    fn worker_count(&self) -> usize;
    fn parallel_for(&self, n: usize, body: &(dyn Fn(usize) + Sync));
}

/// Runs every item on the calling thread, in index order.
#[derive(Debug, Default, Clone, Copy)]
pub struct Inline;

impl Executor for Inline {
    fn worker_count(&self) -> usize {
        1
    }

    fn parallel_for(&self, n: usize, body: &(dyn Fn(usize) + Sync)) {
        for i in 0..n {
            body(i);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StrategyKind {
    /// Single-threaded reference; no device boundary.
    Sequential,
    /// One launch and one gather per stage, compact supports.
    NaiveParallel,
    /// Same staging over fixed-stride `D_row` / `D_col` layouts.
    Padded,
    /// Row stage, one exchange, then Ψ, Λ and residuals in one column kernel.
    Fused,
    /// One column-patch kernel per iteration that recomputes its rows locally.
    PatchLocal,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 5] = [
        StrategyKind::Sequential,
        StrategyKind::NaiveParallel,
        StrategyKind::Padded,
        StrategyKind::Fused,
        StrategyKind::PatchLocal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::Sequential => "sequential",
            StrategyKind::NaiveParallel => "naive",
            StrategyKind::Padded => "padded",
            StrategyKind::Fused => "fused",
            StrategyKind::PatchLocal => "patch-local",
        }
    }

    /// Coordinator gathers per iteration.
    pub fn host_syncs_per_iter(self) -> u64 {
        match self {
            StrategyKind::Sequential | StrategyKind::PatchLocal => 0,
            StrategyKind::NaiveParallel | StrategyKind::Padded => 4,
            StrategyKind::Fused => 1,
        }
    }

    pub fn kernel_launches_per_iter(self) -> u64 {
        match self {
            StrategyKind::Sequential => 0,
            StrategyKind::NaiveParallel | StrategyKind::Padded => 4,
            StrategyKind::Fused => 2,
            StrategyKind::PatchLocal => 1,
        }
    }

    /// Convergence-flag reads per iteration (control, not data).
    pub fn flag_reads_per_iter(self) -> u64 {
        match self {
            StrategyKind::Sequential => 0,
            _ => 1,
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownStrategy;

impl fmt::Display for UnknownStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("expected one of sequential, naive, padded, fused, patch-local")
    }
}

impl FromStr for StrategyKind {
    type Err = UnknownStrategy;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        StrategyKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or(UnknownStrategy)
    }
}

/// A strategy together with the worker count it runs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExecStrategy {
    pub kind: StrategyKind,
    pub worker_count: usize,
}

impl ExecStrategy {
    pub fn new(kind: StrategyKind, worker_count: usize) -> Self {
        let worker_count = if kind == StrategyKind::Sequential {
            1
        } else {
            worker_count.max(1)
        };
        Self { kind, worker_count }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for k in StrategyKind::ALL {
            assert_eq!(k.name().parse::<StrategyKind>(), Ok(k));
        }
        assert!("gpu".parse::<StrategyKind>().is_err());
    }

    #[test]
    fn sequential_ignores_workers() {
        assert_eq!(ExecStrategy::new(StrategyKind::Sequential, 8).worker_count, 1);
        assert_eq!(ExecStrategy::new(StrategyKind::Fused, 0).worker_count, 1);
        assert_eq!(ExecStrategy::new(StrategyKind::Fused, 8).worker_count, 8);
    }
}
