use core::time::Duration;

use super::StrategyKind;

/// Wall time spent in each stage across a solve.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct StageTimes {
    pub phi: Duration,
    pub psi: Duration,
    pub lambda: Duration,
    pub convergence: Duration,
    /// Coordinator-side layout exchanges and reductions.
    pub exchange: Duration,
    /// Fused Ψ/Λ/residual column kernel.
    pub fused_column: Duration,
    /// Column-patch kernel.
    pub patch: Duration,
}

impl StageTimes {
    pub fn total(&self) -> Duration {
        self.phi
            + self.psi
            + self.lambda
            + self.convergence
            + self.exchange
            + self.fused_column
            + self.patch
    }
}

/// Communication and work accounting of one strategy.
///
/// Counts are accumulated as totals; the per-iteration views divide by the
/// number of iterations and are constant for a given strategy and mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyncLedger {
    pub strategy: StrategyKind,
    pub iterations: u64,
    pub host_syncs: u64,
    pub kernel_launches: u64,
    pub flag_reads: u64,
    pub duplicated_row_computations: u64,
    pub stage_wall_times: StageTimes,
    pub setup_wall_time: Duration,
}

impl SyncLedger {
    pub fn new(strategy: StrategyKind) -> Self {
        Self {
            strategy,
            iterations: 0,
            host_syncs: 0,
            kernel_launches: 0,
            flag_reads: 0,
            duplicated_row_computations: 0,
            stage_wall_times: StageTimes::default(),
            setup_wall_time: Duration::ZERO,
        }
    }

    fn per_iter(&self, total: u64) -> u64 {
        total.checked_div(self.iterations).unwrap_or(0)
    }

    pub fn host_syncs_per_iter(&self) -> u64 {
        self.per_iter(self.host_syncs)
    }

    pub fn kernel_launches_per_iter(&self) -> u64 {
        self.per_iter(self.kernel_launches)
    }

    pub fn flag_reads_per_iter(&self) -> u64 {
        self.per_iter(self.flag_reads)
    }

    /// Totals are exact multiples of the strategy's per-iteration constants.
    pub fn is_exact(&self) -> bool {
        let s = self.strategy;
        self.host_syncs == s.host_syncs_per_iter() * self.iterations
            && self.kernel_launches == s.kernel_launches_per_iter() * self.iterations
            && self.flag_reads == s.flag_reads_per_iter() * self.iterations
    }

    /// Adds another ledger of the same strategy (e.g. a later MPC step).
    pub fn absorb(&mut self, other: &SyncLedger) {
        debug_assert_eq!(self.strategy, other.strategy);
        self.iterations += other.iterations;
        self.host_syncs += other.host_syncs;
        self.kernel_launches += other.kernel_launches;
        self.flag_reads += other.flag_reads;
        self.duplicated_row_computations += other.duplicated_row_computations;
        let (a, b) = (&mut self.stage_wall_times, &other.stage_wall_times);
        a.phi += b.phi;
        a.psi += b.psi;
        a.lambda += b.lambda;
        a.convergence += b.convergence;
        a.exchange += b.exchange;
        a.fused_column += b.fused_column;
        a.patch += b.patch;
        self.setup_wall_time += other.setup_wall_time;
    }
}
