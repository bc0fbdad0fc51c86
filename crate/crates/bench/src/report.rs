use std::io::Write;

use locality_mpc::admm::PhaseTimes;
use locality_mpc::{Error, FixedPointReport, SyncLedger};
use serde::Serialize;

use crate::clock::ms;
use crate::scenario::{error_kind, Scenario};

/// Exact CSV header shared by `sweep` and `breakdown`.
pub const CSV_HEADER: &str =
    "strategy,N,T,d,seed,repeat,phase,wall_ms,iters_total,host_syncs_per_iter,cost,converged";

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct PhaseTimesMs {
    pub setup: f64,
    pub precompute_global: f64,
    pub precompute_per_step: f64,
    pub optimize: f64,
    pub dynamics: f64,
}

impl PhaseTimesMs {
    pub const NAMES: [&'static str; 5] = [
        "setup",
        "precompute_global",
        "precompute_per_step",
        "optimize",
        "dynamics",
    ];

    pub fn values(&self) -> [f64; 5] {
        [
            self.setup,
            self.precompute_global,
            self.precompute_per_step,
            self.optimize,
            self.dynamics,
        ]
    }

    pub fn sum(&self) -> f64 {
        self.values().iter().sum()
    }
}

impl From<&PhaseTimes> for PhaseTimesMs {
    fn from(p: &PhaseTimes) -> Self {
        Self {
            setup: ms(p.setup),
            precompute_global: ms(p.precompute_global),
            precompute_per_step: ms(p.precompute_per_step),
            optimize: ms(p.optimize),
            dynamics: ms(p.dynamics),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageTimesMs {
    pub phi: f64,
    pub psi: f64,
    pub lambda: f64,
    pub convergence: f64,
    pub exchange: f64,
    pub fused_column: f64,
    pub patch: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LedgerReport {
    pub iterations: u64,
    pub host_syncs_per_iter: u64,
    pub kernel_launches_per_iter: u64,
    pub flag_reads_per_iter: u64,
    pub host_syncs_total: u64,
    pub duplicated_row_computations: u64,
    /// Totals are exact multiples of the strategy's per-iteration counts.
    pub exact: bool,
    pub stage_wall_ms: StageTimesMs,
    pub setup_wall_ms: f64,
}

impl From<&SyncLedger> for LedgerReport {
    fn from(l: &SyncLedger) -> Self {
        let s = &l.stage_wall_times;
        Self {
            iterations: l.iterations,
            host_syncs_per_iter: l.host_syncs_per_iter(),
            kernel_launches_per_iter: l.kernel_launches_per_iter(),
            flag_reads_per_iter: l.flag_reads_per_iter(),
            host_syncs_total: l.host_syncs,
            duplicated_row_computations: l.duplicated_row_computations,
            exact: l.is_exact(),
            stage_wall_ms: StageTimesMs {
                phi: ms(s.phi),
                psi: ms(s.psi),
                lambda: ms(s.lambda),
                convergence: ms(s.convergence),
                exchange: ms(s.exchange),
                fused_column: ms(s.fused_column),
                patch: ms(s.patch),
            },
            setup_wall_ms: ms(l.setup_wall_time),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AuditSummary {
    pub max_dynamics: f64,
    pub max_resolve: f64,
    pub max_consensus: f64,
    pub tolerance: f64,
    pub all_pass: bool,
}

impl AuditSummary {
    pub fn from_reports(reports: &[FixedPointReport], tolerance: f64) -> Self {
        let max = |f: fn(&FixedPointReport) -> f64| reports.iter().map(f).fold(0.0, f64::max);
        Self {
            max_dynamics: max(|r| r.dynamics),
            max_resolve: max(|r| r.resolve),
            max_consensus: max(|r| r.consensus),
            tolerance,
            all_pass: reports.iter().all(|r| r.passes(tolerance)),
        }
    }
}

/// Everything measured in one closed-loop run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub scenario: Scenario,
    pub phase_times_ms: PhaseTimesMs,
    pub total_wall_ms: f64,
    /// `(precompute_per_step + optimize + dynamics) / T_sim`.
    pub mean_step_ms: f64,
    pub per_step_iters: Vec<usize>,
    pub iters_total: u64,
    pub final_residuals: Vec<[f64; 2]>,
    pub residual_history: Vec<Vec<[f64; 2]>>,
    pub ledger: LedgerReport,
    pub closed_loop_cost: f64,
    pub converged_all_steps: bool,
    pub first_state_range: [f64; 2],
    pub bounds_satisfied: bool,
    pub max_prediction_violation: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub audit: Option<AuditSummary>,
    pub states: Vec<Vec<f64>>,
    pub inputs: Vec<Vec<f64>>,
}

/// Machine-readable failure of a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorRecord {
    pub kind: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<usize>,
    pub scenario: Box<Scenario>,
}

impl ErrorRecord {
    pub fn new(sc: &Scenario, e: &Error) -> Self {
        let step = match e {
            Error::AtStep { step, .. } => Some(*step),
            _ => None,
        };
        Self {
            kind: error_kind(e),
            message: e.root().to_string(),
            step,
            scenario: Box::new(sc.clone()),
        }
    }

    /// 2 for bad arguments, 3 for infeasible or non-converged problems.
    pub fn exit_code(&self) -> i32 {
        match self.kind {
            "invalid_argument" => 2,
            _ => 3,
        }
    }
}

/// One CSV line of the sweep/breakdown schema.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CsvRow {
    pub strategy: String,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "T")]
    pub t: usize,
    pub d: usize,
    pub seed: u64,
    pub repeat: usize,
    pub phase: String,
    pub wall_ms: f64,
    pub iters_total: u64,
    pub host_syncs_per_iter: u64,
    pub cost: Option<f64>,
    pub converged: bool,
}

impl CsvRow {
    pub fn new(sc: &Scenario, repeat: usize, phase: &str, wall_ms: f64) -> Self {
        Self {
            strategy: sc.strategy.name().to_string(),
            n: sc.n,
            t: sc.t_horizon,
            d: sc.d,
            seed: sc.seed,
            repeat,
            phase: phase.to_string(),
            wall_ms,
            iters_total: 0,
            host_syncs_per_iter: sc.strategy.host_syncs_per_iter(),
            cost: None,
            converged: false,
        }
    }

    pub fn with_report(mut self, r: &RunReport) -> Self {
        self.iters_total = r.iters_total;
        self.host_syncs_per_iter = r.ledger.host_syncs_per_iter;
        self.cost = Some(r.closed_loop_cost);
        self.converged = r.converged_all_steps;
        self
    }
}

pub fn write_csv<W: Write>(rows: &[CsvRow], out: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    if rows.is_empty() {
        w.write_record(CSV_HEADER.split(','))?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
