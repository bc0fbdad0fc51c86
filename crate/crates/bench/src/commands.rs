//! The `run`, `sweep` and `breakdown` subcommands as library functions.

use locality_mpc::{Executor, StrategyKind};

use crate::config::{SweepConfig, SweepParam};
use crate::report::{CsvRow, ErrorRecord, PhaseTimesMs, RunReport};
use crate::scenario::{run_scenario, Scenario};

/// Runs `sc` once per strategy in `strategies`.
pub fn run(
    sc: &Scenario,
    strategies: &[StrategyKind],
    exec: &dyn Executor,
    audit: bool,
) -> Vec<Result<RunReport, ErrorRecord>> {
    strategies
        .iter()
        .map(|&k| run_scenario(&sc.with_strategy(k), exec, audit))
        .collect()
}

/// Result of a sweep: one `total` row per run. A failed run still produces a
/// row (`converged = false`, empty cost) and its error record.
#[derive(Debug, Default)]
pub struct SweepOutput {
    pub rows: Vec<CsvRow>,
    pub reports: Vec<RunReport>,
    pub errors: Vec<ErrorRecord>,
}

/// Runs every scenario of `cfg` serially. `wall_ms` is the mean wall time of
/// one MPC step.
pub fn sweep(cfg: &SweepConfig, exec: &dyn Executor) -> SweepOutput {
    let mut out = SweepOutput::default();
    for (repeat, sc) in cfg.scenarios() {
        match run_scenario(&sc, exec, false) {
            Ok(r) => {
                out.rows
                    .push(CsvRow::new(&sc, repeat, "total", r.mean_step_ms).with_report(&r));
                out.reports.push(r);
            }
            Err(e) => {
                out.rows.push(CsvRow::new(&sc, repeat, "total", f64::NAN));
                out.errors.push(e);
            }
        }
    }
    out
}

/// Phase times of one breakdown run next to the measured end-to-end time.
#[derive(Debug, Clone, PartialEq)]
pub struct BreakdownEntry {
    pub scenario: Scenario,
    pub repeat: usize,
    pub phases: PhaseTimesMs,
    pub total_wall_ms: f64,
}

#[derive(Debug, Default)]
pub struct BreakdownOutput {
    pub rows: Vec<CsvRow>,
    pub entries: Vec<BreakdownEntry>,
    pub reports: Vec<RunReport>,
    pub errors: Vec<ErrorRecord>,
}

/// Like [`sweep`], but emits one row per phase with the phase's total wall
/// time over the run.
pub fn breakdown(cfg: &SweepConfig, exec: &dyn Executor) -> BreakdownOutput {
    let mut out = BreakdownOutput::default();
    for (repeat, sc) in cfg.scenarios() {
        match run_scenario(&sc, exec, false) {
            Ok(r) => {
                for (name, v) in PhaseTimesMs::NAMES.iter().zip(r.phase_times_ms.values()) {
                    out.rows
                        .push(CsvRow::new(&sc, repeat, name, v).with_report(&r));
                }
                out.entries.push(BreakdownEntry {
                    scenario: r.scenario.clone(),
                    repeat,
                    phases: r.phase_times_ms,
                    total_wall_ms: r.total_wall_ms,
                });
                out.reports.push(r);
            }
            Err(e) => out.errors.push(e),
        }
    }
    out
}

/// Mean of `total` rows per `(strategy, value of the varied parameter)`,
/// skipping failed runs. Ordered as in `cfg`.
pub fn mean_by_strategy(
    cfg: &SweepConfig,
    reports: &[RunReport],
) -> Vec<(StrategyKind, Vec<(usize, f64)>)> {
    cfg.strategies
        .iter()
        .map(|&k| {
            let series = cfg
                .values
                .iter()
                .filter_map(|&v| {
                    let xs: Vec<f64> = reports
                        .iter()
                        .filter(|r| r.scenario.strategy == k && value_of(cfg.vary, &r.scenario) == v)
                        .map(|r| r.mean_step_ms)
                        .collect();
                    (!xs.is_empty()).then(|| (v, xs.iter().sum::<f64>() / xs.len() as f64))
                })
                .collect();
            (k, series)
        })
        .collect()
}

fn value_of(p: SweepParam, sc: &Scenario) -> usize {
    p.value(sc)
}
