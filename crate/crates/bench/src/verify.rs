//! The invariant suite behind `locality-mpc verify`.
//!
//! Each check returns a [`CheckOutcome`]; the suite fails if any check fails.

use std::fmt;
use std::time::Instant;

use locality_mpc::exec::Stages;
use locality_mpc::mask::longest_vector_lengths;
use locality_mpc::sls::{
    build_dynamics_operator, precompute_column_solvers, precompute_row_data, row_index_map,
};
use locality_mpc::{
    admm_solve, build_chain_network, build_locality_mask, closed_loop_cost, dlmpc_simulate,
    lemma1_bounds, oracle_simulate, verify_fixed_point, ChainConfig, Executor, Inline, NoClock,
    PhiTriple, ProblemSpec, Scheduler, SimConfig, StrategyKind,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::commands::{breakdown, sweep};
use crate::config::{SweepConfig, SweepParam};
use crate::pool::{available_threads, RayonExecutor};
use crate::report::{PhaseTimesMs, RunReport};
use crate::scenario::{run_scenario, sample_x0, Scenario, FIRST_STATE_BOUNDS};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skip => "SKIP",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub status: Status,
    pub detail: String,
    pub seconds: f64,
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<24} {} ({:.1}s)",
            self.status, self.name, self.detail, self.seconds
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyOptions {
    /// Smaller instance sets; the speedup and scaling checks are skipped.
    pub quick: bool,
    /// Perturb one entry of a converged `Φ` before auditing it, so the
    /// fixed-point check must fail.
    pub inject_fault: bool,
    pub workers: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            quick: false,
            inject_fault: false,
            workers: available_threads(),
        }
    }
}

/// Hardware threads required for the speedup comparison to be meaningful.
pub const SPEEDUP_MIN_THREADS: usize = 8;

type CheckResult = Result<(Status, String), String>;

fn outcome(name: &'static str, f: impl FnOnce() -> CheckResult) -> CheckOutcome {
    let start = Instant::now();
    let (status, detail) = f().unwrap_or_else(|e| (Status::Fail, e));
    CheckOutcome {
        name,
        status,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn pass_if(ok: bool, detail: String) -> CheckResult {
    Ok((if ok { Status::Pass } else { Status::Fail }, detail))
}

/// Runs every check in order, handing each outcome to `report` as soon as it
/// is known.
pub fn run_suite(opts: &VerifyOptions, mut report: impl FnMut(&CheckOutcome)) -> Vec<CheckOutcome> {
    let exec = RayonExecutor::new(opts.workers);
    let mut runs: Vec<RunReport> = Vec::new();
    let mut out = Vec::new();
    let mut emit = |o: CheckOutcome, out: &mut Vec<CheckOutcome>| {
        report(&o);
        out.push(o);
    };

    let seeds = if opts.quick { 3 } else { 10 };
    let bench_runs = benchmark_runs(seeds, &exec);
    if let Ok(rs) = &bench_runs {
        runs.extend(rs.iter().cloned());
    }
    emit(outcome("determinism", || check_determinism(&bench_runs)), &mut out);
    emit(outcome("constraints", || check_constraints(&bench_runs)), &mut out);
    emit(
        outcome("fixed-point audit", || check_fixed_point(&bench_runs, opts.inject_fault)),
        &mut out,
    );
    emit(outcome("oracle equivalence", || check_oracle(opts.quick)), &mut out);
    emit(outcome("support-length bounds", check_lemma1), &mut out);
    emit(
        outcome("support containment", || check_support(if opts.quick { 20 } else { 100 }, &exec)),
        &mut out,
    );
    emit(
        outcome("breakdown structure", || check_breakdown(opts.quick, &exec, &mut runs)),
        &mut out,
    );
    emit(
        outcome("scaling shape", || {
            if opts.quick {
                return Ok((Status::Skip, "skipped in quick mode".into()));
            }
            check_scaling(&exec, &mut runs)
        }),
        &mut out,
    );
    emit(
        outcome("speedup", || {
            if opts.quick {
                return Ok((Status::Skip, "skipped in quick mode".into()));
            }
            check_speedup(&exec, &mut runs)
        }),
        &mut out,
    );
    emit(outcome("ledger exactness", || check_ledgers(&runs)), &mut out);
    out
}

pub fn all_passed(outcomes: &[CheckOutcome]) -> bool {
    outcomes.iter().all(|o| o.status != Status::Fail)
}

fn benchmark_scenario(seed: u64) -> Scenario {
    Scenario {
        seed,
        ..Scenario::default()
    }
}

/// Audited closed loops at N = 10, T = 5, d = 2, one per seed and strategy.
fn benchmark_runs(seeds: u64, exec: &dyn Executor) -> Result<Vec<RunReport>, String> {
    let mut out = Vec::new();
    for seed in 1..=seeds {
        let sc = benchmark_scenario(seed);
        for kind in StrategyKind::ALL {
            let r = run_scenario(&sc.with_strategy(kind), exec, true)
                .map_err(|e| format!("seed {seed} {kind}: {}", e.message))?;
            out.push(r);
        }
    }
    Ok(out)
}

fn bits(v: &[Vec<f64>]) -> Vec<u64> {
    v.iter().flatten().map(|x| x.to_bits()).collect()
}

fn check_determinism(runs: &Result<Vec<RunReport>, String>) -> CheckResult {
    let runs = runs.as_ref().map_err(Clone::clone)?;
    let mut compared = 0;
    for group in runs.chunks(StrategyKind::ALL.len()) {
        let base = &group[0];
        for r in &group[1..] {
            let same = bits(&base.states) == bits(&r.states)
                && bits(&base.inputs) == bits(&r.inputs)
                && base.closed_loop_cost.to_bits() == r.closed_loop_cost.to_bits()
                && base.per_step_iters == r.per_step_iters;
            if !same {
                return Err(format!(
                    "seed {}: {} differs from {}",
                    r.scenario.seed,
                    r.scenario.strategy,
                    base.scenario.strategy
                ));
            }
            compared += 1;
        }
    }
    pass_if(
        compared > 0,
        format!(
            "{} seeds x 5 strategies bitwise identical (trajectories, costs, iterations)",
            runs.len() / 5
        ),
    )
}

fn check_constraints(runs: &Result<Vec<RunReport>, String>) -> CheckResult {
    let runs = runs.as_ref().map_err(Clone::clone)?;
    let (lo, hi) = runs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
        (lo.min(r.first_state_range[0]), hi.max(r.first_state_range[1]))
    });
    let ok = runs.iter().all(|r| r.bounds_satisfied);
    pass_if(
        ok,
        format!(
            "first states in [{lo:.4}, {hi:.4}], required [{}, {}] ± 1e-6",
            FIRST_STATE_BOUNDS.0, FIRST_STATE_BOUNDS.1
        ),
    )
}

fn check_fixed_point(runs: &Result<Vec<RunReport>, String>, inject_fault: bool) -> CheckResult {
    let runs = runs.as_ref().map_err(Clone::clone)?;
    let mut worst = 0.0f64;
    let mut solves = 0;
    let mut ok = true;
    for r in runs {
        let a = r.audit.as_ref().ok_or("run was not audited")?;
        worst = worst.max(a.max_dynamics).max(a.max_resolve).max(a.max_consensus);
        ok &= a.all_pass;
        solves += r.per_step_iters.len();
    }

    // one standalone solve, optionally corrupted before its audit
    let sc = benchmark_scenario(1);
    let sys = build_chain_network(sc.n, &ChainConfig::default()).map_err(|e| e.to_string())?;
    let spec = ProblemSpec::benchmark(sys.partition(), sc.t_horizon).map_err(|e| e.to_string())?;
    let mask = build_locality_mask(&sys, sc.d, sc.t_horizon).map_err(|e| e.to_string())?;
    let op = build_dynamics_operator(&sys, sc.t_horizon).map_err(|e| e.to_string())?;
    let cols = precompute_column_solvers(&op, &mask).map_err(|e| e.to_string())?;
    let meta = spec.row_meta(&row_index_map(sys.partition(), sc.t_horizon).map_err(|e| e.to_string())?);
    let rows = precompute_row_data(&sample_x0(sc.n, sc.seed), &spec, &mask, &meta)
        .map_err(|e| e.to_string())?;
    let mut sched = Scheduler::new(StrategyKind::Sequential, &mask, &Inline, &NoClock);
    let mut state = admm_solve(&rows, &cols, &mask, &spec, PhiTriple::zeros(&mask), &mut sched)
        .map_err(|e| e.to_string())?;
    if inject_fault {
        let r = (0..mask.n_rows()).find(|&r| rows[r].a_dot_a > 0.0).unwrap_or(0);
        state.triple.phi.row[r * mask.d_row()] += 0.1;
        state.triple.phi.row_to_col(&mask);
    }
    let probe = verify_fixed_point(&state.triple, &rows, &op, &mask);
    let tol = 10.0 * spec.eps_pri;
    worst = worst.max(probe.max());
    ok &= probe.passes(tol);
    solves += 1;
    let fault = if inject_fault { ", fault injected" } else { "" };
    pass_if(
        ok,
        format!("{solves} solves, worst residual {worst:.2e} (limit {tol:.0e}){fault}"),
    )
}

const ORACLE_T_SIM: usize = 10;
const ORACLE_EPS: f64 = 1e-6;
const ORACLE_REL_TOL: f64 = 1e-4;

/// Closed-loop cost of ADMM against the KKT oracle, with all bounds removed.
fn oracle_gap(n: usize, t: usize, d: usize, eps: f64) -> Result<f64, String> {
    let sys = build_chain_network(n, &ChainConfig::default()).map_err(|e| e.to_string())?;
    let mut spec = ProblemSpec::benchmark(sys.partition(), t)
        .map_err(|e| e.to_string())?
        .without_bounds();
    spec.eps_pri = eps;
    spec.eps_dual = eps;
    let mask = build_locality_mask(&sys, d, t).map_err(|e| e.to_string())?;
    let x0 = sample_x0(n, 100 + n as u64);
    let cfg = SimConfig::new(ORACLE_T_SIM, StrategyKind::Sequential);
    let (traj, _) = dlmpc_simulate(&sys, &spec, &mask, &x0, &cfg, &Inline, &NoClock)
        .map_err(|e| e.to_string())?;
    let oracle = oracle_simulate(&sys, &spec, &mask, &x0, ORACLE_T_SIM).map_err(|e| e.to_string())?;
    let (ca, co) = (closed_loop_cost(&traj, &spec), closed_loop_cost(&oracle, &spec));
    Ok((ca - co).abs() / co.abs().max(1e-12))
}

fn check_oracle(quick: bool) -> CheckResult {
    let ns: &[usize] = if quick { &[2, 3] } else { &[2, 3, 4] };
    let ts: &[usize] = if quick { &[3] } else { &[3, 4] };
    let (mut worst, mut worst_default) = (0.0f64, 0.0f64);
    let mut cases = 0;
    for &n in ns {
        for &t in ts {
            for d in [1, 2] {
                worst = worst.max(oracle_gap(n, t, d, ORACLE_EPS)?);
                worst_default = worst_default.max(oracle_gap(n, t, d, Scenario::default().eps)?);
                cases += 1;
            }
        }
    }
    pass_if(
        worst <= ORACLE_REL_TOL,
        format!(
            "{cases} instances, worst relative cost gap {worst:.2e} at eps {ORACLE_EPS:.0e} \
             ({worst_default:.2e} at default eps)"
        ),
    )
}

fn check_lemma1() -> CheckResult {
    let mut checked = 0;
    for n in 3..=50 {
        let sys = build_chain_network(n, &ChainConfig::default()).map_err(|e| e.to_string())?;
        for d in 0..=4u32 {
            for t in 2..=10u64 {
                let mask = build_locality_mask(&sys, d as usize, t as usize).map_err(|e| e.to_string())?;
                let (d_row, d_col) = longest_vector_lengths(&mask);
                let (row_bound, col_bound) = lemma1_bounds(2, 2, d, t);
                if d_row as u64 > row_bound || d_col as u64 > col_bound {
                    return Err(format!(
                        "N={n} d={d} T={t}: ({d_row}, {d_col}) exceeds ({row_bound}, {col_bound})"
                    ));
                }
                checked += 1;
            }
        }
    }
    pass_if(true, format!("{checked} masks within bounds"))
}

/// Random instances and strategies; after every iteration both layouts must
/// agree and every slot outside the support must hold exactly zero.
fn check_support(cases: usize, exec: &dyn Executor) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut iterations = 0;
    for case in 0..cases {
        let n = rng.random_range(1..=8);
        let t = rng.random_range(2..=5);
        let d = rng.random_range(1..=3);
        let kind = StrategyKind::ALL[rng.random_range(0..StrategyKind::ALL.len())];
        let sys = build_chain_network(n, &ChainConfig::default()).map_err(|e| e.to_string())?;
        let spec = ProblemSpec::benchmark(sys.partition(), t).map_err(|e| e.to_string())?;
        let mask = build_locality_mask(&sys, d, t).map_err(|e| e.to_string())?;
        let op = build_dynamics_operator(&sys, t).map_err(|e| e.to_string())?;
        let cols = precompute_column_solvers(&op, &mask).map_err(|e| e.to_string())?;
        let meta = spec.row_meta(&row_index_map(sys.partition(), t).map_err(|e| e.to_string())?);
        let rows = precompute_row_data(&sample_x0(n, case as u64), &spec, &mask, &meta)
            .map_err(|e| e.to_string())?;
        let stages = Stages {
            mask: &mask,
            rows: &rows,
            cols: &cols,
            rho: spec.rho,
            eps_pri: spec.eps_pri,
            eps_dual: spec.eps_dual,
        };
        let mut sched = Scheduler::new(kind, &mask, exec, &NoClock);
        sched.prepare_step(&stages);
        let mut triple = PhiTriple::zeros(&mask);
        for it in 0..rng.random_range(1..=30) {
            sched.run_iteration(&stages, &mut triple);
            iterations += 1;
            if !triple.padding_is_zero(&mask) || !triple.layouts_agree(&mask) {
                return Err(format!("case {case} ({kind}, N={n} T={t} d={d}) iteration {it}"));
            }
        }
    }
    pass_if(true, format!("{cases} cases, {iterations} iterations, no mass outside the mask"))
}

/// Relative tolerance between the phase sum and the end-to-end wall time.
const BREAKDOWN_TOL: f64 = 0.05;

fn check_breakdown(quick: bool, exec: &dyn Executor, runs: &mut Vec<RunReport>) -> CheckResult {
    let cfg = SweepConfig {
        vary: SweepParam::N,
        values: if quick { vec![10] } else { vec![10, 100] },
        repeats: 1,
        ..SweepConfig::default()
    };
    let out = breakdown(&cfg, exec);
    if let Some(e) = out.errors.first() {
        return Err(format!("{}: {}", e.scenario.strategy, e.message));
    }
    let expected = cfg.values.len() * cfg.strategies.len();
    if out.entries.len() != expected || out.rows.len() != expected * PhaseTimesMs::NAMES.len() {
        return Err(format!("{} rows for {} runs", out.rows.len(), out.entries.len()));
    }
    for chunk in out.rows.chunks(PhaseTimesMs::NAMES.len()) {
        let phases: Vec<&str> = chunk.iter().map(|r| r.phase.as_str()).collect();
        if phases != PhaseTimesMs::NAMES {
            return Err(format!("unexpected phases {phases:?}"));
        }
    }
    let mut worst = 0.0f64;
    for e in &out.entries {
        worst = worst.max((e.total_wall_ms - e.phases.sum()).abs() / e.total_wall_ms);
    }
    let seq = out
        .entries
        .iter()
        .find(|e| e.scenario.strategy == StrategyKind::Sequential && e.scenario.n == 10)
        .ok_or("no sequential run at N = 10")?;
    let v = seq.phases.values();
    let largest = (0..v.len()).max_by(|&a, &b| v[a].total_cmp(&v[b])).unwrap_or(0);
    let bottleneck = PhaseTimesMs::NAMES[largest];
    runs.extend(out.reports);
    pass_if(
        worst <= BREAKDOWN_TOL && bottleneck == "optimize",
        format!(
            "{} runs x 5 phases, worst phase-sum gap {:.2}%, sequential N=10 largest phase: {bottleneck}",
            out.entries.len(),
            worst * 100.0
        ),
    )
}

/// Inversions tolerated per strategy in the soft monotonicity check.
const SCALING_INVERSIONS: usize = 1;

fn check_scaling(exec: &dyn Executor, runs: &mut Vec<RunReport>) -> CheckResult {
    let cfg = SweepConfig {
        vary: SweepParam::N,
        values: vec![10, 25, 50, 100],
        repeats: 1,
        ..SweepConfig::default()
    };
    let out = sweep(&cfg, exec);
    if let Some(e) = out.errors.first() {
        return Err(format!("N={} {}: {}", e.scenario.n, e.scenario.strategy, e.message));
    }
    let mut notes = Vec::new();
    let mut ok = true;
    for &kind in &cfg.strategies {
        let series: Vec<f64> = out
            .reports
            .iter()
            .filter(|r| r.scenario.strategy == kind)
            .map(|r| r.mean_step_ms)
            .collect();
        let inversions = series.windows(2).filter(|w| w[1] <= w[0]).count();
        ok &= series.len() == cfg.values.len() && inversions <= SCALING_INVERSIONS;
        notes.push(format!(
            "{kind} [{}]",
            series.iter().map(|v| format!("{v:.1}")).collect::<Vec<_>>().join(", ")
        ));
    }
    runs.extend(out.reports);
    pass_if(ok, format!("ms/step over N=10,25,50,100: {}", notes.join("; ")))
}

fn check_speedup(exec: &dyn Executor, runs: &mut Vec<RunReport>) -> CheckResult {
    let base = Scenario {
        n: 50,
        t_horizon: 5,
        d: 1,
        t_sim: 20,
        worker_count: exec.worker_count(),
        ..Scenario::default()
    };
    let seq = run_scenario(&base.with_strategy(StrategyKind::Sequential), exec, false)
        .map_err(|e| e.message)?;
    let patch = run_scenario(&base.with_strategy(StrategyKind::PatchLocal), exec, false)
        .map_err(|e| e.message)?;
    let (ts, tp) = (seq.phase_times_ms.optimize, patch.phase_times_ms.optimize);
    let ratio = ts / tp;
    runs.push(seq);
    runs.push(patch);
    let threads = available_threads();
    let detail = format!(
        "optimize sequential {ts:.1} ms, patch-local {tp:.1} ms, speedup {ratio:.2}x \
         ({} workers, {threads} hardware threads)",
        exec.worker_count()
    );
    if threads < SPEEDUP_MIN_THREADS {
        return Ok((
            Status::Skip,
            format!("{detail}; needs >= {SPEEDUP_MIN_THREADS} hardware threads"),
        ));
    }
    pass_if(tp < ts, detail)
}

fn check_ledgers(runs: &[RunReport]) -> CheckResult {
    for r in runs {
        let k = r.scenario.strategy;
        let l = &r.ledger;
        let ok = l.exact
            && l.host_syncs_per_iter == k.host_syncs_per_iter()
            && l.kernel_launches_per_iter == k.kernel_launches_per_iter()
            && l.flag_reads_per_iter == k.flag_reads_per_iter()
            && l.iterations == r.iters_total;
        if !ok {
            return Err(format!("{k} N={} seed {}: {l:?}", r.scenario.n, r.scenario.seed));
        }
    }
    let table: Vec<String> = StrategyKind::ALL
        .iter()
        .map(|k| format!("{k} {}", k.host_syncs_per_iter()))
        .collect();
    pass_if(
        !runs.is_empty(),
        format!("{} runs exact; host syncs/iter: {}", runs.len(), table.join(", ")),
    )
}
