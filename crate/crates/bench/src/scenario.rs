use std::time::Instant;

use locality_mpc::sls::{DEFAULT_EPS, DEFAULT_MAX_ITERS, DEFAULT_RHO};
use locality_mpc::{
    build_chain_network, build_locality_mask, closed_loop_cost, dlmpc_simulate, ChainConfig,
    Error, Executor, ExecStrategy, ProblemSpec, SimConfig, StrategyKind,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::clock::{ms, WallClock};
use crate::report::{AuditSummary, ErrorRecord, LedgerReport, PhaseTimesMs, RunReport};

/// One closed-loop run of the chain benchmark.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "T")]
    pub t_horizon: usize,
    pub d: usize,
    pub t_sim: usize,
    pub seed: u64,
    #[serde(serialize_with = "ser_strategy")]
    pub strategy: StrategyKind,
    pub worker_count: usize,
    pub rho: f64,
    pub eps: f64,
    pub max_iter: usize,
    pub coupling_radius: usize,
}

fn ser_strategy<S: serde::Serializer>(k: &StrategyKind, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(k.name())
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            n: 10,
            t_horizon: 5,
            d: 2,
            t_sim: 20,
            seed: 1,
            strategy: StrategyKind::Sequential,
            worker_count: 1,
            rho: DEFAULT_RHO,
            eps: DEFAULT_EPS,
            max_iter: DEFAULT_MAX_ITERS,
            coupling_radius: 1,
        }
    }
}

impl Scenario {
    pub fn with_strategy(&self, strategy: StrategyKind) -> Self {
        let mut s = self.clone();
        s.strategy = strategy;
        s.worker_count = ExecStrategy::new(strategy, self.worker_count).worker_count;
        s
    }
}

/// Per subsystem: first state uniform in [0, 1], second in [−0.5, 0.5].
pub fn sample_x0(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .flat_map(|_| {
            let first = rng.random_range(0.0..=1.0);
            let second = rng.random_range(-0.5..=0.5);
            [first, second]
        })
        .collect()
}

/// Lower and upper limits on the first state of every subsystem.
pub const FIRST_STATE_BOUNDS: (f64, f64) = (-0.2, 1.2);

/// Builds the plant, runs the closed loop and summarizes it.
///
/// `audit` runs the fixed-point audit after every step (outside the timed
/// phases).
pub fn run_scenario(sc: &Scenario, exec: &dyn Executor, audit: bool) -> Result<RunReport, ErrorRecord> {
    let clock = WallClock::new();
    let wall = Instant::now();
    let t0 = Instant::now();
    let chain = ChainConfig {
        coupling_radius: sc.coupling_radius,
        ..ChainConfig::default()
    };
    let sys = build_chain_network(sc.n, &chain).map_err(|e| ErrorRecord::new(sc, &e))?;
    let mut spec =
        ProblemSpec::benchmark(sys.partition(), sc.t_horizon).map_err(|e| ErrorRecord::new(sc, &e))?;
    spec.rho = sc.rho;
    spec.eps_pri = sc.eps;
    spec.eps_dual = sc.eps;
    spec.max_iters = sc.max_iter;
    let mask = build_locality_mask(&sys, sc.d, sc.t_horizon).map_err(|e| ErrorRecord::new(sc, &e))?;
    let x0 = sample_x0(sc.n, sc.seed);
    let scenario_setup = t0.elapsed();

    let cfg = SimConfig {
        audit,
        ..SimConfig::new(sc.t_sim, sc.strategy)
    };
    let (traj, sim) = dlmpc_simulate(&sys, &spec, &mask, &x0, &cfg, exec, &clock)
        .map_err(|e| ErrorRecord::new(sc, &e))?;
    let total = wall.elapsed();

    let mut phases = PhaseTimesMs::from(&sim.phases);
    phases.setup += ms(scenario_setup);
    let (lo, hi) = traj
        .states
        .iter()
        .flat_map(|x| x.iter().step_by(2))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let tol = 10.0 * sc.eps;
    let audit = audit.then(|| AuditSummary::from_reports(&sim.audits, tol));
    Ok(RunReport {
        scenario: sc.with_strategy(sc.strategy),
        mean_step_ms: if sc.t_sim == 0 {
            0.0
        } else {
            (phases.precompute_per_step + phases.optimize + phases.dynamics) / sc.t_sim as f64
        },
        phase_times_ms: phases,
        total_wall_ms: ms(total),
        per_step_iters: sim.per_step_iters.clone(),
        iters_total: sim.per_step_iters.iter().sum::<usize>() as u64,
        final_residuals: sim
            .residual_histories
            .iter()
            .map(|h| h.last().map_or([0.0, 0.0], |&(p, d)| [p, d]))
            .collect(),
        residual_history: sim
            .residual_histories
            .iter()
            .map(|h| h.iter().map(|&(p, d)| [p, d]).collect())
            .collect(),
        ledger: LedgerReport::from(&sim.ledger),
        closed_loop_cost: closed_loop_cost(&traj, &spec),
        converged_all_steps: true,
        first_state_range: [lo, hi],
        bounds_satisfied: lo >= FIRST_STATE_BOUNDS.0 - 1e-6 && hi <= FIRST_STATE_BOUNDS.1 + 1e-6,
        max_prediction_violation: sim.max_prediction_violation,
        audit,
        states: traj.states,
        inputs: traj.inputs,
    })
}

/// Maps library errors onto the CLI's failure categories.
pub fn error_kind(e: &Error) -> &'static str {
    match e.root() {
        Error::InvalidArgument(_) => "invalid_argument",
        Error::LocalityInfeasible { .. } => "locality_infeasible",
        Error::RowInfeasible { .. } => "row_infeasible",
        Error::NotConverged { .. } => "not_converged",
        Error::OracleFailure(_) => "oracle_failure",
        Error::Invariant(_) | Error::AtStep { .. } => "internal",
    }
}
