use alloc::vec::Vec;
use core::time::Duration;

use super::solve::admm_solve;
use super::verify::{prediction_violation, verify_fixed_point, FixedPointReport};
use crate::clock::Clock;
use crate::error::{Error, Result};
use crate::exec::{Executor, Scheduler, StrategyKind, SyncLedger};
use crate::mask::LocalityMask;
use crate::sls::{
    build_dynamics_operator, precompute_column_solvers, precompute_row_data, row_index_map,
    PhiTriple, ProblemSpec, RowMeta, SignalKind,
};
use crate::system::LtiSystem;

/// Closed-loop states `x(0..=T_sim)` and inputs `u(0..T_sim)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: Vec<Vec<f64>>,
    pub inputs: Vec<Vec<f64>>,
    /// ADMM iterations spent at each step.
    pub iters: Vec<usize>,
}

/// Wall time per phase of a closed-loop run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PhaseTimes {
    /// Workspace and schedule construction.
    pub setup: Duration,
    /// Dynamics operator and column solvers, once per run.
    pub precompute_global: Duration,
    /// Row data, summed over steps.
    pub precompute_per_step: Duration,
    /// ADMM, summed over steps.
    pub optimize: Duration,
    /// Control extraction and plant update, summed over steps.
    pub dynamics: Duration,
}

impl PhaseTimes {
    pub fn total(&self) -> Duration {
        self.setup + self.precompute_global + self.precompute_per_step + self.optimize + self.dynamics
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    pub t_sim: usize,
    pub strategy: StrategyKind,
    /// Start every step's ADMM from zero instead of the previous solution.
    pub cold_start: bool,
    /// Run the fixed-point audit after every step (not timed).
    pub audit: bool,
}

impl SimConfig {
    pub fn new(t_sim: usize, strategy: StrategyKind) -> Self {
        Self {
            t_sim,
            strategy,
            cold_start: false,
            audit: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    pub strategy: StrategyKind,
    pub phases: PhaseTimes,
    pub per_step_iters: Vec<usize>,
    /// Residual history of every step's solve.
    pub residual_histories: Vec<Vec<(f64, f64)>>,
    pub ledger: SyncLedger,
    /// One entry per step when auditing.
    pub audits: Vec<FixedPointReport>,
    /// Largest bound violation of any predicted signal over all steps.
    pub max_prediction_violation: f64,
}

/// `u = Φ_u[0] x(τ)`, read from the row layout of `Φ`.
pub fn extract_control(
    triple: &PhiTriple,
    mask: &LocalityMask,
    x_tau: &[f64],
    row_meta: &[RowMeta],
) -> Vec<f64> {
    let d_row = mask.d_row();
    row_meta
        .iter()
        .enumerate()
        .filter(|(_, m)| m.signal.kind == SignalKind::Input && m.signal.time == 0)
        .map(|(r, _)| {
            let vals = &triple.phi.row[r * d_row..];
            mask.row_support(r)
                .iter()
                .zip(vals)
                .fold(0.0, |acc, (&c, v)| acc + v * x_tau[c])
        })
        .collect()
}

/// `x⁺ = A x + B u`.
pub fn step_dynamics(sys: &LtiSystem, x: &[f64], u: &[f64]) -> Result<Vec<f64>> {
    sys.step(x, u)
}

/// `Σ_t (xᵀQx + uᵀRu)` over the closed loop with the running weights, the
/// last state weighted by the terminal weights.
pub fn closed_loop_cost(traj: &Trajectory, spec: &ProblemSpec) -> f64 {
    let last = traj.states.len().saturating_sub(1);
    let mut cost = 0.0;
    for (t, x) in traj.states.iter().enumerate() {
        for (i, v) in x.iter().enumerate() {
            let w = if t == last && t > 0 {
                spec.state_weight(spec.horizon() - 1, i)
            } else {
                spec.running_state_weight(i)
            };
            cost += w * v * v;
        }
    }
    for u in &traj.inputs {
        for (j, v) in u.iter().enumerate() {
            cost += spec.running_input_weight(j) * v * v;
        }
    }
    cost
}

/// Runs `T_sim` receding-horizon steps from `x0`.
pub fn dlmpc_simulate(
    sys: &LtiSystem,
    spec: &ProblemSpec,
    mask: &LocalityMask,
    x0: &[f64],
    config: &SimConfig,
    exec: &dyn Executor,
    clock: &dyn Clock,
) -> Result<(Trajectory, SimReport)> {
    spec.validate()?;
    if x0.len() != sys.n_states() {
        return Err(Error::arg("x0 length does not match the number of states"));
    }
    if spec.n_states() != sys.n_states() || spec.n_inputs() != sys.n_inputs() {
        return Err(Error::arg("problem spec does not match the system"));
    }
    let horizon = spec.horizon();
    let mut phases = PhaseTimes::default();

    let start = clock.now();
    let meta = spec.row_meta(&row_index_map(sys.partition(), horizon)?);
    if meta.len() != mask.n_rows() || mask.n_cols() != sys.n_states() {
        return Err(Error::arg("locality mask does not match the system and horizon"));
    }
    let mut scheduler = Scheduler::new(config.strategy, mask, exec, clock);
    let mut triple = PhiTriple::zeros(mask);
    phases.setup = clock.since(start);

    let start = clock.now();
    let op = build_dynamics_operator(sys, horizon)?;
    let cols = precompute_column_solvers(&op, mask)?;
    phases.precompute_global = clock.since(start);

    let mut traj = Trajectory {
        states: Vec::with_capacity(config.t_sim + 1),
        inputs: Vec::with_capacity(config.t_sim),
        iters: Vec::with_capacity(config.t_sim),
    };
    traj.states.push(x0.to_vec());
    let mut histories = Vec::with_capacity(config.t_sim);
    let mut audits = Vec::new();
    let mut violation: f64 = 0.0;

    for step in 0..config.t_sim {
        let x = traj.states[step].clone();

        let start = clock.now();
        let rows = precompute_row_data(&x, spec, mask, &meta).map_err(|e| e.at_step(step))?;
        phases.precompute_per_step += clock.since(start);

        if config.cold_start {
            triple = PhiTriple::zeros(mask);
        }
        let start = clock.now();
        let state = admm_solve(&rows, &cols, mask, spec, triple, &mut scheduler)
            .map_err(|e| e.at_step(step))?;
        phases.optimize += clock.since(start);

        if config.audit {
            audits.push(verify_fixed_point(&state.triple, &rows, &op, mask));
        }
        violation = violation.max(prediction_violation(&state.triple, &rows, mask));

        let start = clock.now();
        let u = extract_control(&state.triple, mask, &x, &meta);
        let next = step_dynamics(sys, &x, &u)?;
        phases.dynamics += clock.since(start);

        traj.states.push(next);
        traj.inputs.push(u);
        traj.iters.push(state.iter);
        histories.push(state.residual_history);
        triple = state.triple;
    }

    let report = SimReport {
        strategy: config.strategy,
        phases,
        per_step_iters: traj.iters.clone(),
        residual_histories: histories,
        ledger: scheduler.ledger.clone(),
        audits,
        max_prediction_violation: violation,
    };
    Ok((traj, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Inline;
    use crate::mask::build_locality_mask;
    use crate::sls::Bounds;
    use crate::system::{build_chain_network, ChainConfig, SubsystemPartition};
    use crate::NoClock;
    use alloc::vec;

    #[test]
    fn control_is_a_dot_product() {
        let p = SubsystemPartition::from_sizes(&[2], &[1]).unwrap();
        let meta = ProblemSpec::new(2, 1, 2)
            .unwrap()
            .row_meta(&row_index_map(&p, 2).unwrap());
        let mask = LocalityMask::from_row_supports(2, 0, &vec![vec![0, 1]; 5]).unwrap();
        let mut t = PhiTriple::zeros(&mask);
        assert_eq!(extract_control(&t, &mask, &[3.0, 4.0], &meta), vec![0.0]);
        t.phi.row[4 * 2] = 1.0;
        t.phi.row[4 * 2 + 1] = 2.0;
        assert_eq!(extract_control(&t, &mask, &[3.0, 4.0], &meta), vec![11.0]);
        assert_eq!(extract_control(&t, &mask, &[0.0, 0.0], &meta), vec![0.0]);
    }

    #[test]
    fn step_examples() {
        let sys = build_chain_network(1, &ChainConfig::default()).unwrap();
        assert_eq!(step_dynamics(&sys, &[0.0, 0.0], &[0.0]).unwrap(), vec![0.0, 0.0]);
        let x = step_dynamics(&sys, &[1.0, 0.0], &[0.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] + 0.3).abs() < 1e-15);
        let sys = build_chain_network(2, &ChainConfig::default()).unwrap();
        let x = step_dynamics(&sys, &[0.0, 0.0, 1.0, 0.0], &[0.0, 0.0]).unwrap();
        assert!((x[0]).abs() < 1e-15 && (x[1] - 0.1).abs() < 1e-15);
    }

    #[test]
    fn cost_examples() {
        let mut spec = ProblemSpec::new(1, 1, 2).unwrap();
        spec.set_state_weight(0, 0, 1.0).unwrap();
        spec.set_terminal_weight(0, 1.0).unwrap();
        spec.set_input_weight(0, 0, 1.0).unwrap();
        let zero = Trajectory {
            states: vec![vec![0.0]; 3],
            inputs: vec![vec![0.0]; 2],
            iters: vec![1, 1],
        };
        assert_eq!(closed_loop_cost(&zero, &spec), 0.0);
        let ones = Trajectory {
            states: vec![vec![1.0]; 3],
            inputs: vec![vec![0.0]; 2],
            iters: vec![1, 1],
        };
        assert_eq!(closed_loop_cost(&ones, &spec), 3.0);
        let a = Trajectory {
            states: vec![vec![0.3], vec![-0.2], vec![0.1]],
            inputs: vec![vec![0.5], vec![-1.0]],
            iters: vec![1, 1],
        };
        let mut b = a.clone();
        b.states.iter_mut().flatten().for_each(|v| *v *= 2.0);
        b.inputs.iter_mut().flatten().for_each(|v| *v *= 2.0);
        let (ca, cb) = (closed_loop_cost(&a, &spec), closed_loop_cost(&b, &spec));
        assert!((cb - 4.0 * ca).abs() < 1e-12);
    }

    #[test]
    fn origin_stays_at_origin() {
        let sys = build_chain_network(4, &ChainConfig::default()).unwrap();
        let spec = ProblemSpec::benchmark(sys.partition(), 3).unwrap();
        let mask = build_locality_mask(&sys, 1, 3).unwrap();
        let cfg = SimConfig::new(5, StrategyKind::Sequential);
        let (traj, report) =
            dlmpc_simulate(&sys, &spec, &mask, &[0.0; 8], &cfg, &Inline, &NoClock).unwrap();
        assert!(traj.states.iter().flatten().all(|v| v.abs() <= 1e-9));
        assert_eq!(report.per_step_iters.len(), 5);
    }

    #[test]
    fn huge_tolerance_converges_at_once() {
        let sys = build_chain_network(3, &ChainConfig::default()).unwrap();
        let mut spec = ProblemSpec::benchmark(sys.partition(), 3).unwrap();
        spec.eps_pri = 1e6;
        spec.eps_dual = 1e6;
        let mask = build_locality_mask(&sys, 1, 3).unwrap();
        let cfg = SimConfig::new(1, StrategyKind::Sequential);
        let x0 = [0.5, 0.1, 0.2, -0.1, 0.9, 0.3];
        let (traj, _) = dlmpc_simulate(&sys, &spec, &mask, &x0, &cfg, &Inline, &NoClock).unwrap();
        assert_eq!(traj.iters, vec![1]);
    }

    #[test]
    fn infeasible_row_reports_step() {
        let sys = build_chain_network(1, &ChainConfig::default()).unwrap();
        let mut spec = ProblemSpec::benchmark(sys.partition(), 2).unwrap();
        spec.set_state_bounds(1, 0, Bounds::new(0.5, 1.0)).unwrap();
        let mask = build_locality_mask(&sys, 0, 2).unwrap();
        let cfg = SimConfig::new(1, StrategyKind::Sequential);
        let err = dlmpc_simulate(&sys, &spec, &mask, &[0.0, 0.0], &cfg, &Inline, &NoClock)
            .unwrap_err();
        assert!(matches!(err, Error::AtStep { step: 0, .. }));
        assert!(matches!(err.root(), Error::RowInfeasible { .. }));
    }

    #[test]
    fn iteration_cap_reports_history() {
        let sys = build_chain_network(3, &ChainConfig::default()).unwrap();
        let mut spec = ProblemSpec::benchmark(sys.partition(), 3).unwrap();
        spec.max_iters = 3;
        spec.eps_pri = 1e-14;
        spec.eps_dual = 1e-14;
        let mask = build_locality_mask(&sys, 1, 3).unwrap();
        let cfg = SimConfig::new(1, StrategyKind::Fused);
        let x0 = [0.5, 0.1, 0.2, -0.1, 0.9, 0.3];
        let err = dlmpc_simulate(&sys, &spec, &mask, &x0, &cfg, &Inline, &NoClock).unwrap_err();
        match err.root() {
            Error::NotConverged { iters, history } => {
                assert_eq!(*iters, 3);
                assert_eq!(history.len(), 3);
            }
            e => panic!("unexpected {e:?}"),
        }
    }
}
