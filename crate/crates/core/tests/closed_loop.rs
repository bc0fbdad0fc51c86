mod common;

use common::{bench, sample_x0};
use locality_mpc::mask::longest_vector_lengths;
use locality_mpc::{
    build_chain_network, build_locality_mask, closed_loop_cost, dlmpc_simulate, lemma1_bounds,
    oracle_simulate, ChainConfig, Inline, NoClock, SimConfig, StrategyKind,
};

#[test]
fn benchmark_respects_state_bounds() {
    let b = bench(10, 5, 2);
    for seed in 0..3 {
        let x0 = sample_x0(10, seed);
        let mut cfg = SimConfig::new(20, StrategyKind::Fused);
        cfg.audit = true;
        let (traj, rep) = dlmpc_simulate(&b.sys, &b.spec, &b.mask, &x0, &cfg, &Inline, &NoClock)
            .unwrap();
        for x in &traj.states {
            for v in x.iter().step_by(2) {
                assert!((-0.2 - 1e-6..=1.2 + 1e-6).contains(v), "x = {v}");
            }
        }
        assert!(rep.max_prediction_violation <= 1e-6);
        let tol = 10.0 * b.spec.eps_pri;
        assert!(rep.audits.iter().all(|a| a.passes(tol)), "{:?}", rep.audits);
    }
}

#[test]
fn converged_residuals_are_within_tolerance() {
    let b = bench(3, 3, 1);
    let x0 = sample_x0(3, 5);
    let cfg = SimConfig::new(5, StrategyKind::PatchLocal);
    let (_, rep) = dlmpc_simulate(&b.sys, &b.spec, &b.mask, &x0, &cfg, &Inline, &NoClock).unwrap();
    for h in &rep.residual_histories {
        let &(pri, dual) = h.last().unwrap();
        assert!(pri <= 1e-4 && dual <= 1e-4);
    }
}

#[test]
fn warm_start_saves_iterations() {
    let b = bench(6, 4, 1);
    let x0 = sample_x0(6, 8);
    let warm = SimConfig::new(10, StrategyKind::Sequential);
    let cold = SimConfig { cold_start: true, ..warm };
    let (tw, _) = dlmpc_simulate(&b.sys, &b.spec, &b.mask, &x0, &warm, &Inline, &NoClock).unwrap();
    let (tc, _) = dlmpc_simulate(&b.sys, &b.spec, &b.mask, &x0, &cold, &Inline, &NoClock).unwrap();
    assert_eq!(tw.iters[0], tc.iters[0]);
    assert!(tw.iters.iter().sum::<usize>() < tc.iters.iter().sum::<usize>());
    let (cw, cc) = (closed_loop_cost(&tw, &b.spec), closed_loop_cost(&tc, &b.spec));
    assert!((cw - cc).abs() / cc.max(1.0) < 1e-3);
}

#[test]
fn matches_kkt_oracle_without_bounds() {
    for (n, t, d) in [(2, 3, 1), (3, 4, 2)] {
        let b = bench(n, t, d);
        let mut spec = b.spec.clone().without_bounds();
        spec.eps_pri = 1e-6;
        spec.eps_dual = 1e-6;
        let x0 = sample_x0(n, 40 + n as u64);
        let cfg = SimConfig::new(10, StrategyKind::Sequential);
        let (traj, _) = dlmpc_simulate(&b.sys, &spec, &b.mask, &x0, &cfg, &Inline, &NoClock)
            .unwrap();
        let oracle = oracle_simulate(&b.sys, &spec, &b.mask, &x0, 10).unwrap();
        let (ca, co) = (closed_loop_cost(&traj, &spec), closed_loop_cost(&oracle, &spec));
        assert!((ca - co).abs() / co.max(1.0) <= 1e-4, "{ca} vs {co}");
    }
}

#[test]
fn lemma1_bounds_hold_on_chains() {
    for n in 3..=50 {
        let sys = build_chain_network(n, &ChainConfig::default()).unwrap();
        for d in 0..=4u32 {
            for t in 2..=10u64 {
                let mask = build_locality_mask(&sys, d as usize, t as usize).unwrap();
                let (d_row, d_col) = longest_vector_lengths(&mask);
                let (row_bound, col_bound) = lemma1_bounds(2, 2, d, t);
                assert!(d_row as u64 <= row_bound, "N={n} d={d} T={t}");
                assert!(d_col as u64 <= col_bound, "N={n} d={d} T={t}");
            }
        }
    }
}
