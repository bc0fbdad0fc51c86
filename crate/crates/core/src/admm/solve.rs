use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::exec::{Scheduler, Stages};
use crate::mask::LocalityMask;
use crate::sls::{ColumnPrecomp, PhiTriple, ProblemSpec, RowPrecomp};

/// ADMM iterate after a solve.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmmState {
    pub triple: PhiTriple,
    pub iter: usize,
    /// `(primal, dual)` residual after each iteration.
    pub residual_history: Vec<(f64, f64)>,
    pub converged: bool,
}

/// Iterates Φ-step, Ψ-step, dual update and convergence check under the
/// scheduler's strategy, starting from `triple`, until both residuals are
/// within tolerance.
pub fn admm_solve(
    rows: &[RowPrecomp],
    cols: &[ColumnPrecomp],
    mask: &LocalityMask,
    spec: &ProblemSpec,
    triple: PhiTriple,
    scheduler: &mut Scheduler<'_>,
) -> Result<AdmmState> {
    if rows.len() != mask.n_rows() || cols.len() != mask.n_cols() {
        return Err(Error::arg("precomputations do not match the mask"));
    }
    let stages = Stages {
        mask,
        rows,
        cols,
        rho: spec.rho,
        eps_pri: spec.eps_pri,
        eps_dual: spec.eps_dual,
    };
    scheduler.prepare_step(&stages);
    let mut state = AdmmState {
        triple,
        iter: 0,
        residual_history: Vec::new(),
        converged: false,
    };
    while state.iter < spec.max_iters {
        let conv = scheduler.run_iteration(&stages, &mut state.triple);
        state.iter += 1;
        state.residual_history.push((conv.pri, conv.dual));
        if conv.converged {
            state.converged = true;
            return Ok(state);
        }
    }
    Err(Error::NotConverged {
        iters: state.iter,
        history: state.residual_history,
    })
}
