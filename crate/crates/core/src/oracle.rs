//! Reference solutions for instances without box bounds, by a direct dense
//! KKT solve that shares no code with the ADMM path.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::admm::{extract_control, step_dynamics, Trajectory};
use crate::error::{Error, Result};
use crate::mask::LocalityMask;
use crate::sls::{build_dynamics_operator, row_index_map, PhiTriple, ProblemSpec};
use crate::system::LtiSystem;

/// Proximal weight added to the Hessian. It selects the minimum-norm `Φ`
/// among cost-equivalent ones without measurably moving the cost.
pub const ORACLE_REGULARIZATION: f64 = 1e-8;

/// Largest support the dense solve accepts.
pub const ORACLE_MAX_ENTRIES: usize = 4000;

/// Minimizes `Σ_r q_r (φ_r · x_τ)²` over `Φ` supported on `mask` subject to
/// the dynamics constraints. All bounds must be infinite.
///
/// Returns the solution as a triple with `Φ = Ψ` and `Λ = 0`.
pub fn kkt_oracle_equality(
    spec: &ProblemSpec,
    sys: &LtiSystem,
    mask: &LocalityMask,
    x_tau: &[f64],
) -> Result<PhiTriple> {
    if !spec.all_bounds_free() {
        return Err(Error::arg("the KKT oracle needs all bounds infinite"));
    }
    if x_tau.len() != sys.n_states() {
        return Err(Error::arg("x(τ) length does not match the number of states"));
    }
    let n = mask.nnz();
    if n > ORACLE_MAX_ENTRIES {
        return Err(Error::arg(format!(
            "support has {n} entries; the dense oracle accepts at most {ORACLE_MAX_ENTRIES}"
        )));
    }
    let horizon = spec.horizon();
    let meta = spec.row_meta(&row_index_map(sys.partition(), horizon)?);
    let op = build_dynamics_operator(sys, horizon)?;

    // variable index of entry (r, c): its position in row-major support order
    let mut row_start = Vec::with_capacity(mask.n_rows() + 1);
    row_start.push(0);
    for r in 0..mask.n_rows() {
        row_start.push(row_start[r] + mask.row_len(r));
    }
    let var = |r: usize, c: usize| -> Option<usize> {
        mask.row_support(r)
            .binary_search(&c)
            .ok()
            .map(|k| row_start[r] + k)
    };

    // equality constraints, dropping rows that are linear combinations of
    // earlier ones (Gram–Schmidt with one re-orthogonalization)
    let mut a_rows: Vec<Vec<f64>> = Vec::new();
    let mut b: Vec<f64> = Vec::new();
    let mut all_rows: Vec<(Vec<(usize, f64)>, f64)> = Vec::new();
    for c in 0..mask.n_cols() {
        let mut basis: Vec<Vec<f64>> = Vec::new();
        for k in 0..op.len() {
            let entries: Vec<(usize, f64)> = op
                .row(k)
                .iter()
                .filter_map(|&(r, coeff)| var(r, c).map(|v| (v, coeff)))
                .collect();
            let rhs = op.rhs(k, c);
            if entries.is_empty() {
                if rhs != 0.0 {
                    return Err(Error::LocalityInfeasible { column: c });
                }
                continue;
            }
            let mut dense = vec![0.0; n];
            for &(v, coeff) in &entries {
                dense[v] = coeff;
            }
            let norm0 = norm(&dense);
            let mut w = dense.clone();
            for _ in 0..2 {
                for q in &basis {
                    let s = inner(q, &w);
                    for (wi, qi) in w.iter_mut().zip(q) {
                        *wi -= s * qi;
                    }
                }
            }
            let nw = norm(&w);
            all_rows.push((entries, rhs));
            if nw > 1e-10 * norm0 {
                w.iter_mut().for_each(|v| *v /= nw);
                basis.push(w);
                a_rows.push(dense);
                b.push(rhs);
            }
        }
    }

    let m = a_rows.len();
    let dim = n + m;
    let mut kkt = DMatrix::<f64>::zeros(dim, dim);
    for i in 0..n {
        kkt[(i, i)] = ORACLE_REGULARIZATION;
    }
    for (r, row_meta) in meta.iter().enumerate() {
        let q = row_meta.weight;
        if q == 0.0 {
            continue;
        }
        let sup = mask.row_support(r);
        for (i, &ci) in sup.iter().enumerate() {
            for (j, &cj) in sup.iter().enumerate() {
                kkt[(row_start[r] + i, row_start[r] + j)] += 2.0 * q * x_tau[ci] * x_tau[cj];
            }
        }
    }
    for (k, row) in a_rows.iter().enumerate() {
        for (v, &coeff) in row.iter().enumerate() {
            if coeff != 0.0 {
                kkt[(n + k, v)] = coeff;
                kkt[(v, n + k)] = coeff;
            }
        }
    }
    let mut rhs = DVector::<f64>::zeros(dim);
    for (k, &bk) in b.iter().enumerate() {
        rhs[n + k] = bk;
    }
    let sol = kkt
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::OracleFailure("singular KKT matrix".into()))?;

    let worst = all_rows
        .iter()
        .map(|(entries, bk)| {
            let lhs: f64 = entries.iter().map(|&(v, coeff)| coeff * sol[v]).sum();
            libm::fabs(lhs - bk)
        })
        .fold(0.0, f64::max);
    if worst.is_nan() || worst > 1e-7 {
        return Err(Error::OracleFailure(format!(
            "solution violates the dynamics by {worst:e}"
        )));
    }

    let mut triple = PhiTriple::zeros(mask);
    let d_row = mask.d_row();
    for r in 0..mask.n_rows() {
        for k in 0..mask.row_len(r) {
            let v = sol[row_start[r] + k];
            triple.phi.row[r * d_row + k] = v;
            triple.psi.row[r * d_row + k] = v;
        }
    }
    triple.phi.row_to_col(mask);
    triple.psi.row_to_col(mask);
    Ok(triple)
}

/// Closed loop driven by [`kkt_oracle_equality`] at every step.
pub fn oracle_simulate(
    sys: &LtiSystem,
    spec: &ProblemSpec,
    mask: &LocalityMask,
    x0: &[f64],
    t_sim: usize,
) -> Result<Trajectory> {
    let meta = spec.row_meta(&row_index_map(sys.partition(), spec.horizon())?);
    let mut traj = Trajectory {
        states: vec![x0.to_vec()],
        inputs: Vec::new(),
        iters: Vec::new(),
    };
    for step in 0..t_sim {
        let x = traj.states[step].clone();
        let triple = kkt_oracle_equality(spec, sys, mask, &x).map_err(|e| e.at_step(step))?;
        let u = extract_control(&triple, mask, &x, &meta);
        traj.states.push(step_dynamics(sys, &x, &u)?);
        traj.inputs.push(u);
        traj.iters.push(1);
    }
    Ok(traj)
}

fn inner(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    libm::sqrt(inner(a, a))
}
