use alloc::vec::Vec;

use super::operator::DynamicsOperator;
use super::spec::{ProblemSpec, RowMeta};
use crate::error::{Error, Result};
use crate::linalg::{dot, AffineProjector};
use crate::mask::LocalityMask;

/// Relative pivot threshold for dropping dependent constraint rows.
pub const RANK_TOL: f64 = 1e-10;
/// Allowed violation of a dropped row, relative to `max(1, ‖rhs‖∞)`.
pub const CONSISTENCY_TOL: f64 = 1e-9;

/// Column-step data: the dynamics constraints restricted to one column's
/// support, factored once per MPC session.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnPrecomp {
    pub column: usize,
    /// Rows of `Φ` permitted in this column, ascending.
    pub support: Vec<usize>,
    /// Operator rows that touch the support.
    pub constraint_rows: Vec<usize>,
    /// `|constraint_rows| × |support|`, row-major.
    pub g: Vec<f64>,
    pub rhs: Vec<f64>,
    pub projector: AffineProjector,
}

impl ColumnPrecomp {
    /// `‖G ψ − rhs‖∞`.
    pub fn constraint_residual(&self, psi: &[f64]) -> f64 {
        let n = self.support.len();
        self.g
            .chunks_exact(n.max(1))
            .zip(&self.rhs)
            .map(|(row, b)| libm::fabs(dot(row, psi) - b))
            .fold(0.0, f64::max)
    }
}

pub fn precompute_column_solvers(
    op: &DynamicsOperator,
    mask: &LocalityMask,
) -> Result<Vec<ColumnPrecomp>> {
    if op.n_phi_rows() != mask.n_rows() || op.n_states() != mask.n_cols() {
        return Err(Error::arg("operator and mask dimensions differ"));
    }
    (0..mask.n_cols())
        .map(|c| column_precomp(op, mask, c))
        .collect()
}

fn column_precomp(op: &DynamicsOperator, mask: &LocalityMask, c: usize) -> Result<ColumnPrecomp> {
    let support = mask.col_support(c).to_vec();
    let n = support.len();
    let mut constraint_rows = Vec::new();
    let mut g = Vec::new();
    let mut rhs = Vec::new();
    for k in 0..op.len() {
        let mut row = alloc::vec![0.0; n];
        let mut touched = false;
        for &(r, coeff) in op.row(k) {
            if let Ok(pos) = support.binary_search(&r) {
                row[pos] = coeff;
                touched = true;
            }
        }
        let b = op.rhs(k, c);
        if !touched {
            if b != 0.0 {
                return Err(Error::LocalityInfeasible { column: c });
            }
            continue;
        }
        constraint_rows.push(k);
        g.extend(row);
        rhs.push(b);
    }
    let projector =
        AffineProjector::new(&g, &rhs, rhs.len(), n, RANK_TOL, CONSISTENCY_TOL)
            .map_err(|_| Error::LocalityInfeasible { column: c })?;
    Ok(ColumnPrecomp {
        column: c,
        support,
        constraint_rows,
        g,
        rhs,
        projector,
    })
}

/// Row-step data for one MPC step: the measured state restricted to the
/// row's support together with the row's weight and bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct RowPrecomp {
    pub row: usize,
    /// `x(τ)` restricted to the row support.
    pub a: Vec<f64>,
    pub a_dot_a: f64,
    pub q: f64,
    pub lo: f64,
    pub hi: f64,
    pub rho: f64,
}

impl RowPrecomp {
    /// Fails with [`Error::RowInfeasible`] when `a = 0` and the bounds exclude 0.
    pub fn new(row: usize, a: Vec<f64>, q: f64, lo: f64, hi: f64, rho: f64) -> Result<Self> {
        let a_dot_a = dot(&a, &a);
        if a_dot_a == 0.0 && !(lo <= 0.0 && 0.0 <= hi) {
            return Err(Error::RowInfeasible { row, lo, hi });
        }
        Ok(Self {
            row,
            a,
            a_dot_a,
            q,
            lo,
            hi,
            rho,
        })
    }
}

pub fn precompute_row_data(
    x_tau: &[f64],
    spec: &ProblemSpec,
    mask: &LocalityMask,
    meta: &[RowMeta],
) -> Result<Vec<RowPrecomp>> {
    if x_tau.len() != mask.n_cols() {
        return Err(Error::arg("x(τ) length does not match the number of columns"));
    }
    if meta.len() != mask.n_rows() {
        return Err(Error::arg("row metadata does not match the mask"));
    }
    meta.iter()
        .enumerate()
        .map(|(r, m)| {
            let a = mask.row_support(r).iter().map(|&c| x_tau[c]).collect();
            RowPrecomp::new(r, a, m.weight, m.bounds.lo, m.bounds.hi, spec.rho)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mask::{build_locality_mask, LocalityMask};
    use crate::sls::operator::build_dynamics_operator;
    use crate::sls::rows::row_index_map;
    use crate::sls::spec::Bounds;
    use crate::system::{build_chain_network, ChainConfig};
    use alloc::vec;
    use rand::{Rng, SeedableRng};

    fn chain(n: usize, d: usize, t: usize) -> (DynamicsOperator, LocalityMask) {
        let sys = build_chain_network(n, &ChainConfig::default()).unwrap();
        (
            build_dynamics_operator(&sys, t).unwrap(),
            build_locality_mask(&sys, d, t).unwrap(),
        )
    }

    #[test]
    fn full_mask_is_feasible() {
        for n in 1..5 {
            let (op, mask) = chain(n, n, 4);
            let cols = precompute_column_solvers(&op, &mask).unwrap();
            assert_eq!(cols.len(), 2 * n);
            for col in &cols {
                // dense full support: every operator row is kept and G has full row rank
                assert_eq!(col.constraint_rows.len(), op.len());
                assert_eq!(col.projector.rank(), op.len());
            }
        }
    }

    #[test]
    fn self_only_mask_is_infeasible_on_coupled_chain() {
        let (op, mask) = chain(3, 0, 3);
        assert!(matches!(
            precompute_column_solvers(&op, &mask),
            Err(Error::LocalityInfeasible { .. })
        ));
    }

    #[test]
    fn single_subsystem_any_radius() {
        for d in 0..3 {
            let (op, mask) = chain(1, d, 3);
            let cols = precompute_column_solvers(&op, &mask).unwrap();
            let mut out = vec![0.0; cols[0].support.len()];
            cols[0].projector.apply(&vec![0.0; out.len()].clone(), &mut out);
            assert!(cols[0].constraint_residual(&out) < 1e-12);
        }
    }

    #[test]
    fn projector_hits_constraints_for_random_inputs() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for (n, d, t) in [(4, 1, 3), (6, 2, 5), (5, 1, 4), (10, 2, 5)] {
            let (op, mask) = chain(n, d, t);
            let cols = precompute_column_solvers(&op, &mask).unwrap();
            for col in &cols {
                let k: Vec<f64> = (0..col.support.len())
                    .map(|_| rng.random_range(-5.0..5.0))
                    .collect();
                let mut out = vec![0.0; k.len()];
                col.projector.apply(&k, &mut out);
                assert!(col.constraint_residual(&out) <= 1e-10);
                // entries outside the support are zero, so the full operator holds too
                let value = |r: usize| {
                    col.support
                        .binary_search(&r)
                        .map_or(0.0, |p| out[p])
                };
                assert!(op.column_residual(col.column, value) <= 1e-10);
            }
        }
    }

    #[test]
    fn row_data_restricts_state() {
        let mask = LocalityMask::from_row_supports(3, 0, &[vec![0, 2]]).unwrap();
        let spec = ProblemSpec::new(3, 0, 2).unwrap();
        let meta = vec![RowMeta {
            signal: row_index_map(
                &crate::system::SubsystemPartition::from_sizes(&[3], &[0]).unwrap(),
                2,
            )
            .unwrap()[0],
            weight: 1.0,
            bounds: Bounds::FREE,
        }];
        let rows = precompute_row_data(&[3.0, 9.0, 4.0], &spec, &mask, &meta).unwrap();
        assert_eq!(rows[0].a, vec![3.0, 4.0]);
        assert_eq!(rows[0].a_dot_a, 25.0);
    }

    #[test]
    fn zero_state_gives_zero_rows() {
        let sys = build_chain_network(3, &ChainConfig::default()).unwrap();
        let mask = build_locality_mask(&sys, 1, 3).unwrap();
        let spec = ProblemSpec::benchmark(sys.partition(), 3).unwrap();
        let meta = spec.row_meta(&row_index_map(sys.partition(), 3).unwrap());
        let rows = precompute_row_data(&[0.0; 6], &spec, &mask, &meta).unwrap();
        assert!(rows.iter().all(|r| r.a_dot_a == 0.0 && r.a.iter().all(|v| *v == 0.0)));
        // benchmark weights: zero on the measured block, one elsewhere
        assert!(rows.iter().all(|r| r.q == if r.row < 6 { 0.0 } else { 1.0 }));
    }

    #[test]
    fn zero_row_outside_bounds_is_infeasible() {
        assert!(matches!(
            RowPrecomp::new(4, vec![0.0, 0.0], 1.0, 0.5, 1.0, 1.0),
            Err(Error::RowInfeasible { row: 4, .. })
        ));
        assert!(RowPrecomp::new(4, vec![0.0], 1.0, -1.0, 1.0, 1.0).is_ok());
    }
}
