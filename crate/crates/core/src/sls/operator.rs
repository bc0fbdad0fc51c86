use alloc::vec::Vec;

use super::rows::{input_row, phi_rows, state_row};
use crate::error::{Error, Result};
use crate::system::LtiSystem;

/// Finite-horizon achievability constraint on each column of `Φ`:
/// `Φ_x[0] = I` and `Φ_x[t] − A Φ_x[t−1] − B Φ_u[t−1] = 0` for `t ≥ 1`.
///
/// The same coefficients apply to every column; only the right-hand side
/// (a unit vector in block 0) depends on the column.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsOperator {
    n_states: usize,
    horizon: usize,
    n_phi_rows: usize,
    /// Per constraint row `t * n_states + i`: `(Φ row, coefficient)`,
    /// ascending by `Φ` row.
    rows: Vec<Vec<(usize, f64)>>,
}

impl DynamicsOperator {
    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Number of constraint rows, `N_x · T`.
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn n_phi_rows(&self) -> usize {
        self.n_phi_rows
    }

    pub fn row(&self, k: usize) -> &[(usize, f64)] {
        &self.rows[k]
    }

    /// Right-hand side of constraint row `k` for column `column`.
    pub fn rhs(&self, k: usize, column: usize) -> f64 {
        if k < self.n_states && k == column {
            1.0
        } else {
            0.0
        }
    }

    /// `max_k |(op Φ_col)_k − rhs_k|` for a column given as a dense lookup
    /// over `Φ` rows.
    pub fn column_residual(&self, column: usize, value: impl Fn(usize) -> f64) -> f64 {
        let mut worst = 0.0f64;
        for k in 0..self.rows.len() {
            let mut acc = 0.0;
            for &(r, coeff) in &self.rows[k] {
                acc += coeff * value(r);
            }
            worst = worst.max(libm::fabs(acc - self.rhs(k, column)));
        }
        worst
    }
}

pub fn build_dynamics_operator(sys: &LtiSystem, horizon: usize) -> Result<DynamicsOperator> {
    if horizon < 2 {
        return Err(Error::arg("horizon must be at least 2"));
    }
    let nx = sys.n_states();
    let nu = sys.n_inputs();
    let mut rows = Vec::with_capacity(nx * horizon);
    for i in 0..nx {
        rows.push(alloc::vec![(state_row(nx, 0, i), 1.0)]);
    }
    for t in 1..horizon {
        for i in 0..nx {
            let mut entries: Vec<(usize, f64)> = sys
                .a()
                .row(i)
                .map(|(j, v)| (state_row(nx, t - 1, j), -v))
                .collect();
            entries.push((state_row(nx, t, i), 1.0));
            entries.extend(
                sys.b()
                    .row(i)
                    .map(|(j, v)| (input_row(nx, nu, horizon, t - 1, j), -v)),
            );
            entries.sort_by_key(|e| e.0);
            rows.push(entries);
        }
    }
    Ok(DynamicsOperator {
        n_states: nx,
        horizon,
        n_phi_rows: phi_rows(nx, nu, horizon),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::{build_chain_network, Block, ChainConfig, SubsystemPartition};
    use alloc::vec;
    use rand::{Rng, SeedableRng};

    /// Dense Φ (rows × N_x) from the open-loop response with inputs
    /// `u_t = K_t x_t`, simulated column by column.
    fn closed_loop_phi(sys: &LtiSystem, t: usize, gains: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let nx = sys.n_states();
        let nu = sys.n_inputs();
        let mut phi = vec![vec![0.0; nx]; phi_rows(nx, nu, t)];
        for c in 0..nx {
            let mut x = vec![0.0; nx];
            x[c] = 1.0;
            for step in 0..t {
                for i in 0..nx {
                    phi[state_row(nx, step, i)][c] = x[i];
                }
                if step + 1 == t {
                    break;
                }
                let k = &gains[step];
                let u: Vec<f64> = (0..nu)
                    .map(|j| (0..nx).map(|i| k[j * nx + i] * x[i]).sum())
                    .collect();
                for j in 0..nu {
                    phi[input_row(nx, nu, t, step, j)][c] = u[j];
                }
                x = sys.step(&x, &u).unwrap();
            }
        }
        phi
    }

    #[test]
    fn decoupled_plant_horizon_two() {
        let p = SubsystemPartition::from_sizes(&[1, 1], &[1, 1]).unwrap();
        let sys = LtiSystem::from_blocks(p, &[], &[]).unwrap();
        let op = build_dynamics_operator(&sys, 2).unwrap();
        assert_eq!(op.len(), 4);
        assert_eq!(op.row(0), &[(0, 1.0)]);
        assert_eq!(op.row(2), &[(2, 1.0)]);
        assert_eq!(op.rhs(1, 1), 1.0);
        assert_eq!(op.rhs(2, 0), 0.0);
    }

    #[test]
    fn open_loop_response_is_feasible() {
        let sys = build_chain_network(3, &ChainConfig::default()).unwrap();
        let op = build_dynamics_operator(&sys, 2).unwrap();
        let phi = closed_loop_phi(&sys, 2, &[vec![0.0; 6 * 3]]);
        for c in 0..6 {
            assert_eq!(op.column_residual(c, |r| phi[r][c]), 0.0);
        }
    }

    #[test]
    fn chain_of_two_row_entries() {
        let sys = build_chain_network(2, &ChainConfig::default()).unwrap();
        let op = build_dynamics_operator(&sys, 3).unwrap();
        // second state of node 1 (global state 3) at t = 1
        let row = op.row(4 + 3);
        let expected = vec![
            (0, -0.1),           // Φ_x[0], node 0 state 0
            (1, -0.1),           // Φ_x[0], node 0 state 1
            (2, 0.3),            // Φ_x[0], node 1 state 0  (−A = +0.3)
            (3, -0.7),           // Φ_x[0], node 1 state 1
            (4 + 3, 1.0),        // Φ_x[1], node 1 state 1
            (12 + 1, -1.0),      // Φ_u[0], node 1 input
        ];
        assert_eq!(row.len(), expected.len());
        for ((r, v), (er, ev)) in row.iter().zip(&expected) {
            assert_eq!(r, er);
            assert!((v - ev).abs() < 1e-15);
        }
        // first state of node 1 at t = 1 does not couple to node 0
        assert!(op.row(4 + 2).iter().all(|&(r, _)| r == 2 || r == 3 || r == 6 || r == 13));
    }

    #[test]
    fn random_impulse_responses_satisfy_operator() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let n = rng.random_range(1..=6usize);
            let t = rng.random_range(2..=5usize);
            let p = SubsystemPartition::from_sizes(&vec![2; n], &vec![1; n]).unwrap();
            let mut a_blocks = Vec::new();
            let mut b_blocks = Vec::new();
            for i in 0..n {
                let blk = |rng: &mut rand_chacha::ChaCha8Rng, len| {
                    (0..len).map(|_| rng.random_range(-1.0..1.0)).collect()
                };
                a_blocks.push(Block::new(i, i, blk(&mut rng, 4)));
                if i + 1 < n {
                    a_blocks.push(Block::new(i, i + 1, blk(&mut rng, 4)));
                    a_blocks.push(Block::new(i + 1, i, blk(&mut rng, 4)));
                }
                b_blocks.push(Block::new(i, i, blk(&mut rng, 2)));
            }
            let sys = LtiSystem::from_blocks(p, &a_blocks, &b_blocks).unwrap();
            let nx = sys.n_states();
            let gains: Vec<Vec<f64>> = (0..t)
                .map(|_| (0..n * nx).map(|_| rng.random_range(-0.5..0.5)).collect())
                .collect();
            let phi = closed_loop_phi(&sys, t, &gains);
            let op = build_dynamics_operator(&sys, t).unwrap();
            for c in 0..nx {
                assert!(op.column_residual(c, |r| phi[r][c]) <= 1e-12);
            }
        }
    }
}
