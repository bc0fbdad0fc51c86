//! Interconnected LTI plant: subsystem partition, block-sparse dynamics and
//! the chain benchmark network.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use crate::error::{Error, Result};
use crate::graph::SubsystemGraph;

/// Assignment of global state and input indices to subsystems.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsystemPartition {
    state_ranges: Vec<Range<usize>>,
    input_ranges: Vec<Range<usize>>,
    state_owner: Vec<usize>,
    input_owner: Vec<usize>,
}

impl SubsystemPartition {
    /// Builds contiguous ranges from per-subsystem state and input counts.
    pub fn from_sizes(states: &[usize], inputs: &[usize]) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::arg("partition needs at least one subsystem"));
        }
        if states.len() != inputs.len() {
            return Err(Error::arg(format!(
                "{} state counts but {} input counts",
                states.len(),
                inputs.len()
            )));
        }
        if let Some(i) = states.iter().position(|&s| s == 0) {
            return Err(Error::arg(format!("subsystem {i} has no states")));
        }
        let (state_ranges, state_owner) = ranges(states);
        let (input_ranges, input_owner) = ranges(inputs);
        Ok(Self {
            state_ranges,
            input_ranges,
            state_owner,
            input_owner,
        })
    }

    pub fn subsystem_count(&self) -> usize {
        self.state_ranges.len()
    }

    pub fn n_states(&self) -> usize {
        self.state_owner.len()
    }

    pub fn n_inputs(&self) -> usize {
        self.input_owner.len()
    }

    pub fn state_range(&self, subsystem: usize) -> Range<usize> {
        self.state_ranges[subsystem].clone()
    }

    pub fn input_range(&self, subsystem: usize) -> Range<usize> {
        self.input_ranges[subsystem].clone()
    }

    pub fn state_owner(&self, state: usize) -> usize {
        self.state_owner[state]
    }

    pub fn input_owner(&self, input: usize) -> usize {
        self.input_owner[input]
    }

    /// Largest number of states or inputs held by a single subsystem.
    pub fn max_signals_per_subsystem(&self) -> usize {
        self.state_ranges
            .iter()
            .chain(&self.input_ranges)
            .map(|r| r.len())
            .max()
            .unwrap_or(0)
    }
}

fn ranges(sizes: &[usize]) -> (Vec<Range<usize>>, Vec<usize>) {
    let mut out = Vec::with_capacity(sizes.len());
    let mut owner = Vec::new();
    let mut start = 0;
    for (i, &s) in sizes.iter().enumerate() {
        out.push(start..start + s);
        owner.extend(core::iter::repeat_n(i, s));
        start += s;
    }
    (out, owner)
}

/// Compressed sparse row matrix with column indices sorted within each row.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds from `(row, col, value)` triplets. Duplicates are summed and
    /// exact zeros dropped.
    pub fn from_triplets(n_rows: usize, n_cols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut sorted: Vec<_> = triplets.to_vec();
        sorted.sort_by_key(|a| (a.0, a.1));
        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(sorted.len());
        for (r, c, v) in sorted {
            match merged.last_mut() {
                Some(last) if (last.0, last.1) == (r, c) => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        merged.retain(|e| e.2 != 0.0);
        let mut row_ptr = vec![0; n_rows + 1];
        for &(r, _, _) in &merged {
            row_ptr[r + 1] += 1;
        }
        for i in 0..n_rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        let col_idx = merged.iter().map(|e| e.1).collect();
        let values = merged.iter().map(|e| e.2).collect();
        Self {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Nonzeros of row `i` in ascending column order.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|&(c, _)| c == j).map_or(0.0, |(_, v)| v)
    }

    /// `y += M x`, accumulating each row in ascending column order.
    pub fn mul_add(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.n_rows) {
            let mut acc = 0.0;
            for (c, v) in self.row(i) {
                acc += v * x[c];
            }
            *yi += acc;
        }
    }
}

/// Dense block `(row subsystem, column subsystem)` in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub row: usize,
    pub col: usize,
    pub values: Vec<f64>,
}

impl Block {
    pub fn new(row: usize, col: usize, values: Vec<f64>) -> Self {
        Self { row, col, values }
    }
}

/// Discrete-time LTI plant `x⁺ = A x + B u` with block sparsity over the
/// subsystem graph.
#[derive(Debug, Clone, PartialEq)]
pub struct LtiSystem {
    partition: SubsystemPartition,
    graph: SubsystemGraph,
    a: SparseMatrix,
    b: SparseMatrix,
}

impl LtiSystem {
    /// Assembles the plant from dense blocks. The interconnection graph is the
    /// union of the off-diagonal nonzero blocks of `A` and `B`.
    pub fn from_blocks(
        partition: SubsystemPartition,
        a_blocks: &[Block],
        b_blocks: &[Block],
    ) -> Result<Self> {
        let n = partition.subsystem_count();
        let mut edges = BTreeSet::new();
        let mut a_trip = Vec::new();
        let mut b_trip = Vec::new();
        for (blocks, trip, is_b) in [(a_blocks, &mut a_trip, false), (b_blocks, &mut b_trip, true)]
        {
            for blk in blocks {
                if blk.row >= n || blk.col >= n {
                    return Err(Error::arg(format!(
                        "block ({}, {}) out of range for {n} subsystems",
                        blk.row, blk.col
                    )));
                }
                let rows = partition.state_range(blk.row);
                let cols = if is_b {
                    partition.input_range(blk.col)
                } else {
                    partition.state_range(blk.col)
                };
                if blk.values.len() != rows.len() * cols.len() {
                    return Err(Error::arg(format!(
                        "block ({}, {}) has {} values, expected {}x{}",
                        blk.row,
                        blk.col,
                        blk.values.len(),
                        rows.len(),
                        cols.len()
                    )));
                }
                let mut nonzero = false;
                for (k, &v) in blk.values.iter().enumerate() {
                    if v != 0.0 {
                        nonzero = true;
                        let r = rows.start + k / cols.len();
                        let c = cols.start + k % cols.len();
                        trip.push((r, c, v));
                    }
                }
                if nonzero && blk.row != blk.col {
                    edges.insert((blk.row.min(blk.col), blk.row.max(blk.col)));
                }
            }
        }
        let edges: Vec<_> = edges.into_iter().collect();
        let graph = SubsystemGraph::from_edges(n, &edges)?;
        let nx = partition.n_states();
        let nu = partition.n_inputs();
        Ok(Self {
            a: SparseMatrix::from_triplets(nx, nx, &a_trip),
            b: SparseMatrix::from_triplets(nx, nu, &b_trip),
            partition,
            graph,
        })
    }

    pub fn partition(&self) -> &SubsystemPartition {
        &self.partition
    }

    pub fn graph(&self) -> &SubsystemGraph {
        &self.graph
    }

    pub fn a(&self) -> &SparseMatrix {
        &self.a
    }

    pub fn b(&self) -> &SparseMatrix {
        &self.b
    }

    pub fn n_states(&self) -> usize {
        self.partition.n_states()
    }

    pub fn n_inputs(&self) -> usize {
        self.partition.n_inputs()
    }

    /// `A x + B u`, evaluated row by row over the sparse blocks.
    pub fn step(&self, x: &[f64], u: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n_states() || u.len() != self.n_inputs() {
            return Err(Error::arg(format!(
                "state/input lengths ({}, {}) do not match plant ({}, {})",
                x.len(),
                u.len(),
                self.n_states(),
                self.n_inputs()
            )));
        }
        let mut next = vec![0.0; self.n_states()];
        self.a.mul_add(x, &mut next);
        self.b.mul_add(u, &mut next);
        Ok(next)
    }
}

/// Input layout of the chain benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ChainInputs {
    /// One input per node acting on both states, `B_ii = [1; 1]`.
    #[default]
    Single,
    /// Two inputs per node, `B_ii = I₂`.
    Double,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainConfig {
    /// Chain distance up to which `A_ij` coupling blocks are present.
    pub coupling_radius: usize,
    pub inputs: ChainInputs,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            coupling_radius: 1,
            inputs: ChainInputs::Single,
        }
    }
}

pub const CHAIN_A_SELF: [f64; 4] = [1.0, 0.1, -0.3, 0.7];
pub const CHAIN_A_COUPLING: [f64; 4] = [0.0, 0.0, 0.1, 0.1];

/// Chain of `n` two-state subsystems.
pub fn build_chain_network(n: usize, config: &ChainConfig) -> Result<LtiSystem> {
    if n == 0 {
        return Err(Error::arg("chain needs at least one subsystem"));
    }
    let inputs_per_node = match config.inputs {
        ChainInputs::Single => 1,
        ChainInputs::Double => 2,
    };
    let partition = SubsystemPartition::from_sizes(&vec![2; n], &vec![inputs_per_node; n])?;
    let mut a_blocks = Vec::new();
    let mut b_blocks = Vec::new();
    for i in 0..n {
        a_blocks.push(Block::new(i, i, CHAIN_A_SELF.to_vec()));
        let lo = i.saturating_sub(config.coupling_radius);
        let hi = (i + config.coupling_radius).min(n - 1);
        for j in (lo..=hi).filter(|&j| j != i) {
            a_blocks.push(Block::new(i, j, CHAIN_A_COUPLING.to_vec()));
        }
        let b = match config.inputs {
            ChainInputs::Single => vec![1.0, 1.0],
            ChainInputs::Double => vec![1.0, 0.0, 0.0, 1.0],
        };
        b_blocks.push(Block::new(i, i, b));
    }
    LtiSystem::from_blocks(partition, &a_blocks, &b_blocks)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn block_nonzero(sys: &LtiSystem, bi: usize, bj: usize) -> bool {
        let p = sys.partition();
        p.state_range(bi)
            .any(|r| p.state_range(bj).any(|c| sys.a().get(r, c) != 0.0))
    }

    #[test]
    fn chain_of_three_block_pattern() {
        let sys = build_chain_network(3, &ChainConfig::default()).unwrap();
        let expected = [(0, 0), (1, 1), (2, 2), (0, 1), (1, 0), (1, 2), (2, 1)];
        for bi in 0..3 {
            for bj in 0..3 {
                assert_eq!(
                    block_nonzero(&sys, bi, bj),
                    expected.contains(&(bi, bj)),
                    "block ({bi}, {bj})"
                );
            }
        }
        assert_eq!(sys.graph().neighbors(1), &[0, 2]);
    }

    #[test]
    fn middle_node_coupling_blocks() {
        let sys = build_chain_network(3, &ChainConfig::default()).unwrap();
        // rows of node 1 (states 2, 3), columns of nodes 0 and 2
        for c0 in [0usize, 4] {
            assert_eq!(sys.a().get(2, c0), 0.0);
            assert_eq!(sys.a().get(2, c0 + 1), 0.0);
            assert_eq!(sys.a().get(3, c0), 0.1);
            assert_eq!(sys.a().get(3, c0 + 1), 0.1);
        }
    }

    #[test]
    fn single_node_has_no_coupling() {
        let sys = build_chain_network(1, &ChainConfig::default()).unwrap();
        assert_eq!(sys.a().nnz(), 4);
        assert_eq!(sys.graph().max_degree(), 0);
        assert_eq!(sys.n_inputs(), 1);
    }

    #[test]
    fn zero_nodes_rejected() {
        assert!(build_chain_network(0, &ChainConfig::default()).is_err());
    }

    #[test]
    fn wider_coupling_widens_graph() {
        let cfg = ChainConfig {
            coupling_radius: 2,
            ..Default::default()
        };
        let sys = build_chain_network(5, &cfg).unwrap();
        assert_eq!(sys.graph().neighbors(2), &[0, 1, 3, 4]);
    }

    #[test]
    fn double_input_layout() {
        let cfg = ChainConfig {
            inputs: ChainInputs::Double,
            ..Default::default()
        };
        let sys = build_chain_network(2, &cfg).unwrap();
        assert_eq!(sys.n_inputs(), 4);
        assert_eq!(sys.b().get(1, 1), 1.0);
        assert_eq!(sys.b().get(1, 0), 0.0);
    }

    #[test]
    fn step_isolated_node() {
        let sys = build_chain_network(1, &ChainConfig::default()).unwrap();
        assert_eq!(sys.step(&[1.0, 0.0], &[0.0]).unwrap(), vec![1.0, -0.3]);
    }

    #[test]
    fn step_coupling_into_first_node() {
        let sys = build_chain_network(2, &ChainConfig::default()).unwrap();
        let next = sys.step(&[0.0, 0.0, 1.0, 0.0], &[0.0, 0.0]).unwrap();
        assert_eq!(&next[..2], &[0.0, 0.1]);
        assert_eq!(&next[2..], &[1.0, -0.3]);
    }

    #[test]
    fn step_rejects_bad_lengths() {
        let sys = build_chain_network(2, &ChainConfig::default()).unwrap();
        assert!(sys.step(&[0.0; 3], &[0.0; 2]).is_err());
    }

    #[test]
    fn partition_ranges_cover_indices() {
        let p = SubsystemPartition::from_sizes(&[2, 1, 3], &[0, 2, 1]).unwrap();
        assert_eq!(p.n_states(), 6);
        assert_eq!(p.n_inputs(), 3);
        assert_eq!(p.state_range(2), 3..6);
        assert_eq!(p.input_range(0), 0..0);
        assert_eq!(p.state_owner(3), 2);
        assert_eq!(p.input_owner(1), 1);
        assert_eq!(p.max_signals_per_subsystem(), 3);
        assert!(SubsystemPartition::from_sizes(&[1, 0], &[0, 0]).is_err());
    }

    #[test]
    fn triplets_sum_duplicates_and_drop_zeros() {
        let m = SparseMatrix::from_triplets(2, 2, &[(0, 1, 1.0), (0, 1, 2.0), (1, 0, 0.0)]);
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.get(0, 1), 3.0);
    }
}
