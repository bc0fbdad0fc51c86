use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::system::SubsystemPartition;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SignalKind {
    State,
    Input,
}

/// What a row of `Φ` predicts: one state or input at one time block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RowSignal {
    pub kind: SignalKind,
    pub subsystem: usize,
    pub time: usize,
    /// Global state or input index.
    pub signal: usize,
}

/// Number of rows of `Φ`: `T` state blocks and `T - 1` input blocks.
pub fn phi_rows(n_states: usize, n_inputs: usize, horizon: usize) -> usize {
    n_states * horizon + n_inputs * horizon.saturating_sub(1)
}

/// Row index of state `i` at block `t`.
pub fn state_row(n_states: usize, t: usize, i: usize) -> usize {
    t * n_states + i
}

/// Row index of input `j` at block `t`.
pub fn input_row(n_states: usize, n_inputs: usize, horizon: usize, t: usize, j: usize) -> usize {
    n_states * horizon + t * n_inputs + j
}

/// Rows of `Φ` in their fixed order: all state blocks time-major, then all
/// input blocks time-major.
pub fn row_index_map(partition: &SubsystemPartition, horizon: usize) -> Result<Vec<RowSignal>> {
    if horizon < 2 {
        return Err(Error::arg("horizon must be at least 2"));
    }
    let nx = partition.n_states();
    let nu = partition.n_inputs();
    let mut rows = Vec::with_capacity(phi_rows(nx, nu, horizon));
    for t in 0..horizon {
        rows.extend((0..nx).map(|i| RowSignal {
            kind: SignalKind::State,
            subsystem: partition.state_owner(i),
            time: t,
            signal: i,
        }));
    }
    for t in 0..horizon - 1 {
        rows.extend((0..nu).map(|j| RowSignal {
            kind: SignalKind::Input,
            subsystem: partition.input_owner(j),
            time: t,
            signal: j,
        }));
    }
    Ok(rows)
}
