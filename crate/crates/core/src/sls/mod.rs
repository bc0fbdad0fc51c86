//! SLS decision-variable structure: row ordering of `Φ`, the dynamics
//! operator, problem data and the precomputations behind the ADMM closed
//! forms.

pub mod operator;
pub mod precomp;
pub mod rows;
pub mod spec;
pub mod triple;

pub use operator::{build_dynamics_operator, DynamicsOperator};
pub use precomp::{precompute_column_solvers, precompute_row_data, ColumnPrecomp, RowPrecomp};
pub use rows::{input_row, phi_rows, row_index_map, state_row, RowSignal, SignalKind};
pub use spec::{Bounds, ProblemSpec, RowMeta, DEFAULT_EPS, DEFAULT_MAX_ITERS, DEFAULT_RHO};
pub use triple::{DualLayout, PhiTriple};
