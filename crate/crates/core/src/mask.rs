//! d-hop locality support of `Φ` and its padded row/column layouts.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::sls::rows::row_index_map;
use crate::system::LtiSystem;

/// Marker for padded slots in the fixed-stride tables.
pub const PAD: usize = usize::MAX;

/// Sparsity pattern of `Φ` (`n_rows × n_cols`).
///
/// Supports are kept twice: compressed by row and by column. The padded
/// tables give every row `D_row` slots and every column `D_col` slots, with
/// real entries first (ascending) and [`PAD`] afterwards. Value arrays laid out
/// over those slots are what the ADMM iterates live in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalityMask {
    n_rows: usize,
    n_cols: usize,
    d: usize,
    row_ptr: Vec<usize>,
    row_cols: Vec<usize>,
    col_ptr: Vec<usize>,
    col_rows: Vec<usize>,
    d_row: usize,
    d_col: usize,
    row_pad: Vec<usize>,
    col_pad: Vec<usize>,
    row_to_col_slot: Vec<usize>,
    col_to_row_slot: Vec<usize>,
    entry_row_slot: Vec<usize>,
}

impl LocalityMask {
    /// Builds a mask from explicit row supports (column lists per row).
    pub fn from_row_supports(n_cols: usize, d: usize, supports: &[Vec<usize>]) -> Result<Self> {
        let n_rows = supports.len();
        let mut row_ptr = Vec::with_capacity(n_rows + 1);
        let mut row_cols = Vec::new();
        row_ptr.push(0);
        let mut col_count = vec![0usize; n_cols];
        for (r, sup) in supports.iter().enumerate() {
            let mut sup = sup.clone();
            sup.sort_unstable();
            sup.dedup();
            if let Some(&c) = sup.last().filter(|&&c| c >= n_cols) {
                return Err(Error::arg(format!(
                    "row {r} references column {c} >= {n_cols}"
                )));
            }
            for &c in &sup {
                col_count[c] += 1;
            }
            row_cols.extend(sup);
            row_ptr.push(row_cols.len());
        }
        let mut col_ptr = vec![0usize; n_cols + 1];
        for c in 0..n_cols {
            col_ptr[c + 1] = col_ptr[c] + col_count[c];
        }
        let mut fill = col_ptr.clone();
        let mut col_rows = vec![0usize; row_cols.len()];
        for r in 0..n_rows {
            for &c in &row_cols[row_ptr[r]..row_ptr[r + 1]] {
                col_rows[fill[c]] = r;
                fill[c] += 1;
            }
        }
        let d_row = (0..n_rows)
            .map(|r| row_ptr[r + 1] - row_ptr[r])
            .max()
            .unwrap_or(0);
        let d_col = (0..n_cols)
            .map(|c| col_ptr[c + 1] - col_ptr[c])
            .max()
            .unwrap_or(0);

        let mut row_pad = vec![PAD; n_rows * d_row];
        let mut col_pad = vec![PAD; n_cols * d_col];
        let mut row_to_col_slot = vec![PAD; n_rows * d_row];
        let mut col_to_row_slot = vec![PAD; n_cols * d_col];
        let mut entry_row_slot = Vec::with_capacity(row_cols.len());
        for r in 0..n_rows {
            for (k, &c) in row_cols[row_ptr[r]..row_ptr[r + 1]].iter().enumerate() {
                row_pad[r * d_row + k] = c;
                entry_row_slot.push(r * d_row + k);
            }
        }
        for c in 0..n_cols {
            for (k, &r) in col_rows[col_ptr[c]..col_ptr[c + 1]].iter().enumerate() {
                col_pad[c * d_col + k] = r;
                let row_span = &row_cols[row_ptr[r]..row_ptr[r + 1]];
                let pos = row_span
                    .binary_search(&c)
                    .map_err(|_| Error::Invariant("column support not mirrored in row support"))?;
                let rs = r * d_row + pos;
                let cs = c * d_col + k;
                row_to_col_slot[rs] = cs;
                col_to_row_slot[cs] = rs;
            }
        }
        Ok(Self {
            n_rows,
            n_cols,
            d,
            row_ptr,
            row_cols,
            col_ptr,
            col_rows,
            d_row,
            d_col,
            row_pad,
            col_pad,
            row_to_col_slot,
            col_to_row_slot,
            entry_row_slot,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    /// Hop radius the mask was built with.
    pub fn radius(&self) -> usize {
        self.d
    }

    /// Longest row support, `D_row`.
    pub fn d_row(&self) -> usize {
        self.d_row
    }

    /// Longest column support, `D_col`.
    pub fn d_col(&self) -> usize {
        self.d_col
    }

    pub fn nnz(&self) -> usize {
        self.row_cols.len()
    }

    /// Sorted permitted columns of row `r`.
    pub fn row_support(&self, r: usize) -> &[usize] {
        &self.row_cols[self.row_ptr[r]..self.row_ptr[r + 1]]
    }

    /// Sorted permitted rows of column `c`.
    pub fn col_support(&self, c: usize) -> &[usize] {
        &self.col_rows[self.col_ptr[c]..self.col_ptr[c + 1]]
    }

    pub fn row_len(&self, r: usize) -> usize {
        self.row_ptr[r + 1] - self.row_ptr[r]
    }

    pub fn col_len(&self, c: usize) -> usize {
        self.col_ptr[c + 1] - self.col_ptr[c]
    }

    pub fn contains(&self, r: usize, c: usize) -> bool {
        self.row_support(r).binary_search(&c).is_ok()
    }

    /// Column index per padded row slot (`n_rows × D_row`).
    pub fn row_pad(&self) -> &[usize] {
        &self.row_pad
    }

    /// Row index per padded column slot (`n_cols × D_col`).
    pub fn col_pad(&self) -> &[usize] {
        &self.col_pad
    }

    /// Column-layout slot holding the same entry as a row-layout slot.
    pub fn row_to_col_slot(&self) -> &[usize] {
        &self.row_to_col_slot
    }

    /// Row-layout slot holding the same entry as a column-layout slot.
    pub fn col_to_row_slot(&self) -> &[usize] {
        &self.col_to_row_slot
    }

    /// Row-layout slot of every support entry, in row-major entry order.
    pub fn entry_row_slots(&self) -> &[usize] {
        &self.entry_row_slot
    }

    /// Row supports rebuilt from the column-compressed copy.
    pub fn row_supports_from_columns(&self) -> Vec<Vec<usize>> {
        let mut rows = vec![Vec::new(); self.n_rows];
        for c in 0..self.n_cols {
            for &r in self.col_support(c) {
                rows[r].push(c);
            }
        }
        rows
    }
}

/// Permits `(r, c)` iff the subsystems owning row `r` and column `c` are at
/// most `d` hops apart.
pub fn build_locality_mask(sys: &LtiSystem, d: usize, horizon: usize) -> Result<LocalityMask> {
    let partition = sys.partition();
    let rows = row_index_map(partition, horizon)?;
    let n = partition.subsystem_count();
    // columns each subsystem may see, ascending
    let visible: Vec<Vec<usize>> = (0..n)
        .map(|s| {
            sys.graph()
                .neighborhood(s, d)
                .into_iter()
                .flat_map(|j| partition.state_range(j))
                .collect()
        })
        .collect();
    let supports: Vec<Vec<usize>> = rows.iter().map(|r| visible[r.subsystem].clone()).collect();
    LocalityMask::from_row_supports(partition.n_states(), d, &supports)
}

/// Longest row and column support lengths `(D_row, D_col)`.
pub fn longest_vector_lengths(mask: &LocalityMask) -> (usize, usize) {
    (mask.d_row(), mask.d_col())
}

/// Upper bounds on `(D_row, D_col)` for at most `s` signals per subsystem,
/// maximum degree `l`, radius `d` and horizon `T`:
/// `s·(1 + l + … + l^d)` and `(2T − 1)` times that.
pub fn lemma1_bounds(s: u64, l: u64, d: u32, horizon: u64) -> (u64, u64) {
    let mut nodes: u64 = 0;
    let mut term: u64 = 1;
    for _ in 0..=d {
        nodes = nodes.saturating_add(term);
        term = term.saturating_mul(l);
    }
    let row = s.saturating_mul(nodes);
    let col = (2 * horizon).saturating_sub(1).saturating_mul(row);
    (row, col)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::{build_chain_network, ChainConfig};

    fn chain_mask(n: usize, d: usize, t: usize) -> LocalityMask {
        let sys = build_chain_network(n, &ChainConfig::default()).unwrap();
        build_locality_mask(&sys, d, t).unwrap()
    }

    /// Support of every entry by direct graph distance.
    fn brute_force(n: usize, d: usize, t: usize) -> Vec<Vec<bool>> {
        let sys = build_chain_network(n, &ChainConfig::default()).unwrap();
        let rows = row_index_map(sys.partition(), t).unwrap();
        rows.iter()
            .map(|r| {
                (0..sys.n_states())
                    .map(|c| {
                        let owner = sys.partition().state_owner(c);
                        matches!(sys.graph().distance(r.subsystem, owner).unwrap(), Some(h) if h <= d)
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn full_mask_at_diameter() {
        let m = chain_mask(4, 3, 3);
        assert!((0..m.n_rows()).all(|r| m.row_len(r) == 8));
    }

    #[test]
    fn self_only_support() {
        let m = chain_mask(3, 0, 3);
        // row of state 2 (subsystem 1) at t=0
        assert_eq!(m.row_support(2), &[2, 3]);
        assert_eq!(longest_vector_lengths(&m).0, 2);
    }

    #[test]
    fn one_hop_chain_of_three() {
        let m = chain_mask(3, 1, 3);
        let brute = brute_force(3, 1, 3);
        for r in 0..m.n_rows() {
            let expected: Vec<usize> = (0..6).filter(|&c| brute[r][c]).collect();
            assert_eq!(m.row_support(r), &expected[..]);
        }
        assert_eq!(m.row_support(2), &[0, 1, 2, 3, 4, 5]);
        assert_eq!(m.row_support(0), &[0, 1, 2, 3]);
    }

    #[test]
    fn full_mask_longest_row() {
        let m = chain_mask(3, 5, 3);
        assert_eq!(m.d_row(), 6);
    }

    #[test]
    fn longest_column_matches_enumeration() {
        let (n, d, t) = (5, 1, 3);
        let m = chain_mask(n, d, t);
        let brute = brute_force(n, d, t);
        let col_max = (0..2 * n)
            .map(|c| brute.iter().filter(|row| row[c]).count())
            .max()
            .unwrap();
        let row_max = brute.iter().map(|row| row.iter().filter(|b| **b).count()).max().unwrap();
        assert_eq!(longest_vector_lengths(&m), (row_max, col_max));
        assert_eq!(col_max, 24);
    }

    #[test]
    fn diagonal_of_first_block_is_permitted() {
        let m = chain_mask(6, 0, 4);
        for c in 0..m.n_cols() {
            assert!(m.contains(c, c));
        }
    }

    #[test]
    fn slot_tables_are_inverse() {
        let m = chain_mask(5, 1, 3);
        for (rs, &cs) in m.row_to_col_slot().iter().enumerate() {
            if m.row_pad()[rs] == PAD {
                assert_eq!(cs, PAD);
            } else {
                assert_eq!(m.col_to_row_slot()[cs], rs);
                assert_eq!(m.col_pad()[cs], rs / m.d_row());
                assert_eq!(m.row_pad()[rs], cs / m.d_col());
            }
        }
        assert_eq!(m.entry_row_slots().len(), m.nnz());
    }

    #[test]
    fn lemma1_examples() {
        assert_eq!(lemma1_bounds(2, 2, 2, 5), (14, 126));
        assert_eq!(lemma1_bounds(1, 2, 0, 2), (1, 3));
        for (s, l, t) in [(1, 2, 2), (3, 5, 4), (2, 1, 3), (2, 0, 6)] {
            assert_eq!(lemma1_bounds(s, l, 0, t).0, s);
        }
        // degenerate degrees
        assert_eq!(lemma1_bounds(2, 1, 3, 2).0, 8);
        assert_eq!(lemma1_bounds(2, 0, 3, 2).0, 2);
    }

    #[test]
    fn lemma1_matches_closed_form() {
        for s in 1..4u64 {
            for l in 2..5u64 {
                for d in 0..5u32 {
                    let closed = s * (l.pow(d + 1) - 1) / (l - 1);
                    assert_eq!(lemma1_bounds(s, l, d, 3), (closed, 5 * closed));
                }
            }
        }
    }

    #[test]
    fn rejects_out_of_range_columns() {
        assert!(LocalityMask::from_row_supports(2, 0, &[vec![0, 2]]).is_err());
    }

    proptest::proptest! {
        #[test]
        fn column_copy_reconstructs_rows(n in 1usize..8, d in 0usize..4, t in 2usize..5) {
            let m = chain_mask(n, d, t);
            let rebuilt = m.row_supports_from_columns();
            for r in 0..m.n_rows() {
                proptest::prop_assert_eq!(&rebuilt[r][..], m.row_support(r));
            }
        }

        #[test]
        fn supports_grow_with_radius(n in 1usize..8, d in 0usize..4, t in 2usize..5) {
            let small = chain_mask(n, d, t);
            let large = chain_mask(n, d + 1, t);
            for r in 0..small.n_rows() {
                for &c in small.row_support(r) {
                    proptest::prop_assert!(large.contains(r, c));
                }
            }
        }
    }
}
