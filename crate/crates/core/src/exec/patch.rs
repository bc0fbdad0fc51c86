use alloc::vec::Vec;

use crate::mask::LocalityMask;

/// The rows a column-patch work item recomputes so that one column's whole
/// iteration stays inside a single kernel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnPatch {
    pub column: usize,
    /// Rows permitted in the column, ascending.
    pub member_rows: Vec<usize>,
    /// Member rows whose canonical owner is this patch: the patch publishes
    /// their full Φ row. A row's owner is the smallest column in its support.
    pub owned_rows: Vec<usize>,
}

impl ColumnPatch {
    /// Patch-local workspace: one Φ value per member row, i.e. the patch's
    /// copy of its column of Φ.
    pub fn scratch_len(&self) -> usize {
        self.member_rows.len()
    }
}

pub fn build_patches(mask: &LocalityMask) -> Vec<ColumnPatch> {
    let mut owned = alloc::vec![Vec::new(); mask.n_cols()];
    for r in 0..mask.n_rows() {
        if let Some(&c) = mask.row_support(r).first() {
            owned[c].push(r);
        }
    }
    owned
        .into_iter()
        .enumerate()
        .map(|(c, owned_rows)| ColumnPatch {
            column: c,
            member_rows: mask.col_support(c).to_vec(),
            owned_rows,
        })
        .collect()
}

/// Row solves performed per iteration beyond one per distinct row:
/// `Σ_c |patch_c| − #rows with nonempty support`.
pub fn duplicated_rows_per_iter(patches: &[ColumnPatch], mask: &LocalityMask) -> u64 {
    let total: usize = patches.iter().map(|p| p.member_rows.len()).sum();
    let distinct = (0..mask.n_rows()).filter(|&r| mask.row_len(r) > 0).count();
    (total - distinct) as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mask::build_locality_mask;
    use crate::system::{build_chain_network, ChainConfig};
    use alloc::vec;
    use proptest::prelude::*;

    fn chain_mask(n: usize, d: usize, t: usize) -> LocalityMask {
        let sys = build_chain_network(n, &ChainConfig::default()).unwrap();
        build_locality_mask(&sys, d, t).unwrap()
    }

    #[test]
    fn diagonal_mask_has_no_duplication() {
        let supports: Vec<Vec<usize>> = (0..6).map(|r| vec![r % 3]).collect();
        let mask = LocalityMask::from_row_supports(3, 0, &supports).unwrap();
        let patches = build_patches(&mask);
        assert!(patches.iter().all(|p| p.member_rows.len() == 2));
        assert_eq!(duplicated_rows_per_iter(&patches, &mask), 0);
    }

    #[test]
    fn full_mask_duplicates_every_row() {
        let mask = chain_mask(3, 2, 3);
        let (r, c) = (mask.n_rows() as u64, mask.n_cols() as u64);
        let patches = build_patches(&mask);
        assert_eq!(duplicated_rows_per_iter(&patches, &mask), r * (c - 1));
        // owner of every row is column 0
        assert_eq!(patches[0].owned_rows.len() as u64, r);
    }

    #[test]
    fn chain_patch_sizes_match_column_counts() {
        let mask = chain_mask(3, 1, 2);
        let patches = build_patches(&mask);
        for (c, p) in patches.iter().enumerate() {
            let brute = (0..mask.n_rows()).filter(|&r| mask.contains(r, c)).count();
            assert_eq!(p.member_rows.len(), brute);
        }
        // rows of node 0 (at most 1 hop to node 1) and node 2 sit in 4 columns,
        // node 1's rows in all 6: 5 rows per node (2 + 2 states, 1 input)
        assert_eq!(duplicated_rows_per_iter(&patches, &mask), 5 * 3 + 5 * 5 + 5 * 3);
    }

    // Σ_c |patch_c| − n_rows ≤ n_cols·D_col − n_rows ≤ (D_col − 1)·n_rows
    // whenever there are at least as many rows as columns (always the case
    // for Φ). Equality needs square masks with every column at D_col.
    proptest! {
        #[test]
        fn duplication_bound(
            n_cols in 1usize..6,
            rows in proptest::collection::vec(proptest::collection::vec(0usize..6, 1..4), 1..10),
        ) {
            let supports: Vec<Vec<usize>> = rows
                .iter()
                .map(|s| s.iter().map(|c| c % n_cols).collect())
                .collect();
            let mask = LocalityMask::from_row_supports(n_cols, 0, &supports).unwrap();
            prop_assume!(mask.nnz() <= 50 && mask.n_rows() >= mask.n_cols());
            let patches = build_patches(&mask);
            let dup = duplicated_rows_per_iter(&patches, &mask);
            let brute: usize = (0..mask.n_rows()).map(|r| mask.row_len(r) - 1).sum();
            prop_assert_eq!(dup, brute as u64);
            let bound = (mask.d_col() as u64 - 1) * mask.n_rows() as u64;
            prop_assert!(dup <= bound);
            let tight = mask.n_rows() == mask.n_cols()
                && (0..mask.n_cols()).all(|c| mask.col_len(c) == mask.d_col());
            prop_assert_eq!(dup == bound, tight);
            let owners: usize = patches.iter().map(|p| p.owned_rows.len()).sum();
            prop_assert_eq!(owners, mask.n_rows());
            let mut covered = vec![false; mask.n_rows()];
            for p in &patches {
                prop_assert!(p.member_rows.len() <= mask.d_col());
                for &r in &p.member_rows { covered[r] = true; }
            }
            prop_assert!(covered.into_iter().all(|c| c));
        }
    }
}
