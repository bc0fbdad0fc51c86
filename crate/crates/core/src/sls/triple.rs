use alloc::vec;
use alloc::vec::Vec;

use crate::mask::{LocalityMask, PAD};

/// One iterate of `Φ` stored in both padded layouts of a [`LocalityMask`]:
/// `row` is `n_rows × D_row`, `col` is `n_cols × D_col`. Padding is 0.0.
#[derive(Debug, Clone, PartialEq)]
pub struct DualLayout {
    pub row: Vec<f64>,
    pub col: Vec<f64>,
}

impl DualLayout {
    pub fn zeros(mask: &LocalityMask) -> Self {
        Self {
            row: vec![0.0; mask.n_rows() * mask.d_row()],
            col: vec![0.0; mask.n_cols() * mask.d_col()],
        }
    }

    /// Copies every support entry from the row layout into the column layout.
    pub fn row_to_col(&mut self, mask: &LocalityMask) {
        for (cs, &rs) in mask.col_to_row_slot().iter().enumerate() {
            if rs != PAD {
                self.col[cs] = self.row[rs];
            }
        }
    }

    /// Copies every support entry from the column layout into the row layout.
    pub fn col_to_row(&mut self, mask: &LocalityMask) {
        for (rs, &cs) in mask.row_to_col_slot().iter().enumerate() {
            if cs != PAD {
                self.row[rs] = self.col[cs];
            }
        }
    }

    /// Both layouts hold bitwise-identical support values.
    pub fn layouts_agree(&self, mask: &LocalityMask) -> bool {
        mask.row_to_col_slot()
            .iter()
            .enumerate()
            .filter(|(_, &cs)| cs != PAD)
            .all(|(rs, &cs)| self.row[rs].to_bits() == self.col[cs].to_bits())
    }

    /// Every padded slot in both layouts is exactly zero.
    pub fn padding_is_zero(&self, mask: &LocalityMask) -> bool {
        let zero = |vals: &[f64], idx: &[usize]| {
            vals.iter()
                .zip(idx)
                .filter(|(_, &i)| i == PAD)
                .all(|(v, _)| v.to_bits() == 0)
        };
        zero(&self.row, mask.row_pad()) && zero(&self.col, mask.col_pad())
    }

    /// Dense `(row, column)` lookup through the row layout.
    pub fn get(&self, mask: &LocalityMask, r: usize, c: usize) -> f64 {
        mask.row_support(r)
            .binary_search(&c)
            .map_or(0.0, |k| self.row[r * mask.d_row() + k])
    }
}

/// The three ADMM iterates on a shared support.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiTriple {
    pub phi: DualLayout,
    pub psi: DualLayout,
    pub lambda: DualLayout,
}

impl PhiTriple {
    pub fn zeros(mask: &LocalityMask) -> Self {
        Self {
            phi: DualLayout::zeros(mask),
            psi: DualLayout::zeros(mask),
            lambda: DualLayout::zeros(mask),
        }
    }

    pub fn layouts(&self) -> [&DualLayout; 3] {
        [&self.phi, &self.psi, &self.lambda]
    }

    pub fn layouts_agree(&self, mask: &LocalityMask) -> bool {
        self.layouts().iter().all(|l| l.layouts_agree(mask))
    }

    pub fn padding_is_zero(&self, mask: &LocalityMask) -> bool {
        self.layouts().iter().all(|l| l.padding_is_zero(mask))
    }

    /// Bitwise equality of all six arrays.
    pub fn bitwise_eq(&self, other: &PhiTriple) -> bool {
        let eq = |a: &[f64], b: &[f64]| {
            a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
        };
        self.layouts()
            .iter()
            .zip(other.layouts())
            .all(|(a, b)| eq(&a.row, &b.row) && eq(&a.col, &b.col))
    }
}
