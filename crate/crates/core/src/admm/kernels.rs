//! The per-row, per-column and per-entry ADMM computations.
//!
//! Every kernel fixes its arithmetic order (ascending support index), so the
//! same inputs give bitwise-identical outputs no matter which strategy or
//! worker runs them.

use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::mask::PAD;
use crate::sls::{ColumnPrecomp, RowPrecomp};

/// Scalar that moves `v` onto the optimal hyperplane along `a`:
/// `φ = v + coef·a`. `None` when `a = 0` (then `φ = v`).
#[inline]
fn row_coefficient(row: &RowPrecomp, va: f64) -> Option<f64> {
    if row.a_dot_a == 0.0 {
        return None;
    }
    let y0 = row.rho * va / (row.rho + 2.0 * row.q * row.a_dot_a);
    let y = y0.max(row.lo).min(row.hi);
    Some((y - va) / row.a_dot_a)
}

/// Explicit Φ-step for one row:
/// `argmin q(φ·a)² + (ρ/2)‖φ − v‖²  s.t.  lo ≤ φ·a ≤ hi`, with `v = ψ − λ`
/// over the row support. Writes `φ` into `out`.
#[inline]
pub fn phi_row_solve_into(row: &RowPrecomp, psi: &[f64], lambda: &[f64], out: &mut [f64]) {
    let n = row.a.len();
    let mut va = 0.0;
    for k in 0..n {
        va += (psi[k] - lambda[k]) * row.a[k];
    }
    match row_coefficient(row, va) {
        Some(coef) => {
            for k in 0..n {
                out[k] = (psi[k] - lambda[k]) + coef * row.a[k];
            }
        }
        None => {
            for k in 0..n {
                out[k] = psi[k] - lambda[k];
            }
        }
    }
}

/// [`phi_row_solve_into`] for a given `v`.
pub fn phi_row_solve(row: &RowPrecomp, v: &[f64]) -> alloc::vec::Vec<f64> {
    let zeros = alloc::vec![0.0; v.len()];
    let mut out = alloc::vec![0.0; v.len()];
    phi_row_solve_into(row, v, &zeros, &mut out);
    out
}

/// Same computation as [`phi_row_solve_into`] over a fixed-stride padded row:
/// the loop runs over all `D_row` slots and skips [`PAD`] markers, so the
/// arithmetic matches the compact kernel exactly and padded outputs are left
/// untouched.
#[inline]
pub fn phi_row_solve_padded(
    row: &RowPrecomp,
    a_padded: &[f64],
    slots: &[usize],
    psi: &[f64],
    lambda: &[f64],
    out: &mut [f64],
) {
    let mut va = 0.0;
    for k in 0..slots.len() {
        if slots[k] != PAD {
            va += (psi[k] - lambda[k]) * a_padded[k];
        }
    }
    match row_coefficient(row, va) {
        Some(coef) => {
            for k in 0..slots.len() {
                if slots[k] != PAD {
                    out[k] = (psi[k] - lambda[k]) + coef * a_padded[k];
                }
            }
        }
        None => {
            for k in 0..slots.len() {
                if slots[k] != PAD {
                    out[k] = psi[k] - lambda[k];
                }
            }
        }
    }
}

/// Φ-step for one row, returning only the entry at support position `pos`.
/// Identical arithmetic to [`phi_row_solve_into`].
#[inline]
pub fn phi_row_entry(row: &RowPrecomp, psi: &[f64], lambda: &[f64], pos: usize) -> f64 {
    let n = row.a.len();
    let mut va = 0.0;
    for k in 0..n {
        va += (psi[k] - lambda[k]) * row.a[k];
    }
    match row_coefficient(row, va) {
        Some(coef) => (psi[pos] - lambda[pos]) + coef * row.a[pos],
        None => psi[pos] - lambda[pos],
    }
}

/// Ψ-step for one column: Euclidean projection of `k = φ + λ` onto the
/// column's dynamics constraints.
#[inline]
pub fn psi_column_solve(col: &ColumnPrecomp, k: &[f64], out: &mut [f64]) {
    col.projector.apply(k, out);
}

/// `λ ← λ + φ − ψ` entrywise.
#[inline]
pub fn lambda_update(lambda: &mut [f64], phi: &[f64], psi: &[f64]) -> Result<()> {
    if lambda.len() != phi.len() || phi.len() != psi.len() {
        return Err(Error::Invariant("lambda update over mismatched supports"));
    }
    for k in 0..lambda.len() {
        lambda[k] = lambda_entry(lambda[k], phi[k], psi[k]);
    }
    Ok(())
}

#[inline]
pub fn lambda_entry(lambda: f64, phi: f64, psi: f64) -> f64 {
    (lambda + phi) - psi
}

/// NaN-propagating maximum, so a diverged iterate never reads as converged.
#[inline]
pub fn max_nan(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else if a >= b {
        a
    } else {
        b
    }
}

/// `(max |φ − ψ|, ρ·max |ψ − ψ_prev|)` over one column's support.
#[inline]
pub fn column_residuals(phi: &[f64], psi: &[f64], psi_prev: &[f64], rho: f64) -> (f64, f64) {
    let mut pri: f64 = 0.0;
    let mut dual: f64 = 0.0;
    for k in 0..phi.len() {
        pri = max_nan(pri, libm::fabs(phi[k] - psi[k]));
        dual = max_nan(dual, libm::fabs(psi[k] - psi_prev[k]));
    }
    (pri, rho * dual)
}

/// `Σ_k v_k a_k` in support order; the predicted value of a row's signal.
#[inline]
pub fn row_prediction(values: &[f64], a: &[f64]) -> f64 {
    dot(values, a)
}
