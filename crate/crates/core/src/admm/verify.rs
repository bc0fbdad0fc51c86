use crate::admm::kernels::{max_nan, phi_row_solve_into};
use crate::linalg::dot;
use crate::mask::LocalityMask;
use crate::sls::{DynamicsOperator, PhiTriple, RowPrecomp};

/// Residuals of an ADMM iterate against the optimality conditions.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FixedPointReport {
    /// `‖operator(Ψ) − rhs‖∞`: Ψ satisfies the dynamics.
    pub dynamics: f64,
    /// `max_r ‖Φ-step(ψ_r − λ_r) − φ_r‖∞`: Φ is the row-step's answer.
    pub resolve: f64,
    /// `‖Φ − Ψ‖∞`.
    pub consensus: f64,
}

impl FixedPointReport {
    pub fn max(&self) -> f64 {
        max_nan(max_nan(self.dynamics, self.resolve), self.consensus)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max() <= tol
    }
}

/// Audits `triple` using only the row data and the dynamics operator, both
/// independent of the schedule that produced it.
pub fn verify_fixed_point(
    triple: &PhiTriple,
    rows: &[RowPrecomp],
    op: &DynamicsOperator,
    mask: &LocalityMask,
) -> FixedPointReport {
    let d_row = mask.d_row();
    let mut report = FixedPointReport::default();
    for c in 0..mask.n_cols() {
        let res = op.column_residual(c, |r| triple.psi.get(mask, r, c));
        report.dynamics = max_nan(report.dynamics, res);
    }
    let mut buf = alloc::vec![0.0; d_row];
    for (r, row) in rows.iter().enumerate() {
        let n = mask.row_len(r);
        let span = r * d_row..r * d_row + n;
        let out = &mut buf[..n];
        phi_row_solve_into(
            row,
            &triple.psi.row[span.clone()],
            &triple.lambda.row[span.clone()],
            out,
        );
        for (o, p) in out.iter().zip(&triple.phi.row[span.clone()]) {
            report.resolve = max_nan(report.resolve, libm::fabs(o - p));
        }
        for (p, s) in triple.phi.row[span.clone()].iter().zip(&triple.psi.row[span]) {
            report.consensus = max_nan(report.consensus, libm::fabs(p - s));
        }
    }
    report
}

/// Largest amount by which a predicted signal `φ_r · x(τ)` leaves its bounds.
pub fn prediction_violation(triple: &PhiTriple, rows: &[RowPrecomp], mask: &LocalityMask) -> f64 {
    let d_row = mask.d_row();
    rows.iter()
        .enumerate()
        .map(|(r, row)| {
            let n = row.a.len();
            let y = dot(&triple.phi.row[r * d_row..r * d_row + n], &row.a);
            (row.lo - y).max(y - row.hi).max(0.0)
        })
        .fold(0.0, max_nan)
}
