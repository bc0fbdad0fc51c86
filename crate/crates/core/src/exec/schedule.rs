use alloc::vec;
use alloc::vec::Vec;
use core::time::Duration;

use super::ledger::SyncLedger;
use super::patch::{build_patches, duplicated_rows_per_iter, ColumnPatch};
use super::shared::SharedSlice;
use super::{Executor, Inline, StrategyKind};
use crate::admm::kernels::{
    lambda_entry, max_nan, phi_row_entry, phi_row_solve_into, phi_row_solve_padded,
    psi_column_solve,
};
use crate::clock::Clock;
use crate::mask::{LocalityMask, PAD};
use crate::sls::{ColumnPrecomp, PhiTriple, RowPrecomp};

/// Read-only inputs of the four ADMM stages for one MPC step.
#[derive(Clone, Copy)]
pub struct Stages<'a> {
    pub mask: &'a LocalityMask,
    pub rows: &'a [RowPrecomp],
    pub cols: &'a [ColumnPrecomp],
    pub rho: f64,
    pub eps_pri: f64,
    pub eps_dual: f64,
}

/// Outcome of the convergence reduction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Convergence {
    pub pri: f64,
    pub dual: f64,
    pub converged: bool,
}

/// Global residuals as the maximum over per-column pairs. Max is commutative
/// and associative, so the decision does not depend on the combination
/// order. NaN anywhere yields NaN and "not converged".
pub fn reduce_convergence(residuals: &[(f64, f64)], eps_pri: f64, eps_dual: f64) -> Convergence {
    let (pri, dual) = residuals
        .iter()
        .fold((0.0, 0.0), |(p, d), &(pc, dc)| (max_nan(p, pc), max_nan(d, dc)));
    Convergence {
        pri,
        dual,
        converged: pri <= eps_pri && dual <= eps_dual,
    }
}

/// Runs ADMM iterations under one strategy and keeps its workspace and
/// ledger across iterations and MPC steps.
pub struct Scheduler<'e> {
    kind: StrategyKind,
    exec: &'e dyn Executor,
    clock: &'e dyn Clock,
    patches: Vec<ColumnPatch>,
    duplicated_per_iter: u64,
    /// Previous Ψ in column layout (`n_cols × D_col`).
    psi_prev_col: Vec<f64>,
    /// Ψ-step input `φ + λ` in column layout.
    k_col: Vec<f64>,
    residuals: Vec<(f64, f64)>,
    /// Padded strategy: measured-state restriction per row, `n_rows × D_row`.
    a_padded: Vec<f64>,
    /// Patch strategy: next Ψ and Λ in row layout (double buffer).
    psi_row_next: Vec<f64>,
    lambda_row_next: Vec<f64>,
    pub ledger: SyncLedger,
}

impl<'e> Scheduler<'e> {
    /// Allocates the strategy's workspace; the time spent is the ledger's
    /// setup time. Sequential always runs inline.
    pub fn new(
        kind: StrategyKind,
        mask: &LocalityMask,
        exec: &'e dyn Executor,
        clock: &'e dyn Clock,
    ) -> Self {
        let start = clock.now();
        let exec: &'e dyn Executor = if kind == StrategyKind::Sequential {
            &Inline
        } else {
            exec
        };
        let col_len = mask.n_cols() * mask.d_col();
        let row_len = mask.n_rows() * mask.d_row();
        let (patches, duplicated_per_iter) = if kind == StrategyKind::PatchLocal {
            let p = build_patches(mask);
            let dup = duplicated_rows_per_iter(&p, mask);
            (p, dup)
        } else {
            (Vec::new(), 0)
        };
        let patch = kind == StrategyKind::PatchLocal;
        let mut s = Self {
            kind,
            exec,
            clock,
            patches,
            duplicated_per_iter,
            psi_prev_col: vec![0.0; col_len],
            k_col: vec![0.0; col_len],
            residuals: vec![(0.0, 0.0); mask.n_cols()],
            a_padded: if kind == StrategyKind::Padded {
                vec![0.0; row_len]
            } else {
                Vec::new()
            },
            psi_row_next: if patch { vec![0.0; row_len] } else { Vec::new() },
            lambda_row_next: if patch { vec![0.0; row_len] } else { Vec::new() },
            ledger: SyncLedger::new(kind),
        };
        s.ledger.setup_wall_time = clock.since(start);
        s
    }

    pub fn kind(&self) -> StrategyKind {
        self.kind
    }

    pub fn patches(&self) -> &[ColumnPatch] {
        &self.patches
    }

    /// Per-MPC-step preparation (the padded `a` table).
    pub fn prepare_step(&mut self, stages: &Stages<'_>) {
        if self.kind != StrategyKind::Padded {
            return;
        }
        let start = self.clock.now();
        let d_row = stages.mask.d_row();
        for (r, row) in stages.rows.iter().enumerate() {
            let dst = &mut self.a_padded[r * d_row..(r + 1) * d_row];
            dst[..row.a.len()].copy_from_slice(&row.a);
            dst[row.a.len()..].iter_mut().for_each(|v| *v = 0.0);
        }
        self.ledger.setup_wall_time += self.clock.since(start);
    }

    /// One full ADMM iteration. On return both layouts of every iterate agree.
    pub fn run_iteration(&mut self, stages: &Stages<'_>, triple: &mut PhiTriple) -> Convergence {
        let kind = self.kind;
        match kind {
            StrategyKind::Sequential | StrategyKind::NaiveParallel => self.schedule_naive(stages, triple),
            StrategyKind::Padded => self.schedule_padded(stages, triple),
            StrategyKind::Fused => self.schedule_fused(stages, triple),
            StrategyKind::PatchLocal => self.schedule_patch_local(stages, triple),
        }
        let l = &mut self.ledger;
        l.iterations += 1;
        l.host_syncs += kind.host_syncs_per_iter();
        l.kernel_launches += kind.kernel_launches_per_iter();
        l.flag_reads += kind.flag_reads_per_iter();
        l.duplicated_row_computations += self.duplicated_per_iter;

        let start = self.clock.now();
        let conv = reduce_convergence(&self.residuals, stages.eps_pri, stages.eps_dual);
        self.ledger.stage_wall_times.exchange += self.clock.since(start);
        conv
    }

    /// Four launches — rows, columns, support entries, columns — each
    /// followed by a coordinator exchange.
    fn schedule_naive(&mut self, st: &Stages<'_>, t: &mut PhiTriple) {
        let mask = st.mask;
        let exec = self.exec;
        let clock = self.clock;
        let d_row = mask.d_row();
        let d_col = mask.d_col();

        let dt = timed(clock, || {
            let psi = &t.psi.row;
            let lambda = &t.lambda.row;
            let phi = SharedSlice::new(&mut t.phi.row);
            exec.parallel_for(mask.n_rows(), &|r| {
                let n = mask.row_len(r);
                let base = r * d_row;
                // SAFETY: row r owns slots base..base + n.
                let out = unsafe { phi.slice_mut(base, n) };
                phi_row_solve_into(&st.rows[r], &psi[base..base + n], &lambda[base..base + n], out);
            });
        });
        self.ledger.stage_wall_times.phi += dt;
        let dt = timed(clock, || t.phi.row_to_col(mask));
        self.ledger.stage_wall_times.exchange += dt;

        let dt = timed(clock, || {
            let phi = &t.phi.col;
            let lambda = &t.lambda.col;
            let psi = SharedSlice::new(&mut t.psi.col);
            let prev = SharedSlice::new(&mut self.psi_prev_col);
            let kbuf = SharedSlice::new(&mut self.k_col);
            exec.parallel_for(mask.n_cols(), &|c| {
                let n = mask.col_len(c);
                let base = c * d_col;
                // SAFETY: column c owns slots base..base + n in every column buffer.
                let (psi, prev, k) = unsafe {
                    (psi.slice_mut(base, n), prev.slice_mut(base, n), kbuf.slice_mut(base, n))
                };
                for i in 0..n {
                    k[i] = phi[base + i] + lambda[base + i];
                }
                prev.copy_from_slice(psi);
                psi_column_solve(&st.cols[c], k, psi);
            });
        });
        self.ledger.stage_wall_times.psi += dt;
        let dt = timed(clock, || t.psi.col_to_row(mask));
        self.ledger.stage_wall_times.exchange += dt;

        let dt = timed(clock, || {
            let phi = &t.phi.row;
            let psi = &t.psi.row;
            let slots = mask.entry_row_slots();
            let lambda = SharedSlice::new(&mut t.lambda.row);
            exec.parallel_for(slots.len(), &|e| {
                let s = slots[e];
                // SAFETY: every support entry has its own slot.
                unsafe {
                    let l = lambda.slice_mut(s, 1);
                    l[0] = lambda_entry(l[0], phi[s], psi[s]);
                }
            });
        });
        self.ledger.stage_wall_times.lambda += dt;
        let dt = timed(clock, || t.lambda.row_to_col(mask));
        self.ledger.stage_wall_times.exchange += dt;

        let dt = timed(clock, || self.convergence_stage(st, t));
        self.ledger.stage_wall_times.convergence += dt;
    }

    fn convergence_stage(&mut self, st: &Stages<'_>, t: &PhiTriple) {
        let mask = st.mask;
        let d_col = mask.d_col();
        let phi = &t.phi.col;
        let psi = &t.psi.col;
        let prev = &self.psi_prev_col;
        let rho = st.rho;
        let out = ResidualSlots::new(&mut self.residuals);
        self.exec.parallel_for(mask.n_cols(), &|c| {
            let base = c * d_col;
            let n = mask.col_len(c);
            let r = crate::admm::kernels::column_residuals(
                &phi[base..base + n],
                &psi[base..base + n],
                &prev[base..base + n],
                rho,
            );
            // SAFETY: one residual slot per column.
            unsafe { out.write(c, r) };
        });
    }

    /// Naive staging over fixed-stride layouts: every work item walks its full
    /// `D_row` / `D_col` slots and skips padding markers.
    fn schedule_padded(&mut self, st: &Stages<'_>, t: &mut PhiTriple) {
        let mask = st.mask;
        let exec = self.exec;
        let clock = self.clock;
        let d_row = mask.d_row();
        let d_col = mask.d_col();
        let row_pad = mask.row_pad();
        let col_pad = mask.col_pad();

        let dt = timed(clock, || {
            let psi = &t.psi.row;
            let lambda = &t.lambda.row;
            let a = &self.a_padded;
            let phi = SharedSlice::new(&mut t.phi.row);
            exec.parallel_for(mask.n_rows(), &|r| {
                let span = r * d_row..(r + 1) * d_row;
                // SAFETY: row r owns its D_row slots.
                let out = unsafe { phi.slice_mut(span.start, d_row) };
                phi_row_solve_padded(
                    &st.rows[r],
                    &a[span.clone()],
                    &row_pad[span.clone()],
                    &psi[span.clone()],
                    &lambda[span],
                    out,
                );
            });
        });
        self.ledger.stage_wall_times.phi += dt;
        let dt = timed(clock, || t.phi.row_to_col(mask));
        self.ledger.stage_wall_times.exchange += dt;

        let dt = timed(clock, || {
            let phi = &t.phi.col;
            let lambda = &t.lambda.col;
            let psi = SharedSlice::new(&mut t.psi.col);
            let prev = SharedSlice::new(&mut self.psi_prev_col);
            let kbuf = SharedSlice::new(&mut self.k_col);
            exec.parallel_for(mask.n_cols(), &|c| {
                let base = c * d_col;
                // SAFETY: column c owns its D_col slots in every column buffer.
                let (psi, prev, k) = unsafe {
                    (
                        psi.slice_mut(base, d_col),
                        prev.slice_mut(base, d_col),
                        kbuf.slice_mut(base, d_col),
                    )
                };
                let slots = &col_pad[base..base + d_col];
                for i in 0..d_col {
                    if slots[i] != PAD {
                        k[i] = phi[base + i] + lambda[base + i];
                        prev[i] = psi[i];
                    }
                }
                // supports are left-packed, so the projector sees the leading slots
                let n = st.cols[c].support.len();
                psi_column_solve(&st.cols[c], &k[..n], &mut psi[..n]);
            });
        });
        self.ledger.stage_wall_times.psi += dt;
        let dt = timed(clock, || t.psi.col_to_row(mask));
        self.ledger.stage_wall_times.exchange += dt;

        let dt = timed(clock, || {
            let phi = &t.phi.row;
            let psi = &t.psi.row;
            let lambda = SharedSlice::new(&mut t.lambda.row);
            exec.parallel_for(mask.n_rows(), &|r| {
                let base = r * d_row;
                // SAFETY: row r owns its D_row slots.
                let l = unsafe { lambda.slice_mut(base, d_row) };
                for i in 0..d_row {
                    if row_pad[base + i] != PAD {
                        l[i] = lambda_entry(l[i], phi[base + i], psi[base + i]);
                    }
                }
            });
        });
        self.ledger.stage_wall_times.lambda += dt;
        let dt = timed(clock, || t.lambda.row_to_col(mask));
        self.ledger.stage_wall_times.exchange += dt;

        let dt = timed(clock, || {
            let phi = &t.phi.col;
            let psi = &t.psi.col;
            let prev = &self.psi_prev_col;
            let rho = st.rho;
            let out = ResidualSlots::new(&mut self.residuals);
            exec.parallel_for(mask.n_cols(), &|c| {
                let base = c * d_col;
                let mut pri: f64 = 0.0;
                let mut dual: f64 = 0.0;
                for i in base..base + d_col {
                    if col_pad[i] != PAD {
                        pri = max_nan(pri, libm::fabs(phi[i] - psi[i]));
                        dual = max_nan(dual, libm::fabs(psi[i] - prev[i]));
                    }
                }
                // SAFETY: one residual slot per column.
                unsafe { out.write(c, (pri, rho * dual)) };
            });
        });
        self.ledger.stage_wall_times.convergence += dt;
    }

    /// Row stage, one row→column exchange, then a column kernel running Ψ,
    /// the column-wise dual update and residuals. The column kernel writes
    /// its Ψ and Λ entries straight into both layouts.
    fn schedule_fused(&mut self, st: &Stages<'_>, t: &mut PhiTriple) {
        let mask = st.mask;
        let exec = self.exec;
        let clock = self.clock;
        let d_row = mask.d_row();

        let dt = timed(clock, || {
            let psi = &t.psi.row;
            let lambda = &t.lambda.row;
            let phi = SharedSlice::new(&mut t.phi.row);
            exec.parallel_for(mask.n_rows(), &|r| {
                let n = mask.row_len(r);
                let base = r * d_row;
                // SAFETY: row r owns slots base..base + n.
                let out = unsafe { phi.slice_mut(base, n) };
                phi_row_solve_into(&st.rows[r], &psi[base..base + n], &lambda[base..base + n], out);
            });
        });
        self.ledger.stage_wall_times.phi += dt;
        let dt = timed(clock, || t.phi.row_to_col(mask));
        self.ledger.stage_wall_times.exchange += dt;

        let dt = timed(clock, || {
            let PhiTriple { phi, psi, lambda } = t;
            let phi_col = &phi.col;
            let psi_row = SharedSlice::new(&mut psi.row);
            let lambda_row = SharedSlice::new(&mut lambda.row);
            let column = ColumnBuffers::new(
                &mut psi.col,
                &mut lambda.col,
                &mut self.psi_prev_col,
                &mut self.k_col,
                &mut self.residuals,
            );
            exec.parallel_for(mask.n_cols(), &|c| {
                // SAFETY: column c owns its column slots and, through
                // col_to_row_slot, a disjoint set of row slots.
                unsafe {
                    let (psi_c, lambda_c) = column.run(st, c, |k, _| phi_col[k]);
                    scatter_to_rows(mask, c, psi_c, &psi_row);
                    scatter_to_rows(mask, c, lambda_c, &lambda_row);
                }
            });
        });
        self.ledger.stage_wall_times.fused_column += dt;
    }

    /// A single kernel over column patches. Each patch recomputes Φ for all
    /// its member rows from the previous iterate, publishes the rows it owns,
    /// then runs the column's Ψ, Λ and residual steps. Ψ and Λ go to the
    /// next-iterate row buffers, which are swapped in afterwards.
    fn schedule_patch_local(&mut self, st: &Stages<'_>, t: &mut PhiTriple) {
        let mask = st.mask;
        let exec = self.exec;
        let clock = self.clock;
        let d_row = mask.d_row();
        let d_col = mask.d_col();

        let dt = timed(clock, || {
            let PhiTriple { phi, psi, lambda } = t;
            let psi_row = &psi.row;
            let lambda_row = &lambda.row;
            let phi_row = SharedSlice::new(&mut phi.row);
            let phi_col = SharedSlice::new(&mut phi.col);
            let psi_next = SharedSlice::new(&mut self.psi_row_next);
            let lambda_next = SharedSlice::new(&mut self.lambda_row_next);
            let column = ColumnBuffers::new(
                &mut psi.col,
                &mut lambda.col,
                &mut self.psi_prev_col,
                &mut self.k_col,
                &mut self.residuals,
            );
            let c2r = mask.col_to_row_slot();
            exec.parallel_for(mask.n_cols(), &|c| {
                let base = c * d_col;
                let n = mask.col_len(c);
                // SAFETY: patch c writes its own column slots, the Φ rows it
                // owns, and its entries' slots in the next-iterate row buffers.
                unsafe {
                    let phi_c = phi_col.slice_mut(base, n);
                    for (i, &r) in mask.col_support(c).iter().enumerate() {
                        let len = mask.row_len(r);
                        let rb = r * d_row;
                        let pos = c2r[base + i] - rb;
                        let psi_r = &psi_row[rb..rb + len];
                        let lambda_r = &lambda_row[rb..rb + len];
                        phi_c[i] = if mask.row_support(r)[0] == c {
                            let out = phi_row.slice_mut(rb, len);
                            phi_row_solve_into(&st.rows[r], psi_r, lambda_r, out);
                            out[pos]
                        } else {
                            phi_row_entry(&st.rows[r], psi_r, lambda_r, pos)
                        };
                    }
                    let (psi_c, lambda_c) = column.run(st, c, |_, i| phi_c[i]);
                    scatter_to_rows(mask, c, psi_c, &psi_next);
                    scatter_to_rows(mask, c, lambda_c, &lambda_next);
                }
            });
        });
        core::mem::swap(&mut t.psi.row, &mut self.psi_row_next);
        core::mem::swap(&mut t.lambda.row, &mut self.lambda_row_next);
        self.ledger.stage_wall_times.patch += dt;
    }
}

fn timed(clock: &dyn Clock, f: impl FnOnce()) -> Duration {
    let start = clock.now();
    f();
    clock.since(start)
}

/// Per-column slot buffers shared by the fused and patch kernels.
struct ColumnBuffers<'a> {
    psi: SharedSlice<'a>,
    lambda: SharedSlice<'a>,
    prev: SharedSlice<'a>,
    k: SharedSlice<'a>,
    residuals: ResidualSlots<'a>,
}

impl<'a> ColumnBuffers<'a> {
    fn new(
        psi: &'a mut [f64],
        lambda: &'a mut [f64],
        prev: &'a mut [f64],
        k: &'a mut [f64],
        residuals: &'a mut [(f64, f64)],
    ) -> Self {
        Self {
            psi: SharedSlice::new(psi),
            lambda: SharedSlice::new(lambda),
            prev: SharedSlice::new(prev),
            k: SharedSlice::new(k),
            residuals: ResidualSlots::new(residuals),
        }
    }

    /// Ψ-step, column-wise dual update and residuals for column `c`, with
    /// `phi(slot, i)` giving Φ at absolute column slot `slot` / support
    /// position `i`. Returns the column's new Ψ and Λ.
    ///
    /// # Safety
    /// Column `c` must be processed by exactly one work item.
    #[allow(clippy::mut_from_ref)]
    unsafe fn run(
        &self,
        st: &Stages<'_>,
        c: usize,
        phi: impl Fn(usize, usize) -> f64,
    ) -> (&mut [f64], &mut [f64]) {
        let d_col = st.mask.d_col();
        let base = c * d_col;
        let n = st.mask.col_len(c);
        let psi = self.psi.slice_mut(base, n);
        let lambda = self.lambda.slice_mut(base, n);
        let prev = self.prev.slice_mut(base, n);
        let k = self.k.slice_mut(base, n);
        for i in 0..n {
            k[i] = phi(base + i, i) + lambda[i];
        }
        prev.copy_from_slice(psi);
        psi_column_solve(&st.cols[c], k, psi);
        let mut pri: f64 = 0.0;
        let mut dual: f64 = 0.0;
        for i in 0..n {
            let p = phi(base + i, i);
            lambda[i] = lambda_entry(lambda[i], p, psi[i]);
            pri = max_nan(pri, libm::fabs(p - psi[i]));
            dual = max_nan(dual, libm::fabs(psi[i] - prev[i]));
        }
        self.residuals.write(c, (pri, st.rho * dual));
        (psi, lambda)
    }
}

/// Writes a column's values to their row-layout slots.
///
/// # Safety
/// Only column `c`'s work item may touch those slots during the stage.
unsafe fn scatter_to_rows(mask: &LocalityMask, c: usize, values: &[f64], rows: &SharedSlice<'_>) {
    let base = c * mask.d_col();
    let c2r = mask.col_to_row_slot();
    for (i, v) in values.iter().enumerate() {
        rows.write(c2r[base + i], *v);
    }
}

/// Disjoint per-column writes into the residual buffer.
struct ResidualSlots<'a> {
    ptr: *mut (f64, f64),
    len: usize,
    _marker: core::marker::PhantomData<&'a mut [(f64, f64)]>,
}

// SAFETY: writes go through `write`, whose callers use one slot per item.
unsafe impl Sync for ResidualSlots<'_> {}

impl<'a> ResidualSlots<'a> {
    fn new(s: &'a mut [(f64, f64)]) -> Self {
        Self {
            ptr: s.as_mut_ptr(),
            len: s.len(),
            _marker: core::marker::PhantomData,
        }
    }

    /// # Safety
    /// Slot `i` must be written by a single work item per stage.
    unsafe fn write(&self, i: usize, v: (f64, f64)) {
        assert!(i < self.len);
        *self.ptr.add(i) = v;
    }
}
