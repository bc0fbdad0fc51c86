//! Small dense kernels: ordered dot products and the affine projector used by
//! the column step.

use alloc::vec;
use alloc::vec::Vec;

/// `Σ a_i b_i`, accumulated in index order.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        acc += x * y;
    }
    acc
}

/// Euclidean projection onto the affine set `{ψ : G ψ = rhs}`.
///
/// Stores an orthonormal basis `Q` of the row space of `G` and the
/// minimum-norm solution `ψ₀`, so that
/// `proj(k) = k − Q Qᵀ k + ψ₀ = k + Gᵀ(GGᵀ)⁺(rhs − G k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineProjector {
    dim: usize,
    rank: usize,
    /// `rank` basis vectors of length `dim`, contiguous.
    basis: Vec<f64>,
    particular: Vec<f64>,
}

/// The constraint system has no solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inconsistent {
    /// Largest violation among the rows dropped as dependent.
    pub residual: f64,
}

impl AffineProjector {
    /// Factors `G` (`m × n`, row-major) with a column-pivoted Householder QR of
    /// `Gᵀ`. Rows whose pivot falls below `rank_tol` times the largest pivot
    /// are treated as dependent; they must be consistent with the kept rows to
    /// within `consistency_tol · max(1, ‖rhs‖∞)`.
    pub fn new(
        g: &[f64],
        rhs: &[f64],
        m: usize,
        n: usize,
        rank_tol: f64,
        consistency_tol: f64,
    ) -> Result<Self, Inconsistent> {
        debug_assert_eq!(g.len(), m * n);
        debug_assert_eq!(rhs.len(), m);
        // Column j of `w` (length n) is row j of G.
        let mut w: Vec<f64> = g.to_vec();
        let mut perm: Vec<usize> = (0..m).collect();
        let steps = m.min(n);
        let mut householder: Vec<Vec<f64>> = Vec::with_capacity(steps);
        let mut rank = 0;
        let mut first_pivot = 0.0;
        for k in 0..steps {
            // pick the remaining column with the largest trailing norm
            let mut best = k;
            let mut best_norm = -1.0;
            for j in k..m {
                let col = &w[j * n + k..(j + 1) * n];
                let nrm = dot(col, col);
                if nrm > best_norm {
                    best_norm = nrm;
                    best = j;
                }
            }
            let best_norm = libm::sqrt(best_norm.max(0.0));
            if k == 0 {
                first_pivot = best_norm;
            }
            if best_norm == 0.0 || best_norm <= rank_tol * first_pivot {
                break;
            }
            if best != k {
                for i in 0..n {
                    w.swap(k * n + i, best * n + i);
                }
                perm.swap(k, best);
            }
            // reflector taking w[k.., k] to alpha e_k
            let x0 = w[k * n + k];
            let alpha = if x0 >= 0.0 { -best_norm } else { best_norm };
            let mut v: Vec<f64> = w[k * n + k..(k + 1) * n].to_vec();
            v[0] -= alpha;
            let vnorm = libm::sqrt(dot(&v, &v));
            if vnorm > 0.0 {
                for vi in &mut v {
                    *vi /= vnorm;
                }
            }
            for j in k..m {
                let col = &mut w[j * n + k..(j + 1) * n];
                let s = 2.0 * dot(&v, col);
                for (ci, vi) in col.iter_mut().zip(&v) {
                    *ci -= s * vi;
                }
            }
            householder.push(v);
            rank += 1;
        }

        // R entry (i, j) = w[j * n + i] for i < rank, in pivoted column order.
        let b: Vec<f64> = perm.iter().map(|&p| rhs[p]).collect();
        let mut z = vec![0.0; rank];
        for i in 0..rank {
            let mut acc = b[i];
            for (l, zl) in z.iter().enumerate().take(i) {
                acc -= w[i * n + l] * zl;
            }
            z[i] = acc / w[i * n + i];
        }
        let scale = b.iter().fold(1.0f64, |s, v| s.max(libm::fabs(*v)));
        let mut worst = 0.0f64;
        for j in rank..m {
            let mut acc = 0.0;
            for (l, zl) in z.iter().enumerate() {
                acc += w[j * n + l] * zl;
            }
            worst = worst.max(libm::fabs(acc - b[j]));
        }
        if worst > consistency_tol * scale {
            return Err(Inconsistent { residual: worst });
        }

        // Q e_i for i < rank: apply reflectors in reverse to the unit vector.
        let mut basis = vec![0.0; rank * n];
        for i in 0..rank {
            let q = &mut basis[i * n..(i + 1) * n];
            q[i] = 1.0;
            for k in (0..rank).rev() {
                let v = &householder[k];
                let tail = &mut q[k..];
                let s = 2.0 * dot(v, tail);
                for (qi, vi) in tail.iter_mut().zip(v) {
                    *qi -= s * vi;
                }
            }
        }
        let mut particular = vec![0.0; n];
        for (i, zi) in z.iter().enumerate() {
            for (p, q) in particular.iter_mut().zip(&basis[i * n..(i + 1) * n]) {
                *p += zi * q;
            }
        }
        Ok(Self {
            dim: n,
            rank,
            basis,
            particular,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Minimum-norm point of the affine set.
    pub fn particular(&self) -> &[f64] {
        &self.particular
    }

    /// Writes the projection of `k` into `out` (distinct buffers, both of
    /// length `dim`).
    #[inline]
    pub fn apply(&self, k: &[f64], out: &mut [f64]) {
        let n = self.dim;
        out[..n].copy_from_slice(&k[..n]);
        for q in self.basis.chunks_exact(n) {
            let c = dot(q, &k[..n]);
            for (o, qi) in out.iter_mut().zip(q) {
                *o -= c * qi;
            }
        }
        for (o, p) in out.iter_mut().zip(&self.particular) {
            *o += p;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat_vec(g: &[f64], m: usize, n: usize, x: &[f64]) -> Vec<f64> {
        (0..m).map(|i| dot(&g[i * n..(i + 1) * n], x)).collect()
    }

    fn build(g: &[f64], rhs: &[f64], m: usize, n: usize) -> AffineProjector {
        AffineProjector::new(g, rhs, m, n, 1e-10, 1e-9).unwrap()
    }

    #[test]
    fn single_equation_min_norm() {
        let p = build(&[1.0, 1.0], &[1.0], 1, 2);
        let mut out = [0.0; 2];
        p.apply(&[0.0, 0.0], &mut out);
        assert!((out[0] - 0.5).abs() < 1e-15 && (out[1] - 0.5).abs() < 1e-15);
        // brute force: closest point on the line x + y = 1 to the origin
        let mut best = (f64::INFINITY, 0.0);
        for i in 0..=1000 {
            let x = i as f64 / 1000.0;
            let d = x * x + (1.0 - x) * (1.0 - x);
            if d < best.0 {
                best = (d, x);
            }
        }
        assert!((best.1 - out[0]).abs() < 1e-3);
    }

    #[test]
    fn feasible_input_is_unchanged() {
        let g = [1.0, 2.0, 0.0, 0.0, 1.0, -1.0];
        let k = [1.0, 2.0, 3.0];
        let rhs = mat_vec(&g, 2, 3, &k);
        let p = build(&g, &rhs, 2, 3);
        let mut out = [0.0; 3];
        p.apply(&k, &mut out);
        for i in 0..3 {
            assert!((out[i] - k[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn identity_pins_everything() {
        let g = [1.0, 0.0, 0.0, 1.0];
        let p = build(&g, &[3.0, -4.0], 2, 2);
        let mut out = [0.0; 2];
        p.apply(&[10.0, 7.0], &mut out);
        assert!((out[0] - 3.0).abs() < 1e-14 && (out[1] + 4.0).abs() < 1e-14);
    }

    #[test]
    fn dependent_consistent_rows_are_dropped() {
        let g = [1.0, 1.0, 2.0, 2.0, 1.0, -1.0];
        let p = build(&g, &[1.0, 2.0, 0.0], 3, 2);
        assert_eq!(p.rank(), 2);
        let mut out = [0.0; 2];
        p.apply(&[5.0, -3.0], &mut out);
        assert!((out[0] - 0.5).abs() < 1e-12 && (out[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn more_rows_than_columns() {
        let g = [1.0, 0.0, 0.0, 1.0, 1.0, 1.0];
        let p = build(&g, &[1.0, 2.0, 3.0], 3, 2);
        assert_eq!(p.rank(), 2);
        assert!(AffineProjector::new(&g, &[1.0, 2.0, 4.0], 3, 2, 1e-10, 1e-9).is_err());
    }

    #[test]
    fn inconsistent_rows_are_reported() {
        let g = [1.0, 0.0, 1.0, 0.0];
        let err = AffineProjector::new(&g, &[1.0, 0.0], 2, 2, 1e-10, 1e-9).unwrap_err();
        assert!((err.residual - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_system_is_identity() {
        let p = build(&[], &[], 0, 3);
        let mut out = [0.0; 3];
        p.apply(&[1.0, 2.0, 3.0], &mut out);
        assert_eq!(out, [1.0, 2.0, 3.0]);
    }

    proptest::proptest! {
        #[test]
        fn projection_is_feasible_and_idempotent(
            seed in proptest::collection::vec(-2.0f64..2.0, 40),
            m in 1usize..5,
            n in 1usize..8,
        ) {
            let g: Vec<f64> = seed.iter().cycle().take(m * n).copied().collect();
            let x0: Vec<f64> = seed.iter().rev().take(n).copied().collect();
            let rhs = mat_vec(&g, m, n, &x0);
            let p = build(&g, &rhs, m, n);
            let k: Vec<f64> = seed.iter().skip(7).cycle().take(n).map(|v| v * 3.0).collect();
            let mut out = vec![0.0; n];
            p.apply(&k, &mut out);
            let res = mat_vec(&g, m, n, &out);
            for i in 0..m {
                proptest::prop_assert!((res[i] - rhs[i]).abs() <= 1e-10);
            }
            let mut again = vec![0.0; n];
            p.apply(&out, &mut again);
            for i in 0..n {
                proptest::prop_assert!((again[i] - out[i]).abs() <= 1e-10);
            }
            // the correction is orthogonal to the feasible directions: it lies in the row space
            let corr: Vec<f64> = out.iter().zip(&k).map(|(a, b)| a - b).collect();
            let mut back = vec![0.0; n];
            let zero_rhs = vec![0.0; m];
            let homog = build(&g, &zero_rhs, m, n);
            homog.apply(&corr, &mut back);
            let nrm: f64 = back.iter().map(|v| v.abs()).fold(0.0, f64::max);
            proptest::prop_assert!(nrm <= 1e-9);
        }
    }
}
