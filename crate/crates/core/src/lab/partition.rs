//! The linear system `UΓ + D_α UX = 0` on the trivial partition and the commutator
//! span `{[H, D_j]}`.

use serde::Serialize;

use crate::error::{ensure, Error, Result};
use crate::matcore::{basis_element, ComplexMatrix, HermitianMatrix, RealMatrix};

/// Entries at or below this fraction of `max |H_ij|` count as zero in the block test.
pub const BLOCK_TOL: f64 = 1e-12;
/// Singular values at or below this fraction of the largest are discarded.
pub const SYSTEM_RANK_TOL: f64 = 1e-10;
/// Largest `m` for which [`is_nondegenerate`] enumerates subsets.
pub const EXHAUSTIVE_MAX: usize = 12;

#[derive(Clone, Debug, Serialize)]
pub struct LinearSystemProbe {
    pub n: usize,
    pub m: usize,
    pub u: ComplexMatrix,
    pub x: HermitianMatrix,
    /// `2mn × (n² + m)`: real parts stacked over imaginary parts; columns are Γ in the
    /// Gell-Mann basis followed by α.
    pub system: RealMatrix,
}

impl LinearSystemProbe {
    pub fn new(u: &ComplexMatrix, x: &HermitianMatrix) -> Result<Self> {
        let (m, n) = (u.rows(), u.cols());
        ensure!(x.dim() == n, "X has dimension {}, U has {n} columns", x.dim());
        ensure!(u.isometry_residual() <= 1e-10, "U is not an isometry");
        let split = |z: &ComplexMatrix| -> Vec<f64> {
            let mut v: Vec<f64> = z.as_slice().iter().map(|c| c.re).collect();
            v.extend(z.as_slice().iter().map(|c| c.im));
            v
        };
        let mut cols = Vec::with_capacity(n * n + m);
        for a in 0..n * n {
            cols.push(split(&u.matmul(basis_element(n, a).as_matrix())));
        }
        let ux = u.matmul(x.as_matrix());
        for j in 0..m {
            let row_j = ComplexMatrix::from_fn(m, n, |i, k| if i == j { ux[(i, k)] } else { ux[(i, k)] * 0.0 });
            cols.push(split(&row_j));
        }
        let system = RealMatrix::from_columns(2 * m * n, &cols)?;
        Ok(Self { n, m, u: u.clone(), x: x.clone(), system })
    }

    pub fn nullity(&self) -> Result<usize> {
        Ok(self.system.cols() - self.system.svd()?.rank(SYSTEM_RANK_TOL))
    }
}

/// Whether `[H, D_M] = 0` for the subset with indicator `mask`, i.e. `H` has no entry
/// linking `M` to its complement.
fn commutes_with_subset(h: &HermitianMatrix, mask: &[bool], tol: f64) -> bool {
    let m = h.dim();
    (0..m).all(|i| (0..m).all(|j| mask[i] == mask[j] || h.as_matrix()[(i, j)].norm() <= tol))
}

/// `[H, D_M] ≠ 0` for every proper nonempty subset `M`. Exhaustive for
/// `m ≤ EXHAUSTIVE_MAX`, otherwise via connectivity of the support graph of `H`
/// (equivalent: a commuting subset is a union of connected components).
pub fn is_nondegenerate(h: &HermitianMatrix) -> bool {
    let m = h.dim();
    let tol = BLOCK_TOL * h.as_matrix().max_abs();
    if h.as_matrix().max_abs() == 0.0 {
        return m <= 1;
    }
    if m <= EXHAUSTIVE_MAX {
        // Fixing index 0 inside M enumerates each {M, Mᶜ} pair once.
        (0..(1u32 << (m - 1)) - 1).all(|bits| {
            let mask: Vec<bool> = (0..m).map(|i| i == 0 || bits & (1 << (i - 1)) != 0).collect();
            !commutes_with_subset(h, &mask, tol)
        })
    } else {
        support_graph_connected(h, tol)
    }
}

pub(crate) fn support_graph_connected(h: &HermitianMatrix, tol: f64) -> bool {
    let m = h.dim();
    let mut seen = vec![false; m];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(i) = stack.pop() {
        for (j, s) in seen.iter_mut().enumerate() {
            if !*s && h.as_matrix()[(i, j)].norm() > tol {
                *s = true;
                stack.push(j);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Nullity of `UΓ + D_α UX = 0`; `1` on nondegenerate inputs (`α = c·1`, `Γ = −cX`).
/// Inputs with `[UXU†, D_M] = 0` for some proper subset are rejected.
pub fn trivial_partition_nullity(u: &ComplexMatrix, x: &HermitianMatrix) -> Result<usize> {
    let h = x.conjugate_by(u);
    if !is_nondegenerate(&h) {
        return Err(Error::Contract("rejected input: UXU† commutes with a proper diagonal projector".into()));
    }
    LinearSystemProbe::new(u, x)?.nullity()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CommutatorCheck {
    pub rank: usize,
    pub nondegenerate: bool,
}

/// Rank of `span{[H, D_{j}]}` and the nondegeneracy flag.
pub fn commutator_independence_check(h: &HermitianMatrix) -> Result<CommutatorCheck> {
    let m = h.dim();
    let cols: Vec<Vec<f64>> = (0..m)
        .map(|j| {
            let d =
                HermitianMatrix::from_real_diag(&(0..m).map(|i| if i == j { 1.0 } else { 0.0 }).collect::<Vec<_>>());
            let c = &h.as_matrix().matmul(d.as_matrix()) - &d.as_matrix().matmul(h.as_matrix());
            c.to_real_coords()
        })
        .collect();
    let rank = RealMatrix::from_columns(2 * m * m, &cols)?.svd()?.rank(SYSTEM_RANK_TOL);
    Ok(CommutatorCheck { rank, nondegenerate: is_nondegenerate(h) })
}
