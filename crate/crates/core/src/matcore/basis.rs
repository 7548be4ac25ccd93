//! Real coordinates for H(Cⁿ) in an orthonormal generalized Gell-Mann basis.
//!
//! Ordering of the n² basis elements (all with unit Hilbert–Schmidt norm):
//!
//! 1. `I/√n`
//! 2. symmetric off-diagonals `(E_jk + E_kj)/√2` for `j < k`, lexicographic in `(j, k)`
//! 3. antisymmetric off-diagonals `(−i E_jk + i E_kj)/√2` for `j < k`, same order
//! 4. traceless diagonals `(E_00 + … + E_{l−1,l−1} − l E_ll)/√(l(l+1))` for `l = 1..n−1`
//!
//! For n = 2 this is `(I, σx, σy, σz)/√2`.

use num_complex::Complex64;

use super::complex::ComplexMatrix;
use super::hermitian::HermitianMatrix;
use crate::error::{ensure, Result};

const SQRT2: f64 = std::f64::consts::SQRT_2;

fn off_diagonal_pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |j| (j + 1..n).map(move |k| (j, k)))
}

/// Coordinates `v_a = tr(B_a A)`; `‖v‖ = ‖A‖₂`.
pub fn vectorize(a: &HermitianMatrix) -> Vec<f64> {
    let n = a.dim();
    let m = a.as_matrix();
    let mut v = Vec::with_capacity(n * n);
    v.push(a.trace() / (n as f64).sqrt());
    v.extend(off_diagonal_pairs(n).map(|(j, k)| SQRT2 * m[(j, k)].re));
    v.extend(off_diagonal_pairs(n).map(|(j, k)| -SQRT2 * m[(j, k)].im));
    let mut prefix = 0.0;
    for l in 1..n {
        prefix += m[(l - 1, l - 1)].re;
        let lf = l as f64;
        v.push((prefix - lf * m[(l, l)].re) / (lf * (lf + 1.0)).sqrt());
    }
    v
}

/// Inverse of [`vectorize`].
pub fn devectorize(v: &[f64]) -> Result<HermitianMatrix> {
    let n = (v.len() as f64).sqrt().round() as usize;
    ensure!(n * n == v.len() && n > 0, "coordinate vector length {} is not a positive square", v.len());
    Ok(devectorize_dim(v, n))
}

pub(crate) fn devectorize_dim(v: &[f64], n: usize) -> HermitianMatrix {
    debug_assert_eq!(v.len(), n * n);
    let mut m = ComplexMatrix::zeros(n, n);
    let id = v[0] / (n as f64).sqrt();
    for i in 0..n {
        m[(i, i)] = Complex64::new(id, 0.0);
    }
    let pairs = n * (n - 1) / 2;
    for (idx, (j, k)) in off_diagonal_pairs(n).enumerate() {
        let re = v[1 + idx] / SQRT2;
        let im = -v[1 + pairs + idx] / SQRT2;
        m[(j, k)] = Complex64::new(re, im);
        m[(k, j)] = Complex64::new(re, -im);
    }
    let base = 1 + 2 * pairs;
    for l in 1..n {
        let lf = l as f64;
        let c = v[base + l - 1] / (lf * (lf + 1.0)).sqrt();
        for i in 0..l {
            m[(i, i)].re += c;
        }
        m[(l, l)].re -= lf * c;
    }
    HermitianMatrix::symmetrize(m)
}

/// The `a`-th basis element.
pub fn basis_element(n: usize, a: usize) -> HermitianMatrix {
    let mut e = vec![0.0; n * n];
    e[a] = 1.0;
    devectorize_dim(&e, n)
}

/// Coordinate index of the normalized identity.
pub const IDENTITY_INDEX: usize = 0;
