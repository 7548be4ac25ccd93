use num_complex::Complex64;

use super::complex::{ComplexMatrix, ZERO};
use crate::error::{ensure, Error, Result};

/// Relative size of an `R` diagonal entry below which the input counts as rank deficient.
pub const RANK_TOL: f64 = 1e-12;

/// Q factor of a thin QR decomposition with real positive `R` diagonal.
///
/// Classical Gram–Schmidt with one reorthogonalization pass per column. With the
/// sign convention the map is deterministic and fixes every isometry.
pub fn qr_isometry(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (m, n) = (a.rows(), a.cols());
    ensure!(m >= n, "qr_isometry needs rows >= cols, got {m}x{n}");
    let scale = (0..n).map(|j| a.column(j).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()).fold(0.0, f64::max);
    let mut q = ComplexMatrix::zeros(m, n);
    let mut col = vec![ZERO; m];
    for j in 0..n {
        for (i, c) in col.iter_mut().enumerate() {
            *c = a[(i, j)];
        }
        for _ in 0..2 {
            for k in 0..j {
                let proj: Complex64 = (0..m).map(|i| q[(i, k)].conj() * col[i]).sum();
                for (i, c) in col.iter_mut().enumerate() {
                    *c -= q[(i, k)] * proj;
                }
            }
        }
        let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > RANK_TOL * scale) || norm == 0.0 {
            return Err(Error::Degenerate(format!("column {j} is dependent on earlier columns (|R_jj| = {norm:.3e})")));
        }
        for (i, c) in col.iter().enumerate() {
            q[(i, j)] = c / norm;
        }
    }
    Ok(q)
}

/// Orthonormal basis of the orthogonal complement of the columns of an isometry `w` (`n × ρ`).
pub fn orthogonal_complement(w: &ComplexMatrix) -> ComplexMatrix {
    let (n, rho) = (w.rows(), w.cols());
    let mut basis: Vec<Vec<Complex64>> = (0..rho).map(|j| w.column(j)).collect();
    let residual = |basis: &[Vec<Complex64>], e: usize| {
        let mut v = vec![ZERO; n];
        v[e] = Complex64::new(1.0, 0.0);
        for _ in 0..2 {
            for b in basis {
                let proj: Complex64 = b.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= bi * proj;
                }
            }
        }
        v
    };
    let mut c = ComplexMatrix::zeros(n, n - rho);
    for j in 0..n - rho {
        // The best standard basis vector keeps at least sqrt((n - dim)/n) of its norm.
        let (v, norm) = (0..n)
            .map(|e| {
                let v = residual(&basis, e);
                let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                (v, norm)
            })
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("n > 0");
        let v: Vec<Complex64> = v.into_iter().map(|z| z / norm).collect();
        c.set_column(j, &v);
        basis.push(v);
    }
    c
}
