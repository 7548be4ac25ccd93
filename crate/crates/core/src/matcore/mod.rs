//! Dense complex linear algebra at small dimension and real coordinates for H(Cⁿ).
//!
//! Everything here is single-threaded with a fixed reduction order, so results are
//! reproducible bit for bit across runs.

mod basis;
mod complex;
mod hermitian;
mod qr;
mod real;

pub(crate) use basis::devectorize_dim;
pub use basis::{basis_element, devectorize, vectorize, IDENTITY_INDEX};
pub use complex::{ComplexMatrix, ONE, ZERO};
pub use hermitian::{eig_hermitian, hs_inner, Eigen, HermitianMatrix, HERMITICITY_REJECT};
pub use num_complex::Complex64;
pub use qr::{orthogonal_complement, qr_isometry, RANK_TOL};
pub use real::{RealMatrix, Svd};

/// `(I, σx, σy, σz)`.
pub fn paulis() -> [HermitianMatrix; 4] {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let mk = |a: [Complex64; 4]| HermitianMatrix::new(ComplexMatrix::from_vec(2, 2, a.to_vec()).unwrap()).unwrap();
    [
        mk([c(1., 0.), c(0., 0.), c(0., 0.), c(1., 0.)]),
        mk([c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]),
        mk([c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]),
        mk([c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]),
    ]
}

/// Dot product of two real slices.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
