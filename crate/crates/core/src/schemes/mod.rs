//! Constrained measurement schemes and their induced linear maps.
//!
//! Every scheme exposes `h_M` as a real matrix acting on Gell-Mann coordinates
//! (see [`crate::matcore::vectorize`]): row `i` is the vectorized effect or observable,
//! so `h_M(X) = hmatrix · vectorize(X)`.

mod frame;
mod io;
mod observables;
mod povm;

pub use frame::{frame_to_povm, sample_gaussian_frame, sample_parseval_frame, Frame, FRAME_BOUND_TOL};
pub use io::{AnyScheme, SchemeFile, SchemeKind};
pub use observables::{sample_local_observables, sample_unit_hermitian, tensor_product, ObservableScheme};
pub use povm::{
    computational_basis, isometry_to_povm, qubit_mub_scheme, sample_haar_isometry, sample_scheme_rank_one,
    sample_scheme_von_neumann, trine_povm, MeasurementScheme, Povm, COMPLETENESS_TOL, ISOMETRY_TOL, PSD_TOL,
};

use crate::error::{ensure, Result};
use crate::matcore::{vectorize, HermitianMatrix, RealMatrix};

/// Anything that induces a linear map `H(Cⁿ) → R^K`.
pub trait Measurement {
    fn hilbert_dim(&self) -> usize;

    /// `K × n²` matrix of the induced map in Gell-Mann coordinates.
    fn hmatrix(&self) -> &RealMatrix;

    fn num_outcomes(&self) -> usize {
        self.hmatrix().rows()
    }
}

impl<T: Measurement + ?Sized> Measurement for &T {
    fn hilbert_dim(&self) -> usize {
        (**self).hilbert_dim()
    }

    fn hmatrix(&self) -> &RealMatrix {
        (**self).hmatrix()
    }
}

/// `h_M(X) = (tr(Q₁X), …)`.
pub fn apply_scheme<M: Measurement + ?Sized>(s: &M, x: &HermitianMatrix) -> Result<Vec<f64>> {
    ensure!(
        x.dim() == s.hilbert_dim(),
        "operator dimension {} does not match scheme dimension {}",
        x.dim(),
        s.hilbert_dim()
    );
    Ok(s.hmatrix().matvec(&vectorize(x)))
}

/// `d(M, M') = ‖h_M − h_M'‖`, the operator norm with respect to ‖·‖₂ on H(Cⁿ).
pub fn scheme_distance<A: Measurement + ?Sized, B: Measurement + ?Sized>(a: &A, b: &B) -> Result<f64> {
    ensure!(a.hilbert_dim() == b.hilbert_dim(), "schemes act on different dimensions");
    let diff = a.hmatrix().sub(b.hmatrix())?;
    diff.spectral_norm()
}
