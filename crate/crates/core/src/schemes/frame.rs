use num_complex::Complex64;
use rand::Rng;

use crate::error::{ensure, Error, Result};
use crate::matcore::{vectorize, ComplexMatrix, HermitianMatrix, RealMatrix};

use super::povm::{sample_haar_isometry, Povm, COMPLETENESS_TOL};
use super::Measurement;

/// Smallest admissible eigenvalue of the frame operator `Σ|vᵢ⟩⟨vᵢ|`.
pub const FRAME_BOUND_TOL: f64 = 1e-10;

/// Finite frame `{v₁, …, v_m}` in Cⁿ with the induced map `X ↦ (⟨vᵢ|X|vᵢ⟩)ᵢ`.
#[derive(Clone, Debug)]
pub struct Frame {
    n: usize,
    vectors: Vec<Vec<Complex64>>,
    parseval: bool,
    hmatrix: RealMatrix,
}

impl Frame {
    /// Validates the lower frame bound and detects the Parseval property.
    pub fn new(vectors: Vec<Vec<Complex64>>) -> Result<Self> {
        ensure!(!vectors.is_empty(), "a frame needs at least one vector");
        let n = vectors[0].len();
        ensure!(n >= 1 && vectors.iter().all(|v| v.len() == n), "frame vectors differ in length");
        let op = frame_operator(n, &vectors);
        let lo = op.eigenvalues()?[0];
        ensure!(lo > FRAME_BOUND_TOL, "vectors do not span Cⁿ (lower frame bound {lo:.3e})");
        let parseval = op.add_scaled(-1.0, &HermitianMatrix::identity(n)).hs_norm() <= COMPLETENESS_TOL;
        let rows: Vec<Vec<f64>> = vectors.iter().map(|v| vectorize(&HermitianMatrix::projector(v))).collect();
        let hmatrix = RealMatrix::from_rows(&rows)?;
        Ok(Self { n, vectors, parseval, hmatrix })
    }

    /// Frame whose vectors are `U†|j⟩` for the rows of an isometry; always Parseval.
    pub fn from_isometry_rows(u: &ComplexMatrix) -> Result<Self> {
        let vectors = (0..u.rows()).map(|j| (0..u.cols()).map(|i| u[(j, i)].conj()).collect()).collect();
        Self::new(vectors)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[Vec<Complex64>] {
        &self.vectors
    }

    pub fn is_parseval(&self) -> bool {
        self.parseval
    }

    /// `‖Σ|vᵢ⟩⟨vᵢ| − I‖₂`.
    pub fn completeness_residual(&self) -> f64 {
        frame_operator(self.n, &self.vectors).add_scaled(-1.0, &HermitianMatrix::identity(self.n)).hs_norm()
    }

    /// Phase-retrieval intensities `(|⟨vᵢ, x⟩|²)ᵢ`.
    pub fn intensities(&self, x: &[Complex64]) -> Result<Vec<f64>> {
        ensure!(x.len() == self.n, "signal length {} does not match frame dimension {}", x.len(), self.n);
        Ok(self
            .vectors
            .iter()
            .map(|v| v.iter().zip(x).map(|(a, b)| a.conj() * b).sum::<Complex64>().norm_sqr())
            .collect())
    }
}

impl Measurement for Frame {
    fn hilbert_dim(&self) -> usize {
        self.n
    }

    fn hmatrix(&self) -> &RealMatrix {
        &self.hmatrix
    }
}

fn frame_operator(n: usize, vectors: &[Vec<Complex64>]) -> HermitianMatrix {
    let mut op = HermitianMatrix::zeros(n);
    for v in vectors {
        op = op.add_scaled(1.0, &HermitianMatrix::projector(v));
    }
    op
}

/// `P_F = (|v₁⟩⟨v₁|, …, |v_m⟩⟨v_m|)` for a Parseval frame.
pub fn frame_to_povm(f: &Frame) -> Result<Povm> {
    if !f.is_parseval() {
        return Err(Error::Contract(format!(
            "frame is not Parseval (completeness residual {:.3e})",
            f.completeness_residual()
        )));
    }
    Povm::new(f.vectors.iter().map(|v| HermitianMatrix::projector(v)).collect())
}

/// `m` i.i.d. standard complex Gaussian vectors in Cⁿ.
pub fn sample_gaussian_frame<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Result<Frame> {
    ensure!(m >= n, "a frame in C^{n} needs at least {n} vectors, got {m}");
    let g = ComplexMatrix::gaussian(m, n, rng);
    Frame::new((0..m).map(|j| g.row(j).to_vec()).collect())
}

/// Parseval frame from the rows of a Haar isometry in U(m, n).
pub fn sample_parseval_frame<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Result<Frame> {
    Frame::from_isometry_rows(&sample_haar_isometry(m, n, rng)?)
}
