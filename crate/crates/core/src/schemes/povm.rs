use num_complex::Complex64;
use rand::Rng;

use crate::error::{ensure, Error, Result};
use crate::matcore::{qr_isometry, vectorize, ComplexMatrix, HermitianMatrix, RealMatrix};

use super::Measurement;

/// Smallest admissible effect eigenvalue (Jacobi round-off floor).
pub const PSD_TOL: f64 = -1e-10;
/// Allowed `‖Σ Qᵢ − I‖₂`.
pub const COMPLETENESS_TOL: f64 = 1e-10;
/// Allowed `‖U†U − I‖` for inputs that must be isometries.
pub const ISOMETRY_TOL: f64 = 1e-10;

/// Tuple of positive semidefinite effects summing to the identity.
#[derive(Clone, Debug)]
pub struct Povm {
    dim_hilbert: usize,
    effects: Vec<HermitianMatrix>,
}

impl Povm {
    pub fn new(effects: Vec<HermitianMatrix>) -> Result<Self> {
        ensure!(!effects.is_empty(), "a POVM needs at least one effect");
        let n = effects[0].dim();
        ensure!(effects.iter().all(|e| e.dim() == n), "effects act on different dimensions");
        for (j, e) in effects.iter().enumerate() {
            let lo = e.eigenvalues()?[0];
            ensure!(lo >= PSD_TOL, "effect {j} is not positive semidefinite (min eigenvalue {lo:.3e})");
        }
        let residual = completeness_residual(&effects);
        ensure!(residual <= COMPLETENESS_TOL, "effects do not sum to the identity (residual {residual:.3e})");
        Ok(Self { dim_hilbert: n, effects })
    }

    pub fn dim_hilbert(&self) -> usize {
        self.dim_hilbert
    }

    /// Number of outcomes, `dim P`.
    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn effects(&self) -> &[HermitianMatrix] {
        &self.effects
    }

    /// Whether every effect has rank at most one.
    pub fn is_rank_one(&self) -> Result<bool> {
        for e in &self.effects {
            let ev = e.eigenvalues()?;
            if ev.len() >= 2 && ev[ev.len() - 2] > 1e-10 {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// An isometry `U` with `φ(U) = self`, for rank-one POVMs. Row `j` is `⟨u_j|` where
    /// `Q_j = |u_j⟩⟨u_j|`; row phases are arbitrary (φ is invariant under them).
    pub fn to_isometry(&self) -> Result<ComplexMatrix> {
        if !self.is_rank_one()? {
            return Err(Error::Contract("to_isometry needs a rank-one POVM".into()));
        }
        let n = self.dim_hilbert;
        let mut u = ComplexMatrix::zeros(self.effects.len(), n);
        for (j, e) in self.effects.iter().enumerate() {
            let eig = e.eig()?;
            let top = eig.values[n - 1].max(0.0).sqrt();
            for i in 0..n {
                u[(j, i)] = (eig.vectors[(i, n - 1)] * top).conj();
            }
        }
        Ok(u)
    }
}

fn completeness_residual(effects: &[HermitianMatrix]) -> f64 {
    let n = effects[0].dim();
    let mut sum = HermitianMatrix::identity(n).scale(-1.0);
    for e in effects {
        sum = sum.add_scaled(1.0, e);
    }
    sum.hs_norm()
}

/// `φ(U) = (U†|1⟩⟨1|U, …, U†|m⟩⟨m|U)`.
pub fn isometry_to_povm(u: &ComplexMatrix) -> Result<Povm> {
    ensure!(u.rows() >= u.cols(), "isometry must be tall, got {}x{}", u.rows(), u.cols());
    let residual = u.isometry_residual();
    ensure!(residual <= ISOMETRY_TOL, "input is not an isometry (‖U†U − I‖ = {residual:.3e})");
    let n = u.cols();
    let effects = (0..u.rows())
        .map(|j| {
            let v: Vec<Complex64> = (0..n).map(|i| u[(j, i)].conj()).collect();
            HermitianMatrix::projector(&v)
        })
        .collect();
    Ok(Povm { dim_hilbert: n, effects })
}

/// Haar-distributed element of U(m, n): complex Gaussian matrix followed by the
/// positive-diagonal QR convention.
pub fn sample_haar_isometry<R: Rng + ?Sized>(m: usize, n: usize, rng: &mut R) -> Result<ComplexMatrix> {
    ensure!(m >= n, "U({m},{n}) is empty: need m >= n");
    ensure!(n >= 1, "isometry needs at least one column");
    loop {
        let g = ComplexMatrix::gaussian(m, n, rng);
        match qr_isometry(&g) {
            Ok(q) => return Ok(q),
            // Probability zero; draw again.
            Err(Error::Degenerate(_)) => continue,
            Err(e) => return Err(e),
        }
    }
}

/// Tuple of POVMs together with the cached real matrix of `h_M`.
#[derive(Clone, Debug)]
pub struct MeasurementScheme {
    n: usize,
    povms: Vec<Povm>,
    hmatrix: RealMatrix,
    isometries: Option<Vec<ComplexMatrix>>,
}

impl MeasurementScheme {
    pub fn new(povms: Vec<Povm>) -> Result<Self> {
        ensure!(!povms.is_empty(), "a measurement scheme needs at least one POVM");
        let n = povms[0].dim_hilbert();
        ensure!(povms.iter().all(|p| p.dim_hilbert() == n), "POVMs act on different dimensions");
        let rows: Vec<Vec<f64>> = povms.iter().flat_map(|p| p.effects().iter().map(vectorize)).collect();
        let hmatrix = RealMatrix::from_rows(&rows)?;
        Ok(Self { n, povms, hmatrix, isometries: None })
    }

    /// Rank-one scheme `(φ(U₁), …, φ(U_k))`, remembering the isometries.
    pub fn from_isometries(isometries: Vec<ComplexMatrix>) -> Result<Self> {
        let povms = isometries.iter().map(isometry_to_povm).collect::<Result<Vec<_>>>()?;
        let mut s = Self::new(povms)?;
        s.isometries = Some(isometries);
        Ok(s)
    }

    pub fn povms(&self) -> &[Povm] {
        &self.povms
    }

    /// Number of POVMs `k`.
    pub fn num_povms(&self) -> usize {
        self.povms.len()
    }

    /// `dim M = Σ dim Pᵢ`.
    pub fn total_dim(&self) -> usize {
        self.povms.iter().map(Povm::len).sum()
    }

    /// Outcome count when all POVMs share one, else `None`.
    pub fn outcomes_per_povm(&self) -> Option<usize> {
        let m = self.povms[0].len();
        self.povms.iter().all(|p| p.len() == m).then_some(m)
    }

    /// Underlying isometries, recovered from the effects when not stored.
    pub fn isometries(&self) -> Result<Vec<ComplexMatrix>> {
        match &self.isometries {
            Some(u) => Ok(u.clone()),
            None => self.povms.iter().map(Povm::to_isometry).collect(),
        }
    }

    /// Appends one more POVM.
    pub fn with_povm(&self, p: Povm) -> Result<Self> {
        let mut povms = self.povms.clone();
        povms.push(p);
        Self::new(povms)
    }
}

impl Measurement for MeasurementScheme {
    fn hilbert_dim(&self) -> usize {
        self.n
    }

    fn hmatrix(&self) -> &RealMatrix {
        &self.hmatrix
    }
}

/// `k` independent Haar rank-one POVMs with `m` outcomes on Cⁿ.
pub fn sample_scheme_rank_one<R: Rng + ?Sized>(n: usize, m: usize, k: usize, rng: &mut R) -> Result<MeasurementScheme> {
    ensure!(n >= 2, "Hilbert dimension must be at least 2, got {n}");
    ensure!(m >= n, "rank-one POVMs on C^{n} need m >= n outcomes, got {m}");
    ensure!(k >= 1, "need at least one POVM");
    let us = (0..k).map(|_| sample_haar_isometry(m, n, rng)).collect::<Result<Vec<_>>>()?;
    MeasurementScheme::from_isometries(us)
}

/// `k` Haar von Neumann measurements (`m = n`).
pub fn sample_scheme_von_neumann<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<MeasurementScheme> {
    sample_scheme_rank_one(n, n, k, rng)
}

/// Computational-basis von Neumann measurement on Cⁿ.
pub fn computational_basis(n: usize) -> MeasurementScheme {
    MeasurementScheme::from_isometries(vec![ComplexMatrix::identity(n)]).expect("identity is an isometry")
}

/// Eigenbases of σx, σy, σz (outcome order `+, −` within each basis).
pub fn qubit_mub_scheme() -> MeasurementScheme {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let c = |re: f64, im: f64| Complex64::new(re, im);
    // Rows are the bras ⟨v_j|.
    let x = ComplexMatrix::from_vec(2, 2, vec![c(h, 0.), c(h, 0.), c(h, 0.), c(-h, 0.)]).unwrap();
    let y = ComplexMatrix::from_vec(2, 2, vec![c(h, 0.), c(0., -h), c(h, 0.), c(0., h)]).unwrap();
    let z = ComplexMatrix::identity(2);
    MeasurementScheme::from_isometries(vec![x, y, z]).expect("MUB bases are unitary")
}

/// Symmetric real trine: effects `(2/3)|ψⱼ⟩⟨ψⱼ|` with Bloch vectors 120° apart in the x–z plane.
pub fn trine_povm() -> MeasurementScheme {
    let s = (2.0f64 / 3.0).sqrt();
    let mut u = ComplexMatrix::zeros(3, 2);
    for j in 0..3 {
        let half = std::f64::consts::PI * j as f64 / 3.0;
        u[(j, 0)] = Complex64::new(s * half.cos(), 0.0);
        u[(j, 1)] = Complex64::new(s * half.sin(), 0.0);
    }
    MeasurementScheme::from_isometries(vec![u]).expect("trine rows form an isometry")
}
