use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{ensure, Result};
use crate::matcore::{devectorize_dim, vectorize, HermitianMatrix, RealMatrix};

use super::Measurement;

const UNIT_TOL: f64 = 1e-10;

/// Tuple of product observables `O₁ ⊗ … ⊗ O_k` on `C^{n₁} ⊗ … ⊗ C^{n_k}`, each factor on
/// the unit sphere of its local hermitian space (traceless in Pauli mode).
#[derive(Clone, Debug)]
pub struct ObservableScheme {
    dims: Vec<usize>,
    observables: Vec<Vec<HermitianMatrix>>,
    pauli_mode: bool,
    hmatrix: RealMatrix,
}

impl ObservableScheme {
    pub fn new(dims: Vec<usize>, observables: Vec<Vec<HermitianMatrix>>, pauli_mode: bool) -> Result<Self> {
        ensure!(!dims.is_empty(), "need at least one tensor factor");
        ensure!(dims.iter().all(|&d| d >= 2), "local dimensions must be at least 2, got {dims:?}");
        ensure!(!observables.is_empty(), "need at least one observable");
        for (i, factors) in observables.iter().enumerate() {
            ensure!(
                factors.len() == dims.len(),
                "observable {i} has {} factors, expected {}",
                factors.len(),
                dims.len()
            );
            for (f, (o, &d)) in factors.iter().zip(&dims).enumerate() {
                ensure!(o.dim() == d, "observable {i} factor {f} has dimension {}, expected {d}", o.dim());
                ensure!(
                    (o.hs_norm() - 1.0).abs() <= UNIT_TOL,
                    "observable {i} factor {f} is not unit norm (‖O‖₂ = {})",
                    o.hs_norm()
                );
                if pauli_mode {
                    ensure!(o.trace().abs() <= UNIT_TOL, "observable {i} factor {f} is not traceless");
                }
            }
        }
        let rows: Vec<Vec<f64>> = observables.iter().map(|f| vectorize(&tensor_product(f))).collect();
        let hmatrix = RealMatrix::from_rows(&rows)?;
        Ok(Self { dims, observables, pauli_mode, hmatrix })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn observables(&self) -> &[Vec<HermitianMatrix>] {
        &self.observables
    }

    pub fn len(&self) -> usize {
        self.observables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observables.is_empty()
    }

    pub fn pauli_mode(&self) -> bool {
        self.pauli_mode
    }

    /// The `i`-th observable as a full operator.
    pub fn observable(&self, i: usize) -> HermitianMatrix {
        tensor_product(&self.observables[i])
    }
}

impl Measurement for ObservableScheme {
    fn hilbert_dim(&self) -> usize {
        self.dims.iter().product()
    }

    fn hmatrix(&self) -> &RealMatrix {
        &self.hmatrix
    }
}

pub fn tensor_product(factors: &[HermitianMatrix]) -> HermitianMatrix {
    let mut it = factors.iter();
    let first = it.next().expect("at least one factor").clone();
    it.fold(first, |acc, f| acc.kron(f))
}

/// Uniform point on the unit sphere of H(Cᵈ) (or its traceless subspace).
pub fn sample_unit_hermitian<R: Rng + ?Sized>(d: usize, traceless: bool, rng: &mut R) -> HermitianMatrix {
    loop {
        let mut v: Vec<f64> = (0..d * d).map(|_| rng.sample(StandardNormal)).collect();
        if traceless {
            v[0] = 0.0;
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            v.iter_mut().for_each(|x| *x /= norm);
            return devectorize_dim(&v, d);
        }
    }
}

/// `m` random product observables on `⊗ C^{dims[i]}`.
pub fn sample_local_observables<R: Rng + ?Sized>(
    dims: &[usize],
    m: usize,
    pauli_mode: bool,
    rng: &mut R,
) -> Result<ObservableScheme> {
    ensure!(m >= 1, "need at least one observable");
    ensure!(dims.iter().all(|&d| d >= 2), "local dimensions must be at least 2, got {dims:?}");
    let observables =
        (0..m).map(|_| dims.iter().map(|&d| sample_unit_hermitian(d, pauli_mode, rng)).collect()).collect();
    ObservableScheme::new(dims.to_vec(), observables, pauli_mode)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{hs_inner, ComplexMatrix};
    use crate::schemes::apply_scheme;
    use crate::seed::rng_from_seed;

    #[test]
    fn unit_factors() {
        let s = sample_local_observables(&[2, 2], 1, false, &mut rng_from_seed(1)).unwrap();
        assert_eq!(s.len(), 1);
        for o in &s.observables()[0] {
            assert!((o.hs_norm() - 1.0).abs() < 1e-12);
        }
        assert_eq!(s.hilbert_dim(), 4);
    }

    #[test]
    fn pauli_mode_is_traceless_and_kills_identity() {
        let s = sample_local_observables(&[2, 2, 2], 5, true, &mut rng_from_seed(2)).unwrap();
        for factors in s.observables() {
            for o in factors {
                assert!(o.trace().abs() <= 1e-12);
            }
        }
        let y = apply_scheme(&s, &HermitianMatrix::identity(8).scale(1.0 / 8.0)).unwrap();
        assert!(y.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn hmatrix_rows_agree_with_tensor_contraction() {
        let mut rng = rng_from_seed(3);
        let s = sample_local_observables(&[2, 3], 4, false, &mut rng).unwrap();
        let x = HermitianMatrix::symmetrize(ComplexMatrix::gaussian(6, 6, &mut rng));
        let y = apply_scheme(&s, &x).unwrap();
        for (i, yi) in y.iter().enumerate() {
            let [a, b] = [&s.observables()[i][0], &s.observables()[i][1]];
            // tr((A⊗B)X) computed entrywise from the factors
            let mut t = num_complex::Complex64::new(0.0, 0.0);
            for i1 in 0..2 {
                for j1 in 0..3 {
                    for i2 in 0..2 {
                        for j2 in 0..3 {
                            let ab = a.as_matrix()[(i1, i2)] * b.as_matrix()[(j1, j2)];
                            t += ab * x.as_matrix()[(i2 * 3 + j2, i1 * 3 + j1)];
                        }
                    }
                }
            }
            assert!((yi - t.re).abs() < 1e-12);
            assert!((yi - hs_inner(&s.observable(i), &x).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_non_unit_factor() {
        let o = HermitianMatrix::identity(2);
        assert!(ObservableScheme::new(vec![2], vec![vec![o]], false).is_err());
    }
}
