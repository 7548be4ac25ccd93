//! Wirtinger-gradient identities for quadratic forms in an `m × n` complex matrix `Y`.
//!
//! For a real-valued `F(Y)` the complex gradient is `L = (∂_R − i∂_I) F`, taken entrywise
//! over the real and imaginary parts of `Y`. The analytic forms are compared against central
//! differences of `F`.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{ensure, Result};
use crate::matcore::{Complex64, ComplexMatrix, HermitianMatrix};

use crate::varieties::FD_STEP;

/// Real matrix with standard normal entries.
fn real_gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| Complex64::new(rng.sample(StandardNormal), 0.0))
}

/// `Σ_lo Re(conj(M_lo) · Z_lo)`, i.e. `Σ α^R Re Z + α^I Im Z`.
fn paired(m: &ComplexMatrix, z: &ComplexMatrix) -> f64 {
    m.real_inner(z)
}

/// Central-difference complex gradient `(∂_R − i∂_I) F` at `y`.
pub fn fd_complex_gradient(f: impl Fn(&ComplexMatrix) -> f64, y: &ComplexMatrix, h: f64) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(y.rows(), y.cols());
    for j in 0..y.rows() {
        for k in 0..y.cols() {
            let mut d = [0.0; 2];
            for (slot, unit) in [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)].into_iter().enumerate() {
                let mut plus = y.clone();
                plus[(j, k)] += unit * h;
                let mut minus = y.clone();
                minus[(j, k)] -= unit * h;
                d[slot] = (f(&plus) - f(&minus)) / (2.0 * h);
            }
            out[(j, k)] = Complex64::new(d[0], -d[1]);
        }
    }
    out
}

fn relative_error(analytic: &ComplexMatrix, fd: &ComplexMatrix) -> f64 {
    let diff = analytic.add_scaled(-1.0, fd).frobenius_norm();
    let scale = analytic.frobenius_norm();
    if scale > 1e-12 {
        diff / scale
    } else {
        diff
    }
}

/// `L = AᵀM_α*CᵀY*Bᵀ + C M_αᵀ A Y* B*` for `F(Y) = Σ α^R Re(AYBY†C) + α^I Im(AYBY†C)`.
pub fn quadratic_form_gradient(
    a: &ComplexMatrix,
    b: &HermitianMatrix,
    c: &ComplexMatrix,
    y: &ComplexMatrix,
    m_alpha: &ComplexMatrix,
) -> ComplexMatrix {
    let bm = b.as_matrix();
    let yc = y.conj();
    let first = a.transpose().matmul(&m_alpha.conj()).matmul(&c.transpose()).matmul(&yc).matmul(&bm.transpose());
    let second = c.matmul(&m_alpha.transpose()).matmul(a).matmul(&yc).matmul(&bm.conj());
    &first + &second
}

/// `L = conj(Y(M_γ + M_γ†))` for `F(Y) = Σ γ^R (Re(Y†Y) − I) + γ^I Im(Y†Y)`.
pub fn isometry_gradient(y: &ComplexMatrix, m_gamma: &ComplexMatrix) -> ComplexMatrix {
    y.matmul(&(m_gamma + &m_gamma.adjoint())).conj()
}

/// Max relative deviation between [`quadratic_form_gradient`] and finite differences over `trials`
/// random `M_α` with real `A` (`s×m`), `C` (`m×t`) and the given `B`, `Y`.
pub fn differential_identity_check<R: Rng + ?Sized>(
    a: &ComplexMatrix,
    b: &HermitianMatrix,
    c: &ComplexMatrix,
    y: &ComplexMatrix,
    trials: usize,
    rng: &mut R,
) -> Result<f64> {
    let (s, m, t, n) = (a.rows(), a.cols(), c.cols(), y.cols());
    ensure!(
        c.rows() == m && y.rows() == m && b.dim() == n,
        "shape mismatch: A {s}x{m}, C {}x{t}, Y {}x{n}, B {}",
        c.rows(),
        y.rows(),
        b.dim()
    );
    ensure!(a.as_slice().iter().chain(c.as_slice()).all(|z| z.im == 0.0), "A and C must be real");
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let m_alpha = ComplexMatrix::gaussian(s, t, rng);
        worst = worst.max(quadratic_form_error(a, b, c, y, &m_alpha));
    }
    Ok(worst)
}

pub(crate) fn quadratic_form_error(
    a: &ComplexMatrix,
    b: &HermitianMatrix,
    c: &ComplexMatrix,
    y: &ComplexMatrix,
    m_alpha: &ComplexMatrix,
) -> f64 {
    let f = |z: &ComplexMatrix| paired(m_alpha, &a.matmul(z).matmul(b.as_matrix()).matmul(&z.adjoint()).matmul(c));
    relative_error(&quadratic_form_gradient(a, b, c, y, m_alpha), &fd_complex_gradient(f, y, FD_STEP))
}

/// Max relative deviation between [`isometry_gradient`] and finite differences over
/// `trials` random `M_γ` at an isometry `y`.
pub fn isometry_constraint_identity_check<R: Rng + ?Sized>(
    y: &ComplexMatrix,
    trials: usize,
    rng: &mut R,
) -> Result<f64> {
    ensure!(y.isometry_residual() <= 1e-10, "Y is not an isometry (residual {:.3e})", y.isometry_residual());
    let n = y.cols();
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        worst = worst.max(isometry_error(y, &ComplexMatrix::gaussian(n, n, rng)));
    }
    Ok(worst)
}

pub(crate) fn isometry_error(y: &ComplexMatrix, m_gamma: &ComplexMatrix) -> f64 {
    let n = y.cols();
    let f = |z: &ComplexMatrix| paired(m_gamma, &z.adjoint_mul(z).add_scaled(-1.0, &ComplexMatrix::identity(n)));
    relative_error(&isometry_gradient(y, m_gamma), &fd_complex_gradient(f, y, FD_STEP))
}

/// Random real `s × m` and `m × t` coefficient matrices for probes.
pub fn random_real_pair<R: Rng + ?Sized>(s: usize, m: usize, t: usize, rng: &mut R) -> (ComplexMatrix, ComplexMatrix) {
    (real_gaussian(s, m, rng), real_gaussian(m, t, rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schemes::{sample_haar_isometry, sample_unit_hermitian};
    use crate::seed::rng_from_seed;

    #[test]
    fn identity_coefficients() {
        let mut rng = rng_from_seed(1);
        let y = ComplexMatrix::gaussian(3, 3, &mut rng);
        let id = ComplexMatrix::identity(3);
        let err = differential_identity_check(&id, &HermitianMatrix::identity(3), &id, &y, 10, &mut rng).unwrap();
        assert!(err <= 1e-6, "{err:.3e}");
    }

    #[test]
    fn random_shapes() {
        let mut rng = rng_from_seed(2);
        let (a, c) = random_real_pair(3, 4, 2, &mut rng);
        let b = sample_unit_hermitian(3, false, &mut rng);
        let y = ComplexMatrix::gaussian(4, 3, &mut rng);
        let err = differential_identity_check(&a, &b, &c, &y, 10, &mut rng).unwrap();
        assert!(err <= 1e-6, "{err:.3e}");
    }

    #[test]
    fn zero_alpha_gives_zero_gradient() {
        let mut rng = rng_from_seed(3);
        let (a, c) = random_real_pair(2, 3, 2, &mut rng);
        let b = sample_unit_hermitian(2, false, &mut rng);
        let y = ComplexMatrix::gaussian(3, 2, &mut rng);
        let zero = ComplexMatrix::zeros(2, 2);
        assert_eq!(quadratic_form_gradient(&a, &b, &c, &y, &zero).max_abs(), 0.0);
        assert_eq!(quadratic_form_error(&a, &b, &c, &y, &zero), 0.0);
    }

    #[test]
    fn complex_coefficients_rejected() {
        let mut rng = rng_from_seed(4);
        let a = ComplexMatrix::gaussian(2, 2, &mut rng);
        let y = ComplexMatrix::gaussian(2, 2, &mut rng);
        let id = ComplexMatrix::identity(2);
        assert!(differential_identity_check(&a, &HermitianMatrix::identity(2), &id, &y, 1, &mut rng).is_err());
    }

    #[test]
    fn isometry_identity() {
        let mut rng = rng_from_seed(5);
        let embedded = ComplexMatrix::eye(5, 3);
        assert!(isometry_constraint_identity_check(&embedded, 10, &mut rng).unwrap() <= 1e-6);
        let haar = sample_haar_isometry(5, 3, &mut rng).unwrap();
        assert!(isometry_constraint_identity_check(&haar, 10, &mut rng).unwrap() <= 1e-6);
        assert!(isometry_constraint_identity_check(&ComplexMatrix::gaussian(4, 2, &mut rng), 1, &mut rng).is_err());
    }

    #[test]
    fn skew_gamma_gives_zero_system() {
        let mut rng = rng_from_seed(6);
        let g = ComplexMatrix::gaussian(3, 3, &mut rng);
        let skew = g.add_scaled(-1.0, &g.adjoint());
        let y = sample_haar_isometry(4, 3, &mut rng).unwrap();
        assert!(isometry_gradient(&y, &skew).max_abs() < 1e-15);
        assert!(isometry_error(&y, &skew) < 1e-8);
    }
}
