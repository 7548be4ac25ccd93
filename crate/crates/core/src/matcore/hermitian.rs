use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::complex::{ComplexMatrix, ZERO};
use crate::error::{ensure, Error, Result};

/// Residual above which a nominally hermitian input is rejected rather than symmetrized.
pub const HERMITICITY_REJECT: f64 = 1e-9;

const JACOBI_MAX_SWEEPS: usize = 100;
const JACOBI_OFF_TOL: f64 = 1e-13;

/// Element of H(Cⁿ). Always exactly hermitian (diagonal real, `A[j,i] = conj(A[i,j])`).
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix {
    inner: ComplexMatrix,
}

/// Spectral decomposition `A = V diag(values) V†`, values ascending.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianMatrix {
    /// Symmetrizes `(A + A†)/2` when `A` is hermitian up to [`HERMITICITY_REJECT`].
    pub fn new(a: ComplexMatrix) -> Result<Self> {
        ensure!(a.is_square(), "hermitian matrix must be square, got {}x{}", a.rows(), a.cols());
        ensure!(a.is_finite(), "hermitian matrix entries must be finite");
        let n = a.rows();
        let mut residual: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                residual = residual.max((a[(i, j)] - a[(j, i)].conj()).norm());
            }
        }
        if residual > HERMITICITY_REJECT {
            return Err(Error::Contract(format!("matrix is not hermitian (residual {residual:.3e})")));
        }
        Ok(Self::symmetrize(a))
    }

    /// Hermitian part `(A + A†)/2` with no tolerance check.
    pub fn symmetrize(a: ComplexMatrix) -> Self {
        assert!(a.is_square());
        let n = a.rows();
        let mut m = a;
        for i in 0..n {
            m[(i, i)] = Complex64::new(m[(i, i)].re, 0.0);
            for j in i + 1..n {
                let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
                m[(i, j)] = avg;
                m[(j, i)] = avg.conj();
            }
        }
        Self { inner: m }
    }

    pub fn zeros(n: usize) -> Self {
        Self { inner: ComplexMatrix::zeros(n, n) }
    }

    pub fn identity(n: usize) -> Self {
        Self { inner: ComplexMatrix::identity(n) }
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        Self { inner: ComplexMatrix::from_real_diag(diag) }
    }

    /// `|v⟩⟨v|`.
    pub fn projector(v: &[Complex64]) -> Self {
        let n = v.len();
        Self::symmetrize(ComplexMatrix::from_fn(n, n, |i, j| v[i] * v[j].conj()))
    }

    /// `W diag(λ) W†` for any `n × ρ` matrix `W`.
    pub fn from_factors(w: &ComplexMatrix, lambda: &[f64]) -> Self {
        let wl = w.mul_real_diag(lambda);
        Self::symmetrize(wl.matmul(&w.adjoint()))
    }

    /// Conjugation `U X U†` for `U` of shape `m × n`.
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> Self {
        Self::symmetrize(u.matmul(&self.inner).matmul(&u.adjoint()))
    }

    pub fn dim(&self) -> usize {
        self.inner.rows()
    }

    pub fn as_matrix(&self) -> &ComplexMatrix {
        &self.inner
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.inner
    }

    pub fn trace(&self) -> f64 {
        self.inner.trace().re
    }

    /// Hilbert–Schmidt norm `sqrt(tr A²)`.
    pub fn hs_norm(&self) -> f64 {
        self.inner.frobenius_norm()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { inner: self.inner.scale_real(s) }
    }

    pub fn add_scaled(&self, s: f64, other: &Self) -> Self {
        Self { inner: self.inner.add_scaled(s, &other.inner) }
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self::symmetrize(self.inner.kron(&other.inner))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.inner.max_abs_diff(&other.inner)
    }

    /// Cyclic complex Jacobi eigendecomposition.
    pub fn eig(&self) -> Result<Eigen> {
        eig_hermitian(self)
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(self.eig()?.values)
    }

    /// Count of eigenvalues with magnitude above `tol`.
    pub fn numerical_rank(&self, tol: f64) -> Result<usize> {
        Ok(self.eigenvalues()?.iter().filter(|l| l.abs() > tol).count())
    }

    /// Trace norm `Σ|λᵢ|`.
    pub fn trace_norm(&self) -> Result<f64> {
        Ok(self.eigenvalues()?.iter().map(|l| l.abs()).sum())
    }
}

/// Hilbert–Schmidt inner product `tr(a b)`.
pub fn hs_inner(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<f64> {
    ensure!(a.dim() == b.dim(), "hs_inner dimension mismatch: {} vs {}", a.dim(), b.dim());
    let n = a.dim();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += a.inner[(i, j)] * b.inner[(j, i)];
        }
    }
    // Exact for hermitian operands up to rounding.
    debug_assert!(acc.im.abs() <= 1e-12 * (1.0 + acc.re.abs()));
    Ok(acc.re)
}

pub fn eig_hermitian(a: &HermitianMatrix) -> Result<Eigen> {
    let n = a.dim();
    let mut m = a.inner.clone();
    let mut v = ComplexMatrix::identity(n);
    let scale = m.frobenius_norm().max(f64::MIN_POSITIVE);
    let off = |m: &ComplexMatrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m[(i, j)].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    while off(&m) > JACOBI_OFF_TOL * scale {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::Numerical {
                routine: "eig_hermitian",
                detail: format!(
                    "no convergence after {JACOBI_MAX_SWEEPS} sweeps (dim {n}, off-diagonal {:.3e})",
                    off(&m)
                ),
            });
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut m, &mut v, p, q);
            }
        }
        sweeps += 1;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re));
    let values = order.iter().map(|&i| m[(i, i)].re).collect();
    let vectors = v.select_columns(&order);
    Ok(Eigen { values, vectors })
}

/// One Jacobi rotation annihilating `m[p,q]`: `m ← G† m G`, `v ← v G`.
fn rotate(m: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = m[(p, q)];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let app = m[(p, p)].re;
    let aqq = m[(q, q)].re;
    // Below this the rotation is numerically the identity.
    if mag <= f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
        m[(p, q)] = ZERO;
        m[(q, p)] = ZERO;
        return;
    }
    let phase = apq / mag;
    let theta = (aqq - app) / (2.0 * mag);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    // G = diag(1, conj(phase)) · [[c, s], [-s, c]]
    let g_pp = Complex64::new(c, 0.0);
    let g_pq = Complex64::new(s, 0.0);
    let g_qp = -phase.conj() * s;
    let g_qq = phase.conj() * c;

    let n = m.rows();
    for k in 0..n {
        let mkp = m[(k, p)];
        let mkq = m[(k, q)];
        m[(k, p)] = mkp * g_pp + mkq * g_qp;
        m[(k, q)] = mkp * g_pq + mkq * g_qq;
    }
    for k in 0..n {
        let mpk = m[(p, k)];
        let mqk = m[(q, k)];
        m[(p, k)] = g_pp.conj() * mpk + g_qp.conj() * mqk;
        m[(q, k)] = g_pq.conj() * mpk + g_qq.conj() * mqk;
    }
    m[(p, q)] = ZERO;
    m[(q, p)] = ZERO;
    m[(p, p)] = Complex64::new(m[(p, p)].re, 0.0);
    m[(q, q)] = Complex64::new(m[(q, q)].re, 0.0);
    for k in 0..v.rows() {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * g_pp + vkq * g_qp;
        v[(k, q)] = vkp * g_pq + vkq * g_qq;
    }
}

#[derive(Serialize, Deserialize)]
struct HermitianRepr {
    dim: usize,
    entries: ComplexMatrix,
}

impl Serialize for HermitianMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        HermitianRepr { dim: self.dim(), entries: self.inner.clone() }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for HermitianMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = HermitianRepr::deserialize(deserializer)?;
        if repr.entries.rows() != repr.dim {
            return Err(serde::de::Error::custom(format!(
                "dim {} does not match {} rows",
                repr.dim,
                repr.entries.rows()
            )));
        }
        HermitianMatrix::new(repr.entries).map_err(serde::de::Error::custom)
    }
}
