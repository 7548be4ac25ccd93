//! Bounded-rank hermitian matrices cut by trace and norm constraints.
//!
//! A point is stored in factored form `X = W diag(λ) W†` with `W` an `n × ρ` isometry.
//! The factorization is the smooth parametrization used for tangent-space dimension
//! counts and for the certification optimizer.

mod dimension;
mod tangent;

pub use dimension::{verify_dimension, DimensionReport, DimensionVerdict, MIN_SPECTRAL_GAP, RANK_REL_TOL};
pub use tangent::{
    differential, lambda_tangent_basis, project_tangent, retract, tangent_basis, tangent_fd_check, tangent_jacobian,
    TangentVector, FD_STEP,
};

use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::matcore::{ComplexMatrix, HermitianMatrix};
use crate::schemes::sample_haar_isometry;

/// Tolerance for membership checks on points and matrices.
pub const MEMBERSHIP_TOL: f64 = 1e-10;

/// Extra equations cutting the rank-bounded set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    /// No constraint: the cone of rank ≤ ρ hermitian matrices.
    Free,
    /// `tr X = 1`.
    UnitTrace,
    /// `‖X‖₂ = 1`.
    Sphere,
    /// `‖X‖₂ = 1` and `tr X = 0`.
    TracelessSphere,
}

impl Constraint {
    pub fn codimension(self) -> usize {
        match self {
            Constraint::Free => 0,
            Constraint::UnitTrace | Constraint::Sphere => 1,
            Constraint::TracelessSphere => 2,
        }
    }

    pub fn is_traceless(self) -> bool {
        self == Constraint::TracelessSphere
    }

    pub fn is_normalized(self) -> bool {
        matches!(self, Constraint::Sphere | Constraint::TracelessSphere)
    }
}

/// `{X ∈ H(Cⁿ) : rank X ≤ ρ}` intersected with a [`Constraint`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RepresentingSetSpec {
    n: usize,
    rank_bound: usize,
    constraint: Constraint,
}

impl RepresentingSetSpec {
    pub fn new(n: usize, rank_bound: usize, constraint: Constraint) -> Result<Self> {
        ensure!(n >= 1, "dimension must be positive");
        ensure!((1..=n).contains(&rank_bound), "rank bound must lie in 1..={n}, got {rank_bound}");
        ensure!(
            rank_bound >= 2 || !constraint.is_traceless(),
            "a traceless rank-one matrix is zero; rank bound must be at least 2"
        );
        Ok(Self { n, rank_bound, constraint })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rank_bound(&self) -> usize {
        self.rank_bound
    }

    pub fn constraint(&self) -> Constraint {
        self.constraint
    }

    pub fn is_traceless(&self) -> bool {
        self.constraint.is_traceless()
    }

    /// `ρ(2n − ρ) − codim`.
    pub fn expected_dimension(&self) -> usize {
        let (n, p) = (self.n, self.rank_bound);
        p * (2 * n - p) - self.constraint.codimension()
    }

    /// Free coordinates of `λ` after the constraints.
    pub fn lambda_dimension(&self) -> usize {
        self.rank_bound - self.constraint.codimension()
    }

    /// Size of the tangent basis: `ρ²` Stiefel-internal, `2(n−ρ)ρ` complement and the λ part.
    pub fn parameter_count(&self) -> usize {
        let (n, p) = (self.n, self.rank_bound);
        p * p + 2 * (n - p) * p + self.lambda_dimension()
    }

    /// Whether `x` lies on the set up to `tol` (relative to `‖x‖₂` for the rank test).
    pub fn contains(&self, x: &HermitianMatrix, tol: f64) -> Result<bool> {
        if x.dim() != self.n {
            return Ok(false);
        }
        let ok_constraint = match self.constraint {
            Constraint::Free => true,
            Constraint::UnitTrace => (x.trace() - 1.0).abs() <= tol,
            Constraint::Sphere => (x.hs_norm() - 1.0).abs() <= tol,
            Constraint::TracelessSphere => (x.hs_norm() - 1.0).abs() <= tol && x.trace().abs() <= tol,
        };
        Ok(ok_constraint && x.numerical_rank(tol)? <= self.rank_bound)
    }

    /// Factors a matrix on the set; constructive right inverse of [`LowRankPoint::materialize`].
    pub fn point_from_matrix(&self, x: &HermitianMatrix) -> Result<LowRankPoint> {
        ensure!(x.dim() == self.n, "matrix dimension {} does not match {}", x.dim(), self.n);
        let eig = x.eig()?;
        let mut order: Vec<usize> = (0..self.n).collect();
        order.sort_by(|&a, &b| eig.values[b].abs().total_cmp(&eig.values[a].abs()));
        let scale = x.hs_norm().max(1.0);
        if let Some(&first_dropped) = order.get(self.rank_bound) {
            let dropped = eig.values[first_dropped].abs();
            ensure!(
                dropped <= 1e-9 * scale,
                "matrix has rank above {} (next eigenvalue {dropped:.3e})",
                self.rank_bound
            );
        }
        let keep = &order[..self.rank_bound];
        let p =
            LowRankPoint { w: eig.vectors.select_columns(keep), lambda: keep.iter().map(|&i| eig.values[i]).collect() };
        p.validate(self, 1e-9)?;
        Ok(p)
    }
}

/// `{X : rank X ≤ 2r, tr X = 0, ‖X‖₂ = 1}`, representing differences of rank-≤r states.
pub fn representing_set_for_rank(n: usize, r: usize) -> Result<RepresentingSetSpec> {
    ensure!(r >= 1 && 2 * r <= n, "rank must lie in 1..={}, got {r}", n / 2);
    RepresentingSetSpec::new(n, (2 * r).min(n), Constraint::TracelessSphere)
}

/// `{X : rank X ≤ 2r, ‖X‖₂ = 1}`, representing differences of rank-≤r PSD matrices.
pub fn representing_set_for_matrices(n: usize, r: usize) -> Result<RepresentingSetSpec> {
    ensure!(r >= 1 && 2 * r <= n, "rank must lie in 1..={}, got {r}", n / 2);
    RepresentingSetSpec::new(n, (2 * r).min(n), Constraint::Sphere)
}

/// `X = W diag(λ) W†` with `W†W = I`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LowRankPoint {
    w: ComplexMatrix,
    lambda: Vec<f64>,
}

impl LowRankPoint {
    pub fn new(spec: &RepresentingSetSpec, w: ComplexMatrix, lambda: Vec<f64>) -> Result<Self> {
        let p = Self { w, lambda };
        p.validate(spec, MEMBERSHIP_TOL)?;
        Ok(p)
    }

    pub(crate) fn from_parts(w: ComplexMatrix, lambda: Vec<f64>) -> Self {
        Self { w, lambda }
    }

    pub fn w(&self) -> &ComplexMatrix {
        &self.w
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn materialize(&self) -> HermitianMatrix {
        HermitianMatrix::from_factors(&self.w, &self.lambda)
    }

    pub fn validate(&self, spec: &RepresentingSetSpec, tol: f64) -> Result<()> {
        let (n, p) = (spec.n(), spec.rank_bound());
        ensure!(
            self.w.rows() == n && self.w.cols() == p && self.lambda.len() == p,
            "point shape {}x{} / {} does not match spec ({n}, {p})",
            self.w.rows(),
            self.w.cols(),
            self.lambda.len()
        );
        ensure!(self.w.is_finite() && self.lambda.iter().all(|x| x.is_finite()), "point has non-finite entries");
        let iso = self.w.isometry_residual();
        ensure!(iso <= tol, "W is not an isometry (residual {iso:.3e})");
        let norm = self.lambda.iter().map(|x| x * x).sum::<f64>().sqrt();
        let sum: f64 = self.lambda.iter().sum();
        match spec.constraint() {
            Constraint::Free => {}
            Constraint::UnitTrace => ensure!((sum - 1.0).abs() <= tol, "tr X = {sum}, expected 1"),
            Constraint::Sphere => ensure!((norm - 1.0).abs() <= tol, "‖X‖₂ = {norm}, expected 1"),
            Constraint::TracelessSphere => {
                ensure!((norm - 1.0).abs() <= tol, "‖X‖₂ = {norm}, expected 1");
                ensure!(sum.abs() <= tol, "tr X = {sum}, expected 0");
            }
        }
        Ok(())
    }
}

/// Nearest point of the λ-constraint set (affine or spherical projection).
pub(crate) fn project_lambda(constraint: Constraint, v: &[f64]) -> Result<Vec<f64>> {
    let p = v.len() as f64;
    let mut out = v.to_vec();
    if constraint == Constraint::UnitTrace {
        let shift = (1.0 - v.iter().sum::<f64>()) / p;
        out.iter_mut().for_each(|x| *x += shift);
    }
    if constraint.is_traceless() {
        let mean = v.iter().sum::<f64>() / p;
        out.iter_mut().for_each(|x| *x -= mean);
    }
    if constraint.is_normalized() {
        let norm = out.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm > 1e-300) {
            return Err(Error::Degenerate(format!("cannot normalize λ (norm {norm:.3e})")));
        }
        out.iter_mut().for_each(|x| *x /= norm);
    }
    Ok(out)
}

/// Haar isometry times a λ drawn from the constraint's reference measure: Gaussian
/// (free), flat Dirichlet (unit trace), uniform on the (traceless) sphere.
pub fn sample_point<R: Rng + ?Sized>(spec: &RepresentingSetSpec, rng: &mut R) -> LowRankPoint {
    let (n, p) = (spec.n(), spec.rank_bound());
    let w = sample_haar_isometry(n, p, rng).expect("spec guarantees rank_bound <= n");
    loop {
        let raw: Vec<f64> = match spec.constraint() {
            Constraint::UnitTrace => {
                let e: Vec<f64> = (0..p).map(|_| rng.sample(Exp1)).collect();
                let s: f64 = e.iter().sum();
                e.into_iter().map(|x| x / s).collect()
            }
            _ => (0..p).map(|_| rng.sample(StandardNormal)).collect(),
        };
        if let Ok(lambda) = project_lambda(spec.constraint(), &raw) {
            return LowRankPoint { w, lambda };
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from_seed;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn rank_spec_examples() {
        let s = representing_set_for_rank(2, 1).unwrap();
        assert_eq!((s.rank_bound(), s.expected_dimension()), (2, 2));
        assert!(s.is_traceless());
        assert_eq!(representing_set_for_rank(4, 1).unwrap().expected_dimension(), 10);
        let full = representing_set_for_rank(4, 2).unwrap();
        assert_eq!((full.rank_bound(), full.expected_dimension()), (4, 14));
        assert!(representing_set_for_rank(4, 3).is_err());
        assert!(representing_set_for_rank(4, 0).is_err());
    }

    #[test]
    fn matrices_spec_examples() {
        for (n, r, d) in [(4, 1, 11), (2, 1, 3), (3, 1, 7), (6, 3, 35)] {
            let s = representing_set_for_matrices(n, r).unwrap();
            assert!(!s.is_traceless());
            assert_eq!(s.expected_dimension(), d, "n={n} r={r}");
        }
    }

    #[test]
    fn expected_dimension_is_parameter_count_minus_gauge() {
        for n in 1..=6 {
            for p in 1..=n {
                for c in [Constraint::Free, Constraint::UnitTrace, Constraint::Sphere, Constraint::TracelessSphere] {
                    if let Ok(s) = RepresentingSetSpec::new(n, p, c) {
                        assert_eq!(s.parameter_count() - p, s.expected_dimension());
                    }
                }
            }
        }
    }

    #[test]
    fn traceless_rank_one_rejected() {
        assert!(RepresentingSetSpec::new(3, 1, Constraint::TracelessSphere).is_err());
        assert!(RepresentingSetSpec::new(3, 4, Constraint::Free).is_err());
    }

    #[test]
    fn sampled_points_satisfy_invariants() {
        let mut rng = rng_from_seed(11);
        for c in [Constraint::Free, Constraint::UnitTrace, Constraint::Sphere, Constraint::TracelessSphere] {
            let spec = RepresentingSetSpec::new(5, 2, c).unwrap();
            for _ in 0..20 {
                let p = sample_point(&spec, &mut rng);
                p.validate(&spec, 1e-12).unwrap();
                let x = p.materialize();
                assert!(spec.contains(&x, 1e-10).unwrap());
                let big = x.eigenvalues().unwrap().iter().filter(|v| v.abs() > 1e-10).count();
                assert!(big <= 2);
                if c.is_traceless() {
                    assert!(x.trace().abs() <= 1e-12);
                }
                if c.is_normalized() {
                    assert!((x.hs_norm() - 1.0).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn off_manifold_point_rejected() {
        let spec = representing_set_for_rank(3, 1).unwrap();
        let w = ComplexMatrix::eye(3, 2).scale_real(2.0);
        assert!(LowRankPoint::new(&spec, w, vec![0.5f64.sqrt(), -(0.5f64.sqrt())]).is_err());
        let w = ComplexMatrix::eye(3, 2);
        assert!(LowRankPoint::new(&spec, w.clone(), vec![1.0, 0.0]).is_err());
        assert!(LowRankPoint::new(&spec, w, vec![0.5f64.sqrt(), -(0.5f64.sqrt())]).is_ok());
    }

    #[test]
    fn factoring_rejects_excess_rank() {
        let spec = RepresentingSetSpec::new(3, 2, Constraint::Free).unwrap();
        assert!(spec.point_from_matrix(&HermitianMatrix::identity(3)).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        // Surjectivity onto the smooth stratum: random X on the set factor back exactly.
        #[test]
        fn factorization_is_surjective(seed in any::<u64>(), n in 2usize..=6, cidx in 0usize..4) {
            let c = [Constraint::Free, Constraint::UnitTrace, Constraint::Sphere, Constraint::TracelessSphere][cidx];
            let mut rng = rng_from_seed(seed);
            let p = rng.gen_range(2..=n);
            let spec = RepresentingSetSpec::new(n, p, c).unwrap();
            // Built independently of the factor form: conjugate a padded diagonal.
            let lambda = sample_point(&spec, &mut rng).lambda().to_vec();
            let mut diag = lambda.clone();
            diag.resize(n, 0.0);
            let u = sample_haar_isometry(n, n, &mut rng).unwrap();
            let x = HermitianMatrix::from_real_diag(&diag).conjugate_by(&u);
            let q = spec.point_from_matrix(&x).unwrap();
            prop_assert!(q.materialize().max_abs_diff(&x) < 1e-10);
        }
    }
}
