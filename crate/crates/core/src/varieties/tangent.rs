use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::error::{ensure, Result};
use crate::matcore::{orthogonal_complement, qr_isometry, vectorize, ComplexMatrix, HermitianMatrix, RealMatrix};

use super::{project_lambda, Constraint, LowRankPoint, RepresentingSetSpec, MEMBERSHIP_TOL};

/// Central finite-difference step for tangent checks.
pub const FD_STEP: f64 = 1e-5;

/// A tangent direction `(δW, δλ)` at a [`LowRankPoint`].
#[derive(Clone, Debug)]
pub struct TangentVector {
    pub dw: ComplexMatrix,
    pub dlambda: Vec<f64>,
}

/// Orthonormal basis of the λ-tangent space: the complement of the constraint normals.
pub fn lambda_tangent_basis(constraint: Constraint, lambda: &[f64]) -> Vec<Vec<f64>> {
    let p = lambda.len();
    let ones = vec![1.0 / (p as f64).sqrt(); p];
    let normals: Vec<Vec<f64>> = match constraint {
        Constraint::Free => vec![],
        Constraint::UnitTrace => vec![ones],
        Constraint::Sphere => vec![lambda.to_vec()],
        Constraint::TracelessSphere => vec![ones, lambda.to_vec()],
    };
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(p);
    let mut spanned = Vec::with_capacity(p + 2);
    for v in normals {
        if let Some(u) = gram_schmidt(&spanned, v) {
            spanned.push(u);
        }
    }
    for e in 0..p {
        let mut v = vec![0.0; p];
        v[e] = 1.0;
        if let Some(u) = gram_schmidt(&spanned, v) {
            spanned.push(u.clone());
            basis.push(u);
        }
    }
    basis
}

fn gram_schmidt(basis: &[Vec<f64>], mut v: Vec<f64>) -> Option<Vec<f64>> {
    for _ in 0..2 {
        for b in basis {
            let d: f64 = b.iter().zip(&v).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
        }
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    (norm > 1e-8).then(|| v.into_iter().map(|x| x / norm).collect())
}

/// Orthonormal basis of the parameter tangent space at `p`: `WΩ` for `Ω` in a basis of
/// skew-hermitian `ρ×ρ` matrices, `W⊥B` for `B` in a basis of complex `(n−ρ)×ρ`
/// matrices, then the λ directions. Gauge directions `W·iE_jj` are included.
pub fn tangent_basis(spec: &RepresentingSetSpec, p: &LowRankPoint) -> Result<Vec<TangentVector>> {
    p.validate(spec, 1e-8)?;
    let (n, rho) = (spec.n(), spec.rank_bound());
    let w = p.w();
    let zero_l = vec![0.0; rho];
    let mut out = Vec::with_capacity(spec.parameter_count());
    let i = Complex64::new(0.0, 1.0);
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    for a in 0..rho {
        for b in a..rho {
            let omegas: Vec<ComplexMatrix> = if a == b {
                vec![ComplexMatrix::from_fn(
                    rho,
                    rho,
                    |r, c| if r == a && c == a { i } else { Complex64::new(0.0, 0.0) },
                )]
            } else {
                vec![
                    ComplexMatrix::from_fn(rho, rho, |r, c| match (r, c) {
                        _ if (r, c) == (a, b) => h,
                        _ if (r, c) == (b, a) => -h,
                        _ => Complex64::new(0.0, 0.0),
                    }),
                    ComplexMatrix::from_fn(rho, rho, |r, c| {
                        if (r, c) == (a, b) || (r, c) == (b, a) {
                            i * h
                        } else {
                            Complex64::new(0.0, 0.0)
                        }
                    }),
                ]
            };
            for om in omegas {
                out.push(TangentVector { dw: w.matmul(&om), dlambda: zero_l.clone() });
            }
        }
    }
    if rho < n {
        let wc = orthogonal_complement(w);
        for a in 0..n - rho {
            for b in 0..rho {
                for phase in [Complex64::new(1.0, 0.0), i] {
                    let bm = ComplexMatrix::from_fn(n - rho, rho, |r, c| {
                        if (r, c) == (a, b) {
                            phase
                        } else {
                            Complex64::new(0.0, 0.0)
                        }
                    });
                    out.push(TangentVector { dw: wc.matmul(&bm), dlambda: zero_l.clone() });
                }
            }
        }
    }
    for dl in lambda_tangent_basis(spec.constraint(), p.lambda()) {
        out.push(TangentVector { dw: ComplexMatrix::zeros(n, rho), dlambda: dl });
    }
    debug_assert_eq!(out.len(), spec.parameter_count());
    Ok(out)
}

/// `δX = δW Λ W† + W Λ δW† + W diag(δλ) W†`.
pub fn differential(p: &LowRankPoint, t: &TangentVector) -> HermitianMatrix {
    let w = p.w();
    let a = t.dw.mul_real_diag(p.lambda()).matmul(&w.adjoint());
    let b = w.mul_real_diag(&t.dlambda).matmul(&w.adjoint());
    HermitianMatrix::symmetrize((&(&a + &a.adjoint()) + &b).clone())
}

/// `n² × parameter_count` matrix whose columns are the vectorized differentials along
/// [`tangent_basis`].
pub fn tangent_jacobian(spec: &RepresentingSetSpec, p: &LowRankPoint) -> Result<RealMatrix> {
    let cols: Vec<Vec<f64>> = tangent_basis(spec, p)?.iter().map(|t| vectorize(&differential(p, t))).collect();
    RealMatrix::from_columns(spec.n() * spec.n(), &cols)
}

/// Riemannian projection of an ambient direction: `δW − W sym(W†δW)` and removal of the
/// λ-constraint normals.
pub fn project_tangent(spec: &RepresentingSetSpec, p: &LowRankPoint, t: &TangentVector) -> TangentVector {
    let w = p.w();
    let wz = w.adjoint_mul(&t.dw);
    let sym = (&wz + &wz.adjoint()).scale_real(0.5);
    let dw = t.dw.add_scaled(-1.0, &w.matmul(&sym));
    let basis = lambda_tangent_basis(spec.constraint(), p.lambda());
    let mut dl = vec![0.0; t.dlambda.len()];
    for b in &basis {
        let c: f64 = b.iter().zip(&t.dlambda).map(|(x, y)| x * y).sum();
        dl.iter_mut().zip(b).for_each(|(d, v)| *d += c * v);
    }
    TangentVector { dw, dlambda: dl }
}

/// QR retraction for `W` and constraint projection for `λ` along `step · t`.
pub fn retract(spec: &RepresentingSetSpec, p: &LowRankPoint, t: &TangentVector, step: f64) -> Result<LowRankPoint> {
    let w = qr_isometry(&p.w().add_scaled(step, &t.dw))?;
    let moved: Vec<f64> = p.lambda().iter().zip(&t.dlambda).map(|(l, d)| l + step * d).collect();
    let lambda = project_lambda(spec.constraint(), &moved)?;
    Ok(LowRankPoint::from_parts(w, lambda))
}

/// Largest relative deviation between each Jacobian column and the central difference of
/// `materialize ∘ retract` along the same basis direction.
pub fn tangent_fd_check(spec: &RepresentingSetSpec, p: &LowRankPoint, h: f64) -> Result<f64> {
    ensure!(h > 0.0, "finite-difference step must be positive");
    p.validate(spec, MEMBERSHIP_TOL)?;
    let mut worst: f64 = 0.0;
    for t in tangent_basis(spec, p)? {
        let col = vectorize(&differential(p, &t));
        let plus = vectorize(&retract(spec, p, &t, h)?.materialize());
        let minus = vectorize(&retract(spec, p, &t, -h)?.materialize());
        let err = col
            .iter()
            .zip(plus.iter().zip(&minus))
            .map(|(c, (a, b))| (c - (a - b) / (2.0 * h)).powi(2))
            .sum::<f64>()
            .sqrt();
        let scale = col.iter().map(|x| x * x).sum::<f64>().sqrt().max(1.0);
        worst = worst.max(err / scale);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from_seed;
    use crate::varieties::{representing_set_for_matrices, representing_set_for_rank, sample_point};

    fn all_constraints() -> [Constraint; 4] {
        [Constraint::Free, Constraint::UnitTrace, Constraint::Sphere, Constraint::TracelessSphere]
    }

    #[test]
    fn basis_is_orthonormal_in_the_parameter_metric() {
        let mut rng = rng_from_seed(4);
        let spec = RepresentingSetSpec::new(4, 2, Constraint::TracelessSphere).unwrap();
        let p = sample_point(&spec, &mut rng);
        let basis = tangent_basis(&spec, &p).unwrap();
        assert_eq!(basis.len(), spec.parameter_count());
        for (a, ta) in basis.iter().enumerate() {
            for (b, tb) in basis.iter().enumerate() {
                let g = ta.dw.real_inner(&tb.dw) + ta.dlambda.iter().zip(&tb.dlambda).map(|(x, y)| x * y).sum::<f64>();
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((g - want).abs() < 1e-12, "({a},{b}) → {g}");
            }
        }
    }

    #[test]
    fn basis_directions_are_tangent() {
        let mut rng = rng_from_seed(5);
        for c in all_constraints() {
            let spec = RepresentingSetSpec::new(5, 3, c).unwrap();
            let p = sample_point(&spec, &mut rng);
            for t in tangent_basis(&spec, &p).unwrap() {
                let q = project_tangent(&spec, &p, &t);
                assert!(q.dw.max_abs_diff(&t.dw) < 1e-12);
                assert!(q.dlambda.iter().zip(&t.dlambda).all(|(a, b)| (a - b).abs() < 1e-12));
            }
        }
    }

    #[test]
    fn gauge_directions_vanish() {
        let mut rng = rng_from_seed(6);
        let spec = representing_set_for_rank(4, 1).unwrap();
        let p = sample_point(&spec, &mut rng);
        let basis = tangent_basis(&spec, &p).unwrap();
        let zero = basis.iter().filter(|t| differential(&p, t).hs_norm() < 1e-13).count();
        assert_eq!(zero, spec.rank_bound());
    }

    #[test]
    fn columns_match_finite_differences() {
        let mut rng = rng_from_seed(7);
        for c in all_constraints() {
            for (n, rho) in [(2, 2), (3, 2), (4, 2), (5, 4)] {
                let spec = RepresentingSetSpec::new(n, rho, c).unwrap();
                for _ in 0..5 {
                    let p = sample_point(&spec, &mut rng);
                    let err = tangent_fd_check(&spec, &p, FD_STEP).unwrap();
                    assert!(err <= 1e-6, "{c:?} n={n} ρ={rho}: {err:.3e}");
                }
            }
        }
    }

    #[test]
    fn jacobian_rank_examples() {
        let mut rng = rng_from_seed(8);
        let cases = [
            (representing_set_for_matrices(3, 1).unwrap(), 7),
            (representing_set_for_rank(2, 1).unwrap(), 2),
            (representing_set_for_rank(4, 1).unwrap(), 10),
        ];
        for (spec, want) in cases {
            let j = tangent_jacobian(&spec, &sample_point(&spec, &mut rng)).unwrap();
            assert_eq!(j.svd().unwrap().rank(1e-8), want, "{spec:?}");
        }
    }

    #[test]
    fn retraction_stays_on_the_set() {
        let mut rng = rng_from_seed(9);
        for c in all_constraints() {
            let spec = RepresentingSetSpec::new(4, 3, c).unwrap();
            let p = sample_point(&spec, &mut rng);
            let basis = tangent_basis(&spec, &p).unwrap();
            let mut q = p.clone();
            for (k, t) in basis.iter().enumerate() {
                q = retract(&spec, &q, &project_tangent(&spec, &q, t), 0.3 * (k as f64).sin()).unwrap();
            }
            q.validate(&spec, 1e-12).unwrap();
        }
    }
}
