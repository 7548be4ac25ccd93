use crate::error::{ensure, Result};
use crate::matcore::{devectorize_dim, RealMatrix, IDENTITY_INDEX};
use crate::schemes::Measurement;
use crate::varieties::{Constraint, RepresentingSetSpec};

use super::{CertificationReport, Method, Verdict, Witness};

/// Singular values at or below this fraction of the largest span the kernel.
pub const KERNEL_REL_TOL: f64 = 1e-10;

/// Completeness by linear algebra when the rank bound is vacuous.
///
/// With `K = ker h_M`, the sphere variant is complete iff `K = {0}` and the traceless
/// variant iff `K ∩ {tr = 0} = {0}`, i.e. `dim K` equals the rank of the identity
/// coordinates of a kernel basis. `kappa_hat` is the exact minimum `σ_min` of `h_M`
/// restricted to the relevant subspace.
pub fn exact_kernel_decision<M: Measurement + ?Sized>(
    s: &M,
    spec: &RepresentingSetSpec,
) -> Result<CertificationReport> {
    let n = spec.n();
    ensure!(s.hilbert_dim() == n, "scheme acts on C^{} but the set lives in C^{n}", s.hilbert_dim());
    ensure!(spec.rank_bound() >= n, "exact decision needs a vacuous rank bound (rank_bound = n = {n})");
    ensure!(
        spec.constraint().is_normalized(),
        "exact decision is defined for the (traceless) unit sphere, got {:?}",
        spec.constraint()
    );
    let h = s.hmatrix();
    let traceless = spec.constraint() == Constraint::TracelessSphere;
    let svd = h.svd()?;
    let kernel = svd.kernel(KERNEL_REL_TOL);
    let witness_vec = if traceless { traceless_kernel_vector(&kernel) } else { kernel.first().cloned() };

    // Restrict to the traceless coordinates for the exact minimum.
    let restricted = if traceless {
        let keep: Vec<usize> = (0..n * n).filter(|&a| a != IDENTITY_INDEX).collect();
        let cols: Vec<Vec<f64>> = keep.iter().map(|&a| h.column(a)).collect();
        RealMatrix::from_columns(h.rows(), &cols)?
    } else {
        h.clone()
    };
    let rsvd = restricted.svd()?;
    let sigma_min = rsvd.values.last().copied().unwrap_or(0.0);

    let (verdict, witness, kappa_hat) = match witness_vec {
        Some(v) => {
            let x = devectorize_dim(&v, n);
            let point = spec.point_from_matrix(&x)?;
            let value = h.matvec(&v).iter().map(|e| e * e).sum::<f64>();
            (Verdict::ExactNotComplete, Some(Witness { point, matrix: x, objective: value }), value.sqrt())
        }
        None => (Verdict::ExactComplete, None, sigma_min),
    };
    Ok(CertificationReport {
        verdict,
        method: Method::ExactKernel,
        spec: *spec,
        kappa_hat,
        witness,
        restarts: 0,
        discarded_restarts: 0,
        iterations: vec![],
        seed: 0,
    })
}

/// A unit vector of `span(kernel)` with zero identity coordinate, if one exists.
fn traceless_kernel_vector(kernel: &[Vec<f64>]) -> Option<Vec<f64>> {
    let (pivot, pmax) = kernel
        .iter()
        .enumerate()
        .map(|(j, k)| (j, k[IDENTITY_INDEX].abs()))
        .fold((0, 0.0), |best, c| if c.1 > best.1 { c } else { best });
    let mut v = if pmax <= KERNEL_REL_TOL {
        kernel.first()?.clone()
    } else {
        // Identity row has rank 1: eliminate it with the pivot column.
        let other = (0..kernel.len()).find(|&j| j != pivot)?;
        let c = kernel[other][IDENTITY_INDEX] / kernel[pivot][IDENTITY_INDEX];
        kernel[other].iter().zip(&kernel[pivot]).map(|(a, b)| a - c * b).collect()
    };
    v[IDENTITY_INDEX] = 0.0;
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    Some(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{basis_element, vectorize, HermitianMatrix};
    use crate::schemes::{
        apply_scheme, computational_basis, qubit_mub_scheme, sample_local_observables, sample_scheme_von_neumann,
        trine_povm,
    };
    use crate::seed::rng_from_seed;
    use crate::varieties::representing_set_for_rank;

    fn full(n: usize) -> RepresentingSetSpec {
        RepresentingSetSpec::new(n, n, Constraint::TracelessSphere).unwrap()
    }

    #[test]
    fn single_von_neumann_is_not_complete() {
        let s = sample_scheme_von_neumann(2, 1, &mut rng_from_seed(1)).unwrap();
        assert_eq!(s.hmatrix().svd().unwrap().rank(KERNEL_REL_TOL), 2);
        let r = exact_kernel_decision(&s, &full(2)).unwrap();
        assert_eq!(r.verdict, Verdict::ExactNotComplete);
        let w = r.witness.unwrap();
        assert!(w.matrix.trace().abs() < 1e-12 && (w.matrix.hs_norm() - 1.0).abs() < 1e-12);
        assert!(apply_scheme(&s, &w.matrix).unwrap().iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn five_von_neumann_qubit_measurements_are_complete() {
        let s = sample_scheme_von_neumann(2, 5, &mut rng_from_seed(2)).unwrap();
        assert_eq!(s.hmatrix().svd().unwrap().rank(KERNEL_REL_TOL), 4);
        let r = exact_kernel_decision(&s, &full(2)).unwrap();
        assert_eq!(r.verdict, Verdict::ExactComplete);
        assert!(r.kappa_hat > 1e-3);
    }

    #[test]
    fn four_von_neumann_qutrit_measurements_are_complete() {
        let s = sample_scheme_von_neumann(3, 4, &mut rng_from_seed(3)).unwrap();
        assert_eq!(s.hmatrix().svd().unwrap().rank(KERNEL_REL_TOL), 9);
        assert_eq!(exact_kernel_decision(&s, &full(3)).unwrap().verdict, Verdict::ExactComplete);
    }

    #[test]
    fn trine_and_computational_basis() {
        let spec = representing_set_for_rank(2, 1).unwrap();
        let r = exact_kernel_decision(&trine_povm(), &spec).unwrap();
        assert_eq!(r.verdict, Verdict::ExactNotComplete);
        let sy = basis_element(2, 2);
        let overlap = crate::matcore::dot(&vectorize(&r.witness.unwrap().matrix), &vectorize(&sy));
        assert!((overlap.abs() - 1.0).abs() < 1e-12);
        assert_eq!(exact_kernel_decision(&computational_basis(2), &spec).unwrap().verdict, Verdict::ExactNotComplete);
    }

    #[test]
    fn mub_kappa_is_exactly_one() {
        let r = exact_kernel_decision(&qubit_mub_scheme(), &full(2)).unwrap();
        assert_eq!(r.verdict, Verdict::ExactComplete);
        assert!((r.kappa_hat - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kernel_with_identity_component_is_still_complete() {
        // Observables whose kernel is spanned by a vector mixing I with a traceless part:
        // the traceless slice of the kernel is trivial.
        let mut rng = rng_from_seed(5);
        let s = sample_local_observables(&[2], 3, false, &mut rng).unwrap();
        let ker = s.hmatrix().svd().unwrap().kernel(KERNEL_REL_TOL);
        assert_eq!(ker.len(), 1);
        assert!(ker[0][IDENTITY_INDEX].abs() > 1e-3);
        assert_eq!(exact_kernel_decision(&s, &full(2)).unwrap().verdict, Verdict::ExactComplete);
        let sphere = RepresentingSetSpec::new(2, 2, Constraint::Sphere).unwrap();
        assert_eq!(exact_kernel_decision(&s, &sphere).unwrap().verdict, Verdict::ExactNotComplete);
    }

    #[test]
    fn rank_constrained_spec_rejected() {
        let spec = representing_set_for_rank(4, 1).unwrap();
        let s = sample_scheme_von_neumann(4, 2, &mut rng_from_seed(6)).unwrap();
        assert!(exact_kernel_decision(&s, &spec).is_err());
    }

    #[test]
    fn povm_kernels_are_traceless() {
        let mut rng = rng_from_seed(7);
        for n in 2..=4 {
            let s = sample_scheme_von_neumann(n, 2, &mut rng).unwrap();
            for k in s.hmatrix().svd().unwrap().kernel(KERNEL_REL_TOL) {
                let x: HermitianMatrix = devectorize_dim(&k, n);
                assert!(x.trace().abs() <= 1e-10);
            }
        }
    }
}
