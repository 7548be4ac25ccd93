use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::matcore::{vectorize, Complex64, ComplexMatrix, HermitianMatrix, RealMatrix};
use crate::schemes::{apply_scheme, Measurement};
use crate::seed::task_rng;

/// Success threshold on `‖h_M(ρ̂) − y‖₂`.
pub const RECONSTRUCTION_TOL: f64 = 1e-10;
const STOP_RESIDUAL: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReconstructOptions {
    pub restarts: usize,
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for ReconstructOptions {
    fn default() -> Self {
        Self { restarts: 32, max_iterations: 300, seed: 0 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReconstructionResult {
    pub estimate: HermitianMatrix,
    pub residual: f64,
    pub trace_distance_to_truth: Option<f64>,
    pub restarts_used: usize,
    pub converged: bool,
}

impl ReconstructionResult {
    pub fn with_truth(mut self, truth: &HermitianMatrix) -> Result<Self> {
        self.trace_distance_to_truth = Some(trace_distance(&self.estimate, truth)?);
        Ok(self)
    }
}

/// `½‖a − b‖₁`.
pub fn trace_distance(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<f64> {
    ensure!(a.dim() == b.dim(), "dimension mismatch");
    Ok(0.5 * a.add_scaled(-1.0, b).trace_norm()?)
}

/// `ρ(A) = AA†/tr(AA†)`.
fn state_of(a: &ComplexMatrix) -> HermitianMatrix {
    HermitianMatrix::symmetrize(a.matmul(&a.adjoint())).scale(1.0 / a.frobenius_norm_sqr())
}

fn unpack(theta: &[f64], n: usize, r: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, r, |i, j| Complex64::new(theta[2 * (i * r + j)], theta[2 * (i * r + j) + 1]))
}

fn residual_of<M: Measurement + ?Sized>(s: &M, a: &ComplexMatrix, y: &[f64]) -> Vec<f64> {
    s.hmatrix().matvec(&vectorize(&state_of(a))).iter().zip(y).map(|(p, q)| p - q).collect()
}

/// Columns `H vec(dρ)` with `dρ = (EA† + AE†)/t − ρ · 2Re tr(A†E)/t` for every real
/// coordinate direction `E` of `A`.
fn jacobian<M: Measurement + ?Sized>(s: &M, a: &ComplexMatrix) -> Result<RealMatrix> {
    let (n, r) = (a.rows(), a.cols());
    let t = a.frobenius_norm_sqr();
    let rho = state_of(a);
    let mut cols = Vec::with_capacity(2 * n * r);
    for i in 0..n {
        for j in 0..r {
            for unit in [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)] {
                let e =
                    ComplexMatrix::from_fn(n, r, |p, q| if (p, q) == (i, j) { unit } else { Complex64::new(0.0, 0.0) });
                let ea = e.matmul(&a.adjoint());
                let dtrace = 2.0 * (a[(i, j)].conj() * unit).re;
                let d = HermitianMatrix::symmetrize((&ea + &ea.adjoint()).scale_real(1.0 / t))
                    .add_scaled(-dtrace / t, &rho);
                cols.push(s.hmatrix().matvec(&vectorize(&d)));
            }
        }
    }
    RealMatrix::from_columns(s.hmatrix().rows(), &cols)
}

fn sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

/// Levenberg-Marquardt on the factor `A`. Returns the final factor and residual norm.
fn levenberg_marquardt<M: Measurement + ?Sized>(
    s: &M,
    y: &[f64],
    mut theta: Vec<f64>,
    r: usize,
    max_iterations: usize,
) -> Result<(ComplexMatrix, f64)> {
    let n = s.hilbert_dim();
    let mut a = unpack(&theta, n, r);
    let mut res = residual_of(s, &a, y);
    let mut cost = sq(&res);
    let mut mu: Option<f64> = None;
    for _ in 0..max_iterations {
        if cost.sqrt() <= STOP_RESIDUAL {
            break;
        }
        let j = jacobian(s, &a)?;
        let jt = j.transpose();
        let jtj = jt.matmul(&j);
        let grad = jt.matvec(&res);
        let scale = (0..jtj.rows()).map(|i| jtj[(i, i)]).fold(0.0, f64::max).max(1e-300);
        let mut damping = *mu.get_or_insert(1e-3 * scale);
        let mut improved = false;
        for _ in 0..40 {
            let mut system = jtj.clone();
            for i in 0..system.rows() {
                system[(i, i)] += damping;
            }
            let rhs: Vec<f64> = grad.iter().map(|g| -g).collect();
            if let Ok(delta) = system.solve_spd(&rhs) {
                let trial: Vec<f64> = theta.iter().zip(&delta).map(|(t, d)| t + d).collect();
                let ta = unpack(&trial, n, r);
                if ta.frobenius_norm_sqr() > 1e-300 {
                    let tres = residual_of(s, &ta, y);
                    let tcost = sq(&tres);
                    if tcost < cost {
                        theta = trial;
                        a = ta;
                        res = tres;
                        cost = tcost;
                        damping = (damping / 3.0).max(1e-15 * scale);
                        improved = true;
                        break;
                    }
                }
            }
            damping *= 4.0;
        }
        mu = Some(damping);
        if !improved {
            break;
        }
        // Keep the factor well scaled; ρ(A) is invariant under A ↦ cA.
        let norm = a.frobenius_norm();
        theta.iter_mut().for_each(|t| *t /= norm);
        a = unpack(&theta, n, r);
    }
    Ok((a, cost.sqrt()))
}

/// Multi-restart fit of a rank-≤r state to data `y`. Restart `i` starts from a Gaussian
/// factor drawn with `task_rng(opts.seed, i)`; stops at the first restart under
/// [`RECONSTRUCTION_TOL`].
pub fn reconstruct<M: Measurement + ?Sized>(
    s: &M,
    y: &[f64],
    r: usize,
    opts: &ReconstructOptions,
) -> Result<ReconstructionResult> {
    let n = s.hilbert_dim();
    ensure!(y.len() == s.num_outcomes(), "data has {} entries, scheme has {} outcomes", y.len(), s.num_outcomes());
    ensure!((1..=n).contains(&r), "rank must lie in 1..={n}, got {r}");
    ensure!(opts.restarts >= 1, "need at least one restart");
    let mut best: Option<(ComplexMatrix, f64)> = None;
    let mut used = 0;
    for i in 0..opts.restarts {
        used += 1;
        let a0 = ComplexMatrix::gaussian(n, r, &mut task_rng(opts.seed, i as u64));
        let theta = a0.to_real_coords();
        let (a, resid) = levenberg_marquardt(s, y, theta, r, opts.max_iterations)?;
        if best.as_ref().is_none_or(|b| resid < b.1) {
            best = Some((a, resid));
        }
        if resid <= RECONSTRUCTION_TOL {
            break;
        }
    }
    let (a, residual) = best.expect("at least one restart");
    Ok(ReconstructionResult {
        estimate: state_of(&a),
        residual,
        trace_distance_to_truth: None,
        restarts_used: used,
        converged: residual <= RECONSTRUCTION_TOL,
    })
}

/// Two states `P/t` and `N/t` from the Jordan split `X = P − N` of a traceless kernel
/// witness; they produce identical data under any scheme annihilating `X`.
pub fn ambiguous_pair(x: &HermitianMatrix) -> Result<(HermitianMatrix, HermitianMatrix)> {
    ensure!(x.trace().abs() <= 1e-9, "witness must be traceless (tr = {:.3e})", x.trace());
    let eig = x.eig()?;
    let n = x.dim();
    let mut pos = HermitianMatrix::zeros(n);
    let mut neg = HermitianMatrix::zeros(n);
    for (k, &l) in eig.values.iter().enumerate() {
        let proj = HermitianMatrix::projector(&eig.vectors.column(k));
        if l > 0.0 {
            pos = pos.add_scaled(l, &proj);
        } else if l < 0.0 {
            neg = neg.add_scaled(-l, &proj);
        }
    }
    let t = pos.trace();
    if !(t > 1e-12) {
        return Err(Error::Degenerate("witness is zero".into()));
    }
    // tr N = tr P since X is traceless.
    Ok((pos.scale(1.0 / t), neg.scale(1.0 / t)))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AmbiguityReport {
    pub state_a: HermitianMatrix,
    pub state_b: HermitianMatrix,
    /// `‖h_M(ρ_a) − h_M(ρ_b)‖₂`.
    pub data_difference: f64,
    pub trace_distance: f64,
}

pub fn demonstrate_ambiguity<M: Measurement + ?Sized>(s: &M, witness: &HermitianMatrix) -> Result<AmbiguityReport> {
    let (a, b) = ambiguous_pair(witness)?;
    let ya = apply_scheme(s, &a)?;
    let yb = apply_scheme(s, &b)?;
    let data_difference = ya.iter().zip(&yb).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
    let trace_distance = trace_distance(&a, &b)?;
    Ok(AmbiguityReport { state_a: a, state_b: b, data_difference, trace_distance })
}
