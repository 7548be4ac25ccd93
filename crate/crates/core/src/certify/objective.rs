use crate::error::{ensure, Result};
use crate::matcore::{devectorize_dim, dot, vectorize, RealMatrix};
use crate::schemes::Measurement;
use crate::varieties::{project_tangent, retract, tangent_basis, LowRankPoint, RepresentingSetSpec, TangentVector};

/// `f(p) = ‖H · vec(W diag(λ) W†)‖²` on a representing set.
pub struct Objective<'a> {
    h: &'a RealMatrix,
    spec: RepresentingSetSpec,
}

impl<'a> Objective<'a> {
    pub fn new<M: Measurement + ?Sized>(s: &'a M, spec: RepresentingSetSpec) -> Result<Self> {
        ensure!(
            s.hilbert_dim() == spec.n(),
            "scheme acts on C^{} but the representing set lives in C^{}",
            s.hilbert_dim(),
            spec.n()
        );
        Ok(Self { h: s.hmatrix(), spec })
    }

    pub fn spec(&self) -> &RepresentingSetSpec {
        &self.spec
    }

    /// Residual `e = H vec(X)`.
    pub fn residual(&self, p: &LowRankPoint) -> Vec<f64> {
        self.h.matvec(&vectorize(&p.materialize()))
    }

    pub fn value(&self, p: &LowRankPoint) -> f64 {
        let e = self.residual(p);
        dot(&e, &e)
    }

    /// Value and Euclidean gradient: with `G = devec(Hᵀe)`, `∇_W = 4GWΛ`, `∇_λ = 2 diag(W†GW)`.
    pub fn value_and_euclidean_gradient(&self, p: &LowRankPoint) -> (f64, TangentVector) {
        let e = self.residual(p);
        let f = dot(&e, &e);
        let g = devectorize_dim(&self.h.tmatvec(&e), self.spec.n());
        let gw = g.as_matrix().matmul(p.w());
        let dw = gw.mul_real_diag(p.lambda()).scale_real(4.0);
        let wgw = p.w().adjoint_mul(&gw);
        let dlambda = (0..p.lambda().len()).map(|j| 2.0 * wgw[(j, j)].re).collect();
        (f, TangentVector { dw, dlambda })
    }

    /// Value and Riemannian gradient (projection of the Euclidean gradient).
    pub fn value_and_gradient(&self, p: &LowRankPoint) -> (f64, TangentVector) {
        let (f, eg) = self.value_and_euclidean_gradient(p);
        (f, project_tangent(&self.spec, p, &eg))
    }
}

pub fn tangent_inner(a: &TangentVector, b: &TangentVector) -> f64 {
    a.dw.real_inner(&b.dw) + dot(&a.dlambda, &b.dlambda)
}

pub fn tangent_norm(a: &TangentVector) -> f64 {
    tangent_inner(a, a).sqrt()
}

pub(crate) fn tangent_axpy(a: f64, x: &TangentVector, y: &TangentVector) -> TangentVector {
    TangentVector {
        dw: y.dw.add_scaled(a, &x.dw),
        dlambda: y.dlambda.iter().zip(&x.dlambda).map(|(yv, xv)| yv + a * xv).collect(),
    }
}

pub(crate) fn tangent_scale(a: f64, x: &TangentVector) -> TangentVector {
    TangentVector { dw: x.dw.scale_real(a), dlambda: x.dlambda.iter().map(|v| a * v).collect() }
}

/// Relative deviation `‖a − d‖ / max(‖a‖, 1)` between the analytic directional derivatives
/// `a_i = ⟨grad f, t_i⟩` and central differences `d_i` of `f ∘ retract` over the tangent basis.
pub fn gradient_fd_check(obj: &Objective<'_>, p: &LowRankPoint, h: f64) -> Result<f64> {
    ensure!(h > 0.0, "finite-difference step must be positive");
    let (_, g) = obj.value_and_gradient(p);
    let mut diff2 = 0.0;
    let mut norm2 = 0.0;
    for t in tangent_basis(obj.spec(), p)? {
        let a = tangent_inner(&g, &t);
        let fp = obj.value(&retract(obj.spec(), p, &t, h)?);
        let fm = obj.value(&retract(obj.spec(), p, &t, -h)?);
        let d = (fp - fm) / (2.0 * h);
        diff2 += (a - d) * (a - d);
        norm2 += a * a;
    }
    Ok(diff2.sqrt() / norm2.sqrt().max(1.0))
}
