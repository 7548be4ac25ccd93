//! Completeness decisions for measurement schemes on representing sets.
//!
//! A scheme is complete on `R` iff `h_M` has no zero on the representing set `D` of
//! `Δ(R) − {0}`. The optimizer path minimizes `‖h_M(X)‖²` over `D`; the exact path
//! applies when the rank bound is vacuous and reduces to a kernel computation.

mod exact;
mod objective;
mod optimize;
mod reconstruct;
mod stability;
mod thresholds;

pub use exact::{exact_kernel_decision, KERNEL_REL_TOL};
pub use objective::{gradient_fd_check, tangent_inner, tangent_norm, Objective};
pub use optimize::min_over_representing_set;
pub use reconstruct::{
    ambiguous_pair, demonstrate_ambiguity, reconstruct, trace_distance, AmbiguityReport, ReconstructOptions,
    ReconstructionResult, RECONSTRUCTION_TOL,
};
pub use stability::{stability_ball_test, StabilityRecord, StabilityTrial, STABILITY_SLACK};
pub use thresholds::{
    frame_threshold, local_observable_threshold, representing_dimension, threshold_outcomes, threshold_settings,
};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::matcore::HermitianMatrix;
use crate::schemes::Measurement;
use crate::varieties::{LowRankPoint, RepresentingSetSpec};

/// Objective values at or below this (`‖h‖ ≤ 1e−8`) count as a zero of `h_M` on `D`.
pub const FAIL_VALUE: f64 = 1e-16;
/// Objective values at or above this (`‖h‖ ≥ 1e−4`) count as bounded away from zero.
pub const PASS_VALUE: f64 = 1e-8;
pub const GRAD_TOL: f64 = 1e-10;
pub const MAX_ITERATIONS: usize = 2000;
pub const DEFAULT_RESTARTS: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    CompleteHeuristic,
    NotComplete,
    ExactComplete,
    ExactNotComplete,
    Inconclusive,
}

impl Verdict {
    pub fn is_complete(self) -> bool {
        matches!(self, Verdict::CompleteHeuristic | Verdict::ExactComplete)
    }

    pub fn is_not_complete(self) -> bool {
        matches!(self, Verdict::NotComplete | Verdict::ExactNotComplete)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Optimizer,
    ExactKernel,
}

/// A point of `D` together with its objective value `‖h_M(X)‖²`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Witness {
    pub point: LowRankPoint,
    pub matrix: HermitianMatrix,
    pub objective: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CertificationReport {
    pub verdict: Verdict,
    pub method: Method,
    pub spec: RepresentingSetSpec,
    /// Smallest `‖h_M(X)‖₂` found (exact `σ_min` on the exact path); `null` if every restart diverged.
    pub kappa_hat: f64,
    pub witness: Option<Witness>,
    pub restarts: usize,
    pub discarded_restarts: usize,
    pub iterations: Vec<usize>,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifyOptions {
    pub restarts: usize,
    pub max_iterations: usize,
    pub grad_tol: f64,
    pub seed: u64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self { restarts: DEFAULT_RESTARTS, max_iterations: MAX_ITERATIONS, grad_tol: GRAD_TOL, seed: 0 }
    }
}

impl CertifyOptions {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }
}

/// Verdict for a best objective value.
pub fn classify(best_value: f64) -> Verdict {
    if !best_value.is_finite() {
        Verdict::Inconclusive
    } else if best_value <= FAIL_VALUE {
        Verdict::NotComplete
    } else if best_value >= PASS_VALUE {
        Verdict::CompleteHeuristic
    } else {
        Verdict::Inconclusive
    }
}

/// Exact kernel decision when the rank bound is vacuous, the optimizer otherwise.
pub fn certify_scheme<M: Measurement + Sync + ?Sized>(
    s: &M,
    spec: &RepresentingSetSpec,
    opts: &CertifyOptions,
) -> Result<CertificationReport> {
    if spec.rank_bound() >= spec.n() && spec.constraint().is_normalized() {
        exact_kernel_decision(s, spec)
    } else {
        min_over_representing_set(s, spec, opts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classification_bands() {
        assert_eq!(classify(0.0), Verdict::NotComplete);
        assert_eq!(classify(1e-16), Verdict::NotComplete);
        assert_eq!(classify(1e-12), Verdict::Inconclusive);
        assert_eq!(classify(1e-8), Verdict::CompleteHeuristic);
        assert_eq!(classify(f64::NAN), Verdict::Inconclusive);
    }

    #[test]
    fn verdict_serializes_snake_case() {
        assert_eq!(serde_json::to_string(&Verdict::ExactNotComplete).unwrap(), "\"exact_not_complete\"");
    }
}
