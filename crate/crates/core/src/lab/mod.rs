//! Numerical checks of the algebraic identities behind the genericity thresholds, and seeded
//! sweeps that estimate how often random schemes are complete.

mod identities;
mod partition;
mod sweeps;
mod table1;

pub use identities::{
    differential_identity_check, fd_complex_gradient, isometry_constraint_identity_check, isometry_gradient,
    quadratic_form_gradient, random_real_pair,
};
pub use partition::{
    commutator_independence_check, is_nondegenerate, trivial_partition_nullity, CommutatorCheck, LinearSystemProbe,
    BLOCK_TOL, EXHAUSTIVE_MAX, SYSTEM_RANK_TOL,
};
pub use sweeps::{
    frame_sweep, genericity_sweep, observable_sweep, run_trial, sweep, SchemeFamily, SweepOptions, SweepResult,
    TrialRecord,
};
pub use table1::{render_table1, table1_checked, table1_reproduce, Table1Cell, TABLE1_GOLDEN};

use rand::Rng;
use serde::Serialize;

use crate::certify::representing_dimension;
use crate::error::Result;
use crate::varieties::{verify_dimension, Constraint, DimensionVerdict, RepresentingSetSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SecantBound {
    pub n: usize,
    pub r: usize,
    /// Measured dimension of the traceless unit-sphere set of rank ≤ 2r.
    pub difference_dim: usize,
    /// Measured dimension of unit-trace PSD rank-≤r states.
    pub state_dim: usize,
    pub holds: bool,
}

/// Measures both sides of `dim D ≤ 2·dim S` by Jacobian rank and checks the inequality
/// together with `dim D = 4r(n − r) − 2`.
pub fn secant_dimension_check<R: Rng + ?Sized>(n: usize, r: usize, samples: usize, rng: &mut R) -> Result<SecantBound> {
    let d = verify_dimension(&RepresentingSetSpec::new(n, 2 * r, Constraint::TracelessSphere)?, samples, rng)?;
    let s = verify_dimension(&RepresentingSetSpec::new(n, r, Constraint::UnitTrace)?, samples, rng)?;
    let ok = d.verdict == DimensionVerdict::Pass && s.verdict == DimensionVerdict::Pass;
    let holds = ok && d.jacobian_rank == representing_dimension(n, r)? && d.jacobian_rank <= 2 * s.jacobian_rank;
    Ok(SecantBound { n, r, difference_dim: d.jacobian_rank, state_dim: s.jacobian_rank, holds })
}
