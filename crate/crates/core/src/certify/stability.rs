use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};
use crate::matcore::{qr_isometry, ComplexMatrix};
use crate::schemes::{scheme_distance, MeasurementScheme};
use crate::seed::{derive_seed, rng_from_seed};
use crate::varieties::RepresentingSetSpec;

use super::{min_over_representing_set, CertificationReport, CertifyOptions, Verdict};

/// Allowed shortfall of a perturbed minimum below `κ̂/2`.
pub const STABILITY_SLACK: f64 = 1e-6;
const MAX_ATTEMPTS: usize = 100;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StabilityTrial {
    pub trial_index: usize,
    pub distance: f64,
    pub kappa_hat: f64,
    pub verdict: Verdict,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StabilityRecord {
    pub kappa_hat: f64,
    pub radius: f64,
    pub trials: Vec<StabilityTrial>,
    pub skipped: usize,
    /// Smallest `κ̂` over the perturbed schemes.
    pub min_kappa: f64,
    pub passed: bool,
}

/// `U ↦ qf(U + εG)` for every isometry, with `ε` halved until `d(M, M′) < radius`.
fn perturb_within<R: Rng + ?Sized>(
    s: &MeasurementScheme,
    radius: f64,
    rng: &mut R,
) -> Result<Option<(MeasurementScheme, f64)>> {
    let us = s.isometries()?;
    let mut eps = radius * rng.gen_range(0.25..1.0);
    for _ in 0..MAX_ATTEMPTS {
        let moved = us
            .iter()
            .map(|u| qr_isometry(&u.add_scaled(eps, &ComplexMatrix::gaussian(u.rows(), u.cols(), rng))))
            .collect::<Result<Vec<_>>>();
        if let Ok(moved) = moved {
            let candidate = MeasurementScheme::from_isometries(moved)?;
            let d = scheme_distance(s, &candidate)?;
            if d < radius {
                return Ok(Some((candidate, d)));
            }
        }
        eps *= 0.5;
    }
    Ok(None)
}

/// Re-certifies `trials` random schemes inside `B(M, κ̂/2)`. Trial `i` draws its
/// perturbation from `derive_seed(seed, i)` and certifies with the same seed.
pub fn stability_ball_test(
    s: &MeasurementScheme,
    spec: &RepresentingSetSpec,
    base: &CertificationReport,
    trials: usize,
    opts: &CertifyOptions,
) -> Result<StabilityRecord> {
    ensure!(base.verdict.is_complete(), "stability needs a complete base certificate, got {:?}", base.verdict);
    let kappa = base.kappa_hat;
    let radius = kappa / 2.0;
    let mut out = Vec::with_capacity(trials);
    let mut skipped = 0;
    for i in 0..trials {
        let seed = derive_seed(opts.seed, i as u64);
        let Some((candidate, distance)) = perturb_within(s, radius, &mut rng_from_seed(seed))? else {
            log::warn!("stability trial {i}: no perturbation inside the ball after {MAX_ATTEMPTS} attempts");
            skipped += 1;
            continue;
        };
        let r = min_over_representing_set(&candidate, spec, &CertifyOptions { seed, ..*opts })?;
        let passed = r.verdict.is_complete() && r.kappa_hat >= radius - STABILITY_SLACK;
        out.push(StabilityTrial { trial_index: i, distance, kappa_hat: r.kappa_hat, verdict: r.verdict, passed });
    }
    let min_kappa = out.iter().map(|t| t.kappa_hat).fold(f64::INFINITY, f64::min);
    let passed = out.iter().all(|t| t.passed);
    Ok(StabilityRecord { kappa_hat: kappa, radius, trials: out, skipped, min_kappa, passed })
}
