use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{ensure, Result};
use crate::seed::task_rng;

use super::{sample_point, tangent_jacobian, RepresentingSetSpec};

/// Singular values at or below this fraction of the largest are discarded.
pub const RANK_REL_TOL: f64 = 1e-8;
/// Required ratio of the smallest kept to the largest discarded singular value.
pub const MIN_SPECTRAL_GAP: f64 = 1e3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DimensionVerdict {
    Pass,
    Mismatch,
    Inconclusive,
}

/// Tangent-space rank statistics over sampled smooth points.
#[derive(Clone, Debug, Serialize)]
pub struct DimensionReport {
    pub spec: RepresentingSetSpec,
    pub target_formula: usize,
    /// Median over samples.
    pub jacobian_rank: usize,
    pub min_rank: usize,
    pub max_rank: usize,
    pub sample_count: usize,
    /// Minimum over samples; serialized as `null` when every discarded value is exactly 0.
    pub singular_value_gap: f64,
    /// All singular values of the first sample's Jacobian.
    pub representative_singular_values: Vec<f64>,
    pub verdict: DimensionVerdict,
}

/// Numerical tangent dimension at `samples` random points. The master seed for the
/// per-sample streams is drawn from `rng`, so the result does not depend on the thread
/// count.
pub fn verify_dimension<R: Rng + ?Sized>(
    spec: &RepresentingSetSpec,
    samples: usize,
    rng: &mut R,
) -> Result<DimensionReport> {
    ensure!(samples >= 1, "need at least one sample");
    let master: u64 = rng.gen();
    let per_sample: Vec<(usize, f64, Vec<f64>)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = task_rng(master, i as u64);
            let p = sample_point(spec, &mut rng);
            let svd = tangent_jacobian(spec, &p)?.svd()?;
            let rank = svd.rank(RANK_REL_TOL);
            let gap = svd.gap_at(rank).unwrap_or(f64::INFINITY);
            Ok((rank, gap, svd.values))
        })
        .collect::<Result<_>>()?;
    let mut ranks: Vec<usize> = per_sample.iter().map(|s| s.0).collect();
    ranks.sort_unstable();
    let median = ranks[(samples - 1) / 2];
    let gap = per_sample.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
    let target = spec.expected_dimension();
    let verdict = if gap < MIN_SPECTRAL_GAP {
        DimensionVerdict::Inconclusive
    } else if median == target {
        DimensionVerdict::Pass
    } else {
        DimensionVerdict::Mismatch
    };
    Ok(DimensionReport {
        spec: *spec,
        target_formula: target,
        jacobian_rank: median,
        min_rank: ranks[0],
        max_rank: ranks[samples - 1],
        sample_count: samples,
        singular_value_gap: gap,
        representative_singular_values: per_sample[0].2.clone(),
        verdict,
    })
}
