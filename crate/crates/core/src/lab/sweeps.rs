//! Seeded Monte Carlo sweeps over random measurement schemes.
//!
//! Configuration `m` of a sweep draws trial `i` from
//! `derive_seed(derive_seed(master, m), i)`; the same seed drives the certifier, so every
//! record can be replayed alone.

use std::time::Instant;

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::certify::{certify_scheme, CertifyOptions, Method, Verdict, DEFAULT_RESTARTS, MAX_ITERATIONS};
use crate::error::{ensure, Result};
use crate::matcore::HermitianMatrix;
use crate::schemes::{
    sample_gaussian_frame, sample_local_observables, sample_parseval_frame, sample_scheme_rank_one, AnyScheme,
};
use crate::seed::{derive_seed, rng_from_seed};
use crate::varieties::{representing_set_for_matrices, representing_set_for_rank, RepresentingSetSpec};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum SchemeFamily {
    /// `k` Haar rank-one POVMs with `m` outcomes; `m = n` gives von Neumann tuples.
    RankOne { n: usize, k: usize },
    /// `m` random product observables on `⊗ C^{dims[i]}`.
    LocalObservables { dims: Vec<usize>, pauli: bool },
    /// `m` frame vectors in Cⁿ, Gaussian or rows of a Haar isometry.
    Frame { n: usize, parseval: bool },
}

impl SchemeFamily {
    pub fn hilbert_dim(&self) -> usize {
        match self {
            SchemeFamily::RankOne { n, .. } | SchemeFamily::Frame { n, .. } => *n,
            SchemeFamily::LocalObservables { dims, .. } => dims.iter().product(),
        }
    }

    /// Number of POVMs (1 for observables and frames).
    pub fn settings(&self) -> usize {
        match self {
            SchemeFamily::RankOne { k, .. } => *k,
            _ => 1,
        }
    }

    pub fn representing_set(&self, r: usize) -> Result<RepresentingSetSpec> {
        match self {
            SchemeFamily::Frame { n, .. } => representing_set_for_matrices(*n, r),
            _ => representing_set_for_rank(self.hilbert_dim(), r),
        }
    }

    pub fn sample(&self, m: usize, rng: &mut ChaCha8Rng) -> Result<AnyScheme> {
        Ok(match self {
            SchemeFamily::RankOne { n, k } => AnyScheme::Povms(sample_scheme_rank_one(*n, m, *k, rng)?),
            SchemeFamily::LocalObservables { dims, pauli } => {
                AnyScheme::Observables(sample_local_observables(dims, m, *pauli, rng)?)
            }
            SchemeFamily::Frame { n, parseval: true } => AnyScheme::Frame(sample_parseval_frame(*n, m, rng)?),
            SchemeFamily::Frame { n, parseval: false } => AnyScheme::Frame(sample_gaussian_frame(*n, m, rng)?),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub master_seed: u64,
    pub restarts: usize,
    pub max_iterations: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self { master_seed: 0, restarts: DEFAULT_RESTARTS, max_iterations: MAX_ITERATIONS }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_index: usize,
    pub seed: u64,
    pub verdict: Verdict,
    pub method: Method,
    pub kappa_hat: f64,
    /// Present for negative verdicts.
    pub witness: Option<HermitianMatrix>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepResult {
    pub family: SchemeFamily,
    pub n: usize,
    pub r: usize,
    pub k: usize,
    pub m: usize,
    pub trials: usize,
    pub complete_count: usize,
    pub not_complete_count: usize,
    pub inconclusive_count: usize,
    pub master_seed: u64,
    pub wall_time: f64,
    /// Sorted by `trial_index`.
    pub records: Vec<TrialRecord>,
}

impl SweepResult {
    pub fn complete_frequency(&self) -> f64 {
        self.complete_count as f64 / self.trials.max(1) as f64
    }

    pub fn inconclusive_frequency(&self) -> f64 {
        self.inconclusive_count as f64 / self.trials.max(1) as f64
    }
}

/// Certifies one seeded draw from `family` at size `m`.
pub fn run_trial(
    family: &SchemeFamily,
    r: usize,
    m: usize,
    trial_index: usize,
    config_seed: u64,
    opts: &SweepOptions,
) -> Result<TrialRecord> {
    let seed = derive_seed(config_seed, trial_index as u64);
    let spec = family.representing_set(r)?;
    let s = family.sample(m, &mut rng_from_seed(seed))?;
    let copts = CertifyOptions {
        restarts: opts.restarts,
        max_iterations: opts.max_iterations,
        seed,
        ..CertifyOptions::default()
    };
    let report = certify_scheme(&s, &spec, &copts)?;
    let witness = report.verdict.is_not_complete().then(|| report.witness.map(|w| w.matrix)).flatten();
    if let Some(w) = &witness {
        log::warn!(
            "trial {trial_index} (seed {seed:#018x}, m = {m}) is not complete; witness {}",
            serde_json::to_string(w).unwrap_or_default()
        );
    }
    Ok(TrialRecord {
        trial_index,
        seed,
        verdict: report.verdict,
        method: report.method,
        kappa_hat: report.kappa_hat,
        witness,
    })
}

/// One [`SweepResult`] per `m`, trials in parallel.
pub fn sweep(
    family: &SchemeFamily,
    r: usize,
    ms: &[usize],
    trials: usize,
    opts: &SweepOptions,
) -> Result<Vec<SweepResult>> {
    let n = family.hilbert_dim();
    ensure!(r >= 1 && 2 * r <= n, "rank must lie in 1..={}, got {r}", n / 2);
    ms.iter()
        .map(|&m| {
            let start = Instant::now();
            let config_seed = derive_seed(opts.master_seed, m as u64);
            let records = (0..trials)
                .into_par_iter()
                .map(|i| run_trial(family, r, m, i, config_seed, opts))
                .collect::<Result<Vec<_>>>()?;
            let count = |f: fn(Verdict) -> bool| records.iter().filter(|t| f(t.verdict)).count();
            Ok(SweepResult {
                family: family.clone(),
                n,
                r,
                k: family.settings(),
                m,
                trials,
                complete_count: count(Verdict::is_complete),
                not_complete_count: count(Verdict::is_not_complete),
                inconclusive_count: count(|v| v == Verdict::Inconclusive),
                master_seed: opts.master_seed,
                wall_time: start.elapsed().as_secs_f64(),
                records,
            })
        })
        .collect()
}

/// Rank-one POVM tuples (`k` POVMs, `m` outcomes each) against rank-`r` states.
pub fn genericity_sweep(
    n: usize,
    r: usize,
    k: usize,
    ms: &[usize],
    trials: usize,
    opts: &SweepOptions,
) -> Result<Vec<SweepResult>> {
    sweep(&SchemeFamily::RankOne { n, k }, r, ms, trials, opts)
}

/// Product observables on `⊗ C^{dims[i]}` against rank-`r` states.
pub fn observable_sweep(
    dims: &[usize],
    pauli: bool,
    r: usize,
    ms: &[usize],
    trials: usize,
    opts: &SweepOptions,
) -> Result<Vec<SweepResult>> {
    sweep(&SchemeFamily::LocalObservables { dims: dims.to_vec(), pauli }, r, ms, trials, opts)
}

/// Frames against rank-`r` PSD matrices without trace constraint.
pub fn frame_sweep(
    n: usize,
    r: usize,
    ms: &[usize],
    trials: usize,
    parseval: bool,
    opts: &SweepOptions,
) -> Result<Vec<SweepResult>> {
    sweep(&SchemeFamily::Frame { n, parseval }, r, ms, trials, opts)
}
