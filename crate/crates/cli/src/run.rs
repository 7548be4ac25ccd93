use std::time::Instant;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::{json, Value};

use povm_certify::certify::{
    certify_scheme, demonstrate_ambiguity, exact_kernel_decision, reconstruct, stability_ball_test,
    CertificationReport, CertifyOptions, ReconstructOptions, Verdict,
};
use povm_certify::lab::{
    commutator_independence_check, differential_identity_check, isometry_constraint_identity_check, random_real_pair,
    render_table1, secant_dimension_check, sweep, table1_reproduce, trivial_partition_nullity, SchemeFamily,
    SweepOptions, SweepResult,
};
use povm_certify::matcore::{ComplexMatrix, HermitianMatrix};
use povm_certify::schemes::{
    apply_scheme, computational_basis, qubit_mub_scheme, sample_haar_isometry, sample_unit_hermitian, trine_povm,
    AnyScheme, Measurement, SchemeFile,
};
use povm_certify::seed::{derive_seed, rng_from_seed, task_rng};
use povm_certify::varieties::{
    representing_set_for_matrices, representing_set_for_rank, verify_dimension, Constraint, DimensionVerdict,
    RepresentingSetSpec,
};

use crate::args::{parse_sizes, CertifyArgs, Cli, Command, ConstraintArg, Family, Format, Preset, Probe, SchemeSource};
use crate::output::{emit, manifest_path, to_csv, to_json, Artifact, ARTIFACT_VERSION};

/// Process exit status of a finished run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Success,
    Negative,
    Inconclusive,
}

impl Status {
    pub fn code(self) -> u8 {
        match self {
            Status::Success => 0,
            Status::Negative => 2,
            Status::Inconclusive => 3,
        }
    }

    fn of(v: Verdict) -> Self {
        if v.is_complete() {
            Status::Success
        } else if v.is_not_complete() {
            Status::Negative
        } else {
            Status::Inconclusive
        }
    }
}

/// Result payload, CSV rows (if any) and a one-line summary.
struct Done {
    status: Status,
    result: Value,
    rows: Option<String>,
    summary: String,
}

pub fn run(cli: &Cli, threads: usize) -> Result<Status> {
    let start = Instant::now();
    let seed = cli.common.seed;
    let done = match &cli.command {
        Command::Gen { scheme } => gen(scheme, seed)?,
        Command::Certify(a) => certify(a, seed, false)?,
        Command::Kappa(a) => certify(a, seed, true)?,
        Command::Stability { certify, trials } => stability(certify, *trials, seed)?,
        Command::Dimension { n, r, constraint, trials } => dimension(*n, *r, *constraint, *trials, seed)?,
        Command::Lab { probe, n, m, r, trials } => lab(*probe, *n, *m, *r, *trials, seed)?,
        Command::Sweep { family, n, r, k, m, dims, pauli, trials, restarts } => {
            let fam = match family {
                Family::RankOne => {
                    SchemeFamily::RankOne { n: n.context("--n is required for rank-one sweeps")?, k: *k }
                }
                Family::Observables => {
                    SchemeFamily::LocalObservables { dims: dims.clone().unwrap_or(vec![2, 2]), pauli: *pauli }
                }
                Family::Frame => bail!("use the `frames` subcommand for frame sweeps"),
            };
            sweeps(&fam, *r, m, *trials, *restarts, seed)?
        }
        Command::Frames { n, r, m, parseval, trials, restarts } => {
            sweeps(&SchemeFamily::Frame { n: *n, parseval: *parseval }, *r, m, *trials, *restarts, seed)?
        }
        Command::Reconstruct { scheme, r, trials, restarts, ambiguity } => {
            reconstruction(scheme, *r, *trials, *restarts, *ambiguity, seed)?
        }
        Command::Table1 => table1()?,
    };
    let artifact = Artifact {
        artifact_version: ARTIFACT_VERSION,
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        seed,
        threads,
        config: cli,
        wall_time_seconds: start.elapsed().as_secs_f64(),
        result: done.result,
    };
    let out = cli.common.out.as_deref();
    match (cli.common.format, done.rows) {
        (Format::Csv, Some(rows)) => {
            emit(out, &rows)?;
            if let Some(p) = out {
                emit(Some(&manifest_path(p)), &to_json(&artifact)?)?;
            }
        }
        (Format::Csv, None) => bail!("this subcommand has no CSV form; use --format json"),
        // Scheme files stay in the plain scheme format so every subcommand can read them.
        (Format::Json, _) if matches!(cli.command, Command::Gen { .. }) => emit(out, &to_json(&artifact.result)?)?,
        (Format::Json, _) => {
            if !matches!(cli.command, Command::Table1) || out.is_some() {
                emit(out, &to_json(&artifact)?)?;
            }
        }
    }
    eprintln!("{}", done.summary);
    Ok(done.status)
}

fn load_scheme(src: &SchemeSource, seed: u64) -> Result<AnyScheme> {
    if let Some(path) = &src.input {
        return SchemeFile::read(path)?.into_scheme().with_context(|| format!("in {}", path.display()));
    }
    if let Some(p) = src.preset {
        return Ok(AnyScheme::Povms(match p {
            Preset::Mub => qubit_mub_scheme(),
            Preset::Trine => trine_povm(),
            Preset::Computational => computational_basis(src.n.unwrap_or(2)),
        }));
    }
    let fam = family_of(src)?;
    let m = src.m.or(src.n).context("--m is required")?;
    Ok(fam.sample(m, &mut rng_from_seed(seed))?)
}

fn family_of(src: &SchemeSource) -> Result<SchemeFamily> {
    Ok(match src.family {
        Family::RankOne => SchemeFamily::RankOne { n: src.n.context("--n is required")?, k: src.k },
        Family::Observables => {
            SchemeFamily::LocalObservables { dims: src.dims.clone().unwrap_or(vec![2, 2]), pauli: src.pauli }
        }
        Family::Frame => SchemeFamily::Frame { n: src.n.context("--n is required")?, parseval: src.parseval },
    })
}

fn spec_for(s: &AnyScheme, r: usize) -> Result<RepresentingSetSpec> {
    let n = s.hilbert_dim();
    Ok(match s {
        AnyScheme::Frame(_) => representing_set_for_matrices(n, r)?,
        _ => representing_set_for_rank(n, r)?,
    })
}

fn gen(src: &SchemeSource, seed: u64) -> Result<Done> {
    let s = load_scheme(src, seed)?;
    let sampled = src.input.is_none() && src.preset.is_none();
    let file = SchemeFile::from_any(&s, sampled.then_some(seed));
    let summary = format!("generated {:?} scheme on C^{} with {} outcomes", file.kind, file.n, s.num_outcomes());
    Ok(Done { status: Status::Success, result: serde_json::to_value(file)?, rows: None, summary })
}

fn run_certify(a: &CertifyArgs, s: &AnyScheme, seed: u64) -> Result<CertificationReport> {
    let opts = CertifyOptions { restarts: a.restarts, max_iterations: a.max_iterations, seed, ..Default::default() };
    if a.exact {
        let n = s.hilbert_dim();
        let c = if matches!(s, AnyScheme::Frame(_)) { Constraint::Sphere } else { Constraint::TracelessSphere };
        return Ok(exact_kernel_decision(s, &RepresentingSetSpec::new(n, n, c)?)?);
    }
    Ok(certify_scheme(s, &spec_for(s, a.r)?, &opts)?)
}

fn certify(a: &CertifyArgs, seed: u64, kappa_only: bool) -> Result<Done> {
    let s = load_scheme(&a.scheme, seed)?;
    let report = run_certify(a, &s, seed)?;
    let status = Status::of(report.verdict);
    let summary = format!(
        "{}: kappa_hat = {:.6e} via {:?} (rank {}, n = {}, seed {seed})",
        serde_json::to_value(report.verdict)?.as_str().unwrap_or_default(),
        report.kappa_hat,
        report.method,
        report.spec.rank_bound(),
        report.spec.n()
    );
    let result = if kappa_only {
        json!({"kappa_hat": report.kappa_hat, "verdict": report.verdict, "method": report.method, "spec": report.spec})
    } else {
        serde_json::to_value(&report)?
    };
    Ok(Done { status, result, rows: None, summary })
}

fn stability(a: &CertifyArgs, trials: usize, seed: u64) -> Result<Done> {
    let AnyScheme::Povms(s) = load_scheme(&a.scheme, seed)? else {
        bail!("stability needs a rank-one POVM scheme");
    };
    let spec = representing_set_for_rank(s.hilbert_dim(), a.r)?;
    let opts = CertifyOptions { restarts: a.restarts, max_iterations: a.max_iterations, seed, ..Default::default() };
    let base = certify_scheme(&s, &spec, &opts)?;
    if !base.verdict.is_complete() {
        let summary = format!("base scheme is {:?}; no stability ball", base.verdict);
        return Ok(Done {
            status: Status::of(base.verdict),
            result: serde_json::to_value(&base)?,
            rows: None,
            summary,
        });
    }
    let rec = stability_ball_test(&s, &spec, &base, trials, &opts)?;
    let summary = format!(
        "stability {}: kappa_hat = {:.6e}, {} trials in radius {:.3e}, min perturbed kappa {:.3e}",
        if rec.passed { "holds" } else { "fails" },
        rec.kappa_hat,
        rec.trials.len(),
        rec.radius,
        rec.min_kappa
    );
    let status = if rec.passed { Status::Success } else { Status::Negative };
    Ok(Done { status, result: serde_json::to_value(&rec)?, rows: None, summary })
}

fn dimension(n: usize, r: usize, c: ConstraintArg, trials: usize, seed: u64) -> Result<Done> {
    let constraint = match c {
        ConstraintArg::Free => Constraint::Free,
        ConstraintArg::UnitTrace => Constraint::UnitTrace,
        ConstraintArg::Sphere => Constraint::Sphere,
        ConstraintArg::TracelessSphere => Constraint::TracelessSphere,
    };
    let spec = RepresentingSetSpec::new(n, r, constraint)?;
    let rep = verify_dimension(&spec, trials, &mut rng_from_seed(seed))?;
    let status = match rep.verdict {
        DimensionVerdict::Pass => Status::Success,
        DimensionVerdict::Mismatch => Status::Negative,
        DimensionVerdict::Inconclusive => Status::Inconclusive,
    };
    let summary = format!(
        "dimension {:?}: measured {} (expected {}), gap {:.2e}",
        rep.verdict, rep.jacobian_rank, rep.target_formula, rep.singular_value_gap
    );
    Ok(Done { status, result: serde_json::to_value(&rep)?, rows: None, summary })
}

#[derive(Serialize)]
struct ProbeRow {
    trial_index: usize,
    value: f64,
    ok: bool,
}

fn lab(probe: Probe, n: usize, m: usize, r: usize, trials: usize, seed: u64) -> Result<Done> {
    let mut rows = Vec::with_capacity(trials);
    if probe == Probe::Secant {
        let b = secant_dimension_check(n, r, trials, &mut rng_from_seed(seed))?;
        rows.push(ProbeRow { trial_index: 0, value: b.difference_dim as f64, ok: b.holds });
    } else {
        for i in 0..trials {
            let rng = &mut task_rng(seed, i as u64);
            let (value, ok) = match probe {
                Probe::Identities => {
                    let (a, c) = random_real_pair(2, m, 2, rng);
                    let b = sample_unit_hermitian(n, false, rng);
                    let y = ComplexMatrix::gaussian(m, n, rng);
                    let e1 = differential_identity_check(&a, &b, &c, &y, 1, rng)?;
                    let e2 = isometry_constraint_identity_check(&sample_haar_isometry(m.max(n), n, rng)?, 1, rng)?;
                    let e = e1.max(e2);
                    (e, e <= 1e-6)
                }
                Probe::Nullity => {
                    let u = sample_haar_isometry(m, n, rng)?;
                    let x = sample_unit_hermitian(n, false, rng);
                    match trivial_partition_nullity(&u, &x) {
                        Ok(k) => (k as f64, k == 1),
                        Err(_) => (f64::NAN, false),
                    }
                }
                Probe::Commutators => {
                    let c = commutator_independence_check(&sample_unit_hermitian(m, false, rng))?;
                    (c.rank as f64, c.nondegenerate && c.rank + 1 == m)
                }
                Probe::Secant => unreachable!(),
            };
            rows.push(ProbeRow { trial_index: i, value, ok });
        }
    }
    let passed = rows.iter().filter(|r| r.ok).count();
    let status = if passed == rows.len() { Status::Success } else { Status::Negative };
    let summary = format!("lab {probe:?}: {passed}/{} probes as expected", rows.len());
    Ok(Done { status, result: serde_json::to_value(&rows)?, rows: Some(to_csv(&rows)?), summary })
}

#[derive(Serialize)]
struct SweepRow {
    n: usize,
    r: usize,
    k: usize,
    m: usize,
    trials: usize,
    complete_count: usize,
    not_complete_count: usize,
    inconclusive_count: usize,
    master_seed: u64,
    wall_time: f64,
}

fn sweeps(fam: &SchemeFamily, r: usize, m: &str, trials: usize, restarts: usize, seed: u64) -> Result<Done> {
    let ms = parse_sizes(m).map_err(anyhow::Error::msg)?;
    let opts = SweepOptions { master_seed: seed, restarts, ..SweepOptions::default() };
    let results: Vec<SweepResult> = sweep(fam, r, &ms, trials, &opts)?;
    let rows: Vec<SweepRow> = results
        .iter()
        .map(|s| SweepRow {
            n: s.n,
            r: s.r,
            k: s.k,
            m: s.m,
            trials: s.trials,
            complete_count: s.complete_count,
            not_complete_count: s.not_complete_count,
            inconclusive_count: s.inconclusive_count,
            master_seed: s.master_seed,
            wall_time: s.wall_time,
        })
        .collect();
    let summary = results
        .iter()
        .map(|s| format!("m={}: {}/{} complete", s.m, s.complete_count, s.trials))
        .collect::<Vec<_>>()
        .join(", ");
    Ok(Done { status: Status::Success, result: serde_json::to_value(&results)?, rows: Some(to_csv(&rows)?), summary })
}

/// `AA†/tr(AA†)` for a Gaussian `n × r` factor.
fn random_state(n: usize, r: usize, rng: &mut rand_chacha::ChaCha8Rng) -> HermitianMatrix {
    let a = ComplexMatrix::gaussian(n, r, rng);
    HermitianMatrix::symmetrize(a.matmul(&a.adjoint())).scale(1.0 / a.frobenius_norm_sqr())
}

#[derive(Serialize)]
struct ReconstructRow {
    trial_index: usize,
    residual: f64,
    trace_distance: f64,
    converged: bool,
}

fn reconstruction(
    src: &SchemeSource,
    r: usize,
    trials: usize,
    restarts: usize,
    ambiguity: bool,
    seed: u64,
) -> Result<Done> {
    let s = load_scheme(src, seed)?;
    let n = s.hilbert_dim();
    if ambiguity {
        if matches!(s, AnyScheme::Frame(_)) {
            bail!("ambiguous state pairs need a POVM or observable scheme");
        }
        let report = certify_scheme(&s, &representing_set_for_rank(n, r)?, &CertifyOptions::with_seed(seed))?;
        return Ok(match (&report.witness, report.verdict.is_not_complete()) {
            (Some(w), true) => {
                let amb = demonstrate_ambiguity(&s, &w.matrix)?;
                let summary = format!(
                    "ambiguous pair at trace distance {:.6} with data difference {:.2e}",
                    amb.trace_distance, amb.data_difference
                );
                Done { status: Status::Negative, result: serde_json::to_value(&amb)?, rows: None, summary }
            }
            _ => Done {
                status: Status::of(report.verdict),
                result: serde_json::to_value(&report)?,
                rows: None,
                summary: format!("no ambiguous pair: scheme is {:?}", report.verdict),
            },
        });
    }
    let mut rows = Vec::with_capacity(trials);
    for i in 0..trials {
        let truth = random_state(n, r, &mut task_rng(seed, i as u64));
        let y = apply_scheme(&s, &truth)?;
        let opts = ReconstructOptions { restarts, seed: derive_seed(seed ^ 0x5eed, i as u64), ..Default::default() };
        let res = reconstruct(&s, &y, r, &opts)?.with_truth(&truth)?;
        rows.push(ReconstructRow {
            trial_index: i,
            residual: res.residual,
            trace_distance: res.trace_distance_to_truth.unwrap_or(f64::NAN),
            converged: res.converged,
        });
    }
    let worst = rows.iter().map(|r| r.trace_distance).fold(0.0, f64::max);
    let ok = rows.iter().all(|r| r.converged && r.trace_distance <= 1e-6);
    let summary = format!("reconstructed {trials} rank-{r} states, worst trace distance {worst:.2e}");
    let status = if ok { Status::Success } else { Status::Negative };
    Ok(Done { status, result: serde_json::to_value(&rows)?, rows: Some(to_csv(&rows)?), summary })
}

fn table1() -> Result<Done> {
    let cells = table1_reproduce()?;
    print!("{}", render_table1(&cells));
    let bad = cells.iter().filter(|c| !c.matches()).count();
    let status = if bad == 0 { Status::Success } else { Status::Negative };
    let summary = if bad == 0 {
        format!("all {} cells match", cells.len())
    } else {
        format!("{bad} of {} cells differ from the published upper bounds", cells.len())
    };
    Ok(Done { status, result: serde_json::to_value(&cells)?, rows: None, summary })
}
