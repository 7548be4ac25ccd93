use rayon::prelude::*;

use crate::error::Result;
use crate::schemes::Measurement;
use crate::seed::task_rng;
use crate::varieties::{retract, sample_point, LowRankPoint, RepresentingSetSpec};

use super::objective::{tangent_axpy, tangent_inner, tangent_scale, Objective};
use super::{classify, CertificationReport, CertifyOptions, Method, Witness};

const ARMIJO_C: f64 = 1e-4;
const MAX_HALVINGS: usize = 60;
const STEP_MIN: f64 = 1e-12;
const STEP_MAX: f64 = 1e6;
/// Relative per-iteration decrease below which an iteration counts as stalled.
const STALL_REL: f64 = 1e-13;
/// Consecutive stalled iterations that end a descent whose gradient sits on a roundoff floor.
const STALL_ITERS: usize = 25;

struct Outcome {
    point: LowRankPoint,
    value: f64,
    iterations: usize,
}

/// Riemannian gradient descent with Barzilai-Borwein initial steps and Armijo
/// backtracking. Stops at the gradient tolerance, the iteration cap, or after
/// `STALL_ITERS` iterations that each lower `f` by less than `STALL_REL · f`.
/// `None` when the iterate leaves the finite range.
fn descend(obj: &Objective<'_>, start: LowRankPoint, opts: &CertifyOptions) -> Option<Outcome> {
    let spec = *obj.spec();
    let mut p = start;
    let (mut f, mut g) = obj.value_and_gradient(&p);
    let mut memory = None;
    let mut iterations = 0;
    let mut stalled = 0;
    while iterations < opts.max_iterations {
        if !f.is_finite() {
            return None;
        }
        let gn2 = tangent_inner(&g, &g);
        if gn2.sqrt() <= opts.grad_tol {
            break;
        }
        let mut step = match &memory {
            Some((s, g_prev)) => {
                let y = tangent_axpy(-1.0, g_prev, &g);
                let sy = tangent_inner(s, &y);
                if sy > 0.0 {
                    tangent_inner(s, s) / sy
                } else {
                    1.0 / gn2.sqrt()
                }
            }
            None => 1.0 / gn2.sqrt().max(1.0),
        }
        .clamp(STEP_MIN, STEP_MAX);
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            if let Ok(q) = retract(&spec, &p, &g, -step) {
                let fq = obj.value(&q);
                if fq <= f - ARMIJO_C * step * gn2 {
                    accepted = Some(q);
                    break;
                }
            }
            step *= 0.5;
        }
        iterations += 1;
        let Some(q) = accepted else { break };
        let (fq, gq) = obj.value_and_gradient(&q);
        stalled = if f - fq <= STALL_REL * f { stalled + 1 } else { 0 };
        memory = Some((tangent_scale(-step, &g), g));
        p = q;
        f = fq;
        g = gq;
        if stalled >= STALL_ITERS {
            break;
        }
    }
    f.is_finite().then_some(Outcome { point: p, value: f, iterations })
}

/// Multi-restart minimization of `‖h_M(X)‖²` over the representing set. Restart `i`
/// starts from a point drawn with `task_rng(opts.seed, i)`.
pub fn min_over_representing_set<M: Measurement + Sync + ?Sized>(
    s: &M,
    spec: &RepresentingSetSpec,
    opts: &CertifyOptions,
) -> Result<CertificationReport> {
    let obj = Objective::new(s, *spec)?;
    let outcomes: Vec<Option<Outcome>> = (0..opts.restarts)
        .into_par_iter()
        .map(|i| {
            let start = sample_point(spec, &mut task_rng(opts.seed, i as u64));
            descend(&obj, start, opts)
        })
        .collect();
    let discarded = outcomes.iter().filter(|o| o.is_none()).count();
    if discarded > 0 {
        log::warn!("{discarded} of {} restarts diverged and were discarded", opts.restarts);
    }
    let iterations = outcomes.iter().map(|o| o.as_ref().map_or(0, |o| o.iterations)).collect();
    let best = outcomes.into_iter().flatten().reduce(|a, b| if b.value < a.value { b } else { a });
    let (verdict, kappa_hat, witness) = match best {
        Some(o) => {
            let matrix = o.point.materialize();
            (classify(o.value), o.value.sqrt(), Some(Witness { point: o.point, matrix, objective: o.value }))
        }
        None => (classify(f64::NAN), f64::NAN, None),
    };
    Ok(CertificationReport {
        verdict,
        method: Method::Optimizer,
        spec: *spec,
        kappa_hat,
        witness,
        restarts: opts.restarts,
        discarded_restarts: discarded,
        iterations,
        seed: opts.seed,
    })
}
