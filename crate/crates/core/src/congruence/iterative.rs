//! Alternating translation / orthogonal-alignment descent with restarts.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{
    check_pair, optimal_translation, residual_objective, residuals, CongruenceResult, SolverConfig,
    SolverMode,
};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::series::{euclidean, random_orthogonal, RigidTransform, TimeSeries};

struct Candidate {
    value: f64,
    matrix: DMatrix<f64>,
    v: Vec<f64>,
    converged: bool,
}

/// Upper bound on `d^C_p(S, T)` with a witness transform.
///
/// Starts from the identity, from the least-squares (Kabsch) alignment, and
/// from `cfg.restarts` seeded random orthogonal matrices. From each start it
/// alternates two steps: translation by reweighted mean (Weiszfeld for
/// `p = 1`), then the orthogonal matrix maximizing the IRLS-weighted
/// cross-covariance, via SVD. The best iterate over all starts is returned;
/// the identity with `v = 0` is always among the candidates, so the value
/// never exceeds `d_p(S, T)`.
pub fn congruence_distance_upper(
    s: &TimeSeries,
    t: &TimeSeries,
    p: f64,
    cfg: &SolverConfig,
) -> Result<CongruenceResult> {
    congruence_distance_upper_with(s, t, p, cfg, Execution::default())
}

pub fn congruence_distance_upper_with(
    s: &TimeSeries,
    t: &TimeSeries,
    p: f64,
    cfg: &SolverConfig,
    exec: Execution,
) -> Result<CongruenceResult> {
    cfg.validate()?;
    check_pair(s, t)?;
    if p.is_nan() || p < 1.0 || p.is_infinite() {
        return Err(Error::input(format!("p must be finite and >= 1, got {p}")));
    }
    let k = s.dim();
    let baseline = {
        let zero = vec![0.0; k];
        let id = DMatrix::identity(k, k);
        Candidate {
            value: residual_objective(&residuals(s, t, &id), &zero, p),
            matrix: id,
            v: zero,
            converged: true,
        }
    };

    let starts = cfg.restarts + 2;
    let (_, _, best) = exec::argmin(exec, starts, |i| {
        let m0 = match i {
            0 => DMatrix::identity(k, k),
            1 => kabsch(s, t, cfg.translation),
            r => {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                rng.set_stream(r as u64);
                random_orthogonal(k, &mut rng, r % 2 == 1)
            }
        };
        let c = descend(s, t, p, m0, cfg);
        (c.value, c)
    })
    .expect("at least one start");
    let best = if baseline.value < best.value {
        baseline
    } else {
        best
    };

    Ok(CongruenceResult {
        value: best.value,
        transform: RigidTransform::from_parts_unchecked(best.matrix, DVector::from_vec(best.v)),
        mode: SolverMode::Iterative,
        is_certified_exact: false,
        converged: best.converged,
        error_bound: None,
    })
}

/// Orthogonal factor of `h = U Σ Vᵀ`, i.e. `argmax_M tr(hᵀ M)`.
fn polar(h: DMatrix<f64>) -> DMatrix<f64> {
    let svd = h.svd(true, true);
    svd.u.expect("u requested") * svd.v_t.expect("v_t requested")
}

/// Least-squares orthogonal alignment of `T` onto `S`.
fn kabsch(s: &TimeSeries, t: &TimeSeries, centred: bool) -> DMatrix<f64> {
    let k = s.dim();
    let mean = |x: &TimeSeries| {
        let mut c = vec![0.0; k];
        if centred {
            for st in x.states() {
                c.iter_mut().zip(st).for_each(|(a, b)| *a += b);
            }
            c.iter_mut().for_each(|a| *a /= x.len() as f64);
        }
        c
    };
    let (cs, ct) = (mean(s), mean(t));
    let mut h = DMatrix::zeros(k, k);
    for (si, ti) in s.states().zip(t.states()) {
        for r in 0..k {
            for c in 0..k {
                h[(r, c)] += (si[r] - cs[r]) * (ti[c] - ct[c]);
            }
        }
    }
    polar(h)
}

fn descend(
    s: &TimeSeries,
    t: &TimeSeries,
    p: f64,
    m0: DMatrix<f64>,
    cfg: &SolverConfig,
) -> Candidate {
    let k = s.dim();
    let step_v = |m: &DMatrix<f64>, start: Option<&[f64]>| -> (Vec<f64>, Vec<f64>) {
        let res = residuals(s, t, m);
        let v = if cfg.translation {
            optimal_translation(
                &res,
                k,
                p,
                start,
                cfg.weiszfeld_tol,
                cfg.max_iters,
                cfg.irls_eps,
            )
        } else {
            vec![0.0; k]
        };
        (res, v)
    };

    let mut m = m0;
    let (mut res, mut v) = step_v(&m, None);
    let mut value = residual_objective(&res, &v, p);
    let mut best = Candidate {
        value,
        matrix: m.clone(),
        v: v.clone(),
        converged: false,
    };

    for _ in 0..cfg.max_iters {
        let mut h = DMatrix::zeros(k, k);
        for ((si, ti), ri) in s.states().zip(t.states()).zip(res.chunks_exact(k)) {
            let d = euclidean(ri, &v).max(cfg.irls_eps);
            let w = if p == 1.0 { 1.0 / d } else { d.powf(p - 2.0) };
            for r in 0..k {
                let a = w * (si[r] - v[r]);
                for c in 0..k {
                    h[(r, c)] += a * ti[c];
                }
            }
        }
        m = polar(h);
        (res, v) = step_v(&m, Some(&v));
        let next = residual_objective(&res, &v, p);
        if next < best.value {
            best = Candidate {
                value: next,
                matrix: m.clone(),
                v: v.clone(),
                converged: false,
            };
        }
        if (value - next).abs() <= cfg.weiszfeld_tol * (1.0 + value) {
            best.converged = true;
            break;
        }
        value = next;
    }
    best
}
