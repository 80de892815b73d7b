//! Dense angle grid over `O(2)` with golden-section refinement.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};

use super::{
    check_pair, optimal_translation, residual_objective, residuals, CongruenceResult, SolverConfig,
    SolverMode,
};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::series::{euclidean, RigidTransform, TimeSeries};

fn planar(theta: f64, reflect: bool) -> DMatrix<f64> {
    let (sin, cos) = theta.sin_cos();
    // Reflection variant is R(θ)·diag(1, −1).
    let f = if reflect { -1.0 } else { 1.0 };
    DMatrix::from_row_slice(2, 2, &[cos, -sin * f, sin, cos * f])
}

struct Evaluated {
    value: f64,
    matrix: DMatrix<f64>,
    v: Vec<f64>,
}

fn evaluate(
    s: &TimeSeries,
    t: &TimeSeries,
    theta: f64,
    reflect: bool,
    cfg: &SolverConfig,
) -> Evaluated {
    let matrix = planar(theta, reflect);
    let res = residuals(s, t, &matrix);
    let v = if cfg.translation {
        optimal_translation(
            &res,
            2,
            1.0,
            None,
            cfg.weiszfeld_tol,
            cfg.max_iters,
            cfg.irls_eps,
        )
    } else {
        vec![0.0; 2]
    };
    Evaluated {
        value: residual_objective(&res, &v, 1.0),
        matrix,
        v,
    }
}

/// `d_1` congruence upper bound for planar series.
///
/// Evaluates every angle `θ = i·h` for rotations and reflections, optimizing
/// `v` per candidate, then refines the best angle within `±h`. The reported
/// `error_bound = L·h` bounds how far the continuous minimum can lie below the
/// grid value: `L = Σ‖t_i − c‖` with `c` the centroid of `T` when translating
/// (and `c = 0` otherwise) is a Lipschitz constant of the objective in `θ`.
pub fn congruence_distance_grid_k2(
    s: &TimeSeries,
    t: &TimeSeries,
    cfg: &SolverConfig,
) -> Result<CongruenceResult> {
    cfg.validate()?;
    check_pair(s, t)?;
    if s.dim() != 2 {
        return Err(Error::capability(format!(
            "grid-k2 solver needs dimension 2, got {}",
            s.dim()
        )));
    }
    let h = cfg.grid_resolution;
    let steps = (TAU / h).ceil() as usize;
    let (_, idx, best) = exec::argmin(Execution::default(), 2 * steps, |i| {
        let e = evaluate(s, t, (i / 2) as f64 * h, i % 2 == 1, cfg);
        (e.value, e)
    })
    .expect("non-empty grid");
    let reflect = idx % 2 == 1;
    let theta0 = (idx / 2) as f64 * h;

    // Golden-section search on [θ0 − h, θ0 + h].
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (theta0 - h, theta0 + h);
    let mut best = best;
    for _ in 0..60 {
        let a = hi - ratio * (hi - lo);
        let b = lo + ratio * (hi - lo);
        let (ea, eb) = (
            evaluate(s, t, a, reflect, cfg),
            evaluate(s, t, b, reflect, cfg),
        );
        if ea.value <= eb.value {
            hi = b;
            if ea.value < best.value {
                best = ea;
            }
        } else {
            lo = a;
            if eb.value < best.value {
                best = eb;
            }
        }
    }

    let centre = if cfg.translation {
        let mut c = [0.0; 2];
        for ti in t.states() {
            c[0] += ti[0];
            c[1] += ti[1];
        }
        [c[0] / t.len() as f64, c[1] / t.len() as f64]
    } else {
        [0.0; 2]
    };
    let lipschitz: f64 = t.states().map(|ti| euclidean(ti, &centre)).sum();

    Ok(CongruenceResult {
        value: best.value,
        transform: RigidTransform::from_parts_unchecked(best.matrix, DVector::from_vec(best.v)),
        mode: SolverMode::GridK2,
        is_certified_exact: false,
        converged: true,
        error_bound: Some(lipschitz * h),
    })
}
