//! Exhaustive searches over finite subgroups of the orthogonal group.

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};

use super::{check_pair, optimal_translation, CongruenceResult, SolverConfig, SolverMode};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::series::{RigidTransform, TimeSeries};

/// Largest dimension for the `2^k` sign enumeration.
pub const BOOLEAN_K_MAX: usize = 20;
/// Largest dimension for the `k!·2^k` signed-permutation enumeration.
pub const SIGNED_PERMUTATION_K_MAX: usize = 6;

/// Diagonal matrix with `−1` at every coordinate whose bit is set in `flips`.
pub fn sign_matrix(flips: u64, k: usize) -> DMatrix<f64> {
    DMatrix::from_diagonal(&DVector::from_fn(k, |c, _| sign(flips, c)))
}

#[inline]
fn sign(flips: u64, c: usize) -> f64 {
    if flips >> c & 1 == 1 {
        -1.0
    } else {
        1.0
    }
}

/// Exact `min d_1(S, M·T)` over diagonal sign matrices `M`.
///
/// Candidates are indexed by their flip mask (bit `c` set negates axis `c`),
/// so the identity is candidate 0 and ties resolve toward fewer, lower flips.
/// With `with_translation`, each candidate also gets its geometric-median
/// translation; that result is no longer certified.
pub fn congruence_distance_boolean(
    s: &TimeSeries,
    t: &TimeSeries,
    with_translation: bool,
) -> Result<CongruenceResult> {
    congruence_distance_boolean_with(
        s,
        t,
        with_translation,
        &SolverConfig::with_mode(SolverMode::BooleanMatrices),
        Execution::default(),
    )
}

pub fn congruence_distance_boolean_with(
    s: &TimeSeries,
    t: &TimeSeries,
    with_translation: bool,
    cfg: &SolverConfig,
    exec: Execution,
) -> Result<CongruenceResult> {
    check_pair(s, t)?;
    let k = s.dim();
    if k > BOOLEAN_K_MAX {
        return Err(Error::capability(format!(
            "boolean enumeration limited to k <= {BOOLEAN_K_MAX}, got {k}"
        )));
    }
    let candidates = 1usize << k;
    let (value, flips, v) = if with_translation {
        let (value, idx, v) = exec::argmin(exec, candidates, |f| {
            let res = flipped_residuals(s, t, f as u64);
            let v = optimal_translation(
                &res,
                k,
                1.0,
                None,
                cfg.weiszfeld_tol,
                cfg.max_iters,
                cfg.irls_eps,
            );
            (super::residual_objective(&res, &v, 1.0), v)
        })
        .expect("non-empty");
        (value, idx as u64, v)
    } else {
        let (value, flips) = minimize_flips(s, t, exec);
        (value, flips, vec![0.0; k])
    };
    Ok(CongruenceResult {
        value,
        transform: RigidTransform::from_parts_unchecked(
            sign_matrix(flips, k),
            DVector::from_vec(v),
        ),
        mode: SolverMode::BooleanMatrices,
        is_certified_exact: !with_translation,
        converged: true,
        error_bound: None,
    })
}

/// Minimum of `d_1(S, M·T)` over sign matrices and the flip mask attaining it.
pub fn boolean_minimum(s: &TimeSeries, t: &TimeSeries, exec: Execution) -> Result<(f64, u64)> {
    check_pair(s, t)?;
    if s.dim() > BOOLEAN_K_MAX {
        return Err(Error::capability(format!(
            "boolean enumeration limited to k <= {BOOLEAN_K_MAX}, got {}",
            s.dim()
        )));
    }
    Ok(minimize_flips(s, t, exec))
}

fn minimize_flips(s: &TimeSeries, t: &TimeSeries, exec: Execution) -> (f64, u64) {
    let (value, idx, ()) = exec::argmin(exec, 1usize << s.dim(), |f| {
        (flipped_distance(s, t, f as u64), ())
    })
    .expect("non-empty");
    (value, idx as u64)
}

/// `d_1(S, diag(σ)·T)` without materializing the product.
pub fn flipped_distance(s: &TimeSeries, t: &TimeSeries, flips: u64) -> f64 {
    s.states()
        .zip(t.states())
        .map(|(si, ti)| {
            si.iter()
                .zip(ti)
                .enumerate()
                .map(|(c, (a, b))| {
                    let d = a - sign(flips, c) * b;
                    d * d
                })
                .sum::<f64>()
                .sqrt()
        })
        .sum()
}

fn flipped_residuals(s: &TimeSeries, t: &TimeSeries, flips: u64) -> Vec<f64> {
    s.states()
        .zip(t.states())
        .flat_map(|(si, ti)| {
            si.iter()
                .zip(ti)
                .enumerate()
                .map(move |(c, (a, b))| a - sign(flips, c) * b)
        })
        .collect()
}

/// Exact `min d_1(S, M·T)` over signed permutation matrices (`v = 0`).
///
/// Candidate `perm_index · 2^k + flips` maps `e_j` to `σ_j e_{π(j)}`, with
/// permutations in lexicographic order.
pub fn signed_permutation_search(s: &TimeSeries, t: &TimeSeries) -> Result<CongruenceResult> {
    signed_permutation_search_with(s, t, Execution::default())
}

pub fn signed_permutation_search_with(
    s: &TimeSeries,
    t: &TimeSeries,
    exec: Execution,
) -> Result<CongruenceResult> {
    check_pair(s, t)?;
    let k = s.dim();
    if k > SIGNED_PERMUTATION_K_MAX {
        return Err(Error::capability(format!(
            "signed-permutation enumeration limited to k <= {SIGNED_PERMUTATION_K_MAX}, got {k}"
        )));
    }
    let perms: Vec<Vec<usize>> = (0..k).permutations(k).collect();
    let signs = 1usize << k;
    let (value, idx, ()) = exec::argmin(exec, perms.len() * signs, |idx| {
        let (perm, flips) = (&perms[idx / signs], (idx % signs) as u64);
        let value = s
            .states()
            .zip(t.states())
            .map(|(si, ti)| {
                (0..k)
                    .map(|j| {
                        let d = si[perm[j]] - sign(flips, j) * ti[j];
                        d * d
                    })
                    .sum::<f64>()
                    .sqrt()
            })
            .sum();
        (value, ())
    })
    .expect("non-empty");
    let (perm, flips) = (&perms[idx / signs], (idx % signs) as u64);
    let mut m = DMatrix::zeros(k, k);
    for j in 0..k {
        m[(perm[j], j)] = sign(flips, j);
    }
    Ok(CongruenceResult {
        value,
        transform: RigidTransform::from_parts_unchecked(m, DVector::zeros(k)),
        mode: SolverMode::SignedPermutations,
        is_certified_exact: true,
        converged: true,
        error_bound: None,
    })
}
