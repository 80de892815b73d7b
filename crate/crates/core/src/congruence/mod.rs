//! Congruence distance `min_{M orthogonal, v} d_p(S, M·T + v)`.
//!
//! Computing it exactly is NP-hard already for `p = 1`. Results from the
//! exhaustive modes are exact minima over their matrix class (axis sign flips
//! or signed permutations); the grid and iterative modes return upper bounds
//! together with the witness that attains them.

mod boolean;
mod grid;
mod iterative;
mod translation;

pub use boolean::{
    boolean_minimum, congruence_distance_boolean, congruence_distance_boolean_with,
    flipped_distance, sign_matrix, signed_permutation_search, signed_permutation_search_with,
    BOOLEAN_K_MAX, SIGNED_PERMUTATION_K_MAX,
};
pub use grid::congruence_distance_grid_k2;
pub use iterative::{congruence_distance_upper, congruence_distance_upper_with};
pub use translation::optimal_translation;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{euclidean, lp_norm, RigidTransform, TimeSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverMode {
    BooleanMatrices,
    SignedPermutations,
    GridK2,
    Iterative,
}

impl std::str::FromStr for SolverMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "boolean" | "boolean-matrices" => Ok(SolverMode::BooleanMatrices),
            "signed-permutations" | "signed-perm" => Ok(SolverMode::SignedPermutations),
            "grid-k2" | "grid" => Ok(SolverMode::GridK2),
            "iterative" => Ok(SolverMode::Iterative),
            other => Err(Error::input(format!("unknown solver mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub mode: SolverMode,
    /// Angle step in radians for [`SolverMode::GridK2`].
    pub grid_resolution: f64,
    pub max_iters: usize,
    pub weiszfeld_tol: f64,
    /// Floor on residual norms in reweighting steps.
    pub irls_eps: f64,
    /// Random orthogonal starts for [`SolverMode::Iterative`].
    pub restarts: usize,
    pub seed: u64,
    /// Optimize the translation `v`; when false, `v = 0`.
    pub translation: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            mode: SolverMode::Iterative,
            grid_resolution: 1e-3,
            max_iters: 500,
            weiszfeld_tol: 1e-10,
            irls_eps: 1e-12,
            restarts: 8,
            seed: 0,
            translation: true,
        }
    }
}

impl SolverConfig {
    pub fn with_mode(mode: SolverMode) -> Self {
        SolverConfig {
            mode,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(Error::input(format!("{name} must be positive, got {x}")))
            }
        };
        positive("grid_resolution", self.grid_resolution)?;
        positive("weiszfeld_tol", self.weiszfeld_tol)?;
        positive("irls_eps", self.irls_eps)?;
        if self.restarts == 0 {
            return Err(Error::input("restarts must be at least 1"));
        }
        if self.max_iters == 0 {
            return Err(Error::input("max_iters must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CongruenceResult {
    /// `d_p(S, M·T + v)` at the witness.
    pub value: f64,
    pub transform: RigidTransform,
    pub mode: SolverMode,
    /// True only for exhaustive searches over their matrix class with `v = 0`.
    pub is_certified_exact: bool,
    /// Iterative mode: whether the best start met the stopping tolerance.
    pub converged: bool,
    /// Grid mode: Lipschitz bound on the gap to the continuous minimum.
    pub error_bound: Option<f64>,
}

/// Runs the solver selected by `cfg.mode`. The exhaustive and grid modes
/// are defined for `p = 1` only.
pub fn congruence_distance(
    s: &TimeSeries,
    t: &TimeSeries,
    p: f64,
    cfg: &SolverConfig,
) -> Result<CongruenceResult> {
    cfg.validate()?;
    if cfg.mode != SolverMode::Iterative && p != 1.0 {
        return Err(Error::capability(format!(
            "mode {:?} supports p = 1 only",
            cfg.mode
        )));
    }
    match cfg.mode {
        SolverMode::BooleanMatrices => congruence_distance_boolean_with(
            s,
            t,
            cfg.translation,
            cfg,
            crate::exec::Execution::default(),
        ),
        SolverMode::SignedPermutations => signed_permutation_search(s, t),
        SolverMode::GridK2 => congruence_distance_grid_k2(s, t, cfg),
        SolverMode::Iterative => congruence_distance_upper(s, t, p, cfg),
    }
}

pub(crate) fn check_pair(s: &TimeSeries, t: &TimeSeries) -> Result<()> {
    if s.dim() != t.dim() {
        return Err(Error::input(format!(
            "dimension mismatch: {} vs {}",
            s.dim(),
            t.dim()
        )));
    }
    if s.len() != t.len() {
        return Err(Error::input(format!(
            "congruence distance needs equal lengths, got {} and {}",
            s.len(),
            t.len()
        )));
    }
    Ok(())
}

/// Flat residuals `s_i − M t_i`.
pub(crate) fn residuals(s: &TimeSeries, t: &TimeSeries, m: &DMatrix<f64>) -> Vec<f64> {
    let k = s.dim();
    let mut out = Vec::with_capacity(k * s.len());
    for (si, ti) in s.states().zip(t.states()) {
        for r in 0..k {
            let mut acc = si[r];
            for c in 0..k {
                acc -= m[(r, c)] * ti[c];
            }
            out.push(acc);
        }
    }
    out
}

/// `‖(‖r_i − v‖_2)_i‖_p` over flat residuals.
pub(crate) fn residual_objective(res: &[f64], v: &[f64], p: f64) -> f64 {
    lp_norm(res.chunks_exact(v.len()).map(|r| euclidean(r, v)), p)
}
