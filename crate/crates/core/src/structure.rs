//! Structure (self-similarity) matrices and the delta distances built on them.
//!
//! A structure matrix holds `d_2(t_i, t_{i+j})` for every start `i` and lag
//! `j`. A *column* is the set of entries sharing one lag `j`; the max-column
//! norm is therefore `max_j Σ_i |·|`. The reduced structure keeps only lags
//! that are powers of two.
//!
//! Norms are accumulated column by column in increasing lag order, with each
//! column summed in increasing `i`. Because both structures share that order,
//! the reduced distances never exceed the full ones, even in floating point.

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::series::{euclidean, min_over_windows, short_long, TimeSeries, WindowMatch};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LagSet {
    /// All lags `1..n`.
    Full,
    /// Lags `1, 2, 4, …` below `n`.
    Pow2,
}

impl LagSet {
    /// Lags present in a structure of a length-`n` series, increasing.
    pub fn lags(self, n: usize) -> Vec<usize> {
        match self {
            LagSet::Full => (1..n).collect(),
            LagSet::Pow2 => std::iter::successors(Some(1usize), |j| j.checked_mul(2))
                .take_while(|&j| j < n)
                .collect(),
        }
    }
}

/// Triangular matrix of pairwise state distances, stored by lag column.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureMatrix {
    n: usize,
    lag_set: LagSet,
    lags: Vec<usize>,
    /// `columns[c][i] = d_2(t_i, t_{i + lags[c]})`, `i ∈ [0, n − lags[c])`.
    columns: Vec<Vec<f64>>,
}

impl StructureMatrix {
    fn compute(t: &TimeSeries, lag_set: LagSet, exec: Execution) -> Self {
        let n = t.len();
        let lags = lag_set.lags(n);
        let columns = exec::map_indexed(exec, lags.len(), |c| {
            column(t, 0, n, lags[c]).collect::<Vec<_>>()
        });
        StructureMatrix {
            n,
            lag_set,
            lags,
            columns,
        }
    }

    /// Length of the source series.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lag_set(&self) -> LagSet {
        self.lag_set
    }

    pub fn lags(&self) -> &[usize] {
        &self.lags
    }

    /// Entry for start `i` and lag `j`, if present.
    pub fn entry(&self, i: usize, j: usize) -> Option<f64> {
        let c = self.lags.binary_search(&j).ok()?;
        self.columns[c].get(i).copied()
    }

    /// Lag column `j` (entries ordered by start index).
    pub fn column(&self, j: usize) -> Option<&[f64]> {
        let c = self.lags.binary_search(&j).ok()?;
        Some(&self.columns[c])
    }

    /// Row `i`: entries with start `i`, by increasing lag.
    pub fn row(&self, i: usize) -> Vec<f64> {
        self.columns
            .iter()
            .filter_map(|col| col.get(i).copied())
            .collect()
    }

    /// All rows `i ∈ [0, n − 1)`.
    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n.saturating_sub(1)).map(|i| self.row(i)).collect()
    }

    pub fn num_entries(&self) -> usize {
        self.columns.iter().map(Vec::len).sum()
    }
}

#[inline]
fn column(t: &TimeSeries, offset: usize, m: usize, lag: usize) -> impl Iterator<Item = f64> + '_ {
    (offset..offset + m - lag).map(move |i| euclidean(t.state(i), t.state(i + lag)))
}

pub fn structure(t: &TimeSeries) -> StructureMatrix {
    StructureMatrix::compute(t, LagSet::Full, Execution::default())
}

pub fn reduced_structure(t: &TimeSeries) -> StructureMatrix {
    StructureMatrix::compute(t, LagSet::Pow2, Execution::default())
}

pub fn structure_with(t: &TimeSeries, lag_set: LagSet, exec: Execution) -> StructureMatrix {
    StructureMatrix::compute(t, lag_set, exec)
}

/// Matrix norm applied to `|A − B|`, over the lag-column layout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MatrixNormOverLags {
    MaxColumn,
    /// Entrywise p-norm; `p = ∞` is the max entry.
    P(f64),
}

impl MatrixNormOverLags {
    pub fn validate(self) -> Result<Self> {
        match self {
            MatrixNormOverLags::P(p) if p.is_nan() || p < 1.0 => Err(Error::input(format!(
                "matrix norm exponent must be >= 1, got {p}"
            ))),
            _ => Ok(self),
        }
    }

    /// Per-column accumulation of the absolute differences.
    #[inline]
    fn column_term<I: Iterator<Item = f64>>(self, diffs: I) -> f64 {
        match self {
            MatrixNormOverLags::MaxColumn => diffs.map(f64::abs).sum(),
            MatrixNormOverLags::P(1.0) => diffs.map(f64::abs).sum(),
            MatrixNormOverLags::P(2.0) => diffs.map(|d| d * d).sum(),
            MatrixNormOverLags::P(p) if p.is_infinite() => diffs.map(f64::abs).fold(0.0, f64::max),
            MatrixNormOverLags::P(p) => diffs.map(|d| d.abs().powf(p)).sum(),
        }
    }

    /// Folds column terms (in lag order) into the norm value.
    #[inline]
    fn combine<I: Iterator<Item = f64>>(self, terms: I) -> f64 {
        match self {
            MatrixNormOverLags::MaxColumn => terms.fold(0.0, f64::max),
            MatrixNormOverLags::P(1.0) => terms.sum(),
            MatrixNormOverLags::P(2.0) => terms.sum::<f64>().sqrt(),
            MatrixNormOverLags::P(p) if p.is_infinite() => terms.fold(0.0, f64::max),
            MatrixNormOverLags::P(p) => terms.sum::<f64>().powf(1.0 / p),
        }
    }
}

/// `‖ |A − B| ‖` for two structures of the same shape.
pub fn norm_of_difference(
    a: &StructureMatrix,
    b: &StructureMatrix,
    norm: MatrixNormOverLags,
) -> Result<f64> {
    let norm = norm.validate()?;
    if a.n != b.n || a.lag_set != b.lag_set {
        return Err(Error::input(format!(
            "structure shape mismatch: n={} ({:?}) vs n={} ({:?})",
            a.n, a.lag_set, b.n, b.lag_set
        )));
    }
    Ok(norm.combine(
        a.columns
            .iter()
            .zip(&b.columns)
            .map(|(ca, cb)| norm.column_term(ca.iter().zip(cb).map(|(x, y)| x - y))),
    ))
}

/// Delta distance over the full structures, minimized over windows of the
/// longer series. Symmetric in its arguments.
pub fn delta_distance(
    s: &TimeSeries,
    t: &TimeSeries,
    norm: MatrixNormOverLags,
) -> Result<WindowMatch> {
    structure_distance_with(s, t, norm, LagSet::Full, Execution::default())
}

/// As [`delta_distance`], over reduced (power-of-two lag) structures.
pub fn reduced_delta_distance(
    s: &TimeSeries,
    t: &TimeSeries,
    norm: MatrixNormOverLags,
) -> Result<WindowMatch> {
    structure_distance_with(s, t, norm, LagSet::Pow2, Execution::default())
}

/// Shared implementation of both delta distances.
///
/// Each window's structure is recomputed from the states, so a sweep costs
/// `O((n − m + 1) · m² · k)` for full lags and `O((n − m + 1) · m log m · k)`
/// for power-of-two lags.
pub fn structure_distance_with(
    s: &TimeSeries,
    t: &TimeSeries,
    norm: MatrixNormOverLags,
    lag_set: LagSet,
    exec: Execution,
) -> Result<WindowMatch> {
    let norm = norm.validate()?;
    if s.dim() != t.dim() {
        return Err(Error::input(format!(
            "dimension mismatch: {} vs {}",
            s.dim(),
            t.dim()
        )));
    }
    let (short, long) = short_long(s, t);
    let m = short.len();
    let lags = lag_set.lags(m);

    if long.len() == m {
        let terms = exec::map_indexed(exec, lags.len(), |c| {
            let j = lags[c];
            norm.column_term(
                column(short, 0, m, j)
                    .zip(column(long, 0, m, j))
                    .map(|(a, b)| a - b),
            )
        });
        return Ok(WindowMatch {
            value: norm.combine(terms.into_iter()),
            offset: 0,
        });
    }

    let reference = StructureMatrix::compute(short, lag_set, Execution::Sequential);
    Ok(min_over_windows(m, long.len(), exec, |b| {
        norm.combine(lags.iter().zip(&reference.columns).map(|(&j, col)| {
            norm.column_term(col.iter().zip(column(long, b, m, j)).map(|(a, b)| a - b))
        }))
    }))
}
