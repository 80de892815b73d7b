//! Time series over `R^k`, state distances, vector/matrix norms, windowed
//! series distance and rigid transforms.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::exec::{self, Execution};

/// Default tolerance for `MᵀM = I`.
pub const ORTHOGONALITY_TOL: f64 = 1e-9;

/// A finite sequence of states in `R^dim`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    dim: usize,
    data: Vec<f64>,
}

impl TimeSeries {
    pub fn new<S: AsRef<[f64]>>(states: &[S]) -> Result<Self> {
        let first = states
            .first()
            .ok_or_else(|| Error::input("time series needs at least one state"))?;
        let dim = first.as_ref().len();
        let mut data = Vec::with_capacity(dim * states.len());
        for (i, s) in states.iter().enumerate() {
            let s = s.as_ref();
            if s.len() != dim {
                return Err(Error::input(format!(
                    "state {i} has {} components, expected {dim}",
                    s.len()
                )));
            }
            data.extend_from_slice(s);
        }
        Self::from_flat(dim, data)
    }

    /// Builds a series from `len * dim` values laid out state after state.
    pub fn from_flat(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::input("dimension must be positive"));
        }
        if data.is_empty() || !data.len().is_multiple_of(dim) {
            return Err(Error::input(format!(
                "{} values cannot form states of dimension {dim}",
                data.len()
            )));
        }
        Ok(TimeSeries { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    /// Always false; kept for API symmetry with collections.
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn state(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn states(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    pub fn to_states(&self) -> Vec<Vec<f64>> {
        self.states().map(<[f64]>::to_vec).collect()
    }

    /// `self × other`: the states of `self` followed by those of `other`.
    pub fn concat(&self, other: &TimeSeries) -> Result<TimeSeries> {
        check_dims(self, other)?;
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(TimeSeries {
            dim: self.dim,
            data,
        })
    }

    pub fn negated(&self) -> TimeSeries {
        TimeSeries {
            dim: self.dim,
            data: self.data.iter().map(|x| -x).collect(),
        }
    }

    /// `self × −self`.
    pub fn mirrored(&self) -> TimeSeries {
        let mut data = self.data.clone();
        data.extend(self.data.iter().map(|x| -x));
        TimeSeries {
            dim: self.dim,
            data,
        }
    }

    /// Largest Euclidean norm among the states.
    pub fn max_state_norm(&self) -> f64 {
        self.states()
            .map(|s| lp_norm(s.iter().copied(), 2.0))
            .fold(0.0, f64::max)
    }
}

fn check_dims(a: &TimeSeries, b: &TimeSeries) -> Result<()> {
    if a.dim != b.dim {
        return Err(Error::input(format!(
            "dimension mismatch: {} vs {}",
            a.dim, b.dim
        )));
    }
    Ok(())
}

fn check_p(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::input(format!(
            "norm exponent p must be >= 1, got {p}"
        )));
    }
    Ok(())
}

/// `(Σ |x|^p)^(1/p)` over the magnitudes in `values`; `p = ∞` gives the max.
pub fn lp_norm<I: IntoIterator<Item = f64>>(values: I, p: f64) -> f64 {
    let it = values.into_iter().map(f64::abs);
    if p == 1.0 {
        it.sum()
    } else if p == 2.0 {
        it.map(|x| x * x).sum::<f64>().sqrt()
    } else if p.is_infinite() {
        it.fold(0.0, f64::max)
    } else {
        it.map(|x| x.powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

#[inline]
pub(crate) fn euclidean(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

/// Vector and matrix norms used throughout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormSpec {
    VectorP(f64),
    /// Entrywise p-norm of a matrix.
    MatrixP(f64),
    /// `max_j Σ_i |m_ij|`.
    MatrixMaxColumn,
}

impl NormSpec {
    pub fn validate(self) -> Result<Self> {
        match self {
            NormSpec::VectorP(p) | NormSpec::MatrixP(p) => check_p(p).map(|_| self),
            NormSpec::MatrixMaxColumn => Ok(self),
        }
    }

    pub fn vector(self, x: &[f64]) -> Result<f64> {
        match self.validate()? {
            NormSpec::VectorP(p) => Ok(lp_norm(x.iter().copied(), p)),
            _ => Err(Error::input("matrix norm applied to a vector")),
        }
    }

    pub fn matrix(self, m: &DMatrix<f64>) -> Result<f64> {
        match self.validate()? {
            NormSpec::MatrixP(p) => Ok(lp_norm(m.iter().copied(), p)),
            NormSpec::MatrixMaxColumn => Ok(m
                .column_iter()
                .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
                .fold(0.0, f64::max)),
            NormSpec::VectorP(_) => Err(Error::input("vector norm applied to a matrix")),
        }
    }
}

/// `‖x − y‖_p`.
pub fn state_distance(x: &[f64], y: &[f64], p: f64) -> Result<f64> {
    check_p(p)?;
    if x.len() != y.len() {
        return Err(Error::input(format!(
            "dimension mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    Ok(lp_norm(x.iter().zip(y).map(|(a, b)| a - b), p))
}

/// `‖(d_2(s_i, t_i))_i‖_p` for series of equal length.
pub fn series_distance_equal(s: &TimeSeries, t: &TimeSeries, p: f64) -> Result<f64> {
    check_p(p)?;
    check_dims(s, t)?;
    if s.len() != t.len() {
        return Err(Error::input(format!(
            "length mismatch: {} vs {}",
            s.len(),
            t.len()
        )));
    }
    Ok(window_distance(s, t, 0, p))
}

/// Distance between `short` and the window of `long` starting at `offset`.
fn window_distance(short: &TimeSeries, long: &TimeSeries, offset: usize, p: f64) -> f64 {
    lp_norm(
        short
            .states()
            .enumerate()
            .map(|(i, s)| euclidean(s, long.state(offset + i))),
        p,
    )
}

/// Result of a minimization over window offsets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowMatch {
    pub value: f64,
    /// Start of the best window inside the longer series (smallest on ties).
    pub offset: usize,
}

/// Orders the pair as (shorter, longer); equal lengths keep argument order.
pub(crate) fn short_long<'a>(
    s: &'a TimeSeries,
    t: &'a TimeSeries,
) -> (&'a TimeSeries, &'a TimeSeries) {
    if s.len() <= t.len() {
        (s, t)
    } else {
        (t, s)
    }
}

/// Minimizes `f(offset)` over all window offsets `0..=long_len - short_len`.
pub(crate) fn min_over_windows<F>(
    short_len: usize,
    long_len: usize,
    exec: Execution,
    f: F,
) -> WindowMatch
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let windows = long_len - short_len + 1;
    let (value, offset, ()) =
        exec::argmin(exec, windows, |b| (f(b), ())).expect("at least one window");
    WindowMatch { value, offset }
}

/// `min_b d_p(shorter, longer_b^m)`; symmetric in its arguments.
pub fn series_distance(s: &TimeSeries, t: &TimeSeries, p: f64) -> Result<WindowMatch> {
    series_distance_with(s, t, p, Execution::default())
}

pub fn series_distance_with(
    s: &TimeSeries,
    t: &TimeSeries,
    p: f64,
    exec: Execution,
) -> Result<WindowMatch> {
    check_p(p)?;
    check_dims(s, t)?;
    let (short, long) = short_long(s, t);
    Ok(min_over_windows(short.len(), long.len(), exec, |b| {
        window_distance(short, long, b, p)
    }))
}

/// `(t_b, …, t_{b+len−1})`.
pub fn subseries(t: &TimeSeries, b: usize, len: usize) -> Result<TimeSeries> {
    if b >= t.len() {
        return Err(Error::input(format!(
            "offset {b} out of range for length {}",
            t.len()
        )));
    }
    if len == 0 || len > t.len() - b {
        return Err(Error::input(format!(
            "window length {len} invalid at offset {b} for length {}",
            t.len()
        )));
    }
    Ok(TimeSeries {
        dim: t.dim,
        data: t.data[b * t.dim..(b + len) * t.dim].to_vec(),
    })
}

/// True iff every entry of `MᵀM − I` is within `tol`.
pub fn validate_orthogonal(m: &DMatrix<f64>, tol: f64) -> bool {
    if !m.is_square() {
        return false;
    }
    let gram = m.transpose() * m;
    gram.iter().enumerate().all(|(idx, g)| {
        let (r, c) = (idx % m.nrows(), idx / m.nrows());
        let target = if r == c { 1.0 } else { 0.0 };
        (g - target).abs() <= tol
    })
}

/// An element `(M, v)` of the congruence group: `x ↦ Mx + v`.
#[derive(Debug, Clone, PartialEq)]
pub struct RigidTransform {
    matrix: DMatrix<f64>,
    translation: DVector<f64>,
}

impl RigidTransform {
    pub fn new(matrix: DMatrix<f64>, translation: DVector<f64>) -> Result<Self> {
        Self::with_tolerance(matrix, translation, ORTHOGONALITY_TOL)
    }

    pub fn with_tolerance(
        matrix: DMatrix<f64>,
        translation: DVector<f64>,
        tol: f64,
    ) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() != translation.len() {
            return Err(Error::input(format!(
                "transform shape mismatch: {}x{} matrix, translation of length {}",
                matrix.nrows(),
                matrix.ncols(),
                translation.len()
            )));
        }
        if !validate_orthogonal(&matrix, tol) {
            return Err(Error::input("matrix is not orthogonal"));
        }
        Ok(RigidTransform {
            matrix,
            translation,
        })
    }

    /// Skips the orthogonality check; for matrices produced by the solvers.
    pub(crate) fn from_parts_unchecked(matrix: DMatrix<f64>, translation: DVector<f64>) -> Self {
        debug_assert!(validate_orthogonal(&matrix, 1e-6));
        RigidTransform {
            matrix,
            translation,
        }
    }

    pub fn identity(dim: usize) -> Self {
        RigidTransform {
            matrix: DMatrix::identity(dim, dim),
            translation: DVector::zeros(dim),
        }
    }

    pub fn linear(matrix: DMatrix<f64>) -> Result<Self> {
        let k = matrix.nrows();
        Self::new(matrix, DVector::zeros(k))
    }

    pub fn dim(&self) -> usize {
        self.translation.len()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn translation(&self) -> &DVector<f64> {
        &self.translation
    }

    pub fn matrix_rows(&self) -> Vec<Vec<f64>> {
        self.matrix
            .row_iter()
            .map(|r| r.iter().copied().collect())
            .collect()
    }

    /// `M x + v` written into `out`.
    #[inline]
    pub fn apply_state_into(&self, x: &[f64], out: &mut [f64]) {
        let k = self.dim();
        for (r, o) in out.iter_mut().enumerate().take(k) {
            let mut acc = self.translation[r];
            for (c, xc) in x.iter().enumerate() {
                acc += self.matrix[(r, c)] * xc;
            }
            *o = acc;
        }
    }
}

/// `M·T + v`.
pub fn apply_transform(tr: &RigidTransform, t: &TimeSeries) -> Result<TimeSeries> {
    if tr.dim() != t.dim() {
        return Err(Error::input(format!(
            "transform of dimension {} applied to series of dimension {}",
            tr.dim(),
            t.dim()
        )));
    }
    let mut data = vec![0.0; t.data.len()];
    for (src, dst) in t.states().zip(data.chunks_exact_mut(t.dim)) {
        tr.apply_state_into(src, dst);
    }
    Ok(TimeSeries { dim: t.dim, data })
}

/// Haar-distributed orthogonal matrix from the QR factorization of a
/// Gaussian matrix. With `reflect`, the first column is negated, flipping
/// the determinant.
pub fn random_orthogonal<R: Rng + ?Sized>(k: usize, rng: &mut R, reflect: bool) -> DMatrix<f64> {
    let g = DMatrix::<f64>::from_fn(k, k, |_, _| rng.sample(StandardNormal));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..k {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    if reflect && k > 0 {
        q.column_mut(0).neg_mut();
    }
    q
}
