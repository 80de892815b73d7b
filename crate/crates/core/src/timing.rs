//! Wall-clock scaling measurements for the distance kernels.

use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::gen::{synth_corpus, CorpusKind};
use crate::series::{series_distance_with, TimeSeries};
use crate::structure::{structure_distance_with, LagSet, MatrixNormOverLags};

/// Shortest wall time per sample; fast kernels are repeated until reached.
const MIN_SAMPLE: Duration = Duration::from_millis(10);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BenchMeasure {
    Series,
    Delta,
    ReducedDelta,
}

impl FromStr for BenchMeasure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "series" => Ok(BenchMeasure::Series),
            "delta" => Ok(BenchMeasure::Delta),
            "reduced-delta" => Ok(BenchMeasure::ReducedDelta),
            _ => Err(Error::input(format!(
                "unknown bench measure {s:?} (series, delta, reduced-delta)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub lengths: Vec<usize>,
    pub dim: usize,
    pub measure: BenchMeasure,
    pub repeats: usize,
    pub seed: u64,
    pub exec: Execution,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            lengths: vec![256, 512, 1024, 2048],
            dim: 8,
            measure: BenchMeasure::Delta,
            repeats: 5,
            seed: 0,
            exec: Execution::Sequential,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BenchRow {
    pub length: usize,
    /// Median seconds per evaluation.
    pub median_seconds: f64,
    /// Evaluations batched into each sample.
    pub batch: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub measure: BenchMeasure,
    pub dim: usize,
    pub rows: Vec<BenchRow>,
    /// Least-squares slope of log time against log length; `None` with fewer
    /// than two distinct lengths.
    pub exponent: Option<f64>,
}

impl BenchReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("length,median_seconds,batch\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{:e},{}\n",
                r.length, r.median_seconds, r.batch
            ));
        }
        if let Some(e) = self.exponent {
            out.push_str(&format!("# exponent,{e:.4}\n"));
        }
        out
    }
}

/// Slope of the least-squares line through `(ln x, ln y)`.
pub fn fit_loglog(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    Some(sxy / sxx)
}

pub fn run_bench(cfg: &BenchConfig) -> Result<BenchReport> {
    if cfg.repeats == 0 {
        return Err(Error::input("repeats must be at least 1"));
    }
    if cfg.lengths.is_empty() || cfg.lengths.contains(&0) || cfg.dim == 0 {
        return Err(Error::input("lengths and dim must be positive"));
    }
    let mut kernels = Vec::with_capacity(cfg.lengths.len());
    for (li, &n) in cfg.lengths.iter().enumerate() {
        let seed = cfg.seed.wrapping_add(li as u64);
        let pair = synth_corpus(2, n, cfg.dim, CorpusKind::RandomWalk, seed)?;
        kernels.push((n, pair));
    }
    let eval = |s: &TimeSeries, t: &TimeSeries| match cfg.measure {
        BenchMeasure::Series => series_distance_with(s, t, 1.0, cfg.exec).map(|w| w.value),
        BenchMeasure::Delta => {
            structure_distance_with(s, t, MatrixNormOverLags::MaxColumn, LagSet::Full, cfg.exec)
                .map(|w| w.value)
        }
        BenchMeasure::ReducedDelta => {
            structure_distance_with(s, t, MatrixNormOverLags::MaxColumn, LagSet::Pow2, cfg.exec)
                .map(|w| w.value)
        }
    };
    let sample = |pair: &[TimeSeries], batch: usize| -> Result<Duration> {
        let start = Instant::now();
        for _ in 0..batch {
            std::hint::black_box(eval(&pair[0], &pair[1])?);
        }
        Ok(start.elapsed())
    };

    let mut batches = Vec::with_capacity(kernels.len());
    for (_, pair) in &kernels {
        let mut batch = 1;
        while sample(pair, batch)? < MIN_SAMPLE {
            batch *= 2;
        }
        batches.push(batch);
    }
    // Round-robin over lengths so slow drift in machine speed hits every
    // length alike instead of biasing the slope.
    let mut samples = vec![Vec::with_capacity(cfg.repeats); kernels.len()];
    for _ in 0..cfg.repeats {
        for (i, (_, pair)) in kernels.iter().enumerate() {
            let elapsed = sample(pair, batches[i])?;
            samples[i].push(elapsed.as_secs_f64() / batches[i] as f64);
        }
    }
    let rows: Vec<BenchRow> = kernels
        .iter()
        .zip(&mut samples)
        .zip(&batches)
        .map(|(((n, _), times), &batch)| {
            times.sort_by(f64::total_cmp);
            BenchRow {
                length: *n,
                median_seconds: times[times.len() / 2],
                batch,
            }
        })
        .collect();
    let xs: Vec<f64> = rows.iter().map(|r| r.length as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.median_seconds).collect();
    Ok(BenchReport {
        measure: cfg.measure,
        dim: cfg.dim,
        exponent: fit_loglog(&xs, &ys),
        rows,
    })
}
