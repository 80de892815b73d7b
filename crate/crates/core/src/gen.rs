//! Random perturbations that are not congruences, the ratio experiment built
//! on them, and seeded synthetic corpora.

use std::f64::consts::TAU;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::series::{random_orthogonal, series_distance_equal, TimeSeries};
use crate::structure::{structure_distance_with, LagSet, MatrixNormOverLags};

/// Seeded stream for item `index` of a batch generated from `seed`.
pub fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    pub eta: f64,
    pub explosions: usize,
    pub seed: u64,
}

impl GenParams {
    pub fn new(eta: f64, explosions: usize, seed: u64) -> Result<Self> {
        GenParams {
            eta,
            explosions,
            seed,
        }
        .validate()
    }

    pub fn validate(self) -> Result<Self> {
        if !(self.eta > 1.0 && self.eta.is_finite()) {
            return Err(Error::input(format!(
                "eta must be finite and > 1, got {}",
                self.eta
            )));
        }
        if self.explosions == 0 {
            return Err(Error::input("explosions must be at least 1"));
        }
        Ok(self)
    }
}

/// Randomness consumed by [`gen_with`].
pub trait PerturbationSource {
    /// A non-empty subset of `0..n`, in increasing order.
    fn subset(&mut self, n: usize) -> Vec<usize>;
    /// A scale factor in `[1/eta, eta]`.
    fn scale(&mut self, eta: f64) -> f64;
}

/// Independent fair coin per index (resampled if empty) and a uniform scale.
#[derive(Debug, Clone)]
pub struct RandomSource<R>(pub R);

impl<R: Rng> PerturbationSource for RandomSource<R> {
    fn subset(&mut self, n: usize) -> Vec<usize> {
        loop {
            let picked: Vec<usize> = (0..n).filter(|_| self.0.random_bool(0.5)).collect();
            if !picked.is_empty() {
                return picked;
            }
        }
    }

    fn scale(&mut self, eta: f64) -> f64 {
        self.0.random_range(1.0 / eta..=eta)
    }
}

/// Scales random index subsets of `s` around their barycenter, `explosions`
/// times. Deterministic in `(s, params)`.
pub fn gen(s: &TimeSeries, params: &GenParams) -> Result<TimeSeries> {
    let params = params.validate()?;
    let mut src = RandomSource(ChaCha8Rng::seed_from_u64(params.seed));
    Ok(gen_with(s, params.eta, params.explosions, &mut src))
}

pub fn gen_with<P: PerturbationSource + ?Sized>(
    s: &TimeSeries,
    eta: f64,
    explosions: usize,
    source: &mut P,
) -> TimeSeries {
    let k = s.dim();
    let mut data = s.as_flat().to_vec();
    let mut b = vec![0.0; k];
    for _ in 0..explosions {
        let subset = source.subset(s.len());
        let mu = source.scale(eta);
        if mu == 1.0 {
            continue;
        }
        b.iter_mut().for_each(|x| *x = 0.0);
        for &i in &subset {
            for (bc, x) in b.iter_mut().zip(&data[i * k..(i + 1) * k]) {
                *bc += x;
            }
        }
        let w = subset.len() as f64;
        b.iter_mut().for_each(|x| *x /= w);
        for &i in &subset {
            for (x, bc) in data[i * k..(i + 1) * k].iter_mut().zip(&b) {
                *x = bc + mu * (*x - bc);
            }
        }
    }
    TimeSeries::from_flat(k, data).expect("shape preserved")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioRecord {
    pub series_id: usize,
    pub d1: f64,
    pub delta_m: f64,
    pub reduced_delta_m: f64,
    /// `d1 / (2·delta_m)`, absent when `delta_m = 0`.
    pub e_delta: Option<f64>,
    /// `d1 / (2·reduced_delta_m)`, absent when `reduced_delta_m = 0`.
    pub e_reduced: Option<f64>,
}

impl RatioRecord {
    pub fn new(series_id: usize, s: &TimeSeries, t: &TimeSeries) -> Self {
        let d1 = series_distance_equal(s, t, 1.0).expect("same shape");
        let norm = MatrixNormOverLags::MaxColumn;
        let seq = Execution::Sequential;
        let delta_m = structure_distance_with(s, t, norm, LagSet::Full, seq)
            .expect("same shape")
            .value;
        let reduced_delta_m = structure_distance_with(s, t, norm, LagSet::Pow2, seq)
            .expect("same shape")
            .value;
        let ratio = |den: f64| (den > 0.0).then(|| d1 / (2.0 * den));
        RatioRecord {
            series_id,
            d1,
            delta_m,
            reduced_delta_m,
            e_delta: ratio(delta_m),
            e_reduced: ratio(reduced_delta_m),
        }
    }

    /// Both ratios are defined.
    pub fn included(&self) -> bool {
        self.e_delta.is_some() && self.e_reduced.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioSummary {
    pub params: GenParams,
    pub included: usize,
    pub excluded: usize,
    /// Mean of `e_delta` over included records; `None` if there are none.
    pub mean_e_delta: Option<f64>,
    pub mean_e_reduced: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioExperiment {
    pub records: Vec<RatioRecord>,
    pub summary: RatioSummary,
}

/// Perturbs each corpus member with its own stream `(params.seed, index)`.
pub fn ratio_experiment(corpus: &[TimeSeries], params: &GenParams) -> Result<RatioExperiment> {
    let params = params.validate()?;
    ratio_experiment_with(corpus, &params, Execution::default(), |i| {
        RandomSource(stream_rng(params.seed, i as u64))
    })
}

pub fn ratio_experiment_with<P, F>(
    corpus: &[TimeSeries],
    params: &GenParams,
    exec: Execution,
    make_source: F,
) -> Result<RatioExperiment>
where
    P: PerturbationSource,
    F: Fn(usize) -> P + Sync + Send,
{
    if corpus.is_empty() {
        return Err(Error::input("corpus is empty"));
    }
    let records = exec::map_indexed(exec, corpus.len(), |i| {
        let s = &corpus[i];
        let t = gen_with(s, params.eta, params.explosions, &mut make_source(i));
        RatioRecord::new(i, s, &t)
    });
    let kept: Vec<&RatioRecord> = records.iter().filter(|r| r.included()).collect();
    let mean = |f: fn(&RatioRecord) -> f64| {
        (!kept.is_empty()).then(|| kept.iter().map(|r| f(r)).sum::<f64>() / kept.len() as f64)
    };
    let summary = RatioSummary {
        params: *params,
        included: kept.len(),
        excluded: records.len() - kept.len(),
        mean_e_delta: mean(|r| r.e_delta.unwrap()),
        mean_e_reduced: mean(|r| r.e_reduced.unwrap()),
    };
    Ok(RatioExperiment { records, summary })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorpusKind {
    RandomWalk,
    Smooth,
    Loop,
}

impl FromStr for CorpusKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random-walk" => Ok(CorpusKind::RandomWalk),
            "smooth" => Ok(CorpusKind::Smooth),
            "loop" => Ok(CorpusKind::Loop),
            _ => Err(Error::input(format!(
                "unknown corpus kind {s:?} (random-walk, smooth, loop)"
            ))),
        }
    }
}

/// Closed curves used by [`CorpusKind::Loop`]; member `i` gets shape `i % 3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoopShape {
    Circle,
    Ellipse,
    Square,
}

impl LoopShape {
    pub fn for_member(i: usize) -> Self {
        [LoopShape::Circle, LoopShape::Ellipse, LoopShape::Square][i % 3]
    }
}

/// Seeded corpus; member `i` depends only on `(kind, length, dim, seed, i)`.
pub fn synth_corpus(
    count: usize,
    length: usize,
    dim: usize,
    kind: CorpusKind,
    seed: u64,
) -> Result<Vec<TimeSeries>> {
    if count == 0 || length == 0 || dim == 0 {
        return Err(Error::input("count, length and dim must all be at least 1"));
    }
    Ok((0..count)
        .map(|i| {
            let mut rng = stream_rng(seed, i as u64);
            let data = match kind {
                CorpusKind::RandomWalk => random_walk(length, dim, &mut rng),
                CorpusKind::Smooth => smooth(length, dim, &mut rng),
                CorpusKind::Loop => closed_loop(LoopShape::for_member(i), length, dim, &mut rng),
            };
            TimeSeries::from_flat(dim, data).expect("shape")
        })
        .collect())
}

fn random_walk<R: Rng>(n: usize, k: usize, rng: &mut R) -> Vec<f64> {
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut data = Vec::with_capacity(n * k);
    let mut x: Vec<f64> = (0..k).map(|_| normal.sample(rng)).collect();
    for _ in 0..n {
        data.extend_from_slice(&x);
        x.iter_mut().for_each(|c| *c += normal.sample(rng));
    }
    data
}

fn smooth<R: Rng>(n: usize, k: usize, rng: &mut R) -> Vec<f64> {
    let freq = Uniform::new(0.5, 3.0).expect("range");
    let amp = Uniform::new(0.5, 2.0).expect("range");
    let phase = Uniform::new(0.0, TAU).expect("range");
    let waves: Vec<[(f64, f64, f64); 3]> = (0..k)
        .map(|_| [(); 3].map(|_| (amp.sample(rng), freq.sample(rng), phase.sample(rng))))
        .collect();
    let mut data = Vec::with_capacity(n * k);
    for i in 0..n {
        let t = i as f64 / n as f64;
        for w in &waves {
            data.push(
                w.iter()
                    .map(|&(a, f, ph)| a * (TAU * f * t + ph).sin())
                    .sum(),
            );
        }
    }
    data
}

/// Point at parameter `u ∈ [0, 1)` on the unit shape.
fn shape_point(shape: LoopShape, u: f64, minor: f64) -> [f64; 2] {
    match shape {
        LoopShape::Circle => [(TAU * u).cos(), (TAU * u).sin()],
        LoopShape::Ellipse => [(TAU * u).cos(), minor * (TAU * u).sin()],
        LoopShape::Square => {
            let q = 4.0 * u;
            let f = q.fract() * 2.0 - 1.0;
            match q as usize {
                0 => [1.0, f],
                1 => [-f, 1.0],
                2 => [-1.0, -f],
                _ => [f, -1.0],
            }
        }
    }
}

/// Evenly spaced samples of a closed curve starting at a random phase, placed
/// in a random plane of `R^k`.
fn closed_loop<R: Rng>(shape: LoopShape, n: usize, k: usize, rng: &mut R) -> Vec<f64> {
    let phase: f64 = rng.random();
    let minor = rng.random_range(0.3..0.8);
    let q = (k > 2).then(|| random_orthogonal(k, rng, false));
    let mut data = Vec::with_capacity(n * k);
    for i in 0..n {
        let [x, y] = shape_point(shape, (phase + i as f64 / n as f64).fract(), minor);
        match (&q, k) {
            (_, 1) => data.push(x),
            (None, _) => data.extend_from_slice(&[x, y]),
            (Some(q), _) => data.extend((0..k).map(|r| q[(r, 0)] * x + q[(r, 1)] * y)),
        }
    }
    data
}
