//! Acceptance criteria, one line of output each. Runs as a plain binary so
//! the summary is printed without `--nocapture`.

mod common;

use std::f64::consts::SQRT_2;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use congruence_core::congruence::{
    boolean_minimum, congruence_distance_grid_k2, SolverConfig, SolverMode,
};
use congruence_core::gen::{ratio_experiment, synth_corpus, CorpusKind, GenParams};
use congruence_core::reduction::{
    build_reduction, verify_reduction_with, Clause, CnfFormula, Literal, VerifyOptions,
    CLAUSE_MINIMUM,
};
use congruence_core::series::{
    apply_transform, random_orthogonal, series_distance, series_distance_equal, RigidTransform,
};
use congruence_core::structure::{structure_distance_with, LagSet, MatrixNormOverLags};
use congruence_core::timing::{run_bench, BenchConfig, BenchMeasure};
use congruence_core::{Execution, TimeSeries};
use itertools::Itertools;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;

type Outcome = Result<String, String>;
type Check = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn delta(s: &TimeSeries, t: &TimeSeries, norm: MatrixNormOverLags, lags: LagSet) -> f64 {
    structure_distance_with(s, t, norm, lags, Execution::default())
        .unwrap()
        .value
}

fn all_clauses(k: usize) -> Vec<Clause> {
    (0..k)
        .combinations(3)
        .flat_map(|vars| {
            (0..8u8).map(move |signs| {
                let lits = [0, 1, 2].map(|i| Literal {
                    var: vars[i],
                    positive: signs >> i & 1 == 0,
                });
                Clause::new(lits).unwrap()
            })
        })
        .collect()
}

fn random_formula(rng: &mut ChaCha8Rng) -> CnfFormula {
    let k = rng.random_range(3..=10usize);
    let m = rng.random_range(1..=5usize);
    let clauses = (0..m)
        .map(|_| {
            let vars = rand::seq::index::sample(rng, k, 3);
            let lits = [0, 1, 2].map(|i| Literal {
                var: vars.index(i),
                positive: rng.random_bool(0.5),
            });
            Clause::new(lits).unwrap()
        })
        .collect();
    CnfFormula::new(k, clauses).unwrap()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut formulas = Vec::new();
    for k in 3..=5 {
        let clauses = all_clauses(k);
        for m in 1..=3 {
            for combo in clauses.iter().combinations_with_replacement(m) {
                formulas.push(CnfFormula::new(k, combo.into_iter().copied().collect()).unwrap());
            }
        }
    }
    let exhaustive = formulas.len();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    formulas.extend((0..50).map(|_| random_formula(&mut rng)));

    let opts = VerifyOptions {
        spot_check: None,
        exec: Execution::Sequential,
    };
    let verify = |f: &CnfFormula| {
        verify_reduction_with(&build_reduction(f), &opts)
            .map(|r| r.satisfiable)
            .map_err(|e| format!("{e}\n{}", f.to_dimacs()))
    };
    #[cfg(feature = "parallel")]
    let results: Vec<_> = {
        use rayon::prelude::*;
        formulas.par_iter().map(verify).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<_> = formulas.iter().map(verify).collect();
    let mut sat = 0;
    for r in results {
        sat += r? as usize;
    }

    // The iterative solver over all of O(k) never undercuts the target.
    let spot = VerifyOptions {
        spot_check: Some(SolverConfig {
            restarts: 4,
            seed: 7,
            ..SolverConfig::default()
        }),
        exec: Execution::default(),
    };
    for f in formulas[exhaustive..].iter().take(10) {
        verify_reduction_with(&build_reduction(f), &spot).map_err(|e| e.to_string())?;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "{} formulas ({exhaustive} exhaustive + 50 random), {sat} 1-in-3 satisfiable, {:.1}s",
        formulas.len(),
        elapsed.as_secs_f64()
    ))
}

fn criterion_2() -> Outcome {
    let (s, t) = right_angle_pair();
    let d = series_distance_equal(&s, &t, 1.0).unwrap();
    ensure((d - 5.0).abs() <= 1e-12, || format!("d_1(S,T) = {d}"))?;
    let rot =
        RigidTransform::linear(DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0])).unwrap();
    let d = series_distance_equal(&s, &apply_transform(&rot, &t).unwrap(), 1.0).unwrap();
    ensure((d - (1.0 + SQRT_2)).abs() <= 1e-12, || {
        format!("d_1(S,MT) = {d}")
    })?;

    let single =
        CnfFormula::new(3, vec![Clause::new([0, 1, 2].map(Literal::pos)).unwrap()]).unwrap();
    let inst = build_reduction(&single);
    let (b, _) = boolean_minimum(&inst.s_plain, &inst.t_plain, Execution::default()).unwrap();
    ensure((b - CLAUSE_MINIMUM).abs() <= 1e-9, || {
        format!("gadget minimum {b}")
    })?;
    ensure((b - 41.65685).abs() < 1e-5, || {
        format!("gadget minimum {b}")
    })?;

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let f = random_formula(&mut rng);
        let r = verify_reduction_with(&build_reduction(&f), &VerifyOptions::default())
            .map_err(|e| e.to_string())?;
        ensure(
            (r.mirrored_value - 2.0 * r.boolean_minimum).abs() <= 1e-9,
            || {
                format!(
                    "mirrored {} vs 2B {}",
                    r.mirrored_value,
                    2.0 * r.boolean_minimum
                )
            },
        )?;
    }
    Ok(format!(
        "right-angle pair exact, gadget minimum {b:.9}, mirrored = 2B on 20 formulas"
    ))
}

const NORMS: [MatrixNormOverLags; 4] = [
    MatrixNormOverLags::MaxColumn,
    MatrixNormOverLags::P(1.0),
    MatrixNormOverLags::P(2.0),
    MatrixNormOverLags::P(f64::INFINITY),
];

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for trial in 0..200 {
        let k = rng.random_range(1..=16);
        let n = rng.random_range(1..=64);
        let s = gaussian_series(&mut rng, n, k, 3.0);
        let tr = random_rigid(&mut rng, k, 10.0);
        let t = apply_transform(&tr, &s).unwrap();
        let tol = 1e-9 * (1.0 + s.max_state_norm());
        for norm in NORMS {
            for lags in [LagSet::Full, LagSet::Pow2] {
                let d = delta(&s, &t, norm, lags);
                worst = worst.max(d / tol * 1e-9);
                ensure(d <= tol, || {
                    format!("trial {trial} (k={k}, n={n}, {norm:?}, {lags:?}): {d:e}")
                })?;
            }
        }
    }
    Ok(format!(
        "200 trials x 4 norms x 2 lag sets, worst scaled residual {worst:.1e}"
    ))
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let slack = |rhs: f64| 1e-9 * (1.0 + rhs);
    let mut checks = 0;
    for trial in 0..500 {
        let k = rng.random_range(1..=8);
        let n = rng.random_range(1..=40);
        let extra = if trial % 2 == 0 {
            0
        } else {
            rng.random_range(1..=10)
        };
        let s = gaussian_series(&mut rng, n, k, 2.0);
        let t = match trial % 3 {
            0 => gaussian_series(&mut rng, n + extra, k, 2.0),
            1 => {
                let tr = random_rigid(&mut rng, k, 1.0);
                let noise = gaussian_series(&mut rng, n + extra, k, 0.05);
                let base = if extra == 0 {
                    s.clone()
                } else {
                    s.concat(&gaussian_series(&mut rng, extra, k, 2.0)).unwrap()
                };
                let moved = apply_transform(&tr, &base).unwrap();
                let data = moved
                    .as_flat()
                    .iter()
                    .zip(noise.as_flat())
                    .map(|(a, b)| a + b)
                    .collect();
                TimeSeries::from_flat(k, data).unwrap()
            }
            _ => {
                let base = gaussian_series(&mut rng, n + extra, k, 2.0);
                let p = GenParams::new(1.5, 3, trial as u64).unwrap();
                congruence_core::gen::gen(&base, &p).unwrap()
            }
        };
        let (s, t) = if rng.random_bool(0.5) { (s, t) } else { (t, s) };
        let min_len = s.len().min(t.len());
        let d1 = series_distance(&s, &t, 1.0).unwrap().value;
        let dm = delta(&s, &t, MatrixNormOverLags::MaxColumn, LagSet::Full);
        let rm = delta(&s, &t, MatrixNormOverLags::MaxColumn, LagSet::Pow2);
        let d1_full = delta(&s, &t, MatrixNormOverLags::P(1.0), LagSet::Full);
        let d1_red = delta(&s, &t, MatrixNormOverLags::P(1.0), LagSet::Pow2);
        let ctx = || format!("trial {trial} (k={k}, lengths {}/{})", s.len(), t.len());

        ensure(dm <= 2.0 * d1 + slack(2.0 * d1), || {
            format!("{}: dDm {dm} > 2 d1 {d1}", ctx())
        })?;
        let c = (min_len as f64 - 1.0).max(0.0);
        ensure(d1_full <= c * d1 + slack(c * d1), || {
            format!("{}: dD1 {d1_full} > (n-1) d1 {}", ctx(), c * d1)
        })?;
        if min_len >= 3 {
            let c = (2.0 * ((min_len - 1) as f64).log2()).floor();
            ensure(d1_red <= c * d1 + slack(c * d1), || {
                format!("{}: dd1 {d1_red} > {c} d1 {d1}", ctx())
            })?;
            checks += 1;
        }
        ensure(rm <= dm, || format!("{}: ddm {rm} > dDm {dm}", ctx()))?;
        ensure(d1_red <= d1_full, || {
            format!("{}: dd1 {d1_red} > dD1 {d1_full}", ctx())
        })?;
        checks += 4;
    }
    Ok(format!("500 pairs, {checks} inequalities, 0 violations"))
}

fn criterion_5() -> Outcome {
    let cfg = SolverConfig::with_mode(SolverMode::GridK2);
    let mut ratios = Vec::new();
    for eps in [0.5f64, 0.1, 0.01] {
        let (s, t) = unbounded_pair(eps);
        let d = delta(&s, &t, MatrixNormOverLags::P(1.0), LagSet::Full);
        let expect = 2.0 * (1.0 - (1.0 - eps * eps).sqrt());
        ensure((d - expect).abs() <= 1e-12, || {
            format!("eps {eps}: dD1 {d} vs {expect}")
        })?;
        let r = congruence_distance_grid_k2(&s, &t, &cfg).map_err(|e| e.to_string())?;
        let bound = r.error_bound.unwrap_or(0.0);
        ensure(r.value >= eps / 2.0 - bound, || {
            format!("eps {eps}: grid value {} < eps/2 - {bound}", r.value)
        })?;
        ratios.push(r.value / d);
    }
    ensure(ratios.windows(2).all(|w| w[1] > w[0]), || {
        format!("ratios {ratios:?}")
    })?;
    Ok(format!(
        "congruence/dD1 ratios {}",
        ratios.iter().map(|r| format!("{r:.3e}")).join(" < ")
    ))
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    for trial in 0..1000 {
        let k = rng.random_range(1..=16);
        let reflect = rng.random_bool(0.5);
        let m = random_orthogonal(k, &mut rng, reflect);
        for i in 0..k {
            let col = m.column(i);
            let unit = |r: usize| if r == i { 1.0 } else { 0.0 };
            let a2: f64 = (0..k).map(|r| (col[r] - unit(r)).powi(2)).sum();
            let b2: f64 = (0..k).map(|r| (col[r] + unit(r)).powi(2)).sum();
            let err = (a2 + b2 - 4.0).abs();
            worst = worst.max(err);
            ensure(err <= 1e-9, || {
                format!("trial {trial}, k={k}, i={i}: {err:e}")
            })?;
        }
    }
    Ok(format!("1000 matrices, max |a^2 + b^2 - 4| = {worst:.1e}"))
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for trial in 0..200 {
        let k = rng.random_range(1..=6);
        let n = rng.random_range(1..=30);
        let [a, b, c] = [(); 3].map(|_| gaussian_series(&mut rng, n, k, 1.5));
        let check = |name: &str, f: &dyn Fn(&TimeSeries, &TimeSeries) -> f64| {
            let (ab, ba, bc, ac) = (f(&a, &b), f(&b, &a), f(&b, &c), f(&a, &c));
            ensure((ab - ba).abs() <= 1e-9 * (1.0 + ab), || {
                format!("trial {trial} {name}: asymmetric {ab} vs {ba}")
            })?;
            ensure(ac <= ab + bc + 1e-9 * (1.0 + ac), || {
                format!("trial {trial} {name}: triangle {ac} > {ab} + {bc}")
            })
        };
        for p in [1.0, 2.0, 3.0, f64::INFINITY] {
            check(&format!("d_{p}"), &|x, y| {
                series_distance_equal(x, y, p).unwrap()
            })?;
        }
        for norm in NORMS {
            for lags in [LagSet::Full, LagSet::Pow2] {
                check(&format!("{norm:?}/{lags:?}"), &|x, y| {
                    delta(x, y, norm, lags)
                })?;
            }
        }
    }
    Ok("200 triples, 4 series distances and 8 delta distances".into())
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let corpus = synth_corpus(100, 64, 32, CorpusKind::RandomWalk, 8).unwrap();
    let mut means = Vec::new();
    for explosions in [1, 5] {
        let mut row = Vec::new();
        for eta in [1.1, 2.0, 10.0] {
            let p = GenParams::new(eta, explosions, 80).unwrap();
            let exp = ratio_experiment(&corpus, &p).map_err(|e| e.to_string())?;
            for r in &exp.records {
                if let (Some(ed), Some(er)) = (r.e_delta, r.e_reduced) {
                    ensure(ed >= 0.25, || format!("eta {eta}, E {explosions}: eD {ed}"))?;
                    ensure(er >= ed, || {
                        format!("eta {eta}, E {explosions}: ed {er} < eD {ed}")
                    })?;
                }
            }
            row.push((
                eta,
                exp.summary.mean_e_delta.unwrap_or(f64::NAN),
                exp.summary.mean_e_reduced.unwrap_or(f64::NAN),
            ));
        }
        means.push((explosions, row));
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(30), || {
        format!("took {elapsed:?}")
    })?;
    let mut text = String::new();
    for (e, row) in &means {
        let trend = row.last().unwrap().1 <= row[0].1;
        text += &format!(
            "E={e}: {} (eta trend {}); ",
            row.iter()
                .map(|(eta, d, r)| format!("eta {eta}: eD {d:.3} ed {r:.3}"))
                .join(", "),
            if trend {
                "decreasing"
            } else {
                "not decreasing"
            }
        );
    }
    Ok(format!("{text}{:.1}s", elapsed.as_secs_f64()))
}

fn criterion_9() -> Outcome {
    let exponent = |measure| {
        let cfg = BenchConfig {
            measure,
            repeats: 15,
            ..BenchConfig::default()
        };
        run_bench(&cfg)
            .map(|r| r.exponent.unwrap())
            .map_err(|e| e.to_string())
    };
    let full = exponent(BenchMeasure::Delta)?;
    let reduced = exponent(BenchMeasure::ReducedDelta)?;
    ensure((1.7..=2.3).contains(&full), || {
        format!("delta exponent {full:.3}")
    })?;
    ensure((0.9..=1.5).contains(&reduced), || {
        format!("reduced-delta exponent {reduced:.3}")
    })?;
    Ok(format!(
        "delta exponent {full:.3}, reduced-delta exponent {reduced:.3}"
    ))
}

fn main() -> ExitCode {
    let criteria: [Check; 9] = [
        ("reduction equivalence", criterion_1),
        ("exact values", criterion_2),
        ("congruence invariance", criterion_3),
        ("bound suite", criterion_4),
        ("unbounded ratio", criterion_5),
        ("thales identity", criterion_6),
        ("metric axioms", criterion_7),
        ("perturbation ratios", criterion_8),
        ("growth exponents", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("acceptance {}: PASS {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("acceptance {}: FAIL {name}: {why}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
