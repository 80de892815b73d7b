mod common;

use congruence_core::congruence::{
    congruence_distance_boolean, congruence_distance_upper, optimal_translation, SolverConfig,
};
use congruence_core::gen::{gen, GenParams, RatioRecord};
use congruence_core::io::{parse_series_csv, write_series};
use congruence_core::reduction::{
    build_reduction, embed_clause, parse_dimacs, Clause, CnfFormula, Literal, CLAUSE_MINIMUM,
};
use congruence_core::series::{
    apply_transform, random_orthogonal, series_distance, series_distance_equal, RigidTransform,
};
use congruence_core::structure::{structure_distance_with, LagSet, MatrixNormOverLags};
use congruence_core::{Execution, TimeSeries};
use nalgebra::DVector;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::*;

fn series(max_len: usize, max_dim: usize) -> impl Strategy<Value = TimeSeries> {
    (1..=max_len, 1..=max_dim).prop_flat_map(|(n, k)| {
        prop::collection::vec(-10.0f64..10.0, n * k)
            .prop_map(move |data| TimeSeries::from_flat(k, data).unwrap())
    })
}

fn same_shape(n: usize, k: usize, count: usize) -> impl Strategy<Value = Vec<TimeSeries>> {
    prop::collection::vec(
        prop::collection::vec(-10.0f64..10.0, n * k)
            .prop_map(move |d| TimeSeries::from_flat(k, d).unwrap()),
        count,
    )
}

fn shaped(count: usize) -> impl Strategy<Value = Vec<TimeSeries>> {
    (1usize..24, 1usize..5).prop_flat_map(move |(n, k)| same_shape(n, k, count))
}

fn norm() -> impl Strategy<Value = MatrixNormOverLags> {
    prop_oneof![
        Just(MatrixNormOverLags::MaxColumn),
        Just(MatrixNormOverLags::P(1.0)),
        Just(MatrixNormOverLags::P(2.0)),
        (1.0f64..6.0).prop_map(MatrixNormOverLags::P),
    ]
}

fn lag_set() -> impl Strategy<Value = LagSet> {
    prop_oneof![Just(LagSet::Full), Just(LagSet::Pow2)]
}

fn delta(s: &TimeSeries, t: &TimeSeries, norm: MatrixNormOverLags, lags: LagSet) -> f64 {
    structure_distance_with(s, t, norm, lags, Execution::Sequential)
        .unwrap()
        .value
}

fn clause() -> impl Strategy<Value = (usize, Clause)> {
    (3usize..7).prop_flat_map(|k| {
        (
            Just(k),
            prop::sample::subsequence((0..k).collect::<Vec<_>>(), 3),
            prop::array::uniform3(any::<bool>()),
        )
            .prop_map(|(k, vars, signs)| {
                let lits = [0, 1, 2].map(|i| Literal {
                    var: vars[i],
                    positive: signs[i],
                });
                (k, Clause::new(lits).unwrap())
            })
    })
}

fn formula() -> impl Strategy<Value = CnfFormula> {
    (3usize..8).prop_flat_map(|k| {
        let cl = (
            prop::sample::subsequence((0..k).collect::<Vec<_>>(), 3),
            prop::array::uniform3(any::<bool>()),
        )
            .prop_map(|(vars, signs)| {
                Clause::new([0, 1, 2].map(|i| Literal {
                    var: vars[i],
                    positive: signs[i],
                }))
                .unwrap()
            });
        prop::collection::vec(cl, 1..5).prop_map(move |cs| CnfFormula::new(k, cs).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn series_distance_is_a_metric(v in shaped(3), p in prop_oneof![Just(1.0), Just(2.0), Just(f64::INFINITY), 1.0f64..5.0]) {
        let (a, b, c) = (&v[0], &v[1], &v[2]);
        let d = |x, y| series_distance_equal(x, y, p).unwrap();
        prop_assert_eq!(d(a, a), 0.0);
        prop_assert!((d(a, b) - d(b, a)).abs() <= 1e-9 * (1.0 + d(a, b)));
        prop_assert!(d(a, c) <= d(a, b) + d(b, c) + 1e-9 * (1.0 + d(a, c)));
    }

    #[test]
    fn delta_distance_is_a_pseudometric(v in shaped(3), norm in norm(), lags in lag_set()) {
        let (a, b, c) = (&v[0], &v[1], &v[2]);
        let d = |x, y| delta(x, y, norm, lags);
        prop_assert_eq!(d(a, a), 0.0);
        prop_assert!((d(a, b) - d(b, a)).abs() <= 1e-9 * (1.0 + d(a, b)));
        prop_assert!(d(a, c) <= d(a, b) + d(b, c) + 1e-9 * (1.0 + d(a, c)));
    }

    #[test]
    fn delta_vanishes_on_congruent_pairs(s in series(40, 8), seed in any::<u64>(), norm in norm(), lags in lag_set()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = apply_transform(&random_rigid(&mut rng, s.dim(), 20.0), &s).unwrap();
        prop_assert!(delta(&s, &t, norm, lags) <= 1e-9 * (1.0 + s.max_state_norm()));
    }

    #[test]
    fn lower_bounds_hold(s in series(30, 5), t in series(30, 5)) {
        prop_assume!(s.dim() == t.dim());
        let d1 = series_distance(&s, &t, 1.0).unwrap().value;
        let n = s.len().min(t.len()) as f64;
        let slack = |x: f64| x + 1e-9 * (1.0 + x);
        let dm = delta(&s, &t, MatrixNormOverLags::MaxColumn, LagSet::Full);
        let rm = delta(&s, &t, MatrixNormOverLags::MaxColumn, LagSet::Pow2);
        let f1 = delta(&s, &t, MatrixNormOverLags::P(1.0), LagSet::Full);
        let r1 = delta(&s, &t, MatrixNormOverLags::P(1.0), LagSet::Pow2);
        prop_assert!(dm <= slack(2.0 * d1));
        prop_assert!(f1 <= slack((n - 1.0) * d1));
        if n >= 3.0 {
            prop_assert!(r1 <= slack((2.0 * (n - 1.0).log2()).floor() * d1));
        }
        prop_assert!(rm <= dm);
        prop_assert!(r1 <= f1);
    }

    #[test]
    fn delta_bounds_the_iterative_upper_bound(v in same_shape(6, 2, 2), seed in 0u64..100) {
        let cfg = SolverConfig { restarts: 3, seed, ..SolverConfig::default() };
        let up = congruence_distance_upper(&v[0], &v[1], 1.0, &cfg).unwrap().value;
        let dm = delta(&v[0], &v[1], MatrixNormOverLags::MaxColumn, LagSet::Full);
        prop_assert!(dm <= 2.0 * up + 1e-9 * (1.0 + up));
    }

    #[test]
    fn mirroring_makes_zero_translation_optimal(v in shaped(2), seed in any::<u64>(), shift in prop::collection::vec(-3.0f64..3.0, 4)) {
        let (s, t) = (v[0].mirrored(), v[1].mirrored());
        let k = s.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_orthogonal(k, &mut rng, seed % 2 == 1);
        let base = RigidTransform::linear(m.clone()).unwrap();
        let moved = RigidTransform::new(m, DVector::from_column_slice(&shift[..k])).unwrap();
        let d0 = series_distance_equal(&s, &apply_transform(&base, &t).unwrap(), 1.0).unwrap();
        let dv = series_distance_equal(&s, &apply_transform(&moved, &t).unwrap(), 1.0).unwrap();
        prop_assert!(d0 <= dv + 1e-9 * (1.0 + d0));
    }

    #[test]
    fn translation_step_never_loses_to_zero(v in shaped(2), p in prop_oneof![Just(1.0), Just(2.0), 1.0f64..4.0]) {
        let (s, t) = (&v[0], &v[1]);
        let k = s.dim();
        let res: Vec<f64> = s.as_flat().iter().zip(t.as_flat()).map(|(a, b)| a - b).collect();
        let obj = |x: &[f64]| -> f64 {
            res.chunks(k)
                .map(|r| r.iter().zip(x).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt().powf(p))
                .sum()
        };
        let v = optimal_translation(&res, k, p, None, 1e-10, 500, 1e-12);
        prop_assert!(obj(&v) <= obj(&vec![0.0; k]) * (1.0 + 1e-9) + 1e-12);
    }

    #[test]
    fn csv_round_trip_is_bitwise(data in prop::collection::vec(any::<f64>().prop_filter("finite", |x| x.is_finite()), 1..40), k in 1usize..5) {
        let n = data.len() / k;
        prop_assume!(n >= 1);
        let t = TimeSeries::from_flat(k, data[..n * k].to_vec()).unwrap();
        let mut buf = Vec::new();
        write_series(&t, &mut buf).unwrap();
        let back = parse_series_csv(buf.as_slice()).unwrap();
        prop_assert_eq!(
            back.as_flat().iter().map(|x| x.to_bits()).collect::<Vec<_>>(),
            t.as_flat().iter().map(|x| x.to_bits()).collect::<Vec<_>>()
        );
    }

    #[test]
    fn dimacs_round_trip(f in formula()) {
        prop_assert_eq!(parse_dimacs(&f.to_dimacs()).unwrap(), f);
    }

    #[test]
    fn gen_pairs_respect_the_ratio_floor(s in series(24, 4), eta in 1.05f64..12.0, e in 1usize..6, seed in any::<u64>()) {
        let p = GenParams::new(eta, e, seed).unwrap();
        let t = gen(&s, &p).unwrap();
        prop_assert_eq!(&t, &gen(&s, &p).unwrap());
        let r = RatioRecord::new(0, &s, &t);
        prop_assert!(r.delta_m <= 2.0 * r.d1 * (1.0 + 1e-12) + 1e-12);
        prop_assert!(r.reduced_delta_m <= r.delta_m);
        if let (Some(ed), Some(er)) = (r.e_delta, r.e_reduced) {
            prop_assert!(ed >= 0.25 * (1.0 - 1e-12));
            prop_assert!(er >= ed);
        }
    }

    #[test]
    fn prime_gadget_cost_decomposes((k, c) in clause(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_orthogonal(k, &mut rng, seed % 2 == 0);
        let g = embed_clause(&c, k).unwrap();
        let mt = apply_transform(&RigidTransform::linear(m.clone()).unwrap(), &g.t_prime).unwrap();
        let d = series_distance_equal(&g.s_prime, &mt, 1.0).unwrap();
        let mut expect = 0.0;
        for l in c.literals() {
            let col = m.column(l.var);
            let unit = |r: usize| if r == l.var { 1.0 } else { 0.0 };
            let a: f64 = (0..k).map(|r| (col[r] - unit(r)).powi(2)).sum::<f64>().sqrt();
            let b: f64 = (0..k).map(|r| (col[r] + unit(r)).powi(2)).sum::<f64>().sqrt();
            expect += 6.0 * (a + b);
        }
        prop_assert!((d - expect).abs() <= 1e-9 * (1.0 + d));
        prop_assert!(d >= 36.0 - 1e-9);
    }

    #[test]
    fn clause_gadget_floor_under_any_orthogonal_matrix((k, c) in clause(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_orthogonal(k, &mut rng, seed % 2 == 0);
        let g = embed_clause(&c, k).unwrap();
        let mt = apply_transform(&RigidTransform::linear(m).unwrap(), &g.t()).unwrap();
        prop_assert!(series_distance_equal(&g.s(), &mt, 1.0).unwrap() >= CLAUSE_MINIMUM - 1e-9);
    }

    #[test]
    fn boolean_minimum_floor(f in formula()) {
        let inst = build_reduction(&f);
        let r = congruence_distance_boolean(&inst.s_plain, &inst.t_plain, false).unwrap();
        prop_assert!(r.value >= inst.half_target - 1e-6);
        let mirrored = congruence_distance_boolean(&inst.s_series, &inst.t_series, false).unwrap();
        prop_assert!((mirrored.value - 2.0 * r.value).abs() <= 1e-9);
    }
}

/// Sign patterns on the clause's axes: the implicit-conjunction part costs
/// exactly `4√2` at 1-in-3 models and at least 6 (no literal true) elsewhere.
#[test]
fn conjunction_gadget_cost_by_sign_pattern() {
    let four_root_two = 4.0 * std::f64::consts::SQRT_2;
    for signs in 0..8u8 {
        let c = Clause::new([0, 1, 2].map(|i| Literal {
            var: i,
            positive: signs >> i & 1 == 0,
        }))
        .unwrap();
        let g = embed_clause(&c, 3).unwrap();
        for flips in 0..8u64 {
            let m = congruence_core::congruence::sign_matrix(flips, 3);
            let mt = apply_transform(&RigidTransform::linear(m).unwrap(), &g.t_clause).unwrap();
            let d = series_distance_equal(&g.s_clause, &mt, 1.0).unwrap();
            let assignment = !flips & 0b111;
            if c.satisfied(assignment) == 1 {
                assert!(
                    (d - four_root_two).abs() <= 1e-12,
                    "{c:?} flips {flips}: {d}"
                );
            } else {
                assert!(d >= 6.0 - 1e-12, "{c:?} flips {flips}: {d}");
            }
        }
    }
}

#[test]
fn exhaustive_modes_are_exact_on_axis_aligned_congruences() {
    let s = ts(&[&[1.0, 2.0, 0.5], &[-3.0, 0.0, 1.0], &[0.0, 1.0, -1.0]]);
    for flips in 0..8 {
        let m = congruence_core::congruence::sign_matrix(flips, 3);
        let t = apply_transform(&RigidTransform::linear(m).unwrap(), &s).unwrap();
        let r = congruence_distance_boolean(&s, &t, false).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(
            r.transform
                .matrix()
                .diagonal()
                .iter()
                .filter(|&&x| x < 0.0)
                .count(),
            (flips as u32).count_ones() as usize
        );
    }
}
