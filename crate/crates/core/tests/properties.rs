//! Property tests of the transforms and measure tools against the oracles
//! in `common`.

mod common;

use proptest::prelude::*;

use common::*;
use epilim::legendre::{biconjugate, conjugate, conjugate_bruteforce, conjugate_fast_1d, infconv};
use epilim::measure::{max_small_set, upper_integral, Integrand, MeasureSpace, SimpleFunction};
use epilim::subdiff::diff_quotient;
use epilim::{DualGrid, ExtReal, Grid, GridFunction};

fn ext_value() -> impl Strategy<Value = ExtReal> {
    prop_oneof![
        12 => (-60i32..=60).prop_map(|v| ExtReal::Finite(v as f64)),
        2 => Just(ExtReal::PosInf),
        1 => Just(ExtReal::NegInf),
    ]
}

/// Integer grid starting at `a` with integer or infinite values.
fn integer_function(max_n: usize) -> impl Strategy<Value = GridFunction> {
    (-20i64..=5, prop::collection::vec(ext_value(), 2..=max_n)).prop_map(|(a, v)| {
        let grid = Grid::integer_1d(a, a + v.len() as i64 - 1).unwrap();
        GridFunction::new(grid, v).unwrap()
    })
}

fn real_function() -> impl Strategy<Value = GridFunction> {
    (0.5f64..3.0, prop::collection::vec(prop_oneof![9 => (-10.0f64..10.0).prop_map(Some), 1 => Just(None)], 2..=80)).prop_map(|(l, v)| {
        let grid = Grid::unanchored(1, vec![-l], vec![l], vec![v.len()]).unwrap();
        GridFunction::new(grid, v.into_iter().map(|x| x.map_or(ExtReal::PosInf, ExtReal::Finite)).collect()).unwrap()
    })
}

fn dual_line() -> impl Strategy<Value = DualGrid> {
    (-30i64..=0, 2usize..=60).prop_map(|(b, m)| DualGrid(Grid::integer_1d(b, b + m as i64 - 1).unwrap()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn fast_conjugate_matches_enumeration(f in integer_function(200), dual in dual_line()) {
        let fast = conjugate_fast_1d(&f, &dual).unwrap();
        let brute = conjugate_bruteforce(&f, &dual).unwrap();
        prop_assert_eq!(&fast, &brute);
        let (xs, fx) = (nodes(&f), values(&f));
        for j in 0..dual.len() {
            let want = conjugate_enum(&xs, &fx, dual.coord(0, j));
            prop_assert_eq!(fast.function.values[j].to_f64().to_bits(), want.to_bits());
        }
    }

    #[test]
    fn fenchel_young(f in integer_function(60), dual in dual_line()) {
        let fs = conjugate(&f, &dual).unwrap().function;
        for i in 0..f.len() {
            for j in 0..dual.len() {
                let (x, s) = (f.grid.coord(0, i), dual.coord(0, j));
                prop_assert!(upper_add(f.values[i].to_f64(), fs.values[j].to_f64()) >= x * s);
            }
        }
    }

    #[test]
    fn conjugation_reverses_order(f in integer_function(60), bump in prop::collection::vec(0u8..5, 60), dual in dual_line()) {
        let g = GridFunction::new(
            f.grid.clone(),
            f.values.iter().zip(&bump).map(|(v, b)| v.upper_add(ExtReal::Finite(*b as f64))).collect(),
        ).unwrap();
        let (fs, gs) = (conjugate(&f, &dual).unwrap().function, conjugate(&g, &dual).unwrap().function);
        for (a, b) in gs.values.iter().zip(&fs.values) {
            prop_assert!(a <= b);
        }
    }

    #[test]
    fn biconjugate_is_the_lower_hull(f in real_function()) {
        let env = biconjugate(&f).unwrap();
        let hull = lower_hull_at_nodes(&nodes(&f), &values(&f));
        for (k, (a, b)) in values(&env).iter().zip(&hull).enumerate() {
            prop_assert!(a == b || (a - b).abs() <= 1e-9, "node {}: {} vs {}", k, a, b);
            prop_assert!(env.values[k] <= f.values[k]);
        }
    }

    #[test]
    fn infconv_matches_enumeration(
        a in 0i64..8,
        fv in prop::collection::vec(prop_oneof![4 => (-20i32..20).prop_map(|v| v as f64), 1 => Just(f64::INFINITY)], 17),
        gv in prop::collection::vec(prop_oneof![4 => (-20i32..20).prop_map(|v| v as f64), 1 => Just(f64::INFINITY)], 17),
    ) {
        let grid = Grid::integer_1d(-8, 8).unwrap();
        let support = |v: &[f64]| {
            GridFunction::new(grid.clone(), v.iter().enumerate().map(|(i, x)| {
                let t = i as i64 - 8;
                if t == 0 { ExtReal::ZERO } else if t.abs() <= a { ExtReal::from_f64(*x) } else { ExtReal::PosInf }
            }).collect()).unwrap()
        };
        let (f, g) = (support(&fv), support(&gv));
        let conv = infconv(&f, &g).unwrap();
        prop_assert_eq!(values(&conv), infconv_enum(-8, &values(&f), &values(&g)));
    }

    #[test]
    fn small_sets_match_enumeration(u in prop::collection::vec(prop_oneof![1 => Just(0.0), 3 => 0.0f64..10.0], 1..=10), w in prop::collection::vec(1u32..=16, 10), eps_k in 1u32..=64) {
        let weights: Vec<f64> = w[..u.len()].iter().map(|k| *k as f64 / 64.0).collect();
        let space = MeasureSpace::finite(weights.clone()).unwrap();
        let eps = eps_k as f64 / 64.0;
        let got = max_small_set(&u, &space, eps);
        prop_assert!(got.exact);
        prop_assert_eq!(got.value, small_set_enum(std::slice::from_ref(&u), &weights, eps));
        prop_assert!(space.mass(&got.set) <= eps);
    }

    #[test]
    fn upper_integral_follows_the_sum_convention(v in prop::collection::vec(ext_value(), 1..12), w in prop::collection::vec(1u32..=8, 12)) {
        let space = MeasureSpace::finite(w[..v.len()].iter().map(|k| *k as f64 / 8.0).collect()).unwrap();
        let total = upper_integral(&v, &space);
        if v.contains(&ExtReal::PosInf) {
            prop_assert_eq!(total, ExtReal::PosInf);
        } else if v.contains(&ExtReal::NegInf) {
            prop_assert_eq!(total, ExtReal::NegInf);
        } else {
            let sum: f64 = v.iter().zip(&space.atoms).map(|(x, m)| x.to_f64() * m).sum();
            prop_assert!((total.to_f64() - sum).abs() <= 1e-12);
        }
    }

    #[test]
    fn quotients_scale_linearly(x0 in -2.0f64..2.0, e in -3.0f64..3.0, k in 1i32..20) {
        let r = 2f64.powi(-k);
        let f = Integrand::scalar("cubic", |t| t * t * t - t);
        let g = Integrand::scalar("double cubic", |t| 2.0 * (t * t * t - t));
        let (a, b) = (SimpleFunction::scalar(vec![x0]), SimpleFunction::scalar(vec![e]));
        let q1 = diff_quotient(&f, &a, &b, r).unwrap()[0].to_f64();
        let q2 = diff_quotient(&g, &a, &b, r).unwrap()[0].to_f64();
        prop_assert_eq!(q2, 2.0 * q1);
    }
}
