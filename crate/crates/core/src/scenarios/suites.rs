//! Seeded property suites over the conjugacy, epi-limit, measure and
//! subdifferential modules. Each suite cross-checks two code paths or an
//! identity and reports counted violations.

use rand::Rng;
use rand_xoshiro::Xoshiro256StarStar;
use rayon::prelude::*;

use super::report::{Check, Profile, Report};
use crate::config::{rng, EPI_IDENTITY_C, EXT_EQ_TOL, FLOAT_TOL, ZERO_TOL};
use crate::epilimit::{builtin_family, builtin_lower_bound, verify_conjugate_identity, EpiOptions, BUILTIN_FAMILIES};
use crate::error::Result;
use crate::extreal::ExtReal;
use crate::grid::{Grid, GridFunction};
use crate::legendre::{auto_dual_1d, biconjugate, conjugate, conjugate_bruteforce, conjugate_fast_1d, infconv, DualGrid};
use crate::measure::{
    conjugate_interchange_check, default_eps_ladder, delta_plus_bruteforce, delta_plus_greedy, ui_test_sequence,
    AtomSequence, Integrand, MeasureSpace, SimpleFunction, UiOptions,
};
use crate::sequence::{Sequence, Tail};
use crate::subdiff::{
    frechet_certificate, global_lower_bound_checks, growth_certificate, library_instance, replay, replay_growth,
    FrechetOptions, GrowthCondition, LowerBoundVariant, BUILTIN_INTEGRANDS, LIBRARY_BASE_POINTS,
};

/// Integer-grid instance with integer values and occasional infinities.
pub fn random_integer_instance(g: &mut Xoshiro256StarStar, max_n: usize) -> (GridFunction, DualGrid) {
    let n = if g.random_bool(0.5) { g.random_range(2..=64) } else { g.random_range(2..=max_n) };
    let a = g.random_range(-40i64..=0);
    let grid = Grid::integer_1d(a, a + n as i64 - 1).expect("valid grid");
    let with_neg_inf = g.random_bool(0.03);
    let mut values: Vec<ExtReal> = (0..n)
        .map(|_| {
            if g.random_bool(0.05) {
                ExtReal::PosInf
            } else {
                ExtReal::Finite(g.random_range(-50i64..=50) as f64)
            }
        })
        .collect();
    if with_neg_inf {
        let k = g.random_range(0..n);
        values[k] = ExtReal::NegInf;
    }
    let m = g.random_range(2..=257usize);
    let b = g.random_range(-30i64..=0);
    let dual = DualGrid(Grid::integer_1d(b, b + m as i64 - 1).expect("valid grid"));
    (GridFunction::new(grid, values).expect("matching length"), dual)
}

/// Conjugacy: fast transform against brute force, Fenchel–Young and order
/// reversal.
pub fn suite_conjugacy(seed: u64, instances: usize, pairs_per_instance: usize, profile: Profile) -> Result<Report> {
    let rows: Vec<(usize, usize, usize, usize)> = (0..instances)
        .into_par_iter()
        .map(|k| -> Result<(usize, usize, usize, usize)> {
            let mut g = rng(seed, 10_000 + k as u64);
            let (f, dual) = random_integer_instance(&mut g, 2049);
            let fast = conjugate_fast_1d(&f, &dual)?;
            let brute = conjugate_bruteforce(&f, &dual)?;
            let mismatch = usize::from(fast != brute);
            let mut fy = 0;
            for _ in 0..pairs_per_instance {
                let i = g.random_range(0..f.len());
                let j = g.random_range(0..dual.len());
                let (x, s) = (f.grid.coord(0, i), dual.coord(0, j));
                if f.values[i].upper_add(brute.function.values[j]) < ExtReal::Finite(x * s) {
                    fy += 1;
                }
            }
            let bumped = GridFunction::new(
                f.grid.clone(),
                f.values.iter().map(|v| v.upper_add(ExtReal::Finite(g.random_range(0i64..=5) as f64))).collect(),
            )?;
            let gc = conjugate_fast_1d(&bumped, &dual)?;
            let order = gc.function.values.iter().zip(&fast.function.values).filter(|(a, b)| a > b).count();
            Ok((mismatch, fy, order, pairs_per_instance))
        })
        .collect::<Result<_>>()?;
    let mismatches = rows.iter().map(|r| r.0).sum();
    let fy = rows.iter().map(|r| r.1).sum();
    let order = rows.iter().map(|r| r.2).sum();
    let pairs: usize = rows.iter().map(|r| r.3).sum();
    let checks = vec![
        Check::count(format!("fast transform differs from brute force on {instances} instances"), "discrete Legendre transform", mismatches),
        Check::count(format!("Fenchel-Young violations over {pairs} pairs"), "Fenchel-Young inequality", fy),
        Check::count("order reversal violations", "f <= g implies g* <= f*", order),
    ];
    Ok(Report::new("conjugacy", seed, profile, checks, vec![]))
}

/// Real-valued 1-D instance: a random quadratic plus noise with scattered `+∞`.
pub fn random_real_instance(g: &mut Xoshiro256StarStar) -> GridFunction {
    let n = g.random_range(2..=513usize);
    let l = g.random_range(0.5..4.0);
    let grid = Grid::unanchored(1, vec![-l], vec![l], vec![n]).expect("valid grid");
    let (a, b, noise) = (g.random_range(-1.0..2.0), g.random_range(-2.0..2.0), g.random_range(0.0..1.0));
    let mut values: Vec<ExtReal> = (0..n)
        .map(|i| {
            let x = grid.coord(0, i);
            if g.random_bool(0.05) {
                ExtReal::PosInf
            } else {
                ExtReal::Finite(a * x * x + b * x + noise * g.random_range(-1.0..1.0))
            }
        })
        .collect();
    let k = g.random_range(0..n);
    values[k] = ExtReal::Finite(0.0);
    GridFunction::new(grid, values).expect("matching length")
}

/// Biconjugate invariants: `f** ≤ f`, `(f**)* = f*`, `(f**)** = f**`.
pub fn suite_biconjugate(seed: u64, instances: usize, profile: Profile) -> Result<Report> {
    let rows: Vec<(usize, usize, usize)> = (0..instances)
        .into_par_iter()
        .map(|k| -> Result<(usize, usize, usize)> {
            let mut g = rng(seed, 20_000 + k as u64);
            let f = random_real_instance(&mut g);
            let env = biconjugate(&f)?;
            let above = env.values.iter().zip(&f.values).filter(|(e, v)| e > v).count();
            let dual = auto_dual_1d(&f)?;
            let c1 = conjugate(&f, &dual)?.function;
            let c2 = conjugate(&env, &dual)?.function;
            let conj = c1.values.iter().zip(&c2.values).filter(|(a, b)| !a.approx_eq(**b, EXT_EQ_TOL)).count();
            let env2 = biconjugate(&env)?;
            let idem = env2.values.iter().zip(&env.values).filter(|(a, b)| !a.approx_eq(**b, EXT_EQ_TOL)).count();
            Ok((above, conj, idem))
        })
        .collect::<Result<_>>()?;
    let checks = vec![
        Check::count(format!("f** > f over {instances} instances"), "the biconjugate is a minorant", rows.iter().map(|r| r.0).sum()),
        Check::count("(f**)* != f* (absolute 1e-12)", "conjugates of f and f** agree", rows.iter().map(|r| r.1).sum()),
        Check::count("(f**)** != f** (absolute 1e-12)", "the biconjugate is idempotent", rows.iter().map(|r| r.2).sum()),
    ];
    Ok(Report::new("biconjugate", seed, profile, checks, vec![]))
}

/// Infimal convolution: `(f□g)* = f* + g*` on integer grids and `f□ι{0} = f`.
pub fn suite_infconv(seed: u64, instances: usize, profile: Profile) -> Result<Report> {
    let rows: Vec<(usize, usize)> = (0..instances)
        .into_par_iter()
        .map(|k| -> Result<(usize, usize)> {
            let mut g = rng(seed, 30_000 + k as u64);
            let (a, b) = (g.random_range(0i64..=20), g.random_range(0i64..=20));
            let w = a + b;
            let grid = Grid::integer_1d(-w, w)?;
            let mut support = |r: i64| {
                GridFunction::new(
                    grid.clone(),
                    (0..grid.len())
                        .map(|i| {
                            let x = grid.coord(0, i) as i64;
                            if x.abs() <= r && (x == 0 || !g.random_bool(0.1)) {
                                ExtReal::Finite(g.random_range(-30i64..=30) as f64)
                            } else {
                                ExtReal::PosInf
                            }
                        })
                        .collect(),
                )
            };
            let f = support(a)?;
            let h = support(b)?;
            let conv = infconv(&f, &h)?;
            let dual = DualGrid(Grid::integer_1d(-15, 15)?);
            let lhs = conjugate(&conv, &dual)?.function;
            let (fs, hs) = (conjugate(&f, &dual)?.function, conjugate(&h, &dual)?.function);
            let duality = (0..dual.len()).filter(|&j| lhs.values[j] != fs.values[j].strict_add(hs.values[j]).unwrap_or(ExtReal::PosInf)).count();
            let zero = GridFunction::indicator(&[vec![0.0]], grid.clone())?;
            let unit = usize::from(infconv(&f, &zero)?.values != f.values);
            Ok((duality, unit))
        })
        .collect::<Result<_>>()?;
    let checks = vec![
        Check::count(format!("(f□g)* != f* + g* over {instances} pairs"), "conjugate of an infimal convolution", rows.iter().map(|r| r.0).sum()),
        Check::count("f□ι{0} != f", "indicator of the origin is the unit", rows.iter().map(|r| r.1).sum()),
    ];
    Ok(Report::new("infconv", seed, profile, checks, vec![]))
}

/// Conjugate of the lower epi-limit against the lim sup of conjugates, for
/// the builtin families at two spacings, with the default radius ladder and
/// a fixed `{2h}` stress radius.
pub fn suite_epi_identity(seed: u64, spacings: &[f64], profile: Profile) -> Result<Report> {
    let dual = DualGrid::line(-1.5, 1.5, 31)?;
    let mut checks = Vec::new();
    let mut notes = Vec::new();
    for name in BUILTIN_FAMILIES {
        let mut stress = Vec::new();
        for &h in spacings {
            let seq = builtin_family(name, 3.0, h)?;
            let grid = seq.get(1).grid.clone();
            let lb = builtin_lower_bound(&grid);
            let tol = EPI_IDENTITY_C * h;
            let rep = verify_conjugate_identity(&seq, &lb, 0.5, &dual, &EpiOptions::default_for(&grid), tol)?;
            checks.push(Check::le(format!("{name}, h = {h}: sup |(li_e f_n)* - limsup f_n*|"), "conjugate of the lower epi-limit", rep.deviation, tol, 0.0));
            let fixed = verify_conjugate_identity(&seq, &lb, 0.5, &dual, &EpiOptions::new(vec![2.0 * h]), tol)?;
            stress.push(fixed.deviation);
            notes.push(format!("{name}, h = {h}: radius 2h deviation {}", fixed.deviation));
        }
        if let [coarse, fine] = stress[..] {
            // The deviation must shrink by a factor ≥ 5 when h does.
            checks.push(Check::le(format!("{name}: fine deviation × 5 <= coarse deviation"), "conjugate of the lower epi-limit", 5.0 * fine, coarse, FLOAT_TOL));
        }
    }
    Ok(Report::new("epi-identity", seed, profile, checks, notes))
}

fn random_delta_instance(g: &mut Xoshiro256StarStar) -> (AtomSequence, MeasureSpace, Vec<f64>) {
    let space = if g.random_bool(0.5) {
        MeasureSpace::dyadic(g.random_range(1..=3))
    } else {
        let m = g.random_range(1..=12usize);
        MeasureSpace::finite((0..m).map(|_| g.random_range(1..=16) as f64 / 64.0).collect()).expect("positive weights")
    };
    let horizon = g.random_range(1..=8usize);
    let window = g.random_range(1..=horizon);
    let m = space.len();
    let terms: Vec<Vec<f64>> =
        (0..horizon).map(|_| (0..m).map(|_| if g.random_bool(0.3) { 0.0 } else { g.random_range(0.0..10.0) }).collect()).collect();
    let depth = g.random_range(1..=4usize);
    let first = g.random_range(1..=3);
    let ladder: Vec<f64> = (0..depth).map(|k| 2f64.powi(-(first + k as i32))).collect();
    (Sequence::from_terms("u", terms, window), space, ladder)
}

/// δ⁺ surrogate against exhaustive enumeration, and the spike value.
pub fn suite_delta_plus(seed: u64, instances: usize, profile: Profile) -> Result<Report> {
    let rows: Vec<usize> = (0..instances)
        .into_par_iter()
        .map(|k| -> Result<usize> {
            let mut g = rng(seed, 40_000 + k as u64);
            let (u, space, ladder) = random_delta_instance(&mut g);
            let greedy = delta_plus_greedy(&u, &space, &ladder)?.value;
            let brute = delta_plus_bruteforce(&u, &space, &ladder, ladder.len())?;
            Ok(usize::from(greedy != ExtReal::Finite(brute)))
        })
        .collect::<Result<_>>()?;
    let space = MeasureSpace::dyadic(10);
    let sp = space.clone();
    let spike: AtomSequence = Sequence::new("spike", Tail::truncated(4096, 8), move |n| {
        SimpleFunction::dyadic_block(&sp, n as f64, 0.0, 1.0 / n as f64).expect("refinement").values.into_iter().map(|v| v[0]).collect()
    });
    let value = delta_plus_greedy(&spike, &space, &default_eps_ladder(&space))?.value.to_f64();
    let checks = vec![
        Check::count(format!("greedy differs from enumeration on {instances} instances"), "index of equi-integrability", rows.iter().sum()),
        Check::eq("spike family at depth 10", "index of equi-integrability", value, 1.0, 2f64.powi(-8)),
    ];
    Ok(Report::new("delta-plus", seed, profile, checks, vec![]))
}

/// Generated sequences on a refinement: spikes `c·n^a·1_{(0,1/n]}`, constants,
/// bounded noise and their sums.
pub fn ui_library(seed: u64, depth: u32, count: usize) -> Vec<(String, Sequence<SimpleFunction>)> {
    let space = MeasureSpace::dyadic(depth);
    let horizon = 4usize << depth;
    (0..count)
        .map(|k| {
            let mut g = rng(seed, 50_000 + k as u64);
            let powers = [0.0, 0.5, 0.75, 1.0, 1.5, 2.0];
            let a = powers[k % powers.len()];
            let c = g.random_range(0.25..2.0);
            let noise_amp = if g.random_bool(0.5) { g.random_range(0.0..4.0) } else { 0.0 };
            let noise: Vec<f64> = (0..space.len()).map(|_| g.random_range(-noise_amp..=noise_amp)).collect();
            let sp = space.clone();
            let label = format!("c = {c:.3}, a = {a}, noise {noise_amp:.3}");
            let seq = Sequence::new(label.clone(), Tail::truncated(horizon, 8), move |n| {
                let nf = n as f64;
                let spike = SimpleFunction::dyadic_block(&sp, c * nf.powf(a), 0.0, 1.0 / nf).expect("refinement");
                SimpleFunction::scalar(spike.values.iter().zip(&noise).map(|(s, z)| s[0] + z).collect())
            });
            (label, seq)
        })
        .collect()
}

/// Uniform integrability against "bounded and δ⁺ = 0" on [`ui_library`].
pub fn suite_ui_equivalence(seed: u64, count: usize, profile: Profile) -> Result<Report> {
    let depth = 8;
    let space = MeasureSpace::dyadic(depth);
    let lib = ui_library(seed, depth, count);
    let rows: Vec<(bool, bool, String)> = lib
        .par_iter()
        .map(|(label, seq)| -> Result<(bool, bool, String)> {
            let ui = ui_test_sequence(seq, &space, &UiOptions::for_space(&space))?.ui;
            let sp = space.clone();
            let norms: AtomSequence = seq.map(move |_, x| {
                let _ = &sp;
                x.norms()
            });
            let rep = delta_plus_greedy(&norms, &space, &default_eps_ladder(&space))?;
            let h = seq.tail.horizon();
            let l1 = |n: usize| seq.get(n).norms().iter().zip(&space.atoms).map(|(a, w)| a * w).sum::<f64>();
            let bounded = !rep.diverging && !crate::measure::delta::grows_with_index(l1(h.div_ceil(2)), l1(h), h);
            Ok((ui, bounded && rep.value <= ExtReal::Finite(ZERO_TOL), label.clone()))
        })
        .collect::<Result<_>>()?;
    let disagreements: Vec<&String> = rows.iter().filter(|r| r.0 != r.1).map(|r| &r.2).collect();
    let ui_count = rows.iter().filter(|r| r.0).count();
    let checks = vec![Check::count(
        format!("disagreements over {count} sequences ({ui_count} uniformly integrable)"),
        "uniform integrability iff bounded with zero index",
        disagreements.len(),
    )];
    let notes = disagreements.iter().map(|l| format!("disagreement: {l}")).collect();
    Ok(Report::new("ui-equivalence", seed, profile, checks, notes))
}

/// `(I_f)* = I_{f*}` on random convex separable instances with non-uniform weights.
pub fn suite_interchange(seed: u64, instances: usize, profile: Profile) -> Result<Report> {
    let rows: Vec<f64> = (0..instances)
        .into_par_iter()
        .map(|k| -> Result<f64> {
            let mut g = rng(seed, 60_000 + k as u64);
            let m = g.random_range(2..=8usize);
            let space = MeasureSpace::finite((0..m).map(|_| g.random_range(0.05..1.0)).collect())?;
            let params: Vec<[f64; 4]> = (0..m)
                .map(|_| [g.random_range(0.1..3.0), g.random_range(-2.0..2.0), g.random_range(0.0..1.0), g.random_range(-1.0..1.0)])
                .collect();
            let f = Integrand::new("convex", 1, move |i, e| {
                let [a, c, b, d] = params[i];
                ExtReal::from_f64(a * (e[0] - c).powi(2) + b * e[0].abs() + d)
            })
            .with_grid(Grid::symmetric_1d(4.0, 161)?);
            let xs = SimpleFunction::scalar((0..m).map(|_| g.random_range(-3.0..3.0)).collect());
            let rep = conjugate_interchange_check(&f, &xs, &space)?;
            Ok(if rep.pass { 0.0 } else { rep.gap })
        })
        .collect::<Result<_>>()?;
    let worst = rows.iter().cloned().fold(0.0, f64::max);
    let checks = vec![
        Check::count(format!("failed instances out of {instances}"), "conjugate of an integral functional", rows.iter().filter(|g| **g > 0.0).count()),
        Check::le("worst gap beyond tolerance", "conjugate of an integral functional", worst, 0.0, FLOAT_TOL),
    ];
    Ok(Report::new("interchange", seed, profile, checks, vec![]))
}

/// Implication chain over the subdifferential instance library.
pub fn suite_subdiff_chain(seed: u64, profile: Profile) -> Result<Report> {
    let cases: Vec<(&str, f64, bool)> = BUILTIN_INTEGRANDS
        .iter()
        .flat_map(|n| LIBRARY_BASE_POINTS.iter().flat_map(move |b| [(*n, *b, false), (*n, *b, true)]))
        .collect();
    let rows: Vec<(usize, usize, usize, usize)> = cases
        .par_iter()
        .map(|&(name, b, slope)| -> Result<(usize, usize, usize, usize)> {
            let inst = library_instance(name, b, slope)?;
            let fr = frechet_certificate(&inst, &FrechetOptions::new(1.0))?;
            let cond = GrowthCondition::lp(1.0);
            let gr = growth_certificate(&inst, &cond)?;
            let mr = global_lower_bound_checks(&inst, LowerBoundVariant::MoreauRockafellar)?;
            let wh = global_lower_bound_checks(&inst, LowerBoundVariant::WeakHadamard)?;
            let g_bad = usize::from(gr.certified() && !fr.certified());
            let m_bad = usize::from(mr.certified() && !fr.certified());
            let mut refuted = 0;
            let mut failed = 0;
            for (c, growth) in [(&fr, false), (&gr, true), (&mr, false), (&wh, false)] {
                if c.refuted() {
                    refuted += 1;
                    let w = c.witness.as_ref().expect("refutations carry witnesses");
                    let ok = if growth { replay_growth(&inst, &cond, w) } else { replay(&inst, w) };
                    failed += usize::from(!ok);
                }
            }
            Ok((g_bad, m_bad, refuted, failed))
        })
        .collect::<Result<_>>()?;
    let refuted: usize = rows.iter().map(|r| r.2).sum();
    let checks = vec![
        Check::count(format!("growth certified but Fréchet not, over {} instances", cases.len()), "growth condition implies the Fréchet criterion", rows.iter().map(|r| r.0).sum()),
        Check::count("Moreau-Rockafellar certified but Fréchet (p = 1) not", "Moreau-Rockafellar subderivative implies Fréchet for p = 1", rows.iter().map(|r| r.1).sum()),
        Check::count(format!("witnesses failing replay out of {refuted} refutations"), "refutations are reproducible", rows.iter().map(|r| r.3).sum()),
    ];
    Ok(Report::new("subdiff-chain", seed, profile, checks, vec![]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suites_pass() {
        let p = Profile::Quick;
        for r in [
            suite_conjugacy(1, 30, 50, p).unwrap(),
            suite_biconjugate(1, 20, p).unwrap(),
            suite_infconv(1, 20, p).unwrap(),
            suite_delta_plus(1, 30, p).unwrap(),
            suite_ui_equivalence(1, 12, p).unwrap(),
            suite_interchange(1, 10, p).unwrap(),
        ] {
            assert!(r.pass, "{}: {:#?} {:?}", r.scenario, r.checks, r.notes);
        }
    }

    #[test]
    fn epi_identity_coarse() {
        let r = suite_epi_identity(1, &[0.02, 0.002], Profile::Quick).unwrap();
        assert!(r.pass, "{:#?}", r.checks);
    }
}
