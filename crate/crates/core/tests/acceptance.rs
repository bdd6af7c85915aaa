//! Acceptance suite: twelve numbered criteria, one status line each.
//!
//! Every criterion reruns the relevant computation and compares it with an
//! oracle from `common` (or with a closed form). Tolerances are pinned below
//! and never derived from the data. The criteria run in order inside one
//! test so that the timing budgets are measured without competition from
//! parallel tests.

mod common;

use std::fmt::Write as _;
use std::io::Write as _;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::Rng;

use common::*;
use epilim::config::{rng, DEFAULT_SEED, EXT_EQ_TOL, ZERO_TOL};
use epilim::epilimit::{builtin_family, builtin_lower_bound, verify_conjugate_identity, EpiOptions, BUILTIN_FAMILIES};
use epilim::legendre::{biconjugate, conjugate, conjugate_bruteforce, conjugate_fast_1d, infconv};
use epilim::measure::{
    conjugate_interchange_check, default_eps_ladder, delta_plus_bruteforce, delta_plus_greedy, ui_test_sequence, AtomSequence,
    Integrand, MeasureSpace, SimpleFunction, UiOptions,
};
use epilim::scenarios::{
    random_integer_instance, random_real_instance, scenario_example7, scenario_main_inequality, suite_subdiff_chain,
    suite_ui_equivalence, ui_library, MainInstance, Profile, Report,
};
use epilim::sequence::{Sequence, Tail};
use epilim::{DualGrid, ExtReal, Grid, GridFunction};

const SEED: u64 = DEFAULT_SEED;

// Pinned tolerances and budgets.
const EXAMPLE_TOL: f64 = 0.0;
const EXAMPLE_BUDGET: Duration = Duration::from_secs(5);
const CONJUGACY_BUDGET: Duration = Duration::from_secs(10);
const HULL_TOL: f64 = 1e-9;
const EPI_C: f64 = 3.0;
const EPI_SHRINK: f64 = 5.0;
const SPIKE_TOL: f64 = 1.0 / 256.0;
const INTERCHANGE_TOL: f64 = 1e-9;
const SUITE_BUDGET: Duration = Duration::from_secs(300);

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Outcome {
        Outcome { pass, detail: detail.into() }
    }
}

fn report_passes(r: &Report) -> Result<(), String> {
    match r.checks.iter().find(|c| !c.pass) {
        None => Ok(()),
        Some(c) => Err(format!("check '{}' failed: lhs {} rhs {} gap {}", c.name, c.lhs, c.rhs, c.gap)),
    }
}

fn bits_equal(a: &GridFunction, b: &GridFunction) -> bool {
    a.values.len() == b.values.len() && a.values.iter().zip(&b.values).all(|(x, y)| x.to_f64().to_bits() == y.to_f64().to_bits())
}

fn max_abs_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| if x == y { 0.0 } else { (x - y).abs() })
        .fold(0.0, |m, d| if d.is_nan() { f64::INFINITY } else { m.max(d) })
}

/// Capped-product example: exact values and gap on a depth-6 refinement.
fn criterion_1() -> Outcome {
    let start = Instant::now();
    let report = scenario_example7(6, 100, SEED, Profile::Quick).expect("scenario runs");
    let elapsed = start.elapsed();
    if let Err(e) = report_passes(&report) {
        return Outcome::new(false, e);
    }
    if report.checks[..3].iter().any(|c| c.tolerance != EXAMPLE_TOL) {
        return Outcome::new(false, "exact checks carry a nonzero tolerance");
    }
    // Oracle: the lower hull in t of max(−|s||t|, −1) on [−100, 100] for
    // every integer y the scenario may draw.
    let ts: Vec<f64> = (-100..=100).map(f64::from).collect();
    let hull = |s: f64| lower_hull_at_nodes(&ts, &ts.iter().map(|t| (-(s.abs() * t.abs())).max(-1.0)).collect::<Vec<_>>());
    let at = |h: &[f64], y: i32| h[(y + 100) as usize];
    let h0 = hull(0.0);
    if (-4..=4).any(|y| at(&h0, y) != 0.0) {
        return Outcome::new(false, "oracle hull at s = 0 is not 0");
    }
    for n in 1..=100 {
        let h = hull(1.0 / n as f64);
        if (-4..=4).any(|y| at(&h, y) != -1.0) {
            return Outcome::new(false, format!("oracle hull at s = 1/{n} is not -1"));
        }
    }
    let gap = report.checks[2].lhs.to_f64();
    Outcome::new(
        gap == 1.0 && elapsed < EXAMPLE_BUDGET,
        format!("I_f**(0,y) = 0, I_f**(1/n,y) = -1 for n = 1..100, gap {gap}, oracle hull agrees, {elapsed:.2?} (< 5 s)"),
    )
}

/// Fast 1-D transform against enumeration, bit for bit.
fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut mismatches = 0;
    let mut oracle_mismatches = 0;
    let (mut with_pos_inf, mut with_neg_inf, mut largest) = (0, 0, 0);
    for k in 0..500u64 {
        let mut g = rng(SEED, 10_000 + k);
        let (f, dual) = random_integer_instance(&mut g, 2049);
        largest = largest.max(f.len());
        with_pos_inf += usize::from(f.values.contains(&ExtReal::PosInf));
        with_neg_inf += usize::from(f.values.contains(&ExtReal::NegInf));
        let fast = conjugate_fast_1d(&f, &dual).expect("fast transform");
        let brute = conjugate_bruteforce(&f, &dual).expect("brute force");
        if !bits_equal(&fast.function, &brute.function) || fast.argmax_index != brute.argmax_index {
            mismatches += 1;
        }
        let (xs, fx) = (nodes(&f), values(&f));
        let oracle: Vec<f64> = (0..dual.len()).map(|j| conjugate_enum(&xs, &fx, dual.coord(0, j))).collect();
        if values(&brute.function).iter().zip(&oracle).any(|(a, b)| a.to_bits() != b.to_bits()) {
            oracle_mismatches += 1;
        }
    }
    let elapsed = start.elapsed();
    Outcome::new(
        mismatches == 0 && oracle_mismatches == 0 && largest <= 2049 && with_pos_inf > 0 && with_neg_inf > 0 && elapsed < CONJUGACY_BUDGET,
        format!(
            "500 instances (n <= {largest}, {with_pos_inf} with +inf, {with_neg_inf} with -inf): {mismatches} fast/brute and {oracle_mismatches} brute/oracle mismatches, {elapsed:.2?} (< 10 s)"
        ),
    )
}

/// Biconjugate against the monotone-chain hull, plus the three identities.
/// "Equal" for finite extended reals means within `EXT_EQ_TOL` absolute;
/// infinities must match exactly.
fn criterion_3() -> Outcome {
    let mut worst: f64 = 0.0;
    let (mut above, mut conj_diff, mut idem_diff) = (0, 0, 0);
    let mut conj_gap: f64 = 0.0;
    for k in 0..200u64 {
        let mut g = rng(SEED, 20_000 + k);
        let f = random_real_instance(&mut g);
        let env = biconjugate(&f).expect("biconjugate");
        let oracle = lower_hull_at_nodes(&nodes(&f), &values(&f));
        worst = worst.max(max_abs_gap(&values(&env), &oracle));
        above += env.values.iter().zip(&f.values).filter(|(e, v)| e > v).count();
        let dual = epilim::legendre::auto_dual_1d(&f).expect("dual window");
        let c1 = values(&conjugate(&f, &dual).expect("f*").function);
        let c2 = values(&conjugate(&env, &dual).expect("(f**)*").function);
        conj_diff += c1.iter().zip(&c2).filter(|(a, b)| !ext(**a).approx_eq(ext(**b), EXT_EQ_TOL)).count();
        conj_gap = conj_gap.max(max_abs_gap(&c1, &c2));
        let env2 = biconjugate(&env).expect("(f**)**");
        idem_diff += env2.values.iter().zip(&env.values).filter(|(a, b)| !a.approx_eq(**b, EXT_EQ_TOL)).count();
    }
    Outcome::new(
        worst <= HULL_TOL && above == 0 && conj_diff == 0 && idem_diff == 0,
        format!(
            "200 instances: max |f** - hull| = {worst:.3e} (<= 1e-9), f** > f at {above} nodes, (f**)* != f* at {conj_diff} points (max gap {conj_gap:.3e}, tolerance 1e-12), (f**)** != f** at {idem_diff} nodes"
        ),
    )
}

/// Fenchel–Young and order reversal over 10⁵ pairs.
fn criterion_4() -> Outcome {
    let (mut pairs, mut fy, mut order) = (0usize, 0usize, 0usize);
    for k in 0..500u64 {
        let mut g = rng(SEED, 70_000 + k);
        let (f, dual) = random_integer_instance(&mut g, 2049);
        let fs = conjugate(&f, &dual).expect("f*").function;
        for _ in 0..200 {
            let i = g.random_range(0..f.len());
            let j = g.random_range(0..dual.len());
            let (x, s) = (f.grid.coord(0, i), dual.coord(0, j));
            pairs += 1;
            if upper_add(f.values[i].to_f64(), fs.values[j].to_f64()) < x * s {
                fy += 1;
            }
        }
        let bump: Vec<f64> = (0..f.len()).map(|_| g.random_range(0i64..=5) as f64).collect();
        let bigger = GridFunction::new(f.grid.clone(), f.values.iter().zip(&bump).map(|(v, b)| v.upper_add(ExtReal::Finite(*b))).collect())
            .expect("same grid");
        let gs = conjugate(&bigger, &dual).expect("g*").function;
        order += gs.values.iter().zip(&fs.values).filter(|(a, b)| a > b).count();
    }
    Outcome::new(fy == 0 && order == 0 && pairs >= 100_000, format!("{pairs} (x, s) pairs: {fy} Fenchel-Young and {order} order-reversal violations"))
}

/// Infimal convolution against enumeration and its conjugate duality.
fn criterion_5() -> Outcome {
    let (mut duality, mut unit, mut oracle) = (0, 0, 0);
    for k in 0..200u64 {
        let mut g = rng(SEED, 80_000 + k);
        let (a, b) = (g.random_range(0i64..=20), g.random_range(0i64..=20));
        let w = a + b;
        let grid = Grid::integer_1d(-w, w).expect("grid");
        let mut make = |r: i64| {
            let v = (0..grid.len())
                .map(|i| {
                    let x = grid.coord(0, i) as i64;
                    if x.abs() <= r && (x == 0 || !g.random_bool(0.1)) {
                        ExtReal::Finite(g.random_range(-30i64..=30) as f64)
                    } else {
                        ExtReal::PosInf
                    }
                })
                .collect();
            GridFunction::new(grid.clone(), v).expect("grid function")
        };
        let f = make(a);
        let h = make(b);
        let conv = infconv(&f, &h).expect("infconv");
        if values(&conv) != infconv_enum(-w, &values(&f), &values(&h)) {
            oracle += 1;
        }
        let dual = DualGrid(Grid::integer_1d(-15, 15).expect("grid"));
        let lhs = values(&conjugate(&conv, &dual).expect("conjugate").function);
        let (xs, fx, hx) = (nodes(&f), values(&f), values(&h));
        for (j, l) in lhs.iter().enumerate() {
            let s = dual.coord(0, j);
            if *l != conjugate_enum(&xs, &fx, s) + conjugate_enum(&xs, &hx, s) {
                duality += 1;
            }
        }
        let zero = GridFunction::indicator(&[vec![0.0]], grid.clone()).expect("indicator");
        unit += usize::from(infconv(&f, &zero).expect("infconv").values != f.values);
    }
    Outcome::new(
        duality == 0 && unit == 0 && oracle == 0,
        format!("200 pairs: {oracle} infconv/enumeration mismatches, {duality} points with (f□g)* != f* + g*, {unit} failures of f□ι{{0}} = f"),
    )
}

/// Conjugate of the lower epi-limit against the lim sup of conjugates.
fn criterion_6() -> Outcome {
    let dual = DualGrid::line(-1.5, 1.5, 31).expect("dual grid");
    let continuum: [(&str, fn(f64) -> f64); 4] = [
        ("constant", |x| x.abs() + x * x / 2.0),
        ("alternating-shift", |x| (x - 1.0).abs().min((x + 1.0).abs()) + x * x / 2.0),
        ("steep-quadratic", |x| if x == 0.0 { 0.0 } else { f64::INFINITY }),
        ("shifted-vee", |x| x.abs() + x * x / 2.0),
    ];
    let mut ok = true;
    let mut text = String::new();
    for name in BUILTIN_FAMILIES {
        let g = continuum.iter().find(|c| c.0 == name).expect("continuum limit").1;
        // x = 0 lies on the dense sampling grid, so the indicator is seen.
        let exact: Vec<f64> = (0..dual.len()).map(|j| conjugate_dense(g, -3.0, 3.0, 600_001, dual.coord(0, j))).collect();
        let mut stress = Vec::new();
        for h in [1e-2, 1e-3] {
            let seq = builtin_family(name, 3.0, h).expect("family");
            let grid = seq.get(1).grid.clone();
            let lb = builtin_lower_bound(&grid);
            let tol = EPI_C * h;
            let rep = verify_conjugate_identity(&seq, &lb, 0.5, &dual, &EpiOptions::default_for(&grid), tol).expect("identity");
            let rhs = values(rep.rhs.as_ref().expect("rhs"));
            let to_continuum = max_abs_gap(&rhs, &exact);
            let fixed = verify_conjugate_identity(&seq, &lb, 0.5, &dual, &EpiOptions::new(vec![2.0 * h]), tol).expect("identity");
            stress.push(fixed.deviation);
            ok &= rep.precondition_ok && rep.deviation <= tol && to_continuum <= tol;
            let _ = write!(text, "{name} h={h}: dev {:.2e}, vs continuum {:.2e}; ", rep.deviation, to_continuum);
        }
        ok &= EPI_SHRINK * stress[1] <= stress[0];
        let _ = write!(text, "radius-2h shrink {:.1}x; ", stress[0] / stress[1]);
    }
    Outcome::new(ok, format!("bound 3h, shrink >= 5: {}", text.trim_end_matches("; ")))
}

/// δ⁺ surrogate against exhaustive enumeration on a full parameter grid.
fn criterion_7() -> Outcome {
    let (mut count, mut bad_lib, mut bad_oracle) = (0, 0, 0);
    for atoms in 1..=12usize {
        for horizon in 1..=8usize {
            for depth in 1..=4usize {
                let mut g = rng(SEED, 90_000 + (atoms * 100 + horizon * 10 + depth) as u64);
                let space = if atoms.is_power_of_two() && g.random_bool(0.5) {
                    MeasureSpace::dyadic(atoms.trailing_zeros())
                } else {
                    MeasureSpace::finite((0..atoms).map(|_| g.random_range(1..=16) as f64 / 64.0).collect()).expect("space")
                };
                let window = g.random_range(1..=horizon);
                let terms: Vec<Vec<f64>> = (0..horizon)
                    .map(|_| (0..atoms).map(|_| if g.random_bool(0.3) { 0.0 } else { g.random_range(0.0..10.0) }).collect())
                    .collect();
                let first = g.random_range(1..=3);
                let ladder: Vec<f64> = (0..depth).map(|k| 2f64.powi(-(first + k as i32))).collect();
                let u: AtomSequence = Sequence::from_terms("u", terms.clone(), window);
                let greedy = delta_plus_greedy(&u, &space, &ladder).expect("greedy").value;
                let brute = delta_plus_bruteforce(&u, &space, &ladder, depth).expect("brute force");
                let oracle = small_set_enum(&terms[horizon - window..], &space.atoms, ladder[depth - 1]);
                count += 1;
                bad_lib += usize::from(greedy != ExtReal::Finite(brute));
                bad_oracle += usize::from(greedy != ExtReal::Finite(oracle));
            }
        }
    }
    let space = MeasureSpace::dyadic(10);
    let sp = space.clone();
    let spike: AtomSequence = Sequence::new("spike", Tail::truncated(4096, 8), move |n| {
        SimpleFunction::dyadic_block(&sp, n as f64, 0.0, 1.0 / n as f64).expect("refinement").values.into_iter().map(|v| v[0]).collect()
    });
    let value = delta_plus_greedy(&spike, &space, &default_eps_ladder(&space)).expect("spike").value.to_f64();
    Outcome::new(
        count >= 200 && bad_lib == 0 && bad_oracle == 0 && (value - 1.0).abs() <= SPIKE_TOL,
        format!("{count} instances (atoms 1..12 x horizon 1..8 x depth 1..4): {bad_lib} greedy/brute and {bad_oracle} greedy/oracle mismatches; spike at depth 10 = {value} (1 +- 2^-8)"),
    )
}

/// Uniform integrability against "bounded and δ⁺ = 0", and against a closed
/// form for `c·n^a·1_(0,1/n]` plus fixed noise `z`. In the continuum the
/// family is uniformly integrable iff `a < 1`. On `2^d` cells the finest
/// small set is one cell, so the desk answer for `a < 1` is whether
/// `max_n max(|c·n^(a−1)·2^d + z_0|, max_i |z_i|)·2^-d` stays below the
/// zero threshold; `a ≥ 1` is never uniformly integrable.
fn criterion_8() -> Outcome {
    let count = 60;
    let report = suite_ui_equivalence(SEED, count, Profile::Quick).expect("suite");
    let suite_ok = report_passes(&report);
    let depth = 8u32;
    let space = MeasureSpace::dyadic(depth);
    let cells = (1usize << depth) as f64;
    let horizon = 4usize << depth;
    let powers = [0.0, 0.5, 0.75, 1.0, 1.5, 2.0];
    let mut wrong = Vec::new();
    let mut resolution_limited = 0;
    for (k, (label, seq)) in ui_library(SEED, depth, count).iter().enumerate() {
        let a = powers[k % powers.len()];
        let mut g = rng(SEED, 50_000 + k as u64);
        let c = g.random_range(0.25..2.0);
        let amp = if g.random_bool(0.5) { g.random_range(0.0..4.0) } else { 0.0 };
        let z: Vec<f64> = (0..space.len()).map(|_| g.random_range(-amp..=amp)).collect();
        let rest = z[1..].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let modulus = (horizon - 7..=horizon)
            .map(|n| (c * (n as f64).powf(a - 1.0) * cells + z[0]).abs().max(rest) / cells)
            .fold(0.0, f64::max);
        let expected = a < 1.0 && modulus <= ZERO_TOL;
        resolution_limited += usize::from(a < 1.0 && !expected);
        let ui = ui_test_sequence(seq, &space, &UiOptions::for_space(&space)).expect("ui test").ui;
        if ui != expected {
            wrong.push(label.clone());
        }
    }
    Outcome::new(
        suite_ok.is_ok() && wrong.is_empty(),
        format!(
            "{count} refinement sequences: {}; {} disagreements with the closed form ({resolution_limited} with a < 1 still above 1/32 at depth {depth}){}",
            suite_ok.map_or_else(|e| e, |_| "0 disagreements between ui and (bounded and delta+ = 0)".into()),
            wrong.len(),
            wrong.first().map_or(String::new(), |w| format!(", first: {w}"))
        ),
    )
}

/// `(I_f)* = I_{f*}` on convex separable instances with uneven weights.
fn criterion_9() -> Outcome {
    let (mut worst, mut worst_oracle) = (0.0f64, 0.0f64);
    let mut above_closed_form = 0;
    for k in 0..100u64 {
        let mut g = rng(SEED, 95_000 + k);
        let m = g.random_range(2..=8usize);
        let weights: Vec<f64> = (0..m).map(|_| g.random_range(0.05..1.0)).collect();
        let space = MeasureSpace::finite(weights.clone()).expect("space");
        let params: Vec<[f64; 4]> = (0..m)
            .map(|_| [g.random_range(0.1..3.0), g.random_range(-2.0..2.0), g.random_range(0.0..1.0), g.random_range(-1.0..1.0)])
            .collect();
        let grid = Grid::symmetric_1d(4.0, 161).expect("grid");
        let p = params.clone();
        let f = Integrand::new("convex", 1, move |i, e| {
            let [a, c, b, d] = p[i];
            ExtReal::from_f64(a * (e[0] - c).powi(2) + b * e[0].abs() + d)
        })
        .with_grid(grid.clone());
        let xs: Vec<f64> = (0..m).map(|_| g.random_range(-3.0..3.0)).collect();
        let rep = conjugate_interchange_check(&f, &SimpleFunction::scalar(xs.clone()), &space).expect("interchange");
        worst = worst.max(rep.gap);
        let es: Vec<f64> = (0..grid.len()).map(|i| grid.coord(0, i)).collect();
        let mut oracle = 0.0;
        let mut closed = 0.0;
        for i in 0..m {
            let [a, c, b, d] = params[i];
            let fx: Vec<f64> = es.iter().map(|e| a * (e - c).powi(2) + b * e.abs() + d).collect();
            oracle += weights[i] * conjugate_enum(&es, &fx, xs[i]);
            closed += weights[i] * quad_abs_conjugate(a, c, b, d, xs[i]);
        }
        worst_oracle = worst_oracle.max((rep.rhs.to_f64() - oracle).abs());
        above_closed_form += usize::from(rep.rhs.to_f64() > closed + 1e-12);
    }
    Outcome::new(
        worst <= INTERCHANGE_TOL && worst_oracle <= INTERCHANGE_TOL && above_closed_form == 0,
        format!("100 instances: max |(I_f)* - I_f*| = {worst:.2e}, max |I_f* - enumeration| = {worst_oracle:.2e} (<= 1e-9), {above_closed_form} grid values above the closed form"),
    )
}

/// Liminf inequality over 1000 instances and the spike correction.
fn criterion_10() -> Outcome {
    let report = scenario_main_inequality(SEED, 1000, Profile::Quick).expect("scenario");
    let suite_ok = report_passes(&report);
    let o = MainInstance::spike(10).evaluate().expect("spike instance");
    let free = o.convexified;
    let corrected = o.convexified - o.delta_plus;
    let gap = free - corrected;
    let realized = o.convexified - o.liminf;
    let spike_ok = (gap - 1.0).abs() <= SPIKE_TOL && (realized - 1.0).abs() <= SPIKE_TOL && o.liminf >= corrected - SPIKE_TOL;
    Outcome::new(
        suite_ok.is_ok() && spike_ok,
        format!(
            "{}; spike: bound gap delta+ = {gap} and I_f** - liminf = {realized} (1 +- 2^-8)",
            suite_ok.map_or_else(|e| e, |_| "0 violations beyond C·h over 1000 instances".into())
        ),
    )
}

/// Implication chain over the integrand library, with witness replay.
fn criterion_11() -> Outcome {
    let report = suite_subdiff_chain(SEED, Profile::Quick).expect("suite");
    let counts: Vec<String> = report.checks.iter().map(|c| format!("{} = {}", c.name, c.lhs)).collect();
    Outcome::new(report_passes(&report).is_ok(), format!("10 integrands x 5 base points x 2 slopes: {}", counts.join("; ")))
}

/// `verify all --profile full` from the binary: identical bytes across two
/// runs and two thread counts, each under the time budget.
fn criterion_12() -> Outcome {
    let dir = tempfile::tempdir().expect("temp dir");
    let mut outputs = Vec::new();
    let mut times = Vec::new();
    for (run, threads) in [(0, "4"), (1, "4"), (2, "1")] {
        let path = dir.path().join(format!("run{run}.json"));
        let start = Instant::now();
        let out = Command::new(env!("CARGO_BIN_EXE_epilim"))
            .args(["verify", "all", "--profile", "full", "--json"])
            .arg(&path)
            .env("RAYON_NUM_THREADS", threads)
            .output()
            .expect("binary runs");
        times.push(start.elapsed());
        if !out.status.success() {
            return Outcome::new(false, format!("run {run} exited with {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr)));
        }
        outputs.push((std::fs::read(&path).expect("report written"), out.stdout));
    }
    let same = outputs.windows(2).all(|w| w[0] == w[1]);
    let slowest = times.iter().max().copied().unwrap_or_default();
    Outcome::new(
        same && slowest < SUITE_BUDGET,
        format!("3 runs (threads 4, 4, 1): reports {}, slowest {slowest:.2?} (< 5 min)", if same { "byte-identical" } else { "DIFFER" }),
    )
}

#[test]
fn acceptance_criteria() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("capped-product example", criterion_1),
        ("conjugacy oracle equivalence", criterion_2),
        ("biconjugate = lower convex hull", criterion_3),
        ("Fenchel-Young and order reversal", criterion_4),
        ("infimal-convolution duality", criterion_5),
        ("epi-limit conjugate identity", criterion_6),
        ("delta+ estimator correctness", criterion_7),
        ("uniform-integrability equivalence", criterion_8),
        ("conjugate interchange", criterion_9),
        ("liminf inequality", criterion_10),
        ("subdifferential implication chain", criterion_11),
        ("full-suite determinism and budget", criterion_12),
    ];
    let mut failed = Vec::new();
    let mut out = std::io::stdout();
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        let status = if o.pass { "PASS" } else { "FAIL" };
        // Written to the stdout handle directly so the lines survive output capture.
        let _ = writeln!(out, "acceptance {:>2} {status} {name}: {} [{:.2?}]", k + 1, o.detail, start.elapsed());
        let _ = out.flush();
        if !o.pass {
            failed.push(k + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
