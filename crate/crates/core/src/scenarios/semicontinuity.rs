//! Lower semicontinuity of integral functionals: the capped-product example,
//! the δ⁺-corrected liminf inequality, its two-variable form with partial
//! biconjugates, and the splice construction behind necessity.

use rand::Rng;
use rand_xoshiro::Xoshiro256StarStar;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::{Check, Profile, Report};
use crate::config::{rng, EXACT_TOL, FLOAT_TOL, MAIN_INEQUALITY_SLACK_C, ZERO_TOL};
use crate::error::{invalid, Error, Result};
use crate::extreal::ExtReal;
use crate::grid::{Grid, GridFunction};
use crate::legendre::biconjugate;
use crate::measure::{
    default_eps_ladder, delta_plus_greedy, integral_functional, upper_integral, AtomSequence, Integrand, MeasureSpace,
    SimpleFunction,
};
use crate::sequence::{Sequence, Tail};
use crate::subdiff::{lcp_check, IntegrandSequence};

const CITE_EXAMPLE: &str = "capped product: the convexified functional jumps from 0 to -1 off s = 0";
const CITE_STRONG_WEAK: &str = "capped product: I_f(s_n, y) -> 0 when s_n -> 0 strongly and y is bounded";
const CITE_MAIN: &str = "liminf I_{f_n}(x_n) >= I_{f**}(x) - delta+ of the negative parts";
const CITE_MAIN_LCP: &str = "under the lower compactness property the delta+ correction vanishes";
const CITE_FORMULA: &str = "liminf I_f(x_n, y_n) >= I_{g**}(x, y) - delta+ with g** the partial biconjugate in t";
const CITE_NECESSITY: &str = "splicing along small sets breaks sequential lower semicontinuity";

/// `max(−|s|·|t|, −1)`.
pub fn capped_product(s: f64, t: f64) -> f64 {
    (-(s.abs() * t.abs())).max(-1.0)
}

/// Partial biconjugate `t ↦ f(s, ·)**(t)` on `grid`, read at the nodes `ts`.
fn partial_biconjugate_at(f: impl Fn(f64) -> f64, grid: &Grid, ts: &[f64]) -> Result<Vec<ExtReal>> {
    let env = biconjugate(&GridFunction::from_fn_1d(grid.clone(), f))?;
    ts.iter()
        .map(|t| env.at(&[*t]).ok_or_else(|| Error::InvalidInput(format!("t = {t} is not a grid node"))))
        .collect()
}

/// Capped-product example on the dyadic emulation of `(0, 1)`:
/// `I_{f**}(0, y) = 0` while `I_{f**}(1/n, y) = −1` for `n = 1..n_values`.
pub fn scenario_example7(depth: u32, n_values: usize, seed: u64, profile: Profile) -> Result<Report> {
    if depth < 6 {
        return invalid("the capped-product scenario needs refinement depth ≥ 6");
    }
    if n_values == 0 {
        return invalid("n_values must be positive");
    }
    let space = MeasureSpace::dyadic(depth);
    let l = n_values.max(8) as i64;
    let tgrid = Grid::integer_1d(-l, l)?;
    let mut g = rng(seed, 7);
    let y: Vec<f64> = (0..space.len()).map(|_| g.random_range(-4i64..=4) as f64).collect();

    let convexified = |s: f64| -> Result<ExtReal> {
        Ok(upper_integral(&partial_biconjugate_at(|t| capped_product(s, t), &tgrid, &y)?, &space))
    };
    let at_zero = convexified(0.0)?;
    let shifted: Vec<ExtReal> = (1..=n_values).into_par_iter().map(|n| convexified(1.0 / n as f64)).collect::<Result<_>>()?;
    let worst = shifted.iter().copied().max_by(|a, b| {
        let da = (a.to_f64() + 1.0).abs();
        let db = (b.to_f64() + 1.0).abs();
        da.total_cmp(&db)
    });
    let liminf = shifted[n_values / 2..].iter().copied().min().expect("nonempty tail");

    let y_l1: f64 = y.iter().zip(&space.atoms).map(|(v, w)| v.abs() * w).sum();
    let plain: Vec<f64> = (1..=n_values)
        .map(|n| {
            let s = 1.0 / n as f64;
            y.iter().zip(&space.atoms).map(|(t, w)| w * capped_product(s, *t)).sum()
        })
        .collect();
    let excess = plain.iter().enumerate().map(|(k, v)| v.abs() - y_l1 / (k + 1) as f64).fold(f64::NEG_INFINITY, f64::max);
    let last = *plain.last().unwrap();

    let checks = vec![
        Check::eq("I_f**(0, y) = 0", CITE_EXAMPLE, at_zero.to_f64(), 0.0, EXACT_TOL),
        Check::eq(format!("I_f**(1/n, y) = -1 for n = 1..{n_values}"), CITE_EXAMPLE, worst.unwrap().to_f64(), -1.0, EXACT_TOL),
        Check::eq("semicontinuity gap I_f**(0, y) - liminf I_f**(1/n, y)", CITE_EXAMPLE, at_zero.to_f64() - liminf.to_f64(), 1.0, EXACT_TOL),
        Check::le("|I_f(1/n, y)| - |y|_1 / n", CITE_STRONG_WEAK, excess, 0.0, FLOAT_TOL),
        Check::le(format!("|I_f(1/{n_values}, y)|"), CITE_STRONG_WEAK, last.abs(), y_l1 / n_values as f64, FLOAT_TOL),
    ];
    Ok(Report::new("example7", seed, profile, checks, vec![format!("refinement depth {depth}, t-grid [-{l}, {l}]")]))
}

/// Per-atom double well `a·min((e − c₁)², (e − c₂)²) − m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Well {
    pub a: f64,
    pub c1: f64,
    pub c2: f64,
    pub m: f64,
}

impl Well {
    pub fn eval(&self, e: f64) -> f64 {
        self.a * (e - self.c1).powi(2).min((e - self.c2).powi(2)) - self.m
    }

    fn random(g: &mut Xoshiro256StarStar) -> Well {
        Well { a: g.random_range(0.5..2.0), c1: g.random_range(-1.5..0.0), c2: g.random_range(0.0..1.5), m: g.random_range(0.0..1.0) }
    }
}

/// Instance of the liminf inequality: `f_n(ω, e) = well_ω(e) + b_ω(−1)ⁿ(1 + cos e)/n − σ·c_n(ω)`
/// with `c_n` the cell averages of `n·1_{(0,1/n]}`, along `x_n = x + z/n`.
/// The pointwise epi-limit is `well_ω` (the spike leaves every fixed ω).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MainInstance {
    pub space: MeasureSpace,
    pub wells: Vec<Well>,
    pub wobble: Vec<f64>,
    pub spike: f64,
    pub x: SimpleFunction,
    pub z: SimpleFunction,
    pub horizon: usize,
}

/// Outcome of [`MainInstance::evaluate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MainOutcome {
    /// Tail-window liminf of `I_{f_n}(x_n)`.
    pub liminf: f64,
    /// `I_{f**}(x)` from grid biconjugates of the wells.
    pub convexified: f64,
    pub delta_plus: f64,
    pub lcp_certified: bool,
    /// Resolution allowance `μ(C)·well(x)⁺` on the first cell `C`: once
    /// `1/n` drops below the cell width the spike is averaged to `σ/μ(C)`
    /// and cancels against a positive well value there, which hides that
    /// much of the spike from δ⁺.
    pub cell_allowance: f64,
}

/// Grid carrying the wells: `[−4, 4]` with spacing `2⁻⁶`.
pub fn well_grid() -> Grid {
    Grid::symmetric_1d(4.0, 513).expect("valid grid")
}

impl MainInstance {
    pub fn random(g: &mut Xoshiro256StarStar, refinement: bool) -> MainInstance {
        let (space, horizon) = if refinement {
            let d = g.random_range(4..=6);
            (MeasureSpace::dyadic(d), 4usize << d)
        } else {
            let k = g.random_range(2..=8);
            let w: Vec<f64> = (0..k).map(|_| g.random_range(0.1..1.0)).collect();
            (MeasureSpace::finite(w).expect("positive weights"), 1024)
        };
        let m = space.len();
        let wells = (0..m).map(|_| Well::random(g)).collect();
        let wobble = (0..m).map(|_| g.random_range(0.0..1.0)).collect();
        let spike = if refinement && g.random_bool(0.5) { g.random_range(0.1..1.0) } else { 0.0 };
        let x = SimpleFunction::scalar((0..m).map(|_| g.random_range(-128i32..=128) as f64 / 64.0).collect());
        let z = SimpleFunction::scalar((0..m).map(|_| g.random_range(-1.0..1.0)).collect());
        MainInstance { space, wells, wobble, spike, x, z, horizon }
    }

    /// Hand-built spike: convex well `e²/2`, `x = 0`, unit spike, depth `depth`.
    pub fn spike(depth: u32) -> MainInstance {
        let space = MeasureSpace::dyadic(depth);
        let m = space.len();
        MainInstance {
            wells: vec![Well { a: 0.5, c1: 0.0, c2: 0.0, m: 0.0 }; m],
            wobble: vec![0.0; m],
            spike: 1.0,
            x: SimpleFunction::scalar(vec![0.0; m]),
            z: SimpleFunction::scalar(vec![0.0; m]),
            horizon: 4usize << depth,
            space,
        }
    }

    fn tail(&self) -> Tail {
        Tail::truncated(self.horizon, 4)
    }

    pub fn integrands(&self) -> IntegrandSequence {
        let me = self.clone();
        Sequence::new("perturbed wells", self.tail(), move |n| {
            let spike = if me.spike > 0.0 {
                SimpleFunction::dyadic_block(&me.space, me.spike * n as f64, 0.0, 1.0 / n as f64).expect("refinement").values
            } else {
                vec![vec![0.0]; me.space.len()]
            };
            let wells = me.wells.clone();
            let wobble = me.wobble.clone();
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            Integrand::new("f_n", 1, move |i, e| {
                let e = e[0];
                ExtReal::from_f64(wells[i].eval(e) + wobble[i] * sign * (1.0 + e.cos()) / n as f64 - spike[i][0])
            })
        })
    }

    pub fn points(&self) -> Sequence<SimpleFunction> {
        let (x, z) = (self.x.clone(), self.z.clone());
        Sequence::new("x_n", self.tail(), move |n| x.axpy(1.0 / n as f64, &z))
    }

    pub fn evaluate(&self) -> Result<MainOutcome> {
        let fs = self.integrands();
        let xs = self.points();
        let liminf = xs
            .tail_terms()
            .iter()
            .map(|(n, x)| integral_functional(&fs.get(*n), x, &self.space))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .min()
            .expect("nonempty tail");
        let grid = well_grid();
        let env: Vec<ExtReal> = self
            .wells
            .iter()
            .zip(&self.x.values)
            .map(|(w, x)| partial_biconjugate_at(|e| w.eval(e), &grid, &[x[0]]).map(|v| v[0]))
            .collect::<Result<_>>()?;
        let convexified = upper_integral(&env, &self.space);
        let (f2, x2) = (fs.clone(), xs.clone());
        let u: AtomSequence = Sequence::new("f_n(x_n)^-", self.tail(), move |n| {
            f2.get(n).compose(&x2.get(n)).iter().map(|v| v.neg_part().to_f64()).collect()
        });
        let delta = delta_plus_greedy(&u, &self.space, &default_eps_ladder(&self.space))?;
        let lcp = lcp_check(&fs, &xs, &self.space)?;
        // Past n = 2^d the spike sits in the first cell alone.
        let cell_allowance = if self.spike > 0.0 { self.space.atoms[0] * self.wells[0].eval(self.x.values[0][0]).max(0.0) } else { 0.0 };
        Ok(MainOutcome {
            cell_allowance,
            liminf: liminf.to_f64(),
            convexified: convexified.to_f64(),
            delta_plus: delta.value.to_f64(),
            lcp_certified: lcp.certified(),
        })
    }
}

/// Randomized liminf inequality over `instances` seeded instances, half on
/// fixed atoms and half on refinements, plus the hand-built spike.
pub fn scenario_main_inequality(seed: u64, instances: usize, profile: Profile) -> Result<Report> {
    let slack = MAIN_INEQUALITY_SLACK_C * well_grid().h(0);
    let outcomes: Vec<MainOutcome> = (0..instances)
        .into_par_iter()
        .map(|k| {
            let mut g = rng(seed, 1000 + k as u64);
            MainInstance::random(&mut g, k % 2 == 1).evaluate()
        })
        .collect::<Result<_>>()?;
    let margin = |o: &MainOutcome| o.liminf - (o.convexified - o.delta_plus) + o.cell_allowance;
    let worst = outcomes.iter().map(margin).fold(f64::INFINITY, f64::min);
    let violations = outcomes.iter().filter(|o| margin(o) < -slack).count();
    let certified: Vec<&MainOutcome> = outcomes.iter().filter(|o| o.lcp_certified).collect();
    let worst_free = certified.iter().map(|o| o.liminf - o.convexified).fold(f64::INFINITY, f64::min);
    let free_violations = certified.iter().filter(|o| o.liminf - o.convexified < -slack).count();

    let depth = 10;
    let spike = MainInstance::spike(depth).evaluate()?;
    let tol = 2f64.powi(-8);
    let mut checks = vec![
        Check::count(format!("violations over {instances} instances"), CITE_MAIN, violations),
        Check::ge("worst margin liminf - (I_f** - delta+) + cell allowance", CITE_MAIN, worst, 0.0, slack),
        Check::count(format!("violations of the delta+-free bound over {} certified instances", certified.len()), CITE_MAIN_LCP, free_violations),
        Check::ge("spike: liminf >= I_f** - delta+", CITE_MAIN, spike.liminf, spike.convexified - spike.delta_plus, slack),
        Check::eq("spike: delta+ = 1", CITE_MAIN, spike.delta_plus, 1.0, tol),
        Check::eq("spike: I_f** - liminf = 1", CITE_MAIN, spike.convexified - spike.liminf, 1.0, tol),
    ];
    if !certified.is_empty() {
        checks.push(Check::ge("worst delta+-free margin on certified instances", CITE_MAIN_LCP, worst_free, 0.0, slack));
    }
    let notes = vec![
        format!("{} of {instances} instances satisfy the lower compactness property", certified.len()),
        format!("slack C·h = {slack}; spike depth {depth}"),
    ];
    Ok(Report::new("main-inequality", seed, profile, checks, notes))
}

/// Families of the two-variable inequality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairKind {
    /// Capped product at `x = 0` with `x_n` concentrating: both sides vanish.
    Example,
    /// `max(−|s||t|, −K)` at random `x`, with bumps and strong perturbations.
    Product,
    /// `(t − s)²/2 + |s||t|`, convex in `t`: the partial biconjugate is `f`.
    Convex,
}

/// One two-variable instance on a refinement space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairInstance {
    pub kind: PairKind,
    pub depth: u32,
    pub cap: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub w: Vec<f64>,
    pub bump: f64,
}

/// Outcome of [`PairInstance::evaluate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairOutcome {
    pub liminf: f64,
    pub partial: f64,
    pub plain: f64,
    pub delta_plus: f64,
    /// `max_ω |g**(x, y) − f(x, y)|`.
    pub envelope_gap: f64,
}

const PAIR_T_RADIUS: i64 = 8;

impl PairInstance {
    pub fn random(g: &mut Xoshiro256StarStar, kind: PairKind, depth: u32) -> PairInstance {
        let m = 1usize << depth;
        let xs = [0.0, 0.5, -0.5, 1.0, -1.0, 2.0, -2.0];
        let x = match kind {
            PairKind::Example => vec![0.0; m],
            PairKind::Product => (0..m).map(|_| xs[g.random_range(0..xs.len())]).collect(),
            PairKind::Convex => (0..m).map(|_| g.random_range(-2.0..2.0)).collect(),
        };
        let y = (0..m).map(|_| g.random_range(-3i64..=3) as f64).collect();
        let z = (0..m).map(|_| g.random_range(-1.0..1.0)).collect();
        let w = (0..m).map(|_| if kind == PairKind::Example { 0.0 } else { g.random_range(-1.0..1.0) }).collect();
        let bump = if kind == PairKind::Example { 1.0 } else { g.random_range(0.0..2.0) };
        let cap = if kind == PairKind::Example { 1.0 } else { g.random_range(0.5..2.0) };
        PairInstance { kind, depth, cap, x, y, z, w, bump }
    }

    pub fn integrand_value(&self, s: f64, t: f64) -> f64 {
        match self.kind {
            PairKind::Example | PairKind::Product => (-(s.abs() * t.abs())).max(-self.cap),
            PairKind::Convex => (t - s).powi(2) / 2.0 + s.abs() * t.abs(),
        }
    }

    pub fn integrand(&self) -> Integrand {
        let me = self.clone();
        Integrand::new("f(s, t)", 2, move |_, e| ExtReal::from_f64(me.integrand_value(e[0], e[1])))
    }

    /// `(x_n, y_n)`: `x_n = x + bump·n·1_{(0,1/n]} + z/n` converges in
    /// measure; `y_n = y + w(−1)ⁿ/n` stays bounded.
    pub fn pairs(&self, space: &MeasureSpace) -> Sequence<SimpleFunction> {
        let me = self.clone();
        let sp = space.clone();
        Sequence::new("(x_n, y_n)", Tail::truncated(4 << self.depth, 4), move |n| {
            let nf = n as f64;
            let b = SimpleFunction::dyadic_block(&sp, me.bump * nf, 0.0, 1.0 / nf).expect("refinement");
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            SimpleFunction {
                values: (0..me.x.len())
                    .map(|i| vec![me.x[i] + b.values[i][0] + me.z[i] / nf, me.y[i] + sign * me.w[i] / nf])
                    .collect(),
            }
        })
    }

    pub fn evaluate(&self) -> Result<PairOutcome> {
        let space = MeasureSpace::dyadic(self.depth);
        let f = self.integrand();
        let pairs = self.pairs(&space);
        let liminf = pairs
            .tail_terms()
            .iter()
            .map(|(_, p)| integral_functional(&f, p, &space))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .min()
            .expect("nonempty tail");
        let tgrid = Grid::integer_1d(-PAIR_T_RADIUS, PAIR_T_RADIUS)?;
        let mut env = Vec::with_capacity(space.len());
        let mut gap = 0.0f64;
        for i in 0..space.len() {
            let s = self.x[i];
            let v = partial_biconjugate_at(|t| self.integrand_value(s, t), &tgrid, &[self.y[i]])?[0];
            gap = gap.max((v.to_f64() - self.integrand_value(s, self.y[i])).abs());
            env.push(v);
        }
        let limit = SimpleFunction { values: self.x.iter().zip(&self.y).map(|(a, b)| vec![*a, *b]).collect() };
        let f2 = f.clone();
        let p2 = pairs.clone();
        let u: AtomSequence = Sequence::new("f(x_n, y_n)^-", pairs.tail, move |n| {
            f2.compose(&p2.get(n)).iter().map(|v| v.neg_part().to_f64()).collect()
        });
        let delta = delta_plus_greedy(&u, &space, &default_eps_ladder(&space))?;
        Ok(PairOutcome {
            liminf: liminf.to_f64(),
            partial: upper_integral(&env, &space).to_f64(),
            plain: integral_functional(&f, &limit, &space)?.to_f64(),
            delta_plus: delta.value.to_f64(),
            envelope_gap: gap,
        })
    }
}

/// Two-variable inequality with partial biconjugates over the three
/// [`PairKind`] families, `per_kind` seeded instances each.
pub fn scenario_formula4(seed: u64, per_kind: usize, profile: Profile) -> Result<Report> {
    let depth = 6;
    let tol = MAIN_INEQUALITY_SLACK_C * 2f64.powi(-(depth as i32));
    let mut checks = Vec::new();
    for (k, kind) in [PairKind::Example, PairKind::Product, PairKind::Convex].into_iter().enumerate() {
        let outcomes: Vec<PairOutcome> = (0..per_kind)
            .into_par_iter()
            .map(|j| {
                let mut g = rng(seed, 2000 + (k * per_kind + j) as u64);
                PairInstance::random(&mut g, kind, depth).evaluate()
            })
            .collect::<Result<_>>()?;
        let worst = outcomes.iter().map(|o| o.liminf - (o.partial - o.delta_plus)).fold(f64::INFINITY, f64::min);
        let name = serde_json::to_value(kind)?.as_str().unwrap_or_default().to_string();
        checks.push(Check::ge(format!("{name}: worst margin liminf - (I_g** - delta+)"), CITE_FORMULA, worst, 0.0, tol));
        match kind {
            PairKind::Example => {
                let worst_side = outcomes.iter().map(|o| o.partial.abs()).fold(0.0, f64::max);
                checks.push(Check::eq("example: I_g**(0, y) = 0", CITE_FORMULA, worst_side, 0.0, EXACT_TOL));
                let low = outcomes.iter().map(|o| o.liminf).fold(f64::INFINITY, f64::min);
                checks.push(Check::ge("example: liminf I_f(x_n, y_n) -> 0", CITE_FORMULA, low, 0.0, tol));
            }
            PairKind::Convex => {
                let gap = outcomes.iter().map(|o| o.envelope_gap).fold(0.0, f64::max);
                let scale = outcomes.iter().map(|o| o.plain.abs()).fold(1.0, f64::max);
                checks.push(Check::le("convex: g** = f at (x, y)", CITE_FORMULA, gap, 0.0, FLOAT_TOL * scale));
            }
            PairKind::Product => {}
        }
    }
    Ok(Report::new("formula4", seed, profile, checks, vec![format!("refinement depth {depth}, {per_kind} instances per family")]))
}

/// One splice of the necessity construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpliceStep {
    pub eps: f64,
    pub n: usize,
    pub set_mass: f64,
    /// `I_f` of the spliced pair.
    pub value: f64,
    /// `I_f(x, y) − value`.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NecessityOutcome {
    /// δ⁺ of the negative parts along the sequence.
    pub delta_plus: f64,
    pub base: f64,
    pub steps: Vec<SpliceStep>,
}

/// Splices `(x_{n_k}, y_{n_k})` into `(x, y)` on `C_k = T_k ∩ {f(x_{n_k}, y_{n_k}) ≤ 0}`,
/// where `T_k` carries the small-set mass of rung `k` of the δ⁺ surrogate.
/// Refuses when the negative parts are uniformly integrable.
pub fn necessity_construction(f: &Integrand, pairs: &Sequence<SimpleFunction>, limit: &SimpleFunction, space: &MeasureSpace) -> Result<NecessityOutcome> {
    if !space.is_refinement() {
        return Err(Error::Unsupported("the splice construction needs an atomless emulation (refinement space)".into()));
    }
    limit.check_space(space)?;
    let (f2, p2) = (f.clone(), pairs.clone());
    let u: AtomSequence = Sequence::new("f(x_n, y_n)^-", pairs.tail, move |n| {
        f2.compose(&p2.get(n)).iter().map(|v| v.neg_part().to_f64()).collect()
    });
    let rep = delta_plus_greedy(&u, space, &default_eps_ladder(space))?;
    if rep.value <= ExtReal::Finite(ZERO_TOL) {
        return Err(Error::Refused(format!("negative parts are uniformly integrable (delta+ = {}); no splice exists", rep.value)));
    }
    let base = integral_functional(f, limit, space)?.to_f64();
    let steps = rep
        .trace
        .iter()
        .map(|rung| {
            let pn = pairs.get(rung.n);
            let vals = f.compose(&pn);
            let mut mask = vec![false; space.len()];
            for &i in &rung.set {
                mask[i] = vals[i] <= ExtReal::ZERO;
            }
            let chosen: Vec<usize> = (0..space.len()).filter(|i| mask[*i]).collect();
            let spliced = SimpleFunction::splice(&pn, limit, &mask);
            let value = integral_functional(f, &spliced, space)?.to_f64();
            Ok(SpliceStep { eps: rung.eps, n: rung.n, set_mass: space.mass(&chosen), value, margin: base - value })
        })
        .collect::<Result<_>>()?;
    Ok(NecessityOutcome { delta_plus: rep.value.to_f64(), base, steps })
}

/// Spike of height `σ·n` on `(0, 1/n]` in `s`, with bounded `y`.
fn spike_pairs(space: &MeasureSpace, sigma: f64, y: Vec<f64>) -> Sequence<SimpleFunction> {
    let sp = space.clone();
    Sequence::new("spike pairs", Tail::truncated(4 * space.len(), 4), move |n| {
        let b = SimpleFunction::dyadic_block(&sp, sigma * n as f64, 0.0, 1.0 / n as f64).expect("refinement");
        SimpleFunction { values: b.values.iter().zip(&y).map(|(s, t)| vec![s[0], *t]).collect() }
    })
}

/// Necessity construction on the spike (`ε = 1`), a scaled spike
/// (`ε = 0.1`), and a uniformly integrable control that must refuse.
pub fn scenario_necessity_construction(seed: u64, profile: Profile) -> Result<Report> {
    let depth = 10;
    let space = MeasureSpace::dyadic(depth);
    let mut g = rng(seed, 3);
    // |y| ≥ 1 keeps the product spike at full strength.
    let y: Vec<f64> = (0..space.len()).map(|_| if g.random_bool(0.5) { 1.0 } else { -1.0 }).collect();
    let f = Integrand::new("-|s||t|", 2, |_, e| ExtReal::from_f64(-(e[0].abs() * e[1].abs())));
    let limit = SimpleFunction { values: y.iter().map(|t| vec![0.0, *t]).collect() };
    let mut checks = Vec::new();
    let mut notes = Vec::new();
    for (label, sigma) in [("spike", 1.0), ("scaled spike", 0.1)] {
        let out = necessity_construction(&f, &spike_pairs(&space, sigma, y.clone()), &limit, &space)?;
        let last3 = &out.steps[out.steps.len().saturating_sub(3)..];
        let margin = last3.iter().map(|s| s.margin).fold(f64::INFINITY, f64::min);
        let mass = last3.last().map_or(f64::INFINITY, |s| s.set_mass);
        checks.push(Check::ge(format!("{label}: splice margin >= eps/2"), CITE_NECESSITY, margin, out.delta_plus / 2.0, EXACT_TOL));
        checks.push(Check::eq(format!("{label}: eps = {sigma}"), CITE_NECESSITY, out.delta_plus, sigma, sigma * 2f64.powi(-8)));
        checks.push(Check::le(format!("{label}: spliced sets shrink"), CITE_NECESSITY, mass, space.min_weight(), EXACT_TOL));
        notes.push(format!("{label}: base {} and final spliced value {}", out.base, last3.last().map_or(f64::NAN, |s| s.value)));
    }
    // Control: x_n = z/n converges strongly and the negatives are dominated.
    let z: Vec<f64> = (0..space.len()).map(|_| g.random_range(-1.0..1.0)).collect();
    let yc = y.clone();
    let control = Sequence::new("strong pairs", Tail::truncated(4 * space.len(), 4), move |n| SimpleFunction {
        values: z.iter().zip(&yc).map(|(s, t)| vec![s / n as f64, *t]).collect(),
    });
    let refused = matches!(necessity_construction(&f, &control, &limit, &space), Err(Error::Refused(_)));
    checks.push(Check::count("uniformly integrable control refuses", CITE_NECESSITY, usize::from(!refused)));
    Ok(Report::new("necessity", seed, profile, checks, notes))
}
