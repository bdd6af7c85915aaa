//! Lower and upper epi-limits of grid-function sequences.
//!
//! For a radius `δ` the ball infimum is taken over the open max-norm ball
//! `‖x' − x‖∞ < δ`, so the smallest admissible radius `h` sees only `x`
//! itself. The epi-limits are
//!
//! ```text
//! li_e f_n(x) = max_δ  liminf_n  min_{x' ∈ B(x,δ)} f_n(x')
//! ls_e f_n(x) = max_δ  limsup_n  min_{x' ∈ B(x,δ)} f_n(x')
//! ```
//!
//! with lim inf / lim sup read exactly off constant and periodic tails.
//! Truncated tails yield a bracket `[min, max]` over the horizon window.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::DIVERGENCE_CEILING;
use crate::error::{invalid, Result};
use crate::extreal::ExtReal;
use crate::grid::{Grid, GridFunction};
use crate::legendre::{conjugate, DualGrid};
use crate::sequence::{Sequence, Tail};

/// `n ↦ f_n`, all on one grid.
pub type FunctionSequence = Sequence<GridFunction>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EpiMode {
    Lower,
    Upper,
    Seq,
}

/// Result of an epi-limit computation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpiLimitReport {
    /// Point values for exact tails; the bracket's lower end otherwise, with
    /// `+∞` at diverging points.
    pub function: GridFunction,
    /// Per-point `[lower, upper]`, present for truncated tails.
    pub bracket: Option<Vec<(ExtReal, ExtReal)>>,
    pub exact: bool,
    /// Points whose bracket lower end exceeds the divergence ceiling.
    pub diverging: Vec<bool>,
    pub label: String,
}

/// Radii ladder and divergence ceiling.
#[derive(Debug, Clone, PartialEq)]
pub struct EpiOptions {
    pub radii: Vec<f64>,
    pub ceiling: f64,
}

impl EpiOptions {
    pub fn new(radii: Vec<f64>) -> Self {
        EpiOptions { radii, ceiling: DIVERGENCE_CEILING }
    }

    /// `{8h, 4h, 2h, h}`.
    pub fn default_for(grid: &Grid) -> Self {
        let h = (0..grid.dim).map(|k| grid.h(k)).fold(0.0, f64::max);
        EpiOptions::new(vec![8.0 * h, 4.0 * h, 2.0 * h, h])
    }
}

/// Per-axis number of neighbours strictly inside an open ball of radius `delta`.
fn ball_reach(grid: &Grid, delta: f64) -> Result<[usize; 2]> {
    let mut reach = [0usize; 2];
    for k in 0..grid.dim {
        let h = grid.h(k);
        let q = delta / h;
        let r = q.round();
        if (q - r).abs() > 1e-9 * q.max(1.0) {
            return invalid(format!("radius {delta} is not a multiple of the spacing {h}"));
        }
        if r < 1.0 {
            return invalid(format!("radius {delta} is below the spacing {h}"));
        }
        reach[k] = r as usize - 1;
    }
    Ok(reach)
}

/// Ball infimum of `f` with the given per-axis reach.
pub fn ball_min(f: &GridFunction, reach: [usize; 2]) -> Vec<ExtReal> {
    let g = &f.grid;
    // Separable: a max-norm ball is a box, so minimize along each axis in turn.
    let mut cur = f.values.clone();
    for k in 0..g.dim {
        if reach[k] == 0 {
            continue;
        }
        let prev = cur.clone();
        for (i, out) in cur.iter_mut().enumerate() {
            let ij = g.unflatten(i);
            let lo = ij[k].saturating_sub(reach[k]);
            let hi = (ij[k] + reach[k]).min(g.n[k] - 1);
            let mut m = ExtReal::PosInf;
            for t in lo..=hi {
                let mut nb = ij;
                nb[k] = t;
                m = m.min(prev[g.flatten(nb)]);
            }
            *out = m;
        }
    }
    cur
}

fn check_radii(grid: &Grid, radii: &[f64]) -> Result<Vec<[usize; 2]>> {
    if radii.is_empty() {
        return invalid("empty radii list");
    }
    if radii.windows(2).any(|w| w[1] > w[0]) {
        return invalid("radii must be listed in descending order");
    }
    radii.iter().map(|&d| ball_reach(grid, d)).collect()
}

fn epilimit(seq: &FunctionSequence, opts: &EpiOptions, mode: EpiMode) -> Result<EpiLimitReport> {
    seq.tail.validate()?;
    let terms = seq.tail_terms();
    let grid = terms[0].1.grid.clone();
    if terms.iter().any(|(_, f)| !f.grid.compatible(&grid)) {
        return invalid("all terms of the sequence must share one grid");
    }
    let reaches = check_radii(&grid, &opts.radii)?;
    let len = grid.len();
    let upper = mode == EpiMode::Upper;

    // Per radius: the tail-wise min and max of ball infima at each point.
    let per_radius: Vec<(Vec<ExtReal>, Vec<ExtReal>)> = reaches
        .par_iter()
        .map(|&reach| {
            let mut lo = vec![ExtReal::PosInf; len];
            let mut hi = vec![ExtReal::NegInf; len];
            for (_, f) in &terms {
                let m = ball_min(f, reach);
                for i in 0..len {
                    lo[i] = lo[i].min(m[i]);
                    hi[i] = hi[i].max(m[i]);
                }
            }
            (lo, hi)
        })
        .collect();

    let exact = seq.tail.exact();
    // Sup over radii of the chosen lim; for truncated tails the bracket ends
    // are the sup over radii of the window min and window max.
    let mut low = vec![ExtReal::NegInf; len];
    let mut high = vec![ExtReal::NegInf; len];
    for (lo, hi) in &per_radius {
        for i in 0..len {
            if exact {
                let v = if upper { hi[i] } else { lo[i] };
                low[i] = low[i].max(v);
                high[i] = high[i].max(v);
            } else {
                low[i] = low[i].max(lo[i]);
                high[i] = high[i].max(hi[i]);
            }
        }
    }
    let diverging: Vec<bool> = low.iter().map(|v| *v > ExtReal::Finite(opts.ceiling)).collect();
    let values: Vec<ExtReal> = if exact {
        low.clone()
    } else {
        low.iter().zip(&diverging).map(|(v, d)| if *d { ExtReal::PosInf } else { *v }).collect()
    };
    let label = match mode {
        EpiMode::Lower => "lower epi-limit",
        EpiMode::Upper => "upper epi-limit",
        EpiMode::Seq => "sequential lower epi-limit",
    };
    Ok(EpiLimitReport {
        function: GridFunction { grid, values },
        bracket: if exact { None } else { Some(low.into_iter().zip(high).collect()) },
        exact,
        diverging,
        label: format!("{label} of '{}'", seq.label),
    })
}

pub fn lower_epilimit(seq: &FunctionSequence, opts: &EpiOptions) -> Result<EpiLimitReport> {
    epilimit(seq, opts, EpiMode::Lower)
}

pub fn upper_epilimit(seq: &FunctionSequence, opts: &EpiOptions) -> Result<EpiLimitReport> {
    epilimit(seq, opts, EpiMode::Upper)
}

/// Sequential lower epi-limit. On a metric space it coincides with the
/// lower epi-limit; only the report label differs.
pub fn seq_lower_epilimit(seq: &FunctionSequence, opts: &EpiOptions) -> Result<EpiLimitReport> {
    epilimit(seq, opts, EpiMode::Seq)
}

pub fn epilimit_mode(seq: &FunctionSequence, opts: &EpiOptions, mode: EpiMode) -> Result<EpiLimitReport> {
    epilimit(seq, opts, mode)
}

/// True when both epi-limits are exact and coincide.
pub fn epi_converges(seq: &FunctionSequence, opts: &EpiOptions) -> Result<bool> {
    let lo = lower_epilimit(seq, opts)?;
    let hi = upper_epilimit(seq, opts)?;
    Ok(lo.exact && hi.exact && lo.function.values == hi.function.values)
}

/// Outcome of [`verify_conjugate_identity`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConjugateIdentityReport {
    pub precondition_ok: bool,
    pub precondition_note: String,
    /// `(li_e f_n)*` on the dual grid.
    pub lhs: Option<GridFunction>,
    /// `limsup_n f_n*` on the dual grid.
    pub rhs: Option<GridFunction>,
    pub deviation: f64,
    pub tolerance: f64,
    pub exact: bool,
    pub pass: bool,
}

/// Compares the conjugate of the lower epi-limit with the lim sup of the
/// conjugates, under a common coercive minorant.
///
/// The minorant must satisfy `f_n ≥ lower_bound` on the sampled indices and
/// `min_boundary lower_bound > min_interior lower_bound + margin`. A failed
/// precondition yields a report with `precondition_ok = false`.
pub fn verify_conjugate_identity(
    seq: &FunctionSequence,
    lower_bound: &GridFunction,
    margin: f64,
    dual: &DualGrid,
    opts: &EpiOptions,
    tolerance: f64,
) -> Result<ConjugateIdentityReport> {
    let g = &lower_bound.grid;
    let fail = |note: String| ConjugateIdentityReport {
        precondition_ok: false,
        precondition_note: note,
        lhs: None,
        rhs: None,
        deviation: f64::INFINITY,
        tolerance,
        exact: seq.tail.exact(),
        pass: false,
    };
    let mut bmin = ExtReal::PosInf;
    let mut imin = ExtReal::PosInf;
    for i in 0..g.len() {
        if g.on_boundary(i) {
            bmin = bmin.min(lower_bound.values[i]);
        } else {
            imin = imin.min(lower_bound.values[i]);
        }
    }
    let ExtReal::Finite(im) = imin else {
        return Ok(fail("lower bound has no finite interior minimum".into()));
    };
    if bmin <= ExtReal::Finite(im + margin) {
        return Ok(fail(format!(
            "lower bound not coercive on the window: boundary min {bmin} vs interior min {im} + {margin}"
        )));
    }

    let terms = seq.tail_terms();
    let mut sampled: Vec<(usize, GridFunction)> = (1..=3.min(seq.tail.horizon())).map(|n| (n, seq.get(n))).collect();
    sampled.extend(terms.iter().cloned());
    for (n, f) in &sampled {
        if !f.grid.compatible(g) {
            return invalid("lower bound and sequence live on different grids");
        }
        if let Some(i) = (0..g.len()).find(|&i| f.values[i] < lower_bound.values[i]) {
            return Ok(fail(format!("f_{n} drops below the lower bound at node {i}")));
        }
    }

    let li = lower_epilimit(seq, opts)?;
    let lhs = conjugate(&li.function, dual)?.function;
    let conj: Vec<GridFunction> = terms
        .par_iter()
        .map(|(_, f)| conjugate(f, dual).map(|c| c.function))
        .collect::<Result<_>>()?;
    let mut rhs = conj[0].clone();
    for c in &conj[1..] {
        for (r, v) in rhs.values.iter_mut().zip(&c.values) {
            *r = (*r).max(*v);
        }
    }
    let deviation = lhs.max_abs_diff(&rhs);
    Ok(ConjugateIdentityReport {
        precondition_ok: true,
        precondition_note: String::new(),
        pass: deviation <= tolerance,
        lhs: Some(lhs),
        rhs: Some(rhs),
        deviation,
        tolerance,
        exact: li.exact,
    })
}

/// Names accepted by [`builtin_family`].
pub const BUILTIN_FAMILIES: [&str; 4] = ["constant", "alternating-shift", "steep-quadratic", "shifted-vee"];

/// Builtin families on a symmetric window `[−l, l]` with spacing `h`.
///
/// * `constant`: `f_n(x) = |x| + x²/2`.
/// * `alternating-shift`: `f_n(x) = |x − (−1)ⁿ| + x²/2`, period 2.
/// * `steep-quadratic`: `f_n(x) = n·x²`, truncated at `⌈10/h⌉`.
/// * `shifted-vee`: `f_n(x) = |x − 1/n| + x²/2`, truncated at `⌈10/h⌉`.
pub fn builtin_family(name: &str, l: f64, h: f64) -> Result<FunctionSequence> {
    let n = (2.0 * l / h).round() as usize + 1;
    let grid = Grid::symmetric_1d(l, n | 1)?;
    let horizon = (10.0 / h).ceil() as usize;
    let seq = match name {
        "constant" => {
            let g = grid.clone();
            Sequence::new(name, Tail::constant(1), move |_| GridFunction::from_fn_1d(g.clone(), |x| x.abs() + x * x / 2.0))
        }
        "alternating-shift" => {
            let g = grid.clone();
            Sequence::new(name, Tail::periodic(1, 2), move |k| {
                let c = if k % 2 == 0 { 1.0 } else { -1.0 };
                GridFunction::from_fn_1d(g.clone(), move |x| (x - c).abs() + x * x / 2.0)
            })
        }
        "steep-quadratic" => {
            let g = grid.clone();
            Sequence::new(name, Tail::truncated(horizon, 4), move |k| {
                GridFunction::from_fn_1d(g.clone(), move |x| k as f64 * x * x)
            })
        }
        "shifted-vee" => {
            let g = grid.clone();
            Sequence::new(name, Tail::truncated(horizon, 4), move |k| {
                let c = 1.0 / k as f64;
                GridFunction::from_fn_1d(g.clone(), move |x| (x - c).abs() + x * x / 2.0)
            })
        }
        other => return invalid(format!("unknown family '{other}'; expected one of {BUILTIN_FAMILIES:?}")),
    };
    Ok(seq)
}

/// Common coercive minorant of the builtin coercive families: `x²/2 − 1`
/// bounds `|x − c| + x²/2` from below for every shift `|c| ≤ 1`.
pub fn builtin_lower_bound(grid: &Grid) -> GridFunction {
    GridFunction::from_fn_1d(grid.clone(), |x| x * x / 2.0 - 1.0)
}
