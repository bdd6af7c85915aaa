//! Discrete Fenchel–Moreau conjugates, biconjugates and infimal convolution.
//!
//! Every transform here is window-truncated: suprema and infima range over
//! grid nodes only. [`ConjugateResult::boundary_flag`] marks the dual points
//! whose value depends on where the primal window stops.

use std::ops::Deref;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::extreal::ExtReal;
use crate::grid::{Grid, GridFunction};

/// Grid of slopes (covectors). Same shape rules as [`Grid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DualGrid(pub Grid);

impl Deref for DualGrid {
    type Target = Grid;
    fn deref(&self) -> &Grid {
        &self.0
    }
}

impl DualGrid {
    pub fn line(a: f64, b: f64, n: usize) -> Result<DualGrid> {
        Grid::line(a, b, n).map(DualGrid)
    }
}

/// Output of a conjugate transform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConjugateResult {
    /// `f*` sampled on the dual grid.
    pub function: GridFunction,
    /// Smallest primal index attaining the supremum; `None` when `f ≡ +∞`.
    pub argmax_index: Vec<Option<usize>>,
    /// True when every maximizer lies on the primal window boundary, so the
    /// value is a truncation artefact of the window.
    pub boundary_flag: Vec<bool>,
}

/// `⟨s, x⟩ − fx`. Both transforms evaluate candidates through this single
/// expression so that they agree to the last bit on exact data.
#[inline]
fn pair_value(s: &[f64], x: &[f64], fx: f64) -> f64 {
    let mut dot = s[0] * x[0];
    if s.len() == 2 {
        dot += s[1] * x[1];
    }
    dot - fx
}

#[inline]
fn pair_value_1d(s: f64, x: f64, fx: f64) -> f64 {
    pair_value(&[s], &[x], fx)
}

/// Supremum over primal nodes for one dual point, with its tie and
/// boundary bookkeeping.
fn sup_at(f: &GridFunction, pts: &[Vec<f64>], s: &[f64]) -> (ExtReal, Option<usize>, bool) {
    let mut best = ExtReal::NegInf;
    let mut arg = None;
    let mut interior = false;
    for (i, x) in pts.iter().enumerate() {
        let term = match f.values[i] {
            ExtReal::PosInf => continue,
            ExtReal::NegInf => ExtReal::PosInf,
            ExtReal::Finite(fx) => ExtReal::from_f64(pair_value(s, x, fx)),
        };
        if arg.is_none() || term > best {
            best = term;
            arg = Some(i);
            interior = !f.grid.on_boundary(i);
        } else if term == best {
            interior |= !f.grid.on_boundary(i);
        }
    }
    (best, arg, arg.is_some() && !interior)
}

fn check_dims(f: &GridFunction, dual: &DualGrid) -> Result<()> {
    if f.grid.dim != dual.dim {
        return invalid(format!(
            "primal grid has dimension {}, dual grid has {}",
            f.grid.dim, dual.dim
        ));
    }
    Ok(())
}

/// Exact discrete conjugate `f*(s) = max_x ⟨s,x⟩ − f(x)` by scanning every
/// primal node for every dual node.
pub fn conjugate_bruteforce(f: &GridFunction, dual: &DualGrid) -> Result<ConjugateResult> {
    check_dims(f, dual)?;
    let pts: Vec<Vec<f64>> = (0..f.grid.len()).map(|i| f.grid.point(i)).collect();
    let rows: Vec<(ExtReal, Option<usize>, bool)> = (0..dual.len())
        .into_par_iter()
        .map(|k| sup_at(f, &pts, &dual.point(k)))
        .collect();
    Ok(assemble(dual, rows))
}

fn assemble(dual: &DualGrid, rows: Vec<(ExtReal, Option<usize>, bool)>) -> ConjugateResult {
    let mut values = Vec::with_capacity(rows.len());
    let mut argmax_index = Vec::with_capacity(rows.len());
    let mut boundary_flag = Vec::with_capacity(rows.len());
    for (v, a, b) in rows {
        values.push(v);
        argmax_index.push(a);
        boundary_flag.push(b);
    }
    ConjugateResult {
        function: GridFunction { grid: dual.0.clone(), values },
        argmax_index,
        boundary_flag,
    }
}

/// Conjugate at a single dual point, returning `(value, smallest argmax)`.
pub fn conjugate_at(f: &GridFunction, s: &[f64]) -> Result<(ExtReal, Option<usize>)> {
    if s.len() != f.grid.dim {
        return invalid("dual point dimension does not match the grid");
    }
    let pts: Vec<Vec<f64>> = (0..f.grid.len()).map(|i| f.grid.point(i)).collect();
    let (v, a, _) = sup_at(f, &pts, s);
    Ok((v, a))
}

/// Lower convex hull of the finite epigraph points of a 1-D function, keeping
/// collinear points. Returns node indices in increasing order.
fn lower_hull_with_collinear(xs: &[f64], f: &GridFunction) -> Vec<usize> {
    let mut hull: Vec<usize> = Vec::new();
    for (i, v) in f.values.iter().enumerate() {
        let Some(fi) = v.as_finite() else { continue };
        while hull.len() >= 2 {
            let o = hull[hull.len() - 2];
            let a = hull[hull.len() - 1];
            let fo = f.values[o].to_f64();
            let fa = f.values[a].to_f64();
            let cross = (xs[a] - xs[o]) * (fi - fo) - (fa - fo) * (xs[i] - xs[o]);
            if cross < 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    hull
}

/// Linear-time 1-D discrete Legendre transform.
///
/// Produces the same output as [`conjugate_bruteforce`] whenever the
/// candidate values `s·x − f(x)` are computed exactly in floating point
/// (integer or dyadic data). On inexact data the two may differ in the last
/// bits.
pub fn conjugate_fast_1d(f: &GridFunction, dual: &DualGrid) -> Result<ConjugateResult> {
    check_dims(f, dual)?;
    if f.grid.dim != 1 {
        return Err(Error::Unsupported("conjugate_fast_1d needs a 1-D grid".into()));
    }
    let g = &f.grid;
    let n = g.len();
    let m = dual.len();
    let xs: Vec<f64> = (0..n).map(|i| g.coord(0, i)).collect();
    let ss: Vec<f64> = (0..m).map(|k| dual.coord(0, k)).collect();
    let on_bnd = |i: usize| i == 0 || i + 1 == n;

    let neg: Vec<usize> = (0..n).filter(|&i| f.values[i].is_neg_inf()).collect();
    if let Some(&first) = neg.first() {
        let flag = neg.iter().all(|&i| on_bnd(i));
        return Ok(ConjugateResult {
            function: GridFunction { grid: dual.0.clone(), values: vec![ExtReal::PosInf; m] },
            argmax_index: vec![Some(first); m],
            boundary_flag: vec![flag; m],
        });
    }

    let hull = lower_hull_with_collinear(&xs, f);
    if hull.is_empty() {
        return Ok(ConjugateResult {
            function: GridFunction { grid: dual.0.clone(), values: vec![ExtReal::NegInf; m] },
            argmax_index: vec![None; m],
            boundary_flag: vec![false; m],
        });
    }
    let val = |s: f64, j: usize| {
        let i = hull[j];
        pair_value_1d(s, xs[i], f.values[i].to_f64())
    };

    let mut values = Vec::with_capacity(m);
    let mut argmax_index = Vec::with_capacity(m);
    let mut boundary_flag = Vec::with_capacity(m);
    let mut j = 0usize;
    for &s in &ss {
        // Restart from the left if the dual grid is not increasing.
        if j > 0 && val(s, j - 1) >= val(s, j) {
            j = 0;
        }
        while j + 1 < hull.len() && val(s, j + 1) > val(s, j) {
            j += 1;
        }
        let best = val(s, j);
        let mut interior = !on_bnd(hull[j]);
        let mut k = j;
        while k + 1 < hull.len() && val(s, k + 1) == best {
            k += 1;
            interior |= !on_bnd(hull[k]);
        }
        values.push(ExtReal::from_f64(best));
        argmax_index.push(Some(hull[j]));
        boundary_flag.push(!interior);
    }
    Ok(ConjugateResult {
        function: GridFunction { grid: dual.0.clone(), values },
        argmax_index,
        boundary_flag,
    })
}

/// Conjugate through the fastest applicable path.
pub fn conjugate(f: &GridFunction, dual: &DualGrid) -> Result<ConjugateResult> {
    if f.grid.dim == 1 {
        conjugate_fast_1d(f, dual)
    } else {
        conjugate_bruteforce(f, dual)
    }
}

/// Largest number of nodes on an automatically chosen dual grid.
pub const MAX_AUTO_DUAL_POINTS: usize = 4097;

/// Biconjugate together with the dual window used for the first transform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Biconjugate {
    pub function: GridFunction,
    pub dual: DualGrid,
    /// Set when `f ≡ +∞`; the biconjugate is then `+∞` as well.
    pub empty_domain: bool,
    /// False for the 2-D path, which samples both transforms on uniform grids.
    pub exact: bool,
}

/// Closed convex envelope `f**` on the grid of `f`.
pub fn biconjugate(f: &GridFunction) -> Result<GridFunction> {
    biconjugate_report(f).map(|b| b.function)
}

/// Automatic dual window: strictly wider than every slope between
/// consecutive finite nodes of `f`, spaced like the primal grid.
pub fn auto_dual_1d(f: &GridFunction) -> Result<DualGrid> {
    let g = &f.grid;
    let fin: Vec<usize> = (0..g.len()).filter(|&i| f.values[i].is_finite()).collect();
    let mut smax: f64 = 0.0;
    for w in fin.windows(2) {
        let (a, b) = (w[0], w[1]);
        let slope = (f.values[b].to_f64() - f.values[a].to_f64()) / (g.coord(0, b) - g.coord(0, a));
        smax = smax.max(slope.abs());
    }
    let h = g.h(0);
    let steps = (smax / h).floor() as usize + 1;
    if 2 * steps < MAX_AUTO_DUAL_POINTS {
        let half = steps as f64 * h;
        DualGrid::line(-half, half, 2 * steps + 1)
    } else {
        DualGrid::line(-(smax + h), smax + h, MAX_AUTO_DUAL_POINTS)
    }
}

/// Full biconjugate report; see [`biconjugate`].
pub fn biconjugate_report(f: &GridFunction) -> Result<Biconjugate> {
    match f.grid.dim {
        1 => biconjugate_1d(f),
        2 => biconjugate_2d(f),
        d => invalid(format!("unsupported dimension {d}")),
    }
}

fn biconjugate_1d(f: &GridFunction) -> Result<Biconjugate> {
    let g = &f.grid;
    let n = g.len();
    let dual = auto_dual_1d(f)?;
    if f.values.iter().any(|v| v.is_neg_inf()) {
        return Ok(Biconjugate {
            function: GridFunction::constant(g.clone(), ExtReal::NegInf),
            dual,
            empty_domain: false,
            exact: true,
        });
    }
    let dom = f.domain();
    if dom.is_empty() {
        return Ok(Biconjugate {
            function: GridFunction::constant(g.clone(), ExtReal::PosInf),
            dual,
            empty_domain: true,
            exact: true,
        });
    }
    let xs: Vec<f64> = (0..n).map(|i| g.coord(0, i)).collect();
    let fv = |i: usize| f.values[i].to_f64();

    // First transform on the uniform dual window: its argmax sequence is a
    // subsequence of the vertex chain of the convex envelope.
    let first = conjugate_fast_1d(f, &dual)?;
    let mut chain: Vec<usize> = Vec::new();
    for a in first.argmax_index.iter().flatten() {
        if chain.last() != Some(a) {
            chain.push(*a);
        }
    }
    let (lo, hi) = (dom[0], *dom.last().unwrap());
    if chain.first() != Some(&lo) {
        chain.insert(0, lo);
    }
    if chain.last() != Some(&hi) {
        chain.push(hi);
    }

    // Refine between consecutive argmaxes by evaluating the conjugate at the
    // slope of the connecting segment. A node that beats the segment there
    // is a vertex the uniform dual grid skipped.
    let scale = dom.iter().map(|&i| fv(i).abs()).fold(1.0, f64::max)
        + xs.iter().map(|x| x.abs()).fold(0.0, f64::max) * dual.max[0];
    let tol = 1e-12 * scale;
    let mut vertices = vec![chain[0]];
    let mut stack: Vec<(usize, usize)> = chain.windows(2).rev().map(|w| (w[0], w[1])).collect();
    while let Some((a, b)) = stack.pop() {
        let m = (fv(b) - fv(a)) / (xs[b] - xs[a]);
        let mut best = (0.0, a);
        for i in a + 1..b {
            if let ExtReal::Finite(fi) = f.values[i] {
                // Height of node i below the segment, measured through the
                // conjugate at slope m.
                let gain = pair_value_1d(m, xs[i] - xs[a], fi - fv(a));
                if gain > best.0 {
                    best = (gain, i);
                }
            }
        }
        if best.0 > tol {
            stack.push((best.1, b));
            stack.push((a, best.1));
        } else {
            vertices.push(b);
        }
    }

    // Second transform evaluated at the breakpoint slopes of f*, where the
    // concave map s ↦ s·x − f*(s) attains its maximum.
    let edges: Vec<(usize, f64)> = vertices
        .windows(2)
        .map(|w| (w[0], (fv(w[1]) - fv(w[0])) / (xs[w[1]] - xs[w[0]])))
        .collect();
    let mut values = vec![ExtReal::PosInf; n];
    if edges.is_empty() {
        values[lo] = f.values[lo];
    } else {
        let mut e = 0usize;
        for x in lo..=hi {
            while e + 1 < edges.len() && vertices[e + 1] <= x {
                e += 1;
            }
            let mut v = f64::NEG_INFINITY;
            for &k in [e.saturating_sub(1), e, (e + 1).min(edges.len() - 1)].iter() {
                let (a, m) = edges[k];
                v = v.max(fv(a) + m * (xs[x] - xs[a]));
            }
            let v = ExtReal::from_f64(v);
            values[x] = v.min(f.values[x]);
        }
    }
    Ok(Biconjugate {
        function: GridFunction { grid: g.clone(), values },
        dual,
        empty_domain: false,
        exact: true,
    })
}

/// 2-D envelope by two brute-force transforms on a uniform dual grid of the
/// same resolution. Accurate up to the dual spacing; flagged inexact.
fn biconjugate_2d(f: &GridFunction) -> Result<Biconjugate> {
    let g = &f.grid;
    let dom = f.domain();
    if f.values.iter().any(|v| v.is_neg_inf()) || dom.is_empty() {
        let c = if dom.is_empty() { ExtReal::PosInf } else { ExtReal::NegInf };
        return Ok(Biconjugate {
            function: GridFunction::constant(g.clone(), c),
            dual: DualGrid(g.clone()),
            empty_domain: dom.is_empty(),
            exact: false,
        });
    }
    let mut smax = [0.0f64; 2];
    for i in 0..g.len() {
        let ij = g.unflatten(i);
        for k in 0..2 {
            let mut nb = ij;
            nb[k] += 1;
            if nb[k] >= g.n[k] {
                continue;
            }
            let j = g.flatten(nb);
            if let (ExtReal::Finite(a), ExtReal::Finite(b)) = (f.values[i], f.values[j]) {
                smax[k] = smax[k].max(((b - a) / g.h(k)).abs());
            }
        }
    }
    let half: Vec<f64> = (0..2).map(|k| smax[k] + g.h(k)).collect();
    let dual = DualGrid(Grid::new(
        2,
        vec![-half[0], -half[1]],
        vec![half[0], half[1]],
        vec![g.n[0] | 1, g.n[1] | 1],
    )?);
    let fstar = conjugate_bruteforce(f, &dual)?;
    let back = conjugate_bruteforce(&fstar.function, &DualGrid(g.clone()))?;
    // Off the convex hull of the domain the sampled value stays finite: the
    // dual window is bounded, so the second transform cannot reach +∞ there.
    let values = back.function.values.iter().zip(&f.values).map(|(a, b)| (*a).min(*b)).collect();
    Ok(Biconjugate { function: GridFunction { grid: g.clone(), values }, dual, empty_domain: false, exact: false })
}

/// Infimal convolution `(f□g)(x) = min_y f(x−y) + g(y)` over grid nodes.
///
/// Both functions must live on the same grid with the origin as a node, so
/// that `x − y` is a node whenever it falls inside the window. Pairs with
/// `x − y` outside the window or with a `+∞` term are skipped.
pub fn infconv(f: &GridFunction, g: &GridFunction) -> Result<GridFunction> {
    if !f.grid.compatible(&g.grid) {
        return invalid("infconv needs both functions on the same grid");
    }
    let grid = &f.grid;
    let Some(origin) = grid.origin_index() else {
        return invalid("infconv needs the origin as a grid node");
    };
    let o = grid.unflatten(origin);
    let dim = grid.dim;
    let values: Vec<ExtReal> = (0..grid.len())
        .into_par_iter()
        .map(|xi| {
            let xij = grid.unflatten(xi);
            let mut best = ExtReal::PosInf;
            for yi in 0..grid.len() {
                let gy = g.values[yi];
                if gy.is_pos_inf() {
                    continue;
                }
                let yij = grid.unflatten(yi);
                let mut dij = [0usize; 2];
                let mut inside = true;
                for k in 0..dim {
                    let d = xij[k] as i64 - yij[k] as i64 + o[k] as i64;
                    if d < 0 || d >= grid.n[k] as i64 {
                        inside = false;
                        break;
                    }
                    dij[k] = d as usize;
                }
                if !inside {
                    continue;
                }
                let fx = f.values[grid.flatten(dij)];
                if fx.is_pos_inf() {
                    continue;
                }
                let s = fx.strict_add(gy).expect("no +inf term reaches the sum");
                if s < best {
                    best = s;
                }
            }
            best
        })
        .collect();
    Ok(GridFunction { grid: grid.clone(), values })
}
