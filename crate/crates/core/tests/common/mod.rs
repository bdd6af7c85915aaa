//! Reference implementations used as oracles by the integration tests.
//!
//! Everything here works on plain `f64` slices (with `±INFINITY` standing in
//! for the extended reals) and shares no code with the library, so a bug in a
//! library transform cannot hide behind the same bug in its checker.

#![allow(dead_code)]

use epilim::{ExtReal, GridFunction};

pub fn values(f: &GridFunction) -> Vec<f64> {
    f.values.iter().map(|v| v.to_f64()).collect()
}

pub fn nodes(f: &GridFunction) -> Vec<f64> {
    (0..f.len()).map(|i| f.grid.coord(0, i)).collect()
}

/// `sup_i s·x_i − f_i` by enumeration. `f_i = −∞` makes the supremum `+∞`.
pub fn conjugate_enum(xs: &[f64], fx: &[f64], s: f64) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for (&x, &v) in xs.iter().zip(fx) {
        if v == f64::INFINITY {
            continue;
        }
        if v == f64::NEG_INFINITY {
            return f64::INFINITY;
        }
        best = best.max(s * x - v);
    }
    best
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Lower convex hull of the finite points (Andrew's monotone chain) read
/// back at the nodes `xs`: linear between hull vertices, `+∞` outside the
/// finite range and `−∞` everywhere if some value is `−∞`.
pub fn lower_hull_at_nodes(xs: &[f64], fx: &[f64]) -> Vec<f64> {
    if fx.contains(&f64::NEG_INFINITY) {
        return vec![f64::NEG_INFINITY; xs.len()];
    }
    let pts: Vec<(f64, f64)> = xs.iter().zip(fx).filter(|(_, v)| v.is_finite()).map(|(x, v)| (*x, *v)).collect();
    if pts.is_empty() {
        return vec![f64::INFINITY; xs.len()];
    }
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let (lo, hi) = (pts[0].0, pts[pts.len() - 1].0);
    xs.iter()
        .map(|&x| {
            if x < lo || x > hi {
                return f64::INFINITY;
            }
            let k = hull.partition_point(|v| v.0 < x);
            if k < hull.len() && hull[k].0 == x {
                return hull[k].1;
            }
            let (a, b) = (hull[k - 1], hull[k]);
            let t = (x - a.0) / (b.0 - a.0);
            a.1 + t * (b.1 - a.1)
        })
        .collect()
}

/// `a + b` with `+∞ − ∞ = +∞`.
pub fn upper_add(a: f64, b: f64) -> f64 {
    if a == f64::INFINITY || b == f64::INFINITY {
        f64::INFINITY
    } else {
        a + b
    }
}

/// `(f□g)(x_k) = min_j f(x_k − y_j) + g(y_j)` on a common integer grid
/// starting at `x0`; terms whose argument leaves the grid are `+∞`.
pub fn infconv_enum(x0: i64, f: &[f64], g: &[f64]) -> Vec<f64> {
    let n = f.len() as i64;
    (0..n)
        .map(|k| {
            let x = x0 + k;
            (0..n)
                .filter_map(|j| {
                    let y = x0 + j;
                    let i = x - y - x0;
                    (0..n).contains(&i).then(|| upper_add(f[i as usize], g[j as usize]))
                })
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

/// Largest `max_n ∫_S u_n` over atom sets `S` with `μ(S) ≤ budget`,
/// enumerating every subset. Integrals are summed in ascending atom order.
pub fn small_set_enum(terms: &[Vec<f64>], weights: &[f64], budget: f64) -> f64 {
    let m = weights.len();
    assert!(m <= 16, "enumeration oracle is exponential");
    let mut best = 0.0f64;
    for mask in 0u32..(1 << m) {
        let idx: Vec<usize> = (0..m).filter(|i| mask >> i & 1 == 1).collect();
        let mass: f64 = idx.iter().map(|&i| weights[i]).sum();
        if mass > budget {
            continue;
        }
        for t in terms {
            let v: f64 = idx.iter().map(|&i| t[i] * weights[i]).sum();
            best = best.max(v);
        }
    }
    best
}

/// `sup_e s·e − a(e − c)² − b|e| − d` in closed form (`a > 0`, `b ≥ 0`).
pub fn quad_abs_conjugate(a: f64, c: f64, b: f64, d: f64, s: f64) -> f64 {
    let f = |e: f64| s * e - a * (e - c).powi(2) - b * e.abs() - d;
    let mut cands = vec![0.0];
    let right = c + (s - b) / (2.0 * a);
    if right > 0.0 {
        cands.push(right);
    }
    let left = c + (s + b) / (2.0 * a);
    if left < 0.0 {
        cands.push(left);
    }
    cands.into_iter().map(f).fold(f64::NEG_INFINITY, f64::max)
}

/// `sup_x s·x − g(x)` by dense sampling of `[lo, hi]` with `n` points.
pub fn conjugate_dense(g: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize, s: f64) -> f64 {
    (0..n)
        .map(|i| {
            let x = lo + (hi - lo) * i as f64 / (n - 1) as f64;
            s * x - g(x)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn ext(v: f64) -> ExtReal {
    ExtReal::from_f64(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hull_of_a_dip() {
        let h = lower_hull_at_nodes(&[0.0, 1.0, 2.0, 3.0], &[0.0, 5.0, f64::INFINITY, 3.0]);
        assert_eq!(h, vec![0.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn closed_form_conjugate_matches_sampling() {
        for s in [-3.0, -0.5, 0.0, 0.7, 2.5] {
            let exact = quad_abs_conjugate(1.5, 0.3, 0.8, -0.2, s);
            let dense = conjugate_dense(|e| 1.5 * (e - 0.3f64).powi(2) + 0.8 * e.abs() - 0.2, -5.0, 5.0, 200_001, s);
            assert!((exact - dense).abs() < 1e-8, "s = {s}");
        }
    }
}
