use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::space::{MeasureSpace, SimpleFunction};
use crate::error::{invalid, Error, Result};
use crate::extreal::ExtReal;
use crate::grid::{Grid, GridFunction};

/// Structure flags carried by an integrand.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntegrandFlags {
    pub convex_in_e: bool,
    pub nonnegative: bool,
    pub young: bool,
}

type EvalFn = dyn Fn(usize, &[f64]) -> ExtReal + Send + Sync;

/// `f(ω, e)` evaluated at an atom index and a point of `ℝ^d`.
#[derive(Clone)]
pub struct Integrand {
    eval: Arc<EvalFn>,
    pub dim: usize,
    pub flags: IntegrandFlags,
    /// Evaluation grid used whenever `f(ω, ·)` must be sampled.
    pub grid: Option<Grid>,
    pub name: String,
}

impl fmt::Debug for Integrand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Integrand")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("flags", &self.flags)
            .finish()
    }
}

impl Integrand {
    pub fn new(name: impl Into<String>, dim: usize, eval: impl Fn(usize, &[f64]) -> ExtReal + Send + Sync + 'static) -> Self {
        Integrand { eval: Arc::new(eval), dim, flags: IntegrandFlags::default(), grid: None, name: name.into() }
    }

    /// Atom-independent scalar integrand `f(ω, e) = g(e)`.
    pub fn scalar(name: impl Into<String>, g: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Integrand::new(name, 1, move |_, e| ExtReal::from_f64(g(e[0])))
    }

    /// Integrand given by one sampled slice per atom on a shared grid.
    /// Off-node points interpolate linearly in 1-D; in 2-D they are `+∞`.
    pub fn tabulated(name: impl Into<String>, slices: Vec<GridFunction>) -> Result<Self> {
        let Some(first) = slices.first() else { return invalid("a tabulated integrand needs at least one slice") };
        let grid = first.grid.clone();
        if slices.iter().any(|s| s.grid != grid) {
            return invalid("all slices must share one grid");
        }
        let dim = grid.dim;
        let slices = Arc::new(slices);
        let eval = move |i: usize, e: &[f64]| {
            let s = &slices[i];
            if dim == 1 {
                s.interpolate_1d(e[0])
            } else {
                s.at(e).unwrap_or(ExtReal::PosInf)
            }
        };
        Ok(Integrand::new(name, dim, eval).with_grid(grid))
    }

    pub fn with_flags(mut self, flags: IntegrandFlags) -> Self {
        self.flags = flags;
        self
    }

    pub fn with_grid(mut self, grid: Grid) -> Self {
        self.grid = Some(grid);
        self
    }

    pub fn eval(&self, atom: usize, e: &[f64]) -> ExtReal {
        (self.eval)(atom, e)
    }

    /// `ω ↦ f(ω, x(ω))`.
    pub fn compose(&self, x: &SimpleFunction) -> Vec<ExtReal> {
        x.values.iter().enumerate().map(|(i, v)| self.eval(i, v)).collect()
    }

    /// `f(ω, ·)` sampled on the integrand's grid.
    pub fn slice(&self, atom: usize) -> Result<GridFunction> {
        let g = self.grid.clone().ok_or_else(|| Error::InvalidInput(format!("integrand '{}' has no grid", self.name)))?;
        Ok(GridFunction::from_fn(g, |p| self.eval(atom, p)))
    }

    /// `c·f`, for `c > 0`.
    pub fn scaled(&self, c: f64) -> Integrand {
        let inner = self.eval.clone();
        Integrand {
            eval: Arc::new(move |i, e| inner(i, e).scale(c)),
            dim: self.dim,
            flags: self.flags,
            grid: self.grid.clone(),
            name: format!("{c}*{}", self.name),
        }
    }

    /// `f − ⟨x*, ·⟩` with `x*` given per atom.
    pub fn tilted(&self, x_star: &SimpleFunction) -> Integrand {
        let inner = self.eval.clone();
        let xs = x_star.values.clone();
        Integrand {
            eval: Arc::new(move |i, e| {
                let dot: f64 = xs[i].iter().zip(e).map(|(a, b)| a * b).sum();
                inner(i, e).upper_add(ExtReal::from_f64(-dot))
            }),
            dim: self.dim,
            flags: IntegrandFlags { young: false, nonnegative: false, ..self.flags },
            grid: self.grid.clone(),
            name: format!("{}-<x*,.>", self.name),
        }
    }

    /// Young integrand `φ(ω, e) = ψ(‖e‖)` from a scalar profile.
    pub fn young_radial(name: impl Into<String>, dim: usize, psi: impl Fn(f64) -> ExtReal + Send + Sync + 'static) -> Self {
        Integrand::new(name, dim, move |_, e| psi(e.iter().map(|x| x * x).sum::<f64>().sqrt()))
            .with_flags(IntegrandFlags { convex_in_e: true, nonnegative: true, young: true })
    }

    /// `φ(e) = ‖e‖^p`.
    pub fn young_power(p: f64, dim: usize) -> Self {
        assert!(p >= 1.0, "power Young functions need p ≥ 1");
        Integrand::young_radial(format!("|e|^{p}"), dim, move |t| ExtReal::from_f64(t.powf(p)))
    }

    /// Indicator of the closed unit ball, the Young integrand of `L_∞`.
    pub fn young_ball(dim: usize) -> Self {
        Integrand::young_radial("iota_B", dim, |t| if t <= 1.0 { ExtReal::ZERO } else { ExtReal::PosInf })
    }
}

/// Upper integral `∫* v dμ = I_{v⁺} − I_{v⁻}` with `(+∞) − (+∞) = +∞`.
pub fn upper_integral(v: &[ExtReal], space: &MeasureSpace) -> ExtReal {
    assert_eq!(v.len(), space.len(), "vector and space sizes differ");
    let mut pos = ExtReal::ZERO;
    let mut neg = ExtReal::ZERO;
    for (x, &w) in v.iter().zip(&space.atoms) {
        pos = pos.upper_add(x.pos_part().scale_measure(w));
        neg = neg.upper_add(x.neg_part().scale_measure(w));
    }
    pos.upper_add(-neg)
}

/// Integral functional `I_f(x) = ∫* f(ω, x(ω)) dμ`.
pub fn integral_functional(f: &Integrand, x: &SimpleFunction, space: &MeasureSpace) -> Result<ExtReal> {
    x.check_space(space)?;
    if x.dim() != f.dim {
        return invalid(format!("integrand '{}' expects dimension {}, got {}", f.name, f.dim, x.dim()));
    }
    Ok(upper_integral(&f.compose(x), space))
}

/// `‖x‖_p` with the Euclidean norm at each atom; `p = ∞` gives the max.
pub fn lp_norm(x: &SimpleFunction, p: f64, space: &MeasureSpace) -> Result<f64> {
    x.check_space(space)?;
    if !(p >= 1.0) {
        return invalid("lp_norm needs p in [1, ∞]");
    }
    let norms = x.norms();
    if p.is_infinite() {
        return Ok(norms.into_iter().fold(0.0, f64::max));
    }
    let s: f64 = norms.iter().zip(&space.atoms).map(|(n, w)| w * n.powf(p)).sum();
    Ok(s.powf(1.0 / p))
}

/// Relative bisection tolerance of the gauge.
pub const GAUGE_REL_TOL: f64 = 1e-10;

/// Luxemburg gauge `inf { t > 0 : I_φ(x / t) ≤ 1 }`.
///
/// The returned `t` always satisfies `I_φ(x / t) ≤ 1`; it lies within
/// [`GAUGE_REL_TOL`] (relative) of the infimum.
pub fn orlicz_gauge(phi: &Integrand, x: &SimpleFunction, space: &MeasureSpace) -> Result<ExtReal> {
    if !phi.flags.young {
        return invalid(format!("integrand '{}' is not flagged Young", phi.name));
    }
    x.check_space(space)?;
    if x.norms().iter().all(|n| *n == 0.0) {
        return Ok(ExtReal::ZERO);
    }
    let fits = |t: f64| -> Result<bool> { Ok(integral_functional(phi, &x.scaled(1.0 / t), space)? <= ExtReal::Finite(1.0)) };
    let scale = lp_norm(x, f64::INFINITY, space)?.max(f64::MIN_POSITIVE);
    let mut hi = scale;
    let mut steps = 0;
    while !fits(hi)? {
        hi *= 2.0;
        steps += 1;
        if steps > 1100 {
            return Ok(ExtReal::PosInf);
        }
    }
    let mut lo = hi / 2.0;
    while fits(lo)? {
        hi = lo;
        lo /= 2.0;
        if lo < f64::MIN_POSITIVE {
            return Ok(ExtReal::ZERO);
        }
    }
    while hi - lo > GAUGE_REL_TOL * hi {
        let mid = 0.5 * (lo + hi);
        if fits(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(ExtReal::Finite(hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ExtReal::{Finite, NegInf, PosInf};

    #[test]
    fn upper_integral_examples() {
        let sp = MeasureSpace::finite(vec![1.0, 1.0]).unwrap();
        assert_eq!(upper_integral(&[PosInf, NegInf], &sp), PosInf);
        assert_eq!(upper_integral(&[NegInf, Finite(3.0)], &sp), NegInf);
        let sp = MeasureSpace::finite(vec![2.0, 3.0]).unwrap();
        assert_eq!(upper_integral(&[Finite(1.0), Finite(-2.0)], &sp), Finite(-4.0));
    }

    #[test]
    fn functional_and_norm_examples() {
        let sp = MeasureSpace::finite(vec![2.0, 3.0]).unwrap();
        let x = SimpleFunction::scalar(vec![1.0, -2.0]);
        let abs = Integrand::scalar("|e|", f64::abs);
        assert_eq!(integral_functional(&abs, &x, &sp).unwrap(), Finite(8.0));
        let sq = Integrand::scalar("e^2", |e| e * e);
        assert_eq!(integral_functional(&sq, &SimpleFunction::zeros(2, 1), &sp).unwrap(), Finite(0.0));
        assert_eq!(lp_norm(&x, 1.0, &sp).unwrap(), 8.0);
        assert_eq!(lp_norm(&x, f64::INFINITY, &sp).unwrap(), 2.0);
        assert!((lp_norm(&x, 2.0, &sp).unwrap() - 14f64.sqrt()).abs() < 1e-12);
        assert!(lp_norm(&x, 0.5, &sp).is_err());
        assert!(integral_functional(&abs, &SimpleFunction::zeros(2, 2), &sp).is_err());
    }

    #[test]
    fn gauges() {
        let sp = MeasureSpace::dyadic(3);
        let x = SimpleFunction::scalar((0..8).map(|i| i as f64 - 3.5).collect());
        for p in [1.0, 2.0, 3.0] {
            let g = orlicz_gauge(&Integrand::young_power(p, 1), &x, &sp).unwrap().to_f64();
            let n = lp_norm(&x, p, &sp).unwrap();
            assert!((g - n).abs() <= 1e-9 * n, "p = {p}: {g} vs {n}");
        }
        let g = orlicz_gauge(&Integrand::young_ball(1), &x, &sp).unwrap().to_f64();
        assert!((g - 3.5).abs() <= 1e-9);
        assert_eq!(orlicz_gauge(&Integrand::young_ball(1), &SimpleFunction::zeros(8, 1), &sp).unwrap(), Finite(0.0));
        let not_young = Integrand::scalar("e", |e| e);
        assert!(orlicz_gauge(&not_young, &x, &sp).is_err());
    }

    #[test]
    fn gauge_homogeneity_and_unit_ball() {
        let sp = MeasureSpace::finite(vec![0.25, 0.5, 1.25]).unwrap();
        let phi = Integrand::young_power(1.5, 2);
        let x = SimpleFunction::new(vec![vec![1.0, -0.5], vec![0.0, 2.0], vec![-3.0, 0.25]]).unwrap();
        let g = orlicz_gauge(&phi, &x, &sp).unwrap().to_f64();
        for t in [-3.0, 0.5, 7.0] {
            let gt = orlicz_gauge(&phi, &x.scaled(t), &sp).unwrap().to_f64();
            assert!((gt - t.abs() * g).abs() <= 1e-9 * gt.max(1.0));
        }
        assert!(integral_functional(&phi, &x.scaled(1.0 / g), &sp).unwrap() <= Finite(1.0));
    }
}
