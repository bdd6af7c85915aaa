use serde::{Deserialize, Serialize};

use super::integral::{integral_functional, upper_integral, Integrand};
use super::space::{MeasureSpace, SimpleFunction};
use crate::config::FLOAT_TOL;
use crate::error::{invalid, Error, Result};
use crate::extreal::ExtReal;
use crate::legendre::conjugate_at;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterchangeReport {
    /// `(I_f)*(x*)`, the sup over grid-valued simple functions.
    pub lhs: ExtReal,
    /// `I_{f*}(x*)`, integrating the atomwise conjugates.
    pub rhs: ExtReal,
    pub gap: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// A point where `I_f` is finite: the atomwise grid minimizers.
    pub finite_point: SimpleFunction,
}

/// Checks `(I_f)*(x*) = I_{f*}(x*)` on a finite atom space.
///
/// Simple functions with grid values are decomposable, so the left side
/// splits into one weighted maximization per atom. The right side goes
/// through the grid conjugate of each slice and the upper integral.
pub fn conjugate_interchange_check(f: &Integrand, x_star: &SimpleFunction, space: &MeasureSpace) -> Result<InterchangeReport> {
    x_star.check_space(space)?;
    let grid = f.grid.clone().ok_or_else(|| Error::InvalidInput(format!("integrand '{}' has no grid", f.name)))?;
    if x_star.dim() != grid.dim || f.dim != grid.dim {
        return invalid("dimension mismatch between integrand, grid and x*");
    }
    let slices: Vec<_> = (0..space.len()).map(|i| f.slice(i)).collect::<Result<_>>()?;
    if let Some(i) = slices.iter().position(|s| !s.proper()) {
        return Err(Error::Refused(format!("f(ω_{i}, ·) is not proper on the grid")));
    }

    // A point where I_f is finite: atomwise argmin.
    let finite_point = SimpleFunction {
        values: slices
            .iter()
            .map(|s| {
                let i = (0..s.len()).min_by(|&a, &b| s.values[a].cmp(&s.values[b])).expect("nonempty grid");
                s.grid.point(i)
            })
            .collect(),
    };
    if !integral_functional(f, &finite_point, space)?.is_finite() {
        return Err(Error::Refused("I_f is not finite at the atomwise minimizer".into()));
    }

    let pts: Vec<Vec<f64>> = (0..grid.len()).map(|k| grid.point(k)).collect();
    let mut lhs = ExtReal::ZERO;
    for (i, s) in slices.iter().enumerate() {
        let w = space.atoms[i];
        let mut best = ExtReal::NegInf;
        for (k, p) in pts.iter().enumerate() {
            let ExtReal::Finite(v) = s.values[k] else { continue };
            let dot: f64 = x_star.values[i].iter().zip(p).map(|(a, b)| a * b).sum();
            best = best.max(ExtReal::from_f64(w * dot - w * v));
        }
        lhs = lhs.upper_add(best);
    }

    let conj: Vec<ExtReal> =
        slices.iter().zip(&x_star.values).map(|(s, xs)| conjugate_at(s, xs).map(|c| c.0)).collect::<Result<_>>()?;
    let rhs = upper_integral(&conj, space);

    let scale = match (lhs, rhs) {
        (ExtReal::Finite(a), ExtReal::Finite(b)) => a.abs().max(b.abs()).max(1.0),
        _ => 1.0,
    };
    let tolerance = FLOAT_TOL * scale;
    let gap = match (lhs, rhs) {
        (ExtReal::Finite(a), ExtReal::Finite(b)) => (a - b).abs(),
        (a, b) if a == b => 0.0,
        _ => f64::INFINITY,
    };
    Ok(InterchangeReport { lhs, rhs, gap, tolerance, pass: gap <= tolerance, finite_point })
}
