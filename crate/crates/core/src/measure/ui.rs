use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::delta::{default_eps_ladder, grows_with_index, max_small_set};
use super::integral::{integral_functional, Integrand};
use super::space::{MeasureSpace, SetSequence, SimpleFunction};
use crate::config::{DIVERGENCE_CEILING, ZERO_TOL};
use crate::error::{invalid, Error, Result};
use crate::extreal::ExtReal;
use crate::sequence::Sequence;

/// Options of [`uniform_integrability_test`].
#[derive(Debug, Clone, PartialEq)]
pub struct UiOptions {
    /// Descending mass budgets `η` of the small-set criterion.
    pub eta: Vec<f64>,
    pub ceiling: f64,
    /// Set by [`ui_test_sequence`] when `‖x_n‖₁` grows with `n`; the family
    /// then counts as unbounded.
    pub l1_growing: bool,
}

impl UiOptions {
    pub fn for_space(space: &MeasureSpace) -> Self {
        UiOptions { eta: default_eps_ladder(space), ceiling: DIVERGENCE_CEILING, l1_growing: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UiReport {
    pub bounded: bool,
    /// Small-set part: `sup_x max_{μ(A) ≤ η} ∫_A ‖x‖ → 0`.
    pub equi_part1: bool,
    /// Escape part: no mass outside the stages `Ω_k` of the covering.
    pub equi_part2: bool,
    pub equi: bool,
    pub ui: bool,
    pub sup_l1: f64,
    /// `(η, sup_x max_{μ(A) ≤ η} ∫_A ‖x‖)` along the ladder.
    pub modulus: Vec<(f64, f64)>,
    /// `(k, sup_x ∫_{Ω∖Ω_k} ‖x‖)` for each stage below the last.
    pub escape: Vec<(usize, f64)>,
    /// Decreasing sets carrying the small-set mass when part 1 fails.
    pub witness: Option<SetSequence>,
}

/// Boundedness in `L₁` plus the two-part equi-integrability test.
///
/// A quantity counts as zero when it is at most [`ZERO_TOL`].
pub fn uniform_integrability_test(family: &[SimpleFunction], space: &MeasureSpace, opts: &UiOptions) -> Result<UiReport> {
    if family.is_empty() {
        return invalid("empty family");
    }
    if opts.eta.is_empty() || opts.eta.windows(2).any(|w| w[1] > w[0]) {
        return invalid("η ladder must be nonempty and descending");
    }
    for x in family {
        x.check_space(space)?;
    }
    let norms: Vec<Vec<f64>> = family.iter().map(SimpleFunction::norms).collect();
    let l1: Vec<f64> = norms.iter().map(|v| v.iter().zip(&space.atoms).map(|(a, w)| a * w).sum()).collect();
    let sup_l1 = l1.iter().cloned().fold(0.0, f64::max);
    let bounded = sup_l1 <= opts.ceiling && !opts.l1_growing;

    let mut modulus = Vec::with_capacity(opts.eta.len());
    let mut sets = Vec::with_capacity(opts.eta.len());
    for &eta in &opts.eta {
        let (v, s) = norms
            .iter()
            .map(|u| {
                let s = max_small_set(u, space, eta);
                (s.value, s.set)
            })
            .fold((0.0, vec![]), |a, b| if b.0 > a.0 { b } else { a });
        modulus.push((eta, v));
        sets.push(s);
    }
    let equi_part1 = modulus.last().unwrap().1 <= ZERO_TOL;

    let kmax = space.covering.iter().cloned().max().unwrap_or(0);
    let escape: Vec<(usize, f64)> = (0..kmax)
        .map(|k| {
            let out: Vec<usize> = (0..space.len()).filter(|&i| space.covering[i] > k).collect();
            let v = norms.iter().map(|u| out.iter().map(|&i| space.atoms[i] * u[i]).sum::<f64>()).fold(0.0, f64::max);
            (k, v)
        })
        .collect();
    let equi_part2 = escape.last().is_none_or(|e| e.1 <= ZERO_TOL);

    let witness = if equi_part1 {
        None
    } else {
        let mut acc: Vec<usize> = vec![];
        let mut nested = Vec::new();
        for s in sets.iter().rev() {
            for &i in s {
                if !acc.contains(&i) {
                    acc.push(i);
                }
            }
            let mut c = acc.clone();
            c.sort_unstable();
            nested.push(c);
        }
        nested.reverse();
        SetSequence::new(space, nested, 2.0 * opts.eta.last().unwrap()).ok()
    };
    let equi = equi_part1 && equi_part2;
    Ok(UiReport { bounded, equi_part1, equi_part2, equi, ui: bounded && equi, sup_l1, modulus, escape, witness })
}

fn l1_norm(x: &SimpleFunction, space: &MeasureSpace) -> f64 {
    x.norms().iter().zip(&space.atoms).map(|(a, w)| a * w).sum()
}

/// [`uniform_integrability_test`] on the tail terms of a sequence, with
/// the growth of `‖x_n‖₁` judged between `⌈N/2⌉` and `N` for truncated tails.
pub fn ui_test_sequence(seq: &Sequence<SimpleFunction>, space: &MeasureSpace, opts: &UiOptions) -> Result<UiReport> {
    let family: Vec<SimpleFunction> = seq.tail_terms().into_iter().map(|t| t.1).collect();
    let mut o = opts.clone();
    if !seq.tail.exact() {
        let h = seq.tail.horizon();
        o.l1_growing |= grows_with_index(l1_norm(&seq.get(h.div_ceil(2)), space), l1_norm(&seq.get(h), space), h);
    }
    uniform_integrability_test(&family, space, &o)
}

/// Piecewise-linear superlinear profile
/// `ψ(t) = c·(t + Σ_k (t − τ_k)⁺)` with increasing knots `τ_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YoungProfile {
    pub scale: f64,
    pub knots: Vec<f64>,
}

impl YoungProfile {
    pub fn eval(&self, t: f64) -> f64 {
        let t = t.abs();
        self.scale * (t + self.knots.iter().map(|k| (t - k).max(0.0)).sum::<f64>())
    }

    /// Slope on the last linear piece.
    pub fn final_slope(&self) -> f64 {
        self.scale * (1 + self.knots.len()) as f64
    }

    /// `φ(ω, e) = ψ(‖e‖)`.
    pub fn integrand(&self, dim: usize) -> Integrand {
        let p = Arc::new(self.clone());
        Integrand::young_radial("dlvp", dim, move |t| ExtReal::from_f64(p.eval(t)))
    }
}

/// Output of [`young_from_ui`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct YoungCertificate {
    pub profile: YoungProfile,
    /// `sup_x I_φ(x)` over the family, verified `≤ 1`.
    pub sup_integral: f64,
}

/// Number of knots in the constructed profile.
pub const DLVP_KNOTS: usize = 48;

/// De la Vallée Poussin construction: a Young integrand `φ = ψ(‖·‖)` with
/// `sup_x I_φ(x) ≤ 1` over a uniformly integrable family.
///
/// Knot `τ_k` is the smallest level with `sup_x ∫_{‖x‖>τ_k} ‖x‖ ≤ 2^-k·S`,
/// `S = sup ‖x‖₁`, continued geometrically past the data range; the final
/// scale is fixed by the post-hoc integral.
pub fn young_from_ui(family: &[SimpleFunction], space: &MeasureSpace) -> Result<YoungCertificate> {
    let rep = uniform_integrability_test(family, space, &UiOptions::for_space(space))?;
    if !rep.ui {
        let w = rep.witness.map(|w| serde_json::to_string(&w).unwrap_or_default()).unwrap_or_default();
        return Err(Error::Refused(format!("family is not uniformly integrable; witness {w}")));
    }
    let norms: Vec<Vec<f64>> = family.iter().map(SimpleFunction::norms).collect();
    let s = rep.sup_l1;
    let mut levels: Vec<f64> = norms.iter().flatten().cloned().collect();
    levels.push(0.0);
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let vmax = *levels.last().unwrap();
    let tail_at = |tau: f64| {
        norms
            .iter()
            .map(|u| u.iter().zip(&space.atoms).filter(|(a, _)| **a > tau).map(|(a, w)| a * w).sum::<f64>())
            .fold(0.0, f64::max)
    };
    let mut knots: Vec<f64> = Vec::with_capacity(DLVP_KNOTS);
    for k in 0..DLVP_KNOTS {
        let target = s * 2f64.powi(-(k as i32));
        let prev = knots.last().cloned().unwrap_or(0.0);
        let tau = if prev >= vmax {
            if prev > 0.0 { 2.0 * prev } else { 1.0 }
        } else {
            levels.iter().cloned().find(|&t| t >= prev && tail_at(t) <= target).unwrap_or(vmax)
        };
        knots.push(tau);
    }
    let base = YoungProfile { scale: 1.0, knots };
    let raw = sup_integral(&base, family, space)?;
    let scale = if raw > 1.0 { 1.0 / raw } else { 1.0 };
    let profile = YoungProfile { scale, ..base };
    let sup = sup_integral(&profile, family, space)?;
    if sup > 1.0 + 1e-12 {
        return Err(Error::Refused(format!("post-hoc check failed: sup I_φ = {sup}")));
    }
    Ok(YoungCertificate { profile, sup_integral: sup })
}

fn sup_integral(p: &YoungProfile, family: &[SimpleFunction], space: &MeasureSpace) -> Result<f64> {
    let phi = p.integrand(family[0].dim());
    let mut m: f64 = 0.0;
    for x in family {
        m = m.max(integral_functional(&phi, x, space)?.to_f64());
    }
    Ok(m)
}

/// Options of [`biting_extract`].
#[derive(Debug, Clone, PartialEq)]
pub struct BitingOptions {
    /// Threshold `M = κ · sup ‖x_n‖₁ / μ(Ω)`.
    pub kappa: f64,
    /// Number of final terms averaged into the limit candidate.
    pub window: usize,
    pub ceiling: f64,
}

impl Default for BitingOptions {
    fn default() -> Self {
        BitingOptions { kappa: 2.0, window: 8, ceiling: DIVERGENCE_CEILING }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BitingCertificate {
    pub k: usize,
    pub exceptional_mass: f64,
    /// `‖x_n‖ ≤ bound` off `A_k` for every `n ≥ k`.
    pub bound: f64,
    /// Small-set modulus of the remainder at the finest cell, at most `bound·η`.
    pub modulus: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BitingReport {
    pub subsequence: Vec<usize>,
    /// Exceptional sets `A_1 ⊇ A_2 ⊇ …`.
    pub exceptional: SetSequence,
    /// `Ω_k = Ω ∖ A_k`.
    pub covering: Vec<Vec<usize>>,
    pub limit: SimpleFunction,
    /// Set when the tail oscillates on some cell off the exceptional set:
    /// the average then stands in for a weak limit.
    pub heuristic: bool,
    pub certificates: Vec<BitingCertificate>,
}

/// Biting extraction for an `L₁`-bounded sequence `x_1, …, x_N` on a
/// refinement space.
///
/// `A_k = ∪_{j≥k} {‖x_j‖ > M}`; off `A_k` every later term is bounded by
/// `M`, hence equi-integrable. The full sequence serves as the subsequence.
pub fn biting_extract(seq: &[SimpleFunction], space: &MeasureSpace, opts: &BitingOptions) -> Result<BitingReport> {
    if !space.is_refinement() {
        return invalid("biting extraction needs a refinement space");
    }
    if seq.is_empty() {
        return invalid("empty sequence");
    }
    for x in seq {
        x.check_space(space)?;
    }
    let norms: Vec<Vec<f64>> = seq.iter().map(SimpleFunction::norms).collect();
    let l1: Vec<f64> = seq.iter().map(|x| l1_norm(x, space)).collect();
    let sup = l1.iter().cloned().fold(0.0, f64::max);
    let n = seq.len();
    if sup > opts.ceiling || grows_with_index(l1[n.div_ceil(2) - 1], l1[n - 1], n) {
        return Err(Error::Refused("sequence is not bounded in L1".into()));
    }
    let m = opts.kappa * sup / space.total_mass();
    let eta = space.min_weight();

    let mut sets: Vec<Vec<usize>> = vec![vec![]; n];
    let mut acc = vec![false; space.len()];
    for j in (0..n).rev() {
        for (i, a) in norms[j].iter().enumerate() {
            if *a > m {
                acc[i] = true;
            }
        }
        sets[j] = (0..space.len()).filter(|&i| acc[i]).collect();
    }
    let exceptional = SetSequence::new(space, sets.clone(), 2.0 * eta)?;
    let covering: Vec<Vec<usize>> =
        sets.iter().map(|a| (0..space.len()).filter(|i| a.binary_search(i).is_err()).collect()).collect();

    let certificates = (0..n)
        .map(|k| {
            let off: Vec<bool> = (0..space.len()).map(|i| sets[k].binary_search(&i).is_err()).collect();
            let modulus = (k..n)
                .map(|j| {
                    let u: Vec<f64> = (0..space.len()).map(|i| if off[i] { norms[j][i] } else { 0.0 }).collect();
                    max_small_set(&u, space, eta).value
                })
                .fold(0.0, f64::max);
            BitingCertificate { k: k + 1, exceptional_mass: exceptional.masses[k], bound: m, modulus }
        })
        .collect();

    let w = opts.window.clamp(1, n);
    // Off A_{N−w+1} every term of the averaging window is bounded by M.
    let last = &sets[n - w];
    let dim = seq[0].dim();
    let mut heuristic = false;
    let mut limit = SimpleFunction::zeros(space.len(), dim);
    for i in 0..space.len() {
        if last.binary_search(&i).is_ok() {
            continue;
        }
        for d in 0..dim {
            let vals: Vec<f64> = seq[n - w..].iter().map(|x| x.values[i][d]).collect();
            let (lo, hi) = vals.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |a, v| (a.0.min(*v), a.1.max(*v)));
            if hi - lo > 1e-12 * hi.abs().max(1.0) {
                heuristic = true;
            }
            limit.values[i][d] = vals.iter().sum::<f64>() / w as f64;
        }
    }
    Ok(BitingReport { subsequence: (1..=n).collect(), exceptional, covering, limit, heuristic, certificates })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spikes(space: &MeasureSpace, upto: usize) -> Vec<SimpleFunction> {
        (1..=upto).map(|n| SimpleFunction::dyadic_block(space, n as f64, 0.0, 1.0 / n as f64).unwrap()).collect()
    }

    #[test]
    fn constant_family_is_ui() {
        let sp = MeasureSpace::dyadic(8);
        let fam = vec![SimpleFunction::scalar(vec![2.0; 256]); 3];
        let r = uniform_integrability_test(&fam, &sp, &UiOptions::for_space(&sp)).unwrap();
        assert!(r.bounded && r.equi && r.ui);
        assert!(r.witness.is_none());
    }

    #[test]
    fn spike_family_is_bounded_not_equi() {
        let sp = MeasureSpace::dyadic(8);
        let fam = spikes(&sp, 256);
        let r = uniform_integrability_test(&fam, &sp, &UiOptions::for_space(&sp)).unwrap();
        assert!(r.bounded);
        assert!(!r.equi_part1 && !r.ui);
        assert!(r.witness.unwrap().null_tail);
    }

    #[test]
    fn dominated_family_is_ui() {
        let sp = MeasureSpace::dyadic(8);
        let g = SimpleFunction::sample(&sp, |t| 1.0 / t.sqrt().max(0.25)).unwrap();
        let fam: Vec<SimpleFunction> = (1..6).map(|k| g.scaled((k as f64).sin())).collect();
        let r = uniform_integrability_test(&fam, &sp, &UiOptions::for_space(&sp)).unwrap();
        assert!(r.ui, "{:?}", r.modulus.last());
    }

    #[test]
    fn escape_part_uses_the_covering() {
        let mut sp = MeasureSpace::finite(vec![1.0, 1.0, 1.0]).unwrap();
        sp.covering = vec![0, 1, 2];
        let fam = vec![SimpleFunction::scalar(vec![0.0, 0.0, 5.0])];
        let r = uniform_integrability_test(&fam, &sp, &UiOptions::for_space(&sp)).unwrap();
        assert!(r.equi_part1 && !r.equi_part2 && !r.ui);
        assert_eq!(r.escape, vec![(0, 5.0), (1, 5.0)]);
    }

    #[test]
    fn young_profiles() {
        let sp = MeasureSpace::dyadic(8);
        let z = young_from_ui(&[SimpleFunction::zeros(256, 1)], &sp).unwrap();
        assert_eq!(z.sup_integral, 0.0);
        let c = young_from_ui(&[SimpleFunction::scalar(vec![3.0; 256])], &sp).unwrap();
        assert!(c.profile.eval(3.0) <= 1.0 + 1e-12);
        assert!(c.profile.final_slope() > c.profile.scale * 10.0);
        assert!(young_from_ui(&spikes(&MeasureSpace::dyadic(6), 64), &MeasureSpace::dyadic(6)).is_err());
    }

    #[test]
    fn biting_on_spikes() {
        let sp = MeasureSpace::dyadic(8);
        let seq = spikes(&sp, 64);
        let r = biting_extract(&seq, &sp, &BitingOptions::default()).unwrap();
        for k in 3..=64usize {
            let cells = 256 / k;
            for i in 0..cells {
                assert!(r.exceptional.sets[k - 1].contains(&i), "k = {k}, cell {i}");
            }
        }
        assert!(r.limit.values.iter().all(|v| v[0] == 0.0));
        assert!(!r.heuristic);
        assert!(r.certificates.iter().all(|c| c.modulus <= c.bound * sp.min_weight() + 1e-12));
    }

    #[test]
    fn biting_on_constant_and_alternating() {
        let sp = MeasureSpace::dyadic(5);
        let c = vec![SimpleFunction::scalar(vec![1.5; 32]); 10];
        let r = biting_extract(&c, &sp, &BitingOptions::default()).unwrap();
        assert!(r.exceptional.sets.iter().all(Vec::is_empty));
        assert!(r.limit.values.iter().all(|v| v[0] == 1.5));
        let alt: Vec<SimpleFunction> =
            (1..=10).map(|n| SimpleFunction::scalar(vec![if n % 2 == 0 { 1.0 } else { -1.0 }; 32])).collect();
        let r = biting_extract(&alt, &sp, &BitingOptions::default()).unwrap();
        assert!(r.heuristic);
        assert!(r.limit.values.iter().all(|v| v[0].abs() < 1e-15));
        let grow: Vec<SimpleFunction> = (1..=128).map(|n| SimpleFunction::scalar(vec![n as f64; 32])).collect();
        assert!(biting_extract(&grow, &sp, &BitingOptions::default()).is_err());
    }
}
