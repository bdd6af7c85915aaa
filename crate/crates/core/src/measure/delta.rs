//! The δ⁺ equi-integrability index
//!
//! ```text
//! δ⁺((u_n)) = sup over decreasing (S_k) with null intersection of
//!             limsup_k sup_{n≥k} ∫*_{S_k} u_n dμ
//! ```
//!
//! computed through its small-set surrogate: for each mass budget `ε` of a
//! descending ladder, `v(ε) = limsup_n max_{μ(S) ≤ ε} ∫_S u_n`, which is
//! nonincreasing in `ε`; the reported index is the value at the finest rung.
//! The inner maximum is a 0/1 knapsack whose item density is `u_n(i)`
//! itself, solved exactly.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::space::{MeasureSpace, SetSequence};
use crate::config::{DELTA_EPS_EXPONENTS, DIVERGENCE_CEILING, ZERO_TOL};
use crate::error::{invalid, Error, Result};
use crate::extreal::ExtReal;
use crate::sequence::Sequence;

/// Per-atom real values `n ↦ u_n`.
pub type AtomSequence = Sequence<Vec<f64>>;

/// Branch-and-bound node budget of the knapsack solver.
pub const KNAPSACK_NODE_LIMIT: usize = 2_000_000;

/// A maximizing set together with its value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmallSet {
    pub set: Vec<usize>,
    pub value: f64,
    /// False only if the branch-and-bound budget ran out.
    pub exact: bool,
}

/// `Σ_{i∈S} μ_i u_i` summed in index order.
pub fn set_integral(u: &[f64], space: &MeasureSpace, set: &[usize]) -> f64 {
    let mut idx = set.to_vec();
    idx.sort_unstable();
    idx.iter().map(|&i| space.atoms[i] * u[i]).sum()
}

/// `max { ∫_S u dμ : μ(S) ≤ eps }`.
pub fn max_small_set(u: &[f64], space: &MeasureSpace, eps: f64) -> SmallSet {
    let mut cand: Vec<usize> = (0..u.len()).filter(|&i| u[i] > 0.0 && space.atoms[i] <= eps).collect();
    // Density order: larger value first, smaller index on ties.
    cand.sort_by(|&a, &b| u[b].total_cmp(&u[a]).then(a.cmp(&b)));
    if cand.is_empty() {
        return SmallSet { set: vec![], value: 0.0, exact: true };
    }
    let w0 = space.atoms[cand[0]];
    let (set, exact) = if cand.iter().all(|&i| space.atoms[i] == w0) {
        let mut m = 0usize;
        let mut mass = 0.0;
        while m < cand.len() && mass + w0 <= eps {
            mass += w0;
            m += 1;
        }
        (cand[..m].to_vec(), true)
    } else {
        branch_and_bound(u, space, &cand, eps)
    };
    let value = set_integral(u, space, &set);
    let mut set = set;
    set.sort_unstable();
    SmallSet { set, value, exact }
}

fn branch_and_bound(u: &[f64], space: &MeasureSpace, cand: &[usize], eps: f64) -> (Vec<usize>, bool) {
    struct St<'a> {
        u: &'a [f64],
        w: &'a [f64],
        cand: &'a [usize],
        eps: f64,
        best: f64,
        best_set: Vec<usize>,
        cur: Vec<usize>,
        nodes: usize,
    }
    fn bound(st: &St, k: usize, mass: f64, val: f64) -> f64 {
        let mut cap = st.eps - mass;
        let mut b = val;
        for &i in &st.cand[k..] {
            if cap <= 0.0 {
                break;
            }
            let take = st.w[i].min(cap);
            b += take * st.u[i];
            cap -= take;
        }
        b
    }
    fn dfs(st: &mut St, k: usize, mass: f64, val: f64) {
        st.nodes += 1;
        if val > st.best {
            st.best = val;
            st.best_set = st.cur.clone();
        }
        if k == st.cand.len() || st.nodes > KNAPSACK_NODE_LIMIT || bound(st, k, mass, val) <= st.best {
            return;
        }
        let i = st.cand[k];
        if mass + st.w[i] <= st.eps {
            st.cur.push(i);
            dfs(st, k + 1, mass + st.w[i], val + st.w[i] * st.u[i]);
            st.cur.pop();
        }
        dfs(st, k + 1, mass, val);
    }
    let mut st = St { u, w: &space.atoms, cand, eps, best: 0.0, best_set: vec![], cur: vec![], nodes: 0 };
    dfs(&mut st, 0, 0.0, 0.0);
    let exact = st.nodes <= KNAPSACK_NODE_LIMIT;
    let mut set = st.best_set;
    // The search adds masses in density order; re-check in index order.
    while space.mass(&set) > eps {
        set.pop();
    }
    (set, exact)
}

/// Default ladder: `2^-k` down to the cell mass on a refinement space, down
/// to `2^-20` on a fixed atom space (where δ⁺ then degenerates to 0).
pub fn default_eps_ladder(space: &MeasureSpace) -> Vec<f64> {
    let last = match space.refinement {
        Some(r) => r.depth as i32,
        None => *DELTA_EPS_EXPONENTS.end(),
    };
    (1..=last.max(1)).map(|k| 2f64.powi(-k)).collect()
}

/// Shortest horizon on which growth with the index is judged.
pub const GROWTH_MIN_HORIZON: usize = 64;

/// Divergence signature of a truncated sequence of nonnegative quantities:
/// the value at the horizon `N` is at least 1.5 times the value at `⌈N/2⌉`
/// and is not itself negligible. Quantities growing like `n^a` with `a ≥ 0.6`
/// trigger it; bounded or slowly converging ones do not.
pub fn grows_with_index(half: f64, last: f64, horizon: usize) -> bool {
    horizon >= GROWTH_MIN_HORIZON && last > ZERO_TOL && last >= 1.5 * half
}

fn half_index(horizon: usize) -> usize {
    horizon.div_ceil(2)
}

/// One ladder rung of the surrogate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaRung {
    pub eps: f64,
    pub value: f64,
    /// Tail index attaining the value.
    pub n: usize,
    pub set: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaReport {
    pub value: ExtReal,
    pub trace: Vec<DeltaRung>,
    /// Lim sup read exactly off a constant or periodic tail.
    pub exact_tail: bool,
    /// Every knapsack was solved to optimality.
    pub exact_inner: bool,
    pub diverging: bool,
    /// Decreasing sets `S_k = ∪_{j≥k} T_j` built from the rung maximizers.
    pub witness: Option<SetSequence>,
}

fn check_terms(terms: &[(usize, Vec<f64>)], space: &MeasureSpace) -> Result<()> {
    for (n, u) in terms {
        if u.len() != space.len() {
            return invalid(format!("u_{n} has {} atoms, space has {}", u.len(), space.len()));
        }
        if u.iter().any(|x| !x.is_finite()) {
            return invalid(format!("u_{n} has a non-finite value"));
        }
    }
    Ok(())
}

fn check_ladder(eps: &[f64]) -> Result<()> {
    if eps.is_empty() || eps.iter().any(|e| !(*e > 0.0)) || eps.windows(2).any(|w| w[1] > w[0]) {
        return invalid("ε ladder must be a nonempty descending list of positive reals");
    }
    Ok(())
}

/// Small-set surrogate of δ⁺ along the ladder `eps`.
pub fn delta_plus_greedy(u: &AtomSequence, space: &MeasureSpace, eps: &[f64]) -> Result<DeltaReport> {
    delta_plus_greedy_with(u, space, eps, DIVERGENCE_CEILING)
}

pub fn delta_plus_greedy_with(u: &AtomSequence, space: &MeasureSpace, eps: &[f64], ceiling: f64) -> Result<DeltaReport> {
    u.tail.validate()?;
    check_ladder(eps)?;
    let terms = u.tail_terms();
    check_terms(&terms, space)?;
    let per_rung: Vec<Vec<SmallSet>> = eps
        .par_iter()
        .map(|&e| terms.iter().map(|(_, t)| max_small_set(t, space, e)).collect())
        .collect();
    let mut trace = Vec::with_capacity(eps.len());
    let mut exact_inner = true;
    for (k, sols) in per_rung.iter().enumerate() {
        let mut best = 0usize;
        for (j, s) in sols.iter().enumerate() {
            exact_inner &= s.exact;
            if s.value > sols[best].value {
                best = j;
            }
        }
        trace.push(DeltaRung { eps: eps[k], value: sols[best].value, n: terms[best].0, set: sols[best].set.clone() });
    }
    let v = trace.last().unwrap().value;
    let eps_min = eps[eps.len() - 1];
    let growing = !u.tail.exact() && {
        let h = u.tail.horizon();
        let at = |n: usize| max_small_set(&u.get(n), space, eps_min).value;
        grows_with_index(at(half_index(h)), at(h), h)
    };
    let diverging = v > ceiling || growing;

    let mut sets: Vec<Vec<usize>> = Vec::with_capacity(trace.len());
    let mut acc: Vec<usize> = Vec::new();
    for rung in trace.iter().rev() {
        for &i in &rung.set {
            if !acc.contains(&i) {
                acc.push(i);
            }
        }
        let mut s = acc.clone();
        s.sort_unstable();
        sets.push(s);
    }
    sets.reverse();
    let witness = SetSequence::new(space, sets, 2.0 * eps[eps.len() - 1]).ok();

    Ok(DeltaReport {
        value: if diverging { ExtReal::PosInf } else { ExtReal::Finite(v) },
        trace,
        exact_tail: u.tail.exact(),
        exact_inner,
        diverging,
        witness,
    })
}

/// Size limits of [`delta_plus_bruteforce`].
pub const BRUTE_MAX_ATOMS: usize = 12;
pub const BRUTE_MAX_HORIZON: usize = 8;
pub const BRUTE_MAX_DEPTH: usize = 4;

/// Exhaustive value over decreasing chains `S_1 ⊇ … ⊇ S_D` with
/// `μ(S_k) ≤ ε_k`, `D = max_depth`.
///
/// A chain's value is `max_{n in tail} ∫_{S_D} u_n`, so it depends on the
/// deepest set alone, and every set of mass at most `ε_D` is the deepest set
/// of the constant chain. The enumeration therefore runs over all subsets
/// as candidate deepest sets.
pub fn delta_plus_bruteforce(u: &AtomSequence, space: &MeasureSpace, eps: &[f64], max_depth: usize) -> Result<f64> {
    u.tail.validate()?;
    check_ladder(eps)?;
    if space.len() > BRUTE_MAX_ATOMS || u.tail.horizon() > BRUTE_MAX_HORIZON || max_depth > BRUTE_MAX_DEPTH {
        return Err(Error::Refused(format!(
            "brute force limited to {BRUTE_MAX_ATOMS} atoms, horizon {BRUTE_MAX_HORIZON}, depth {BRUTE_MAX_DEPTH}"
        )));
    }
    if max_depth == 0 || max_depth > eps.len() {
        return invalid("max_depth must lie in 1..=ladder length");
    }
    let terms = u.tail_terms();
    check_terms(&terms, space)?;
    let budget = eps[max_depth - 1];
    let n = space.len();
    let best = (0u32..1 << n)
        .into_par_iter()
        .map(|mask| {
            let set: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            if space.mass(&set) > budget {
                return 0.0;
            }
            terms.iter().map(|(_, t)| set_integral(t, space, &set)).fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::space::SimpleFunction;
    use crate::sequence::Tail;

    fn spike(space: &MeasureSpace, power: i32, horizon: usize) -> AtomSequence {
        let sp = space.clone();
        Sequence::new("spike", Tail::truncated(horizon, 8), move |n| {
            let nf = n as f64;
            SimpleFunction::dyadic_block(&sp, nf.powi(power), 0.0, 1.0 / nf).unwrap().values.into_iter().map(|v| v[0]).collect()
        })
    }

    #[test]
    fn spike_family_has_index_one() {
        let sp = MeasureSpace::dyadic(10);
        let rep = delta_plus_greedy(&spike(&sp, 1, 4096), &sp, &default_eps_ladder(&sp)).unwrap();
        assert!(!rep.diverging);
        assert!((rep.value.to_f64() - 1.0).abs() <= 2f64.powi(-8), "{}", rep.value);
        let w = rep.witness.unwrap();
        assert!(w.null_tail);
        assert!(w.sets.last().unwrap().contains(&0));
    }

    #[test]
    fn squared_spike_diverges() {
        let sp = MeasureSpace::dyadic(10);
        let rep = delta_plus_greedy(&spike(&sp, 2, 4096), &sp, &default_eps_ladder(&sp)).unwrap();
        assert!(rep.diverging);
        assert_eq!(rep.value, ExtReal::PosInf);
    }

    #[test]
    fn constant_one_has_index_zero() {
        let sp = MeasureSpace::dyadic(10);
        let n = sp.len();
        let u = Sequence::new("one", Tail::constant(1), move |_| vec![1.0; n]);
        let rep = delta_plus_greedy(&u, &sp, &default_eps_ladder(&sp)).unwrap();
        assert!(rep.value.to_f64() <= 2f64.powi(-10));
        assert!(rep.exact_tail);
    }

    #[test]
    fn zero_sequence_and_fixed_atoms() {
        let sp = MeasureSpace::finite(vec![0.5, 0.25, 0.25]).unwrap();
        let z = Sequence::new("zero", Tail::constant(1), |_| vec![0.0; 3]);
        assert_eq!(delta_plus_bruteforce(&z, &sp, &[0.5, 0.25], 2).unwrap(), 0.0);
        let s = Sequence::new("spot", Tail::constant(1), |_| vec![0.0, 7.0, 0.0]);
        let ladder = default_eps_ladder(&sp);
        assert_eq!(delta_plus_greedy(&s, &sp, &ladder).unwrap().value, ExtReal::ZERO);
        assert_eq!(delta_plus_bruteforce(&s, &sp, &ladder, 4).unwrap(), 0.0);
    }

    #[test]
    fn knapsack_matches_enumeration_on_unequal_weights() {
        let sp = MeasureSpace::finite(vec![0.375, 0.25, 0.125, 0.125, 0.0625, 0.0625]).unwrap();
        let u = vec![3.0, -1.0, 5.0, 2.0, 9.0, 1.0];
        for eps in [0.0625, 0.125, 0.1875, 0.25, 0.5, 1.0] {
            let g = max_small_set(&u, &sp, eps).value;
            let b = (0u32..64)
                .map(|m| (0..6).filter(|i| m >> i & 1 == 1).collect::<Vec<_>>())
                .filter(|s| sp.mass(s) <= eps)
                .map(|s| set_integral(&u, &sp, &s))
                .fold(0.0, f64::max);
            assert_eq!(g, b, "eps = {eps}");
        }
    }

    #[test]
    fn brute_force_refuses_large_instances() {
        let sp = MeasureSpace::dyadic(4);
        let u = Sequence::new("z", Tail::constant(1), |_| vec![0.0; 16]);
        assert!(matches!(delta_plus_bruteforce(&u, &sp, &[0.5], 1), Err(Error::Refused(_))));
    }

    #[test]
    fn two_atom_three_step_instance() {
        let sp = MeasureSpace::finite(vec![0.5, 0.5]).unwrap();
        let data = [vec![1.0, 2.0], vec![3.0, -1.0], vec![0.5, 4.0]];
        let u = Sequence::from_terms("u", data.to_vec(), 3);
        for d in 1..=2 {
            let ladder = [1.0, 0.5];
            let g = delta_plus_greedy(&u, &sp, &ladder[..d]).unwrap().value.to_f64();
            assert_eq!(g, delta_plus_bruteforce(&u, &sp, &ladder, d).unwrap());
        }
    }

    #[test]
    fn growth_detector() {
        assert!(grows_with_index(50.0, 100.0, 100));
        assert!(!grows_with_index(1.0, 1.0, 100));
        assert!(!grows_with_index(1.0 - 1.0 / 50.0, 1.0 - 1.0 / 100.0, 100));
        assert!(!grows_with_index(1.0, 2.0, 8));
    }
}
