//! Sequences `n ↦ T` (with `n ≥ 1`) carrying a declaration of their tail.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// How the sequence behaves for large `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Tail {
    /// `u_n = u_start` for every `n ≥ start`.
    EventuallyConstant { start: usize },
    /// `u_{n+period} = u_n` for every `n ≥ start`.
    EventuallyPeriodic { start: usize, period: usize },
    /// Only `n ≤ horizon` is known; limits are read off the last `window` terms.
    Truncated { horizon: usize, window: usize },
}

impl Tail {
    pub fn constant(start: usize) -> Tail {
        Tail::EventuallyConstant { start }
    }

    pub fn periodic(start: usize, period: usize) -> Tail {
        Tail::EventuallyPeriodic { start, period }
    }

    pub fn truncated(horizon: usize, window: usize) -> Tail {
        Tail::Truncated { horizon, window }
    }

    /// Indices whose min / max give the lim inf / lim sup (exactly for the
    /// constant and periodic kinds).
    pub fn indices(&self) -> Vec<usize> {
        match *self {
            Tail::EventuallyConstant { start } => vec![start],
            Tail::EventuallyPeriodic { start, period } => (start..start + period).collect(),
            Tail::Truncated { horizon, window } => (horizon + 1 - window.min(horizon)..=horizon).collect(),
        }
    }

    pub fn exact(&self) -> bool {
        !matches!(self, Tail::Truncated { .. })
    }

    /// Largest index that must be materialized.
    pub fn horizon(&self) -> usize {
        *self.indices().last().expect("tails are nonempty")
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Tail::EventuallyConstant { start: 0 } => invalid("sequences start at n = 1"),
            Tail::EventuallyPeriodic { start, period } if start == 0 || period == 0 => {
                invalid("periodic tails need start ≥ 1 and period ≥ 1")
            }
            Tail::Truncated { horizon, window } if horizon == 0 || window == 0 => {
                invalid("truncated tails need horizon ≥ 1 and window ≥ 1")
            }
            _ => Ok(()),
        }
    }

    /// Same tail with a new horizon; only truncated tails change.
    pub fn with_horizon(&self, horizon: usize) -> Tail {
        match *self {
            Tail::Truncated { window, .. } => Tail::Truncated { horizon, window },
            t => t,
        }
    }
}

/// A rule `n ↦ T` with a declared tail.
#[derive(Clone)]
pub struct Sequence<T> {
    provider: Arc<dyn Fn(usize) -> T + Send + Sync>,
    pub tail: Tail,
    pub label: String,
}

impl<T> fmt::Debug for Sequence<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Sequence").field("label", &self.label).field("tail", &self.tail).finish()
    }
}

impl<T: Send> Sequence<T> {
    pub fn new(label: impl Into<String>, tail: Tail, provider: impl Fn(usize) -> T + Send + Sync + 'static) -> Self {
        Sequence { provider: Arc::new(provider), tail, label: label.into() }
    }

    /// Sequence given by an explicit list `u_1, ..., u_N`, truncated at `N`.
    pub fn from_terms(label: impl Into<String>, terms: Vec<T>, window: usize) -> Self
    where
        T: Clone + Sync + 'static,
    {
        let n = terms.len();
        assert!(n > 0, "empty sequence");
        let terms = Arc::new(terms);
        Sequence::new(label, Tail::truncated(n, window.min(n)), move |k| terms[(k.max(1) - 1).min(n - 1)].clone())
    }

    /// The `n`-th term, `n ≥ 1`.
    pub fn get(&self, n: usize) -> T {
        (self.provider)(n)
    }

    /// Terms at the tail indices, evaluated in parallel, returned in index order.
    pub fn tail_terms(&self) -> Vec<(usize, T)> {
        self.tail.indices().into_par_iter().map(|n| (n, self.get(n))).collect()
    }

    /// Terms `u_1 .. u_N` in order.
    pub fn prefix(&self, upto: usize) -> Vec<T> {
        (1..=upto).into_par_iter().map(|n| self.get(n)).collect()
    }

    /// Checks the declared pattern on a few indices beyond the tail start.
    pub fn check_tail(&self, same: impl Fn(&T, &T) -> bool) -> Result<()> {
        self.tail.validate()?;
        let (start, period) = match self.tail {
            Tail::EventuallyConstant { start } => (start, 1),
            Tail::EventuallyPeriodic { start, period } => (start, period),
            Tail::Truncated { .. } => return Ok(()),
        };
        for j in 0..period {
            let base = self.get(start + j);
            for k in 1..=3 {
                let n = start + j + k * period;
                if !same(&base, &self.get(n)) {
                    return invalid(format!(
                        "sequence '{}' breaks its declared tail at n = {n}",
                        self.label
                    ));
                }
            }
        }
        Ok(())
    }

    /// Subsequence `n ↦ u_{idx(n)}` sharing the provider.
    pub fn subsequence(&self, label: impl Into<String>, tail: Tail, idx: impl Fn(usize) -> usize + Send + Sync + 'static) -> Self
    where
        T: 'static,
    {
        let p = self.provider.clone();
        Sequence::new(label, tail, move |n| p(idx(n)))
    }

    /// Termwise map.
    pub fn map<U: Send>(&self, g: impl Fn(usize, T) -> U + Send + Sync + 'static) -> Sequence<U>
    where
        T: 'static,
    {
        let p = self.provider.clone();
        Sequence { provider: Arc::new(move |n| g(n, p(n))), tail: self.tail, label: self.label.clone() }
    }
}
