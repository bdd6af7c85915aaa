use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Dyadic refinement schedule emulating the unit interval `(0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Refinement {
    pub depth: u32,
}

/// Finite set of weighted atoms.
///
/// `covering[i]` is the first stage `k` of the increasing exhaustion
/// `Ω_0 ⊆ Ω_1 ⊆ …` containing atom `i`. In refinement mode atom `i` is the
/// cell `(i·2^-d, (i+1)·2^-d]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpace")]
pub struct MeasureSpace {
    pub atoms: Vec<f64>,
    pub refinement: Option<Refinement>,
    pub covering: Vec<usize>,
    pub label: String,
}

#[derive(Deserialize)]
struct RawSpace {
    atoms: Vec<f64>,
    #[serde(default)]
    refinement: Option<Refinement>,
    #[serde(default)]
    covering: Option<Vec<usize>>,
    #[serde(default)]
    label: Option<String>,
}

impl TryFrom<RawSpace> for MeasureSpace {
    type Error = crate::error::Error;
    fn try_from(r: RawSpace) -> Result<Self> {
        let n = r.atoms.len();
        let mut s = MeasureSpace::finite(r.atoms)?;
        if let Some(c) = r.covering {
            if c.len() != n {
                return invalid("covering tags must have one entry per atom");
            }
            s.covering = c;
        }
        if let Some(rf) = r.refinement {
            if n != 1usize << rf.depth {
                return invalid("a refinement of depth d needs 2^d atoms");
            }
            s.refinement = Some(rf);
        }
        if let Some(l) = r.label {
            s.label = l;
        }
        Ok(s)
    }
}

impl MeasureSpace {
    /// Atoms with the given positive weights.
    pub fn finite(atoms: Vec<f64>) -> Result<MeasureSpace> {
        if atoms.is_empty() {
            return invalid("a measure space needs at least one atom");
        }
        if atoms.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return invalid("atom weights must be finite and strictly positive");
        }
        let n = atoms.len();
        Ok(MeasureSpace { atoms, refinement: None, covering: vec![0; n], label: format!("finite({n})") })
    }

    /// `2^depth` equal cells of `(0, 1]`.
    pub fn dyadic(depth: u32) -> MeasureSpace {
        assert!(depth <= 24, "refinement depth too large");
        let n = 1usize << depth;
        MeasureSpace {
            atoms: vec![1.0 / n as f64; n],
            refinement: Some(Refinement { depth }),
            covering: vec![0; n],
            label: format!("dyadic({depth})"),
        }
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().sum()
    }

    pub fn is_refinement(&self) -> bool {
        self.refinement.is_some()
    }

    /// Mass of a set of atoms, summed in index order.
    pub fn mass(&self, set: &[usize]) -> f64 {
        let mut idx = set.to_vec();
        idx.sort_unstable();
        idx.iter().map(|&i| self.atoms[i]).sum()
    }

    /// Smallest atom weight.
    pub fn min_weight(&self) -> f64 {
        self.atoms.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Cell `(a, b]` of atom `i` in refinement mode.
    pub fn cell(&self, i: usize) -> Option<(f64, f64)> {
        self.refinement.map(|r| {
            let n = (1usize << r.depth) as f64;
            (i as f64 / n, (i + 1) as f64 / n)
        })
    }

    /// Atoms contained in `Ω_k`.
    pub fn stage(&self, k: usize) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.covering[i] <= k).collect()
    }
}

/// Per-atom vectors in `ℝ^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimpleFunction {
    pub values: Vec<Vec<f64>>,
}

impl SimpleFunction {
    pub fn new(values: Vec<Vec<f64>>) -> Result<SimpleFunction> {
        let Some(d) = values.first().map(Vec::len) else {
            return invalid("a simple function needs at least one atom");
        };
        if d == 0 || values.iter().any(|v| v.len() != d) {
            return invalid("all atom values must share one positive dimension");
        }
        if values.iter().flatten().any(|x| !x.is_finite()) {
            return invalid("simple function values must be finite");
        }
        Ok(SimpleFunction { values })
    }

    /// Real-valued function.
    pub fn scalar(v: Vec<f64>) -> SimpleFunction {
        SimpleFunction { values: v.into_iter().map(|x| vec![x]).collect() }
    }

    pub fn zeros(atoms: usize, dim: usize) -> SimpleFunction {
        SimpleFunction { values: vec![vec![0.0; dim]; atoms] }
    }

    /// Cell averages of `c·1_{(a, b]}` on a refinement space. Exact: the
    /// mass `c·(b − a)` is preserved even when `(a, b]` is thinner than a cell.
    pub fn dyadic_block(space: &MeasureSpace, c: f64, a: f64, b: f64) -> Result<SimpleFunction> {
        if !space.is_refinement() {
            return invalid("dyadic blocks need a refinement space");
        }
        let v = (0..space.len())
            .map(|i| {
                let (lo, hi) = space.cell(i).expect("refinement space");
                let overlap = (hi.min(b) - lo.max(a)).max(0.0);
                c * overlap / (hi - lo)
            })
            .collect();
        Ok(SimpleFunction::scalar(v))
    }

    /// Samples `f` at cell midpoints of a refinement space.
    pub fn sample(space: &MeasureSpace, f: impl Fn(f64) -> f64) -> Result<SimpleFunction> {
        if !space.is_refinement() {
            return invalid("sampling needs a refinement space");
        }
        Ok(SimpleFunction::scalar(
            (0..space.len())
                .map(|i| {
                    let (lo, hi) = space.cell(i).expect("refinement space");
                    f(0.5 * (lo + hi))
                })
                .collect(),
        ))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    /// Euclidean norm at every atom.
    pub fn norms(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.iter().map(|x| x * x).sum::<f64>().sqrt()).collect()
    }

    pub fn scaled(&self, t: f64) -> SimpleFunction {
        SimpleFunction { values: self.values.iter().map(|v| v.iter().map(|x| t * x).collect()).collect() }
    }

    /// `self + t·other`.
    pub fn axpy(&self, t: f64, other: &SimpleFunction) -> SimpleFunction {
        SimpleFunction {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + t * y).collect())
                .collect(),
        }
    }

    /// Components `(x, y)` glued into `ℝ^{d1+d2}`.
    pub fn pair(x: &SimpleFunction, y: &SimpleFunction) -> SimpleFunction {
        SimpleFunction {
            values: x.values.iter().zip(&y.values).map(|(a, b)| a.iter().chain(b).cloned().collect()).collect(),
        }
    }

    /// Equal to `a` on `set` and to `b` elsewhere.
    pub fn splice(a: &SimpleFunction, b: &SimpleFunction, set: &[bool]) -> SimpleFunction {
        SimpleFunction {
            values: (0..a.len()).map(|i| if set[i] { a.values[i].clone() } else { b.values[i].clone() }).collect(),
        }
    }

    pub fn check_space(&self, space: &MeasureSpace) -> Result<()> {
        if self.len() != space.len() {
            return invalid(format!("function has {} atoms, space has {}", self.len(), space.len()));
        }
        Ok(())
    }
}

/// Decreasing sequence of atom sets `S_1 ⊇ S_2 ⊇ …`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetSequence {
    pub sets: Vec<Vec<usize>>,
    /// Mass of each set.
    pub masses: Vec<f64>,
    /// True when the masses decrease to (numerically) zero, or the last set is empty.
    pub null_tail: bool,
}

impl SetSequence {
    /// Validates inclusion and records masses.
    pub fn new(space: &MeasureSpace, sets: Vec<Vec<usize>>, null_mass: f64) -> Result<SetSequence> {
        for w in sets.windows(2) {
            if !w[1].iter().all(|i| w[0].contains(i)) {
                return invalid("set sequence is not decreasing");
            }
        }
        let masses: Vec<f64> = sets.iter().map(|s| space.mass(s)).collect();
        let null_tail = masses.last().is_some_and(|&m| m <= null_mass);
        Ok(SetSequence { sets, masses, null_tail })
    }
}
