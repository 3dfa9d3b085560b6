//! Probability measures on the real line, their distribution and quantile
//! functions.
//!
//! A quantile function is stored as a step function on `(0,1)`: a list of
//! positive subinterval lengths and the value taken on each open subinterval.
//! Breakpoints are a null set, so L² quantities never depend on the value
//! assigned there; point evaluation uses the right-continuous convention
//! `X(w) = inf { x : F(x) > w }`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the total mass of a measure (and on partition lengths).
pub const MASS_TOL: f64 = 1e-12;

/// Atoms closer than this are merged at their mass-weighted mean.
pub const ATOM_MERGE_TOL: f64 = 1e-12;

/// Breakpoints of different step functions closer than this are identified
/// when building a common refinement.
pub const BREAKPOINT_TOL: f64 = 1e-13;

/// A finitely supported probability measure on ℝ.
///
/// Atoms are strictly increasing and masses strictly positive.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteMeasure1D {
    atoms: Vec<f64>,
    masses: Vec<f64>,
}

impl DiscreteMeasure1D {
    /// Builds a measure from unsorted atoms and masses.
    ///
    /// Masses whose total is within [`MASS_TOL`] of one are renormalized;
    /// anything further off is rejected. Near-duplicate atoms are merged.
    pub fn new(atoms: Vec<f64>, masses: Vec<f64>) -> Result<Self> {
        if atoms.len() != masses.len() {
            return Err(Error::InvalidMeasure(format!("{} atoms but {} masses", atoms.len(), masses.len())));
        }
        if atoms.is_empty() {
            return Err(Error::InvalidMeasure("no atoms".into()));
        }
        if let Some(x) = atoms.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidMeasure(format!("non-finite atom {x}")));
        }
        if let Some(m) = masses.iter().find(|m| !(m.is_finite() && **m > 0.0)) {
            return Err(Error::InvalidMeasure(format!("mass {m} is not positive")));
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidMeasure(format!("masses sum to {total}")));
        }
        // Deviations at the level of summation rounding are left alone so that
        // constructing from an already normalized measure is the identity.
        let noise = masses.len() as f64 * f64::EPSILON;
        let mut pairs: Vec<(f64, f64)> = atoms.into_iter().zip(masses).collect();
        if (total - 1.0).abs() > noise {
            for p in &mut pairs {
                p.1 /= total;
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Self::merge_sorted(pairs))
    }

    pub fn dirac(x: f64) -> Self {
        assert!(x.is_finite(), "dirac location must be finite");
        Self { atoms: vec![x], masses: vec![1.0] }
    }

    /// Equal masses on the given atoms.
    pub fn uniform(atoms: Vec<f64>) -> Result<Self> {
        let n = atoms.len();
        Self::new(atoms, vec![1.0 / n as f64; n])
    }

    /// Merges a sorted list of `(atom, mass)` pairs without renormalizing.
    fn merge_sorted(pairs: Vec<(f64, f64)>) -> Self {
        let mut atoms = Vec::with_capacity(pairs.len());
        let mut masses = Vec::with_capacity(pairs.len());
        let mut i = 0;
        while i < pairs.len() {
            let mut j = i + 1;
            while j < pairs.len() && pairs[j].0 - pairs[j - 1].0 < ATOM_MERGE_TOL {
                j += 1;
            }
            if j == i + 1 {
                atoms.push(pairs[i].0);
                masses.push(pairs[i].1);
            } else {
                let mass: f64 = pairs[i..j].iter().map(|p| p.1).sum();
                let moment: f64 = pairs[i..j].iter().map(|p| p.0 * p.1).sum();
                atoms.push(moment / mass);
                masses.push(mass);
            }
            i = j;
        }
        Self { atoms, masses }
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    /// Number of atoms.
    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.atoms.iter().zip(&self.masses).map(|(x, m)| x * m).sum()
    }

    /// `μ((−∞, x])`.
    pub fn cdf(&self, x: f64) -> f64 {
        if x >= self.atoms[self.atoms.len() - 1] {
            return 1.0;
        }
        let k = self.atoms.partition_point(|a| *a <= x);
        self.masses[..k].iter().sum::<f64>().min(1.0)
    }

    /// The quantile function: one subinterval per atom, of length its mass.
    pub fn quantile(&self) -> StepQuantile {
        StepQuantile::from_parts(self.masses.clone(), self.atoms.clone())
    }

    pub fn second_moment(&self) -> Moment2 {
        Moment2(self.atoms.iter().zip(&self.masses).map(|(x, m)| m * x * x).sum())
    }

    /// Push-forward under `x ↦ x + t`.
    pub fn translate(&self, t: f64) -> Self {
        Self::merge_sorted(self.atoms.iter().map(|x| x + t).zip(self.masses.iter().copied()).collect())
    }
}

impl fmt::Display for DiscreteMeasure1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (x, m)) in self.atoms.iter().zip(&self.masses).enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{m}·δ({x})")?;
        }
        Ok(())
    }
}

/// Second moment `m₂²(μ) = ∫ |x|² dμ`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct Moment2(pub f64);

impl Moment2 {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// A piecewise-constant function on `(0,1)`.
///
/// Values need not be monotone: the same type carries signed sums of
/// quantile functions before projection.
#[derive(Debug, Clone, PartialEq)]
pub struct StepQuantile {
    lengths: Vec<f64>,
    values: Vec<f64>,
    breakpoints: Vec<f64>,
}

impl StepQuantile {
    /// Builds from interior breakpoints (strictly increasing in `(0,1)`) and
    /// one value per induced subinterval.
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.len() != breakpoints.len() + 1 {
            return Err(Error::PartitionMismatch(format!(
                "{} breakpoints need {} values, got {}",
                breakpoints.len(),
                breakpoints.len() + 1,
                values.len()
            )));
        }
        let mut prev = 0.0;
        let mut lengths = Vec::with_capacity(values.len());
        for &b in &breakpoints {
            if !(b > prev && b < 1.0) {
                return Err(Error::PartitionMismatch(format!(
                    "breakpoint {b} is not strictly increasing inside (0,1)"
                )));
            }
            lengths.push(b - prev);
            prev = b;
        }
        lengths.push(1.0 - prev);
        check_values(&values)?;
        Ok(Self { lengths, values, breakpoints })
    }

    /// Builds from positive subinterval lengths summing to one.
    pub fn from_lengths(lengths: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if lengths.len() != values.len() || lengths.is_empty() {
            return Err(Error::PartitionMismatch(format!("{} lengths and {} values", lengths.len(), values.len())));
        }
        if lengths.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(Error::PartitionMismatch("subinterval lengths must be positive".into()));
        }
        let total: f64 = lengths.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::PartitionMismatch(format!("subinterval lengths sum to {total}")));
        }
        check_values(&values)?;
        Ok(Self::from_parts(lengths, values))
    }

    pub(crate) fn from_parts(lengths: Vec<f64>, values: Vec<f64>) -> Self {
        debug_assert_eq!(lengths.len(), values.len());
        let mut breakpoints = Vec::with_capacity(lengths.len().saturating_sub(1));
        let mut acc = 0.0;
        for l in &lengths[..lengths.len() - 1] {
            acc += l;
            breakpoints.push(acc);
        }
        Self { lengths, values, breakpoints }
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Interior breakpoints `0 < b₁ < … < b_{n−1} < 1`.
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Index of the first strict decrease, if any.
    pub fn first_decrease(&self) -> Option<usize> {
        self.values.windows(2).position(|w| w[1] < w[0])
    }

    pub fn is_monotone(&self) -> bool {
        self.first_decrease().is_none()
    }

    /// Right-continuous point evaluation at `t ∈ (0,1)`.
    pub fn eval(&self, t: f64) -> f64 {
        self.values[self.breakpoints.partition_point(|b| *b <= t)]
    }

    /// `∫₀¹ X(t) dt`.
    pub fn mean(&self) -> f64 {
        self.lengths.iter().zip(&self.values).map(|(l, v)| l * v).sum()
    }

    /// The measure `X♯L¹` for a nondecreasing `X`.
    pub fn to_measure(&self) -> Result<DiscreteMeasure1D> {
        if let Some(i) = self.first_decrease() {
            return Err(Error::NonMonotone { index: i, left: self.values[i], right: self.values[i + 1] });
        }
        Ok(DiscreteMeasure1D::merge_sorted(self.values.iter().copied().zip(self.lengths.iter().copied()).collect()))
    }
}

fn check_values(values: &[f64]) -> Result<()> {
    match values.iter().find(|v| !v.is_finite()) {
        Some(v) => Err(Error::InvalidInput(format!("non-finite quantile value {v}"))),
        None => Ok(()),
    }
}

/// A quantile function sampled at the midpoints `(i + ½)/m` of a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridQuantile {
    values: Vec<f64>,
}

impl GridQuantile {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidGrid(values.len()));
        }
        check_values(&values)?;
        Ok(Self { values })
    }

    pub(crate) fn from_values_unchecked(values: Vec<f64>) -> Self {
        Self { values }
    }

    /// Grid size `m`.
    pub fn size(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Midpoint of cell `i`.
    pub fn node(&self, i: usize) -> f64 {
        (i as f64 + 0.5) / self.values.len() as f64
    }

    /// Value of the cell containing `t`.
    pub fn eval(&self, t: f64) -> f64 {
        let m = self.values.len();
        let i = ((t * m as f64).floor().max(0.0) as usize).min(m - 1);
        self.values[i]
    }

    pub fn is_monotone(&self) -> bool {
        self.values.windows(2).all(|w| w[0] <= w[1])
    }

    /// The cellwise-constant function with `m` cells of length `1/m`.
    pub fn to_step(&self) -> StepQuantile {
        let m = self.values.len();
        StepQuantile::from_parts(vec![1.0 / m as f64; m], self.values.clone())
    }

    /// The discrete measure with mass `1/m` on every sample.
    pub fn to_measure(&self) -> Result<DiscreteMeasure1D> {
        self.to_step().to_measure()
    }
}

/// A law on ℝ given either exactly by its atoms or by a gridded quantile.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Law {
    Discrete(DiscreteMeasure1D),
    Grid(GridQuantile),
}

impl Law {
    pub fn second_moment(&self) -> Moment2 {
        match self {
            Law::Discrete(m) => m.second_moment(),
            Law::Grid(g) => {
                let m = g.size() as f64;
                Moment2(g.values().iter().map(|v| v * v).sum::<f64>() / m)
            }
        }
    }

    pub fn as_discrete(&self) -> Option<&DiscreteMeasure1D> {
        match self {
            Law::Discrete(m) => Some(m),
            Law::Grid(_) => None,
        }
    }

    pub fn as_grid(&self) -> Option<&GridQuantile> {
        match self {
            Law::Grid(g) => Some(g),
            Law::Discrete(_) => None,
        }
    }

    /// Converts to an atomic measure (grid samples become atoms of mass `1/m`).
    pub fn to_measure(&self) -> Result<DiscreteMeasure1D> {
        match self {
            Law::Discrete(m) => Ok(m.clone()),
            Law::Grid(g) => g.to_measure(),
        }
    }
}

impl From<DiscreteMeasure1D> for Law {
    fn from(m: DiscreteMeasure1D) -> Self {
        Law::Discrete(m)
    }
}

impl From<GridQuantile> for Law {
    fn from(g: GridQuantile) -> Self {
        Law::Grid(g)
    }
}

/// Anything that can be viewed as a step function on `(0,1)`.
pub trait HasQuantile {
    fn step_quantile(&self) -> StepQuantile;
}

impl HasQuantile for DiscreteMeasure1D {
    fn step_quantile(&self) -> StepQuantile {
        self.quantile()
    }
}

impl HasQuantile for StepQuantile {
    fn step_quantile(&self) -> StepQuantile {
        self.clone()
    }
}

impl HasQuantile for GridQuantile {
    fn step_quantile(&self) -> StepQuantile {
        self.to_step()
    }
}

impl HasQuantile for Law {
    fn step_quantile(&self) -> StepQuantile {
        match self {
            Law::Discrete(m) => m.quantile(),
            Law::Grid(g) => g.to_step(),
        }
    }
}

/// Several step functions written on one common partition of `(0,1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Refinement {
    pub lengths: Vec<f64>,
    /// `values[j][k]` is the value of the `j`-th input on subinterval `k`.
    pub values: Vec<Vec<f64>>,
}

/// Common refinement of the partitions of all inputs.
///
/// Breakpoints within [`BREAKPOINT_TOL`] of each other are identified; each
/// input is then evaluated at the midpoint of every refined subinterval.
pub fn common_refinement(qs: &[&StepQuantile]) -> Refinement {
    assert!(!qs.is_empty(), "refinement needs at least one function");
    if qs.iter().all(|q| q.lengths == qs[0].lengths) {
        return Refinement { lengths: qs[0].lengths.clone(), values: qs.iter().map(|q| q.values.clone()).collect() };
    }
    let edges = refined_edges(qs.iter().copied());
    let lengths: Vec<f64> = edges.windows(2).map(|w| w[1] - w[0]).collect();
    let mids = midpoints(&edges);
    let values = qs.iter().map(|q| mids.iter().map(|&t| q.eval(t)).collect()).collect();
    Refinement { lengths, values }
}

/// Sorted edges `0 = e₀ < e₁ < … < 1` of the common refinement, with
/// breakpoints closer than [`BREAKPOINT_TOL`] identified.
pub(crate) fn refined_edges<'a>(qs: impl Iterator<Item = &'a StepQuantile>) -> Vec<f64> {
    let mut cuts: Vec<f64> = qs.flat_map(|q| q.breakpoints.iter().copied()).collect();
    cuts.sort_by(f64::total_cmp);
    let mut edges = Vec::with_capacity(cuts.len() + 2);
    edges.push(0.0);
    for c in cuts {
        if c - edges[edges.len() - 1] >= BREAKPOINT_TOL && 1.0 - c >= BREAKPOINT_TOL {
            edges.push(c);
        }
    }
    edges.push(1.0);
    edges
}

pub(crate) fn midpoints(edges: &[f64]) -> Vec<f64> {
    edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
}

impl StepQuantile {
    /// Calls `f(k, value)` for every increasing evaluation point `points[k]`.
    pub(crate) fn for_each_at(&self, points: &[f64], mut f: impl FnMut(usize, f64)) {
        let mut cursor = 0;
        for (k, &t) in points.iter().enumerate() {
            while cursor < self.breakpoints.len() && self.breakpoints[cursor] <= t {
                cursor += 1;
            }
            f(k, self.values[cursor]);
        }
    }
}

/// `‖X_a − X_b‖²` in `L²(0,1)` on the common refinement.
pub fn l2_distance_squared(a: &StepQuantile, b: &StepQuantile) -> f64 {
    let r = common_refinement(&[a, b]);
    r.lengths.iter().zip(r.values[0].iter().zip(&r.values[1])).map(|(l, (x, y))| l * (x - y) * (x - y)).sum()
}

/// Squared quadratic Wasserstein distance between two laws on ℝ.
pub fn w2_squared<A: HasQuantile + ?Sized, B: HasQuantile + ?Sized>(a: &A, b: &B) -> f64 {
    l2_distance_squared(&a.step_quantile(), &b.step_quantile())
}

/// Quadratic Wasserstein distance, computed as the L² distance of quantile
/// functions (the monotone coupling is optimal on ℝ).
pub fn w2_1d<A: HasQuantile + ?Sized, B: HasQuantile + ?Sized>(a: &A, b: &B) -> f64 {
    w2_squared(a, b).sqrt()
}

pub fn cdf(measure: &DiscreteMeasure1D, x: f64) -> f64 {
    measure.cdf(x)
}

pub fn quantile_of(measure: &DiscreteMeasure1D) -> StepQuantile {
    measure.quantile()
}

pub fn measure_of(q: &StepQuantile) -> Result<DiscreteMeasure1D> {
    q.to_measure()
}

pub fn second_moment(measure: &DiscreteMeasure1D) -> Moment2 {
    measure.second_moment()
}

/// Samples a continuous quantile function at the midpoints of an `m`-cell grid.
pub fn grid_sample(q: impl Fn(f64) -> f64, m: usize) -> Result<GridQuantile> {
    if m < 2 {
        return Err(Error::InvalidGrid(m));
    }
    let values: Vec<f64> = (0..m).map(|i| q((i as f64 + 0.5) / m as f64)).collect();
    check_values(&values)?;
    Ok(GridQuantile::from_values_unchecked(values))
}

/// Quantile of the standard normal distribution.
pub fn standard_normal_quantile(p: f64) -> f64 {
    use statrs::distribution::{ContinuousCDF, Normal};
    Normal::standard().inverse_cdf(p)
}

/// Parametric laws that are resolved to a [`GridQuantile`] on demand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parametric {
    Gaussian { mean: f64, std: f64 },
    Uniform { a: f64, b: f64 },
}

impl Parametric {
    pub fn quantile(&self, p: f64) -> f64 {
        match *self {
            Parametric::Gaussian { mean, std } => mean + std * standard_normal_quantile(p),
            Parametric::Uniform { a, b } => a + (b - a) * p,
        }
    }

    pub fn grid(&self, m: usize) -> Result<GridQuantile> {
        match *self {
            Parametric::Gaussian { std, .. } if !(std > 0.0) => {
                Err(Error::InvalidInput(format!("gaussian std must be positive, got {std}")))
            }
            Parametric::Uniform { a, b } if !(b >= a) => {
                Err(Error::InvalidInput(format!("uniform needs a <= b, got [{a}, {b}]")))
            }
            p => grid_sample(|t| p.quantile(t), m),
        }
    }
}
