//! Exact optimal transport between finitely supported measures in `ℝ^d`,
//! `d ≤ 3`, and the signed energy built on it.

mod counterexample;
pub mod simplex;

pub use counterexample::{
    counterexample_family, counterexample_report, diagonal_energy_bound, eta, negated_swap, random_diagonal_measure,
    swap, symmetry_energy_check, CounterexampleReport, SymmetryRow,
};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::{ATOM_MERGE_TOL, MASS_TOL};

/// Largest combined number of atoms accepted by [`solve_w2`].
pub const MAX_ATOMS: usize = 2000;

/// Tolerance on the marginals of a returned plan.
pub const MARGINAL_TOL: f64 = 1e-10;

/// Lowest reduced cost accepted as a certificate of optimality.
pub const DUAL_TOL: f64 = -1e-9;

/// Finitely supported probability measure on `ℝ^d`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteMeasureRd {
    dim: usize,
    /// Row-major `len × dim` coordinates.
    coords: Vec<f64>,
    masses: Vec<f64>,
}

impl DiscreteMeasureRd {
    /// Atoms closer than [`ATOM_MERGE_TOL`] are merged at their mass-weighted mean.
    pub fn new(dim: usize, atoms: Vec<Vec<f64>>, masses: Vec<f64>) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidMeasure(format!("dimension {dim} is outside 1..=3")));
        }
        if atoms.len() != masses.len() || atoms.is_empty() {
            return Err(Error::InvalidMeasure(format!("{} atoms and {} masses", atoms.len(), masses.len())));
        }
        if let Some(a) = atoms.iter().find(|a| a.len() != dim) {
            return Err(Error::DimensionMismatch { left: dim, right: a.len() });
        }
        if atoms.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidMeasure("non-finite coordinate".into()));
        }
        if let Some(m) = masses.iter().find(|m| !(m.is_finite() && **m > 0.0)) {
            return Err(Error::InvalidMeasure(format!("mass {m} is not positive")));
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidMeasure(format!("masses sum to {total}")));
        }
        let noise = masses.len() as f64 * f64::EPSILON;
        let masses: Vec<f64> =
            if (total - 1.0).abs() <= noise { masses } else { masses.iter().map(|m| m / total).collect() };
        Ok(Self::merged(dim, atoms, masses))
    }

    pub fn dirac(point: Vec<f64>) -> Result<Self> {
        Self::new(point.len(), vec![point], vec![1.0])
    }

    /// Equal masses on the given atoms.
    pub fn uniform(dim: usize, atoms: Vec<Vec<f64>>) -> Result<Self> {
        let n = atoms.len().max(1);
        Self::new(dim, atoms, vec![1.0 / n as f64; n])
    }

    fn merged(dim: usize, atoms: Vec<Vec<f64>>, masses: Vec<f64>) -> Self {
        let mut groups: Vec<(Vec<f64>, f64, Vec<f64>)> = Vec::new(); // (representative, mass, Σ m·x)
        for (a, m) in atoms.into_iter().zip(masses) {
            match groups.iter_mut().find(|g| dist2(&g.0, &a).sqrt() < ATOM_MERGE_TOL) {
                Some(g) => {
                    g.1 += m;
                    for (s, x) in g.2.iter_mut().zip(&a) {
                        *s += m * x;
                    }
                }
                None => {
                    let first = a.iter().map(|x| m * x).collect();
                    groups.push((a, m, first));
                }
            }
        }
        let mut coords = Vec::with_capacity(groups.len() * dim);
        let mut out_masses = Vec::with_capacity(groups.len());
        for (rep, mass, moment) in groups {
            if moment.iter().zip(&rep).all(|(s, x)| *s == mass * x) {
                coords.extend_from_slice(&rep);
            } else {
                coords.extend(moment.iter().map(|s| s / mass));
            }
            out_masses.push(mass);
        }
        Self { dim, coords, masses: out_masses }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn atom(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn atoms(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    /// `∫ |x|² dμ`.
    pub fn second_moment(&self) -> f64 {
        self.atoms().zip(&self.masses).map(|(a, m)| m * a.iter().map(|x| x * x).sum::<f64>()).sum()
    }

    /// Push-forward under a map of `ℝ^d` into itself.
    pub fn push_forward(&self, map: impl Fn(&[f64]) -> Vec<f64>) -> Self {
        let atoms: Vec<Vec<f64>> = self.atoms().map(&map).collect();
        assert!(atoms.iter().all(|a| a.len() == self.dim), "map must preserve dimension");
        Self::merged(self.dim, atoms, self.masses.clone())
    }
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// A coupling between two discrete measures.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransportPlan {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl TransportPlan {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.cols + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.entries.chunks_exact(self.cols).map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.cols];
        for row in self.entries.chunks_exact(self.cols) {
            for (acc, x) in s.iter_mut().zip(row) {
                *acc += x;
            }
        }
        s
    }

    /// Largest deviation of either marginal from the given masses.
    pub fn marginal_error(&self, source: &[f64], target: &[f64]) -> f64 {
        let rows = self.row_sums().iter().zip(source).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let cols = self.col_sums().iter().zip(target).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        rows.max(cols)
    }

    /// Nonzero entries as `(i, j, mass)`.
    pub fn support(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.entries.iter().enumerate().filter(|(_, x)| **x > 0.0).map(move |(k, x)| (k / self.cols, k % self.cols, *x))
    }
}

/// Result of [`solve_w2`].
#[derive(Debug, Clone, PartialEq)]
pub struct Transport {
    /// `W₂²`, re-evaluated on the returned plan.
    pub cost: f64,
    pub plan: TransportPlan,
    /// Dual potentials certifying optimality.
    pub row_potentials: Vec<f64>,
    pub col_potentials: Vec<f64>,
    /// Squared distances, row-major.
    pub costs: Vec<f64>,
    pub pivots: usize,
}

impl Transport {
    pub fn w2(&self) -> f64 {
        self.cost.max(0.0).sqrt()
    }

    /// Smallest reduced cost `c_ij − u_i − v_j`; nonnegative at optimality.
    pub fn min_reduced_cost(&self) -> f64 {
        let m = self.plan.cols;
        self.costs
            .iter()
            .enumerate()
            .map(|(k, c)| c - self.row_potentials[k / m] - self.col_potentials[k % m])
            .fold(f64::INFINITY, f64::min)
    }

    /// Marginal feasibility and dual optimality of the plan.
    pub fn is_certified(&self, a: &DiscreteMeasureRd, b: &DiscreteMeasureRd) -> bool {
        self.plan.marginal_error(a.masses(), b.masses()) <= MARGINAL_TOL && self.min_reduced_cost() >= DUAL_TOL
    }
}

/// Exact squared quadratic Wasserstein distance and an optimal plan.
pub fn solve_w2(a: &DiscreteMeasureRd, b: &DiscreteMeasureRd) -> Result<Transport> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch { left: a.dim, right: b.dim });
    }
    let atoms = a.len() + b.len();
    if atoms > MAX_ATOMS {
        return Err(Error::TooLarge { atoms, cap: MAX_ATOMS });
    }
    let costs: Vec<f64> = a.atoms().flat_map(|x| b.atoms().map(move |y| dist2(x, y))).collect();
    let sol = simplex::solve(a.masses(), b.masses(), &costs)?;
    let cost = sol.flows.iter().zip(&costs).map(|(f, c)| f * c).sum();
    Ok(Transport {
        cost,
        plan: TransportPlan { rows: a.len(), cols: b.len(), entries: sol.flows },
        row_potentials: sol.u,
        col_potentials: sol.v,
        costs,
        pivots: sol.pivots,
    })
}

/// `R(ν, μ) = W₂²(ν, μ) − m₂²(ν) − m₂²(μ)`, the minimal value of `∫ −2 x·y dγ`.
pub fn coupling_remainder(a: &DiscreteMeasureRd, b: &DiscreteMeasureRd) -> Result<f64> {
    Ok(solve_w2(a, b)?.cost - a.second_moment() - b.second_moment())
}

/// Finite signed weighting of measures in `ℝ^d`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignedFamilyRd {
    weights: Vec<f64>,
    measures: Vec<DiscreteMeasureRd>,
}

impl SignedFamilyRd {
    pub fn new(entries: Vec<(f64, DiscreteMeasureRd)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidInput("a family needs at least one entry".into()));
        }
        let (weights, measures): (Vec<f64>, Vec<DiscreteMeasureRd>) = entries.into_iter().unzip();
        let dim = measures[0].dim;
        if let Some(m) = measures.iter().find(|m| m.dim != dim) {
            return Err(Error::DimensionMismatch { left: dim, right: m.dim });
        }
        let sum: f64 = weights.iter().sum();
        if !sum.is_finite() || (sum - 1.0).abs() > crate::bary1d::WEIGHT_SUM_TOL {
            return Err(Error::WeightSumInvalid { sum });
        }
        Ok(Self { weights, measures })
    }

    pub fn dim(&self) -> usize {
        self.measures[0].dim
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn measures(&self) -> &[DiscreteMeasureRd] {
        &self.measures
    }
}

/// `E(μ) = Σ λᵢ W₂²(μ, νᵢ)` with exact transport costs.
pub fn energy_rd(family: &SignedFamilyRd, mu: &DiscreteMeasureRd) -> Result<f64> {
    let mut e = 0.0;
    for (w, nu) in family.weights.iter().zip(&family.measures) {
        e += w * solve_w2(mu, nu)?.cost;
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(p: &[f64]) -> DiscreteMeasureRd {
        DiscreteMeasureRd::dirac(p.to_vec()).unwrap()
    }

    #[test]
    fn dirac_pair() {
        let t = solve_w2(&pt(&[1.0, 2.0]), &pt(&[-1.0, 0.5])).unwrap();
        assert_eq!(t.cost, 4.0 + 2.25);
        assert_eq!(t.plan.entries(), &[1.0]);
    }

    #[test]
    fn degenerate_cross() {
        let a = DiscreteMeasureRd::uniform(2, vec![vec![-1.0, -1.0], vec![1.0, 1.0]]).unwrap();
        let b = DiscreteMeasureRd::uniform(2, vec![vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap();
        let t = solve_w2(&a, &b).unwrap();
        assert_eq!(t.cost, 4.0);
        assert!(t.is_certified(&a, &b));
    }

    #[test]
    fn remainder_examples() {
        assert_eq!(coupling_remainder(&pt(&[0.0]), &pt(&[0.0])).unwrap(), 0.0);
        let r = coupling_remainder(&pt(&[1.0, 2.0, -1.0]), &pt(&[0.5, -1.0, 3.0])).unwrap();
        assert!((r - (-2.0 * (0.5 - 2.0 - 3.0))).abs() < 1e-12);
        let sym = DiscreteMeasureRd::uniform(1, vec![vec![-1.0], vec![1.0]]).unwrap();
        assert_eq!(coupling_remainder(&sym, &sym).unwrap(), -2.0);
    }

    #[test]
    fn errors() {
        assert_eq!(solve_w2(&pt(&[0.0]), &pt(&[0.0, 0.0])).unwrap_err().code(), "DimensionMismatch");
        let big = DiscreteMeasureRd::uniform(1, (0..1001).map(|i| vec![i as f64]).collect()).unwrap();
        let big2 = DiscreteMeasureRd::uniform(1, (0..1000).map(|i| vec![i as f64 + 0.5]).collect()).unwrap();
        assert_eq!(solve_w2(&big, &big2).unwrap_err().code(), "TooLarge");
        assert!(DiscreteMeasureRd::new(4, vec![vec![0.0; 4]], vec![1.0]).is_err());
        assert!(DiscreteMeasureRd::new(2, vec![vec![0.0]], vec![1.0]).is_err());
    }

    #[test]
    fn duplicates_merge() {
        let m = DiscreteMeasureRd::new(2, vec![vec![1.0, 1.0], vec![0.0, 0.0], vec![1.0, 1.0]], vec![0.25, 0.5, 0.25])
            .unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m.atom(0), &[1.0, 1.0]);
        assert_eq!(m.masses(), &[0.5, 0.5]);
    }

    #[test]
    fn family_validation() {
        let err = SignedFamilyRd::new(vec![(0.5, pt(&[0.0, 0.0]))]).unwrap_err();
        assert_eq!(err.code(), "WeightSumInvalid");
        let err = SignedFamilyRd::new(vec![(0.5, pt(&[0.0, 0.0])), (0.5, pt(&[0.0]))]).unwrap_err();
        assert_eq!(err.code(), "DimensionMismatch");
    }
}
