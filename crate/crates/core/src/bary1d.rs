//! Signed barycenters on the real line.
//!
//! For a family `(λᵢ, νᵢ)` with `Σ λᵢ = 1` the minimizer of
//! `E(μ) = Σ λᵢ W₂²(μ, νᵢ)` is unique and its quantile function is the
//! projection of `Σ λᵢ X_{νᵢ}` onto the nondecreasing cone.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::isotonic::{pava_in_place, WeightedSteps};
use crate::measures::{
    common_refinement, midpoints, refined_edges, w2_1d, w2_squared, DiscreteMeasure1D, GridQuantile, HasQuantile, Law,
    StepQuantile,
};

/// Allowed deviation of `Σ λᵢ` from one. Never silently renormalized.
pub const WEIGHT_SUM_TOL: f64 = 1e-10;

/// Finite signed weighting `λ = Σ λᵢ δ_{νᵢ}` of laws on ℝ.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignedFamily {
    weights: Vec<f64>,
    laws: Vec<Law>,
}

impl SignedFamily {
    pub fn new(entries: Vec<(f64, Law)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidInput("a family needs at least one entry".into()));
        }
        let (weights, laws): (Vec<f64>, Vec<Law>) = entries.into_iter().unzip();
        if let Some(w) = weights.iter().find(|w| !w.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite weight {w}")));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::WeightSumInvalid { sum });
        }
        Ok(Self { weights, laws })
    }

    /// Convenience constructor for purely atomic families.
    pub fn discrete(entries: Vec<(f64, DiscreteMeasure1D)>) -> Result<Self> {
        Self::new(entries.into_iter().map(|(w, m)| (w, Law::Discrete(m))).collect())
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn laws(&self) -> &[Law] {
        &self.laws
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &Law)> {
        self.weights.iter().copied().zip(&self.laws)
    }

    /// `λ⁺(X)`.
    pub fn positive_mass(&self) -> f64 {
        self.weights.iter().filter(|w| **w > 0.0).sum()
    }

    /// `λ⁻(X)`.
    pub fn negative_mass(&self) -> f64 {
        -self.weights.iter().filter(|w| **w < 0.0).sum::<f64>()
    }

    /// Grid size of the common representation, or `None` when every entry is atomic.
    pub fn grid_size(&self) -> Option<usize> {
        self.laws.iter().filter_map(|l| l.as_grid().map(GridQuantile::size)).max()
    }

    /// Merges entries carrying identical laws, summing their weights.
    /// Entries whose merged weight is exactly zero are dropped.
    pub fn collapse(&self) -> Self {
        let mut weights: Vec<f64> = Vec::new();
        let mut laws: Vec<Law> = Vec::new();
        for (w, law) in self.iter() {
            match laws.iter().position(|l| l == law) {
                Some(i) => weights[i] += w,
                None => {
                    weights.push(w);
                    laws.push(law.clone());
                }
            }
        }
        let (weights, laws) = weights.into_iter().zip(laws).filter(|(w, _)| *w != 0.0).unzip();
        Self { weights, laws }
    }
}

/// Total variation and squared quadratic moment of `|λ|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FamilyStats {
    /// `M(|λ|) = Σ |λᵢ|`.
    pub total_variation: f64,
    /// `M₂²(|λ|) = Σ |λᵢ| m₂²(νᵢ)`.
    pub moment2: f64,
}

pub fn family_stats(family: &SignedFamily) -> FamilyStats {
    FamilyStats {
        total_variation: family.weights.iter().map(|w| w.abs()).sum(),
        moment2: family.iter().map(|(w, l)| w.abs() * l.second_moment().value()).sum(),
    }
}

/// `Σ λᵢ X_{νᵢ}` on the common partition, summed left to right.
///
/// Atomic families use the exact common refinement of their quantile
/// functions. As soon as one entry is gridded, every entry is evaluated on the
/// midpoints of the finest grid.
pub fn weighted_quantile_sum(family: &SignedFamily) -> WeightedSteps {
    match family.grid_size() {
        None => {
            let qs: Vec<StepQuantile> = family.laws.iter().map(Law::step_quantile).collect();
            let (lengths, mids) = if qs.iter().all(|q| q.lengths() == qs[0].lengths()) {
                let lengths = qs[0].lengths().to_vec();
                let edges: Vec<f64> =
                    std::iter::once(0.0).chain(qs[0].breakpoints().iter().copied()).chain([1.0]).collect();
                (lengths, midpoints(&edges))
            } else {
                let edges = refined_edges(qs.iter());
                (edges.windows(2).map(|w| w[1] - w[0]).collect(), midpoints(&edges))
            };
            let mut sum = vec![0.0; lengths.len()];
            for (w, q) in family.weights.iter().zip(&qs) {
                q.for_each_at(&mids, |k, v| sum[k] += w * v);
            }
            WeightedSteps::from_parts(sum, lengths)
        }
        Some(m) => {
            let nodes: Vec<f64> = (0..m).map(|i| (i as f64 + 0.5) / m as f64).collect();
            let mut sum = vec![0.0; m];
            for (w, law) in family.iter() {
                match law {
                    Law::Grid(g) if g.size() == m => {
                        for (s, v) in sum.iter_mut().zip(g.values()) {
                            *s += w * v;
                        }
                    }
                    Law::Grid(g) => {
                        for (s, t) in sum.iter_mut().zip(&nodes) {
                            *s += w * g.eval(*t);
                        }
                    }
                    Law::Discrete(mu) => {
                        let q = mu.quantile();
                        for (s, t) in sum.iter_mut().zip(&nodes) {
                            *s += w * q.eval(*t);
                        }
                    }
                }
            }
            WeightedSteps::from_parts(sum, vec![1.0 / m as f64; m])
        }
    }
}

/// Quantile function of the barycenter: the projected weighted sum.
pub fn barycenter_quantile(family: &SignedFamily) -> WeightedSteps {
    let (mut values, weights) = weighted_quantile_sum(family).into_parts();
    pava_in_place(&mut values, &weights);
    WeightedSteps::from_parts(values, weights)
}

/// The unique minimizer of `E` over `P₂(ℝ)`.
///
/// Returns an atomic measure for atomic families and a [`GridQuantile`] when
/// any entry is gridded.
pub fn barycenter(family: &SignedFamily) -> Law {
    let q = barycenter_quantile(family);
    match family.grid_size() {
        None => Law::Discrete(q.to_step_quantile().to_measure().expect("projected quantile is nondecreasing")),
        Some(_) => Law::Grid(GridQuantile::from_values_unchecked(q.into_parts().0)),
    }
}

/// `E(μ) = Σ λᵢ W₂²(μ, νᵢ)`. Negative values are legitimate.
pub fn energy<M: HasQuantile + ?Sized>(family: &SignedFamily, mu: &M) -> f64 {
    let q = mu.step_quantile();
    family.iter().map(|(w, law)| w * w2_squared(&q, law)).sum()
}

/// A two-sided bound `lhs ≤ rhs` (or `lhs ≥ rhs`, see the producing function).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundCheck {
    pub lhs: f64,
    pub rhs: f64,
}

/// Coercivity bound: `lhs = E(μ)`, `rhs = ½ m₂²(μ) − (1 + 2M) M₂²`; `lhs ≥ rhs`.
pub fn lower_bound<M: HasQuantile + ?Sized>(family: &SignedFamily, mu: &M) -> BoundCheck {
    let q = mu.step_quantile();
    let m2: f64 = q.lengths().iter().zip(q.values()).map(|(l, v)| l * v * v).sum();
    let stats = family_stats(family);
    BoundCheck { lhs: energy(family, &q), rhs: 0.5 * m2 - (1.0 + 2.0 * stats.total_variation) * stats.moment2 }
}

/// Stability under perturbation of the fixed measures:
/// `lhs = W₂(μ_a, μ_b)`, `rhs = Σ |λᵢ| W₂(aᵢ, bᵢ)`; `lhs ≤ rhs`.
pub fn stability_gap(a: &[DiscreteMeasure1D], b: &[DiscreteMeasure1D], weights: &[f64]) -> Result<BoundCheck> {
    if a.len() != b.len() || a.len() != weights.len() {
        return Err(Error::InvalidInput(format!(
            "lengths differ: {} measures, {} measures, {} weights",
            a.len(),
            b.len(),
            weights.len()
        )));
    }
    let fam_a = SignedFamily::discrete(weights.iter().copied().zip(a.iter().cloned()).collect())?;
    let fam_b = SignedFamily::discrete(weights.iter().copied().zip(b.iter().cloned()).collect())?;
    let lhs = w2_1d(&barycenter_quantile(&fam_a).to_step_quantile(), &barycenter_quantile(&fam_b).to_step_quantile());
    let rhs = weights.iter().zip(a.iter().zip(b)).map(|(w, (x, y))| w.abs() * w2_1d(x, y)).sum();
    Ok(BoundCheck { lhs, rhs })
}

/// Normal law `N(mean, std²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianParams {
    pub mean: f64,
    pub std: f64,
}

impl GaussianParams {
    pub fn new(mean: f64, std: f64) -> Result<Self> {
        if !(std > 0.0 && std.is_finite() && mean.is_finite()) {
            return Err(Error::InvalidInput(format!("invalid gaussian N({mean}, {std}²)")));
        }
        Ok(Self { mean, std })
    }

    pub fn quantile(&self, p: f64) -> f64 {
        self.mean + self.std * crate::measures::standard_normal_quantile(p)
    }

    pub fn grid(&self, m: usize) -> Result<GridQuantile> {
        crate::measures::grid_sample(|t| self.quantile(t), m)
    }
}

/// Parameters under which two Gaussians have a Dirac barycenter.
///
/// With `λ̄ = (σ₁ − σ₂)/σ₁` and `z̄ = (σ₁m₂ − σ₂m₁)/(σ₁ − σ₂)`, the narrower
/// Gaussian is the ordinary barycenter `(1 − λ̄)X₁ + λ̄ z̄`; solving for the
/// constant gives `z̄ = (1/λ̄) X₂ + ((λ̄ − 1)/λ̄) X₁`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussDirac {
    pub lambda_bar: f64,
    pub z_bar: f64,
}

impl GaussDirac {
    /// Weight carried by the narrower Gaussian `g2`: `1/λ̄ > 0`.
    pub fn weight_narrow(&self) -> f64 {
        1.0 / self.lambda_bar
    }

    /// Weight carried by the wider Gaussian `g1`: `(λ̄ − 1)/λ̄ < 0`.
    pub fn weight_wide(&self) -> f64 {
        (self.lambda_bar - 1.0) / self.lambda_bar
    }

    /// Gridded family whose barycenter is `δ_{z̄}`.
    pub fn family(&self, g1: &GaussianParams, g2: &GaussianParams, m: usize) -> Result<SignedFamily> {
        SignedFamily::new(vec![
            (self.weight_wide(), Law::Grid(g1.grid(m)?)),
            (self.weight_narrow(), Law::Grid(g2.grid(m)?)),
        ])
    }
}

pub fn gauss_dirac_params(g1: &GaussianParams, g2: &GaussianParams) -> Result<GaussDirac> {
    let (s1, s2) = (g1.std, g2.std);
    if s1 <= s2 {
        return Err(Error::StdOrder { s1, s2 });
    }
    Ok(GaussDirac { lambda_bar: (s1 - s2) / s1, z_bar: (s1 * g2.mean - s2 * g1.mean) / (s1 - s2) })
}

/// Slack allowed when comparing energies in [`argmin_certificate`].
pub const CERTIFICATE_TOL: f64 = 1e-9;

/// Randomized optimality check.
///
/// Perturbs the candidate quantile by i.i.d. uniform noise in `[−radius,
/// radius]` on the common refinement, projects back onto the monotone cone,
/// and reports whether no perturbation lowered the energy by more than
/// [`CERTIFICATE_TOL`].
pub fn argmin_certificate<M: HasQuantile + ?Sized>(
    family: &SignedFamily,
    candidate: &M,
    trials: usize,
    radius: f64,
    seed: u64,
) -> bool {
    let cand = candidate.step_quantile();
    let entries: Vec<StepQuantile> = family.laws.iter().map(Law::step_quantile).collect();
    let mut all: Vec<&StepQuantile> = vec![&cand];
    all.extend(entries.iter());
    let r = common_refinement(&all);
    let base = &r.values[0];
    let energy_of = |x: &[f64]| -> f64 {
        family
            .weights
            .iter()
            .zip(&r.values[1..])
            .map(|(w, nu)| {
                w * r.lengths.iter().zip(x.iter().zip(nu)).map(|(l, (a, b))| l * (a - b) * (a - b)).sum::<f64>()
            })
            .sum()
    };
    let e0 = energy_of(base);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = base.clone();
    for _ in 0..trials {
        for (xi, b) in x.iter_mut().zip(base) {
            *xi = b + rng.random_range(-radius..=radius);
        }
        pava_in_place(&mut x, &r.lengths);
        if e0 > energy_of(&x) + CERTIFICATE_TOL {
            return false;
        }
    }
    true
}
