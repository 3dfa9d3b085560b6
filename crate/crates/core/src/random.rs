//! Seeded random instances shared by property tests, the acceptance suite and
//! benchmarks.

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::bary1d::SignedFamily;
use crate::isotonic::WeightedSteps;
use crate::measures::DiscreteMeasure1D;
use crate::otd::DiscreteMeasureRd;
use crate::sticky::ParticleState;

/// Flat Dirichlet sample of length `n`.
pub fn dirichlet(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).map(|x: f64| x.max(1e-6)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

/// Random atomic measure with `1..=max_atoms` atoms in `[-range, range]`.
pub fn measure_1d(rng: &mut impl Rng, max_atoms: usize, range: f64) -> DiscreteMeasure1D {
    let n = rng.random_range(1..=max_atoms);
    let atoms = (0..n).map(|_| rng.random_range(-range..=range)).collect();
    DiscreteMeasure1D::new(atoms, dirichlet(rng, n)).expect("valid random measure")
}

/// Random atomic measure with `n` atoms and equal masses.
pub fn uniform_measure_1d(rng: &mut impl Rng, n: usize, range: f64) -> DiscreteMeasure1D {
    DiscreteMeasure1D::uniform((0..n).map(|_| rng.random_range(-range..=range)).collect())
        .expect("valid random measure")
}

/// Random signed weights: raw draws in `[-3, 4]` rescaled to sum to one.
/// Draws whose raw sum is within 0.5 of zero are rejected so the rescaled
/// weights stay bounded.
pub fn signed_weights(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    loop {
        let raw: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..=4.0)).collect();
        let total: f64 = raw.iter().sum();
        if total.abs() >= 0.5 {
            return raw.into_iter().map(|w| w / total).collect();
        }
    }
}

/// Random family with `2..=max_entries` atomic entries.
pub fn signed_family(rng: &mut impl Rng, max_entries: usize, max_atoms: usize, range: f64) -> SignedFamily {
    let n = rng.random_range(2..=max_entries);
    let weights = signed_weights(rng, n);
    let entries = weights.into_iter().map(|w| (w, measure_1d(rng, max_atoms, range))).collect();
    SignedFamily::discrete(entries).expect("weights sum to one")
}

/// Random step function with `1..=max_len` Dirichlet-weighted cells and values in `[-10, 10]`.
pub fn weighted_steps(rng: &mut impl Rng, max_len: usize) -> WeightedSteps {
    let n = rng.random_range(1..=max_len);
    let weights = dirichlet(rng, n);
    weighted_steps_on(rng, weights)
}

/// Random values in `[-10, 10]` on a given partition.
pub fn weighted_steps_on(rng: &mut impl Rng, weights: Vec<f64>) -> WeightedSteps {
    let values = (0..weights.len()).map(|_| rng.random_range(-10.0..=10.0)).collect();
    WeightedSteps::new(values, weights).expect("valid steps")
}

/// Random nondecreasing step function on a given partition.
pub fn monotone_steps_on(rng: &mut impl Rng, weights: Vec<f64>) -> WeightedSteps {
    let mut values: Vec<f64> = (0..weights.len()).map(|_| rng.random_range(-10.0..=10.0)).collect();
    values.sort_by(f64::total_cmp);
    WeightedSteps::new(values, weights).expect("valid steps")
}

/// Random particle state with `min..=max` particles.
pub fn particle_state(rng: &mut impl Rng, min: usize, max: usize) -> ParticleState {
    let n = rng.random_range(min..=max);
    let positions = (0..n).map(|_| rng.random_range(-5.0..=5.0)).collect();
    let velocities = (0..n).map(|_| rng.random_range(-2.0..=2.0)).collect();
    ParticleState::new(positions, velocities, dirichlet(rng, n)).expect("valid state")
}

/// Random measure in `ℝ^dim` with `1..=max_atoms` atoms in `[-range, range]^dim`.
pub fn measure_rd(rng: &mut impl Rng, dim: usize, max_atoms: usize, range: f64) -> DiscreteMeasureRd {
    let n = rng.random_range(1..=max_atoms);
    let atoms = (0..n).map(|_| (0..dim).map(|_| rng.random_range(-range..=range)).collect()).collect();
    DiscreteMeasureRd::new(dim, atoms, dirichlet(rng, n)).expect("valid random measure")
}

/// Lifts a one-dimensional measure to [`DiscreteMeasureRd`] with `dim = 1`.
pub fn lift_1d(mu: &DiscreteMeasure1D) -> DiscreteMeasureRd {
    DiscreteMeasureRd::new(1, mu.atoms().iter().map(|x| vec![*x]).collect(), mu.masses().to_vec())
        .expect("valid measure")
}
