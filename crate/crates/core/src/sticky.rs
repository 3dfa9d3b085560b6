//! One-dimensional sticky particle dynamics.
//!
//! For discrete initial data the quantile function of the density at time `t`
//! is `X_t = P_K(X₀ + t V₀)`, evaluated directly at any `t` without time
//! stepping. Before the first collision `s`, `X_s = X₀ + s V₀`, so `ρ_t` for
//! `t > s` is also the signed barycenter of `ρ₀` (weight `1 − t/s`) and `ρ_s`
//! (weight `t/s`).

use serde::{Deserialize, Serialize};

use crate::bary1d::{barycenter, SignedFamily};
use crate::error::{Error, Result};
use crate::isotonic::pava_in_place;
use crate::measures::{DiscreteMeasure1D, Law, StepQuantile, ATOM_MERGE_TOL, MASS_TOL};

/// Positions, velocities and masses of finitely many particles, sorted by
/// position with coincident particles pre-merged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticleState {
    positions: Vec<f64>,
    velocities: Vec<f64>,
    masses: Vec<f64>,
}

impl ParticleState {
    /// Validates and normalizes the state.
    ///
    /// Particles sharing a position (within [`ATOM_MERGE_TOL`]) are merged
    /// into one carrying their total mass and mass-weighted velocity, which
    /// is what the dynamics would do on contact.
    pub fn new(positions: Vec<f64>, velocities: Vec<f64>, masses: Vec<f64>) -> Result<Self> {
        let n = positions.len();
        if n == 0 || velocities.len() != n || masses.len() != n {
            return Err(Error::InvalidInput(format!(
                "state needs equal nonzero lengths, got {} / {} / {}",
                n,
                velocities.len(),
                masses.len()
            )));
        }
        if positions.iter().chain(&velocities).any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("positions and velocities must be finite".into()));
        }
        if masses.iter().any(|m| !(m.is_finite() && *m > 0.0)) {
            return Err(Error::InvalidMeasure("particle masses must be positive".into()));
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidMeasure(format!("particle masses sum to {total}")));
        }

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| positions[a].total_cmp(&positions[b]));
        let (mut xs, mut vs, mut ms) = (Vec::new(), Vec::new(), Vec::new());
        let mut i = 0;
        while i < n {
            let mut j = i + 1;
            while j < n && positions[order[j]] - positions[order[j - 1]] < ATOM_MERGE_TOL {
                j += 1;
            }
            let group = &order[i..j];
            if group.len() == 1 {
                let k = group[0];
                xs.push(positions[k]);
                vs.push(velocities[k]);
                ms.push(masses[k]);
            } else {
                let m: f64 = group.iter().map(|&k| masses[k]).sum();
                xs.push(group.iter().map(|&k| masses[k] * positions[k]).sum::<f64>() / m);
                vs.push(group.iter().map(|&k| masses[k] * velocities[k]).sum::<f64>() / m);
                ms.push(m);
            }
            i = j;
        }
        Ok(Self { positions: xs, velocities: vs, masses: ms })
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn velocities(&self) -> &[f64] {
        &self.velocities
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// `ρ₀ = Σ mᵢ δ_{xᵢ}`.
    pub fn initial_measure(&self) -> DiscreteMeasure1D {
        self.quantile_at(0.0).to_measure().expect("sorted positions")
    }

    /// `Σ mᵢ (xᵢ + t vᵢ)`, the free-flight center of mass.
    pub fn center_of_mass(&self, t: f64) -> f64 {
        self.positions.iter().zip(&self.velocities).zip(&self.masses).map(|((x, v), m)| m * (x + t * v)).sum()
    }

    /// `X_t = P_K(X₀ + t V₀)` on the cumulative-mass partition.
    pub fn quantile_at(&self, t: f64) -> StepQuantile {
        let mut values: Vec<f64> = self.positions.iter().zip(&self.velocities).map(|(x, v)| x + t * v).collect();
        pava_in_place(&mut values, &self.masses);
        StepQuantile::from_parts(self.masses.clone(), values)
    }
}

/// Density `ρ_t` of the sticky evolution at time `t ≥ 0`.
pub fn evolve(state: &ParticleState, t: f64) -> Result<DiscreteMeasure1D> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidInput(format!("time must be nonnegative, got {t}")));
    }
    state.quantile_at(t).to_measure()
}

/// First time at which two neighbouring particles meet under free flight,
/// or `+∞` if they never do.
pub fn first_collision_time(state: &ParticleState) -> f64 {
    state
        .positions
        .windows(2)
        .zip(state.velocities.windows(2))
        .filter(|(_, v)| v[0] > v[1])
        .map(|(x, v)| (x[1] - x[0]) / (v[0] - v[1]))
        .fold(f64::INFINITY, f64::min)
}

/// Both sides of the extrapolation identity at `t > s`:
/// `(evolve(t), barycenter([(1 − t/s, ρ₀), (t/s, ρ_s)]))`.
///
/// Requires `0 < s ≤` the first collision time.
pub fn extrapolation_identity(state: &ParticleState, s: f64, t: f64) -> Result<(DiscreteMeasure1D, DiscreteMeasure1D)> {
    if !(s > 0.0) || !(t > s) || !t.is_finite() {
        return Err(Error::InvalidInput(format!("need 0 < s < t, got s = {s}, t = {t}")));
    }
    let collision = first_collision_time(state);
    if s > collision {
        return Err(Error::CollisionBeforeS { s, collision });
    }
    let lhs = evolve(state, t)?;
    let rho_s = evolve(state, s)?;
    let ratio = t / s;
    let family =
        SignedFamily::new(vec![(1.0 - ratio, Law::Discrete(state.initial_measure())), (ratio, Law::Discrete(rho_s))])?;
    let rhs = barycenter(&family).to_measure()?;
    Ok((lhs, rhs))
}
