//! Generalized Wasserstein barycenters under signed weightings.
//!
//! Given probability measures `ν₁, …, νₙ` and real weights `λᵢ` summing to one
//! (some possibly negative), the barycenter minimizes
//!
//! ```text
//! E(μ) = Σ λᵢ W₂²(μ, νᵢ)
//! ```
//!
//! On the real line the minimizer is unique and explicit: sum the quantile
//! functions with the signed weights and project the result onto the cone of
//! nondecreasing functions ([`isotonic`], [`bary1d`]). The same projection
//! solves the one-dimensional sticky particle system ([`sticky`]). In `ℝ^d`
//! for `d ≤ 3` the energy is evaluated with an exact transportation simplex
//! ([`otd`]), which also drives a planar non-uniqueness example.
//! [`consistency`] checks empirically that barycenters of sampled families
//! converge to the barycenter of the population.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bary1d;
pub mod consistency;
mod error;
pub mod isotonic;
pub mod measures;
pub mod otd;
pub mod random;
pub mod sticky;

pub use bary1d::{
    argmin_certificate, barycenter, barycenter_quantile, energy, family_stats, gauss_dirac_params, lower_bound,
    stability_gap, weighted_quantile_sum, BoundCheck, FamilyStats, GaussDirac, GaussianParams, SignedFamily,
};
pub use error::{Error, Result};
pub use isotonic::{distance_l2, project_envelope, project_pava, WeightedSteps};
pub use measures::{
    cdf, grid_sample, measure_of, quantile_of, second_moment, w2_1d, DiscreteMeasure1D, GridQuantile, HasQuantile, Law,
    Moment2, StepQuantile,
};
pub use otd::{
    counterexample_family, coupling_remainder, energy_rd, solve_w2, DiscreteMeasureRd, SignedFamilyRd, Transport,
    TransportPlan,
};
pub use sticky::{evolve, extrapolation_identity, first_collision_time, ParticleState};
