//! A planar signed family whose energy has several minimizers.
//!
//! `E(μ) = −W₂²(μ, ν₀) + W₂²(μ, ν₁) + W₂²(μ, ν₂)` with `ν₀ = δ₀`,
//! `ν₁` uniform on `(±1, ±1)` and `ν₂` uniform on `(±1, ∓1)`. `E` is invariant
//! under the piecewise reflections [`swap`] and [`negated_swap`], every measure
//! on the diagonals `|x| = |y|` has energy at least 2, yet
//! `η = ½δ₍₀,₁₎ + ½δ₍₀,₋₁₎` has energy 1. A unique minimizer would be fixed by
//! both reflections and hence live on the diagonals, so it cannot be unique.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{energy_rd, DiscreteMeasureRd, SignedFamilyRd};
use crate::error::Result;

pub fn counterexample_family() -> SignedFamilyRd {
    let nu0 = DiscreteMeasureRd::dirac(vec![0.0, 0.0]).expect("valid");
    let nu1 = DiscreteMeasureRd::uniform(2, vec![vec![-1.0, -1.0], vec![1.0, 1.0]]).expect("valid");
    let nu2 = DiscreteMeasureRd::uniform(2, vec![vec![1.0, -1.0], vec![-1.0, 1.0]]).expect("valid");
    SignedFamilyRd::new(vec![(-1.0, nu0), (1.0, nu1), (1.0, nu2)]).expect("weights sum to one")
}

/// `η = ½δ₍₀,₁₎ + ½δ₍₀,₋₁₎`.
pub fn eta() -> DiscreteMeasureRd {
    DiscreteMeasureRd::uniform(2, vec![vec![0.0, 1.0], vec![0.0, -1.0]]).expect("valid")
}

/// `T`: swaps coordinates where `|x| > |y|`, identity elsewhere.
pub fn swap(p: &[f64]) -> Vec<f64> {
    if p[0].abs() > p[1].abs() {
        vec![p[1], p[0]]
    } else {
        p.to_vec()
    }
}

/// `S`: maps `(x, y)` to `(−y, −x)` where `|y| > |x|`, identity elsewhere.
pub fn negated_swap(p: &[f64]) -> Vec<f64> {
    if p[1].abs() > p[0].abs() {
        // `+ 0.0` normalizes negative zero.
        vec![-p[1] + 0.0, -p[0] + 0.0]
    } else {
        p.to_vec()
    }
}

/// Random measure supported on `{|x| = |y|}` with 1 to 4 atoms.
pub fn random_diagonal_measure(rng: &mut impl Rng) -> DiscreteMeasureRd {
    let n = rng.random_range(1..=4);
    let atoms: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let x: f64 = rng.random_range(-2.0..2.0);
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            vec![x, sign * x]
        })
        .collect();
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = raw.iter().sum();
    DiscreteMeasureRd::new(2, atoms, raw.iter().map(|m| m / total).collect()).expect("valid diagonal measure")
}

/// Minimum energy over `samples` random diagonal measures.
pub fn diagonal_energy_bound(samples: usize, seed: u64) -> Result<f64> {
    let family = counterexample_family();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min = f64::INFINITY;
    for _ in 0..samples {
        min = min.min(energy_rd(&family, &random_diagonal_measure(&mut rng))?);
    }
    Ok(min)
}

/// Energies of `μ`, `T♯μ` and `S♯μ` under the counterexample family.
pub fn symmetry_energy_check(mu: &DiscreteMeasureRd) -> Result<(f64, f64, f64)> {
    if mu.dim() != 2 {
        return Err(crate::Error::DimensionMismatch { left: 2, right: mu.dim() });
    }
    let family = counterexample_family();
    Ok((
        energy_rd(&family, mu)?,
        energy_rd(&family, &mu.push_forward(swap))?,
        energy_rd(&family, &mu.push_forward(negated_swap))?,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymmetryRow {
    pub label: String,
    pub energy: f64,
    pub energy_swap: f64,
    pub energy_negswap: f64,
    /// All three energies agree within `1e-9`.
    pub invariant: bool,
}

/// Energies table for the non-uniqueness example.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CounterexampleReport {
    pub seed: u64,
    pub samples: usize,
    /// `E(η)`.
    pub eta_energy: f64,
    /// `E(S♯η)`, a second measure at the same level.
    pub s_eta_energy: f64,
    pub s_eta_atoms: Vec<Vec<f64>>,
    /// Minimum of `E` over the random diagonal measures.
    pub diagonal_min: f64,
    pub symmetry: Vec<SymmetryRow>,
}

pub fn counterexample_report(samples: usize, seed: u64) -> Result<CounterexampleReport> {
    let family = counterexample_family();
    let eta = eta();
    let s_eta = eta.push_forward(negated_swap);
    let eta_energy = energy_rd(&family, &eta)?;
    let s_eta_energy = energy_rd(&family, &s_eta)?;
    let diagonal_min = diagonal_energy_bound(samples, seed)?;

    let mut probes: Vec<(String, DiscreteMeasureRd)> = vec![
        ("eta".into(), eta),
        ("origin".into(), DiscreteMeasureRd::dirac(vec![0.0, 0.0])?),
        ("point(2,1)".into(), DiscreteMeasureRd::dirac(vec![2.0, 1.0])?),
        ("pair(2,1)(1,2)".into(), DiscreteMeasureRd::uniform(2, vec![vec![2.0, 1.0], vec![1.0, 2.0]])?),
        ("nu1".into(), family.measures()[1].clone()),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    for k in 0..3 {
        let n = rng.random_range(1..=4);
        let atoms: Vec<Vec<f64>> =
            (0..n).map(|_| vec![rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)]).collect();
        probes.push((format!("random{k}"), DiscreteMeasureRd::uniform(2, atoms)?));
    }
    let symmetry = probes
        .into_iter()
        .map(|(label, mu)| {
            let (e, t, s) = symmetry_energy_check(&mu)?;
            let invariant = (e - t).abs() <= 1e-9 && (e - s).abs() <= 1e-9;
            Ok(SymmetryRow { label, energy: e, energy_swap: t, energy_negswap: s, invariant })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(CounterexampleReport {
        seed,
        samples,
        eta_energy,
        s_eta_energy,
        s_eta_atoms: s_eta.atoms().map(<[f64]>::to_vec).collect(),
        diagonal_min,
        symmetry,
    })
}
