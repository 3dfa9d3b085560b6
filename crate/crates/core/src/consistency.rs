//! Empirical consistency of signed barycenters.
//!
//! A target weighting `λ` is approximated by finite families `λ_k` built from
//! i.i.d. draws of its positive and negative parts. For each `k` we record the
//! barycenter `μ_k`, its energy `e_k = E_k(μ_k)`, the distance `W₂(μ_k, μ̄)` to
//! the reference barycenter and the moment `M₂²(|λ_k|)`. As `k` grows the
//! energies and barycenters should approach the reference.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bary1d::{barycenter_quantile, energy, family_stats, SignedFamily};
use crate::error::{Error, Result};
use crate::measures::{w2_1d, DiscreteMeasure1D, Law, StepQuantile};

/// A distribution over atomic measures on ℝ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasureSampler {
    /// Always the same measure.
    Fixed { atoms: Vec<f64>, masses: Vec<f64> },
    /// `δ_X` with `X ~ N(mean, std²)`.
    Dirac { mean: f64, std: f64 },
    /// Equal masses on `n` equally spaced atoms spanning `[c − w, c + w]`,
    /// with `c ~ N(center_mean, center_std²)`, `w ~ U[min_half_width, max_half_width]`
    /// and `n` uniform in `min_atoms..=max_atoms`.
    Spread {
        center_mean: f64,
        center_std: f64,
        min_half_width: f64,
        max_half_width: f64,
        min_atoms: usize,
        max_atoms: usize,
    },
}

impl MeasureSampler {
    fn validate(&self) -> Result<()> {
        match self {
            MeasureSampler::Fixed { atoms, masses } => {
                DiscreteMeasure1D::new(atoms.clone(), masses.clone()).map(|_| ())
            }
            MeasureSampler::Dirac { mean, std } if mean.is_finite() && *std >= 0.0 && std.is_finite() => Ok(()),
            MeasureSampler::Spread {
                center_mean,
                center_std,
                min_half_width,
                max_half_width,
                min_atoms,
                max_atoms,
            } if center_mean.is_finite()
                && *center_std >= 0.0
                && center_std.is_finite()
                && 0.0 < *min_half_width
                && min_half_width <= max_half_width
                && max_half_width.is_finite()
                && 2 <= *min_atoms
                && min_atoms <= max_atoms =>
            {
                Ok(())
            }
            other => Err(Error::InvalidInput(format!("invalid sampler {other:?}"))),
        }
    }

    pub fn sample(&self, rng: &mut impl Rng) -> DiscreteMeasure1D {
        match self {
            MeasureSampler::Fixed { atoms, masses } => {
                DiscreteMeasure1D::new(atoms.clone(), masses.clone()).expect("validated")
            }
            MeasureSampler::Dirac { mean, std } => {
                DiscreteMeasure1D::dirac(Normal::new(*mean, *std).expect("validated").sample(rng))
            }
            MeasureSampler::Spread {
                center_mean,
                center_std,
                min_half_width,
                max_half_width,
                min_atoms,
                max_atoms,
            } => {
                let c = Normal::new(*center_mean, *center_std).expect("validated").sample(rng);
                let w = rng.random_range(*min_half_width..=*max_half_width);
                let n = rng.random_range(*min_atoms..=*max_atoms);
                let atoms = (0..n).map(|i| c - w + 2.0 * w * i as f64 / (n - 1) as f64).collect();
                DiscreteMeasure1D::uniform(atoms).expect("distinct atoms")
            }
        }
    }

    /// `E[m₂²(ν)]` for `ν` drawn from this sampler.
    pub fn expected_moment2(&self) -> f64 {
        match self {
            MeasureSampler::Fixed { atoms, masses } => atoms.iter().zip(masses).map(|(x, m)| m * x * x).sum(),
            MeasureSampler::Dirac { mean, std } => mean * mean + std * std,
            MeasureSampler::Spread {
                center_mean,
                center_std,
                min_half_width: a,
                max_half_width: b,
                min_atoms,
                max_atoms,
            } => {
                // Variance of n equally spaced points on [−w, w] is w²(n+1)/(3(n−1)).
                let ew2 = (a * a + a * b + b * b) / 3.0;
                let count = (max_atoms - min_atoms + 1) as f64;
                let shape: f64 =
                    (*min_atoms..=*max_atoms).map(|n| (n + 1) as f64 / (3.0 * (n - 1) as f64)).sum::<f64>() / count;
                center_mean * center_mean + center_std * center_std + ew2 * shape
            }
        }
    }
}

/// `λ = λ⁺(X)·P⁺ − λ⁻(X)·P⁻` with `λ⁺(X) − λ⁻(X) = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Population {
    pub positive_mass: f64,
    pub positive: MeasureSampler,
    #[serde(default)]
    pub negative_mass: f64,
    #[serde(default)]
    pub negative: Option<MeasureSampler>,
}

impl Population {
    fn validate(&self) -> Result<()> {
        if !(self.positive_mass > 0.0) || !(self.negative_mass >= 0.0) {
            return Err(Error::InvalidInput("population masses must be nonnegative".into()));
        }
        let sum = self.positive_mass - self.negative_mass;
        if (sum - 1.0).abs() > crate::bary1d::WEIGHT_SUM_TOL {
            return Err(Error::WeightSumInvalid { sum });
        }
        self.positive.validate()?;
        match (&self.negative, self.negative_mass > 0.0) {
            (Some(s), _) => s.validate(),
            (None, false) => Ok(()),
            (None, true) => Err(Error::InvalidInput("negative mass given without a negative sampler".into())),
        }
    }

    /// `M₂²(|λ|) = λ⁺ E[m₂²(ν⁺)] + λ⁻ E[m₂²(ν⁻)]`.
    pub fn moment_bound(&self) -> f64 {
        self.positive_mass * self.positive.expected_moment2()
            + self.negative.as_ref().map_or(0.0, |s| self.negative_mass * s.expected_moment2())
    }

    fn has_negative(&self) -> bool {
        self.negative_mass > 0.0
    }

    /// Split of `k` entries into positive and negative draws.
    fn split(&self, k: usize) -> (usize, usize) {
        if !self.has_negative() {
            return (k, 0);
        }
        let share = self.positive_mass / (self.positive_mass + self.negative_mass);
        let kp = ((k as f64 * share).round() as usize).clamp(1, k - 1);
        (kp, k - kp)
    }
}

/// What the schedule approximates.
#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    Finite(SignedFamily),
    Population(Population),
}

/// Family sizes, seeds and target of a consistency experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproximationSchedule {
    k_values: Vec<usize>,
    seeds: Vec<u64>,
    target: Target,
}

impl ApproximationSchedule {
    pub fn new(k_values: Vec<usize>, seeds: Vec<u64>, target: Target) -> Result<Self> {
        if k_values.is_empty() || seeds.is_empty() {
            return Err(Error::InvalidInput("schedule needs k values and seeds".into()));
        }
        if k_values.windows(2).any(|w| w[0] >= w[1]) || k_values[0] == 0 {
            return Err(Error::InvalidInput("k values must be positive and strictly increasing".into()));
        }
        if let Target::Population(p) = &target {
            p.validate()?;
            if p.has_negative() && k_values[0] < 2 {
                return Err(Error::InvalidInput("a signed population needs k >= 2".into()));
            }
        }
        Ok(Self { k_values, seeds, target })
    }

    pub fn k_values(&self) -> &[usize] {
        &self.k_values
    }

    pub fn seeds(&self) -> &[u64] {
        &self.seeds
    }

    pub fn target(&self) -> &Target {
        &self.target
    }
}

const POSITIVE_STREAM: u64 = 1;
const NEGATIVE_STREAM: u64 = 2;

/// The `k`-entry approximation `λ_k` of the target for one seed.
///
/// Draws are nested: for a fixed seed, `λ_k` uses the first draws of the same
/// positive and negative streams for every `k`. Weights are `λ⁺/k⁺` and
/// `−λ⁻/k⁻`, with the last one absorbing rounding so the sum is one.
/// Entries with identical measures are merged.
pub fn build_family(target: &Target, k: usize, seed: u64) -> Result<SignedFamily> {
    match target {
        Target::Finite(f) if k >= f.len() => Ok(f.clone()),
        Target::Finite(f) => {
            let pop_pos: Vec<(f64, &Law)> = f.iter().filter(|(w, _)| *w > 0.0).collect();
            let pop_neg: Vec<(f64, &Law)> = f.iter().filter(|(w, _)| *w < 0.0).collect();
            let (lp, ln) = (f.positive_mass(), f.negative_mass());
            let kp = if pop_neg.is_empty() {
                k
            } else {
                ((k as f64 * lp / (lp + ln)).round() as usize).clamp(1, k.max(2) - 1)
            };
            let kn = if pop_neg.is_empty() { 0 } else { k.max(2) - kp };
            let mut pos_rng = stream(seed, POSITIVE_STREAM);
            let mut neg_rng = stream(seed, NEGATIVE_STREAM);
            let pick = |rng: &mut ChaCha8Rng, pool: &[(f64, &Law)], total: f64| -> Law {
                let mut u = rng.random_range(0.0..total);
                for (w, law) in pool {
                    u -= w.abs();
                    if u < 0.0 {
                        return (*law).clone();
                    }
                }
                pool[pool.len() - 1].1.clone()
            };
            let pos: Vec<Law> = (0..kp).map(|_| pick(&mut pos_rng, &pop_pos, lp)).collect();
            let neg: Vec<Law> = (0..kn).map(|_| pick(&mut neg_rng, &pop_neg, ln)).collect();
            assemble(lp, pos, ln, neg)
        }
        Target::Population(p) => {
            let (kp, kn) = p.split(k);
            let mut pos_rng = stream(seed, POSITIVE_STREAM);
            let pos: Vec<Law> = (0..kp).map(|_| Law::Discrete(p.positive.sample(&mut pos_rng))).collect();
            let neg: Vec<Law> = match &p.negative {
                Some(s) if kn > 0 => {
                    let mut neg_rng = stream(seed, NEGATIVE_STREAM);
                    (0..kn).map(|_| Law::Discrete(s.sample(&mut neg_rng))).collect()
                }
                _ => Vec::new(),
            };
            assemble(p.positive_mass, pos, p.negative_mass, neg)
        }
    }
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

fn assemble(lp: f64, pos: Vec<Law>, ln: f64, neg: Vec<Law>) -> Result<SignedFamily> {
    let (kp, kn) = (pos.len() as f64, neg.len() as f64);
    let mut entries: Vec<(f64, Law)> = pos.into_iter().map(|l| (lp / kp, l)).collect();
    entries.extend(neg.into_iter().map(|l| (-ln / kn, l)));
    let n = entries.len();
    let partial: f64 = entries[..n - 1].iter().map(|e| e.0).sum();
    entries[n - 1].0 = 1.0 - partial;
    Ok(SignedFamily::new(entries)?.collapse())
}

/// One `(seed, k)` cell of a consistency run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub seed: u64,
    pub k: usize,
    /// Number of entries after merging identical measures.
    pub entries: usize,
    /// `e_k = E_k(μ_k)`.
    pub energy: f64,
    /// `|e_k − ē|`.
    pub energy_gap: f64,
    /// `W₂(μ_k, μ̄)`.
    pub w2_gap: f64,
    /// `M₂²(|λ_k|)`.
    pub m2_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeedReference {
    pub seed: u64,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reference {
    /// `"exact"` for a finite target, `"proxy_largest_k"` for a sampled population.
    pub kind: String,
    /// Family size used as proxy, if any.
    pub k: Option<usize>,
    /// `M₂²(|λ|)` of the population or finite target.
    pub moment_bound: f64,
    pub per_seed: Vec<SeedReference>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub runs: Vec<RunRecord>,
    pub reference: Reference,
}

impl ConsistencyReport {
    fn k_values(&self) -> Vec<usize> {
        let mut ks: Vec<usize> = self.runs.iter().map(|r| r.k).collect();
        ks.sort_unstable();
        ks.dedup();
        ks
    }

    fn medians_by_k(&self, field: impl Fn(&RunRecord) -> f64) -> Vec<(usize, f64)> {
        self.k_values()
            .into_iter()
            .map(|k| {
                let vals: Vec<f64> = self.runs.iter().filter(|r| r.k == k).map(&field).collect();
                (k, median(vals))
            })
            .collect()
    }

    /// Median of `|e_k − ē|` over seeds, per `k`.
    pub fn median_energy_gaps(&self) -> Vec<(usize, f64)> {
        self.medians_by_k(|r| r.energy_gap)
    }

    /// Median of `W₂(μ_k, μ̄)` over seeds, per `k`.
    pub fn median_w2_gaps(&self) -> Vec<(usize, f64)> {
        self.medians_by_k(|r| r.w2_gap)
    }

    /// Largest `M₂²(|λ_k|)` over all runs.
    pub fn max_moment(&self) -> f64 {
        self.runs.iter().map(|r| r.m2_bound).fold(0.0, f64::max)
    }
}

pub fn median(mut xs: Vec<f64>) -> f64 {
    assert!(!xs.is_empty());
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Whether a sequence never increases.
pub fn is_non_increasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] <= w[0])
}

/// Spearman rank correlation (average ranks for ties).
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

fn ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut r = vec![0.0; x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

struct Cell {
    k: usize,
    entries: usize,
    quantile: StepQuantile,
    energy: f64,
    m2: f64,
}

fn evaluate(target: &Target, k: usize, seed: u64) -> Result<Cell> {
    let family = build_family(target, k, seed)?;
    let quantile = barycenter_quantile(&family).to_step_quantile();
    Ok(Cell {
        k,
        entries: family.len(),
        energy: energy(&family, &quantile),
        m2: family_stats(&family).moment2,
        quantile,
    })
}

/// Runs every `(seed, k)` cell of the schedule.
///
/// Cells are evaluated in parallel; the report lists them ordered by seed,
/// then `k`, independent of scheduling.
pub fn run_consistency(schedule: &ApproximationSchedule) -> Result<ConsistencyReport> {
    let target = &schedule.target;
    let exact = match target {
        Target::Finite(f) => {
            let q = barycenter_quantile(f).to_step_quantile();
            Some((energy(f, &q), q))
        }
        Target::Population(_) => None,
    };
    let moment_bound = match target {
        Target::Finite(f) => family_stats(f).moment2,
        Target::Population(p) => p.moment_bound(),
    };
    let k_max = *schedule.k_values.last().expect("nonempty");

    let per_seed: Vec<(u64, Vec<Cell>)> = schedule
        .seeds
        .par_iter()
        .map(|&seed| {
            let cells = schedule.k_values.par_iter().map(|&k| evaluate(target, k, seed)).collect::<Result<Vec<_>>>()?;
            Ok((seed, cells))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut runs = Vec::new();
    let mut references = Vec::new();
    for (seed, cells) in per_seed {
        let (ref_energy, ref_q) = match &exact {
            Some((e, q)) => (*e, q.clone()),
            None => {
                let last = cells.iter().find(|c| c.k == k_max).expect("largest k evaluated");
                (last.energy, last.quantile.clone())
            }
        };
        references.push(SeedReference { seed, energy: ref_energy });
        for c in cells {
            runs.push(RunRecord {
                seed,
                k: c.k,
                entries: c.entries,
                energy: c.energy,
                energy_gap: (c.energy - ref_energy).abs(),
                w2_gap: w2_1d(&c.quantile, &ref_q),
                m2_bound: c.m2,
            });
        }
    }

    Ok(ConsistencyReport {
        runs,
        reference: Reference {
            kind: if exact.is_some() { "exact" } else { "proxy_largest_k" }.into(),
            k: if exact.is_some() { None } else { Some(k_max) },
            moment_bound,
            per_seed: references,
        },
    })
}
