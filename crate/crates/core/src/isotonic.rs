//! Projection onto the cone of nondecreasing functions in `L²(0,1)`.
//!
//! The projection of a step function is again a step function on the same
//! partition, so it is computed exactly in finite arithmetic. Two unrelated
//! algorithms are provided and serve as oracles for each other:
//!
//! * [`project_pava`]: pool adjacent violators, merging neighbouring blocks
//!   into their weighted mean until the sequence is nondecreasing;
//! * [`project_envelope`]: right derivative of the lower convex envelope of
//!   the primitive `F(t) = ∫₀ᵗ f`.

use crate::error::{Error, Result};
use crate::measures::{common_refinement, StepQuantile, MASS_TOL};

/// A step function on `(0,1)`: `values[k]` on a subinterval of length `weights[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSteps {
    values: Vec<f64>,
    weights: Vec<f64>,
}

impl WeightedSteps {
    pub fn new(values: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if values.len() != weights.len() || values.is_empty() {
            return Err(Error::PartitionMismatch(format!("{} values and {} weights", values.len(), weights.len())));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::PartitionMismatch("weights must be positive".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("values must be finite".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::PartitionMismatch(format!("weights sum to {total}")));
        }
        Ok(Self { values, weights })
    }

    pub(crate) fn from_parts(values: Vec<f64>, weights: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), weights.len());
        Self { values, weights }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `∫₀¹ f`.
    pub fn mean(&self) -> f64 {
        self.values.iter().zip(&self.weights).map(|(v, w)| v * w).sum()
    }

    pub fn is_monotone(&self) -> bool {
        self.values.windows(2).all(|w| w[0] <= w[1])
    }

    pub fn to_step_quantile(&self) -> StepQuantile {
        StepQuantile::from_parts(self.weights.clone(), self.values.clone())
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<f64>) {
        (self.values, self.weights)
    }
}

impl From<&StepQuantile> for WeightedSteps {
    fn from(q: &StepQuantile) -> Self {
        Self::from_parts(q.values().to_vec(), q.lengths().to_vec())
    }
}

/// In-place pool-adjacent-violators on `values` with positive `weights`.
///
/// Blocks whose means tie are pooled too; the pooled value is then left
/// untouched, so already-monotone input comes back bit-identical.
pub fn pava_in_place(values: &mut [f64], weights: &[f64]) {
    assert_eq!(values.len(), weights.len());
    // (mean, weight, number of cells)
    let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(values.len());
    for (&v, &w) in values.iter().zip(weights) {
        let mut cur = (v, w, 1usize);
        while let Some(&(pm, pw, pn)) = blocks.last() {
            if pm < cur.0 {
                break;
            }
            blocks.pop();
            let mean = if pm == cur.0 { pm } else { (pm * pw + cur.0 * cur.1) / (pw + cur.1) };
            cur = (mean, pw + cur.1, pn + cur.2);
        }
        blocks.push(cur);
    }
    let mut k = 0;
    for (mean, _, n) in blocks {
        values[k..k + n].fill(mean);
        k += n;
    }
}

/// Projection onto nondecreasing functions by pool-adjacent-violators.
pub fn project_pava(f: &WeightedSteps) -> WeightedSteps {
    let mut values = f.values.clone();
    pava_in_place(&mut values, &f.weights);
    WeightedSteps::from_parts(values, f.weights.clone())
}

/// Projection onto nondecreasing functions as the right derivative of the
/// lower convex envelope of `F(t) = ∫₀ᵗ f`.
pub fn project_envelope(f: &WeightedSteps) -> WeightedSteps {
    let n = f.len();
    // Vertices of the graph of F at the partition points.
    let mut t = Vec::with_capacity(n + 1);
    let mut big_f = Vec::with_capacity(n + 1);
    t.push(0.0);
    big_f.push(0.0);
    for (v, w) in f.values.iter().zip(&f.weights) {
        t.push(t[t.len() - 1] + w);
        big_f.push(big_f[big_f.len() - 1] + v * w);
    }

    // Monotone chain lower hull; collinear vertices are dropped.
    let cross =
        |o: usize, a: usize, b: usize| (t[a] - t[o]) * (big_f[b] - big_f[o]) - (big_f[a] - big_f[o]) * (t[b] - t[o]);
    let mut hull: Vec<usize> = Vec::with_capacity(n + 1);
    for k in 0..=n {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], k) <= 0.0 {
            hull.pop();
        }
        hull.push(k);
    }

    let mut values = vec![0.0; n];
    for seg in hull.windows(2) {
        let (i, j) = (seg[0], seg[1]);
        let slope = (big_f[j] - big_f[i]) / (t[j] - t[i]);
        values[i..j].fill(slope);
    }
    WeightedSteps::from_parts(values, f.weights.clone())
}

/// `‖f − g‖` in `L²(0,1)`, refining the two partitions if they differ.
pub fn distance_l2(f: &WeightedSteps, g: &WeightedSteps) -> Result<f64> {
    if f.weights == g.weights {
        let s: f64 =
            f.weights.iter().zip(f.values.iter().zip(&g.values)).map(|(w, (a, b))| w * (a - b) * (a - b)).sum();
        return Ok(s.sqrt());
    }
    let (tf, tg) = (f.total_weight(), g.total_weight());
    if (tf - tg).abs() > MASS_TOL {
        return Err(Error::PartitionMismatch(format!("partitions cover lengths {tf} and {tg}")));
    }
    let (qf, qg) = (f.to_step_quantile(), g.to_step_quantile());
    let r = common_refinement(&[&qf, &qg]);
    let s: f64 =
        r.lengths.iter().zip(r.values[0].iter().zip(&r.values[1])).map(|(w, (a, b))| w * (a - b) * (a - b)).sum();
    Ok(s.sqrt())
}
