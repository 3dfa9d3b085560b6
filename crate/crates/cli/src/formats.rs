//! JSON input schemas and CSV writers. `FORMATS.md` documents both.

use std::fmt::Write as _;
use std::path::Path;

use gwb_core::consistency::{ApproximationSchedule, Population, Target};
use gwb_core::measures::Parametric;
use gwb_core::otd::TransportPlan;
use gwb_core::sticky::ParticleState;
use gwb_core::{DiscreteMeasure1D, DiscreteMeasureRd, GridQuantile, Law, SignedFamily, StepQuantile};
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::CliError;

/// A one-dimensional law as written in JSON.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum MeasureInput {
    Discrete { atoms: Vec<f64>, masses: Vec<f64> },
    Parametric(Parametric),
}

impl MeasureInput {
    /// Discrete measures stay atomic; parametric laws need a grid size.
    pub fn resolve(&self, grid: Option<usize>) -> Result<Law, CliError> {
        match self {
            MeasureInput::Discrete { atoms, masses } => {
                Ok(Law::Discrete(DiscreteMeasure1D::new(atoms.clone(), masses.clone())?))
            }
            MeasureInput::Parametric(p) => match grid {
                Some(m) => Ok(Law::Grid(p.grid(m)?)),
                None => Err(CliError::Usage("parametric laws need --grid M".into())),
            },
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct EntryInput {
    pub weight: f64,
    pub measure: MeasureInput,
}

#[derive(Debug, Clone, Deserialize)]
pub struct FamilyInput {
    pub entries: Vec<EntryInput>,
}

impl FamilyInput {
    pub fn resolve(&self, grid: Option<usize>) -> Result<SignedFamily, CliError> {
        let entries = self
            .entries
            .iter()
            .map(|e| Ok((e.weight, e.measure.resolve(grid)?)))
            .collect::<Result<Vec<_>, CliError>>()?;
        Ok(SignedFamily::new(entries)?)
    }
}

/// A measure in `ℝ^d`: `{"atoms": [[x, y], ...], "masses": [...]}`.
#[derive(Debug, Clone, Deserialize)]
pub struct MeasureRdInput {
    pub atoms: Vec<Vec<f64>>,
    pub masses: Vec<f64>,
}

impl MeasureRdInput {
    pub fn resolve(&self) -> Result<DiscreteMeasureRd, CliError> {
        let dim = self.atoms.first().map_or(0, Vec::len);
        Ok(DiscreteMeasureRd::new(dim, self.atoms.clone(), self.masses.clone())?)
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct StateInput {
    pub positions: Vec<f64>,
    pub velocities: Vec<f64>,
    pub masses: Vec<f64>,
}

impl StateInput {
    pub fn resolve(&self) -> Result<ParticleState, CliError> {
        Ok(ParticleState::new(self.positions.clone(), self.velocities.clone(), self.masses.clone())?)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetInput {
    Family(FamilyInput),
    Population(Population),
}

/// `{"k_values": [...], "seeds": [...] | "seed": s, "target": {...}, "grid": m?}`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleInput {
    pub k_values: Vec<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub seeds: Option<Vec<u64>>,
    pub target: TargetInput,
    #[serde(default)]
    pub grid: Option<usize>,
}

impl ScheduleInput {
    pub fn resolve(&self) -> Result<ApproximationSchedule, CliError> {
        let seeds = match (&self.seeds, self.seed) {
            (Some(s), None) => s.clone(),
            (None, Some(s)) => vec![s],
            _ => return Err(CliError::Usage("schedule needs exactly one of \"seed\" or \"seeds\"".into())),
        };
        let target = match &self.target {
            TargetInput::Family(f) => Target::Finite(f.resolve(self.grid)?),
            TargetInput::Population(p) => Target::Population(p.clone()),
        };
        Ok(ApproximationSchedule::new(self.k_values.clone(), seeds, target)?)
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

/// Staircase dump of a step quantile: two rows per subinterval.
pub fn step_quantile_csv(q: &StepQuantile) -> String {
    let mut out = String::from("t,value\n");
    let mut left = 0.0;
    for (i, v) in q.values().iter().enumerate() {
        let right = q.breakpoints().get(i).copied().unwrap_or(1.0);
        let _ = writeln!(out, "{left},{v}");
        let _ = writeln!(out, "{right},{v}");
        left = right;
    }
    out
}

/// One row per grid midpoint.
pub fn grid_quantile_csv(g: &GridQuantile) -> String {
    let mut out = String::from("t,value\n");
    for (i, v) in g.values().iter().enumerate() {
        let _ = writeln!(out, "{},{v}", g.node(i));
    }
    out
}

pub fn law_csv(law: &Law) -> String {
    match law {
        Law::Discrete(mu) => step_quantile_csv(&mu.quantile()),
        Law::Grid(g) => grid_quantile_csv(g),
    }
}

/// Parses a staircase dump back into a step quantile with the same
/// breakpoints and values.
pub fn parse_step_quantile_csv(text: &str) -> Result<StepQuantile, CliError> {
    let mut lines = text.lines();
    if lines.next() != Some("t,value") {
        return Err(CliError::Parse("missing `t,value` header".into()));
    }
    let rows = lines
        .map(|l| {
            let (t, v) = l.split_once(',').ok_or_else(|| CliError::Parse(format!("bad row {l:?}")))?;
            let parse = |s: &str| s.parse::<f64>().map_err(|e| CliError::Parse(format!("bad number {s:?}: {e}")));
            Ok((parse(t)?, parse(v)?))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    if rows.is_empty() || rows.len() % 2 != 0 {
        return Err(CliError::Parse("a staircase needs two rows per step".into()));
    }
    let values = rows.chunks(2).map(|p| p[0].1).collect();
    let breakpoints = rows.chunks(2).skip(1).map(|p| p[0].0).collect();
    Ok(StepQuantile::new(breakpoints, values)?)
}

/// `i,j,mass` for every positive entry of the plan.
pub fn plan_csv(plan: &TransportPlan) -> String {
    let mut out = String::from("i,j,mass\n");
    for (i, j, f) in plan.support() {
        let _ = writeln!(out, "{i},{j},{f}");
    }
    out
}

/// `t,atom,mass` for every atom of every snapshot.
pub fn trajectories_csv(snapshots: &[(f64, DiscreteMeasure1D)]) -> String {
    let mut out = String::from("t,atom,mass\n");
    for (t, rho) in snapshots {
        for (x, m) in rho.atoms().iter().zip(rho.masses()) {
            let _ = writeln!(out, "{t},{x},{m}");
        }
    }
    out
}
