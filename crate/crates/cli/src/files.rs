//! JSON documents read and written by the CLI.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use uavnet::bcd::IterationTrace;
use uavnet::model::{FeasibilityReport, Point, PowerProfile, Scenario, Schedule, Solution, Trajectory};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema_version: u32,
    pub seed: u64,
    pub area_m: [f64; 2],
    pub users: Vec<[f64; 2]>,
    pub uavs: usize,
    pub period_s: f64,
    pub slots: usize,
    pub altitude_m: f64,
    pub vmax_mps: f64,
    pub dmin_m: f64,
    pub pmax_w: f64,
    pub rho0: f64,
    pub sigma2_w: f64,
}

impl ScenarioFile {
    pub fn from_scenario(s: &Scenario) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            seed: s.seed(),
            area_m: [s.area().width, s.area().height],
            users: s.users().iter().map(|p| [p.x, p.y]).collect(),
            uavs: s.num_uavs(),
            period_s: s.period(),
            slots: s.num_slots(),
            altitude_m: s.altitude(),
            vmax_mps: s.vmax(),
            dmin_m: s.dmin(),
            pmax_w: s.pmax(),
            rho0: s.rho0(),
            sigma2_w: s.sigma2(),
        }
    }

    pub fn to_scenario(&self) -> Result<Scenario, CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Input(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let users = self.users.iter().map(|&[x, y]| Point::new(x, y)).collect();
        Scenario::builder(users, self.uavs)
            .seed(self.seed)
            .area(self.area_m[0], self.area_m[1])
            .period(self.period_s)
            .slots(self.slots)
            .altitude(self.altitude_m)
            .vmax(self.vmax_mps)
            .dmin(self.dmin_m)
            .pmax(self.pmax_w)
            .rho0(self.rho0)
            .sigma2(self.sigma2_w)
            .build()
            .map_err(|e| CliError::Input(format!("invalid scenario: {e}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceEntry {
    pub iteration: usize,
    pub after_schedule: f64,
    pub after_trajectory: f64,
    pub after_power: Option<f64>,
    pub violations: usize,
}

impl From<&IterationTrace> for TraceEntry {
    fn from(t: &IterationTrace) -> Self {
        // wall time is left out so that files are reproducible
        Self {
            iteration: t.iteration,
            after_schedule: t.after_schedule,
            after_trajectory: t.after_trajectory,
            after_power: t.after_power,
            violations: t.violations,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViolationEntry {
    pub constraint: String,
    pub magnitude: f64,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeasibilityEntry {
    pub feasible: bool,
    pub max_violation: f64,
    pub violations: Vec<ViolationEntry>,
}

impl From<&FeasibilityReport> for FeasibilityEntry {
    fn from(r: &FeasibilityReport) -> Self {
        Self {
            feasible: r.is_feasible(),
            max_violation: r.max_magnitude(),
            violations: r
                .violations
                .iter()
                .map(|v| ViolationEntry {
                    constraint: v.constraint().to_string(),
                    magnitude: v.magnitude(),
                    detail: v.to_string(),
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionFile {
    pub objective_kind: String,
    pub objective_bps_hz: f64,
    pub trajectories: Vec<Vec<[f64; 2]>>,
    pub powers_w: Vec<Vec<f64>>,
    /// Served user per UAV and slot, `-1` when idle.
    pub schedule: Vec<Vec<i64>>,
    pub trace: Vec<TraceEntry>,
    pub feasibility: FeasibilityEntry,
}

impl SolutionFile {
    pub fn new(kind: &str, solution: &Solution, trace: &[IterationTrace]) -> Self {
        Self {
            objective_kind: kind.to_string(),
            objective_bps_hz: solution.objective,
            trajectories: solution.trajectory.rows().iter().map(|r| r.iter().map(|p| [p.x, p.y]).collect()).collect(),
            powers_w: solution.power.rows().to_vec(),
            schedule: solution
                .schedule
                .rows()
                .iter()
                .map(|r| r.iter().map(|s| s.map_or(-1, |k| k as i64)).collect())
                .collect(),
            trace: trace.iter().map(TraceEntry::from).collect(),
            feasibility: FeasibilityEntry::from(&solution.feasibility),
        }
    }

    pub fn trajectory(&self) -> Result<Trajectory, CliError> {
        let rows = self.trajectories.iter().map(|r| r.iter().map(|&[x, y]| Point::new(x, y)).collect()).collect();
        Trajectory::new(rows).map_err(|e| CliError::Input(format!("bad trajectories: {e}")))
    }

    /// Powers as stored, without the box check, so that out-of-range values
    /// show up in the feasibility report instead of failing to load.
    pub fn power(&self) -> Result<PowerProfile, CliError> {
        PowerProfile::new_unchecked(self.powers_w.clone()).map_err(|e| CliError::Input(format!("bad powers_w: {e}")))
    }

    pub fn schedule(&self) -> Result<Schedule, CliError> {
        let rows = self
            .schedule
            .iter()
            .map(|r| {
                r.iter()
                    .map(|&k| match k {
                        -1 => Ok(None),
                        k if k >= 0 => Ok(Some(k as usize)),
                        k => Err(CliError::Input(format!("bad schedule entry {k}"))),
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Schedule::new(rows).map_err(|e| CliError::Input(format!("bad schedule: {e}")))
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("cannot parse {}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("documents always serialize");
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}
