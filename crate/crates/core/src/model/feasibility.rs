use std::fmt;

use super::types::{PowerProfile, Scenario, Schedule, Trajectory};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    /// Meters.
    pub geometric: f64,
    /// Watts.
    pub power: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { geometric: 1e-6, power: 1e-12 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    /// Step from slot `slot` to the next (cyclically) exceeds `vmax * dt`.
    Speed { uav: usize, slot: usize, excess: f64 },
    /// Two UAVs closer than `dmin`.
    Collision { uav_a: usize, uav_b: usize, slot: usize, shortfall: f64 },
    /// Power outside `[0, pmax]`; `excess` is the distance to the box.
    Power { uav: usize, slot: usize, excess: f64 },
    /// The same user served by more than one UAV in a slot.
    DuplicateUser { user: usize, slot: usize, uavs: Vec<usize> },
    /// Schedule references a user that does not exist.
    UnknownUser { uav: usize, slot: usize, user: usize },
    /// Array shapes disagree with the scenario.
    Shape { what: &'static str, expected: (usize, usize), found: (usize, usize) },
}

impl Violation {
    /// Size of the violation in its own unit (meters, watts, or a count).
    pub fn magnitude(&self) -> f64 {
        match self {
            Violation::Speed { excess, .. } => *excess,
            Violation::Collision { shortfall, .. } => *shortfall,
            Violation::Power { excess, .. } => *excess,
            Violation::DuplicateUser { uavs, .. } => (uavs.len() - 1) as f64,
            Violation::UnknownUser { .. } | Violation::Shape { .. } => 1.0,
        }
    }

    pub fn constraint(&self) -> &'static str {
        match self {
            Violation::Speed { .. } => "speed",
            Violation::Collision { .. } => "collision",
            Violation::Power { .. } => "power",
            Violation::DuplicateUser { .. } => "user-served-twice",
            Violation::UnknownUser { .. } => "unknown-user",
            Violation::Shape { .. } => "shape",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Speed { uav, slot, excess } => {
                write!(f, "speed: uav {uav} slot {slot} step exceeds limit by {excess:.6e} m")
            }
            Violation::Collision { uav_a, uav_b, slot, shortfall } => {
                write!(f, "collision: uavs {uav_a},{uav_b} slot {slot} closer than dmin by {shortfall:.6e} m")
            }
            Violation::Power { uav, slot, excess } => {
                write!(f, "power: uav {uav} slot {slot} outside [0, pmax] by {excess:.6e} W")
            }
            Violation::DuplicateUser { user, slot, uavs } => {
                write!(f, "user-served-twice: user {user} slot {slot} served by uavs {uavs:?}")
            }
            Violation::UnknownUser { uav, slot, user } => {
                write!(f, "unknown-user: uav {uav} slot {slot} references user {user}")
            }
            Violation::Shape { what, expected, found } => {
                write!(f, "shape: {what} expected {}x{}, found {}x{}", expected.0, expected.1, found.0, found.1)
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct FeasibilityReport {
    pub violations: Vec<Violation>,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }

    /// Largest speed or collision violation in meters (0 when none).
    pub fn max_geometric(&self) -> f64 {
        self.violations
            .iter()
            .filter(|v| matches!(v, Violation::Speed { .. } | Violation::Collision { .. }))
            .map(Violation::magnitude)
            .fold(0.0, f64::max)
    }

    pub fn max_magnitude(&self) -> f64 {
        self.violations.iter().map(Violation::magnitude).fold(0.0, f64::max)
    }
}

/// Speed violations of a single cyclic waypoint row.
pub(crate) fn speed_violations(row: &[super::Point], max_step: f64, tol: f64, uav: usize, out: &mut Vec<Violation>) {
    let n = row.len();
    for i in 0..n {
        let step = row[i].dist(row[(i + 1) % n]);
        if step > max_step + tol {
            out.push(Violation::Speed { uav, slot: i, excess: step - max_step });
        }
    }
}

pub fn check_trajectory(traj: &Trajectory, scenario: &Scenario, tol: Tolerance) -> FeasibilityReport {
    let mut violations = Vec::new();
    let expected = (scenario.num_uavs(), scenario.num_slots());
    let found = (traj.num_uavs(), traj.num_slots());
    if expected != found {
        violations.push(Violation::Shape { what: "trajectory", expected, found });
        return FeasibilityReport { violations };
    }
    let max_step = scenario.max_step();
    for (m, row) in traj.rows().iter().enumerate() {
        speed_violations(row, max_step, tol.geometric, m, &mut violations);
    }
    let dmin = scenario.dmin();
    for n in 0..traj.num_slots() {
        for a in 0..traj.num_uavs() {
            for b in a + 1..traj.num_uavs() {
                let d = traj.get(a, n).dist(traj.get(b, n));
                if d < dmin - tol.geometric {
                    violations.push(Violation::Collision { uav_a: a, uav_b: b, slot: n, shortfall: dmin - d });
                }
            }
        }
    }
    FeasibilityReport { violations }
}

/// Checks the speed, separation, power-box and association constraints.
/// Periodicity holds by representation (rows are cyclic), and the closing
/// step from the last slot back to the first is subject to the speed limit
/// like any other step.
pub fn check_feasibility(
    schedule: &Schedule,
    traj: &Trajectory,
    power: &PowerProfile,
    scenario: &Scenario,
    tol: Tolerance,
) -> FeasibilityReport {
    let mut report = check_trajectory(traj, scenario, tol);
    let expected = (scenario.num_uavs(), scenario.num_slots());
    let power_shape = (power.num_uavs(), power.num_slots());
    let sched_shape = (schedule.num_uavs(), schedule.num_slots());
    if power_shape != expected {
        report.violations.push(Violation::Shape { what: "power", expected, found: power_shape });
    } else {
        let pmax = scenario.pmax();
        for (m, row) in power.rows().iter().enumerate() {
            for (n, &p) in row.iter().enumerate() {
                let excess = if p > pmax {
                    p - pmax
                } else if p < 0.0 {
                    -p
                } else {
                    0.0
                };
                if excess > tol.power {
                    report.violations.push(Violation::Power { uav: m, slot: n, excess });
                }
            }
        }
    }
    if sched_shape != expected {
        report.violations.push(Violation::Shape { what: "schedule", expected, found: sched_shape });
        return report;
    }
    let users = scenario.num_users();
    for n in 0..schedule.num_slots() {
        let mut servers: Vec<Vec<usize>> = vec![Vec::new(); users];
        for m in 0..schedule.num_uavs() {
            match schedule.get(m, n) {
                Some(k) if k < users => servers[k].push(m),
                Some(k) => report.violations.push(Violation::UnknownUser { uav: m, slot: n, user: k }),
                None => {}
            }
        }
        for (k, uavs) in servers.into_iter().enumerate() {
            if uavs.len() > 1 {
                report.violations.push(Violation::DuplicateUser { user: k, slot: n, uavs });
            }
        }
    }
    report
}
