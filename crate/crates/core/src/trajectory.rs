//! Waypoint optimization for a fixed schedule and power profile.
//!
//! The ascent maximizes the objective minus quadratic exterior penalties on
//! speed overruns and separation shortfalls. Each trial point is projected
//! back onto the constraint set by cyclic pairwise projections before the
//! line search judges it, so accepted iterates stay feasible and the
//! penalties only matter when the projection cannot close a gap.

use crate::error::{Error, Result};
use crate::gradient::objective_gradients;
use crate::model::{
    check_trajectory, rate_tensor, ObjectiveKind, Point, PowerProfile, Scenario, Schedule, Tolerance, Trajectory,
};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajOptOptions {
    pub max_iters: usize,
    /// Initial largest waypoint displacement per iteration, meters.
    pub step0: f64,
    /// Step shrink factor on a rejected trial.
    pub backtrack: f64,
    pub penalty0: f64,
    pub penalty_growth: f64,
    /// Iterations between penalty escalations.
    pub penalty_every: usize,
    pub tol_rel: f64,
    pub grad_tol: f64,
}

impl Default for TrajOptOptions {
    fn default() -> Self {
        Self {
            max_iters: 500,
            step0: 1.0,
            backtrack: 0.5,
            penalty0: 10.0,
            penalty_growth: 5.0,
            penalty_every: 50,
            tol_rel: 1e-5,
            grad_tol: 1e-12,
        }
    }
}

impl TrajOptOptions {
    pub fn validate(&self) -> Result<()> {
        let ok = self.max_iters > 0
            && self.step0 > 0.0
            && self.backtrack > 0.0
            && self.backtrack < 1.0
            && self.penalty0 > 0.0
            && self.penalty_growth > 1.0
            && self.penalty_every > 0
            && self.tol_rel > 0.0
            && self.grad_tol > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidOptions(format!("bad trajectory options: {self:?}")))
        }
    }
}

/// Gradient of the mean objective with respect to every waypoint.
pub fn trajectory_gradient(
    schedule: &Schedule,
    traj: &Trajectory,
    power: &PowerProfile,
    scenario: &Scenario,
) -> Result<Vec<Vec<Point>>> {
    trajectory_gradient_for(ObjectiveKind::Mean, schedule, traj, power, scenario)
}

/// Gradient (subgradient for `Min`) of `kind` with respect to every waypoint.
pub fn trajectory_gradient_for(
    kind: ObjectiveKind,
    schedule: &Schedule,
    traj: &Trajectory,
    power: &PowerProfile,
    scenario: &Scenario,
) -> Result<Vec<Vec<Point>>> {
    Ok(objective_gradients(kind, schedule, traj, power, scenario)?.position)
}

/// Sum of squared speed overruns and separation shortfalls.
pub fn constraint_penalty(rows: &[Vec<Point>], max_step: f64, dmin: f64) -> f64 {
    let mut total = 0.0;
    for row in rows {
        let n = row.len();
        for i in 0..n {
            let over = row[i].dist(row[(i + 1) % n]) - max_step;
            if over > 0.0 {
                total += over * over;
            }
        }
    }
    let slots = rows[0].len();
    for n in 0..slots {
        for a in 0..rows.len() {
            for b in a + 1..rows.len() {
                let short = dmin - rows[a][n].dist(rows[b][n]);
                if short > 0.0 {
                    total += short * short;
                }
            }
        }
    }
    total
}

/// Adds `-weight * grad(constraint_penalty)` to `grad`.
fn add_penalty_gradient(rows: &[Vec<Point>], max_step: f64, dmin: f64, weight: f64, grad: &mut [Vec<Point>]) {
    for (m, row) in rows.iter().enumerate() {
        let n = row.len();
        for i in 0..n {
            let j = (i + 1) % n;
            let delta = row[j] - row[i];
            let s = delta.norm();
            if s > max_step {
                let g = delta * (2.0 * (s - max_step) / s * weight);
                grad[m][j] -= g;
                grad[m][i] += g;
            }
        }
    }
    let slots = rows[0].len();
    for n in 0..slots {
        for a in 0..rows.len() {
            for b in a + 1..rows.len() {
                let delta = rows[a][n] - rows[b][n];
                let s = delta.norm();
                if s < dmin && s > 0.0 {
                    // pushes a away from b and b away from a
                    let g = delta * (2.0 * (dmin - s) / s * weight);
                    grad[a][n] += g;
                    grad[b][n] -= g;
                }
            }
        }
    }
}

const PROJECTION_SWEEPS: usize = 400;
const PROJECTION_TOL: f64 = 1e-9;

fn separation_direction(a: usize, b: usize) -> Point {
    // deterministic fallback for coincident UAVs
    let angle = 0.5 + a as f64 * 1.3 + b as f64 * 0.7;
    Point::new(angle.cos(), angle.sin())
}

/// Cyclic pairwise projections onto the speed and separation constraints.
/// Returns whether the result satisfies both within `PROJECTION_TOL`.
pub(crate) fn project_feasible(rows: &mut [Vec<Point>], max_step: f64, dmin: f64) -> bool {
    let uavs = rows.len();
    let slots = rows[0].len();
    let target = max_step * (1.0 - 1e-12);
    for _ in 0..PROJECTION_SWEEPS {
        let mut worst: f64 = 0.0;
        for row in rows.iter_mut() {
            for i in 0..slots {
                let j = (i + 1) % slots;
                let delta = row[j] - row[i];
                let s = delta.norm();
                worst = worst.max(s - max_step);
                if s > target {
                    let shift = delta * ((s - target) / (2.0 * s));
                    row[i] += shift;
                    row[j] -= shift;
                }
            }
        }
        if dmin > 0.0 {
            for n in 0..slots {
                for a in 0..uavs {
                    for b in a + 1..uavs {
                        let delta = rows[a][n] - rows[b][n];
                        let s = delta.norm();
                        worst = worst.max(dmin - s);
                        if s < dmin {
                            let dir = if s > 0.0 { delta * (1.0 / s) } else { separation_direction(a, b) };
                            let shift = dir * ((dmin - s) / 2.0 + 1e-12 * dmin);
                            rows[a][n] += shift;
                            rows[b][n] -= shift;
                        }
                    }
                }
            }
        }
        if worst <= PROJECTION_TOL {
            return true;
        }
    }
    let probe: Vec<Vec<Point>> = rows.to_vec();
    constraint_max_violation(&probe, max_step, dmin) <= PROJECTION_TOL
}

fn constraint_max_violation(rows: &[Vec<Point>], max_step: f64, dmin: f64) -> f64 {
    let mut worst: f64 = 0.0;
    let slots = rows[0].len();
    for row in rows {
        for i in 0..slots {
            worst = worst.max(row[i].dist(row[(i + 1) % slots]) - max_step);
        }
    }
    for n in 0..slots {
        for a in 0..rows.len() {
            for b in a + 1..rows.len() {
                worst = worst.max(dmin - rows[a][n].dist(rows[b][n]));
            }
        }
    }
    worst
}

struct Evaluator<'a> {
    kind: ObjectiveKind,
    schedule: &'a Schedule,
    power: &'a PowerProfile,
    scenario: &'a Scenario,
}

impl Evaluator<'_> {
    fn objective(&self, traj: &Trajectory) -> Result<f64> {
        let rates = rate_tensor(traj, self.power, self.scenario)?;
        self.kind.evaluate(self.schedule, &rates)
    }

    fn penalized(&self, traj: &Trajectory, weight: f64) -> Result<(f64, f64)> {
        let f = self.objective(traj)?;
        let pen = constraint_penalty(traj.rows(), self.scenario.max_step(), self.scenario.dmin());
        Ok((f - weight * pen, f))
    }
}

/// Per-iteration record of the ascent, for diagnostics and tests.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AscentTrace {
    /// Penalized objective after each accepted step, one segment per
    /// penalty weight. Each segment starts at the point where the weight
    /// was set and is non-decreasing.
    pub segments: Vec<Vec<f64>>,
}

/// Maximizes the mean objective over waypoints; see [`trajectory_ascent_for`].
pub fn trajectory_ascent(
    schedule: &Schedule,
    traj0: &Trajectory,
    power: &PowerProfile,
    scenario: &Scenario,
    opts: &TrajOptOptions,
) -> Result<Trajectory> {
    trajectory_ascent_for(ObjectiveKind::Mean, schedule, traj0, power, scenario, opts).map(|(t, _)| t)
}

/// Penalized projected gradient ascent over waypoints.
///
/// Each waypoint's gradient is normalized before stepping, so every UAV
/// position moves by comparable distances regardless of how far it sits
/// from the users it serves. Trial points are projected onto the speed and
/// separation constraints; a backtracking line search accepts a trial only
/// if the penalized objective increases. The returned trajectory is the
/// feasible iterate with the best true objective, which is never worse than
/// `traj0` when `traj0` is feasible.
pub fn trajectory_ascent_for(
    kind: ObjectiveKind,
    schedule: &Schedule,
    traj0: &Trajectory,
    power: &PowerProfile,
    scenario: &Scenario,
    opts: &TrajOptOptions,
) -> Result<(Trajectory, AscentTrace)> {
    opts.validate()?;
    let tol = Tolerance::default();
    let (max_step, dmin) = (scenario.max_step(), scenario.dmin());
    let eval = Evaluator { kind, schedule, power, scenario };

    let mut best: Option<(Trajectory, f64)> = None;
    let consider = |t: &Trajectory, f: f64, best: &mut Option<(Trajectory, f64)>| {
        if best.as_ref().is_none_or(|(_, bf)| f > *bf) && check_trajectory(t, scenario, tol).is_feasible() {
            *best = Some((t.clone(), f));
        }
    };

    let mut weight = opts.penalty0;
    let mut x = traj0.clone();
    let (mut fx, f_true) = eval.penalized(&x, weight)?;
    consider(&x, f_true, &mut best);
    if best.is_none() {
        // try to start from a repaired copy of an infeasible initial point
        let mut rows = x.rows().to_vec();
        if project_feasible(&mut rows, max_step, dmin) {
            let repaired = Trajectory::new(rows)?;
            let (fr, fr_true) = eval.penalized(&repaired, weight)?;
            consider(&repaired, fr_true, &mut best);
            if best.is_some() {
                x = repaired;
                fx = fr;
            }
        }
    }

    let mut trace = AscentTrace { segments: vec![vec![fx]] };
    let mut step = opts.step0;
    let mut small_gains = 0;
    for iter in 1..=opts.max_iters {
        if iter % opts.penalty_every == 0 {
            weight *= opts.penalty_growth;
            fx = eval.penalized(&x, weight)?.0;
            trace.segments.push(vec![fx]);
        }
        let mut grad = objective_gradients(kind, schedule, &x, power, scenario)?.position;
        add_penalty_gradient(x.rows(), max_step, dmin, weight, &mut grad);
        let largest = grad.iter().flatten().map(|g| g.norm()).fold(0.0, f64::max);
        if largest < opts.grad_tol {
            break;
        }
        // per-waypoint normalization with a floor so near-zero components stay small
        let floor = 1e-3 * largest;
        let direction: Vec<Vec<Point>> =
            grad.iter().map(|row| row.iter().map(|&g| g * (1.0 / (g.norm() + floor))).collect()).collect();

        let mut accepted = None;
        while step > 1e-9 {
            let mut rows: Vec<Vec<Point>> = x
                .rows()
                .iter()
                .zip(&direction)
                .map(|(r, d)| r.iter().zip(d).map(|(&p, &g)| p + g * step).collect())
                .collect();
            if project_feasible(&mut rows, max_step, dmin) {
                let trial = Trajectory::new(rows)?;
                let (ft, ft_true) = eval.penalized(&trial, weight)?;
                if ft > fx {
                    accepted = Some((trial, ft, ft_true));
                    break;
                }
            }
            step *= opts.backtrack;
        }
        let Some((trial, ft, ft_true)) = accepted else { break };
        let gain = (ft - fx) / fx.abs().max(1e-12);
        x = trial;
        fx = ft;
        trace.segments.last_mut().expect("initial segment").push(fx);
        consider(&x, ft_true, &mut best);
        step *= 2.0;
        if gain < opts.tol_rel {
            small_gains += 1;
            if small_gains >= 5 {
                break;
            }
        } else {
            small_gains = 0;
        }
    }

    match best {
        Some((t, _)) => Ok((t, trace)),
        None => Err(Error::Infeasible(check_trajectory(&x, scenario, tol))),
    }
}
