//! Block-coordinate ascent over schedule, trajectory and power.

use std::time::{Duration, Instant};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::clustering::{kmeans_partition, random_partition, Clustering, DEFAULT_MAX_ITER};
use crate::error::{Error, Result};
use crate::model::{
    check_trajectory, rate_tensor, ObjectiveKind, Point, PowerProfile, Scenario, Schedule, Solution, Tolerance,
    Trajectory,
};
use crate::power::{power_ascent_for, PowerOptOptions};
use crate::schedule::{optimal_schedule, schedule_for};
use crate::tour::{discretize_tour, ga_tour, scale_to_feasible, GaParams};
use crate::trajectory::{project_feasible, trajectory_ascent_for, TrajOptOptions};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BcdOptions {
    pub max_outer: usize,
    /// Stop once an outer iteration improves the objective by less than
    /// this fraction.
    pub rel_gain_tol: f64,
    pub objective: ObjectiveKind,
    /// Partition users with k-means (otherwise a random balanced split).
    pub use_kmeans_init: bool,
    pub use_power_opt: bool,
    pub traj: TrajOptOptions,
    pub power: PowerOptOptions,
    pub ga: GaParams,
    pub kmeans_max_iter: usize,
    /// Overrides the scenario seed for every random choice.
    pub seed: Option<u64>,
}

impl Default for BcdOptions {
    fn default() -> Self {
        Self {
            max_outer: 30,
            rel_gain_tol: 1e-3,
            objective: ObjectiveKind::Mean,
            use_kmeans_init: true,
            use_power_opt: true,
            traj: TrajOptOptions::default(),
            power: PowerOptOptions::default(),
            ga: GaParams::default(),
            kmeans_max_iter: DEFAULT_MAX_ITER,
            seed: None,
        }
    }
}

impl BcdOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_outer == 0 || self.rel_gain_tol.is_nan() || self.rel_gain_tol <= 0.0 || self.kmeans_max_iter == 0 {
            return Err(Error::InvalidOptions(format!(
                "max_outer and kmeans_max_iter must be positive and rel_gain_tol > 0 (got {}, {}, {})",
                self.max_outer, self.kmeans_max_iter, self.rel_gain_tol
            )));
        }
        self.traj.validate()?;
        self.power.validate()?;
        self.ga.validate()
    }

    fn seed_for(&self, scenario: &Scenario) -> u64 {
        self.seed.unwrap_or(scenario.seed())
    }
}

/// Objective values recorded during one outer iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct IterationTrace {
    pub iteration: usize,
    pub after_schedule: f64,
    pub after_trajectory: f64,
    /// `None` while power control is inactive.
    pub after_power: Option<f64>,
    /// Constraint violations of the iterate, expected to stay zero.
    pub violations: usize,
    pub elapsed: Duration,
}

impl IterationTrace {
    pub fn objective(&self) -> f64 {
        self.after_power.unwrap_or(self.after_trajectory)
    }
}

#[derive(Clone, Debug)]
pub struct BcdResult {
    pub solution: Solution,
    pub initial: Solution,
    pub trace: Vec<IterationTrace>,
}

/// User partition used to seed the UAV tours.
pub fn initial_partition(scenario: &Scenario, opts: &BcdOptions) -> Result<Clustering> {
    let (users, uavs) = (scenario.users(), scenario.num_uavs());
    if users.len() < uavs {
        return Err(Error::TooFewUsers { users: users.len(), clusters: uavs });
    }
    let seed = opts.seed_for(scenario);
    if opts.use_kmeans_init {
        kmeans_partition(users, uavs, seed, opts.kmeans_max_iter)
    } else {
        random_partition(users, uavs, seed)
    }
}

/// Initial feasible design: one GA tour per cluster, sampled into the slot
/// grid and shrunk to the speed limit, full power, and the best schedule.
pub fn init_solution(scenario: &Scenario, opts: &BcdOptions) -> Result<Solution> {
    opts.validate()?;
    let clustering = initial_partition(scenario, opts)?;
    let users = scenario.users();
    let slots = scenario.num_slots();
    let seed = opts.seed_for(scenario);
    let mut rows = Vec::with_capacity(scenario.num_uavs());
    for c in 0..clustering.num_clusters() {
        let members = clustering.members(c);
        let points: Vec<Point> = members.iter().map(|&k| users[k]).collect();
        let mut stream = ChaCha8Rng::seed_from_u64(seed);
        stream.set_stream(c as u64 + 1);
        let params = GaParams { seed: stream.next_u64(), ..opts.ga };
        let tour = ga_tour(&points, &params)?;
        let row = discretize_tour(&points, &tour.order, clustering.centroids[c], slots)?;
        rows.push(scale_to_feasible(&row, scenario.vmax(), scenario.slot_len()));
    }
    let traj = separate_rows(rows, scenario)?;
    let power = PowerProfile::constant(scenario.num_uavs(), slots, scenario.pmax());
    let schedule = optimal_schedule(&rate_tensor(&traj, &power, scenario)?);
    Solution::evaluate(schedule, traj, power, scenario, opts.objective)
}

const SEPARATION_ROUNDS: usize = 10;

/// Translates whole UAV loops apart until every pair keeps `dmin` in every
/// slot. Translation preserves step lengths, so speed feasibility is kept.
pub(crate) fn separate_rows(mut rows: Vec<Vec<Point>>, scenario: &Scenario) -> Result<Trajectory> {
    let dmin = scenario.dmin();
    let slots = scenario.num_slots();
    for _ in 0..SEPARATION_ROUNDS {
        let mut moved = false;
        for a in 0..rows.len() {
            for b in a + 1..rows.len() {
                let closest = (0..slots).map(|n| rows[a][n].dist(rows[b][n])).fold(f64::INFINITY, f64::min);
                if closest >= dmin {
                    continue;
                }
                let ca = Point::centroid(&rows[a]).expect("non-empty row");
                let cb = Point::centroid(&rows[b]).expect("non-empty row");
                let delta = ca - cb;
                let dir = if delta.norm() > 0.0 { delta * (1.0 / delta.norm()) } else { Point::new(1.0, 0.0) };
                let shift = dir * ((dmin - closest + 1.0) / 2.0);
                rows[a].iter_mut().for_each(|p| *p += shift);
                rows[b].iter_mut().for_each(|p| *p -= shift);
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }
    let traj = Trajectory::new(rows)?;
    let tol = Tolerance::default();
    if check_trajectory(&traj, scenario, tol).is_feasible() {
        return Ok(traj);
    }
    let mut rows = traj.into_rows();
    project_feasible(&mut rows, scenario.max_step(), dmin);
    let traj = Trajectory::new(rows)?;
    let report = check_trajectory(&traj, scenario, tol);
    if report.is_feasible() {
        Ok(traj)
    } else {
        Err(Error::Infeasible(report))
    }
}

/// Runs the full pipeline from [`init_solution`].
pub fn solve(scenario: &Scenario, opts: &BcdOptions) -> Result<BcdResult> {
    let initial = init_solution(scenario, opts)?;
    solve_from(scenario, initial, opts)
}

/// Block-coordinate ascent from a given feasible design.
///
/// Each outer iteration re-solves the schedule and then the trajectory.
/// Power control joins only once the schedule and trajectory updates alone
/// have converged: that iteration runs the power step too, and the loop then
/// continues with all three blocks until the relative gain drops below the
/// tolerance again. Every block update is non-decreasing, so the recorded
/// objective sequence is monotone, and with power control enabled the
/// result is never worse than with it disabled.
pub fn solve_from(scenario: &Scenario, initial: Solution, opts: &BcdOptions) -> Result<BcdResult> {
    opts.validate()?;
    let start = Instant::now();
    let kind = opts.objective;
    let tol = Tolerance::default();
    if !initial.feasibility.is_feasible() {
        return Err(Error::Infeasible(initial.feasibility.clone()));
    }

    let mut schedule = initial.schedule.clone();
    let mut traj = initial.trajectory.clone();
    let mut power = initial.power.clone();
    let mut prev = initial.objective;
    let mut power_active = false;
    let mut trace = Vec::new();

    for iteration in 1..=opts.max_outer {
        let rates = rate_tensor(&traj, &power, scenario)?;
        schedule = schedule_for(kind, &rates, &schedule)?;
        let after_schedule = kind.evaluate(&schedule, &rates)?;

        let (next, _) = trajectory_ascent_for(kind, &schedule, &traj, &power, scenario, &opts.traj)?;
        traj = next;
        let after_trajectory = kind.evaluate(&schedule, &rate_tensor(&traj, &power, scenario)?)?;

        let mut after_power = None;
        let mut current = after_trajectory;
        let mut converged = relative_gain(prev, current) < opts.rel_gain_tol;
        let last = iteration == opts.max_outer;
        let activate = opts.use_power_opt && !power_active && (converged || last);
        if activate {
            power_active = true;
            converged = false;
        }
        if power_active {
            power = power_ascent_for(kind, &schedule, &traj, &power, scenario, &opts.power)?;
            current = kind.evaluate(&schedule, &rate_tensor(&traj, &power, scenario)?)?;
            after_power = Some(current);
            if !activate {
                converged = relative_gain(prev, current) < opts.rel_gain_tol;
            }
        }

        let report = crate::model::check_feasibility(&schedule, &traj, &power, scenario, tol);
        trace.push(IterationTrace {
            iteration,
            after_schedule,
            after_trajectory,
            after_power,
            violations: report.violations.len(),
            elapsed: start.elapsed(),
        });
        prev = current;
        if converged {
            break;
        }
    }

    let solution = Solution::evaluate(schedule, traj, power, scenario, kind)?;
    Ok(BcdResult { solution, initial, trace })
}

fn relative_gain(prev: f64, current: f64) -> f64 {
    (current - prev) / prev.abs().max(f64::MIN_POSITIVE)
}

/// Objective of `schedule` for the given blocks.
pub fn objective_of(
    kind: ObjectiveKind,
    schedule: &Schedule,
    traj: &Trajectory,
    power: &PowerProfile,
    scenario: &Scenario,
) -> Result<f64> {
    kind.evaluate(schedule, &rate_tensor(traj, power, scenario)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> Scenario {
        let users = vec![
            Point::new(200.0, 300.0),
            Point::new(400.0, 250.0),
            Point::new(1500.0, 1600.0),
            Point::new(1700.0, 1400.0),
            Point::new(300.0, 1700.0),
        ];
        Scenario::builder(users, 2).period(40.0).seed(3).build().unwrap()
    }

    #[test]
    fn init_is_feasible_and_deterministic() {
        let s = small();
        let a = init_solution(&s, &BcdOptions::default()).unwrap();
        let b = init_solution(&s, &BcdOptions::default()).unwrap();
        assert!(a.feasibility.is_feasible());
        assert_eq!(a.trajectory, b.trajectory);
        assert_eq!(a.objective.to_bits(), b.objective.to_bits());
    }

    #[test]
    fn too_few_users_is_an_error() {
        let s = Scenario::builder(vec![Point::new(1.0, 1.0)], 2).period(10.0).build().unwrap();
        assert!(matches!(init_solution(&s, &BcdOptions::default()), Err(Error::TooFewUsers { .. })));
    }

    #[test]
    fn solve_is_monotone() {
        let s = small();
        let out = solve(&s, &BcdOptions::default()).unwrap();
        let mut prev = out.initial.objective;
        for t in &out.trace {
            assert!(t.after_schedule >= prev);
            assert!(t.after_trajectory >= t.after_schedule);
            if let Some(p) = t.after_power {
                assert!(p >= t.after_trajectory);
            }
            assert_eq!(t.violations, 0);
            prev = t.objective();
        }
        assert!(out.solution.feasibility.is_feasible());
        assert!(out.solution.objective >= out.initial.objective);
    }

    #[test]
    fn separation_pushes_coincident_loops_apart() {
        let s = small();
        let row = vec![Point::new(500.0, 500.0); s.num_slots()];
        let traj = separate_rows(vec![row.clone(), row], &s).unwrap();
        assert!(traj.get(0, 0).dist(traj.get(1, 0)) >= s.dmin());
    }
}
