//! Analytic gradients against central finite differences.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use uavnet::model::{rate_tensor, Point, PowerProfile, Scenario, Schedule, Trajectory};
use uavnet::power::power_gradient_for;
use uavnet::schedule::optimal_schedule;
use uavnet::trajectory::trajectory_gradient_for;
use uavnet::ObjectiveKind;

struct Instance {
    scenario: Scenario,
    traj: Trajectory,
    power: PowerProfile,
    schedule: Schedule,
}

fn instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let uavs = rng.gen_range(1..=3);
    let users_n = rng.gen_range(uavs..=5);
    let slots = rng.gen_range(3..=5);
    let users: Vec<Point> =
        (0..users_n).map(|_| Point::new(rng.gen_range(0.0..600.0), rng.gen_range(0.0..600.0))).collect();
    let scenario = Scenario::builder(users, uavs).period(slots as f64 * 4.0).slots(slots).build().unwrap();
    // short random walks: every step stays below the 200 m speed limit
    let rows = (0..uavs)
        .map(|m| {
            let mut p = Point::new(100.0 + 200.0 * m as f64, rng.gen_range(0.0..600.0));
            (0..slots)
                .map(|_| {
                    p += Point::new(rng.gen_range(-60.0..60.0), rng.gen_range(-60.0..60.0));
                    p
                })
                .collect()
        })
        .collect();
    let traj = Trajectory::new(rows).unwrap();
    let power_rows = (0..uavs).map(|_| (0..slots).map(|_| rng.gen_range(0.01..0.1)).collect()).collect();
    let power = PowerProfile::new(power_rows, scenario.pmax()).unwrap();
    let schedule = optimal_schedule(&rate_tensor(&traj, &power, &scenario).unwrap());
    Instance { scenario, traj, power, schedule }
}

fn objective(kind: ObjectiveKind, inst: &Instance, traj: &Trajectory, power: &PowerProfile) -> f64 {
    kind.evaluate(&inst.schedule, &rate_tensor(traj, power, &inst.scenario).unwrap()).unwrap()
}

fn relative_error(analytic: f64, fd: f64, scale: f64) -> f64 {
    if analytic == fd {
        return 0.0;
    }
    (analytic - fd).abs() / analytic.abs().max(fd.abs()).max(1e-6 * scale)
}

const KINDS: [ObjectiveKind; 3] = [ObjectiveKind::Mean, ObjectiveKind::Min, ObjectiveKind::LogWeighted { eps: 0.01 }];

#[test]
fn trajectory_gradient_matches_central_differences() {
    let h = 1e-3;
    for seed in 0..60 {
        let inst = instance(seed);
        let kind = KINDS[seed as usize % 3];
        let grad = trajectory_gradient_for(kind, &inst.schedule, &inst.traj, &inst.power, &inst.scenario).unwrap();
        let scale = grad.iter().flatten().map(|g| g.norm()).fold(0.0, f64::max);
        for m in 0..inst.traj.num_uavs() {
            for n in 0..inst.traj.num_slots() {
                for axis in 0..2 {
                    let shifted = |d: f64| {
                        let mut rows = inst.traj.rows().to_vec();
                        if axis == 0 {
                            rows[m][n].x += d;
                        } else {
                            rows[m][n].y += d;
                        }
                        objective(kind, &inst, &Trajectory::new(rows).unwrap(), &inst.power)
                    };
                    let fd = (shifted(h) - shifted(-h)) / (2.0 * h);
                    let an = if axis == 0 { grad[m][n].x } else { grad[m][n].y };
                    let err = relative_error(an, fd, scale);
                    assert!(err < 1e-5, "seed {seed} {kind:?} m={m} n={n} axis={axis}: {an} vs {fd}");
                }
            }
        }
    }
}

#[test]
fn power_gradient_matches_central_differences() {
    let h = 1e-7;
    for seed in 100..160 {
        let inst = instance(seed);
        let kind = KINDS[seed as usize % 3];
        let grad = power_gradient_for(kind, &inst.schedule, &inst.traj, &inst.power, &inst.scenario).unwrap();
        let scale = grad.iter().flatten().fold(0.0_f64, |a, g| a.max(g.abs()));
        for m in 0..inst.traj.num_uavs() {
            for n in 0..inst.traj.num_slots() {
                let shifted = |d: f64| {
                    let mut rows = inst.power.rows().to_vec();
                    rows[m][n] += d;
                    objective(kind, &inst, &inst.traj, &PowerProfile::new_unchecked(rows).unwrap())
                };
                let fd = (shifted(h) - shifted(-h)) / (2.0 * h);
                let err = relative_error(grad[m][n], fd, scale);
                assert!(err < 1e-5, "seed {seed} {kind:?} m={m} n={n}: {} vs {fd}", grad[m][n]);
            }
        }
    }
}

#[test]
fn unserved_single_uav_has_zero_gradient() {
    let users = vec![Point::new(0.0, 0.0), Point::new(300.0, 0.0)];
    let s = Scenario::builder(users, 1).period(3.0).slots(3).build().unwrap();
    let traj = Trajectory::hover(&[Point::new(50.0, 50.0)], 3).unwrap();
    let power = PowerProfile::constant(1, 3, 0.1);
    let g = trajectory_gradient_for(ObjectiveKind::Mean, &Schedule::idle(1, 3), &traj, &power, &s).unwrap();
    assert!(g.iter().flatten().all(|p| p.x == 0.0 && p.y == 0.0));
    let gp = power_gradient_for(ObjectiveKind::Mean, &Schedule::idle(1, 3), &traj, &power, &s).unwrap();
    assert!(gp.iter().flatten().all(|&p| p == 0.0));
}
