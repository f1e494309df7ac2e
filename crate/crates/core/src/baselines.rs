//! Comparison schemes: UAVs hovering at cluster centroids, and UAVs flying
//! fixed circles laid out by a circle packing of the service area.

use std::f64::consts::PI;

use crate::bcd::{initial_partition, separate_rows, BcdOptions};
use crate::error::{Error, Result};
use crate::model::{rate_tensor, Area, Point, PowerProfile, Scenario, Solution, Trajectory};
use crate::power::power_ascent_for;
use crate::schedule::{optimal_schedule, schedule_for};

/// Equal non-overlapping circles inside the service area.
#[derive(Clone, Debug, PartialEq)]
pub struct CirclePacking {
    pub centers: Vec<Point>,
    pub radius: f64,
}

/// Largest equal circles for one to three UAVs.
///
/// One circle is inscribed at the center. Two circles sit either side by
/// side or in opposite corners, whichever allows the larger radius. Three
/// circles take the best of a single row and a corner-anchored triangle.
pub fn pack_circles(area: Area, count: usize) -> Result<CirclePacking> {
    let (w, h) = (area.width, area.height);
    let (long, short) = (w.max(h), w.min(h));
    let place = |pts: Vec<(f64, f64)>| -> Vec<Point> {
        // layouts are computed with the long side along x
        pts.into_iter().map(|(x, y)| if w >= h { Point::new(x, y) } else { Point::new(y, x) }).collect()
    };
    match count {
        1 => Ok(CirclePacking { centers: vec![area.center()], radius: short / 2.0 }),
        2 => {
            let row = (long / 4.0).min(short / 2.0);
            let diagonal = (((long + short) - (2.0 * long * short).sqrt()) / 2.0).min(short / 2.0);
            if row >= diagonal {
                Ok(CirclePacking {
                    centers: place(vec![(long / 4.0, short / 2.0), (3.0 * long / 4.0, short / 2.0)]),
                    radius: row,
                })
            } else {
                let r = diagonal;
                Ok(CirclePacking { centers: place(vec![(r, r), (long - r, short - r)]), radius: r })
            }
        }
        3 => {
            let row = (long / 6.0).min(short / 2.0);
            let (tri, centers) = triangle_packing(long, short);
            if row >= tri {
                Ok(CirclePacking {
                    centers: place(vec![
                        (long / 6.0, short / 2.0),
                        (long / 2.0, short / 2.0),
                        (5.0 * long / 6.0, short / 2.0),
                    ]),
                    radius: row,
                })
            } else {
                Ok(CirclePacking { centers: place(centers), radius: tri })
            }
        }
        0 => Err(Error::InvalidScenario("at least one UAV is required".into())),
        m => Err(Error::Unsupported(format!("circle packing is implemented for up to 3 UAVs, got {m}"))),
    }
}

/// Three centers in the `a x b` box of admissible centers: one corner, one
/// point on the far vertical edge, one on the far horizontal edge. Returns
/// the best smallest pairwise distance and the points.
fn spread_three(a: f64, b: f64) -> (f64, [(f64, f64); 3]) {
    let score = |x: f64, y: f64| {
        let d12 = (a * a + y * y).sqrt();
        let d13 = (x * x + b * b).sqrt();
        let d23 = ((a - x).powi(2) + (b - y).powi(2)).sqrt();
        d12.min(d13).min(d23)
    };
    let (mut bx, mut by, mut best) = (0.0, 0.0, score(0.0, 0.0));
    let (mut half_x, mut half_y) = (a / 2.0, b / 2.0);
    let (mut cx, mut cy) = (a / 2.0, b / 2.0);
    for _ in 0..12 {
        for i in 0..=20 {
            for j in 0..=20 {
                let x = (cx - half_x + half_x * i as f64 / 10.0).clamp(0.0, a);
                let y = (cy - half_y + half_y * j as f64 / 10.0).clamp(0.0, b);
                let s = score(x, y);
                if s > best {
                    (bx, by, best) = (x, y, s);
                }
            }
        }
        (cx, cy) = (bx, by);
        half_x /= 4.0;
        half_y /= 4.0;
    }
    (best, [(0.0, 0.0), (a, by), (bx, b)])
}

fn triangle_packing(long: f64, short: f64) -> (f64, Vec<(f64, f64)>) {
    let fits = |r: f64| spread_three(long - 2.0 * r, short - 2.0 * r).0 >= 2.0 * r;
    let (mut lo, mut hi) = (0.0, short / 2.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if fits(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (_, pts) = spread_three(long - 2.0 * lo, short - 2.0 * lo);
    (lo, pts.iter().map(|&(x, y)| (x + lo, y + lo)).collect())
}

/// Serves users from fixed hover points at the cluster centroids.
pub fn static_deployment(scenario: &Scenario, opts: &BcdOptions) -> Result<Solution> {
    opts.validate()?;
    let clustering = initial_partition(scenario, opts)?;
    let rows = clustering.centroids.iter().map(|&c| vec![c; scenario.num_slots()]).collect();
    let traj = separate_rows(rows, scenario)?;
    finish(scenario, traj, opts)
}

/// Every UAV flies a circle of the largest radius that both fits its
/// packing cell and can be completed once per period at top speed. All
/// UAVs share the same phase, so their separation equals the distance
/// between circle centers.
pub fn circular_trajectories(scenario: &Scenario, opts: &BcdOptions) -> Result<Solution> {
    opts.validate()?;
    let packing = pack_circles(scenario.area(), scenario.num_uavs())?;
    let radius = packing.radius.min(scenario.vmax() * scenario.period() / (2.0 * PI));
    let slots = scenario.num_slots();
    let rows = packing
        .centers
        .iter()
        .map(|&c| {
            (0..slots)
                .map(|n| {
                    let theta = 2.0 * PI * n as f64 / slots as f64;
                    c + Point::new(theta.cos(), theta.sin()) * radius
                })
                .collect()
        })
        .collect();
    let traj = separate_rows(rows, scenario)?;
    finish(scenario, traj, opts)
}

/// Full power and the best schedule, then optional power control and a
/// final re-schedule.
fn finish(scenario: &Scenario, traj: Trajectory, opts: &BcdOptions) -> Result<Solution> {
    let kind = opts.objective;
    let mut power = PowerProfile::constant(scenario.num_uavs(), scenario.num_slots(), scenario.pmax());
    let mut schedule = optimal_schedule(&rate_tensor(&traj, &power, scenario)?);
    if kind != crate::model::ObjectiveKind::Mean {
        schedule = schedule_for(kind, &rate_tensor(&traj, &power, scenario)?, &schedule)?;
    }
    if opts.use_power_opt {
        power = power_ascent_for(kind, &schedule, &traj, &power, scenario, &opts.power)?;
        schedule = schedule_for(kind, &rate_tensor(&traj, &power, scenario)?, &schedule)?;
    }
    Solution::evaluate(schedule, traj, power, scenario, kind)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(s: f64) -> Area {
        Area { width: s, height: s }
    }

    fn assert_valid(p: &CirclePacking, area: Area) {
        let r = p.radius;
        for (i, c) in p.centers.iter().enumerate() {
            assert!(c.x >= r - 1e-9 && c.x <= area.width - r + 1e-9, "{c:?}");
            assert!(c.y >= r - 1e-9 && c.y <= area.height - r + 1e-9, "{c:?}");
            for d in &p.centers[i + 1..] {
                assert!(c.dist(*d) >= 2.0 * r - 1e-6);
            }
        }
    }

    #[test]
    fn square_packings() {
        let a = square(2000.0);
        let one = pack_circles(a, 1).unwrap();
        assert_eq!(one.radius, 1000.0);
        let two = pack_circles(a, 2).unwrap();
        assert!((two.radius - (2.0 - 2f64.sqrt()) * 1000.0).abs() < 1e-9);
        let three = pack_circles(a, 3).unwrap();
        let expected = 2.0 * 2000.0 / (4.0 + 2f64.sqrt() + 6f64.sqrt());
        assert!((three.radius - expected).abs() < 1e-6 * 2000.0, "{}", three.radius);
        for p in [one, two, three] {
            assert_valid(&p, a);
        }
    }

    #[test]
    fn thin_rectangles_use_rows() {
        let a = Area { width: 600.0, height: 3000.0 };
        for m in 1..=3 {
            let p = pack_circles(a, m).unwrap();
            assert_valid(&p, a);
        }
        assert_eq!(pack_circles(a, 3).unwrap().radius, 300.0);
        assert!(matches!(pack_circles(a, 4), Err(Error::Unsupported(_))));
    }

    #[test]
    fn circular_steps_respect_speed() {
        let users = vec![Point::new(100.0, 100.0), Point::new(1900.0, 1900.0)];
        let s = Scenario::builder(users, 2).period(60.0).build().unwrap();
        let sol = circular_trajectories(&s, &BcdOptions::default()).unwrap();
        assert!(sol.feasibility.is_feasible());
    }
}
