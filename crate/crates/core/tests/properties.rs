use proptest::prelude::*;
use uavnet::clustering::kmeans_partition;
use uavnet::model::{
    channel_gain, check_trajectory, distance, objective_mean, objective_min, rate_from_sinr, rate_tensor,
    user_mean_rates, Point, PowerProfile, RateTensor, Scenario, Schedule, Tolerance, Trajectory,
};
use uavnet::power::{power_ascent_for, PowerOptOptions};
use uavnet::schedule::optimal_schedule;
use uavnet::tour::{discretize_tour, ga_tour, max_step, scale_to_feasible, tour_length, GaParams};
use uavnet::trajectory::{trajectory_ascent_for, TrajOptOptions};
use uavnet::ObjectiveKind;

fn point(range: f64) -> impl Strategy<Value = Point> {
    (0.0..range, 0.0..range).prop_map(|(x, y)| Point::new(x, y))
}

fn points(range: f64, n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<Point>> {
    prop::collection::vec(point(range), n)
}

fn rates() -> impl Strategy<Value = RateTensor> {
    (1usize..5, 1usize..4, 1usize..6).prop_flat_map(|(k, m, n)| {
        prop::collection::vec(0.0..10.0f64, k * m * n).prop_map(move |v| {
            let mut it = v.into_iter();
            RateTensor::from_fn(k, m, n, |_, _, _| it.next().unwrap())
        })
    })
}

proptest! {
    #[test]
    fn distance_is_at_least_altitude(q in point(2000.0), w in point(2000.0), h in 1.0..500.0f64) {
        prop_assert!(distance(q, w, h).unwrap() >= h);
    }

    #[test]
    fn gain_times_squared_distance_is_reference_gain(q in point(2000.0), w in point(2000.0)) {
        let s = Scenario::builder(vec![w], 1).period(10.0).build().unwrap();
        let d = distance(q, w, s.altitude()).unwrap();
        let g = channel_gain(q, w, &s).unwrap();
        prop_assert!((g * d * d - s.rho0()).abs() <= 1e-12 * s.rho0());
    }

    #[test]
    fn rate_is_increasing(a in 0.0..1e4f64, b in 0.0..1e4f64) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(rate_from_sinr(lo) <= rate_from_sinr(hi));
    }

    #[test]
    fn mean_objective_is_linear_in_rates(r in rates(), c in 0.0..5.0f64) {
        let s = optimal_schedule(&r);
        let a = objective_mean(&s, &r.scaled(c)).unwrap();
        let b = c * objective_mean(&s, &r).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
    }

    #[test]
    fn min_objective_is_bounded_by_best_user(r in rates()) {
        let s = optimal_schedule(&r);
        let means = user_mean_rates(&s, &r).unwrap();
        let min = objective_min(&s, &r).unwrap();
        prop_assert!(min <= means.iter().copied().fold(f64::NEG_INFINITY, f64::max));
        if r.num_users() == 1 {
            prop_assert!((min - objective_mean(&s, &r).unwrap()).abs() <= 1e-12);
        }
    }

    #[test]
    fn optimal_schedule_serves_each_user_once_per_slot(r in rates()) {
        let s = optimal_schedule(&r);
        for n in 0..r.num_slots() {
            let mut seen = vec![false; r.num_users()];
            for m in 0..r.num_uavs() {
                if let Some(k) = s.get(m, n) {
                    prop_assert!(!seen[k]);
                    seen[k] = true;
                }
            }
        }
    }

    #[test]
    fn kmeans_is_deterministic_and_monotone(users in points(2000.0, 3..=20), clusters in 1usize..4, seed in any::<u64>()) {
        prop_assume!(users.len() >= clusters);
        let a = kmeans_partition(&users, clusters, seed, 100).unwrap();
        let b = kmeans_partition(&users, clusters, seed, 100).unwrap();
        prop_assert_eq!(&a, &b);
        for w in a.sse_history.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12) + 1e-9);
        }
        prop_assert!(a.sizes().iter().all(|&s| s > 0));
    }

    #[test]
    fn scaled_rings_are_speed_feasible(ring in points(3000.0, 2..=30), vmax in 1.0..60.0f64, dt in 0.1..2.0f64) {
        let out = scale_to_feasible(&ring, vmax, dt);
        prop_assert!(max_step(&out) <= vmax * dt * (1.0 + 1e-9));
        let (c0, c1) = (Point::centroid(&ring).unwrap(), Point::centroid(&out).unwrap());
        prop_assert!(c0.dist(c1) <= 1e-6);
    }

    #[test]
    fn discretized_steps_are_at_most_the_spacing(pts in points(1000.0, 2..=7), slots in 2usize..60) {
        let tour = ga_tour(&pts, &GaParams { generations: 20, ..GaParams::default() }).unwrap();
        let length = tour_length(&pts, &tour.order).unwrap();
        let row = discretize_tour(&pts, &tour.order, pts[0], slots).unwrap();
        prop_assert_eq!(row.len(), slots);
        prop_assert!(max_step(&row) <= length / slots as f64 + 1e-6);
    }
}

fn small_instance(users: Vec<Point>, uavs: usize, slots: usize, hover: &[Point]) -> (Scenario, Trajectory) {
    let s = Scenario::builder(users, uavs).period(slots as f64 * 2.0).slots(slots).build().unwrap();
    (s, Trajectory::hover(hover, slots).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn power_ascent_stays_in_box_and_improves(users in points(800.0, 2..=4), p in 0.0..0.1f64) {
        let hover = [Point::new(100.0, 100.0), Point::new(600.0, 500.0)];
        let (s, traj) = small_instance(users, 2, 3, &hover);
        let power0 = PowerProfile::constant(2, 3, p);
        let schedule = optimal_schedule(&rate_tensor(&traj, &power0, &s).unwrap());
        for kind in [ObjectiveKind::Mean, ObjectiveKind::Min, ObjectiveKind::log_weighted()] {
            let out = power_ascent_for(kind, &schedule, &traj, &power0, &s, &PowerOptOptions::default()).unwrap();
            prop_assert!(out.rows().iter().flatten().all(|&x| (0.0..=s.pmax()).contains(&x)));
            let before = kind.evaluate(&schedule, &rate_tensor(&traj, &power0, &s).unwrap()).unwrap();
            let after = kind.evaluate(&schedule, &rate_tensor(&traj, &out, &s).unwrap()).unwrap();
            prop_assert!(after >= before - 1e-12);
        }
    }

    #[test]
    fn trajectory_ascent_is_feasible_and_improves(users in points(800.0, 2..=4)) {
        let hover = [Point::new(200.0, 200.0), Point::new(270.0, 210.0)];
        let (s, traj0) = small_instance(users, 2, 6, &hover);
        prop_assert!(check_trajectory(&traj0, &s, Tolerance::default()).is_feasible());
        let power = PowerProfile::constant(2, 6, s.pmax());
        let schedule = optimal_schedule(&rate_tensor(&traj0, &power, &s).unwrap());
        let opts = TrajOptOptions { max_iters: 80, ..TrajOptOptions::default() };
        let (out, trace) = trajectory_ascent_for(ObjectiveKind::Mean, &schedule, &traj0, &power, &s, &opts).unwrap();
        prop_assert!(check_trajectory(&out, &s, Tolerance::default()).is_feasible());
        let before = objective_mean(&schedule, &rate_tensor(&traj0, &power, &s).unwrap()).unwrap();
        let after = objective_mean(&schedule, &rate_tensor(&out, &power, &s).unwrap()).unwrap();
        prop_assert!(after >= before - 1e-12);
        for segment in &trace.segments {
            for w in segment.windows(2) {
                prop_assert!(w[1] >= w[0] - 1e-12);
            }
        }
    }
}

#[test]
fn translation_moves_the_optimized_trajectory() {
    let users = [Point::new(100.0, 100.0), Point::new(500.0, 300.0), Point::new(300.0, 600.0)];
    let shift = Point::new(250.0, -40.0);
    let run = |offset: Point| {
        let moved: Vec<Point> = users.iter().map(|&u| u + offset).collect();
        let hover = [Point::new(200.0, 200.0) + offset, Point::new(400.0, 450.0) + offset];
        let (s, traj0) = small_instance(moved, 2, 8, &hover);
        let power = PowerProfile::constant(2, 8, s.pmax());
        let schedule = optimal_schedule(&rate_tensor(&traj0, &power, &s).unwrap());
        let opts = TrajOptOptions { max_iters: 60, ..TrajOptOptions::default() };
        uavnet::trajectory::trajectory_ascent(&schedule, &traj0, &power, &s, &opts).unwrap()
    };
    let a = run(Point::default());
    let b = run(shift);
    for (ra, rb) in a.rows().iter().zip(b.rows()) {
        for (&p, &q) in ra.iter().zip(rb) {
            assert!((p + shift).dist(q) < 1e-6, "{p:?} + shift vs {q:?}");
        }
    }
}

#[test]
fn idle_schedule_has_zero_objectives() {
    let r = RateTensor::from_fn(3, 2, 4, |_, _, _| 1.0);
    let s = Schedule::idle(2, 4);
    assert_eq!(objective_mean(&s, &r).unwrap(), 0.0);
    assert_eq!(objective_min(&s, &r).unwrap(), 0.0);
}
