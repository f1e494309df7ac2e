//! Initial closed tours: a genetic algorithm orders each cluster's users into
//! a short loop, the loop is sampled into equally spaced waypoints, and the
//! waypoint ring is shrunk about its centroid when it is too long to fly in
//! one period.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::Point;

#[derive(Clone, Debug, PartialEq)]
pub struct Tour {
    pub order: Vec<usize>,
    /// Closed-loop length in meters.
    pub length: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaParams {
    pub population: usize,
    pub generations: usize,
    pub elite: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub tournament: usize,
    pub seed: u64,
}

impl Default for GaParams {
    fn default() -> Self {
        Self {
            population: 60,
            generations: 300,
            elite: 2,
            crossover_rate: 0.9,
            mutation_rate: 0.25,
            tournament: 3,
            seed: 0,
        }
    }
}

impl GaParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.population >= 2
            && self.elite < self.population
            && self.tournament >= 1
            && (0.0..=1.0).contains(&self.crossover_rate)
            && (0.0..=1.0).contains(&self.mutation_rate);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidOptions(format!("bad GA parameters: {self:?}")))
        }
    }
}

fn is_permutation(order: &[usize], len: usize) -> bool {
    if order.len() != len {
        return false;
    }
    let mut seen = vec![false; len];
    for &i in order {
        if i >= len || std::mem::replace(&mut seen[i], true) {
            return false;
        }
    }
    true
}

fn closed_length(points: &[Point], order: &[usize]) -> f64 {
    let n = order.len();
    (0..n).map(|i| points[order[i]].dist(points[order[(i + 1) % n]])).sum()
}

/// Length of the closed loop visiting `points` in `order`.
pub fn tour_length(points: &[Point], order: &[usize]) -> Result<f64> {
    if !is_permutation(order, points.len()) {
        return Err(Error::InvalidPermutation { len: points.len() });
    }
    Ok(closed_length(points, order))
}

fn nearest_neighbor(points: &[Point]) -> Vec<usize> {
    let mut order = vec![0];
    let mut used = vec![false; points.len()];
    used[0] = true;
    while order.len() < points.len() {
        let last = points[*order.last().unwrap()];
        let next = (0..points.len())
            .filter(|&i| !used[i])
            .min_by(|&a, &b| last.dist_sq(points[a]).total_cmp(&last.dist_sq(points[b])))
            .unwrap();
        used[next] = true;
        order.push(next);
    }
    order
}

/// Order crossover: keep `a[lo..=hi]` in place and fill the remaining
/// positions with the missing genes in the order they appear in `b`,
/// starting after `hi`.
fn order_crossover(a: &[usize], b: &[usize], lo: usize, hi: usize) -> Vec<usize> {
    let n = a.len();
    let mut child = vec![usize::MAX; n];
    let mut taken = vec![false; n];
    for i in lo..=hi {
        child[i] = a[i];
        taken[a[i]] = true;
    }
    let mut pos = (hi + 1) % n;
    for j in 0..n {
        let gene = b[(hi + 1 + j) % n];
        if !taken[gene] {
            child[pos] = gene;
            taken[gene] = true;
            pos = (pos + 1) % n;
        }
    }
    child
}

fn two_cut(rng: &mut ChaCha8Rng, n: usize) -> (usize, usize) {
    let i = rng.gen_range(0..n);
    let j = rng.gen_range(0..n);
    (i.min(j), i.max(j))
}

struct Individual {
    order: Vec<usize>,
    length: f64,
}

fn tournament<'a>(pop: &'a [Individual], size: usize, rng: &mut ChaCha8Rng) -> &'a Individual {
    let mut best = &pop[rng.gen_range(0..pop.len())];
    for _ in 1..size {
        let c = &pop[rng.gen_range(0..pop.len())];
        if c.length < best.length {
            best = c;
        }
    }
    best
}

/// Runs the GA and also returns the best-so-far length after each generation.
pub fn ga_tour_with_history(points: &[Point], params: &GaParams) -> Result<(Tour, Vec<f64>)> {
    params.validate()?;
    if points.iter().any(|p| !p.is_finite()) {
        return Err(Error::NonFinite("tour point"));
    }
    let n = points.len();
    if n <= 3 {
        // every cyclic order of at most three points has the same length
        let order: Vec<usize> = (0..n).collect();
        let length = closed_length(points, &order);
        return Ok((Tour { order, length }, vec![length]));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let make = |order: Vec<usize>| Individual { length: closed_length(points, &order), order };
    let mut pop = vec![make(nearest_neighbor(points))];
    while pop.len() < params.population {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        pop.push(make(order));
    }
    pop.sort_by(|a, b| a.length.total_cmp(&b.length));
    let mut history = vec![pop[0].length];

    for _ in 0..params.generations {
        let mut next: Vec<Individual> = pop
            .iter()
            .take(params.elite)
            .map(|ind| Individual { order: ind.order.clone(), length: ind.length })
            .collect();
        while next.len() < params.population {
            let a = tournament(&pop, params.tournament, &mut rng);
            let b = tournament(&pop, params.tournament, &mut rng);
            let mut child = if rng.gen_bool(params.crossover_rate) {
                let (lo, hi) = two_cut(&mut rng, n);
                order_crossover(&a.order, &b.order, lo, hi)
            } else {
                a.order.clone()
            };
            if rng.gen_bool(params.mutation_rate) {
                let (lo, hi) = two_cut(&mut rng, n);
                child[lo..=hi].reverse();
            }
            next.push(make(child));
        }
        next.sort_by(|a, b| a.length.total_cmp(&b.length));
        pop = next;
        history.push(pop[0].length.min(*history.last().unwrap()));
    }
    let best = &pop[0];
    Ok((Tour { order: best.order.clone(), length: best.length }, history))
}

/// Shortest closed tour found by a generational GA with tournament
/// selection, order crossover, segment-reversal mutation and elitism. The
/// initial population contains the nearest-neighbor tour.
pub fn ga_tour(points: &[Point], params: &GaParams) -> Result<Tour> {
    ga_tour_with_history(points, params).map(|(t, _)| t)
}

/// Samples `slots` waypoints at equal arc length along the closed tour,
/// starting at the first user in `order`. The closing step from the last
/// waypoint back to the first has the same length as every other step.
pub fn discretize_tour(points: &[Point], order: &[usize], fallback: Point, slots: usize) -> Result<Vec<Point>> {
    if slots == 0 {
        return Err(Error::InvalidOptions("slot count must be positive".into()));
    }
    match order.len() {
        0 => return Ok(vec![fallback; slots]),
        1 => return Ok(vec![points[order[0]]; slots]),
        _ => {}
    }
    let length = tour_length(points, order)?;
    let first = points[order[0]];
    if length == 0.0 {
        return Ok(vec![first; slots]);
    }
    let spacing = length / slots as f64;
    let nodes = order.len();
    let mut out = Vec::with_capacity(slots);
    let mut edge = 0;
    let mut edge_start = 0.0;
    for i in 0..slots {
        let s = spacing * i as f64;
        loop {
            let a = points[order[edge]];
            let b = points[order[(edge + 1) % nodes]];
            let len = a.dist(b);
            if s <= edge_start + len || edge == nodes - 1 {
                let t = if len > 0.0 { ((s - edge_start) / len).clamp(0.0, 1.0) } else { 0.0 };
                out.push(a + (b - a) * t);
                break;
            }
            edge_start += len;
            edge += 1;
        }
    }
    Ok(out)
}

/// Largest step of a cyclic waypoint row, including the closing step.
pub fn max_step(row: &[Point]) -> f64 {
    let n = row.len();
    (0..n).map(|i| row[i].dist(row[(i + 1) % n])).fold(0.0, f64::max)
}

/// Shrinks the row uniformly about its centroid so no step exceeds
/// `vmax * dt`. Feasible rows are returned unchanged.
pub fn scale_to_feasible(row: &[Point], vmax: f64, dt: f64) -> Vec<Point> {
    let limit = vmax * dt;
    let worst = max_step(row);
    if worst <= limit || worst == 0.0 {
        return row.to_vec();
    }
    let center = Point::centroid(row).expect("non-empty row");
    // shave a relative 1e-12 so rounding cannot leave the worst step above the limit
    let s = limit / worst * (1.0 - 1e-12);
    row.iter().map(|&p| center + (p - center) * s).collect()
}
