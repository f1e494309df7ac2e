//! K-means partitioning of ground users, one cluster per UAV.

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::Point;

pub const DEFAULT_MAX_ITER: usize = 100;

#[derive(Clone, Debug, PartialEq)]
pub struct Clustering {
    /// Cluster index of each user.
    pub assignment: Vec<usize>,
    pub centroids: Vec<Point>,
    /// Within-cluster sum of squared distances after each Lloyd step
    /// (empty-cluster repair is not recorded).
    pub sse_history: Vec<f64>,
}

impl Clustering {
    pub fn num_clusters(&self) -> usize {
        self.centroids.len()
    }

    pub fn members(&self, c: usize) -> Vec<usize> {
        (0..self.assignment.len()).filter(|&i| self.assignment[i] == c).collect()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.centroids.len()];
        for &c in &self.assignment {
            sizes[c] += 1;
        }
        sizes
    }

    pub fn sse(&self, users: &[Point]) -> f64 {
        sse(users, &self.assignment, &self.centroids)
    }
}

fn sse(users: &[Point], assignment: &[usize], centroids: &[Point]) -> f64 {
    users.iter().zip(assignment).map(|(u, &c)| u.dist_sq(centroids[c])).sum()
}

/// Index of the nearest centroid, lowest index on ties.
pub fn nearest(p: Point, centroids: &[Point]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (c, &q) in centroids.iter().enumerate() {
        let d = p.dist_sq(q);
        if d < best_d {
            best = c;
            best_d = d;
        }
    }
    best
}

fn means(users: &[Point], assignment: &[usize], previous: &[Point]) -> Vec<Point> {
    let mut sums = vec![Point::default(); previous.len()];
    let mut counts = vec![0usize; previous.len()];
    for (u, &c) in users.iter().zip(assignment) {
        sums[c] += *u;
        counts[c] += 1;
    }
    sums.into_iter()
        .zip(counts)
        .zip(previous)
        .map(|((s, n), &old)| if n == 0 { old } else { s * (1.0 / n as f64) })
        .collect()
}

fn kmeans_pp(users: &[Point], clusters: usize, rng: &mut ChaCha8Rng) -> Vec<Point> {
    let mut centroids = vec![users[rng.gen_range(0..users.len())]];
    while centroids.len() < clusters {
        let d2: Vec<f64> =
            users.iter().map(|&u| centroids.iter().map(|&c| u.dist_sq(c)).fold(f64::INFINITY, f64::min)).collect();
        let next = match WeightedIndex::new(&d2) {
            Ok(dist) => dist.sample(rng),
            // every user coincides with a chosen centroid
            Err(_) => rng.gen_range(0..users.len()),
        };
        centroids.push(users[next]);
    }
    centroids
}

/// Lloyd iterations from k-means++ seeding until the assignment stops
/// changing or `max_iter` steps have run. Empty clusters are repaired before
/// returning, so every cluster has at least one member.
pub fn kmeans_partition(users: &[Point], clusters: usize, seed: u64, max_iter: usize) -> Result<Clustering> {
    if clusters == 0 || users.len() < clusters {
        return Err(Error::TooFewUsers { users: users.len(), clusters });
    }
    if max_iter == 0 {
        return Err(Error::InvalidOptions("max_iter must be at least 1".into()));
    }
    if users.iter().any(|u| !u.is_finite()) {
        return Err(Error::NonFinite("user position"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = kmeans_pp(users, clusters, &mut rng);
    let mut assignment: Vec<usize> = users.iter().map(|&u| nearest(u, &centroids)).collect();
    let mut history = Vec::new();
    for _ in 0..max_iter {
        centroids = means(users, &assignment, &centroids);
        history.push(sse(users, &assignment, &centroids));
        let next: Vec<usize> = users.iter().map(|&u| nearest(u, &centroids)).collect();
        if next == assignment {
            break;
        }
        assignment = next;
    }
    let clustering = Clustering { assignment, centroids, sse_history: history };
    repair_empty_clusters(clustering, users)
}

/// Fills empty clusters by moving, one at a time, the user farthest from its
/// centroid (among clusters with more than one member) into each empty
/// cluster, then takes one Lloyd step. The Lloyd step is kept only if it
/// leaves no cluster empty.
pub fn repair_empty_clusters(mut clustering: Clustering, users: &[Point]) -> Result<Clustering> {
    let k = clustering.num_clusters();
    if users.len() < k {
        return Err(Error::TooFewUsers { users: users.len(), clusters: k });
    }
    if clustering.assignment.len() != users.len() {
        return Err(Error::Dimension("assignment length differs from user count".into()));
    }
    if clustering.sizes().iter().all(|&s| s > 0) {
        return Ok(clustering);
    }
    for empty in 0..k {
        let sizes = clustering.sizes();
        if sizes[empty] > 0 {
            continue;
        }
        let donor = (0..users.len())
            .filter(|&i| sizes[clustering.assignment[i]] > 1)
            .max_by(|&a, &b| {
                let da = users[a].dist_sq(clustering.centroids[clustering.assignment[a]]);
                let db = users[b].dist_sq(clustering.centroids[clustering.assignment[b]]);
                // prefer the lowest index among equally distant users
                da.total_cmp(&db).then(b.cmp(&a))
            })
            .expect("some cluster has more than one member when users >= clusters");
        clustering.assignment[donor] = empty;
        clustering.centroids[empty] = users[donor];
    }
    clustering.centroids = means(users, &clustering.assignment, &clustering.centroids);

    let stepped: Vec<usize> = users.iter().map(|&u| nearest(u, &clustering.centroids)).collect();
    let mut counts = vec![0usize; k];
    stepped.iter().for_each(|&c| counts[c] += 1);
    if counts.iter().all(|&c| c > 0) {
        clustering.assignment = stepped;
        clustering.centroids = means(users, &clustering.assignment, &clustering.centroids);
    }
    Ok(clustering)
}

/// Random balanced partition: users are shuffled and dealt round-robin.
pub fn random_partition(users: &[Point], clusters: usize, seed: u64) -> Result<Clustering> {
    use rand::seq::SliceRandom;
    if clusters == 0 || users.len() < clusters {
        return Err(Error::TooFewUsers { users: users.len(), clusters });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..users.len()).collect();
    order.shuffle(&mut rng);
    let mut assignment = vec![0; users.len()];
    for (slot, &i) in order.iter().enumerate() {
        assignment[i] = slot % clusters;
    }
    let centroids = means(users, &assignment, &vec![Point::default(); clusters]);
    let history = vec![sse(users, &assignment, &centroids)];
    Ok(Clustering { assignment, centroids, sse_history: history })
}
