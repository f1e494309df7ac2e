//! User scheduling for fixed trajectories and powers.
//!
//! With the mean objective the problem separates by slot, and each slot is a
//! maximum-weight bipartite matching between UAVs and users. The assignment
//! polytope is integral, so solving it with the Hungarian method gives the
//! exact binary optimum.

use crate::error::{Error, Result};
use crate::model::{user_mean_rates, ObjectiveKind, RateTensor, Schedule};

/// Minimum-cost perfect matching on a square cost matrix (row -> column).
fn hungarian_min(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    // potentials and matching are 1-based with a virtual column 0
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut col_owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for row in 1..=n {
        col_owner[0] = row;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = col_owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[col_owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if col_owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            col_owner[j0] = col_owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0; n];
    for j in 1..=n {
        if col_owner[j] != 0 {
            assignment[col_owner[j] - 1] = j - 1;
        }
    }
    assignment
}

/// Maximum-weight matching of rows (UAVs) to columns (users) for
/// non-negative weights. Rows left unmatched by the optimum are then given
/// any free column, highest weight first, so idle UAVs only remain when
/// every user is taken.
pub fn max_weight_matching(weights: &[Vec<f64>]) -> Vec<Option<usize>> {
    let rows = weights.len();
    let cols = weights.first().map(Vec::len).unwrap_or(0);
    let size = rows.max(cols);
    let mut cost = vec![vec![0.0; size]; size];
    for (i, row) in weights.iter().enumerate() {
        for (j, &w) in row.iter().enumerate() {
            cost[i][j] = -w;
        }
    }
    let raw = hungarian_min(&cost);
    let mut out: Vec<Option<usize>> = raw.iter().take(rows).map(|&j| (j < cols).then_some(j)).collect();
    let mut taken = vec![false; cols];
    out.iter().flatten().for_each(|&j| taken[j] = true);
    for i in 0..rows {
        if out[i].is_none() {
            let free = (0..cols)
                .filter(|&j| !taken[j])
                .max_by(|&a, &b| weights[i][a].total_cmp(&weights[i][b]).then(b.cmp(&a)));
            if let Some(j) = free {
                taken[j] = true;
                out[i] = Some(j);
            }
        }
    }
    out
}

fn schedule_from_weights(rates: &RateTensor, mut weight: impl FnMut(usize, usize, usize) -> f64) -> Schedule {
    let (users, uavs, slots) = (rates.num_users(), rates.num_uavs(), rates.num_slots());
    let mut schedule = Schedule::idle(uavs, slots);
    for n in 0..slots {
        let w: Vec<Vec<f64>> = (0..uavs).map(|m| (0..users).map(|k| weight(k, m, n)).collect()).collect();
        for (m, k) in max_weight_matching(&w).into_iter().enumerate() {
            schedule.set(m, n, k);
        }
    }
    schedule
}

/// Exact maximizer of the mean objective for fixed rates: one maximum-weight
/// matching per slot.
pub fn optimal_schedule(rates: &RateTensor) -> Schedule {
    schedule_from_weights(rates, |k, m, n| rates.get(k, m, n))
}

const BRUTE_MAX_USERS: usize = 5;
const BRUTE_MAX_UAVS: usize = 4;
const BRUTE_MAX_SLOTS: usize = 6;

fn enumerate_slot(
    rates: &RateTensor,
    n: usize,
    m: usize,
    used: &mut Vec<bool>,
    current: &mut Vec<Option<usize>>,
    value: f64,
    best: &mut (f64, Vec<Option<usize>>),
) {
    if m == rates.num_uavs() {
        if value > best.0 {
            *best = (value, current.clone());
        }
        return;
    }
    for k in 0..rates.num_users() {
        if !used[k] {
            used[k] = true;
            current.push(Some(k));
            enumerate_slot(rates, n, m + 1, used, current, value + rates.get(k, m, n), best);
            current.pop();
            used[k] = false;
        }
    }
    current.push(None);
    enumerate_slot(rates, n, m + 1, used, current, value, best);
    current.pop();
}

/// Exhaustive search over every partial matching in every slot. Test oracle
/// for [`optimal_schedule`]; limited to small instances.
pub fn brute_force_schedule(rates: &RateTensor) -> Result<Schedule> {
    if rates.num_users() > BRUTE_MAX_USERS || rates.num_uavs() > BRUTE_MAX_UAVS || rates.num_slots() > BRUTE_MAX_SLOTS {
        return Err(Error::TooLarge(format!(
            "{} users, {} UAVs, {} slots (limits {BRUTE_MAX_USERS}, {BRUTE_MAX_UAVS}, {BRUTE_MAX_SLOTS})",
            rates.num_users(),
            rates.num_uavs(),
            rates.num_slots()
        )));
    }
    let mut schedule = Schedule::idle(rates.num_uavs(), rates.num_slots());
    for n in 0..rates.num_slots() {
        let mut best = (f64::NEG_INFINITY, Vec::new());
        enumerate_slot(rates, n, 0, &mut vec![false; rates.num_users()], &mut Vec::new(), 0.0, &mut best);
        for (m, k) in best.1.into_iter().enumerate() {
            schedule.set(m, n, k);
        }
    }
    Ok(schedule)
}

const FAIR_MAX_PASSES: usize = 50;

/// Ordering used to accept schedule changes: the objective itself, with
/// leximin on the sorted user means breaking ties for the min objective.
fn improves(kind: ObjectiveKind, new_means: &[f64], old_means: &[f64]) -> bool {
    let (a, b) = (kind.value_of_means(new_means), kind.value_of_means(old_means));
    if a != b || kind != ObjectiveKind::Min {
        return a > b;
    }
    let mut x = new_means.to_vec();
    let mut y = old_means.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    x.iter().zip(&y).find(|(p, q)| p != q).is_some_and(|(p, q)| p > q)
}

fn bias_weights(kind: ObjectiveKind, means: &[f64]) -> Vec<f64> {
    match kind {
        ObjectiveKind::Min => means.iter().map(|r| 1.0 + 1.0 / (crate::model::DEFAULT_LOG_EPS + r)).collect(),
        _ => kind.user_weights(means),
    }
}

/// Schedule for `kind`, never worse than `incumbent` on these rates.
///
/// The mean objective is solved exactly. The min and log-weighted
/// objectives do not separate by slot. For those, slot matchings are
/// re-solved one slot at a time with per-user weights that favour poorly
/// served users (`1 + 1/(eps + mean)` for min, `1/(eps + mean)` for
/// log-weighted), and a slot change is kept only when it improves the true
/// objective. This is a heuristic.
pub fn schedule_for(kind: ObjectiveKind, rates: &RateTensor, incumbent: &Schedule) -> Result<Schedule> {
    let mut best = incumbent.clone();
    let mut means = user_mean_rates(&best, rates)?;
    let candidate = optimal_schedule(rates);
    let candidate_means = user_mean_rates(&candidate, rates)?;
    if kind == ObjectiveKind::Mean {
        if kind.evaluate(&candidate, rates)? >= kind.evaluate(&best, rates)? {
            best = candidate;
        }
        return Ok(best);
    }
    if improves(kind, &candidate_means, &means) {
        best = candidate;
        means = candidate_means;
    }

    let (users, uavs, slots) = (rates.num_users(), rates.num_uavs(), rates.num_slots());
    let inv_n = 1.0 / slots as f64;
    for _ in 0..FAIR_MAX_PASSES {
        let mut changed = false;
        for n in 0..slots {
            let bias = bias_weights(kind, &means);
            let w: Vec<Vec<f64>> =
                (0..uavs).map(|m| (0..users).map(|k| bias[k] * rates.get(k, m, n)).collect()).collect();
            let proposal = max_weight_matching(&w);
            if (0..uavs).all(|m| proposal[m] == best.get(m, n)) {
                continue;
            }
            let mut trial = means.clone();
            for m in 0..uavs {
                if let Some(k) = best.get(m, n) {
                    trial[k] -= rates.get(k, m, n) * inv_n;
                }
                if let Some(k) = proposal[m] {
                    trial[k] += rates.get(k, m, n) * inv_n;
                }
            }
            if improves(kind, &trial, &means) {
                for (m, k) in proposal.into_iter().enumerate() {
                    best.set(m, n, k);
                }
                means = trial;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    // incremental means drift from a fresh evaluation by rounding only; make
    // sure the exact objective did not slip below the incumbent
    if kind.evaluate(&best, rates)? < kind.evaluate(incumbent, rates)? {
        return Ok(incumbent.clone());
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::objective_mean;

    /// `vals[k][m][n]`
    fn tensor(vals: Vec<Vec<Vec<f64>>>) -> RateTensor {
        let (k, m, n) = (vals.len(), vals[0].len(), vals[0][0].len());
        RateTensor::from_fn(k, m, n, |a, b, c| vals[a][b][c])
    }

    #[test]
    fn single_pair_always_served() {
        let r = tensor(vec![vec![vec![1.0, 2.0, 0.5]]]);
        let s = optimal_schedule(&r);
        assert_eq!(s.rows(), &[vec![Some(0); 3]]);
    }

    #[test]
    fn one_uav_two_users() {
        let r = tensor(vec![vec![vec![3.0]], vec![vec![1.0]]]);
        let s = optimal_schedule(&r);
        assert_eq!(s.get(0, 0), Some(0));
        assert_eq!(objective_mean(&s, &r).unwrap(), 3.0);
    }

    #[test]
    fn two_by_two_matching() {
        // rows by user: [[3, 1], [2, 4]]
        let r = tensor(vec![vec![vec![3.0], vec![1.0]], vec![vec![2.0], vec![4.0]]]);
        let s = optimal_schedule(&r);
        assert_eq!((s.get(0, 0), s.get(1, 0)), (Some(0), Some(1)));
        assert_eq!(objective_mean(&s, &r).unwrap(), 7.0);
        let b = brute_force_schedule(&r).unwrap();
        assert_eq!(objective_mean(&b, &r).unwrap(), 7.0);
    }

    #[test]
    fn brute_force_zero_rates_and_single_user() {
        let r = tensor(vec![vec![vec![0.0; 2]; 2]; 2]);
        let b = brute_force_schedule(&r).unwrap();
        assert_eq!(objective_mean(&b, &r).unwrap(), 0.0);

        // K = 1, M = 2: the better UAV serves each slot
        let r = tensor(vec![vec![vec![1.0, 5.0], vec![2.0, 4.0]]]);
        let b = brute_force_schedule(&r).unwrap();
        assert_eq!(b.rows(), &[vec![None, Some(0)], vec![Some(0), None]]);
    }

    #[test]
    fn brute_force_rejects_large() {
        let r = RateTensor::from_fn(6, 1, 1, |_, _, _| 1.0);
        assert!(matches!(brute_force_schedule(&r), Err(Error::TooLarge(_))));
    }

    #[test]
    fn zero_rate_slots_still_serve() {
        let r = RateTensor::from_fn(3, 2, 2, |_, _, _| 0.0);
        let s = optimal_schedule(&r);
        assert!(s.rows().iter().flatten().all(Option::is_some));
        for n in 0..2 {
            assert_ne!(s.get(0, n), s.get(1, n));
        }
    }

    #[test]
    fn more_uavs_than_users() {
        let r = tensor(vec![vec![vec![1.0], vec![3.0], vec![2.0]]]);
        let s = optimal_schedule(&r);
        assert_eq!(s.rows(), &[vec![None], vec![Some(0)], vec![None]]);
    }

    #[test]
    fn fair_schedule_never_loses_to_incumbent() {
        let r = tensor(vec![vec![vec![5.0, 5.0, 5.0]], vec![vec![0.5, 0.4, 0.3]]]);
        let inc = optimal_schedule(&r);
        for kind in [ObjectiveKind::Min, ObjectiveKind::log_weighted()] {
            let s = schedule_for(kind, &r, &inc).unwrap();
            assert!(kind.evaluate(&s, &r).unwrap() >= kind.evaluate(&inc, &r).unwrap());
        }
        // the min objective should now give user 1 some slots
        let s = schedule_for(ObjectiveKind::Min, &r, &inc).unwrap();
        assert!(s.rows()[0].contains(&Some(1)));
    }
}
