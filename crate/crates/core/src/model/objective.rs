//! Throughput objectives over a schedule and rate tensor.
//!
//! Slot averages use a running mean so that a tensor whose slots are all
//! identical evaluates to exactly the per-slot value, independent of `N`.

use super::types::{RateTensor, Schedule};
use crate::error::Result;

pub const DEFAULT_LOG_EPS: f64 = 0.01;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum ObjectiveKind {
    /// Mean served rate per slot (sum over users of their mean rates).
    #[default]
    Mean,
    /// Smallest per-user mean rate.
    Min,
    /// `sum_k ln(eps + mean_k)`.
    LogWeighted { eps: f64 },
}

impl ObjectiveKind {
    pub fn log_weighted() -> Self {
        ObjectiveKind::LogWeighted { eps: DEFAULT_LOG_EPS }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ObjectiveKind::Mean => "mean",
            ObjectiveKind::Min => "min",
            ObjectiveKind::LogWeighted { .. } => "logw",
        }
    }

    pub fn evaluate(&self, schedule: &Schedule, rates: &RateTensor) -> Result<f64> {
        match *self {
            ObjectiveKind::Mean => objective_mean(schedule, rates),
            ObjectiveKind::Min => objective_min(schedule, rates),
            ObjectiveKind::LogWeighted { eps } => objective_logweighted(schedule, rates, eps),
        }
    }

    /// Value as a function of per-user mean rates. For `Mean` this is the plain
    /// sum; the slot-wise running mean in [`objective_mean`] is preferred when
    /// a schedule is at hand.
    pub(crate) fn value_of_means(&self, means: &[f64]) -> f64 {
        match *self {
            ObjectiveKind::Mean => means.iter().sum(),
            ObjectiveKind::Min => means.iter().copied().fold(f64::INFINITY, f64::min),
            ObjectiveKind::LogWeighted { eps } => means.iter().map(|r| (eps + r).ln()).sum(),
        }
    }

    /// Derivative (or, for `Min`, a subgradient) of the objective with respect
    /// to each user's mean rate.
    pub(crate) fn user_weights(&self, means: &[f64]) -> Vec<f64> {
        match *self {
            ObjectiveKind::Mean => vec![1.0; means.len()],
            ObjectiveKind::LogWeighted { eps } => means.iter().map(|r| 1.0 / (eps + r)).collect(),
            ObjectiveKind::Min => {
                let lo = means.iter().copied().fold(f64::INFINITY, f64::min);
                let ties: Vec<bool> = means.iter().map(|&r| r <= lo + 1e-12).collect();
                let count = ties.iter().filter(|&&t| t).count() as f64;
                ties.iter().map(|&t| if t { 1.0 / count } else { 0.0 }).collect()
            }
        }
    }
}

fn running_mean(acc: &mut f64, count: usize, x: f64) {
    *acc += (x - *acc) / count as f64;
}

/// `(1/N) sum_n sum_m r[serve[m][n]][m][n]`.
pub fn objective_mean(schedule: &Schedule, rates: &RateTensor) -> Result<f64> {
    rates.check_schedule(schedule)?;
    let mut mean = 0.0;
    for n in 0..rates.num_slots() {
        let mut slot = 0.0;
        for m in 0..rates.num_uavs() {
            if let Some(k) = schedule.get(m, n) {
                slot += rates.get(k, m, n);
            }
        }
        running_mean(&mut mean, n + 1, slot);
    }
    Ok(mean)
}

/// Mean rate received by each user over the period.
pub fn user_mean_rates(schedule: &Schedule, rates: &RateTensor) -> Result<Vec<f64>> {
    rates.check_schedule(schedule)?;
    let mut means = vec![0.0; rates.num_users()];
    let mut received = vec![0.0; rates.num_users()];
    for n in 0..rates.num_slots() {
        received.iter_mut().for_each(|r| *r = 0.0);
        for m in 0..rates.num_uavs() {
            if let Some(k) = schedule.get(m, n) {
                received[k] += rates.get(k, m, n);
            }
        }
        for (mean, &r) in means.iter_mut().zip(&received) {
            running_mean(mean, n + 1, r);
        }
    }
    Ok(means)
}

pub fn objective_min(schedule: &Schedule, rates: &RateTensor) -> Result<f64> {
    Ok(ObjectiveKind::Min.value_of_means(&user_mean_rates(schedule, rates)?))
}

pub fn objective_logweighted(schedule: &Schedule, rates: &RateTensor, eps: f64) -> Result<f64> {
    Ok(ObjectiveKind::LogWeighted { eps }.value_of_means(&user_mean_rates(schedule, rates)?))
}
