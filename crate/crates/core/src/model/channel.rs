//! Free-space air-to-ground channel and per-slot SINR.

use std::f64::consts::LN_2;

use super::types::{Point, PowerProfile, RateTensor, Scenario, Trajectory};
use crate::error::{Error, Result};

/// 3-D distance between a UAV at horizontal position `q` flying at `altitude`
/// and a ground user at `w`.
pub fn distance(q: Point, w: Point, altitude: f64) -> Result<f64> {
    if !(q.is_finite() && w.is_finite() && altitude.is_finite()) {
        return Err(Error::NonFinite("distance input"));
    }
    Ok((altitude * altitude + q.dist_sq(w)).sqrt())
}

/// Channel power gain `rho0 / d^2`.
pub fn channel_gain(q: Point, w: Point, scenario: &Scenario) -> Result<f64> {
    if !(q.is_finite() && w.is_finite()) {
        return Err(Error::NonFinite("channel gain input"));
    }
    Ok(gain(q, w, scenario.altitude(), scenario.rho0()))
}

#[inline]
pub(crate) fn gain(q: Point, w: Point, altitude: f64, rho0: f64) -> f64 {
    rho0 / (altitude * altitude + q.dist_sq(w))
}

/// SINR of user `k` when served by UAV `m` in slot `n`. Every other UAV's
/// transmission counts as interference whether or not it is serving anyone.
pub fn sinr(k: usize, m: usize, n: usize, traj: &Trajectory, power: &PowerProfile, scenario: &Scenario) -> f64 {
    let w = scenario.users()[k];
    let (h, rho) = (scenario.altitude(), scenario.rho0());
    let mut interference = scenario.sigma2();
    for j in 0..traj.num_uavs() {
        if j != m {
            interference += gain(traj.get(j, n), w, h, rho) * power.get(j, n);
        }
    }
    gain(traj.get(m, n), w, h, rho) * power.get(m, n) / interference
}

#[inline]
pub fn rate_from_sinr(gamma: f64) -> f64 {
    gamma.ln_1p() / LN_2
}

/// Evaluates `log2(1 + sinr)` for every (user, UAV, slot) triple.
pub fn rate_tensor(traj: &Trajectory, power: &PowerProfile, scenario: &Scenario) -> Result<RateTensor> {
    let (m_count, n_count) = (traj.num_uavs(), traj.num_slots());
    if m_count != scenario.num_uavs() || n_count != scenario.num_slots() {
        return Err(Error::Dimension(format!(
            "trajectory is {m_count}x{n_count}, scenario expects {}x{}",
            scenario.num_uavs(),
            scenario.num_slots()
        )));
    }
    if power.num_uavs() != m_count || power.num_slots() != n_count {
        return Err(Error::Dimension("power profile does not match trajectory".into()));
    }
    Ok(RateTensor::from_fn(scenario.num_users(), m_count, n_count, |k, m, n| {
        rate_from_sinr(sinr(k, m, n, traj, power, scenario))
    }))
}
