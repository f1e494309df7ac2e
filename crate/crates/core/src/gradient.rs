//! Analytic derivatives of the scheduled-rate objectives.
//!
//! For a served pair `(k, m)` in slot `n` the rate is
//! `log2(T_k) - log2(I_km)` with `T_k = sum_i h_ki p_i + sigma2` and
//! `I_km = T_k - h_km p_m`, so every UAV's position and power enters through
//! `T_k`, and every UAV except the server also enters through `I_km`.

use std::f64::consts::LN_2;

use crate::error::Result;
use crate::model::{
    gain, rate_tensor, user_mean_rates, ObjectiveKind, Point, PowerProfile, Scenario, Schedule, Trajectory,
};

pub(crate) struct Gradients {
    pub position: Vec<Vec<Point>>,
    pub power: Vec<Vec<f64>>,
}

/// Gradient of the objective with respect to every waypoint and
/// every power. For `Min` the gradient is the subgradient that spreads unit
/// weight over the users attaining the minimum.
pub(crate) fn objective_gradients(
    kind: ObjectiveKind,
    schedule: &Schedule,
    traj: &Trajectory,
    power: &PowerProfile,
    scenario: &Scenario,
) -> Result<Gradients> {
    let rates = rate_tensor(traj, power, scenario)?;
    let means = user_mean_rates(schedule, &rates)?;
    let weights = kind.user_weights(&means);

    let (uavs, slots) = (traj.num_uavs(), traj.num_slots());
    let (alt, rho0, sigma2) = (scenario.altitude(), scenario.rho0(), scenario.sigma2());
    let scale = 1.0 / (slots as f64 * LN_2);
    let mut position = vec![vec![Point::default(); slots]; uavs];
    let mut dpower = vec![vec![0.0; slots]; uavs];
    let mut h = vec![0.0; uavs];

    for n in 0..slots {
        for m in 0..uavs {
            let Some(k) = schedule.get(m, n) else { continue };
            let c = weights[k] * scale;
            if c == 0.0 {
                continue;
            }
            let w = scenario.users()[k];
            let mut total = sigma2;
            let mut interference = sigma2;
            for i in 0..uavs {
                h[i] = gain(traj.get(i, n), w, alt, rho0);
                total += h[i] * power.get(i, n);
                if i != m {
                    interference += h[i] * power.get(i, n);
                }
            }
            for i in 0..uavs {
                let coef = if i == m { 1.0 / total } else { 1.0 / total - 1.0 / interference };
                dpower[i][n] += c * h[i] * coef;
                // d h / d q = -2 h^2 / rho0 * (q - w)
                let dh = (traj.get(i, n) - w) * (-2.0 * h[i] * h[i] / rho0);
                position[i][n] += dh * (c * power.get(i, n) * coef);
            }
        }
    }
    Ok(Gradients { position, power: dpower })
}
