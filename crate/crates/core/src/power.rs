//! Transmit-power optimization for a fixed schedule and trajectory.
//!
//! Powers in different slots only interact through the per-user mean rates,
//! so the ascent works one slot at a time. For the mean objective each slot
//! is an independent problem; for the fairness objectives the slots are
//! visited in order with all other slots held fixed.

use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::gradient::objective_gradients;
use crate::model::{gain, rate_tensor, user_mean_rates, ObjectiveKind, PowerProfile, Scenario, Schedule, Trajectory};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerOptOptions {
    pub max_iters: usize,
    /// Initial step as a fraction of `pmax`.
    pub step0: f64,
    pub backtrack: f64,
    pub tol_rel: f64,
}

impl Default for PowerOptOptions {
    fn default() -> Self {
        Self { max_iters: 300, step0: 0.1, backtrack: 0.5, tol_rel: 1e-6 }
    }
}

impl PowerOptOptions {
    pub fn validate(&self) -> Result<()> {
        let ok = self.max_iters > 0
            && self.step0 > 0.0
            && self.backtrack > 0.0
            && self.backtrack < 1.0
            && self.tol_rel > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidOptions(format!("bad power options: {self:?}")))
        }
    }
}

/// Gradient of the mean objective with respect to every power.
pub fn power_gradient(
    schedule: &Schedule,
    traj: &Trajectory,
    power: &PowerProfile,
    scenario: &Scenario,
) -> Result<Vec<Vec<f64>>> {
    power_gradient_for(ObjectiveKind::Mean, schedule, traj, power, scenario)
}

pub fn power_gradient_for(
    kind: ObjectiveKind,
    schedule: &Schedule,
    traj: &Trajectory,
    power: &PowerProfile,
    scenario: &Scenario,
) -> Result<Vec<Vec<f64>>> {
    Ok(objective_gradients(kind, schedule, traj, power, scenario)?.power)
}

/// One slot's rates as a function of that slot's powers.
struct SlotModel {
    /// User served by each UAV, if any.
    served: Vec<Option<usize>>,
    /// `gains[m][i]`: gain from UAV `i` to the user served by UAV `m`.
    gains: Vec<Vec<f64>>,
    sigma2: f64,
}

impl SlotModel {
    fn new(n: usize, schedule: &Schedule, traj: &Trajectory, scenario: &Scenario) -> Self {
        let uavs = traj.num_uavs();
        let served: Vec<Option<usize>> = (0..uavs).map(|m| schedule.get(m, n)).collect();
        let gains = served
            .iter()
            .map(|s| match s {
                Some(k) => {
                    let w = scenario.users()[*k];
                    (0..uavs).map(|i| gain(traj.get(i, n), w, scenario.altitude(), scenario.rho0())).collect()
                }
                None => vec![0.0; uavs],
            })
            .collect();
        Self { served, gains, sigma2: scenario.sigma2() }
    }

    fn rates(&self, p: &[f64]) -> Vec<f64> {
        self.served
            .iter()
            .enumerate()
            .map(|(m, s)| {
                if s.is_none() {
                    return 0.0;
                }
                let g = &self.gains[m];
                let interference: f64 =
                    self.sigma2 + (0..p.len()).filter(|&i| i != m).map(|i| g[i] * p[i]).sum::<f64>();
                (g[m] * p[m] / interference).ln_1p() / LN_2
            })
            .collect()
    }

    /// Gradient of `sum_m weight[m] * rate_m`.
    fn gradient(&self, p: &[f64], weight: &[f64]) -> Vec<f64> {
        let mut grad = vec![0.0; p.len()];
        for (m, s) in self.served.iter().enumerate() {
            if s.is_none() || weight[m] == 0.0 {
                continue;
            }
            let g = &self.gains[m];
            let total: f64 = self.sigma2 + g.iter().zip(p).map(|(a, b)| a * b).sum::<f64>();
            let interference = total - g[m] * p[m];
            let c = weight[m] / LN_2;
            for i in 0..p.len() {
                let coef = if i == m { 1.0 / total } else { 1.0 / total - 1.0 / interference };
                grad[i] += c * g[i] * coef;
            }
        }
        grad
    }
}

/// Slot objective: value and per-UAV rate weights at `p`.
struct SlotObjective<'a> {
    model: &'a SlotModel,
    kind: ObjectiveKind,
    /// Per-user rate sums over all other slots; unused for `Mean`.
    base: &'a [f64],
    slots: f64,
}

impl SlotObjective<'_> {
    fn means(&self, rates: &[f64]) -> Vec<f64> {
        let mut sums = self.base.to_vec();
        for (m, s) in self.model.served.iter().enumerate() {
            if let Some(k) = s {
                sums[*k] += rates[m];
            }
        }
        sums.iter().map(|s| s / self.slots).collect()
    }

    fn value(&self, p: &[f64]) -> f64 {
        let rates = self.model.rates(p);
        match self.kind {
            // slot-local sum keeps identical slots bitwise identical
            ObjectiveKind::Mean => rates.iter().sum(),
            _ => self.kind.value_of_means(&self.means(&rates)),
        }
    }

    fn gradient(&self, p: &[f64]) -> Vec<f64> {
        let weight: Vec<f64> = match self.kind {
            ObjectiveKind::Mean => vec![1.0; p.len()],
            _ => {
                let user_w = self.kind.user_weights(&self.means(&self.model.rates(p)));
                self.model.served.iter().map(|s| s.map_or(0.0, |k| user_w[k] / self.slots)).collect()
            }
        };
        self.model.gradient(p, &weight)
    }

    /// Projected ascent from `start`; returns the final point and value.
    fn ascend(&self, start: Vec<f64>, pmax: f64, opts: &PowerOptOptions) -> (Vec<f64>, f64) {
        let mut p = start;
        let mut f = self.value(&p);
        let mut step = opts.step0 * pmax;
        for _ in 0..opts.max_iters {
            let g = self.gradient(&p);
            let scale = g.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
            if scale == 0.0 || !scale.is_finite() {
                break;
            }
            let mut accepted = false;
            while step > 1e-12 * pmax {
                let trial: Vec<f64> =
                    p.iter().zip(&g).map(|(&x, &d)| (x + step * d / scale).clamp(0.0, pmax)).collect();
                if trial == p {
                    // projected gradient vanishes at a box corner
                    break;
                }
                let ft = self.value(&trial);
                if ft > f {
                    let gain = (ft - f) / f.abs().max(1e-300);
                    p = trial;
                    f = ft;
                    step *= 2.0;
                    accepted = gain >= opts.tol_rel;
                    if !accepted {
                        return (p, f);
                    }
                    break;
                }
                step *= opts.backtrack;
            }
            if !accepted {
                break;
            }
        }
        (p, f)
    }

    /// Best corner of the power box, first one on ties.
    fn best_vertex(&self, uavs: usize, pmax: f64) -> Vec<f64> {
        let mut best = (vec![pmax; uavs], f64::NEG_INFINITY);
        for mask in 0..1usize << uavs {
            let p: Vec<f64> = (0..uavs).map(|i| if mask >> i & 1 == 1 { pmax } else { 0.0 }).collect();
            let f = self.value(&p);
            if f > best.1 {
                best = (p, f);
            }
        }
        best.0
    }
}

const VERTEX_SEARCH_MAX_UAVS: usize = 6;
const FAIR_SWEEPS: usize = 5;

/// Maximizes the mean objective over powers; see [`power_ascent_for`].
pub fn power_ascent(
    schedule: &Schedule,
    traj: &Trajectory,
    power0: &PowerProfile,
    scenario: &Scenario,
    opts: &PowerOptOptions,
) -> Result<PowerProfile> {
    power_ascent_for(ObjectiveKind::Mean, schedule, traj, power0, scenario, opts)
}

/// Slot-wise projected gradient ascent over `[0, pmax]` powers.
///
/// Each slot is solved from its current powers and, for up to six UAVs,
/// also from the best corner of the power box; the better local optimum is
/// kept, with ties going to the current powers. The result never has a lower
/// objective than `power0`.
pub fn power_ascent_for(
    kind: ObjectiveKind,
    schedule: &Schedule,
    traj: &Trajectory,
    power0: &PowerProfile,
    scenario: &Scenario,
    opts: &PowerOptOptions,
) -> Result<PowerProfile> {
    opts.validate()?;
    let rates0 = rate_tensor(traj, power0, scenario)?;
    let f0 = kind.evaluate(schedule, &rates0)?;
    let (uavs, slots) = (traj.num_uavs(), traj.num_slots());
    let pmax = scenario.pmax();
    let mut rows: Vec<Vec<f64>> =
        power0.rows().iter().map(|r| r.iter().map(|p| p.clamp(0.0, pmax)).collect()).collect();

    let slot_powers = |rows: &[Vec<f64>], n: usize| -> Vec<f64> { (0..uavs).map(|m| rows[m][n]).collect() };
    let solve_slot = |obj: &SlotObjective, start: Vec<f64>| -> Vec<f64> {
        let f_start = obj.value(&start);
        let (mut best, mut fbest) = obj.ascend(start.clone(), pmax, opts);
        if fbest < f_start {
            best = start;
            fbest = f_start;
        }
        if uavs <= VERTEX_SEARCH_MAX_UAVS {
            let (p, f) = obj.ascend(obj.best_vertex(uavs, pmax), pmax, opts);
            if f > fbest {
                best = p;
            }
        }
        best
    };

    let models = || (0..slots).map(|n| SlotModel::new(n, schedule, traj, scenario));
    if kind == ObjectiveKind::Mean {
        for (n, model) in models().enumerate() {
            let obj = SlotObjective { model: &model, kind, base: &[], slots: slots as f64 };
            let p = solve_slot(&obj, slot_powers(&rows, n));
            for m in 0..uavs {
                rows[m][n] = p[m];
            }
        }
    } else {
        let models: Vec<SlotModel> = models().collect();
        let mut sums = vec![0.0; scenario.num_users()];
        for (n, model) in models.iter().enumerate() {
            let r = model.rates(&slot_powers(&rows, n));
            for (m, s) in model.served.iter().enumerate() {
                if let Some(k) = s {
                    sums[*k] += r[m];
                }
            }
        }
        for _ in 0..FAIR_SWEEPS {
            let mut changed = false;
            for (n, model) in models.iter().enumerate() {
                let start = slot_powers(&rows, n);
                let old = model.rates(&start);
                for (m, s) in model.served.iter().enumerate() {
                    if let Some(k) = s {
                        sums[*k] -= old[m];
                    }
                }
                let obj = SlotObjective { model, kind, base: &sums, slots: slots as f64 };
                let p = solve_slot(&obj, start.clone());
                changed |= p != start;
                let new = model.rates(&p);
                for (m, s) in model.served.iter().enumerate() {
                    if let Some(k) = s {
                        sums[*k] += new[m];
                    }
                }
                for m in 0..uavs {
                    rows[m][n] = p[m];
                }
            }
            if !changed {
                break;
            }
        }
    }

    let candidate = PowerProfile::new(rows, pmax)?;
    let rates = rate_tensor(traj, &candidate, scenario)?;
    if kind.evaluate(schedule, &rates)? >= f0 || !is_in_box(power0, pmax) {
        Ok(candidate)
    } else {
        Ok(power0.clone())
    }
}

fn is_in_box(power: &PowerProfile, pmax: f64) -> bool {
    power.rows().iter().flatten().all(|&p| (0.0..=pmax).contains(&p))
}

/// Per-user mean rates for a power profile; convenience for callers that
/// report fairness next to the optimized objective.
pub fn user_rates(
    schedule: &Schedule,
    traj: &Trajectory,
    power: &PowerProfile,
    scenario: &Scenario,
) -> Result<Vec<f64>> {
    user_mean_rates(schedule, &rate_tensor(traj, power, scenario)?)
}
