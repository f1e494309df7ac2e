//! Domain types, the channel model, objectives and constraint checking.

mod channel;
mod feasibility;
mod objective;
mod types;

pub(crate) use channel::gain;
pub use channel::{channel_gain, distance, rate_from_sinr, rate_tensor, sinr};
pub use feasibility::{check_feasibility, check_trajectory, FeasibilityReport, Tolerance, Violation};
pub use objective::{
    objective_logweighted, objective_mean, objective_min, user_mean_rates, ObjectiveKind, DEFAULT_LOG_EPS,
};
pub use types::{
    Area, Point, PowerProfile, RateTensor, Scenario, ScenarioBuilder, Schedule, Solution, Trajectory, DEFAULT_ALTITUDE,
    DEFAULT_AREA, DEFAULT_DMIN, DEFAULT_PMAX, DEFAULT_RHO0, DEFAULT_SIGMA2, DEFAULT_VMAX,
};

use crate::error::Result;

impl Solution {
    /// Evaluates `kind` and the feasibility report for the given blocks.
    pub fn evaluate(
        schedule: Schedule,
        trajectory: Trajectory,
        power: PowerProfile,
        scenario: &Scenario,
        kind: ObjectiveKind,
    ) -> Result<Solution> {
        let rates = rate_tensor(&trajectory, &power, scenario)?;
        let objective = kind.evaluate(&schedule, &rates)?;
        let feasibility = check_feasibility(&schedule, &trajectory, &power, scenario, Tolerance::default());
        Ok(Solution { schedule, trajectory, power, objective, feasibility })
    }
}
