//! Joint user scheduling, trajectory and transmit-power design for
//! multi-UAV downlink networks.
//!
//! The pipeline partitions users with k-means, seeds each UAV with a short
//! closed tour found by a genetic algorithm, and then alternates three
//! block updates until the objective stops improving:
//!
//! 1. per-slot assignment of UAVs to users ([`schedule`]),
//! 2. gradient ascent over waypoints under speed and separation limits
//!    ([`trajectory`]),
//! 3. projected gradient ascent over transmit powers ([`power`]).
//!
//! [`baselines`] provides the static-hover and circular-flight comparison
//! schemes.

#![allow(clippy::needless_range_loop)]

pub mod baselines;
pub mod bcd;
pub mod clustering;
pub mod error;
mod gradient;
pub mod model;
pub mod power;
pub mod schedule;
pub mod tour;
pub mod trajectory;

pub use error::{Error, Result};
pub use model::{ObjectiveKind, Point, PowerProfile, Scenario, Schedule, Solution, Trajectory};
