use std::ops::{Add, AddAssign, Mul, Sub, SubAssign};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Horizontal position in meters.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn dist(self, other: Point) -> f64 {
        (self - other).norm()
    }

    pub fn dist_sq(self, other: Point) -> f64 {
        (self - other).norm_sq()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Arithmetic mean; `None` for an empty slice.
    pub fn centroid(points: &[Point]) -> Option<Point> {
        if points.is_empty() {
            return None;
        }
        let mut acc = Point::default();
        for &p in points {
            acc += p;
        }
        Some(acc * (1.0 / points.len() as f64))
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

impl AddAssign for Point {
    fn add_assign(&mut self, rhs: Point) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl SubAssign for Point {
    fn sub_assign(&mut self, rhs: Point) {
        self.x -= rhs.x;
        self.y -= rhs.y;
    }
}

/// Axis-aligned serving rectangle `[0, width] x [0, height]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Area {
    pub width: f64,
    pub height: f64,
}

impl Area {
    pub fn contains(&self, p: Point) -> bool {
        p.x >= 0.0 && p.x <= self.width && p.y >= 0.0 && p.y <= self.height
    }

    pub fn center(&self) -> Point {
        Point::new(self.width / 2.0, self.height / 2.0)
    }

    /// `count` points drawn uniformly from the area.
    pub fn sample_uniform(&self, count: usize, seed: u64) -> Vec<Point> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count).map(|_| Point::new(rng.gen_range(0.0..=self.width), rng.gen_range(0.0..=self.height))).collect()
    }
}

/// A validated problem instance.
///
/// Construct through [`ScenarioBuilder`]; every field is checked once and the
/// scenario is immutable afterwards.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    users: Vec<Point>,
    uavs: usize,
    period: f64,
    slots: usize,
    altitude: f64,
    vmax: f64,
    dmin: f64,
    pmax: f64,
    rho0: f64,
    sigma2: f64,
    area: Area,
    seed: u64,
}

impl Scenario {
    pub fn builder(users: Vec<Point>, uavs: usize) -> ScenarioBuilder {
        ScenarioBuilder::new(users, uavs)
    }

    pub fn users(&self) -> &[Point] {
        &self.users
    }
    pub fn num_users(&self) -> usize {
        self.users.len()
    }
    pub fn num_uavs(&self) -> usize {
        self.uavs
    }
    pub fn period(&self) -> f64 {
        self.period
    }
    pub fn num_slots(&self) -> usize {
        self.slots
    }
    pub fn slot_len(&self) -> f64 {
        self.period / self.slots as f64
    }
    pub fn altitude(&self) -> f64 {
        self.altitude
    }
    pub fn vmax(&self) -> f64 {
        self.vmax
    }
    /// Longest distance a UAV may cover in one slot.
    pub fn max_step(&self) -> f64 {
        self.vmax * self.slot_len()
    }
    pub fn dmin(&self) -> f64 {
        self.dmin
    }
    pub fn pmax(&self) -> f64 {
        self.pmax
    }
    pub fn rho0(&self) -> f64 {
        self.rho0
    }
    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }
    pub fn area(&self) -> Area {
        self.area
    }
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Same users and constants with a different period and slot count.
    pub fn with_period(&self, period: f64, slots: usize) -> Result<Scenario> {
        ScenarioBuilder::from(self.clone()).period(period).slots(slots).build()
    }
}

/// Builder with the simulation defaults used throughout the crate:
/// 2 km x 2 km area, 50 m/s, 0.1 W, -110 dBm noise, -60 dB reference gain,
/// 50 m separation, 100 m altitude, 1 s slots.
#[derive(Clone, Debug)]
pub struct ScenarioBuilder {
    users: Vec<Point>,
    uavs: usize,
    period: f64,
    slots: Option<usize>,
    altitude: f64,
    vmax: f64,
    dmin: f64,
    pmax: f64,
    rho0: f64,
    sigma2: f64,
    area: Area,
    seed: u64,
}

pub const DEFAULT_AREA: Area = Area { width: 2000.0, height: 2000.0 };
pub const DEFAULT_ALTITUDE: f64 = 100.0;
pub const DEFAULT_VMAX: f64 = 50.0;
pub const DEFAULT_DMIN: f64 = 50.0;
pub const DEFAULT_PMAX: f64 = 0.1;
pub const DEFAULT_RHO0: f64 = 1e-6;
pub const DEFAULT_SIGMA2: f64 = 1e-14;

impl ScenarioBuilder {
    pub fn new(users: Vec<Point>, uavs: usize) -> Self {
        Self {
            users,
            uavs,
            period: 210.0,
            slots: None,
            altitude: DEFAULT_ALTITUDE,
            vmax: DEFAULT_VMAX,
            dmin: DEFAULT_DMIN,
            pmax: DEFAULT_PMAX,
            rho0: DEFAULT_RHO0,
            sigma2: DEFAULT_SIGMA2,
            area: DEFAULT_AREA,
            seed: 0,
        }
    }

    pub fn period(mut self, period: f64) -> Self {
        self.period = period;
        self
    }
    /// Defaults to one slot per second of period.
    pub fn slots(mut self, slots: usize) -> Self {
        self.slots = Some(slots);
        self
    }
    pub fn altitude(mut self, h: f64) -> Self {
        self.altitude = h;
        self
    }
    pub fn vmax(mut self, v: f64) -> Self {
        self.vmax = v;
        self
    }
    pub fn dmin(mut self, d: f64) -> Self {
        self.dmin = d;
        self
    }
    pub fn pmax(mut self, p: f64) -> Self {
        self.pmax = p;
        self
    }
    pub fn rho0(mut self, rho0: f64) -> Self {
        self.rho0 = rho0;
        self
    }
    pub fn sigma2(mut self, s: f64) -> Self {
        self.sigma2 = s;
        self
    }
    pub fn area(mut self, width: f64, height: f64) -> Self {
        self.area = Area { width, height };
        self
    }
    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn build(self) -> Result<Scenario> {
        let bad = |msg: String| Err(Error::InvalidScenario(msg));
        if self.users.is_empty() {
            return bad("at least one user is required".into());
        }
        if self.uavs == 0 {
            return bad("at least one UAV is required".into());
        }
        let slots = match self.slots {
            Some(n) => n,
            None => {
                if !(self.period.is_finite() && self.period >= 2.0) {
                    return bad(format!("cannot derive slot count from period {}", self.period));
                }
                self.period.round() as usize
            }
        };
        if slots < 2 {
            return bad(format!("slot count must be at least 2, got {slots}"));
        }
        let positive = [
            ("period", self.period),
            ("altitude", self.altitude),
            ("vmax", self.vmax),
            ("pmax", self.pmax),
            ("rho0", self.rho0),
            ("sigma2", self.sigma2),
            ("area width", self.area.width),
            ("area height", self.area.height),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be finite and positive, got {v}"));
            }
        }
        if !(self.dmin.is_finite() && self.dmin >= 0.0) {
            return bad(format!("dmin must be finite and non-negative, got {}", self.dmin));
        }
        for (k, u) in self.users.iter().enumerate() {
            if !u.is_finite() || !self.area.contains(*u) {
                return bad(format!("user {k} at ({}, {}) lies outside the area", u.x, u.y));
            }
        }
        Ok(Scenario {
            users: self.users,
            uavs: self.uavs,
            period: self.period,
            slots,
            altitude: self.altitude,
            vmax: self.vmax,
            dmin: self.dmin,
            pmax: self.pmax,
            rho0: self.rho0,
            sigma2: self.sigma2,
            area: self.area,
            seed: self.seed,
        })
    }
}

impl From<Scenario> for ScenarioBuilder {
    fn from(s: Scenario) -> Self {
        Self {
            users: s.users,
            uavs: s.uavs,
            period: s.period,
            slots: Some(s.slots),
            altitude: s.altitude,
            vmax: s.vmax,
            dmin: s.dmin,
            pmax: s.pmax,
            rho0: s.rho0,
            sigma2: s.sigma2,
            area: s.area,
            seed: s.seed,
        }
    }
}

/// Waypoints `q_m[n]` for every UAV. Rows are cyclic: the slot after `N - 1`
/// is slot `0`, which is how periodicity is represented.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    rows: Vec<Vec<Point>>,
}

impl Trajectory {
    pub fn new(rows: Vec<Vec<Point>>) -> Result<Self> {
        let n = rows.first().map(Vec::len).unwrap_or(0);
        if rows.is_empty() || n == 0 {
            return Err(Error::Dimension("trajectory must have at least one UAV and one slot".into()));
        }
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension("trajectory rows have different lengths".into()));
        }
        if rows.iter().flatten().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("trajectory waypoint"));
        }
        Ok(Self { rows })
    }

    /// Every UAV hovering at its own point for `slots` slots.
    pub fn hover(points: &[Point], slots: usize) -> Result<Self> {
        Self::new(points.iter().map(|&p| vec![p; slots]).collect())
    }

    pub fn num_uavs(&self) -> usize {
        self.rows.len()
    }
    pub fn num_slots(&self) -> usize {
        self.rows[0].len()
    }
    pub fn get(&self, m: usize, n: usize) -> Point {
        self.rows[m][n]
    }
    pub fn row(&self, m: usize) -> &[Point] {
        &self.rows[m]
    }
    pub fn rows(&self) -> &[Vec<Point>] {
        &self.rows
    }
    pub fn into_rows(self) -> Vec<Vec<Point>> {
        self.rows
    }
}

/// Transmit powers `p_m[n]` in watts.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerProfile {
    rows: Vec<Vec<f64>>,
}

impl PowerProfile {
    pub fn new(rows: Vec<Vec<f64>>, pmax: f64) -> Result<Self> {
        let n = rows.first().map(Vec::len).unwrap_or(0);
        if rows.is_empty() || n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension("power profile must be a non-empty rectangle".into()));
        }
        if let Some(p) = rows.iter().flatten().find(|p| !(p.is_finite() && **p >= 0.0 && **p <= pmax)) {
            return Err(Error::InvalidOptions(format!("power {p} outside [0, {pmax}]")));
        }
        Ok(Self { rows })
    }

    /// Skips the box check; used when loading files whose feasibility is
    /// reported rather than enforced.
    pub fn new_unchecked(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.first().map(Vec::len).unwrap_or(0);
        if rows.is_empty() || n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension("power profile must be a non-empty rectangle".into()));
        }
        if rows.iter().flatten().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("power"));
        }
        Ok(Self { rows })
    }

    pub fn constant(uavs: usize, slots: usize, p: f64) -> Self {
        Self { rows: vec![vec![p; slots]; uavs] }
    }

    pub fn num_uavs(&self) -> usize {
        self.rows.len()
    }
    pub fn num_slots(&self) -> usize {
        self.rows[0].len()
    }
    pub fn get(&self, m: usize, n: usize) -> f64 {
        self.rows[m][n]
    }
    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }
}

/// Per-slot association: `serve[m][n] = Some(k)` when UAV `m` serves user `k`
/// in slot `n`. One user per UAV holds by representation; a user appearing
/// under two UAVs in the same slot is reported by the feasibility check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Schedule {
    serve: Vec<Vec<Option<usize>>>,
}

impl Schedule {
    pub fn new(serve: Vec<Vec<Option<usize>>>) -> Result<Self> {
        let n = serve.first().map(Vec::len).unwrap_or(0);
        if serve.is_empty() || n == 0 || serve.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension("schedule must be a non-empty rectangle".into()));
        }
        Ok(Self { serve })
    }

    pub fn idle(uavs: usize, slots: usize) -> Self {
        Self { serve: vec![vec![None; slots]; uavs] }
    }

    pub fn num_uavs(&self) -> usize {
        self.serve.len()
    }
    pub fn num_slots(&self) -> usize {
        self.serve[0].len()
    }
    pub fn get(&self, m: usize, n: usize) -> Option<usize> {
        self.serve[m][n]
    }
    pub fn rows(&self) -> &[Vec<Option<usize>>] {
        &self.serve
    }
    pub(crate) fn set(&mut self, m: usize, n: usize, k: Option<usize>) {
        self.serve[m][n] = k;
    }

    /// Largest user index referenced, if any.
    pub fn max_user(&self) -> Option<usize> {
        self.serve.iter().flatten().flatten().copied().max()
    }
}

/// Spectral efficiencies `r[k][m][n] = log2(1 + sinr)` in bps/Hz.
#[derive(Clone, Debug, PartialEq)]
pub struct RateTensor {
    users: usize,
    uavs: usize,
    slots: usize,
    data: Vec<f64>,
}

impl RateTensor {
    pub fn from_fn(users: usize, uavs: usize, slots: usize, mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(users * uavs * slots);
        for k in 0..users {
            for m in 0..uavs {
                for n in 0..slots {
                    data.push(f(k, m, n));
                }
            }
        }
        Self { users, uavs, slots, data }
    }

    pub fn num_users(&self) -> usize {
        self.users
    }
    pub fn num_uavs(&self) -> usize {
        self.uavs
    }
    pub fn num_slots(&self) -> usize {
        self.slots
    }

    #[inline]
    pub fn get(&self, k: usize, m: usize, n: usize) -> f64 {
        self.data[(k * self.uavs + m) * self.slots + n]
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { data: self.data.iter().map(|r| r * c).collect(), ..*self }
    }
}

/// A complete operating point with its evaluated objective.
#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub schedule: Schedule,
    pub trajectory: Trajectory,
    pub power: PowerProfile,
    pub objective: f64,
    pub feasibility: super::FeasibilityReport,
}

impl RateTensor {
    pub(crate) fn check_schedule(&self, schedule: &Schedule) -> Result<()> {
        if schedule.num_uavs() != self.uavs || schedule.num_slots() != self.slots {
            return Err(Error::Dimension(format!(
                "schedule is {}x{}, rates expect {}x{}",
                schedule.num_uavs(),
                schedule.num_slots(),
                self.uavs,
                self.slots
            )));
        }
        if let Some(k) = schedule.max_user() {
            if k >= self.users {
                return Err(Error::Dimension(format!("schedule references user {k} of {}", self.users)));
            }
        }
        Ok(())
    }
}
