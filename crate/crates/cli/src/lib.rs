//! Library side of the `uavnet` command-line tool. Each command is a plain
//! function so the integration tests can drive it without a subprocess.

pub mod files;
mod plot;

use std::path::{Path, PathBuf};

use uavnet::baselines::{circular_trajectories, static_deployment};
use uavnet::bcd::{solve, BcdOptions};
use uavnet::model::{
    check_feasibility, rate_tensor, user_mean_rates, Area, Scenario, Solution, Tolerance, DEFAULT_ALTITUDE,
    DEFAULT_AREA,
};
use uavnet::{Error, ObjectiveKind};

pub use files::{ScenarioFile, SolutionFile};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Unreadable, malformed or unsupported input, or an unwritable output.
    #[error("{0}")]
    Input(String),
    #[error("solver failed: {0}")]
    Solver(String),
    #[error("solution is infeasible")]
    Infeasible,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Infeasible => 4,
        }
    }
}

fn solver_error(e: Error) -> CliError {
    match e {
        Error::Unsupported(_) | Error::InvalidScenario(_) | Error::TooFewUsers { .. } => CliError::Input(e.to_string()),
        Error::Infeasible(report) => {
            let lines: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
            CliError::Solver(format!("no feasible design found:\n{}", lines.join("\n")))
        }
        e => CliError::Solver(e.to_string()),
    }
}

pub fn parse_objective(name: &str) -> Result<ObjectiveKind, CliError> {
    match name {
        "mean" => Ok(ObjectiveKind::Mean),
        "min" => Ok(ObjectiveKind::Min),
        "logw" => Ok(ObjectiveKind::log_weighted()),
        other => Err(CliError::Input(format!("unknown objective {other:?} (expected mean, min or logw)"))),
    }
}

#[derive(Clone, Debug)]
pub struct GenerateArgs {
    pub users: usize,
    pub uavs: usize,
    pub seed: u64,
    pub period: f64,
    pub slots: Option<usize>,
    pub area: Option<[f64; 2]>,
    pub altitude: Option<f64>,
    pub out: PathBuf,
}

pub fn cmd_generate(args: &GenerateArgs) -> Result<ScenarioFile, CliError> {
    let [w, h] = args.area.unwrap_or([DEFAULT_AREA.width, DEFAULT_AREA.height]);
    if !(w > 0.0 && h > 0.0 && w.is_finite() && h.is_finite()) {
        return Err(CliError::Input(format!("bad area {w} x {h}")));
    }
    let users = Area { width: w, height: h }.sample_uniform(args.users, args.seed);
    let mut builder = Scenario::builder(users, args.uavs)
        .seed(args.seed)
        .area(w, h)
        .period(args.period)
        .altitude(args.altitude.unwrap_or(DEFAULT_ALTITUDE));
    if let Some(n) = args.slots {
        builder = builder.slots(n);
    }
    let scenario = builder.build().map_err(|e| CliError::Input(format!("invalid scenario: {e}")))?;
    let file = ScenarioFile::from_scenario(&scenario);
    files::write_json(&args.out, &file)?;
    Ok(file)
}

pub fn load_scenario(path: &Path) -> Result<Scenario, CliError> {
    files::read_json::<ScenarioFile>(path)?.to_scenario()
}

#[derive(Clone, Debug)]
pub struct SolveArgs {
    pub scenario: PathBuf,
    pub out: PathBuf,
    pub objective: ObjectiveKind,
    pub tol: Option<f64>,
    pub max_outer: Option<usize>,
    pub power_opt: bool,
    pub kmeans_init: bool,
}

pub fn cmd_solve(args: &SolveArgs) -> Result<SolutionFile, CliError> {
    let scenario = load_scenario(&args.scenario)?;
    let defaults = BcdOptions::default();
    let opts = BcdOptions {
        objective: args.objective,
        rel_gain_tol: args.tol.unwrap_or(defaults.rel_gain_tol),
        max_outer: args.max_outer.unwrap_or(defaults.max_outer),
        use_power_opt: args.power_opt,
        use_kmeans_init: args.kmeans_init,
        ..defaults
    };
    opts.validate().map_err(|e| CliError::Input(e.to_string()))?;
    let result = solve(&scenario, &opts).map_err(solver_error)?;
    let file = SolutionFile::new(args.objective.name(), &result.solution, &result.trace);
    files::write_json(&args.out, &file)?;
    Ok(file)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BaselineKind {
    Static,
    Circular,
}

impl std::str::FromStr for BaselineKind {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "static" => Ok(BaselineKind::Static),
            "circular" => Ok(BaselineKind::Circular),
            other => Err(CliError::Input(format!("unknown baseline {other:?} (expected static or circular)"))),
        }
    }
}

pub fn cmd_baseline(scenario_path: &Path, kind: BaselineKind, out: &Path) -> Result<SolutionFile, CliError> {
    let scenario = load_scenario(scenario_path)?;
    let opts = BcdOptions::default();
    let solution = match kind {
        BaselineKind::Static => static_deployment(&scenario, &opts),
        BaselineKind::Circular => circular_trajectories(&scenario, &opts),
    }
    .map_err(solver_error)?;
    let file = SolutionFile::new(opts.objective.name(), &solution, &[]);
    files::write_json(out, &file)?;
    Ok(file)
}

/// Metrics printed by `eval`.
#[derive(Clone, Debug)]
pub struct EvalReport {
    /// `None` when the schedule cannot be evaluated (unknown users).
    pub mean: Option<f64>,
    pub min: Option<f64>,
    pub user_rates: Vec<f64>,
    pub feasible: bool,
    pub max_violation: f64,
    pub violations: Vec<String>,
}

impl EvalReport {
    pub fn render(&self) -> String {
        let fmt = |v: Option<f64>| v.map_or("n/a".to_string(), |x| x.to_string());
        let mut out = String::new();
        out.push_str(&format!("mean_bps_hz={}\n", fmt(self.mean)));
        out.push_str(&format!("min_bps_hz={}\n", fmt(self.min)));
        for (k, r) in self.user_rates.iter().enumerate() {
            out.push_str(&format!("user_{k}_bps_hz={r}\n"));
        }
        out.push_str(&format!("verdict={}\n", if self.feasible { "feasible" } else { "infeasible" }));
        out.push_str(&format!("max_violation={}\n", self.max_violation));
        for v in &self.violations {
            out.push_str(&format!("violation: {v}\n"));
        }
        out
    }
}

fn load_solution(scenario: &Scenario, path: &Path) -> Result<Solution, CliError> {
    let file: SolutionFile = files::read_json(path)?;
    let (m, n) = (scenario.num_uavs(), scenario.num_slots());
    let shapes = [
        ("trajectories", file.trajectories.len(), file.trajectories.first().map_or(0, Vec::len)),
        ("powers_w", file.powers_w.len(), file.powers_w.first().map_or(0, Vec::len)),
        ("schedule", file.schedule.len(), file.schedule.first().map_or(0, Vec::len)),
    ];
    for (what, rows, cols) in shapes {
        if (rows, cols) != (m, n) {
            return Err(CliError::Input(format!("{what} is {rows}x{cols}, scenario needs {m}x{n}")));
        }
    }
    let (schedule, trajectory, power) = (file.schedule()?, file.trajectory()?, file.power()?);
    let feasibility = check_feasibility(&schedule, &trajectory, &power, scenario, Tolerance::default());
    Ok(Solution { schedule, trajectory, power, objective: file.objective_bps_hz, feasibility })
}

pub fn cmd_eval(scenario_path: &Path, solution_path: &Path) -> Result<EvalReport, CliError> {
    let scenario = load_scenario(scenario_path)?;
    let sol = load_solution(&scenario, solution_path)?;
    let rates = rate_tensor(&sol.trajectory, &sol.power, &scenario).map_err(|e| CliError::Input(e.to_string()))?;
    let evaluate = |kind: ObjectiveKind| kind.evaluate(&sol.schedule, &rates).ok();
    Ok(EvalReport {
        mean: evaluate(ObjectiveKind::Mean),
        min: evaluate(ObjectiveKind::Min),
        user_rates: user_mean_rates(&sol.schedule, &rates).unwrap_or_default(),
        feasible: sol.feasibility.is_feasible(),
        max_violation: sol.feasibility.max_magnitude(),
        violations: sol.feasibility.violations.iter().map(|v| v.to_string()).collect(),
    })
}

/// Writes the SVG to `out` and the per-waypoint CSV next to it; returns the
/// CSV path.
pub fn cmd_plot(scenario_path: &Path, solution_path: &Path, out: &Path) -> Result<PathBuf, CliError> {
    let scenario = load_scenario(scenario_path)?;
    let sol = load_solution(&scenario, solution_path)?;
    let svg = plot::render_svg(&scenario, &sol);
    std::fs::write(out, svg).map_err(|e| CliError::Input(format!("cannot write {}: {e}", out.display())))?;
    let csv_path = out.with_extension("csv");
    plot::write_csv(&csv_path, &sol)?;
    Ok(csv_path)
}
