//! The `navplan` command line: `profile`, `run` and `bench`.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage or input error,
//! 3 collision, 4 timeout.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::dynamics::{build_profile, fit_report, DynamicsProfile, PlantModel};
use crate::sim::{run_scenario, PlanTiming, RunOutcome, Scenario, WorldOptions};
use crate::timing::{candidate_sweep, linear_fit, median_by_x, neighbor_sweep, SweepRow};
use crate::vehicle::VehicleParams;
use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_COLLISION: i32 = 3;
pub const EXIT_TIMEOUT: i32 = 4;

/// Environment variable holding the log filter, e.g. `NAVPLAN_LOG=debug`.
pub const LOG_ENV: &str = "NAVPLAN_LOG";

pub const NEIGHBOR_COUNTS: [usize; 10] = [5, 10, 15, 20, 25, 30, 35, 40, 45, 50];
pub const CANDIDATE_GRIDS: [usize; 7] = [3, 5, 7, 9, 11, 13, 15];

#[derive(Debug, Parser)]
#[command(name = "navplan", version, about = "Arc-guided maneuver planner and closed-loop simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Drive the plant through the profiling trials and fit the envelopes.
    Profile(ProfileArgs),
    /// Run one scenario.
    Run(RunArgs),
    /// Run every scenario in a directory and report planner timings.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct ProfileArgs {
    /// Vehicle parameter file, or a preset name (hatchback, sports_car, suv).
    pub vehicle: String,
    /// Plant model file, or a preset name.
    pub plant: String,
    /// Output profile file.
    #[arg(short, long)]
    pub output: PathBuf,
    /// Manifest path; defaults to `<output>.manifest.json`.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    pub scenario: PathBuf,
    /// Dynamics profile file; built from the scenario's plant when absent.
    #[arg(long)]
    pub profile: Option<PathBuf>,
    /// Overrides the scenario seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Trajectory log (CSV).
    #[arg(long)]
    pub log: Option<PathBuf>,
    /// Summary metrics (JSON).
    #[arg(long)]
    pub metrics: Option<PathBuf>,
    /// Every evaluated candidate of every cycle (CSV).
    #[arg(long)]
    pub dump_costs: Option<PathBuf>,
    /// Longest planning horizon in seconds; fallbacks halve it three times.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Physics tick in seconds; must divide the planning period.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Check every collision-free verdict against the dense reference.
    #[arg(long)]
    pub verify_sampling: bool,
    /// Manifest path; defaults to one beside the first output.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Directory of scenario files (`*.json`).
    pub suite: PathBuf,
    /// Also sweep neighbor count and candidate count on synthetic scenes.
    #[arg(long)]
    pub neighbors_sweep: bool,
    /// Runs per scenario and per sweep point.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub repeat: u32,
    /// Aggregate timing CSV.
    #[arg(short, long, default_value = "bench.csv")]
    pub out: PathBuf,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

/// Record of one invocation, written beside its outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub args: Vec<String>,
    pub inputs: Vec<String>,
    pub seed: Option<u64>,
    /// Effective settings after flags were applied.
    pub settings: serde_json::Value,
    pub outputs: Vec<String>,
    pub code_version: String,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub exit_code: i32,
}

fn now_unix() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64())
}

/// Writes through a temporary sibling and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> std::io::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)
}

fn manifest_beside(output: &Path) -> PathBuf {
    let mut name = output.file_stem().map(OsString::from).unwrap_or_default();
    name.push(".manifest.json");
    output.with_file_name(name)
}

/// An error with the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Invalid(_) | Error::Json(_) | Error::Io(_) => EXIT_USAGE,
            _ => EXIT_FAILURE,
        };
        Self { code, message: e.to_string() }
    }
}

fn write_output(path: &Path, contents: &[u8]) -> Result<(), Failure> {
    write_atomic(path, contents).map_err(|e| Failure { code: EXIT_FAILURE, message: format!("{}: {e}", path.display()) })
}

fn read_input(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

pub fn outcome_code(outcome: RunOutcome) -> i32 {
    match outcome {
        RunOutcome::Completed => EXIT_OK,
        RunOutcome::Collision => EXIT_COLLISION,
        RunOutcome::Timeout => EXIT_TIMEOUT,
    }
}

/// Ranks exit codes for the suite verdict: a collision outranks a timeout.
fn severity(code: i32) -> u8 {
    match code {
        EXIT_OK => 0,
        EXIT_TIMEOUT => 1,
        EXIT_COLLISION => 2,
        _ => 3,
    }
}

/// Parses `args` (program name first) and runs the command. Returns the exit
/// code; messages go to stdout and stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let argv: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    match execute(cli.command, argv) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn execute(command: Command, argv: Vec<String>) -> Result<i32, Failure> {
    let started = now_unix();
    let (mut manifest, path) = match command {
        Command::Profile(a) => cmd_profile(&a)?,
        Command::Run(a) => cmd_run(&a)?,
        Command::Bench(a) => cmd_bench(&a)?,
    };
    manifest.args = argv;
    manifest.started_unix = started;
    manifest.finished_unix = now_unix();
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write_output(&path, text.as_bytes())?;
    Ok(manifest.exit_code)
}

fn manifest(command: &str, inputs: Vec<String>, seed: Option<u64>, settings: serde_json::Value) -> RunManifest {
    RunManifest {
        command: command.into(),
        args: Vec::new(),
        inputs,
        seed,
        settings,
        outputs: Vec::new(),
        code_version: env!("CARGO_PKG_VERSION").into(),
        started_unix: 0.0,
        finished_unix: 0.0,
        exit_code: EXIT_OK,
    }
}

fn load_vehicle(arg: &str) -> Result<VehicleParams, Failure> {
    let path = Path::new(arg);
    if !path.exists() {
        if let Some(p) = VehicleParams::preset(arg) {
            return Ok(p);
        }
    }
    let text = read_input(path)?;
    let p: VehicleParams = serde_json::from_str(&text).map_err(|e| Failure::usage(format!("{arg}: {e}")))?;
    p.validate().map_err(|e| Failure::usage(format!("{arg}: {e}")))?;
    Ok(p)
}

fn load_plant(arg: &str) -> Result<PlantModel, Failure> {
    let path = Path::new(arg);
    if !path.exists() {
        if let Some(p) = PlantModel::preset(arg) {
            return Ok(p);
        }
    }
    let text = read_input(path)?;
    let p: PlantModel = serde_json::from_str(&text).map_err(|e| Failure::usage(format!("{arg}: {e}")))?;
    p.validate().map_err(|e| Failure::usage(format!("{arg}: {e}")))?;
    Ok(p)
}

/// Profiles `vehicle` on `plant` and writes the fitted envelopes.
pub fn cmd_profile(a: &ProfileArgs) -> Result<(RunManifest, PathBuf), Failure> {
    let params = load_vehicle(&a.vehicle)?;
    let plant = load_plant(&a.plant)?;
    let (profile, trials) = build_profile(&plant, &params).map_err(|e| Failure { code: EXIT_FAILURE, message: e.to_string() })?;
    let report = fit_report(&profile, &trials);
    write_output(&a.output, profile.to_json()?.as_bytes())?;

    println!("profile for '{}' on plant '{}'", params.name, plant.name);
    for (name, rms, peak) in [
        ("accel", report.accel_rms, report.accel_peak),
        ("decel", report.decel_rms, report.decel_peak),
        ("steer_rate", report.steer_rms, report.steer_peak),
    ] {
        println!("  {name:<10} rms {rms:.5}  peak {peak:.4}  ({:.3}% of peak)", 100.0 * rms / peak);
    }
    println!("  top speed {:.2} m/s", profile.achieved_max_speed);

    let mut m = manifest("profile", vec![a.vehicle.clone(), a.plant.clone()], None, json!({ "fit": report }));
    m.outputs.push(a.output.display().to_string());
    let path = a.manifest.clone().unwrap_or_else(|| manifest_beside(&a.output));
    Ok((m, path))
}

/// The scenario with the run flags applied.
pub fn apply_overrides(mut s: Scenario, a: &RunArgs) -> Result<Scenario, Failure> {
    if let Some(seed) = a.seed {
        s.seed = seed;
    }
    if let Some(tau) = a.tau {
        if !(tau > 0.0) {
            return Err(Failure::usage("--tau must be positive"));
        }
        s.planner.tau_schedule = (0..4).map(|k| tau / f64::from(1 << k)).collect();
    }
    if let Some(dt) = a.dt {
        s.dt = dt;
    }
    s.validate().map_err(|e| Failure::usage(e.to_string()))?;
    Ok(s)
}

pub fn cmd_run(a: &RunArgs) -> Result<(RunManifest, PathBuf), Failure> {
    let text = read_input(&a.scenario)?;
    let scenario = Scenario::from_json(&text, &a.scenario.display().to_string())?;
    let scenario = apply_overrides(scenario, a)?;
    let profile = match &a.profile {
        Some(p) => {
            Some(DynamicsProfile::from_json(&read_input(p)?).map_err(|e| Failure::usage(format!("{}: {e}", p.display())))?)
        }
        None => None,
    };
    let options = WorldOptions { verify_sampling: a.verify_sampling, dump_costs: a.dump_costs.is_some() };
    let result = run_scenario(&scenario, profile, options)?;
    let m = &result.metrics;

    let mut outputs = Vec::new();
    if let Some(p) = &a.log {
        write_output(p, result.log.to_csv().as_bytes())?;
        outputs.push(p.clone());
    }
    if let Some(p) = &a.metrics {
        write_output(p, m.to_json().as_bytes())?;
        outputs.push(p.clone());
    }
    if let Some(p) = &a.dump_costs {
        write_output(p, result.cost_dump.as_bytes())?;
        outputs.push(p.clone());
    }

    println!(
        "{}: {:?} at t={:.2}s, distance {:.1} m, {} lane change(s), {} stop(s), plan time mean {:.2} ms",
        m.scenario,
        m.outcome,
        m.sim_time,
        m.distance,
        m.lane_changes.len(),
        m.stops.len(),
        m.plan_time_mean_ms
    );
    if let Some(with) = &m.collision_with {
        println!("collision with '{with}'");
    }

    let mut man = manifest(
        "run",
        vec![a.scenario.display().to_string()].into_iter().chain(a.profile.iter().map(|p| p.display().to_string())).collect(),
        Some(scenario.seed),
        json!({
            "dt": scenario.dt,
            "tau_schedule": scenario.planner.tau_schedule,
            "verify_sampling": a.verify_sampling,
            "outcome": m.outcome,
        }),
    );
    man.exit_code = outcome_code(m.outcome);
    man.outputs = outputs.iter().map(|p| p.display().to_string()).collect();
    let path = a
        .manifest
        .clone()
        .or_else(|| outputs.first().map(|p| manifest_beside(p)))
        .unwrap_or_else(|| PathBuf::from(format!("{}.manifest.json", scenario.name)));
    Ok((man, path))
}

/// Scenario files of a suite directory in name order.
pub fn suite_files(dir: &Path) -> Result<Vec<PathBuf>, Failure> {
    let entries = std::fs::read_dir(dir).map_err(|e| Failure::usage(format!("{}: {e}", dir.display())))?;
    let mut files: Vec<PathBuf> =
        entries.filter_map(|e| e.ok().map(|e| e.path())).filter(|p| p.extension().is_some_and(|x| x == "json")).collect();
    files.sort();
    Ok(files)
}

pub const BENCH_HEADER: &str = "source,repeat,t,neighbors,candidates,evaluated,plan_us,collision_us,cost_us\n";

fn cycle_row(out: &mut String, source: &str, repeat: usize, t: &PlanTiming) {
    let _ = writeln!(
        out,
        "{source},{repeat},{:.4},{},{},{},{:.3},{:.3},{:.3}",
        t.t, t.neighbors, t.candidates, t.evaluated, t.plan_us, t.collision_us, t.cost_us
    );
}

/// Sweep rows carry the swept quantity in its own column and leave the
/// others empty.
fn sweep_rows(out: &mut String, source: &str, rows: &[SweepRow]) {
    for r in rows {
        let (n, e) =
            if source == "sweep-neighbors" { (r.x.to_string(), String::new()) } else { (String::new(), r.x.to_string()) };
        let _ = writeln!(out, "{source},{},,{n},,{e},{:.3},{:.3},{:.3}", r.repeat, r.plan_us, r.collision_us, r.cost_us);
    }
}

fn report_fit(label: &str, pts: &[(f64, f64)]) -> serde_json::Value {
    match linear_fit(pts) {
        Some(f) => {
            println!("fit {label}: slope {:.4} us/unit, intercept {:.1} us, R^2 {:.4}", f.slope, f.intercept, f.r2);
            json!({ "series": label, "slope": f.slope, "intercept": f.intercept, "r2": f.r2, "points": pts.len() })
        }
        None => {
            println!("fit {label}: not enough distinct points");
            json!({ "series": label, "points": pts.len() })
        }
    }
}

pub fn cmd_bench(a: &BenchArgs) -> Result<(RunManifest, PathBuf), Failure> {
    let files = suite_files(&a.suite)?;
    if files.is_empty() {
        return Err(Failure::usage(format!("{}: no scenario files", a.suite.display())));
    }
    let repeat = a.repeat as usize;
    let mut csv = String::from(BENCH_HEADER);
    let mut worst = EXIT_OK;
    let mut cycles: Vec<PlanTiming> = Vec::new();
    for f in &files {
        let scenario = Scenario::from_json(&read_input(f)?, &f.display().to_string())?;
        for r in 0..repeat {
            let result = run_scenario(&scenario, None, WorldOptions::default())?;
            let code = outcome_code(result.metrics.outcome);
            println!("{:<32} run {r}: {:?}", scenario.name, result.metrics.outcome);
            if severity(code) > severity(worst) {
                worst = code;
            }
            for t in &result.timings {
                cycle_row(&mut csv, &scenario.name, r, t);
            }
            cycles.extend(result.timings);
        }
    }
    let mut fits = vec![
        report_fit("plan_us~neighbors", &cycles.iter().map(|t| (t.neighbors as f64, t.plan_us)).collect::<Vec<_>>()),
        report_fit("cost_us~evaluated", &cycles.iter().map(|t| (t.evaluated as f64, t.cost_us)).collect::<Vec<_>>()),
    ];
    if a.neighbors_sweep {
        let rows = neighbor_sweep(&NEIGHBOR_COUNTS, repeat)?;
        sweep_rows(&mut csv, "sweep-neighbors", &rows);
        fits.push(report_fit("sweep collision_us~neighbors", &median_by_x(&rows, |r| r.collision_us)));
        let rows = candidate_sweep(&CANDIDATE_GRIDS, repeat)?;
        sweep_rows(&mut csv, "sweep-candidates", &rows);
        fits.push(report_fit("sweep cost_us~evaluated", &median_by_x(&rows, |r| r.cost_us)));
    }
    write_output(&a.out, csv.as_bytes())?;

    let mut m = manifest(
        "bench",
        files.iter().map(|p| p.display().to_string()).collect(),
        None,
        json!({ "repeat": repeat, "neighbors_sweep": a.neighbors_sweep, "fits": fits }),
    );
    m.exit_code = worst;
    m.outputs.push(a.out.display().to_string());
    let path = a.manifest.clone().unwrap_or_else(|| manifest_beside(&a.out));
    Ok((m, path))
}

/// Initialises logging from [`LOG_ENV`]; warnings and errors by default.
pub fn init_logging() {
    let env = env_logger::Env::new().filter_or(LOG_ENV, "warn");
    let _ = env_logger::Builder::from_env(env).format_timestamp(None).try_init();
}
