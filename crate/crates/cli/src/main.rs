use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use hybrid_ik::benchmark::{
    export_time_distribution, generate_queries, run_benchmark, write_report_csv, write_summary_json, BenchMode,
    BenchOptions, PRNG,
};
use hybrid_ik::fabrik::{self, ChainState, FabrikStatus, JointSpec};
use hybrid_ik::io::{fmt_f64, read_pose};
use hybrid_ik::solver::reduced_problems;
use hybrid_ik::tracking::{self, Scenario};
use hybrid_ik::{IkQuery, IkStatus, RobotKind, RobotModel, SolveMode, SolverConfig, Vec3};
use serde_json::{json, Value};

const EXIT_USAGE: u8 = 1;
const EXIT_UNREACHABLE: u8 = 2;
const EXIT_FAILED: u8 = 3;

#[derive(Parser)]
#[command(
    name = "hybrid-ik",
    version,
    about = "FABRIK + SQP inverse kinematics for the UR5 and KUKA LBR iiwa 14"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one pose and print the result as JSON.
    Solve(SolveArgs),
    /// Run a seeded random-query benchmark and write per-mode reports.
    Bench(BenchArgs),
    /// Record the FABRIK distance-to-target series of one chain problem.
    Trace(TraceArgs),
    /// Track the two-phase waypoint scenario with warm starts.
    Track(TrackArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Robot {
    Ur5,
    Kuka,
}

impl From<Robot> for RobotKind {
    fn from(r: Robot) -> Self {
        match r {
            Robot::Ur5 => RobotKind::Ur5,
            Robot::Kuka => RobotKind::Kuka,
        }
    }
}

#[derive(Args)]
struct RobotArgs {
    #[arg(long, value_enum)]
    robot: Option<Robot>,
    /// Robot model JSON overriding the built-in table.
    #[arg(long)]
    model: Option<PathBuf>,
}

impl RobotArgs {
    fn load(&self) -> Result<RobotModel> {
        match (&self.model, self.robot) {
            (Some(path), robot) => {
                let model = RobotModel::from_json_file(path)?;
                if let Some(r) = robot {
                    let kind = RobotKind::from(r);
                    ensure!(
                        model.kind() == kind,
                        "--model describes {} but --robot is {kind}",
                        model.kind()
                    );
                }
                Ok(model)
            }
            (None, Some(r)) => Ok(RobotModel::builtin(r.into())),
            (None, None) => bail!("either --robot or --model is required"),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Combined,
    Fabrik,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    robot: RobotArgs,
    /// Pose JSON: {"position": [x, y, z], "rotation": [[...], [...], [...]]}, row-major.
    #[arg(long)]
    pose: PathBuf,
    /// Initial joint angles, comma separated (default: all zero).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    init: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
    /// FABRIK sweeps before the optimizer takes over (default: 5 for ur5, 15 for kuka).
    #[arg(long)]
    n_l: Option<usize>,
    #[arg(long, value_enum, default_value = "combined")]
    mode: Mode,
    /// Sweep cap in fabrik mode.
    #[arg(long, default_value_t = 100)]
    n_max: usize,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    robot: RobotArgs,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated modes, each combined:<n_l> or fabrik:<n_max>
    /// (default: the robot's combined mode and fabrik:100,500,900).
    #[arg(long, value_delimiter = ',')]
    modes: Option<Vec<String>>,
    /// Files are written as <prefix>_<mode>_{report.csv,summary.json,times.csv}.
    #[arg(long)]
    out_prefix: PathBuf,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    workers: Option<usize>,
    /// Solves per query; the fastest time is recorded.
    #[arg(long, default_value_t = 1)]
    repeats: usize,
    /// Overwrite existing output files.
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct TraceArgs {
    #[command(flatten)]
    robot: RobotArgs,
    /// Pose JSON whose reduced chain problem is traced (robot mode).
    #[arg(long)]
    pose: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    init: Option<Vec<f64>>,
    /// Which reduced problem to trace when the pose has several.
    #[arg(long, default_value_t = 0)]
    branch: usize,
    /// Link lengths of a free-standing chain, comma separated (chain mode).
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["robot", "model", "pose"])]
    links: Option<Vec<f64>>,
    /// Initial bend at every interior joint of the chain, radians.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    bend: f64,
    /// Chain target x,y,z.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    target: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
    #[arg(long, default_value_t = 10_000)]
    cap: usize,
    /// CSV output with columns n,dist.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct TrackArgs {
    #[command(flatten)]
    robot: RobotArgs,
    #[arg(long, default_value_t = 80)]
    phase1: usize,
    #[arg(long, default_value_t = 100)]
    phase2: usize,
    /// Starting configuration (default: the scripted one).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    init: Option<Vec<f64>>,
    /// Final configuration of phase 2 (default: the scripted one).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    end: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
    #[arg(long)]
    n_l: Option<usize>,
    /// Trace CSV output.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    force: bool,
}

/// A run that produced output but not a solution.
struct Outcome {
    json: Value,
    code: u8,
}

impl Outcome {
    fn ok(json: Value) -> Self {
        Self { json, code: 0 }
    }
}

fn check_eps(eps: f64) -> Result<()> {
    ensure!(
        eps > 0.0 && eps.is_finite(),
        "--eps must be a positive number, got {eps}"
    );
    Ok(())
}

fn check_count(name: &str, n: usize) -> Result<()> {
    ensure!(n >= 1, "--{name} must be at least 1");
    Ok(())
}

fn check_angles(name: &str, theta: &[f64], model: &RobotModel) -> Result<()> {
    ensure!(
        theta.len() == model.dof(),
        "--{name} needs {} angles for {}, got {}",
        model.dof(),
        model.kind(),
        theta.len()
    );
    ensure!(
        theta.iter().all(|t| t.is_finite()),
        "--{name} contains a non-finite angle"
    );
    ensure!(
        model.within_limits(theta),
        "--{name} {theta:?} lies outside the joint limits"
    );
    Ok(())
}

fn check_fresh(path: &Path, force: bool) -> Result<()> {
    ensure!(
        force || !path.exists(),
        "{} already exists (pass --force to overwrite)",
        path.display()
    );
    Ok(())
}

fn exit_for(status: IkStatus) -> u8 {
    match status {
        IkStatus::Solved => 0,
        IkStatus::Unreachable => EXIT_UNREACHABLE,
        IkStatus::Failed => EXIT_FAILED,
    }
}

fn cmd_solve(args: &SolveArgs) -> Result<Outcome> {
    let model = args.robot.load()?;
    check_eps(args.eps)?;
    let init = args.init.clone().unwrap_or_else(|| vec![0.0; model.dof()]);
    check_angles("init", &init, &model)?;
    let mut config = SolverConfig::for_robot(model.kind());
    config.eps_tol = args.eps;
    match args.mode {
        Mode::Combined => {
            if let Some(n_l) = args.n_l {
                check_count("n-l", n_l)?;
                config.n_l = n_l;
            }
        }
        Mode::Fabrik => {
            check_count("n-max", args.n_max)?;
            config.mode = SolveMode::FabrikOnly;
            config.n_max = args.n_max;
        }
    }
    let pose = read_pose(&args.pose)?;

    let r = hybrid_ik::solve(&model, &IkQuery::new(pose, init), &config)?;
    Ok(Outcome {
        json: json!({
            "status": r.status.as_str(),
            "theta": r.theta,
            "eps_pos": r.error.eps_pos,
            "eps_rot": r.error.eps_rot,
            "fabrik_iters": r.fabrik_iterations,
            "opt_used": r.optimizer_used,
            "time_s": r.solve_time,
        }),
        code: exit_for(r.status),
    })
}

fn output_path(prefix: &Path, mode: BenchMode, suffix: &str) -> PathBuf {
    let label = mode.to_string().replace(':', "-");
    let name = prefix
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    prefix.with_file_name(format!("{name}_{label}_{suffix}"))
}

fn cmd_bench(args: &BenchArgs) -> Result<Outcome> {
    let model = args.robot.load()?;
    check_count("n", args.n)?;
    check_count("repeats", args.repeats)?;
    if let Some(w) = args.workers {
        check_count("workers", w)?;
    }
    let modes: Vec<BenchMode> = match &args.modes {
        Some(list) => list.iter().map(|m| m.parse()).collect::<hybrid_ik::Result<_>>()?,
        None => {
            let n_l = SolverConfig::for_robot(model.kind()).n_l;
            let mut m = vec![BenchMode::Combined { n_l }];
            m.extend([100, 500, 900].map(|n_max| BenchMode::FabrikOnly { n_max }));
            m
        }
    };
    ensure!(!modes.is_empty(), "--modes is empty");
    let paths: Vec<[PathBuf; 3]> = modes
        .iter()
        .map(|&m| ["report.csv", "summary.json", "times.csv"].map(|s| output_path(&args.out_prefix, m, s)))
        .collect();
    for p in paths.iter().flatten() {
        check_fresh(p, args.force)?;
    }

    let queries = generate_queries(&model, args.n, args.seed)?;
    let options = BenchOptions {
        workers: args.workers,
        repeats: args.repeats,
    };
    let reports = run_benchmark(&model, &queries, &modes, &options)?;
    let mut rows = Vec::new();
    for (report, [csv, summary, times]) in reports.iter().zip(&paths) {
        write_report_csv(report, csv)?;
        write_summary_json(report, summary)?;
        export_time_distribution(report, times)?;
        rows.push(json!({
            "mode": report.mode.to_string(),
            "success_rate": report.success_rate,
            "avg_time_s": report.avg_time,
            "max_time_s": report.max_time(),
            "files": [csv, summary, times],
        }));
    }
    Ok(Outcome::ok(json!({
        "robot": model.kind().as_str(),
        "n": args.n,
        "seed": args.seed,
        "prng": PRNG,
        "modes": rows,
    })))
}

fn chain_problem(links: &[f64], bend: f64, target: Vec3) -> Result<(ChainState, Vec3)> {
    ensure!(!links.is_empty(), "--links is empty");
    ensure!(
        links.iter().all(|l| *l > 0.0 && l.is_finite()),
        "--links must be positive"
    );
    ensure!(bend.is_finite(), "--bend must be finite");
    let mut positions = vec![Vec3::zeros()];
    let mut heading: f64 = 0.0;
    for (i, l) in links.iter().enumerate() {
        if i > 0 {
            heading += bend;
        }
        let last = positions[i];
        positions.push(last + Vec3::new(heading.cos(), heading.sin(), 0.0) * *l);
    }
    let joints = vec![JointSpec::free_ball(); links.len()];
    Ok((ChainState::from_positions(positions, joints, None)?, target))
}

fn cmd_trace(args: &TraceArgs) -> Result<Outcome> {
    check_eps(args.eps)?;
    check_count("cap", args.cap)?;
    let (chain, target) = match &args.links {
        Some(links) => {
            let t = args
                .target
                .as_deref()
                .ok_or_else(|| anyhow!("--links needs --target x,y,z"))?;
            ensure!(
                t.len() == 3 && t.iter().all(|v| v.is_finite()),
                "--target needs three finite numbers"
            );
            chain_problem(links, args.bend, Vec3::new(t[0], t[1], t[2]))?
        }
        None => {
            let model = args.robot.load()?;
            let pose_path = args
                .pose
                .as_ref()
                .ok_or_else(|| anyhow!("trace needs --pose or --links"))?;
            let init = args.init.clone().unwrap_or_else(|| vec![0.0; model.dof()]);
            check_angles("init", &init, &model)?;
            let pose = read_pose(pose_path)?;
            let mut config = SolverConfig::fabrik_only(model.kind(), args.cap);
            config.eps_tol = args.eps;
            let mut problems = reduced_problems(&model, &IkQuery::new(pose, init), &config)?;
            if problems.is_empty() {
                return Ok(Outcome {
                    json: json!({"status": "Unreachable", "sweeps": 0, "rows": 0}),
                    code: EXIT_UNREACHABLE,
                });
            }
            ensure!(
                args.branch < problems.len(),
                "--branch {} out of range (the pose has {} reduced problems)",
                args.branch,
                problems.len()
            );
            let p = problems.swap_remove(args.branch);
            (p.chain, p.target)
        }
    };
    check_fresh(&args.out, args.force)?;

    let run = fabrik::solve(&chain, &target, args.eps, args.cap, true)?;
    let status = match run.status {
        FabrikStatus::Converged => "Converged",
        FabrikStatus::IterationCap => "IterationCap",
        FabrikStatus::Unreachable => "Unreachable",
    };
    if run.status == FabrikStatus::Unreachable {
        return Ok(Outcome {
            json: json!({"status": status, "sweeps": 0, "rows": 0}),
            code: EXIT_UNREACHABLE,
        });
    }
    let rows = run.trace.unwrap_or_default();
    let mut text = String::from("n,dist\n");
    for (n, d) in &rows {
        text.push_str(&format!("{n},{}\n", fmt_f64(*d)));
    }
    std::fs::write(&args.out, text).with_context(|| format!("cannot write {}", args.out.display()))?;
    Ok(Outcome::ok(json!({
        "status": status,
        "sweeps": run.iterations,
        "final_dist": run.dist,
        "rows": rows.len(),
        "out": args.out,
    })))
}

fn cmd_track(args: &TrackArgs) -> Result<Outcome> {
    let model = args.robot.load()?;
    check_eps(args.eps)?;
    let scripted = Scenario::scripted(model.kind());
    let scenario = Scenario {
        theta_init: args.init.clone().unwrap_or(scripted.theta_init),
        theta_end: args.end.clone().unwrap_or(scripted.theta_end),
        phase1_points: args.phase1,
        phase2_points: args.phase2,
    };
    check_angles("init", &scenario.theta_init, &model)?;
    check_angles("end", &scenario.theta_end, &model)?;
    ensure!(
        args.phase1 >= 2 && args.phase2 >= 2,
        "--phase1 and --phase2 must be at least 2 (each phase includes both endpoints)"
    );
    let mut config = SolverConfig::for_robot(model.kind());
    config.eps_tol = args.eps;
    if let Some(n_l) = args.n_l {
        check_count("n-l", n_l)?;
        config.n_l = n_l;
    }
    check_fresh(&args.out, args.force)?;

    let trace = tracking::run_scenario(&model, &scenario, &config)?;
    tracking::write_trace_csv(&trace, &args.out)?;
    let mut json = json!({
        "completed": trace.completed(),
        "waypoints": trace.phase1_len + trace.phase2_len,
        "rows": trace.records.len(),
        "max_joint_step": trace.max_joint_step(),
        "max_eps_pos": trace.max_eps_pos(),
        "max_eps_rot": trace.max_eps_rot(),
        "boundary_optimizer_uses": trace.boundary_activations(tracking::BOUNDARY_WINDOW),
        "out": args.out,
    });
    let code = match trace.failed_at {
        Some((index, status)) => {
            eprintln!("waypoint {index} did not solve ({})", status.as_str());
            json["failed_at"] = json!({"index": index, "status": status.as_str()});
            EXIT_FAILED
        }
        None => 0,
    };
    Ok(Outcome { json, code })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Trace(a) => cmd_trace(a),
        Command::Track(a) => cmd_track(a),
    };
    match result {
        Ok(out) => {
            let text = serde_json::to_string_pretty(&out.json).expect("JSON value serializes");
            // A closed pipe (`| head`) is not worth a panic.
            let _ = writeln!(std::io::stdout(), "{text}");
            ExitCode::from(out.code)
        }
        Err(e) => {
            eprintln!("error: {}", error_chain(&e));
            ExitCode::from(EXIT_USAGE)
        }
    }
}

/// Joins the cause chain, skipping causes the previous message already spells out.
fn error_chain(e: &anyhow::Error) -> String {
    let mut text = String::new();
    for cause in e.chain() {
        let msg = cause.to_string();
        if !text.ends_with(&msg) {
            if !text.is_empty() {
                text.push_str(": ");
            }
            text.push_str(&msg);
        }
    }
    text
}
