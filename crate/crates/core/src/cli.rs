//! `softgait` command-line front end. Every command is a function of the run
//! config plus its input files; the effective config is written next to the
//! outputs so a run can be replayed with `--config <out>/run_config.toml`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::config::{ConfigError, RunConfig};
use crate::control::{
    execute_open_loop, open_loop_plan, parse_plan, trace_path, waypoints, ControlError, GaitSet, PathRun, PlanError,
};
use crate::experiment::{inject_drift, measure_gait, race, train_axis, train_gait_set, GaitSetError, VelocityRow};
use crate::export::write_rows;
use crate::gait::GaitAssignment;
use crate::gait_file::{self, GaitFileError, Provenance};
use crate::reward::{reward, GaitAxis};
use crate::search::{brute_force_oracle, train, PureEvaluator, SearchError};
use crate::sim::{Pose2D, SimRobot};

pub const EXIT_OTHER: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_SEARCH_ABORT: i32 = 4;
pub const EXIT_BUDGET: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "softgait", version, about = "Gait search and path following for a simulated soft quadruped")]
pub struct Cli {
    /// Run config (TOML). Defaults apply to anything left out.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides sim.seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Overrides search.rounds.
    #[arg(long, global = true)]
    pub rounds: Option<u32>,
    /// Overrides the output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisArg {
    One(GaitAxis),
    All,
}

fn parse_axis(s: &str) -> Result<AxisArg, String> {
    if s == "all" {
        return Ok(AxisArg::All);
    }
    s.parse().map(AxisArg::One).map_err(|_| format!("unknown axis {s:?}; use +x, -x, +y, -y, +theta, -theta or all"))
}

fn parse_single_axis(s: &str) -> Result<GaitAxis, String> {
    match parse_axis(s)? {
        AxisArg::One(a) => Ok(a),
        AxisArg::All => Err("a single axis is required".into()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Open,
    Closed,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train one axis gait, or all six plus their gait set.
    Train {
        #[arg(long, value_parser = parse_axis, allow_hyphen_values = true)]
        axis: AxisArg,
    },
    /// Exhaustive sweep compared against the tree search (noise-free configs only).
    Oracle {
        #[arg(long, value_parser = parse_single_axis, allow_hyphen_values = true)]
        axis: GaitAxis,
    },
    /// Mean ± stddev per-cycle velocity of each gait file.
    Velocities {
        #[arg(required = true)]
        gaits: Vec<PathBuf>,
    },
    /// Follow a plan with a gait set.
    Trace {
        #[arg(long)]
        gaitset: PathBuf,
        #[arg(long)]
        plan: PathBuf,
        #[arg(long, value_enum, default_value = "closed")]
        mode: Mode,
    },
    /// Distance covered by two gaits from the same robot state.
    Race {
        gait_a: PathBuf,
        gait_b: PathBuf,
        /// Defaults to race_cycles from the config.
        #[arg(long)]
        cycles: Option<u32>,
    },
    /// Print the effective run config.
    Config,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Search(SearchError),
    #[error("{0}")]
    Budget(ControlError),
    #[error(transparent)]
    GaitFile(#[from] GaitFileError),
    #[error("{0}")]
    Other(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Search(SearchError::Aborted { .. }) => EXIT_SEARCH_ABORT,
            CliError::Search(_) => EXIT_CONFIG,
            CliError::Budget(_) => EXIT_BUDGET,
            _ => EXIT_OTHER,
        }
    }
}

impl From<SearchError> for CliError {
    fn from(e: SearchError) -> Self {
        CliError::Search(e)
    }
}

impl From<ControlError> for CliError {
    fn from(e: ControlError) -> Self {
        match e {
            ControlError::BudgetExhausted { .. } => CliError::Budget(e),
            ControlError::EmptyPath => CliError::Usage(e.to_string()),
            ControlError::Config(_) => CliError::Config(ConfigError::Invalid(e.to_string())),
            other => CliError::Other(other.to_string()),
        }
    }
}

impl From<GaitSetError> for CliError {
    fn from(e: GaitSetError) -> Self {
        match e {
            GaitSetError::Search(_, s) => CliError::Search(s),
            GaitSetError::Control(c) => c.into(),
        }
    }
}

fn other<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Other(e.to_string())
}

/// Loads the config file (or defaults) and applies flag overrides.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.sim.seed = seed;
    }
    if let Some(rounds) = cli.rounds {
        cfg.search.rounds = rounds;
    }
    if let Some(out) = &cli.out {
        cfg.out = out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Runs a parsed command, writing the human-readable report to `report`.
pub fn run(cli: &Cli, report: &mut dyn Write) -> Result<(), CliError> {
    let cfg = resolve_config(cli)?;
    if let Command::Config = cli.command {
        write!(report, "{}", cfg.to_toml())?;
        return Ok(());
    }
    fs::create_dir_all(&cfg.out)?;
    fs::write(cfg.out.join("run_config.toml"), cfg.to_toml())?;
    match &cli.command {
        Command::Train { axis } => cmd_train(&cfg, *axis, report),
        Command::Oracle { axis } => cmd_oracle(&cfg, *axis, report),
        Command::Velocities { gaits } => cmd_velocities(&cfg, gaits, report),
        Command::Trace { gaitset, plan, mode } => cmd_trace(&cfg, gaitset, plan, *mode, report),
        Command::Race { gait_a, gait_b, cycles } => {
            cmd_race(&cfg, gait_a, gait_b, cycles.unwrap_or(cfg.race_cycles), report)
        }
        Command::Config => unreachable!(),
    }
}

/// Parses `args`, runs, prints errors and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    let stdout = std::io::stdout();
    match run(&cli, &mut stdout.lock()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn write_csv<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<(), CliError> {
    let file = fs::File::create(path)?;
    write_rows(std::io::BufWriter::new(file), rows).map_err(other)
}

fn cmd_train(cfg: &RunConfig, axis: AxisArg, report: &mut dyn Write) -> Result<(), CliError> {
    let mut robot = SimRobot::new(cfg.sim.clone()).map_err(|e| ConfigError::Invalid(e.to_string()))?;
    let trainings = match axis {
        AxisArg::One(a) => vec![train_axis(&mut robot, cfg, a)?],
        AxisArg::All => {
            let (set, trainings) = train_gait_set(&mut robot, cfg)?;
            fs::write(cfg.out.join("gaitset.toml"), gait_file::serialize_gait_set(&set)?)?;
            write_velocity_outputs(
                cfg,
                &set.iter().map(|(a, g)| VelocityRow::new(a.label(), &g.mean, &g.stddev)).collect::<Vec<_>>(),
            )?;
            trainings
        }
    };
    for t in &trainings {
        let slug = t.axis.slug();
        let log_id = format!("train_{slug}");
        let provenance =
            Provenance { log_id: Some(log_id.clone()), axis: Some(t.axis), reward: Some(t.outcome.best_reward) };
        fs::write(
            cfg.out.join(format!("gait_{slug}.toml")),
            gait_file::serialize_assignment(&t.outcome.best, Some(&provenance))?,
        )?;
        t.outcome.log.write_csv(fs::File::create(cfg.out.join(format!("{log_id}.csv")))?).map_err(other)?;
        if !t.outcome.log.round_seeds.is_empty() {
            let file = fs::File::create(cfg.out.join(format!("{log_id}_seeds.csv")))?;
            t.outcome.log.write_seeds_csv(file).map_err(other)?;
        }
        let ids = t.outcome.best.ids();
        writeln!(
            report,
            "{}: {} evaluations over {} round(s), best reward {:.6}, gait {:?}, estimated training time {:.1} s",
            t.axis,
            t.outcome.log.records.len() + t.outcome.log.round_seeds.len(),
            cfg.search.rounds,
            t.outcome.best_reward,
            ids,
            t.estimated_seconds
        )?;
    }
    Ok(())
}

#[derive(Serialize)]
struct OracleRow {
    axis: GaitAxis,
    candidates: u64,
    oracle_reward: f64,
    tree_reward: f64,
    gap: f64,
}

/// `(oracle - tree) / |oracle|`, zero when both are zero.
pub fn optimality_gap(oracle: f64, tree: f64) -> f64 {
    if oracle == tree {
        0.0
    } else {
        (oracle - tree) / oracle.abs()
    }
}

fn cmd_oracle(cfg: &RunConfig, axis: GaitAxis, report: &mut dyn Write) -> Result<(), CliError> {
    if !cfg.sim.is_deterministic() {
        return Err(ConfigError::Invalid(
            "oracle needs a noise-free, wear-free sim (noise_sigma = 0, wear_rate = 0)".into(),
        )
        .into());
    }
    let robot = SimRobot::new(cfg.sim.clone()).map_err(|e| ConfigError::Invalid(e.to_string()))?;
    let frozen = robot.frozen(cfg.eval_for(axis).cycles_per_eval);
    let k = cfg.coefficients(axis);
    let opts = cfg.search_options()?;
    let neutral = GaitAssignment::neutral();
    let tree = train(&mut PureEvaluator::new(&frozen), &k, &neutral, cfg.search.rounds, &opts)?;
    let tree_reward = reward(&frozen.displacement(&tree.best), &k);
    let oracle = brute_force_oracle(&frozen, &k, &neutral, &opts.space);
    let gap = optimality_gap(oracle.best_reward, tree_reward);
    let slug = axis.slug();
    let provenance =
        Provenance { log_id: Some(format!("oracle_{slug}")), axis: Some(axis), reward: Some(oracle.best_reward) };
    fs::write(
        cfg.out.join(format!("gait_oracle_{slug}.toml")),
        gait_file::serialize_assignment(&oracle.best, Some(&provenance))?,
    )?;
    write_csv(
        &cfg.out.join(format!("oracle_{slug}.csv")),
        [OracleRow { axis, candidates: oracle.candidates, oracle_reward: oracle.best_reward, tree_reward, gap }],
    )?;
    writeln!(
        report,
        "{axis}: oracle reward {:.6} over {} candidates, tree search {:.6}, gap {:.6}",
        oracle.best_reward, oracle.candidates, tree_reward, gap
    )?;
    Ok(())
}

fn write_velocity_outputs(cfg: &RunConfig, rows: &[VelocityRow]) -> Result<(), CliError> {
    write_csv(&cfg.out.join("velocities.csv"), rows)?;
    crate::plot::velocity_chart(rows, &cfg.out.join("velocities.svg")).map_err(other)
}

fn cmd_velocities(cfg: &RunConfig, files: &[PathBuf], report: &mut dyn Write) -> Result<(), CliError> {
    let mut robot = SimRobot::new(cfg.sim.clone()).map_err(|e| ConfigError::Invalid(e.to_string()))?;
    let mut rows = Vec::new();
    let mut by_axis = std::collections::BTreeMap::new();
    for path in files {
        let doc = gait_file::read_gait_file(path)?;
        let axis = doc.provenance.as_ref().and_then(|p| p.axis);
        let label = match axis {
            Some(a) => a.label().to_string(),
            None => path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
        };
        robot.reset_pose(Pose2D::IDENTITY);
        let g = measure_gait(&mut robot, cfg, &doc.assignment);
        writeln!(
            report,
            "{label}: dx {:.6} ± {:.6} BL/cycle, dy {:.6} ± {:.6} BL/cycle, dtheta {:.6} ± {:.6} rad/cycle",
            g.mean.dx, g.stddev.dx, g.mean.dy, g.stddev.dy, g.mean.dtheta, g.stddev.dtheta
        )?;
        rows.push(VelocityRow::new(label, &g.mean, &g.stddev));
        if let Some(a) = axis {
            by_axis.insert(a, g);
        }
    }
    write_velocity_outputs(cfg, &rows)?;
    if by_axis.len() == GaitAxis::ALL.len() {
        match GaitSet::new(by_axis) {
            Ok(set) => {
                fs::write(cfg.out.join("gaitset.toml"), gait_file::serialize_gait_set(&set)?)?;
                writeln!(report, "wrote gait set")?;
            }
            Err(e) => writeln!(report, "no gait set written: {e}")?,
        }
    }
    Ok(())
}

fn cmd_trace(cfg: &RunConfig, gaitset: &Path, plan: &Path, mode: Mode, report: &mut dyn Write) -> Result<(), CliError> {
    let gs = gait_file::read_gait_set_file(gaitset)?;
    let segments = parse_plan(&fs::read_to_string(plan)?).map_err(|e| match e {
        PlanError::Control(c) => CliError::from(c),
        PlanError::Parse(p) => CliError::Usage(format!("malformed plan: {p}")),
    })?;
    let mut robot = SimRobot::new(cfg.sim.clone()).map_err(|e| ConfigError::Invalid(e.to_string()))?;
    inject_drift(&mut robot, cfg, &gs);
    let name = match mode {
        Mode::Open => "open",
        Mode::Closed => "closed",
    };
    let (run, failure): (PathRun, Option<CliError>) = match mode {
        Mode::Open => {
            let steps = open_loop_plan(&gs, &segments)?;
            (execute_open_loop(&mut robot, &gs, &steps, cfg.eval.step_delay), None)
        }
        Mode::Closed => match trace_path(&mut robot, &gs, &segments, &cfg.control, cfg.eval.step_delay) {
            Ok(run) => (run, None),
            Err(ControlError::BudgetExhausted { segment, budget, partial }) => {
                let run = (*partial).clone();
                (run, Some(CliError::Budget(ControlError::BudgetExhausted { segment, budget, partial })))
            }
            Err(e) => return Err(e.into()),
        },
    };
    let mut targets = vec![Pose2D::IDENTITY];
    targets.extend(waypoints(&Pose2D::IDENTITY, &segments));
    run.trace.write_csv(fs::File::create(cfg.out.join(format!("trace_{name}.csv")))?).map_err(other)?;
    crate::plot::trajectory_plot(&targets, &[(name, &run)], &cfg.out.join(format!("trace_{name}.svg")))
        .map_err(other)?;
    if let Some(e) = failure {
        return Err(e);
    }
    let end = run.final_pose();
    let target = targets.last().expect("non-empty");
    let corrective = run.trace.rows.iter().filter(|r| r.corrective).count();
    writeln!(
        report,
        "{name}-loop: {} cycles ({corrective} corrective), final pose ({:.4}, {:.4}, {:.4}), position error {:.4} m",
        run.trace.rows.len(),
        end.x,
        end.y,
        end.theta,
        end.distance(target)
    )?;
    Ok(())
}

#[derive(Serialize)]
struct RaceRow {
    gait: &'static str,
    cycles: u32,
    distance_m: f64,
    bl_per_cycle: f64,
    bl_per_s: f64,
}

fn cmd_race(cfg: &RunConfig, a: &Path, b: &Path, cycles: u32, report: &mut dyn Write) -> Result<(), CliError> {
    let ga = gait_file::read_gait_file(a)?.assignment;
    let gb = gait_file::read_gait_file(b)?.assignment;
    let robot = SimRobot::new(cfg.sim.clone()).map_err(|e| ConfigError::Invalid(e.to_string()))?;
    let r = race(&robot, &ga, &gb, cycles, cfg.eval.step_delay);
    write_csv(
        &cfg.out.join("race.csv"),
        [("a", r.a), ("b", r.b)].map(|(gait, e)| RaceRow {
            gait,
            cycles,
            distance_m: e.distance_m,
            bl_per_cycle: e.bl_per_cycle,
            bl_per_s: e.bl_per_s,
        }),
    )?;
    writeln!(
        report,
        "a: {:.4} m ({:.4} BL/s), b: {:.4} m ({:.4} BL/s), ratio {:.3} over {cycles} cycles",
        r.a.distance_m, r.a.bl_per_s, r.b.distance_m, r.b.bl_per_s, r.ratio
    )?;
    Ok(())
}
