//! Simulator scenarios built from the library pieces: training an axis gait
//! or a full gait set, measuring velocities, racing two gaits and comparing
//! open- and closed-loop tracing on a worn robot.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::control::{
    execute_open_loop, measure_mean_velocity, open_loop_plan, trace_path, waypoints, AxisGait, ControlError, GaitSet,
    PathRun, TrajectorySegment,
};
use crate::gait::GaitAssignment;
use crate::reward::{BodyDisplacement, GaitAxis, BODY_LENGTH_M};
use crate::search::{estimate_training_time, train, SearchError, SearchOutcome, SimEvaluator};
use crate::sim::{EvaluationConfig, Pose2D, SimRobot};

#[derive(Debug, Clone, PartialEq)]
pub struct AxisTraining {
    pub axis: GaitAxis,
    pub eval: EvaluationConfig,
    pub outcome: SearchOutcome,
    /// Simulated robot time the search would take at `eval` timing.
    pub estimated_seconds: f64,
}

/// Trains one axis gait from the neutral gait on `robot`.
pub fn train_axis(robot: &mut SimRobot, run: &RunConfig, axis: GaitAxis) -> Result<AxisTraining, SearchError> {
    let opts = run.search_options()?;
    let eval = run.eval_for(axis);
    let k = run.coefficients(axis);
    let mut ev = SimEvaluator::new(robot, eval);
    let mut outcome = train(&mut ev, &k, &GaitAssignment::neutral(), run.search.rounds, &opts)?;
    outcome.log.meta.eval = Some(eval);
    outcome.log.meta.seed = Some(run.sim.seed);
    let estimated_seconds = estimate_training_time(&eval, opts.space.n_legs(), opts.space.n_prims(), run.search.rounds);
    Ok(AxisTraining { axis, eval, outcome, estimated_seconds })
}

/// Mean and sample stddev of a gait over `run.velocity_cycles` cycles. The
/// robot pose is restored afterwards; clock and wear are not.
pub fn measure_gait(robot: &mut SimRobot, run: &RunConfig, gait: &GaitAssignment) -> AxisGait {
    let pose = robot.pose();
    let (mean, stddev) = measure_mean_velocity(robot, gait, run.velocity_cycles, run.eval.step_delay)
        .expect("velocity_cycles validated");
    robot.reset_pose(pose);
    AxisGait { gait: *gait, mean, stddev }
}

#[derive(Debug)]
pub enum GaitSetError {
    Search(GaitAxis, SearchError),
    Control(ControlError),
}

impl std::fmt::Display for GaitSetError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GaitSetError::Search(axis, e) => write!(f, "training {axis}: {e}"),
            GaitSetError::Control(e) => e.fmt(f),
        }
    }
}

impl std::error::Error for GaitSetError {}

/// Trains all six axis gaits in order on one robot and measures each.
pub fn train_gait_set(robot: &mut SimRobot, run: &RunConfig) -> Result<(GaitSet, Vec<AxisTraining>), GaitSetError> {
    let mut trainings = Vec::new();
    let mut gaits = BTreeMap::new();
    for axis in GaitAxis::ALL {
        let t = train_axis(robot, run, axis).map_err(|e| GaitSetError::Search(axis, e))?;
        robot.reset_pose(Pose2D::IDENTITY);
        gaits.insert(axis, measure_gait(robot, run, &t.outcome.best));
        trainings.push(t);
    }
    let set = GaitSet::new(gaits).map_err(GaitSetError::Control)?;
    Ok((set, trainings))
}

/// Applies the configured drift injections to `robot` for the gaits of `gs`.
pub fn inject_drift(robot: &mut SimRobot, run: &RunConfig, gs: &GaitSet) {
    for inj in &run.drift_injection {
        robot.inject_gait_bias(&gs.get(inj.axis).gait, inj.bias);
    }
}

/// Walks every gait of the set for `cycles` cycles so wear accumulates.
/// The pose is restored afterwards.
pub fn age_robot(robot: &mut SimRobot, gs: &GaitSet, cycles: u32, step_delay: f64) {
    let pose = robot.pose();
    let cfg = EvaluationConfig::new(step_delay, cycles, 0.0);
    for (_, g) in gs.iter() {
        if cycles > 0 {
            robot.execute_gait(&g.gait, &cfg);
        }
    }
    robot.reset_pose(pose);
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RaceEntry {
    pub distance_m: f64,
    pub bl_per_cycle: f64,
    pub bl_per_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RaceReport {
    pub cycles: u32,
    pub a: RaceEntry,
    pub b: RaceEntry,
    /// Distance of `a` over distance of `b`.
    pub ratio: f64,
}

/// Runs each gait for `cycles` cycles from the same robot state and compares
/// straight-line distance covered.
pub fn race(robot: &SimRobot, a: &GaitAssignment, b: &GaitAssignment, cycles: u32, step_delay: f64) -> RaceReport {
    let cfg = EvaluationConfig::new(step_delay, cycles, 0.0);
    let entry = |gait: &GaitAssignment| {
        let mut r = robot.clone();
        let ex = r.execute_gait(gait, &cfg);
        let distance_m = ex.after.distance(&ex.before);
        let bl = distance_m / BODY_LENGTH_M;
        let elapsed = cycles as f64 * cfg.cycle_duration();
        RaceEntry {
            distance_m,
            bl_per_cycle: if cycles == 0 { 0.0 } else { bl / cycles as f64 },
            bl_per_s: if elapsed > 0.0 { bl / elapsed } else { 0.0 },
        }
    };
    let (ea, eb) = (entry(a), entry(b));
    let ratio = if ea.distance_m == eb.distance_m { 1.0 } else { ea.distance_m / eb.distance_m };
    RaceReport { cycles, a: ea, b: eb, ratio }
}

/// Final-pose position error of an open- and a closed-loop run from the same
/// worn robot. `closed` is `None` when the controller ran out of budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WearTrial {
    pub seed: u64,
    pub open_error: f64,
    pub closed_error: Option<f64>,
}

impl WearTrial {
    pub fn closed_wins(&self) -> bool {
        self.closed_error.is_some_and(|c| c < self.open_error)
    }
}

/// Trains a gait set on a fresh robot seeded with `seed`, ages it by
/// `aging_cycles` per gait, then runs `path` open- and closed-loop from
/// identical copies of the aged robot.
pub fn wear_trial(
    run: &RunConfig,
    seed: u64,
    path: &[TrajectorySegment],
    aging_cycles: u32,
) -> Result<(WearTrial, PathRun, Option<PathRun>), GaitSetError> {
    let mut sim = run.sim.clone();
    sim.seed = seed;
    let mut robot = SimRobot::new(sim).expect("sim config validated");
    let (gs, _) = train_gait_set(&mut robot, run)?;
    age_robot(&mut robot, &gs, aging_cycles, run.eval.step_delay);
    robot.reset_pose(Pose2D::IDENTITY);
    let target = *waypoints(&Pose2D::IDENTITY, path).last().expect("non-empty path");

    let plan = open_loop_plan(&gs, path).map_err(GaitSetError::Control)?;
    let mut open_robot = robot.clone();
    let open = execute_open_loop(&mut open_robot, &gs, &plan, run.eval.step_delay);
    let closed = match trace_path(&mut robot, &gs, path, &run.control, run.eval.step_delay) {
        Ok(r) => Some(r),
        Err(ControlError::BudgetExhausted { .. }) => None,
        Err(e) => return Err(GaitSetError::Control(e)),
    };
    let trial = WearTrial {
        seed,
        open_error: open.final_pose().distance(&target),
        closed_error: closed.as_ref().map(|c| c.final_pose().distance(&target)),
    };
    Ok((trial, open, closed))
}

/// Per-axis velocity row, BL/cycle and rad/cycle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VelocityRow {
    pub label: String,
    pub mean_dx_bl: f64,
    pub mean_dy_bl: f64,
    pub mean_dtheta_rad: f64,
    pub std_dx_bl: f64,
    pub std_dy_bl: f64,
    pub std_dtheta_rad: f64,
}

impl VelocityRow {
    pub fn new(label: impl Into<String>, mean: &BodyDisplacement, stddev: &BodyDisplacement) -> Self {
        VelocityRow {
            label: label.into(),
            mean_dx_bl: mean.dx,
            mean_dy_bl: mean.dy,
            mean_dtheta_rad: mean.dtheta,
            std_dx_bl: stddev.dx,
            std_dy_bl: stddev.dy,
            std_dtheta_rad: stddev.dtheta,
        }
    }
}
