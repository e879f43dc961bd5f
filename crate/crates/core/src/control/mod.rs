//! Gait scheduling for piecewise paths made of pure body-x translations and
//! pure rotations.
//!
//! The closed-loop follower walks the segment's primary gait in batches and
//! checks drift after every batch. When a drift component leaves its
//! tolerance the opposing corrective gait is scheduled until that component
//! is back inside a deadband (or has crossed zero). Translation segments
//! correct with the ±y and ±θ gaits, rotation segments with ±x and ±y.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gait::GaitAssignment;
use crate::reward::{preset, reward, BodyDisplacement, Dof, GaitAxis, BODY_LENGTH_M};
use crate::sim::{normalize_angle, EvaluationConfig, Pose2D, SimRobot, Twist};

#[derive(Debug, Error)]
pub enum ControlError {
    #[error("gait set is missing the {0} gait")]
    MissingAxis(GaitAxis),
    #[error("{axis} gait does not move along its axis (reward {reward} under its preset)")]
    NonPositiveGait { axis: GaitAxis, reward: f64 },
    #[error("trajectory segment magnitude must be finite and non-zero")]
    ZeroSegment,
    #[error("empty trajectory")]
    EmptyPath,
    #[error("{axis} gait has zero mean velocity; cannot plan")]
    ZeroVelocity { axis: GaitAxis },
    #[error("mean velocity needs at least 2 cycles, got {0}")]
    TooFewCycles(u32),
    #[error("invalid controller config: {0}")]
    Config(String),
    #[error("segment {segment}: cycle budget of {budget} exhausted")]
    BudgetExhausted { segment: usize, budget: u64, partial: Box<PathRun> },
}

fn default_tol() -> f64 {
    0.05
}

/// Allowed drift before correction: meters, meters, radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriftTolerance {
    #[serde(default = "default_tol")]
    pub x: f64,
    #[serde(default = "default_tol")]
    pub y: f64,
    #[serde(default = "default_tol")]
    pub theta: f64,
}

impl Default for DriftTolerance {
    fn default() -> Self {
        DriftTolerance { x: 0.05, y: 0.05, theta: 0.05 }
    }
}

impl DriftTolerance {
    pub fn validate(&self) -> Result<(), ControlError> {
        if [self.x, self.y, self.theta].iter().all(|v| v.is_finite() && *v > 0.0) {
            Ok(())
        } else {
            Err(ControlError::Config("drift tolerances must be > 0".into()))
        }
    }

    fn get(&self, dof: Dof) -> f64 {
        match dof {
            Dof::X => self.x,
            Dof::Y => self.y,
            Dof::Theta => self.theta,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SegmentKind {
    /// Along body x, meters.
    Translate,
    /// About the vertical axis, radians.
    Rotate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSegment")]
pub struct TrajectorySegment {
    kind: SegmentKind,
    magnitude: f64,
}

#[derive(Deserialize)]
struct RawSegment {
    kind: SegmentKind,
    magnitude: f64,
}

impl TryFrom<RawSegment> for TrajectorySegment {
    type Error = ControlError;

    fn try_from(raw: RawSegment) -> Result<Self, Self::Error> {
        TrajectorySegment::new(raw.kind, raw.magnitude)
    }
}

impl TrajectorySegment {
    pub fn new(kind: SegmentKind, magnitude: f64) -> Result<Self, ControlError> {
        if !magnitude.is_finite() || magnitude == 0.0 {
            return Err(ControlError::ZeroSegment);
        }
        Ok(TrajectorySegment { kind, magnitude })
    }

    pub fn translate(meters: f64) -> Result<Self, ControlError> {
        Self::new(SegmentKind::Translate, meters)
    }

    pub fn rotate(radians: f64) -> Result<Self, ControlError> {
        Self::new(SegmentKind::Rotate, radians)
    }

    pub fn kind(&self) -> SegmentKind {
        self.kind
    }

    pub fn magnitude(&self) -> f64 {
        self.magnitude
    }

    /// The gait that completes this segment in the absence of drift.
    pub fn primary_axis(&self) -> GaitAxis {
        let dof = match self.kind {
            SegmentKind::Translate => Dof::X,
            SegmentKind::Rotate => Dof::Theta,
        };
        GaitAxis::from_dof(dof, self.magnitude > 0.0)
    }

    /// Drift components watched while following this segment.
    pub fn monitored(&self) -> [Dof; 2] {
        match self.kind {
            SegmentKind::Translate => [Dof::Y, Dof::Theta],
            SegmentKind::Rotate => [Dof::X, Dof::Y],
        }
    }

    /// Pose reached from `start` if the segment is executed exactly.
    pub fn apply(&self, start: &Pose2D) -> Pose2D {
        match self.kind {
            SegmentKind::Translate => start.compose(&Pose2D::new(self.magnitude, 0.0, 0.0)),
            SegmentKind::Rotate => Pose2D::new(start.x, start.y, start.theta + self.magnitude),
        }
    }
}

/// Segments tracing a capital N of the given height and width, starting at
/// the bottom of the left stroke facing up the stroke.
pub fn letter_n(height: f64, width: f64) -> Result<Vec<TrajectorySegment>, ControlError> {
    if !(height.is_finite() && height > 0.0 && width.is_finite() && width > 0.0) {
        return Err(ControlError::Config("letter height and width must be > 0".into()));
    }
    let turn = PI - width.atan2(height);
    Ok(vec![
        TrajectorySegment::translate(height)?,
        TrajectorySegment::rotate(-turn)?,
        TrajectorySegment::translate(height.hypot(width))?,
        TrajectorySegment::rotate(turn)?,
        TrajectorySegment::translate(height)?,
    ])
}

/// Ideal poses at the end of each segment.
pub fn waypoints(start: &Pose2D, segments: &[TrajectorySegment]) -> Vec<Pose2D> {
    segments
        .iter()
        .scan(*start, |pose, seg| {
            *pose = seg.apply(pose);
            Some(*pose)
        })
        .collect()
}

/// A gait with its measured per-cycle velocity (BL/cycle, rad/cycle).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisGait {
    pub gait: GaitAssignment,
    pub mean: BodyDisplacement,
    pub stddev: BodyDisplacement,
}

/// The six axis gaits.
#[derive(Debug, Clone, PartialEq)]
pub struct GaitSet {
    gaits: BTreeMap<GaitAxis, AxisGait>,
}

impl GaitSet {
    /// Requires all six axes, each with positive reward under its own preset.
    pub fn new(gaits: BTreeMap<GaitAxis, AxisGait>) -> Result<Self, ControlError> {
        for axis in GaitAxis::ALL {
            let entry = gaits.get(&axis).ok_or(ControlError::MissingAxis(axis))?;
            let r = reward(&entry.mean, &preset(axis));
            if r.is_nan() || r <= 0.0 {
                return Err(ControlError::NonPositiveGait { axis, reward: r });
            }
        }
        Ok(GaitSet { gaits })
    }

    pub fn get(&self, axis: GaitAxis) -> &AxisGait {
        &self.gaits[&axis]
    }

    pub fn iter(&self) -> impl Iterator<Item = (GaitAxis, &AxisGait)> {
        self.gaits.iter().map(|(a, g)| (*a, g))
    }

    /// Signed mean on-axis motion per cycle, in meters or radians.
    pub fn rate(&self, axis: GaitAxis) -> f64 {
        let m = self.get(axis).mean.component(axis);
        if axis.is_rotation() {
            m
        } else {
            m * BODY_LENGTH_M
        }
    }

    /// Largest expected per-cycle motion of any gait in the set, per
    /// component: |mean| + 3 stddev, in meters and radians.
    pub fn per_cycle_bound(&self) -> Twist {
        let mut b = Twist::ZERO;
        for g in self.gaits.values() {
            b.x = b.x.max((g.mean.dx.abs() + 3.0 * g.stddev.dx) * BODY_LENGTH_M);
            b.y = b.y.max((g.mean.dy.abs() + 3.0 * g.stddev.dy) * BODY_LENGTH_M);
            b.theta = b.theta.max(g.mean.dtheta.abs() + 3.0 * g.stddev.dtheta);
        }
        b
    }
}

/// Mean and sample standard deviation of per-cycle body-frame displacement.
pub fn measure_mean_velocity(
    robot: &mut SimRobot,
    gait: &GaitAssignment,
    n_cycles: u32,
    step_delay: f64,
) -> Result<(BodyDisplacement, BodyDisplacement), ControlError> {
    if n_cycles < 2 {
        return Err(ControlError::TooFewCycles(n_cycles));
    }
    let cfg = EvaluationConfig::new(step_delay, 1, 0.0);
    let samples: Vec<BodyDisplacement> = (0..n_cycles).map(|_| robot.execute_gait(gait, &cfg).displacement()).collect();
    let n = n_cycles as f64;
    let mean = |f: fn(&BodyDisplacement) -> f64| samples.iter().map(f).sum::<f64>() / n;
    let m = BodyDisplacement::new(mean(|d| d.dx), mean(|d| d.dy), mean(|d| d.dtheta));
    let var = |f: fn(&BodyDisplacement) -> f64, mu: f64| {
        (samples.iter().map(|d| (f(d) - mu).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    let s = BodyDisplacement::new(var(|d| d.dx, m.dx), var(|d| d.dy, m.dy), var(|d| d.dtheta, m.dtheta));
    Ok((m, s))
}

fn default_check_every() -> u32 {
    4
}
fn default_deadband() -> f64 {
    0.2
}
fn default_budget_factor() -> f64 {
    10.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerConfig {
    #[serde(default)]
    pub tolerance: DriftTolerance,
    /// Primary-gait cycles between drift checks.
    #[serde(default = "default_check_every")]
    pub check_every: u32,
    /// Drift counts as eliminated below this fraction of its tolerance.
    #[serde(default = "default_deadband")]
    pub deadband_fraction: f64,
    /// Cycle budget per segment, as a multiple of the open-loop cycle estimate.
    #[serde(default = "default_budget_factor")]
    pub budget_factor: f64,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        ControllerConfig {
            tolerance: DriftTolerance::default(),
            check_every: default_check_every(),
            deadband_fraction: default_deadband(),
            budget_factor: default_budget_factor(),
        }
    }
}

impl ControllerConfig {
    pub fn validate(&self) -> Result<(), ControlError> {
        self.tolerance.validate()?;
        if self.check_every == 0 {
            return Err(ControlError::Config("check_every must be >= 1".into()));
        }
        if !(0.0..1.0).contains(&self.deadband_fraction) {
            return Err(ControlError::Config("deadband_fraction must be in [0, 1)".into()));
        }
        if !(self.budget_factor.is_finite() && self.budget_factor >= 1.0) {
            return Err(ControlError::Config("budget_factor must be >= 1".into()));
        }
        Ok(())
    }
}

/// One executed gait cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub time: f64,
    pub pose: Pose2D,
    pub axis: GaitAxis,
    pub corrective: bool,
    /// Drift after this cycle, relative to the current segment.
    pub drift: Twist,
}

/// CSV form of [`TraceRow`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceCsvRow {
    pub time_s: f64,
    pub x_m: f64,
    pub y_m: f64,
    pub theta_rad: f64,
    pub axis: GaitAxis,
    pub corrective_flag: bool,
    pub drift_x: f64,
    pub drift_y: f64,
    pub drift_theta: f64,
}

impl From<&TraceRow> for TraceCsvRow {
    fn from(r: &TraceRow) -> Self {
        TraceCsvRow {
            time_s: r.time,
            x_m: r.pose.x,
            y_m: r.pose.y,
            theta_rad: r.pose.theta,
            axis: r.axis,
            corrective_flag: r.corrective,
            drift_x: r.drift.x,
            drift_y: r.drift.y,
            drift_theta: r.drift.theta,
        }
    }
}

impl From<TraceCsvRow> for TraceRow {
    fn from(r: TraceCsvRow) -> Self {
        TraceRow {
            time: r.time_s,
            pose: Pose2D { x: r.x_m, y: r.y_m, theta: r.theta_rad },
            axis: r.axis,
            corrective: r.corrective_flag,
            drift: Twist::new(r.drift_x, r.drift_y, r.drift_theta),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunTrace {
    pub rows: Vec<TraceRow>,
}

impl RunTrace {
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<(), csv::Error> {
        crate::export::write_rows(w, self.rows.iter().map(TraceCsvRow::from))
    }

    pub fn read_csv<R: std::io::Read>(r: R) -> Result<Self, csv::Error> {
        let rows: Vec<TraceCsvRow> = crate::export::read_rows(r)?;
        Ok(RunTrace { rows: rows.into_iter().map(TraceRow::from).collect() })
    }
}

/// How one segment went.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentReport {
    pub segment: TrajectorySegment,
    /// Nominal start waypoint of the segment.
    pub frame: Pose2D,
    /// Rows of the trace belonging to this segment.
    pub rows: std::ops::Range<usize>,
    /// Rows at which a drift check was made.
    pub checks: Vec<usize>,
    pub primary_cycles: u64,
    pub corrective_cycles: u64,
    /// Along-track (or heading) shortfall, cross-track and heading error at
    /// the end, in the segment frame.
    pub end_error: Twist,
}

/// Result of following a list of segments.
#[derive(Debug, Clone, PartialEq)]
pub struct PathRun {
    pub start: Pose2D,
    pub trace: RunTrace,
    pub segments: Vec<SegmentReport>,
}

impl PathRun {
    pub fn final_pose(&self) -> Pose2D {
        self.trace.rows.last().map(|r| r.pose).unwrap_or(self.start)
    }
}

struct Follower<'a> {
    robot: &'a mut SimRobot,
    gs: &'a GaitSet,
    cfg: &'a ControllerConfig,
    cycle: EvaluationConfig,
    run: PathRun,
}

struct SegmentState {
    index: usize,
    seg: TrajectorySegment,
    frame: Pose2D,
    /// Unwrapped nominal heading at the segment start, and the robot's
    /// unwrapped heading now.
    nominal: f64,
    heading: f64,
    cycles: u64,
    budget: u64,
    report: SegmentReport,
}

impl SegmentState {
    fn drift(&self, pose: &Pose2D) -> Twist {
        match self.seg.kind {
            SegmentKind::Translate => {
                let local = pose.relative_to(&self.frame);
                Twist::new(0.0, local.y, local.theta)
            }
            SegmentKind::Rotate => {
                let (bx, by) = pose.to_body(pose.x - self.frame.x, pose.y - self.frame.y);
                Twist::new(bx, by, 0.0)
            }
        }
    }

    fn progress(&self, pose: &Pose2D) -> f64 {
        let sign = self.seg.magnitude.signum();
        match self.seg.kind {
            SegmentKind::Translate => sign * pose.relative_to(&self.frame).x,
            SegmentKind::Rotate => sign * (self.heading - self.nominal),
        }
    }

    fn end_error(&self, pose: &Pose2D) -> Twist {
        let remaining = self.seg.magnitude.abs() - self.progress(pose);
        match self.seg.kind {
            SegmentKind::Translate => {
                let local = pose.relative_to(&self.frame);
                Twist::new(remaining, local.y, local.theta)
            }
            SegmentKind::Rotate => {
                let local = pose.relative_to(&self.frame);
                Twist::new(local.x, local.y, remaining)
            }
        }
    }
}

fn component(t: &Twist, dof: Dof) -> f64 {
    match dof {
        Dof::X => t.x,
        Dof::Y => t.y,
        Dof::Theta => t.theta,
    }
}

impl Follower<'_> {
    fn step(&mut self, st: &mut SegmentState, axis: GaitAxis, corrective: bool) -> Result<(), ()> {
        if st.cycles >= st.budget {
            return Err(());
        }
        let before = self.robot.pose();
        let gait = self.gs.get(axis).gait;
        let ex = self.robot.execute_gait(&gait, &self.cycle);
        st.heading += normalize_angle(ex.after.theta - before.theta);
        st.cycles += 1;
        if corrective {
            st.report.corrective_cycles += 1;
        } else {
            st.report.primary_cycles += 1;
        }
        self.run.trace.rows.push(TraceRow {
            time: self.robot.clock(),
            pose: ex.after,
            axis,
            corrective,
            drift: st.drift(&ex.after),
        });
        Ok(())
    }

    /// Component with the largest tolerance-normalized excess, if any.
    fn worst_excess(&self, st: &SegmentState, fraction: f64) -> Option<(Dof, f64)> {
        let drift = st.drift(&self.robot.pose());
        st.seg
            .monitored()
            .into_iter()
            .map(|dof| (dof, component(&drift, dof)))
            .filter(|(dof, v)| v.abs() > fraction * self.cfg.tolerance.get(*dof))
            .max_by(|a, b| {
                let na = a.1.abs() / self.cfg.tolerance.get(a.0);
                let nb = b.1.abs() / self.cfg.tolerance.get(b.0);
                na.total_cmp(&nb)
            })
    }

    /// Drives one component toward zero with the opposing gait. Stops inside
    /// the deadband, once the drift changes sign, or when another cycle would
    /// overshoot by more than it gains.
    /// Returns the number of corrective cycles run.
    fn eliminate(&mut self, st: &mut SegmentState, dof: Dof, value: f64) -> Result<u64, ()> {
        let axis = GaitAxis::from_dof(dof, value < 0.0);
        let stop = (self.cfg.deadband_fraction * self.cfg.tolerance.get(dof)).max(self.gs.rate(axis).abs() / 2.0);
        let mut now = value;
        let mut n = 0;
        while now.abs() > stop && now.signum() == value.signum() {
            self.step(st, axis, true)?;
            n += 1;
            now = component(&st.drift(&self.robot.pose()), dof);
        }
        Ok(n)
    }

    fn correct(&mut self, st: &mut SegmentState) -> Result<(), ()> {
        // a component no corrective cycle can improve is left for the next check
        while let Some((dof, value)) = self.worst_excess(st, 1.0) {
            if self.eliminate(st, dof, value)? == 0 {
                break;
            }
        }
        Ok(())
    }

    /// End-of-segment cleanup: bring every monitored component into its deadband.
    fn settle(&mut self, st: &mut SegmentState) -> Result<(), ()> {
        for dof in st.seg.monitored() {
            let value = component(&st.drift(&self.robot.pose()), dof);
            if value.abs() > self.cfg.deadband_fraction * self.cfg.tolerance.get(dof) {
                self.eliminate(st, dof, value)?;
            }
        }
        Ok(())
    }

    fn follow(
        &mut self,
        index: usize,
        seg: TrajectorySegment,
        frame: Pose2D,
        nominal_heading: f64,
    ) -> Result<(), ControlError> {
        let primary = seg.primary_axis();
        let rate = self.gs.rate(primary).abs();
        if rate == 0.0 {
            return Err(ControlError::ZeroVelocity { axis: primary });
        }
        let estimate = (seg.magnitude.abs() / rate).round().max(1.0);
        let budget = (self.cfg.budget_factor * estimate).ceil() as u64;
        let start = self.robot.pose();
        let first_row = self.run.trace.rows.len();
        let mut st = SegmentState {
            index,
            seg,
            frame,
            nominal: nominal_heading,
            heading: nominal_heading + normalize_angle(start.theta - nominal_heading),
            cycles: 0,
            budget,
            report: SegmentReport {
                segment: seg,
                frame,
                rows: first_row..first_row,
                checks: Vec::new(),
                primary_cycles: 0,
                corrective_cycles: 0,
                end_error: Twist::ZERO,
            },
        };
        let outcome = self.follow_inner(&mut st, rate);
        st.report.rows = first_row..self.run.trace.rows.len();
        st.report.end_error = st.end_error(&self.robot.pose());
        let segment = st.index;
        self.run.segments.push(st.report);
        outcome.map_err(|_| ControlError::BudgetExhausted { segment, budget, partial: Box::new(self.run.clone()) })
    }

    fn follow_inner(&mut self, st: &mut SegmentState, rate: f64) -> Result<(), ()> {
        let primary = st.seg.primary_axis();
        let target = st.seg.magnitude.abs();
        // stop on the cycle that lands nearest the target
        let done = |st: &SegmentState, pose: &Pose2D| target - st.progress(pose) <= rate / 2.0;
        while !done(st, &self.robot.pose()) {
            for _ in 0..self.cfg.check_every {
                if done(st, &self.robot.pose()) {
                    break;
                }
                self.step(st, primary, false)?;
            }
            if let Some(last) = self.run.trace.rows.len().checked_sub(1) {
                st.report.checks.push(last);
            }
            self.correct(st)?;
        }
        self.settle(st)
    }
}

/// Follows one segment from the robot's current pose.
pub fn follow_segment(
    robot: &mut SimRobot,
    gs: &GaitSet,
    seg: &TrajectorySegment,
    cfg: &ControllerConfig,
    step_delay: f64,
) -> Result<PathRun, ControlError> {
    trace_path(robot, gs, std::slice::from_ref(seg), cfg, step_delay)
}

/// Follows `segments` in order. Each segment is tracked in the frame of its
/// nominal start waypoint, so earlier shortfalls show up as drift later.
pub fn trace_path(
    robot: &mut SimRobot,
    gs: &GaitSet,
    segments: &[TrajectorySegment],
    cfg: &ControllerConfig,
    step_delay: f64,
) -> Result<PathRun, ControlError> {
    cfg.validate()?;
    if segments.is_empty() {
        return Err(ControlError::EmptyPath);
    }
    let start = robot.pose();
    let mut follower = Follower {
        robot,
        gs,
        cfg,
        cycle: EvaluationConfig::new(step_delay, 1, 0.0),
        run: PathRun { start, trace: RunTrace::default(), segments: Vec::new() },
    };
    let mut heading = start.theta;
    let mut frame = start;
    for (i, seg) in segments.iter().enumerate() {
        follower.follow(i, *seg, frame, heading)?;
        frame = seg.apply(&frame);
        if seg.kind == SegmentKind::Rotate {
            heading += seg.magnitude;
        }
    }
    Ok(follower.run)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanDocument {
    #[serde(default)]
    segments: Vec<TrajectorySegment>,
    letter_n: Option<LetterN>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LetterN {
    height: f64,
    width: f64,
}

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("malformed plan: {0}")]
    Parse(#[from] toml::de::Error),
    #[error(transparent)]
    Control(#[from] ControlError),
}

/// Reads a plan: either `[[segments]]` tables with `kind` and `magnitude`,
/// or a `[letter_n]` table with `height` and `width`. Both may appear; the
/// letter comes first.
pub fn parse_plan(text: &str) -> Result<Vec<TrajectorySegment>, PlanError> {
    let doc: PlanDocument = toml::from_str(text)?;
    let mut segs = match doc.letter_n {
        Some(n) => letter_n(n.height, n.width)?,
        None => Vec::new(),
    };
    segs.extend(doc.segments);
    if segs.is_empty() {
        return Err(ControlError::EmptyPath.into());
    }
    Ok(segs)
}

/// One open-loop command: repeat `axis` for `cycles`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanStep {
    pub axis: GaitAxis,
    pub cycles: u64,
}

/// Cycle counts from mean velocities alone.
pub fn open_loop_plan(gs: &GaitSet, segments: &[TrajectorySegment]) -> Result<Vec<PlanStep>, ControlError> {
    if segments.is_empty() {
        return Err(ControlError::EmptyPath);
    }
    segments
        .iter()
        .map(|seg| {
            let axis = seg.primary_axis();
            let rate = gs.rate(axis).abs();
            if rate == 0.0 {
                return Err(ControlError::ZeroVelocity { axis });
            }
            Ok(PlanStep { axis, cycles: (seg.magnitude.abs() / rate).round() as u64 })
        })
        .collect()
}

/// Runs a plan without feedback. Drift columns are left at zero.
pub fn execute_open_loop(robot: &mut SimRobot, gs: &GaitSet, plan: &[PlanStep], step_delay: f64) -> PathRun {
    let cfg = EvaluationConfig::new(step_delay, 1, 0.0);
    let start = robot.pose();
    let mut trace = RunTrace::default();
    for step in plan {
        let gait = gs.get(step.axis).gait;
        for _ in 0..step.cycles {
            let ex = robot.execute_gait(&gait, &cfg);
            trace.rows.push(TraceRow {
                time: robot.clock(),
                pose: ex.after,
                axis: step.axis,
                corrective: false,
                drift: Twist::ZERO,
            });
        }
    }
    PathRun { start, trace, segments: Vec::new() }
}
