//! C ABI over `softgait`.
//!
//! Every fallible function returns an [`SgStatus`]; on failure a message is
//! kept per thread and can be copied out with [`sg_last_error_message`].
//! Simulators are opaque [`SgSim`] handles owned by the caller and released
//! with [`sg_sim_free`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, c_void};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use softgait::gait::{NUM_PRIMITIVES, NUM_SERVOS, STEPS_PER_GAIT};
use softgait::search::{refine, train, EvalError, Evaluator, SearchError, SearchOptions, SearchSpace};
use softgait::{
    make_gait, preset, reward, servo_targets, BodyDisplacement, EvaluationConfig, GaitAssignment, GaitAxis, LegId,
    Pose2D, RewardCoefficients, SimConfig, SimRobot, Twist,
};

pub const SG_NUM_LEGS: usize = 4;
/// Length of the array filled by [`sg_servo_targets`].
pub const SG_SERVO_TARGET_COUNT: usize = 48;

const NUM_LEGS: usize = SG_NUM_LEGS;
const _: () = assert!(SG_NUM_LEGS == softgait::gait::NUM_LEGS && SG_SERVO_TARGET_COUNT == STEPS_PER_GAIT * NUM_SERVOS);

/// Result code of every fallible call. `SG_STATUS_OK` is zero.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidConfig = 3,
    SearchAborted = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SgAxis {
    PlusX = 0,
    MinusX = 1,
    PlusY = 2,
    MinusY = 3,
    PlusTheta = 4,
    MinusTheta = 5,
}

impl From<SgAxis> for GaitAxis {
    fn from(a: SgAxis) -> Self {
        match a {
            SgAxis::PlusX => GaitAxis::PlusX,
            SgAxis::MinusX => GaitAxis::MinusX,
            SgAxis::PlusY => GaitAxis::PlusY,
            SgAxis::MinusY => GaitAxis::MinusY,
            SgAxis::PlusTheta => GaitAxis::PlusTheta,
            SgAxis::MinusTheta => GaitAxis::MinusTheta,
        }
    }
}

/// Per-cycle body displacement: BL, BL, rad.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SgDisplacement {
    pub dx: f64,
    pub dy: f64,
    pub dtheta: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SgCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
}

/// Meters, meters, radians. Used for poses and twists alike.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SgPose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SgPair {
    pub first: u8,
    pub second: u8,
}

/// One primitive pair per leg, legs A-D.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SgAssignment {
    pub pairs: [SgPair; SG_NUM_LEGS],
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SgSimConfig {
    pub seed: u64,
    pub noise_sigma: SgPose,
    pub wear_rate: f64,
    pub effect_scale: SgPose,
    pub max_step_translation: f64,
    pub max_step_rotation: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SgEvalConfig {
    pub step_delay: f64,
    pub cycles_per_eval: u32,
    pub per_eval_overhead: f64,
}

/// Called after every evaluation with its index, the evaluated assignment and
/// its reward. Return non-zero to abort the search.
pub type SgProgressFn =
    Option<unsafe extern "C" fn(user: *mut c_void, eval_index: u64, gait: *const SgAssignment, reward: f64) -> c_int>;

/// Opaque simulator handle.
pub struct SgSim {
    robot: SimRobot,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn fail(status: SgStatus, msg: impl Into<String>) -> SgStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> SgStatus) -> SgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(SgStatus::Panic, "internal panic"),
    }
}

fn to_twist(p: SgPose) -> Twist {
    Twist::new(p.x, p.y, p.theta)
}

fn from_twist(t: Twist) -> SgPose {
    SgPose { x: t.x, y: t.y, theta: t.theta }
}

fn to_assignment(a: &SgAssignment) -> Result<GaitAssignment, SgStatus> {
    GaitAssignment::from_ids(a.pairs.map(|p| (p.first as usize, p.second as usize)))
        .ok_or_else(|| fail(SgStatus::InvalidArgument, format!("primitive id out of range 0..{NUM_PRIMITIVES}")))
}

fn from_assignment(g: &GaitAssignment) -> SgAssignment {
    SgAssignment { pairs: g.ids().map(|(a, b)| SgPair { first: a as u8, second: b as u8 }) }
}

fn to_eval(c: &SgEvalConfig) -> Result<EvaluationConfig, SgStatus> {
    let cfg = EvaluationConfig::new(c.step_delay, c.cycles_per_eval, c.per_eval_overhead);
    cfg.validate().map_err(|e| fail(SgStatus::InvalidConfig, e.to_string()))?;
    Ok(cfg)
}

fn to_displacement(d: BodyDisplacement) -> SgDisplacement {
    SgDisplacement { dx: d.dx, dy: d.dy, dtheta: d.dtheta }
}

fn to_coefficients(k: &SgCoefficients) -> RewardCoefficients {
    RewardCoefficients { a: k.a, b: k.b, c: k.c, d: k.d, e: k.e, f: k.f }
}

/// Copies the calling thread's last error message into `buf` (NUL
/// terminated, truncated to `len`). Returns the full message length in
/// bytes, excluding the terminator.
///
/// # Safety
/// `buf` must be null or valid for `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn sg_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Reward of a per-cycle displacement. NaN if either pointer is null.
///
/// # Safety
/// Pointers must be null or point to valid values.
#[no_mangle]
pub unsafe extern "C" fn sg_reward(d: *const SgDisplacement, k: *const SgCoefficients) -> f64 {
    match (d.as_ref(), k.as_ref()) {
        (Some(d), Some(k)) => reward(&BodyDisplacement::new(d.dx, d.dy, d.dtheta), &to_coefficients(k)),
        _ => f64::NAN,
    }
}

/// # Safety
/// `out` must be null or valid for writing.
#[no_mangle]
pub unsafe extern "C" fn sg_preset(axis: SgAxis, out: *mut SgCoefficients) -> SgStatus {
    let Some(out) = out.as_mut() else {
        return fail(SgStatus::NullPointer, "out is null");
    };
    let k = preset(axis.into());
    *out = SgCoefficients { a: k.a, b: k.b, c: k.c, d: k.d, e: k.e, f: k.f };
    SgStatus::Ok
}

#[no_mangle]
pub extern "C" fn sg_evals_required(n_legs: u32, n_prims: u32) -> u64 {
    softgait::search::evals_required(n_legs as usize, n_prims as usize)
}

/// Simulated seconds for `rounds` rounds of search at the given timing.
///
/// # Safety
/// Pointers must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn sg_estimate_training_time(
    eval: *const SgEvalConfig,
    n_legs: u32,
    n_prims: u32,
    rounds: u32,
    out_seconds: *mut f64,
) -> SgStatus {
    let (Some(eval), Some(out)) = (eval.as_ref(), out_seconds.as_mut()) else {
        return fail(SgStatus::NullPointer, "eval or out_seconds is null");
    };
    match to_eval(eval) {
        Ok(cfg) => {
            *out = softgait::search::estimate_training_time(&cfg, n_legs as usize, n_prims as usize, rounds);
            SgStatus::Ok
        }
        Err(s) => s,
    }
}

/// Servo angles (rad) of the three steps of a gait, step-major:
/// `out[step * 16 + servo]`. `out` must hold `SG_SERVO_TARGET_COUNT` doubles.
///
/// # Safety
/// `gait` must be valid; `out` must be valid for 48 writes.
#[no_mangle]
pub unsafe extern "C" fn sg_servo_targets(gait: *const SgAssignment, out: *mut f64) -> SgStatus {
    if gait.is_null() || out.is_null() {
        return fail(SgStatus::NullPointer, "gait or out is null");
    }
    let g = match to_assignment(&*gait) {
        Ok(g) => g,
        Err(s) => return s,
    };
    let out = std::slice::from_raw_parts_mut(out, SG_SERVO_TARGET_COUNT);
    for (i, step) in make_gait(&g).steps().iter().enumerate() {
        out[i * NUM_SERVOS..(i + 1) * NUM_SERVOS].copy_from_slice(&servo_targets(step).angles);
    }
    SgStatus::Ok
}

/// Fills `out` with the default simulator configuration.
///
/// # Safety
/// `out` must be null or valid for writing.
#[no_mangle]
pub unsafe extern "C" fn sg_sim_config_default(out: *mut SgSimConfig) -> SgStatus {
    let Some(out) = out.as_mut() else {
        return fail(SgStatus::NullPointer, "out is null");
    };
    let c = SimConfig::default();
    *out = SgSimConfig {
        seed: c.seed,
        noise_sigma: from_twist(c.noise_sigma),
        wear_rate: c.wear_rate,
        effect_scale: from_twist(c.effect_scale),
        max_step_translation: c.max_step_translation,
        max_step_rotation: c.max_step_rotation,
    };
    SgStatus::Ok
}

/// Creates a simulator. On success `*out` owns a handle to free with
/// [`sg_sim_free`].
///
/// # Safety
/// `config` must be valid; `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn sg_sim_new(config: *const SgSimConfig, out: *mut *mut SgSim) -> SgStatus {
    guard(|| {
        let (Some(c), false) = (config.as_ref(), out.is_null()) else {
            return fail(SgStatus::NullPointer, "config or out is null");
        };
        let cfg = SimConfig {
            seed: c.seed,
            noise_sigma: to_twist(c.noise_sigma),
            wear_rate: c.wear_rate,
            effect_scale: to_twist(c.effect_scale),
            max_step_translation: c.max_step_translation,
            max_step_rotation: c.max_step_rotation,
        };
        match SimRobot::new(cfg) {
            Ok(robot) => {
                *out = Box::into_raw(Box::new(SgSim { robot }));
                SgStatus::Ok
            }
            Err(e) => fail(SgStatus::InvalidConfig, e.to_string()),
        }
    })
}

/// Releases a simulator. Null is ignored.
///
/// # Safety
/// `sim` must be null or a handle from [`sg_sim_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sg_sim_free(sim: *mut SgSim) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Runs one evaluation of `gait`, advancing the simulator, and writes the
/// per-cycle body-frame displacement.
///
/// # Safety
/// All pointers must be valid; `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sg_sim_execute(
    sim: *mut SgSim,
    gait: *const SgAssignment,
    eval: *const SgEvalConfig,
    out: *mut SgDisplacement,
) -> SgStatus {
    guard(|| {
        let (Some(sim), Some(gait), Some(eval), Some(out)) = (sim.as_mut(), gait.as_ref(), eval.as_ref(), out.as_mut())
        else {
            return fail(SgStatus::NullPointer, "null argument");
        };
        let (g, cfg) = match (to_assignment(gait), to_eval(eval)) {
            (Ok(g), Ok(c)) => (g, c),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        *out = to_displacement(sim.robot.execute_gait(&g, &cfg).displacement());
        SgStatus::Ok
    })
}

/// # Safety
/// `sim` must be a live handle; `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn sg_sim_pose(sim: *const SgSim, out: *mut SgPose) -> SgStatus {
    let (Some(sim), Some(out)) = (sim.as_ref(), out.as_mut()) else {
        return fail(SgStatus::NullPointer, "sim or out is null");
    };
    let p = sim.robot.pose();
    *out = SgPose { x: p.x, y: p.y, theta: p.theta };
    SgStatus::Ok
}

/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sg_sim_reset_pose(sim: *mut SgSim, pose: SgPose) -> SgStatus {
    let Some(sim) = sim.as_mut() else {
        return fail(SgStatus::NullPointer, "sim is null");
    };
    sim.robot.reset_pose(Pose2D::new(pose.x, pose.y, pose.theta));
    SgStatus::Ok
}

struct CallbackEvaluator<'a> {
    robot: &'a mut SimRobot,
    cfg: EvaluationConfig,
    k: RewardCoefficients,
    cb: SgProgressFn,
    user: *mut c_void,
    count: u64,
}

impl Evaluator for CallbackEvaluator<'_> {
    fn evaluate(&mut self, gait: &GaitAssignment) -> Result<BodyDisplacement, EvalError> {
        let d = self.robot.execute_gait(gait, &self.cfg).displacement();
        let index = self.count;
        self.count += 1;
        if let Some(cb) = self.cb {
            let g = from_assignment(gait);
            // SAFETY: the caller supplied the callback and its user pointer together
            if unsafe { cb(self.user, index, &g, reward(&d, &self.k)) } != 0 {
                return Err(EvalError::new("aborted by progress callback"));
            }
        }
        Ok(d)
    }

    fn evaluations(&self) -> u64 {
        self.count
    }
}

/// Search settings. `leg_order` holds `n_legs` leg indices (0 = A .. 3 = D).
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SgSearchConfig {
    pub leg_order: [u8; SG_NUM_LEGS],
    pub n_legs: u32,
    pub n_prims: u32,
    pub repeats: u32,
}

/// Legs A-D in order, all seven primitives, one repeat.
#[no_mangle]
pub extern "C" fn sg_search_config_default() -> SgSearchConfig {
    SgSearchConfig { leg_order: [0, 1, 2, 3], n_legs: NUM_LEGS as u32, n_prims: NUM_PRIMITIVES as u32, repeats: 1 }
}

fn to_options(c: &SgSearchConfig) -> Result<SearchOptions, SgStatus> {
    let n = (c.n_legs as usize).min(NUM_LEGS);
    if c.n_legs as usize > NUM_LEGS {
        return Err(fail(SgStatus::InvalidArgument, "n_legs must be <= 4"));
    }
    let legs = c.leg_order[..n]
        .iter()
        .map(|&i| if (i as usize) < NUM_LEGS { Ok(LegId::ALL[i as usize]) } else { Err(()) })
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| fail(SgStatus::InvalidArgument, "leg index out of range"))?;
    let space =
        SearchSpace::new(legs, c.n_prims as usize).map_err(|e| fail(SgStatus::InvalidArgument, e.to_string()))?;
    Ok(SearchOptions { space, repeats: c.repeats.max(1) })
}

enum SearchKind {
    Train,
    Refine,
}

#[allow(clippy::too_many_arguments)]
unsafe fn run_search(
    kind: SearchKind,
    sim: *mut SgSim,
    k: *const SgCoefficients,
    eval: *const SgEvalConfig,
    search: *const SgSearchConfig,
    initial: *const SgAssignment,
    rounds: u32,
    cb: SgProgressFn,
    user: *mut c_void,
    best_out: *mut SgAssignment,
    reward_out: *mut f64,
) -> SgStatus {
    guard(|| {
        let (Some(sim), Some(k), Some(eval), Some(initial)) =
            (sim.as_mut(), k.as_ref(), eval.as_ref(), initial.as_ref())
        else {
            return fail(SgStatus::NullPointer, "null argument");
        };
        if best_out.is_null() || reward_out.is_null() {
            return fail(SgStatus::NullPointer, "output pointer is null");
        }
        let opts = match search.as_ref() {
            Some(s) => to_options(s),
            None => Ok(SearchOptions::new(SearchSpace::default())),
        };
        let (opts, cfg, init) = match (opts, to_eval(eval), to_assignment(initial)) {
            (Ok(o), Ok(c), Ok(i)) => (o, c, i),
            (Err(s), _, _) | (_, Err(s), _) | (_, _, Err(s)) => return s,
        };
        let k = to_coefficients(k);
        let mut ev = CallbackEvaluator { robot: &mut sim.robot, cfg, k, cb, user, count: 0 };
        let result = match kind {
            SearchKind::Train => train(&mut ev, &k, &init, rounds, &opts),
            SearchKind::Refine => refine(&mut ev, &k, &init, rounds, &opts),
        };
        match result {
            Ok(outcome) => {
                *best_out = from_assignment(&outcome.best);
                *reward_out = outcome.best_reward;
                SgStatus::Ok
            }
            Err(e @ SearchError::Aborted { .. }) => fail(SgStatus::SearchAborted, e.to_string()),
            Err(e) => fail(SgStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Greedy per-leg search from `initial` on the simulator, followed by
/// `rounds - 1` refinement rounds. `search` may be null for the full space.
///
/// # Safety
/// Pointers other than `search`, `callback` and `user` must be valid;
/// `sim` must be a live handle.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn sg_tree_search(
    sim: *mut SgSim,
    coefficients: *const SgCoefficients,
    eval: *const SgEvalConfig,
    search: *const SgSearchConfig,
    initial: *const SgAssignment,
    rounds: u32,
    callback: SgProgressFn,
    user: *mut c_void,
    best_out: *mut SgAssignment,
    reward_out: *mut f64,
) -> SgStatus {
    run_search(
        SearchKind::Train,
        sim,
        coefficients,
        eval,
        search,
        initial,
        rounds,
        callback,
        user,
        best_out,
        reward_out,
    )
}

/// Refinement rounds around `existing`; each round first re-measures it.
///
/// # Safety
/// As for [`sg_tree_search`].
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn sg_refine(
    sim: *mut SgSim,
    coefficients: *const SgCoefficients,
    eval: *const SgEvalConfig,
    search: *const SgSearchConfig,
    existing: *const SgAssignment,
    rounds: u32,
    callback: SgProgressFn,
    user: *mut c_void,
    best_out: *mut SgAssignment,
    reward_out: *mut f64,
) -> SgStatus {
    run_search(
        SearchKind::Refine,
        sim,
        coefficients,
        eval,
        search,
        existing,
        rounds,
        callback,
        user,
        best_out,
        reward_out,
    )
}
