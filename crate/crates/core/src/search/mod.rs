//! Greedy per-leg tree search, refinement and evaluation budgeting.
//!
//! For each leg in turn, all ordered primitive pairs are tried with the other
//! legs held at the best assignment found so far. A candidate replaces the
//! incumbent only if its reward is strictly greater than the best reward seen
//! in the whole search, so the first of several equal candidates wins.

mod log;
mod oracle;

use thiserror::Error;

pub use self::log::{LogMeta, LogRecord, LogRow, SeedRecord, SeedRow, TrainingLog};
pub use self::oracle::{brute_force_oracle, enumeration_count, OracleResult};

use crate::export::SimTraceRow;
use crate::gait::{GaitAssignment, LegId, PrimitivePair, NUM_LEGS, NUM_PRIMITIVES};
use crate::reward::{reward, BodyDisplacement, RewardCoefficients};
use crate::sim::{EvaluationConfig, FrozenSim, SimRobot};

#[derive(Debug, Error, Clone, PartialEq)]
#[error("evaluation failed: {message}")]
pub struct EvalError {
    pub message: String,
}

impl EvalError {
    pub fn new(message: impl Into<String>) -> Self {
        EvalError { message: message.into() }
    }
}

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("invalid search space: {0}")]
    InvalidSpace(String),
    #[error("refinement needs at least one round")]
    NoRounds,
    #[error("search aborted after {} evaluations: {source}", log.records.len())]
    Aborted { source: EvalError, log: Box<TrainingLog> },
}

/// Measures the body-frame motion of a gait. Implementations may have side
/// effects (the robot walks and wears) and count their own invocations.
pub trait Evaluator {
    fn evaluate(&mut self, gait: &GaitAssignment) -> Result<BodyDisplacement, EvalError>;

    /// Number of `evaluate` calls made so far.
    fn evaluations(&self) -> u64;
}

/// Pure displacement function; one instance may be shared across threads.
pub trait DeterministicEvaluator: Sync {
    fn displacement(&self, gait: &GaitAssignment) -> BodyDisplacement;
}

impl DeterministicEvaluator for FrozenSim {
    fn displacement(&self, gait: &GaitAssignment) -> BodyDisplacement {
        FrozenSim::displacement(self, gait)
    }
}

/// Drives a [`SimRobot`]: each evaluation walks `cfg.cycles_per_eval` cycles
/// from wherever the robot currently is.
pub struct SimEvaluator<'a> {
    robot: &'a mut SimRobot,
    cfg: EvaluationConfig,
    count: u64,
    trace: Vec<SimTraceRow>,
}

impl<'a> SimEvaluator<'a> {
    pub fn new(robot: &'a mut SimRobot, cfg: EvaluationConfig) -> Self {
        SimEvaluator { robot, cfg, count: 0, trace: Vec::new() }
    }

    pub fn trace(&self) -> &[SimTraceRow] {
        &self.trace
    }

    pub fn into_trace(self) -> Vec<SimTraceRow> {
        self.trace
    }
}

impl Evaluator for SimEvaluator<'_> {
    fn evaluate(&mut self, gait: &GaitAssignment) -> Result<BodyDisplacement, EvalError> {
        let ex = self.robot.execute_gait(gait, &self.cfg);
        self.count += 1;
        self.trace.extend(SimTraceRow::from_execution(&ex));
        Ok(ex.displacement())
    }

    fn evaluations(&self) -> u64 {
        self.count
    }
}

/// Counts calls into a [`DeterministicEvaluator`].
pub struct PureEvaluator<'a, D: ?Sized> {
    inner: &'a D,
    count: u64,
}

impl<'a, D: DeterministicEvaluator + ?Sized> PureEvaluator<'a, D> {
    pub fn new(inner: &'a D) -> Self {
        PureEvaluator { inner, count: 0 }
    }
}

impl<D: DeterministicEvaluator + ?Sized> Evaluator for PureEvaluator<'_, D> {
    fn evaluate(&mut self, gait: &GaitAssignment) -> Result<BodyDisplacement, EvalError> {
        self.count += 1;
        Ok(self.inner.displacement(gait))
    }

    fn evaluations(&self) -> u64 {
        self.count
    }
}

/// Adapts a closure into a counted [`Evaluator`].
pub struct FnEvaluator<F> {
    f: F,
    count: u64,
}

impl<F> FnEvaluator<F>
where
    F: FnMut(&GaitAssignment) -> Result<BodyDisplacement, EvalError>,
{
    pub fn new(f: F) -> Self {
        FnEvaluator { f, count: 0 }
    }
}

impl<F> Evaluator for FnEvaluator<F>
where
    F: FnMut(&GaitAssignment) -> Result<BodyDisplacement, EvalError>,
{
    fn evaluate(&mut self, gait: &GaitAssignment) -> Result<BodyDisplacement, EvalError> {
        self.count += 1;
        (self.f)(gait)
    }

    fn evaluations(&self) -> u64 {
        self.count
    }
}

/// Legs searched, in order, and how many primitives each may use. Legs not
/// listed keep their initial pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchSpace {
    leg_order: Vec<LegId>,
    n_prims: usize,
}

impl SearchSpace {
    pub fn new(leg_order: Vec<LegId>, n_prims: usize) -> Result<Self, SearchError> {
        if leg_order.is_empty() || leg_order.len() > NUM_LEGS {
            return Err(SearchError::InvalidSpace(format!("expected 1 to 4 legs, got {}", leg_order.len())));
        }
        for (i, leg) in leg_order.iter().enumerate() {
            if leg_order[..i].contains(leg) {
                return Err(SearchError::InvalidSpace(format!("leg {leg} listed twice")));
            }
        }
        if !(1..=NUM_PRIMITIVES).contains(&n_prims) {
            return Err(SearchError::InvalidSpace(format!("expected 1 to 7 primitives, got {n_prims}")));
        }
        Ok(SearchSpace { leg_order, n_prims })
    }

    /// The first `n_legs` legs in order A-D with primitives `0..n_prims`.
    pub fn reduced(n_legs: usize, n_prims: usize) -> Result<Self, SearchError> {
        SearchSpace::new(LegId::ALL.iter().copied().take(n_legs).collect(), n_prims)
    }

    pub fn leg_order(&self) -> &[LegId] {
        &self.leg_order
    }

    pub fn n_legs(&self) -> usize {
        self.leg_order.len()
    }

    pub fn n_prims(&self) -> usize {
        self.n_prims
    }

    pub fn pairs(&self) -> impl Iterator<Item = PrimitivePair> + Clone {
        PrimitivePair::all(self.n_prims)
    }
}

impl Default for SearchSpace {
    fn default() -> Self {
        SearchSpace { leg_order: LegId::ALL.to_vec(), n_prims: NUM_PRIMITIVES }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchOptions {
    pub space: SearchSpace,
    /// Evaluations averaged per candidate; the mean reward decides.
    pub repeats: u32,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { space: SearchSpace::default(), repeats: 1 }
    }
}

impl SearchOptions {
    pub fn new(space: SearchSpace) -> Self {
        SearchOptions { space, repeats: 1 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub best: GaitAssignment,
    /// Reward measured when `best` was accepted (or seeded).
    pub best_reward: f64,
    pub log: TrainingLog,
}

/// `n_legs * n_prims^2`.
pub fn evals_required(n_legs: usize, n_prims: usize) -> u64 {
    (n_legs * n_prims * n_prims) as u64
}

/// Simulated training time: every sweep evaluation of every round, plus one
/// incumbent measurement per refinement round after the first.
pub fn estimate_training_time(cfg: &EvaluationConfig, n_legs: usize, n_prims: usize, rounds: u32) -> f64 {
    let per_eval = cfg.cycles_per_eval as f64 * 3.0 * cfg.step_delay + cfg.per_eval_overhead;
    let sweeps = rounds as f64 * evals_required(n_legs, n_prims) as f64;
    let seeds = rounds.saturating_sub(1) as f64;
    (sweeps + seeds) * per_eval
}

/// Total evaluator calls made by `train` with the given rounds.
pub fn evaluator_calls(space: &SearchSpace, rounds: u32, repeats: u32) -> u64 {
    let sweeps = rounds as u64 * evals_required(space.n_legs(), space.n_prims());
    (sweeps + rounds.saturating_sub(1) as u64) * repeats.max(1) as u64
}

struct Runner<'e, E: ?Sized> {
    ev: &'e mut E,
    k: RewardCoefficients,
    opts: &'e SearchOptions,
    log: TrainingLog,
    next_index: u64,
}

impl<'e, E: Evaluator + ?Sized> Runner<'e, E> {
    fn new(ev: &'e mut E, k: &RewardCoefficients, opts: &'e SearchOptions) -> Self {
        let meta = LogMeta {
            coefficients: *k,
            leg_order: opts.space.leg_order.clone(),
            n_prims: opts.space.n_prims,
            repeats: opts.repeats.max(1),
            eval: None,
            seed: None,
        };
        Runner { ev, k: *k, opts, log: TrainingLog::new(meta), next_index: 0 }
    }

    fn measure(&mut self, gait: &GaitAssignment) -> Result<(u64, BodyDisplacement, f64), EvalError> {
        let repeats = self.opts.repeats.max(1);
        let index = self.next_index;
        self.next_index += 1;
        if repeats == 1 {
            let d = self.ev.evaluate(gait)?;
            return Ok((index, d, reward(&d, &self.k)));
        }
        let mut sum = BodyDisplacement::ZERO;
        let mut reward_sum = 0.0;
        for _ in 0..repeats {
            let d = self.ev.evaluate(gait)?;
            reward_sum += reward(&d, &self.k);
            sum = BodyDisplacement::new(sum.dx + d.dx, sum.dy + d.dy, sum.dtheta + d.dtheta);
        }
        let n = repeats as f64;
        Ok((index, sum.scale(1.0 / n), reward_sum / n))
    }

    /// One pass over every leg. `best_reward` carries over between legs.
    fn sweep(&mut self, incumbent: GaitAssignment, mut best_reward: f64) -> Result<(GaitAssignment, f64), EvalError> {
        let mut best = incumbent;
        let mut current = incumbent;
        for &leg in &self.opts.space.leg_order {
            for pair in self.opts.space.pairs() {
                current.set(leg, pair);
                let (eval_index, displacement, r) = self.measure(&current)?;
                let accepted = r > best_reward;
                if accepted {
                    best_reward = r;
                    best = current;
                }
                self.log.records.push(LogRecord { eval_index, leg, pair, displacement, reward: r, accepted });
            }
            current = best;
        }
        Ok((best, best_reward))
    }

    fn refine_round(&mut self, round: u32, incumbent: GaitAssignment) -> Result<(GaitAssignment, f64), EvalError> {
        let (eval_index, displacement, r) = self.measure(&incumbent)?;
        self.log.round_seeds.push(SeedRecord { round, eval_index, displacement, reward: r });
        self.sweep(incumbent, r)
    }

    fn abort(self, source: EvalError) -> SearchError {
        SearchError::Aborted { source, log: Box::new(self.log) }
    }
}

/// Greedy per-leg search starting from `initial` with the best reward at -inf.
pub fn tree_search<E: Evaluator + ?Sized>(
    ev: &mut E,
    k: &RewardCoefficients,
    initial: &GaitAssignment,
    opts: &SearchOptions,
) -> Result<SearchOutcome, SearchError> {
    train(ev, k, initial, 1, opts)
}

/// Re-runs the per-leg sweep `rounds` times around `existing`. Each round
/// first re-measures the incumbent and uses that as the bar to beat.
pub fn refine<E: Evaluator + ?Sized>(
    ev: &mut E,
    k: &RewardCoefficients,
    existing: &GaitAssignment,
    rounds: u32,
    opts: &SearchOptions,
) -> Result<SearchOutcome, SearchError> {
    if rounds == 0 {
        return Err(SearchError::NoRounds);
    }
    let mut runner = Runner::new(ev, k, opts);
    let mut incumbent = *existing;
    let mut best_reward = f64::NEG_INFINITY;
    for round in 0..rounds {
        match runner.refine_round(round, incumbent) {
            Ok((g, r)) => {
                incumbent = g;
                best_reward = r;
            }
            Err(e) => return Err(runner.abort(e)),
        }
    }
    Ok(SearchOutcome { best: incumbent, best_reward, log: runner.log })
}

/// A tree search followed by `rounds - 1` refinement rounds, in one log.
pub fn train<E: Evaluator + ?Sized>(
    ev: &mut E,
    k: &RewardCoefficients,
    initial: &GaitAssignment,
    rounds: u32,
    opts: &SearchOptions,
) -> Result<SearchOutcome, SearchError> {
    if rounds == 0 {
        return Err(SearchError::NoRounds);
    }
    let mut runner = Runner::new(ev, k, opts);
    let (mut incumbent, mut best_reward) = match runner.sweep(*initial, f64::NEG_INFINITY) {
        Ok(v) => v,
        Err(e) => return Err(runner.abort(e)),
    };
    for round in 1..rounds {
        match runner.refine_round(round, incumbent) {
            Ok((g, r)) => {
                incumbent = g;
                best_reward = r;
            }
            Err(e) => return Err(runner.abort(e)),
        }
    }
    Ok(SearchOutcome { best: incumbent, best_reward, log: runner.log })
}
