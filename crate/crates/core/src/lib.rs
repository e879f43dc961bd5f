//! Greedy per-leg gait search for soft quadrupeds.
//!
//! Gaits are three-step servo sequences assembled from one primitive pair
//! per leg. [`search::tree_search`] finds a gait leg by leg against any
//! [`search::Evaluator`]; [`sim::SimRobot`] is a seeded kinematic stand-in
//! for the robot; [`control`] schedules the six axis gaits to follow
//! piecewise-linear paths with drift correction.

pub mod cli;
pub mod config;
pub mod control;
pub mod experiment;
pub mod export;
pub mod gait;
pub mod gait_file;
pub mod plot;
pub mod reward;
pub mod search;
pub mod sim;

pub use gait::{make_gait, servo_targets, Gait, GaitAssignment, LegId, PrimitiveId, PrimitivePair, ServoState, Step};
pub use reward::{preset, reward, BodyDisplacement, GaitAxis, RewardCoefficients};
pub use sim::{body_frame_displacement, EvaluationConfig, Pose2D, SimConfig, SimRobot, Twist};
