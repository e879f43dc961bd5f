//! Servo states, leg primitives, primitive pairs and the three-step gait.
//!
//! A gait cycle is three steps of 16 servo states. The first two steps are
//! assembled from one primitive per leg, the third step returns every servo
//! to neutral so gaits can be sequenced without transition artifacts. Servo
//! ordering is leg-major: legs A, B, C, D, each with servos 1 to 4.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Number of legs on the robot.
pub const NUM_LEGS: usize = 4;
/// Servos driving one leg.
pub const SERVOS_PER_LEG: usize = 4;
/// Servos on the whole robot.
pub const NUM_SERVOS: usize = NUM_LEGS * SERVOS_PER_LEG;
/// Size of the canonical primitive table.
pub const NUM_PRIMITIVES: usize = 7;
/// Ordered primitive pairs available to one leg.
pub const NUM_PAIRS: usize = NUM_PRIMITIVES * NUM_PRIMITIVES;
/// Steps in one gait cycle.
pub const STEPS_PER_GAIT: usize = 3;
/// Servo travel limit in radians (80% of nominal travel).
pub const SERVO_TRAVEL_RAD: f64 = 1.25;

/// Discrete servo position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ServoState {
    Left,
    Neutral,
    Right,
}

impl ServoState {
    /// Normalized travel encoding: 0 fully left, 0.5 centered, 1 fully right.
    pub fn encoding(self) -> f64 {
        match self {
            ServoState::Left => 0.0,
            ServoState::Neutral => 0.5,
            ServoState::Right => 1.0,
        }
    }

    /// Inverse of [`ServoState::encoding`]. Only the three exact encodings are accepted.
    pub fn from_encoding(value: f64) -> Option<Self> {
        if value == 0.0 {
            Some(ServoState::Left)
        } else if value == 0.5 {
            Some(ServoState::Neutral)
        } else if value == 1.0 {
            Some(ServoState::Right)
        } else {
            None
        }
    }

    /// Commanded servo angle.
    pub fn angle(self) -> f64 {
        match self {
            ServoState::Left => -SERVO_TRAVEL_RAD,
            ServoState::Neutral => 0.0,
            ServoState::Right => SERVO_TRAVEL_RAD,
        }
    }

    fn code(self) -> u8 {
        match self {
            ServoState::Left => 0,
            ServoState::Neutral => 1,
            ServoState::Right => 2,
        }
    }
}

/// One of the four legs, A through D.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LegId(u8);

impl LegId {
    pub const A: LegId = LegId(0);
    pub const B: LegId = LegId(1);
    pub const C: LegId = LegId(2);
    pub const D: LegId = LegId(3);
    pub const ALL: [LegId; NUM_LEGS] = [LegId::A, LegId::B, LegId::C, LegId::D];

    pub fn new(index: usize) -> Option<Self> {
        (index < NUM_LEGS).then_some(LegId(index as u8))
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn letter(self) -> char {
        (b'A' + self.0) as char
    }
}

impl fmt::Display for LegId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

impl FromStr for LegId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "A" | "a" | "0" => Ok(LegId::A),
            "B" | "b" | "1" => Ok(LegId::B),
            "C" | "c" | "2" => Ok(LegId::C),
            "D" | "d" | "3" => Ok(LegId::D),
            other => Err(format!("unknown leg `{other}` (expected A-D)")),
        }
    }
}

impl Serialize for LegId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for LegId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Index into the primitive table, `0..7`. Primitive 0 is leg-neutral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct PrimitiveId(u8);

impl PrimitiveId {
    pub const NEUTRAL: PrimitiveId = PrimitiveId(0);

    pub fn new(id: usize) -> Option<Self> {
        (id < NUM_PRIMITIVES).then_some(PrimitiveId(id as u8))
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for PrimitiveId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p{}", self.0)
    }
}

/// Four servo states putting one leg into a configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Primitive {
    pub id: PrimitiveId,
    pub servo_states: [ServoState; SERVOS_PER_LEG],
}

use ServoState::{Left as L, Neutral as N, Right as R};

/// Canonical primitives: neutral, extension, contraction and four tilts.
pub const PRIMITIVES: [Primitive; NUM_PRIMITIVES] = [
    Primitive { id: PrimitiveId(0), servo_states: [N, N, N, N] },
    Primitive { id: PrimitiveId(1), servo_states: [R, R, R, R] },
    Primitive { id: PrimitiveId(2), servo_states: [L, L, L, L] },
    Primitive { id: PrimitiveId(3), servo_states: [R, R, L, L] },
    Primitive { id: PrimitiveId(4), servo_states: [L, L, R, R] },
    Primitive { id: PrimitiveId(5), servo_states: [R, L, R, L] },
    Primitive { id: PrimitiveId(6), servo_states: [L, R, L, R] },
];

impl Primitive {
    pub fn get(id: PrimitiveId) -> &'static Primitive {
        &PRIMITIVES[id.index()]
    }
}

/// SHA-256 over the state codes of the canonical primitive table, hex encoded.
pub fn primitive_table_hash() -> String {
    hash_primitive_table(&PRIMITIVES.map(|p| p.servo_states))
}

pub(crate) fn hash_primitive_table(table: &[[ServoState; SERVOS_PER_LEG]; NUM_PRIMITIVES]) -> String {
    use sha2::{Digest, Sha256};
    let mut hasher = Sha256::new();
    for row in table {
        let codes: Vec<u8> = row.iter().map(|s| s.code()).collect();
        hasher.update(&codes);
    }
    hex::encode(hasher.finalize())
}

/// Ordered two-step primitive sequence for one leg.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct PrimitivePair {
    pub first: PrimitiveId,
    pub second: PrimitiveId,
}

impl PrimitivePair {
    pub const NEUTRAL: PrimitivePair = PrimitivePair { first: PrimitiveId::NEUTRAL, second: PrimitiveId::NEUTRAL };

    pub fn new(first: PrimitiveId, second: PrimitiveId) -> Self {
        PrimitivePair { first, second }
    }

    /// Builds a pair from raw ids; `None` if either is out of range.
    pub fn from_ids(first: usize, second: usize) -> Option<Self> {
        Some(PrimitivePair::new(PrimitiveId::new(first)?, PrimitiveId::new(second)?))
    }

    /// Dense index `first * 7 + second` into a 49-entry per-leg table.
    pub fn index(self) -> usize {
        self.first.index() * NUM_PRIMITIVES + self.second.index()
    }

    pub fn from_index(index: usize) -> Option<Self> {
        (index < NUM_PAIRS).then(|| {
            PrimitivePair::new(PrimitiveId((index / NUM_PRIMITIVES) as u8), PrimitiveId((index % NUM_PRIMITIVES) as u8))
        })
    }

    /// All pairs over primitives `0..n_prims`, lexicographic by `(first, second)`.
    pub fn all(n_prims: usize) -> impl Iterator<Item = PrimitivePair> + Clone {
        let n = n_prims.min(NUM_PRIMITIVES) as u8;
        (0..n).flat_map(move |a| (0..n).map(move |b| PrimitivePair::new(PrimitiveId(a), PrimitiveId(b))))
    }
}

impl fmt::Display for PrimitivePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.first, self.second)
    }
}

/// One primitive pair per leg; the searchable object.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct GaitAssignment {
    pub pairs: [PrimitivePair; NUM_LEGS],
}

impl GaitAssignment {
    pub fn neutral() -> Self {
        GaitAssignment::default()
    }

    pub fn new(pairs: [PrimitivePair; NUM_LEGS]) -> Self {
        GaitAssignment { pairs }
    }

    /// Builds an assignment from `[(first, second); 4]` raw ids.
    pub fn from_ids(ids: [(usize, usize); NUM_LEGS]) -> Option<Self> {
        let mut pairs = [PrimitivePair::NEUTRAL; NUM_LEGS];
        for (slot, (a, b)) in pairs.iter_mut().zip(ids) {
            *slot = PrimitivePair::from_ids(a, b)?;
        }
        Some(GaitAssignment { pairs })
    }

    pub fn ids(&self) -> [(usize, usize); NUM_LEGS] {
        self.pairs.map(|p| (p.first.index(), p.second.index()))
    }

    pub fn pair(&self, leg: LegId) -> PrimitivePair {
        self.pairs[leg.index()]
    }

    pub fn set(&mut self, leg: LegId, pair: PrimitivePair) {
        self.pairs[leg.index()] = pair;
    }

    pub fn with(mut self, leg: LegId, pair: PrimitivePair) -> Self {
        self.set(leg, pair);
        self
    }

    pub fn is_neutral(&self) -> bool {
        self.pairs.iter().all(|p| *p == PrimitivePair::NEUTRAL)
    }
}

impl fmt::Display for GaitAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.pairs.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{}:{}", LegId(i as u8), p)?;
        }
        Ok(())
    }
}

/// One full set of 16 servo states, leg-major.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Step {
    pub servo_states: [ServoState; NUM_SERVOS],
}

impl Step {
    pub fn neutral() -> Self {
        Step { servo_states: [ServoState::Neutral; NUM_SERVOS] }
    }

    pub fn is_neutral(&self) -> bool {
        self.servo_states.iter().all(|s| *s == ServoState::Neutral)
    }

    /// The four states of `leg`.
    pub fn leg(&self, leg: LegId) -> [ServoState; SERVOS_PER_LEG] {
        let start = leg.index() * SERVOS_PER_LEG;
        let mut out = [ServoState::Neutral; SERVOS_PER_LEG];
        out.copy_from_slice(&self.servo_states[start..start + SERVOS_PER_LEG]);
        out
    }

    fn from_primitives(ids: [PrimitiveId; NUM_LEGS]) -> Self {
        let mut servo_states = [ServoState::Neutral; NUM_SERVOS];
        for (leg, id) in ids.iter().enumerate() {
            let start = leg * SERVOS_PER_LEG;
            servo_states[start..start + SERVOS_PER_LEG].copy_from_slice(&Primitive::get(*id).servo_states);
        }
        Step { servo_states }
    }
}

/// Three steps; the last is always all-neutral.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Gait {
    steps: [Step; STEPS_PER_GAIT],
}

impl Gait {
    pub fn steps(&self) -> &[Step; STEPS_PER_GAIT] {
        &self.steps
    }

    /// Recovers the assignment that produced this gait.
    pub fn assignment(&self) -> GaitAssignment {
        let mut pairs = [PrimitivePair::NEUTRAL; NUM_LEGS];
        for leg in LegId::ALL {
            let find = |states: [ServoState; SERVOS_PER_LEG]| {
                PRIMITIVES
                    .iter()
                    .find(|p| p.servo_states == states)
                    .map(|p| p.id)
                    .expect("gait steps are built from table primitives")
            };
            pairs[leg.index()] = PrimitivePair::new(find(self.steps[0].leg(leg)), find(self.steps[1].leg(leg)));
        }
        GaitAssignment { pairs }
    }
}

/// Expands an assignment into its three-step gait.
pub fn make_gait(assignment: &GaitAssignment) -> Gait {
    let firsts = assignment.pairs.map(|p| p.first);
    let seconds = assignment.pairs.map(|p| p.second);
    Gait { steps: [Step::from_primitives(firsts), Step::from_primitives(seconds), Step::neutral()] }
}

/// Commanded servo angles for one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ServoTargets {
    pub angles: [f64; NUM_SERVOS],
}

pub fn servo_targets(step: &Step) -> ServoTargets {
    ServoTargets { angles: step.servo_states.map(ServoState::angle) }
}
