//! Versioned TOML gait documents.
//!
//! ```toml
//! version = 1
//! primitive_table_sha256 = "…"
//! primitive_table = [[0.5, 0.5, 0.5, 0.5], …]   # 7 rows × 4 servo encodings
//! assignment = [[0, 0], [3, 5], [0, 0], [0, 0]]  # (first, second) for legs A-D
//!
//! [provenance]                                  # optional
//! log_id = "train_+x"
//! axis = "+x"
//! reward = 0.47
//! ```

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::control::{AxisGait, GaitSet};

use crate::gait::{
    hash_primitive_table, primitive_table_hash, Gait, GaitAssignment, ServoState, NUM_LEGS, NUM_PRIMITIVES, PRIMITIVES,
    SERVOS_PER_LEG,
};
use crate::reward::{BodyDisplacement, GaitAxis};

pub const GAIT_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum GaitFileError {
    #[error("malformed gait document: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("unsupported gait document version {found} (expected {GAIT_FORMAT_VERSION})")]
    Version { found: u32 },
    #[error("primitive table entry {value} is not a servo encoding (0, 0.5 or 1)")]
    BadEncoding { value: f64 },
    #[error("primitive table hash mismatch: document says {recorded}, table hashes to {computed}")]
    HashMismatch { recorded: String, computed: String },
    #[error("gait was recorded against a different primitive table")]
    ForeignTable,
    #[error("primitive id {0} out of range")]
    BadPrimitive(usize),
    #[error("serialization failed: {0}")]
    Serialize(#[from] toml::ser::Error),
    #[error("invalid gait set: {0}")]
    GaitSet(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Where a gait came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Provenance {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub log_id: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub axis: Option<GaitAxis>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reward: Option<f64>,
}

/// A gait assignment with its optional provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct GaitDocument {
    pub assignment: GaitAssignment,
    pub provenance: Option<Provenance>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    version: u32,
    primitive_table_sha256: String,
    primitive_table: Vec<[f64; SERVOS_PER_LEG]>,
    assignment: [[usize; 2]; NUM_LEGS],
    #[serde(skip_serializing_if = "Option::is_none", default)]
    provenance: Option<Provenance>,
}

#[derive(Deserialize)]
struct VersionProbe {
    version: Option<u32>,
}

pub(crate) fn check_version(text: &str) -> Result<(), GaitFileError> {
    let probe: VersionProbe = toml::from_str(text)?;
    match probe.version {
        Some(GAIT_FORMAT_VERSION) => Ok(()),
        Some(found) => Err(GaitFileError::Version { found }),
        None => Err(GaitFileError::Version { found: 0 }),
    }
}

pub(crate) fn check_table(recorded_hash: &str, table: &[[f64; SERVOS_PER_LEG]]) -> Result<(), GaitFileError> {
    if table.len() != NUM_PRIMITIVES {
        return Err(GaitFileError::ForeignTable);
    }
    let mut states = [[ServoState::Neutral; SERVOS_PER_LEG]; NUM_PRIMITIVES];
    for (row, raw) in states.iter_mut().zip(table) {
        for (s, v) in row.iter_mut().zip(raw) {
            *s = ServoState::from_encoding(*v).ok_or(GaitFileError::BadEncoding { value: *v })?;
        }
    }
    let computed = hash_primitive_table(&states);
    if computed != recorded_hash {
        return Err(GaitFileError::HashMismatch { recorded: recorded_hash.to_string(), computed });
    }
    if computed != primitive_table_hash() {
        return Err(GaitFileError::ForeignTable);
    }
    Ok(())
}

pub(crate) fn table_rows() -> Vec<[f64; SERVOS_PER_LEG]> {
    PRIMITIVES.iter().map(|p| p.servo_states.map(ServoState::encoding)).collect()
}

pub(crate) fn assignment_from_ids(ids: [[usize; 2]; NUM_LEGS]) -> Result<GaitAssignment, GaitFileError> {
    let mut raw = [(0, 0); NUM_LEGS];
    for (slot, [a, b]) in raw.iter_mut().zip(ids) {
        for id in [a, b] {
            if id >= NUM_PRIMITIVES {
                return Err(GaitFileError::BadPrimitive(id));
            }
        }
        *slot = (a, b);
    }
    Ok(GaitAssignment::from_ids(raw).expect("ids validated"))
}

pub(crate) fn ids_of(assignment: &GaitAssignment) -> [[usize; 2]; NUM_LEGS] {
    assignment.ids().map(|(a, b)| [a, b])
}

/// Renders an assignment (and optional provenance) as a gait document.
pub fn serialize_assignment(
    assignment: &GaitAssignment,
    provenance: Option<&Provenance>,
) -> Result<String, GaitFileError> {
    let raw = RawDocument {
        version: GAIT_FORMAT_VERSION,
        primitive_table_sha256: primitive_table_hash(),
        primitive_table: table_rows(),
        assignment: ids_of(assignment),
        provenance: provenance.cloned(),
    };
    Ok(toml::to_string(&raw)?)
}

pub fn serialize_gait(gait: &Gait, provenance: Option<&Provenance>) -> Result<String, GaitFileError> {
    serialize_assignment(&gait.assignment(), provenance)
}

/// Parses a gait document, checking version and primitive table.
pub fn deserialize(text: &str) -> Result<GaitDocument, GaitFileError> {
    check_version(text)?;
    let raw: RawDocument = toml::from_str(text)?;
    check_table(&raw.primitive_table_sha256, &raw.primitive_table)?;
    Ok(GaitDocument { assignment: assignment_from_ids(raw.assignment)?, provenance: raw.provenance })
}

pub fn read_gait_file(path: &std::path::Path) -> Result<GaitDocument, GaitFileError> {
    deserialize(&std::fs::read_to_string(path)?)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAxisGait {
    assignment: [[usize; 2]; NUM_LEGS],
    /// dx (BL/cycle), dy (BL/cycle), dtheta (rad/cycle)
    mean: [f64; 3],
    stddev: [f64; 3],
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGaitSet {
    version: u32,
    primitive_table_sha256: String,
    primitive_table: Vec<[f64; SERVOS_PER_LEG]>,
    axes: BTreeMap<GaitAxis, RawAxisGait>,
}

fn triple(d: &BodyDisplacement) -> [f64; 3] {
    [d.dx, d.dy, d.dtheta]
}

/// Renders the six axis gaits with their measured velocities.
///
/// ```toml
/// version = 1
/// primitive_table_sha256 = "…"
/// primitive_table = [...]
///
/// [axes."+x"]
/// assignment = [[3, 5], [0, 0], [1, 2], [0, 0]]
/// mean = [0.021, -0.001, 0.004]
/// stddev = [0.002, 0.001, 0.003]
/// ```
pub fn serialize_gait_set(set: &GaitSet) -> Result<String, GaitFileError> {
    let axes = set
        .iter()
        .map(|(axis, g)| {
            (axis, RawAxisGait { assignment: ids_of(&g.gait), mean: triple(&g.mean), stddev: triple(&g.stddev) })
        })
        .collect();
    let raw = RawGaitSet {
        version: GAIT_FORMAT_VERSION,
        primitive_table_sha256: primitive_table_hash(),
        primitive_table: table_rows(),
        axes,
    };
    Ok(toml::to_string(&raw)?)
}

pub fn deserialize_gait_set(text: &str) -> Result<GaitSet, GaitFileError> {
    check_version(text)?;
    let raw: RawGaitSet = toml::from_str(text)?;
    check_table(&raw.primitive_table_sha256, &raw.primitive_table)?;
    let mut gaits = BTreeMap::new();
    for (axis, g) in raw.axes {
        let [mx, my, mt] = g.mean;
        let [sx, sy, st] = g.stddev;
        gaits.insert(
            axis,
            AxisGait {
                gait: assignment_from_ids(g.assignment)?,
                mean: BodyDisplacement::new(mx, my, mt),
                stddev: BodyDisplacement::new(sx, sy, st),
            },
        );
    }
    GaitSet::new(gaits).map_err(|e| GaitFileError::GaitSet(e.to_string()))
}

pub fn read_gait_set_file(path: &std::path::Path) -> Result<GaitSet, GaitFileError> {
    deserialize_gait_set(&std::fs::read_to_string(path)?)
}
