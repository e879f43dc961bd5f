//! Linear-plus-absolute reward on body-frame displacement, with the six
//! axis presets used for training.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Robot body length in meters; translations are reported in body lengths.
pub const BODY_LENGTH_M: f64 = 0.15;

/// Per-gait-cycle motion expressed in the body frame at the start of an
/// evaluation. `dx`/`dy` in body lengths, `dtheta` in radians.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BodyDisplacement {
    pub dx: f64,
    pub dy: f64,
    pub dtheta: f64,
}

impl BodyDisplacement {
    pub const ZERO: BodyDisplacement = BodyDisplacement { dx: 0.0, dy: 0.0, dtheta: 0.0 };

    pub fn new(dx: f64, dy: f64, dtheta: f64) -> Self {
        BodyDisplacement { dx, dy, dtheta }
    }

    pub fn is_finite(&self) -> bool {
        self.dx.is_finite() && self.dy.is_finite() && self.dtheta.is_finite()
    }

    pub fn scale(self, k: f64) -> Self {
        BodyDisplacement::new(self.dx * k, self.dy * k, self.dtheta * k)
    }

    /// Component along `axis`, unsigned by the axis direction.
    pub fn component(&self, axis: GaitAxis) -> f64 {
        match axis.dof() {
            Dof::X => self.dx,
            Dof::Y => self.dy,
            Dof::Theta => self.dtheta,
        }
    }
}

/// Six reward weights: `a, b, c` on the signed components and `d, e, f` on
/// their magnitudes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
}

impl RewardCoefficients {
    pub fn is_finite(&self) -> bool {
        [self.a, self.b, self.c, self.d, self.e, self.f].iter().all(|v| v.is_finite())
    }
}

pub fn reward(v: &BodyDisplacement, k: &RewardCoefficients) -> f64 {
    k.a * v.dx + k.b * v.dy + k.c * v.dtheta + k.d * v.dx.abs() + k.e * v.dy.abs() + k.f * v.dtheta.abs()
}

/// Planar degree of freedom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dof {
    X,
    Y,
    Theta,
}

/// Body-centred gait direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GaitAxis {
    PlusX,
    MinusX,
    PlusY,
    MinusY,
    PlusTheta,
    MinusTheta,
}

impl GaitAxis {
    pub const ALL: [GaitAxis; 6] = [
        GaitAxis::PlusX,
        GaitAxis::MinusX,
        GaitAxis::PlusY,
        GaitAxis::MinusY,
        GaitAxis::PlusTheta,
        GaitAxis::MinusTheta,
    ];

    pub fn dof(self) -> Dof {
        match self {
            GaitAxis::PlusX | GaitAxis::MinusX => Dof::X,
            GaitAxis::PlusY | GaitAxis::MinusY => Dof::Y,
            GaitAxis::PlusTheta | GaitAxis::MinusTheta => Dof::Theta,
        }
    }

    /// +1 for the positive direction, -1 for the negative one.
    pub fn sign(self) -> f64 {
        match self {
            GaitAxis::PlusX | GaitAxis::PlusY | GaitAxis::PlusTheta => 1.0,
            _ => -1.0,
        }
    }

    pub fn opposite(self) -> GaitAxis {
        match self {
            GaitAxis::PlusX => GaitAxis::MinusX,
            GaitAxis::MinusX => GaitAxis::PlusX,
            GaitAxis::PlusY => GaitAxis::MinusY,
            GaitAxis::MinusY => GaitAxis::PlusY,
            GaitAxis::PlusTheta => GaitAxis::MinusTheta,
            GaitAxis::MinusTheta => GaitAxis::PlusTheta,
        }
    }

    pub fn from_dof(dof: Dof, positive: bool) -> GaitAxis {
        match (dof, positive) {
            (Dof::X, true) => GaitAxis::PlusX,
            (Dof::X, false) => GaitAxis::MinusX,
            (Dof::Y, true) => GaitAxis::PlusY,
            (Dof::Y, false) => GaitAxis::MinusY,
            (Dof::Theta, true) => GaitAxis::PlusTheta,
            (Dof::Theta, false) => GaitAxis::MinusTheta,
        }
    }

    pub fn is_rotation(self) -> bool {
        self.dof() == Dof::Theta
    }

    pub fn label(self) -> &'static str {
        match self {
            GaitAxis::PlusX => "+x",
            GaitAxis::MinusX => "-x",
            GaitAxis::PlusY => "+y",
            GaitAxis::MinusY => "-y",
            GaitAxis::PlusTheta => "+theta",
            GaitAxis::MinusTheta => "-theta",
        }
    }

    /// Label usable in file names.
    pub fn slug(self) -> &'static str {
        match self {
            GaitAxis::PlusX => "plus_x",
            GaitAxis::MinusX => "minus_x",
            GaitAxis::PlusY => "plus_y",
            GaitAxis::MinusY => "minus_y",
            GaitAxis::PlusTheta => "plus_theta",
            GaitAxis::MinusTheta => "minus_theta",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GaitAxis::PlusX => "Forward",
            GaitAxis::MinusX => "Backward",
            GaitAxis::PlusY => "Left Shuffle",
            GaitAxis::MinusY => "Right Shuffle",
            GaitAxis::PlusTheta => "Left Turn",
            GaitAxis::MinusTheta => "Right Turn",
        }
    }
}

impl fmt::Display for GaitAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for GaitAxis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.trim() {
            "+x" | "x" | "forward" | "plus_x" => GaitAxis::PlusX,
            "-x" | "backward" | "minus_x" => GaitAxis::MinusX,
            "+y" | "y" | "left" | "plus_y" => GaitAxis::PlusY,
            "-y" | "right" | "minus_y" => GaitAxis::MinusY,
            "+theta" | "+θ" | "theta" | "turn-left" | "plus_theta" => GaitAxis::PlusTheta,
            "-theta" | "-θ" | "turn-right" | "minus_theta" => GaitAxis::MinusTheta,
            other => return Err(format!("unknown gait axis `{other}` (expected +x, -x, +y, -y, +theta, -theta)")),
        })
    }
}

impl Serialize for GaitAxis {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.label())
    }
}

impl<'de> Deserialize<'de> for GaitAxis {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Training coefficients for `axis`: a signed unit weight on the primary
/// component and -0.1 on the magnitudes of the two off-axis components.
pub fn preset(axis: GaitAxis) -> RewardCoefficients {
    let s = axis.sign();
    let off = -0.1;
    match axis.dof() {
        Dof::X => RewardCoefficients { a: s, b: 0.0, c: 0.0, d: 0.0, e: off, f: off },
        Dof::Y => RewardCoefficients { a: 0.0, b: s, c: 0.0, d: off, e: 0.0, f: off },
        Dof::Theta => RewardCoefficients { a: 0.0, b: 0.0, c: s, d: off, e: off, f: 0.0 },
    }
}
