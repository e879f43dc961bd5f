use std::io;

use serde::{Deserialize, Serialize};

use crate::export::{read_rows, write_rows};
use crate::gait::{GaitAssignment, LegId, PrimitiveId, PrimitivePair};
use crate::reward::{BodyDisplacement, RewardCoefficients};
use crate::sim::EvaluationConfig;

/// One candidate evaluated during a per-leg sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogRecord {
    pub eval_index: u64,
    pub leg: LegId,
    pub pair: PrimitivePair,
    pub displacement: BodyDisplacement,
    pub reward: f64,
    pub accepted: bool,
}

/// Fresh measurement of the incumbent that opens a refinement round.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeedRecord {
    pub round: u32,
    pub eval_index: u64,
    pub displacement: BodyDisplacement,
    pub reward: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogMeta {
    pub coefficients: RewardCoefficients,
    pub leg_order: Vec<LegId>,
    pub n_prims: usize,
    pub repeats: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eval: Option<EvaluationConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// Everything a search evaluated, in order.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingLog {
    pub meta: LogMeta,
    pub records: Vec<LogRecord>,
    pub round_seeds: Vec<SeedRecord>,
}

/// CSV row of the refinement seed log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeedRow {
    pub round: u32,
    pub eval_index: u64,
    pub dx_bl: f64,
    pub dy_bl: f64,
    pub dtheta_rad: f64,
    pub reward: f64,
}

/// CSV row of the training log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogRow {
    pub eval_index: u64,
    pub leg: LegId,
    pub pair_first: usize,
    pub pair_second: usize,
    pub dx_bl: f64,
    pub dy_bl: f64,
    pub dtheta_rad: f64,
    pub reward: f64,
    pub accepted: bool,
}

impl From<&LogRecord> for LogRow {
    fn from(r: &LogRecord) -> Self {
        LogRow {
            eval_index: r.eval_index,
            leg: r.leg,
            pair_first: r.pair.first.index(),
            pair_second: r.pair.second.index(),
            dx_bl: r.displacement.dx,
            dy_bl: r.displacement.dy,
            dtheta_rad: r.displacement.dtheta,
            reward: r.reward,
            accepted: r.accepted,
        }
    }
}

impl TryFrom<LogRow> for LogRecord {
    type Error = String;

    fn try_from(row: LogRow) -> Result<Self, Self::Error> {
        let first = PrimitiveId::new(row.pair_first).ok_or_else(|| format!("bad primitive {}", row.pair_first))?;
        let second = PrimitiveId::new(row.pair_second).ok_or_else(|| format!("bad primitive {}", row.pair_second))?;
        Ok(LogRecord {
            eval_index: row.eval_index,
            leg: row.leg,
            pair: PrimitivePair::new(first, second),
            displacement: BodyDisplacement::new(row.dx_bl, row.dy_bl, row.dtheta_rad),
            reward: row.reward,
            accepted: row.accepted,
        })
    }
}

impl TrainingLog {
    pub fn new(meta: LogMeta) -> Self {
        TrainingLog { meta, records: Vec::new(), round_seeds: Vec::new() }
    }

    pub fn write_csv<W: io::Write>(&self, writer: W) -> Result<(), csv::Error> {
        write_rows(writer, self.records.iter().map(LogRow::from))
    }

    /// Incumbent re-measurements that opened each refinement round.
    pub fn write_seeds_csv<W: io::Write>(&self, writer: W) -> Result<(), csv::Error> {
        write_rows(
            writer,
            self.round_seeds.iter().map(|s| SeedRow {
                round: s.round,
                eval_index: s.eval_index,
                dx_bl: s.displacement.dx,
                dy_bl: s.displacement.dy,
                dtheta_rad: s.displacement.dtheta,
                reward: s.reward,
            }),
        )
    }

    /// Parses the records of a training-log CSV.
    pub fn read_records<R: io::Read>(reader: R) -> Result<Vec<LogRecord>, csv::Error> {
        let rows: Vec<LogRow> = read_rows(reader)?;
        rows.into_iter()
            .map(|r| {
                LogRecord::try_from(r).map_err(|e| csv::Error::from(io::Error::new(io::ErrorKind::InvalidData, e)))
            })
            .collect()
    }

    /// Reconstructs every evaluated assignment, seed measurements included,
    /// ordered by evaluation index. `initial` is the assignment the run
    /// started from.
    pub fn candidates(&self, initial: &GaitAssignment) -> Vec<(u64, GaitAssignment)> {
        let block = self.meta.n_prims * self.meta.n_prims;
        let mut out = Vec::with_capacity(self.records.len() + self.round_seeds.len());
        let mut best = *initial;
        let mut current = *initial;
        let mut seeds = self.round_seeds.iter().peekable();
        for (i, rec) in self.records.iter().enumerate() {
            while let Some(seed) = seeds.next_if(|s| s.eval_index < rec.eval_index) {
                out.push((seed.eval_index, best));
            }
            if block > 0 && i % block == 0 {
                current = best;
            }
            current.set(rec.leg, rec.pair);
            if rec.accepted {
                best = current;
            }
            out.push((rec.eval_index, current));
        }
        for seed in seeds {
            out.push((seed.eval_index, best));
        }
        out
    }

    /// Assignment with the highest accepted reward, or `initial` if nothing was accepted.
    pub fn best(&self, initial: &GaitAssignment) -> GaitAssignment {
        let candidates = self.candidates(initial);
        let accepted: std::collections::HashSet<u64> =
            self.records.iter().filter(|r| r.accepted).map(|r| r.eval_index).collect();
        candidates.iter().rev().find(|(i, _)| accepted.contains(i)).map(|(_, g)| *g).unwrap_or(*initial)
    }
}
