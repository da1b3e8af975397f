use std::fmt::Write;

use serde::Serialize;

use super::{SimError, SimReport};
use crate::hw::{Class, MOp};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StallCause {
    DataDep,
    Mmul,
    ReadPort,
    Writeback,
}

impl StallCause {
    pub fn name(self) -> &'static str {
        match self {
            StallCause::DataDep => "data-dep",
            StallCause::Mmul => "mmul",
            StallCause::ReadPort => "read-port",
            StallCause::Writeback => "writeback",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LaneState {
    Issue,
    Nop,
    Stall,
    Drain,
}

impl LaneState {
    fn name(self) -> &'static str {
        match self {
            LaneState::Issue => "issue",
            LaneState::Nop => "nop",
            LaneState::Stall => "stall",
            LaneState::Drain => "drain",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceRow {
    pub cycle: u64,
    /// Affinity class of the issue slot.
    pub class: Class,
    pub lanes: Vec<(MOp, LaneState)>,
    pub stall: Option<StallCause>,
    /// Results written back this cycle.
    pub retired: u32,
}

fn rows(r: &SimReport, from: u64, to: u64) -> Result<&[TraceRow], SimError> {
    let (lo, hi) = r.window.unwrap_or((0, 0));
    if from >= to || from < lo || to > hi {
        return Err(SimError::Range { from, to, lo, hi });
    }
    let start = r.trace.partition_point(|x| x.cycle < from);
    let end = r.trace.partition_point(|x| x.cycle < to);
    Ok(&r.trace[start..end])
}

/// Column-aligned view of cycles `[from, to)`, one row per cycle.
pub fn waterfall_dump(r: &SimReport, from: u64, to: u64) -> Result<String, SimError> {
    let rows = rows(r, from, to)?;
    let width = rows.iter().map(|x| x.lanes.len()).max().unwrap_or(1);
    let mut s = format!("{:>8}  {:<3}", "cycle", "aff");
    for l in 0..width {
        write!(s, "  {:<10}", format!("lane{l}")).unwrap();
    }
    s.push_str("  wb  stall\n");
    for x in rows {
        let class = match x.class {
            Class::Long => "L",
            Class::Short => "S",
            _ => "-",
        };
        write!(s, "{:>8}  {:<3}", x.cycle, class).unwrap();
        for (op, st) in &x.lanes {
            let cell = match st {
                LaneState::Issue => op.name().to_string(),
                LaneState::Nop => ".".into(),
                LaneState::Stall => format!("({})", op.name()),
                LaneState::Drain => "~".into(),
            };
            write!(s, "  {cell:<10}").unwrap();
        }
        for _ in x.lanes.len()..width {
            write!(s, "  {:<10}", "").unwrap();
        }
        let stall = x.stall.map_or("", StallCause::name);
        writeln!(s, "  {:<2}  {stall}", x.retired).unwrap();
    }
    Ok(s)
}

/// Plot data for cycles `[from, to)`: `cycle,lane,opcode,state` rows.
pub fn waterfall_csv(r: &SimReport, from: u64, to: u64) -> Result<String, SimError> {
    let rows = rows(r, from, to)?;
    let mut s = String::from("cycle,lane,opcode,state\n");
    for x in rows {
        for (lane, (op, st)) in x.lanes.iter().enumerate() {
            let state = match (st, x.stall) {
                (LaneState::Stall, Some(c)) => c.name(),
                _ => st.name(),
            };
            writeln!(s, "{},{lane},{},{state}", x.cycle, op.name()).unwrap();
        }
    }
    Ok(s)
}
