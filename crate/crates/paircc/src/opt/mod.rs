//! SSA optimization passes over prime-field programs.
//!
//! Every pass rebuilds the program in order with dense ids. Ops of other
//! types pass through untouched apart from operand renaming, so the passes
//! are also safe on mixed-level programs.

mod passes;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::field::{CurveSpec, Fp};
use crate::ir::{Imm, Op, Opcode, Program, Ty, ValueId};

pub use passes::{const_prop, dce, gvn, strength_reduce};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pass {
    ConstProp,
    StrengthReduce,
    Gvn,
    Dce,
}

impl Pass {
    pub const PIPELINE: [Pass; 4] = [Pass::ConstProp, Pass::StrengthReduce, Pass::Gvn, Pass::Dce];

    pub fn name(self) -> &'static str {
        match self {
            Pass::ConstProp => "const_prop",
            Pass::StrengthReduce => "strength_reduce",
            Pass::Gvn => "gvn",
            Pass::Dce => "dce",
        }
    }

    pub fn run(self, prog: &Program, spec: &CurveSpec) -> Program {
        match self {
            Pass::ConstProp => const_prop(prog, spec),
            Pass::StrengthReduce => strength_reduce(prog, spec),
            Pass::Gvn => gvn(prog),
            Pass::Dce => dce(prog),
        }
    }
}

impl fmt::Display for Pass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Pass {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "const_prop" | "constprop" => Ok(Pass::ConstProp),
            "strength_reduce" | "sr" => Ok(Pass::StrengthReduce),
            "gvn" => Ok(Pass::Gvn),
            "dce" => Ok(Pass::Dce),
            o => Err(format!("unknown pass `{o}` (expected const_prop, strength_reduce, gvn, dce or none)")),
        }
    }
}

/// Parses a comma list of passes; `none` is the empty list and `all` the
/// default pipeline.
pub fn parse_passes(s: &str) -> Result<Vec<Pass>, String> {
    match s.trim() {
        "none" | "" => Ok(Vec::new()),
        "all" | "default" => Ok(Pass::PIPELINE.to_vec()),
        list => list.split(',').map(str::parse).collect(),
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PassReport {
    pub pass: String,
    pub round: usize,
    pub before: usize,
    pub after: usize,
    /// Per-opcode change in op count (after − before), nonzero entries only.
    pub delta: BTreeMap<String, i64>,
    #[serde(with = "micros")]
    pub time: Duration,
}

mod micros {
    use serde::{Deserialize, Deserializer, Serializer};
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(d.as_micros() as u64)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        Ok(Duration::from_micros(u64::deserialize(d)?))
    }
}

fn histogram_delta(a: &Program, b: &Program) -> BTreeMap<String, i64> {
    let (ha, hb) = (a.opcode_histogram(), b.opcode_histogram());
    let mut out = BTreeMap::new();
    for &o in Opcode::ALL {
        let d = *hb.get(&o).unwrap_or(&0) as i64 - *ha.get(&o).unwrap_or(&0) as i64;
        if d != 0 {
            out.insert(o.name().to_string(), d);
        }
    }
    out
}

pub const MAX_ROUNDS: usize = 10;

/// Applies `passes` in order, repeating the sequence until nothing changes
/// when `fixpoint` is set (at most [`MAX_ROUNDS`] rounds).
pub fn run_pipeline(prog: &Program, spec: &CurveSpec, passes: &[Pass], fixpoint: bool) -> (Program, Vec<PassReport>) {
    let mut cur = prog.clone();
    let mut reports = Vec::new();
    let rounds = if fixpoint { MAX_ROUNDS } else { 1 };
    for round in 0..rounds {
        let start = cur.clone();
        for &p in passes {
            let t = Instant::now();
            let next = p.run(&cur, spec);
            reports.push(PassReport {
                pass: p.name().to_string(),
                round,
                before: cur.instr_count(),
                after: next.instr_count(),
                delta: histogram_delta(&cur, &next),
                time: t.elapsed(),
            });
            cur = next;
        }
        if cur == start {
            break;
        }
    }
    (cur, reports)
}

/// Order-preserving program rebuild with operand renaming and constant
/// sharing.
pub(crate) struct Rewriter {
    pub out: Program,
    /// Old id to new id.
    pub map: Vec<ValueId>,
    consts: HashMap<Fp, ValueId>,
}

impl Rewriter {
    pub fn new(prog: &Program) -> Self {
        Rewriter { out: Program::new(&prog.curve), map: Vec::with_capacity(prog.ops.len()), consts: HashMap::new() }
    }

    pub fn args(&self, op: &Op) -> Vec<ValueId> {
        op.args.iter().map(|&a| self.map[a as usize]).collect()
    }

    pub fn emit(&mut self, op: Op) -> ValueId {
        if let Some(c) = op.const_fp() {
            return self.constant(c);
        }
        self.out.push(op)
    }

    pub fn fp(&mut self, opcode: Opcode, args: &[ValueId]) -> ValueId {
        self.emit(Op::new(opcode, Ty::Fp, args, Imm::None))
    }

    pub fn constant(&mut self, c: Fp) -> ValueId {
        if let Some(&id) = self.consts.get(&c) {
            return id;
        }
        let id = self.out.push(Op::new(Opcode::Const, Ty::Fp, &[], Imm::Const(vec![c])));
        self.consts.insert(c, id);
        id
    }

    /// The constant value of a rewritten id, if it is a prime-field constant.
    pub fn const_of(&self, id: ValueId) -> Option<Fp> {
        self.out.op(id).const_fp()
    }

    pub fn finish(mut self, prog: &Program) -> Program {
        self.out.outputs = prog.outputs.iter().map(|&o| self.map[o as usize]).collect();
        self.out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_lists_parse() {
        assert!(parse_passes("none").unwrap().is_empty());
        assert_eq!(parse_passes("gvn,dce").unwrap(), vec![Pass::Gvn, Pass::Dce]);
        assert_eq!(parse_passes("all").unwrap(), Pass::PIPELINE.to_vec());
        assert!(parse_passes("gvn,licm").is_err());
    }
}
