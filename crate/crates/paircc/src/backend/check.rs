//! Independent schedule validation.
//!
//! Recomputes retirement times by replaying the writeback queues from the
//! slot list alone, then checks coverage, resources, operand readiness and
//! register lifetimes against the model.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use serde::Serialize;

use super::{machine_ops, Schedule};
use crate::hw::{HardwareModel, MOp, Unit};
use crate::ir::{Program, ValueId};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ScheduleViolation {
    pub kind: &'static str,
    pub cycle: Option<u64>,
    pub op: Option<ValueId>,
    pub msg: String,
}

impl fmt::Display for ScheduleViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind)?;
        if let Some(c) = self.cycle {
            write!(f, " @{c}")?;
        }
        if let Some(o) = self.op {
            write!(f, " %{o}")?;
        }
        write!(f, ": {}", self.msg)
    }
}

/// Retirement cycle of every issued op, with queue overflows as
/// `(cycle, bank)` pairs.
pub fn replay_writeback(prog: &Program, s: &Schedule, m: &HardwareModel) -> (Vec<Option<u64>>, Vec<(u64, u32)>) {
    let mut arrivals: BTreeMap<u64, Vec<ValueId>> = BTreeMap::new();
    for slot in &s.slots {
        for &v in &slot.ops {
            if let Some(op) = prog.ops.get(v as usize).and_then(|o| MOp::try_from(o.opcode).ok()) {
                let lat = m.itinerary(op).latency as u64;
                arrivals.entry(slot.cycle + lat).or_default().push(v);
            }
        }
    }
    let mut retire = vec![None; prog.ops.len()];
    let mut overflow = Vec::new();
    let mut queues: Vec<VecDeque<ValueId>> = vec![VecDeque::new(); m.banks as usize];
    let Some(&first) = arrivals.keys().next() else {
        return (retire, overflow);
    };
    let mut t = first;
    loop {
        if let Some(vs) = arrivals.remove(&t) {
            for v in vs {
                queues[s.bank[v as usize] as usize].push_back(v);
            }
        }
        for (b, q) in queues.iter_mut().enumerate() {
            for _ in 0..m.write_ports.min(q.len() as u32) {
                retire[q.pop_front().unwrap() as usize] = Some(t);
            }
            if q.len() as u32 > m.fifo_depth() {
                overflow.push((t, b as u32));
            }
        }
        if arrivals.is_empty() && queues.iter().all(VecDeque::is_empty) {
            break;
        }
        t += 1;
    }
    (retire, overflow)
}

/// All violations of `s` against `m`; an empty list means the schedule is
/// valid.
pub fn check_schedule(prog: &Program, s: &Schedule, m: &HardwareModel) -> Vec<ScheduleViolation> {
    let mut out = Vec::new();
    let mut push = |kind: &'static str, cycle: Option<u64>, op: Option<ValueId>, msg: String| {
        out.push(ScheduleViolation { kind, cycle, op, msg });
    };
    let mops = match machine_ops(prog) {
        Ok(m) => m,
        Err(e) => {
            push("legality", None, None, e.to_string());
            return out;
        }
    };
    if s.bank.len() != prog.ops.len() || s.bank.iter().any(|&b| b >= m.banks) {
        push("bank", None, None, "bank map does not cover the program or exceeds the bank count".into());
        return out;
    }

    let mut issued: Vec<Option<u64>> = vec![None; prog.ops.len()];
    let mut prev: Option<u64> = None;
    let mut busy: HashMap<Unit, u64> = HashMap::new();
    for slot in &s.slots {
        let t = slot.cycle;
        if prev.is_some_and(|p| p >= t) {
            push("order", Some(t), None, "slot cycles must increase".into());
        }
        prev = Some(t);
        if slot.ops.len() as u32 > m.width {
            push("width", Some(t), None, format!("{} ops in a {}-wide slot", slot.ops.len(), m.width));
        }
        let mut per_unit: HashMap<Unit, u32> = HashMap::new();
        let mut reads = vec![0u32; m.banks as usize];
        for &v in &slot.ops {
            let Some(op) = mops.get(v as usize).copied().flatten() else {
                push("coverage", Some(t), Some(v), "not a machine op".into());
                continue;
            };
            if issued[v as usize].replace(t).is_some() {
                push("coverage", Some(t), Some(v), "issued twice".into());
            }
            let it = m.itinerary(op);
            *per_unit.entry(it.unit).or_default() += 1;
            if busy.get(&it.unit).is_some_and(|&b| b > t) {
                push("occupancy", Some(t), Some(v), format!("{:?} unit still busy", it.unit));
            }
            if it.occupancy > 1 {
                busy.insert(it.unit, t + it.occupancy as u64);
            }
            for &a in &prog.ops[v as usize].args {
                reads[s.bank[a as usize] as usize] += 1;
            }
        }
        for (u, n) in per_unit {
            if n > m.units(u) {
                push("units", Some(t), None, format!("{n} ops on {} {:?} units", m.units(u), u));
            }
        }
        for (b, &r) in reads.iter().enumerate() {
            if r > m.read_ports {
                push("read-ports", Some(t), None, format!("{r} reads from bank {b} with {} ports", m.read_ports));
            }
        }
    }
    for (i, o) in mops.iter().enumerate() {
        if o.is_some() && issued[i].is_none() {
            push("coverage", None, Some(i as ValueId), "never issued".into());
        }
    }

    let (retire, overflow) = replay_writeback(prog, s, m);
    for (t, b) in overflow {
        push("fifo", Some(t), None, format!("writeback queue of bank {b} exceeds depth {}", m.fifo_depth()));
    }
    for (i, op) in prog.ops.iter().enumerate() {
        let Some(t) = issued[i] else { continue };
        for &a in &op.args {
            if mops[a as usize].is_none() {
                continue;
            }
            match retire[a as usize] {
                Some(r) if r <= t => {}
                r => push("data-dep", Some(t), Some(i as ValueId), format!("operand %{a} retires at {r:?}")),
            }
        }
    }

    if let Some(reg) = &s.reg {
        check_registers(prog, s, m, reg, &issued, &retire, &mut out);
    }
    out
}

fn check_registers(
    prog: &Program,
    s: &Schedule,
    m: &HardwareModel,
    reg: &[u32],
    issued: &[Option<u64>],
    retire: &[Option<u64>],
    out: &mut Vec<ScheduleViolation>,
) {
    let n = prog.ops.len();
    // a register is written at retirement and must hold its value until the
    // last read
    let mut last_read = vec![None::<u64>; n];
    for (i, op) in prog.ops.iter().enumerate() {
        if let Some(t) = issued[i] {
            for &a in &op.args {
                let e = &mut last_read[a as usize];
                *e = Some(e.map_or(t, |x| x.max(t)));
            }
        }
    }
    let mut is_out = vec![false; n];
    for &o in &prog.outputs {
        is_out[o as usize] = true;
    }
    let mut by_reg: HashMap<(u32, u32), Vec<(i64, i64, usize)>> = HashMap::new();
    for v in 0..n {
        if reg[v] >= m.regs_per_bank {
            out.push(ScheduleViolation { kind: "register", cycle: None, op: Some(v as ValueId), msg: format!("r{} out of range", reg[v]) });
        }
        let write = match issued[v] {
            Some(_) => retire[v].map_or(i64::MAX, |r| r as i64),
            None => -1,
        };
        let end = if is_out[v] { i64::MAX } else { last_read[v].map_or(write, |r| r as i64).max(write) };
        by_reg.entry((s.bank[v], reg[v])).or_default().push((write, end, v));
    }
    for ((b, r), mut lives) in by_reg {
        lives.sort();
        for w in lives.windows(2) {
            let (a, c) = (w[0], w[1]);
            // the next write must land after the last read of the previous value
            if c.0 <= a.1 && !(a.0 == -1 && a.1 == -1) {
                out.push(ScheduleViolation {
                    kind: "register",
                    cycle: Some(c.0.max(0) as u64),
                    op: Some(c.2 as ValueId),
                    msg: format!("b{b}:r{r} overwrites %{} while live", a.2),
                });
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::{inorder_schedule, pack_schedule, reg_alloc, Slot};
    use crate::ir::{Imm, Op, Opcode, Ty};

    fn prog() -> Program {
        let mut p = Program::new("t");
        let a = p.push(Op::new(Opcode::Input, Ty::Fp, &[], Imm::Int(0)));
        let b = p.push(Op::new(Opcode::Input, Ty::Fp, &[], Imm::Int(1)));
        let m = p.push(Op::new(Opcode::Mul, Ty::Fp, &[a, b], Imm::None));
        let s = p.push(Op::new(Opcode::Add, Ty::Fp, &[a, b], Imm::None));
        let t = p.push(Op::new(Opcode::Sub, Ty::Fp, &[m, s], Imm::None));
        p.outputs = vec![t];
        p
    }

    #[test]
    fn valid_schedules_pass() {
        let p = prog();
        for m in [HardwareModel::default(), HardwareModel::with_fifo()] {
            let m = m.resolved(254);
            for mut s in [pack_schedule(&p, &m, 0.0).unwrap(), inorder_schedule(&p, &m).unwrap()] {
                reg_alloc(&p, &mut s, &m).unwrap();
                assert_eq!(check_schedule(&p, &s, &m), vec![]);
            }
        }
    }

    #[test]
    fn early_consumer_is_flagged() {
        let p = prog();
        let m = HardwareModel::default().resolved(254);
        let mut s = pack_schedule(&p, &m, 0.0).unwrap();
        let last = s.slots.pop().unwrap();
        s.slots.push(Slot { cycle: 2, ops: last.ops });
        let v = check_schedule(&p, &s, &m);
        assert!(v.iter().any(|v| v.kind == "data-dep"));
    }

    #[test]
    fn colliding_writebacks_without_fifo_are_flagged() {
        let p = prog();
        let m = HardwareModel::default().resolved(254);
        // MUL at 0 and ADD at 30 both reach writeback at 38
        let s = Schedule {
            slots: vec![Slot { cycle: 0, ops: vec![2] }, Slot { cycle: 30, ops: vec![3] }, Slot { cycle: 40, ops: vec![4] }],
            ..pack_schedule(&p, &m, 0.0).unwrap()
        };
        let v = check_schedule(&p, &s, &m);
        assert!(v.iter().any(|v| v.kind == "fifo"), "{v:?}");
    }
}
