//! Linear-scan register assignment over scheduled live intervals.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};

use super::{BackendError, Schedule};
use crate::hw::HardwareModel;
use crate::ir::Program;

/// Live interval of a value: `[start, end]` in issue cycles. Preloaded data
/// starts at −1; outputs live to the end of the program.
pub fn intervals(prog: &Program, s: &Schedule) -> Vec<(i64, i64)> {
    let n = prog.ops.len();
    let mut end = vec![i64::MIN; n];
    for (i, op) in prog.ops.iter().enumerate() {
        if let Some(t) = s.issue[i] {
            for &a in &op.args {
                end[a as usize] = end[a as usize].max(t as i64);
            }
        }
    }
    for &o in &prog.outputs {
        end[o as usize] = i64::MAX;
    }
    (0..n)
        .map(|i| match s.issue[i] {
            Some(t) => (t as i64, end[i].max(s.ready[i] as i64)),
            None => (-1, end[i].max(0)),
        })
        .collect()
}

/// Assigns registers per bank, lowest free first. A register is reused by a
/// value issued no earlier than the end of the previous occupant; sources
/// are read before any write in the same cycle.
pub fn reg_alloc(prog: &Program, s: &mut Schedule, m: &HardwareModel) -> Result<Vec<u32>, BackendError> {
    let iv = intervals(prog, s);
    let mut reg = vec![0u32; iv.len()];
    for bank in 0..m.banks {
        let mut vals: Vec<usize> = (0..iv.len()).filter(|&v| s.bank[v] == bank).collect();
        vals.sort_by_key(|&v| (iv[v].0, v));
        let mut active: BinaryHeap<Reverse<(i64, u32)>> = BinaryHeap::new();
        let mut free: BTreeSet<u32> = BTreeSet::new();
        let mut peak = 0u32;
        for v in vals {
            let (start, end) = iv[v];
            while let Some(&Reverse((e, r))) = active.peek() {
                if e > start {
                    break;
                }
                active.pop();
                free.insert(r);
            }
            let r = free.pop_first().unwrap_or_else(|| {
                peak += 1;
                peak - 1
            });
            reg[v] = r;
            active.push(Reverse((end, r)));
        }
        if peak > m.regs_per_bank {
            return Err(BackendError::RegisterOverflow { bank, peak, available: m.regs_per_bank });
        }
    }
    s.reg = Some(reg.clone());
    Ok(reg)
}

/// Highest number of registers any bank needs for this schedule.
pub fn peak_registers(prog: &Program, s: &Schedule) -> u32 {
    let iv = intervals(prog, s);
    let banks = s.bank.iter().copied().max().map_or(0, |b| b + 1);
    (0..banks)
        .map(|b| {
            let mut ev: Vec<(i64, i32)> = Vec::new();
            for (v, &(st, en)) in iv.iter().enumerate() {
                if s.bank[v] == b {
                    ev.push((st, 1));
                    ev.push((en, -1));
                }
            }
            // a release at t happens before an acquire at t
            ev.sort();
            let (mut cur, mut best) = (0i32, 0i32);
            for (_, d) in ev {
                cur += d;
                best = best.max(cur);
            }
            best as u32
        })
        .max()
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::pack_schedule;
    use crate::ir::{Imm, Op, Opcode, Ty};

    #[test]
    fn chain_reuses_registers() {
        let mut p = Program::new("t");
        let mut x = p.push(Op::new(Opcode::Input, Ty::Fp, &[], Imm::Int(0)));
        for _ in 0..20 {
            x = p.push(Op::new(Opcode::Dbl, Ty::Fp, &[x], Imm::None));
        }
        p.outputs = vec![x];
        let m = HardwareModel::default().resolved(254);
        let mut s = pack_schedule(&p, &m, 0.0).unwrap();
        let r = reg_alloc(&p, &mut s, &m).unwrap();
        assert!(r.iter().all(|&r| r == 0));
        assert_eq!(peak_registers(&p, &s), 1);
    }

    #[test]
    fn overflow_is_reported() {
        let mut p = Program::new("t");
        let a = p.push(Op::new(Opcode::Input, Ty::Fp, &[], Imm::Int(0)));
        for _ in 0..8 {
            let v = p.push(Op::new(Opcode::Dbl, Ty::Fp, &[a], Imm::None));
            p.outputs.push(v);
        }
        let m = HardwareModel { regs_per_bank: 4, ..Default::default() }.resolved(254);
        let mut s = pack_schedule(&p, &m, 0.0).unwrap();
        assert!(matches!(reg_alloc(&p, &mut s, &m), Err(BackendError::RegisterOverflow { peak: 8, .. })));
    }
}
