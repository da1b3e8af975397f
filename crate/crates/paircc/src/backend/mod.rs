//! Bank allocation, packing scheduler, register allocation and assembly.
//!
//! Timing model shared with the simulator: an op issued at cycle `t` reads its
//! sources at `t` and delivers its result to the writeback stage of its
//! destination bank at `t + latency`. Each bank retires at most
//! `write_ports` results per cycle, oldest first; results that cannot retire
//! wait in the bank's FIFO (capacity 0 without one). A value is readable
//! from the cycle it retires.

pub mod asm;
pub mod check;
pub mod regalloc;
pub mod sched;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hw::{Class, HardwareModel, HwError, MOp};
use crate::ir::{Program, ValueId};

pub use asm::{assemble, decode, encode, link, MInstr, MachineProgram, Reg};
pub use check::{check_schedule, ScheduleViolation};
pub use regalloc::{peak_registers, reg_alloc};
pub use sched::{inorder_schedule, pack_schedule, Policy};

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("program is not prime-field legal: op %{0} ({1})")]
    NotLegal(ValueId, String),
    #[error("op %{0} cannot issue on this model: {1}")]
    Unschedulable(ValueId, String),
    #[error("bank {bank} needs {peak} registers, model has {available}")]
    RegisterOverflow { bank: u32, peak: u32, available: u32 },
    #[error("encoding: {0}")]
    Encoding(String),
    #[error("binary: {0}")]
    Decode(String),
    #[error(transparent)]
    Hw(#[from] HwError),
}

/// Residue bank assignment: value `v` lives in bank `v mod banks`.
pub fn bank_alloc(prog: &Program, m: &HardwareModel) -> Vec<u32> {
    (0..prog.ops.len() as u32).map(|v| v % m.banks).collect()
}

/// Slot class from the periodic partition of issue cycles:
/// Long iff `(t mod (m−n)) / (m−n) ≤ #Long/#Instr + β`.
pub fn affinity(t: u64, m: &HardwareModel, long_ratio: f64, beta: f64) -> Class {
    let period = (m.latency.long - m.latency.short) as u64;
    let phase = (t % period) as f64 / period as f64;
    if phase <= long_ratio + beta {
        Class::Long
    } else {
        Class::Short
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slot {
    pub cycle: u64,
    /// Program op ids in lane order.
    pub ops: Vec<ValueId>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SchedStats {
    pub instrs: usize,
    pub long: usize,
    pub short: usize,
    pub inv: usize,
    /// Cycle after the last retirement.
    pub cycles: u64,
    pub beta: f64,
}

impl SchedStats {
    pub fn ipc(&self) -> f64 {
        self.instrs as f64 / self.cycles.max(1) as f64
    }

    pub fn long_ratio(&self) -> f64 {
        self.long as f64 / self.instrs.max(1) as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub slots: Vec<Slot>,
    pub bank: Vec<u32>,
    /// Issue cycle per value; `None` for preloaded data.
    pub issue: Vec<Option<u64>>,
    /// Retirement cycle per value (0 for preloaded data).
    pub ready: Vec<u64>,
    /// Register per value once allocated.
    pub reg: Option<Vec<u32>>,
    pub stats: SchedStats,
    pub fingerprint: u64,
}

/// Machine opcode of every op, or an error naming the first op without one.
pub(crate) fn machine_ops(prog: &Program) -> Result<Vec<Option<MOp>>, BackendError> {
    prog.ops
        .iter()
        .enumerate()
        .map(|(i, o)| {
            if o.opcode.is_data() {
                if o.ty != crate::ir::Ty::Fp {
                    return Err(BackendError::NotLegal(i as ValueId, format!("{} data", o.ty)));
                }
                return Ok(None);
            }
            if o.ty != crate::ir::Ty::Fp {
                return Err(BackendError::NotLegal(i as ValueId, format!("{} {}", o.ty, o.opcode)));
            }
            MOp::try_from(o.opcode).map(Some).map_err(|e| BackendError::NotLegal(i as ValueId, e.to_string()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affinity_formula() {
        let m = HardwareModel::default();
        assert_eq!(affinity(0, &m, 0.4, 0.0), Class::Long);
        assert_eq!(affinity(15, &m, 0.4, 0.0), Class::Short);
        assert_eq!(affinity(30, &m, 0.4, 0.0), Class::Long);
        for t in 0..60 {
            assert_eq!(affinity(t, &m, 0.4, 1.0), Class::Long);
            assert_eq!(affinity(t, &m, 0.4, -1.0), Class::Short);
        }
    }

    #[test]
    fn residue_banks() {
        let mut p = Program::new("x");
        for i in 0..8 {
            p.push(crate::ir::Op::new(crate::ir::Opcode::Input, crate::ir::Ty::Fp, &[], crate::ir::Imm::Int(i)));
        }
        let m = HardwareModel { banks: 4, ..Default::default() };
        assert_eq!(bank_alloc(&p, &m), vec![0, 1, 2, 3, 0, 1, 2, 3]);
        assert!(bank_alloc(&p, &HardwareModel::default()).iter().all(|&b| b == 0));
    }
}
