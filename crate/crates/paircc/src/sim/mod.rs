//! Functional and cycle-accurate simulation of machine programs.

mod cycle;
mod trace;

use thiserror::Error;

use crate::backend::{BackendError, MInstr, MachineProgram, Reg};
use crate::field::{Fp, PrimeField};
use crate::hw::MOp;

pub use cycle::{cycle_sim, SimOptions, SimReport, Stalls};
pub use trace::{waterfall_csv, waterfall_dump, LaneState, StallCause, TraceRow};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("program was built for model {found:#018x}, simulating {expected:#018x}")]
    Fingerprint { expected: u64, found: u64 },
    #[error("program is {program} wide, model issues {model}")]
    Width { program: u32, model: u32 },
    #[error("program expects {expected} inputs, got {got}")]
    InputCount { expected: usize, got: usize },
    #[error("slot {slot}: read of uninitialized {reg}")]
    Uninit { slot: usize, reg: Reg },
    #[error("slot {slot} lane {lane}: inversion of zero")]
    DivZero { slot: usize, lane: usize },
    #[error("cycle {cycle}: {msg}")]
    Violation { cycle: u64, msg: String },
    #[error("trace range {from}..{to} is outside the recorded window {lo}..{hi}")]
    Range { from: u64, to: u64, lo: u64, hi: u64 },
    #[error(transparent)]
    Binary(#[from] BackendError),
}

/// Register file with per-bank lazily sized storage.
pub(crate) struct Regs {
    banks: Vec<Vec<Option<Fp>>>,
}

impl Regs {
    pub fn new(p: &MachineProgram, inputs: &[Fp]) -> Result<Self, SimError> {
        if inputs.len() != p.inputs.len() {
            return Err(SimError::InputCount { expected: p.inputs.len(), got: inputs.len() });
        }
        let mut r = Regs { banks: vec![Vec::new(); 16] };
        for (reg, limbs) in &p.consts {
            let mut v = Fp::ZERO;
            v.0[..limbs.len()].copy_from_slice(limbs);
            r.write(*reg, v);
        }
        for (reg, v) in p.inputs.iter().zip(inputs) {
            r.write(*reg, *v);
        }
        Ok(r)
    }

    pub fn write(&mut self, r: Reg, v: Fp) {
        let b = &mut self.banks[r.bank as usize];
        if b.len() <= r.reg as usize {
            b.resize(r.reg as usize + 1, None);
        }
        b[r.reg as usize] = Some(v);
    }

    pub fn read(&self, r: Reg, slot: usize) -> Result<Fp, SimError> {
        self.banks[r.bank as usize].get(r.reg as usize).copied().flatten().ok_or(SimError::Uninit { slot, reg: r })
    }
}

/// Result of one instruction on Montgomery operands.
pub(crate) fn execute(f: &PrimeField, i: &MInstr, a: Fp, b: Fp) -> Option<Fp> {
    Some(match i.op {
        MOp::Nop => return None,
        MOp::Add => f.add(&a, &b),
        MOp::Sub => f.sub(&a, &b),
        MOp::Neg => f.neg(&a),
        MOp::Dbl => f.dbl(&a),
        MOp::Tpl => f.tpl(&a),
        MOp::Mul => f.mul(&a, &b),
        MOp::Sqr => f.sqr(&a),
        MOp::Inv => f.inv(&a).unwrap_or(Fp::ZERO),
        MOp::Cvt => f.to_mont(&a),
        MOp::Icv => f.from_mont(&a),
    })
}

/// Reads the sources of `i`; the second operand of unary ops is zero.
pub(crate) fn operands(regs: &Regs, i: &MInstr, slot: usize) -> Result<(Fp, Fp), SimError> {
    let s = i.sources();
    let a = match s.first() {
        Some(&r) => regs.read(r, slot)?,
        None => Fp::ZERO,
    };
    let b = match s.get(1) {
        Some(&r) => regs.read(r, slot)?,
        None => Fp::ZERO,
    };
    Ok((a, b))
}

/// Executes slots in order, one per step. Within a slot every lane reads its
/// sources before any lane writes. Inputs are standard-form values; outputs
/// are whatever the output registers hold at the end.
pub fn func_sim(p: &MachineProgram, f: &PrimeField, inputs: &[Fp]) -> Result<Vec<Fp>, SimError> {
    let mut regs = Regs::new(p, inputs)?;
    for slot in 0..p.slot_count() {
        let instrs = p.slot(slot)?;
        let mut writes = Vec::with_capacity(instrs.len());
        for (lane, i) in instrs.iter().enumerate() {
            if i.op == MOp::Nop {
                continue;
            }
            let (a, b) = operands(&regs, i, slot)?;
            if i.op == MOp::Inv && a.is_zero() {
                return Err(SimError::DivZero { slot, lane });
            }
            writes.push((i.dst, execute(f, i, a, b).unwrap()));
        }
        for (r, v) in writes {
            regs.write(r, v);
        }
    }
    p.outputs.iter().map(|&r| regs.read(r, p.slot_count())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::encode;

    fn r(reg: u16) -> Reg {
        Reg { bank: 0, reg }
    }

    pub(crate) fn tiny(f: &PrimeField) -> MachineProgram {
        // out = icv(cvt(x) · cvt(x) + 1)
        let one = f.one();
        let words = [
            MInstr { op: MOp::Cvt, dst: r(1), src: [r(0), r(0)] },
            MInstr { op: MOp::Sqr, dst: r(2), src: [r(1), Reg::default()] },
            MInstr { op: MOp::Add, dst: r(3), src: [r(2), r(9)] },
            MInstr { op: MOp::Icv, dst: r(4), src: [r(3), Reg::default()] },
        ];
        let words = words
            .iter()
            .map(|i| MInstr { src: [i.src[0], if i.op.arity() == 2 { i.src[1] } else { Reg::default() }], ..*i })
            .map(|i| encode(&i).unwrap())
            .collect();
        MachineProgram {
            fingerprint: 0,
            width: 1,
            limbs: f.limbs() as u32,
            beta: 0.0,
            entries: vec![0],
            consts: vec![(r(9), one.0[..f.limbs()].to_vec())],
            inputs: vec![r(0)],
            outputs: vec![r(4)],
            words,
        }
    }

    #[test]
    fn straight_line_program() {
        let s = crate::field::CurveSpec::shipped("bn254").unwrap();
        let f = s.fp();
        let out = func_sim(&tiny(f), f, &[Fp::from_u64(7)]).unwrap();
        assert_eq!(out, vec![Fp::from_u64(50)]);
        assert!(matches!(func_sim(&tiny(f), f, &[]), Err(SimError::InputCount { .. })));
    }

    #[test]
    fn const_only_program_returns_constants() {
        let s = crate::field::CurveSpec::shipped("bn254").unwrap();
        let f = s.fp();
        let mut p = tiny(f);
        p.words.clear();
        p.outputs = vec![r(9)];
        assert_eq!(func_sim(&p, f, &[Fp::ZERO]).unwrap(), vec![f.one()]);
    }
}
