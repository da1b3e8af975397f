//! Instruction encoding and the machine program container.
//!
//! Word layout (bit ranges inclusive):
//!
//! | field     | bits    |
//! |-----------|---------|
//! | opcode    | 63..58  |
//! | dst bank  | 57..54  |
//! | dst reg   | 53..42  |
//! | src1 bank | 41..38  |
//! | src1 reg  | 37..26  |
//! | src2 bank | 25..22  |
//! | src2 reg  | 21..10  |
//! | reserved  | 9..0    |
//!
//! Fields an opcode does not use are zero; the all-zero word is `NOP`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{machine_ops, BackendError, Schedule};
use crate::hw::{HardwareModel, MOp};
use crate::ir::{Imm, Opcode, Program};

pub const MAGIC: &[u8; 8] = b"PAIRMC01";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Reg {
    pub bank: u16,
    pub reg: u16,
}

impl fmt::Display for Reg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "b{}:r{}", self.bank, self.reg)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MInstr {
    pub op: MOp,
    pub dst: Reg,
    pub src: [Reg; 2],
}

impl MInstr {
    pub const NOP: MInstr = MInstr { op: MOp::Nop, dst: Reg { bank: 0, reg: 0 }, src: [Reg { bank: 0, reg: 0 }; 2] };

    pub fn sources(&self) -> &[Reg] {
        &self.src[..self.op.arity()]
    }
}

impl fmt::Display for MInstr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.op.arity() {
            _ if self.op == MOp::Nop => write!(f, "NOP"),
            1 => write!(f, "{} {}, {}", self.op, self.dst, self.src[0]),
            _ => write!(f, "{} {}, {}, {}", self.op, self.dst, self.src[0], self.src[1]),
        }
    }
}

fn field(w: u64, lo: u32, bits: u32) -> u64 {
    (w >> lo) & ((1 << bits) - 1)
}

pub fn encode(i: &MInstr) -> Result<u64, BackendError> {
    let mut w = (i.op as u64) << 58;
    if i.op == MOp::Nop {
        return Ok(w);
    }
    let mut put = |r: Reg, bank_lo: u32, reg_lo: u32| -> Result<(), BackendError> {
        if r.bank >= 16 || r.reg >= 4096 {
            return Err(BackendError::Encoding(format!("{r} does not fit the instruction fields")));
        }
        w |= (r.bank as u64) << bank_lo | (r.reg as u64) << reg_lo;
        Ok(())
    };
    put(i.dst, 54, 42)?;
    put(i.src[0], 38, 26)?;
    if i.op.arity() == 2 {
        put(i.src[1], 22, 10)?;
    }
    Ok(w)
}

pub fn decode(w: u64) -> Result<MInstr, BackendError> {
    let code = field(w, 58, 6) as u8;
    let op = MOp::from_code(code).ok_or_else(|| BackendError::Decode(format!("unknown opcode {code} in {w:#018x}")))?;
    let reg = |bank_lo: u32, reg_lo: u32| Reg { bank: field(w, bank_lo, 4) as u16, reg: field(w, reg_lo, 12) as u16 };
    let i = MInstr { op, dst: reg(54, 42), src: [reg(38, 26), reg(22, 10)] };
    let canonical = MInstr {
        dst: if op == MOp::Nop { Reg::default() } else { i.dst },
        src: [if op.arity() >= 1 { i.src[0] } else { Reg::default() }, if op.arity() == 2 { i.src[1] } else { Reg::default() }],
        ..i
    };
    if canonical != i || field(w, 0, 10) != 0 {
        return Err(BackendError::Decode(format!("unused fields set in {w:#018x}")));
    }
    Ok(i)
}

/// Encoded program plus everything needed to load and run it.
#[derive(Clone, Debug, PartialEq)]
pub struct MachineProgram {
    /// Fingerprint of the hardware model the program was scheduled for.
    pub fingerprint: u64,
    pub width: u32,
    /// 64-bit limbs per field element.
    pub limbs: u32,
    pub beta: f64,
    /// First slot of each linked block.
    pub entries: Vec<u32>,
    /// Preloaded constants as raw Montgomery limbs.
    pub consts: Vec<(Reg, Vec<u64>)>,
    pub inputs: Vec<Reg>,
    pub outputs: Vec<Reg>,
    /// `slot_count × width` instruction words.
    pub words: Vec<u64>,
}

impl MachineProgram {
    pub fn slot_count(&self) -> usize {
        self.words.len() / self.width.max(1) as usize
    }

    pub fn slot(&self, i: usize) -> Result<Vec<MInstr>, BackendError> {
        let w = self.width as usize;
        self.words[i * w..(i + 1) * w].iter().map(|&x| decode(x)).collect()
    }

    pub fn instructions(&self) -> Result<Vec<Vec<MInstr>>, BackendError> {
        (0..self.slot_count()).map(|i| self.slot(i)).collect()
    }

    /// Non-NOP instructions per class: (total, long).
    pub fn counts(&self) -> Result<(usize, usize), BackendError> {
        let mut n = (0, 0);
        for &w in &self.words {
            let i = decode(w)?;
            if i.op != MOp::Nop {
                n.0 += 1;
                n.1 += (i.op.class() == crate::hw::Class::Long) as usize;
            }
        }
        Ok(n)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut b = Vec::with_capacity(64 + self.words.len() * 8);
        b.extend_from_slice(MAGIC);
        b.extend_from_slice(&self.fingerprint.to_le_bytes());
        b.extend_from_slice(&self.width.to_le_bytes());
        b.extend_from_slice(&self.limbs.to_le_bytes());
        b.extend_from_slice(&self.beta.to_le_bytes());
        b.extend_from_slice(&(self.entries.len() as u32).to_le_bytes());
        for e in &self.entries {
            b.extend_from_slice(&e.to_le_bytes());
        }
        for n in [self.consts.len(), self.inputs.len(), self.outputs.len(), self.slot_count()] {
            b.extend_from_slice(&(n as u32).to_le_bytes());
        }
        let reg = |b: &mut Vec<u8>, r: &Reg| {
            b.extend_from_slice(&r.bank.to_le_bytes());
            b.extend_from_slice(&r.reg.to_le_bytes());
        };
        for (r, limbs) in &self.consts {
            reg(&mut b, r);
            for l in limbs {
                b.extend_from_slice(&l.to_le_bytes());
            }
        }
        for r in self.inputs.iter().chain(&self.outputs) {
            reg(&mut b, r);
        }
        for w in &self.words {
            b.extend_from_slice(&w.to_le_bytes());
        }
        b
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, BackendError> {
        let mut r = Reader { b: bytes, at: 0 };
        if r.take(8)? != MAGIC {
            return Err(BackendError::Decode("bad magic".into()));
        }
        let fingerprint = r.u64()?;
        let width = r.u32()?;
        let limbs = r.u32()?;
        let beta = f64::from_bits(r.u64()?);
        if width == 0 || limbs == 0 || limbs as usize > crate::field::fp::MAX_LIMBS {
            return Err(BackendError::Decode(format!("bad header: width {width}, limbs {limbs}")));
        }
        let ne = r.u32()?;
        let entries = (0..ne).map(|_| r.u32()).collect::<Result<Vec<_>, _>>()?;
        let (nc, ni, no, ns) = (r.u32()?, r.u32()?, r.u32()?, r.u32()?);
        let mut consts = Vec::new();
        for _ in 0..nc {
            let reg = r.reg()?;
            let l = (0..limbs).map(|_| r.u64()).collect::<Result<Vec<_>, _>>()?;
            consts.push((reg, l));
        }
        let inputs = (0..ni).map(|_| r.reg()).collect::<Result<Vec<_>, _>>()?;
        let outputs = (0..no).map(|_| r.reg()).collect::<Result<Vec<_>, _>>()?;
        let n = ns as usize * width as usize;
        if r.b.len() - r.at != n * 8 {
            return Err(BackendError::Decode(format!("expected {n} instruction words, found {} bytes", r.b.len() - r.at)));
        }
        let words = (0..n).map(|_| r.u64()).collect::<Result<Vec<_>, _>>()?;
        if entries.iter().any(|&e| e > ns) {
            return Err(BackendError::Decode("entry beyond the last slot".into()));
        }
        Ok(MachineProgram { fingerprint, width, limbs, beta, entries, consts, inputs, outputs, words })
    }

    /// Assembly listing, one slot per line.
    pub fn listing(&self) -> Result<String, BackendError> {
        let mut s = String::new();
        for (i, slot) in self.instructions()?.iter().enumerate() {
            let lanes: Vec<String> = slot.iter().map(|x| x.to_string()).collect();
            s.push_str(&format!("{i:>7}: {}\n", lanes.join(" | ")));
        }
        Ok(s)
    }
}

struct Reader<'a> {
    b: &'a [u8],
    at: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8], BackendError> {
        let s = self.b.get(self.at..self.at + n).ok_or_else(|| BackendError::Decode("truncated binary".into()))?;
        self.at += n;
        Ok(s)
    }
    fn u16(&mut self) -> Result<u16, BackendError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }
    fn u32(&mut self) -> Result<u32, BackendError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64, BackendError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn reg(&mut self) -> Result<Reg, BackendError> {
        Ok(Reg { bank: self.u16()?, reg: self.u16()? })
    }
}

/// Encodes a register-allocated schedule. `padded` emits one slot per cycle
/// up to the last issue (idle cycles become NOP slots); otherwise only
/// non-empty slots are emitted and the core's interlocks supply the timing.
pub fn assemble(prog: &Program, s: &Schedule, m: &HardwareModel, limbs: usize, padded: bool) -> Result<MachineProgram, BackendError> {
    let mops = machine_ops(prog)?;
    let reg = s.reg.as_ref().ok_or_else(|| BackendError::Encoding("schedule has no register assignment".into()))?;
    let at = |v: u32| Reg { bank: s.bank[v as usize] as u16, reg: reg[v as usize] as u16 };
    let mut consts = Vec::new();
    let mut inputs: BTreeMap<usize, Reg> = BTreeMap::new();
    for (i, op) in prog.ops.iter().enumerate() {
        match (op.opcode, &op.imm) {
            (Opcode::Const, Imm::Const(v)) => consts.push((at(i as u32), v[0].0[..limbs].to_vec())),
            (Opcode::Input, _) => {
                inputs.insert(op.int() as usize, at(i as u32));
            }
            _ => {}
        }
    }
    if inputs.keys().copied().ne(0..inputs.len()) {
        return Err(BackendError::Encoding("input indices are not dense".into()));
    }
    let width = m.width as usize;
    let mut words = Vec::new();
    let mut emit = |ops: &[u32]| -> Result<(), BackendError> {
        for lane in 0..width {
            let i = match ops.get(lane) {
                Some(&v) => {
                    let args = &prog.ops[v as usize].args;
                    let mut src = [Reg::default(); 2];
                    for (k, &a) in args.iter().enumerate() {
                        src[k] = at(a);
                    }
                    MInstr { op: mops[v as usize].unwrap(), dst: at(v), src }
                }
                None => MInstr::NOP,
            };
            words.push(encode(&i)?);
        }
        Ok(())
    };
    if padded {
        let mut next = 0u64;
        for slot in &s.slots {
            while next < slot.cycle {
                emit(&[])?;
                next += 1;
            }
            emit(&slot.ops)?;
            next += 1;
        }
    } else {
        for slot in &s.slots {
            emit(&slot.ops)?;
        }
    }
    Ok(MachineProgram {
        fingerprint: s.fingerprint,
        width: m.width,
        limbs: limbs as u32,
        beta: s.stats.beta,
        entries: vec![0],
        consts,
        inputs: inputs.into_values().collect(),
        outputs: prog.outputs.iter().map(|&o| at(o)).collect(),
        words,
    })
}

/// Concatenates blocks built for the same model. Constant pools are merged;
/// two blocks preloading different values into one register is an error.
/// Inputs come from the first block and outputs from the last.
pub fn link(blocks: &[MachineProgram]) -> Result<MachineProgram, BackendError> {
    let first = blocks.first().ok_or_else(|| BackendError::Encoding("nothing to link".into()))?;
    let mut out = MachineProgram { entries: Vec::new(), consts: Vec::new(), words: Vec::new(), ..first.clone() };
    let mut pool: BTreeMap<Reg, Vec<u64>> = BTreeMap::new();
    for b in blocks {
        if (b.fingerprint, b.width, b.limbs) != (first.fingerprint, first.width, first.limbs) {
            return Err(BackendError::Encoding("blocks target different models".into()));
        }
        out.entries.push(out.slot_count() as u32);
        out.words.extend_from_slice(&b.words);
        for (r, v) in &b.consts {
            match pool.get(r) {
                Some(old) if old != v => return Err(BackendError::Encoding(format!("constant pool conflict at {r}"))),
                _ => {
                    pool.insert(*r, v.clone());
                }
            }
        }
        out.outputs = b.outputs.clone();
    }
    out.consts = pool.into_iter().collect();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn instr() -> impl Strategy<Value = MInstr> {
        let reg = (0u16..16, 0u16..4096).prop_map(|(bank, reg)| Reg { bank, reg });
        (1u8..=10, reg.clone(), reg.clone(), reg).prop_map(|(c, dst, a, b)| {
            let op = MOp::from_code(c).unwrap();
            let src = [a, if op.arity() == 2 { b } else { Reg::default() }];
            MInstr { op, dst, src }
        })
    }

    proptest! {
        #[test]
        fn words_round_trip(i in instr()) {
            let w = encode(&i).unwrap();
            prop_assert_eq!(decode(w).unwrap(), i);
            prop_assert_eq!(encode(&decode(w).unwrap()).unwrap(), w);
        }
    }

    #[test]
    fn bad_words_are_rejected() {
        assert!(decode(63 << 58).is_err());
        assert!(decode(1).is_err());
        assert_eq!(decode(0).unwrap(), MInstr::NOP);
        assert!(encode(&MInstr { dst: Reg { bank: 16, reg: 0 }, ..MInstr::NOP.with(MOp::Add) }).is_err());
    }

    impl MInstr {
        fn with(self, op: MOp) -> Self {
            MInstr { op, ..self }
        }
    }

    fn sample() -> MachineProgram {
        MachineProgram {
            fingerprint: 7,
            width: 2,
            limbs: 4,
            beta: 0.25,
            entries: vec![0],
            consts: vec![(Reg { bank: 1, reg: 3 }, vec![1, 2, 3, 4])],
            inputs: vec![Reg { bank: 0, reg: 0 }],
            outputs: vec![Reg { bank: 1, reg: 1 }],
            words: vec![encode(&MInstr { op: MOp::Sqr, dst: Reg { bank: 1, reg: 1 }, src: [Reg::default(); 2] }).unwrap(), 0],
        }
    }

    #[test]
    fn binary_round_trip_and_truncation() {
        let p = sample();
        let b = p.to_bytes();
        assert_eq!(MachineProgram::from_bytes(&b).unwrap(), p);
        assert!(MachineProgram::from_bytes(&b[..b.len() - 1]).is_err());
    }

    #[test]
    fn link_merges_pools() {
        let a = sample();
        let l = link(&[a.clone(), a.clone()]).unwrap();
        assert_eq!(l.entries, vec![0, 1]);
        assert_eq!(l.consts.len(), 1);
        let mut b = a.clone();
        b.consts[0].1[0] = 9;
        assert!(link(&[a, b]).is_err());
    }
}
