//! Typed SSA IR over field elements and curve points.
//!
//! A program is a single basic block. Each op defines exactly one value whose
//! id is the op's index. The same structure carries both the high-level form
//! produced by [`codegen`] and the prime-field form produced by [`lower`].

pub mod check;
pub mod codegen;
pub mod exec;
pub mod lower;
pub mod text;

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use smallvec::SmallVec;
use thiserror::Error;

use crate::field::{FieldError, Fp};

pub use codegen::{codegen, CodegenOptions};
pub use exec::{evaluate, Exec};
pub use lower::lower;

pub type ValueId = u32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IrError {
    #[error("op %{id}: {msg}")]
    Type { id: ValueId, msg: String },
    #[error("op %{id} uses %{arg} before its definition")]
    UseBeforeDef { id: ValueId, arg: ValueId },
    #[error("output %{0} is not defined")]
    BadOutput(ValueId),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("program expects {expected} inputs, got {got}")]
    InputCount { expected: usize, got: usize },
    #[error("op %{id}: {err}")]
    Eval { id: ValueId, err: FieldError },
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Ty {
    Fp,
    Fpd(u16),
    Ep,
    Epd(u16),
}

impl Ty {
    /// Degree of the coordinate field over Fp.
    pub fn dim(self) -> usize {
        match self {
            Ty::Fp | Ty::Ep => 1,
            Ty::Fpd(d) | Ty::Epd(d) => d as usize,
        }
    }

    pub fn is_point(self) -> bool {
        matches!(self, Ty::Ep | Ty::Epd(_))
    }

    /// Number of prime-field values the type flattens to.
    pub fn width(self) -> usize {
        if self.is_point() {
            3 * self.dim()
        } else {
            self.dim()
        }
    }

    pub fn field(d: usize) -> Ty {
        if d == 1 {
            Ty::Fp
        } else {
            Ty::Fpd(d as u16)
        }
    }

    pub fn point(d: usize) -> Ty {
        if d == 1 {
            Ty::Ep
        } else {
            Ty::Epd(d as u16)
        }
    }
}

impl fmt::Display for Ty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ty::Fp => f.write_str("fp"),
            Ty::Fpd(d) => write!(f, "fpd({d})"),
            Ty::Ep => f.write_str("ep"),
            Ty::Epd(d) => write!(f, "epd({d})"),
        }
    }
}

impl FromStr for Ty {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        let arg = |pre: &str| -> Option<Result<u16, String>> {
            s.strip_prefix(pre)
                .and_then(|r| r.strip_prefix('('))
                .and_then(|r| r.strip_suffix(')'))
                .map(|d| d.parse::<u16>().map_err(|e| format!("bad degree in `{s}`: {e}")))
        };
        match s {
            "fp" => Ok(Ty::Fp),
            "ep" => Ok(Ty::Ep),
            _ => {
                if let Some(d) = arg("fpd") {
                    Ok(Ty::Fpd(d?))
                } else if let Some(d) = arg("epd") {
                    Ok(Ty::Epd(d?))
                } else {
                    Err(format!("unknown type `{s}`"))
                }
            }
        }
    }
}

macro_rules! opcodes {
    ($($v:ident => $n:literal),* $(,)?) => {
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum Opcode { $($v),* }

        impl Opcode {
            pub const ALL: &'static [Opcode] = &[$(Opcode::$v),*];
            pub fn name(self) -> &'static str {
                match self { $(Opcode::$v => $n),* }
            }
        }

        impl FromStr for Opcode {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                match s { $($n => Ok(Opcode::$v),)* _ => Err(format!("unknown opcode `{s}`")) }
            }
        }
    };
}

opcodes! {
    Input => "input", Const => "const",
    Add => "add", Sub => "sub", Neg => "neg", Dbl => "dbl", Tpl => "tpl", Muli => "muli",
    Mul => "mul", Sqr => "sqr", Inv => "inv", Exp => "exp", Cexp => "cexp", Csqr => "csqr",
    Adj => "adj", Conj => "conj", Frob => "frob",
    Padd => "padd", Pdbl => "pdbl", Pmul => "pmul", Ldbl => "ldbl", Ladd => "ladd",
    Cvt => "cvt", Icv => "icv",
}

impl fmt::Display for Opcode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Opcode {
    /// Opcodes with a one-to-one machine instruction.
    pub fn is_machine(self) -> bool {
        use Opcode::*;
        matches!(self, Add | Sub | Neg | Dbl | Tpl | Mul | Sqr | Inv | Cvt | Icv)
    }

    /// Values preloaded into data memory rather than computed.
    pub fn is_data(self) -> bool {
        matches!(self, Opcode::Input | Opcode::Const)
    }

    pub fn is_commutative(self) -> bool {
        matches!(self, Opcode::Add | Opcode::Mul)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Imm {
    None,
    Int(i64),
    Big(BigInt),
    /// Raw limbs (Montgomery form for arithmetic constants).
    Const(Vec<Fp>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Op {
    pub opcode: Opcode,
    pub ty: Ty,
    pub args: SmallVec<[ValueId; 3]>,
    pub imm: Imm,
}

impl Op {
    pub fn new(opcode: Opcode, ty: Ty, args: &[ValueId], imm: Imm) -> Self {
        Op { opcode, ty, args: SmallVec::from_slice(args), imm }
    }

    pub fn int(&self) -> i64 {
        match self.imm {
            Imm::Int(v) => v,
            _ => 0,
        }
    }

    /// Single constant value of an fp-typed const op.
    pub fn const_fp(&self) -> Option<Fp> {
        match (&self.opcode, &self.imm) {
            (Opcode::Const, Imm::Const(v)) if v.len() == 1 => Some(v[0]),
            _ => None,
        }
    }
}

/// Prime-field inputs consumed by an input op: affine points supply x and y.
pub fn input_width(t: Ty) -> usize {
    if t.is_point() {
        2 * t.dim()
    } else {
        t.dim()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Level {
    Highest,
    Mixed,
    FpLegal,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    pub curve: String,
    pub ops: Vec<Op>,
    pub outputs: Vec<ValueId>,
}

impl Program {
    pub fn new(curve: &str) -> Self {
        Program { curve: curve.to_string(), ops: Vec::new(), outputs: Vec::new() }
    }

    pub fn push(&mut self, op: Op) -> ValueId {
        self.ops.push(op);
        (self.ops.len() - 1) as ValueId
    }

    pub fn op(&self, id: ValueId) -> &Op {
        &self.ops[id as usize]
    }

    /// Number of prime-field inputs the program reads.
    pub fn num_inputs(&self) -> usize {
        self.ops
            .iter()
            .filter(|o| o.opcode == Opcode::Input)
            .map(|o| o.int() as usize + input_width(o.ty))
            .max()
            .unwrap_or(0)
    }

    pub fn level(&self) -> Level {
        let legal = |o: &Op| o.ty == Ty::Fp && (o.opcode.is_machine() || o.opcode.is_data());
        if self.ops.iter().all(legal) {
            Level::FpLegal
        } else if self.ops.iter().any(|o| o.ty == Ty::Fp && o.opcode.is_machine()) {
            Level::Mixed
        } else {
            Level::Highest
        }
    }

    /// Count of computing ops (inputs and constants excluded).
    pub fn instr_count(&self) -> usize {
        self.ops.iter().filter(|o| !o.opcode.is_data()).count()
    }

    pub fn opcode_histogram(&self) -> std::collections::BTreeMap<Opcode, usize> {
        let mut h = std::collections::BTreeMap::new();
        for o in &self.ops {
            *h.entry(o.opcode).or_insert(0) += 1;
        }
        h
    }

    /// Users of each value.
    pub fn use_counts(&self) -> Vec<u32> {
        let mut n = vec![0u32; self.ops.len()];
        for o in &self.ops {
            for &a in &o.args {
                n[a as usize] += 1;
            }
        }
        for &o in &self.outputs {
            n[o as usize] += 1;
        }
        n
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn type_names_round_trip() {
        for t in [Ty::Fp, Ty::Fpd(12), Ty::Ep, Ty::Epd(4)] {
            assert_eq!(t.to_string().parse::<Ty>().unwrap(), t);
        }
        assert!("fpd(x)".parse::<Ty>().is_err());
        assert!("int".parse::<Ty>().is_err());
    }

    #[test]
    fn opcode_names_round_trip() {
        for &o in Opcode::ALL {
            assert_eq!(o.name().parse::<Opcode>().unwrap(), o);
        }
    }
}
