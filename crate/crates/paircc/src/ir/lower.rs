//! Lowering to prime-field form.
//!
//! Runs the executor over a recording backend, so the lowered program is
//! exactly the sequence of prime-field operations the tower formulas perform
//! under the chosen variants.

use std::collections::HashMap;

use super::exec::Exec;
use super::{Imm, IrError, Op, Opcode, Program, Ty, ValueId};
use crate::field::{CurveSpec, Fp, FpBackend, Selection};

/// Records prime-field operations as SSA ops; equal constants share one op.
pub struct Builder {
    pub prog: Program,
    consts: HashMap<Fp, ValueId>,
}

impl Builder {
    pub fn new(curve: &str) -> Self {
        Builder { prog: Program::new(curve), consts: HashMap::new() }
    }

    fn emit(&mut self, opcode: Opcode, args: &[ValueId]) -> ValueId {
        self.prog.push(Op::new(opcode, Ty::Fp, args, Imm::None))
    }

    pub fn input(&mut self, i: usize) -> ValueId {
        self.prog.push(Op::new(Opcode::Input, Ty::Fp, &[], Imm::Int(i as i64)))
    }
}

impl FpBackend for Builder {
    type V = ValueId;
    fn constant(&mut self, c: Fp) -> ValueId {
        if let Some(&id) = self.consts.get(&c) {
            return id;
        }
        let id = self.prog.push(Op::new(Opcode::Const, Ty::Fp, &[], Imm::Const(vec![c])));
        self.consts.insert(c, id);
        id
    }
    fn add(&mut self, a: &ValueId, b: &ValueId) -> ValueId {
        self.emit(Opcode::Add, &[*a, *b])
    }
    fn sub(&mut self, a: &ValueId, b: &ValueId) -> ValueId {
        self.emit(Opcode::Sub, &[*a, *b])
    }
    fn neg(&mut self, a: &ValueId) -> ValueId {
        self.emit(Opcode::Neg, &[*a])
    }
    fn dbl(&mut self, a: &ValueId) -> ValueId {
        self.emit(Opcode::Dbl, &[*a])
    }
    fn tpl(&mut self, a: &ValueId) -> ValueId {
        self.emit(Opcode::Tpl, &[*a])
    }
    fn mul(&mut self, a: &ValueId, b: &ValueId) -> ValueId {
        self.emit(Opcode::Mul, &[*a, *b])
    }
    fn sqr(&mut self, a: &ValueId) -> ValueId {
        self.emit(Opcode::Sqr, &[*a])
    }
    fn inv(&mut self, a: &ValueId) -> ValueId {
        self.emit(Opcode::Inv, &[*a])
    }
    fn cvt(&mut self, a: &ValueId) -> ValueId {
        self.emit(Opcode::Cvt, &[*a])
    }
    fn icv(&mut self, a: &ValueId) -> ValueId {
        self.emit(Opcode::Icv, &[*a])
    }
}

/// Lowers a program of any level to prime-field form under `sel`.
pub fn lower(prog: &Program, spec: &CurveSpec, sel: &Selection) -> Result<Program, IrError> {
    sel.validate(&spec.tower)?;
    super::check::check(prog, &spec.tower)?;
    let mut ex = Exec::new(spec, sel, Builder::new(&prog.curve));
    let outputs = ex.run(prog, &mut |b, i| b.input(i))?;
    let mut b = ex.ar.into_backend();
    b.prog.outputs = outputs;
    Ok(b.prog)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Variant;
    use crate::ir::exec::{evaluate, pair_inputs};
    use crate::ir::{codegen, CodegenOptions, Level};
    use crate::pairing::random_pair;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn lowered_program_is_fp_legal_and_equivalent() {
        let s = CurveSpec::shipped("bn254").unwrap();
        let hi = codegen(&s, CodegenOptions::default());
        let mut sel = Selection::schoolbook(&s.tower);
        sel.mul = vec![Variant::Karatsuba; 3];
        let lo = lower(&hi, &s, &sel).unwrap();
        assert_eq!(lo.level(), Level::FpLegal);
        crate::ir::check::check(&lo, &s.tower).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..2 {
            let (p, q) = random_pair(&s, &mut rng);
            let x = pair_inputs(&s, &p, &q);
            assert_eq!(evaluate(&hi, &s, &sel, &x).unwrap(), evaluate(&lo, &s, &sel, &x).unwrap());
        }
    }

    #[test]
    fn missing_selection_is_rejected() {
        let s = CurveSpec::shipped("bn254").unwrap();
        let hi = codegen(&s, CodegenOptions::default());
        let mut sel = Selection::schoolbook(&s.tower);
        sel.mul.pop();
        assert!(lower(&hi, &s, &sel).is_err());
    }
}
