//! SSA well-formedness and operand typing.

use super::{Imm, IrError, Op, Opcode, Program, Ty, ValueId};
use crate::field::Tower;

fn err(id: usize, msg: impl Into<String>) -> IrError {
    IrError::Type { id: id as ValueId, msg: msg.into() }
}

/// Checks def-before-use, operand types and immediates against a tower.
pub fn check(prog: &Program, tower: &Tower) -> Result<(), IrError> {
    for (id, op) in prog.ops.iter().enumerate() {
        for &a in &op.args {
            if a as usize >= id {
                return Err(IrError::UseBeforeDef { id: id as ValueId, arg: a });
            }
        }
        check_op(prog, tower, id, op)?;
    }
    for &o in &prog.outputs {
        if o as usize >= prog.ops.len() {
            return Err(IrError::BadOutput(o));
        }
    }
    Ok(())
}

fn check_op(prog: &Program, t: &Tower, id: usize, op: &Op) -> Result<(), IrError> {
    use Opcode::*;
    let k = t.k();
    let q = t.degs[t.twist_level()];
    if t.level_of(op.ty.dim()).is_none() {
        return Err(err(id, format!("type {} is not a tower level", op.ty)));
    }
    let arity = match op.opcode {
        Input | Const => 0,
        Add | Sub | Mul | Padd | Ldbl => 2,
        Ladd => 3,
        _ => 1,
    };
    if op.args.len() != arity {
        return Err(err(id, format!("{} takes {arity} operands, got {}", op.opcode, op.args.len())));
    }
    let arg = |i: usize| prog.ops[op.args[i] as usize].ty;
    let field = |t: Ty| !t.is_point();
    let same = |want: Ty| -> Result<(), IrError> {
        if arg(0) != want {
            return Err(err(id, format!("operand has type {}, expected {want}", arg(0))));
        }
        Ok(())
    };
    let need_int = || -> Result<(), IrError> {
        match op.imm {
            Imm::Int(_) => Ok(()),
            _ => Err(err(id, format!("{} needs an integer immediate", op.opcode))),
        }
    };
    let need_exp = || -> Result<(), IrError> {
        match op.imm {
            Imm::Int(_) | Imm::Big(_) => Ok(()),
            _ => Err(err(id, format!("{} needs a constant exponent", op.opcode))),
        }
    };
    match op.opcode {
        Input => {
            if op.int() < 0 {
                return Err(err(id, "negative input index"));
            }
            need_int()
        }
        Const => match &op.imm {
            Imm::Const(v) if v.len() == op.ty.width() && field(op.ty) => Ok(()),
            _ => Err(err(id, format!("const payload does not fit {}", op.ty))),
        },
        Add | Sub | Mul => {
            let (a, b) = (arg(0), arg(1));
            if !field(a) || !field(b) {
                return Err(err(id, format!("{} needs field operands", op.opcode)));
            }
            let (da, db) = (a.dim(), b.dim());
            if da % db != 0 && db % da != 0 {
                return Err(err(id, format!("dimensions {da} and {db} do not divide each other")));
            }
            if op.ty != Ty::field(da.max(db)) {
                return Err(err(id, format!("result type {} does not match operands", op.ty)));
            }
            Ok(())
        }
        Neg | Cvt | Icv => same(op.ty),
        Dbl | Tpl | Sqr | Inv => {
            if !field(op.ty) {
                return Err(err(id, format!("{} needs a field operand", op.opcode)));
            }
            same(op.ty)
        }
        Muli => {
            if !field(op.ty) {
                return Err(err(id, "muli needs a field operand"));
            }
            same(op.ty)?;
            need_int()
        }
        Exp => {
            if !field(op.ty) {
                return Err(err(id, "exp needs a field operand"));
            }
            same(op.ty)?;
            need_exp()
        }
        Csqr | Cexp => {
            same(Ty::Fpd(k as u16))?;
            if op.ty != Ty::Fpd(k as u16) {
                return Err(err(id, "cyclotomic ops act on the full extension"));
            }
            if op.opcode == Cexp {
                need_exp()?;
            }
            Ok(())
        }
        Adj => match op.ty {
            Ty::Fpd(d) if (d as usize) < k => same(op.ty),
            _ => Err(err(id, "adj needs an fpd operand below the top level")),
        },
        Conj => match op.ty {
            Ty::Fpd(d) => {
                let l = t.level_of(d as usize).expect("checked above");
                if t.levels[l - 1].ext != 2 {
                    return Err(err(id, "conj needs a quadratic top step"));
                }
                same(op.ty)
            }
            _ => Err(err(id, "conj needs an fpd operand")),
        },
        Frob => {
            if op.ty == Ty::Ep {
                return Err(err(id, "frob on G1 points is the identity and not supported"));
            }
            same(op.ty)?;
            need_int()?;
            if op.int() < 0 || op.int() as usize >= k {
                return Err(err(id, format!("frobenius power {} out of range", op.int())));
            }
            Ok(())
        }
        Padd | Pdbl | Pmul => {
            if !op.ty.is_point() {
                return Err(err(id, format!("{} produces a point", op.opcode)));
            }
            same(op.ty)?;
            if op.opcode == Padd && arg(1) != op.ty {
                return Err(err(id, "padd operands differ in type"));
            }
            if op.opcode == Pmul {
                need_exp()?;
            }
            Ok(())
        }
        Ldbl | Ladd => {
            let tq = Ty::Epd(q as u16);
            if op.ty != Ty::Fpd(k as u16) {
                return Err(err(id, "line value lives in the full extension"));
            }
            same(tq)?;
            let n = op.args.len();
            if op.opcode == Ladd && arg(1) != tq {
                return Err(err(id, "ladd needs two twist points"));
            }
            if arg(n - 1) != Ty::Ep {
                return Err(err(id, "line is evaluated at a G1 point"));
            }
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::CurveSpec;
    use proptest::prelude::*;

    fn base() -> (CurveSpec, Program) {
        let s = CurveSpec::shipped("bn254").unwrap();
        let mut p = Program::new("bn254");
        p.push(Op::new(Opcode::Input, Ty::Fpd(2), &[], Imm::Int(0)));
        p.push(Op::new(Opcode::Input, Ty::Fpd(12), &[], Imm::Int(2)));
        p.push(Op::new(Opcode::Input, Ty::Epd(2), &[], Imm::Int(14)));
        p.push(Op::new(Opcode::Input, Ty::Ep, &[], Imm::Int(18)));
        (s, p)
    }

    #[test]
    fn accepts_mixed_dimension_mul() {
        let (s, mut p) = base();
        p.push(Op::new(Opcode::Mul, Ty::Fpd(12), &[1, 0], Imm::None));
        p.push(Op::new(Opcode::Ldbl, Ty::Fpd(12), &[2, 3], Imm::None));
        p.outputs = vec![5];
        check(&p, &s.tower).unwrap();
    }

    #[test]
    fn rejects_use_before_def() {
        let (s, mut p) = base();
        p.ops.insert(0, Op::new(Opcode::Neg, Ty::Fpd(2), &[1], Imm::None));
        assert!(matches!(check(&p, &s.tower), Err(IrError::UseBeforeDef { .. })));
    }

    fn bad_op() -> impl Strategy<Value = Op> {
        let opcode = proptest::sample::select(Opcode::ALL.to_vec());
        let ty = proptest::sample::select(vec![Ty::Fp, Ty::Fpd(2), Ty::Fpd(6), Ty::Fpd(12), Ty::Ep, Ty::Epd(2), Ty::Fpd(4)]);
        let args = proptest::collection::vec(0u32..4, 0..4);
        (opcode, ty, args, -2i64..20).prop_map(|(o, t, a, i)| Op::new(o, t, &a, Imm::Int(i)))
    }

    /// Independent statement of the typing rules used to classify random ops.
    fn well_typed(op: &Op, arg_tys: &[Ty]) -> bool {
        use Opcode::*;
        let fld = |t: &Ty| !t.is_point();
        let levels = [1usize, 2, 6, 12];
        if !levels.contains(&op.ty.dim()) {
            return false;
        }
        let imm = op.int();
        match (op.opcode, arg_tys) {
            (Input, []) => imm >= 0,
            (Const, []) => false,
            (Add | Sub | Mul, [a, b]) => {
                fld(a) && fld(b) && (a.dim() % b.dim() == 0 || b.dim() % a.dim() == 0) && op.ty == Ty::field(a.dim().max(b.dim()))
            }
            (Neg | Cvt | Icv, [a]) => *a == op.ty,
            (Dbl | Tpl | Sqr | Inv | Muli | Exp, [a]) => fld(a) && *a == op.ty,
            (Csqr | Cexp, [a]) => *a == Ty::Fpd(12) && op.ty == Ty::Fpd(12),
            (Adj, [a]) => *a == op.ty && matches!(op.ty, Ty::Fpd(2) | Ty::Fpd(6)),
            (Conj, [a]) => *a == op.ty && matches!(op.ty, Ty::Fpd(2) | Ty::Fpd(12)),
            (Frob, [a]) => *a == op.ty && op.ty != Ty::Ep && (0..12).contains(&imm),
            (Pdbl | Pmul, [a]) => op.ty.is_point() && *a == op.ty,
            (Padd, [a, b]) => op.ty.is_point() && *a == op.ty && *b == op.ty,
            (Ldbl, [a, b]) => op.ty == Ty::Fpd(12) && *a == Ty::Epd(2) && *b == Ty::Ep,
            (Ladd, [a, b, c]) => op.ty == Ty::Fpd(12) && *a == Ty::Epd(2) && *b == Ty::Epd(2) && *c == Ty::Ep,
            _ => false,
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(512))]
        #[test]
        fn checker_agrees_with_typing_rules(op in bad_op()) {
            let (s, mut p) = base();
            let tys: Vec<Ty> = op.args.iter().map(|&a| p.ops[a as usize].ty).collect();
            let expect = well_typed(&op, &tys);
            p.push(op);
            prop_assert_eq!(check(&p, &s.tower).is_ok(), expect);
        }
    }
}
