use std::collections::HashMap;

use super::Rewriter;
use crate::field::{CurveSpec, Fp, PrimeField};
use crate::ir::{Op, Opcode, Program, Ty, ValueId};

fn passthrough(rw: &mut Rewriter, op: &Op) -> ValueId {
    let mut o = op.clone();
    o.args = rw.args(op).into();
    rw.emit(o)
}

fn fold(f: &PrimeField, opcode: Opcode, c: &[Fp]) -> Option<Fp> {
    use Opcode::*;
    Some(match opcode {
        Add => f.add(&c[0], &c[1]),
        Sub => f.sub(&c[0], &c[1]),
        Neg => f.neg(&c[0]),
        Dbl => f.dbl(&c[0]),
        Tpl => f.tpl(&c[0]),
        Mul => f.mul(&c[0], &c[1]),
        Sqr => f.sqr(&c[0]),
        // inverting zero stays a runtime error
        Inv => f.inv(&c[0]).ok()?,
        Cvt => f.to_mont(&c[0]),
        Icv => f.from_mont(&c[0]),
        _ => return None,
    })
}

/// Folds constant operands, collapses products with zero and forwards
/// identities (x·1, x + 0, x − 0).
pub fn const_prop(prog: &Program, spec: &CurveSpec) -> Program {
    let f = spec.fp();
    let one = f.one();
    let minus_one = f.neg(&one);
    let mut rw = Rewriter::new(prog);
    for op in &prog.ops {
        if op.ty != Ty::Fp || !op.opcode.is_machine() {
            let id = passthrough(&mut rw, op);
            rw.map.push(id);
            continue;
        }
        let a = rw.args(op);
        let c: Vec<Option<Fp>> = a.iter().map(|&x| rw.const_of(x)).collect();
        let id = if c.iter().all(Option::is_some) {
            let vals: Vec<Fp> = c.iter().map(|x| x.unwrap()).collect();
            match fold(f, op.opcode, &vals) {
                Some(v) => rw.constant(v),
                None => rw.fp(op.opcode, &a),
            }
        } else {
            let zero = |i: usize| c[i].is_some_and(|v| v.is_zero());
            let is = |i: usize, v: Fp| c[i] == Some(v);
            match op.opcode {
                Opcode::Mul if zero(0) || zero(1) => rw.constant(Fp::ZERO),
                Opcode::Mul if is(0, one) => a[1],
                Opcode::Mul if is(1, one) => a[0],
                Opcode::Mul if is(0, minus_one) => rw.fp(Opcode::Neg, &[a[1]]),
                Opcode::Mul if is(1, minus_one) => rw.fp(Opcode::Neg, &[a[0]]),
                Opcode::Add if zero(0) => a[1],
                Opcode::Add | Opcode::Sub if zero(1) => a[0],
                Opcode::Sub if zero(0) => rw.fp(Opcode::Neg, &[a[1]]),
                _ => rw.fp(op.opcode, &a),
            }
        };
        rw.map.push(id);
    }
    rw.finish(prog)
}

/// Replaces operations by cheaper equivalents: squarings, doublings,
/// triplings, and negations absorbed into additions and subtractions.
pub fn strength_reduce(prog: &Program, spec: &CurveSpec) -> Program {
    use Opcode::*;
    let f = spec.fp();
    let two = f.dbl(&f.one());
    let three = f.tpl(&f.one());
    let minus_one = f.neg(&f.one());
    let mut rw = Rewriter::new(prog);
    for op in &prog.ops {
        if op.ty != Ty::Fp || !op.opcode.is_machine() {
            let id = passthrough(&mut rw, op);
            rw.map.push(id);
            continue;
        }
        let a = rw.args(op);
        let def = |rw: &Rewriter, x: ValueId| -> (Opcode, Vec<ValueId>) {
            let o = rw.out.op(x);
            (o.opcode, o.args.to_vec())
        };
        let neg_of = |rw: &Rewriter, x: ValueId| match def(rw, x) {
            (Neg, v) => Some(v[0]),
            _ => None,
        };
        let dbl_of = |rw: &Rewriter, x: ValueId| match def(rw, x) {
            (Dbl, v) => Some(v[0]),
            _ => None,
        };
        let id = match op.opcode {
            Mul if a[0] == a[1] => rw.fp(Sqr, &[a[0]]),
            Mul => {
                let (x, c) = match (rw.const_of(a[0]), rw.const_of(a[1])) {
                    (Some(c), _) => (a[1], Some(c)),
                    (_, Some(c)) => (a[0], Some(c)),
                    _ => (a[0], None),
                };
                match c {
                    Some(c) if c == two => rw.fp(Dbl, &[x]),
                    Some(c) if c == three => rw.fp(Tpl, &[x]),
                    Some(c) if c == minus_one => rw.fp(Neg, &[x]),
                    _ => rw.fp(Mul, &a),
                }
            }
            Add if a[0] == a[1] => rw.fp(Dbl, &[a[0]]),
            Add => {
                if let Some(y) = neg_of(&rw, a[1]) {
                    rw.fp(Sub, &[a[0], y])
                } else if let Some(y) = neg_of(&rw, a[0]) {
                    rw.fp(Sub, &[a[1], y])
                } else if dbl_of(&rw, a[0]) == Some(a[1]) {
                    rw.fp(Tpl, &[a[1]])
                } else if dbl_of(&rw, a[1]) == Some(a[0]) {
                    rw.fp(Tpl, &[a[0]])
                } else {
                    rw.fp(Add, &a)
                }
            }
            Sub if a[0] == a[1] => rw.constant(Fp::ZERO),
            Sub => match neg_of(&rw, a[1]) {
                Some(y) => rw.fp(Add, &[a[0], y]),
                None => rw.fp(Sub, &a),
            },
            Neg => match def(&rw, a[0]) {
                (Neg, v) => v[0],
                (Sub, v) => rw.fp(Sub, &[v[1], v[0]]),
                _ => rw.fp(Neg, &a),
            },
            _ => rw.fp(op.opcode, &a),
        };
        rw.map.push(id);
    }
    rw.finish(prog)
}

/// Merges ops with the same opcode, type, immediate and operands, treating
/// add and mul operands as unordered.
pub fn gvn(prog: &Program) -> Program {
    let mut rw = Rewriter::new(prog);
    let mut table: HashMap<Op, ValueId> = HashMap::new();
    for op in &prog.ops {
        let mut key = op.clone();
        key.args = rw.args(op).into();
        if op.opcode.is_commutative() {
            key.args.sort_unstable();
        }
        let id = match table.get(&key) {
            Some(&id) => id,
            None => {
                let id = rw.emit(key.clone());
                table.insert(key, id);
                id
            }
        };
        rw.map.push(id);
    }
    rw.finish(prog)
}

/// Removes ops that no output depends on. Inputs are kept so the program
/// signature does not change.
pub fn dce(prog: &Program) -> Program {
    let mut live = vec![false; prog.ops.len()];
    for &o in &prog.outputs {
        live[o as usize] = true;
    }
    for (id, op) in prog.ops.iter().enumerate().rev() {
        if live[id] || op.opcode == Opcode::Input {
            live[id] = true;
            for &a in &op.args {
                live[a as usize] = true;
            }
        }
    }
    let mut rw = Rewriter::new(prog);
    for (id, op) in prog.ops.iter().enumerate() {
        let new = if live[id] { passthrough(&mut rw, op) } else { ValueId::MAX };
        rw.map.push(new);
    }
    rw.finish(prog)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::Imm;
    use crate::opt::{run_pipeline, Pass};

    fn spec() -> CurveSpec {
        CurveSpec::shipped("bn254").unwrap()
    }

    fn fp(p: &mut Program, o: Opcode, a: &[ValueId]) -> ValueId {
        p.push(Op::new(o, Ty::Fp, a, Imm::None))
    }

    fn base() -> Program {
        let mut p = Program::new("bn254");
        p.push(Op::new(Opcode::Input, Ty::Fp, &[], Imm::Int(0)));
        p.push(Op::new(Opcode::Input, Ty::Fp, &[], Imm::Int(1)));
        p
    }

    #[test]
    fn zero_product_erases_dependents() {
        let s = spec();
        let mut p = base();
        let z = p.push(Op::new(Opcode::Const, Ty::Fp, &[], Imm::Const(vec![Fp::ZERO])));
        let m = fp(&mut p, Opcode::Mul, &[0, z]);
        let a = fp(&mut p, Opcode::Add, &[m, 1]);
        p.outputs = vec![a];
        let (q, _) = run_pipeline(&p, &s, &Pass::PIPELINE, true);
        assert_eq!(q.instr_count(), 0);
        assert_eq!(q.outputs, vec![1]);
    }

    #[test]
    fn gvn_uses_commutativity_only_where_valid() {
        let mut p = base();
        let m1 = fp(&mut p, Opcode::Mul, &[0, 1]);
        let m2 = fp(&mut p, Opcode::Mul, &[1, 0]);
        let s1 = fp(&mut p, Opcode::Sub, &[0, 1]);
        let s2 = fp(&mut p, Opcode::Sub, &[1, 0]);
        p.outputs = vec![m1, m2, s1, s2];
        let q = gvn(&p);
        assert_eq!(q.instr_count(), 3);
        assert_eq!(q.outputs[0], q.outputs[1]);
        assert_ne!(q.outputs[2], q.outputs[3]);
    }

    #[test]
    fn strength_rewrites() {
        let s = spec();
        let mut p = base();
        let sq = fp(&mut p, Opcode::Mul, &[0, 0]);
        let n = fp(&mut p, Opcode::Neg, &[1]);
        let a = fp(&mut p, Opcode::Add, &[sq, n]);
        let d = fp(&mut p, Opcode::Add, &[a, a]);
        p.outputs = vec![d];
        let q = dce(&strength_reduce(&p, &s));
        let h = q.opcode_histogram();
        assert_eq!(h.get(&Opcode::Sqr), Some(&1));
        assert_eq!(h.get(&Opcode::Sub), Some(&1));
        assert_eq!(h.get(&Opcode::Dbl), Some(&1));
        assert_eq!(q.instr_count(), 3);
    }

    #[test]
    fn dce_keeps_inputs_and_is_idempotent() {
        let mut p = base();
        fp(&mut p, Opcode::Sqr, &[0]);
        let a = fp(&mut p, Opcode::Add, &[0, 0]);
        p.outputs = vec![a];
        let q = dce(&p);
        assert_eq!(q.num_inputs(), 2);
        assert_eq!(q.instr_count(), 1);
        assert_eq!(dce(&q), q);
    }
}
