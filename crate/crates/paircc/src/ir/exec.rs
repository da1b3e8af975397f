//! Op semantics over a prime-field backend.
//!
//! With [`Eval`] this is the reference interpreter for programs at any level;
//! with the lowering builder it emits the prime-field program.

use std::collections::{HashMap, HashSet};

use num_bigint::BigInt;

use super::{input_width, Imm, IrError, Op, Opcode, Program, ValueId};
use crate::field::backend::{Eval, FpBackend};
use crate::field::point::{jac_add, jac_dbl, proj_add, proj_dbl, StepOut};
use crate::field::tower::{Arith, El, LevelRing};
use crate::field::{Coords, CurveSpec, Fp, Selection, TwistType};
use crate::pairing::LineEval;

const NO_Q: ValueId = ValueId::MAX;

struct Fused<V> {
    point: Vec<V>,
    line: Option<[Vec<V>; 3]>,
}

pub struct Exec<'a, B: FpBackend> {
    pub ar: Arith<'a, B>,
    spec: &'a CurveSpec,
    memo: HashMap<(ValueId, ValueId), Fused<B::V>>,
    lined: HashSet<(ValueId, ValueId)>,
}

fn split3<V: Clone>(v: &[V]) -> [Vec<V>; 3] {
    let d = v.len() / 3;
    [v[..d].to_vec(), v[d..2 * d].to_vec(), v[2 * d..].to_vec()]
}

fn exponent(op: &Op) -> BigInt {
    match &op.imm {
        Imm::Int(v) => BigInt::from(*v),
        Imm::Big(b) => b.clone(),
        _ => BigInt::from(1),
    }
}

impl<'a, B: FpBackend> Exec<'a, B> {
    pub fn new(spec: &'a CurveSpec, sel: &'a Selection, b: B) -> Self {
        Exec { ar: Arith::new(&spec.tower, sel, b), spec, memo: HashMap::new(), lined: HashSet::new() }
    }

    fn coords(&self) -> Coords {
        self.ar.sel.coords
    }

    /// Runs the program; `input(b, i)` supplies prime-field input `i`.
    /// Returns the outputs flattened to prime-field values.
    pub fn run(&mut self, prog: &Program, input: &mut dyn FnMut(&mut B, usize) -> B::V) -> Result<Vec<B::V>, IrError> {
        self.memo.clear();
        self.lined = prog
            .ops
            .iter()
            .filter_map(|o| match o.opcode {
                Opcode::Ldbl => Some((o.args[0], NO_Q)),
                Opcode::Ladd => Some((o.args[0], o.args[1])),
                _ => None,
            })
            .collect();
        let mut remaining = prog.use_counts();
        let mut vals: Vec<Vec<B::V>> = Vec::with_capacity(prog.ops.len());
        for (id, op) in prog.ops.iter().enumerate() {
            let v = {
                let args: Vec<&[B::V]> = op.args.iter().map(|&a| vals[a as usize].as_slice()).collect();
                self.step(id as ValueId, op, &args, input)
            };
            if let Some(err) = self.ar.b.take_error() {
                return Err(IrError::Eval { id: id as ValueId, err });
            }
            vals.push(v);
            for &a in &op.args {
                let r = &mut remaining[a as usize];
                *r -= 1;
                if *r == 0 {
                    vals[a as usize] = Vec::new();
                }
            }
        }
        Ok(prog.outputs.iter().flat_map(|&o| vals[o as usize].iter().cloned()).collect())
    }

    fn step(&mut self, id: ValueId, op: &Op, a: &[&[B::V]], input: &mut dyn FnMut(&mut B, usize) -> B::V) -> El<B> {
        use Opcode::*;
        let ar = &mut self.ar;
        let v = match op.opcode {
            Input => {
                let base = op.int() as usize;
                let mut v: Vec<B::V> = (0..input_width(op.ty)).map(|i| input(&mut ar.b, base + i)).collect();
                if op.ty.is_point() {
                    // standard-form Z = 1, converted together with X and Y
                    v.push(ar.b.constant(Fp::from_u64(1)));
                    for _ in 1..op.ty.dim() {
                        v.push(ar.b.constant(Fp::ZERO));
                    }
                }
                v
            }
            Const => match &op.imm {
                Imm::Const(c) => ar.constant(c),
                _ => unreachable!("checked const payload"),
            },
            Add | Sub => {
                let (x, y) = (a[0], a[1]);
                if x.len() == y.len() {
                    if op.opcode == Add {
                        ar.add(x, y)
                    } else {
                        ar.sub(x, y)
                    }
                } else {
                    let top = ar.t.level_of(x.len().max(y.len())).expect("typed");
                    let x = ar.embed(x, top);
                    let y = ar.embed(y, top);
                    if op.opcode == Add {
                        ar.add(&x, &y)
                    } else {
                        ar.sub(&x, &y)
                    }
                }
            }
            Mul => {
                if a[0].len() >= a[1].len() {
                    ar.mul(a[0], a[1])
                } else {
                    ar.mul(a[1], a[0])
                }
            }
            Neg if op.ty.is_point() => {
                let [x, y, z] = split3(a[0]);
                let mut out = x;
                out.extend(ar.neg(&y));
                out.extend(z);
                out
            }
            Neg => ar.neg(a[0]),
            Dbl => ar.dbl(a[0]),
            Tpl => ar.tpl(a[0]),
            Muli => ar.muli(a[0], op.int()),
            Sqr => ar.sqr(a[0]),
            Inv => ar.inv(a[0]),
            Exp => ar.exp(a[0], &exponent(op)),
            Cexp => ar.cexp(a[0], &exponent(op)),
            Csqr => ar.csqr(a[0]),
            Adj => {
                let l = ar.t.level_of(a[0].len()).expect("typed");
                ar.mul_nr(l + 1, a[0])
            }
            Conj => ar.conj(a[0]),
            Frob if op.ty.is_point() => self.frob_point(a[0], op.int() as usize),
            Frob => ar.frob(a[0], op.int() as usize),
            Cvt => a[0].iter().map(|x| ar.b.cvt(x)).collect(),
            Icv => a[0].iter().map(|x| ar.b.icv(x)).collect(),
            Pdbl => self.fused(op.args[0], NO_Q, a[0], None).point.clone(),
            Padd => self.fused(op.args[0], op.args[1], a[0], Some(a[1])).point.clone(),
            Pmul => self.pmul(a[0], &exponent(op)),
            Ldbl => {
                let line = self.fused(op.args[0], NO_Q, a[0], None).line.clone().expect("line requested");
                self.place(line, a[1])
            }
            Ladd => {
                let line = self.fused(op.args[0], op.args[1], a[0], Some(a[1])).line.clone().expect("line requested");
                self.place(line, a[2])
            }
        };
        debug_assert_eq!(v.len(), op.ty.width(), "op %{id} width");
        v
    }

    fn b3(&self, d: usize) -> Vec<Fp> {
        let f = &self.spec.tower.fp;
        if d == 1 {
            vec![f.tpl(&f.from_big(&self.spec.b))]
        } else {
            self.spec.b_twist.iter().map(|x| f.tpl(x)).collect()
        }
    }

    fn formula(&mut self, t: &[B::V], q: Option<&[B::V]>, line: bool) -> StepOut<El<B>> {
        let coords = self.coords();
        let d = t.len() / 3;
        let b3 = self.b3(d);
        let nr_level = self.ar.t.level_of(d).expect("point level") + 1;
        let mut r = LevelRing { a: &mut self.ar, nr_level };
        let tt = split3(t);
        match (coords, q) {
            (Coords::Jacobian, None) => jac_dbl(&mut r, &tt, line),
            (Coords::Jacobian, Some(q)) => jac_add(&mut r, &tt, &split3(q), line),
            (Coords::Projective, None) => proj_dbl(&mut r, &tt, line),
            (Coords::Projective, Some(q)) => proj_add(&mut r, &tt, &split3(q), &b3, line),
        }
    }

    fn fused(&mut self, tid: ValueId, qid: ValueId, t: &[B::V], q: Option<&[B::V]>) -> &Fused<B::V> {
        let key = (tid, qid);
        if !self.memo.contains_key(&key) {
            let line = self.lined.contains(&key);
            let out = self.formula(t, q, line);
            self.memo.insert(key, Fused { point: out.point.concat(), line: out.line });
        }
        &self.memo[&key]
    }

    /// Line coefficients (a, b, c) placed into the full extension at P.
    fn place(&mut self, [la, lb, lc]: [Vec<B::V>; 3], p: &[B::V]) -> El<B> {
        let ar = &mut self.ar;
        let top = ar.t.top();
        let ay = ar.scale(&la, &p[1]);
        let bx = ar.scale(&lb, &p[0]);
        let pos = LineEval::pattern(self.spec);
        let parts = match self.spec.twist {
            TwistType::D => [ay, bx, lc],
            TwistType::M => [lc, bx, ay],
        };
        let mut out = ar.zero(top);
        for (off, c) in pos.iter().zip(parts) {
            for (i, v) in c.into_iter().enumerate() {
                out[off + i] = v;
            }
        }
        out
    }

    fn frob_point(&mut self, p: &[B::V], i: usize) -> El<B> {
        let (cx, cy) = self.spec.frob_twist.clone();
        let [mut x, mut y, mut z] = split3(p);
        let ar = &mut self.ar;
        for _ in 0..i {
            x = ar.frob(&x, 1);
            x = ar.mul_const(&x, &cx);
            y = ar.frob(&y, 1);
            y = ar.mul_const(&y, &cy);
            z = ar.frob(&z, 1);
        }
        [x, y, z].concat()
    }

    /// Left-to-right double-and-add; the scalar must not be a multiple of the
    /// point's order.
    fn pmul(&mut self, p: &[B::V], n: &BigInt) -> El<B> {
        let m = n.magnitude();
        let d = p.len() / 3;
        let l = self.ar.t.level_of(d).expect("point level");
        if m.bits() == 0 {
            let one = self.ar.one(l);
            let zero = self.ar.zero(l);
            return match self.coords() {
                Coords::Jacobian => [one.clone(), one, zero].concat(),
                Coords::Projective => [zero.clone(), one, zero].concat(),
            };
        }
        let mut acc = p.to_vec();
        for i in (0..m.bits() - 1).rev() {
            acc = self.formula(&acc, None, false).point.concat();
            if m.bit(i) {
                acc = self.formula(&acc, Some(p), false).point.concat();
            }
        }
        if n.sign() == num_bigint::Sign::Minus {
            let [x, y, z] = split3(&acc);
            let y = self.ar.neg(&y);
            acc = [x, y, z].concat();
        }
        acc
    }
}

/// Evaluates a program on standard-form prime-field inputs.
pub fn evaluate(prog: &Program, spec: &CurveSpec, sel: &Selection, inputs: &[Fp]) -> Result<Vec<Fp>, IrError> {
    let need = prog.num_inputs();
    if inputs.len() != need {
        return Err(IrError::InputCount { expected: need, got: inputs.len() });
    }
    let mut ex = Exec::new(spec, sel, Eval::new(&spec.tower.fp));
    ex.run(prog, &mut |_, i| inputs[i])
}

/// Flattens a pairing input pair to standard-form program inputs.
pub fn pair_inputs(spec: &CurveSpec, p: &crate::field::point::Affine, q: &crate::field::point::Affine) -> Vec<Fp> {
    let f = &spec.tower.fp;
    let std = |v: &Vec<Fp>| v.iter().map(|x| f.from_mont(x)).collect::<Vec<_>>();
    [std(&p.x), std(&p.y), std(&q.x), std(&q.y)].concat()
}

/// Converts standard-form outputs back to Montgomery values.
pub fn outputs_to_mont(spec: &CurveSpec, out: &[Fp]) -> Vec<Fp> {
    out.iter().map(|x| spec.tower.fp.to_mont(x)).collect()
}
