//! Optimal-Ate pairing as a single unrolled block of high-level ops.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use super::{Imm, Op, Opcode, Program, Ty, ValueId};
use crate::field::CurveSpec;
use crate::pairing::finalexp::GtOps;
use crate::pairing::{loop_digits, FinalExpPlan};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodegenOptions {
    /// Encode the loop bound in non-adjacent form.
    pub naf: bool,
}

struct Gen {
    p: Program,
    gt: Ty,
}

impl Gen {
    fn op(&mut self, opcode: Opcode, ty: Ty, args: &[ValueId], imm: Imm) -> ValueId {
        self.p.push(Op::new(opcode, ty, args, imm))
    }
}

fn exp_imm(e: &BigInt) -> Imm {
    match e.to_i64() {
        Some(v) => Imm::Int(v),
        None => Imm::Big(e.clone()),
    }
}

impl GtOps for Gen {
    type E = ValueId;
    fn mul(&mut self, a: &ValueId, b: &ValueId) -> ValueId {
        self.op(Opcode::Mul, self.gt, &[*a, *b], Imm::None)
    }
    fn csqr(&mut self, a: &ValueId) -> ValueId {
        self.op(Opcode::Csqr, self.gt, &[*a], Imm::None)
    }
    fn conj(&mut self, a: &ValueId) -> ValueId {
        self.op(Opcode::Conj, self.gt, &[*a], Imm::None)
    }
    fn inv(&mut self, a: &ValueId) -> ValueId {
        self.op(Opcode::Inv, self.gt, &[*a], Imm::None)
    }
    fn frob(&mut self, a: &ValueId, i: usize) -> ValueId {
        self.op(Opcode::Frob, self.gt, &[*a], Imm::Int(i as i64))
    }
    fn cexp(&mut self, a: &ValueId, e: &BigInt) -> ValueId {
        self.op(Opcode::Cexp, self.gt, &[*a], exp_imm(e))
    }
}

/// Builds the highest-level program computing e(P, Q).
///
/// Inputs are the affine coordinates of P (2 values) followed by those of Q
/// (2·q values), in standard form; the output is the pairing value, also in
/// standard form.
pub fn codegen(spec: &CurveSpec, opts: CodegenOptions) -> Program {
    let k = spec.k;
    let q = spec.q_deg();
    let gt = Ty::Fpd(k as u16);
    let tq = Ty::point(q);
    let mut g = Gen { p: Program::new(&spec.id), gt };

    let p_in = g.op(Opcode::Input, Ty::Ep, &[], Imm::Int(0));
    let q_in = g.op(Opcode::Input, tq, &[], Imm::Int(2));
    let pp = g.op(Opcode::Cvt, Ty::Ep, &[p_in], Imm::None);
    let qq = g.op(Opcode::Cvt, tq, &[q_in], Imm::None);

    let bound = spec.loop_bound();
    let digits = loop_digits(&bound, opts.naf);
    let nq = digits.contains(&-1).then(|| g.op(Opcode::Neg, tq, &[qq], Imm::None));

    let mut t = qq;
    let mut f: Option<ValueId> = None;
    for &d in &digits[1..] {
        let l = g.op(Opcode::Ldbl, gt, &[t, pp], Imm::None);
        f = Some(match f {
            None => l,
            Some(f) => {
                let s = g.op(Opcode::Sqr, gt, &[f], Imm::None);
                g.mul(&s, &l)
            }
        });
        t = g.op(Opcode::Pdbl, tq, &[t], Imm::None);
        if d != 0 {
            let qd = if d > 0 { qq } else { nq.expect("negative digit") };
            let l = g.op(Opcode::Ladd, gt, &[t, qd, pp], Imm::None);
            f = Some(g.mul(&f.unwrap(), &l));
            t = g.op(Opcode::Padd, tq, &[t, qd], Imm::None);
        }
    }
    let mut f = f.expect("loop bound above one");
    if bound.is_negative() {
        f = g.conj(&f);
        if spec.is_bn() {
            t = g.op(Opcode::Neg, tq, &[t], Imm::None);
        }
    }
    if spec.is_bn() {
        let q1 = g.op(Opcode::Frob, tq, &[qq], Imm::Int(1));
        let q2 = g.op(Opcode::Frob, tq, &[qq], Imm::Int(2));
        let q2 = g.op(Opcode::Neg, tq, &[q2], Imm::None);
        let l = g.op(Opcode::Ladd, gt, &[t, q1, pp], Imm::None);
        f = g.mul(&f, &l);
        let t1 = g.op(Opcode::Padd, tq, &[t, q1], Imm::None);
        let l = g.op(Opcode::Ladd, gt, &[t1, q2, pp], Imm::None);
        f = g.mul(&f, &l);
    }

    let plan = FinalExpPlan::new(spec);
    let r = plan.apply(&mut g, &f);
    let out = g.op(Opcode::Icv, gt, &[r], Imm::None);
    g.p.outputs = vec![out];
    g.p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::check::check;
    use crate::ir::exec::{evaluate, outputs_to_mont, pair_inputs};
    use crate::pairing::{optimal_ate, random_pair, step_counts};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn structure_and_oracle_agreement() {
        for id in ["bn254", "bls12_381"] {
            let s = CurveSpec::shipped(id).unwrap();
            let prog = codegen(&s, CodegenOptions::default());
            check(&prog, &s.tower).unwrap();
            let h = prog.opcode_histogram();
            let (dbls, adds) = step_counts(&s, false);
            assert_eq!(h[&Opcode::Ldbl], dbls);
            assert_eq!(h[&Opcode::Ladd], adds);
            let frob_pts = prog.ops.iter().filter(|o| o.opcode == Opcode::Frob && o.ty.is_point()).count();
            assert_eq!(frob_pts, if s.is_bn() { 2 } else { 0 });
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            let (p, q) = random_pair(&s, &mut rng);
            let out = evaluate(&prog, &s, s.tower.default_selection(), &pair_inputs(&s, &p, &q)).unwrap();
            assert_eq!(outputs_to_mont(&s, &out), optimal_ate(&s, &p, &q).unwrap(), "{id}");
        }
    }

    #[test]
    fn naf_program_agrees() {
        let s = CurveSpec::shipped("bn254").unwrap();
        let prog = codegen(&s, CodegenOptions { naf: true });
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (p, q) = random_pair(&s, &mut rng);
        let out = evaluate(&prog, &s, s.tower.default_selection(), &pair_inputs(&s, &p, &q)).unwrap();
        assert_eq!(outputs_to_mont(&s, &out), optimal_ate(&s, &p, &q).unwrap());
    }
}
