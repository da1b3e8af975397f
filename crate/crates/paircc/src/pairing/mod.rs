//! Reference optimal-Ate pairing.
//!
//! The Miller loop here works on affine points of the untwisted curve over the
//! full extension field and evaluates chord/tangent lines directly, so it
//! shares no formulas with the compiled code path.

pub mod finalexp;
pub mod vectors;

use num_bigint::{BigInt, BigUint, RandBigInt};
use num_traits::{One, Signed, Zero};
use rand::Rng;
use thiserror::Error;

use crate::field::point::{jac_add, jac_dbl, Affine, Curve};
use crate::field::tower::LevelRing;
use crate::field::{CurveSpec, FieldError, Fp, TwistType};

pub use finalexp::{final_exp, final_exp_naive, FinalExpPlan};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PairingError {
    #[error("pairing input is the point at infinity")]
    Infinity,
    #[error("point is not on the expected curve")]
    NotOnCurve,
    #[error("final exponentiation of zero")]
    Zero,
    #[error("degenerate line: {0}")]
    DegenerateLine(&'static str),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Signed digits of the loop bound, most significant first. The leading digit
/// is always 1; binary expansion by default, non-adjacent form on request.
pub fn loop_digits(n: &BigInt, naf: bool) -> Vec<i8> {
    let mut m = n.magnitude().clone();
    let mut d = Vec::new();
    if naf {
        let four = BigUint::from(4u32);
        while !m.is_zero() {
            if m.bit(0) {
                let r = (&m % &four).to_u32_digits().first().copied().unwrap_or(0);
                if r == 1 {
                    d.push(1);
                    m -= 1u32;
                } else {
                    d.push(-1);
                    m += 1u32;
                }
            } else {
                d.push(0);
            }
            m >>= 1;
        }
    } else {
        for i in 0..m.bits() {
            d.push(m.bit(i) as i8);
        }
    }
    d.reverse();
    d
}

/// Number of doubling and addition steps the Miller loop performs.
pub fn step_counts(spec: &CurveSpec, naf: bool) -> (usize, usize) {
    let d = loop_digits(&spec.loop_bound(), naf);
    let adds = d[1..].iter().filter(|&&x| x != 0).count() + if spec.is_bn() { 2 } else { 0 };
    (d.len() - 1, adds)
}

/// Maps a twist point into E(F_{p^k}).
pub fn untwist(spec: &CurveSpec, q: &Affine) -> Affine {
    let t = &spec.tower;
    let top = t.top();
    let k = t.k();
    if q.inf {
        return Affine::infinity(k);
    }
    let mut ar = t.eval();
    let basis = |j: usize| {
        let mut v = vec![Fp::ZERO; k];
        v[t.sextic_position(j)] = t.fp.one();
        v
    };
    let (w2, w3) = (basis(2), basis(3));
    let (w2, w3) = match spec.twist {
        TwistType::D => (w2, w3),
        TwistType::M => (ar.inv(&w2), ar.inv(&w3)),
    };
    let x = ar.embed(&q.x, top);
    let y = ar.embed(&q.y, top);
    Affine::new(ar.mul(&x, &w2), ar.mul(&y, &w3))
}

/// Embeds a G1 point into E(F_{p^k}).
fn embed_g1(spec: &CurveSpec, p: &Affine) -> Affine {
    let top = spec.tower.top();
    let mut ar = spec.tower.eval();
    Affine::new(ar.embed(&p.x, top), ar.embed(&p.y, top))
}

fn full_curve(spec: &CurveSpec) -> Curve<'_> {
    let t = &spec.tower;
    let mut b = vec![Fp::ZERO; t.k()];
    b[0] = t.fp.from_big(&spec.b);
    Curve::new(t, t.top(), b)
}

/// Line through T and Q (tangent when Q is None) evaluated at P, all affine
/// over F_{p^k}; returns the value and the resulting point.
fn line_step(c: &Curve, t: &Affine, q: Option<&Affine>, p: &Affine) -> Result<(Vec<Fp>, Affine), PairingError> {
    let mut a = c.t.eval();
    let lam = match q {
        None => {
            if t.y.iter().all(Fp::is_zero) {
                return Err(PairingError::DegenerateLine("vertical tangent"));
            }
            let x2 = a.sqr(&t.x);
            let num = a.tpl(&x2);
            let den = a.dbl(&t.y);
            let den = a.inv(&den);
            a.mul(&num, &den)
        }
        Some(q) => {
            if q.x == t.x {
                return Err(PairingError::DegenerateLine("vertical chord"));
            }
            let num = a.sub(&q.y, &t.y);
            let den = a.sub(&q.x, &t.x);
            let den = a.inv(&den);
            a.mul(&num, &den)
        }
    };
    let dx = a.sub(&p.x, &t.x);
    let m = a.mul(&lam, &dx);
    let l = a.sub(&p.y, &t.y);
    let l = a.sub(&l, &m);
    let next = match q {
        None => c.dbl(t),
        Some(q) => c.add(t, q),
    };
    Ok((l, next))
}

fn check_inputs(spec: &CurveSpec, p: &Affine, q: &Affine) -> Result<(), PairingError> {
    if p.inf || q.inf {
        return Err(PairingError::Infinity);
    }
    if !spec.g1_curve().on_curve(p) || !spec.g2_curve().on_curve(q) {
        return Err(PairingError::NotOnCurve);
    }
    Ok(())
}

/// Miller loop of the optimal Ate pairing; returns the accumulated value.
pub fn miller_loop(spec: &CurveSpec, p: &Affine, q: &Affine, naf: bool) -> Result<Vec<Fp>, PairingError> {
    check_inputs(spec, p, q)?;
    let c = full_curve(spec);
    let pk = embed_g1(spec, p);
    let qk = untwist(spec, q);
    let nqk = c.neg(&qk);
    let mut a = spec.tower.eval();
    let top = spec.tower.top();
    let mut f = a.one(top);
    let mut t = qk.clone();
    let bound = spec.loop_bound();
    for &d in &loop_digits(&bound, naf)[1..] {
        let (l, next) = line_step(&c, &t, None, &pk)?;
        f = a.sqr(&f);
        f = a.mul(&f, &l);
        t = next;
        if d != 0 {
            let qq = if d > 0 { &qk } else { &nqk };
            let (l, next) = line_step(&c, &t, Some(qq), &pk)?;
            f = a.mul(&f, &l);
            t = next;
        }
    }
    if bound.is_negative() {
        f = a.conj(&f);
        t = c.neg(&t);
    }
    if spec.is_bn() {
        let q1 = frob_point(spec, &qk, 1);
        let q2 = c.neg(&frob_point(spec, &qk, 2));
        let (l, next) = line_step(&c, &t, Some(&q1), &pk)?;
        f = a.mul(&f, &l);
        let (l, _) = line_step(&c, &next, Some(&q2), &pk)?;
        f = a.mul(&f, &l);
    }
    Ok(f)
}

fn frob_point(spec: &CurveSpec, p: &Affine, i: usize) -> Affine {
    let mut a = spec.tower.eval();
    Affine::new(a.frob(&p.x, i), a.frob(&p.y, i))
}

/// Twisted Frobenius on a twist point: untwist ∘ π ∘ twist.
pub fn twist_frob(spec: &CurveSpec, q: &Affine, i: usize) -> Affine {
    let mut a = spec.tower.eval();
    let (cx, cy) = &spec.frob_twist;
    let mut x = q.x.clone();
    let mut y = q.y.clone();
    for _ in 0..i {
        x = a.frob(&x, 1);
        x = a.mul(&x, cx);
        y = a.frob(&y, 1);
        y = a.mul(&y, cy);
    }
    Affine::new(x, y)
}

pub fn optimal_ate(spec: &CurveSpec, p: &Affine, q: &Affine) -> Result<Vec<Fp>, PairingError> {
    let f = miller_loop(spec, p, q, false)?;
    final_exp(spec, &f)
}

/// Sparse line value: three twist-field coefficients at fixed positions of
/// F_{p^k}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LineEval {
    /// (flat offset, coefficient) in increasing offset order.
    pub terms: [(usize, Vec<Fp>); 3],
}

impl LineEval {
    /// Flat offsets of the three coefficients for the curve's twist type.
    pub fn pattern(spec: &CurveSpec) -> [usize; 3] {
        let t = &spec.tower;
        match spec.twist {
            TwistType::D => [t.sextic_position(0), t.sextic_position(1), t.sextic_position(3)],
            TwistType::M => [t.sextic_position(0), t.sextic_position(2), t.sextic_position(3)],
        }
    }

    /// Places the line coefficients (a, b, c) with P = (xP, yP) applied.
    pub fn place(spec: &CurveSpec, [la, lb, lc]: [Vec<Fp>; 3], xp: &Fp, yp: &Fp) -> LineEval {
        let mut a = spec.tower.eval();
        let ay = a.scale(&la, yp);
        let bx = a.scale(&lb, xp);
        let pos = Self::pattern(spec);
        let mut terms = match spec.twist {
            TwistType::D => [(pos[0], ay), (pos[1], bx), (pos[2], lc)],
            TwistType::M => [(pos[0], lc), (pos[1], bx), (pos[2], ay)],
        };
        terms.sort_by_key(|t| t.0);
        LineEval { terms }
    }

    pub fn densify(&self, k: usize) -> Vec<Fp> {
        let mut v = vec![Fp::ZERO; k];
        for (off, c) in &self.terms {
            v[*off..*off + c.len()].copy_from_slice(c);
        }
        v
    }
}

/// Fused Jacobian doubling or addition with its line evaluated at P.
/// `q` must be affine (Z = 1).
pub fn line_eval(spec: &CurveSpec, t: &[Vec<Fp>; 3], q: Option<&Affine>, p: &Affine) -> Result<([Vec<Fp>; 3], LineEval), PairingError> {
    if t[2].iter().all(Fp::is_zero) {
        return Err(PairingError::Infinity);
    }
    let tw = &spec.tower;
    let tl = tw.twist_level();
    let mut a = tw.eval();
    let out = {
        let mut r = LevelRing { a: &mut a, nr_level: tl + 1 };
        match q {
            None => jac_dbl(&mut r, t, true),
            Some(q) => {
                let c = spec.g2_curve();
                let ta = c.from_jac(&crate::field::point::Jac { x: t[0].clone(), y: t[1].clone(), z: t[2].clone() });
                if ta.x == q.x {
                    return Err(PairingError::DegenerateLine("chord through ±T"));
                }
                let one = r.a.one(tl);
                jac_add(&mut r, t, &[q.x.clone(), q.y.clone(), one], true)
            }
        }
    };
    let line = out.line.expect("line requested");
    Ok((out.point, LineEval::place(spec, line, &p.x[0], &p.y[0])))
}

pub fn random_scalar<R: Rng + ?Sized>(rng: &mut R, r: &BigUint) -> BigUint {
    rng.gen_biguint_range(&BigUint::one(), r)
}

/// Random pair (P, Q) = ([a]G1, [b]G2).
pub fn random_pair<R: Rng + ?Sized>(spec: &CurveSpec, rng: &mut R) -> (Affine, Affine) {
    let a = random_scalar(rng, &spec.r);
    let b = random_scalar(rng, &spec.r);
    (spec.g1_curve().mul(&spec.g1, &a), spec.g2_curve().mul(&spec.g2, &b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bn() -> CurveSpec {
        CurveSpec::shipped("bn254").unwrap()
    }

    #[test]
    fn naf_and_binary_digits_encode_the_same_value() {
        for v in [1i64, 2, 7, 29, 1000, -37, 0x1234567] {
            for naf in [false, true] {
                let d = loop_digits(&BigInt::from(v), naf);
                assert_eq!(d[0], 1);
                let s = d.iter().fold(0i64, |acc, &x| 2 * acc + x as i64);
                assert_eq!(s, v.abs());
            }
        }
    }

    #[test]
    fn untwisted_generator_is_on_the_full_curve() {
        let s = bn();
        let c = full_curve(&s);
        assert!(c.on_curve(&untwist(&s, &s.g2)));
        let q1 = twist_frob(&s, &s.g2, 1);
        assert_eq!(untwist(&s, &q1), frob_point(&s, &untwist(&s, &s.g2), 1));
    }

    #[test]
    fn bilinear_and_in_target_group() {
        let s = bn();
        let e = optimal_ate(&s, &s.g1, &s.g2).unwrap();
        let mut a = s.tower.eval();
        let top = s.tower.top();
        assert_ne!(e, a.one(top));
        assert_eq!(a.pow(&e, &s.r), a.one(top));
        let p2 = s.g1_curve().mul(&s.g1, &BigUint::from(2u32));
        let q3 = s.g2_curve().mul(&s.g2, &BigUint::from(3u32));
        let e6 = optimal_ate(&s, &p2, &q3).unwrap();
        assert_eq!(e6, a.pow(&e, &BigUint::from(6u32)));
    }

    #[test]
    fn miller_value_varies_with_p() {
        let s = bn();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (p1, q) = random_pair(&s, &mut rng);
        let (p2, _) = random_pair(&s, &mut rng);
        assert_ne!(miller_loop(&s, &p1, &q, false).unwrap(), miller_loop(&s, &p2, &q, false).unwrap());
    }

    #[test]
    fn naf_loop_agrees_after_final_exponentiation() {
        let s = bn();
        let f0 = miller_loop(&s, &s.g1, &s.g2, false).unwrap();
        let f1 = miller_loop(&s, &s.g1, &s.g2, true).unwrap();
        assert_eq!(final_exp(&s, &f0).unwrap(), final_exp(&s, &f1).unwrap());
    }

    #[test]
    fn all_curves_bilinear_and_chain_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for id in crate::field::curve::SHIPPED {
            let s = CurveSpec::shipped(id).unwrap();
            let (p, q) = random_pair(&s, &mut rng);
            let e = optimal_ate(&s, &p, &q).unwrap();
            let f = miller_loop(&s, &p, &q, false).unwrap();
            assert_eq!(e, final_exp_naive(&s, &f).unwrap(), "{id}");
            let a = random_scalar(&mut rng, &s.r);
            let b = random_scalar(&mut rng, &s.r);
            let pa = s.g1_curve().mul(&p, &a);
            let qb = s.g2_curve().mul(&q, &b);
            let mut ar = s.tower.eval();
            assert_eq!(optimal_ate(&s, &pa, &qb).unwrap(), ar.pow(&e, &(a * b)), "{id}");
        }
    }

    #[test]
    fn rejects_infinity() {
        let s = bn();
        let inf = Affine::infinity(1);
        assert_eq!(optimal_ate(&s, &inf, &s.g2), Err(PairingError::Infinity));
    }

    #[test]
    fn line_is_sparse_and_fused_point_matches() {
        let s = bn();
        let c2 = s.g2_curve();
        let t = c2.to_jac(&s.g2);
        let (t2, l) = line_eval(&s, &[t.x.clone(), t.y.clone(), t.z.clone()], None, &s.g1).unwrap();
        let dense = l.densify(s.k);
        let nz = dense.chunks(s.q_deg()).filter(|c| c.iter().any(|x| !x.is_zero())).count();
        assert_eq!(nz, 3);
        let t2 = crate::field::point::Jac { x: t2[0].clone(), y: t2[1].clone(), z: t2[2].clone() };
        assert_eq!(c2.from_jac(&t2), c2.dbl(&s.g2));
        // the fused line differs from the affine one by a subfield factor
        let (lref, _) = line_step(&full_curve(&s), &untwist(&s, &s.g2), None, &embed_g1(&s, &s.g1)).unwrap();
        assert_eq!(final_exp(&s, &dense).unwrap(), final_exp(&s, &lref).unwrap());
    }
}
