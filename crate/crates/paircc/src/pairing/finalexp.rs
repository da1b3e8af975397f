//! Final exponentiation: easy part by conjugation, inversion and Frobenius,
//! hard part by per-family chains in powers of u.
//!
//! BN (k = 12), hard exponent (p⁴ − p² + 1)/r written as λ₀ + λ₁p + λ₂p² + λ₃p³
//! with fu = f^u, fu2 = fu^u, fu3 = fu2^u:
//!
//! ```text
//! y0 = f^p · f^p² · f^p³     y1 = conj(f)         y2 = frob(fu2, 2)
//! y3 = conj(frob(fu, 1))     y4 = conj(fu · frob(fu2, 1))
//! y5 = conj(fu2)             y6 = conj(fu3 · frob(fu3, 1))
//! T0 = y6² · y4 · y5;  T1 = y3 · y5 · T0;  T0 = T0 · y2;  T1 = (T1² · T0)²
//! result = (T1 · y1)² · (T1 · y0)
//! ```
//!
//! BLS12, with v = (u − 1)²/3 the hard exponent is v·(u + p)(u² + p² − 1) + 1;
//! BLS24 uses v·(u + p)(u² + p²)(u⁴ + p⁴ − 1) + 1.

use num_bigint::{BigInt, BigUint};
use num_traits::One;

use super::PairingError;
use crate::field::backend::FpBackend;
use crate::field::tower::{Arith, El};
use crate::field::{CurveSpec, Family, Fp};

/// Target-group operations the chains are written against; implemented by
/// tower arithmetic and by the IR code generator.
pub trait GtOps {
    type E: Clone;
    fn mul(&mut self, a: &Self::E, b: &Self::E) -> Self::E;
    fn csqr(&mut self, a: &Self::E) -> Self::E;
    fn conj(&mut self, a: &Self::E) -> Self::E;
    fn inv(&mut self, a: &Self::E) -> Self::E;
    fn frob(&mut self, a: &Self::E, i: usize) -> Self::E;
    fn cexp(&mut self, a: &Self::E, e: &BigInt) -> Self::E;
}

impl<B: FpBackend> GtOps for Arith<'_, B> {
    type E = El<B>;
    fn mul(&mut self, a: &El<B>, b: &El<B>) -> El<B> {
        Arith::mul(self, a, b)
    }
    fn csqr(&mut self, a: &El<B>) -> El<B> {
        Arith::csqr(self, a)
    }
    fn conj(&mut self, a: &El<B>) -> El<B> {
        Arith::conj(self, a)
    }
    fn inv(&mut self, a: &El<B>) -> El<B> {
        Arith::inv(self, a)
    }
    fn frob(&mut self, a: &El<B>, i: usize) -> El<B> {
        Arith::frob(self, a, i)
    }
    fn cexp(&mut self, a: &El<B>, e: &BigInt) -> El<B> {
        Arith::cexp(self, a, e)
    }
}

/// Exponents used by the hard part of one curve.
#[derive(Clone, Debug)]
pub struct FinalExpPlan {
    pub family: Family,
    pub u: BigInt,
    /// (u − 1)/3 and u − 1 for the BLS families.
    pub v_parts: (BigInt, BigInt),
}

impl FinalExpPlan {
    pub fn new(spec: &CurveSpec) -> Self {
        let um1 = &spec.u - 1;
        FinalExpPlan { family: spec.family, u: spec.u.clone(), v_parts: (&um1 / 3, um1) }
    }

    /// The exponent the chain realizes, as a multiple of (p^k − 1)/r.
    pub fn hard_exponent(&self, p: &BigUint) -> BigInt {
        let p = BigInt::from(p.clone());
        let u = &self.u;
        match self.family {
            Family::Bn => {
                let l3 = BigInt::one();
                let l2 = 6 * u * u + 1;
                let l1 = -36 * u * u * u - 18 * u * u - 12 * u + 1;
                let l0 = -36 * u * u * u - 30 * u * u - 18 * u - 2;
                l0 + l1 * &p + l2 * &p * &p + l3 * &p * &p * &p
            }
            Family::Bls12 => {
                let v = &self.v_parts.0 * &self.v_parts.1;
                v * (u + &p) * (u * u + &p * &p - 1) + 1
            }
            Family::Bls24 => {
                let v = &self.v_parts.0 * &self.v_parts.1;
                let p2 = &p * &p;
                let u2 = u * u;
                v * (u + &p) * (&u2 + &p2) * (&u2 * &u2 + &p2 * &p2 - 1) + 1
            }
        }
    }

    /// Runs the chain over any backend; `f` must be nonzero.
    pub fn apply<G: GtOps>(&self, a: &mut G, f: &G::E) -> G::E {
        let half = if self.family == Family::Bls24 { 12 } else { 6 };
        let easy = {
            let c = a.conj(f);
            let i = a.inv(f);
            let f1 = a.mul(&c, &i);
            let g = a.frob(&f1, half / 3);
            a.mul(&g, &f1)
        };
        match self.family {
            Family::Bn => self.bn_hard(a, &easy),
            Family::Bls12 => self.bls_hard(a, &easy, 1),
            Family::Bls24 => self.bls_hard(a, &easy, 2),
        }
    }

    fn bn_hard<G: GtOps>(&self, a: &mut G, f: &G::E) -> G::E {
        let u = &self.u;
        let fu = a.cexp(f, u);
        let fu2 = a.cexp(&fu, u);
        let fu3 = a.cexp(&fu2, u);
        let y0 = {
            let f1 = a.frob(f, 1);
            let f2 = a.frob(f, 2);
            let f3 = a.frob(f, 3);
            let x = a.mul(&f1, &f2);
            a.mul(&x, &f3)
        };
        let y1 = a.conj(f);
        let y2 = a.frob(&fu2, 2);
        let y3 = {
            let x = a.frob(&fu, 1);
            a.conj(&x)
        };
        let y4 = {
            let x = a.frob(&fu2, 1);
            let x = a.mul(&fu, &x);
            a.conj(&x)
        };
        let y5 = a.conj(&fu2);
        let y6 = {
            let x = a.frob(&fu3, 1);
            let x = a.mul(&fu3, &x);
            a.conj(&x)
        };
        let t0 = a.csqr(&y6);
        let t0 = a.mul(&t0, &y4);
        let t0 = a.mul(&t0, &y5);
        let t1 = a.mul(&y3, &y5);
        let t1 = a.mul(&t1, &t0);
        let t0 = a.mul(&t0, &y2);
        let t1 = a.csqr(&t1);
        let t1 = a.mul(&t1, &t0);
        let t1 = a.csqr(&t1);
        let t0 = a.mul(&t1, &y1);
        let t1 = a.mul(&t1, &y0);
        let t0 = a.csqr(&t0);
        a.mul(&t0, &t1)
    }

    /// `steps` is 1 for BLS12 and 2 for BLS24: the number of (u^{2^j} + p^{2^j})
    /// factors before the closing (u^m + p^m − 1) factor.
    fn bls_hard<G: GtOps>(&self, a: &mut G, f: &G::E, steps: u32) -> G::E {
        let u = &self.u;
        let x = a.cexp(f, &self.v_parts.0);
        let mut x = a.cexp(&x, &self.v_parts.1);
        // x ← x^(u + p), then x ← x^(u² + p²), ...
        for j in 0..steps {
            let m = 1usize << j;
            let mut y = x.clone();
            for _ in 0..m {
                y = a.cexp(&y, u);
            }
            let z = a.frob(&x, m);
            x = a.mul(&y, &z);
        }
        let m = 1usize << steps;
        let mut y = x.clone();
        for _ in 0..m {
            y = a.cexp(&y, u);
        }
        let z = a.frob(&x, m);
        let y = a.mul(&y, &z);
        let c = a.conj(&x);
        let y = a.mul(&y, &c);
        a.mul(&y, f)
    }
}

/// f^((p^k − 1)/r) through the chain, with the same values as the naive power.
pub fn final_exp(spec: &CurveSpec, f: &[Fp]) -> Result<Vec<Fp>, PairingError> {
    if f.iter().all(Fp::is_zero) {
        return Err(PairingError::Zero);
    }
    let plan = FinalExpPlan::new(spec);
    let mut a = spec.tower.eval();
    let out = plan.apply(&mut a, &f.to_vec());
    match a.b.error {
        Some(e) => Err(e.into()),
        None => Ok(out),
    }
}

/// Square-and-multiply by the full exponent.
pub fn final_exp_naive(spec: &CurveSpec, f: &[Fp]) -> Result<Vec<Fp>, PairingError> {
    if f.iter().all(Fp::is_zero) {
        return Err(PairingError::Zero);
    }
    let mut a = spec.tower.eval();
    Ok(a.pow(f, &spec.final_exponent()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_integer::Integer;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_el(spec: &CurveSpec, rng: &mut ChaCha8Rng) -> Vec<Fp> {
        (0..spec.k).map(|_| spec.fp().random(rng)).collect()
    }

    #[test]
    fn hard_exponents_are_exact() {
        for id in ["bn254", "bls12_381"] {
            let s = CurveSpec::shipped(id).unwrap();
            let plan = FinalExpPlan::new(&s);
            let p = BigInt::from(s.p.clone());
            let r = BigInt::from(s.r.clone());
            let base: BigInt = if s.k == 12 { p.pow(4u32) - p.pow(2u32) + 1 } else { p.pow(8u32) - p.pow(4u32) + 1 };
            let (q, rem) = base.div_rem(&r);
            assert_eq!(rem, BigInt::from(0));
            let h = plan.hard_exponent(&s.p);
            let (m, rem) = h.div_rem(&q);
            assert_eq!(rem, BigInt::from(0), "{id}");
            assert_eq!(m, BigInt::one(), "{id}");
        }
    }

    #[test]
    fn chain_matches_naive_bn254() {
        let s = CurveSpec::shipped("bn254").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..3 {
            let f = random_el(&s, &mut rng);
            assert_eq!(final_exp(&s, &f).unwrap(), final_exp_naive(&s, &f).unwrap());
        }
    }

    #[test]
    fn identity_and_zero() {
        let s = CurveSpec::shipped("bn254").unwrap();
        let mut a = s.tower.eval();
        let one = a.one(s.tower.top());
        assert_eq!(final_exp(&s, &one).unwrap(), one);
        assert_eq!(final_exp(&s, &vec![Fp::ZERO; 12]), Err(PairingError::Zero));
    }

    #[test]
    fn cyclotomic_squaring_matches_generic() {
        let s = CurveSpec::shipped("bn254").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = random_el(&s, &mut rng);
        let mut a = s.tower.eval();
        let c = a.conj(&f);
        let i = a.inv(&f);
        let g = a.mul(&c, &i);
        let h = a.frob(&g, 2);
        let g = a.mul(&h, &g);
        assert_eq!(a.csqr(&g), a.sqr(&g));
    }
}
