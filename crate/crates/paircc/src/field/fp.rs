use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::Rng;

use super::FieldError;

/// Upper bound on limb count; 10 × 64 bits covers the 638-bit curves.
pub const MAX_LIMBS: usize = 10;

/// Raw limb vector of a prime-field element.
///
/// The same bits mean different things depending on the representation the
/// caller is tracking: inside the toolchain every arithmetic value is kept in
/// Montgomery form, while program inputs and outputs are standard integers.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Fp(pub [u64; MAX_LIMBS]);

impl Fp {
    pub const ZERO: Fp = Fp([0; MAX_LIMBS]);

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&l| l == 0)
    }

    pub fn from_u64(v: u64) -> Fp {
        let mut l = [0; MAX_LIMBS];
        l[0] = v;
        Fp(l)
    }

    /// The raw limbs as an integer, without any field interpretation.
    pub fn raw_big(&self) -> BigUint {
        limbs_to_big(&self.0)
    }

    /// Inverse of [`Fp::raw_big`]; `None` if the value needs more limbs.
    pub fn from_raw_big(v: &BigUint) -> Option<Fp> {
        if v.bits() > 64 * MAX_LIMBS as u64 {
            return None;
        }
        Some(Fp(big_to_limbs(v)))
    }
}

impl fmt::Debug for Fp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Fp(0x{})", limbs_to_big(&self.0).to_str_radix(16))
    }
}

/// Which interpretation a raw value carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Repr {
    Standard,
    Montgomery,
}

pub(crate) fn limbs_to_big(l: &[u64]) -> BigUint {
    let mut bytes = Vec::with_capacity(l.len() * 8);
    for limb in l {
        bytes.extend_from_slice(&limb.to_le_bytes());
    }
    BigUint::from_bytes_le(&bytes)
}

fn big_to_limbs(v: &BigUint) -> [u64; MAX_LIMBS] {
    let mut out = [0u64; MAX_LIMBS];
    for (i, d) in v.iter_u64_digits().enumerate() {
        out[i] = d;
    }
    out
}

/// A prime field with Montgomery arithmetic, R = 2^(64·n).
#[derive(Clone)]
pub struct PrimeField {
    p: BigUint,
    m: [u64; MAX_LIMBS],
    n: usize,
    minv: u64,
    r2: Fp,
    one: Fp,
    bits: u64,
}

impl fmt::Debug for PrimeField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PrimeField({} bits)", self.bits)
    }
}

impl PrimeField {
    pub fn new(p: &BigUint) -> Result<Self, FieldError> {
        if p < &BigUint::from(3u32) || !p.bit(0) || !is_probable_prime(p) {
            return Err(FieldError::BadModulus(p.to_str_radix(16)));
        }
        let bits = p.bits();
        let n = bits.div_ceil(64) as usize;
        if n > MAX_LIMBS {
            return Err(FieldError::BadModulus(format!("{bits}-bit modulus too wide")));
        }
        let m = big_to_limbs(p);
        // -p^{-1} mod 2^64 by Newton iteration
        let mut inv: u64 = 1;
        for _ in 0..6 {
            inv = inv.wrapping_mul(2u64.wrapping_sub(m[0].wrapping_mul(inv)));
        }
        let r = BigUint::one() << (64 * n);
        let one = Fp(big_to_limbs(&(&r % p)));
        let r2 = Fp(big_to_limbs(&((&r * &r) % p)));
        Ok(PrimeField { p: p.clone(), m, n, minv: inv.wrapping_neg(), r2, one, bits })
    }

    pub fn modulus(&self) -> &BigUint {
        &self.p
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn limbs(&self) -> usize {
        self.n
    }

    /// Montgomery one, i.e. R mod p.
    pub fn one(&self) -> Fp {
        self.one
    }

    pub fn zero(&self) -> Fp {
        Fp::ZERO
    }

    /// Standard integer into Montgomery form (reduced mod p first).
    pub fn from_big(&self, v: &BigUint) -> Fp {
        self.to_mont(&self.raw(v))
    }

    pub fn from_i64(&self, v: i64) -> Fp {
        let a = self.from_big(&BigUint::from(v.unsigned_abs()));
        if v < 0 {
            self.neg(&a)
        } else {
            a
        }
    }

    /// Montgomery form back to a standard integer.
    pub fn to_big(&self, a: &Fp) -> BigUint {
        limbs_to_big(&self.from_mont(a).0[..self.n])
    }

    /// Standard integer as raw limbs without conversion.
    pub fn raw(&self, v: &BigUint) -> Fp {
        Fp(big_to_limbs(&(v % &self.p)))
    }

    pub fn raw_to_big(&self, a: &Fp) -> BigUint {
        limbs_to_big(&a.0[..self.n])
    }

    pub fn to_mont(&self, a: &Fp) -> Fp {
        self.mul(a, &self.r2)
    }

    pub fn from_mont(&self, a: &Fp) -> Fp {
        self.mul(a, &Fp::from_u64(1))
    }

    pub fn convert(&self, a: &Fp, to: Repr) -> Fp {
        match to {
            Repr::Montgomery => self.to_mont(a),
            Repr::Standard => self.from_mont(a),
        }
    }

    fn geq_mod(&self, a: &[u64; MAX_LIMBS]) -> bool {
        for i in (0..self.n).rev() {
            if a[i] != self.m[i] {
                return a[i] > self.m[i];
            }
        }
        true
    }

    fn sub_mod_in_place(&self, a: &mut [u64; MAX_LIMBS]) {
        let mut borrow = 0u64;
        for i in 0..self.n {
            let (d, b1) = a[i].overflowing_sub(self.m[i]);
            let (d, b2) = d.overflowing_sub(borrow);
            a[i] = d;
            borrow = (b1 | b2) as u64;
        }
    }

    pub fn add(&self, a: &Fp, b: &Fp) -> Fp {
        let mut r = [0u64; MAX_LIMBS];
        let mut carry = 0u64;
        for i in 0..self.n {
            let s = a.0[i] as u128 + b.0[i] as u128 + carry as u128;
            r[i] = s as u64;
            carry = (s >> 64) as u64;
        }
        if carry != 0 || self.geq_mod(&r) {
            self.sub_mod_in_place(&mut r);
        }
        Fp(r)
    }

    pub fn sub(&self, a: &Fp, b: &Fp) -> Fp {
        let mut r = [0u64; MAX_LIMBS];
        let mut borrow = 0u64;
        for i in 0..self.n {
            let (d, b1) = a.0[i].overflowing_sub(b.0[i]);
            let (d, b2) = d.overflowing_sub(borrow);
            r[i] = d;
            borrow = (b1 | b2) as u64;
        }
        if borrow != 0 {
            let mut carry = 0u64;
            for i in 0..self.n {
                let s = r[i] as u128 + self.m[i] as u128 + carry as u128;
                r[i] = s as u64;
                carry = (s >> 64) as u64;
            }
        }
        Fp(r)
    }

    pub fn neg(&self, a: &Fp) -> Fp {
        self.sub(&Fp::ZERO, a)
    }

    pub fn dbl(&self, a: &Fp) -> Fp {
        self.add(a, a)
    }

    pub fn tpl(&self, a: &Fp) -> Fp {
        self.add(&self.add(a, a), a)
    }

    /// Montgomery product a·b·R⁻¹ mod p (CIOS).
    pub fn mul(&self, a: &Fp, b: &Fp) -> Fp {
        let n = self.n;
        let mut t = [0u64; MAX_LIMBS + 2];
        for i in 0..n {
            let mut c: u128 = 0;
            let ai = a.0[i] as u128;
            for j in 0..n {
                let s = t[j] as u128 + ai * b.0[j] as u128 + c;
                t[j] = s as u64;
                c = s >> 64;
            }
            let s = t[n] as u128 + c;
            t[n] = s as u64;
            t[n + 1] = (s >> 64) as u64;
            let m = t[0].wrapping_mul(self.minv) as u128;
            let s = t[0] as u128 + m * self.m[0] as u128;
            let mut c = s >> 64;
            for j in 1..n {
                let s = t[j] as u128 + m * self.m[j] as u128 + c;
                t[j - 1] = s as u64;
                c = s >> 64;
            }
            let s = t[n] as u128 + c;
            t[n - 1] = s as u64;
            t[n] = t[n + 1] + (s >> 64) as u64;
        }
        let mut r = [0u64; MAX_LIMBS];
        r[..n].copy_from_slice(&t[..n]);
        if t[n] != 0 || self.geq_mod(&r) {
            self.sub_mod_in_place(&mut r);
        }
        Fp(r)
    }

    pub fn sqr(&self, a: &Fp) -> Fp {
        self.mul(a, a)
    }

    pub fn pow(&self, a: &Fp, e: &BigUint) -> Fp {
        let mut r = self.one;
        for i in (0..e.bits()).rev() {
            r = self.sqr(&r);
            if e.bit(i) {
                r = self.mul(&r, a);
            }
        }
        r
    }

    pub fn inv(&self, a: &Fp) -> Result<Fp, FieldError> {
        if a.is_zero() {
            return Err(FieldError::InverseOfZero);
        }
        Ok(self.pow(a, &(&self.p - 2u32)))
    }

    pub fn is_square(&self, a: &Fp) -> bool {
        a.is_zero() || self.pow(a, &((&self.p - 1u32) >> 1)) == self.one
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> Fp {
        loop {
            let mut l = [0u64; MAX_LIMBS];
            for limb in l.iter_mut().take(self.n) {
                *limb = rng.gen();
            }
            let top = self.bits % 64;
            if top != 0 {
                l[self.n - 1] &= (1u64 << top) - 1;
            }
            if !self.geq_mod(&l) {
                return Fp(l);
            }
        }
    }
}

/// Miller–Rabin with fixed small-prime bases; adequate for validating shipped parameters.
pub fn is_probable_prime(n: &BigUint) -> bool {
    const BASES: [u32; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < &BigUint::from(2u32) {
        return false;
    }
    for b in BASES {
        let b = BigUint::from(b);
        if *n == b {
            return true;
        }
        if (n % &b).is_zero() {
            return false;
        }
    }
    let one = BigUint::one();
    let nm1 = n - &one;
    let s = nm1.trailing_zeros().unwrap_or(0);
    let d = &nm1 >> s;
    'outer: for b in BASES {
        let mut x = BigUint::from(b).modpow(&d, n);
        if x == one || x == nm1 {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&BigUint::from(2u32), n);
            if x == nm1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bn254() -> PrimeField {
        let p = BigUint::parse_bytes(
            b"2523648240000001ba344d80000000086121000000000013a700000000000013",
            16,
        )
        .unwrap();
        PrimeField::new(&p).unwrap()
    }

    #[test]
    fn toy_modulus_tables() {
        let f = PrimeField::new(&BigUint::from(13u32)).unwrap();
        for a in 0..13u32 {
            for b in 0..13u32 {
                let x = f.from_big(&a.into());
                let y = f.from_big(&b.into());
                assert_eq!(f.to_big(&f.mul(&x, &y)), BigUint::from(a * b % 13));
                assert_eq!(f.to_big(&f.add(&x, &y)), BigUint::from((a + b) % 13));
                assert_eq!(f.to_big(&f.sub(&x, &y)), BigUint::from((13 + a - b) % 13));
            }
        }
        let five = f.from_big(&5u32.into());
        let eight = f.from_big(&8u32.into());
        assert_eq!(f.to_big(&f.mul(&five, &eight)), BigUint::one());
    }

    #[test]
    fn rejects_bad_moduli() {
        assert!(PrimeField::new(&BigUint::from(15u32)).is_err());
        assert!(PrimeField::new(&BigUint::from(16u32)).is_err());
        assert!(PrimeField::new(&BigUint::from(2u32)).is_err());
    }

    #[test]
    fn inverse_of_zero_is_an_error() {
        let f = bn254();
        assert!(matches!(f.inv(&Fp::ZERO), Err(FieldError::InverseOfZero)));
        assert_eq!(f.inv(&f.one()).unwrap(), f.one());
    }

    #[test]
    fn montgomery_round_trip_and_r() {
        let f = bn254();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let a = f.random(&mut rng);
            assert_eq!(f.from_mont(&f.to_mont(&a)), a);
        }
        assert_eq!(f.from_mont(&f.to_mont(&Fp::ZERO)), Fp::ZERO);
        let r = BigUint::one() << 256;
        assert_eq!(f.raw_to_big(&f.to_mont(&Fp::from_u64(1))), r % f.modulus());
    }

    #[test]
    fn agrees_with_bigint_arithmetic() {
        let f = bn254();
        let p = f.modulus().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let a = f.random(&mut rng);
            let b = f.random(&mut rng);
            let (ab, bb) = (f.to_big(&a), f.to_big(&b));
            assert_eq!(f.to_big(&f.mul(&a, &b)), (&ab * &bb) % &p);
            assert_eq!(f.to_big(&f.add(&a, &b)), (&ab + &bb) % &p);
            assert_eq!(f.to_big(&f.sub(&a, &b)), (&ab + &p - &bb) % &p);
            assert_eq!(f.to_big(&f.tpl(&a)), (&ab * 3u32) % &p);
            assert_eq!(f.add(&a, &Fp::ZERO), a);
            if !a.is_zero() {
                assert_eq!(f.mul(&a, &f.inv(&a).unwrap()), f.one());
            }
        }
    }
}
