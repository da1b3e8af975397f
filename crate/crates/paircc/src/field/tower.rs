//! Extension-field tower along the divisor chain of the embedding degree.
//!
//! Elements are flat vectors of prime-field coefficients. A level-`l` element
//! is `ext(l)` consecutive chunks of level `l-1`, so the layout is recursive
//! and any subfield element occupies the leading coefficients.

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::backend::{Eval, FpBackend};
use super::fp::{Fp, PrimeField};
use super::ring::Ring;
use super::variants::{self, OpKind, Variant};
use super::FieldError;

/// Coordinate system used for points on the twist.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Coords {
    Jacobian,
    Projective,
}

impl std::fmt::Display for Coords {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Coords::Jacobian => "jacobian",
            Coords::Projective => "projective",
        })
    }
}

impl std::str::FromStr for Coords {
    type Err = FieldError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "jacobian" | "jac" => Ok(Coords::Jacobian),
            "projective" | "proj" | "homogeneous" => Ok(Coords::Projective),
            _ => Err(FieldError::UnknownVariant(s.to_string())),
        }
    }
}

/// Variant choice per tower level (index 0 is the first extension above Fp).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Selection {
    pub mul: Vec<Variant>,
    pub sqr: Vec<Variant>,
    pub coords: Coords,
}

impl Selection {
    pub fn schoolbook(t: &Tower) -> Self {
        let n = t.levels.len();
        Selection { mul: vec![Variant::Schoolbook; n], sqr: vec![Variant::Schoolbook; n], coords: Coords::Jacobian }
    }

    pub fn validate(&self, t: &Tower) -> Result<(), FieldError> {
        let n = t.levels.len();
        if self.mul.len() != n || self.sqr.len() != n {
            return Err(FieldError::MissingSelection {
                level: t.degs[self.mul.len().min(self.sqr.len()).min(n - 1) + 1],
                kind: if self.mul.len() != n { OpKind::Mul } else { OpKind::Sqr },
            });
        }
        for (i, lv) in t.levels.iter().enumerate() {
            variants::check(lv.ext, OpKind::Mul, self.mul[i])?;
            variants::check(lv.ext, OpKind::Sqr, self.sqr[i])?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct Level {
    /// Degree over the level below (2 or 3).
    pub ext: usize,
    /// Adjoined element's defining constant, as a level-below element (Montgomery).
    pub nr: Vec<Fp>,
    /// Sparse small-integer decomposition of `nr` over the flat basis, when one exists.
    pub nr_small: Option<Vec<(usize, i64)>>,
}

#[derive(Clone, Debug)]
pub struct Tower {
    pub fp: PrimeField,
    pub levels: Vec<Level>,
    /// Absolute degree of each level; `degs[0] = 1`.
    pub degs: Vec<usize>,
    /// `gamma[l-1][i][j] = nr_l^(j·(p^i − 1)/ext_l)` as level-(l−1) elements.
    pub gamma: Vec<Vec<Vec<Vec<Fp>>>>,
    default_sel: Selection,
}

const SMALL_LIMIT: u64 = 1 << 16;

impl Tower {
    /// `nrs[i]` is the non-residue of level `i+1` as standard integers.
    pub fn new(fp: PrimeField, exts: &[usize], nrs: &[Vec<BigUint>]) -> Result<Self, FieldError> {
        if exts.len() != nrs.len() || exts.is_empty() {
            return Err(FieldError::BadTower("extension degrees and non-residues differ in length".into()));
        }
        let mut degs = vec![1usize];
        let mut levels = Vec::new();
        for (i, (&e, nr)) in exts.iter().zip(nrs).enumerate() {
            if e != 2 && e != 3 {
                return Err(FieldError::BadTower(format!("level {} has degree {e}", i + 1)));
            }
            let below = degs[i];
            if nr.len() != below {
                return Err(FieldError::BadTower(format!(
                    "non-residue of level {} has {} coefficients, expected {below}",
                    i + 1,
                    nr.len()
                )));
            }
            if nr.iter().all(|c| (c % fp.modulus()).is_zero()) {
                return Err(FieldError::BadTower(format!("non-residue of level {} is zero", i + 1)));
            }
            let p = fp.modulus();
            let mut small = Vec::new();
            let mut all_small = true;
            for (j, c) in nr.iter().enumerate() {
                let c = c % p;
                if c.is_zero() {
                    continue;
                }
                let neg = p - &c;
                if c < BigUint::from(SMALL_LIMIT) {
                    small.push((j, c.iter_u64_digits().next().unwrap_or(0) as i64));
                } else if neg < BigUint::from(SMALL_LIMIT) {
                    small.push((j, -(neg.iter_u64_digits().next().unwrap_or(0) as i64)));
                } else {
                    all_small = false;
                }
            }
            levels.push(Level {
                ext: e,
                nr: nr.iter().map(|c| fp.from_big(c)).collect(),
                nr_small: all_small.then_some(small),
            });
            degs.push(below * e);
        }
        let n = levels.len();
        let mut t = Tower {
            fp,
            levels,
            degs,
            gamma: Vec::new(),
            default_sel: Selection {
                mul: vec![Variant::Schoolbook; n],
                sqr: vec![Variant::Schoolbook; n],
                coords: Coords::Jacobian,
            },
        };
        t.compute_gamma()?;
        Ok(t)
    }

    pub fn top(&self) -> usize {
        self.levels.len()
    }

    pub fn k(&self) -> usize {
        *self.degs.last().unwrap()
    }

    pub fn level_of(&self, len: usize) -> Option<usize> {
        self.degs.iter().position(|&d| d == len)
    }

    pub fn default_selection(&self) -> &Selection {
        &self.default_sel
    }

    /// Evaluation context with the default (schoolbook) selection.
    pub fn eval(&self) -> Arith<'_, Eval<'_>> {
        Arith::new(self, &self.default_sel, Eval::new(&self.fp))
    }

    fn compute_gamma(&mut self) -> Result<(), FieldError> {
        let k = self.k();
        let p = self.fp.modulus().clone();
        for l in 1..=self.levels.len() {
            let e = self.levels[l - 1].ext;
            let pm1 = &p - 1u32;
            if !(&pm1 % e as u32).is_zero() {
                return Err(FieldError::BadTower(format!("p − 1 not divisible by {e}")));
            }
            let nr = self.levels[l - 1].nr.clone();
            let table: Vec<Vec<Vec<Fp>>> = {
                let mut ar = self.eval();
                let g1 = ar.pow(&nr, &(&pm1 / e as u32));
                let mut g = vec![ar.one(l - 1)];
                for i in 1..k {
                    let f = ar.frob(&g[i - 1], 1);
                    g.push(ar.mul(&f, &g1));
                }
                g.iter()
                    .map(|gi| {
                        let mut pows = vec![ar.one(l - 1)];
                        for j in 1..e {
                            let x = ar.mul(&pows[j - 1], gi);
                            pows.push(x);
                        }
                        pows
                    })
                    .collect()
            };
            self.gamma.push(table);
        }
        Ok(())
    }

    /// Each adjoined element must generate a proper field extension: its
    /// non-residue is not an `ext`-th power in the level below.
    pub fn check_irreducible(&self) -> Result<(), FieldError> {
        let p = self.fp.modulus();
        let mut ar = self.eval();
        for l in 1..=self.levels.len() {
            let lv = &self.levels[l - 1];
            let q = p.pow(self.degs[l - 1] as u32);
            let e = (&q - 1u32) / lv.ext as u32;
            let x = ar.pow(&lv.nr, &e);
            if x == ar.one(l - 1) {
                return Err(FieldError::BadTower(format!("non-residue of level {l} is a {}-th power", lv.ext)));
            }
        }
        Ok(())
    }

    /// Flat coefficient index of w^j in the top level, where w is the top
    /// generator and w^6 lies in the twist field (levels ending in 3 then 2).
    pub fn sextic_position(&self, j: usize) -> usize {
        let q = self.degs[self.top() - 2];
        ((j % 2) * 3 + j / 2) * q
    }

    pub fn twist_level(&self) -> usize {
        self.top() - 2
    }
}

pub type El<B> = Vec<<B as FpBackend>::V>;

/// Tower arithmetic over a prime-field backend.
pub struct Arith<'t, B: FpBackend> {
    pub t: &'t Tower,
    pub sel: &'t Selection,
    pub b: B,
}

impl<'t, B: FpBackend> Arith<'t, B> {
    pub fn new(t: &'t Tower, sel: &'t Selection, b: B) -> Self {
        Arith { t, sel, b }
    }

    pub fn into_backend(self) -> B {
        self.b
    }

    fn lvl(&self, len: usize) -> usize {
        self.t.level_of(len).unwrap_or_else(|| panic!("no tower level of degree {len}"))
    }

    pub fn constant(&mut self, c: &[Fp]) -> El<B> {
        c.iter().map(|x| self.b.constant(*x)).collect()
    }

    pub fn zero(&mut self, l: usize) -> El<B> {
        (0..self.t.degs[l]).map(|_| self.b.constant(Fp::ZERO)).collect()
    }

    pub fn one(&mut self, l: usize) -> El<B> {
        let one = self.t.fp.one();
        (0..self.t.degs[l]).map(|i| self.b.constant(if i == 0 { one } else { Fp::ZERO })).collect()
    }

    /// Places a subfield element into level `l`.
    pub fn embed(&mut self, a: &[B::V], l: usize) -> El<B> {
        let mut out = a.to_vec();
        while out.len() < self.t.degs[l] {
            out.push(self.b.constant(Fp::ZERO));
        }
        out
    }

    pub fn add(&mut self, a: &[B::V], b: &[B::V]) -> El<B> {
        a.iter().zip(b).map(|(x, y)| self.b.add(x, y)).collect()
    }

    pub fn sub(&mut self, a: &[B::V], b: &[B::V]) -> El<B> {
        a.iter().zip(b).map(|(x, y)| self.b.sub(x, y)).collect()
    }

    pub fn neg(&mut self, a: &[B::V]) -> El<B> {
        a.iter().map(|x| self.b.neg(x)).collect()
    }

    pub fn dbl(&mut self, a: &[B::V]) -> El<B> {
        a.iter().map(|x| self.b.dbl(x)).collect()
    }

    pub fn tpl(&mut self, a: &[B::V]) -> El<B> {
        a.iter().map(|x| self.b.tpl(x)).collect()
    }

    /// Small-integer multiple using negation, doubling, tripling and addition.
    pub fn fp_muli(&mut self, a: &B::V, k: i64) -> B::V {
        match k {
            0 => self.b.constant(Fp::ZERO),
            1 => a.clone(),
            -1 => self.b.neg(a),
            2 => self.b.dbl(a),
            3 => self.b.tpl(a),
            k if k < 0 => {
                let x = self.fp_muli(a, -k);
                self.b.neg(&x)
            }
            k if k % 3 == 0 => {
                let x = self.fp_muli(a, k / 3);
                self.b.tpl(&x)
            }
            k if k % 2 == 0 => {
                let x = self.fp_muli(a, k / 2);
                self.b.dbl(&x)
            }
            k => {
                let x = self.fp_muli(a, k - 1);
                self.b.add(&x, a)
            }
        }
    }

    pub fn muli(&mut self, a: &[B::V], k: i64) -> El<B> {
        a.iter().map(|x| self.fp_muli(x, k)).collect()
    }

    pub fn divi(&mut self, a: &[B::V], k: u64) -> El<B> {
        if k == 1 {
            return a.to_vec();
        }
        let f = &self.t.fp;
        let c = f.inv(&f.from_big(&BigUint::from(k))).expect("small divisor is invertible");
        let c = self.b.constant(c);
        a.iter().map(|x| self.b.mul(x, &c)).collect()
    }

    /// Multiplication by a prime-field value.
    pub fn scale(&mut self, a: &[B::V], s: &B::V) -> El<B> {
        a.iter().map(|x| self.b.mul(x, s)).collect()
    }

    /// Multiplication by a constant of the same level or of a subfield.
    pub fn mul_const(&mut self, a: &[B::V], c: &[Fp]) -> El<B> {
        if c.iter().all(Fp::is_zero) {
            return (0..a.len()).map(|_| self.b.constant(Fp::ZERO)).collect();
        }
        if c[1..].iter().all(Fp::is_zero) {
            let k = self.b.constant(c[0]);
            return self.scale(a, &k);
        }
        let cl = self.lvl(c.len());
        let al = self.lvl(a.len());
        if cl == al {
            let cv = self.constant(c);
            return self.mul(a, &cv);
        }
        // subfield constant: multiply each chunk of level cl
        let d = c.len();
        let cv = self.constant(c);
        let mut out = Vec::with_capacity(a.len());
        for ch in a.chunks(d) {
            out.extend(self.mul(ch, &cv));
        }
        out
    }

    pub fn mul(&mut self, a: &[B::V], b: &[B::V]) -> El<B> {
        if a.len() == 1 {
            return vec![self.b.mul(&a[0], &b[0])];
        }
        let l = self.lvl(a.len());
        if b.len() < a.len() {
            let d = b.len();
            let mut out = Vec::with_capacity(a.len());
            for ch in a.chunks(d) {
                out.extend(self.mul(ch, b));
            }
            return out;
        }
        let d = self.t.degs[l - 1];
        let ca: Vec<El<B>> = a.chunks(d).map(|c| c.to_vec()).collect();
        let cb: Vec<El<B>> = b.chunks(d).map(|c| c.to_vec()).collect();
        let v = self.sel.mul[l - 1];
        let mut r = LevelRing { a: self, nr_level: l };
        variants::ext_mul(&mut r, v, &ca, &cb).concat()
    }

    pub fn sqr(&mut self, a: &[B::V]) -> El<B> {
        if a.len() == 1 {
            return vec![self.b.sqr(&a[0])];
        }
        let l = self.lvl(a.len());
        let d = self.t.degs[l - 1];
        let ca: Vec<El<B>> = a.chunks(d).map(|c| c.to_vec()).collect();
        let v = self.sel.sqr[l - 1];
        let mut r = LevelRing { a: self, nr_level: l };
        variants::ext_sqr(&mut r, v, &ca).concat()
    }

    /// Multiplies a level-(l−1) element by the non-residue of level `l`.
    pub fn mul_nr(&mut self, l: usize, a: &[B::V]) -> El<B> {
        let lv = &self.t.levels[l - 1];
        match lv.nr_small.clone() {
            Some(terms) => {
                let mut acc: Option<El<B>> = None;
                for (j, c) in terms {
                    let x = self.mul_basis(j, a);
                    let x = self.muli(&x, c);
                    acc = Some(match acc {
                        None => x,
                        Some(s) => self.add(&s, &x),
                    });
                }
                acc.expect("non-residue is nonzero")
            }
            None => {
                let nr = lv.nr.clone();
                self.mul_const(a, &nr)
            }
        }
    }

    /// Multiplies by the flat basis monomial with index `j`.
    fn mul_basis(&mut self, mut j: usize, a: &[B::V]) -> El<B> {
        let la = self.lvl(a.len());
        let mut out = a.to_vec();
        for m in (1..=la).rev() {
            let d = self.t.degs[m - 1];
            let digit = j / d;
            j %= d;
            for _ in 0..digit {
                out = self.mul_gen(m, &out);
            }
        }
        out
    }

    /// Multiplies an element of level ≥ `m` by the generator of level `m`.
    pub fn mul_gen(&mut self, m: usize, a: &[B::V]) -> El<B> {
        let la = self.lvl(a.len());
        let d = self.t.degs[la - 1];
        if la == m {
            let e = self.t.levels[m - 1].ext;
            let top = self.mul_nr(m, &a[(e - 1) * d..]);
            let mut out = top;
            out.extend_from_slice(&a[..(e - 1) * d]);
            out
        } else {
            let mut out = Vec::with_capacity(a.len());
            for ch in a.chunks(d) {
                out.extend(self.mul_gen(m, ch));
            }
            out
        }
    }

    /// Conjugation over the top quadratic step of the element's level.
    pub fn conj(&mut self, a: &[B::V]) -> El<B> {
        let l = self.lvl(a.len());
        assert_eq!(self.t.levels[l - 1].ext, 2, "conjugation needs a quadratic step");
        let h = a.len() / 2;
        let mut out = a[..h].to_vec();
        out.extend(self.neg(&a[h..]));
        out
    }

    /// a^(p^i).
    pub fn frob(&mut self, a: &[B::V], i: usize) -> El<B> {
        if a.len() == 1 {
            return a.to_vec();
        }
        let l = self.lvl(a.len());
        let i = i % self.t.degs[l];
        if i == 0 {
            return a.to_vec();
        }
        let d = self.t.degs[l - 1];
        let mut out = Vec::with_capacity(a.len());
        for (j, ch) in a.chunks(d).enumerate() {
            let f = self.frob(ch, i);
            if j == 0 {
                out.extend(f);
            } else {
                let g = self.t.gamma[l - 1][i][j].clone();
                out.extend(self.mul_const(&f, &g));
            }
        }
        out
    }

    pub fn inv(&mut self, a: &[B::V]) -> El<B> {
        if a.len() == 1 {
            return vec![self.b.inv(&a[0])];
        }
        let l = self.lvl(a.len());
        let d = self.t.degs[l - 1];
        let c: Vec<El<B>> = a.chunks(d).map(|c| c.to_vec()).collect();
        if self.t.levels[l - 1].ext == 2 {
            let t0 = self.sqr(&c[0]);
            let t1 = self.sqr(&c[1]);
            let t1 = self.mul_nr(l, &t1);
            let t = self.sub(&t0, &t1);
            let ti = self.inv(&t);
            let mut out = self.mul(&c[0], &ti);
            let x = self.mul(&c[1], &ti);
            out.extend(self.neg(&x));
            out
        } else {
            let a12 = self.mul(&c[1], &c[2]);
            let a12 = self.mul_nr(l, &a12);
            let s0 = self.sqr(&c[0]);
            let c0 = self.sub(&s0, &a12);
            let s2 = self.sqr(&c[2]);
            let s2 = self.mul_nr(l, &s2);
            let a01 = self.mul(&c[0], &c[1]);
            let c1 = self.sub(&s2, &a01);
            let s1 = self.sqr(&c[1]);
            let a02 = self.mul(&c[0], &c[2]);
            let c2 = self.sub(&s1, &a02);
            let x = self.mul(&c[2], &c1);
            let y = self.mul(&c[1], &c2);
            let x = self.add(&x, &y);
            let x = self.mul_nr(l, &x);
            let y = self.mul(&c[0], &c0);
            let t = self.add(&y, &x);
            let ti = self.inv(&t);
            let mut out = self.mul(&c0, &ti);
            out.extend(self.mul(&c1, &ti));
            out.extend(self.mul(&c2, &ti));
            out
        }
    }

    /// Squaring in the cyclotomic subgroup of the top level (Granger–Scott).
    pub fn csqr(&mut self, a: &[B::V]) -> El<B> {
        let top = self.t.top();
        assert_eq!(a.len(), self.t.k(), "cyclotomic squaring acts on the top level");
        let cub = top - 1;
        let q = self.t.degs[top - 2];
        let chunk = |i: usize| a[i * q..(i + 1) * q].to_vec();
        // (g0, g1, g2) = c0, (h0, h1, h2) = c1
        let (z0, z4, z3) = (chunk(0), chunk(1), chunk(2));
        let (z2, z1, z5) = (chunk(3), chunk(4), chunk(5));

        let (t0, t1) = self.sqr_pair(cub, &z0, &z1);
        let z0 = self.gs_minus(&t0, &z0);
        let z1 = self.gs_plus(&t1, &z1);
        let (t0, t1) = self.sqr_pair(cub, &z2, &z3);
        let (t2, t3) = self.sqr_pair(cub, &z4, &z5);
        let z4 = self.gs_minus(&t0, &z4);
        let z5 = self.gs_plus(&t1, &z5);
        let t0 = self.mul_nr(cub, &t3);
        let z2 = self.gs_plus(&t0, &z2);
        let z3 = self.gs_minus(&t2, &z3);
        [z0, z4, z3, z2, z1, z5].concat()
    }

    /// (x + y·w³)² with (w³)² = nr of the cubic level.
    fn sqr_pair(&mut self, cub: usize, x: &[B::V], y: &[B::V]) -> (El<B>, El<B>) {
        let t0 = self.sqr(x);
        let t1 = self.sqr(y);
        let n = self.mul_nr(cub, &t1);
        let c0 = self.add(&n, &t0);
        let s = self.add(x, y);
        let s = self.sqr(&s);
        let s = self.sub(&s, &t0);
        let c1 = self.sub(&s, &t1);
        (c0, c1)
    }

    fn gs_minus(&mut self, t: &[B::V], z: &[B::V]) -> El<B> {
        let x = self.sub(t, z);
        let x = self.dbl(&x);
        self.add(&x, t)
    }

    fn gs_plus(&mut self, t: &[B::V], z: &[B::V]) -> El<B> {
        let x = self.add(t, z);
        let x = self.dbl(&x);
        self.add(&x, t)
    }

    /// Generic exponentiation; negative exponents invert first.
    pub fn exp(&mut self, a: &[B::V], e: &BigInt) -> El<B> {
        let base = if e.sign() == Sign::Minus { self.inv(a) } else { a.to_vec() };
        self.pow(&base, e.magnitude())
    }

    pub fn pow(&mut self, a: &[B::V], e: &BigUint) -> El<B> {
        let l = self.lvl(a.len());
        if e.is_zero() {
            return self.one(l);
        }
        let mut r = a.to_vec();
        for i in (0..e.bits() - 1).rev() {
            r = self.sqr(&r);
            if e.bit(i) {
                r = self.mul(&r, a);
            }
        }
        r
    }

    /// Exponentiation in the cyclotomic subgroup; negative exponents conjugate.
    pub fn cexp(&mut self, a: &[B::V], e: &BigInt) -> El<B> {
        let m = e.magnitude();
        if m.is_zero() {
            let top = self.t.top();
            return self.one(top);
        }
        let mut r = a.to_vec();
        for i in (0..m.bits() - 1).rev() {
            r = self.csqr(&r);
            if m.bit(i) {
                r = self.mul(&r, a);
            }
        }
        if e.is_negative() {
            r = self.conj(&r);
        }
        r
    }

    pub fn is_one_exp(e: &BigInt) -> bool {
        e.is_one()
    }
}

/// A tower level viewed as a [`Ring`], with `adj` multiplying by the
/// non-residue of level `nr_level`.
pub struct LevelRing<'x, 't, B: FpBackend> {
    pub a: &'x mut Arith<'t, B>,
    pub nr_level: usize,
}

impl<B: FpBackend> Ring for LevelRing<'_, '_, B> {
    type E = El<B>;
    type S = B::V;
    fn add(&mut self, a: &El<B>, b: &El<B>) -> El<B> {
        self.a.add(a, b)
    }
    fn sub(&mut self, a: &El<B>, b: &El<B>) -> El<B> {
        self.a.sub(a, b)
    }
    fn neg(&mut self, a: &El<B>) -> El<B> {
        self.a.neg(a)
    }
    fn muli(&mut self, a: &El<B>, k: i64) -> El<B> {
        self.a.muli(a, k)
    }
    fn divi(&mut self, a: &El<B>, k: u64) -> El<B> {
        self.a.divi(a, k)
    }
    fn mul(&mut self, a: &El<B>, b: &El<B>) -> El<B> {
        self.a.mul(a, b)
    }
    fn sqr(&mut self, a: &El<B>) -> El<B> {
        self.a.sqr(a)
    }
    fn adj(&mut self, a: &El<B>) -> El<B> {
        self.a.mul_nr(self.nr_level, a)
    }
    fn mulc(&mut self, a: &El<B>, c: &[Fp]) -> El<B> {
        self.a.mul_const(a, c)
    }
    fn scale(&mut self, a: &El<B>, s: &B::V) -> El<B> {
        self.a.scale(a, s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::fp::PrimeField;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn toy() -> Tower {
        let fp = PrimeField::new(&BigUint::from(13u32)).unwrap();
        Tower::new(fp, &[2], &[vec![BigUint::from(12u32)]]).unwrap()
    }

    fn std_el(t: &Tower, v: &[u32]) -> Vec<Fp> {
        v.iter().map(|&x| t.fp.from_big(&x.into())).collect()
    }

    fn to_std(t: &Tower, v: &[Fp]) -> Vec<u32> {
        v.iter().map(|x| t.fp.to_big(x).iter_u32_digits().next().unwrap_or(0)).collect()
    }

    #[test]
    fn toy_quadratic_products() {
        let t = toy();
        for v in [Variant::Karatsuba, Variant::Schoolbook] {
            let sel = Selection { mul: vec![v], sqr: vec![Variant::Complex], coords: Coords::Jacobian };
            let mut ar = Arith::new(&t, &sel, Eval::new(&t.fp));
            let r = ar.mul(&std_el(&t, &[2, 3]), &std_el(&t, &[4, 5]));
            assert_eq!(to_std(&t, &r), vec![6, 9]);
        }
        for v in [Variant::Complex, Variant::Karatsuba, Variant::Schoolbook] {
            let sel = Selection { mul: vec![Variant::Karatsuba], sqr: vec![v], coords: Coords::Jacobian };
            let mut ar = Arith::new(&t, &sel, Eval::new(&t.fp));
            let r = ar.sqr(&std_el(&t, &[3, 2]));
            assert_eq!(to_std(&t, &r), vec![5, 12]);
        }
    }

    fn inverse_by_search(t: &Tower, a: &[Fp]) -> Option<Vec<Fp>> {
        let mut ar = t.eval();
        for x in 0..13 {
            for y in 0..13 {
                let c = std_el(t, &[x, y]);
                if to_std(t, &ar.mul(a, &c)) == vec![1, 0] {
                    return Some(c);
                }
            }
        }
        None
    }

    #[test]
    fn toy_inverse_matches_exhaustive_search() {
        let t = toy();
        // −1 is a square mod 13, so the toy ring has zero divisors: 2+3i has norm 13 ≡ 0.
        let a = std_el(&t, &[2, 3]);
        assert_eq!(inverse_by_search(&t, &a), None);
        let mut ev = t.eval();
        ev.inv(&a);
        assert!(ev.b.error.is_some());
        for (x, y) in [(1, 1), (2, 5), (7, 0), (0, 4)] {
            let a = std_el(&t, &[x, y]);
            let mut ev = t.eval();
            assert_eq!(Some(ev.inv(&a)), inverse_by_search(&t, &a));
        }
    }

    #[test]
    fn detects_reducible_extensions() {
        assert!(toy().check_irreducible().is_err());
        let fp = PrimeField::new(&BigUint::from(7u32)).unwrap();
        let t = Tower::new(fp, &[2], &[vec![BigUint::from(6u32)]]).unwrap();
        assert!(t.check_irreducible().is_ok());
        let fp = PrimeField::new(&BigUint::from(7u32)).unwrap();
        let t = Tower::new(fp, &[2], &[vec![BigUint::from(2u32)]]).unwrap();
        assert!(t.check_irreducible().is_err());
    }

    #[test]
    fn toy_frobenius_is_pth_power() {
        let t = toy();
        let mut ar = t.eval();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let a: Vec<Fp> = (0..2).map(|_| t.fp.to_mont(&t.fp.random(&mut rng))).collect();
            let f = ar.frob(&a, 1);
            assert_eq!(ar.pow(&a, &BigUint::from(13u32)), f);
        }
    }
}
