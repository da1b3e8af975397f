//! Ring interface that operator-variant and point formulas are written against.

use super::fp::Fp;

/// Cost vector of one formula in terms of sub-ring operations:
/// multiplications, squarings, linear additions and adjoined-element products.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct Cost {
    pub m: u32,
    pub s: u32,
    pub a: u32,
    pub b: u32,
}

impl Cost {
    pub const fn new(m: u32, s: u32, a: u32, b: u32) -> Self {
        Cost { m, s, a, b }
    }
}

impl std::fmt::Display for Cost {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}M {}S {}A {}B", self.m, self.s, self.a, self.b)
    }
}

pub trait Ring {
    type E: Clone;
    /// Scalars from the prime field, used by line evaluation.
    type S: Clone;

    fn add(&mut self, a: &Self::E, b: &Self::E) -> Self::E;
    fn sub(&mut self, a: &Self::E, b: &Self::E) -> Self::E;
    fn neg(&mut self, a: &Self::E) -> Self::E;
    /// Multiplication by a small integer. `k = 0` yields a free zero.
    fn muli(&mut self, a: &Self::E, k: i64) -> Self::E;
    /// Multiplication by the inverse of a small integer.
    fn divi(&mut self, a: &Self::E, k: u64) -> Self::E;
    fn mul(&mut self, a: &Self::E, b: &Self::E) -> Self::E;
    fn sqr(&mut self, a: &Self::E) -> Self::E;
    /// Multiplication by the non-residue adjoined by the enclosing extension.
    fn adj(&mut self, a: &Self::E) -> Self::E;
    /// Multiplication by a curve constant (Montgomery coefficients).
    fn mulc(&mut self, a: &Self::E, c: &[Fp]) -> Self::E;
    /// Coefficient-wise multiplication by a prime-field scalar.
    fn scale(&mut self, a: &Self::E, s: &Self::S) -> Self::E;

    fn dbl(&mut self, a: &Self::E) -> Self::E {
        self.muli(a, 2)
    }
    fn tpl(&mut self, a: &Self::E) -> Self::E {
        self.muli(a, 3)
    }
}

/// Counts operations without computing anything.
#[derive(Default, Debug)]
pub struct CountRing {
    pub cost: Cost,
}

impl Ring for CountRing {
    type E = ();
    type S = ();
    fn add(&mut self, _: &(), _: &()) {
        self.cost.a += 1;
    }
    fn sub(&mut self, _: &(), _: &()) {
        self.cost.a += 1;
    }
    fn neg(&mut self, _: &()) {
        self.cost.a += 1;
    }
    fn muli(&mut self, _: &(), k: i64) {
        if k != 0 && k != 1 {
            self.cost.a += 1;
        }
    }
    fn divi(&mut self, _: &(), k: u64) {
        if k != 1 {
            self.cost.a += 1;
        }
    }
    fn mul(&mut self, _: &(), _: &()) {
        self.cost.m += 1;
    }
    fn sqr(&mut self, _: &()) {
        self.cost.s += 1;
    }
    fn adj(&mut self, _: &()) {
        self.cost.b += 1;
    }
    fn mulc(&mut self, _: &(), _: &[Fp]) {
        self.cost.a += 1;
    }
    fn scale(&mut self, _: &(), _: &()) {}
}
