//! Prime-field backends.
//!
//! Tower formulas are written once against [`FpBackend`]; evaluating with
//! [`Eval`] computes values, the IR builder records SSA operations, and
//! [`Count`] tallies operation counts.

use super::fp::{Fp, PrimeField};
use super::FieldError;

pub trait FpBackend {
    type V: Clone;
    /// `c` is in Montgomery form.
    fn constant(&mut self, c: Fp) -> Self::V;
    fn add(&mut self, a: &Self::V, b: &Self::V) -> Self::V;
    fn sub(&mut self, a: &Self::V, b: &Self::V) -> Self::V;
    fn neg(&mut self, a: &Self::V) -> Self::V;
    fn dbl(&mut self, a: &Self::V) -> Self::V;
    fn tpl(&mut self, a: &Self::V) -> Self::V;
    fn mul(&mut self, a: &Self::V, b: &Self::V) -> Self::V;
    fn sqr(&mut self, a: &Self::V) -> Self::V;
    fn inv(&mut self, a: &Self::V) -> Self::V;
    /// Standard to Montgomery form.
    fn cvt(&mut self, a: &Self::V) -> Self::V;
    /// Montgomery to standard form.
    fn icv(&mut self, a: &Self::V) -> Self::V;
    /// Takes the first arithmetic error raised since the last call.
    fn take_error(&mut self) -> Option<FieldError> {
        None
    }
}

/// Direct evaluation; the first inversion of zero is latched in `error`.
pub struct Eval<'a> {
    pub f: &'a PrimeField,
    pub error: Option<FieldError>,
}

impl<'a> Eval<'a> {
    pub fn new(f: &'a PrimeField) -> Self {
        Eval { f, error: None }
    }
}

impl FpBackend for Eval<'_> {
    type V = Fp;
    fn constant(&mut self, c: Fp) -> Fp {
        c
    }
    fn add(&mut self, a: &Fp, b: &Fp) -> Fp {
        self.f.add(a, b)
    }
    fn sub(&mut self, a: &Fp, b: &Fp) -> Fp {
        self.f.sub(a, b)
    }
    fn neg(&mut self, a: &Fp) -> Fp {
        self.f.neg(a)
    }
    fn dbl(&mut self, a: &Fp) -> Fp {
        self.f.dbl(a)
    }
    fn tpl(&mut self, a: &Fp) -> Fp {
        self.f.tpl(a)
    }
    fn mul(&mut self, a: &Fp, b: &Fp) -> Fp {
        self.f.mul(a, b)
    }
    fn sqr(&mut self, a: &Fp) -> Fp {
        self.f.sqr(a)
    }
    fn inv(&mut self, a: &Fp) -> Fp {
        match self.f.inv(a) {
            Ok(v) => v,
            Err(e) => {
                self.error.get_or_insert(e);
                Fp::ZERO
            }
        }
    }
    fn cvt(&mut self, a: &Fp) -> Fp {
        self.f.to_mont(a)
    }
    fn take_error(&mut self) -> Option<FieldError> {
        self.error.take()
    }
    fn icv(&mut self, a: &Fp) -> Fp {
        self.f.from_mont(a)
    }
}

/// Per-opcode operation tally.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OpCounts {
    pub add: u64,
    pub sub: u64,
    pub neg: u64,
    pub dbl: u64,
    pub tpl: u64,
    pub mul: u64,
    pub sqr: u64,
    pub inv: u64,
    pub conv: u64,
    pub constants: u64,
}

impl OpCounts {
    pub fn linear(&self) -> u64 {
        self.add + self.sub + self.neg + self.dbl + self.tpl
    }

    pub fn total(&self) -> u64 {
        self.linear() + self.mul + self.sqr + self.inv + self.conv
    }
}

#[derive(Default)]
pub struct Count {
    pub counts: OpCounts,
}

impl FpBackend for Count {
    type V = ();
    fn constant(&mut self, _: Fp) {
        self.counts.constants += 1;
    }
    fn add(&mut self, _: &(), _: &()) {
        self.counts.add += 1;
    }
    fn sub(&mut self, _: &(), _: &()) {
        self.counts.sub += 1;
    }
    fn neg(&mut self, _: &()) {
        self.counts.neg += 1;
    }
    fn dbl(&mut self, _: &()) {
        self.counts.dbl += 1;
    }
    fn tpl(&mut self, _: &()) {
        self.counts.tpl += 1;
    }
    fn mul(&mut self, _: &(), _: &()) {
        self.counts.mul += 1;
    }
    fn sqr(&mut self, _: &()) {
        self.counts.sqr += 1;
    }
    fn inv(&mut self, _: &()) {
        self.counts.inv += 1;
    }
    fn cvt(&mut self, _: &()) {
        self.counts.conv += 1;
    }
    fn icv(&mut self, _: &()) {
        self.counts.conv += 1;
    }
}
