//! Operator variants for quadratic and cubic extension steps.
//!
//! Each formula takes the coefficient chunks of its operands over the
//! immediate subfield and returns the reduced product.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ring::{Cost, CountRing, Ring};
use super::FieldError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Variant {
    Karatsuba,
    Schoolbook,
    Toom3,
    Complex,
    ChSqr1,
    ChSqr2,
    ChSqr3,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OpKind {
    Mul,
    Sqr,
}

impl Variant {
    pub const ALL: [Variant; 7] = [
        Variant::Karatsuba,
        Variant::Schoolbook,
        Variant::Toom3,
        Variant::Complex,
        Variant::ChSqr1,
        Variant::ChSqr2,
        Variant::ChSqr3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Karatsuba => "karatsuba",
            Variant::Schoolbook => "schoolbook",
            Variant::Toom3 => "toom3",
            Variant::Complex => "complex",
            Variant::ChSqr1 => "ch-sqr1",
            Variant::ChSqr2 => "ch-sqr2",
            Variant::ChSqr3 => "ch-sqr3",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = FieldError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.to_ascii_lowercase();
        let key = match key.as_str() {
            "karat" | "kara" => "karatsuba",
            "sch" | "school" => "schoolbook",
            "toom" | "toom-3" => "toom3",
            k => k,
        };
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == key)
            .ok_or_else(|| FieldError::UnknownVariant(s.to_string()))
    }
}

impl fmt::Display for OpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OpKind::Mul => "mul",
            OpKind::Sqr => "sqr",
        })
    }
}

/// Variants registered for an extension step of degree `ext`, in catalog order.
pub fn catalog(ext: usize, kind: OpKind) -> &'static [Variant] {
    use Variant::*;
    match (ext, kind) {
        (2, OpKind::Mul) => &[Karatsuba, Schoolbook],
        (2, OpKind::Sqr) => &[Complex, Karatsuba, Schoolbook],
        (3, OpKind::Mul) => &[Karatsuba, Schoolbook, Toom3],
        (3, OpKind::Sqr) => &[ChSqr1, ChSqr2, ChSqr3, Complex, Schoolbook],
        _ => &[],
    }
}

pub fn check(ext: usize, kind: OpKind, v: Variant) -> Result<(), FieldError> {
    if catalog(ext, kind).contains(&v) {
        Ok(())
    } else {
        Err(FieldError::VariantMismatch { variant: v, ext, kind })
    }
}

/// Static cost of one variant, counted by running the formula on [`CountRing`].
pub fn cost(ext: usize, kind: OpKind, v: Variant) -> Result<Cost, FieldError> {
    check(ext, kind, v)?;
    let mut r = CountRing::default();
    let a = vec![(); ext];
    match kind {
        OpKind::Mul => {
            ext_mul(&mut r, v, &a, &a);
        }
        OpKind::Sqr => {
            ext_sqr(&mut r, v, &a);
        }
    }
    Ok(r.cost)
}

/// Product of two extension elements given as `ext` subfield chunks.
/// Panics on a variant that is not registered for the degree; call [`check`] first.
pub fn ext_mul<R: Ring>(r: &mut R, v: Variant, a: &[R::E], b: &[R::E]) -> Vec<R::E> {
    match (a.len(), v) {
        (2, Variant::Karatsuba) => quad_mul_karatsuba(r, a, b),
        (2, Variant::Schoolbook) => quad_mul_schoolbook(r, a, b),
        (3, Variant::Karatsuba) => cubic_mul_karatsuba(r, a, b),
        (3, Variant::Schoolbook) => cubic_mul_schoolbook(r, a, b),
        (3, Variant::Toom3) => cubic_mul_toom3(r, a, b),
        (e, v) => panic!("no {v} multiplication for degree {e}"),
    }
}

pub fn ext_sqr<R: Ring>(r: &mut R, v: Variant, a: &[R::E]) -> Vec<R::E> {
    match (a.len(), v) {
        (2, Variant::Complex) => quad_sqr_complex(r, a),
        (2, Variant::Karatsuba) => quad_sqr_karatsuba(r, a),
        (2, Variant::Schoolbook) => quad_sqr_schoolbook(r, a),
        (3, Variant::ChSqr1) => cubic_sqr_ch1(r, a),
        (3, Variant::ChSqr2) => cubic_sqr_ch2(r, a),
        (3, Variant::ChSqr3) => cubic_sqr_ch3(r, a),
        (3, Variant::Complex) => cubic_sqr_complex(r, a),
        (3, Variant::Schoolbook) => cubic_sqr_schoolbook(r, a),
        (e, v) => panic!("no {v} squaring for degree {e}"),
    }
}

fn quad_mul_karatsuba<R: Ring>(r: &mut R, a: &[R::E], b: &[R::E]) -> Vec<R::E> {
    let v0 = r.mul(&a[0], &b[0]);
    let v1 = r.mul(&a[1], &b[1]);
    let nv1 = r.adj(&v1);
    let c0 = r.add(&v0, &nv1);
    let sa = r.add(&a[0], &a[1]);
    let sb = r.add(&b[0], &b[1]);
    let t = r.mul(&sa, &sb);
    let t = r.sub(&t, &v0);
    let c1 = r.sub(&t, &v1);
    vec![c0, c1]
}

fn quad_mul_schoolbook<R: Ring>(r: &mut R, a: &[R::E], b: &[R::E]) -> Vec<R::E> {
    let v0 = r.mul(&a[0], &b[0]);
    let v1 = r.mul(&a[1], &b[1]);
    let nv1 = r.adj(&v1);
    let c0 = r.add(&v0, &nv1);
    let x = r.mul(&a[0], &b[1]);
    let y = r.mul(&a[1], &b[0]);
    let c1 = r.add(&x, &y);
    vec![c0, c1]
}

fn quad_sqr_complex<R: Ring>(r: &mut R, a: &[R::E]) -> Vec<R::E> {
    let v0 = r.mul(&a[0], &a[1]);
    let s = r.add(&a[0], &a[1]);
    let na1 = r.adj(&a[1]);
    let t = r.add(&a[0], &na1);
    let m = r.mul(&s, &t);
    let m = r.sub(&m, &v0);
    let nv0 = r.adj(&v0);
    let c0 = r.sub(&m, &nv0);
    let c1 = r.dbl(&v0);
    vec![c0, c1]
}

fn quad_sqr_karatsuba<R: Ring>(r: &mut R, a: &[R::E]) -> Vec<R::E> {
    let v0 = r.sqr(&a[0]);
    let v1 = r.sqr(&a[1]);
    let nv1 = r.adj(&v1);
    let c0 = r.add(&v0, &nv1);
    let s = r.add(&a[0], &a[1]);
    let s = r.sqr(&s);
    let s = r.sub(&s, &v0);
    let c1 = r.sub(&s, &v1);
    vec![c0, c1]
}

fn quad_sqr_schoolbook<R: Ring>(r: &mut R, a: &[R::E]) -> Vec<R::E> {
    let v0 = r.sqr(&a[0]);
    let v1 = r.sqr(&a[1]);
    let nv1 = r.adj(&v1);
    let c0 = r.add(&v0, &nv1);
    let m = r.mul(&a[0], &a[1]);
    let c1 = r.dbl(&m);
    vec![c0, c1]
}

fn cubic_mul_schoolbook<R: Ring>(r: &mut R, a: &[R::E], b: &[R::E]) -> Vec<R::E> {
    let p00 = r.mul(&a[0], &b[0]);
    let p12 = r.mul(&a[1], &b[2]);
    let p21 = r.mul(&a[2], &b[1]);
    let t = r.add(&p12, &p21);
    let t = r.adj(&t);
    let c0 = r.add(&p00, &t);
    let p01 = r.mul(&a[0], &b[1]);
    let p10 = r.mul(&a[1], &b[0]);
    let p22 = r.mul(&a[2], &b[2]);
    let t = r.add(&p01, &p10);
    let n22 = r.adj(&p22);
    let c1 = r.add(&t, &n22);
    let p02 = r.mul(&a[0], &b[2]);
    let p11 = r.mul(&a[1], &b[1]);
    let p20 = r.mul(&a[2], &b[0]);
    let t = r.add(&p02, &p11);
    let c2 = r.add(&t, &p20);
    vec![c0, c1, c2]
}

fn cubic_mul_karatsuba<R: Ring>(r: &mut R, a: &[R::E], b: &[R::E]) -> Vec<R::E> {
    let v0 = r.mul(&a[0], &b[0]);
    let v1 = r.mul(&a[1], &b[1]);
    let v2 = r.mul(&a[2], &b[2]);

    let x = r.add(&a[1], &a[2]);
    let y = r.add(&b[1], &b[2]);
    let t = r.mul(&x, &y);
    let t = r.sub(&t, &v1);
    let t = r.sub(&t, &v2);
    let t = r.adj(&t);
    let c0 = r.add(&v0, &t);

    let x = r.add(&a[0], &a[1]);
    let y = r.add(&b[0], &b[1]);
    let t = r.mul(&x, &y);
    let t = r.sub(&t, &v0);
    let t = r.sub(&t, &v1);
    let n2 = r.adj(&v2);
    let c1 = r.add(&t, &n2);

    let x = r.add(&a[0], &a[2]);
    let y = r.add(&b[0], &b[2]);
    let t = r.mul(&x, &y);
    let t = r.sub(&t, &v0);
    let t = r.add(&t, &v1);
    let c2 = r.sub(&t, &v2);
    vec![c0, c1, c2]
}

/// Evaluation of a0 + a1·x + a2·x² at 1, −1 and 2.
fn toom_eval<R: Ring>(r: &mut R, a: &[R::E]) -> [R::E; 3] {
    let t = r.add(&a[0], &a[2]);
    let p1 = r.add(&t, &a[1]);
    let m1 = r.sub(&t, &a[1]);
    let x = r.dbl(&a[2]);
    let x = r.add(&x, &a[1]);
    let x = r.dbl(&x);
    let p2 = r.add(&x, &a[0]);
    [p1, m1, p2]
}

fn cubic_mul_toom3<R: Ring>(r: &mut R, a: &[R::E], b: &[R::E]) -> Vec<R::E> {
    let [pa1, ma1, pa2] = toom_eval(r, a);
    let [pb1, mb1, pb2] = toom_eval(r, b);
    let v0 = r.mul(&a[0], &b[0]);
    let v1 = r.mul(&pa1, &pb1);
    let vm = r.mul(&ma1, &mb1);
    let v2 = r.mul(&pa2, &pb2);
    let vi = r.mul(&a[2], &b[2]);

    let t = r.add(&v1, &vm);
    let t = r.divi(&t, 2);
    let t = r.sub(&t, &v0);
    let c2 = r.sub(&t, &vi);

    let s = r.sub(&v1, &vm);
    let s = r.divi(&s, 2);

    let x = r.dbl(&vi);
    let x = r.dbl(&x);
    let x = r.add(&c2, &x);
    let x = r.dbl(&x);
    let x = r.dbl(&x);
    let w = r.sub(&v2, &v0);
    let w = r.sub(&w, &x);

    let s2 = r.dbl(&s);
    let c3 = r.sub(&w, &s2);
    let c3 = r.divi(&c3, 6);
    let c1 = r.sub(&s, &c3);

    let n3 = r.adj(&c3);
    let r0 = r.add(&v0, &n3);
    let n4 = r.adj(&vi);
    let r1 = r.add(&c1, &n4);
    vec![r0, r1, c2]
}

fn cubic_sqr_schoolbook<R: Ring>(r: &mut R, a: &[R::E]) -> Vec<R::E> {
    let s0 = r.sqr(&a[0]);
    let m12 = r.mul(&a[1], &a[2]);
    let m12 = r.dbl(&m12);
    let n = r.adj(&m12);
    let c0 = r.add(&s0, &n);
    let m01 = r.mul(&a[0], &a[1]);
    let m01 = r.dbl(&m01);
    let s2 = r.sqr(&a[2]);
    let n = r.adj(&s2);
    let c1 = r.add(&m01, &n);
    let s1 = r.sqr(&a[1]);
    let m02 = r.mul(&a[0], &a[2]);
    let m02 = r.dbl(&m02);
    let c2 = r.add(&s1, &m02);
    vec![c0, c1, c2]
}

fn cubic_sqr_complex<R: Ring>(r: &mut R, a: &[R::E]) -> Vec<R::E> {
    let s0 = r.sqr(&a[0]);
    let s1 = r.sqr(&a[1]);
    let s2 = r.sqr(&a[2]);
    let cross = |r: &mut R, x: &R::E, y: &R::E, sx: &R::E, sy: &R::E| {
        let t = r.add(x, y);
        let t = r.sqr(&t);
        let t = r.sub(&t, sx);
        r.sub(&t, sy)
    };
    let m01 = cross(r, &a[0], &a[1], &s0, &s1);
    let m12 = cross(r, &a[1], &a[2], &s1, &s2);
    let m02 = cross(r, &a[0], &a[2], &s0, &s2);
    let n = r.adj(&m12);
    let c0 = r.add(&s0, &n);
    let n = r.adj(&s2);
    let c1 = r.add(&m01, &n);
    let c2 = r.add(&m02, &s1);
    vec![c0, c1, c2]
}

fn cubic_sqr_ch1<R: Ring>(r: &mut R, a: &[R::E]) -> Vec<R::E> {
    let s0 = r.sqr(&a[0]);
    let s1 = r.mul(&a[0], &a[1]);
    let s1 = r.dbl(&s1);
    let t = r.sub(&a[0], &a[1]);
    let t = r.add(&t, &a[2]);
    let s2 = r.sqr(&t);
    let s3 = r.mul(&a[1], &a[2]);
    let s3 = r.dbl(&s3);
    let s4 = r.sqr(&a[2]);
    let n = r.adj(&s3);
    let c0 = r.add(&s0, &n);
    let n = r.adj(&s4);
    let c1 = r.add(&s1, &n);
    let t = r.add(&s1, &s2);
    let t = r.add(&t, &s3);
    let t = r.sub(&t, &s0);
    let c2 = r.sub(&t, &s4);
    vec![c0, c1, c2]
}

fn cubic_sqr_ch2<R: Ring>(r: &mut R, a: &[R::E]) -> Vec<R::E> {
    let s0 = r.sqr(&a[0]);
    let u = r.add(&a[0], &a[2]);
    let x = r.add(&u, &a[1]);
    let s1 = r.sqr(&x);
    let y = r.sub(&u, &a[1]);
    let s2 = r.sqr(&y);
    let s3 = r.mul(&a[1], &a[2]);
    let s3 = r.dbl(&s3);
    let s4 = r.sqr(&a[2]);
    let t1 = r.add(&s1, &s2);
    let t1 = r.divi(&t1, 2);
    let n = r.adj(&s3);
    let c0 = r.add(&s0, &n);
    let t = r.sub(&s1, &s3);
    let t = r.sub(&t, &t1);
    let n = r.adj(&s4);
    let c1 = r.add(&t, &n);
    let t = r.sub(&t1, &s4);
    let c2 = r.sub(&t, &s0);
    vec![c0, c1, c2]
}

fn cubic_sqr_ch3<R: Ring>(r: &mut R, a: &[R::E]) -> Vec<R::E> {
    let s0 = r.sqr(&a[0]);
    let s1 = r.mul(&a[0], &a[1]);
    let s1 = r.dbl(&s1);
    let t = r.add(&a[0], &a[1]);
    let t = r.add(&t, &a[2]);
    let s2 = r.sqr(&t);
    let s3 = r.mul(&a[1], &a[2]);
    let s3 = r.dbl(&s3);
    let s4 = r.sqr(&a[2]);
    let n = r.adj(&s3);
    let c0 = r.add(&s0, &n);
    let n = r.adj(&s4);
    let c1 = r.add(&s1, &n);
    let t = r.sub(&s2, &s0);
    let t = r.sub(&t, &s1);
    let t = r.sub(&t, &s3);
    let c2 = r.sub(&t, &s4);
    vec![c0, c1, c2]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_costs() {
        use OpKind::*;
        use Variant::*;
        assert_eq!(cost(2, Mul, Karatsuba).unwrap(), Cost::new(3, 0, 5, 1));
        assert_eq!(cost(2, Mul, Schoolbook).unwrap(), Cost::new(4, 0, 2, 1));
        assert_eq!(cost(3, Mul, Schoolbook).unwrap(), Cost::new(9, 0, 6, 2));
        assert_eq!(cost(3, Mul, Toom3).unwrap(), Cost::new(5, 0, 33, 2));
        assert_eq!(cost(3, Mul, Karatsuba).unwrap(), Cost::new(6, 0, 15, 2));
        assert_eq!(cost(3, Sqr, ChSqr1).unwrap(), Cost::new(2, 3, 10, 2));
        assert_eq!(cost(3, Sqr, ChSqr2).unwrap(), Cost::new(1, 4, 12, 2));
        assert_eq!(cost(2, Sqr, Complex).unwrap(), Cost::new(2, 0, 5, 2));
    }

    #[test]
    fn mismatched_degree_rejected() {
        assert!(check(2, OpKind::Mul, Variant::Toom3).is_err());
        assert!(check(3, OpKind::Sqr, Variant::Karatsuba).is_err());
        assert!(cost(5, OpKind::Mul, Variant::Karatsuba).is_err());
    }

    #[test]
    fn names_parse() {
        for v in Variant::ALL {
            assert_eq!(v.name().parse::<Variant>().unwrap(), v);
        }
        assert_eq!("karat".parse::<Variant>().unwrap(), Variant::Karatsuba);
        assert!("bogus".parse::<Variant>().is_err());
    }
}
