//! Pairing-friendly curve parameters.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Signed};
use serde::Deserialize;

use super::fp::{is_probable_prime, Fp, PrimeField};
use super::point::{Affine, Curve};
use super::tower::Tower;
use super::FieldError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    Bn,
    Bls12,
    Bls24,
}

impl FromStr for Family {
    type Err = FieldError;
    fn from_str(s: &str) -> Result<Self, FieldError> {
        match s.to_ascii_uppercase().as_str() {
            "BN" => Ok(Family::Bn),
            "BLS12" => Ok(Family::Bls12),
            "BLS24" => Ok(Family::Bls24),
            _ => Err(FieldError::BadCurve(format!("unsupported family `{s}`"))),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Bn => "BN",
            Family::Bls12 => "BLS12",
            Family::Bls24 => "BLS24",
        })
    }
}

impl Family {
    pub fn k(self) -> usize {
        match self {
            Family::Bn | Family::Bls12 => 12,
            Family::Bls24 => 24,
        }
    }

    /// (p, r, t) as polynomials in u.
    pub fn params(self, u: &BigInt) -> (BigInt, BigInt, BigInt) {
        let u2 = u * u;
        let u3 = &u2 * u;
        let u4 = &u2 * &u2;
        match self {
            Family::Bn => {
                let p = 36 * &u4 + 36 * &u3 + 24 * &u2 + 6 * u + 1;
                let r = 36 * &u4 + 36 * &u3 + 18 * &u2 + 6 * u + 1;
                (p, r, 6 * u2 + 1)
            }
            Family::Bls12 | Family::Bls24 => {
                let r = if self == Family::Bls12 { &u4 - &u2 + 1 } else { &u4 * &u4 - &u4 + 1 };
                let um1 = u - 1;
                let p = (&um1 * &um1 * &r) / 3 + u;
                (p, r, u + 1)
            }
        }
    }

    pub fn tower_shape(self) -> &'static [usize] {
        match self {
            Family::Bn | Family::Bls12 => &[2, 3, 2],
            Family::Bls24 => &[2, 2, 3, 2],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TwistType {
    /// E': y² = x³ + b/ξ
    D,
    /// E': y² = x³ + b·ξ
    M,
}

/// Reference bit sizes: log₂ p, log₂ r and k·log₂ p (rounded up).
pub const SIZE_TABLE: [(&str, u64, u64, u64); 7] = [
    ("bn254", 254, 254, 3039),
    ("bn462", 462, 462, 5535),
    ("bn638", 638, 638, 7647),
    ("bls12_381", 381, 255, 4569),
    ("bls12_446", 446, 299, 5352),
    ("bls12_638", 638, 427, 7656),
    ("bls24_509", 509, 408, 12202),
];

pub const SHIPPED: [&str; 7] = ["bn254", "bn462", "bn638", "bls12_381", "bls12_446", "bls12_638", "bls24_509"];

fn shipped_source(id: &str) -> Option<&'static str> {
    Some(match id {
        "bn254" => include_str!("../../curves/bn254.toml"),
        "bn462" => include_str!("../../curves/bn462.toml"),
        "bn638" => include_str!("../../curves/bn638.toml"),
        "bls12_381" => include_str!("../../curves/bls12_381.toml"),
        "bls12_446" => include_str!("../../curves/bls12_446.toml"),
        "bls12_638" => include_str!("../../curves/bls12_638.toml"),
        "bls24_509" => include_str!("../../curves/bls24_509.toml"),
        _ => return None,
    })
}

/// Normalizes user spellings such as `BLS12-381` or `BN254N`.
pub fn canonical_id(name: &str) -> String {
    let mut s = name.to_ascii_lowercase().replace('-', "_");
    if s == "bn254n" {
        s = "bn254".into();
    }
    s
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CurveFile {
    id: String,
    family: String,
    u: String,
    p: String,
    r: String,
    k: usize,
    b: String,
    tower: Vec<usize>,
    non_residues: Vec<Vec<String>>,
    twist: String,
    g1: Vec<String>,
    g2: Vec<Vec<String>>,
    frobenius_constants: Vec<Vec<Vec<String>>>,
}

pub(crate) fn parse_hex(s: &str) -> Result<BigInt, FieldError> {
    let (neg, body) = match s.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, s),
    };
    let digits = body
        .strip_prefix("0x")
        .ok_or_else(|| FieldError::BadCurve(format!("integer `{s}` lacks 0x prefix")))?;
    let v = BigUint::parse_bytes(digits.as_bytes(), 16)
        .ok_or_else(|| FieldError::BadCurve(format!("bad hex integer `{s}`")))?;
    Ok(BigInt::from_biguint(if neg { Sign::Minus } else { Sign::Plus }, v))
}

fn parse_unsigned(s: &str) -> Result<BigUint, FieldError> {
    parse_hex(s)?
        .to_biguint()
        .ok_or_else(|| FieldError::BadCurve(format!("`{s}` must be nonnegative")))
}

/// A validated curve instance with its tower and generators.
#[derive(Clone, Debug)]
pub struct CurveSpec {
    pub id: String,
    pub family: Family,
    pub u: BigInt,
    pub p: BigUint,
    pub r: BigUint,
    pub t: BigInt,
    pub k: usize,
    pub b: BigUint,
    pub twist: TwistType,
    pub tower: Tower,
    /// Twist coefficient b' in the twist field (Montgomery).
    pub b_twist: Vec<Fp>,
    pub g1: Affine,
    pub g2: Affine,
    /// Constants of the twisted Frobenius (x, y) ↦ (x^p·cx, y^p·cy) on the twist.
    pub frob_twist: (Vec<Fp>, Vec<Fp>),
}

impl CurveSpec {
    pub fn shipped(name: &str) -> Result<Self, FieldError> {
        let id = canonical_id(name);
        let src = shipped_source(&id).ok_or_else(|| FieldError::BadCurve(format!("no shipped curve `{name}`")))?;
        Self::from_toml(src)
    }

    /// Loads a shipped curve by id, or a parameter file by path.
    pub fn load(name_or_path: &str) -> Result<Self, FieldError> {
        if shipped_source(&canonical_id(name_or_path)).is_some() {
            return Self::shipped(name_or_path);
        }
        let text = std::fs::read_to_string(Path::new(name_or_path))
            .map_err(|e| FieldError::BadCurve(format!("{name_or_path}: {e}")))?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self, FieldError> {
        let f: CurveFile = toml::from_str(text).map_err(|e| FieldError::BadCurve(e.to_string()))?;
        let family: Family = f.family.parse()?;
        let u = parse_hex(&f.u)?;
        let p = parse_unsigned(&f.p)?;
        let r = parse_unsigned(&f.r)?;
        let (pp, rr, t) = family.params(&u);
        if pp != BigInt::from(p.clone()) || rr != BigInt::from(r.clone()) {
            return Err(FieldError::BadCurve(format!("{}: p or r does not match the {family} polynomials", f.id)));
        }
        if f.k != family.k() || f.tower != family.tower_shape() {
            return Err(FieldError::BadCurve(format!("{}: tower {:?} does not fit k = {}", f.id, f.tower, f.k)));
        }
        if !is_probable_prime(&r) {
            return Err(FieldError::BadCurve(format!("{}: r is not prime", f.id)));
        }
        check_sizes(&f.id, &p, &r, f.k)?;
        let fp = PrimeField::new(&p)?;
        let nrs = f
            .non_residues
            .iter()
            .map(|v| v.iter().map(|s| parse_unsigned(s)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        let tower = Tower::new(fp, &f.tower, &nrs)?;
        tower.check_irreducible()?;
        check_frobenius_table(&tower, &f.frobenius_constants)?;

        let twist = match f.twist.as_str() {
            "D" => TwistType::D,
            "M" => TwistType::M,
            s => return Err(FieldError::BadCurve(format!("unknown twist type `{s}`"))),
        };
        let b = parse_unsigned(&f.b)?;
        let tl = tower.twist_level();
        let q = tower.degs[tl];
        let (b_twist, frob_twist) = {
            let mut ar = tower.eval();
            let bq = ar.embed(&[tower.fp.from_big(&b)], tl);
            let xi = tower.levels[tl].nr.clone();
            let bt = match twist {
                TwistType::D => {
                    let xi_inv = ar.inv(&xi);
                    ar.mul(&bq, &xi_inv)
                }
                TwistType::M => ar.mul(&bq, &xi),
            };
            let pm1 = &p - 1u32;
            let mut cx = ar.pow(&xi, &(&pm1 / 3u32));
            let mut cy = ar.pow(&xi, &(&pm1 / 2u32));
            if twist == TwistType::M {
                cx = ar.inv(&cx);
                cy = ar.inv(&cy);
            }
            (bt, (cx, cy))
        };

        let coords = |v: &[String], n: usize| -> Result<Vec<Fp>, FieldError> {
            if v.len() != n {
                return Err(FieldError::BadCurve("generator coordinate has wrong length".into()));
            }
            v.iter().map(|s| Ok(tower.fp.from_big(&parse_unsigned(s)?))).collect()
        };
        if f.g1.len() != 2 || f.g2.len() != 2 {
            return Err(FieldError::BadCurve("generators need two coordinates".into()));
        }
        let g1 = Affine::new(coords(&f.g1[..1], 1)?, coords(&f.g1[1..], 1)?);
        let g2 = Affine::new(coords(&f.g2[0], q)?, coords(&f.g2[1], q)?);

        let spec = CurveSpec {
            id: f.id,
            family,
            u,
            p,
            r,
            t,
            k: f.k,
            b,
            twist,
            tower,
            b_twist,
            g1,
            g2,
            frob_twist,
        };
        let e1 = spec.g1_curve();
        let e2 = spec.g2_curve();
        if !e1.on_curve(&spec.g1) || !e2.on_curve(&spec.g2) {
            return Err(FieldError::NotOnCurve);
        }
        if !e1.mul(&spec.g1, &spec.r).inf || !e2.mul(&spec.g2, &spec.r).inf {
            return Err(FieldError::BadCurve(format!("{}: generator order is not r", spec.id)));
        }
        Ok(spec)
    }

    pub fn g1_curve(&self) -> Curve<'_> {
        Curve::new(&self.tower, 0, vec![self.tower.fp.from_big(&self.b)])
    }

    pub fn g2_curve(&self) -> Curve<'_> {
        Curve::new(&self.tower, self.tower.twist_level(), self.b_twist.clone())
    }

    /// Signed Miller loop bound: 6u+2 for BN, u for BLS.
    pub fn loop_bound(&self) -> BigInt {
        match self.family {
            Family::Bn => 6 * &self.u + 2,
            _ => self.u.clone(),
        }
    }

    pub fn fp(&self) -> &PrimeField {
        &self.tower.fp
    }

    /// Degree of the twist field over Fp.
    pub fn q_deg(&self) -> usize {
        self.tower.degs[self.tower.twist_level()]
    }

    /// (p^k − 1)/r.
    pub fn final_exponent(&self) -> BigUint {
        (self.p.pow(self.k as u32) - BigUint::one()) / &self.r
    }

    pub fn is_bn(&self) -> bool {
        self.family == Family::Bn
    }

    pub fn u_abs(&self) -> BigUint {
        self.u.abs().to_biguint().unwrap_or_default()
    }
}

fn check_sizes(id: &str, p: &BigUint, r: &BigUint, k: usize) -> Result<(), FieldError> {
    let Some(&(_, lp, lr, klp)) = SIZE_TABLE.iter().find(|row| row.0 == id) else {
        return Ok(());
    };
    let kl = k as f64 * log2(p);
    if p.bits() != lp || r.bits() != lr || (kl.ceil() as i64 - klp as i64).abs() > 1 {
        return Err(FieldError::BadCurve(format!(
            "{id}: sizes {}/{}/{:.1} differ from expected {lp}/{lr}/{klp}",
            p.bits(),
            r.bits(),
            kl
        )));
    }
    Ok(())
}

pub fn log2(v: &BigUint) -> f64 {
    let bits = v.bits();
    if bits <= 52 {
        return (v.iter_u64_digits().next().unwrap_or(0) as f64).log2();
    }
    let top = v >> (bits - 52);
    (top.iter_u64_digits().next().unwrap_or(0) as f64).log2() + (bits - 52) as f64
}

fn check_frobenius_table(t: &Tower, table: &[Vec<Vec<String>>]) -> Result<(), FieldError> {
    if table.len() != t.levels.len() {
        return Err(FieldError::BadCurve("frobenius table has wrong level count".into()));
    }
    for (l, rows) in table.iter().enumerate() {
        if rows.len() != t.k() {
            return Err(FieldError::BadCurve(format!("frobenius table level {} has {} rows", l + 1, rows.len())));
        }
        for (i, row) in rows.iter().enumerate() {
            let want = &t.gamma[l][i][1.min(t.levels[l].ext - 1)];
            let got = row
                .iter()
                .map(|s| Ok(t.fp.from_big(&parse_unsigned(s)?)))
                .collect::<Result<Vec<_>, FieldError>>()?;
            if &got != want {
                return Err(FieldError::BadCurve(format!("frobenius constant [{}][{i}] is wrong", l + 1)));
            }
        }
    }
    Ok(())
}

impl fmt::Display for CurveSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} ({}, k = {}, log p = {}, log r = {}, u = {}{:#x})",
            self.id,
            self.family,
            self.k,
            self.p.bits(),
            self.r.bits(),
            if self.u.is_negative() { "-" } else { "" },
            self.u.magnitude()
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bn254_loads_with_expected_sizes() {
        let c = CurveSpec::shipped("BN254N").unwrap();
        assert_eq!(c.p.bits(), 254);
        assert_eq!(c.r.bits(), 254);
        assert_eq!(c.family, Family::Bn);
        assert!(c.loop_bound().bits() > 0);
    }

    #[test]
    fn rejects_tampered_parameters() {
        let src = include_str!("../../curves/bn254.toml");
        let bad = src.replacen("b = \"0x2\"", "b = \"0x3\"", 1);
        assert!(CurveSpec::from_toml(&bad).is_err());
        let bad = src.replacen("family = \"BN\"", "family = \"BLS12\"", 1);
        assert!(CurveSpec::from_toml(&bad).is_err());
        let bad = format!("{src}\nextra = 1\n");
        assert!(CurveSpec::from_toml(&bad).is_err());
    }

    #[test]
    fn hex_parsing() {
        assert_eq!(parse_hex("-0x10").unwrap(), BigInt::from(-16));
        assert!(parse_hex("16").is_err());
    }
}
