//! Prime fields, extension towers, curve parameters and point arithmetic.

pub mod backend;
pub mod curve;
pub mod fp;
pub mod point;
pub mod ring;
pub mod tower;
pub mod variants;

pub use backend::{Count, Eval, FpBackend, OpCounts};
pub use curve::{CurveSpec, Family, TwistType};
pub use fp::{Fp, PrimeField, Repr};
pub use ring::{Cost, Ring};
pub use tower::{Arith, Coords, Selection, Tower};
pub use variants::{OpKind, Variant};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("inversion of zero")]
    InverseOfZero,
    #[error("modulus is not an odd prime: {0}")]
    BadModulus(String),
    #[error("invalid tower: {0}")]
    BadTower(String),
    #[error("unknown variant `{0}`")]
    UnknownVariant(String),
    #[error("variant {variant} is not defined for {kind} at extension degree {ext}")]
    VariantMismatch { variant: Variant, ext: usize, kind: OpKind },
    #[error("no variant selected for {kind} at level of degree {level}")]
    MissingSelection { level: usize, kind: OpKind },
    #[error("frobenius power {0} out of range")]
    FrobeniusRange(usize),
    #[error("invalid curve parameters: {0}")]
    BadCurve(String),
    #[error("point is not on the curve")]
    NotOnCurve,
    #[error("degenerate point addition (P = ±Q)")]
    DegenerateAdd,
}
