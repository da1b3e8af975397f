//! Pairing test vectors, one JSON record per line.

use num_bigint::BigUint;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{optimal_ate, random_pair, PairingError};
use crate::field::point::Affine;
use crate::field::{CurveSpec, Fp, PrimeField};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vector {
    pub curve: String,
    pub p: [Vec<String>; 2],
    pub q: [Vec<String>; 2],
    pub e: Vec<String>,
}

fn hex(f: &PrimeField, v: &[Fp]) -> Vec<String> {
    v.iter().map(|x| format!("0x{}", f.to_big(x).to_str_radix(16))).collect()
}

fn unhex(f: &PrimeField, v: &[String]) -> Result<Vec<Fp>, PairingError> {
    v.iter()
        .map(|s| {
            let d = s.strip_prefix("0x").unwrap_or(s);
            BigUint::parse_bytes(d.as_bytes(), 16)
                .map(|b| f.from_big(&b))
                .ok_or(PairingError::NotOnCurve)
        })
        .collect()
}

impl Vector {
    pub fn new(spec: &CurveSpec, p: &Affine, q: &Affine) -> Result<Self, PairingError> {
        let f = spec.fp();
        let e = optimal_ate(spec, p, q)?;
        Ok(Vector {
            curve: spec.id.clone(),
            p: [hex(f, &p.x), hex(f, &p.y)],
            q: [hex(f, &q.x), hex(f, &q.y)],
            e: hex(f, &e),
        })
    }

    pub fn points(&self, spec: &CurveSpec) -> Result<(Affine, Affine), PairingError> {
        let f = spec.fp();
        Ok((
            Affine::new(unhex(f, &self.p[0])?, unhex(f, &self.p[1])?),
            Affine::new(unhex(f, &self.q[0])?, unhex(f, &self.q[1])?),
        ))
    }

    /// Recomputes the pairing and compares with the stored value.
    pub fn check(&self, spec: &CurveSpec) -> Result<bool, PairingError> {
        let (p, q) = self.points(spec)?;
        Ok(hex(spec.fp(), &optimal_ate(spec, &p, &q)?) == self.e)
    }
}

pub fn generate<R: Rng + ?Sized>(spec: &CurveSpec, n: usize, rng: &mut R) -> Result<Vec<Vector>, PairingError> {
    (0..n)
        .map(|_| {
            let (p, q) = random_pair(spec, rng);
            Vector::new(spec, &p, &q)
        })
        .collect()
}

pub fn to_lines(v: &[Vector]) -> String {
    v.iter().map(|x| serde_json::to_string(x).expect("vector serializes") + "\n").collect()
}

pub fn from_lines(s: &str) -> Result<Vec<Vector>, serde_json::Error> {
    s.lines().filter(|l| !l.trim().is_empty()).map(serde_json::from_str).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn vectors_round_trip_and_recheck() {
        let s = CurveSpec::shipped("bn254").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let v = generate(&s, 2, &mut rng).unwrap();
        let back = from_lines(&to_lines(&v)).unwrap();
        assert_eq!(v, back);
        assert!(back.iter().all(|x| x.check(&s).unwrap()));
        let mut bad = back[0].clone();
        bad.e[0] = "0x1".into();
        assert!(!bad.check(&s).unwrap());
    }
}
