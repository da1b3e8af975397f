//! Functional verification of machine programs against the reference pairing.

use num_bigint::BigUint;
use rand::Rng;
use serde::Serialize;

use crate::backend::MachineProgram;
use crate::field::{CurveSpec, Fp};
use crate::ir::exec::{outputs_to_mont, pair_inputs};
use crate::pairing::{optimal_ate, random_pair, random_scalar, PairingError};
use crate::sim::{func_sim, SimError};

#[derive(Debug, thiserror::Error)]
pub enum VerifyError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Pairing(#[from] PairingError),
}

/// First differing output coefficient of a failed trial.
#[derive(Clone, Debug, Serialize)]
pub struct Mismatch {
    pub trial: usize,
    pub coeff: usize,
    pub expected: String,
    pub got: String,
    pub bilinearity: bool,
}

impl std::fmt::Display for Mismatch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let what = if self.bilinearity { "bilinearity" } else { "oracle" };
        write!(f, "{what} trial {}: coefficient {} differs\n  expected 0x{}\n  got      0x{}", self.trial, self.coeff, self.expected, self.got)
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct VerifyReport {
    pub trials: usize,
    pub bilinear: usize,
    pub mismatch: Option<Mismatch>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.mismatch.is_none()
    }
}

/// Runs `p` on the functional simulator; returns Montgomery coefficients.
pub fn run_pairing(spec: &CurveSpec, p: &MachineProgram, pq: (&crate::field::point::Affine, &crate::field::point::Affine)) -> Result<Vec<Fp>, SimError> {
    let out = func_sim(p, spec.fp(), &pair_inputs(spec, pq.0, pq.1))?;
    Ok(outputs_to_mont(spec, &out))
}

fn first_diff(spec: &CurveSpec, want: &[Fp], got: &[Fp], trial: usize, bilinearity: bool) -> Option<Mismatch> {
    let f = spec.fp();
    (0..want.len().max(got.len())).find(|&i| want.get(i) != got.get(i)).map(|i| {
        let show = |v: Option<&Fp>| v.map_or("(missing)".into(), |x| f.to_big(x).to_str_radix(16));
        Mismatch { trial, coeff: i, expected: show(want.get(i)), got: show(got.get(i)), bilinearity }
    })
}

/// Compares `p` with the oracle on `trials` random pairs, then checks
/// e([a]P, [b]Q) = e(P, Q)^(ab) on `bilinear` random (a, b). Stops at the
/// first mismatch.
pub fn verify_machine<R: Rng + ?Sized>(spec: &CurveSpec, p: &MachineProgram, trials: usize, bilinear: usize, rng: &mut R) -> Result<VerifyReport, VerifyError> {
    let mut rep = VerifyReport::default();
    for t in 0..trials {
        let (a, b) = random_pair(spec, rng);
        let want = optimal_ate(spec, &a, &b)?;
        let got = run_pairing(spec, p, (&a, &b))?;
        rep.trials += 1;
        if let Some(m) = first_diff(spec, &want, &got, t, false) {
            rep.mismatch = Some(m);
            return Ok(rep);
        }
    }
    for t in 0..bilinear {
        let (pp, qq) = random_pair(spec, rng);
        let a = random_scalar(rng, &spec.r);
        let b = random_scalar(rng, &spec.r);
        let e = run_pairing(spec, p, (&pp, &qq))?;
        let pa = spec.g1_curve().mul(&pp, &a);
        let qb = spec.g2_curve().mul(&qq, &b);
        let lhs = run_pairing(spec, p, (&pa, &qb))?;
        let ab: BigUint = a * b;
        let rhs = spec.tower.eval().pow(&e, &ab);
        rep.bilinear += 1;
        if let Some(m) = first_diff(spec, &rhs, &lhs, t, true) {
            rep.mismatch = Some(m);
            return Ok(rep);
        }
    }
    Ok(rep)
}
