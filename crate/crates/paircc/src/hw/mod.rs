//! Pipeline models, the machine opcode set and per-opcode itineraries.

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::ir::Opcode;

#[derive(Debug, Error)]
pub enum HwError {
    #[error("hardware model: {0}")]
    Parse(String),
    #[error("invalid hardware model: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error("opcode `{0}` has no machine instruction")]
    NotMachine(Opcode),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fifo {
    pub present: bool,
    #[serde(default = "default_depth")]
    pub depth: u32,
}

fn default_depth() -> u32 {
    4
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Latency {
    pub long: u32,
    pub short: u32,
    /// Iterative inverter latency; `None` means 2·⌈log₂ p⌉ for the curve.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inv: Option<u32>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pipelined {
    pub long: bool,
    pub short: bool,
}

impl Default for Pipelined {
    fn default() -> Self {
        Pipelined { long: true, short: true }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HardwareModel {
    pub width: u32,
    pub linear_alus: u32,
    #[serde(default = "one")]
    pub mmul_alus: u32,
    pub banks: u32,
    pub regs_per_bank: u32,
    pub read_ports: u32,
    pub write_ports: u32,
    pub fifo: Fifo,
    pub latency: Latency,
    #[serde(default)]
    pub pipelined: Pipelined,
}

fn one() -> u32 {
    1
}

impl Default for HardwareModel {
    /// Single issue, one bank, 2R1W, Long 38, Short 8, no FIFO.
    fn default() -> Self {
        HardwareModel {
            width: 1,
            linear_alus: 1,
            mmul_alus: 1,
            banks: 1,
            regs_per_bank: 4096,
            read_ports: 2,
            write_ports: 1,
            fifo: Fifo { present: false, depth: 4 },
            latency: Latency { long: 38, short: 8, inv: None },
            pipelined: Pipelined::default(),
        }
    }
}

/// A broken model constraint.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub tag: &'static str,
    pub msg: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.tag, self.msg)
    }
}

pub const C_MMUL: &str = "mmul-count";
pub const C_BANKS: &str = "banks-vs-width";
pub const C_PORTS: &str = "port-minimum";
pub const C_FIFO: &str = "fifo-for-vliw";
pub const C_LATENCY: &str = "long-above-short";
pub const C_SANITY: &str = "nonzero-resources";

/// All violated constraints; empty when the model is usable.
pub fn validate_model(m: &HardwareModel) -> Vec<Violation> {
    let mut v = Vec::new();
    let mut push = |tag, msg: String| v.push(Violation { tag, msg });
    if m.mmul_alus > 1 {
        push(C_MMUL, format!("at most one modular multiplier per core, got {}", m.mmul_alus));
    }
    if m.banks < m.width {
        push(C_BANKS, format!("{} banks cannot feed a {}-wide issue", m.banks, m.width));
    }
    if m.read_ports < 2 || m.write_ports < 1 {
        push(C_PORTS, format!("need at least 2 read and 1 write port per bank, got {}R{}W", m.read_ports, m.write_ports));
    }
    if m.width >= 2 && !m.fifo.present {
        push(C_FIFO, format!("a {}-wide issue needs a writeback FIFO", m.width));
    }
    if m.latency.long <= m.latency.short {
        push(C_LATENCY, format!("Long latency {} must exceed Short latency {}", m.latency.long, m.latency.short));
    }
    let zero = [
        ("width", m.width),
        ("linear_alus", m.linear_alus),
        ("mmul_alus", m.mmul_alus),
        ("banks", m.banks),
        ("regs_per_bank", m.regs_per_bank),
        ("latency.short", m.latency.short),
    ];
    for (name, val) in zero {
        if val == 0 {
            push(C_SANITY, format!("{name} must be positive"));
        }
    }
    if m.fifo.present && m.fifo.depth == 0 {
        push(C_SANITY, "fifo.depth must be positive when present".into());
    }
    if m.latency.inv == Some(0) {
        push(C_SANITY, "latency.inv must be positive".into());
    }
    if m.banks > 16 || m.regs_per_bank > 4096 {
        push(C_SANITY, "encoding holds at most 16 banks of 4096 registers".into());
    }
    v
}

impl HardwareModel {
    pub fn from_toml(text: &str) -> Result<Self, HwError> {
        let m: HardwareModel = toml::from_str(text).map_err(|e| HwError::Parse(e.to_string()))?;
        let v = validate_model(&m);
        if !v.is_empty() {
            return Err(HwError::Invalid(v));
        }
        Ok(m)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, HwError> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("model serializes")
    }

    /// Default model with a writeback FIFO of the default depth.
    pub fn with_fifo() -> Self {
        let mut m = Self::default();
        m.fifo.present = true;
        m
    }

    /// Fixes the inverter latency for a modulus of `p_bits` bits.
    pub fn resolved(&self, p_bits: u64) -> Self {
        let mut m = self.clone();
        if m.latency.inv.is_none() {
            // ⌈log₂ p⌉ is the bit length for an odd prime
            m.latency.inv = Some(2 * p_bits as u32);
        }
        m
    }

    pub fn fifo_depth(&self) -> u32 {
        if self.fifo.present {
            self.fifo.depth
        } else {
            0
        }
    }

    /// Stable short hash of the resolved model.
    pub fn fingerprint(&self) -> u64 {
        let json = serde_json::to_string(self).expect("model serializes");
        let d = Sha256::digest(json.as_bytes());
        u64::from_le_bytes(d[..8].try_into().unwrap())
    }

    pub fn itinerary(&self, op: MOp) -> Itinerary {
        let l = &self.latency;
        let (unit, latency, pipelined) = match op.class() {
            Class::None => return Itinerary { unit: Unit::None, latency: 1, occupancy: 0, reads: 0, writes: 0 },
            Class::Long => (Unit::Mmul, l.long, self.pipelined.long),
            Class::Short => (Unit::Linear, l.short, self.pipelined.short),
            Class::Inv => (Unit::Minv, l.inv.expect("resolved model"), false),
        };
        Itinerary { unit, latency, occupancy: if pipelined { 1 } else { latency }, reads: op.arity() as u32, writes: 1 }
    }

    /// Issue capacity of a unit per cycle.
    pub fn units(&self, u: Unit) -> u32 {
        match u {
            Unit::None => self.width,
            Unit::Linear => self.linear_alus,
            Unit::Mmul => self.mmul_alus,
            Unit::Minv => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Unit {
    None,
    Linear,
    Mmul,
    Minv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Class {
    None,
    Long,
    Short,
    Inv,
}

/// Resource and timing signature of one opcode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Itinerary {
    pub unit: Unit,
    /// Cycles from issue until the result reaches writeback.
    pub latency: u32,
    /// Cycles the unit stays blocked after issue (1 when pipelined).
    pub occupancy: u32,
    pub reads: u32,
    pub writes: u32,
}

macro_rules! mops {
    ($($v:ident = $code:literal, $name:literal, $arity:literal, $class:ident;)*) => {
        /// Machine opcodes.
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[repr(u8)]
        pub enum MOp { $($v = $code),* }

        impl MOp {
            pub const ALL: &'static [MOp] = &[$(MOp::$v),*];
            pub fn name(self) -> &'static str {
                match self { $(MOp::$v => $name),* }
            }
            pub fn arity(self) -> usize {
                match self { $(MOp::$v => $arity),* }
            }
            pub fn class(self) -> Class {
                match self { $(MOp::$v => Class::$class),* }
            }
            pub fn from_code(c: u8) -> Option<MOp> {
                match c { $($code => Some(MOp::$v),)* _ => None }
            }
        }
    };
}

mops! {
    Nop = 0, "NOP", 0, None;
    Add = 1, "ADD", 2, Short;
    Sub = 2, "SUB", 2, Short;
    Neg = 3, "NEG", 1, Short;
    Dbl = 4, "DBL", 1, Short;
    Tpl = 5, "TPL", 1, Short;
    Mul = 6, "MUL", 2, Long;
    Sqr = 7, "SQR", 1, Long;
    Inv = 8, "INV", 1, Inv;
    Cvt = 9, "CVT", 1, Short;
    Icv = 10, "ICV", 1, Short;
}

impl fmt::Display for MOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl TryFrom<Opcode> for MOp {
    type Error = HwError;
    fn try_from(o: Opcode) -> Result<Self, HwError> {
        Ok(match o {
            Opcode::Add => MOp::Add,
            Opcode::Sub => MOp::Sub,
            Opcode::Neg => MOp::Neg,
            Opcode::Dbl => MOp::Dbl,
            Opcode::Tpl => MOp::Tpl,
            Opcode::Mul => MOp::Mul,
            Opcode::Sqr => MOp::Sqr,
            Opcode::Inv => MOp::Inv,
            Opcode::Cvt => MOp::Cvt,
            Opcode::Icv => MOp::Icv,
            o => return Err(HwError::NotMachine(o)),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn default_model_and_itineraries() {
        let m = HardwareModel::default().resolved(254);
        assert!(validate_model(&m).is_empty());
        assert_eq!(m.itinerary(MOp::Mul).latency, 38);
        assert_eq!(m.itinerary(MOp::Add).latency, 8);
        assert_eq!(m.itinerary(MOp::Cvt).unit, Unit::Linear);
        let nop = m.itinerary(MOp::Nop);
        assert_eq!((nop.latency, nop.reads, nop.writes), (1, 0, 0));
        let inv = m.itinerary(MOp::Inv);
        assert_eq!((inv.latency, inv.occupancy), (508, 508));
        for &op in MOp::ALL {
            assert_eq!(MOp::from_code(op as u8), Some(op));
        }
    }

    #[test]
    fn named_violations() {
        let mut m = HardwareModel { width: 2, banks: 2, ..Default::default() };
        assert_eq!(validate_model(&m).iter().map(|v| v.tag).collect::<Vec<_>>(), vec![C_FIFO]);
        m.fifo.present = true;
        m.mmul_alus = 2;
        assert_eq!(validate_model(&m)[0].tag, C_MMUL);
    }

    #[test]
    fn toml_round_trip_and_strict_keys() {
        let m = HardwareModel::with_fifo();
        assert_eq!(HardwareModel::from_toml(&m.to_toml()).unwrap(), m);
        let bad = m.to_toml().replace("width = 1", "width = 1\nwidht = 2");
        assert!(matches!(HardwareModel::from_toml(&bad), Err(HwError::Parse(_))));
    }

    /// Independent restatement of the constraints.
    fn brute_ok(t: (u32, u32, u32, u32, u32, u32, bool, u32, u32)) -> bool {
        let (width, mmul, banks, rp, wp, depth, fifo, long, short) = t;
        let five = mmul <= 1 && banks >= width && rp >= 2 && wp >= 1 && (width < 2 || fifo) && long > short;
        let sane = width > 0 && mmul > 0 && banks > 0 && short > 0 && (!fifo || depth > 0) && banks <= 16;
        five && sane
    }

    proptest! {
        #[test]
        fn validation_matches_brute_force(
            width in 0u32..5, mmul in 0u32..3, banks in 0u32..18, rp in 0u32..4, wp in 0u32..3,
            depth in 0u32..3, fifo: bool, long in 0u32..50, short in 0u32..50,
        ) {
            let m = HardwareModel {
                width, linear_alus: 1, mmul_alus: mmul, banks, regs_per_bank: 64, read_ports: rp, write_ports: wp,
                fifo: Fifo { present: fifo, depth },
                latency: Latency { long, short, inv: None },
                pipelined: Pipelined::default(),
            };
            prop_assert_eq!(validate_model(&m).is_empty(), brute_ok((width, mmul, banks, rp, wp, depth, fifo, long, short)));
        }
    }
}
