//! Compiler, simulators and design-space explorer for optimal-Ate pairings
//! targeting a VLIW ISA whose operations work on single prime-field elements.

pub mod field;
pub mod pairing;
pub mod ir;
pub mod opt;
pub mod hw;
pub mod backend;
pub mod pipeline;
pub mod sim;
pub mod dse;
pub mod verify;
pub mod cli;

/// Seed used when a command is not given one.
pub const DEFAULT_SEED: u64 = 0x5eed_2024;
