//! Compiles the optimal-Ate pairing for one curve and writes the binary.
//!
//! `cargo run --release --example compile_pairing -- bls12_381 /tmp/bls.bin`

use paircc::field::CurveSpec;
use paircc::pipeline::{compile, CompileConfig};

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let curve = args.next().unwrap_or_else(|| "bn254".into());
    let spec = CurveSpec::shipped(&curve)?;
    let c = compile(&CompileConfig::new(spec))?;
    let s = &c.stats;
    println!("{curve}: {} -> {} instructions ({:.1}% fewer)", s.init_instrs, s.opt_instrs, 100.0 * s.reduction());
    println!("{} slots, {} cycles, IPC {:.3}, peak {} registers", s.slots, s.cycles, s.ipc, s.peak_registers);
    for r in c.reports.iter().filter(|r| r.before != r.after) {
        println!("  round {} {:<16} {:>7} -> {:>7}", r.round, r.pass, r.before, r.after);
    }
    if let Some(path) = args.next() {
        std::fs::write(&path, c.machine.to_bytes())?;
        println!("wrote {path}");
    }
    Ok(())
}
