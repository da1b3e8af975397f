//! Encodes a program, decodes every word and reloads the binary image.

use paircc::backend::{decode, encode, MachineProgram};
use paircc::field::CurveSpec;
use paircc::pipeline::{compile, CompileConfig};

fn main() -> anyhow::Result<()> {
    let c = compile(&CompileConfig::new(CurveSpec::shipped("bn254")?))?;
    let m = &c.machine;
    for &w in &m.words {
        assert_eq!(encode(&decode(w)?)?, w);
    }
    let bytes = m.to_bytes();
    assert_eq!(&MachineProgram::from_bytes(&bytes)?, m);
    let (total, long) = m.counts()?;
    println!("{} words, {} bytes, {total} instructions ({long} long)", m.words.len(), bytes.len());
    print!("{}", m.listing()?.lines().skip(100).take(8).map(|l| format!("{l}\n")).collect::<String>());
    Ok(())
}
