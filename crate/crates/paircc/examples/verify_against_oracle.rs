//! Runs a compiled program on the functional simulator and compares every
//! output coefficient with the reference pairing, then checks bilinearity.

use paircc::field::CurveSpec;
use paircc::pipeline::{compile, CompileConfig};
use paircc::verify::verify_machine;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> anyhow::Result<()> {
    let curve = std::env::args().nth(1).unwrap_or_else(|| "bn254".into());
    let spec = CurveSpec::shipped(&curve)?;
    let c = compile(&CompileConfig::new(spec.clone()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(paircc::DEFAULT_SEED);
    let rep = verify_machine(&spec, &c.machine, 3, 1, &mut rng)?;
    match &rep.mismatch {
        None => println!("{curve}: {} pairs and {} bilinearity checks agree", rep.trials, rep.bilinear),
        Some(m) => anyhow::bail!("{curve}: {m}"),
    }
    Ok(())
}
