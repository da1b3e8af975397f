//! Generates reference vectors as JSON lines and rechecks them.

use paircc::field::CurveSpec;
use paircc::pairing::vectors;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> anyhow::Result<()> {
    let spec = CurveSpec::shipped("bls12_381")?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let text = vectors::to_lines(&vectors::generate(&spec, 2, &mut rng)?);
    for v in vectors::from_lines(&text)? {
        anyhow::ensure!(v.check(&spec)?, "vector does not recheck");
        println!("{} e[0] = {}", v.curve, v.e[0]);
    }
    println!("{} bytes of vectors", text.len());
    Ok(())
}
