//! Lowers the pairing to prime-field IR, runs the passes one round at a
//! time and round-trips the result through the text format.

use paircc::field::{CurveSpec, Selection};
use paircc::ir::{codegen, exec, lower, text, CodegenOptions};
use paircc::opt::{run_pipeline, Pass};
use paircc::pairing::{optimal_ate, random_pair};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> anyhow::Result<()> {
    let spec = CurveSpec::shipped("bn254")?;
    let sel = Selection::schoolbook(&spec.tower);
    let hi = codegen(&spec, CodegenOptions { naf: false });
    let init = lower(&hi, &spec, &sel)?;
    let (opt, reports) = run_pipeline(&init, &spec, &Pass::PIPELINE, true);
    for r in &reports {
        println!("round {} {:<16} {:>6} -> {:>6}", r.round, r.pass, r.before, r.after);
    }
    let src = text::print(&opt);
    println!("{}", src.lines().take(6).collect::<Vec<_>>().join("\n"));
    let back = text::parse(&src)?;
    let (p, q) = random_pair(&spec, &mut ChaCha8Rng::seed_from_u64(3));
    let out = exec::evaluate(&back, &spec, &sel, &exec::pair_inputs(&spec, &p, &q))?;
    anyhow::ensure!(exec::outputs_to_mont(&spec, &out) == optimal_ate(&spec, &p, &q)?, "parsed IR disagrees");
    println!("{} lines of IR, parsed program matches the reference", src.lines().count());
    Ok(())
}
