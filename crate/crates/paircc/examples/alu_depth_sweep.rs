//! Reschedules BN254 for several multiplier pipeline depths and picks the
//! depth with the best throughput under a saturating clock model.

use paircc::dse::{alu_depth_sweep, pipelined_frequency};
use paircc::field::CurveSpec;
use paircc::pipeline::{lower_and_optimize, CompileConfig};

fn main() -> anyhow::Result<()> {
    let cfg = CompileConfig::new(CurveSpec::shipped("bn254")?);
    let (_, opt, _) = lower_and_optimize(&cfg)?;
    let depths = [8, 16, 24, 38, 64];
    let freq = pipelined_frequency(&depths, 12.0, 1.0);
    let sweep = alu_depth_sweep(&opt, &cfg.model, &depths, Some(&freq), 0.0)?;
    print!("{}", sweep.table());
    println!("best depth: {:?}", sweep.best);
    Ok(())
}
