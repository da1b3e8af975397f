//! Cycle-accurate run with stall accounting and a waterfall of a few cycles.

use paircc::field::CurveSpec;
use paircc::hw::HardwareModel;
use paircc::ir::exec::pair_inputs;
use paircc::pairing::random_pair;
use paircc::pipeline::{compile, CompileConfig};
use paircc::sim::{cycle_sim, waterfall_dump, SimOptions};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> anyhow::Result<()> {
    let spec = CurveSpec::shipped("bn254")?;
    for model in [HardwareModel::default(), HardwareModel::with_fifo()] {
        let cfg = CompileConfig::new(spec.clone()).with_model(model);
        let c = compile(&cfg)?;
        let (p, q) = random_pair(&spec, &mut ChaCha8Rng::seed_from_u64(1));
        let opts = SimOptions { window: Some((3000, 3016)), ..Default::default() };
        let r = cycle_sim(&c.machine, &cfg.model, spec.fp(), &pair_inputs(&spec, &p, &q), &opts)?;
        println!("fifo={}: {}", cfg.model.fifo.present, r.summary());
        print!("{}", waterfall_dump(&r, 3000, 3016)?);
    }
    Ok(())
}
