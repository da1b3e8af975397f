//! Schedules for a two-wide machine with two banks and a writeback FIFO,
//! checks the schedule and compares cycles with the single-issue default.

use paircc::backend::check_schedule;
use paircc::field::CurveSpec;
use paircc::hw::{validate_model, HardwareModel};
use paircc::pipeline::{compile, CompileConfig};

fn main() -> anyhow::Result<()> {
    let spec = CurveSpec::shipped("bn254")?;
    let mut wide = HardwareModel::with_fifo();
    wide.width = 2;
    wide.banks = 2;
    wide.linear_alus = 2;
    anyhow::ensure!(validate_model(&wide).is_empty());
    for m in [HardwareModel::default(), wide] {
        let cfg = CompileConfig::new(spec.clone()).with_model(m);
        let c = compile(&cfg)?;
        let v = check_schedule(&c.opt, &c.schedule, &cfg.model);
        println!("width {}: {} cycles, IPC {:.3}, {} violations", cfg.model.width, c.stats.cycles, c.stats.ipc, v.len());
    }
    Ok(())
}
