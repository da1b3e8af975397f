//! Compares variant presets on one curve and ranks them by cycle count.
//!
//! `cargo run --release --example explore_variants -- bls24_509`

use paircc::dse::{design_points, enumerate_variants, explore, ExploreConfig, Preset};
use paircc::field::CurveSpec;
use paircc::hw::HardwareModel;

fn main() -> anyhow::Result<()> {
    let curve = std::env::args().nth(1).unwrap_or_else(|| "bn254".into());
    let spec = CurveSpec::shipped(&curve)?;
    let t = &spec.tower;
    let mut sels = Vec::new();
    for p in [Preset::AllSchoolbook, Preset::AllKaratsuba, Preset::NoKaratsubaAt(2)] {
        sels.extend(enumerate_variants(t, &p.restrictions(t)?)?);
    }
    let points = design_points(sels, &[HardwareModel::default()]);
    let x = explore(&spec, points, &ExploreConfig::default(), None)?;
    for r in &x.ranking {
        let m = r.metrics.as_ref().unwrap();
        println!("{:>8} cycles  IPC {:.3}  mul {:?}  sqr {:?}", m.cycles, m.ipc, r.point.sel.mul, r.point.sel.sqr);
    }
    Ok(())
}
