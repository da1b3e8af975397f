use std::collections::BTreeMap;

use serde::Serialize;

use crate::backend::pack_schedule;
use crate::hw::HardwareModel;
use crate::ir::Program;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DepthRow {
    pub depth: u32,
    pub cycles: u64,
    pub ipc: f64,
    /// Clock frequency in MHz, when a table was given.
    pub freq_mhz: Option<f64>,
    /// Pairings per second at that frequency.
    pub throughput: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DepthSweep {
    pub rows: Vec<DepthRow>,
    /// Depth with the highest throughput.
    pub best: Option<u32>,
}

impl DepthSweep {
    pub fn table(&self) -> String {
        let mut s = format!("{:>6} {:>10} {:>7} {:>9} {:>12}\n", "depth", "cycles", "ipc", "MHz", "pairings/s");
        for r in &self.rows {
            let f = r.freq_mhz.map_or("-".into(), |x| format!("{x:.1}"));
            let t = r.throughput.map_or("-".into(), |x| format!("{x:.1}"));
            s.push_str(&format!("{:>6} {:>10} {:>7.4} {:>9} {:>12}\n", r.depth, r.cycles, r.ipc, f, t));
        }
        s
    }
}

/// Reschedules `prog` for each Long latency in `depths` on top of `base`.
/// With a frequency table (depth → MHz), throughput = frequency / cycles.
pub fn alu_depth_sweep(prog: &Program, base: &HardwareModel, depths: &[u32], freq: Option<&BTreeMap<u32, f64>>, beta: f64) -> Result<DepthSweep, crate::backend::BackendError> {
    let mut rows = Vec::new();
    for &d in depths {
        let mut m = base.clone();
        m.latency.long = d.max(m.latency.short + 1);
        let s = pack_schedule(prog, &m, beta)?;
        let f = freq.and_then(|t| t.get(&d).copied());
        rows.push(DepthRow { depth: d, cycles: s.stats.cycles, ipc: s.stats.ipc(), freq_mhz: f, throughput: f.map(|f| f * 1e6 / s.stats.cycles as f64) });
    }
    let best = rows.iter().filter(|r| r.throughput.is_some()).max_by(|a, b| a.throughput.unwrap().total_cmp(&b.throughput.unwrap()).then(b.depth.cmp(&a.depth))).map(|r| r.depth);
    Ok(DepthSweep { rows, best })
}

/// Saturating frequency model of a pipelined multiplier: splitting `logic_ns`
/// of logic over `depth` stages with `overhead_ns` of register overhead per
/// stage gives `1000 / (logic_ns / depth + overhead_ns)` MHz.
pub fn pipelined_frequency(depths: &[u32], logic_ns: f64, overhead_ns: f64) -> BTreeMap<u32, f64> {
    depths.iter().map(|&d| (d, 1000.0 / (logic_ns / d as f64 + overhead_ns))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::{Imm, Op, Opcode, Ty};

    #[test]
    fn constant_frequency_picks_fewest_cycles() {
        let mut p = Program::new("t");
        let mut x = p.push(Op::new(Opcode::Input, Ty::Fp, &[], Imm::Int(0)));
        for _ in 0..5 {
            x = p.push(Op::new(Opcode::Sqr, Ty::Fp, &[x], Imm::None));
        }
        p.outputs = vec![x];
        let m = HardwareModel::default().resolved(254);
        let depths = [12, 24, 48];
        let flat: BTreeMap<u32, f64> = depths.iter().map(|&d| (d, 500.0)).collect();
        let s = alu_depth_sweep(&p, &m, &depths, Some(&flat), 0.0).unwrap();
        let fastest = s.rows.iter().min_by_key(|r| r.cycles).unwrap().depth;
        assert_eq!(s.best, Some(fastest));
        assert!(s.rows.windows(2).all(|w| w[0].ipc >= w[1].ipc));
    }

    #[test]
    fn frequency_saturates() {
        let f = pipelined_frequency(&[8, 16, 64, 1024], 40.0, 0.5);
        assert!(f[&8] < f[&16] && f[&16] < f[&64]);
        assert!(f[&1024] < 2000.0);
    }
}
