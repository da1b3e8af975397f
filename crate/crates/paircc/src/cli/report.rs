use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;

use anyhow::{Context, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{model_label, parse_window, selection_label, ProjectConfig, ReportArgs};
use crate::dse::{self, alu_depth_sweep, design_points, enumerate_variants, pipelined_frequency, ExploreConfig, Preset};
use crate::ir::exec::pair_inputs;
use crate::pairing::random_pair;
use crate::pipeline::{compile, lower_and_optimize};
use crate::sim::{cycle_sim, waterfall_dump, SimOptions};

/// Selections per preset row group.
const MAX_PER_PRESET: usize = 32;

/// Reads `depth ns` lines into depth → MHz.
fn freq_table(text: &str) -> Result<BTreeMap<u32, f64>> {
    let mut t = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let (Some(d), Some(ns), None) = (it.next(), it.next(), it.next()) else {
            anyhow::bail!("frequency table line {}: expected `depth ns`", n + 1);
        };
        let ns: f64 = ns.parse().with_context(|| format!("frequency table line {}", n + 1))?;
        t.insert(d.parse().with_context(|| format!("frequency table line {}", n + 1))?, 1000.0 / ns);
    }
    Ok(t)
}

pub fn report(a: &ReportArgs, pc: &ProjectConfig, out: &mut dyn Write) -> Result<()> {
    let cfg = a.target.resolve(pc)?;
    let spec = &cfg.spec;
    let seed = pc.seed(a.seed);
    let mut s = String::new();

    writeln!(s, "# {} on {}\n", spec.id, model_label(&cfg.model))?;
    writeln!(s, "## Cycles by variant selection\n")?;
    writeln!(s, "| preset | selection | instrs | cycles | IPC |")?;
    writeln!(s, "|---|---|---:|---:|---:|")?;
    let ecfg = ExploreConfig { beta: cfg.beta, passes: cfg.passes.clone(), seed, ..Default::default() };
    for name in a.variant_presets.split(',').map(str::trim).filter(|x| !x.is_empty()) {
        let p: Preset = name.parse()?;
        let sels: Vec<_> = enumerate_variants(&spec.tower, &p.restrictions(&spec.tower)?)?.take(MAX_PER_PRESET).collect();
        let x = dse::explore(spec, design_points(sels, std::slice::from_ref(&cfg.model)), &ecfg, None)?;
        for r in &x.ranking {
            let m = r.metrics.as_ref().expect("ranked");
            writeln!(s, "| {p} | {} | {} | {} | {:.3} |", selection_label(&r.point.sel), m.instrs, m.cycles, m.ipc)?;
        }
        for r in &x.failed {
            writeln!(s, "| {p} | {} | failed: {} | | |", selection_label(&r.point.sel), r.error.as_deref().unwrap_or("?"))?;
        }
    }

    let freq = match &a.freq {
        Some(p) => freq_table(&std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)?,
        None => pipelined_frequency(&a.depths, 12.0, 1.0),
    };
    let (_, opt, _) = lower_and_optimize(&cfg)?;
    let sweep = alu_depth_sweep(&opt, &cfg.model, &a.depths, Some(&freq), cfg.beta)?;
    writeln!(s, "\n## IPC by Long-latency depth\n")?;
    writeln!(s, "```\n{}```", sweep.table())?;
    if let Some(b) = sweep.best {
        writeln!(s, "throughput argmax: depth {b}")?;
    }

    let (lo, hi) = parse_window(&a.window)?;
    let c = compile(&cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (p, q) = random_pair(spec, &mut rng);
    let r = cycle_sim(&c.machine, &cfg.model, spec.fp(), &pair_inputs(spec, &p, &q), &SimOptions { window: Some((lo, hi)), ignore_fingerprint: false })?;
    writeln!(s, "\n## Waterfall, cycles {lo}..{hi}\n")?;
    writeln!(s, "{}\n", r.summary())?;
    writeln!(s, "```\n{}```", waterfall_dump(&r, lo, hi)?)?;

    match &a.out {
        Some(p) => {
            std::fs::write(p, &s).with_context(|| format!("writing {}", p.display()))?;
            writeln!(out, "wrote {}", p.display())?;
        }
        None => out.write_all(s.as_bytes())?,
    }
    Ok(())
}
