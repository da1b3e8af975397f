use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use super::{load_curve, load_model, model_label, parse_window, read_binary, selection_label, CompileArgs, ExploreArgs, Failure, GenArgs, ProjectConfig, SimulateArgs, VerifyArgs};
use crate::backend::{check_schedule, MachineProgram};
use crate::dse::{self, design_points, enumerate_variants, parse_restrictions, AreaProxy, ExploreConfig, ModelAxes, Objective, Preset, Restriction, VariantSpace};
use crate::field::CurveSpec;
use crate::hw::HardwareModel;
use crate::ir::exec::pair_inputs;
use crate::opt::{parse_passes, Pass};
use crate::pairing::{random_pair, vectors};
use crate::pipeline::{self, CompileConfig};
use crate::sim::{cycle_sim, waterfall_csv, waterfall_dump, SimOptions};
use crate::verify::{run_pairing, verify_machine};

fn compile_checked(cfg: &CompileConfig) -> Result<pipeline::Compiled> {
    let c = pipeline::compile(cfg)?;
    let v = check_schedule(&c.opt, &c.schedule, &cfg.model);
    if let Some(first) = v.first() {
        return Err(Failure::Internal(format!("{} schedule violations, first: {first}", v.len())).into());
    }
    Ok(c)
}

pub fn compile(a: &CompileArgs, pc: &ProjectConfig, out: &mut dyn Write) -> Result<()> {
    let cfg = a.target.resolve(pc)?;
    let c = compile_checked(&cfg)?;
    let s = &c.stats;
    let bytes = c.machine.to_bytes();
    let passes: Vec<&str> = cfg.passes.iter().map(|p| p.name()).collect();
    writeln!(out, "curve       {}", cfg.spec.id)?;
    writeln!(out, "selection   {}", selection_label(&cfg.sel))?;
    writeln!(out, "model       {}", model_label(&cfg.model))?;
    writeln!(out, "passes      {}", if passes.is_empty() { "none".into() } else { passes.join(",") })?;
    writeln!(out, "instrs      init {} opt {} ({:.1}% fewer)", s.init_instrs, s.opt_instrs, 100.0 * s.reduction())?;
    writeln!(out, "slots       {}", s.slots)?;
    writeln!(out, "cycles      {} (IPC {:.3})", s.cycles, s.ipc)?;
    writeln!(out, "peak regs   {}", s.peak_registers)?;
    writeln!(out, "binary      {} bytes", bytes.len())?;
    writeln!(out, "time        {:.2}s", s.time.as_secs_f64())?;
    if let Some(p) = &a.out {
        std::fs::write(p, &bytes).with_context(|| format!("writing {}", p.display()))?;
        writeln!(out, "wrote {}", p.display())?;
    }
    if let Some(p) = &a.emit_ir {
        std::fs::write(p, crate::ir::text::print(&c.opt)).with_context(|| format!("writing {}", p.display()))?;
        writeln!(out, "wrote {}", p.display())?;
    }
    if a.listing {
        out.write_all(c.machine.listing()?.as_bytes())?;
    }
    Ok(())
}

/// The binary named by `--bin`, or a fresh compile of the target.
fn program(target: &super::Target, bin: Option<&PathBuf>, pc: &ProjectConfig) -> Result<(CurveSpec, MachineProgram, HardwareModel)> {
    match bin {
        Some(p) => {
            let spec = load_curve(target.curve.as_deref().or(pc.curve.as_deref()))?;
            let prog = read_binary(p)?;
            let model = load_model(target.hw.as_deref().or(pc.hw.as_deref()), target.fifo || pc.fifo.unwrap_or(false))?.resolved(spec.fp().bits());
            if prog.limbs as usize != spec.fp().limbs() {
                bail!("{} was built for {}-limb elements, {} uses {}", p.display(), prog.limbs, spec.id, spec.fp().limbs());
            }
            Ok((spec, prog, model))
        }
        None => {
            let cfg = target.resolve(pc)?;
            let c = compile_checked(&cfg)?;
            Ok((cfg.spec, c.machine, cfg.model))
        }
    }
}

pub fn verify(a: &VerifyArgs, pc: &ProjectConfig, out: &mut dyn Write) -> Result<()> {
    let trials = a.trials.or(pc.trials).unwrap_or(5);
    let (spec, prog, _) = program(&a.target, a.bin.as_ref(), pc)?;
    if trials == 0 {
        writeln!(out, "warning: 0 trials requested, no output was compared with the reference")?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(pc.seed(a.seed));
    let rep = verify_machine(&spec, &prog, trials, a.bilinear, &mut rng).map_err(|e| Failure::Mismatch(format!("program failed to run: {e}")))?;
    if let Some(m) = &rep.mismatch {
        return Err(Failure::Mismatch(format!("{}: {m}", spec.id)).into());
    }
    let mut nvec = 0;
    if let Some(p) = &a.vectors {
        let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        for (i, v) in vectors::from_lines(&text).with_context(|| p.display().to_string())?.iter().enumerate() {
            if v.curve != spec.id {
                bail!("vector {i} is for {}, not {}", v.curve, spec.id);
            }
            let (pp, qq) = v.points(&spec)?;
            let got = run_pairing(&spec, &prog, (&pp, &qq)).map_err(|e| Failure::Mismatch(format!("vector {i}: {e}")))?;
            let f = spec.fp();
            let got: Vec<String> = got.iter().map(|x| format!("0x{}", f.to_big(x).to_str_radix(16))).collect();
            if let Some(j) = (0..v.e.len().max(got.len())).find(|&j| v.e.get(j) != got.get(j)) {
                let show = |x: Option<&String>| x.cloned().unwrap_or_else(|| "(missing)".into());
                return Err(Failure::Mismatch(format!("vector {i}: coefficient {j} differs\n  expected {}\n  got      {}", show(v.e.get(j)), show(got.get(j)))).into());
            }
            nvec += 1;
        }
    }
    writeln!(out, "{}: {} random pairs, {} bilinearity checks, {} vectors: ok", spec.id, rep.trials, rep.bilinear, nvec)?;
    Ok(())
}

pub fn simulate(a: &SimulateArgs, pc: &ProjectConfig, out: &mut dyn Write) -> Result<()> {
    let (spec, prog, model) = program(&a.target, a.bin.as_ref(), pc)?;
    let window = a.window.as_deref().map(parse_window).transpose()?;
    let mut rng = ChaCha8Rng::seed_from_u64(pc.seed(a.seed));
    let mut first = None;
    for t in 0..a.trials.max(1) {
        let (p, q) = random_pair(&spec, &mut rng);
        let opts = SimOptions { window: if t == 0 { window } else { None }, ignore_fingerprint: false };
        let r = cycle_sim(&prog, &model, spec.fp(), &pair_inputs(&spec, &p, &q), &opts)?;
        let want = crate::pairing::optimal_ate(&spec, &p, &q)?;
        if crate::ir::exec::outputs_to_mont(&spec, &r.outputs) != want {
            return Err(Failure::Mismatch(format!("trial {t}: simulated result differs from the reference")).into());
        }
        match &first {
            None => first = Some(r),
            Some(f) if f.cycles != r.cycles => {
                return Err(Failure::Internal(format!("cycle count depends on input: {} vs {} on trial {t}", f.cycles, r.cycles)).into());
            }
            _ => {}
        }
    }
    let r = first.expect("at least one trial");
    writeln!(out, "{}: {}", spec.id, r.summary())?;
    out.write_all(r.key_values().as_bytes())?;
    if let Some((lo, hi)) = window {
        out.write_all(waterfall_dump(&r, lo, hi)?.as_bytes())?;
        if let Some(p) = &a.out {
            std::fs::write(p, waterfall_csv(&r, lo, hi)?).with_context(|| format!("writing {}", p.display()))?;
            writeln!(out, "wrote {}", p.display())?;
        }
    }
    Ok(())
}

/// Exploration file. Unknown keys are errors.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExploreFile {
    pub curve: Option<String>,
    /// Base hardware model; axes vary it.
    pub hw: Option<PathBuf>,
    pub preset: Option<String>,
    #[serde(default)]
    pub restrictions: Vec<Restriction>,
    #[serde(default)]
    pub axes: ModelAxes,
    pub objective: Option<Objective>,
    pub budget: Option<usize>,
    pub seed: Option<u64>,
    pub beta: Option<f64>,
    pub passes: Option<String>,
    pub area: Option<AreaProxy>,
    /// Two-column `fingerprint cost` table.
    pub costs: Option<PathBuf>,
    pub journal: Option<PathBuf>,
}

impl ExploreFile {
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut f: ExploreFile = toml::from_str(&text).with_context(|| path.display().to_string())?;
        let dir = path.parent().unwrap_or(std::path::Path::new(""));
        for p in [&mut f.hw, &mut f.costs, &mut f.journal].into_iter().flatten() {
            *p = dir.join(&*p);
        }
        Ok(f)
    }
}

pub fn explore(a: &ExploreArgs, pc: &ProjectConfig, out: &mut dyn Write) -> Result<()> {
    let file = match &a.space {
        Some(p) => ExploreFile::load(p)?,
        None => ExploreFile::default(),
    };
    let spec = load_curve(a.curve.as_deref().or(file.curve.as_deref()).or(pc.curve.as_deref()))?;
    let t = &spec.tower;
    let base = load_model(a.hw.as_deref().or(file.hw.as_deref()).or(pc.hw.as_deref()), pc.fifo.unwrap_or(false))?;
    let mut restr = Vec::new();
    if let Some(p) = a.preset.as_deref().or(file.preset.as_deref()) {
        restr.extend(p.parse::<Preset>()?.restrictions(t)?);
    }
    restr.extend(file.restrictions.iter().cloned());
    if let Some(v) = &a.variants {
        restr.extend(parse_restrictions(t, v)?);
    }
    let space = VariantSpace::new(t, &restr)?;
    let models = file.axes.models(&base);
    if models.is_empty() {
        bail!("no valid hardware model on the given axes");
    }
    let points = design_points(enumerate_variants(t, &restr)?, &models);
    let mut area = file.area.clone().unwrap_or_default();
    if let Some(p) = a.costs.as_ref().or(file.costs.as_ref()) {
        area.load_table(&std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)?;
    }
    let passes = match a.passes.as_deref().or(file.passes.as_deref()).or(pc.passes.as_deref()) {
        Some(s) => parse_passes(s).map_err(anyhow::Error::msg)?,
        None => Pass::PIPELINE.to_vec(),
    };
    let cfg = ExploreConfig {
        objective: match &a.objective {
            Some(o) => o.parse()?,
            None => file.objective.unwrap_or(Objective::MinCycles),
        },
        beta: a.beta.or(file.beta).or(pc.beta).unwrap_or(0.0),
        passes,
        seed: a.seed.or(file.seed).unwrap_or_else(|| pc.seed(None)),
        budget: a.budget.or(file.budget),
        area,
    };
    writeln!(out, "{}: {} selections x {} models = {} points", spec.id, space.len(), models.len(), points.len())?;
    let journal = a.out.as_ref().or(file.journal.as_ref());
    let x = dse::explore(&spec, points, &cfg, journal.map(|p| p.as_path()))?;
    writeln!(out, "evaluated {}, from journal {}, skipped by budget {}, failed {}", x.evaluated, x.ranking.len() + x.failed.len() - x.evaluated, x.skipped, x.failed.len())?;
    writeln!(out, "{:>4}  {:<16}  {:>9}  {:>6}  {:>9}  {:<28}  selection", "rank", "fingerprint", "cycles", "ipc", "area", "model")?;
    for (i, r) in x.ranking.iter().take(a.top).enumerate() {
        let m = r.metrics.as_ref().expect("ranked points have metrics");
        writeln!(out, "{:>4}  {:<16}  {:>9}  {:>6.3}  {:>9.1}  {:<28}  {}", i + 1, r.fingerprint, m.cycles, m.ipc, m.area, model_label(&r.point.model), selection_label(&r.point.sel))?;
    }
    for r in x.failed.iter().take(a.top) {
        writeln!(out, "failed {}: {}", r.fingerprint, r.error.as_deref().unwrap_or("?"))?;
    }
    Ok(())
}

pub fn gen_vectors(a: &GenArgs, pc: &ProjectConfig, out: &mut dyn Write) -> Result<()> {
    let spec = load_curve(a.curve.as_deref().or(pc.curve.as_deref()))?;
    if let Some(p) = &a.check {
        let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        let vs = vectors::from_lines(&text).with_context(|| p.display().to_string())?;
        for (i, v) in vs.iter().enumerate() {
            if !v.check(&spec)? {
                return Err(Failure::Mismatch(format!("vector {i} does not match the reference pairing")).into());
            }
        }
        writeln!(out, "{}: {} vectors ok", spec.id, vs.len())?;
        return Ok(());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(pc.seed(a.seed));
    let text = vectors::to_lines(&vectors::generate(&spec, a.trials, &mut rng)?);
    match &a.out {
        Some(p) => {
            std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))?;
            writeln!(out, "wrote {} vectors to {}", a.trials, p.display())?;
        }
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}
