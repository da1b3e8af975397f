//! Design-space exploration over variant selections and hardware models.

mod space;
mod sweep;

use std::collections::{BTreeMap, HashMap};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;
use std::sync::Mutex;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::backend::check_schedule;
use crate::field::{CurveSpec, OpKind, Selection};
use crate::hw::{validate_model, HardwareModel};
use crate::ir::exec::pair_inputs;
use crate::opt::Pass;
use crate::pipeline::{compile, CompileConfig};
use crate::sim::{cycle_sim, SimOptions, Stalls};

pub use space::{enumerate_variants, parse_restrictions, parse_selection, Preset, Restriction, VariantSpace};
pub use sweep::{alu_depth_sweep, pipelined_frequency, DepthRow, DepthSweep};

#[derive(Debug, Error)]
pub enum DseError {
    #[error("no variant left for {kind} at the level of degree {level}")]
    EmptyLevel { level: usize, kind: OpKind },
    #[error("no {variant} variant for {kind} at the level of degree {level}")]
    MissingVariant { level: usize, kind: OpKind, variant: crate::field::Variant },
    #[error("exploration config: {0}")]
    Config(String),
    #[error("journal: {0}")]
    Journal(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    MinCycles,
    MaxIpc,
    /// Cycles times the area proxy.
    MinCyclesArea,
}

impl FromStr for Objective {
    type Err = DseError;
    fn from_str(s: &str) -> Result<Self, DseError> {
        match s {
            "min-cycles" | "cycles" => Ok(Objective::MinCycles),
            "max-ipc" | "ipc" => Ok(Objective::MaxIpc),
            "min-cycles-area" | "cycles-area" => Ok(Objective::MinCyclesArea),
            _ => Err(DseError::Config(format!("unknown objective `{s}` (min-cycles, max-ipc, min-cycles-area)"))),
        }
    }
}

impl Objective {
    /// Lower is better.
    pub fn score(self, m: &Metrics) -> f64 {
        match self {
            Objective::MinCycles => m.cycles as f64,
            Objective::MaxIpc => -m.ipc,
            Objective::MinCyclesArea => m.cycles as f64 * m.area,
        }
    }
}

/// Linear area stand-in: instruction words, registers and per-unit weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AreaProxy {
    pub per_word: f64,
    pub per_register: f64,
    pub per_linear_alu: f64,
    pub per_mmul: f64,
    pub per_bank: f64,
    /// Externally supplied costs by model fingerprint, overriding the formula.
    #[serde(default)]
    pub table: BTreeMap<String, f64>,
}

impl Default for AreaProxy {
    fn default() -> Self {
        AreaProxy { per_word: 0.001, per_register: 0.05, per_linear_alu: 20.0, per_mmul: 200.0, per_bank: 10.0, table: BTreeMap::new() }
    }
}

impl AreaProxy {
    pub fn area(&self, m: &HardwareModel, words: usize, peak_regs: u32) -> f64 {
        if let Some(&c) = self.table.get(&format!("{:016x}", m.fingerprint())) {
            return c;
        }
        self.per_word * words as f64
            + self.per_register * (peak_regs * m.banks) as f64
            + self.per_linear_alu * m.linear_alus as f64
            + self.per_mmul * m.mmul_alus as f64
            + self.per_bank * m.banks as f64
    }

    /// Reads a two-column `fingerprint cost` table; `#` starts a comment.
    pub fn load_table(&mut self, text: &str) -> Result<(), DseError> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let (Some(fp), Some(c), None) = (it.next(), it.next(), it.next()) else {
                return Err(DseError::Config(format!("cost table line {}: expected `fingerprint cost`", n + 1)));
            };
            let c: f64 = c.parse().map_err(|_| DseError::Config(format!("cost table line {}: bad cost", n + 1)))?;
            self.table.insert(fp.trim_start_matches("0x").to_string(), c);
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub instrs: usize,
    pub mix: BTreeMap<String, usize>,
    pub cycles: u64,
    pub ipc: f64,
    pub stalls: Stalls,
    pub peak_registers: u32,
    pub words: usize,
    pub area: f64,
}

/// A selection and model to evaluate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignPoint {
    pub sel: Selection,
    pub model: HardwareModel,
}

impl DesignPoint {
    /// Stable identity of the point for journaling and tie-breaks.
    pub fn fingerprint(&self, curve: &str, beta: f64, passes: &[Pass]) -> String {
        let key = serde_json::json!({ "curve": curve, "sel": self.sel, "model": self.model, "beta": beta, "passes": passes });
        let d = Sha256::digest(key.to_string().as_bytes());
        hex::encode(&d[..8])
    }
}

/// Journal record of one evaluated point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointResult {
    pub fingerprint: String,
    pub point: DesignPoint,
    pub metrics: Option<Metrics>,
    pub error: Option<String>,
}

#[derive(Clone, Debug)]
pub struct ExploreConfig {
    pub objective: Objective,
    pub beta: f64,
    pub passes: Vec<Pass>,
    pub seed: u64,
    /// Maximum number of points to evaluate in this run (journal hits are free).
    pub budget: Option<usize>,
    pub area: AreaProxy,
}

impl Default for ExploreConfig {
    fn default() -> Self {
        ExploreConfig { objective: Objective::MinCycles, beta: 0.0, passes: Pass::PIPELINE.to_vec(), seed: crate::DEFAULT_SEED, budget: None, area: AreaProxy::default() }
    }
}

/// Compiles, checks and simulates one point. Failures are returned as
/// messages so one bad point does not end an exploration.
pub fn evaluate_point(spec: &CurveSpec, p: &DesignPoint, cfg: &ExploreConfig) -> Result<Metrics, String> {
    let violations = validate_model(&p.model);
    if !violations.is_empty() {
        return Err(violations.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "));
    }
    let mut cc = CompileConfig::new(spec.clone()).with_model(p.model.clone()).with_selection(p.sel.clone()).with_passes(cfg.passes.clone());
    cc.beta = cfg.beta;
    let c = compile(&cc).map_err(|e| e.to_string())?;
    let v = check_schedule(&c.opt, &c.schedule, &cc.model);
    if let Some(first) = v.first() {
        return Err(format!("schedule check: {first} ({} violations)", v.len()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (g1, g2) = crate::pairing::random_pair(spec, &mut rng);
    let r = cycle_sim(&c.machine, &cc.model, spec.fp(), &pair_inputs(spec, &g1, &g2), &SimOptions::default()).map_err(|e| e.to_string())?;
    let mix = c.opt.opcode_histogram().into_iter().filter(|(o, _)| !o.is_data()).map(|(o, n)| (o.name().to_string(), n)).collect();
    let words = c.machine.words.len();
    Ok(Metrics {
        instrs: c.stats.opt_instrs,
        mix,
        cycles: r.cycles,
        ipc: r.ipc,
        stalls: r.stalls,
        peak_registers: c.stats.peak_registers,
        words,
        area: cfg.area.area(&cc.model, words, c.stats.peak_registers),
    })
}

/// Records already in a journal, keyed by fingerprint. A torn final line
/// (from an interrupted write) is ignored.
pub fn read_journal(path: &Path) -> Result<HashMap<String, PointResult>, DseError> {
    let mut out = HashMap::new();
    let Ok(f) = File::open(path) else { return Ok(out) };
    let lines: Vec<String> = BufReader::new(f).lines().collect::<Result<_, _>>()?;
    let n = lines.len();
    for (i, line) in lines.into_iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<PointResult>(&line) {
            Ok(r) => {
                out.insert(r.fingerprint.clone(), r);
            }
            Err(_) if i + 1 == n => {}
            Err(e) => return Err(DseError::Journal(format!("line {}: {e}", i + 1))),
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct Exploration {
    /// Successful points, best first.
    pub ranking: Vec<PointResult>,
    pub failed: Vec<PointResult>,
    /// Points evaluated in this run (not read from the journal).
    pub evaluated: usize,
    /// Points left for a later run because of the budget.
    pub skipped: usize,
}

/// Evaluates `points` (in parallel), appending each result to `journal` as
/// one JSON line, and ranks the successes by objective then fingerprint.
pub fn explore(spec: &CurveSpec, points: Vec<DesignPoint>, cfg: &ExploreConfig, journal: Option<&Path>) -> Result<Exploration, DseError> {
    let done = match journal {
        Some(p) => read_journal(p)?,
        None => HashMap::new(),
    };
    let keyed: Vec<(String, DesignPoint)> = points.into_iter().map(|p| (p.fingerprint(&spec.id, cfg.beta, &cfg.passes), p)).collect();
    let mut results: BTreeMap<String, PointResult> = BTreeMap::new();
    let mut todo = Vec::new();
    for (fp, p) in keyed {
        match done.get(&fp) {
            Some(r) => {
                results.insert(fp, r.clone());
            }
            None if !results.contains_key(&fp) && !todo.iter().any(|(f, _): &(String, DesignPoint)| *f == fp) => todo.push((fp, p)),
            None => {}
        }
    }
    let skipped = cfg.budget.map_or(0, |b| todo.len().saturating_sub(b));
    todo.truncate(todo.len() - skipped);
    let sink = match journal {
        Some(p) => Some(Mutex::new(OpenOptions::new().create(true).append(true).open(p)?)),
        None => None,
    };
    let fresh: Vec<PointResult> = todo
        .into_par_iter()
        .map(|(fp, p)| {
            let (metrics, error) = match evaluate_point(spec, &p, cfg) {
                Ok(m) => (Some(m), None),
                Err(e) => (None, Some(e)),
            };
            let r = PointResult { fingerprint: fp, point: p, metrics, error };
            if let Some(s) = &sink {
                let line = serde_json::to_string(&r).expect("record serializes") + "\n";
                let mut f = s.lock().unwrap();
                f.write_all(line.as_bytes()).and_then(|_| f.flush())?;
            }
            Ok(r)
        })
        .collect::<Result<_, std::io::Error>>()?;
    let evaluated = fresh.len();
    for r in fresh {
        results.insert(r.fingerprint.clone(), r);
    }
    let (mut ranking, failed): (Vec<_>, Vec<_>) = results.into_values().partition(|r| r.metrics.is_some());
    let obj = cfg.objective;
    ranking.sort_by(|a, b| {
        let (x, y) = (obj.score(a.metrics.as_ref().unwrap()), obj.score(b.metrics.as_ref().unwrap()));
        x.total_cmp(&y).then_with(|| a.fingerprint.cmp(&b.fingerprint))
    });
    Ok(Exploration { ranking, failed, evaluated, skipped })
}

/// Hardware-model axes; the model space is their product over a base model.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelAxes {
    #[serde(default)]
    pub width: Vec<u32>,
    #[serde(default)]
    pub linear_alus: Vec<u32>,
    #[serde(default)]
    pub banks: Vec<u32>,
    #[serde(default)]
    pub long: Vec<u32>,
    #[serde(default)]
    pub fifo: Vec<bool>,
}

impl ModelAxes {
    /// Every valid combination; an empty axis keeps the base value.
    pub fn models(&self, base: &HardwareModel) -> Vec<HardwareModel> {
        fn axis<T: Copy>(v: &[T], d: T) -> Vec<T> {
            if v.is_empty() {
                vec![d]
            } else {
                v.to_vec()
            }
        }
        let mut out = Vec::new();
        for w in axis(&self.width, base.width) {
            for l in axis(&self.linear_alus, base.linear_alus) {
                for b in axis(&self.banks, base.banks) {
                    for lat in axis(&self.long, base.latency.long) {
                        for f in axis(&self.fifo, base.fifo.present) {
                            let mut m = base.clone();
                            m.width = w;
                            m.linear_alus = l;
                            m.banks = b;
                            m.latency.long = lat;
                            m.fifo.present = f;
                            if validate_model(&m).is_empty() {
                                out.push(m);
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

/// Cartesian product of selections and models.
pub fn design_points(sels: impl IntoIterator<Item = Selection>, models: &[HardwareModel]) -> Vec<DesignPoint> {
    sels.into_iter().flat_map(|s| models.iter().map(move |m| DesignPoint { sel: s.clone(), model: m.clone() })).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn area_table_overrides_formula() {
        let m = HardwareModel::default();
        let mut a = AreaProxy::default();
        let base = a.area(&m, 1000, 10);
        assert!(base > 0.0);
        a.load_table(&format!("# fp cost\n{:016x} 42.5\n", m.fingerprint())).unwrap();
        assert_eq!(a.area(&m, 1000, 10), 42.5);
        assert!(a.load_table("abc").is_err());
    }

    #[test]
    fn axes_skip_invalid_models() {
        let axes = ModelAxes { width: vec![1, 2], fifo: vec![false, true], ..Default::default() };
        let ms = axes.models(&HardwareModel::default());
        // width 2 needs a FIFO and two banks; only width 1 survives with one bank
        assert!(ms.iter().all(|m| m.width == 1));
        assert_eq!(ms.len(), 2);
    }
}
