//! Command-line front end. `paircc <command> --help` lists the flags.
//!
//! Exit codes: 0 success, 1 invalid input or configuration, 2 verification
//! mismatch, 3 broken internal invariant.

mod commands;
mod report;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use thiserror::Error;

use crate::backend::{BackendError, MachineProgram};
use crate::dse::{enumerate_variants, parse_selection, Preset};
use crate::field::{CurveSpec, Selection, Variant};
use crate::hw::HardwareModel;
use crate::opt::parse_passes;
use crate::pipeline::{CompileConfig, CompileError, Scheduler};
use crate::sim::SimError;

#[derive(Parser, Debug)]
#[command(name = "paircc", version, about = "Pairing compiler, simulators and design-space explorer")]
pub struct Cli {
    /// Project file supplying defaults for curve, hardware, variants, passes, beta and seed.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Compile a pairing to a machine binary.
    Compile(CompileArgs),
    /// Check a compiled program against the reference pairing.
    Verify(VerifyArgs),
    /// Run the cycle-accurate simulator.
    Simulate(SimulateArgs),
    /// Search variant selections and hardware models.
    Explore(ExploreArgs),
    /// Variant, ALU-depth and waterfall tables for one curve.
    Report(ReportArgs),
    /// Write reference test vectors, one JSON record per line.
    GenVectors(GenArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchedArg {
    Packed,
    InOrder,
}

/// What to compile and for which machine.
#[derive(Args, Clone, Debug, Default)]
pub struct Target {
    /// Shipped curve id (bn254, bls12_381, ...) or a curve parameter file.
    #[arg(long)]
    pub curve: Option<String>,
    /// Hardware model file.
    #[arg(long)]
    pub hw: Option<PathBuf>,
    /// Add a writeback FIFO to the model.
    #[arg(long)]
    pub fifo: bool,
    /// Per-level choices, e.g. `2:mul=karatsuba,6:sqr=ch-sqr2,coords=projective`.
    #[arg(long)]
    pub variants: Option<String>,
    /// all-sch or all-karat.
    #[arg(long, conflicts_with = "variants")]
    pub preset: Option<String>,
    /// Comma list of const_prop, strength_reduce, gvn, dce; or all / none.
    #[arg(long)]
    pub passes: Option<String>,
    /// Affinity bias added to the Long share of each slot period.
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    /// Signed-digit Miller loop.
    #[arg(long)]
    pub naf: bool,
    #[arg(long, value_enum)]
    pub scheduler: Option<SchedArg>,
}

#[derive(Args, Debug)]
pub struct CompileArgs {
    #[command(flatten)]
    pub target: Target,
    /// Binary output path.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the optimized IR as text.
    #[arg(long)]
    pub emit_ir: Option<PathBuf>,
    /// Print the slot listing.
    #[arg(long)]
    pub listing: bool,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub target: Target,
    /// Verify this binary instead of compiling.
    #[arg(long)]
    pub bin: Option<PathBuf>,
    /// Random pairs compared with the oracle.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Random (a, b) bilinearity checks.
    #[arg(long, default_value_t = 3)]
    pub bilinear: usize,
    /// Also compare against a test-vector file.
    #[arg(long)]
    pub vectors: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub target: Target,
    #[arg(long)]
    pub bin: Option<PathBuf>,
    /// Trace window `from:to` printed as a waterfall.
    #[arg(long)]
    pub window: Option<String>,
    /// Write the window as CSV plot data to this path.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Number of random inputs to simulate; cycle counts must agree.
    #[arg(long, default_value_t = 1)]
    pub trials: usize,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug)]
pub struct ExploreArgs {
    /// Exploration file: restrictions, model axes, objective, budget.
    pub space: Option<PathBuf>,
    #[arg(long)]
    pub curve: Option<String>,
    #[arg(long)]
    pub hw: Option<PathBuf>,
    /// Variant preset: all-sch, all-karat, no-karat-p<deg>, exhaustive.
    #[arg(long)]
    pub preset: Option<String>,
    /// Variant restrictions as a selection string; pins each named slot.
    #[arg(long, conflicts_with = "preset")]
    pub variants: Option<String>,
    #[arg(long)]
    pub passes: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// min-cycles, max-ipc or min-cycles-area.
    #[arg(long)]
    pub objective: Option<String>,
    /// Maximum number of new points to evaluate.
    #[arg(long)]
    pub budget: Option<usize>,
    /// JSONL journal; finished points are reused on the next run.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Two-column `fingerprint cost` table overriding the area proxy.
    #[arg(long)]
    pub costs: Option<PathBuf>,
    /// Rows of the ranking to print.
    #[arg(long, default_value_t = 10)]
    pub top: usize,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    #[command(flatten)]
    pub target: Target,
    /// Presets for the variant table, comma separated.
    #[arg(long, default_value = "all-sch,all-karat,no-karat-p2")]
    pub variant_presets: String,
    /// Long latencies for the depth table.
    #[arg(long, default_value = "8,16,24,38,64", value_delimiter = ',')]
    pub depths: Vec<u32>,
    /// Two-column `depth critical-path-ns` table; the default is a
    /// saturating model with 12 ns of logic and 1 ns per stage.
    #[arg(long)]
    pub freq: Option<PathBuf>,
    /// Waterfall window `from:to`.
    #[arg(long, default_value = "2000:2048")]
    pub window: String,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(long)]
    pub curve: Option<String>,
    /// Number of vectors.
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Recheck an existing vector file instead of writing one.
    #[arg(long, conflicts_with = "out")]
    pub check: Option<PathBuf>,
}

/// Project defaults. Unknown keys are errors.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectConfig {
    pub curve: Option<String>,
    pub hw: Option<PathBuf>,
    pub fifo: Option<bool>,
    pub variants: Option<String>,
    pub preset: Option<String>,
    pub passes: Option<String>,
    pub beta: Option<f64>,
    pub naf: Option<bool>,
    pub scheduler: Option<SchedArg>,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
}

impl ProjectConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut c: ProjectConfig = toml::from_str(&text).with_context(|| format!("{}", path.display()))?;
        if let (Some(hw), Some(dir)) = (&c.hw, path.parent()) {
            c.hw = Some(dir.join(hw));
        }
        Ok(c)
    }

    pub fn seed(&self, flag: Option<u64>) -> u64 {
        flag.or(self.seed).unwrap_or(crate::DEFAULT_SEED)
    }
}

/// Failures with a dedicated exit code.
#[derive(Debug, Error)]
pub enum Failure {
    #[error("{0}")]
    Mismatch(String),
    #[error("internal invariant: {0}")]
    Internal(String),
}

pub fn exit_code(e: &anyhow::Error) -> u8 {
    for c in e.chain() {
        if let Some(f) = c.downcast_ref::<Failure>() {
            return match f {
                Failure::Mismatch(_) => 2,
                Failure::Internal(_) => 3,
            };
        }
        let backend = c.downcast_ref::<BackendError>().or_else(|| match c.downcast_ref::<CompileError>() {
            Some(CompileError::Backend(b)) => Some(b),
            _ => None,
        });
        if let Some(BackendError::NotLegal(..) | BackendError::Encoding(_)) = backend {
            return 3;
        }
        if let Some(SimError::Violation { .. }) = c.downcast_ref::<SimError>() {
            return 3;
        }
    }
    1
}

pub fn load_curve(name: Option<&str>) -> Result<CurveSpec> {
    let name = name.context("no curve given (use --curve or set `curve` in the project file)")?;
    Ok(CurveSpec::load(name)?)
}

pub fn load_model(path: Option<&Path>, fifo: bool) -> Result<HardwareModel> {
    let mut m = match path {
        Some(p) => HardwareModel::load(p).with_context(|| format!("{}", p.display()))?,
        None => HardwareModel::default(),
    };
    if fifo {
        m.fifo.present = true;
    }
    Ok(m)
}

/// Selection named by a preset that pins every slot.
pub fn preset_selection(spec: &CurveSpec, name: &str) -> Result<Selection> {
    let p: Preset = name.parse()?;
    let mut it = enumerate_variants(&spec.tower, &p.restrictions(&spec.tower)?)?;
    let first = it.next().context("preset selects nothing")?;
    if it.next().is_some() {
        bail!("preset `{name}` names more than one selection; use `explore`");
    }
    Ok(first)
}

impl Target {
    /// Merges flags over the project file into a compile configuration.
    pub fn resolve(&self, pc: &ProjectConfig) -> Result<CompileConfig> {
        let spec = load_curve(self.curve.as_deref().or(pc.curve.as_deref()))?;
        let model = load_model(self.hw.as_deref().or(pc.hw.as_deref()), self.fifo || pc.fifo.unwrap_or(false))?;
        let base = Selection::schoolbook(&spec.tower);
        let sel = match (&self.variants, &self.preset) {
            (Some(v), _) => parse_selection(&spec.tower, v, &base)?,
            (None, Some(p)) => preset_selection(&spec, p)?,
            (None, None) => match (&pc.variants, &pc.preset) {
                (Some(v), _) => parse_selection(&spec.tower, v, &base)?,
                (None, Some(p)) => preset_selection(&spec, p)?,
                _ => base,
            },
        };
        sel.validate(&spec.tower)?;
        let passes = match self.passes.as_deref().or(pc.passes.as_deref()) {
            Some(s) => parse_passes(s).map_err(anyhow::Error::msg)?,
            None => crate::opt::Pass::PIPELINE.to_vec(),
        };
        let mut cfg = CompileConfig::new(spec).with_model(model).with_selection(sel).with_passes(passes);
        cfg.beta = self.beta.or(pc.beta).unwrap_or(0.0);
        cfg.naf = self.naf || pc.naf.unwrap_or(false);
        cfg.scheduler = match self.scheduler.or(pc.scheduler) {
            Some(SchedArg::InOrder) => Scheduler::InOrder,
            _ => Scheduler::Packed,
        };
        Ok(cfg)
    }
}

/// `from:to` or `from..to`.
pub fn parse_window(s: &str) -> Result<(u64, u64)> {
    let (a, b) = s.split_once(':').or_else(|| s.split_once("..")).with_context(|| format!("window `{s}`: expected from:to"))?;
    let (a, b): (u64, u64) = (a.trim().parse()?, b.trim().parse()?);
    if a >= b {
        bail!("window `{s}` is empty");
    }
    Ok((a, b))
}

pub fn read_binary(path: &Path) -> Result<MachineProgram> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(MachineProgram::from_bytes(&bytes)?)
}

fn short(v: Variant) -> &'static str {
    match v {
        Variant::Karatsuba => "K",
        Variant::Schoolbook => "S",
        Variant::Toom3 => "T3",
        Variant::Complex => "C",
        Variant::ChSqr1 => "CH1",
        Variant::ChSqr2 => "CH2",
        Variant::ChSqr3 => "CH3",
    }
}

/// Compact selection label, e.g. `mul[K,S,S] sqr[C,S,S] jacobian`.
pub fn selection_label(sel: &Selection) -> String {
    let j = |v: &[Variant]| v.iter().map(|&x| short(x)).collect::<Vec<_>>().join(",");
    format!("mul[{}] sqr[{}] {}", j(&sel.mul), j(&sel.sqr), sel.coords)
}

pub fn model_label(m: &HardwareModel) -> String {
    let fifo = if m.fifo.present { format!(" fifo{}", m.fifo.depth) } else { String::new() };
    format!("w{} alu{} b{} {}R{}W L{}/S{}{fifo}", m.width, m.linear_alus, m.banks, m.read_ports, m.write_ports, m.latency.long, m.latency.short)
}

/// Runs a parsed command line, writing human output to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    let pc = match &cli.config {
        Some(p) => ProjectConfig::load(p)?,
        None => ProjectConfig::default(),
    };
    match &cli.command {
        Command::Compile(a) => commands::compile(a, &pc, out),
        Command::Verify(a) => commands::verify(a, &pc, out),
        Command::Simulate(a) => commands::simulate(a, &pc, out),
        Command::Explore(a) => commands::explore(a, &pc, out),
        Command::Report(a) => report::report(a, &pc, out),
        Command::GenVectors(a) => commands::gen_vectors(a, &pc, out),
    }
}

/// Entry point for the binary.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    match run(&cli, &mut stdout.lock()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (Result<()>, String) {
        let cli = Cli::try_parse_from(std::iter::once("paircc").chain(args.iter().copied())).unwrap();
        let mut buf = Vec::new();
        let r = run(&cli, &mut buf);
        (r, String::from_utf8(buf).unwrap())
    }

    #[test]
    fn windows() {
        assert_eq!(parse_window("10:20").unwrap(), (10, 20));
        assert_eq!(parse_window("10..20").unwrap(), (10, 20));
        assert!(parse_window("20:10").is_err());
    }

    #[test]
    fn project_file_is_strict() {
        assert!(toml::from_str::<ProjectConfig>("curve = \"bn254\"\nseed = 3\n").is_ok());
        assert!(toml::from_str::<ProjectConfig>("curv = \"bn254\"\n").is_err());
    }

    #[test]
    fn missing_variant_names_level_and_kind() {
        let (r, _) = run_args(&["compile", "--curve", "bn254", "--variants", "6:sqr=complex,12:mul=toom3"]);
        let e = r.unwrap_err();
        assert_eq!(exit_code(&e), 1);
        assert!(format!("{e:#}").contains("mul at the level of degree 12"), "{e:#}");
    }

    #[test]
    fn unknown_curve_is_a_validation_error() {
        let (r, _) = run_args(&["gen-vectors", "--curve", "bn255", "--trials", "1"]);
        assert_eq!(exit_code(&r.unwrap_err()), 1);
    }

    #[test]
    fn zero_trials_is_a_vacuous_pass() {
        let (r, out) = run_args(&["verify", "--curve", "bn254", "--trials", "0", "--bilinear", "0"]);
        r.unwrap();
        assert!(out.contains("warning"), "{out}");
    }
}
