//! End-to-end compilation: codegen, lowering, optimization, scheduling,
//! register allocation and encoding.

use std::time::{Duration, Instant};

use serde::Serialize;
use thiserror::Error;

use crate::backend::{self, assemble, reg_alloc, BackendError, MachineProgram, Policy, Schedule};
use crate::field::{CurveSpec, FieldError, Selection};
use crate::hw::HardwareModel;
use crate::ir::{codegen, lower, CodegenOptions, IrError, Program};
use crate::opt::{run_pipeline, Pass, PassReport};

#[derive(Debug, Error)]
pub enum CompileError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Ir(#[from] IrError),
    #[error(transparent)]
    Backend(#[from] BackendError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Scheduler {
    /// Affinity-guided list scheduling, one slot per cycle.
    Packed,
    /// Source-order issue with hardware interlocks.
    InOrder,
}

#[derive(Clone, Debug)]
pub struct CompileConfig {
    pub spec: CurveSpec,
    pub sel: Selection,
    pub naf: bool,
    pub passes: Vec<Pass>,
    pub model: HardwareModel,
    pub beta: f64,
    pub scheduler: Scheduler,
}

impl CompileConfig {
    /// Schoolbook everywhere, full optimization, default model.
    pub fn new(spec: CurveSpec) -> Self {
        let sel = Selection::schoolbook(&spec.tower);
        let model = HardwareModel::default().resolved(spec.fp().bits());
        CompileConfig { spec, sel, naf: false, passes: Pass::PIPELINE.to_vec(), model, beta: 0.0, scheduler: Scheduler::Packed }
    }

    pub fn with_model(mut self, m: HardwareModel) -> Self {
        self.model = m.resolved(self.spec.fp().bits());
        self
    }

    pub fn with_selection(mut self, sel: Selection) -> Self {
        self.sel = sel;
        self
    }

    pub fn with_passes(mut self, passes: Vec<Pass>) -> Self {
        self.passes = passes;
        self
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct CompileStats {
    pub init_instrs: usize,
    pub opt_instrs: usize,
    pub cycles: u64,
    pub ipc: f64,
    pub peak_registers: u32,
    pub slots: usize,
    #[serde(serialize_with = "secs")]
    pub time: Duration,
}

fn secs<S: serde::Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64())
}

impl CompileStats {
    pub fn reduction(&self) -> f64 {
        1.0 - self.opt_instrs as f64 / self.init_instrs.max(1) as f64
    }
}

pub struct Compiled {
    /// Lowered prime-field program before optimization.
    pub init: Program,
    pub opt: Program,
    pub reports: Vec<PassReport>,
    pub schedule: Schedule,
    pub machine: MachineProgram,
    pub stats: CompileStats,
}

/// Lowered, optimized prime-field program for a configuration.
pub fn lower_and_optimize(cfg: &CompileConfig) -> Result<(Program, Program, Vec<PassReport>), CompileError> {
    let hi = codegen(&cfg.spec, CodegenOptions { naf: cfg.naf });
    let init = lower(&hi, &cfg.spec, &cfg.sel)?;
    let (opt, reports) = run_pipeline(&init, &cfg.spec, &cfg.passes, true);
    Ok((init, opt, reports))
}

/// Schedules, allocates and encodes an optimized program.
pub fn build_machine(prog: &Program, cfg: &CompileConfig) -> Result<(Schedule, MachineProgram), CompileError> {
    let m = &cfg.model;
    let policy = match cfg.scheduler {
        Scheduler::Packed => Policy::Affinity { beta: cfg.beta },
        Scheduler::InOrder => Policy::InOrder,
    };
    let mut s = backend::sched::run(prog, m, policy)?;
    reg_alloc(prog, &mut s, m)?;
    let machine = assemble(prog, &s, m, cfg.spec.fp().limbs(), cfg.scheduler == Scheduler::Packed)?;
    Ok((s, machine))
}

pub fn compile(cfg: &CompileConfig) -> Result<Compiled, CompileError> {
    let t = Instant::now();
    let (init, opt, reports) = lower_and_optimize(cfg)?;
    let (schedule, machine) = build_machine(&opt, cfg)?;
    let stats = CompileStats {
        init_instrs: init.instr_count(),
        opt_instrs: opt.instr_count(),
        cycles: schedule.stats.cycles,
        ipc: schedule.stats.ipc(),
        peak_registers: backend::peak_registers(&opt, &schedule),
        slots: machine.slot_count(),
        time: t.elapsed(),
    };
    Ok(Compiled { init, opt, reports, schedule, machine, stats })
}
