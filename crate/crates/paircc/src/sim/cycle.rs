use std::collections::{BTreeMap, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::trace::{LaneState, StallCause, TraceRow};
use super::{execute, operands, Regs, SimError};
use crate::backend::{affinity, MInstr, MachineProgram, Reg};
use crate::field::{Fp, PrimeField};
use crate::hw::{HardwareModel, MOp, Unit};

#[derive(Clone, Debug, Default)]
pub struct SimOptions {
    /// Cycle range `[from, to)` to keep in the trace.
    pub window: Option<(u64, u64)>,
    /// Run a program built for a different model (for what-if comparisons).
    pub ignore_fingerprint: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stalls {
    pub data_dep: u64,
    pub mmul: u64,
    pub read_port: u64,
    pub writeback: u64,
}

impl Stalls {
    pub fn total(&self) -> u64 {
        self.data_dep + self.mmul + self.read_port + self.writeback
    }

    fn bump(&mut self, c: StallCause) {
        match c {
            StallCause::DataDep => self.data_dep += 1,
            StallCause::Mmul => self.mmul += 1,
            StallCause::ReadPort => self.read_port += 1,
            StallCause::Writeback => self.writeback += 1,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SimReport {
    /// Cycle after the last writeback.
    pub cycles: u64,
    pub instrs: u64,
    /// Issued slots, NOP slots included.
    pub slots: u64,
    pub ipc: f64,
    pub stalls: Stalls,
    /// Cycles after the last issue spent waiting for writebacks.
    pub drain: u64,
    #[serde(skip)]
    pub outputs: Vec<Fp>,
    pub window: Option<(u64, u64)>,
    #[serde(skip)]
    pub trace: Vec<TraceRow>,
}

impl SimReport {
    /// Machine-readable `key=value` lines.
    pub fn key_values(&self) -> String {
        let s = &self.stalls;
        format!(
            "cycles={}\ninstrs={}\nslots={}\nipc={:.4}\nstalls.data_dep={}\nstalls.mmul={}\nstalls.read_port={}\nstalls.writeback={}\ndrain={}\n",
            self.cycles, self.instrs, self.slots, self.ipc, s.data_dep, s.mmul, s.read_port, s.writeback, self.drain
        )
    }

    pub fn summary(&self) -> String {
        format!(
            "{} cycles, {} instructions, IPC {:.3}; stalls: {} data, {} mmul, {} read-port, {} writeback; {} drain cycles (I/O transfer excluded)",
            self.cycles,
            self.instrs,
            self.ipc,
            self.stalls.data_dep,
            self.stalls.mmul,
            self.stalls.read_port,
            self.stalls.writeback,
            self.drain
        )
    }
}

struct Pipe<'a> {
    m: &'a HardwareModel,
    depth: usize,
    pending: HashMap<Reg, u32>,
    calendar: BTreeMap<u64, Vec<(Reg, Fp)>>,
    queues: Vec<VecDeque<(Reg, Fp)>>,
    busy: HashMap<Unit, u64>,
}

impl Pipe<'_> {
    fn idle(&self) -> bool {
        self.calendar.is_empty() && self.queues.iter().all(VecDeque::is_empty)
    }

    fn retire(&mut self, t: u64, regs: &mut Regs) -> Result<u32, SimError> {
        if let Some(arr) = self.calendar.remove(&t) {
            for (r, v) in arr {
                self.queues[r.bank as usize].push_back((r, v));
            }
        }
        let mut n = 0;
        for (b, q) in self.queues.iter_mut().enumerate() {
            for _ in 0..(self.m.write_ports as usize).min(q.len()) {
                let (r, v) = q.pop_front().unwrap();
                regs.write(r, v);
                let p = self.pending.get_mut(&r).expect("pending write");
                *p -= 1;
                if *p == 0 {
                    self.pending.remove(&r);
                }
                n += 1;
            }
            if q.len() > self.depth {
                return Err(SimError::Violation { cycle: t, msg: format!("writeback queue of bank {b} overflowed") });
            }
        }
        Ok(n)
    }

    fn accepts(&self, t: u64, extra: &[(u16, u64)]) -> bool {
        let end = extra.iter().map(|e| e.1).chain(self.calendar.keys().next_back().copied()).max().unwrap_or(t);
        let mut banks: Vec<u16> = extra.iter().map(|e| e.0).collect();
        banks.sort_unstable();
        banks.dedup();
        banks.into_iter().all(|b| {
            let mut q = self.queues[b as usize].len();
            for x in t + 1..=end {
                q += self.calendar.get(&x).map_or(0, |a| a.iter().filter(|(r, _)| r.bank == b).count());
                q += extra.iter().filter(|e| e.0 == b && e.1 == x).count();
                q -= (self.m.write_ports as usize).min(q);
                if q > self.depth {
                    return false;
                }
            }
            true
        })
    }

    /// Highest-priority reason `slot` cannot issue at `t`, ignoring read ports.
    fn hazard(&self, slot: &[MInstr], t: u64) -> Option<StallCause> {
        let live = || slot.iter().filter(|i| i.op != MOp::Nop);
        if live().any(|i| i.sources().iter().chain([&i.dst]).any(|r| self.pending.contains_key(r))) {
            return Some(StallCause::DataDep);
        }
        if live().any(|i| self.busy.get(&self.m.itinerary(i.op).unit).is_some_and(|&b| b > t)) {
            return Some(StallCause::Mmul);
        }
        let arrivals: Vec<(u16, u64)> = live().map(|i| (i.dst.bank, t + self.m.itinerary(i.op).latency as u64)).collect();
        if !self.accepts(t, &arrivals) {
            return Some(StallCause::Writeback);
        }
        None
    }
}

fn static_check(m: &HardwareModel, slot: &[MInstr], idx: usize) -> Result<u64, SimError> {
    let mut per_unit: HashMap<Unit, u32> = HashMap::new();
    let mut reads = [0u32; 16];
    for i in slot.iter().filter(|i| i.op != MOp::Nop) {
        *per_unit.entry(m.itinerary(i.op).unit).or_default() += 1;
        for r in i.sources() {
            reads[r.bank as usize] += 1;
        }
        if i.dst.bank as u32 >= m.banks || i.sources().iter().any(|r| r.bank as u32 >= m.banks) {
            return Err(SimError::Violation { cycle: idx as u64, msg: format!("slot {idx} names a bank the model lacks") });
        }
    }
    for (u, n) in per_unit {
        if n > m.units(u) {
            return Err(SimError::Violation { cycle: idx as u64, msg: format!("slot {idx} needs {n} {u:?} units") });
        }
    }
    // extra cycles to serialize reads beyond the port count
    Ok(reads.iter().map(|&r| r.div_ceil(m.read_ports).max(1) as u64 - 1).max().unwrap_or(0))
}

/// Runs `p` on the pipeline described by `m` (resolved for the curve).
/// Slots issue in order; a slot waits until its operands have retired, its
/// units are free, its reads fit the ports and the writeback stage can take
/// its results. The run ends with the last writeback.
pub fn cycle_sim(p: &MachineProgram, m: &HardwareModel, f: &PrimeField, inputs: &[Fp], opts: &SimOptions) -> Result<SimReport, SimError> {
    if !opts.ignore_fingerprint && p.fingerprint != m.fingerprint() {
        return Err(SimError::Fingerprint { expected: m.fingerprint(), found: p.fingerprint });
    }
    if p.width != m.width {
        return Err(SimError::Width { program: p.width, model: m.width });
    }
    let slots = p.instructions()?;
    let extra_reads: Vec<u64> = slots.iter().enumerate().map(|(k, s)| static_check(m, s, k)).collect::<Result<_, _>>()?;
    let (instrs, long) = p.counts()?;
    let long_ratio = long as f64 / instrs.max(1) as f64;
    let mut regs = Regs::new(p, inputs)?;
    let mut pipe = Pipe {
        m,
        depth: m.fifo_depth() as usize,
        pending: HashMap::new(),
        calendar: BTreeMap::new(),
        queues: vec![VecDeque::new(); m.banks as usize],
        busy: HashMap::new(),
    };
    let in_window = |t: u64| opts.window.is_some_and(|(a, b)| t >= a && t < b);
    let mut trace = Vec::new();
    let mut stalls = Stalls::default();
    let (mut t, mut k, mut serial) = (0u64, 0usize, 0u64);
    let (mut last_issue, mut last_retire) = (None::<u64>, None::<u64>);
    loop {
        let retired = pipe.retire(t, &mut regs)?;
        if retired > 0 {
            last_retire = Some(t);
        }
        let row = |lanes: Vec<(MOp, LaneState)>, stall| TraceRow { cycle: t, class: affinity(t, m, long_ratio, p.beta), lanes, stall, retired };
        if k < slots.len() {
            let slot = &slots[k];
            let cause = pipe.hazard(slot, t).or_else(|| (serial < extra_reads[k]).then_some(StallCause::ReadPort));
            match cause {
                Some(c) => {
                    if c == StallCause::ReadPort {
                        serial += 1;
                    }
                    stalls.bump(c);
                    if in_window(t) {
                        trace.push(row(slot.iter().map(|i| (i.op, LaneState::Stall)).collect(), Some(c)));
                    }
                }
                None => {
                    let mut results = Vec::new();
                    for (lane, i) in slot.iter().enumerate() {
                        if i.op == MOp::Nop {
                            continue;
                        }
                        let (a, b) = operands(&regs, i, k)?;
                        if i.op == MOp::Inv && a.is_zero() {
                            return Err(super::SimError::DivZero { slot: k, lane });
                        }
                        results.push((i, execute(f, i, a, b).unwrap()));
                    }
                    for (i, v) in results {
                        let it = m.itinerary(i.op);
                        pipe.calendar.entry(t + it.latency as u64).or_default().push((i.dst, v));
                        *pipe.pending.entry(i.dst).or_default() += 1;
                        if it.occupancy > 1 {
                            pipe.busy.insert(it.unit, t + it.occupancy as u64);
                        }
                    }
                    if in_window(t) {
                        let lanes = slot.iter().map(|i| (i.op, if i.op == MOp::Nop { LaneState::Nop } else { LaneState::Issue })).collect();
                        trace.push(row(lanes, None));
                    }
                    last_issue = Some(t);
                    serial = 0;
                    k += 1;
                }
            }
        } else if pipe.idle() {
            break;
        } else if in_window(t) {
            trace.push(row(vec![(MOp::Nop, LaneState::Drain); m.width as usize], None));
        }
        t += 1;
    }
    let end_issue = last_issue.map_or(0, |x| x + 1);
    let cycles = end_issue.max(last_retire.map_or(0, |x| x + 1));
    let outputs = p.outputs.iter().map(|&r| regs.read(r, slots.len())).collect::<Result<Vec<_>, _>>()?;
    let window = opts.window.map(|(a, b)| (a.min(cycles), b.min(cycles)));
    Ok(SimReport {
        cycles,
        instrs: instrs as u64,
        slots: slots.len() as u64,
        ipc: instrs as f64 / cycles.max(1) as f64,
        stalls,
        drain: cycles - end_issue,
        outputs,
        window,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::{assemble, pack_schedule, reg_alloc};
    use crate::field::CurveSpec;
    use crate::ir::{Imm, Op, Opcode, Program, Ty};

    fn build(p: &Program, m: &HardwareModel) -> MachineProgram {
        let mut s = pack_schedule(p, m, 0.0).unwrap();
        reg_alloc(p, &mut s, m).unwrap();
        assemble(p, &s, m, 4, true).unwrap()
    }

    #[test]
    fn independent_adds_take_k_plus_short() {
        let spec = CurveSpec::shipped("bn254").unwrap();
        let m = HardwareModel::default().resolved(254);
        let mut p = Program::new("bn254");
        p.push(Op::new(Opcode::Input, Ty::Fp, &[], Imm::Int(0)));
        p.push(Op::new(Opcode::Input, Ty::Fp, &[], Imm::Int(1)));
        for _ in 0..12 {
            let v = p.push(Op::new(Opcode::Add, Ty::Fp, &[0, 1], Imm::None));
            p.outputs.push(v);
        }
        let mp = build(&p, &m);
        let r = cycle_sim(&mp, &m, spec.fp(), &[Fp::from_u64(2), Fp::from_u64(3)], &SimOptions::default()).unwrap();
        assert_eq!(r.cycles, 12 + 8);
        assert_eq!(r.slots + r.stalls.total() + r.drain, r.cycles);
        assert_eq!(r.outputs[0], Fp::from_u64(5));
    }

    #[test]
    fn mismatched_model_is_rejected() {
        let spec = CurveSpec::shipped("bn254").unwrap();
        let m = HardwareModel::default().resolved(254);
        let p = super::super::tests::tiny(spec.fp());
        let e = cycle_sim(&p, &m, spec.fp(), &[Fp::ZERO], &SimOptions::default());
        assert!(matches!(e, Err(SimError::Fingerprint { .. })));
        let opts = SimOptions { ignore_fingerprint: true, ..Default::default() };
        let r = cycle_sim(&p, &m, spec.fp(), &[Fp::from_u64(3)], &opts).unwrap();
        assert_eq!(r.outputs, vec![Fp::from_u64(10)]);
        // CVT, SQR, ADD, ICV back to back with full dependence
        assert_eq!(r.cycles, 8 + 38 + 8 + 8 + 1);
        assert_eq!(r.slots + r.stalls.total() + r.drain, r.cycles);
    }
}
