//! Cycle-by-cycle list scheduling with issue-slot affinity.
//!
//! Each cycle the scheduler retires writebacks, collects ops whose operands
//! are readable, orders them by affinity match and program order, and packs
//! the largest valid subset by dynamic programming over the resources the
//! pack claims: read ports per bank, functional units, and the writeback
//! demand it adds to future cycles.

use std::collections::{BTreeSet, HashMap, VecDeque};

use super::{affinity, bank_alloc, machine_ops, BackendError, SchedStats, Schedule, Slot};
use crate::hw::{Class, HardwareModel, Itinerary, MOp, Unit};
use crate::ir::{Program, ValueId};

/// Candidates considered per cycle when packing more than one op.
const PACK_WINDOW: usize = 16;
/// Candidates tried per class when a single op is issued per cycle.
const SCAN_WINDOW: usize = 48;

/// Writeback stage: per-bank arrival calendar and retirement queues.
pub(crate) struct Writeback {
    ports: u32,
    depth: u32,
    horizon: u64,
    calendar: Vec<Vec<ValueId>>,
    counts: Vec<Vec<u32>>,
    queues: Vec<VecDeque<ValueId>>,
    last_arrival: u64,
    in_flight: usize,
}

impl Writeback {
    pub fn new(m: &HardwareModel, max_latency: u32) -> Self {
        let horizon = max_latency as u64 + 2;
        Writeback {
            ports: m.write_ports,
            depth: m.fifo_depth(),
            horizon,
            calendar: vec![Vec::new(); horizon as usize],
            counts: vec![vec![0; m.banks as usize]; horizon as usize],
            queues: vec![VecDeque::new(); m.banks as usize],
            last_arrival: 0,
            in_flight: 0,
        }
    }

    pub fn idle(&self) -> bool {
        self.in_flight == 0
    }

    pub fn add(&mut self, cycle: u64, bank: u32, v: ValueId) {
        let s = (cycle % self.horizon) as usize;
        self.calendar[s].push(v);
        self.counts[s][bank as usize] += 1;
        self.last_arrival = self.last_arrival.max(cycle);
        self.in_flight += 1;
    }

    /// Moves arrivals of cycle `t` into the queues and retires up to the port
    /// count per bank. Returns false on FIFO overflow.
    pub fn step(&mut self, t: u64, bank: &[u32], retired: &mut Vec<ValueId>) -> bool {
        let s = (t % self.horizon) as usize;
        for v in self.calendar[s].drain(..) {
            self.queues[bank[v as usize] as usize].push_back(v);
        }
        self.counts[s].iter_mut().for_each(|c| *c = 0);
        let mut ok = true;
        for q in &mut self.queues {
            for _ in 0..self.ports.min(q.len() as u32) {
                retired.push(q.pop_front().unwrap());
                self.in_flight -= 1;
            }
            ok &= q.len() as u32 <= self.depth;
        }
        ok
    }

    /// Whether extra arrivals `(bank, cycle)` (all after `t`) keep every
    /// queue within capacity, given the state after retiring cycle `t`.
    pub fn accepts(&self, t: u64, extra: &[(u32, u64)]) -> bool {
        let end = extra.iter().map(|e| e.1).max().unwrap_or(t).max(self.last_arrival);
        let mut banks: Vec<u32> = extra.iter().map(|e| e.0).collect();
        banks.sort_unstable();
        banks.dedup();
        for b in banks {
            let mut q = self.queues[b as usize].len() as u32;
            for x in t + 1..=end {
                q += self.counts[(x % self.horizon) as usize][b as usize];
                q += extra.iter().filter(|e| e.0 == b && e.1 == x).count() as u32;
                q -= self.ports.min(q);
                if q > self.depth {
                    return false;
                }
            }
        }
        true
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Policy {
    Affinity { beta: f64 },
    InOrder,
}

struct Units {
    busy_until: HashMap<Unit, u64>,
}

impl Units {
    fn free(&self, u: Unit, t: u64) -> bool {
        self.busy_until.get(&u).is_none_or(|&b| b <= t)
    }
}

/// Resource claim of a partial pack.
#[derive(Clone, PartialEq, Eq, Hash)]
struct PackKey {
    reads: Vec<u32>,
    units: [u32; 4],
    arrivals: Vec<(u32, u64)>,
}

fn unit_index(u: Unit) -> usize {
    match u {
        Unit::None => 0,
        Unit::Linear => 1,
        Unit::Mmul => 2,
        Unit::Minv => 3,
    }
}

struct Ctx<'a> {
    m: &'a HardwareModel,
    prog: &'a Program,
    bank: &'a [u32],
    itin: Vec<Option<Itinerary>>,
}

impl Ctx<'_> {
    fn read_banks(&self, v: ValueId) -> impl Iterator<Item = u32> + '_ {
        self.prog.ops[v as usize].args.iter().map(|&a| self.bank[a as usize])
    }

    /// Adds `v` to a pack claim if it still fits.
    fn extend(&self, key: &PackKey, v: ValueId, t: u64, units: &Units, wb: &Writeback) -> Option<PackKey> {
        let it = self.itin[v as usize].unwrap();
        let mut k = key.clone();
        let total: u32 = k.units.iter().sum();
        if total + 1 > self.m.width {
            return None;
        }
        let ui = unit_index(it.unit);
        if k.units[ui] + 1 > self.m.units(it.unit) || !units.free(it.unit, t) {
            return None;
        }
        k.units[ui] += 1;
        for b in self.read_banks(v) {
            k.reads[b as usize] += 1;
            if k.reads[b as usize] > self.m.read_ports {
                return None;
            }
        }
        k.arrivals.push((self.bank[v as usize], t + it.latency as u64));
        k.arrivals.sort_unstable();
        if !wb.accepts(t, &k.arrivals) {
            return None;
        }
        Some(k)
    }
}

/// Largest valid pack among `cands` (in priority order); ties go to the
/// lexicographically earliest choice.
fn best_pack(ctx: &Ctx, cands: &[ValueId], t: u64, units: &Units, wb: &Writeback) -> Vec<ValueId> {
    let empty = PackKey { reads: vec![0; ctx.m.banks as usize], units: [0; 4], arrivals: Vec::new() };
    let mut states: HashMap<PackKey, Vec<usize>> = HashMap::new();
    states.insert(empty, Vec::new());
    for (i, &v) in cands.iter().enumerate() {
        let mut next = states.clone();
        for (key, picks) in &states {
            if let Some(k) = ctx.extend(key, v, t, units, wb) {
                let mut p = picks.clone();
                p.push(i);
                match next.get(&k) {
                    Some(old) if !better(&p, old) => {}
                    _ => {
                        next.insert(k, p);
                    }
                }
            }
        }
        states = next;
    }
    let best = states.into_values().reduce(|a, b| if better(&b, &a) { b } else { a }).unwrap_or_default();
    best.into_iter().map(|i| cands[i]).collect()
}

fn better(a: &[usize], b: &[usize]) -> bool {
    a.len() > b.len() || (a.len() == b.len() && a < b)
}

/// Schedules a prime-field program with issue-slot affinity.
pub fn pack_schedule(prog: &Program, m: &HardwareModel, beta: f64) -> Result<Schedule, BackendError> {
    run(prog, m, Policy::Affinity { beta })
}

/// Source-order issue, one op per cycle, stalling until operands are
/// readable and the writeback stage can take the result.
pub fn inorder_schedule(prog: &Program, m: &HardwareModel) -> Result<Schedule, BackendError> {
    run(prog, m, Policy::InOrder)
}

pub fn run(prog: &Program, m: &HardwareModel, policy: Policy) -> Result<Schedule, BackendError> {
    let mops = machine_ops(prog)?;
    let bank = bank_alloc(prog, m);
    let n = prog.ops.len();
    let itin: Vec<Option<Itinerary>> = mops.iter().map(|o| o.map(|o| m.itinerary(o))).collect();
    let ctx = Ctx { m, prog, bank: &bank, itin };

    let mut stats = SchedStats { beta: if let Policy::Affinity { beta } = policy { beta } else { 0.0 }, ..Default::default() };
    for o in mops.iter().flatten() {
        stats.instrs += 1;
        match o.class() {
            Class::Long => stats.long += 1,
            Class::Short => stats.short += 1,
            Class::Inv => stats.inv += 1,
            Class::None => {}
        }
    }
    let long_ratio = stats.long_ratio();

    // operands per op that still have to retire, and users per value
    let mut deps = vec![0u32; n];
    let mut users: Vec<Vec<ValueId>> = vec![Vec::new(); n];
    for (i, op) in prog.ops.iter().enumerate() {
        for &a in &op.args {
            if mops[a as usize].is_some() {
                deps[i] += 1;
                users[a as usize].push(i as ValueId);
            }
        }
        if let Some(o) = mops[i] {
            let alone = PackKey { reads: vec![0; m.banks as usize], units: [0; 4], arrivals: Vec::new() };
            let it = m.itinerary(o);
            let mut reads = vec![0u32; m.banks as usize];
            for &a in &op.args {
                reads[bank[a as usize] as usize] += 1;
            }
            if reads.iter().any(|&r| r > m.read_ports) || m.units(it.unit) == 0 || m.write_ports == 0 {
                return Err(BackendError::Unschedulable(i as ValueId, format!("{o} needs more ports or units than the model has")));
            }
            drop(alone);
        }
    }

    let max_lat = MOp::ALL.iter().map(|&o| m.itinerary(o).latency).max().unwrap();
    let mut wb = Writeback::new(m, max_lat);
    let mut units = Units { busy_until: HashMap::new() };
    let mut issue: Vec<Option<u64>> = vec![None; n];
    let mut ready_at = vec![0u64; n];
    let mut ready: [BTreeSet<ValueId>; 3] = Default::default();
    let class_idx = |v: ValueId| match mops[v as usize].unwrap().class() {
        Class::Long => 0,
        Class::Short => 1,
        _ => 2,
    };
    for i in 0..n {
        if mops[i].is_some() && deps[i] == 0 {
            ready[class_idx(i as ValueId)].insert(i as ValueId);
        }
    }
    let order: Vec<ValueId> = (0..n as ValueId).filter(|&v| mops[v as usize].is_some()).collect();
    let mut next_in_order = 0usize;

    let mut slots = Vec::new();
    let mut remaining = stats.instrs;
    let mut retired = Vec::new();
    let mut t = 0u64;
    let mut last_retire = 0u64;
    let mut idle_run = 0u64;
    while remaining > 0 || !wb.idle() {
        retired.clear();
        let ok = wb.step(t, &bank, &mut retired);
        debug_assert!(ok, "scheduler overflowed a writeback queue");
        for &v in &retired {
            ready_at[v as usize] = t;
            last_retire = t;
            for &u in &users[v as usize] {
                deps[u as usize] -= 1;
                if deps[u as usize] == 0 {
                    ready[class_idx(u)].insert(u);
                }
            }
        }
        if remaining > 0 {
            let pack: Vec<ValueId> = match policy {
                Policy::InOrder => {
                    let v = order[next_in_order];
                    let empty = PackKey { reads: vec![0; m.banks as usize], units: [0; 4], arrivals: Vec::new() };
                    if deps[v as usize] == 0 && ctx.extend(&empty, v, t, &units, &wb).is_some() {
                        next_in_order += 1;
                        vec![v]
                    } else {
                        vec![]
                    }
                }
                Policy::Affinity { beta } => {
                    let first = match affinity(t, m, long_ratio, beta) {
                        Class::Long => [0, 2, 1],
                        _ => [1, 2, 0],
                    };
                    if m.width == 1 {
                        let empty = PackKey { reads: vec![0; m.banks as usize], units: [0; 4], arrivals: Vec::new() };
                        let mut pick = None;
                        let mut tried: HashMap<(usize, u32), bool> = HashMap::new();
                        'outer: for c in first {
                            for &v in ready[c].iter().take(SCAN_WINDOW) {
                                let key = (c, bank[v as usize]);
                                if tried.get(&key) == Some(&false) && m.banks == 1 {
                                    break;
                                }
                                let ok = ctx.extend(&empty, v, t, &units, &wb).is_some();
                                tried.insert(key, ok);
                                if ok {
                                    pick = Some(v);
                                    break 'outer;
                                }
                            }
                        }
                        pick.into_iter().collect()
                    } else {
                        let cands: Vec<ValueId> = first.iter().flat_map(|&c| ready[c].iter().copied()).take(PACK_WINDOW).collect();
                        best_pack(&ctx, &cands, t, &units, &wb)
                    }
                }
            };
            if !pack.is_empty() {
                for &v in &pack {
                    let it = ctx.itin[v as usize].unwrap();
                    issue[v as usize] = Some(t);
                    wb.add(t + it.latency as u64, bank[v as usize], v);
                    if it.occupancy > 1 {
                        units.busy_until.insert(it.unit, t + it.occupancy as u64);
                    }
                    ready[class_idx(v)].remove(&v);
                    remaining -= 1;
                }
                slots.push(Slot { cycle: t, ops: pack });
                idle_run = 0;
            } else if wb.idle() {
                idle_run += 1;
                if idle_run > max_lat as u64 + 1 {
                    let v = ready.iter().flat_map(|s| s.iter()).next().copied().unwrap_or(order[next_in_order.min(order.len() - 1)]);
                    return Err(BackendError::Unschedulable(v, "no progress with an empty pipeline".into()));
                }
            }
        }
        t += 1;
    }
    stats.cycles = if stats.instrs == 0 { 0 } else { last_retire + 1 };
    Ok(Schedule { slots, bank, issue, ready: ready_at, reg: None, stats, fingerprint: m.fingerprint() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::{Imm, Op, Opcode, Ty};

    fn adds(k: usize) -> Program {
        let mut p = Program::new("t");
        p.push(Op::new(Opcode::Input, Ty::Fp, &[], Imm::Int(0)));
        p.push(Op::new(Opcode::Input, Ty::Fp, &[], Imm::Int(1)));
        for _ in 0..k {
            let id = p.push(Op::new(Opcode::Add, Ty::Fp, &[0, 1], Imm::None));
            p.outputs.push(id);
        }
        p
    }

    #[test]
    fn independent_adds_issue_back_to_back() {
        let m = HardwareModel::default().resolved(254);
        let s = pack_schedule(&adds(10), &m, 0.0).unwrap();
        assert_eq!(s.slots.len(), 10);
        assert_eq!(s.stats.cycles, 10 + 8);
    }

    #[test]
    fn chain_waits_for_latency() {
        let m = HardwareModel::default().resolved(254);
        let mut p = adds(0);
        let a = p.push(Op::new(Opcode::Mul, Ty::Fp, &[0, 1], Imm::None));
        let b = p.push(Op::new(Opcode::Add, Ty::Fp, &[a, 0], Imm::None));
        p.outputs = vec![b];
        let s = inorder_schedule(&p, &m).unwrap();
        assert_eq!(s.issue[b as usize], Some(38));
        assert_eq!(s.stats.cycles, 38 + 8 + 1);
    }

    #[test]
    fn wide_issue_packs_by_resources() {
        let m = HardwareModel { width: 2, banks: 2, linear_alus: 2, fifo: crate::hw::Fifo { present: true, depth: 4 }, ..Default::default() }.resolved(254);
        let s = pack_schedule(&adds(8), &m, 0.0).unwrap();
        assert!(s.slots.iter().all(|sl| sl.ops.len() <= 2));
        assert!(s.slots.len() < 8);
    }
}
