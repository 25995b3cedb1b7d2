//! Instruction-set simulator: architectural state, the queue-based quantum
//! timeline and a seven-qubit state-vector device.
//!
//! Classical instructions take no quantum cycles. Each timing point is
//! anchored at `max(last timing point, quantum clock)`, so after FMR has
//! waited for a result, later operations are scheduled relative to it.

pub mod device;
pub mod exec;
pub mod report;
pub mod state;

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::codec::{decode, BundleWord, CompFlag, DecodeError, DecodeMode, Instruction};
use crate::config::{GateRole, GateSemantics, OpcodeMap, Topology, Unitary, NUM_QUBITS};
use crate::disasm;

pub use device::QuantumDevice;
pub use report::{format_duration, MeasurementRecord, Report, RunStatus, Warning, CYCLE_NS};
pub use state::{MachineState, MeasurementHistory, Qmrr, DEFAULT_MEMORY_BYTES};

const Q: usize = NUM_QUBITS as usize;

pub const DEFAULT_MAX_STEPS: u64 = 1_000_000;

#[derive(Debug, Clone)]
pub struct VmConfig {
    pub qmap: OpcodeMap,
    pub semantics: GateSemantics,
    pub topology: Topology,
    pub memory_bytes: usize,
    /// Report overlapping operations on a qubit as warnings instead of errors.
    pub allow_overlap: bool,
    pub max_steps: u64,
    pub trace: bool,
    /// Include the final state vector in the report.
    pub debug_amplitudes: bool,
}

impl VmConfig {
    pub fn new(qmap: OpcodeMap, semantics: GateSemantics, topology: Topology) -> Self {
        Self {
            qmap,
            semantics,
            topology,
            memory_bytes: DEFAULT_MEMORY_BYTES,
            allow_overlap: false,
            max_steps: DEFAULT_MAX_STEPS,
            trace: false,
            debug_amplitudes: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VmError {
    #[error("pc {pc:#06x}: PC out of range (image is {image_bytes} bytes)")]
    PcOutOfRange { pc: u32, image_bytes: usize },
    #[error("pc {pc:#06x}: {source}")]
    Decode { pc: u32, source: DecodeError },
    #[error("pc {pc:#06x}: FMR before measurement on q{qubit}")]
    FmrBeforeMeasurement { pc: u32, qubit: u8 },
    #[error("pc {pc:#06x}: memory access at {address:#010x} out of bounds")]
    MemoryOutOfBounds { pc: u32, address: u32 },
    #[error("pc {pc:#06x}: qubit conflict on q{qubit}: `{op}` starts at cycle {start} but the qubit is busy until {busy_until}")]
    QubitConflict {
        pc: u32,
        qubit: u8,
        op: String,
        start: u64,
        busy_until: u64,
    },
    #[error("pc {pc:#06x}: no gate semantics for quantum opcode {opcode}")]
    NoSemantics { pc: u32, opcode: u16 },
}

impl VmError {
    pub fn pc(&self) -> u32 {
        match *self {
            VmError::PcOutOfRange { pc, .. }
            | VmError::Decode { pc, .. }
            | VmError::FmrBeforeMeasurement { pc, .. }
            | VmError::MemoryOutOfBounds { pc, .. }
            | VmError::QubitConflict { pc, .. }
            | VmError::NoSemantics { pc, .. } => pc,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RegWrite {
    pub target: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EventRecord {
    pub op: String,
    pub qubits: Vec<u8>,
    pub start: u64,
    pub duration: u32,
}

/// One retired instruction word.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceRecord {
    pub pc: u32,
    pub word: String,
    pub text: String,
    pub writes: Vec<RegWrite>,
    pub events: Vec<EventRecord>,
    pub timing_point: u64,
    pub clock: u64,
}

impl TraceRecord {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("trace record serialises")
    }
}

#[derive(Debug, Clone)]
enum Action {
    Gate { opcode: u16, qubits: Vec<u8> },
    Measure { qubit: u8, completion: u64 },
    Prepare { qubit: u8 },
    /// Result becomes architecturally visible.
    Complete { qubit: u8, start: u64, result: u8 },
}

pub struct Machine<'c> {
    config: &'c VmConfig,
    image: Vec<u32>,
    pub state: MachineState,
    device: QuantumDevice,
    queue: BTreeMap<(u64, u64), Action>,
    seq: u64,
    /// Completion cycle of the last measurement issued per qubit.
    last_measure_end: [Option<u64>; Q],
    latest_event_end: u64,
    measurements: Vec<MeasurementRecord>,
    warnings: Vec<Warning>,
    retired: u64,
    trace: Vec<TraceRecord>,
    seed: u64,
    shot: u64,
}

impl<'c> Machine<'c> {
    pub fn new(image: &[u32], config: &'c VmConfig, seed: u64, shot: u64) -> Self {
        Self {
            config,
            image: image.to_vec(),
            state: MachineState::new(config.memory_bytes),
            device: QuantumDevice::new(seed, shot),
            queue: BTreeMap::new(),
            seq: 0,
            last_measure_end: [None; Q],
            latest_event_end: 0,
            measurements: Vec::new(),
            warnings: Vec::new(),
            retired: 0,
            trace: Vec::new(),
            seed,
            shot,
        }
    }

    pub fn device(&self) -> &QuantumDevice {
        &self.device
    }

    pub fn trace(&self) -> &[TraceRecord] {
        &self.trace
    }

    pub fn warnings(&self) -> &[Warning] {
        &self.warnings
    }

    pub fn measurements(&self) -> &[MeasurementRecord] {
        &self.measurements
    }

    pub fn retired(&self) -> u64 {
        self.retired
    }

    fn warn(&mut self, pc: u32, message: String) {
        self.warnings.push(Warning { pc, message });
    }

    fn push(&mut self, at: u64, action: Action) {
        self.queue.insert((at, self.seq), action);
        self.seq += 1;
    }

    /// Moves the quantum clock forward to `t`, applying every action due.
    pub fn advance_to(&mut self, t: u64) {
        while let Some(entry) = self.queue.first_entry() {
            let (at, _) = *entry.key();
            if at > t {
                break;
            }
            let action = entry.remove();
            self.apply(at, action);
        }
        self.state.quantum_clock = self.state.quantum_clock.max(t);
    }

    fn apply(&mut self, at: u64, action: Action) {
        match action {
            Action::Gate { opcode, qubits } => {
                let def = self.config.semantics.get(opcode).expect("checked at issue");
                match &def.role {
                    GateRole::Unitary(Unitary::Single(m)) => self.device.apply_single(qubits[0], m),
                    GateRole::Unitary(Unitary::Two(m)) => self.device.apply_two(qubits[0], qubits[1], m),
                    GateRole::Measure | GateRole::Prepare => unreachable!("issued as dedicated actions"),
                }
            }
            Action::Prepare { qubit } => self.device.prepare(qubit),
            Action::Measure { qubit, completion } => {
                let result = self.device.measure(qubit);
                self.push(completion, Action::Complete { qubit, start: at, result });
            }
            Action::Complete { qubit, start, result } => {
                let q = qubit as usize;
                self.state.qmrr[q] = Qmrr { value: result, valid: true };
                self.state.history[q].record(result);
                self.measurements.push(MeasurementRecord {
                    qubit,
                    start,
                    completion: at,
                    result,
                });
            }
        }
    }

    /// Executes one instruction word. A stopped machine does nothing.
    pub fn step(&mut self) -> Result<(), VmError> {
        if self.state.stopped {
            return Ok(());
        }
        let pc = self.state.pc;
        let index = (pc / 4) as usize;
        if pc % 4 != 0 || index >= self.image.len() {
            return Err(VmError::PcOutOfRange {
                pc,
                image_bytes: 4 * self.image.len(),
            });
        }
        let word = self.image[index];
        let instr = decode(word, DecodeMode::Permissive).map_err(|source| VmError::Decode { pc, source })?;

        let before = self.config.trace.then(|| self.state.clone());
        let mut events = Vec::new();
        let mut mem_write = None;
        self.execute(pc, &instr, &mut events, &mut mem_write)?;
        self.retired += 1;

        if let Some(before) = before {
            let text = disasm::format_instruction(&instr, &self.config.qmap, &self.config.topology, |_| None)
                .unwrap_or_else(|| format!(".word  0x{word:08X}"));
            let mut writes = register_writes(&before, &self.state);
            if let Some((address, value)) = mem_write {
                writes.push(RegWrite {
                    target: format!("mem[{address:#010x}]"),
                    value: format!("{value:#010x}"),
                });
            }
            self.trace.push(TraceRecord {
                pc,
                word: format!("0x{word:08X}"),
                text,
                writes,
                events,
                timing_point: self.state.last_timing_point,
                clock: self.state.quantum_clock,
            });
        }
        Ok(())
    }

    fn execute(
        &mut self,
        pc: u32,
        instr: &Instruction,
        events: &mut Vec<EventRecord>,
        mem_write: &mut Option<(u32, u32)>,
    ) -> Result<(), VmError> {
        use Instruction::*;
        let gpr = self.state.gpr;
        let g = |r: u8| gpr[r as usize];
        let mut next = pc.wrapping_add(4);
        match *instr {
            Nop => {}
            Stop => {
                self.state.stopped = true;
                next = pc;
            }
            Add { rd, rs, rt } => self.state.gpr[rd as usize] = exec::add(g(rs), g(rt)),
            Sub { rd, rs, rt } => self.state.gpr[rd as usize] = exec::sub(g(rs), g(rt)),
            And { rd, rs, rt } => self.state.gpr[rd as usize] = exec::and(g(rs), g(rt)),
            Or { rd, rs, rt } => self.state.gpr[rd as usize] = exec::or(g(rs), g(rt)),
            Xor { rd, rs, rt } => self.state.gpr[rd as usize] = exec::xor(g(rs), g(rt)),
            Not { rd, rt } => self.state.gpr[rd as usize] = exec::not(g(rt)),
            Cmp { rs, rt } => self.state.compflags = exec::compare(g(rs), g(rt)),
            Br { flag, offset } => {
                if self.state.flag(flag) {
                    next = exec::branch_target(pc, &exec::imm21_of(offset));
                }
            }
            Fbr { flag, rd } => self.state.gpr[rd as usize] = u32::from(self.state.flag(flag)),
            Ldi { rd, imm } => self.state.gpr[rd as usize] = exec::ldi(imm),
            Ldui { rd, rs, imm } => self.state.gpr[rd as usize] = exec::ldui(g(rs), imm),
            Ld { rd, rt, offset } => {
                let address = self.mem_address(pc, g(rt), offset)?;
                let a = address as usize;
                let bytes: [u8; 4] = self.state.memory[a..a + 4].try_into().expect("4 bytes");
                self.state.gpr[rd as usize] = u32::from_le_bytes(bytes);
            }
            St { rs, rt, offset } => {
                let address = self.mem_address(pc, g(rt), offset)?;
                let value = g(rs);
                let a = address as usize;
                self.state.memory[a..a + 4].copy_from_slice(&value.to_le_bytes());
                *mem_write = Some((address, value));
            }
            Smis { sd, mask } => self.state.qotrs[sd as usize] = mask,
            Smit { td, mask } => self.state.qotrt[td as usize] = mask,
            Qwait { cycles } => self.new_timing_point(cycles as u64),
            Qwaitr { rs } => {
                let value = g(rs);
                if value >> 20 != 0 {
                    self.warn(pc, format!("QWAITR uses the low 20 bits of r{rs} ({value:#010x})"));
                }
                self.new_timing_point(exec::wait_amount(value) as u64);
            }
            Fmr { rd, qubit } => {
                let end = self.last_measure_end[qubit as usize].ok_or(VmError::FmrBeforeMeasurement { pc, qubit })?;
                self.advance_to(end.max(self.state.quantum_clock));
                self.state.gpr[rd as usize] = self.state.qmrr[qubit as usize].value as u32;
            }
            Bundle(ref word) => self.issue_bundle(pc, word, events)?,
        }
        self.state.pc = next;
        Ok(())
    }

    fn mem_address(&mut self, pc: u32, base: u32, offset: i16) -> Result<u32, VmError> {
        let address = exec::effective_address(base, offset);
        if address as u64 + 4 > self.state.memory.len() as u64 {
            return Err(VmError::MemoryOutOfBounds { pc, address });
        }
        if address % 4 != 0 {
            self.warn(pc, format!("unaligned memory access at {address:#010x}"));
        }
        Ok(address)
    }

    fn new_timing_point(&mut self, delta: u64) {
        let s = &mut self.state;
        s.last_timing_point = s.last_timing_point.max(s.quantum_clock) + delta;
        s.timing_label += 1;
    }

    fn issue_bundle(&mut self, pc: u32, word: &BundleWord, events: &mut Vec<EventRecord>) -> Result<(), VmError> {
        self.new_timing_point(word.pi as u64);
        let start = self.state.last_timing_point;
        for slot in word.slots.iter().filter(|s| !s.is_qnop()) {
            let def = self
                .config
                .semantics
                .get(slot.opcode)
                .ok_or(VmError::NoSemantics { pc, opcode: slot.opcode })?;
            let t = slot.target as usize;
            let groups: Vec<Vec<u8>> = match &def.role {
                GateRole::Unitary(Unitary::Two(_)) => {
                    let mask = self.state.qotrt[t];
                    (0..16u8)
                        .filter(|b| mask >> b & 1 == 1)
                        .filter_map(|b| self.config.topology.pair(b))
                        .map(|(s, t)| vec![s, t])
                        .collect()
                }
                _ => {
                    let mask = self.state.qotrs[t];
                    (0..NUM_QUBITS).filter(|q| mask >> q & 1 == 1).map(|q| vec![q]).collect()
                }
            };
            let (name, duration, role) = (def.name.clone(), def.duration, def.role.clone());
            let end = start + duration as u64;
            for qubits in groups {
                for &q in &qubits {
                    let busy_until = self.state.qubit_busy_until[q as usize];
                    if start < busy_until {
                        let err = VmError::QubitConflict {
                            pc,
                            qubit: q,
                            op: name.clone(),
                            start,
                            busy_until,
                        };
                        if !self.config.allow_overlap {
                            return Err(err);
                        }
                        self.warn(pc, err.to_string().split_once(": ").map_or(String::new(), |(_, m)| m.to_string()));
                    }
                    let b = &mut self.state.qubit_busy_until[q as usize];
                    *b = (*b).max(end);
                }
                let action = match role {
                    GateRole::Measure => {
                        let q = qubits[0];
                        self.state.qmrr[q as usize].valid = false;
                        self.last_measure_end[q as usize] = Some(end);
                        Action::Measure { qubit: q, completion: end }
                    }
                    GateRole::Prepare => Action::Prepare { qubit: qubits[0] },
                    GateRole::Unitary(_) => Action::Gate {
                        opcode: slot.opcode,
                        qubits: qubits.clone(),
                    },
                };
                self.push(start, action);
                self.latest_event_end = self.latest_event_end.max(end);
                if self.config.trace {
                    events.push(EventRecord {
                        op: name.clone(),
                        qubits,
                        start,
                        duration,
                    });
                }
            }
        }
        Ok(())
    }

    /// Runs until STOP, an error or the step limit, then lets the quantum
    /// timeline drain.
    pub fn run(&mut self) -> (RunStatus, Option<VmError>) {
        let mut outcome = (RunStatus::MaxSteps, None);
        for _ in 0..self.config.max_steps {
            if let Err(e) = self.step() {
                outcome = (RunStatus::Error, Some(e));
                break;
            }
            if self.state.stopped {
                outcome = (RunStatus::Stopped, None);
                break;
            }
        }
        if outcome.0 != RunStatus::Error {
            self.finish();
        }
        outcome
    }

    /// Drains every pending event; the clock ends at the later of the last
    /// timing point and the last event completion.
    pub fn finish(&mut self) {
        let end = self
            .state
            .last_timing_point
            .max(self.latest_event_end)
            .max(self.state.quantum_clock);
        self.advance_to(end);
    }

    pub fn report(&self, status: RunStatus, error: Option<&VmError>) -> Report {
        let s = &self.state;
        Report {
            status,
            error: error.map(ToString::to_string),
            seed: self.seed,
            shot: self.shot,
            retired: self.retired,
            pc: format!("{:#06x}", s.pc),
            quantum_clock: s.quantum_clock,
            quantum_time: format_duration(s.quantum_clock),
            timing_label: s.timing_label,
            gpr: s.gpr.iter().map(|v| format!("0x{v:08X}")).collect(),
            qmrr: s.qmrr.to_vec(),
            execution_flags: (0..NUM_QUBITS).map(|q| s.execution_flags(q)).collect(),
            measurements: self.measurements.clone(),
            warnings: self.warnings.iter().map(ToString::to_string).collect(),
            amplitudes: self
                .config
                .debug_amplitudes
                .then(|| self.device.amplitudes().iter().map(|a| [a.re, a.im]).collect()),
        }
    }
}

fn register_writes(before: &MachineState, after: &MachineState) -> Vec<RegWrite> {
    let mut writes = Vec::new();
    for (i, (a, b)) in before.gpr.iter().zip(&after.gpr).enumerate() {
        if a != b {
            writes.push(RegWrite {
                target: format!("r{i}"),
                value: format!("0x{b:08X}"),
            });
        }
    }
    if before.compflags != after.compflags {
        let set: Vec<&str> = CompFlag::ALL
            .iter()
            .filter(|f| after.flag(**f))
            .map(|f| f.name())
            .collect();
        writes.push(RegWrite {
            target: "flags".into(),
            value: set.join("|"),
        });
    }
    for (i, (a, b)) in before.qotrs.iter().zip(&after.qotrs).enumerate() {
        if a != b {
            writes.push(RegWrite {
                target: format!("s{i}"),
                value: format!("{b:#04x}"),
            });
        }
    }
    for (i, (a, b)) in before.qotrt.iter().zip(&after.qotrt).enumerate() {
        if a != b {
            writes.push(RegWrite {
                target: format!("t{i}"),
                value: format!("{b:#06x}"),
            });
        }
    }
    writes
}

/// Everything a finished run produces.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub status: RunStatus,
    pub error: Option<VmError>,
    pub state: MachineState,
    pub trace: Vec<TraceRecord>,
    pub report: Report,
}

impl RunResult {
    pub fn trace_jsonl(&self) -> String {
        self.trace.iter().map(|r| r.to_json_line() + "\n").collect()
    }
}

/// Runs shot `shot` of `image`; each shot draws from its own random stream.
pub fn run_shot(image: &[u32], config: &VmConfig, seed: u64, shot: u64) -> RunResult {
    let mut m = Machine::new(image, config, seed, shot);
    let (status, error) = m.run();
    let report = m.report(status, error.as_ref());
    RunResult {
        status,
        error,
        state: m.state,
        trace: m.trace,
        report,
    }
}

pub fn run(image: &[u32], config: &VmConfig, seed: u64) -> RunResult {
    run_shot(image, config, seed, 0)
}

pub fn run_shots(image: &[u32], config: &VmConfig, seed: u64, shots: u64) -> Vec<RunResult> {
    (0..shots).map(|shot| run_shot(image, config, seed, shot)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::encode;
    use crate::config::defaults;
    use crate::frontend;

    fn config() -> VmConfig {
        let qmap = OpcodeMap::parse(defaults::QMAP).unwrap();
        let semantics = GateSemantics::parse(defaults::GATES, &qmap).unwrap();
        VmConfig::new(qmap, semantics, Topology::default())
    }

    fn assemble(src: &str, cfg: &VmConfig) -> Vec<u32> {
        frontend::assemble(src, &cfg.qmap, &cfg.topology).unwrap().words
    }

    fn run_src(src: &str) -> RunResult {
        let cfg = config();
        run(&assemble(src, &cfg), &cfg, 0)
    }

    #[test]
    fn nop_advances_pc() {
        let cfg = config();
        let mut m = Machine::new(&[0], &cfg, 0, 0);
        m.step().unwrap();
        assert_eq!(m.state.pc, 4);
        let mut fresh = MachineState::new(cfg.memory_bytes);
        fresh.pc = 4;
        assert_eq!(m.state, fresh);
    }

    #[test]
    fn stop_holds_pc() {
        let cfg = config();
        let mut m = Machine::new(&[0x1000_0000], &cfg, 0, 0);
        m.step().unwrap();
        assert!(m.state.stopped);
        assert_eq!(m.state.pc, 0);
        m.step().unwrap();
        assert!(m.state.stopped && m.retired() == 1);
    }

    #[test]
    fn add_golden_word() {
        let cfg = config();
        let mut m = Machine::new(&[0x3C11_0C00], &cfg, 0, 0);
        m.state.gpr[2] = 2;
        m.state.gpr[3] = 3;
        m.step().unwrap();
        assert_eq!((m.state.gpr[1], m.state.pc), (5, 4));
    }

    #[test]
    fn pc_out_of_range() {
        let cfg = config();
        let mut m = Machine::new(&[0], &cfg, 0, 0);
        m.step().unwrap();
        assert!(matches!(m.step(), Err(VmError::PcOutOfRange { pc: 4, .. })));
    }

    #[test]
    fn branch_and_flags() {
        let r = run_src("LDI r0, 3\nLDI r1, 5\nCMP r0, r1\nFBR GT, r2\nFBR NEVER, r3\nFBR ALWAYS, r4\nBR EQ, skip\nLDI r5, 1\nskip: STOP\n");
        assert_eq!(&r.state.gpr[2..6], &[1, 0, 1, 1]);
        let r = run_src("LDI r0, 3\nCMP r0, r0\nBR EQ, skip\nLDI r5, 1\nskip: STOP\n");
        assert_eq!(r.state.gpr[5], 0);
        // BR ALWAYS, 2 at pc 0 lands on 8
        let cfg = config();
        let br = encode(&Instruction::Br { flag: CompFlag::Always, offset: 2 }).unwrap();
        let mut m = Machine::new(&[br, 0, 0], &cfg, 0, 0);
        m.step().unwrap();
        assert_eq!(m.state.pc, 8);
    }

    #[test]
    fn memory() {
        let r = run_src("LDI r1, 100\nLDI r2, -7\nST r2, r1(-4)\nLD r3, r1(-4)\nSTOP\n");
        assert_eq!(r.state.gpr[3], (-7i32) as u32);
        assert_eq!(&r.state.memory[96..100], &(-7i32).to_le_bytes());
        let r = run_src("LDI r1, 1\nLD r3, r1(0)\nSTOP\n");
        assert_eq!(r.report.warnings.len(), 1);
        let r = run_src("LDI r1, 0\nLDUI r1, r1, 8\nLD r3, r1(0)\nSTOP\n");
        assert!(matches!(r.error, Some(VmError::MemoryOutOfBounds { address: 0x10_0000, .. })));
    }

    #[test]
    fn load_immediates() {
        let r = run_src("LDI r0, -1\nLDI r1, 0\nLDUI r1, r1, 0x7FFF\nSTOP\n");
        assert_eq!(r.state.gpr[0], 0xFFFF_FFFF);
        assert_eq!(r.state.gpr[1], 0xFFFE_0000);
    }

    #[test]
    fn masks_overwrite() {
        let r = run_src("SMIS s7, {0, 1, 2, 3, 4, 5, 6}\nSMIS s7, {1}\nSMIT t0, {(0, 2)}\nSTOP\n");
        assert_eq!(r.state.qotrs[7], 0b10);
        assert_eq!(r.state.qotrt[0], 1);
    }

    #[test]
    fn qwait_timing() {
        let r = run_src("QWAIT 10000\nSTOP\n");
        assert_eq!(r.state.quantum_clock, 10_000);
        assert_eq!(r.report.quantum_time, "200 µs");
        let r = run_src("QWAIT 0\nSTOP\n");
        assert_eq!((r.state.timing_label, r.state.quantum_clock), (1, 0));
        let r = run_src("LDI r0, 0\nLDUI r0, r0, 8\nQWAITR r0\nSTOP\n");
        assert_eq!(r.state.quantum_clock, 0);
        let r = run_src("LDI r0, -1\nQWAITR r0\nSTOP\n");
        assert_eq!(r.state.quantum_clock, 0xFFFFF);
        assert_eq!(r.report.warnings.len(), 1);
    }

    #[test]
    fn bundle_timing() {
        let r = run_src("SMIS s0, {0}\nQWAIT 10000\n3, x s0\nSTOP\n");
        assert_eq!(r.state.quantum_clock, 10_004);
        let r = run_src("SMIT t0, {(0, 2)}\nQWAIT 10000\n3, cz t0\nSTOP\n");
        assert_eq!(r.state.quantum_clock, 10_005);
        let r = run_src("3, qnop\nSTOP\n");
        assert_eq!(r.state.quantum_clock, 3);
    }

    #[test]
    fn somq_and_packing() {
        let cfg = VmConfig { trace: true, ..config() };
        let image = assemble("SMIS s0, {0, 1}\nSMIS s1, {2}\nSMIS s2, {3}\n2, x s0 | y s1 | h s2\nSTOP\n", &cfg);
        let r = run(&image, &cfg, 0);
        let events: Vec<&EventRecord> = r.trace.iter().flat_map(|t| &t.events).collect();
        assert_eq!(events.len(), 4);
        assert!(events.iter().all(|e| e.start == 2));
        assert_eq!(events[0].qubits, [0]);
        assert_eq!(events[1].qubits, [1]);
    }

    #[test]
    fn qubit_conflicts() {
        let src = "SMIS s0, {0}\n1, MeasZ s0\n1, x s0\nSTOP\n";
        assert!(matches!(run_src(src).error, Some(VmError::QubitConflict { qubit: 0, .. })));
        let cfg = VmConfig { allow_overlap: true, ..config() };
        let r = run(&assemble(src, &cfg), &cfg, 0);
        assert_eq!(r.status, RunStatus::Stopped);
        assert_eq!(r.report.warnings.len(), 1);
        // pairs in one mask sharing a qubit
        let r = run_src("SMIT t0, {(0, 2), (0, 3)}\n1, cz t0\nSTOP\n");
        assert!(matches!(r.error, Some(VmError::QubitConflict { qubit: 0, .. })));
    }

    #[test]
    fn missing_semantics() {
        let r = run_src("SMIS s0, {0}\n1, q#300 s0\nSTOP\n");
        assert!(matches!(r.error, Some(VmError::NoSemantics { opcode: 300, .. })));
    }

    #[test]
    fn fmr_behaviour() {
        let r = run_src("SMIS s0, {4}\n1, x s0\n1, MeasZ s0\nFMR r1, q4\nFMR r2, q4\nSTOP\n");
        assert_eq!(&r.state.gpr[1..3], &[1, 1]);
        // waits for the measurement to complete: 1 + 1 + 300
        assert_eq!(r.state.quantum_clock, 302);
        assert_eq!(r.report.measurements[0].completion, 302);
        let r = run_src("FMR r1, q0\nSTOP\n");
        assert!(matches!(r.error, Some(VmError::FmrBeforeMeasurement { qubit: 0, pc: 0 })));
    }

    #[test]
    fn timing_anchors_after_feedback() {
        let r = run_src("SMIS s0, {0}\n1, MeasZ s0\nFMR r0, q0\n1, x s0\nSTOP\n");
        // measurement completes at 301, the X starts one cycle later
        assert_eq!(r.state.quantum_clock, 303);
    }

    #[test]
    fn qmrr_invalid_while_in_flight() {
        let cfg = config();
        let image = assemble("SMIS s0, {0}\n1, MeasZ s0\nSTOP\n", &cfg);
        let mut m = Machine::new(&image, &cfg, 0, 0);
        m.step().unwrap();
        m.step().unwrap();
        assert!(!m.state.qmrr[0].valid);
        m.advance_to(300);
        assert!(!m.state.qmrr[0].valid);
        m.advance_to(301);
        assert!(m.state.qmrr[0].valid);
        assert_eq!(m.state.execution_flags(0), [true, false, true, false]);
    }

    #[test]
    fn prepare_resets_qubit() {
        let r = run_src("SMIS s0, {5}\n1, x s0\n1, prepz s0\n1, MeasZ s0\nFMR r0, q5\nSTOP\n");
        assert_eq!(r.state.gpr[0], 0);
    }

    #[test]
    fn max_steps() {
        let cfg = VmConfig { max_steps: 10, ..config() };
        let r = run(&assemble("loop: BR ALWAYS, loop\n", &cfg), &cfg, 0);
        assert_eq!((r.status, r.report.retired), (RunStatus::MaxSteps, 10));
    }

    #[test]
    fn trace_and_report_are_deterministic() {
        let cfg = VmConfig {
            trace: true,
            debug_amplitudes: true,
            ..config()
        };
        let image = assemble("SMIS s0, {0}\n1, h s0\n1, MeasZ s0\nFMR r0, q0\nSTOP\n", &cfg);
        let a = run(&image, &cfg, 42);
        let b = run(&image, &cfg, 42);
        assert_eq!(a.trace_jsonl(), b.trace_jsonl());
        assert_eq!(a.report.render(), b.report.render());
        assert_eq!(a.trace.len(), 5);
        assert!(a.report.amplitudes.is_some());
        assert!(a.trace[3].writes.iter().all(|w| w.target == "r0"));
    }
}
