use serde::Serialize;

use crate::codec::{CompFlag, NUM_GPRS, NUM_TARGET_REGS};
use crate::config::NUM_QUBITS;

pub const DEFAULT_MEMORY_BYTES: usize = 1 << 20;

const Q: usize = NUM_QUBITS as usize;

/// Measurement result register of one qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Qmrr {
    pub value: u8,
    pub valid: bool,
}

/// Result history behind the per-qubit execution flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct MeasurementHistory {
    pub last: u8,
    pub second_last: u8,
    pub count: u64,
}

impl MeasurementHistory {
    pub fn record(&mut self, result: u8) {
        self.second_last = self.last;
        self.last = result;
        self.count += 1;
    }

    /// The four execution flags. Without history only the first is set.
    pub fn flags(&self) -> [bool; 4] {
        [
            true,
            self.count >= 1 && self.last == 1,
            self.count >= 1 && self.last == 0,
            self.count >= 2 && self.last == self.second_last,
        ]
    }
}

/// Architectural state visible to the instruction set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MachineState {
    pub pc: u32,
    pub gpr: [u32; NUM_GPRS as usize],
    /// Indexed by `CompFlag::code`.
    pub compflags: [bool; 12],
    pub qotrs: [u8; NUM_TARGET_REGS as usize],
    pub qotrt: [u16; NUM_TARGET_REGS as usize],
    pub qmrr: [Qmrr; Q],
    pub history: [MeasurementHistory; Q],
    pub memory: Vec<u8>,
    pub timing_label: u64,
    pub last_timing_point: u64,
    pub quantum_clock: u64,
    pub qubit_busy_until: [u64; Q],
    /// Processor status bit set by STOP; distinct from the per-qubit flags.
    pub stopped: bool,
}

impl MachineState {
    pub fn new(memory_bytes: usize) -> Self {
        let mut compflags = [false; 12];
        compflags[CompFlag::Always.code() as usize] = true;
        Self {
            pc: 0,
            gpr: [0; NUM_GPRS as usize],
            compflags,
            qotrs: [0; NUM_TARGET_REGS as usize],
            qotrt: [0; NUM_TARGET_REGS as usize],
            qmrr: [Qmrr::default(); Q],
            history: [MeasurementHistory::default(); Q],
            memory: vec![0; memory_bytes],
            timing_label: 0,
            last_timing_point: 0,
            quantum_clock: 0,
            qubit_busy_until: [0; Q],
            stopped: false,
        }
    }

    pub fn flag(&self, f: CompFlag) -> bool {
        self.compflags[f.code() as usize]
    }

    pub fn execution_flags(&self, qubit: u8) -> [bool; 4] {
        self.history[qubit as usize].flags()
    }
}

impl Default for MachineState {
    fn default() -> Self {
        Self::new(DEFAULT_MEMORY_BYTES)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn execution_flag_history() {
        let mut h = MeasurementHistory::default();
        assert_eq!(h.flags(), [true, false, false, false]);
        h.record(1);
        h.record(1);
        assert_eq!(h.flags(), [true, true, false, true]);
        h.record(0);
        assert_eq!(h.flags(), [true, false, true, false]);
    }

    #[test]
    fn fresh_state() {
        let s = MachineState::default();
        assert!(s.flag(CompFlag::Always));
        assert!(!s.flag(CompFlag::Never));
        assert_eq!(s.memory.len(), 1 << 20);
    }
}
