use std::fmt::Write as _;

use serde::Serialize;

use super::state::Qmrr;

/// Length of one quantum cycle, used only for display.
pub const CYCLE_NS: u64 = 20;

/// Renders a cycle count as wall time, e.g. 10000 cycles as `200 µs`.
pub fn format_duration(cycles: u64) -> String {
    let ns = cycles as u128 * CYCLE_NS as u128;
    let (unit, scale) = match ns {
        n if n < 1_000 => return format!("{n} ns"),
        n if n < 1_000_000 => ("µs", 1_000),
        n if n < 1_000_000_000 => ("ms", 1_000_000),
        _ => ("s", 1_000_000_000),
    };
    let whole = ns / scale;
    let frac = ns % scale;
    if frac == 0 {
        return format!("{whole} {unit}");
    }
    let digits = scale.ilog10() as usize;
    let frac = format!("{frac:0digits$}");
    format!("{whole}.{} {unit}", frac.trim_end_matches('0'))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MeasurementRecord {
    pub qubit: u8,
    pub start: u64,
    pub completion: u64,
    pub result: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Warning {
    pub pc: u32,
    pub message: String,
}

impl std::fmt::Display for Warning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "pc {:#06x}: {}", self.pc, self.message)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    Stopped,
    MaxSteps,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub status: RunStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub seed: u64,
    pub shot: u64,
    pub retired: u64,
    pub pc: String,
    pub quantum_clock: u64,
    pub quantum_time: String,
    pub timing_label: u64,
    pub gpr: Vec<String>,
    pub qmrr: Vec<Qmrr>,
    pub execution_flags: Vec<[bool; 4]>,
    pub measurements: Vec<MeasurementRecord>,
    pub warnings: Vec<String>,
    /// Final state vector as `[re, im]` pairs, only in debug mode.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitudes: Option<Vec<[f64; 2]>>,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    /// Human summary followed by the JSON section.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let status = match self.status {
            RunStatus::Stopped => "stopped",
            RunStatus::MaxSteps => "max steps reached",
            RunStatus::Error => "runtime error",
        };
        let _ = writeln!(out, "status: {status}");
        if let Some(e) = &self.error {
            let _ = writeln!(out, "error: {e}");
        }
        let _ = writeln!(out, "seed: {} (shot {})", self.seed, self.shot);
        let _ = writeln!(out, "retired instructions: {}", self.retired);
        let _ = writeln!(out, "pc: {}", self.pc);
        let _ = writeln!(out, "quantum clock: {} cycles ({})", self.quantum_clock, self.quantum_time);
        let _ = writeln!(out, "registers:");
        for row in self.gpr.chunks(4).enumerate() {
            let (i, regs) = row;
            let cells: Vec<String> = regs
                .iter()
                .enumerate()
                .map(|(j, v)| format!("r{:<2} {v}", 4 * i + j))
                .collect();
            let _ = writeln!(out, "  {}", cells.join("  "));
        }
        let qmrr: Vec<String> = self
            .qmrr
            .iter()
            .enumerate()
            .map(|(q, r)| match r.valid {
                true => format!("q{q}={}", r.value),
                false => format!("q{q}=-"),
            })
            .collect();
        let _ = writeln!(out, "qmrr: {}", qmrr.join(" "));
        let _ = writeln!(out, "measurements: {}", self.measurements.len());
        for m in &self.measurements {
            let _ = writeln!(
                out,
                "  q{} issued at {} completed at {} -> {}",
                m.qubit, m.start, m.completion, m.result
            );
        }
        if !self.warnings.is_empty() {
            let _ = writeln!(out, "warnings:");
            for w in &self.warnings {
                let _ = writeln!(out, "  {w}");
            }
        }
        let _ = writeln!(out, "--- json ---");
        out.push_str(&self.to_json());
        out.push('\n');
        out
    }
}
