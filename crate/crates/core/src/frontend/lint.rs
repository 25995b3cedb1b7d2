use super::resolve::{ItemKind, ResolvedProgram};
use super::{Diagnostic, SourceLoc};
use crate::codec::{smis_qubits, Instruction, NUM_TARGET_REGS};
use crate::config::{GateSemantics, OpKind, NUM_QUBITS};

/// Independent instructions required between CMP and a flag read.
pub const CMP_GAP: usize = 1;
/// Independent instructions required between a measurement and FMR.
pub const MEASURE_GAP: usize = 2;

/// Straight-line latency check over the resolved program, in address order.
/// Distances are counted in instruction words. A measurement on an S
/// register not yet set by SMIS is assumed to touch every qubit.
pub fn lint_latency(program: &ResolvedProgram, semantics: &GateSemantics) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut last_cmp: Option<(usize, SourceLoc)> = None;
    let mut last_measure: [Option<(usize, SourceLoc)>; NUM_QUBITS as usize] = [None; NUM_QUBITS as usize];
    let mut smis: [Option<u8>; NUM_TARGET_REGS as usize] = [None; NUM_TARGET_REGS as usize];

    for item in &program.items {
        let word = (item.address / 4) as usize;
        match &item.kind {
            ItemKind::Instruction(Instruction::Cmp { .. }) => last_cmp = Some((word, item.loc)),
            ItemKind::Instruction(i @ (Instruction::Br { .. } | Instruction::Fbr { .. })) => {
                if let Some((at, cmp_loc)) = last_cmp {
                    let between = word - at - 1;
                    if between < CMP_GAP {
                        let name = i.mnemonic().expect("single format");
                        out.push(Diagnostic::warning(
                            item.loc,
                            format!(
                                "{name} reads comparison flags {between} instruction(s) after CMP at line {}; {CMP_GAP} required",
                                cmp_loc.line
                            ),
                        ));
                    }
                }
            }
            ItemKind::Instruction(Instruction::Fmr { qubit, .. }) => {
                if let Some((at, m_loc)) = last_measure[*qubit as usize] {
                    let between = word - at - 1;
                    if between < MEASURE_GAP {
                        out.push(Diagnostic::warning(
                            item.loc,
                            format!(
                                "FMR on Q{qubit} {between} instruction(s) after the measurement at line {}; {MEASURE_GAP} required",
                                m_loc.line
                            ),
                        ));
                    }
                }
            }
            ItemKind::Instruction(Instruction::Smis { sd, mask }) => smis[*sd as usize] = Some(*mask),
            ItemKind::Bundle { ops, .. } => {
                for (k, op) in ops.iter().enumerate() {
                    if op.kind != OpKind::Single || !semantics.is_measurement(op.opcode) {
                        continue;
                    }
                    let target = op.target.expect("single-qubit op has a target") as usize;
                    let mask = smis[target].unwrap_or(u8::MAX >> 1);
                    for q in smis_qubits(mask) {
                        last_measure[q as usize] = Some((word + k / 2, item.loc));
                    }
                }
            }
            _ => {}
        }
    }
    out
}
