//! Runtime configuration: quantum opcode map, gate semantics and qubit-pair
//! topology. All three are line-oriented text with `#` comments and are
//! immutable once loaded.

mod gates;
mod qmap;
mod topology;

pub use gates::{Builtin, GateDef, GateRole, GateSemantics, Unitary};
pub use qmap::{OpKind, OpcodeMap, QuantumOpDef, MAX_OPCODE, QNOP_OPCODE};
pub use topology::{Topology, NUM_PAIRS, NUM_QUBITS};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl ConfigError {
    pub(crate) fn new(line: usize, message: impl Into<String>) -> Self {
        Self {
            line,
            message: message.into(),
        }
    }
}

/// A non-fatal finding while loading a configuration file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigWarning {
    pub line: usize,
    pub message: String,
}

/// Parses a plain decimal, `0x` hexadecimal or `0b` binary integer.
pub fn parse_int(text: &str) -> Option<u64> {
    let t = text.trim();
    let lower = t.to_ascii_lowercase();
    if let Some(hex) = lower.strip_prefix("0x") {
        u64::from_str_radix(hex, 16).ok()
    } else if let Some(bin) = lower.strip_prefix("0b") {
        u64::from_str_radix(bin, 2).ok()
    } else if !t.is_empty() && t.bytes().all(|b| b.is_ascii_digit()) {
        t.parse().ok()
    } else {
        None
    }
}

pub(crate) fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

/// Files shipped with the toolchain, usable when no explicit file is given.
pub mod defaults {
    /// Appendix listing of the CC-Light opcode map, verbatim.
    pub const APPENDIX_QMAP: &str = include_str!("../../data/qisa_opcodes.qmap");
    /// The appendix listing plus readable gate names used by the sample programs.
    pub const QMAP: &str = include_str!("../../data/default.qmap");
    pub const GATES: &str = include_str!("../../data/default.gates");
    pub const TOPOLOGY: &str = include_str!("../../data/default.topology");
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_radixes() {
        assert_eq!(parse_int("23"), Some(23));
        assert_eq!(parse_int("0x17"), Some(23));
        assert_eq!(parse_int("0X17"), Some(23));
        assert_eq!(parse_int("0b10111"), Some(23));
        assert_eq!(parse_int("0x"), None);
        assert_eq!(parse_int("-1"), None);
        assert_eq!(parse_int("12a"), None);
    }
}
