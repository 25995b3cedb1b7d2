use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{parse_int, strip_comment, ConfigError, ConfigWarning};

/// Largest opcode representable in the 9-bit bundle opcode field.
pub const MAX_OPCODE: u16 = 511;
pub const QNOP_OPCODE: u16 = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OpKind {
    /// No target (`def_q_arg_none`).
    None,
    /// Single-qubit operation on an S register (`def_q_arg_st`).
    Single,
    /// Two-qubit operation on a T register (`def_q_arg_tt`).
    Two,
}

impl OpKind {
    fn keyword(self) -> &'static str {
        match self {
            OpKind::None => "def_q_arg_none",
            OpKind::Single => "def_q_arg_st",
            OpKind::Two => "def_q_arg_tt",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantumOpDef {
    /// Name as spelled in the file; lookups are case-insensitive.
    pub name: String,
    pub kind: OpKind,
    pub opcode: u16,
}

/// Quantum operation names to 9-bit opcodes.
#[derive(Debug, Clone, Default)]
pub struct OpcodeMap {
    by_opcode: BTreeMap<u16, QuantumOpDef>,
    by_name: BTreeMap<String, u16>,
    warnings: Vec<ConfigWarning>,
}

impl PartialEq for OpcodeMap {
    fn eq(&self, other: &Self) -> bool {
        self.by_opcode == other.by_opcode
    }
}

impl OpcodeMap {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut map = OpcodeMap::default();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = strip_comment(raw).trim();
            if line.is_empty() {
                continue;
            }
            let (kind, name, opcode) = parse_entry(line)
                .ok_or_else(|| ConfigError::new(line_no, format!("malformed qmap entry `{line}`")))?;
            map.insert(line_no, kind, name, opcode)?;
        }
        Ok(map)
    }

    fn insert(&mut self, line: usize, kind: OpKind, name: &str, opcode: u64) -> Result<(), ConfigError> {
        if opcode > MAX_OPCODE as u64 {
            return Err(ConfigError::new(
                line,
                format!("opcode {opcode} of `{name}` exceeds the 9-bit limit {MAX_OPCODE}"),
            ));
        }
        let opcode = opcode as u16;
        if !is_identifier(name) {
            return Err(ConfigError::new(line, format!("invalid operation name `{name}`")));
        }
        let key = name.to_ascii_lowercase();
        if self.by_name.contains_key(&key) {
            return Err(ConfigError::new(line, format!("duplicate operation name `{name}`")));
        }
        if let Some(prev) = self.by_opcode.get(&opcode) {
            return Err(ConfigError::new(
                line,
                format!("opcode {opcode:#x} of `{name}` already used by `{}`", prev.name),
            ));
        }
        if key == "qnop" && (opcode != QNOP_OPCODE || kind != OpKind::None) {
            return Err(ConfigError::new(line, "`qnop` must be def_q_arg_none with opcode 0"));
        }
        if opcode == QNOP_OPCODE && key != "qnop" {
            return Err(ConfigError::new(line, format!("opcode 0 is reserved for qnop, not `{name}`")));
        }
        match kind {
            OpKind::Single if opcode > 127 => self.warnings.push(ConfigWarning {
                line,
                message: format!("single-qubit `{name}` uses opcode {opcode:#x} outside the microwave range 1..127"),
            }),
            OpKind::Two if !(128..=255).contains(&opcode) => self.warnings.push(ConfigWarning {
                line,
                message: format!("two-qubit `{name}` uses opcode {opcode:#x} outside the flux range 128..255"),
            }),
            _ => {}
        }
        self.by_name.insert(key, opcode);
        self.by_opcode.insert(
            opcode,
            QuantumOpDef {
                name: name.to_string(),
                kind,
                opcode,
            },
        );
        Ok(())
    }

    pub fn lookup(&self, name: &str) -> Option<&QuantumOpDef> {
        let opcode = self.by_name.get(&name.to_ascii_lowercase())?;
        self.by_opcode.get(opcode)
    }

    pub fn by_opcode(&self, opcode: u16) -> Option<&QuantumOpDef> {
        self.by_opcode.get(&opcode)
    }

    pub fn len(&self) -> usize {
        self.by_opcode.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_opcode.is_empty()
    }

    /// Entries in ascending opcode order.
    pub fn iter(&self) -> impl Iterator<Item = &QuantumOpDef> {
        self.by_opcode.values()
    }

    pub fn warnings(&self) -> &[ConfigWarning] {
        &self.warnings
    }

    /// Canonical text form: one entry per line, grouped by kind, ascending opcode.
    pub fn to_qmap_text(&self) -> String {
        let mut out = String::new();
        for kind in [OpKind::None, OpKind::Single, OpKind::Two] {
            for def in self.iter().filter(|d| d.kind == kind) {
                let _ = writeln!(out, "{}[\"{}\"] = {:#04x}", kind.keyword(), def.name, def.opcode);
            }
        }
        out
    }
}

fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// `def_q_arg_<kind>["name"] = N`, either quote style.
fn parse_entry(line: &str) -> Option<(OpKind, &str, u64)> {
    let (lhs, rhs) = line.split_once('=')?;
    let lhs = lhs.trim();
    let open = lhs.find('[')?;
    let kind = match lhs[..open].trim().to_ascii_lowercase().as_str() {
        "def_q_arg_none" => OpKind::None,
        "def_q_arg_st" => OpKind::Single,
        "def_q_arg_tt" => OpKind::Two,
        _ => return None,
    };
    let inner = lhs[open + 1..].strip_suffix(']')?.trim();
    let quote = inner.chars().next().filter(|c| *c == '"' || *c == '\'')?;
    let name = inner[1..].strip_suffix(quote)?;
    let opcode = parse_int(rhs)?;
    Some((kind, name, opcode))
}
