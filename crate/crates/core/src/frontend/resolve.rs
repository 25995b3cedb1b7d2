use std::collections::BTreeMap;

use super::ast::{Operand, Program, QuantumOp, QuantumOpName, StatementKind};
use super::lexer::{Radix, RegClass};
use super::macros::is_macro;
use super::parser::{BUNDLE_KEYWORD, QNOP};
use super::{AsmError, SourceLoc, Stage};
use crate::bits::BitString;
use crate::codec::{
    self, compute_smis_mask, compute_smit_mask, pack_bundle, BundleWord, CompFlag, Instruction, Mnemonic,
    QuantumSlot, BRANCH_OFFSET_MAX, BRANCH_OFFSET_MIN, MAX_IMAGE_WORDS, MAX_PI, NUM_GPRS, NUM_TARGET_REGS,
};
use crate::config::{OpKind, OpcodeMap, Topology, MAX_OPCODE, NUM_QUBITS};

/// PI used when a bundle omits it.
pub const DEFAULT_PI: u8 = 1;

const DIRECTIVES: [&str; 3] = ["register", "def_sym", "word"];

/// Names that cannot be used as labels or aliases. Register names never
/// reach this check because the lexer already classifies them.
pub fn is_reserved(name: &str) -> bool {
    Mnemonic::from_name(name).is_some()
        || is_macro(name)
        || CompFlag::from_name(name).is_some()
        || name.eq_ignore_ascii_case(QNOP)
        || name.eq_ignore_ascii_case(BUNDLE_KEYWORD)
        || DIRECTIVES.iter().any(|d| d.eq_ignore_ascii_case(name))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolvedQOp {
    /// Name as written, or `q#<n>` for raw opcodes.
    pub name: String,
    pub opcode: u16,
    pub kind: OpKind,
    pub target: Option<u8>,
}

impl ResolvedQOp {
    pub fn slot(&self) -> QuantumSlot {
        QuantumSlot {
            opcode: self.opcode,
            target: self.target.unwrap_or(0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ItemKind {
    Instruction(Instruction),
    Bundle { pi: u8, ops: Vec<ResolvedQOp> },
    Word(u32),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolvedItem {
    pub loc: SourceLoc,
    /// Byte address of the first word.
    pub address: u32,
    pub kind: ItemKind,
}

impl ResolvedItem {
    pub fn word_count(&self) -> usize {
        match &self.kind {
            ItemKind::Bundle { ops, .. } => codec::bundle_words(ops.len()),
            _ => 1,
        }
    }

    pub fn encode(&self) -> Result<Vec<u32>, AsmError> {
        let enc = |i: &Instruction| codec::encode(i).map_err(|e| AsmError::new(Stage::Encode, self.loc, e.to_string()));
        match &self.kind {
            ItemKind::Instruction(i) => Ok(vec![enc(i)?]),
            ItemKind::Word(w) => Ok(vec![*w]),
            ItemKind::Bundle { pi, ops } => {
                let slots: Vec<QuantumSlot> = ops.iter().map(ResolvedQOp::slot).collect();
                pack_bundle(*pi, &slots)
                    .into_iter()
                    .map(|w: BundleWord| enc(&Instruction::Bundle(w)))
                    .collect()
            }
        }
    }
}

/// Symbol tables; keys are lower-cased.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SymbolTables {
    pub register_aliases: BTreeMap<String, (RegClass, u32)>,
    pub const_aliases: BTreeMap<String, (i64, Radix)>,
    /// Label name to byte address.
    pub labels: BTreeMap<String, u32>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ResolvedProgram {
    pub items: Vec<ResolvedItem>,
    pub symbols: SymbolTables,
}

impl ResolvedProgram {
    pub fn word_count(&self) -> usize {
        self.items.iter().map(ResolvedItem::word_count).sum()
    }

    pub fn encode(&self) -> Result<Vec<u32>, AsmError> {
        let mut words = Vec::with_capacity(self.word_count());
        for item in &self.items {
            words.extend(item.encode()?);
        }
        Ok(words)
    }
}

fn err(loc: SourceLoc, message: impl Into<String>) -> AsmError {
    AsmError::new(Stage::Resolve, loc, message)
}

/// A value that does not fit its instruction field.
fn field_err(loc: SourceLoc, message: impl Into<String>) -> AsmError {
    AsmError::new(Stage::Encode, loc, message)
}

fn statement_words(kind: &StatementKind) -> usize {
    match kind {
        StatementKind::Single { .. } | StatementKind::Word(_) => 1,
        StatementKind::Bundle { ops, .. } => codec::bundle_words(ops.len()),
        _ => 0,
    }
}

/// Substitutes aliases and labels, assigns addresses and checks every
/// operand against its field. Macros must already be expanded.
pub fn resolve(program: &Program, qmap: &OpcodeMap, topology: &Topology) -> Result<ResolvedProgram, AsmError> {
    let symbols = collect_symbols(program, qmap)?;
    let ctx = Ctx {
        symbols: &symbols,
        qmap,
        topology,
    };
    let mut items = Vec::new();
    let mut address = 0u32;
    for stmt in &program.statements {
        let kind = match &stmt.kind {
            StatementKind::Single { mnemonic, operands } => {
                let m = Mnemonic::from_name(mnemonic)
                    .ok_or_else(|| err(stmt.loc, format!("unexpanded macro `{mnemonic}`")))?;
                ItemKind::Instruction(ctx.instruction(m, operands, address, stmt.loc)?)
            }
            StatementKind::Bundle { pi, ops } => ctx.bundle(pi.as_ref(), ops, stmt.loc)?,
            StatementKind::Word(op) => ItemKind::Word(ctx.word(op, stmt.loc)?),
            _ => continue,
        };
        let item = ResolvedItem {
            loc: stmt.loc,
            address,
            kind,
        };
        address += 4 * item.word_count() as u32;
        items.push(item);
    }
    Ok(ResolvedProgram { items, symbols })
}

fn collect_symbols(program: &Program, qmap: &OpcodeMap) -> Result<SymbolTables, AsmError> {
    let mut symbols = SymbolTables::default();
    let mut defined: BTreeMap<String, SourceLoc> = BTreeMap::new();
    let mut words = 0usize;
    for stmt in &program.statements {
        let name = match &stmt.kind {
            StatementKind::RegisterAlias { alias, .. } | StatementKind::ConstAlias { alias, .. } => alias,
            StatementKind::Label(name) => name,
            kind => {
                words += statement_words(kind);
                if words > MAX_IMAGE_WORDS {
                    return Err(err(
                        stmt.loc,
                        format!("program exceeds the {MAX_IMAGE_WORDS}-word instruction memory"),
                    ));
                }
                continue;
            }
        };
        let key = name.to_ascii_lowercase();
        if is_reserved(name) {
            return Err(err(stmt.loc, format!("`{name}` is a reserved word")));
        }
        if qmap.lookup(name).is_some() {
            return Err(err(stmt.loc, format!("`{name}` is a quantum operation name")));
        }
        if let Some(prev) = defined.get(&key) {
            return Err(err(stmt.loc, format!("`{name}` already defined at {prev}")));
        }
        defined.insert(key.clone(), stmt.loc);
        match &stmt.kind {
            StatementKind::RegisterAlias { class, index, .. } => {
                check_reg_index(*class, *index as u64, stmt.loc)?;
                symbols.register_aliases.insert(key, (*class, *index));
            }
            StatementKind::ConstAlias { value, radix, .. } => {
                symbols.const_aliases.insert(key, (*value, *radix));
            }
            _ => {
                symbols.labels.insert(key, 4 * words as u32);
            }
        }
    }
    Ok(symbols)
}

fn reg_limit(class: RegClass) -> u64 {
    match class {
        RegClass::R => NUM_GPRS as u64,
        RegClass::S | RegClass::T => NUM_TARGET_REGS as u64,
        RegClass::Q => NUM_QUBITS as u64,
    }
}

fn check_reg_index(class: RegClass, index: u64, loc: SourceLoc) -> Result<u8, AsmError> {
    if index >= reg_limit(class) {
        return Err(err(
            loc,
            format!("register {}{index} outside {}0..{}{}", class.letter(), class.letter(), class.letter(), reg_limit(class) - 1),
        ));
    }
    Ok(index as u8)
}

fn describe(op: &Operand) -> String {
    match op {
        Operand::Reg { class, index } => format!("{}{index}", class.letter()),
        Operand::Int { value, .. } => value.to_string(),
        Operand::Ident(name) => name.clone(),
        Operand::QubitList(_) | Operand::PairList(_) => "qubit list".into(),
        Operand::Mem { .. } => "memory operand".into(),
    }
}

struct Ctx<'a> {
    symbols: &'a SymbolTables,
    qmap: &'a OpcodeMap,
    topology: &'a Topology,
}

impl Ctx<'_> {
    fn register_of(&self, op: &Operand) -> Option<(RegClass, u32)> {
        match op {
            Operand::Reg { class, index } => Some((*class, *index)),
            Operand::Ident(name) => self.symbols.register_aliases.get(&name.to_ascii_lowercase()).copied(),
            _ => None,
        }
    }

    fn reg(&self, op: &Operand, want: RegClass, loc: SourceLoc) -> Result<u8, AsmError> {
        match self.register_of(op) {
            Some((class, index)) if class == want => check_reg_index(class, index as u64, loc),
            Some((class, index)) => Err(err(
                loc,
                format!("expected {} register, found {}{index}", want.letter(), class.letter()),
            )),
            None => match op {
                Operand::Ident(name) => Err(err(loc, format!("unknown register alias `{name}`"))),
                other => Err(err(
                    loc,
                    format!("expected {} register, found {}", want.letter(), describe(other)),
                )),
            },
        }
    }

    fn imm(&self, op: &Operand, loc: SourceLoc) -> Result<(i64, Radix), AsmError> {
        match op {
            Operand::Int { value, radix } => Ok((*value, *radix)),
            Operand::Ident(name) => self
                .symbols
                .const_aliases
                .get(&name.to_ascii_lowercase())
                .copied()
                .ok_or_else(|| err(loc, format!("unknown constant `{name}`"))),
            other => Err(err(loc, format!("expected immediate, found {}", describe(other)))),
        }
    }

    /// Plain decimals use the signed range; radix literals are bit patterns.
    fn signed(&self, op: &Operand, width: u32, what: &str, loc: SourceLoc) -> Result<i64, AsmError> {
        let (value, radix) = self.imm(op, loc)?;
        let range_err = || field_err(loc, format!("{what} {value} does not fit a signed {width}-bit field"));
        if radix == Radix::Decimal || value < 0 {
            BitString::from_sint(value, width).map_err(|_| range_err())?;
            Ok(value)
        } else {
            let bits = BitString::from_uint(value as u64, width)
                .map_err(|_| field_err(loc, format!("{what} {value:#x} does not fit {width} bits")))?;
            Ok(bits.sint_value(width).expect("width"))
        }
    }

    fn unsigned(&self, op: &Operand, width: u32, what: &str, loc: SourceLoc) -> Result<u64, AsmError> {
        let (value, _) = self.imm(op, loc)?;
        if value < 0 || BitString::from_uint(value as u64, width).is_err() {
            return Err(field_err(loc, format!("{what} {value} outside 0..{}", (1u64 << width) - 1)));
        }
        Ok(value as u64)
    }

    fn flag(&self, op: &Operand, loc: SourceLoc) -> Result<CompFlag, AsmError> {
        match op {
            Operand::Ident(name) => {
                CompFlag::from_name(name).ok_or_else(|| err(loc, format!("unknown comparison flag `{name}`")))
            }
            other => Err(err(loc, format!("expected comparison flag, found {}", describe(other)))),
        }
    }

    fn branch_offset(&self, op: &Operand, address: u32, loc: SourceLoc) -> Result<i32, AsmError> {
        let offset = match op {
            Operand::Ident(name) if self.symbols.labels.contains_key(&name.to_ascii_lowercase()) => {
                let target = self.symbols.labels[&name.to_ascii_lowercase()];
                (target as i64 - address as i64) / 4
            }
            Operand::Ident(name) if !self.symbols.const_aliases.contains_key(&name.to_ascii_lowercase()) => {
                return Err(err(loc, format!("unknown label `{name}`")));
            }
            other => self.imm(other, loc)?.0,
        };
        if !(BRANCH_OFFSET_MIN as i64..=BRANCH_OFFSET_MAX as i64).contains(&offset) {
            return Err(field_err(
                loc,
                format!("branch offset {offset} words outside {BRANCH_OFFSET_MIN}..{BRANCH_OFFSET_MAX}"),
            ));
        }
        Ok(offset as i32)
    }

    fn mem(&self, op: &Operand, loc: SourceLoc) -> Result<(u8, i16), AsmError> {
        let Operand::Mem { base, offset } = op else {
            return Err(err(loc, format!("expected Rt(Imm), found {}", describe(op))));
        };
        let rt = self.reg(base, RegClass::R, loc)?;
        let offset = self.signed(offset, 10, "memory offset", loc)? as i16;
        Ok((rt, offset))
    }

    fn qubit(&self, op: &Operand, loc: SourceLoc) -> Result<i64, AsmError> {
        Ok(self.imm(op, loc)?.0)
    }

    fn instruction(&self, m: Mnemonic, ops: &[Operand], address: u32, loc: SourceLoc) -> Result<Instruction, AsmError> {
        let r = |i: usize| self.reg(&ops[i], RegClass::R, loc);
        Ok(match m {
            Mnemonic::Nop => Instruction::Nop,
            Mnemonic::Stop => Instruction::Stop,
            Mnemonic::Add => Instruction::Add { rd: r(0)?, rs: r(1)?, rt: r(2)? },
            Mnemonic::Sub => Instruction::Sub { rd: r(0)?, rs: r(1)?, rt: r(2)? },
            Mnemonic::And => Instruction::And { rd: r(0)?, rs: r(1)?, rt: r(2)? },
            Mnemonic::Or => Instruction::Or { rd: r(0)?, rs: r(1)?, rt: r(2)? },
            Mnemonic::Xor => Instruction::Xor { rd: r(0)?, rs: r(1)?, rt: r(2)? },
            Mnemonic::Not => Instruction::Not { rd: r(0)?, rt: r(1)? },
            Mnemonic::Cmp => Instruction::Cmp { rs: r(0)?, rt: r(1)? },
            Mnemonic::Br => Instruction::Br {
                flag: self.flag(&ops[0], loc)?,
                offset: self.branch_offset(&ops[1], address, loc)?,
            },
            Mnemonic::Fbr => Instruction::Fbr {
                flag: self.flag(&ops[0], loc)?,
                rd: r(1)?,
            },
            Mnemonic::Fmr => Instruction::Fmr {
                rd: r(0)?,
                qubit: self.reg(&ops[1], RegClass::Q, loc)?,
            },
            Mnemonic::Ld => {
                let (rt, offset) = self.mem(&ops[1], loc)?;
                Instruction::Ld { rd: r(0)?, rt, offset }
            }
            Mnemonic::St => {
                let (rt, offset) = self.mem(&ops[1], loc)?;
                Instruction::St { rs: r(0)?, rt, offset }
            }
            Mnemonic::Ldi => Instruction::Ldi {
                rd: r(0)?,
                imm: self.signed(&ops[1], 20, "immediate", loc)? as i32,
            },
            Mnemonic::Ldui => {
                // both `Rd, Rs, Imm` and `Rd, Imm, Rs` are accepted
                let (rs_op, imm_op) = if self.register_of(&ops[1]).is_some() {
                    (&ops[1], &ops[2])
                } else {
                    (&ops[2], &ops[1])
                };
                Instruction::Ldui {
                    rd: r(0)?,
                    rs: self.reg(rs_op, RegClass::R, loc)?,
                    imm: self.unsigned(imm_op, 15, "immediate", loc)? as u16,
                }
            }
            Mnemonic::Qwait => Instruction::Qwait {
                cycles: self.unsigned(&ops[0], 20, "wait", loc)? as u32,
            },
            Mnemonic::Qwaitr => Instruction::Qwaitr { rs: r(0)? },
            Mnemonic::Smis => {
                let sd = self.reg(&ops[0], RegClass::S, loc)?;
                let Operand::QubitList(list) = &ops[1] else {
                    return Err(err(loc, format!("expected qubit list, found {}", describe(&ops[1]))));
                };
                let qubits = list.iter().map(|q| self.qubit(q, loc)).collect::<Result<Vec<_>, _>>()?;
                let mask = compute_smis_mask(&qubits).map_err(|e| err(loc, e.to_string()))?;
                Instruction::Smis { sd, mask }
            }
            Mnemonic::Smit => {
                let td = self.reg(&ops[0], RegClass::T, loc)?;
                let Operand::PairList(list) = &ops[1] else {
                    return Err(err(loc, format!("expected qubit pair list, found {}", describe(&ops[1]))));
                };
                let pairs = list
                    .iter()
                    .map(|(s, t)| Ok((self.qubit(s, loc)?, self.qubit(t, loc)?)))
                    .collect::<Result<Vec<_>, AsmError>>()?;
                let mask = compute_smit_mask(&pairs, self.topology).map_err(|e| err(loc, e.to_string()))?;
                Instruction::Smit { td, mask }
            }
        })
    }

    fn word(&self, op: &Operand, loc: SourceLoc) -> Result<u32, AsmError> {
        let (value, _) = self.imm(op, loc)?;
        if !(-(1i64 << 31)..1i64 << 32).contains(&value) {
            return Err(err(loc, format!("word value {value} does not fit 32 bits")));
        }
        Ok(value as u32)
    }

    fn bundle(&self, pi: Option<&Operand>, ops: &[QuantumOp], loc: SourceLoc) -> Result<ItemKind, AsmError> {
        let pi = match pi {
            None => DEFAULT_PI,
            Some(op) => self.unsigned(op, 3, "bundle PI", loc)? as u8,
        };
        debug_assert!(pi <= MAX_PI);
        let ops = ops.iter().map(|op| self.quantum_op(op)).collect::<Result<Vec<_>, _>>()?;
        Ok(ItemKind::Bundle { pi, ops })
    }

    fn target(&self, op: &QuantumOp, want: Option<RegClass>, name: &str) -> Result<Option<u8>, AsmError> {
        match (want, &op.target) {
            (None, None) => Ok(None),
            (None, Some(_)) => Err(err(op.loc, format!("`{name}` takes no target register"))),
            (Some(class), None) => Err(err(
                op.loc,
                format!("`{name}` needs a target {} register", class.letter()),
            )),
            (Some(class), Some(t)) => match self.register_of(t) {
                Some((c, _)) if c != class => Err(err(
                    op.loc,
                    format!(
                        "`{name}` is a {} operation and takes an {} register, found {}",
                        if class == RegClass::S { "single-qubit" } else { "two-qubit" },
                        class.letter(),
                        describe(t)
                    ),
                )),
                _ => self.reg(t, class, op.loc).map(Some),
            },
        }
    }

    fn quantum_op(&self, op: &QuantumOp) -> Result<ResolvedQOp, AsmError> {
        match &op.name {
            QuantumOpName::Raw(n) => {
                if *n > MAX_OPCODE as u32 {
                    return Err(err(op.loc, format!("raw opcode {n} exceeds {MAX_OPCODE}")));
                }
                let (kind, target) = match op.target.as_ref().and_then(|t| self.register_of(t)) {
                    None if op.target.is_none() => (OpKind::None, None),
                    Some((RegClass::T, _)) => (OpKind::Two, self.target(op, Some(RegClass::T), "q#")?),
                    _ => (OpKind::Single, self.target(op, Some(RegClass::S), "q#")?),
                };
                Ok(ResolvedQOp {
                    name: format!("q#{n}"),
                    opcode: *n as u16,
                    kind,
                    target,
                })
            }
            QuantumOpName::Named(name) => {
                let (opcode, kind) = match self.qmap.lookup(name) {
                    Some(def) => (def.opcode, def.kind),
                    None if name.eq_ignore_ascii_case(QNOP) => (0, OpKind::None),
                    None => return Err(err(op.loc, format!("unknown quantum operation `{name}`"))),
                };
                let want = match kind {
                    OpKind::None => None,
                    OpKind::Single => Some(RegClass::S),
                    OpKind::Two => Some(RegClass::T),
                };
                Ok(ResolvedQOp {
                    name: name.clone(),
                    opcode,
                    kind,
                    target: self.target(op, want, name)?,
                })
            }
        }
    }
}
