use super::lexer::{Radix, RegClass};
use super::SourceLoc;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Operand {
    Reg { class: RegClass, index: u32 },
    Int { value: i64, radix: Radix },
    /// Alias, label or comparison-flag name; resolved later.
    Ident(String),
    /// `{q, q, ...}`; entries are `Int` or `Ident`.
    QubitList(Vec<Operand>),
    /// `{(s, t), ...}`.
    PairList(Vec<(Operand, Operand)>),
    /// `Rt(Imm)` addressing.
    Mem { base: Box<Operand>, offset: Box<Operand> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QuantumOpName {
    Named(String),
    Raw(u32),
}

#[derive(Debug, Clone)]
pub struct QuantumOp {
    pub name: QuantumOpName,
    /// `None` only for QNOP-like operations.
    pub target: Option<Operand>,
    pub loc: SourceLoc,
}

/// Structural equality; the location is ignored.
impl PartialEq for QuantumOp {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.target == other.target
    }
}

impl Eq for QuantumOp {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StatementKind {
    /// `.register <reg> <alias>`
    RegisterAlias { class: RegClass, index: u32, alias: String },
    /// `.def_sym <alias> <imm>`
    ConstAlias { alias: String, value: i64, radix: Radix },
    /// `.word <imm>`: a raw instruction word.
    Word(Operand),
    Label(String),
    /// A single-format instruction or an unexpanded macro.
    Single { mnemonic: String, operands: Vec<Operand> },
    Bundle { pi: Option<Operand>, ops: Vec<QuantumOp> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Statement {
    pub kind: StatementKind,
    pub loc: SourceLoc,
}

/// Parsed, unresolved assembly.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Program {
    pub statements: Vec<Statement>,
}

impl Program {
    /// Statement kinds without locations, for structural comparison.
    pub fn kinds(&self) -> Vec<&StatementKind> {
        self.statements.iter().map(|s| &s.kind).collect()
    }
}
