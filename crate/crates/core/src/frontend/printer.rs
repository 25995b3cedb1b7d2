use std::fmt::Write as _;

use super::ast::{Operand, Program, QuantumOp, QuantumOpName, StatementKind};
use super::lexer::Radix;

pub fn format_int(value: i64, radix: Radix) -> String {
    let sign = if value < 0 { "-" } else { "" };
    let mag = value.unsigned_abs();
    match radix {
        Radix::Decimal => value.to_string(),
        Radix::Hex => format!("{sign}0x{mag:X}"),
        Radix::Binary => format!("{sign}0b{mag:b}"),
    }
}

pub fn format_operand(op: &Operand) -> String {
    match op {
        Operand::Reg { class, index } => format!("{}{index}", class.letter()),
        Operand::Int { value, radix } => format_int(*value, *radix),
        Operand::Ident(name) => name.clone(),
        Operand::QubitList(qs) => {
            let items: Vec<String> = qs.iter().map(format_operand).collect();
            format!("{{{}}}", items.join(", "))
        }
        Operand::PairList(ps) => {
            let items: Vec<String> = ps
                .iter()
                .map(|(s, t)| format!("({}, {})", format_operand(s), format_operand(t)))
                .collect();
            format!("{{{}}}", items.join(", "))
        }
        Operand::Mem { base, offset } => format!("{}({})", format_operand(base), format_operand(offset)),
    }
}

pub fn format_quantum_op(op: &QuantumOp) -> String {
    let name = match &op.name {
        QuantumOpName::Named(n) => n.clone(),
        QuantumOpName::Raw(n) => format!("q#{n}"),
    };
    match &op.target {
        Some(t) => format!("{name} {}", format_operand(t)),
        None => name,
    }
}

pub fn format_statement(kind: &StatementKind) -> String {
    match kind {
        StatementKind::RegisterAlias { class, index, alias } => {
            format!(".register {}{index} {alias}", class.letter())
        }
        StatementKind::ConstAlias { alias, value, radix } => {
            format!(".def_sym {alias} {}", format_int(*value, *radix))
        }
        StatementKind::Word(op) => format!(".word {}", format_operand(op)),
        StatementKind::Label(name) => format!("{name}:"),
        StatementKind::Single { mnemonic, operands } => {
            let ops: Vec<String> = operands.iter().map(format_operand).collect();
            if ops.is_empty() {
                format!("    {mnemonic}")
            } else {
                format!("    {mnemonic:<6} {}", ops.join(", "))
            }
        }
        StatementKind::Bundle { pi, ops } => {
            let body: Vec<String> = ops.iter().map(format_quantum_op).collect();
            match pi {
                Some(pi) => format!("    {}, {}", format_operand(pi), body.join(" | ")),
                None => format!("    {}", body.join(" | ")),
            }
        }
    }
}

/// Canonical text: one statement per line, labels on their own line.
pub fn print_program(program: &Program) -> String {
    let mut out = String::new();
    for stmt in &program.statements {
        let _ = writeln!(out, "{}", format_statement(&stmt.kind));
    }
    out
}
