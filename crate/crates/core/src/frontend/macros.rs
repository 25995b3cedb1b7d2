use super::ast::{Operand, Program, Statement, StatementKind};
use super::lexer::Radix;
use super::{AsmError, Stage};

/// Conditional branch macros: `Bxx Rs, Rt, addr` becomes `CMP Rs, Rt` then
/// `BR <flag>, addr`.
const BRANCHES: [(&str, &str); 10] = [
    ("BEQ", "EQ"),
    ("BNE", "NE"),
    ("BLT", "LT"),
    ("BLE", "LE"),
    ("BGT", "GT"),
    ("BGE", "GE"),
    ("BLTU", "LTU"),
    ("BLEU", "LEU"),
    ("BGTU", "GTU"),
    ("BGEU", "GEU"),
];

/// Every macro name with its operand count.
pub const MACROS: [(&str, usize); 18] = [
    ("GOTO", 1),
    ("BRN", 1),
    ("BEQ", 3),
    ("BNE", 3),
    ("BLT", 3),
    ("BLE", 3),
    ("BGT", 3),
    ("BGE", 3),
    ("BLTU", 3),
    ("BLEU", 3),
    ("BGTU", 3),
    ("BGEU", 3),
    ("MOV", 2),
    ("SHL1", 2),
    ("MULT2", 2),
    ("NAND", 3),
    ("NOR", 3),
    ("XNOR", 3),
];

pub fn macro_arity(name: &str) -> Option<usize> {
    MACROS
        .iter()
        .find(|(m, _)| m.eq_ignore_ascii_case(name))
        .map(|&(_, n)| n)
}

pub fn is_macro(name: &str) -> bool {
    macro_arity(name).is_some()
}

fn single(mnemonic: &str, operands: Vec<Operand>) -> StatementKind {
    StatementKind::Single {
        mnemonic: mnemonic.to_string(),
        operands,
    }
}

fn flag(name: &str) -> Operand {
    Operand::Ident(name.to_string())
}

/// Expansion of one macro invocation; operand count already checked.
pub fn expand(name: &str, ops: &[Operand]) -> Vec<StatementKind> {
    let upper = name.to_ascii_uppercase();
    let o = |i: usize| ops[i].clone();
    if let Some(&(_, f)) = BRANCHES.iter().find(|(m, _)| *m == upper) {
        return vec![single("CMP", vec![o(0), o(1)]), single("BR", vec![flag(f), o(2)])];
    }
    match upper.as_str() {
        "GOTO" => vec![single("BR", vec![flag("ALWAYS"), o(0)])],
        "BRN" => vec![single("BR", vec![flag("NEVER"), o(0)])],
        "MOV" => vec![
            single(
                "LDI",
                vec![
                    o(0),
                    Operand::Int {
                        value: 0,
                        radix: Radix::Decimal,
                    },
                ],
            ),
            single("ADD", vec![o(0), o(1), o(0)]),
        ],
        "SHL1" | "MULT2" => vec![single("ADD", vec![o(0), o(1), o(1)])],
        "NAND" | "NOR" | "XNOR" => {
            let base = match upper.as_str() {
                "NAND" => "AND",
                "NOR" => "OR",
                _ => "XOR",
            };
            vec![single(base, vec![o(0), o(1), o(2)]), single("NOT", vec![o(0), o(0)])]
        }
        _ => unreachable!("not a macro: {name}"),
    }
}

/// Replaces every macro statement by its expansion, in place and in order.
/// Expanded statements keep the location of the macro.
pub fn expand_macros(program: Program) -> Result<Program, AsmError> {
    let mut statements = Vec::with_capacity(program.statements.len());
    for stmt in program.statements {
        let StatementKind::Single { mnemonic, operands } = &stmt.kind else {
            statements.push(stmt);
            continue;
        };
        let Some(arity) = macro_arity(mnemonic) else {
            statements.push(stmt);
            continue;
        };
        if operands.len() != arity {
            return Err(AsmError::new(
                Stage::Parse,
                stmt.loc,
                format!("macro `{mnemonic}` takes {arity} operand(s), found {}", operands.len()),
            ));
        }
        for kind in expand(mnemonic, operands) {
            statements.push(Statement { kind, loc: stmt.loc });
        }
    }
    Ok(Program { statements })
}
