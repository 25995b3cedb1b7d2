use super::ast::{Operand, Program, QuantumOp, QuantumOpName, Statement, StatementKind};
use super::lexer::{Token, TokenKind};
use super::macros::{is_macro, macro_arity};
use super::{AsmError, SourceLoc, Stage};
use crate::codec::{Mnemonic, MAX_PI};

/// Legacy bundle prefix: `bs <pi> <ops>`.
pub const BUNDLE_KEYWORD: &str = "bs";
pub const QNOP: &str = "qnop";

fn parse_error(loc: SourceLoc, message: impl Into<String>) -> AsmError {
    AsmError::new(Stage::Parse, loc, message)
}

/// Whether `name` starts a single-format statement (instruction or macro).
pub fn is_single_mnemonic(name: &str) -> bool {
    Mnemonic::from_name(name).is_some() || is_macro(name)
}

/// Operand count of an instruction or macro mnemonic.
pub fn operand_count(name: &str) -> usize {
    if let Some(arity) = macro_arity(name) {
        return arity;
    }
    match Mnemonic::from_name(name) {
        Some(Mnemonic::Nop | Mnemonic::Stop) => 0,
        Some(Mnemonic::Qwait | Mnemonic::Qwaitr) => 1,
        Some(Mnemonic::Add | Mnemonic::Sub | Mnemonic::And | Mnemonic::Or | Mnemonic::Xor | Mnemonic::Ldui) => 3,
        Some(_) => 2,
        None => 0,
    }
}

pub fn parse_program(tokens: &[Token]) -> Result<Program, AsmError> {
    let mut statements = Vec::new();
    let mut seen_labels: Vec<String> = Vec::new();
    for line in tokens.split_inclusive(|t| t.kind == TokenKind::Eol) {
        let eol = line.last().expect("split_inclusive yields non-empty lines");
        let body = &line[..line.len() - 1];
        let mut cursor = Cursor {
            tokens: body,
            pos: 0,
            eol_loc: eol.loc,
        };
        parse_line(&mut cursor, &mut statements, &mut seen_labels)?;
    }
    Ok(Program { statements })
}

struct Cursor<'a> {
    tokens: &'a [Token],
    pos: usize,
    eol_loc: SourceLoc,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.tokens.get(self.pos)
    }

    fn peek_kind(&self, offset: usize) -> Option<&'a TokenKind> {
        self.tokens.get(self.pos + offset).map(|t| &t.kind)
    }

    fn next(&mut self) -> Option<&'a Token> {
        let t = self.tokens.get(self.pos);
        self.pos += 1;
        t
    }

    fn at_end(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    fn loc(&self) -> SourceLoc {
        self.peek().map(|t| t.loc).unwrap_or(self.eol_loc)
    }

    fn expect(&mut self, kind: &TokenKind, what: &str) -> Result<&'a Token, AsmError> {
        match self.peek() {
            Some(t) if &t.kind == kind => {
                self.pos += 1;
                Ok(t)
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn unexpected(&self, what: &str) -> AsmError {
        match self.peek() {
            Some(t) => parse_error(t.loc, format!("expected {what}, found `{}`", t.text)),
            None => parse_error(self.eol_loc, format!("expected {what}, found end of line")),
        }
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.peek_kind(0) == Some(kind) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_end(&self) -> Result<(), AsmError> {
        match self.peek() {
            None => Ok(()),
            Some(t) => Err(parse_error(
                t.loc,
                format!("unexpected `{}`: only one statement per line", t.text),
            )),
        }
    }
}

fn parse_line(
    cur: &mut Cursor<'_>,
    out: &mut Vec<Statement>,
    seen_labels: &mut Vec<String>,
) -> Result<(), AsmError> {
    let Some(first) = cur.peek() else {
        return Ok(());
    };
    if let TokenKind::Directive(name) = &first.kind {
        cur.next();
        let kind = parse_directive(cur, name, first.loc)?;
        cur.expect_end()?;
        out.push(Statement { kind, loc: first.loc });
        return Ok(());
    }
    if let (TokenKind::Ident(name), Some(TokenKind::Colon)) = (&first.kind, cur.peek_kind(1)) {
        cur.pos += 2;
        let key = name.to_ascii_lowercase();
        if seen_labels.contains(&key) {
            return Err(parse_error(first.loc, format!("duplicate label `{name}`")));
        }
        seen_labels.push(key);
        out.push(Statement {
            kind: StatementKind::Label(name.clone()),
            loc: first.loc,
        });
        match cur.peek() {
            None => return Ok(()),
            Some(t) if matches!(t.kind, TokenKind::Directive(_)) => {
                return Err(parse_error(t.loc, "a label cannot share a line with a directive"));
            }
            Some(t) if matches!(t.kind, TokenKind::Ident(_)) && cur.peek_kind(1) == Some(&TokenKind::Colon) => {
                return Err(parse_error(t.loc, "only one label per line"));
            }
            Some(_) => {}
        }
    }
    let stmt = parse_machine_op(cur)?;
    cur.expect_end()?;
    out.push(stmt);
    Ok(())
}

fn parse_directive(cur: &mut Cursor<'_>, name: &str, loc: SourceLoc) -> Result<StatementKind, AsmError> {
    match name {
        "register" => {
            let reg = cur.next().ok_or_else(|| cur.unexpected("register name"))?;
            let TokenKind::Register(class, index) = reg.kind else {
                return Err(parse_error(reg.loc, format!("expected register name, found `{}`", reg.text)));
            };
            cur.eat(&TokenKind::Comma);
            let alias = expect_ident(cur, "alias name")?;
            Ok(StatementKind::RegisterAlias { class, index, alias })
        }
        "def_sym" => {
            let alias = expect_ident(cur, "alias name")?;
            cur.eat(&TokenKind::Comma);
            let tok = cur.next().ok_or_else(|| cur.unexpected("immediate value"))?;
            let TokenKind::Int { value, radix } = tok.kind else {
                return Err(parse_error(tok.loc, format!("expected immediate value, found `{}`", tok.text)));
            };
            Ok(StatementKind::ConstAlias { alias, value, radix })
        }
        "word" => Ok(StatementKind::Word(parse_operand(cur)?)),
        other => Err(parse_error(loc, format!("unknown directive `.{other}`"))),
    }
}

fn expect_ident(cur: &mut Cursor<'_>, what: &str) -> Result<String, AsmError> {
    match cur.peek() {
        Some(Token {
            kind: TokenKind::Ident(name),
            ..
        }) => {
            cur.pos += 1;
            Ok(name.clone())
        }
        _ => Err(cur.unexpected(what)),
    }
}

fn parse_machine_op(cur: &mut Cursor<'_>) -> Result<Statement, AsmError> {
    let first = cur.peek().expect("caller checked for a token");
    let loc = first.loc;
    match &first.kind {
        TokenKind::Int { .. } => {
            let pi = parse_operand(cur)?;
            check_pi(&pi, loc)?;
            cur.expect(&TokenKind::Comma, "`,` after the bundle PI")?;
            let ops = parse_bundle_ops(cur)?;
            Ok(Statement {
                kind: StatementKind::Bundle { pi: Some(pi), ops },
                loc,
            })
        }
        TokenKind::Ident(name) if name.eq_ignore_ascii_case(BUNDLE_KEYWORD) => {
            cur.next();
            let pi_loc = cur.loc();
            let pi = parse_operand(cur)?;
            check_pi(&pi, pi_loc)?;
            cur.eat(&TokenKind::Comma);
            let ops = parse_bundle_ops(cur)?;
            Ok(Statement {
                kind: StatementKind::Bundle { pi: Some(pi), ops },
                loc,
            })
        }
        TokenKind::Ident(name) if is_single_mnemonic(name) => {
            cur.next();
            let mut operands = Vec::new();
            let mut locs = Vec::new();
            if !cur.at_end() {
                locs.push(cur.loc());
                operands.push(parse_operand(cur)?);
                while cur.eat(&TokenKind::Comma) {
                    locs.push(cur.loc());
                    operands.push(parse_operand(cur)?);
                }
            }
            let arity = operand_count(name);
            if operands.len() > arity {
                return Err(parse_error(
                    locs[arity],
                    format!("`{name}` takes {arity} operand(s), found {}", operands.len()),
                ));
            }
            if operands.len() < arity {
                return Err(parse_error(
                    cur.loc(),
                    format!("`{name}` takes {arity} operand(s), found {}", operands.len()),
                ));
            }
            Ok(Statement {
                kind: StatementKind::Single {
                    mnemonic: name.to_ascii_uppercase(),
                    operands,
                },
                loc,
            })
        }
        TokenKind::Ident(name) if cur.peek_kind(1) == Some(&TokenKind::Comma) => {
            // PI given by a constant alias
            cur.pos += 2;
            let ops = parse_bundle_ops(cur)?;
            Ok(Statement {
                kind: StatementKind::Bundle {
                    pi: Some(Operand::Ident(name.clone())),
                    ops,
                },
                loc,
            })
        }
        TokenKind::Ident(_) | TokenKind::RawOpcode(_) => {
            let ops = parse_bundle_ops(cur)?;
            Ok(Statement {
                kind: StatementKind::Bundle { pi: None, ops },
                loc,
            })
        }
        _ => Err(cur.unexpected("instruction, bundle or label")),
    }
}

fn check_pi(pi: &Operand, loc: SourceLoc) -> Result<(), AsmError> {
    match pi {
        Operand::Int { value, .. } if !(0..=MAX_PI as i64).contains(value) => {
            Err(parse_error(loc, format!("bundle PI {value} outside 0..7")))
        }
        Operand::Int { .. } | Operand::Ident(_) => Ok(()),
        _ => Err(parse_error(loc, "bundle PI must be an immediate")),
    }
}

fn parse_bundle_ops(cur: &mut Cursor<'_>) -> Result<Vec<QuantumOp>, AsmError> {
    let mut ops = vec![parse_quantum_op(cur)?];
    while cur.eat(&TokenKind::Pipe) {
        ops.push(parse_quantum_op(cur)?);
    }
    Ok(ops)
}

fn parse_quantum_op(cur: &mut Cursor<'_>) -> Result<QuantumOp, AsmError> {
    let tok = cur.next().ok_or_else(|| cur.unexpected("quantum operation"))?;
    let name = match &tok.kind {
        TokenKind::Ident(name) if name.eq_ignore_ascii_case(QNOP) => QuantumOpName::Named(QNOP.to_string()),
        TokenKind::Ident(name) => QuantumOpName::Named(name.clone()),
        TokenKind::RawOpcode(n) => QuantumOpName::Raw(*n),
        _ => {
            return Err(parse_error(
                tok.loc,
                format!("expected quantum operation, found `{}`", tok.text),
            ))
        }
    };
    let target = match cur.peek_kind(0) {
        None | Some(TokenKind::Pipe) => None,
        Some(TokenKind::Register(..)) | Some(TokenKind::Ident(_)) => Some(parse_operand(cur)?),
        Some(_) => return Err(cur.unexpected("target register")),
    };
    Ok(QuantumOp {
        name,
        target,
        loc: tok.loc,
    })
}

fn parse_operand(cur: &mut Cursor<'_>) -> Result<Operand, AsmError> {
    let tok = cur.next().ok_or_else(|| cur.unexpected("operand"))?;
    let base = match &tok.kind {
        TokenKind::Register(class, index) => Operand::Reg {
            class: *class,
            index: *index,
        },
        TokenKind::Int { value, radix } => Operand::Int {
            value: *value,
            radix: *radix,
        },
        TokenKind::Ident(name) => Operand::Ident(name.clone()),
        TokenKind::LBrace => return parse_list(cur),
        _ => return Err(parse_error(tok.loc, format!("expected operand, found `{}`", tok.text))),
    };
    if matches!(base, Operand::Reg { .. } | Operand::Ident(_)) && cur.eat(&TokenKind::LParen) {
        let offset = parse_operand(cur)?;
        if !matches!(offset, Operand::Int { .. } | Operand::Ident(_)) {
            return Err(parse_error(tok.loc, "memory offset must be an immediate"));
        }
        cur.expect(&TokenKind::RParen, "`)`")?;
        return Ok(Operand::Mem {
            base: Box::new(base),
            offset: Box::new(offset),
        });
    }
    Ok(base)
}

fn list_entry(cur: &mut Cursor<'_>) -> Result<Operand, AsmError> {
    let tok = cur.next().ok_or_else(|| cur.unexpected("qubit address"))?;
    match &tok.kind {
        TokenKind::Int { value, radix } => Ok(Operand::Int {
            value: *value,
            radix: *radix,
        }),
        TokenKind::Ident(name) => Ok(Operand::Ident(name.clone())),
        _ => Err(parse_error(tok.loc, format!("expected qubit address, found `{}`", tok.text))),
    }
}

fn parse_list(cur: &mut Cursor<'_>) -> Result<Operand, AsmError> {
    if cur.peek_kind(0) == Some(&TokenKind::LParen) {
        let mut pairs = Vec::new();
        loop {
            cur.expect(&TokenKind::LParen, "`(`")?;
            let source = list_entry(cur)?;
            cur.expect(&TokenKind::Comma, "`,`")?;
            let target = list_entry(cur)?;
            cur.expect(&TokenKind::RParen, "`)`")?;
            pairs.push((source, target));
            if !cur.eat(&TokenKind::Comma) {
                break;
            }
        }
        cur.expect(&TokenKind::RBrace, "`}`")?;
        return Ok(Operand::PairList(pairs));
    }
    let mut qubits = Vec::new();
    if cur.peek_kind(0) != Some(&TokenKind::RBrace) {
        loop {
            qubits.push(list_entry(cur)?);
            if !cur.eat(&TokenKind::Comma) {
                break;
            }
        }
    }
    cur.expect(&TokenKind::RBrace, "`}`")?;
    Ok(Operand::QubitList(qubits))
}

/// Convenience for tests and callers that start from text.
pub fn parse_source(source: &str) -> Result<Program, AsmError> {
    parse_program(&super::lexer::tokenize(source)?)
}
