//! Assembly front end: lexing, parsing, macro expansion, symbol resolution,
//! latency linting and canonical printing.

pub mod ast;
pub mod lexer;
pub mod lint;
pub mod macros;
pub mod parser;
pub mod printer;
pub mod resolve;

use std::fmt;

use crate::config::{OpcodeMap, Topology};

pub use ast::Program;
pub use lint::lint_latency;
pub use macros::expand_macros;
pub use parser::parse_program;
pub use resolve::{resolve, ItemKind, ResolvedItem, ResolvedProgram, ResolvedQOp};

/// 1-based line and column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct SourceLoc {
    pub line: usize,
    pub column: usize,
}

impl SourceLoc {
    pub fn new(line: usize, column: usize) -> Self {
        Self { line, column }
    }
}

impl fmt::Display for SourceLoc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Lex,
    Parse,
    Resolve,
    Encode,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Lex => "lex",
            Stage::Parse => "parse",
            Stage::Resolve => "resolve",
            Stage::Encode => "encode",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{loc}: {stage} error: {message}")]
pub struct AsmError {
    pub stage: Stage,
    pub loc: SourceLoc,
    pub message: String,
}

impl AsmError {
    pub fn new(stage: Stage, loc: SourceLoc, message: impl Into<String>) -> Self {
        Self {
            stage,
            loc,
            message: message.into(),
        }
    }

    /// `file:line:col: error: message`
    pub fn render(&self, file: &str) -> String {
        format!("{file}:{}: error: {}", self.loc, self.message)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Warning,
    Error,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Warning => "warning",
            Severity::Error => "error",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub loc: SourceLoc,
    pub severity: Severity,
    pub message: String,
}

impl Diagnostic {
    pub fn warning(loc: SourceLoc, message: impl Into<String>) -> Self {
        Self {
            loc,
            severity: Severity::Warning,
            message: message.into(),
        }
    }

    /// `file:line:col: severity: message`
    pub fn render(&self, file: &str) -> String {
        format!("{file}:{}: {}: {}", self.loc, self.severity, self.message)
    }
}

/// Lex, parse and expand macros.
pub fn parse_source(source: &str) -> Result<Program, AsmError> {
    let tokens = lexer::tokenize(source)?;
    expand_macros(parse_program(&tokens)?)
}

/// Output of the full assembler pipeline.
#[derive(Debug, Clone)]
pub struct Assembly {
    pub program: ResolvedProgram,
    pub words: Vec<u32>,
}

impl Assembly {
    /// Address, hex word and source line side by side. Lines that emit no
    /// code are shown with blank columns; extra bundle words follow their
    /// source line.
    pub fn listing(&self, source: &str) -> String {
        let mut by_line: Vec<Vec<(u32, u32)>> = Vec::new();
        for item in &self.program.items {
            let first = (item.address / 4) as usize;
            let n = item.word_count();
            let line = item.loc.line;
            if by_line.len() <= line {
                by_line.resize(line + 1, Vec::new());
            }
            for k in 0..n {
                by_line[line].push(((first + k) as u32 * 4, self.words[first + k]));
            }
        }
        let mut out = String::new();
        for (idx, text) in source.lines().enumerate() {
            let words = by_line.get(idx + 1).map(Vec::as_slice).unwrap_or(&[]);
            match words.split_first() {
                None => out.push_str(&format!("{:20}{text}\n", "")),
                Some(((addr, word), rest)) => {
                    out.push_str(&format!("{addr:#06x}  {word:08X}    {text}\n"));
                    for (addr, word) in rest {
                        out.push_str(&format!("{addr:#06x}  {word:08X}\n"));
                    }
                }
            }
        }
        out
    }
}

/// Assembles source text into instruction words.
pub fn assemble(source: &str, qmap: &OpcodeMap, topology: &Topology) -> Result<Assembly, AsmError> {
    let program = parse_source(source)?;
    let resolved = resolve(&program, qmap, topology)?;
    let words = resolved.encode()?;
    Ok(Assembly {
        program: resolved,
        words,
    })
}
