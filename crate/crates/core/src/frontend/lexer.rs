use super::{AsmError, SourceLoc, Stage};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegClass {
    /// General purpose `R0..R31`.
    R,
    /// Single-qubit target `S0..S31`.
    S,
    /// Two-qubit target `T0..T31`.
    T,
    /// Measurement result `Q0..Q6`.
    Q,
}

impl RegClass {
    pub fn letter(self) -> char {
        match self {
            RegClass::R => 'R',
            RegClass::S => 'S',
            RegClass::T => 'T',
            RegClass::Q => 'Q',
        }
    }

    fn from_letter(c: char) -> Option<Self> {
        match c.to_ascii_uppercase() {
            'R' => Some(RegClass::R),
            'S' => Some(RegClass::S),
            'T' => Some(RegClass::T),
            'Q' => Some(RegClass::Q),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Radix {
    Decimal,
    Hex,
    Binary,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Ident(String),
    Register(RegClass, u32),
    Int { value: i64, radix: Radix },
    /// `q#<n>`: a quantum opcode with no name in the opcode map.
    RawOpcode(u32),
    Directive(String),
    Comma,
    Colon,
    Pipe,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Eol,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub loc: SourceLoc,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

fn lex_error(loc: SourceLoc, message: impl Into<String>) -> AsmError {
    AsmError::new(Stage::Lex, loc, message)
}

/// Splits source text into tokens, one `Eol` per line. Comments and blanks
/// are dropped; LF and CR+LF line endings are both accepted.
pub fn tokenize(source: &str) -> Result<Vec<Token>, AsmError> {
    let mut tokens = Vec::new();
    for (idx, raw_line) in source.split('\n').enumerate() {
        let line = raw_line.strip_suffix('\r').unwrap_or(raw_line);
        let line_no = idx + 1;
        lex_line(line, line_no, &mut tokens)?;
        tokens.push(Token {
            kind: TokenKind::Eol,
            text: String::new(),
            loc: SourceLoc::new(line_no, line.chars().count() + 1),
        });
    }
    Ok(tokens)
}

fn lex_line(line: &str, line_no: usize, out: &mut Vec<Token>) -> Result<(), AsmError> {
    let chars: Vec<char> = line.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let loc = SourceLoc::new(line_no, i + 1);
        let start = i;
        let punct = match c {
            ',' => Some(TokenKind::Comma),
            ':' => Some(TokenKind::Colon),
            '|' => Some(TokenKind::Pipe),
            '{' => Some(TokenKind::LBrace),
            '}' => Some(TokenKind::RBrace),
            '(' => Some(TokenKind::LParen),
            ')' => Some(TokenKind::RParen),
            _ => None,
        };
        if let Some(kind) = punct {
            out.push(Token {
                kind,
                text: c.to_string(),
                loc,
            });
            i += 1;
            continue;
        }
        if c == ' ' || c == '\t' {
            i += 1;
            continue;
        }
        if c == '#' {
            break;
        }
        if c == '.' {
            i += 1;
            while i < chars.len() && is_ident_char(chars[i]) {
                i += 1;
            }
            let name: String = chars[start + 1..i].iter().collect();
            if name.is_empty() {
                return Err(lex_error(loc, "expected directive name after `.`"));
            }
            out.push(Token {
                kind: TokenKind::Directive(name.to_ascii_lowercase()),
                text: chars[start..i].iter().collect(),
                loc,
            });
            continue;
        }
        if c.is_ascii_digit() || ((c == '-' || c == '+') && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            i += 1;
            while i < chars.len() && is_ident_char(chars[i]) {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            let kind = parse_number(&text).ok_or_else(|| lex_error(loc, format!("invalid integer literal `{text}`")))?;
            out.push(Token { kind, text, loc });
            continue;
        }
        if is_ident_start(c) {
            i += 1;
            while i < chars.len() && is_ident_char(chars[i]) {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            // q#<n> escapes an opcode that has no name
            if text.eq_ignore_ascii_case("q")
                && chars.get(i) == Some(&'#')
                && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())
            {
                let digits_start = i + 1;
                let mut j = digits_start;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                let digits: String = chars[digits_start..j].iter().collect();
                let value = digits
                    .parse::<u32>()
                    .map_err(|_| lex_error(loc, format!("invalid raw opcode `q#{digits}`")))?;
                out.push(Token {
                    kind: TokenKind::RawOpcode(value),
                    text: chars[start..j].iter().collect(),
                    loc,
                });
                i = j;
                continue;
            }
            let kind = register(&text).unwrap_or_else(|| TokenKind::Ident(text.clone()));
            out.push(Token { kind, text, loc });
            continue;
        }
        return Err(lex_error(loc, format!("illegal character `{c}`")));
    }
    Ok(())
}

fn register(text: &str) -> Option<TokenKind> {
    let mut chars = text.chars();
    let class = RegClass::from_letter(chars.next()?)?;
    let digits = chars.as_str();
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    // Oversized indices still lex as registers and are rejected by the parser.
    let index = digits.parse::<u32>().unwrap_or(u32::MAX);
    Some(TokenKind::Register(class, index))
}

fn parse_number(text: &str) -> Option<TokenKind> {
    let (negative, body) = match text.as_bytes()[0] {
        b'-' => (true, &text[1..]),
        b'+' => (false, &text[1..]),
        _ => (false, text),
    };
    let lower = body.to_ascii_lowercase();
    let (radix, magnitude) = if let Some(hex) = lower.strip_prefix("0x") {
        (Radix::Hex, u64::from_str_radix(hex, 16).ok()?)
    } else if let Some(bin) = lower.strip_prefix("0b") {
        (Radix::Binary, u64::from_str_radix(bin, 2).ok()?)
    } else if lower.bytes().all(|b| b.is_ascii_digit()) {
        (Radix::Decimal, lower.parse::<u64>().ok()?)
    } else {
        return None;
    };
    let value = if negative {
        0i64.checked_sub_unsigned(magnitude)?
    } else {
        i64::try_from(magnitude).ok()?
    };
    Some(TokenKind::Int { value, radix })
}
