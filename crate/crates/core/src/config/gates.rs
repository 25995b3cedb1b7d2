use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use super::{strip_comment, ConfigError, OpKind, OpcodeMap};

const UNITARY_TOLERANCE: f64 = 1e-9;

/// Named unitaries available in gate-semantics files.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    I,
    X,
    Y,
    Z,
    H,
    X90,
    Y90,
    MX90,
    MY90,
    T,
    S,
    Cz,
    Cnot,
    Swap,
    Cu00,
    Cu01,
    Cu10,
    Cu11,
}

impl Builtin {
    pub const ALL: [Builtin; 18] = [
        Builtin::I,
        Builtin::X,
        Builtin::Y,
        Builtin::Z,
        Builtin::H,
        Builtin::X90,
        Builtin::Y90,
        Builtin::MX90,
        Builtin::MY90,
        Builtin::T,
        Builtin::S,
        Builtin::Cz,
        Builtin::Cnot,
        Builtin::Swap,
        Builtin::Cu00,
        Builtin::Cu01,
        Builtin::Cu10,
        Builtin::Cu11,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::I => "I",
            Builtin::X => "X",
            Builtin::Y => "Y",
            Builtin::Z => "Z",
            Builtin::H => "H",
            Builtin::X90 => "X90",
            Builtin::Y90 => "Y90",
            Builtin::MX90 => "mX90",
            Builtin::MY90 => "mY90",
            Builtin::T => "T",
            Builtin::S => "S",
            Builtin::Cz => "CZ",
            Builtin::Cnot => "CNOT",
            Builtin::Swap => "SWAP",
            Builtin::Cu00 => "CU00",
            Builtin::Cu01 => "CU01",
            Builtin::Cu10 => "CU10",
            Builtin::Cu11 => "CU11",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|b| b.name().eq_ignore_ascii_case(name))
    }

    pub fn unitary(self) -> Unitary {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let o = c(0.0, 0.0);
        let l = c(1.0, 0.0);
        let r = FRAC_1_SQRT_2;
        let single = |m: [[Complex64; 2]; 2]| Unitary::Single(m);
        // Two-qubit matrices act on |source target>, source as the high bit.
        let cphase = |marked: usize| {
            let mut m = [[o; 4]; 4];
            for (i, row) in m.iter_mut().enumerate() {
                row[i] = if i == marked { -l } else { l };
            }
            Unitary::Two(m)
        };
        match self {
            Builtin::I => single([[l, o], [o, l]]),
            Builtin::X => single([[o, l], [l, o]]),
            Builtin::Y => single([[o, c(0.0, -1.0)], [c(0.0, 1.0), o]]),
            Builtin::Z => single([[l, o], [o, -l]]),
            Builtin::H => single([[c(r, 0.0), c(r, 0.0)], [c(r, 0.0), c(-r, 0.0)]]),
            Builtin::X90 => single([[c(r, 0.0), c(0.0, -r)], [c(0.0, -r), c(r, 0.0)]]),
            Builtin::MX90 => single([[c(r, 0.0), c(0.0, r)], [c(0.0, r), c(r, 0.0)]]),
            Builtin::Y90 => single([[c(r, 0.0), c(-r, 0.0)], [c(r, 0.0), c(r, 0.0)]]),
            Builtin::MY90 => single([[c(r, 0.0), c(r, 0.0)], [c(-r, 0.0), c(r, 0.0)]]),
            Builtin::T => single([[l, o], [o, c(r, r)]]),
            Builtin::S => single([[l, o], [o, c(0.0, 1.0)]]),
            Builtin::Cz | Builtin::Cu11 => cphase(3),
            Builtin::Cu00 => cphase(0),
            Builtin::Cu01 => cphase(1),
            Builtin::Cu10 => cphase(2),
            Builtin::Cnot => {
                let mut m = [[o; 4]; 4];
                m[0][0] = l;
                m[1][1] = l;
                m[2][3] = l;
                m[3][2] = l;
                Unitary::Two(m)
            }
            Builtin::Swap => {
                let mut m = [[o; 4]; 4];
                m[0][0] = l;
                m[1][2] = l;
                m[2][1] = l;
                m[3][3] = l;
                Unitary::Two(m)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Unitary {
    Single([[Complex64; 2]; 2]),
    Two([[Complex64; 4]; 4]),
}

impl Unitary {
    pub fn kind(&self) -> OpKind {
        match self {
            Unitary::Single(_) => OpKind::Single,
            Unitary::Two(_) => OpKind::Two,
        }
    }

    fn rows(&self) -> Vec<Vec<Complex64>> {
        match self {
            Unitary::Single(m) => m.iter().map(|r| r.to_vec()).collect(),
            Unitary::Two(m) => m.iter().map(|r| r.to_vec()).collect(),
        }
    }

    /// Whether U^dagger U equals the identity within `tol` per entry.
    pub fn is_unitary(&self, tol: f64) -> bool {
        let m = self.rows();
        let n = m.len();
        (0..n).all(|i| {
            (0..n).all(|j| {
                let dot: Complex64 = (0..n).map(|k| m[k][i].conj() * m[k][j]).sum();
                let expected = if i == j { 1.0 } else { 0.0 };
                (dot - Complex64::new(expected, 0.0)).norm() <= tol
            })
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GateRole {
    Unitary(Unitary),
    /// Projective measurement in the Z basis.
    Measure,
    /// Reset to |0>.
    Prepare,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateDef {
    pub name: String,
    pub opcode: u16,
    pub role: GateRole,
    pub duration: u32,
}

/// Simulator meaning of each quantum operation, keyed by opcode.
#[derive(Debug, Clone, Default)]
pub struct GateSemantics {
    by_opcode: BTreeMap<u16, GateDef>,
}

impl GateSemantics {
    pub fn parse(text: &str, qmap: &OpcodeMap) -> Result<Self, ConfigError> {
        let mut sem = GateSemantics::default();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = strip_comment(raw).trim();
            if line.is_empty() {
                continue;
            }
            let def = parse_line(line, line_no, qmap)?;
            if sem.by_opcode.contains_key(&def.opcode) {
                return Err(ConfigError::new(line_no, format!("duplicate semantics for `{}`", def.name)));
            }
            sem.by_opcode.insert(def.opcode, def);
        }
        Ok(sem)
    }

    pub fn get(&self, opcode: u16) -> Option<&GateDef> {
        self.by_opcode.get(&opcode)
    }

    pub fn iter(&self) -> impl Iterator<Item = &GateDef> {
        self.by_opcode.values()
    }

    pub fn is_measurement(&self, opcode: u16) -> bool {
        matches!(self.get(opcode), Some(GateDef { role: GateRole::Measure, .. }))
    }
}

fn parse_line(line: &str, line_no: usize, qmap: &OpcodeMap) -> Result<GateDef, ConfigError> {
    let err = |msg: String| ConfigError::new(line_no, msg);
    let (keyword, rest) = line
        .split_once(char::is_whitespace)
        .ok_or_else(|| err(format!("malformed gate-semantics line `{line}`")))?;
    let rest = rest.trim_start();
    let (name, rest) = rest.split_once(char::is_whitespace).unwrap_or((rest, ""));
    let def = qmap
        .lookup(name)
        .ok_or_else(|| err(format!("`{name}` is not defined in the opcode map")))?;

    let mut kind = None;
    let mut unitary = None;
    let mut duration = None;
    for (key, value) in key_values(rest).map_err(|m| err(m))? {
        match key.to_ascii_lowercase().as_str() {
            "kind" => {
                kind = Some(match value.to_ascii_lowercase().as_str() {
                    "single" => OpKind::Single,
                    "two" => OpKind::Two,
                    other => return Err(err(format!("unknown kind `{other}`"))),
                })
            }
            "unitary" => unitary = Some(parse_unitary(&value).map_err(|m| err(m))?),
            "duration" => {
                let cycles: i64 = value
                    .parse()
                    .map_err(|_| err(format!("invalid duration `{value}`")))?;
                if cycles < 1 || cycles > u32::MAX as i64 {
                    return Err(err(format!("duration must be at least 1 cycle, got {cycles}")));
                }
                duration = Some(cycles as u32);
            }
            other => return Err(err(format!("unknown key `{other}`"))),
        }
    }
    let duration = duration.ok_or_else(|| err(format!("missing duration for `{name}`")))?;

    let role = match keyword.to_ascii_lowercase().as_str() {
        "gate" => {
            let kind = kind.ok_or_else(|| err(format!("missing kind for `{name}`")))?;
            let unitary = unitary.ok_or_else(|| err(format!("missing unitary for `{name}`")))?;
            if kind != def.kind {
                return Err(err(format!(
                    "`{name}` is {:?} in the opcode map but declared {kind:?}",
                    def.kind
                )));
            }
            if unitary.kind() != kind {
                return Err(err(format!("unitary size does not match kind of `{name}`")));
            }
            if !unitary.is_unitary(UNITARY_TOLERANCE) {
                return Err(err(format!("matrix for `{name}` is not unitary")));
            }
            GateRole::Unitary(unitary)
        }
        "measure" | "prep" => {
            if def.kind != OpKind::Single {
                return Err(err(format!("`{name}` must be a single-qubit operation")));
            }
            if kind.is_some_and(|k| k != OpKind::Single) || unitary.is_some() {
                return Err(err(format!("`{keyword}` takes only a duration")));
            }
            if keyword.eq_ignore_ascii_case("measure") {
                GateRole::Measure
            } else {
                GateRole::Prepare
            }
        }
        other => return Err(err(format!("unknown keyword `{other}`"))),
    };
    Ok(GateDef {
        name: def.name.clone(),
        opcode: def.opcode,
        role,
        duration,
    })
}

/// Splits `k=v k=v` where a value may be `matrix(...)` containing blanks.
fn key_values(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    let mut rest = text.trim();
    while !rest.is_empty() {
        let eq = rest
            .find('=')
            .ok_or_else(|| format!("expected key=value in `{rest}`"))?;
        let key = rest[..eq].trim();
        if key.is_empty() || key.contains(char::is_whitespace) {
            return Err(format!("malformed key in `{rest}`"));
        }
        let after = rest[eq + 1..].trim_start();
        let end = if let Some(open) = after.find('(').filter(|&i| !after[..i].contains(char::is_whitespace)) {
            let close = after[open..]
                .find(')')
                .ok_or_else(|| "unterminated matrix(...)".to_string())?;
            open + close + 1
        } else {
            after.find(char::is_whitespace).unwrap_or(after.len())
        };
        out.push((key.to_string(), after[..end].to_string()));
        rest = after[end..].trim_start();
    }
    Ok(out)
}

fn parse_unitary(value: &str) -> Result<Unitary, String> {
    let lower = value.to_ascii_lowercase();
    if let Some(body) = lower.strip_prefix("matrix(").and_then(|b| b.strip_suffix(')')) {
        let entries = body
            .split(',')
            .map(parse_complex)
            .collect::<Result<Vec<_>, _>>()?;
        match entries.len() {
            4 => Ok(Unitary::Single([[entries[0], entries[1]], [entries[2], entries[3]]])),
            16 => {
                let mut m = [[Complex64::new(0.0, 0.0); 4]; 4];
                for (i, e) in entries.into_iter().enumerate() {
                    m[i / 4][i % 4] = e;
                }
                Ok(Unitary::Two(m))
            }
            n => Err(format!("matrix needs 4 or 16 entries, got {n}")),
        }
    } else {
        Builtin::from_name(value)
            .map(Builtin::unitary)
            .ok_or_else(|| format!("unknown builtin unitary `{value}`"))
    }
}

/// `1`, `-0.5`, `0.7j`, `-j`, `0.5+0.5j`, `1e-3-2j`.
fn parse_complex(text: &str) -> Result<Complex64, String> {
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || format!("invalid complex number `{}`", text.trim());
    if t.is_empty() {
        return Err(bad());
    }
    let Some(imag_part) = t.strip_suffix('j') else {
        return t.parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(|_| bad());
    };
    // Split at the last sign that is not an exponent sign or the leading sign.
    let bytes = imag_part.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(i) => (&imag_part[..i], &imag_part[i..]),
        None => ("0", imag_part),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        s => s.parse::<f64>().map_err(|_| bad())?,
    };
    let re = re.parse::<f64>().map_err(|_| bad())?;
    Ok(Complex64::new(re, im))
}
