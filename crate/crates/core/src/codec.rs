//! Bit-exact encoding and decoding of CC-Light eQASM instruction words.
//!
//! Single-format words carry a 7-bit opcode in bits 31..25 (bit 31 is always
//! 0). Quantum bundle words set bit 31 and hold two `(opcode9, target5)`
//! slots plus a 3-bit pre-interval:
//!
//! ```text
//!  31 | 30..22   | 21..17  | 16..8    | 7..3    | 2..0
//!  1  | opcode 0 | S/T 0   | opcode 1 | S/T 1   | PI
//! ```
//!
//! The printed opcode tables give QWAIT and SMIS the same pattern
//! (`0100000`), with QWAITR at `0100001`. This codec moves QWAIT/QWAITR to
//! `0010000`/`0010001` and keeps SMIS/SMIT as printed; see [`OPCODE_TABLE`].

use std::fmt;

use thiserror::Error;

use crate::bits::{BitString, BitsError};
use crate::config::{Topology, NUM_QUBITS};

/// Instruction memory is addressed with 17-bit byte addresses.
pub const MAX_IMAGE_BYTES: usize = 1 << 17;
pub const MAX_IMAGE_WORDS: usize = MAX_IMAGE_BYTES / 4;

/// Word offsets a branch can reach (the hardware reads `imm21[14:0]`).
pub const BRANCH_OFFSET_MIN: i32 = -(1 << 14);
pub const BRANCH_OFFSET_MAX: i32 = (1 << 14) - 1;

pub const NUM_GPRS: u8 = 32;
pub const NUM_TARGET_REGS: u8 = 32;
pub const MAX_PI: u8 = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CompFlag {
    Always,
    Never,
    Eq,
    Ne,
    Ltu,
    Geu,
    Leu,
    Gtu,
    Lt,
    Ge,
    Le,
    Gt,
}

impl CompFlag {
    pub const ALL: [CompFlag; 12] = [
        CompFlag::Always,
        CompFlag::Never,
        CompFlag::Eq,
        CompFlag::Ne,
        CompFlag::Ltu,
        CompFlag::Geu,
        CompFlag::Leu,
        CompFlag::Gtu,
        CompFlag::Lt,
        CompFlag::Ge,
        CompFlag::Le,
        CompFlag::Gt,
    ];

    /// 4-bit field value; table order.
    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Self::ALL.get(code as usize).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            CompFlag::Always => "ALWAYS",
            CompFlag::Never => "NEVER",
            CompFlag::Eq => "EQ",
            CompFlag::Ne => "NE",
            CompFlag::Ltu => "LTU",
            CompFlag::Geu => "GEU",
            CompFlag::Leu => "LEU",
            CompFlag::Gtu => "GTU",
            CompFlag::Lt => "LT",
            CompFlag::Ge => "GE",
            CompFlag::Le => "LE",
            CompFlag::Gt => "GT",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(name))
    }
}

impl fmt::Display for CompFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mnemonic {
    Nop,
    Br,
    Stop,
    Ld,
    St,
    Cmp,
    Qwait,
    Qwaitr,
    Fbr,
    Fmr,
    Ldi,
    Ldui,
    Or,
    Xor,
    And,
    Not,
    Add,
    Sub,
    Smis,
    Smit,
}

/// Bits 31..25 of each single-format instruction.
pub const OPCODE_TABLE: [(Mnemonic, u8); 20] = [
    (Mnemonic::Nop, 0b000_0000),
    (Mnemonic::Br, 0b000_0001),
    (Mnemonic::Stop, 0b000_1000),
    (Mnemonic::Ld, 0b000_1001),
    (Mnemonic::St, 0b000_1010),
    (Mnemonic::Cmp, 0b000_1101),
    (Mnemonic::Qwait, 0b001_0000),
    (Mnemonic::Qwaitr, 0b001_0001),
    (Mnemonic::Fbr, 0b001_0100),
    (Mnemonic::Fmr, 0b001_0101),
    (Mnemonic::Ldi, 0b001_0110),
    (Mnemonic::Ldui, 0b001_0111),
    (Mnemonic::Or, 0b001_1000),
    (Mnemonic::Xor, 0b001_1001),
    (Mnemonic::And, 0b001_1010),
    (Mnemonic::Not, 0b001_1011),
    (Mnemonic::Add, 0b001_1110),
    (Mnemonic::Sub, 0b001_1111),
    (Mnemonic::Smis, 0b010_0000),
    (Mnemonic::Smit, 0b010_1000),
];

impl Mnemonic {
    pub const ALL: [Mnemonic; 20] = {
        let mut all = [Mnemonic::Nop; 20];
        let mut i = 0;
        while i < 20 {
            all[i] = OPCODE_TABLE[i].0;
            i += 1;
        }
        all
    };

    pub fn opcode(self) -> u8 {
        OPCODE_TABLE
            .iter()
            .find(|(m, _)| *m == self)
            .map(|(_, op)| *op)
            .expect("every mnemonic has an opcode")
    }

    pub fn from_opcode(opcode: u8) -> Option<Self> {
        OPCODE_TABLE
            .iter()
            .find(|(_, op)| *op == opcode)
            .map(|(m, _)| *m)
    }

    pub fn name(self) -> &'static str {
        match self {
            Mnemonic::Nop => "NOP",
            Mnemonic::Br => "BR",
            Mnemonic::Stop => "STOP",
            Mnemonic::Ld => "LD",
            Mnemonic::St => "ST",
            Mnemonic::Cmp => "CMP",
            Mnemonic::Qwait => "QWAIT",
            Mnemonic::Qwaitr => "QWAITR",
            Mnemonic::Fbr => "FBR",
            Mnemonic::Fmr => "FMR",
            Mnemonic::Ldi => "LDI",
            Mnemonic::Ldui => "LDUI",
            Mnemonic::Or => "OR",
            Mnemonic::Xor => "XOR",
            Mnemonic::And => "AND",
            Mnemonic::Not => "NOT",
            Mnemonic::Add => "ADD",
            Mnemonic::Sub => "SUB",
            Mnemonic::Smis => "SMIS",
            Mnemonic::Smit => "SMIT",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(name))
    }
}

impl fmt::Display for Mnemonic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One `(opcode, target register)` slot of a bundle word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct QuantumSlot {
    pub opcode: u16,
    pub target: u8,
}

impl QuantumSlot {
    pub const QNOP: QuantumSlot = QuantumSlot {
        opcode: 0,
        target: 0,
    };

    pub fn is_qnop(&self) -> bool {
        self.opcode == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BundleWord {
    pub pi: u8,
    pub slots: [QuantumSlot; 2],
}

/// A decoded instruction word. Register fields are indices (0..32),
/// `Br::offset` is a signed word offset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Instruction {
    Nop,
    Stop,
    Add { rd: u8, rs: u8, rt: u8 },
    Sub { rd: u8, rs: u8, rt: u8 },
    And { rd: u8, rs: u8, rt: u8 },
    Or { rd: u8, rs: u8, rt: u8 },
    Xor { rd: u8, rs: u8, rt: u8 },
    Not { rd: u8, rt: u8 },
    Cmp { rs: u8, rt: u8 },
    Br { flag: CompFlag, offset: i32 },
    Fbr { flag: CompFlag, rd: u8 },
    Fmr { rd: u8, qubit: u8 },
    Ld { rd: u8, rt: u8, offset: i16 },
    St { rs: u8, rt: u8, offset: i16 },
    Ldi { rd: u8, imm: i32 },
    Ldui { rd: u8, rs: u8, imm: u16 },
    Qwait { cycles: u32 },
    Qwaitr { rs: u8 },
    Smis { sd: u8, mask: u8 },
    Smit { td: u8, mask: u16 },
    Bundle(BundleWord),
}

impl Instruction {
    /// `None` for bundle words.
    pub fn mnemonic(&self) -> Option<Mnemonic> {
        Some(match self {
            Instruction::Nop => Mnemonic::Nop,
            Instruction::Stop => Mnemonic::Stop,
            Instruction::Add { .. } => Mnemonic::Add,
            Instruction::Sub { .. } => Mnemonic::Sub,
            Instruction::And { .. } => Mnemonic::And,
            Instruction::Or { .. } => Mnemonic::Or,
            Instruction::Xor { .. } => Mnemonic::Xor,
            Instruction::Not { .. } => Mnemonic::Not,
            Instruction::Cmp { .. } => Mnemonic::Cmp,
            Instruction::Br { .. } => Mnemonic::Br,
            Instruction::Fbr { .. } => Mnemonic::Fbr,
            Instruction::Fmr { .. } => Mnemonic::Fmr,
            Instruction::Ld { .. } => Mnemonic::Ld,
            Instruction::St { .. } => Mnemonic::St,
            Instruction::Ldi { .. } => Mnemonic::Ldi,
            Instruction::Ldui { .. } => Mnemonic::Ldui,
            Instruction::Qwait { .. } => Mnemonic::Qwait,
            Instruction::Qwaitr { .. } => Mnemonic::Qwaitr,
            Instruction::Smis { .. } => Mnemonic::Smis,
            Instruction::Smit { .. } => Mnemonic::Smit,
            Instruction::Bundle(_) => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodeError {
    #[error("field `{field}` value {value} does not fit {width} bits")]
    FieldOverflow {
        field: &'static str,
        value: i64,
        width: u32,
    },
    #[error("branch offset {0} words outside the signed 15-bit range")]
    BranchOffset(i64),
    #[error("branch distance {0} bytes is not a multiple of 4")]
    UnalignedBranch(i64),
    #[error("qubit {0} outside 0..6")]
    InvalidQubit(u8),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("unknown opcode {0:#09b}")]
    UnknownOpcode(u8),
    #[error("unknown comparison flag code {0}")]
    UnknownFlag(u8),
    #[error("FMR qubit index {0} outside 0..6")]
    InvalidQubit(u8),
    #[error("{field} register index {value} outside 0..31")]
    RegisterOutOfRange { field: &'static str, value: u8 },
    #[error("reserved bits set in word {0:#010x}")]
    ReservedBits(u32),
    #[error("branch immediate {0:#x} is not a sign-extended 15-bit offset")]
    BranchImmediate(u32),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MaskError {
    #[error("empty qubit list")]
    Empty,
    #[error("qubit {0} outside 0..6")]
    QubitOutOfRange(i64),
    #[error("qubit pair ({0}, {1}) not in topology")]
    PairNotInTopology(i64, i64),
}

/// Reserved-bit handling during decode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DecodeMode {
    /// Reserved bits are ignored.
    #[default]
    Permissive,
    /// Reserved bits must be zero; branch immediates must be sign-extended.
    Strict,
}

fn bits_err(field: &'static str, value: i64, width: u32) -> impl Fn(BitsError) -> EncodeError {
    move |_| EncodeError::FieldOverflow {
        field,
        value,
        width,
    }
}

fn ufield(field: &'static str, value: u64, width: u32) -> Result<BitString, EncodeError> {
    BitString::from_uint(value, width).map_err(bits_err(field, value as i64, width))
}

fn sfield(field: &'static str, value: i64, width: u32) -> Result<BitString, EncodeError> {
    BitString::from_sint(value, width).map_err(bits_err(field, value, width))
}

fn reg(field: &'static str, value: u8, width: u32) -> Result<BitString, EncodeError> {
    if value >= NUM_GPRS {
        return Err(EncodeError::FieldOverflow {
            field,
            value: value as i64,
            width: 5,
        });
    }
    ufield(field, value as u64, width)
}

fn zeros(width: u32) -> BitString {
    BitString::zeros(width).expect("nonzero width")
}

/// Concatenates fields MSb-first into a 32-bit word.
fn pack(fields: &[BitString]) -> u32 {
    let word = fields
        .iter()
        .skip(1)
        .try_fold(fields[0], |acc, f| acc.concat(f))
        .expect("instruction layouts are at most 32 bits");
    debug_assert_eq!(word.width(), 32, "instruction layout must total 32 bits");
    word.uint_value(32).expect("32-bit word") as u32
}

/// Sign-extends a word offset into the 21-bit branch immediate.
pub fn branch_imm21(offset_words: i64) -> Result<BitString, EncodeError> {
    if !(BRANCH_OFFSET_MIN as i64..=BRANCH_OFFSET_MAX as i64).contains(&offset_words) {
        return Err(EncodeError::BranchOffset(offset_words));
    }
    Ok(BitString::from_sint(offset_words, 15)
        .and_then(|b| b.sign_extend(21))
        .expect("range checked"))
}

/// Converts a byte distance between a branch and its target into `imm21`.
pub fn encode_branch_offset(byte_delta: i64) -> Result<BitString, EncodeError> {
    if byte_delta % 4 != 0 {
        return Err(EncodeError::UnalignedBranch(byte_delta));
    }
    branch_imm21(byte_delta / 4)
}

pub fn encode(instr: &Instruction) -> Result<u32, EncodeError> {
    let op = |m: Mnemonic| ufield("opcode", m.opcode() as u64, 7).expect("7-bit opcode");
    let word = match *instr {
        Instruction::Nop => pack(&[op(Mnemonic::Nop), zeros(25)]),
        Instruction::Stop => pack(&[op(Mnemonic::Stop), zeros(25)]),
        Instruction::Add { rd, rs, rt }
        | Instruction::Sub { rd, rs, rt }
        | Instruction::And { rd, rs, rt }
        | Instruction::Or { rd, rs, rt }
        | Instruction::Xor { rd, rs, rt } => pack(&[
            op(instr.mnemonic().expect("single format")),
            reg("rd", rd, 5)?,
            reg("rs", rs, 5)?,
            reg("rt", rt, 5)?,
            zeros(10),
        ]),
        Instruction::Not { rd, rt } => pack(&[
            op(Mnemonic::Not),
            reg("rd", rd, 5)?,
            zeros(5),
            reg("rt", rt, 5)?,
            zeros(10),
        ]),
        Instruction::Cmp { rs, rt } => pack(&[
            op(Mnemonic::Cmp),
            zeros(5),
            reg("rs", rs, 5)?,
            reg("rt", rt, 5)?,
            zeros(10),
        ]),
        Instruction::Br { flag, offset } => pack(&[
            op(Mnemonic::Br),
            branch_imm21(offset as i64)?,
            ufield("flag", flag.code() as u64, 4)?,
        ]),
        Instruction::Fbr { flag, rd } => pack(&[
            op(Mnemonic::Fbr),
            reg("rd", rd, 5)?,
            zeros(16),
            ufield("flag", flag.code() as u64, 4)?,
        ]),
        Instruction::Fmr { rd, qubit } => {
            if qubit >= NUM_QUBITS {
                return Err(EncodeError::InvalidQubit(qubit));
            }
            pack(&[
                op(Mnemonic::Fmr),
                reg("rd", rd, 5)?,
                zeros(17),
                ufield("qi", qubit as u64, 3)?,
            ])
        }
        Instruction::Ld { rd, rt, offset } => pack(&[
            op(Mnemonic::Ld),
            reg("rd", rd, 5)?,
            zeros(5),
            reg("rt", rt, 5)?,
            sfield("imm10", offset as i64, 10)?,
        ]),
        Instruction::St { rs, rt, offset } => pack(&[
            op(Mnemonic::St),
            zeros(5),
            reg("rs", rs, 5)?,
            reg("rt", rt, 5)?,
            sfield("imm10", offset as i64, 10)?,
        ]),
        Instruction::Ldi { rd, imm } => pack(&[
            op(Mnemonic::Ldi),
            reg("rd", rd, 5)?,
            sfield("imm20", imm as i64, 20)?,
        ]),
        Instruction::Ldui { rd, rs, imm } => pack(&[
            op(Mnemonic::Ldui),
            reg("rd", rd, 5)?,
            reg("rs", rs, 5)?,
            ufield("imm15", imm as u64, 15)?,
        ]),
        Instruction::Qwait { cycles } => pack(&[
            op(Mnemonic::Qwait),
            zeros(5),
            ufield("imm20", cycles as u64, 20)?,
        ]),
        Instruction::Qwaitr { rs } => pack(&[
            op(Mnemonic::Qwaitr),
            zeros(5),
            reg("rs", rs, 5)?,
            zeros(15),
        ]),
        Instruction::Smis { sd, mask } => pack(&[
            op(Mnemonic::Smis),
            target_reg("sd", sd, 6)?,
            zeros(12),
            ufield("imm7", mask as u64, 7)?,
        ]),
        Instruction::Smit { td, mask } => pack(&[
            op(Mnemonic::Smit),
            target_reg("td", td, 6)?,
            zeros(3),
            ufield("imm16", mask as u64, 16)?,
        ]),
        Instruction::Bundle(b) => pack(&[
            ufield("format", 1, 1)?,
            ufield("q_opcode_0", b.slots[0].opcode as u64, 9)?,
            target_reg("target_0", b.slots[0].target, 5)?,
            ufield("q_opcode_1", b.slots[1].opcode as u64, 9)?,
            target_reg("target_1", b.slots[1].target, 5)?,
            ufield("pi", b.pi as u64, 3)?,
        ]),
    };
    Ok(word)
}

fn target_reg(field: &'static str, value: u8, width: u32) -> Result<BitString, EncodeError> {
    if value >= NUM_TARGET_REGS {
        return Err(EncodeError::FieldOverflow {
            field,
            value: value as i64,
            width: 5,
        });
    }
    ufield(field, value as u64, width)
}

/// Reserved ranges `(high, low)` per single-format mnemonic.
fn reserved_ranges(m: Mnemonic) -> &'static [(u32, u32)] {
    match m {
        Mnemonic::Nop | Mnemonic::Stop => &[(24, 0)],
        Mnemonic::Add | Mnemonic::Sub | Mnemonic::And | Mnemonic::Or | Mnemonic::Xor => &[(9, 0)],
        Mnemonic::Not => &[(19, 15), (9, 0)],
        Mnemonic::Cmp => &[(24, 20), (9, 0)],
        Mnemonic::Br | Mnemonic::Ldi | Mnemonic::Ldui => &[],
        Mnemonic::Fbr => &[(19, 4)],
        Mnemonic::Fmr => &[(19, 3)],
        Mnemonic::Ld => &[(19, 15)],
        Mnemonic::St => &[(24, 20)],
        Mnemonic::Qwait => &[(24, 20)],
        Mnemonic::Qwaitr => &[(24, 20), (14, 0)],
        Mnemonic::Smis => &[(18, 7)],
        Mnemonic::Smit => &[(18, 16)],
    }
}

pub fn decode(word: u32, mode: DecodeMode) -> Result<Instruction, DecodeError> {
    let w = BitString::from_uint(word as u64, 32).expect("32-bit word");
    let field = |h: u32, l: u32| w.slice(h, l).expect("in-range slice").uint_value(h - l + 1).expect("width");
    let sfield = |h: u32, l: u32| w.slice(h, l).expect("in-range slice").sint_value(h - l + 1).expect("width");
    let gpr = |h: u32| field(h, h - 4) as u8;

    if w.bit(31).expect("bit 31") {
        let target = |h: u32, name: &'static str| -> Result<u8, DecodeError> {
            let v = field(h, h - 4) as u8;
            if v >= NUM_TARGET_REGS {
                return Err(DecodeError::RegisterOutOfRange { field: name, value: v });
            }
            Ok(v)
        };
        return Ok(Instruction::Bundle(BundleWord {
            pi: field(2, 0) as u8,
            slots: [
                QuantumSlot {
                    opcode: field(30, 22) as u16,
                    target: target(21, "target_0")?,
                },
                QuantumSlot {
                    opcode: field(16, 8) as u16,
                    target: target(7, "target_1")?,
                },
            ],
        }));
    }

    let opcode = field(31, 25) as u8;
    let m = Mnemonic::from_opcode(opcode).ok_or(DecodeError::UnknownOpcode(opcode))?;
    if mode == DecodeMode::Strict && reserved_ranges(m).iter().any(|&(h, l)| field(h, l) != 0) {
        return Err(DecodeError::ReservedBits(word));
    }
    let flag = || {
        let code = field(3, 0) as u8;
        CompFlag::from_code(code).ok_or(DecodeError::UnknownFlag(code))
    };
    let target_reg = |name: &'static str| {
        let v = field(24, 19) as u8;
        if v >= NUM_TARGET_REGS {
            Err(DecodeError::RegisterOutOfRange { field: name, value: v })
        } else {
            Ok(v)
        }
    };
    let (rd, rs, rt) = (gpr(24), gpr(19), gpr(14));
    Ok(match m {
        Mnemonic::Nop => Instruction::Nop,
        Mnemonic::Stop => Instruction::Stop,
        Mnemonic::Add => Instruction::Add { rd, rs, rt },
        Mnemonic::Sub => Instruction::Sub { rd, rs, rt },
        Mnemonic::And => Instruction::And { rd, rs, rt },
        Mnemonic::Or => Instruction::Or { rd, rs, rt },
        Mnemonic::Xor => Instruction::Xor { rd, rs, rt },
        Mnemonic::Not => Instruction::Not { rd, rt },
        Mnemonic::Cmp => Instruction::Cmp { rs, rt },
        Mnemonic::Br => {
            let imm21 = w.slice(24, 4).expect("imm21");
            let offset = imm21.sint_value(21).expect("width");
            if mode == DecodeMode::Strict && offset != imm21.sint_value(15).expect("width") {
                return Err(DecodeError::BranchImmediate(imm21.bits() as u32));
            }
            Instruction::Br {
                flag: flag()?,
                offset: offset as i32,
            }
        }
        Mnemonic::Fbr => Instruction::Fbr { flag: flag()?, rd },
        Mnemonic::Fmr => {
            let qubit = field(2, 0) as u8;
            if qubit >= NUM_QUBITS {
                return Err(DecodeError::InvalidQubit(qubit));
            }
            Instruction::Fmr { rd, qubit }
        }
        Mnemonic::Ld => Instruction::Ld {
            rd,
            rt,
            offset: sfield(9, 0) as i16,
        },
        Mnemonic::St => Instruction::St {
            rs,
            rt,
            offset: sfield(9, 0) as i16,
        },
        Mnemonic::Ldi => Instruction::Ldi {
            rd,
            imm: sfield(19, 0) as i32,
        },
        Mnemonic::Ldui => Instruction::Ldui {
            rd,
            rs,
            imm: field(14, 0) as u16,
        },
        Mnemonic::Qwait => Instruction::Qwait {
            cycles: field(19, 0) as u32,
        },
        Mnemonic::Qwaitr => Instruction::Qwaitr { rs },
        Mnemonic::Smis => Instruction::Smis {
            sd: target_reg("sd")?,
            mask: field(6, 0) as u8,
        },
        Mnemonic::Smit => Instruction::Smit {
            td: target_reg("td")?,
            mask: field(15, 0) as u16,
        },
    })
}

/// Bit `i` set iff qubit `i` is listed.
pub fn compute_smis_mask(qubits: &[i64]) -> Result<u8, MaskError> {
    if qubits.is_empty() {
        return Err(MaskError::Empty);
    }
    qubits.iter().try_fold(0u8, |mask, &q| {
        if !(0..NUM_QUBITS as i64).contains(&q) {
            return Err(MaskError::QubitOutOfRange(q));
        }
        Ok(mask | 1 << q)
    })
}

/// Bit `pair_index(p)` set for each listed pair.
pub fn compute_smit_mask(pairs: &[(i64, i64)], topology: &Topology) -> Result<u16, MaskError> {
    if pairs.is_empty() {
        return Err(MaskError::Empty);
    }
    pairs.iter().try_fold(0u16, |mask, &(s, t)| {
        for q in [s, t] {
            if !(0..NUM_QUBITS as i64).contains(&q) {
                return Err(MaskError::QubitOutOfRange(q));
            }
        }
        let idx = topology
            .pair_index(s as u8, t as u8)
            .ok_or(MaskError::PairNotInTopology(s, t))?;
        Ok(mask | 1 << idx)
    })
}

/// Qubits selected by an SMIS mask, ascending.
pub fn smis_qubits(mask: u8) -> Vec<u8> {
    (0..NUM_QUBITS).filter(|q| mask >> q & 1 == 1).collect()
}

/// Pairs selected by an SMIT mask, in mask-bit order.
pub fn smit_pairs(mask: u16, topology: &Topology) -> Vec<(u8, u8)> {
    (0..16u8)
        .filter(|i| mask >> i & 1 == 1)
        .filter_map(|i| topology.pair(i))
        .collect()
}

/// Splits a bundle into words of two slots. The first word carries `pi`,
/// continuation words carry 0; an odd slot count is padded with QNOP.
pub fn pack_bundle(pi: u8, ops: &[QuantumSlot]) -> Vec<BundleWord> {
    assert!(pi <= MAX_PI, "PI {pi} outside 0..7");
    assert!(!ops.is_empty(), "bundle without operations");
    ops.chunks(2)
        .enumerate()
        .map(|(i, chunk)| BundleWord {
            pi: if i == 0 { pi } else { 0 },
            slots: [chunk[0], chunk.get(1).copied().unwrap_or(QuantumSlot::QNOP)],
        })
        .collect()
}

/// Number of words a bundle of `n` operations occupies.
pub fn bundle_words(n: usize) -> usize {
    n.div_ceil(2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ByteOrder {
    #[default]
    Little,
    Big,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ImageError {
    #[error("image length {0} is not a multiple of 4")]
    Truncated(usize),
    #[error("image of {0} bytes exceeds the {MAX_IMAGE_BYTES}-byte instruction memory")]
    TooLarge(usize),
    #[error("word at byte offset {offset:#x}: {source}")]
    Decode {
        offset: usize,
        #[source]
        source: DecodeError,
    },
}

pub fn words_to_bytes(words: &[u32], order: ByteOrder) -> Vec<u8> {
    words
        .iter()
        .flat_map(|w| match order {
            ByteOrder::Little => w.to_le_bytes(),
            ByteOrder::Big => w.to_be_bytes(),
        })
        .collect()
}

pub fn bytes_to_words(bytes: &[u8], order: ByteOrder) -> Result<Vec<u32>, ImageError> {
    if bytes.len() % 4 != 0 {
        return Err(ImageError::Truncated(bytes.len()));
    }
    if bytes.len() > MAX_IMAGE_BYTES {
        return Err(ImageError::TooLarge(bytes.len()));
    }
    Ok(bytes
        .chunks_exact(4)
        .map(|c| {
            let b = [c[0], c[1], c[2], c[3]];
            match order {
                ByteOrder::Little => u32::from_le_bytes(b),
                ByteOrder::Big => u32::from_be_bytes(b),
            }
        })
        .collect())
}

pub fn decode_image(words: &[u32], mode: DecodeMode) -> Result<Vec<Instruction>, ImageError> {
    words
        .iter()
        .enumerate()
        .map(|(i, &w)| decode(w, mode).map_err(|source| ImageError::Decode { offset: 4 * i, source }))
        .collect()
}
