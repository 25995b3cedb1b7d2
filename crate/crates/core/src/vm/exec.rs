//! Classical instruction semantics, written against `BitString` in the same
//! shape as the instruction pseudo-code.

use crate::bits::BitString;
use crate::codec::CompFlag;

fn word(v: u32) -> BitString {
    BitString::from_uint(v as u64, 32).expect("32-bit value")
}

fn uint(b: &BitString, n: u32) -> u64 {
    b.uint_value(n).expect("width checked")
}

fn sint(b: &BitString, n: u32) -> i64 {
    b.sint_value(n).expect("width checked")
}

/// Keeps the low 32 bits of an integer result.
fn wrap32(v: i128) -> u32 {
    v.rem_euclid(1 << 32) as u32
}

pub fn add(rs: u32, rt: u32) -> u32 {
    wrap32(uint(&word(rs), 32) as i128 + uint(&word(rt), 32) as i128)
}

/// `UInt(Rs) + UInt(NOT(Rt)) + UInt(1)`
pub fn sub(rs: u32, rt: u32) -> u32 {
    wrap32(uint(&word(rs), 32) as i128 + uint(&word(rt).not(), 32) as i128 + 1)
}

pub fn and(rs: u32, rt: u32) -> u32 {
    uint(&word(rs).and(&word(rt)).expect("same width"), 32) as u32
}

pub fn or(rs: u32, rt: u32) -> u32 {
    uint(&word(rs).or(&word(rt)).expect("same width"), 32) as u32
}

pub fn xor(rs: u32, rt: u32) -> u32 {
    uint(&word(rs).xor(&word(rt)).expect("same width"), 32) as u32
}

pub fn not(rt: u32) -> u32 {
    uint(&word(rt).not(), 32) as u32
}

/// All twelve flags, indexed by code. Each predicate reads Rt against Rs.
pub fn compare(rs: u32, rt: u32) -> [bool; 12] {
    let (s, t) = (word(rs), word(rt));
    let (us, ut) = (uint(&s, 32), uint(&t, 32));
    let (ss, st) = (sint(&s, 32), sint(&t, 32));
    let mut flags = [false; 12];
    for f in CompFlag::ALL {
        flags[f.code() as usize] = match f {
            CompFlag::Always => true,
            CompFlag::Never => false,
            CompFlag::Eq => t == s,
            CompFlag::Ne => t != s,
            CompFlag::Ltu => ut < us,
            CompFlag::Geu => ut >= us,
            CompFlag::Leu => ut <= us,
            CompFlag::Gtu => ut > us,
            CompFlag::Lt => st < ss,
            CompFlag::Ge => st >= ss,
            CompFlag::Le => st <= ss,
            CompFlag::Gt => st > ss,
        };
    }
    flags
}

/// Taken-branch PC: `ToSBitStr(SInt(PC, 17) + SInt(Imm21[14:0] << 2, 17), 18)[16:0]`.
pub fn branch_target(pc: u32, imm21: &BitString) -> u32 {
    let pc17 = sint(&word(pc), 17);
    let off = imm21.slice(14, 0).and_then(|b| b.shl(2)).expect("21-bit immediate");
    let sum = pc17 + sint(&off, 17);
    let bits = BitString::from_sint(sum, 18).expect("sum of two 17-bit values fits 18 bits");
    uint(&bits.slice(16, 0).expect("18-bit value"), 17) as u32
}

/// Imm21 as stored for a decoded word offset.
pub fn imm21_of(offset: i32) -> BitString {
    BitString::from_sint(offset as i64, 21).expect("decoded offsets fit 21 bits")
}

pub fn ldi(imm: i32) -> u32 {
    let imm20 = BitString::from_sint(imm as i64, 20).expect("20-bit immediate");
    uint(&imm20.sign_extend(32).expect("widen"), 32) as u32
}

/// `Imm15 << 17 | Rs[16:0]`
pub fn ldui(rs: u32, imm: u16) -> u32 {
    let hi = BitString::from_uint(imm as u64, 15).expect("15-bit immediate");
    let lo = word(rs).slice(16, 0).expect("low bits");
    uint(&hi.concat(&lo).expect("32 bits"), 32) as u32
}

/// `UInt(Rt, 32) + SignExt(Imm10, 32)`, modulo 2^32.
pub fn effective_address(rt: u32, imm10: i16) -> u32 {
    let off = BitString::from_sint(imm10 as i64, 10)
        .and_then(|b| b.sign_extend(32))
        .expect("10-bit offset");
    wrap32(uint(&word(rt), 32) as i128 + uint(&off, 32) as i128)
}

/// The 20 low bits of a GPR used by QWAITR.
pub fn wait_amount(rs: u32) -> u32 {
    uint(&word(rs).slice(19, 0).expect("low bits"), 20) as u32
}
