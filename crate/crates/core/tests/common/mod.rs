//! Shared oracles and generators for the integration tests.
#![allow(dead_code)]

use proptest::prelude::*;

use eqasm::codec::{BundleWord, CompFlag, Instruction, QuantumSlot};
use eqasm::config::{defaults, GateSemantics, OpcodeMap, Topology};
use eqasm::vm::VmConfig;

pub fn default_qmap() -> OpcodeMap {
    OpcodeMap::parse(defaults::QMAP).unwrap()
}

pub fn appendix_qmap() -> OpcodeMap {
    OpcodeMap::parse(defaults::APPENDIX_QMAP).unwrap()
}

pub fn vm_config() -> VmConfig {
    let qmap = default_qmap();
    let semantics = GateSemantics::parse(defaults::GATES, &qmap).unwrap();
    VmConfig::new(qmap, semantics, Topology::default())
}

/// Bit-level transcription of the instruction-set helper functions.
/// Bit strings are `Vec<bool>`, index 0 the least significant bit.
pub mod pseudo {
    pub fn bits_of(value: u64, m: usize) -> Vec<bool> {
        (0..m).map(|i| value >> i & 1 == 1).collect()
    }

    pub fn uint(x: &[bool], n: usize) -> i128 {
        assert!(x.len() >= n);
        let mut result = 0i128;
        for i in 0..n {
            if x[i] {
                result += 1i128 << i;
            }
        }
        result
    }

    pub fn sint(x: &[bool], n: usize) -> i128 {
        assert!(x.len() >= n);
        let mut result = 0i128;
        for i in 0..n.saturating_sub(1) {
            if x[i] {
                result += 1i128 << i;
            }
        }
        if x[n - 1] {
            result -= 1i128 << (n - 1);
        }
        result
    }

    /// The top-bit test reads `>=`; with a strict `>` the value 2^(N-1)
    /// would lose its top bit.
    pub fn to_ubitstr(mut int_val: i128, n: usize) -> Vec<bool> {
        assert!(0 <= int_val && int_val < 1i128 << n);
        let mut result = vec![false; n];
        if int_val >= 1i128 << (n - 1) {
            result[n - 1] = true;
            int_val -= 1i128 << (n - 1);
        }
        for r in result.iter_mut().take(n - 1) {
            *r = int_val % 2 == 1;
            int_val = (int_val - *r as i128) / 2;
        }
        result
    }

    pub fn to_sbitstr(mut int_val: i128, n: usize) -> Vec<bool> {
        assert!(-(1i128 << (n - 1)) <= int_val && int_val < 1i128 << (n - 1));
        let mut result = vec![false; n];
        if int_val < 0 {
            result[n - 1] = true;
            int_val += 1i128 << n;
        }
        for r in result.iter_mut().take(n - 1) {
            *r = int_val % 2 == 1;
            int_val = (int_val - *r as i128) / 2;
        }
        result
    }

    pub fn zero_ext(x: &[bool], n: usize) -> Vec<bool> {
        assert!(x.len() <= n);
        let mut result = vec![false; n];
        result[..x.len()].copy_from_slice(x);
        result
    }

    pub fn sign_ext(x: &[bool], n: usize) -> Vec<bool> {
        assert!(x.len() <= n);
        let m = x.len();
        let mut result = vec![false; n];
        result[..m].copy_from_slice(x);
        for r in result.iter_mut().skip(m) {
            *r = x[m - 1];
        }
        result
    }
}

/// Packs `(value, width)` fields MSb-first by writing binary digits.
pub fn pack_fields(fields: &[(u64, usize)]) -> u32 {
    let text: String = fields.iter().map(|&(v, w)| format!("{v:0w$b}")).collect();
    assert_eq!(text.len(), 32, "fields must total 32 bits: {fields:?}");
    u32::from_str_radix(&text, 2).unwrap()
}

// ---- random instructions ----

fn reg() -> impl Strategy<Value = u8> {
    0u8..32
}

pub fn comp_flag() -> impl Strategy<Value = CompFlag> {
    (0u8..12).prop_map(|c| CompFlag::from_code(c).unwrap())
}

pub fn slot() -> impl Strategy<Value = QuantumSlot> {
    prop_oneof![
        1 => Just(QuantumSlot::QNOP),
        6 => (1u16..512, 0u8..32).prop_map(|(opcode, target)| QuantumSlot { opcode, target }),
    ]
}

pub fn bundle() -> impl Strategy<Value = BundleWord> {
    (0u8..8, slot(), slot()).prop_map(|(pi, a, b)| BundleWord { pi, slots: [a, b] })
}

/// Any well-formed instruction, all twenty single-format mnemonics and
/// bundle words.
pub fn instruction() -> impl Strategy<Value = Instruction> {
    use Instruction::*;
    let single = prop_oneof![
        Just(Nop),
        Just(Stop),
        (reg(), reg(), reg()).prop_map(|(rd, rs, rt)| Add { rd, rs, rt }),
        (reg(), reg(), reg()).prop_map(|(rd, rs, rt)| Sub { rd, rs, rt }),
        (reg(), reg(), reg()).prop_map(|(rd, rs, rt)| And { rd, rs, rt }),
        (reg(), reg(), reg()).prop_map(|(rd, rs, rt)| Or { rd, rs, rt }),
        (reg(), reg(), reg()).prop_map(|(rd, rs, rt)| Xor { rd, rs, rt }),
        (reg(), reg()).prop_map(|(rd, rt)| Not { rd, rt }),
        (reg(), reg()).prop_map(|(rs, rt)| Cmp { rs, rt }),
        (comp_flag(), -(1i32 << 14)..(1 << 14)).prop_map(|(flag, offset)| Br { flag, offset }),
        (comp_flag(), reg()).prop_map(|(flag, rd)| Fbr { flag, rd }),
        (reg(), 0u8..7).prop_map(|(rd, qubit)| Fmr { rd, qubit }),
        (reg(), reg(), -512i16..512).prop_map(|(rd, rt, offset)| Ld { rd, rt, offset }),
        (reg(), reg(), -512i16..512).prop_map(|(rs, rt, offset)| St { rs, rt, offset }),
        (reg(), -(1i32 << 19)..(1 << 19)).prop_map(|(rd, imm)| Ldi { rd, imm }),
        (reg(), reg(), 0u16..(1 << 15)).prop_map(|(rd, rs, imm)| Ldui { rd, rs, imm }),
        (0u32..(1 << 20)).prop_map(|cycles| Qwait { cycles }),
        reg().prop_map(|rs| Qwaitr { rs }),
        (reg(), 0u8..128).prop_map(|(sd, mask)| Smis { sd, mask }),
        (reg(), any::<u16>()).prop_map(|(td, mask)| Smit { td, mask }),
    ];
    prop_oneof![5 => single, 1 => bundle().prop_map(Bundle)]
}

// ---- random programs ----

const SINGLE_OPS: [&str; 10] = ["x", "y", "h", "x90", "my90", "MeasZ", "prepz", "cw_01", "cw_08", "i"];
const TWO_OPS: [&str; 5] = ["cz", "cnot", "cu10", "fl_cw_00", "swap"];
const ALU: [&str; 5] = ["ADD", "SUB", "AND", "OR", "XOR"];
const MACROS_3: [&str; 4] = ["BEQ", "BNE", "BLTU", "BGE"];
const FLAGS: [&str; 12] = [
    "ALWAYS", "NEVER", "EQ", "NE", "LTU", "GEU", "LEU", "GTU", "LT", "GE", "LE", "GT",
];

fn line(labels: usize) -> impl Strategy<Value = String> {
    let label = move || (0..labels).prop_map(|l| format!("lab{l}"));
    let qop = prop_oneof![
        3 => (0..SINGLE_OPS.len(), 0u8..32).prop_map(|(i, s)| format!("{} s{s}", SINGLE_OPS[i])),
        2 => (0..TWO_OPS.len(), 0u8..32).prop_map(|(i, t)| format!("{} t{t}", TWO_OPS[i])),
        1 => Just("qnop".to_string()),
    ];
    let pairs = Topology::default().pairs().to_vec();
    let bundle = (0u8..8, proptest::collection::vec(qop, 1..=4)).prop_map(|(pi, ops)| format!("{pi}, {}", ops.join(" | ")));
    let single = prop_oneof![
        (0..ALU.len(), reg(), reg(), reg()).prop_map(|(i, d, s, t)| format!("{} r{d}, r{s}, r{t}", ALU[i])),
        (reg(), reg()).prop_map(|(d, t)| format!("NOT r{d}, r{t}")),
        (reg(), reg()).prop_map(|(s, t)| format!("CMP r{s}, r{t}")),
        (0..12usize, label()).prop_map(|(f, l)| format!("BR {}, {l}", FLAGS[f])),
        (0..12usize, reg()).prop_map(|(f, d)| format!("FBR {}, r{d}", FLAGS[f])),
        (reg(), 0u8..7).prop_map(|(d, q)| format!("FMR r{d}, q{q}")),
        (reg(), reg(), -512i32..512).prop_map(|(d, t, o)| format!("LD r{d}, r{t}({o})")),
        (reg(), reg(), -512i32..512).prop_map(|(s, t, o)| format!("ST r{s}, r{t}({o})")),
        (reg(), -(1i32 << 19)..(1 << 19)).prop_map(|(d, i)| format!("LDI r{d}, {i}")),
        (reg(), reg(), 0i32..(1 << 15)).prop_map(|(d, s, i)| format!("LDUI r{d}, r{s}, {i}")),
        (0u32..(1 << 20)).prop_map(|c| format!("QWAIT {c}")),
        Just("QWAIT delay".to_string()),
        reg().prop_map(|s| format!("QWAITR r{s}")),
        (reg(), proptest::collection::btree_set(0u8..7, 1..=7)).prop_map(|(s, qs)| {
            let list: Vec<String> = qs.iter().map(u8::to_string).collect();
            format!("SMIS s{s}, {{{}}}", list.join(", "))
        }),
        (reg(), proptest::collection::btree_set(0..pairs.len(), 1..=4)).prop_map(move |(t, ps)| {
            let list: Vec<String> = ps.iter().map(|&i| format!("({}, {})", pairs[i].0, pairs[i].1)).collect();
            format!("SMIT t{t}, {{{}}}", list.join(", "))
        }),
        (0..MACROS_3.len(), reg(), reg(), label()).prop_map(|(i, s, t, l)| format!("{} r{s}, r{t}, {l}", MACROS_3[i])),
        (reg(), reg()).prop_map(|(d, s)| format!("MOV r{d}, r{s}")),
        (reg(), reg(), reg()).prop_map(|(d, s, t)| format!("NAND r{d}, r{s}, r{t}")),
        Just("NOP".to_string()),
        Just("STOP".to_string()),
    ];
    prop_oneof![6 => single, 1 => bundle]
}

/// A valid program: a constant alias, random instructions and every label
/// it branches to placed somewhere in the body.
pub fn program() -> impl Strategy<Value = String> {
    (1usize..4).prop_flat_map(|labels| {
        (
            proptest::collection::vec(line(labels), 1..40),
            proptest::collection::vec(any::<prop::sample::Index>(), labels),
        )
            .prop_map(move |(mut lines, spots)| {
                for (l, spot) in spots.iter().enumerate() {
                    let at = spot.index(lines.len() + 1);
                    lines.insert(at, format!("lab{l}:"));
                }
                let mut text = String::from(".def_sym delay 20\n");
                for l in lines {
                    text.push_str(&l);
                    text.push('\n');
                }
                text
            })
    })
}

/// Rewrites letters with a per-character case pattern.
pub fn recase(text: &str, pattern: &[bool]) -> String {
    text.chars()
        .enumerate()
        .map(|(i, c)| {
            if pattern.is_empty() || pattern[i % pattern.len()] {
                c.to_ascii_uppercase()
            } else {
                c.to_ascii_lowercase()
            }
        })
        .collect()
}
