//! Acceptance criteria 1 to 10. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

mod common;

use std::collections::BTreeSet;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::TestRunner;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use eqasm::bits::BitString;
use eqasm::codec::{decode, encode, BundleWord, CompFlag, DecodeMode, Instruction, QuantumSlot};
use eqasm::config::{defaults, OpcodeMap, Topology};
use eqasm::frontend::{self, lint_latency, parser};
use eqasm::vm::{self, format_duration, Machine, VmConfig};

use common::*;

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn program_text(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("programs").join(name);
    fs::read_to_string(path).unwrap()
}

fn small_config() -> VmConfig {
    VmConfig {
        memory_bytes: 64,
        ..vm_config()
    }
}

fn assemble(src: &str, cfg: &VmConfig) -> Result<Vec<u32>, String> {
    frontend::assemble(src, &cfg.qmap, &cfg.topology)
        .map(|a| a.words)
        .map_err(|e| e.to_string())
}

/// 1. Encoding goldens against an independent bit-packing oracle.
fn encoding_goldens() -> Check {
    let qmap = appendix_qmap();
    let cw = |name: &str| qmap.lookup(name).unwrap().opcode;
    let cases: [(Instruction, u32, u32); 5] = [
        (Instruction::Nop, pack_fields(&[(0b0000000, 7), (0, 25)]), 0x0000_0000),
        (
            Instruction::Add { rd: 1, rs: 2, rt: 3 },
            pack_fields(&[(0b0011110, 7), (1, 5), (2, 5), (3, 5), (0, 10)]),
            0x3C11_0C00,
        ),
        (
            Instruction::Ldi { rd: 0, imm: -1 },
            pack_fields(&[(0b0010110, 7), (0, 5), (0xFFFFF, 20)]),
            0x2C0F_FFFF,
        ),
        (
            Instruction::Br { flag: CompFlag::Always, offset: 2 },
            pack_fields(&[(0b0000001, 7), (2, 21), (0, 4)]),
            0x0200_0020,
        ),
        (
            Instruction::Bundle(BundleWord {
                pi: 1,
                slots: [
                    QuantumSlot { opcode: cw("cw_01"), target: 0 },
                    QuantumSlot { opcode: cw("cw_02"), target: 1 },
                ],
            }),
            pack_fields(&[(1, 1), (0x9, 9), (0, 5), (0xA, 9), (1, 5), (1, 3)]),
            0x8240_0A09,
        ),
    ];
    for (instr, oracle, golden) in &cases {
        ensure!(oracle == golden, "oracle {oracle:#010x} != golden {golden:#010x}");
        let word = encode(instr).map_err(|e| e.to_string())?;
        ensure!(word == *golden, "{instr:?} encodes to {word:#010x}, expected {golden:#010x}");
    }
    let src = "NOP\nADD r1, r2, r3\nLDI r0, -1\nBR ALWAYS, 2\n1, cw_01 s0 | cw_02 s1\n";
    let words = frontend::assemble(src, &qmap, &Topology::default())
        .map_err(|e| e.to_string())?
        .words;
    let expected: Vec<u32> = cases.iter().map(|c| c.2).collect();
    ensure!(words == expected, "assembled {words:x?}");
    Ok("5 golden words match oracle, codec and assembler".into())
}

/// 2. decode(encode(i)) == i over random instructions.
fn codec_round_trip() -> Check {
    const CASES: usize = 10_000;
    let mut runner = TestRunner::deterministic();
    let strategy = instruction();
    let mut mnemonics = BTreeSet::new();
    let mut bundles = 0;
    for _ in 0..CASES {
        let instr = strategy.new_tree(&mut runner).unwrap().current();
        match instr.mnemonic() {
            Some(m) => {
                mnemonics.insert(m.name());
            }
            None => bundles += 1,
        }
        let word = encode(&instr).map_err(|e| format!("{instr:?}: {e}"))?;
        let back = decode(word, DecodeMode::Strict).map_err(|e| format!("{word:#010x}: {e}"))?;
        ensure!(back == instr, "{instr:?} -> {word:#010x} -> {back:?}");
    }
    ensure!(mnemonics.len() == 20, "only {} mnemonics generated", mnemonics.len());
    ensure!(bundles > 0, "no bundle words generated");
    Ok(format!("{CASES} instructions, 20 mnemonics, {bundles} bundle words"))
}

fn to_bits(b: &BitString) -> Vec<bool> {
    (0..b.width()).map(|i| b.bit(i).unwrap()).collect()
}

fn check_helpers(m: u32, x: u64, n_ext: u32) -> Result<(), String> {
    let b = BitString::new(m, x).unwrap();
    let bits = pseudo::bits_of(x, m as usize);
    for n in 1..=m {
        let (u, s) = (b.uint_value(n).unwrap() as i128, b.sint_value(n).unwrap() as i128);
        ensure!(u == pseudo::uint(&bits, n as usize), "UInt({x:#x}<{m}>, {n})");
        ensure!(s == pseudo::sint(&bits, n as usize), "SInt({x:#x}<{m}>, {n})");
    }
    let u = pseudo::uint(&bits, m as usize);
    let s = pseudo::sint(&bits, m as usize);
    ensure!(
        to_bits(&BitString::from_uint(u as u64, m).unwrap()) == pseudo::to_ubitstr(u, m as usize),
        "ToUBitStr({u}, {m})"
    );
    ensure!(
        to_bits(&BitString::from_sint(s as i64, m).unwrap()) == pseudo::to_sbitstr(s, m as usize),
        "ToSBitStr({s}, {m})"
    );
    ensure!(
        to_bits(&b.zero_extend(n_ext).unwrap()) == pseudo::zero_ext(&bits, n_ext as usize),
        "ZeroExt({x:#x}<{m}>, {n_ext})"
    );
    ensure!(
        to_bits(&b.sign_extend(n_ext).unwrap()) == pseudo::sign_ext(&bits, n_ext as usize),
        "SignExt({x:#x}<{m}>, {n_ext})"
    );
    Ok(())
}

/// 3. Helper functions against a bit-level transcription.
fn helper_conformance() -> Check {
    let mut checked = 0u64;
    for m in 1..=12u32 {
        for x in 0..1u64 << m {
            for n_ext in [m, m + 1, 12.max(m), 32] {
                check_helpers(m, x, n_ext)?;
                checked += 1;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20_000 {
        let m = rng.gen_range(13..=32);
        let x = rng.gen::<u64>() & ((1u64 << m) - 1);
        let n_ext = rng.gen_range(m..=32);
        check_helpers(m, x, n_ext)?;
        checked += 1;
    }
    Ok(format!("{checked} (string, extension) combinations, exhaustive to 12 bits"))
}

/// 4. CMP through the simulator against the flag predicates.
fn cmp_truth_table() -> Check {
    let cfg = small_config();
    let word = encode(&Instruction::Cmp { rs: 1, rt: 2 }).unwrap();
    let check = |rs: u32, rt: u32| -> Result<(), String> {
        let mut m = Machine::new(&[word], &cfg, 0, 0);
        m.state.gpr[1] = rs;
        m.state.gpr[2] = rt;
        m.step().map_err(|e| e.to_string())?;
        let (us, ut, ss, st) = (rs as u64, rt as u64, rs as i32 as i64, rt as i32 as i64);
        let table = [
            ("ALWAYS", true),
            ("NEVER", false),
            ("EQ", rt == rs),
            ("NE", rt != rs),
            ("LTU", ut < us),
            ("GEU", ut >= us),
            ("LEU", ut <= us),
            ("GTU", ut > us),
            ("LT", st < ss),
            ("GE", st >= ss),
            ("LE", st <= ss),
            ("GT", st > ss),
        ];
        for (name, want) in table {
            let got = m.state.flag(CompFlag::from_name(name).unwrap());
            ensure!(got == want, "Rs={rs:#x} Rt={rt:#x}: {name}={got}, expected {want}");
        }
        ensure!(m.state.pc == 4, "pc {}", m.state.pc);
        Ok(())
    };
    let edges = [0u32, 1, 0x7FFF_FFFF, 0x8000_0000, 0xFFFF_FFFF];
    for &a in &edges {
        for &b in &edges {
            check(a, b)?;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..10_000 {
        check(rng.gen(), rng.gen())?;
    }
    Ok("25 boundary pairs and 10000 random pairs".into())
}

/// 5. Macro table goldens and BLTU equivalence.
fn macro_table() -> Check {
    let rows = [
        ("GOTO lab", "BR ALWAYS, lab"),
        ("BRN lab", "BR NEVER, lab"),
        ("BEQ r1, r2, lab", "CMP r1, r2\nBR EQ, lab"),
        ("BNE r1, r2, lab", "CMP r1, r2\nBR NE, lab"),
        ("BLT r1, r2, lab", "CMP r1, r2\nBR LT, lab"),
        ("BLE r1, r2, lab", "CMP r1, r2\nBR LE, lab"),
        ("BGT r1, r2, lab", "CMP r1, r2\nBR GT, lab"),
        ("BGE r1, r2, lab", "CMP r1, r2\nBR GE, lab"),
        ("BLTU r1, r2, lab", "CMP r1, r2\nBR LTU, lab"),
        ("BLEU r1, r2, lab", "CMP r1, r2\nBR LEU, lab"),
        ("BGTU r1, r2, lab", "CMP r1, r2\nBR GTU, lab"),
        ("BGEU r1, r2, lab", "CMP r1, r2\nBR GEU, lab"),
        ("MOV r3, r4", "LDI r3, 0\nADD r3, r4, r3"),
        ("SHL1 r3, r4", "ADD r3, r4, r4"),
        ("MULT2 r3, r4", "ADD r3, r4, r4"),
        ("NAND r3, r4, r5", "AND r3, r4, r5\nNOT r3, r3"),
        ("NOR r3, r4, r5", "OR r3, r4, r5\nNOT r3, r3"),
        ("XNOR r3, r4, r5", "XOR r3, r4, r5\nNOT r3, r3"),
    ];
    let kinds = |p: frontend::Program| p.statements.into_iter().map(|s| s.kind).collect::<Vec<_>>();
    let cfg = small_config();
    for (mac, expansion) in rows {
        let expanded = frontend::parse_source(mac).map_err(|e| e.to_string())?;
        let written = parser::parse_source(expansion).map_err(|e| e.to_string())?;
        ensure!(kinds(expanded) == kinds(written), "`{mac}` does not expand to `{expansion}`");
        let a = assemble(&format!("lab: {mac}\n"), &cfg)?;
        let b = assemble(&format!("lab: {expansion}\n"), &cfg)?;
        ensure!(a == b, "`{mac}` assembles to {a:x?}, expected {b:x?}");
    }

    let expanded = assemble("LDI r9, 0\nBLTU r1, r2, over\nLDI r9, 1\nover: STOP\n", &cfg)?;
    let manual = [
        encode(&Instruction::Ldi { rd: 9, imm: 0 }).unwrap(),
        encode(&Instruction::Cmp { rs: 1, rt: 2 }).unwrap(),
        encode(&Instruction::Br { flag: CompFlag::Ltu, offset: 2 }).unwrap(),
        encode(&Instruction::Ldi { rd: 9, imm: 1 }).unwrap(),
        encode(&Instruction::Stop).unwrap(),
    ];
    let run = |image: &[u32], regs: &[u32; 32]| {
        let mut m = Machine::new(image, &cfg, 0, 0);
        m.state.gpr = *regs;
        m.run();
        (m.state.pc, m.state.gpr, m.state.compflags)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut taken = 0;
    for _ in 0..1_000 {
        let mut regs: [u32; 32] = rng.gen();
        if rng.gen_bool(0.2) {
            regs[2] = regs[1];
        }
        let (a, b) = (run(&expanded, &regs), run(&manual, &regs));
        ensure!(a == b, "registers {regs:x?} diverge");
        taken += (a.1[9] == 0) as u32;
    }
    ensure!(taken > 0 && taken < 1_000, "branch outcome never varied");
    Ok(format!("{} table rows, 1000 BLTU register states", rows.len()))
}

/// 6. The opcode-map listing.
fn qmap_conformance() -> Check {
    let text = defaults::APPENDIX_QMAP;
    let listed = text.lines().filter(|l| l.trim_start().starts_with("def_q")).count();
    let map = OpcodeMap::parse(text).map_err(|e| e.to_string())?;
    ensure!(map.len() == listed, "parsed {} entries, listing has {listed}", map.len());
    ensure!(listed == 60, "listing has {listed} entries");
    let spots = [
        ("prepz", 0x2),
        ("MeasZ", 0x06),
        ("cw_01", 0x9),
        ("cw_31", 0x27),
        ("C1_cw_06", 0x2e),
        ("fl_cw_07", 0x87),
    ];
    for (name, opcode) in spots {
        let got = map.lookup(name).map(|d| d.opcode);
        ensure!(got == Some(opcode), "{name} = {got:?}, expected {opcode:#x}");
    }
    ensure!(
        OpcodeMap::parse("def_q_arg_st[\"big\"] = 512").is_err(),
        "opcode 512 accepted"
    );
    ensure!(OpcodeMap::parse("def_q_arg_st[\"ok\"] = 511").is_ok(), "opcode 511 rejected");
    Ok(format!("{listed} entries, spot values match, opcode 512 rejected"))
}

/// 7. Latency linter on the feedback program.
fn latency_linter() -> Check {
    let cfg = vm_config();
    let findings = |src: &str| -> Result<usize, String> {
        let asm = frontend::assemble(src, &cfg.qmap, &cfg.topology).map_err(|e| e.to_string())?;
        Ok(lint_latency(&asm.program, &cfg.semantics).len())
    };
    let verbatim = program_text("feedback.qisa");
    let before_fmr = "      NOP               # two insns compensate for latency of MSMT -> FMR\n";
    let before_br = "      NOP               # one insn compensate for latency of CMP -> BR\n";
    ensure!(verbatim.contains(before_fmr) && verbatim.contains(before_br), "sample changed");
    let n0 = findings(&verbatim)?;
    let n1 = findings(&verbatim.replace(before_fmr, ""))?;
    let n2 = findings(&verbatim.replace(before_br, ""))?;
    ensure!((n0, n1, n2) == (0, 1, 1), "findings {n0}, {n1}, {n2}; expected 0, 1, 1");
    Ok("verbatim 0, without FMR filler 1, without CMP filler 1".into())
}

/// Final amplitudes of the two-qubit circuit, basis index `2 * q2 + q0`.
fn grover_oracle(marked: usize) -> [f64; 4] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let hh = |v: [f64; 4]| -> [f64; 4] {
        let mut out = [0.0; 4];
        for (r, o) in out.iter_mut().enumerate() {
            for (c, a) in v.iter().enumerate() {
                let sign = if (r & c).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
                *o += sign * h * h * a;
            }
        }
        out
    };
    let flip = |mut v: [f64; 4], k: usize| {
        v[k] = -v[k];
        v
    };
    hh(flip(hh(flip(hh([1.0, 0.0, 0.0, 0.0]), marked)), 0))
}

/// 8. Grover for every oracle and Born-rule sampling.
fn quantum_end_to_end() -> Check {
    let cfg = vm_config();
    for (marked, oracle) in ["cu00", "cu01", "cu10", "cu11"].iter().enumerate() {
        let amps = grover_oracle(marked);
        let p: Vec<f64> = amps.iter().map(|a| a * a).collect();
        ensure!((p[marked] - 1.0).abs() < 1e-12, "oracle model gives {p:?}");
        let image = assemble(&program_text(&format!("grover_{oracle}.qisa")), &cfg)?;
        let (q2, q0) = ((marked >> 1) as u32, (marked & 1) as u32);
        for r in vm::run_shots(&image, &cfg, 2024, 100) {
            ensure!(r.error.is_none(), "{oracle}: {:?}", r.error);
            let got = (r.state.gpr[2], r.state.gpr[0]);
            ensure!(got == (q2, q0), "{oracle} shot {}: measured {got:?}", r.report.shot);
            ensure!(r.state.qmrr[2].value as u32 == q2 && r.state.qmrr[0].value as u32 == q0, "qmrr");
        }
    }
    let image = assemble(&program_text("hadamard.qisa"), &cfg)?;
    let ones: u32 = vm::run_shots(&image, &cfg, 0, 1000).iter().map(|r| r.state.gpr[1]).sum();
    let freq = ones as f64 / 1000.0;
    ensure!((0.45..=0.55).contains(&freq), "Hadamard frequency {freq}");
    Ok(format!("4 oracles x 100 shots exact; Hadamard frequency {freq:.3}"))
}

/// 9. Timing of QWAIT + bundle.
fn timing() -> Check {
    let cfg = vm_config();
    let src = program_text("timing.qisa");
    ensure!(src.contains("QWAIT  10000") && src.contains("3, cz t0"), "sample changed");
    let cz = cfg.qmap.lookup("cz").unwrap().opcode;
    let duration = cfg.semantics.get(cz).unwrap().duration;
    ensure!(duration == 2, "cz duration {duration}");
    let r = vm::run(&assemble(&src, &cfg)?, &cfg, 0);
    ensure!(r.state.quantum_clock == 10_005, "clock {}", r.state.quantum_clock);
    ensure!(format_duration(10_000) == "200 µs", "renders {}", format_duration(10_000));
    let r = vm::run(&assemble("QWAIT 10000\nSTOP\n", &cfg)?, &cfg, 0);
    let text = r.report.render();
    ensure!(text.contains("10000 cycles (200 µs)"), "report: {text}");
    Ok("clock 10005; 10000 cycles render as 200 µs".into())
}

/// 10. Byte-identical binaries, traces and reports.
fn determinism() -> Check {
    let cfg = VmConfig {
        trace: true,
        debug_amplitudes: true,
        ..vm_config()
    };
    let names = [
        "feedback.qisa",
        "grover_cu10.qisa",
        "hadamard.qisa",
        "t1.qisa",
        "timing.qisa",
        "all_qubits.qisa",
    ];
    for name in names {
        let src = program_text(name);
        let (a, b) = (assemble(&src, &cfg)?, assemble(&src, &cfg)?);
        ensure!(a == b, "{name}: binaries differ");
        for seed in [0, 7, u64::MAX] {
            let (x, y) = (vm::run(&a, &cfg, seed), vm::run(&b, &cfg, seed));
            ensure!(x.trace_jsonl() == y.trace_jsonl(), "{name}: traces differ");
            ensure!(x.report.render() == y.report.render(), "{name}: reports differ");
        }
    }
    Ok(format!("{} programs x 3 seeds", names.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 10] = [
        ("encoding goldens", encoding_goldens),
        ("codec round trip", codec_round_trip),
        ("helper-function conformance", helper_conformance),
        ("CMP truth table", cmp_truth_table),
        ("macro table", macro_table),
        ("qmap conformance", qmap_conformance),
        ("latency linter", latency_linter),
        ("quantum end-to-end", quantum_end_to_end),
        ("timing", timing),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {:>2} {name}: PASS ({detail})", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} {name}: FAIL ({why})", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
