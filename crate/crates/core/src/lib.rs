//! Toolchain for the CC-Light eQASM instruction set: assembler,
//! disassembler, latency linter and a simulator of the full architectural
//! state including a seven-qubit state-vector device.

pub mod bits;
pub mod codec;
pub mod config;
pub mod disasm;
pub mod frontend;
pub mod vm;
