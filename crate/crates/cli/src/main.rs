//! `eqasm`: assemble, disassemble, lint and run eQASM programs.
//!
//! Exit codes: 0 success, 1 I/O or configuration error (or lint findings
//! under `--strict`), 2 parse or resolve error, 3 encode error or bad image,
//! 4 runtime error, 5 step limit reached.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use eqasm::codec::{bytes_to_words, words_to_bytes, ByteOrder, DecodeMode, ImageError};
use eqasm::config::{defaults, GateSemantics, OpcodeMap, Topology};
use eqasm::disasm::disassemble;
use eqasm::frontend::{self, lint_latency, AsmError, Stage};
use eqasm::vm::{self, RunStatus, VmConfig, DEFAULT_MAX_STEPS};

#[derive(Parser)]
#[command(name = "eqasm", version, about = "Toolchain for the CC-Light eQASM instruction set")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Assemble source into a binary image.
    Asm(AsmArgs),
    /// Disassemble a binary image into source.
    Disasm(DisasmArgs),
    /// Check a program against the latency rules.
    Lint(LintArgs),
    /// Execute a program on the simulator.
    Run(RunArgs),
}

#[derive(Args)]
struct MapArgs {
    /// Quantum opcode map.
    #[arg(long)]
    qmap: PathBuf,
    /// Qubit pair ordering for SMIT masks; the built-in ordering when omitted.
    #[arg(long)]
    topology: Option<PathBuf>,
}

#[derive(Args)]
struct AsmArgs {
    input: PathBuf,
    #[command(flatten)]
    maps: MapArgs,
    /// Output image; defaults to the input with a `.bin` extension.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Write an address / word / source listing.
    #[arg(long)]
    listing: Option<PathBuf>,
    #[arg(long)]
    big_endian: bool,
}

#[derive(Args)]
struct DisasmArgs {
    input: PathBuf,
    #[command(flatten)]
    maps: MapArgs,
    /// Output text; standard output when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Fail on words that do not decode cleanly instead of escaping them.
    #[arg(long)]
    strict: bool,
    #[arg(long)]
    big_endian: bool,
}

#[derive(Args)]
struct LintArgs {
    input: PathBuf,
    #[command(flatten)]
    maps: MapArgs,
    /// Gate semantics used to recognise measurements.
    #[arg(long)]
    gates: Option<PathBuf>,
    /// Exit with status 1 when there are findings.
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct RunArgs {
    /// Source (`.qisa`) or binary image (`.bin`).
    input: PathBuf,
    #[command(flatten)]
    maps: MapArgs,
    #[arg(long)]
    gates: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
    max_steps: u64,
    /// Write one JSON record per retired instruction.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write the report here instead of standard output.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Downgrade overlapping operations on a qubit to warnings.
    #[arg(long)]
    allow_overlap: bool,
    /// Include the final state vector in the report.
    #[arg(long)]
    amplitudes: bool,
    #[arg(long)]
    big_endian: bool,
}

/// An error with the process exit status it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::new(1, format!("error: {e:#}"))
    }
}

type Outcome = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Asm(a) => cmd_asm(a),
        Command::Disasm(a) => cmd_disasm(a),
        Command::Lint(a) => cmd_lint(a),
        Command::Run(a) => cmd_run(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("{}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    Ok(fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?)
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), Failure> {
    Ok(fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))?)
}

fn config_failure(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::new(1, format!("{}:{e}", path.display()))
}

fn load_qmap(path: &Path) -> Result<OpcodeMap, Failure> {
    let map = OpcodeMap::parse(&read_text(path)?).map_err(|e| Failure::new(1, format!("{}:{}: error: {}", path.display(), e.line, e.message)))?;
    for w in map.warnings() {
        eprintln!("{}:{}: warning: {}", path.display(), w.line, w.message);
    }
    Ok(map)
}

fn load_topology(path: Option<&Path>) -> Result<Topology, Failure> {
    match path {
        None => Ok(Topology::default()),
        Some(p) => Topology::parse(&read_text(p)?).map_err(|e| Failure::new(1, format!("{}:{}: error: {}", p.display(), e.line, e.message))),
    }
}

fn load_gates(path: Option<&Path>, qmap: &OpcodeMap) -> Result<GateSemantics, Failure> {
    match path {
        Some(p) => GateSemantics::parse(&read_text(p)?, qmap)
            .map_err(|e| Failure::new(1, format!("{}:{}: error: {}", p.display(), e.line, e.message))),
        None => {
            eprintln!("note: using the built-in gate semantics (pass --gates to override)");
            GateSemantics::parse(defaults::GATES, qmap).map_err(|e| {
                config_failure(
                    Path::new("<built-in gates>"),
                    format!("{}: error: {} (the opcode map lacks a built-in operation; pass --gates)", e.line, e.message),
                )
            })
        }
    }
}

fn topology_notice(maps: &MapArgs) {
    if maps.topology.is_none() {
        eprintln!("note: using the built-in qubit pair ordering (pass --topology to override)");
    }
}

fn asm_failure(file: &Path, e: &AsmError) -> Failure {
    let code = if e.stage == Stage::Encode { 3 } else { 2 };
    Failure::new(code, e.render(&file.display().to_string()))
}

fn byte_order(big_endian: bool) -> ByteOrder {
    if big_endian {
        ByteOrder::Big
    } else {
        ByteOrder::Little
    }
}

fn image_failure(file: &Path, e: &ImageError) -> Failure {
    Failure::new(3, format!("{}: error: {e}", file.display()))
}

fn read_image(path: &Path, big_endian: bool) -> Result<Vec<u32>, Failure> {
    let bytes = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    bytes_to_words(&bytes, byte_order(big_endian)).map_err(|e| image_failure(path, &e))
}

fn cmd_asm(a: AsmArgs) -> Outcome {
    let qmap = load_qmap(&a.maps.qmap)?;
    let topology = load_topology(a.maps.topology.as_deref())?;
    let source = read_text(&a.input)?;
    let asm = frontend::assemble(&source, &qmap, &topology).map_err(|e| asm_failure(&a.input, &e))?;
    let out = a.output.clone().unwrap_or_else(|| a.input.with_extension("bin"));
    write_file(&out, words_to_bytes(&asm.words, byte_order(a.big_endian)))?;
    if let Some(listing) = &a.listing {
        write_file(listing, asm.listing(&source))?;
    }
    Ok(0)
}

fn cmd_disasm(a: DisasmArgs) -> Outcome {
    let qmap = load_qmap(&a.maps.qmap)?;
    let topology = load_topology(a.maps.topology.as_deref())?;
    let words = read_image(&a.input, a.big_endian)?;
    let mode = if a.strict { DecodeMode::Strict } else { DecodeMode::Permissive };
    let text = disassemble(&words, &qmap, &topology, mode).map_err(|e| image_failure(&a.input, &e))?;
    match &a.output {
        Some(p) => write_file(p, text)?,
        None => print!("{text}"),
    }
    Ok(0)
}

fn cmd_lint(a: LintArgs) -> Outcome {
    let qmap = load_qmap(&a.maps.qmap)?;
    let topology = load_topology(a.maps.topology.as_deref())?;
    let semantics = load_gates(a.gates.as_deref(), &qmap)?;
    let source = read_text(&a.input)?;
    let asm = frontend::assemble(&source, &qmap, &topology).map_err(|e| asm_failure(&a.input, &e))?;
    let findings = lint_latency(&asm.program, &semantics);
    let file = a.input.display().to_string();
    for d in &findings {
        eprintln!("{}", d.render(&file));
    }
    Ok(if a.strict && !findings.is_empty() { 1 } else { 0 })
}

fn cmd_run(a: RunArgs) -> Outcome {
    let qmap = load_qmap(&a.maps.qmap)?;
    topology_notice(&a.maps);
    let topology = load_topology(a.maps.topology.as_deref())?;
    let semantics = load_gates(a.gates.as_deref(), &qmap)?;
    let image = if a.input.extension().is_some_and(|e| e == "bin") {
        read_image(&a.input, a.big_endian)?
    } else {
        let source = read_text(&a.input)?;
        frontend::assemble(&source, &qmap, &topology)
            .map_err(|e| asm_failure(&a.input, &e))?
            .words
    };
    let config = VmConfig {
        allow_overlap: a.allow_overlap,
        max_steps: a.max_steps,
        trace: a.trace.is_some(),
        debug_amplitudes: a.amplitudes,
        ..VmConfig::new(qmap, semantics, topology)
    };
    let result = vm::run(&image, &config, a.seed);
    if let Some(path) = &a.trace {
        write_file(path, result.trace_jsonl())?;
    }
    let report = result.report.render();
    match &a.report {
        Some(p) => write_file(p, report)?,
        None => print!("{report}"),
    }
    Ok(match result.status {
        RunStatus::Stopped => 0,
        RunStatus::Error => {
            if let Some(e) = &result.error {
                eprintln!("{}: runtime error: {e}", a.input.display());
            }
            4
        }
        RunStatus::MaxSteps => {
            eprintln!("{}: stopped after {} steps without reaching STOP", a.input.display(), a.max_steps);
            5
        }
    })
}
